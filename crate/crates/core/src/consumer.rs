//! Consumer-side interest construction in the three IBAC modes.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rand::{CryptoRng, RngCore};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::crypto::{
    encrypt_group_id, obfuscate_enc, obfuscate_hash, sign_payload, CryptoError, GroupKeyMaterial,
    ObfuscationKey, ProducerPublicKey,
};
use crate::message::{Authenticator, AuthorizationPayload, Interest};
use crate::name::{suffix, Component, MessageName, Name, NameError, ObfuscatedName, SchemeTag};
use crate::wire::{encode_name, EncodeError};

/// Which protections an interest carries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IbacMode {
    /// Obfuscated name and group id; no replay protection.
    ObfuscateOnly,
    /// Obfuscated name and a signed nonce/timestamp payload.
    Full,
    /// Cleartext name with the signed payload.
    AuthOnly,
}

impl IbacMode {
    pub const ALL: [IbacMode; 3] = [Self::ObfuscateOnly, Self::Full, Self::AuthOnly];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::ObfuscateOnly => "obfuscate_only",
            Self::Full => "full",
            Self::AuthOnly => "auth_only",
        }
    }

    pub fn obfuscates(self) -> bool {
        self != Self::AuthOnly
    }

    pub fn authenticates(self) -> bool {
        self != Self::ObfuscateOnly
    }
}

impl fmt::Display for IbacMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for IbacMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| format!("unknown mode {s:?}"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ObfuscationScheme {
    Enc,
    Hash,
}

impl ObfuscationScheme {
    pub fn tag(self) -> SchemeTag {
        match self {
            Self::Enc => SchemeTag::Enc,
            Self::Hash => SchemeTag::Hash,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Enc => "enc",
            Self::Hash => "hash",
        }
    }
}

impl fmt::Display for ObfuscationScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConsumerError {
    #[error(transparent)]
    Name(#[from] NameError),
    #[error(transparent)]
    Crypto(#[from] CryptoError),
    #[error(transparent)]
    Encode(#[from] EncodeError),
}

/// A group member's view for building interests.
#[derive(Debug, Clone)]
pub struct ConsumerContext {
    group: GroupKeyMaterial,
    producer_public: Option<ProducerPublicKey>,
    mode: IbacMode,
    scheme: ObfuscationScheme,
    content_keys: BTreeMap<Vec<Component>, ObfuscationKey>,
}

impl ConsumerContext {
    pub fn new(group: GroupKeyMaterial, mode: IbacMode, scheme: ObfuscationScheme) -> Self {
        Self {
            group,
            producer_public: None,
            mode,
            scheme,
            content_keys: BTreeMap::new(),
        }
    }

    /// Encrypt the group id to this producer key in every interest.
    pub fn with_producer_public(mut self, pk: ProducerPublicKey) -> Self {
        self.producer_public = Some(pk);
        self
    }

    /// The same context with different group key material and plaintext
    /// group ids.
    pub fn with_group(&self, group: GroupKeyMaterial) -> Self {
        Self {
            group,
            producer_public: None,
            ..self.clone()
        }
    }

    /// Registers the content-scoped hash key a producer handed out for
    /// content shared by several groups.
    pub fn add_content_key(&mut self, name: &Name, key: ObfuscationKey) {
        self.content_keys.insert(name.components().to_vec(), key);
    }

    pub fn group(&self) -> &GroupKeyMaterial {
        &self.group
    }

    pub fn mode(&self) -> IbacMode {
        self.mode
    }

    pub fn scheme(&self) -> ObfuscationScheme {
        self.scheme
    }

    pub fn producer_public(&self) -> Option<&ProducerPublicKey> {
        self.producer_public.as_ref()
    }

    fn obfuscation_key_for(&self, name: &Name) -> &ObfuscationKey {
        match self.scheme {
            ObfuscationScheme::Hash => self
                .content_keys
                .get(name.components())
                .unwrap_or(self.group.obfuscation_key()),
            ObfuscationScheme::Enc => self.group.obfuscation_key(),
        }
    }

    /// The name an interest for `name` carries in this context.
    pub fn message_name(
        &self,
        prefix: &[Component],
        name: &Name,
    ) -> Result<MessageName, ConsumerError> {
        if !self.mode.obfuscates() {
            if name.components().len() < prefix.len()
                || name.components()[..prefix.len()] != *prefix
            {
                return Err(NameError::PrefixMismatch.into());
            }
            return Ok(MessageName::clear(name));
        }
        let rest = suffix(name, prefix)?;
        let k = self.obfuscation_key_for(name);
        let obfuscated = match self.scheme {
            ObfuscationScheme::Enc => obfuscate_enc(k, &rest)?,
            ObfuscationScheme::Hash => obfuscate_hash(k, &rest)?,
        };
        Ok(MessageName::Obfuscated(ObfuscatedName::new(
            prefix.to_vec(),
            obfuscated,
            self.scheme.tag(),
        )?))
    }
}

/// Builds an interest for `name` at time `now_ms`, drawing the nonce and any
/// group-id encryption randomness from `rng`.
pub fn interest_generation<R: RngCore + CryptoRng>(
    ctx: &ConsumerContext,
    prefix: &[Component],
    name: &Name,
    now_ms: u64,
    rng: &mut R,
) -> Result<Interest, ConsumerError> {
    let message_name = ctx.message_name(prefix, name)?;
    let (group_id, group_id_encrypted) = match &ctx.producer_public {
        Some(pk) => (encrypt_group_id(pk, ctx.group.group_id(), rng), true),
        None => (ctx.group.group_id().to_vec(), false),
    };
    let authenticator = if ctx.mode.authenticates() {
        let mut nonce = vec![0u8; ctx.group.level().bytes()];
        rng.fill_bytes(&mut nonce);
        let name_bytes = encode_name(&message_name)?;
        let signature = sign_payload(
            ctx.group.signing_key(),
            &name_bytes,
            &group_id,
            &nonce,
            now_ms,
        );
        Some(Authenticator {
            nonce,
            timestamp_ms: now_ms,
            signature,
        })
    } else {
        None
    };
    let payload = AuthorizationPayload {
        group_id,
        group_id_encrypted,
        authenticator,
    };
    Ok(Interest::with_payload(message_name, payload))
}
