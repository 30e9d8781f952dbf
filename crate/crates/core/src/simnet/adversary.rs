//! Off-path adversary: replays of captured interests, forged payloads and
//! name probes.

use std::collections::BTreeMap;

use rand::{CryptoRng, RngCore};
use serde::Serialize;

use super::NodeId;
use crate::consumer::{interest_generation, ConsumerContext, ConsumerError};
use crate::crypto::{sign_payload, GroupKeyMaterial, SigningKey};
use crate::message::Interest;
use crate::name::{MessageName, Name, ObfuscatedName};
use crate::wire::encode_name;

#[derive(Debug, Clone)]
pub enum AttackKind {
    /// Re-inject the `nth` (1-based) interest sent by `target` into the
    /// router that already saw it.
    ReplaySamePath { target: NodeId, nth: usize },
    /// Re-inject it into a different router that may hold the content.
    ReplayCrossPath { target: NodeId, nth: usize },
    /// Interests with the correct name and group id, signed with a key the
    /// adversary made up. `oracle` supplies the name; its signing key is
    /// never used.
    ForgePayload {
        name: Name,
        oracle: ConsumerContext,
        count: usize,
    },
    /// Interests under `name`'s prefix with random suffixes of the right length.
    NameProbe {
        name: Name,
        oracle: ConsumerContext,
        count: usize,
    },
    /// One interest with the correct obfuscated name and no authenticator.
    ProbeCorrect { name: Name, oracle: ConsumerContext },
}

impl AttackKind {
    pub fn label(&self) -> &'static str {
        match self {
            Self::ReplaySamePath { .. } => "replay_same_path",
            Self::ReplayCrossPath { .. } => "replay_cross_path",
            Self::ForgePayload { .. } => "forge_payload",
            Self::NameProbe { .. } => "name_probe",
            Self::ProbeCorrect { .. } => "probe_correct",
        }
    }
}

#[derive(Debug, Clone)]
pub struct AdversaryAction {
    pub at_ms: u64,
    /// A compromised consumer that issues the interests.
    pub node: NodeId,
    pub kind: AttackKind,
}

#[derive(Debug, Clone, Default)]
pub struct AdversaryConfig {
    pub compromised_consumers: Vec<NodeId>,
    /// Must lie off every consumer-to-producer path. No action uses them.
    pub compromised_routers: Vec<NodeId>,
    pub actions: Vec<AdversaryAction>,
}

/// What one adversary action achieved.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct AttackOutcome {
    pub index: usize,
    pub kind: String,
    pub node: String,
    pub at_ms: u64,
    pub injected: u64,
    /// Contents the adversary received.
    pub delivered: u64,
    pub drops: BTreeMap<String, u64>,
    pub in_flight: u64,
    /// Time between capture and replay, for replays.
    pub capture_lead_ms: Option<u64>,
}

/// The oracle context with its signing key swapped for a fresh random one.
pub(crate) fn adversary_context<R: RngCore + CryptoRng>(
    oracle: &ConsumerContext,
    rng: &mut R,
) -> ConsumerContext {
    let real = oracle.group();
    let fake = SigningKey::generate(real.signing_key().suite(), rng);
    let group = GroupKeyMaterial::new(real.obfuscation_key().clone(), fake)
        .expect("fresh key passes self-test");
    oracle.with_group(group)
}

pub(crate) fn forged_interest<R: RngCore + CryptoRng>(
    ctx: &ConsumerContext,
    name: &Name,
    now_ms: u64,
    rng: &mut R,
) -> Result<Interest, ConsumerError> {
    interest_generation(ctx, name.routable_prefix(), name, now_ms, rng)
}

pub(crate) fn probe_interest<R: RngCore + CryptoRng>(
    ctx: &ConsumerContext,
    name: &Name,
    now_ms: u64,
    rng: &mut R,
) -> Result<Interest, ConsumerError> {
    let mut interest = forged_interest(ctx, name, now_ms, rng)?;
    if let MessageName::Obfuscated(o) = &interest.name {
        let mut guess = vec![0u8; o.obfuscated_suffix().len()];
        rng.fill_bytes(&mut guess);
        let probe = ObfuscatedName::new(o.routable_prefix().to_vec(), guess, o.scheme())?;
        interest.name = MessageName::Obfuscated(probe);
    }
    let name_bytes = encode_name(&interest.name)?;
    if let Some(payload) = interest.payload.as_mut() {
        if let Some(auth) = payload.authenticator.as_mut() {
            auth.signature = sign_payload(
                ctx.group().signing_key(),
                &name_bytes,
                &payload.group_id,
                &auth.nonce,
                auth.timestamp_ms,
            );
        }
    }
    Ok(interest)
}

pub(crate) fn correct_name_probe<R: RngCore + CryptoRng>(
    ctx: &ConsumerContext,
    name: &Name,
    now_ms: u64,
    rng: &mut R,
) -> Result<Interest, ConsumerError> {
    let mut interest = forged_interest(ctx, name, now_ms, rng)?;
    if let Some(p) = interest.payload.as_mut() {
        p.authenticator = None;
    }
    Ok(interest)
}

#[cfg(test)]
mod tests {
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    use super::*;
    use crate::consumer::{IbacMode, ObfuscationScheme};
    use crate::crypto::{gen_group, verify_payload};

    #[test]
    fn adversary_keeps_name_but_not_signing_key() {
        let g = gen_group(128, 1).unwrap();
        let oracle = ConsumerContext::new(g.clone(), IbacMode::Full, ObfuscationScheme::Enc);
        let mut rng = ChaCha20Rng::seed_from_u64(3);
        let adv = adversary_context(&oracle, &mut rng);
        let name = Name::parse("/edu/uci/ics/home.html", 2).unwrap();
        let real = forged_interest(&oracle, &name, 5, &mut rng).unwrap();
        let forged = forged_interest(&adv, &name, 5, &mut rng).unwrap();
        assert_eq!(real.name, forged.name);
        let p = forged.payload.unwrap();
        assert_eq!(p.group_id, g.group_id().to_vec());
        let a = p.authenticator.unwrap();
        let n = encode_name(&forged.name).unwrap();
        assert!(!verify_payload(
            g.verifying_key(),
            &n,
            &p.group_id,
            &a.nonce,
            a.timestamp_ms,
            &a.signature
        ));
    }

    #[test]
    fn probes_randomize_suffix_only() {
        let g = gen_group(128, 1).unwrap();
        let oracle = ConsumerContext::new(g, IbacMode::ObfuscateOnly, ObfuscationScheme::Hash);
        let mut rng = ChaCha20Rng::seed_from_u64(4);
        let name = Name::parse("/edu/uci/ics/home.html", 2).unwrap();
        let real = forged_interest(&oracle, &name, 0, &mut rng).unwrap();
        let probe = probe_interest(&oracle, &name, 0, &mut rng).unwrap();
        let (MessageName::Obfuscated(a), MessageName::Obfuscated(b)) = (&real.name, &probe.name)
        else {
            panic!()
        };
        assert_eq!(a.routable_prefix(), b.routable_prefix());
        assert_eq!(a.obfuscated_suffix().len(), b.obfuscated_suffix().len());
        assert_ne!(a.obfuscated_suffix(), b.obfuscated_suffix());
        let bare = correct_name_probe(&oracle, &name, 0, &mut rng).unwrap();
        assert_eq!(bare.name, real.name);
        assert!(bare.payload.unwrap().authenticator.is_none());
    }
}
