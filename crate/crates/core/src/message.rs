//! Interest and content object records.

use crate::name::MessageName;

/// Nonce, timestamp and signature binding an interest to a group signing key.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Authenticator {
    pub nonce: Vec<u8>,
    /// Milliseconds on the issuer's clock.
    pub timestamp_ms: u64,
    pub signature: Vec<u8>,
}

/// Authorization data carried in an interest payload. Obfuscation-only
/// interests carry just the group id.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct AuthorizationPayload {
    /// Key digest, or its public-key ciphertext when `group_id_encrypted`.
    pub group_id: Vec<u8>,
    pub group_id_encrypted: bool,
    pub authenticator: Option<Authenticator>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Interest {
    pub name: MessageName,
    pub payload: Option<AuthorizationPayload>,
    pub key_id: Option<Vec<u8>>,
    pub content_object_hash: Option<Vec<u8>>,
}

impl Interest {
    pub fn new(name: MessageName) -> Self {
        Self {
            name,
            payload: None,
            key_id: None,
            content_object_hash: None,
        }
    }

    pub fn with_payload(name: MessageName, payload: AuthorizationPayload) -> Self {
        Self {
            name,
            payload: Some(payload),
            key_id: None,
            content_object_hash: None,
        }
    }
}

/// A `(group id, verification key)` pair attached to IBAC content.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct VerificationKeyEntry {
    pub group_id: Vec<u8>,
    pub key: Vec<u8>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ContentObject {
    pub name: MessageName,
    pub data: Vec<u8>,
    /// Empty for content that routers may serve without authorization.
    pub verification_keys: Vec<VerificationKeyEntry>,
    /// Absolute expiry, milliseconds.
    pub expiry_time_ms: u64,
    pub producer_signature: Vec<u8>,
}

impl ContentObject {
    /// Whether caches must authorize interests before serving this object.
    pub fn requires_authorization(&self) -> bool {
        !self.verification_keys.is_empty()
    }

    pub fn key_for_group(&self, group_id: &[u8]) -> Option<&VerificationKeyEntry> {
        self.verification_keys
            .iter()
            .find(|e| e.group_id == group_id)
    }
}
