//! Name obfuscation, group key material, payload signatures and group-id
//! privacy encryption.

mod groupid;
mod keys;
mod obfuscation;
mod payload;
pub mod schnorr;

use sha2::{Digest, Sha256};
use thiserror::Error;

pub use groupid::{decrypt_group_id, encrypt_group_id, ProducerKeyPair, ProducerPublicKey};
pub use keys::{gen_group, gen_group_with_suite, GroupKeyMaterial, GroupPublic};
pub use obfuscation::{
    decode_suffix, deobfuscate_enc, encode_suffix, obfuscate_enc, obfuscate_hash, SIV_TAG_LEN,
};
pub use payload::{
    batch_verify_payloads, payload_message, sign_payload, verify_payload, PayloadTuple,
};
pub use schnorr::{batch_verify, SignatureSuite, SigningKey, VerifyingKey};

/// Length of `H(·)` outputs, group ids and key ids.
pub const DIGEST_LEN: usize = 32;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CryptoError {
    #[error("unsupported security parameter {0} bits (expected 128 or 256)")]
    UnsupportedParameter(u32),
    #[error("unsupported signature key size {0} bits")]
    UnsupportedKeySize(u32),
    #[error("cannot obfuscate an empty suffix")]
    EmptySuffix,
    #[error("integrity check failed")]
    AuthenticityFailure,
    #[error("malformed group-id ciphertext")]
    DecryptFailure,
    #[error("batch must contain at least one item")]
    EmptyBatch,
    #[error("malformed key material: {0}")]
    MalformedKey(&'static str),
    #[error("key self-test failed")]
    SelfTestFailed,
}

/// Security parameter κ: symmetric key and nonce length.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[derive(Default)]
pub enum SecurityLevel {
    #[default]
    K128,
    K256,
}

impl SecurityLevel {
    pub fn from_bits(bits: u32) -> Result<Self, CryptoError> {
        match bits {
            128 => Ok(Self::K128),
            256 => Ok(Self::K256),
            other => Err(CryptoError::UnsupportedParameter(other)),
        }
    }

    pub fn bits(self) -> u32 {
        match self {
            Self::K128 => 128,
            Self::K256 => 256,
        }
    }

    pub fn bytes(self) -> usize {
        self.bits() as usize / 8
    }
}


/// A κ-bit symmetric obfuscation key shared by a group (or by every group
/// authorized for one content object).
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct ObfuscationKey(Vec<u8>);

impl ObfuscationKey {
    pub fn new(bytes: Vec<u8>) -> Result<Self, CryptoError> {
        match bytes.len() {
            16 | 32 => Ok(Self(bytes)),
            _ => Err(CryptoError::MalformedKey(
                "obfuscation key must be 16 or 32 bytes",
            )),
        }
    }

    pub fn as_bytes(&self) -> &[u8] {
        &self.0
    }

    pub fn level(&self) -> SecurityLevel {
        if self.0.len() == 16 {
            SecurityLevel::K128
        } else {
            SecurityLevel::K256
        }
    }
}

impl std::fmt::Debug for ObfuscationKey {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "ObfuscationKey(id={})", hex::encode(&key_id(self)[..4]))
    }
}

/// `H(x)`: SHA-256.
pub fn hash(bytes: &[u8]) -> [u8; DIGEST_LEN] {
    Sha256::digest(bytes).into()
}

/// Identifier of an obfuscation key: `H(k)`.
pub fn key_id(k: &ObfuscationKey) -> [u8; DIGEST_LEN] {
    hash(k.as_bytes())
}
