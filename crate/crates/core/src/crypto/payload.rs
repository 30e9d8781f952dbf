//! Interest payload signatures `σ = Sign(N′ ‖ ID ‖ r ‖ t)`.
//!
//! Each field is framed as `u32 BE length || bytes`; the timestamp is the
//! 8-byte big-endian millisecond count.

use rand::{CryptoRng, RngCore};

use super::{batch_verify, CryptoError, SigningKey, VerifyingKey};

/// The signed tuple. `name` holds the encoded name bytes and `group_id` the
/// id exactly as carried on the wire.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PayloadTuple {
    pub name: Vec<u8>,
    pub group_id: Vec<u8>,
    pub nonce: Vec<u8>,
    pub timestamp_ms: u64,
}

impl PayloadTuple {
    pub fn message(&self) -> Vec<u8> {
        payload_message(&self.name, &self.group_id, &self.nonce, self.timestamp_ms)
    }
}

pub fn payload_message(name: &[u8], group_id: &[u8], nonce: &[u8], timestamp_ms: u64) -> Vec<u8> {
    let ts = timestamp_ms.to_be_bytes();
    let fields: [&[u8]; 4] = [name, group_id, nonce, &ts];
    let mut out = Vec::with_capacity(fields.iter().map(|f| f.len() + 4).sum());
    for f in fields {
        out.extend_from_slice(&(f.len() as u32).to_be_bytes());
        out.extend_from_slice(f);
    }
    out
}

pub fn sign_payload(
    sk: &SigningKey,
    name: &[u8],
    group_id: &[u8],
    nonce: &[u8],
    timestamp_ms: u64,
) -> Vec<u8> {
    sk.sign(&payload_message(name, group_id, nonce, timestamp_ms))
}

pub fn verify_payload(
    vk: &VerifyingKey,
    name: &[u8],
    group_id: &[u8],
    nonce: &[u8],
    timestamp_ms: u64,
    signature: &[u8],
) -> bool {
    vk.verify(
        &payload_message(name, group_id, nonce, timestamp_ms),
        signature,
    )
}

/// Batch form of [`verify_payload`] for tuples under one key.
pub fn batch_verify_payloads<R: RngCore + CryptoRng>(
    vk: &VerifyingKey,
    items: &[(PayloadTuple, Vec<u8>)],
    rng: &mut R,
) -> Result<bool, CryptoError> {
    let messages: Vec<Vec<u8>> = items.iter().map(|(t, _)| t.message()).collect();
    let refs: Vec<(&[u8], &[u8])> = messages
        .iter()
        .zip(items)
        .map(|(m, (_, sig))| (m.as_slice(), sig.as_slice()))
        .collect();
    batch_verify(vk, &refs, rng)
}
