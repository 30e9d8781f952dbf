//! Name-suffix obfuscation: deterministic encryption and keyed hashing.
//!
//! Encryption is a synthetic-IV construction. Two subkeys are derived from
//! the group key with HMAC-SHA256 under fixed labels; the tag is the first
//! 16 bytes of HMAC-SHA256(mac_key, plaintext) and doubles as the AES-CTR
//! initial counter block. Output is `tag || ciphertext`. Decryption
//! recomputes the tag and rejects on mismatch.

use ctr::cipher::{KeyIvInit, StreamCipher};
use hmac::{Hmac, Mac};
use sha2::Sha256;

use super::{CryptoError, ObfuscationKey};
use crate::name::Component;

type HmacSha256 = Hmac<Sha256>;
type Aes128Ctr = ctr::Ctr128BE<aes::Aes128>;
type Aes256Ctr = ctr::Ctr128BE<aes::Aes256>;

pub const SIV_TAG_LEN: usize = 16;

const MAC_LABEL: &[u8] = b"ibac/siv/mac";
const ENC_LABEL: &[u8] = b"ibac/siv/enc";

fn hmac(key: &[u8], parts: &[&[u8]]) -> [u8; 32] {
    let mut mac = HmacSha256::new_from_slice(key).expect("hmac accepts any key length");
    for p in parts {
        mac.update(p);
    }
    mac.finalize().into_bytes().into()
}

/// Canonical join of name components: each as `len (u32 BE) || bytes`.
pub fn encode_suffix(components: &[Component]) -> Vec<u8> {
    let mut out = Vec::with_capacity(components.iter().map(|c| c.len() + 4).sum());
    for c in components {
        out.extend_from_slice(&(c.len() as u32).to_be_bytes());
        out.extend_from_slice(c);
    }
    out
}

/// Inverse of [`encode_suffix`]. Returns `None` on malformed input.
pub fn decode_suffix(mut bytes: &[u8]) -> Option<Vec<Component>> {
    let mut out = Vec::new();
    while !bytes.is_empty() {
        let len = u32::from_be_bytes(bytes.get(..4)?.try_into().ok()?) as usize;
        bytes = &bytes[4..];
        if len == 0 || len > bytes.len() {
            return None;
        }
        out.push(bytes[..len].to_vec());
        bytes = &bytes[len..];
    }
    if out.is_empty() {
        None
    } else {
        Some(out)
    }
}

fn apply_keystream(k: &ObfuscationKey, iv: &[u8; SIV_TAG_LEN], data: &mut [u8]) {
    let enc_key = hmac(k.as_bytes(), &[ENC_LABEL]);
    match k.as_bytes().len() {
        16 => Aes128Ctr::new(enc_key[..16].into(), iv.into()).apply_keystream(data),
        _ => Aes256Ctr::new(enc_key[..32].into(), iv.into()).apply_keystream(data),
    }
}

fn siv_tag(k: &ObfuscationKey, plaintext: &[u8]) -> [u8; SIV_TAG_LEN] {
    let mac_key = hmac(k.as_bytes(), &[MAC_LABEL]);
    let full = hmac(&mac_key, &[plaintext]);
    full[..SIV_TAG_LEN].try_into().unwrap()
}

/// Deterministically encrypts a name suffix under `k`.
pub fn obfuscate_enc(k: &ObfuscationKey, suffix: &[Component]) -> Result<Vec<u8>, CryptoError> {
    if suffix.is_empty() {
        return Err(CryptoError::EmptySuffix);
    }
    let plaintext = encode_suffix(suffix);
    let tag = siv_tag(k, &plaintext);
    let mut out = Vec::with_capacity(SIV_TAG_LEN + plaintext.len());
    out.extend_from_slice(&tag);
    out.extend_from_slice(&plaintext);
    apply_keystream(k, &tag, &mut out[SIV_TAG_LEN..]);
    Ok(out)
}

/// Recovers the suffix components; fails if the tag does not verify under `k`.
pub fn deobfuscate_enc(
    k: &ObfuscationKey,
    ciphertext: &[u8],
) -> Result<Vec<Component>, CryptoError> {
    if ciphertext.len() <= SIV_TAG_LEN {
        return Err(CryptoError::AuthenticityFailure);
    }
    let (tag, body) = ciphertext.split_at(SIV_TAG_LEN);
    let tag: [u8; SIV_TAG_LEN] = tag.try_into().unwrap();
    let mut plaintext = body.to_vec();
    apply_keystream(k, &tag, &mut plaintext);
    let mac_key = hmac(k.as_bytes(), &[MAC_LABEL]);
    let mut mac = HmacSha256::new_from_slice(&mac_key).expect("hmac accepts any key length");
    mac.update(&plaintext);
    mac.verify_truncated_left(&tag)
        .map_err(|_| CryptoError::AuthenticityFailure)?;
    decode_suffix(&plaintext).ok_or(CryptoError::AuthenticityFailure)
}

/// Keyed digest of a name suffix: HMAC-SHA256(k, canonical suffix).
pub fn obfuscate_hash(k: &ObfuscationKey, suffix: &[Component]) -> Result<Vec<u8>, CryptoError> {
    if suffix.is_empty() {
        return Err(CryptoError::EmptySuffix);
    }
    Ok(hmac(k.as_bytes(), &[&encode_suffix(suffix)]).to_vec())
}
