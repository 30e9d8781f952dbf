//! Randomized encryption of group ids to the producer (DHIES over
//! Ristretto255).
//!
//! `blob = E || AES-128-CTR(k_enc, id) || HMAC-SHA256(k_mac, E || ct)[..16]`
//! where `E = e*G` is fresh per call and `(k_enc, k_mac)` come from
//! `SHA-512(label || E || e*PK)`.

use ctr::cipher::{KeyIvInit, StreamCipher};
use curve25519_dalek::constants::RISTRETTO_BASEPOINT_POINT as G;
use curve25519_dalek::ristretto::{CompressedRistretto, RistrettoPoint};
use curve25519_dalek::scalar::Scalar;
use curve25519_dalek::traits::IsIdentity;
use hmac::{Hmac, Mac};
use rand::{CryptoRng, RngCore};
use sha2::{Digest, Sha256, Sha512};

use super::CryptoError;

type Aes128Ctr = ctr::Ctr128BE<aes::Aes128>;

const POINT_LEN: usize = 32;
const TAG_LEN: usize = 16;
const KDF_LABEL: &[u8] = b"ibac/groupid/kdf";

/// Producer encryption key pair `(pk^P, sk^P)`.
#[derive(Clone)]
pub struct ProducerKeyPair {
    secret: Scalar,
    public: ProducerPublicKey,
}

#[derive(Clone, PartialEq, Eq)]
pub struct ProducerPublicKey {
    point: RistrettoPoint,
}

impl ProducerKeyPair {
    pub fn generate<R: RngCore + CryptoRng>(rng: &mut R) -> Self {
        loop {
            let secret = Scalar::random(rng);
            if secret != Scalar::ZERO {
                return ProducerKeyPair {
                    secret,
                    public: ProducerPublicKey { point: G * secret },
                };
            }
        }
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, CryptoError> {
        let arr: [u8; 32] = bytes
            .try_into()
            .map_err(|_| CryptoError::MalformedKey("producer key length"))?;
        let secret: Option<Scalar> = Scalar::from_canonical_bytes(arr).into();
        match secret {
            Some(s) if s != Scalar::ZERO => Ok(ProducerKeyPair {
                secret: s,
                public: ProducerPublicKey { point: G * s },
            }),
            _ => Err(CryptoError::MalformedKey("producer key out of range")),
        }
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        self.secret.to_bytes().to_vec()
    }

    pub fn public(&self) -> &ProducerPublicKey {
        &self.public
    }
}

impl std::fmt::Debug for ProducerKeyPair {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "ProducerKeyPair(pk={:?})", self.public)
    }
}

impl ProducerPublicKey {
    pub fn from_bytes(bytes: &[u8]) -> Result<Self, CryptoError> {
        let arr: [u8; 32] = bytes
            .try_into()
            .map_err(|_| CryptoError::MalformedKey("producer public key length"))?;
        CompressedRistretto(arr)
            .decompress()
            .filter(|p| !p.is_identity())
            .map(|point| ProducerPublicKey { point })
            .ok_or(CryptoError::MalformedKey("producer public key"))
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        self.point.compress().to_bytes().to_vec()
    }
}

impl std::fmt::Debug for ProducerPublicKey {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "ProducerPublicKey({})",
            hex::encode(&self.to_bytes()[..4])
        )
    }
}

fn derive(ephemeral: &[u8], shared: &RistrettoPoint) -> ([u8; 16], [u8; 32]) {
    let out = Sha512::new()
        .chain_update(KDF_LABEL)
        .chain_update(ephemeral)
        .chain_update(shared.compress().as_bytes())
        .finalize();
    (out[..16].try_into().unwrap(), out[32..].try_into().unwrap())
}

fn tag(mac_key: &[u8], ephemeral: &[u8], ct: &[u8]) -> Hmac<Sha256> {
    let mut mac = Hmac::<Sha256>::new_from_slice(mac_key).expect("hmac accepts any key length");
    mac.update(ephemeral);
    mac.update(ct);
    mac
}

/// Encrypts `id` to the producer. Two calls never produce the same blob
/// unless the generator repeats.
pub fn encrypt_group_id<R: RngCore + CryptoRng>(
    pk: &ProducerPublicKey,
    id: &[u8],
    rng: &mut R,
) -> Vec<u8> {
    let e = loop {
        let e = Scalar::random(rng);
        if e != Scalar::ZERO {
            break e;
        }
    };
    let ephemeral = (G * e).compress().to_bytes();
    let (enc_key, mac_key) = derive(&ephemeral, &(pk.point * e));
    let mut ct = id.to_vec();
    Aes128Ctr::new(&enc_key.into(), &[0u8; 16].into()).apply_keystream(&mut ct);
    let t = tag(&mac_key, &ephemeral, &ct).finalize().into_bytes();
    let mut blob = Vec::with_capacity(POINT_LEN + ct.len() + TAG_LEN);
    blob.extend_from_slice(&ephemeral);
    blob.extend_from_slice(&ct);
    blob.extend_from_slice(&t[..TAG_LEN]);
    blob
}

pub fn decrypt_group_id(sk: &ProducerKeyPair, blob: &[u8]) -> Result<Vec<u8>, CryptoError> {
    if blob.len() < POINT_LEN + TAG_LEN {
        return Err(CryptoError::DecryptFailure);
    }
    let (ephemeral, rest) = blob.split_at(POINT_LEN);
    let (ct, t) = rest.split_at(rest.len() - TAG_LEN);
    let point = CompressedRistretto(ephemeral.try_into().unwrap())
        .decompress()
        .filter(|p| !p.is_identity())
        .ok_or(CryptoError::DecryptFailure)?;
    let (enc_key, mac_key) = derive(ephemeral, &(point * sk.secret));
    tag(&mac_key, ephemeral, ct)
        .verify_truncated_left(t)
        .map_err(|_| CryptoError::DecryptFailure)?;
    let mut id = ct.to_vec();
    Aes128Ctr::new(&enc_key.into(), &[0u8; 16].into()).apply_keystream(&mut id);
    Ok(id)
}
