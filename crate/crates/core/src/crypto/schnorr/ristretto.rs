//! Schnorr over Ristretto255.
//!
//! `sigma = R || s` with `R = k*G`, `c = H(R || X || m)`, `s = k + c*x`.
//! Nonces are derived from the secret and message.

use curve25519_dalek::constants::RISTRETTO_BASEPOINT_POINT as G;
use curve25519_dalek::ristretto::{CompressedRistretto, RistrettoPoint};
use curve25519_dalek::scalar::Scalar;
use curve25519_dalek::traits::{IsIdentity, VartimeMultiscalarMul};
use rand::{CryptoRng, RngCore};
use sha2::{Digest, Sha512};

pub(crate) const PUBLIC_LEN: usize = 32;
pub(crate) const SIGNATURE_LEN: usize = 64;

#[derive(Clone, PartialEq, Eq)]
pub(crate) struct PublicKey {
    point: RistrettoPoint,
    bytes: [u8; 32],
}

impl PublicKey {
    pub fn from_bytes(bytes: &[u8]) -> Option<Self> {
        let bytes: [u8; 32] = bytes.try_into().ok()?;
        let point = CompressedRistretto(bytes).decompress()?;
        if point.is_identity() {
            return None;
        }
        Some(PublicKey { point, bytes })
    }

    pub fn bytes(&self) -> &[u8] {
        &self.bytes
    }
}

#[derive(Clone)]
pub(crate) struct SecretKey {
    x: Scalar,
    public: PublicKey,
}

impl SecretKey {
    fn from_scalar(x: Scalar) -> Self {
        let point = G * x;
        SecretKey {
            x,
            public: PublicKey {
                point,
                bytes: point.compress().to_bytes(),
            },
        }
    }

    pub fn generate<R: RngCore + CryptoRng>(rng: &mut R) -> Self {
        loop {
            let x = Scalar::random(rng);
            if x != Scalar::ZERO {
                return Self::from_scalar(x);
            }
        }
    }

    pub fn from_bytes(bytes: &[u8]) -> Option<Self> {
        let bytes: [u8; 32] = bytes.try_into().ok()?;
        let x: Option<Scalar> = Scalar::from_canonical_bytes(bytes).into();
        x.filter(|x| *x != Scalar::ZERO).map(Self::from_scalar)
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        self.x.to_bytes().to_vec()
    }

    pub fn public(&self) -> &PublicKey {
        &self.public
    }

    pub fn sign(&self, msg: &[u8]) -> Vec<u8> {
        let k = Scalar::from_hash(
            Sha512::new()
                .chain_update(b"ibac/schnorr/nonce")
                .chain_update(self.x.as_bytes())
                .chain_update(msg),
        );
        let r = (G * k).compress();
        let c = challenge(r.as_bytes(), &self.public.bytes, msg);
        let s = k + c * self.x;
        let mut sig = Vec::with_capacity(SIGNATURE_LEN);
        sig.extend_from_slice(r.as_bytes());
        sig.extend_from_slice(s.as_bytes());
        sig
    }
}

fn challenge(r: &[u8], pk: &[u8], msg: &[u8]) -> Scalar {
    Scalar::from_hash(
        Sha512::new()
            .chain_update(b"ibac/schnorr/challenge")
            .chain_update(r)
            .chain_update(pk)
            .chain_update(msg),
    )
}

fn split(sig: &[u8]) -> Option<([u8; 32], Scalar)> {
    if sig.len() != SIGNATURE_LEN {
        return None;
    }
    let r: [u8; 32] = sig[..32].try_into().ok()?;
    let s: Option<Scalar> = Scalar::from_canonical_bytes(sig[32..].try_into().ok()?).into();
    Some((r, s?))
}

pub(crate) fn verify(pk: &PublicKey, msg: &[u8], sig: &[u8]) -> bool {
    let Some((r, s)) = split(sig) else {
        return false;
    };
    let c = challenge(&r, &pk.bytes, msg);
    // s*G - c*X must re-encode to R.
    let candidate = RistrettoPoint::vartime_double_scalar_mul_basepoint(&c, &-pk.point, &s);
    candidate.compress().to_bytes() == r
}

/// Checks `(sum z_i s_i) G - sum z_i R_i - (sum z_i c_i) X == 0` with random
/// 128-bit `z_i`.
pub(crate) fn batch_verify<R: RngCore + CryptoRng>(
    pk: &PublicKey,
    items: &[(&[u8], &[u8])],
    rng: &mut R,
) -> bool {
    let mut scalars = Vec::with_capacity(items.len() + 2);
    let mut points = Vec::with_capacity(items.len() + 2);
    let mut s_sum = Scalar::ZERO;
    let mut c_sum = Scalar::ZERO;
    for (msg, sig) in items {
        let Some((r_bytes, s)) = split(sig) else {
            return false;
        };
        let Some(r) = CompressedRistretto(r_bytes).decompress() else {
            return false;
        };
        let z = Scalar::from(super::small_exponent(rng));
        let c = challenge(&r_bytes, &pk.bytes, msg);
        s_sum += z * s;
        c_sum += z * c;
        scalars.push(-z);
        points.push(r);
    }
    scalars.push(s_sum);
    points.push(G);
    scalars.push(-c_sum);
    points.push(pk.point);
    RistrettoPoint::vartime_multiscalar_mul(&scalars, &points).is_identity()
}
