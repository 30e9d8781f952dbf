//! Schnorr signatures in the prime-order subgroup of a safe-prime MODP group.
//!
//! With `p = 2q + 1`, the quadratic residues form the subgroup of order `q`
//! generated by `g = 2`. Group elements travel as a square root `rho` with
//! `1 <= rho <= (p - 1) / 2`; the element is `rho^2 mod p`, so every decoded
//! element is a residue and exponent arithmetic modulo `q` is sound.

use std::sync::OnceLock;

use num_bigint::BigUint;
use num_traits::{One, Zero};
use rand::{CryptoRng, RngCore};
use sha2::{Digest, Sha512};

const PRIME_1024: &[&str] = &[
    "FFFFFFFFFFFFFFFFC90FDAA22168C234C4C6628B80DC1CD129024E088A67CC74",
    "020BBEA63B139B22514A08798E3404DDEF9519B3CD3A431B302B0A6DF25F1437",
    "4FE1356D6D51C245E485B576625E7EC6F44C42E9A637ED6B0BFF5CB6F406B7ED",
    "EE386BFB5A899FA5AE9F24117C4B1FE649286651ECE65381FFFFFFFFFFFFFFFF",
];

const PRIME_2048: &[&str] = &[
    "FFFFFFFFFFFFFFFFC90FDAA22168C234C4C6628B80DC1CD129024E088A67CC74",
    "020BBEA63B139B22514A08798E3404DDEF9519B3CD3A431B302B0A6DF25F1437",
    "4FE1356D6D51C245E485B576625E7EC6F44C42E9A637ED6B0BFF5CB6F406B7ED",
    "EE386BFB5A899FA5AE9F24117C4B1FE649286651ECE45B3DC2007CB8A163BF05",
    "98DA48361C55D39A69163FA8FD24CF5F83655D23DCA3AD961C62F356208552BB",
    "9ED529077096966D670C354E4ABC9804F1746C08CA18217C32905E462E36CE3B",
    "E39E772C180E86039B2783A2EC07A28FB5C55DF06F4C52C9DE2BCBF695581718",
    "3995497CEA956AE515D2261898FA051015728E5A8AACAA68FFFFFFFFFFFFFFFF",
];

const PRIME_3072: &[&str] = &[
    "FFFFFFFFFFFFFFFFC90FDAA22168C234C4C6628B80DC1CD129024E088A67CC74",
    "020BBEA63B139B22514A08798E3404DDEF9519B3CD3A431B302B0A6DF25F1437",
    "4FE1356D6D51C245E485B576625E7EC6F44C42E9A637ED6B0BFF5CB6F406B7ED",
    "EE386BFB5A899FA5AE9F24117C4B1FE649286651ECE45B3DC2007CB8A163BF05",
    "98DA48361C55D39A69163FA8FD24CF5F83655D23DCA3AD961C62F356208552BB",
    "9ED529077096966D670C354E4ABC9804F1746C08CA18217C32905E462E36CE3B",
    "E39E772C180E86039B2783A2EC07A28FB5C55DF06F4C52C9DE2BCBF695581718",
    "3995497CEA956AE515D2261898FA051015728E5A8AAAC42DAD33170D04507A33",
    "A85521ABDF1CBA64ECFB850458DBEF0A8AEA71575D060C7DB3970F85A6E1E4C7",
    "ABF5AE8CDB0933D71E8C94E04A25619DCEE3D2261AD2EE6BF12FFA06D98A0864",
    "D87602733EC86A64521F2B18177B200CBBE117577A615D6C770988C0BAD946E2",
    "08E24FA074E5AB3143DB5BFCE0FD108E4B82D120A93AD2CAFFFFFFFFFFFFFFFF",
];

pub(crate) struct Params {
    pub bits: u32,
    pub len: usize,
    p: BigUint,
    q: BigUint,
    half: BigUint,
    g: BigUint,
    inv2: BigUint,
}

impl Params {
    fn from_hex(bits: u32, chunks: &[&str]) -> Self {
        let p = BigUint::parse_bytes(chunks.concat().as_bytes(), 16).expect("valid prime constant");
        let q: BigUint = (&p - 1u32) >> 1usize;
        let inv2: BigUint = (&q + 1u32) >> 1usize;
        Params {
            bits,
            len: bits as usize / 8,
            half: q.clone(),
            p,
            q,
            g: BigUint::from(2u32),
            inv2,
        }
    }

    pub fn get(bits: u32) -> Option<&'static Params> {
        static P1024: OnceLock<Params> = OnceLock::new();
        static P2048: OnceLock<Params> = OnceLock::new();
        static P3072: OnceLock<Params> = OnceLock::new();
        match bits {
            1024 => Some(P1024.get_or_init(|| Params::from_hex(1024, PRIME_1024))),
            2048 => Some(P2048.get_or_init(|| Params::from_hex(2048, PRIME_2048))),
            3072 => Some(P3072.get_or_init(|| Params::from_hex(3072, PRIME_3072))),
            _ => None,
        }
    }

    fn to_fixed(&self, n: &BigUint) -> Vec<u8> {
        let raw = n.to_bytes_be();
        let mut out = vec![0u8; self.len - raw.len()];
        out.extend_from_slice(&raw);
        out
    }

    /// Canonical root: the smaller of `rho` and `p - rho`.
    fn canonical_root(&self, rho: BigUint) -> BigUint {
        if rho > self.half {
            &self.p - rho
        } else {
            rho
        }
    }

    fn decode_root(&self, bytes: &[u8]) -> Option<BigUint> {
        if bytes.len() != self.len {
            return None;
        }
        let rho = BigUint::from_bytes_be(bytes);
        (!rho.is_zero() && rho <= self.half).then_some(rho)
    }

    fn square(&self, rho: &BigUint) -> BigUint {
        (rho * rho) % &self.p
    }

    fn hash_to_scalar(&self, label: &[u8], parts: &[&[u8]]) -> BigUint {
        let want = self.len + 16;
        let mut wide = Vec::with_capacity(want + 64);
        let mut counter = 0u32;
        while wide.len() < want {
            let mut h = Sha512::new();
            h.update(counter.to_be_bytes());
            h.update(label);
            for p in parts {
                h.update((p.len() as u64).to_be_bytes());
                h.update(p);
            }
            wide.extend_from_slice(&h.finalize());
            counter += 1;
        }
        BigUint::from_bytes_be(&wide[..want]) % &self.q
    }

    fn random_scalar<R: RngCore + CryptoRng>(&self, rng: &mut R) -> BigUint {
        loop {
            let mut buf = vec![0u8; self.len + 16];
            rng.fill_bytes(&mut buf);
            let s = BigUint::from_bytes_be(&buf) % &self.q;
            if !s.is_zero() {
                return s;
            }
        }
    }
}

#[derive(Clone)]
pub(crate) struct PublicKey {
    params: &'static Params,
    element: BigUint,
    bytes: Vec<u8>,
}

impl PartialEq for PublicKey {
    fn eq(&self, other: &Self) -> bool {
        self.bytes == other.bytes
    }
}

impl Eq for PublicKey {}

impl PublicKey {
    pub fn from_bytes(bytes: &[u8]) -> Option<Self> {
        let params = Params::get(bytes.len() as u32 * 8)?;
        let root = params.decode_root(bytes)?;
        if root.is_one() {
            return None;
        }
        let element = params.square(&root);
        Some(PublicKey {
            params,
            element,
            bytes: bytes.to_vec(),
        })
    }

    pub fn bytes(&self) -> &[u8] {
        &self.bytes
    }

    pub fn bits(&self) -> u32 {
        self.params.bits
    }
}

#[derive(Clone)]
pub(crate) struct SecretKey {
    x: BigUint,
    public: PublicKey,
}

impl SecretKey {
    fn from_half_exponent(params: &'static Params, y: BigUint) -> Self {
        let x = (&y << 1u32) % &params.q;
        let root = params.canonical_root(params.g.modpow(&y, &params.p));
        let element = params.square(&root);
        let bytes = params.to_fixed(&root);
        SecretKey {
            x,
            public: PublicKey {
                params,
                element,
                bytes,
            },
        }
    }

    pub fn generate<R: RngCore + CryptoRng>(params: &'static Params, rng: &mut R) -> Self {
        let y = params.random_scalar(rng);
        Self::from_half_exponent(params, y)
    }

    pub fn from_bytes(params: &'static Params, bytes: &[u8]) -> Option<Self> {
        if bytes.len() != params.len {
            return None;
        }
        let x = BigUint::from_bytes_be(bytes);
        if x.is_zero() || x >= params.q {
            return None;
        }
        let y = (&x * &params.inv2) % &params.q;
        Some(Self::from_half_exponent(params, y))
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        self.public.params.to_fixed(&self.x)
    }

    pub fn public(&self) -> &PublicKey {
        &self.public
    }

    pub fn sign(&self, msg: &[u8]) -> Vec<u8> {
        let params = self.public.params;
        let x_bytes = self.to_bytes();
        let mut half_nonce = params.hash_to_scalar(b"ibac/schnorr/nonce", &[&x_bytes, msg]);
        if half_nonce.is_zero() {
            half_nonce = BigUint::one();
        }
        let r_root = params.canonical_root(params.g.modpow(&half_nonce, &params.p));
        let r_bytes = params.to_fixed(&r_root);
        let k = (&half_nonce << 1u32) % &params.q;
        let c = challenge(params, &r_bytes, &self.public.bytes, msg);
        let s = (k + c * &self.x) % &params.q;
        let mut sig = r_bytes;
        sig.extend_from_slice(&params.to_fixed(&s));
        sig
    }
}

fn challenge(params: &Params, r_bytes: &[u8], pk_bytes: &[u8], msg: &[u8]) -> BigUint {
    params.hash_to_scalar(b"ibac/schnorr/challenge", &[r_bytes, pk_bytes, msg])
}

struct Parsed {
    r: BigUint,
    s: BigUint,
    c: BigUint,
}

fn parse(pk: &PublicKey, msg: &[u8], sig: &[u8]) -> Option<Parsed> {
    let params = pk.params;
    if sig.len() != 2 * params.len {
        return None;
    }
    let (r_bytes, s_bytes) = sig.split_at(params.len);
    let r_root = params.decode_root(r_bytes)?;
    let s = BigUint::from_bytes_be(s_bytes);
    if s >= params.q {
        return None;
    }
    let c = challenge(params, r_bytes, &pk.bytes, msg);
    Some(Parsed {
        r: params.square(&r_root),
        s,
        c,
    })
}

/// Checks `g^s == R * X^c`.
pub(crate) fn verify(pk: &PublicKey, msg: &[u8], sig: &[u8]) -> bool {
    let Some(item) = parse(pk, msg, sig) else {
        return false;
    };
    let params = pk.params;
    let lhs = params.g.modpow(&item.s, &params.p);
    let rhs = (item.r * pk.element.modpow(&item.c, &params.p)) % &params.p;
    lhs == rhs
}

/// Small-exponent batch test: with random 128-bit `z_i`, checks
/// `g^(sum z_i s_i) == prod R_i^(z_i) * X^(sum z_i c_i)`.
pub(crate) fn batch_verify<R: RngCore + CryptoRng>(
    pk: &PublicKey,
    items: &[(&[u8], &[u8])],
    rng: &mut R,
) -> bool {
    let params = pk.params;
    let mut s_sum = BigUint::zero();
    let mut c_sum = BigUint::zero();
    let mut r_prod = BigUint::one();
    for (msg, sig) in items {
        let Some(item) = parse(pk, msg, sig) else {
            return false;
        };
        let z = BigUint::from(super::small_exponent(rng));
        s_sum = (s_sum + &z * item.s) % &params.q;
        c_sum = (c_sum + &z * item.c) % &params.q;
        r_prod = (r_prod * item.r.modpow(&z, &params.p)) % &params.p;
    }
    let lhs = params.g.modpow(&s_sum, &params.p);
    let rhs = (r_prod * pk.element.modpow(&c_sum, &params.p)) % &params.p;
    lhs == rhs
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    #[test]
    fn generator_has_order_q() {
        for bits in [1024, 2048, 3072] {
            let p = Params::get(bits).unwrap();
            assert_eq!(p.p.bits(), bits as u64);
            assert!(p.g.modpow(&p.q, &p.p).is_one());
            assert_eq!((&p.inv2 * 2u32) % &p.q, BigUint::one());
        }
    }

    #[test]
    fn secret_round_trip_rebuilds_public() {
        let params = Params::get(1024).unwrap();
        let mut rng = ChaCha20Rng::seed_from_u64(3);
        let sk = SecretKey::generate(params, &mut rng);
        let again = SecretKey::from_bytes(params, &sk.to_bytes()).unwrap();
        assert_eq!(again.public().bytes(), sk.public().bytes());
        assert!(BigUint::from_bytes_be(sk.public().bytes()) <= params.half);
        // X = g^x
        assert_eq!(params.g.modpow(&sk.x, &params.p), sk.public().element);
    }

    #[test]
    fn non_canonical_root_rejected() {
        let params = Params::get(1024).unwrap();
        let mut rng = ChaCha20Rng::seed_from_u64(4);
        let sk = SecretKey::generate(params, &mut rng);
        let sig = sk.sign(b"m");
        assert!(verify(sk.public(), b"m", &sig));
        // Replace R's root with p - root: same element, non-canonical bytes.
        let root = BigUint::from_bytes_be(&sig[..params.len]);
        let mut forged = params.to_fixed(&(&params.p - root));
        forged.extend_from_slice(&sig[params.len..]);
        assert!(!verify(sk.public(), b"m", &forged));
    }
}
