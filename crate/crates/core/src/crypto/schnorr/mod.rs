//! Schnorr signatures with a randomized small-exponent batch test.
//!
//! Two group families are provided: Ristretto255 (the default) and the
//! 1024/2048/3072-bit safe-prime MODP groups, which line up with the key
//! sizes the verification benchmark reports.
//!
//! Batch equation, with independent uniform 128-bit `z_i` per item:
//!
//! ```text
//! g^(sum z_i s_i) == prod R_i^(z_i) * X^(sum z_i c_i)
//! ```
//!
//! A batch holding an invalid item passes with probability at most `2^-128`
//! plus the group-order cofactor terms, both far below `2^-64`.

mod modp;
mod ristretto;

use std::fmt;
use std::str::FromStr;

use rand::{CryptoRng, RngCore};

use super::CryptoError;

pub(crate) fn small_exponent<R: RngCore + ?Sized>(rng: &mut R) -> u128 {
    loop {
        let mut b = [0u8; 16];
        rng.fill_bytes(&mut b);
        let z = u128::from_le_bytes(b);
        if z != 0 {
            return z;
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[derive(Default)]
pub enum SignatureSuite {
    #[default]
    Ristretto255,
    Modp1024,
    Modp2048,
    Modp3072,
}

impl SignatureSuite {
    pub const ALL: [SignatureSuite; 4] = [
        Self::Ristretto255,
        Self::Modp1024,
        Self::Modp2048,
        Self::Modp3072,
    ];

    /// 256 selects Ristretto255; 1024/2048/3072 select MODP groups.
    pub fn from_key_bits(bits: u32) -> Result<Self, CryptoError> {
        match bits {
            256 => Ok(Self::Ristretto255),
            1024 => Ok(Self::Modp1024),
            2048 => Ok(Self::Modp2048),
            3072 => Ok(Self::Modp3072),
            other => Err(CryptoError::UnsupportedKeySize(other)),
        }
    }

    pub fn key_bits(self) -> u32 {
        match self {
            Self::Ristretto255 => 256,
            Self::Modp1024 => 1024,
            Self::Modp2048 => 2048,
            Self::Modp3072 => 3072,
        }
    }

    pub fn public_key_len(self) -> usize {
        self.key_bits() as usize / 8
    }

    pub fn secret_key_len(self) -> usize {
        self.public_key_len()
    }

    pub fn signature_len(self) -> usize {
        2 * self.public_key_len()
    }

    pub fn tag(self) -> u8 {
        match self {
            Self::Ristretto255 => 0,
            Self::Modp1024 => 1,
            Self::Modp2048 => 2,
            Self::Modp3072 => 3,
        }
    }

    pub fn from_tag(tag: u8) -> Option<Self> {
        Self::ALL.into_iter().find(|s| s.tag() == tag)
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::Ristretto255 => "ristretto255",
            Self::Modp1024 => "modp1024",
            Self::Modp2048 => "modp2048",
            Self::Modp3072 => "modp3072",
        }
    }
}


impl fmt::Display for SignatureSuite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SignatureSuite {
    type Err = CryptoError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if let Some(suite) = Self::ALL.into_iter().find(|x| x.name() == s) {
            return Ok(suite);
        }
        let bits = s
            .parse()
            .map_err(|_| CryptoError::MalformedKey("unknown signature suite"))?;
        Self::from_key_bits(bits)
    }
}

#[derive(Clone)]
enum SecretInner {
    Ristretto(ristretto::SecretKey),
    Modp(modp::SecretKey),
}

#[derive(Clone, PartialEq, Eq)]
enum PublicInner {
    Ristretto(ristretto::PublicKey),
    Modp(modp::PublicKey),
}

/// Group signing key `sk^s`.
#[derive(Clone)]
pub struct SigningKey {
    inner: SecretInner,
    public: VerifyingKey,
}

/// Group verification key `pk^s`.
#[derive(Clone, PartialEq, Eq)]
pub struct VerifyingKey {
    inner: PublicInner,
}

impl SigningKey {
    pub fn generate<R: RngCore + CryptoRng>(suite: SignatureSuite, rng: &mut R) -> Self {
        let inner = match suite {
            SignatureSuite::Ristretto255 => {
                SecretInner::Ristretto(ristretto::SecretKey::generate(rng))
            }
            _ => SecretInner::Modp(modp::SecretKey::generate(modp_params(suite), rng)),
        };
        Self::wrap(inner)
    }

    fn wrap(inner: SecretInner) -> Self {
        let public = match &inner {
            SecretInner::Ristretto(k) => VerifyingKey {
                inner: PublicInner::Ristretto(k.public().clone()),
            },
            SecretInner::Modp(k) => VerifyingKey {
                inner: PublicInner::Modp(k.public().clone()),
            },
        };
        SigningKey { inner, public }
    }

    pub fn from_bytes(suite: SignatureSuite, bytes: &[u8]) -> Result<Self, CryptoError> {
        let inner = match suite {
            SignatureSuite::Ristretto255 => {
                ristretto::SecretKey::from_bytes(bytes).map(SecretInner::Ristretto)
            }
            _ => modp::SecretKey::from_bytes(modp_params(suite), bytes).map(SecretInner::Modp),
        };
        inner
            .map(Self::wrap)
            .ok_or(CryptoError::MalformedKey("signing key out of range"))
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        match &self.inner {
            SecretInner::Ristretto(k) => k.to_bytes(),
            SecretInner::Modp(k) => k.to_bytes(),
        }
    }

    pub fn suite(&self) -> SignatureSuite {
        self.public.suite()
    }

    pub fn verifying_key(&self) -> &VerifyingKey {
        &self.public
    }

    pub fn sign(&self, msg: &[u8]) -> Vec<u8> {
        match &self.inner {
            SecretInner::Ristretto(k) => k.sign(msg),
            SecretInner::Modp(k) => k.sign(msg),
        }
    }
}

impl fmt::Debug for SigningKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "SigningKey({}, pk={:?})", self.suite(), self.public)
    }
}

fn modp_params(suite: SignatureSuite) -> &'static modp::Params {
    modp::Params::get(suite.key_bits()).expect("MODP suite has parameters")
}

impl VerifyingKey {
    /// Parses a verification key; the suite follows from the length.
    pub fn from_bytes(bytes: &[u8]) -> Result<Self, CryptoError> {
        let inner = if bytes.len() == ristretto::PUBLIC_LEN {
            ristretto::PublicKey::from_bytes(bytes).map(PublicInner::Ristretto)
        } else {
            modp::PublicKey::from_bytes(bytes).map(PublicInner::Modp)
        };
        inner
            .map(|inner| VerifyingKey { inner })
            .ok_or(CryptoError::MalformedKey("verification key"))
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        self.as_bytes().to_vec()
    }

    pub fn as_bytes(&self) -> &[u8] {
        match &self.inner {
            PublicInner::Ristretto(k) => k.bytes(),
            PublicInner::Modp(k) => k.bytes(),
        }
    }

    pub fn suite(&self) -> SignatureSuite {
        match &self.inner {
            PublicInner::Ristretto(_) => SignatureSuite::Ristretto255,
            PublicInner::Modp(k) => {
                SignatureSuite::from_key_bits(k.bits()).expect("known MODP size")
            }
        }
    }

    /// False for malformed signatures.
    pub fn verify(&self, msg: &[u8], sig: &[u8]) -> bool {
        match &self.inner {
            PublicInner::Ristretto(k) => ristretto::verify(k, msg, sig),
            PublicInner::Modp(k) => modp::verify(k, msg, sig),
        }
    }
}

impl fmt::Debug for VerifyingKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "VerifyingKey({}, {}..)",
            self.suite(),
            hex::encode(&self.as_bytes()[..4])
        )
    }
}

/// Verifies `(message, signature)` pairs under one key in a single
/// randomized check.
pub fn batch_verify<R: RngCore + CryptoRng>(
    vk: &VerifyingKey,
    items: &[(&[u8], &[u8])],
    rng: &mut R,
) -> Result<bool, CryptoError> {
    if items.is_empty() {
        return Err(CryptoError::EmptyBatch);
    }
    Ok(match &vk.inner {
        PublicInner::Ristretto(k) => ristretto::batch_verify(k, items, rng),
        PublicInner::Modp(k) => modp::batch_verify(k, items, rng),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    fn each_suite(mut f: impl FnMut(SignatureSuite)) {
        for suite in SignatureSuite::ALL {
            f(suite);
        }
    }

    #[test]
    fn sign_verify_all_suites() {
        each_suite(|suite| {
            let mut rng = ChaCha20Rng::seed_from_u64(7);
            let sk = SigningKey::generate(suite, &mut rng);
            let sig = sk.sign(b"hello");
            assert_eq!(sig.len(), suite.signature_len());
            assert_eq!(sk.verifying_key().as_bytes().len(), suite.public_key_len());
            assert!(sk.verifying_key().verify(b"hello", &sig));
            assert!(!sk.verifying_key().verify(b"hellp", &sig));
            let other = SigningKey::generate(suite, &mut rng);
            assert!(!other.verifying_key().verify(b"hello", &sig));
            assert!(!sk.verifying_key().verify(b"hello", &sig[1..]));
        });
    }

    #[test]
    fn keys_round_trip() {
        each_suite(|suite| {
            let mut rng = ChaCha20Rng::seed_from_u64(8);
            let sk = SigningKey::generate(suite, &mut rng);
            let again = SigningKey::from_bytes(suite, &sk.to_bytes()).unwrap();
            assert_eq!(again.verifying_key(), sk.verifying_key());
            let vk = VerifyingKey::from_bytes(sk.verifying_key().as_bytes()).unwrap();
            assert_eq!(vk.suite(), suite);
        });
    }

    #[test]
    fn batch_accepts_valid_and_rejects_one_bad() {
        each_suite(|suite| {
            let mut rng = ChaCha20Rng::seed_from_u64(9);
            let sk = SigningKey::generate(suite, &mut rng);
            let msgs: Vec<Vec<u8>> = (0..6u8).map(|i| vec![i; 10]).collect();
            let mut sigs: Vec<Vec<u8>> = msgs.iter().map(|m| sk.sign(m)).collect();
            let items = |sigs: &[Vec<u8>]| -> Vec<(Vec<u8>, Vec<u8>)> {
                msgs.iter().cloned().zip(sigs.iter().cloned()).collect()
            };
            let owned = items(&sigs);
            let refs: Vec<(&[u8], &[u8])> = owned
                .iter()
                .map(|(m, s)| (m.as_slice(), s.as_slice()))
                .collect();
            assert!(batch_verify(sk.verifying_key(), &refs, &mut rng).unwrap());
            sigs[3][0] ^= 0x01;
            let owned = items(&sigs);
            let refs: Vec<(&[u8], &[u8])> = owned
                .iter()
                .map(|(m, s)| (m.as_slice(), s.as_slice()))
                .collect();
            assert!(!batch_verify(sk.verifying_key(), &refs, &mut rng).unwrap());
        });
    }

    // testdata/schnorr.hex comes from testdata/oracle.py: libsodium's
    // Ristretto255 scalar/point ops and Python integers for MODP.
    fn vector(label: &str) -> Vec<u8> {
        let text = include_str!("../../../testdata/schnorr.hex");
        let line = text
            .lines()
            .find_map(|l| l.strip_prefix(&format!("{label} = ")))
            .unwrap_or_else(|| panic!("missing vector {label}"));
        hex::decode(line.trim()).unwrap()
    }

    #[test]
    fn signatures_match_reference_vectors() {
        let msg = vector("payload_message");
        assert_eq!(
            msg,
            crate::crypto::payload_message(b"/edu/uci/xyz", &[9; 32], &[1; 16], 1000)
        );
        for (suite, prefix) in [
            (SignatureSuite::Ristretto255, "ristretto"),
            (SignatureSuite::Modp1024, "modp1024"),
        ] {
            let sk = SigningKey::from_bytes(suite, &vector(&format!("{prefix}_secret"))).unwrap();
            assert_eq!(
                sk.verifying_key().as_bytes(),
                vector(&format!("{prefix}_public")),
                "{suite}"
            );
            let sig = sk.sign(&msg);
            assert_eq!(sig, vector(&format!("{prefix}_signature")), "{suite}");
            assert!(sk.verifying_key().verify(&msg, &sig));
        }
    }

    #[test]
    fn empty_batch_is_an_error() {
        let mut rng = ChaCha20Rng::seed_from_u64(1);
        let sk = SigningKey::generate(SignatureSuite::Ristretto255, &mut rng);
        assert_eq!(
            batch_verify(sk.verifying_key(), &[], &mut rng),
            Err(CryptoError::EmptyBatch)
        );
    }

    #[test]
    fn suite_parsing() {
        assert_eq!(
            "modp2048".parse::<SignatureSuite>().unwrap(),
            SignatureSuite::Modp2048
        );
        assert_eq!(
            "1024".parse::<SignatureSuite>().unwrap(),
            SignatureSuite::Modp1024
        );
        assert_eq!(
            SignatureSuite::from_key_bits(512),
            Err(CryptoError::UnsupportedKeySize(512))
        );
        for s in SignatureSuite::ALL {
            assert_eq!(SignatureSuite::from_tag(s.tag()), Some(s));
        }
    }
}
