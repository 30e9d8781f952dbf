//! Access-group key material and its binary import/export form.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;

use super::{
    key_id, CryptoError, ObfuscationKey, SecurityLevel, SignatureSuite, SigningKey, VerifyingKey,
    DIGEST_LEN,
};

/// Everything a group member holds: `k`, `sk^s`, `pk^s` and `ID = H(k)`.
#[derive(Clone, Debug)]
pub struct GroupKeyMaterial {
    obfuscation_key: ObfuscationKey,
    signing_key: SigningKey,
    group_id: [u8; DIGEST_LEN],
}

/// The part a producer registers: `k`, `pk^s` and the id, without `sk^s`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GroupPublic {
    pub group_id: [u8; DIGEST_LEN],
    pub obfuscation_key: ObfuscationKey,
    pub verifying_key: VerifyingKey,
}

/// `Gen(1^κ)` seeded for reproducibility, with the default signature suite.
pub fn gen_group(kappa: u32, seed: u64) -> Result<GroupKeyMaterial, CryptoError> {
    gen_group_with_suite(kappa, SignatureSuite::default(), seed)
}

pub fn gen_group_with_suite(
    kappa: u32,
    suite: SignatureSuite,
    seed: u64,
) -> Result<GroupKeyMaterial, CryptoError> {
    let level = SecurityLevel::from_bits(kappa)?;
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut k = vec![0u8; level.bytes()];
    rng.fill_bytes(&mut k);
    let signing_key = SigningKey::generate(suite, &mut rng);
    GroupKeyMaterial::new(ObfuscationKey::new(k)?, signing_key)
}

impl GroupKeyMaterial {
    /// Assembles material and runs a sign-then-verify self-test.
    pub fn new(
        obfuscation_key: ObfuscationKey,
        signing_key: SigningKey,
    ) -> Result<Self, CryptoError> {
        let probe = b"ibac/keys/self-test";
        if !signing_key
            .verifying_key()
            .verify(probe, &signing_key.sign(probe))
        {
            return Err(CryptoError::SelfTestFailed);
        }
        let group_id = key_id(&obfuscation_key);
        Ok(Self {
            obfuscation_key,
            signing_key,
            group_id,
        })
    }

    pub fn obfuscation_key(&self) -> &ObfuscationKey {
        &self.obfuscation_key
    }

    pub fn signing_key(&self) -> &SigningKey {
        &self.signing_key
    }

    pub fn verifying_key(&self) -> &VerifyingKey {
        self.signing_key.verifying_key()
    }

    pub fn group_id(&self) -> &[u8; DIGEST_LEN] {
        &self.group_id
    }

    pub fn level(&self) -> SecurityLevel {
        self.obfuscation_key.level()
    }

    pub fn public(&self) -> GroupPublic {
        GroupPublic {
            group_id: self.group_id,
            obfuscation_key: self.obfuscation_key.clone(),
            verifying_key: self.verifying_key().clone(),
        }
    }

    /// `len || k`, `len || suite tag`, `len || sk^s`; lengths are u32 BE.
    pub fn export(&self) -> Vec<u8> {
        let mut out = Vec::new();
        put(&mut out, self.obfuscation_key.as_bytes());
        put(&mut out, &[self.signing_key.suite().tag()]);
        put(&mut out, &self.signing_key.to_bytes());
        out
    }

    pub fn import(bytes: &[u8]) -> Result<Self, CryptoError> {
        let mut r = Fields(bytes);
        let k = ObfuscationKey::new(r.next()?.to_vec())?;
        let suite = match r.next()? {
            [tag] => SignatureSuite::from_tag(*tag)
                .ok_or(CryptoError::MalformedKey("unknown suite tag"))?,
            _ => return Err(CryptoError::MalformedKey("suite field")),
        };
        let sk = SigningKey::from_bytes(suite, r.next()?)?;
        r.finish()?;
        Self::new(k, sk)
    }
}

impl GroupPublic {
    /// `len || k`, `len || pk^s`. The id is recomputed on import.
    pub fn export(&self) -> Vec<u8> {
        let mut out = Vec::new();
        put(&mut out, self.obfuscation_key.as_bytes());
        put(&mut out, self.verifying_key.as_bytes());
        out
    }

    pub fn import(bytes: &[u8]) -> Result<Self, CryptoError> {
        let mut r = Fields(bytes);
        let obfuscation_key = ObfuscationKey::new(r.next()?.to_vec())?;
        let verifying_key = VerifyingKey::from_bytes(r.next()?)?;
        r.finish()?;
        Ok(GroupPublic {
            group_id: key_id(&obfuscation_key),
            obfuscation_key,
            verifying_key,
        })
    }
}

fn put(out: &mut Vec<u8>, field: &[u8]) {
    out.extend_from_slice(&(field.len() as u32).to_be_bytes());
    out.extend_from_slice(field);
}

struct Fields<'a>(&'a [u8]);

impl<'a> Fields<'a> {
    fn next(&mut self) -> Result<&'a [u8], CryptoError> {
        let err = CryptoError::MalformedKey("truncated key blob");
        let len =
            u32::from_be_bytes(self.0.get(..4).ok_or(err.clone())?.try_into().unwrap()) as usize;
        let field = self.0.get(4..4 + len).ok_or(err)?;
        self.0 = &self.0[4 + len..];
        Ok(field)
    }

    fn finish(self) -> Result<(), CryptoError> {
        if self.0.is_empty() {
            Ok(())
        } else {
            Err(CryptoError::MalformedKey("trailing bytes in key blob"))
        }
    }
}
