//! Producer: group registry, content catalog, hash-name map, interest
//! authorization and content object generation.

use std::collections::BTreeMap;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;
use thiserror::Error;

use crate::auth::{AuthFailure, DropReason, NonceStore, TimestampPolicy, Verdict};
use crate::consumer::{IbacMode, ObfuscationScheme};
use crate::crypto::{
    decrypt_group_id, deobfuscate_enc, key_id, obfuscate_hash, verify_payload, CryptoError,
    GroupPublic, ObfuscationKey, ProducerKeyPair, ProducerPublicKey, SignatureSuite, SigningKey,
    DIGEST_LEN,
};
use crate::message::{AuthorizationPayload, ContentObject, Interest, VerificationKeyEntry};
use crate::name::{suffix, Component, MessageName, Name, SchemeTag};
use crate::wire::{content_signing_bytes, encode_name};

pub type GroupId = [u8; DIGEST_LEN];

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ProducerError {
    #[error("group {} is already registered", hex::encode(.0))]
    DuplicateGroup(GroupId),
    #[error("group {} is not registered", hex::encode(.0))]
    UnknownGroup(GroupId),
    #[error("group id does not match the digest of its obfuscation key")]
    GroupIdMismatch,
    #[error("protected content needs at least one authorized group")]
    NoGroups,
    #[error("content {0} is already published")]
    DuplicateContent(String),
    #[error("{0} lies outside the producer prefix")]
    OutsidePrefix(String),
    #[error("name {0} has nothing after its routable prefix")]
    EmptySuffix(String),
    #[error(transparent)]
    Crypto(#[from] CryptoError),
}

/// `ID -> (k, pk^s)`, with optional revocation times.
#[derive(Debug, Clone, Default)]
pub struct GroupRegistry {
    groups: BTreeMap<GroupId, (GroupPublic, Option<u64>)>,
}

impl GroupRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn register(&mut self, group: GroupPublic) -> Result<(), ProducerError> {
        if key_id(&group.obfuscation_key) != group.group_id {
            return Err(ProducerError::GroupIdMismatch);
        }
        if self.groups.contains_key(&group.group_id) {
            return Err(ProducerError::DuplicateGroup(group.group_id));
        }
        self.groups.insert(group.group_id, (group, None));
        Ok(())
    }

    pub fn lookup(&self, id: &[u8]) -> Option<&GroupPublic> {
        let id: GroupId = id.try_into().ok()?;
        self.groups.get(&id).map(|(g, _)| g)
    }

    pub fn contains(&self, id: &GroupId) -> bool {
        self.groups.contains_key(id)
    }

    /// From `at_ms` on, the group no longer receives content from this producer.
    pub fn revoke(&mut self, id: &GroupId, at_ms: u64) -> Result<(), ProducerError> {
        let slot = self
            .groups
            .get_mut(id)
            .ok_or(ProducerError::UnknownGroup(*id))?;
        slot.1 = Some(at_ms);
        Ok(())
    }

    pub fn is_active(&self, id: &GroupId, now_ms: u64) -> bool {
        self.groups
            .get(id)
            .is_some_and(|(_, revoked)| revoked.is_none_or(|t| now_ms < t))
    }

    pub fn len(&self) -> usize {
        self.groups.len()
    }

    pub fn is_empty(&self) -> bool {
        self.groups.is_empty()
    }
}

/// A published protected content object.
#[derive(Debug, Clone)]
pub struct CatalogEntry {
    pub name: Name,
    pub data: Vec<u8>,
    pub groups: Vec<GroupId>,
    pub scheme: ObfuscationScheme,
    pub mode: IbacMode,
    pub lifetime_ms: u64,
    /// Key used to form hashed names; shared by every authorized group.
    pub hash_key: Option<ObfuscationKey>,
}

#[derive(Debug, Clone)]
pub struct PublicEntry {
    pub data: Vec<u8>,
    pub lifetime_ms: u64,
}

/// Cleartext name -> protected or public content.
#[derive(Debug, Clone, Default)]
pub struct ContentCatalog {
    protected: BTreeMap<Vec<Component>, CatalogEntry>,
    public: BTreeMap<Vec<Component>, PublicEntry>,
}

impl ContentCatalog {
    pub fn get(&self, components: &[Component]) -> Option<&CatalogEntry> {
        self.protected.get(components)
    }

    pub fn get_public(&self, components: &[Component]) -> Option<&PublicEntry> {
        self.public.get(components)
    }

    pub fn entries(&self) -> impl Iterator<Item = &CatalogEntry> {
        self.protected.values()
    }

    /// Public entries with their cleartext components.
    pub fn public_entries(&self) -> impl Iterator<Item = (&Vec<Component>, &PublicEntry)> {
        self.public.iter()
    }

    pub fn len(&self) -> usize {
        self.protected.len() + self.public.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn contains(&self, components: &[Component]) -> bool {
        self.protected.contains_key(components) || self.public.contains_key(components)
    }
}

/// Hashed name bytes -> (cleartext name, id of the key that produced them).
#[derive(Debug, Clone, Default)]
pub struct HashNameMap {
    entries: BTreeMap<Vec<u8>, (Name, GroupId)>,
}

impl HashNameMap {
    pub fn resolve(&self, name_bytes: &[u8]) -> Option<&(Name, GroupId)> {
        self.entries.get(name_bytes)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

#[derive(Debug, Clone)]
pub struct ProducerConfig {
    /// Every published name must start with this prefix.
    pub prefix: Vec<Component>,
    /// Timestamp window `w`; defaults to the longest published lifetime.
    pub window_ms: Option<u64>,
    pub skew_ms: u64,
    pub content_suite: SignatureSuite,
    pub seed: u64,
}

impl ProducerConfig {
    pub fn new(prefix: Vec<Component>, seed: u64) -> Self {
        Self {
            prefix,
            window_ms: None,
            skew_ms: TimestampPolicy::DEFAULT_SKEW_MS,
            content_suite: SignatureSuite::default(),
            seed,
        }
    }
}

/// What a producer knows about the group behind an interest.
struct ResolvedGroup {
    id: GroupId,
    public: GroupPublic,
}

pub struct Producer {
    config: ProducerConfig,
    registry: GroupRegistry,
    catalog: ContentCatalog,
    hash_map: HashNameMap,
    nonces: NonceStore,
    decryption_key: ProducerKeyPair,
    content_key: SigningKey,
    rng: ChaCha20Rng,
}

impl Producer {
    pub fn new(config: ProducerConfig) -> Self {
        let mut rng = ChaCha20Rng::seed_from_u64(config.seed);
        let decryption_key = ProducerKeyPair::generate(&mut rng);
        let content_key = SigningKey::generate(config.content_suite, &mut rng);
        Self {
            config,
            registry: GroupRegistry::new(),
            catalog: ContentCatalog::default(),
            hash_map: HashNameMap::default(),
            nonces: NonceStore::new(),
            decryption_key,
            content_key,
            rng,
        }
    }

    pub fn prefix(&self) -> &[Component] {
        &self.config.prefix
    }

    /// `pk^P` consumers may use to hide their group id.
    pub fn encryption_public(&self) -> &ProducerPublicKey {
        self.decryption_key.public()
    }

    /// Verification key for producer content signatures.
    pub fn content_verifying_key(&self) -> &crate::crypto::VerifyingKey {
        self.content_key.verifying_key()
    }

    pub fn registry(&self) -> &GroupRegistry {
        &self.registry
    }

    pub fn catalog(&self) -> &ContentCatalog {
        &self.catalog
    }

    pub fn hash_map(&self) -> &HashNameMap {
        &self.hash_map
    }

    pub fn nonce_store(&self) -> &NonceStore {
        &self.nonces
    }

    pub fn register_group(&mut self, group: GroupPublic) -> Result<(), ProducerError> {
        self.registry.register(group)
    }

    pub fn revoke_group(&mut self, id: &GroupId, at_ms: u64) -> Result<(), ProducerError> {
        self.registry.revoke(id, at_ms)
    }

    /// The timestamp window currently in force.
    pub fn window_ms(&self) -> u64 {
        self.config.window_ms.unwrap_or_else(|| {
            let protected = self.catalog.protected.values().map(|e| e.lifetime_ms);
            protected.max().unwrap_or(0)
        })
    }

    fn check_name(&self, name: &Name) -> Result<(), ProducerError> {
        let comps = name.components();
        if comps.len() < self.config.prefix.len()
            || comps[..self.config.prefix.len()] != self.config.prefix[..]
        {
            return Err(ProducerError::OutsidePrefix(name.to_string()));
        }
        if self.catalog.contains(comps) {
            return Err(ProducerError::DuplicateContent(name.to_string()));
        }
        Ok(())
    }

    /// Publishes protected content. Under HASH with more than one group a
    /// content-scoped hash key is generated and returned; it must reach
    /// every authorized group out of band.
    pub fn publish(
        &mut self,
        name: Name,
        data: Vec<u8>,
        groups: &[GroupId],
        scheme: ObfuscationScheme,
        mode: IbacMode,
        lifetime_ms: u64,
    ) -> Result<Option<ObfuscationKey>, ProducerError> {
        self.check_name(&name)?;
        if groups.is_empty() {
            return Err(ProducerError::NoGroups);
        }
        if let Some(missing) = groups.iter().find(|g| !self.registry.contains(g)) {
            return Err(ProducerError::UnknownGroup(*missing));
        }
        let mut groups = groups.to_vec();
        groups.dedup();
        let mut shared = None;
        let mut hash_key = None;
        if mode.obfuscates() && scheme == ObfuscationScheme::Hash {
            let rest = suffix(&name, name.routable_prefix())
                .map_err(|_| ProducerError::EmptySuffix(name.to_string()))?;
            let key = if groups.len() == 1 {
                self.registry
                    .lookup(&groups[0])
                    .expect("checked above")
                    .obfuscation_key
                    .clone()
            } else {
                let level = self
                    .registry
                    .lookup(&groups[0])
                    .expect("checked above")
                    .obfuscation_key
                    .level();
                let mut k = vec![0u8; level.bytes()];
                self.rng.fill_bytes(&mut k);
                let k = ObfuscationKey::new(k)?;
                shared = Some(k.clone());
                k
            };
            let digest = obfuscate_hash(&key, &rest)?;
            let obfuscated = crate::name::ObfuscatedName::new(
                name.routable_prefix().to_vec(),
                digest,
                SchemeTag::Hash,
            )
            .expect("prefix and digest are non-empty");
            let bytes = encode_name(&MessageName::Obfuscated(obfuscated))
                .expect("name fits the wire format");
            self.hash_map
                .entries
                .insert(bytes, (name.clone(), key_id(&key)));
            hash_key = Some(key);
        } else if mode.obfuscates() && name.routable_prefix_len() == name.len() {
            return Err(ProducerError::EmptySuffix(name.to_string()));
        }
        let entry = CatalogEntry {
            name: name.clone(),
            data,
            groups,
            scheme,
            mode,
            lifetime_ms,
            hash_key,
        };
        self.catalog
            .protected
            .insert(name.components().to_vec(), entry);
        Ok(shared)
    }

    /// Publishes content anyone may fetch and any cache may serve.
    pub fn publish_public(
        &mut self,
        name: Name,
        data: Vec<u8>,
        lifetime_ms: u64,
    ) -> Result<(), ProducerError> {
        self.check_name(&name)?;
        self.catalog.public.insert(
            name.components().to_vec(),
            PublicEntry { data, lifetime_ms },
        );
        Ok(())
    }

    fn resolve_group(&self, payload: &AuthorizationPayload) -> Result<ResolvedGroup, AuthFailure> {
        let id = if payload.group_id_encrypted {
            decrypt_group_id(&self.decryption_key, &payload.group_id)
                .map_err(|_| AuthFailure::UnknownGroup)?
        } else {
            payload.group_id.clone()
        };
        let public = self
            .registry
            .lookup(&id)
            .ok_or(AuthFailure::UnknownGroup)?
            .clone();
        Ok(ResolvedGroup {
            id: public.group_id,
            public,
        })
    }

    /// Group lookup, then nonce, timestamp and signature checks. On Pass the
    /// nonce is remembered for as long as its timestamp stays acceptable.
    pub fn authorize(&mut self, interest: &Interest, now_ms: u64) -> Verdict {
        match self.authorize_inner(interest, now_ms) {
            Ok(_) => Verdict::Pass,
            Err(f) => Verdict::Fail(f),
        }
    }

    fn authorize_inner(
        &mut self,
        interest: &Interest,
        now_ms: u64,
    ) -> Result<ResolvedGroup, AuthFailure> {
        let payload = interest
            .payload
            .as_ref()
            .ok_or(AuthFailure::MissingAuthorization)?;
        let auth = payload
            .authenticator
            .as_ref()
            .ok_or(AuthFailure::MissingAuthorization)?;
        let group = self.resolve_group(payload)?;
        let name = encode_name(&interest.name).map_err(|_| AuthFailure::BadSignature)?;
        self.nonces.prune(now_ms);
        if self.nonces.contains(&name, &auth.nonce) {
            return Err(AuthFailure::DuplicateNonce);
        }
        let policy = TimestampPolicy {
            window_ms: self.window_ms(),
            skew_ms: self.config.skew_ms,
        };
        if !policy.accepts(auth.timestamp_ms, now_ms) {
            return Err(AuthFailure::StaleTimestamp);
        }
        let vk = &group.public.verifying_key;
        if !verify_payload(
            vk,
            &name,
            &payload.group_id,
            &auth.nonce,
            auth.timestamp_ms,
            &auth.signature,
        ) {
            return Err(AuthFailure::BadSignature);
        }
        let retain_until = auth
            .timestamp_ms
            .saturating_add(policy.window_ms)
            .saturating_add(1);
        self.nonces.insert(&name, &auth.nonce, retain_until);
        Ok(group)
    }

    /// Answers an interest or returns the reason it is silently dropped.
    pub fn content_object_generation(
        &mut self,
        interest: &Interest,
        now_ms: u64,
    ) -> Result<ContentObject, DropReason> {
        let prefix = &self.config.prefix;
        let routable = interest.name.routable_prefix();
        if routable.len() < prefix.len() || routable[..prefix.len()] != prefix[..] {
            return Err(DropReason::WrongPrefix);
        }
        let has_auth = interest
            .payload
            .as_ref()
            .is_some_and(|p| p.authenticator.is_some());

        if let MessageName::Clear(name) = &interest.name {
            if let Some(public) = self.catalog.get_public(name.components()) {
                let (data, lifetime) = (public.data.clone(), public.lifetime_ms);
                return Ok(self.build(interest, data, Vec::new(), now_ms, lifetime));
            }
        }

        let group = if has_auth {
            self.authorize_inner(interest, now_ms)?
        } else {
            let payload = interest
                .payload
                .as_ref()
                .ok_or(DropReason::MissingPayload)?;
            self.resolve_group(payload)?
        };

        let entry = match &interest.name {
            MessageName::Clear(name) => {
                let entry = self
                    .catalog
                    .get(name.components())
                    .ok_or(DropReason::UnknownName)?;
                if entry.mode != IbacMode::AuthOnly {
                    return Err(DropReason::ModeMismatch);
                }
                entry
            }
            MessageName::Obfuscated(o) => {
                let components = match o.scheme() {
                    SchemeTag::Enc => {
                        let rest =
                            deobfuscate_enc(&group.public.obfuscation_key, o.obfuscated_suffix())
                                .map_err(|_| DropReason::ObfuscationFailure)?;
                        let mut full = o.routable_prefix().to_vec();
                        full.extend(rest);
                        full
                    }
                    SchemeTag::Hash => {
                        let bytes =
                            encode_name(&interest.name).map_err(|_| DropReason::Malformed)?;
                        let (name, _) = self
                            .hash_map
                            .resolve(&bytes)
                            .ok_or(DropReason::UnknownName)?;
                        name.components().to_vec()
                    }
                    SchemeTag::None => return Err(DropReason::ModeMismatch),
                };
                let entry = self
                    .catalog
                    .get(&components)
                    .ok_or(DropReason::UnknownName)?;
                if !entry.mode.obfuscates() || entry.scheme.tag() != o.scheme() {
                    return Err(DropReason::ModeMismatch);
                }
                entry
            }
        };
        if entry.mode.authenticates() && !has_auth {
            return Err(DropReason::Auth(AuthFailure::MissingAuthorization));
        }
        if !entry.groups.contains(&group.id) || !self.registry.is_active(&group.id, now_ms) {
            return Err(DropReason::GroupNotAuthorized);
        }
        let keys = if entry.mode.authenticates() {
            entry
                .groups
                .iter()
                .filter(|g| self.registry.is_active(g, now_ms))
                .filter_map(|g| self.registry.lookup(g))
                .map(|g| VerificationKeyEntry {
                    group_id: g.group_id.to_vec(),
                    key: g.verifying_key.to_bytes(),
                })
                .collect()
        } else {
            Vec::new()
        };
        let (data, lifetime) = (entry.data.clone(), entry.lifetime_ms);
        Ok(self.build(interest, data, keys, now_ms, lifetime))
    }

    fn build(
        &self,
        interest: &Interest,
        data: Vec<u8>,
        verification_keys: Vec<VerificationKeyEntry>,
        now_ms: u64,
        lifetime_ms: u64,
    ) -> ContentObject {
        let mut co = ContentObject {
            name: interest.name.clone(),
            data,
            verification_keys,
            expiry_time_ms: now_ms.saturating_add(lifetime_ms),
            producer_signature: Vec::new(),
        };
        let signed = content_signing_bytes(&co).expect("content fits the wire format");
        co.producer_signature = self.content_key.sign(&signed);
        co
    }
}

/// Number of hash-name entries the catalog should need: one per HASH
/// content, since all its groups share one content-scoped key.
pub fn expected_hash_entries(catalog: &ContentCatalog) -> usize {
    catalog
        .entries()
        .filter(|e| e.mode.obfuscates() && e.scheme == ObfuscationScheme::Hash)
        .count()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::consumer::{interest_generation, ConsumerContext};
    use crate::crypto::{gen_group, GroupKeyMaterial};
    use crate::message::Authenticator;
    use rand::SeedableRng;

    const LIFE: u64 = 10_000;

    fn setup(groups: &[&GroupKeyMaterial]) -> Producer {
        let mut p = Producer::new(ProducerConfig::new(
            vec![b"edu".to_vec(), b"uci".to_vec()],
            99,
        ));
        for g in groups {
            p.register_group(g.public()).unwrap();
        }
        p
    }

    fn home() -> Name {
        Name::parse_with_prefix("/edu/uci/ics/home.html", "/edu/uci").unwrap()
    }

    fn interest(ctx: &ConsumerContext, name: &Name, now: u64, seed: u64) -> Interest {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        interest_generation(ctx, name.routable_prefix(), name, now, &mut rng).unwrap()
    }

    #[test]
    fn registry_semantics() {
        let g = gen_group(128, 1).unwrap();
        let mut r = GroupRegistry::new();
        r.register(g.public()).unwrap();
        assert_eq!(r.lookup(g.group_id()).unwrap(), &g.public());
        assert_eq!(
            r.register(g.public()),
            Err(ProducerError::DuplicateGroup(*g.group_id()))
        );
        assert!(r.lookup(&[0u8; 32]).is_none());
        let mut forged = gen_group(128, 2).unwrap().public();
        forged.group_id = [1; 32];
        assert_eq!(r.register(forged), Err(ProducerError::GroupIdMismatch));
    }

    #[test]
    fn publish_hash_two_groups_shares_one_name() {
        let (a, b) = (gen_group(128, 1).unwrap(), gen_group(128, 2).unwrap());
        let mut p = setup(&[&a, &b]);
        let ids = [*a.group_id(), *b.group_id()];
        let shared = p
            .publish(
                home(),
                b"x".to_vec(),
                &ids,
                ObfuscationScheme::Hash,
                IbacMode::Full,
                LIFE,
            )
            .unwrap();
        assert!(shared.is_some());
        assert_eq!(p.catalog().len(), 1);
        assert_eq!(p.hash_map().len(), 1);
        assert_eq!(p.hash_map().len(), expected_hash_entries(p.catalog()));
    }

    #[test]
    fn publish_enc_has_no_hash_entries_and_checks_groups() {
        let a = gen_group(128, 1).unwrap();
        let mut p = setup(&[&a]);
        p.publish(
            home(),
            b"x".to_vec(),
            &[*a.group_id()],
            ObfuscationScheme::Enc,
            IbacMode::Full,
            LIFE,
        )
        .unwrap();
        assert!(p.hash_map().is_empty());
        let other = Name::parse("/edu/uci/other", 2).unwrap();
        let err = p.publish(
            other,
            vec![],
            &[[7; 32]],
            ObfuscationScheme::Enc,
            IbacMode::Full,
            LIFE,
        );
        assert_eq!(err, Err(ProducerError::UnknownGroup([7; 32])));
    }

    #[test]
    fn authorize_pass_replay_and_stale() {
        let a = gen_group(128, 1).unwrap();
        let mut p = setup(&[&a]);
        p.publish(
            home(),
            b"x".to_vec(),
            &[*a.group_id()],
            ObfuscationScheme::Enc,
            IbacMode::Full,
            LIFE,
        )
        .unwrap();
        let ctx = ConsumerContext::new(a.clone(), IbacMode::Full, ObfuscationScheme::Enc);
        let i = interest(&ctx, &home(), 1000, 1);
        assert_eq!(p.authorize(&i, 1000), Verdict::Pass);
        assert_eq!(p.nonce_store().len(), 1);
        assert_eq!(
            p.authorize(&i, 1001),
            Verdict::Fail(AuthFailure::DuplicateNonce)
        );
        let old = interest(&ctx, &home(), 1000, 2);
        assert_eq!(
            p.authorize(&old, 1000 + LIFE + 1),
            Verdict::Fail(AuthFailure::StaleTimestamp)
        );
        let future = interest(&ctx, &home(), 5000, 3);
        assert_eq!(
            p.authorize(&future, 3000),
            Verdict::Fail(AuthFailure::StaleTimestamp)
        );
    }

    #[test]
    fn nonces_leave_with_their_window() {
        let a = gen_group(128, 1).unwrap();
        let mut p = setup(&[&a]);
        p.publish(
            home(),
            b"x".to_vec(),
            &[*a.group_id()],
            ObfuscationScheme::Enc,
            IbacMode::Full,
            LIFE,
        )
        .unwrap();
        let ctx = ConsumerContext::new(a.clone(), IbacMode::Full, ObfuscationScheme::Enc);
        assert_eq!(
            p.authorize(&interest(&ctx, &home(), 0, 1), 0),
            Verdict::Pass
        );
        assert_eq!(p.nonce_store().latest_retention_ms(), Some(LIFE + 1));
        let later = interest(&ctx, &home(), LIFE + 1, 2);
        assert_eq!(p.authorize(&later, LIFE + 1), Verdict::Pass);
        assert_eq!(p.nonce_store().len(), 1);
    }

    #[test]
    fn full_enc_content_generation() {
        let a = gen_group(128, 1).unwrap();
        let mut p = setup(&[&a]);
        p.publish(
            home(),
            b"page".to_vec(),
            &[*a.group_id()],
            ObfuscationScheme::Enc,
            IbacMode::Full,
            LIFE,
        )
        .unwrap();
        let ctx = ConsumerContext::new(a.clone(), IbacMode::Full, ObfuscationScheme::Enc);
        let i = interest(&ctx, &home(), 50, 1);
        let co = p.content_object_generation(&i, 60).unwrap();
        assert_eq!(
            encode_name(&co.name).unwrap(),
            encode_name(&i.name).unwrap()
        );
        assert_eq!(co.data, b"page");
        assert_eq!(co.verification_keys.len(), 1);
        assert_eq!(co.verification_keys[0].key, a.verifying_key().to_bytes());
        assert_eq!(co.expiry_time_ms, 60 + LIFE);
        let signed = content_signing_bytes(&co).unwrap();
        assert!(p
            .content_verifying_key()
            .verify(&signed, &co.producer_signature));
    }

    #[test]
    fn bad_signature_is_dropped() {
        let a = gen_group(128, 1).unwrap();
        let mut p = setup(&[&a]);
        p.publish(
            home(),
            b"page".to_vec(),
            &[*a.group_id()],
            ObfuscationScheme::Enc,
            IbacMode::Full,
            LIFE,
        )
        .unwrap();
        let ctx = ConsumerContext::new(a.clone(), IbacMode::Full, ObfuscationScheme::Enc);
        let mut i = interest(&ctx, &home(), 50, 1);
        let auth: &mut Authenticator = i.payload.as_mut().unwrap().authenticator.as_mut().unwrap();
        auth.signature[5] ^= 1;
        assert_eq!(
            p.content_object_generation(&i, 60),
            Err(DropReason::Auth(AuthFailure::BadSignature))
        );
    }

    #[test]
    fn two_groups_get_both_keys() {
        let (a, b) = (gen_group(128, 1).unwrap(), gen_group(128, 2).unwrap());
        let mut p = setup(&[&a, &b]);
        let ids = [*a.group_id(), *b.group_id()];
        let shared = p
            .publish(
                home(),
                b"x".to_vec(),
                &ids,
                ObfuscationScheme::Hash,
                IbacMode::Full,
                LIFE,
            )
            .unwrap()
            .unwrap();
        let mut names = Vec::new();
        for (seed, g) in [(1, &a), (2, &b)] {
            let mut ctx = ConsumerContext::new(g.clone(), IbacMode::Full, ObfuscationScheme::Hash);
            ctx.add_content_key(&home(), shared.clone());
            let i = interest(&ctx, &home(), 10, seed);
            let co = p.content_object_generation(&i, 10).unwrap();
            assert_eq!(co.verification_keys.len(), 2);
            names.push(encode_name(&co.name).unwrap());
        }
        assert_eq!(names[0], names[1]);
    }

    #[test]
    fn encrypted_id_resolves_like_cleartext() {
        let a = gen_group(128, 1).unwrap();
        let mut p = setup(&[&a]);
        p.publish(
            home(),
            b"x".to_vec(),
            &[*a.group_id()],
            ObfuscationScheme::Enc,
            IbacMode::Full,
            LIFE,
        )
        .unwrap();
        let plain = ConsumerContext::new(a.clone(), IbacMode::Full, ObfuscationScheme::Enc);
        let hidden = plain
            .clone()
            .with_producer_public(p.encryption_public().clone());
        let c1 = p
            .content_object_generation(&interest(&plain, &home(), 0, 1), 0)
            .unwrap();
        let c2 = p
            .content_object_generation(&interest(&hidden, &home(), 0, 2), 0)
            .unwrap();
        assert_eq!(c1.verification_keys, c2.verification_keys);
        assert_eq!(c1.data, c2.data);
    }

    #[test]
    fn obfuscate_only_content_has_no_keys() {
        let a = gen_group(128, 1).unwrap();
        let mut p = setup(&[&a]);
        let ids = [*a.group_id()];
        p.publish(
            home(),
            b"x".to_vec(),
            &ids,
            ObfuscationScheme::Enc,
            IbacMode::ObfuscateOnly,
            LIFE,
        )
        .unwrap();
        let ctx = ConsumerContext::new(a.clone(), IbacMode::ObfuscateOnly, ObfuscationScheme::Enc);
        let co = p
            .content_object_generation(&interest(&ctx, &home(), 0, 1), 0)
            .unwrap();
        assert!(!co.requires_authorization());
    }

    #[test]
    fn revoked_group_is_refused() {
        let a = gen_group(128, 1).unwrap();
        let mut p = setup(&[&a]);
        p.publish(
            home(),
            b"x".to_vec(),
            &[*a.group_id()],
            ObfuscationScheme::Enc,
            IbacMode::Full,
            LIFE,
        )
        .unwrap();
        p.revoke_group(a.group_id(), 100).unwrap();
        let ctx = ConsumerContext::new(a.clone(), IbacMode::Full, ObfuscationScheme::Enc);
        assert!(p
            .content_object_generation(&interest(&ctx, &home(), 99, 1), 99)
            .is_ok());
        assert_eq!(
            p.content_object_generation(&interest(&ctx, &home(), 100, 2), 100),
            Err(DropReason::GroupNotAuthorized)
        );
    }
}
