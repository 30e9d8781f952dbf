//! Content store keyed by exact name bytes, with the per-entry nonce set.

use std::collections::{BTreeMap, BTreeSet};

use crate::auth::NonceSet;
use crate::crypto::VerifyingKey;
use crate::message::ContentObject;

#[derive(Debug, Clone)]
pub struct CacheEntry {
    pub content: ContentObject,
    pub inserted_at_ms: u64,
    pub expires_at_ms: u64,
    /// Timestamp window applied to interests served from this entry.
    pub window_ms: u64,
    /// `𝔹[N′]`, created with the entry and dropped with it.
    pub nonces: NonceSet,
    /// Parsed verification keys, parallel to `content.verification_keys`;
    /// `None` where the key bytes are malformed.
    pub keys: Vec<Option<VerifyingKey>>,
}

impl CacheEntry {
    /// `window` defaults to the remaining content lifetime.
    pub fn new(content: ContentObject, now_ms: u64, window_ms: Option<u64>) -> Self {
        let lifetime = content.expiry_time_ms.saturating_sub(now_ms);
        let window_ms = window_ms.unwrap_or(lifetime);
        let expires_at_ms = content.expiry_time_ms.min(now_ms.saturating_add(window_ms));
        let keys = content
            .verification_keys
            .iter()
            .map(|e| VerifyingKey::from_bytes(&e.key).ok())
            .collect();
        Self {
            content,
            inserted_at_ms: now_ms,
            expires_at_ms,
            window_ms,
            nonces: NonceSet::new(now_ms),
            keys,
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct ContentStore {
    entries: BTreeMap<Vec<u8>, CacheEntry>,
    expiry: BTreeSet<(u64, Vec<u8>)>,
}

impl ContentStore {
    pub fn get(&self, name: &[u8]) -> Option<&CacheEntry> {
        self.entries.get(name)
    }

    pub fn get_mut(&mut self, name: &[u8]) -> Option<&mut CacheEntry> {
        self.entries.get_mut(name)
    }

    pub fn contains(&self, name: &[u8]) -> bool {
        self.entries.contains_key(name)
    }

    pub fn insert(&mut self, name: Vec<u8>, entry: CacheEntry) {
        if let Some(old) = self.entries.get(&name) {
            self.expiry.remove(&(old.expires_at_ms, name.clone()));
        }
        self.expiry.insert((entry.expires_at_ms, name.clone()));
        self.entries.insert(name, entry);
    }

    /// Names whose entries are due at `now`, earliest first.
    pub fn due(&self, now_ms: u64) -> Vec<Vec<u8>> {
        self.expiry
            .iter()
            .take_while(|(t, _)| *t <= now_ms)
            .map(|(_, n)| n.clone())
            .collect()
    }

    pub fn remove(&mut self, name: &[u8]) -> Option<CacheEntry> {
        let e = self.entries.remove(name)?;
        self.expiry.remove(&(e.expires_at_ms, name.to_vec()));
        Some(e)
    }

    pub fn next_expiry(&self) -> Option<u64> {
        self.expiry.first().map(|e| e.0)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn names(&self) -> impl Iterator<Item = &Vec<u8>> {
        self.entries.keys()
    }
}
