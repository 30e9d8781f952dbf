//! Pending interest table keyed by exact name bytes.

use std::collections::{BTreeMap, BTreeSet};

use super::{FaceId, TraceId};
use crate::message::AuthorizationPayload;
use crate::name::MessageName;

pub const DEFAULT_PIT_LIFETIME_MS: u64 = 4000;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PendingInterest {
    pub face: FaceId,
    pub payload: Option<AuthorizationPayload>,
    pub trace: TraceId,
}

#[derive(Debug, Clone)]
pub struct PitEntry {
    pub name: MessageName,
    pub pending: Vec<PendingInterest>,
    pub created_ms: u64,
    pub expires_ms: u64,
}

impl PitEntry {
    /// Distinct arrival faces in first-arrival order.
    pub fn faces(&self) -> Vec<FaceId> {
        let mut out: Vec<FaceId> = Vec::new();
        for p in &self.pending {
            if !out.contains(&p.face) {
                out.push(p.face);
            }
        }
        out
    }
}

#[derive(Debug, Clone)]
pub struct Pit {
    entries: BTreeMap<Vec<u8>, PitEntry>,
    expiry: BTreeSet<(u64, Vec<u8>)>,
    lifetime_ms: u64,
}

impl Pit {
    pub fn new(lifetime_ms: u64) -> Self {
        Self {
            entries: BTreeMap::new(),
            expiry: BTreeSet::new(),
            lifetime_ms,
        }
    }

    pub fn get(&self, name: &[u8]) -> Option<&PitEntry> {
        self.entries.get(name)
    }

    pub fn contains(&self, name: &[u8]) -> bool {
        self.entries.contains_key(name)
    }

    /// Creates an entry holding one pending interest.
    pub fn create(&mut self, key: Vec<u8>, name: MessageName, first: PendingInterest, now_ms: u64) {
        let expires_ms = now_ms.saturating_add(self.lifetime_ms);
        self.expiry.insert((expires_ms, key.clone()));
        self.entries.insert(
            key,
            PitEntry {
                name,
                pending: vec![first],
                created_ms: now_ms,
                expires_ms,
            },
        );
    }

    /// Adds an interest to an existing entry; false if there is none.
    pub fn aggregate(&mut self, key: &[u8], p: PendingInterest) -> bool {
        match self.entries.get_mut(key) {
            Some(e) => {
                e.pending.push(p);
                true
            }
            None => false,
        }
    }

    pub fn take(&mut self, key: &[u8]) -> Option<PitEntry> {
        let e = self.entries.remove(key)?;
        self.expiry.remove(&(e.expires_ms, key.to_vec()));
        Some(e)
    }

    /// Removes and returns entries whose lifetime ended at or before `now`.
    pub fn expire(&mut self, now_ms: u64) -> Vec<(Vec<u8>, PitEntry)> {
        let mut out = Vec::new();
        while let Some((t, _)) = self.expiry.first() {
            if *t > now_ms {
                break;
            }
            let (_, key) = self.expiry.pop_first().unwrap();
            if let Some(e) = self.entries.remove(&key) {
                out.push((key, e));
            }
        }
        out
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
}
