//! Authorization verdicts, timestamp windows and nonce memories shared by
//! routers and producers.

use std::collections::{BTreeMap, BTreeSet, HashSet};

/// Why an authorization check failed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum AuthFailure {
    /// IBAC content requested without nonce, timestamp and signature.
    MissingAuthorization,
    DuplicateNonce,
    StaleTimestamp,
    BadSignature,
    /// The producer does not know the payload's group.
    UnknownGroup,
    /// The cached content carries no key for the payload's group.
    UnknownGroupKey,
}

impl AuthFailure {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::MissingAuthorization => "missing_authorization",
            Self::DuplicateNonce => "duplicate_nonce",
            Self::StaleTimestamp => "stale_timestamp",
            Self::BadSignature => "bad_signature",
            Self::UnknownGroup => "unknown_group",
            Self::UnknownGroupKey => "unknown_group_key",
        }
    }
}

/// Why a router or producer silently discarded a message.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum DropReason {
    Auth(AuthFailure),
    NoRoute,
    Unsolicited,
    PitExpired,
    /// Obfuscated interest without the payload that names its group.
    MissingPayload,
    WrongPrefix,
    /// The obfuscated suffix did not decrypt under the group key.
    ObfuscationFailure,
    UnknownName,
    GroupNotAuthorized,
    /// Name form or scheme does not match how the content was published.
    ModeMismatch,
    Malformed,
}

impl DropReason {
    pub const ALL: [DropReason; 16] = [
        Self::Auth(AuthFailure::MissingAuthorization),
        Self::Auth(AuthFailure::DuplicateNonce),
        Self::Auth(AuthFailure::StaleTimestamp),
        Self::Auth(AuthFailure::BadSignature),
        Self::Auth(AuthFailure::UnknownGroup),
        Self::Auth(AuthFailure::UnknownGroupKey),
        Self::NoRoute,
        Self::Unsolicited,
        Self::PitExpired,
        Self::MissingPayload,
        Self::WrongPrefix,
        Self::ObfuscationFailure,
        Self::UnknownName,
        Self::GroupNotAuthorized,
        Self::ModeMismatch,
        Self::Malformed,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Auth(f) => f.as_str(),
            Self::NoRoute => "no_route",
            Self::Unsolicited => "unsolicited",
            Self::PitExpired => "pit_expired",
            Self::MissingPayload => "missing_payload",
            Self::WrongPrefix => "wrong_prefix",
            Self::ObfuscationFailure => "obfuscation_failure",
            Self::UnknownName => "unknown_name",
            Self::GroupNotAuthorized => "group_not_authorized",
            Self::ModeMismatch => "mode_mismatch",
            Self::Malformed => "malformed",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|r| r.as_str() == s)
    }
}

impl From<AuthFailure> for DropReason {
    fn from(f: AuthFailure) -> Self {
        DropReason::Auth(f)
    }
}

impl std::fmt::Display for DropReason {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Verdict {
    Pass,
    Fail(AuthFailure),
}

impl Verdict {
    pub fn is_pass(self) -> bool {
        self == Verdict::Pass
    }
}

/// Accepts `t` in `[now - window, now + skew]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TimestampPolicy {
    pub window_ms: u64,
    pub skew_ms: u64,
}

impl TimestampPolicy {
    pub const DEFAULT_SKEW_MS: u64 = 1000;

    pub fn new(window_ms: u64) -> Self {
        Self {
            window_ms,
            skew_ms: Self::DEFAULT_SKEW_MS,
        }
    }

    pub fn accepts(&self, t: u64, now: u64) -> bool {
        t >= now.saturating_sub(self.window_ms) && t <= now.saturating_add(self.skew_ms)
    }
}

/// Per-content nonce set `𝔹[N′]` held by a cache for as long as the content
/// stays cached.
#[derive(Debug, Clone, Default)]
pub struct NonceSet {
    window_start_ms: u64,
    seen: HashSet<Vec<u8>>,
}

impl NonceSet {
    pub fn new(window_start_ms: u64) -> Self {
        Self {
            window_start_ms,
            seen: HashSet::new(),
        }
    }

    pub fn window_start_ms(&self) -> u64 {
        self.window_start_ms
    }

    pub fn contains(&self, nonce: &[u8]) -> bool {
        self.seen.contains(nonce)
    }

    /// Returns false if the nonce was already present.
    pub fn insert(&mut self, nonce: &[u8]) -> bool {
        self.seen.insert(nonce.to_vec())
    }

    pub fn len(&self) -> usize {
        self.seen.len()
    }

    pub fn is_empty(&self) -> bool {
        self.seen.is_empty()
    }
}

/// Producer-side nonce memory. Each nonce is kept until its timestamp can no
/// longer pass the timestamp check, then forgotten.
#[derive(Debug, Clone, Default)]
pub struct NonceStore {
    by_name: BTreeMap<Vec<u8>, BTreeMap<Vec<u8>, u64>>,
    expiry: BTreeSet<(u64, Vec<u8>, Vec<u8>)>,
}

impl NonceStore {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn contains(&self, name: &[u8], nonce: &[u8]) -> bool {
        self.by_name
            .get(name)
            .is_some_and(|m| m.contains_key(nonce))
    }

    /// Records `nonce` for `name` until `retain_until_ms`.
    pub fn insert(&mut self, name: &[u8], nonce: &[u8], retain_until_ms: u64) {
        let slot = self.by_name.entry(name.to_vec()).or_default();
        if let Some(old) = slot.insert(nonce.to_vec(), retain_until_ms) {
            self.expiry.remove(&(old, name.to_vec(), nonce.to_vec()));
        }
        self.expiry
            .insert((retain_until_ms, name.to_vec(), nonce.to_vec()));
    }

    /// Drops every nonce whose retention ended at or before `now`.
    pub fn prune(&mut self, now_ms: u64) {
        while let Some(first) = self.expiry.first() {
            if first.0 > now_ms {
                break;
            }
            let (_, name, nonce) = self.expiry.pop_first().unwrap();
            if let Some(slot) = self.by_name.get_mut(&name) {
                slot.remove(&nonce);
                if slot.is_empty() {
                    self.by_name.remove(&name);
                }
            }
        }
    }

    pub fn len(&self) -> usize {
        self.expiry.len()
    }

    pub fn is_empty(&self) -> bool {
        self.expiry.is_empty()
    }

    /// Latest retention deadline held, if any.
    pub fn latest_retention_ms(&self) -> Option<u64> {
        self.expiry.last().map(|e| e.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn timestamp_window_bounds() {
        let p = TimestampPolicy {
            window_ms: 100,
            skew_ms: 10,
        };
        assert!(p.accepts(900, 1000));
        assert!(!p.accepts(899, 1000));
        assert!(p.accepts(1010, 1000));
        assert!(!p.accepts(1011, 1000));
        assert!(p.accepts(0, 50));
    }

    #[test]
    fn nonce_store_forgets_after_retention() {
        let mut s = NonceStore::new();
        s.insert(b"n", b"r1", 100);
        s.insert(b"n", b"r2", 200);
        s.prune(99);
        assert!(s.contains(b"n", b"r1"));
        s.prune(100);
        assert!(!s.contains(b"n", b"r1"));
        assert!(s.contains(b"n", b"r2"));
        s.prune(500);
        assert!(s.is_empty());
    }

    #[test]
    fn drop_reason_names_round_trip() {
        for r in DropReason::ALL {
            assert_eq!(DropReason::parse(r.as_str()), Some(r));
        }
    }

    #[test]
    fn nonce_set_records_once() {
        let mut b = NonceSet::new(5);
        assert!(b.insert(b"r"));
        assert!(!b.insert(b"r"));
        assert!(b.contains(b"r"));
        assert_eq!(b.len(), 1);
    }
}
