//! Forwarding engine: FIB longest-prefix forwarding, PIT aggregation and a
//! content store that authorizes every hit on IBAC content before serving.
//!
//! Authorization of an interest against cached (or just-arrived) content
//! runs, in order: nonce duplication against `𝔹[N′]`, timestamp window,
//! verification-key lookup by group id, signature verification. A pass
//! records the nonce in `𝔹[N′]`. Interests collapsed in the PIT are checked
//! the same way when the content arrives.

mod cs;
mod fib;
mod pit;

use std::collections::{BTreeMap, HashSet};

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

pub use cs::{CacheEntry, ContentStore};
pub use fib::{FaceId, Fib};
pub use pit::{PendingInterest, Pit, PitEntry, DEFAULT_PIT_LIFETIME_MS};

use crate::auth::{AuthFailure, DropReason, NonceSet, TimestampPolicy, Verdict};
use crate::crypto::{batch_verify, payload_message, VerifyingKey};
use crate::message::{AuthorizationPayload, ContentObject, Interest};
use crate::wire::encode_name;

/// Identifies one injected interest across every hop it takes.
pub type TraceId = u64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
#[derive(Default)]
pub enum VerifyMode {
    #[default]
    Individual,
    /// Queue up to `size` checks per name, flushing early after `max_wait_ms`.
    Batch {
        size: usize,
        max_wait_ms: u64,
    },
}


#[derive(Debug, Clone)]
pub struct RouterConfig {
    /// Nonce/timestamp window `w`; defaults to each content's remaining lifetime.
    pub window_ms: Option<u64>,
    pub skew_ms: u64,
    pub verify_mode: VerifyMode,
    pub pit_lifetime_ms: u64,
    /// Seeds the batch-test exponents.
    pub seed: u64,
}

impl Default for RouterConfig {
    fn default() -> Self {
        Self {
            window_ms: None,
            skew_ms: TimestampPolicy::DEFAULT_SKEW_MS,
            verify_mode: VerifyMode::Individual,
            pit_lifetime_ms: DEFAULT_PIT_LIFETIME_MS,
            seed: 0,
        }
    }
}

/// Signature work performed while handling one event.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Work {
    pub verifications: u32,
    pub batches: u32,
}

impl Work {
    fn add(&mut self, other: Work) {
        self.verifications += other.verifications;
        self.batches += other.batches;
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum NoteKind {
    /// Cached content served after the check passed (or to public content).
    CacheHit,
    CacheInsert,
    CacheExpire,
    PitAggregate,
    BatchQueued,
}

impl NoteKind {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::CacheHit => "cache_hit",
            Self::CacheInsert => "cache_insert",
            Self::CacheExpire => "cache_expire",
            Self::PitAggregate => "pit_aggregate",
            Self::BatchQueued => "batch_queued",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Emission {
    SendInterest {
        face: FaceId,
        interest: Interest,
        trace: TraceId,
    },
    SendContent {
        face: FaceId,
        content: ContentObject,
        traces: Vec<TraceId>,
    },
    Drop {
        name: Vec<u8>,
        reason: DropReason,
        traces: Vec<TraceId>,
    },
    Note {
        name: Vec<u8>,
        kind: NoteKind,
        trace: Option<TraceId>,
    },
}

#[derive(Debug, Clone, Default)]
pub struct Output {
    pub emissions: Vec<Emission>,
    pub work: Work,
}

/// A check that passed every step except signature verification.
#[derive(Debug, Clone)]
struct Candidate {
    nonce: Vec<u8>,
    message: Vec<u8>,
    signature: Vec<u8>,
    /// Indices of verification keys to try.
    keys: Vec<usize>,
}

#[allow(clippy::too_many_arguments)]
fn prescreen(
    payload: Option<&AuthorizationPayload>,
    name: &[u8],
    keys: &[Option<VerifyingKey>],
    group_ids: &[&[u8]],
    nonces: &NonceSet,
    queued: &HashSet<Vec<u8>>,
    policy: TimestampPolicy,
    now_ms: u64,
) -> Result<Candidate, AuthFailure> {
    let payload = payload.ok_or(AuthFailure::MissingAuthorization)?;
    let auth = payload
        .authenticator
        .as_ref()
        .ok_or(AuthFailure::MissingAuthorization)?;
    if nonces.contains(&auth.nonce) || queued.contains(&auth.nonce) {
        return Err(AuthFailure::DuplicateNonce);
    }
    if !policy.accepts(auth.timestamp_ms, now_ms) {
        return Err(AuthFailure::StaleTimestamp);
    }
    // Encrypted ids cannot be matched, so every bound key is a candidate.
    let candidates: Vec<usize> = (0..keys.len())
        .filter(|&i| {
            keys[i].is_some() && (payload.group_id_encrypted || group_ids[i] == payload.group_id)
        })
        .collect();
    if candidates.is_empty() {
        return Err(AuthFailure::UnknownGroupKey);
    }
    Ok(Candidate {
        nonce: auth.nonce.clone(),
        message: payload_message(name, &payload.group_id, &auth.nonce, auth.timestamp_ms),
        signature: auth.signature.clone(),
        keys: candidates,
    })
}

fn verify_one(c: &Candidate, keys: &[Option<VerifyingKey>], work: &mut Work) -> bool {
    c.keys.iter().any(|&i| {
        work.verifications += 1;
        keys[i]
            .as_ref()
            .is_some_and(|vk| vk.verify(&c.message, &c.signature))
    })
}

fn verify_all(
    cands: &[Candidate],
    keys: &[Option<VerifyingKey>],
    mode: VerifyMode,
    rng: &mut ChaCha20Rng,
    work: &mut Work,
) -> Vec<bool> {
    let size = match mode {
        VerifyMode::Individual => return cands.iter().map(|c| verify_one(c, keys, work)).collect(),
        VerifyMode::Batch { size, .. } => size.max(1),
    };
    let mut ok = vec![false; cands.len()];
    let mut by_key: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (i, c) in cands.iter().enumerate() {
        if c.keys.len() == 1 {
            by_key.entry(c.keys[0]).or_default().push(i);
        } else {
            ok[i] = verify_one(c, keys, work);
        }
    }
    for (k, idxs) in by_key {
        let vk = keys[k].as_ref().expect("prescreen keeps parsed keys only");
        for chunk in idxs.chunks(size) {
            if chunk.len() == 1 {
                ok[chunk[0]] = verify_one(&cands[chunk[0]], keys, work);
                continue;
            }
            work.batches += 1;
            let items: Vec<(&[u8], &[u8])> = chunk
                .iter()
                .map(|&i| (cands[i].message.as_slice(), cands[i].signature.as_slice()))
                .collect();
            if batch_verify(vk, &items, rng).unwrap_or(false) {
                for &i in chunk {
                    ok[i] = true;
                }
            } else {
                for &i in chunk {
                    ok[i] = verify_one(&cands[i], keys, work);
                }
            }
        }
    }
    ok
}

/// Checks one interest against a cached entry and, on Pass, records its
/// nonce in the entry's `𝔹`.
pub fn router_authorization_check(
    interest: &Interest,
    entry: &mut CacheEntry,
    now_ms: u64,
    skew_ms: u64,
    work: &mut Work,
) -> Verdict {
    let Ok(name) = encode_name(&interest.name) else {
        return Verdict::Fail(AuthFailure::BadSignature);
    };
    let policy = TimestampPolicy {
        window_ms: entry.window_ms,
        skew_ms,
    };
    let group_ids: Vec<&[u8]> = entry
        .content
        .verification_keys
        .iter()
        .map(|e| e.group_id.as_slice())
        .collect();
    let cand = match prescreen(
        interest.payload.as_ref(),
        &name,
        &entry.keys,
        &group_ids,
        &entry.nonces,
        &HashSet::new(),
        policy,
        now_ms,
    ) {
        Ok(c) => c,
        Err(f) => return Verdict::Fail(f),
    };
    if !verify_one(&cand, &entry.keys, work) {
        return Verdict::Fail(AuthFailure::BadSignature);
    }
    entry.nonces.insert(&cand.nonce);
    Verdict::Pass
}

#[derive(Debug, Clone)]
struct Queued {
    face: FaceId,
    trace: TraceId,
    cand: Candidate,
}

#[derive(Debug, Clone)]
struct BatchQueue {
    deadline_ms: u64,
    items: Vec<Queued>,
}

pub struct Router {
    config: RouterConfig,
    fib: Fib,
    pit: Pit,
    cs: ContentStore,
    batches: BTreeMap<Vec<u8>, BatchQueue>,
    rng: ChaCha20Rng,
    totals: Work,
}

impl Router {
    pub fn new(config: RouterConfig) -> Self {
        Self {
            pit: Pit::new(config.pit_lifetime_ms),
            rng: ChaCha20Rng::seed_from_u64(config.seed),
            config,
            fib: Fib::new(),
            cs: ContentStore::default(),
            batches: BTreeMap::new(),
            totals: Work::default(),
        }
    }

    pub fn config(&self) -> &RouterConfig {
        &self.config
    }

    pub fn fib(&self) -> &Fib {
        &self.fib
    }

    pub fn fib_mut(&mut self) -> &mut Fib {
        &mut self.fib
    }

    pub fn pit(&self) -> &Pit {
        &self.pit
    }

    pub fn cs(&self) -> &ContentStore {
        &self.cs
    }

    /// `𝔹[N′]` for a cached name.
    pub fn nonce_table(&self, name: &[u8]) -> Option<&NonceSet> {
        self.cs.get(name).map(|e| &e.nonces)
    }

    /// Signature work done since creation.
    pub fn total_work(&self) -> Work {
        self.totals
    }

    fn finish(&mut self, out: Output) -> Output {
        self.totals.add(out.work);
        out
    }

    fn policy(&self, entry: &CacheEntry) -> TimestampPolicy {
        TimestampPolicy {
            window_ms: entry.window_ms,
            skew_ms: self.config.skew_ms,
        }
    }

    pub fn on_interest(
        &mut self,
        now_ms: u64,
        interest: Interest,
        face: FaceId,
        trace: TraceId,
    ) -> Output {
        let mut out = Output::default();
        self.expire_into(now_ms, &mut out);
        let Ok(key) = encode_name(&interest.name) else {
            out.emissions.push(Emission::Drop {
                name: Vec::new(),
                reason: DropReason::Malformed,
                traces: vec![trace],
            });
            return self.finish(out);
        };
        if self.cs.contains(&key) {
            self.serve_from_cache(now_ms, key, interest, face, trace, &mut out);
        } else if self.pit.contains(&key) {
            let payload = interest.payload;
            self.pit.aggregate(
                &key,
                PendingInterest {
                    face,
                    payload,
                    trace,
                },
            );
            out.emissions.push(Emission::Note {
                name: key,
                kind: NoteKind::PitAggregate,
                trace: Some(trace),
            });
        } else {
            match self
                .fib
                .longest_prefix_match(&interest.name.routing_components())
            {
                Some(up) => {
                    let pending = PendingInterest {
                        face,
                        payload: interest.payload.clone(),
                        trace,
                    };
                    self.pit.create(key, interest.name.clone(), pending, now_ms);
                    out.emissions.push(Emission::SendInterest {
                        face: up,
                        interest,
                        trace,
                    });
                }
                None => out.emissions.push(Emission::Drop {
                    name: key,
                    reason: DropReason::NoRoute,
                    traces: vec![trace],
                }),
            }
        }
        self.finish(out)
    }

    fn serve_from_cache(
        &mut self,
        now_ms: u64,
        key: Vec<u8>,
        interest: Interest,
        face: FaceId,
        trace: TraceId,
        out: &mut Output,
    ) {
        let skew = self.config.skew_ms;
        let mode = self.config.verify_mode;
        let entry = self.cs.get_mut(&key).expect("caller checked presence");
        if !entry.content.requires_authorization() {
            let content = entry.content.clone();
            out.emissions.push(Emission::Note {
                name: key,
                kind: NoteKind::CacheHit,
                trace: Some(trace),
            });
            out.emissions.push(Emission::SendContent {
                face,
                content,
                traces: vec![trace],
            });
            return;
        }
        match mode {
            VerifyMode::Individual => {
                match router_authorization_check(&interest, entry, now_ms, skew, &mut out.work) {
                    Verdict::Pass => {
                        let content = entry.content.clone();
                        out.emissions.push(Emission::Note {
                            name: key,
                            kind: NoteKind::CacheHit,
                            trace: Some(trace),
                        });
                        out.emissions.push(Emission::SendContent {
                            face,
                            content,
                            traces: vec![trace],
                        });
                    }
                    Verdict::Fail(f) => out.emissions.push(Emission::Drop {
                        name: key,
                        reason: f.into(),
                        traces: vec![trace],
                    }),
                }
            }
            VerifyMode::Batch { size, max_wait_ms } => {
                let queued: HashSet<Vec<u8>> = self
                    .batches
                    .get(&key)
                    .map(|q| q.items.iter().map(|i| i.cand.nonce.clone()).collect())
                    .unwrap_or_default();
                let entry = self.cs.get(&key).expect("caller checked presence");
                let group_ids: Vec<&[u8]> = entry
                    .content
                    .verification_keys
                    .iter()
                    .map(|e| e.group_id.as_slice())
                    .collect();
                let screened = prescreen(
                    interest.payload.as_ref(),
                    &key,
                    &entry.keys,
                    &group_ids,
                    &entry.nonces,
                    &queued,
                    self.policy(entry),
                    now_ms,
                );
                match screened {
                    Err(f) => out.emissions.push(Emission::Drop {
                        name: key,
                        reason: f.into(),
                        traces: vec![trace],
                    }),
                    Ok(cand) => {
                        let queue = self
                            .batches
                            .entry(key.clone())
                            .or_insert_with(|| BatchQueue {
                                deadline_ms: now_ms + max_wait_ms,
                                items: Vec::new(),
                            });
                        queue.items.push(Queued { face, trace, cand });
                        let full = queue.items.len() >= size.max(1);
                        out.emissions.push(Emission::Note {
                            name: key.clone(),
                            kind: NoteKind::BatchQueued,
                            trace: Some(trace),
                        });
                        if full {
                            self.flush(&key, out);
                        }
                    }
                }
            }
        }
    }

    fn flush(&mut self, key: &[u8], out: &mut Output) {
        let Some(queue) = self.batches.remove(key) else {
            return;
        };
        let entry = self
            .cs
            .get_mut(key)
            .expect("queues are flushed before their entry leaves the cache");
        let cands: Vec<Candidate> = queue.items.iter().map(|q| q.cand.clone()).collect();
        let ok = verify_all(
            &cands,
            &entry.keys,
            self.config.verify_mode,
            &mut self.rng,
            &mut out.work,
        );
        for (q, passed) in queue.items.into_iter().zip(ok) {
            if passed {
                entry.nonces.insert(&q.cand.nonce);
                out.emissions.push(Emission::Note {
                    name: key.to_vec(),
                    kind: NoteKind::CacheHit,
                    trace: Some(q.trace),
                });
                out.emissions.push(Emission::SendContent {
                    face: q.face,
                    content: entry.content.clone(),
                    traces: vec![q.trace],
                });
            } else {
                out.emissions.push(Emission::Drop {
                    name: key.to_vec(),
                    reason: DropReason::Auth(AuthFailure::BadSignature),
                    traces: vec![q.trace],
                });
            }
        }
    }

    pub fn on_content(&mut self, now_ms: u64, content: ContentObject, _face: FaceId) -> Output {
        let mut out = Output::default();
        self.expire_into(now_ms, &mut out);
        let Ok(key) = encode_name(&content.name) else {
            out.emissions.push(Emission::Drop {
                name: Vec::new(),
                reason: DropReason::Malformed,
                traces: Vec::new(),
            });
            return self.finish(out);
        };
        let Some(pending) = self.pit.take(&key) else {
            out.emissions.push(Emission::Drop {
                name: key,
                reason: DropReason::Unsolicited,
                traces: Vec::new(),
            });
            return self.finish(out);
        };
        let mut entry = CacheEntry::new(content, now_ms, self.config.window_ms);
        if let Some(existing) = self.cs.get(&key) {
            entry.nonces = existing.nonces.clone();
        }
        let passed: Vec<bool> = if entry.content.requires_authorization() {
            self.check_pending(&key, &pending, &mut entry, now_ms, &mut out)
        } else {
            vec![true; pending.pending.len()]
        };
        let mut by_face: Vec<(FaceId, Vec<TraceId>)> = Vec::new();
        for (p, ok) in pending.pending.iter().zip(passed) {
            if !ok {
                continue;
            }
            match by_face.iter_mut().find(|(f, _)| *f == p.face) {
                Some((_, traces)) => traces.push(p.trace),
                None => by_face.push((p.face, vec![p.trace])),
            }
        }
        for (face, traces) in by_face {
            out.emissions.push(Emission::SendContent {
                face,
                content: entry.content.clone(),
                traces,
            });
        }
        if entry.expires_at_ms > now_ms {
            out.emissions.push(Emission::Note {
                name: key.clone(),
                kind: NoteKind::CacheInsert,
                trace: None,
            });
            self.cs.insert(key, entry);
        }
        self.finish(out)
    }

    /// Authorizes collapsed interests against newly arrived content.
    fn check_pending(
        &mut self,
        key: &[u8],
        pending: &PitEntry,
        entry: &mut CacheEntry,
        now_ms: u64,
        out: &mut Output,
    ) -> Vec<bool> {
        let policy = TimestampPolicy {
            window_ms: entry.window_ms,
            skew_ms: self.config.skew_ms,
        };
        let group_ids: Vec<&[u8]> = entry
            .content
            .verification_keys
            .iter()
            .map(|e| e.group_id.as_slice())
            .collect();
        let mut seen = HashSet::new();
        let mut cands = Vec::new();
        let mut slots = Vec::new();
        let mut result = vec![false; pending.pending.len()];
        for (i, p) in pending.pending.iter().enumerate() {
            match prescreen(
                p.payload.as_ref(),
                key,
                &entry.keys,
                &group_ids,
                &entry.nonces,
                &seen,
                policy,
                now_ms,
            ) {
                Ok(c) => {
                    seen.insert(c.nonce.clone());
                    cands.push(c);
                    slots.push(i);
                }
                Err(f) => out.emissions.push(Emission::Drop {
                    name: key.to_vec(),
                    reason: f.into(),
                    traces: vec![p.trace],
                }),
            }
        }
        let ok = verify_all(
            &cands,
            &entry.keys,
            self.config.verify_mode,
            &mut self.rng,
            &mut out.work,
        );
        for ((c, i), passed) in cands.iter().zip(slots).zip(ok) {
            if passed {
                entry.nonces.insert(&c.nonce);
                result[i] = true;
            } else {
                out.emissions.push(Emission::Drop {
                    name: key.to_vec(),
                    reason: DropReason::Auth(AuthFailure::BadSignature),
                    traces: vec![pending.pending[i].trace],
                });
            }
        }
        result
    }

    /// Flushes due batches, evicts expired cache entries together with their
    /// nonce sets, and drops expired PIT entries.
    pub fn expire(&mut self, now_ms: u64) -> Output {
        let mut out = Output::default();
        self.expire_into(now_ms, &mut out);
        self.finish(out)
    }

    fn expire_into(&mut self, now_ms: u64, out: &mut Output) {
        let due: Vec<Vec<u8>> = self
            .batches
            .iter()
            .filter(|(_, q)| q.deadline_ms <= now_ms)
            .map(|(k, _)| k.clone())
            .collect();
        for key in due {
            self.flush(&key, out);
        }
        for key in self.cs.due(now_ms) {
            self.flush(&key, out);
            self.cs.remove(&key);
            out.emissions.push(Emission::Note {
                name: key,
                kind: NoteKind::CacheExpire,
                trace: None,
            });
        }
        for (key, entry) in self.pit.expire(now_ms) {
            let traces = entry.pending.iter().map(|p| p.trace).collect();
            out.emissions.push(Emission::Drop {
                name: key,
                reason: DropReason::PitExpired,
                traces,
            });
        }
    }

    /// Earliest time at which `expire` has work to do.
    pub fn next_deadline(&self) -> Option<u64> {
        let batch = self.batches.values().map(|q| q.deadline_ms).min();
        [batch, self.cs.next_expiry(), self.pit.next_expiry()]
            .into_iter()
            .flatten()
            .min()
    }

    /// Checks pending in batch queues.
    pub fn queued_checks(&self) -> usize {
        self.batches.values().map(|q| q.items.len()).sum()
    }
}

#[cfg(test)]
mod tests;
