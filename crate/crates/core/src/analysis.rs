//! Service-rate model, message overhead accounting and signature
//! verification benchmarks.

use std::time::Instant;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::Serialize;
use thiserror::Error;

use crate::consumer::{interest_generation, ConsumerContext, IbacMode, ObfuscationScheme};
use crate::crypto::{batch_verify, CryptoError, GroupKeyMaterial, SignatureSuite, SigningKey};
use crate::message::{ContentObject, Interest};
use crate::name::Name;
use crate::producer::{Producer, ProducerConfig};
use crate::simnet::{LogKind, LogRecord};
use crate::wire::{encode_content, encode_interest, EncodeError, HEADER_LEN};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AnalysisError {
    #[error("parameter out of domain: {0}")]
    Domain(&'static str),
    #[error("log has fewer than two processed interests for node {0:?}")]
    EmptyLog(String),
    #[error(transparent)]
    Crypto(#[from] CryptoError),
    #[error(transparent)]
    Encode(#[from] EncodeError),
}

/// `δ`, `τ_process` and `τ_verify`, times in seconds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ServiceModelParams {
    pub delta: f64,
    pub tau_process: f64,
    pub tau_verify: f64,
}

/// `μ = (1 − δ)/τ_process + δ/(τ_process + τ_verify)` interests per second.
pub fn model_mu(p: &ServiceModelParams) -> Result<f64, AnalysisError> {
    if p.tau_process <= 0.0 || !p.tau_process.is_finite() {
        return Err(AnalysisError::Domain("tau_process must be positive"));
    }
    if p.tau_verify < 0.0 || !p.tau_verify.is_finite() {
        return Err(AnalysisError::Domain("tau_verify must be non-negative"));
    }
    if !(0.0..=1.0).contains(&p.delta) {
        return Err(AnalysisError::Domain("delta must lie in [0, 1]"));
    }
    Ok((1.0 - p.delta) / p.tau_process + p.delta / (p.tau_process + p.tau_verify))
}

/// Field sizes in bytes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct OverheadParams {
    pub nonce: usize,
    pub timestamp: usize,
    pub signature: usize,
    pub group_id: usize,
    /// `|pk|` of each of the `L` groups bound to a content object.
    pub key_sizes: Vec<usize>,
}

/// `|r| + |t| + |σ| + |ID|`.
pub fn interest_overhead_bytes(p: &OverheadParams) -> usize {
    p.nonce + p.timestamp + p.signature + p.group_id
}

/// `Σ |pk_i|` over the `L` groups.
pub fn content_overhead_bytes(p: &OverheadParams) -> usize {
    p.key_sizes.iter().sum()
}

/// TLV bytes an authorization payload adds beyond its field values: the
/// payload container, four field headers and the one-byte
/// encrypted-group-id flag with its header.
pub const PAYLOAD_FRAMING: usize = 2 * HEADER_LEN + 3 * HEADER_LEN + HEADER_LEN + 1;
/// Headers of nonce, timestamp and signature: what a full payload adds over
/// an obfuscation-only one beyond `|r| + |t| + |σ|`.
pub const AUTHENTICATOR_FRAMING: usize = 3 * HEADER_LEN;
/// Entry and group-id headers around each verification key. The group id
/// value travels with the key, so each entry also adds `|ID|`.
pub const KEY_ENTRY_FRAMING: usize = 2 * HEADER_LEN;

/// Encoded size of `a` minus encoded size of `b`.
pub fn interest_wire_delta(a: &Interest, b: &Interest) -> Result<isize, AnalysisError> {
    Ok(encode_interest(a)?.len() as isize - encode_interest(b)?.len() as isize)
}

pub fn content_wire_delta(a: &ContentObject, b: &ContentObject) -> Result<isize, AnalysisError> {
    Ok(encode_content(a)?.len() as isize - encode_content(b)?.len() as isize)
}

/// A formula value next to the encode-and-diff measurement it predicts.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct OverheadRow {
    pub quantity: String,
    pub formula_bytes: usize,
    /// Constant TLV bytes expected on top of the formula.
    pub framing: usize,
    pub wire_delta: isize,
    pub exact: bool,
}

impl OverheadRow {
    fn new(quantity: &str, formula_bytes: usize, framing: usize, wire_delta: isize) -> Self {
        let exact = wire_delta == (formula_bytes + framing) as isize;
        Self {
            quantity: quantity.to_string(),
            formula_bytes,
            framing,
            wire_delta,
            exact,
        }
    }
}

/// Encodes real interests and content objects built with `groups` and
/// compares their size differences to the overhead formulas. The first
/// group issues the interests; the content object is bound to all groups.
pub fn measure_overheads(groups: &[GroupKeyMaterial]) -> Result<Vec<OverheadRow>, AnalysisError> {
    let Some(first) = groups.first() else {
        return Err(AnalysisError::Domain("need at least one group"));
    };
    let name = Name::parse_with_prefix("/overhead/probe/item", "/overhead").expect("static name");
    let mut producer = Producer::new(ProducerConfig::new(name.routable_prefix().to_vec(), 0));
    let ids: Vec<[u8; 32]> = groups.iter().map(|g| *g.group_id()).collect();
    for g in groups {
        producer
            .register_group(g.public())
            .map_err(|_| AnalysisError::Domain("groups must be distinct"))?;
    }
    producer
        .publish(
            name.clone(),
            vec![0; 64],
            &ids,
            ObfuscationScheme::Enc,
            IbacMode::Full,
            60_000,
        )
        .map_err(|_| AnalysisError::Domain("cannot publish probe content"))?;
    let ctx = ConsumerContext::new(first.clone(), IbacMode::Full, ObfuscationScheme::Enc);
    let mut rng = ChaCha20Rng::seed_from_u64(0);
    let full = interest_generation(&ctx, name.routable_prefix(), &name, 1_000, &mut rng)
        .map_err(|_| AnalysisError::Domain("cannot build probe interest"))?;
    let plain = Interest::new(full.name.clone());
    let mut obfuscate_only = full.clone();
    obfuscate_only
        .payload
        .as_mut()
        .expect("full interests carry a payload")
        .authenticator = None;

    let payload = full
        .payload
        .as_ref()
        .expect("full interests carry a payload");
    let auth = payload
        .authenticator
        .as_ref()
        .expect("full interests carry an authenticator");
    let p = OverheadParams {
        nonce: auth.nonce.len(),
        timestamp: 8,
        signature: auth.signature.len(),
        group_id: payload.group_id.len(),
        key_sizes: groups
            .iter()
            .map(|g| g.verifying_key().to_bytes().len())
            .collect(),
    };
    let content = producer
        .content_object_generation(&full, 1_000)
        .map_err(|_| AnalysisError::Domain("probe interest was refused"))?;
    let mut bare = content.clone();
    bare.verification_keys.clear();
    let mut one_less = content.clone();
    one_less.verification_keys.pop();
    let last_key = p.key_sizes.last().copied().unwrap_or(0);
    let id_len = crate::crypto::DIGEST_LEN;
    let l = groups.len();
    Ok(vec![
        OverheadRow::new(
            "interest_full_vs_no_payload",
            interest_overhead_bytes(&p),
            PAYLOAD_FRAMING,
            interest_wire_delta(&full, &plain)?,
        ),
        OverheadRow::new(
            "interest_full_vs_obfuscate_only",
            p.nonce + p.timestamp + p.signature,
            AUTHENTICATOR_FRAMING,
            interest_wire_delta(&full, &obfuscate_only)?,
        ),
        OverheadRow::new(
            "content_all_keys_vs_none",
            content_overhead_bytes(&p),
            l * (KEY_ENTRY_FRAMING + id_len),
            content_wire_delta(&content, &bare)?,
        ),
        OverheadRow::new(
            "content_one_key_entry",
            last_key,
            KEY_ENTRY_FRAMING + id_len,
            content_wire_delta(&content, &one_less)?,
        ),
    ])
}

/// One row shaped like the reference verification-time table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchRow {
    pub key_size: u32,
    pub batch_size: usize,
    /// Length of each signed message in bytes.
    pub sig_size: usize,
    /// Median seconds to verify the batch one signature at a time.
    pub t_individual: f64,
    /// Median seconds for one batch verification of the same signatures.
    pub t_batch: f64,
    pub improvement_pct: f64,
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) / 2.0
    }
}

/// Times individual against batch verification of `batch_size` signatures
/// on `payload_bytes`-byte messages under one key; medians over `trials`.
pub fn bench_verification(
    key_bits: u32,
    batch_size: usize,
    payload_bytes: usize,
    trials: usize,
    seed: u64,
) -> Result<BenchRow, AnalysisError> {
    if batch_size == 0 {
        return Err(AnalysisError::Domain("batch_size must be at least 1"));
    }
    if trials == 0 {
        return Err(AnalysisError::Domain("trials must be at least 1"));
    }
    let suite = SignatureSuite::from_key_bits(key_bits)?;
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let sk = SigningKey::generate(suite, &mut rng);
    let vk = sk.verifying_key();
    let messages: Vec<Vec<u8>> = (0..batch_size)
        .map(|_| {
            let mut m = vec![0u8; payload_bytes];
            rng.fill_bytes(&mut m);
            m
        })
        .collect();
    let sigs: Vec<Vec<u8>> = messages.iter().map(|m| sk.sign(m)).collect();
    let items: Vec<(&[u8], &[u8])> = messages
        .iter()
        .zip(&sigs)
        .map(|(m, s)| (m.as_slice(), s.as_slice()))
        .collect();
    let mut individual = Vec::with_capacity(trials);
    let mut batch = Vec::with_capacity(trials);
    for _ in 0..trials {
        let start = Instant::now();
        let ok = items.iter().all(|(m, s)| vk.verify(m, s));
        individual.push(start.elapsed().as_secs_f64());
        assert!(ok, "freshly made signatures verify");
        let start = Instant::now();
        let ok = batch_verify(vk, &items, &mut rng)?;
        batch.push(start.elapsed().as_secs_f64());
        assert!(ok, "freshly made signatures batch-verify");
    }
    let t_individual = median(individual);
    let t_batch = median(batch);
    Ok(BenchRow {
        key_size: key_bits,
        batch_size,
        sig_size: payload_bytes,
        t_individual,
        t_batch,
        improvement_pct: 100.0 * (t_individual - t_batch) / t_individual,
    })
}

/// Completion rate of interests at one node.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ServiceRate {
    /// Interests per second between the first and last completion.
    pub overall: f64,
    /// Rates in windows of the given width, advanced by half a width.
    pub windows: Vec<f64>,
    pub processed: usize,
}

/// Interests fully processed per second at `node`, from `processed` log lines.
pub fn measure_service_rate(
    log: &[LogRecord],
    node: &str,
    window_us: u64,
) -> Result<ServiceRate, AnalysisError> {
    if window_us == 0 {
        return Err(AnalysisError::Domain("window must be positive"));
    }
    let mut times: Vec<u64> = log
        .iter()
        .filter(|r| r.kind == LogKind::Processed && r.node == node)
        .map(|r| r.time_us)
        .collect();
    times.sort_unstable();
    let (Some(&first), Some(&last)) = (times.first(), times.last()) else {
        return Err(AnalysisError::EmptyLog(node.to_string()));
    };
    if times.len() < 2 || last == first {
        return Err(AnalysisError::EmptyLog(node.to_string()));
    }
    let overall = (times.len() - 1) as f64 / ((last - first) as f64 / 1e6);
    let step = (window_us / 2).max(1);
    let mut windows = Vec::new();
    let mut start = first;
    while start + window_us <= last {
        let lo = times.partition_point(|&t| t < start);
        let hi = times.partition_point(|&t| t < start + window_us);
        windows.push((hi - lo) as f64 / (window_us as f64 / 1e6));
        start += step;
    }
    Ok(ServiceRate {
        overall,
        windows,
        processed: times.len(),
    })
}
