//! Scenario runner: builds a simulation from a scenario file, runs it and
//! writes the emission log, metrics and summary.

mod config;

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::Serialize;
use thiserror::Error;

pub use config::{
    bundled_scenario, load_scenario, parse_scenario, resolve_scenario, validate, ActionDef,
    ActionKind, AdversaryDef, ContentDef, FetchDef, GroupDef, LinkDef, NodeDef, ProducerDef,
    RevocationDef, RouterSection, ScenarioConfig, SweepDef, TrafficDef, VerifyModeName, BUNDLED,
};

use config::{derive_seed, Index};

use crate::analysis::{
    measure_overheads, measure_service_rate, model_mu, OverheadRow, ServiceModelParams, ServiceRate,
};
use crate::consumer::{interest_generation, ConsumerContext, IbacMode, ObfuscationScheme};
use crate::crypto::{gen_group_with_suite, GroupKeyMaterial, ObfuscationKey, SignatureSuite};
use crate::name::{parse_components, Name};
use crate::producer::{Producer, ProducerConfig};
use crate::router::{RouterConfig, VerifyMode};
use crate::simnet::{
    AdversaryAction, AdversaryConfig, AttackKind, AttackOutcome, Link, LogKind, LogRecord,
    NodeMetrics, NodeSpec, Outcome, Role, ServiceTimes, SimConfig, SimError, SimResult, Simulation,
    Topology, TrafficProfile,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum HarnessError {
    #[error("{0}: {1}")]
    Io(String, String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("invalid scenario:\n  {}", .0.join("\n  "))]
    Validation(Vec<String>),
    #[error(transparent)]
    Sim(#[from] SimError),
}

impl HarnessError {
    /// Process exit status for the CLI.
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Io(..) => 1,
            Self::Parse(_) | Self::Validation(_) => 2,
            Self::Sim(SimError::Config(_)) => 2,
            Self::Sim(SimError::Invariant(_)) => 3,
        }
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct RunOptions {
    /// Run independent sweep points on separate threads.
    pub parallel: bool,
}

/// Outcome of one honest fetch.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FetchReport {
    pub consumer: String,
    pub name: String,
    pub at_ms: u64,
    /// `served`, `dropped` or `in_flight`.
    pub outcome: String,
    pub reason: Option<String>,
    /// Node that delivered or dropped it.
    pub node: Option<String>,
    pub done_ms: Option<f64>,
}

/// Fields an interest and its content object carry for one consumer
/// context.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModeRow {
    pub consumer: String,
    pub group: String,
    pub mode: String,
    pub name: String,
    pub name_obfuscated: bool,
    pub has_group_id: bool,
    pub group_id_encrypted: bool,
    pub has_authenticator: bool,
    pub content_keys: usize,
    /// At least one fetch by this consumer for this name was served.
    pub fetched_ok: bool,
}

/// One point of a service-rate sweep.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MuRow {
    pub delta: f64,
    pub lambda: f64,
    pub mu_model: f64,
    pub mu_measured: f64,
    pub relative_error: f64,
    pub model_stable: bool,
    /// The router kept up with arrivals (measured rate at least 95% of λ).
    pub measured_stable: bool,
    pub interests: u64,
    pub processed: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub scenario: String,
    pub seed: u64,
    pub injected: u64,
    pub served: u64,
    pub fetch_successes: u64,
    pub fetch_failures: u64,
    pub data_mismatches: u64,
    pub in_flight: u64,
    pub conserved: bool,
    /// Terminal drop reasons, one per interest.
    pub dropped: BTreeMap<String, u64>,
    /// Drop lines in the emission log per reason.
    pub drop_events: BTreeMap<String, u64>,
    pub producer_interests: u64,
    pub cache_hits: u64,
    /// Cache hits on a name after it expired at that router and before it
    /// was cached again.
    pub stale_cache_hits: u64,
    pub attacks: Vec<AttackOutcome>,
    /// Contents delivered to the adversary, per attack kind.
    pub attack_success: BTreeMap<String, u64>,
    pub fetches: Vec<FetchReport>,
    pub service_rates: BTreeMap<String, ServiceRate>,
    pub mode_report: Vec<ModeRow>,
    pub sweep: Vec<MuRow>,
    pub log_lines: usize,
    pub end_ms: f64,
}

/// Everything a run produces.
#[derive(Debug, Clone)]
pub struct RunReport {
    pub summary: Summary,
    /// Emission log per run; one entry, or one per sweep point.
    pub logs: Vec<(String, Vec<LogRecord>)>,
    pub metrics: Vec<(String, Vec<NodeMetrics>)>,
    pub overhead: Vec<OverheadRow>,
}

impl RunReport {
    /// All emission logs, concatenated in run order.
    pub fn log_text(&self) -> String {
        self.logs
            .iter()
            .map(|(_, l)| crate::simnet::log::render(l))
            .collect()
    }
}

/// Key material, catalog and consumer views derived from a scenario.
struct World<'a> {
    cfg: &'a ScenarioConfig,
    index: Index<'a>,
    groups: Vec<GroupKeyMaterial>,
    /// Content-scoped hash keys for names shared by several groups.
    shared_keys: BTreeMap<String, ObfuscationKey>,
    producers: Vec<Producer>,
    /// Per consumer: (group index, context).
    contexts: BTreeMap<String, Vec<(usize, ConsumerContext)>>,
}

fn build_err(msg: String) -> HarnessError {
    HarnessError::Validation(vec![msg])
}

impl<'a> World<'a> {
    fn new(cfg: &'a ScenarioConfig) -> Result<Self, HarnessError> {
        let index = Index::new(cfg);
        let mut groups = Vec::new();
        for (i, g) in cfg.groups.iter().enumerate() {
            let suite: SignatureSuite = g.suite.parse().expect("validated");
            let seed = g
                .key_seed
                .unwrap_or_else(|| derive_seed(cfg.seed, 1 + i as u64));
            let material = gen_group_with_suite(g.kappa, suite, seed)
                .map_err(|e| build_err(format!("group {:?}: {e}", g.name)))?;
            groups.push(material);
        }
        let mut world = Self {
            cfg,
            index,
            groups,
            shared_keys: BTreeMap::new(),
            producers: Vec::new(),
            contexts: BTreeMap::new(),
        };
        world.build_producers()?;
        world.build_contexts();
        Ok(world)
    }

    fn group(&self, name: &str) -> usize {
        self.index.group_ix[name]
    }

    fn content_data(&self, i: usize, c: &ContentDef) -> Vec<u8> {
        match (&c.data, c.size) {
            (Some(d), _) => d.as_bytes().to_vec(),
            (None, Some(n)) => {
                let mut v = vec![0u8; n];
                ChaCha20Rng::seed_from_u64(derive_seed(self.cfg.seed, 10_000 + i as u64))
                    .fill_bytes(&mut v);
                v
            }
            (None, None) => format!("content of {}", c.name).into_bytes(),
        }
    }

    fn build_producers(&mut self) -> Result<(), HarnessError> {
        let cfg = self.cfg;
        for (pi, p) in cfg.producers.iter().enumerate() {
            let mut pc = ProducerConfig::new(
                parse_components(&p.prefix),
                derive_seed(cfg.seed, 1_000 + pi as u64),
            );
            pc.window_ms = p.window_ms;
            if let Some(s) = p.skew_ms {
                pc.skew_ms = s;
            }
            let mut producer = Producer::new(pc);
            let used: BTreeSet<usize> = cfg
                .contents
                .iter()
                .filter(|c| cfg.producer_of(c) == Some(pi))
                .flat_map(|c| c.groups.iter().map(|g| self.group(g)))
                .collect();
            for &g in &used {
                producer
                    .register_group(self.groups[g].public())
                    .map_err(|e| build_err(e.to_string()))?;
            }
            for (ci, c) in cfg
                .contents
                .iter()
                .enumerate()
                .filter(|(_, c)| cfg.producer_of(c) == Some(pi))
            {
                let name = cfg.content_name(c).expect("validated");
                let data = self.content_data(ci, c);
                if c.groups.is_empty() {
                    producer.publish_public(name, data, c.lifetime_ms)
                } else {
                    let ids: Vec<[u8; 32]> = c
                        .groups
                        .iter()
                        .map(|g| *self.groups[self.group(g)].group_id())
                        .collect();
                    producer
                        .publish(name, data, &ids, c.scheme, c.mode, c.lifetime_ms)
                        .map(|key| {
                            if let Some(k) = key {
                                self.shared_keys.insert(c.name.clone(), k);
                            }
                        })
                }
                .map_err(|e| build_err(format!("content {:?}: {e}", c.name)))?;
            }
            for v in &cfg.revocations {
                let g = &self.groups[self.group(&v.group)];
                if used.contains(&self.group(&v.group)) {
                    producer
                        .revoke_group(g.group_id(), v.at_ms)
                        .map_err(|e| build_err(e.to_string()))?;
                }
            }
            self.producers.push(producer);
        }
        Ok(())
    }

    /// A context for `group` in `mode`/`scheme`, holding the shared hash
    /// keys of every content that group may read.
    fn context(&self, group: usize, mode: IbacMode, scheme: ObfuscationScheme) -> ConsumerContext {
        let mut ctx = ConsumerContext::new(self.groups[group].clone(), mode, scheme);
        let gname = &self.cfg.groups[group].name;
        for c in self
            .cfg
            .contents
            .iter()
            .filter(|c| c.groups.contains(gname))
        {
            if let Some(k) = self.shared_keys.get(&c.name) {
                ctx.add_content_key(&self.cfg.content_name(c).expect("validated"), k.clone());
            }
        }
        ctx
    }

    fn build_contexts(&mut self) {
        let cfg = self.cfg;
        for n in cfg.nodes.iter().filter(|n| n.role == Role::Consumer) {
            let mut list = Vec::new();
            for gname in &n.groups {
                let g = self.group(gname);
                let mut variants: Vec<(IbacMode, ObfuscationScheme, Option<usize>)> = Vec::new();
                for c in cfg.contents.iter().filter(|c| c.groups.contains(gname)) {
                    let v = (n.mode.unwrap_or(c.mode), c.scheme, cfg.producer_of(c));
                    if !variants.contains(&v) {
                        variants.push(v);
                    }
                }
                if variants.is_empty() {
                    variants.push((
                        n.mode.unwrap_or(IbacMode::Full),
                        ObfuscationScheme::Enc,
                        None,
                    ));
                }
                for (mode, scheme, producer) in variants {
                    let mut ctx = self.context(g, mode, scheme);
                    if n.encrypt_group_id {
                        if let Some(p) = producer.or(if self.producers.is_empty() {
                            None
                        } else {
                            Some(0)
                        }) {
                            ctx = ctx.with_producer_public(
                                self.producers[p].encryption_public().clone(),
                            );
                        }
                    }
                    list.push((g, ctx));
                }
            }
            self.contexts.insert(n.name.clone(), list);
        }
    }

    /// Context index for `consumer` fetching `c`, optionally under `group`.
    fn context_for(&self, consumer: &str, c: &ContentDef, group: Option<&str>) -> Option<usize> {
        let list = self.contexts.get(consumer)?;
        let allowed = |g: usize| match group {
            Some(name) => self.cfg.groups[g].name == name,
            None => c.groups.contains(&self.cfg.groups[g].name),
        };
        list.iter()
            .position(|(g, ctx)| allowed(*g) && ctx.scheme() == c.scheme && ctx.mode() == c.mode)
            .or_else(|| {
                list.iter()
                    .position(|(g, ctx)| allowed(*g) && ctx.scheme() == c.scheme)
            })
            .or_else(|| list.iter().position(|(g, _)| allowed(*g)))
    }

    fn topology(&self, sweep_node: Option<&str>) -> Result<Topology, HarnessError> {
        let cfg = self.cfg;
        let r = &cfg.router;
        let nodes = cfg
            .nodes
            .iter()
            .map(|n| {
                let mut spec =
                    NodeSpec::new(self.index.node_ids[n.name.as_str()], n.name.clone(), n.role);
                spec.clock_offset_ms = n.clock_offset_ms;
                spec.measured = n.measured || sweep_node == Some(n.name.as_str());
                let (p, v, b) = if n.role == Role::Router {
                    (
                        r.tau_process,
                        r.tau_verify,
                        r.tau_batch.unwrap_or(r.tau_verify),
                    )
                } else {
                    (0.0, 0.0, 0.0)
                };
                spec.service = ServiceTimes::from_seconds(
                    n.tau_process.unwrap_or(p),
                    n.tau_verify.unwrap_or(v),
                    n.tau_batch.or(n.tau_verify).unwrap_or(b),
                );
                spec
            })
            .collect();
        let links = cfg
            .links
            .iter()
            .map(|l| Link {
                a: self.index.node_ids[l.a.as_str()],
                b: self.index.node_ids[l.b.as_str()],
                latency_us: (l.latency_ms * 1000.0).round() as u64,
            })
            .collect();
        Ok(Topology::new(nodes, links)?)
    }

    fn router_config(&self) -> RouterConfig {
        let r = &self.cfg.router;
        let mut rc = RouterConfig {
            window_ms: r.window_ms,
            ..RouterConfig::default()
        };
        if let Some(s) = r.skew_ms {
            rc.skew_ms = s;
        }
        if let Some(p) = r.pit_lifetime_ms {
            rc.pit_lifetime_ms = p;
        }
        if r.verify_mode == VerifyModeName::Batch {
            rc.verify_mode = VerifyMode::Batch {
                size: r.batch_size,
                max_wait_ms: r.batch_max_wait_ms,
            };
        }
        rc
    }

    fn id(&self, node: &str) -> u32 {
        self.index.node_ids[node]
    }

    fn traffic_profile(&self, t: &TrafficDef) -> TrafficProfile {
        let cfg = self.cfg;
        let names = |sel: &Option<Vec<String>>, protected: bool| -> Vec<Name> {
            let pick: Vec<&ContentDef> = match sel {
                Some(list) => list.iter().filter_map(|n| cfg.content(n)).collect(),
                None => cfg
                    .contents
                    .iter()
                    .filter(|c| c.groups.is_empty() != protected)
                    .collect(),
            };
            pick.into_iter()
                .filter_map(|c| cfg.content_name(c))
                .collect()
        };
        TrafficProfile {
            lambda: t.lambda,
            delta: t.delta,
            start_ms: t.start_ms,
            duration_ms: t.duration_ms,
            consumers: t.consumers.iter().map(|c| self.id(c)).collect(),
            protected: names(&t.protected, true),
            public: names(&t.public, false),
            max_interests: t.max_interests,
        }
    }

    fn adversary(&self, a: &AdversaryDef) -> AdversaryConfig {
        let cfg = self.cfg;
        let mut actions = Vec::new();
        for act in &a.actions {
            for i in 0..act.repeat {
                let at_ms = act.at_ms + i as u64 * act.every_ms;
                let kind = match act.kind {
                    ActionKind::ReplaySamePath | ActionKind::ReplayCrossPath => {
                        let target = self.id(act.target.as_deref().expect("validated"));
                        let nth = act.nth.unwrap_or(1) + i;
                        if act.kind == ActionKind::ReplaySamePath {
                            AttackKind::ReplaySamePath { target, nth }
                        } else {
                            AttackKind::ReplayCrossPath { target, nth }
                        }
                    }
                    kind => {
                        let c = cfg
                            .content(act.name.as_deref().expect("validated"))
                            .expect("validated");
                        let g = self
                            .group(act.group.as_deref().unwrap_or_else(|| c.groups[0].as_str()));
                        let oracle = self.context(
                            g,
                            act.mode.unwrap_or(c.mode),
                            act.scheme.unwrap_or(c.scheme),
                        );
                        let name = cfg.content_name(c).expect("validated");
                        match kind {
                            ActionKind::ForgePayload => AttackKind::ForgePayload {
                                name,
                                oracle,
                                count: act.count,
                            },
                            ActionKind::NameProbe => AttackKind::NameProbe {
                                name,
                                oracle,
                                count: act.count,
                            },
                            _ => AttackKind::ProbeCorrect { name, oracle },
                        }
                    }
                };
                actions.push(AdversaryAction {
                    at_ms,
                    node: self.id(&act.node),
                    kind,
                });
            }
        }
        AdversaryConfig {
            compromised_consumers: a.compromised_consumers.iter().map(|c| self.id(c)).collect(),
            compromised_routers: a.compromised_routers.iter().map(|r| self.id(r)).collect(),
            actions,
        }
    }

    /// A ready-to-run simulation. The producers move into it, so a world
    /// builds one simulation.
    fn simulation(
        &mut self,
        traffic: Option<&TrafficDef>,
        sweep_node: Option<&str>,
    ) -> Result<Simulation, HarnessError> {
        let cfg = self.cfg;
        let topo = self.topology(sweep_node)?;
        let config = SimConfig {
            seed: cfg.seed,
            router: self.router_config(),
            stop_ms: cfg.stop_ms,
        };
        let mut sim = Simulation::new(topo, config);
        let producers = std::mem::take(&mut self.producers);
        for (p, def) in producers.into_iter().zip(&cfg.producers) {
            sim.set_producer(self.id(&def.node), p)?;
        }
        for (name, list) in &self.contexts {
            sim.set_consumer(self.id(name), list.iter().map(|(_, c)| c.clone()).collect())?;
        }
        for f in &cfg.fetches {
            let c = cfg.content(&f.name).expect("validated");
            let name = cfg.content_name(c).expect("validated");
            let ctx = self.context_for(&f.consumer, c, f.group.as_deref());
            for i in 0..f.repeat {
                sim.schedule_fetch(
                    f.at_ms + i as u64 * f.every_ms,
                    self.id(&f.consumer),
                    name.clone(),
                    ctx,
                )?;
            }
        }
        if let Some(t) = traffic {
            sim.add_traffic(&self.traffic_profile(t))?;
        }
        if let Some(a) = &cfg.adversary {
            sim.add_adversary(self.adversary(a))?;
        }
        Ok(sim)
    }

    fn mode_report(&mut self, result: &SimResult) -> Vec<ModeRow> {
        let cfg = self.cfg;
        let mut rows = Vec::new();
        let mut rng = ChaCha20Rng::seed_from_u64(derive_seed(cfg.seed, 20_000));
        let mut producers = match World::new(cfg) {
            Ok(w) => w.producers,
            Err(_) => return rows,
        };
        for (consumer, list) in &self.contexts {
            if cfg
                .adversary
                .as_ref()
                .is_some_and(|a| a.compromised_consumers.contains(consumer))
            {
                continue;
            }
            for (g, ctx) in list {
                let gname = &cfg.groups[*g].name;
                let Some(c) = cfg.contents.iter().find(|c| {
                    c.groups.contains(gname) && c.scheme == ctx.scheme() && c.mode == ctx.mode()
                }) else {
                    continue;
                };
                let name = cfg.content_name(c).expect("validated");
                let Ok(interest) =
                    interest_generation(ctx, name.routable_prefix(), &name, 0, &mut rng)
                else {
                    continue;
                };
                let keys = cfg
                    .producer_of(c)
                    .and_then(|p| producers[p].content_object_generation(&interest, 0).ok())
                    .map_or(0, |co| co.verification_keys.len());
                let id = self.id(consumer);
                let fetched_ok = result.traces.iter().any(|t| {
                    t.origin == id
                        && t.action.is_none()
                        && t.name.as_ref() == Some(&name)
                        && matches!(t.outcome, Some(Outcome::Served { correct: true, .. }))
                });
                let payload = interest.payload.as_ref();
                rows.push(ModeRow {
                    consumer: consumer.clone(),
                    group: gname.clone(),
                    mode: ctx.mode().as_str().to_string(),
                    name: c.name.clone(),
                    name_obfuscated: interest.name.is_obfuscated(),
                    has_group_id: payload.is_some_and(|p| !p.group_id.is_empty()),
                    group_id_encrypted: payload.is_some_and(|p| p.group_id_encrypted),
                    has_authenticator: payload.is_some_and(|p| p.authenticator.is_some()),
                    content_keys: keys,
                    fetched_ok,
                });
            }
        }
        rows
    }
}

fn node_name(cfg: &ScenarioConfig, id: u32) -> String {
    cfg.nodes
        .get(id as usize - 1)
        .map(|n| n.name.clone())
        .unwrap_or_default()
}

/// Cache hits on a name at a router after it expired there and before it
/// was inserted again.
pub fn stale_cache_hits(log: &[LogRecord]) -> u64 {
    let mut expired: BTreeSet<(&str, &[u8])> = BTreeSet::new();
    let mut stale = 0;
    for r in log {
        let key = (r.node.as_str(), r.name.as_slice());
        match r.kind {
            LogKind::CacheExpire => {
                expired.insert(key);
            }
            LogKind::CacheInsert => {
                expired.remove(&key);
            }
            LogKind::CacheHit if expired.contains(&key) => stale += 1,
            _ => {}
        }
    }
    stale
}

fn fetch_reports(cfg: &ScenarioConfig, result: &SimResult) -> Vec<FetchReport> {
    result
        .traces
        .iter()
        .filter(|t| t.action.is_none())
        .map(|t| {
            let (outcome, reason, node, done) = match &t.outcome {
                Some(Outcome::Served { at_us, node, .. }) => {
                    ("served", None, Some(*node), Some(*at_us))
                }
                Some(Outcome::Dropped {
                    at_us,
                    node,
                    reason,
                }) => (
                    "dropped",
                    Some(reason.as_str().to_string()),
                    Some(*node),
                    Some(*at_us),
                ),
                None => ("in_flight", None, None, None),
            };
            FetchReport {
                consumer: node_name(cfg, t.origin),
                name: t.name.as_ref().map(|n| n.to_string()).unwrap_or_default(),
                at_ms: t.injected_us / 1000,
                outcome: outcome.to_string(),
                reason,
                node: node.map(|n| node_name(cfg, n)),
                done_ms: done.map(|us| us as f64 / 1000.0),
            }
        })
        .collect()
}

fn summarize(cfg: &ScenarioConfig, result: &SimResult, mode_report: Vec<ModeRow>) -> Summary {
    let m = &result.metrics;
    let mut attack_success = BTreeMap::new();
    for a in &m.attacks {
        *attack_success.entry(a.kind.clone()).or_default() += a.delivered;
    }
    let producer_interests = m
        .nodes
        .iter()
        .filter(|n| n.role == Role::Producer.as_str())
        .map(|n| n.interests_received)
        .sum();
    let window_us = cfg.sweep.as_ref().map_or(10_000, |s| s.window_ms) * 1000;
    let service_rates = cfg
        .nodes
        .iter()
        .filter(|n| n.measured)
        .filter_map(|n| {
            Some((
                n.name.clone(),
                measure_service_rate(&result.log, &n.name, window_us).ok()?,
            ))
        })
        .collect();
    let fetches = if cfg.traffic.is_none() {
        fetch_reports(cfg, result)
    } else {
        Vec::new()
    };
    Summary {
        scenario: cfg.name.clone(),
        seed: cfg.seed,
        injected: m.injected,
        served: m.served,
        fetch_successes: m.fetch_successes,
        fetch_failures: m.fetch_failures,
        data_mismatches: m.data_mismatches,
        in_flight: m.in_flight,
        conserved: m.conserved(),
        dropped: m.dropped.clone(),
        drop_events: m.drop_events.clone(),
        producer_interests,
        cache_hits: m.nodes.iter().map(|n| n.cache_hits).sum(),
        stale_cache_hits: stale_cache_hits(&result.log),
        attacks: m.attacks.clone(),
        attack_success,
        fetches,
        service_rates,
        mode_report,
        sweep: Vec::new(),
        log_lines: result.log.len(),
        end_ms: m.end_us as f64 / 1000.0,
    }
}

fn overhead_rows(cfg: &ScenarioConfig) -> Vec<OverheadRow> {
    let Ok(world) = World::new(cfg) else {
        return Vec::new();
    };
    // Use the groups bound to the content with the most groups.
    let Some(c) = cfg
        .contents
        .iter()
        .filter(|c| !c.groups.is_empty())
        .max_by_key(|c| c.groups.len())
    else {
        return Vec::new();
    };
    let groups: Vec<GroupKeyMaterial> = c
        .groups
        .iter()
        .map(|g| world.groups[world.group(g)].clone())
        .collect();
    measure_overheads(&groups).unwrap_or_default()
}

/// Runs a scenario that has no sweep.
fn run_single(cfg: &ScenarioConfig) -> Result<RunReport, HarnessError> {
    let mut world = World::new(cfg)?;
    let sim = world.simulation(cfg.traffic.as_ref(), None)?;
    let result = sim.run()?;
    let modes = world.mode_report(&result);
    let summary = summarize(cfg, &result, modes);
    Ok(RunReport {
        summary,
        logs: vec![(cfg.name.clone(), result.log)],
        metrics: vec![(cfg.name.clone(), result.metrics.nodes)],
        overhead: overhead_rows(cfg),
    })
}

struct SweepPoint {
    row: MuRow,
    result: SimResult,
}

fn run_point(
    cfg: &ScenarioConfig,
    sweep: &SweepDef,
    delta: f64,
) -> Result<SweepPoint, HarnessError> {
    let base = cfg.traffic.as_ref().expect("validated");
    let node = cfg.node(&sweep.node).expect("validated");
    let r = &cfg.router;
    let params = ServiceModelParams {
        delta,
        tau_process: node.tau_process.unwrap_or(r.tau_process),
        tau_verify: node.tau_verify.unwrap_or(r.tau_verify),
    };
    let mu_model = model_mu(&params).map_err(|e| build_err(format!("sweep delta {delta}: {e}")))?;
    let lambda = sweep.load * mu_model;
    // Long enough that the interest cap, not the duration, ends arrivals.
    let duration_ms = ((sweep.interests as f64 / lambda) * 2_000.0).ceil() as u64 + 1_000;
    let traffic = TrafficDef {
        lambda,
        delta,
        duration_ms,
        max_interests: Some(sweep.interests),
        ..base.clone()
    };
    let mut world = World::new(cfg)?;
    let sim = world.simulation(Some(&traffic), Some(&sweep.node))?;
    let result = sim.run()?;
    let start_us = base.start_ms * 1000;
    let measured: Vec<LogRecord> = result
        .log
        .iter()
        .filter(|r| r.time_us >= start_us)
        .cloned()
        .collect();
    let rate = measure_service_rate(&measured, &sweep.node, sweep.window_ms * 1000)
        .map_err(|e| HarnessError::Sim(SimError::Invariant(e.to_string())))?;
    let row = MuRow {
        delta,
        lambda,
        mu_model,
        mu_measured: rate.overall,
        relative_error: (rate.overall - mu_model).abs() / mu_model,
        model_stable: lambda < mu_model,
        measured_stable: rate.overall >= 0.95 * lambda,
        interests: result.metrics.injected,
        processed: rate.processed,
    };
    Ok(SweepPoint { row, result })
}

fn run_sweep(
    cfg: &ScenarioConfig,
    sweep: &SweepDef,
    opts: RunOptions,
) -> Result<RunReport, HarnessError> {
    let points: Vec<Result<SweepPoint, HarnessError>> = if opts.parallel {
        std::thread::scope(|s| {
            let handles: Vec<_> = sweep
                .deltas
                .iter()
                .map(|&d| s.spawn(move || run_point(cfg, sweep, d)))
                .collect();
            handles
                .into_iter()
                .map(|h| h.join().expect("sweep point panicked"))
                .collect()
        })
    } else {
        sweep
            .deltas
            .iter()
            .map(|&d| run_point(cfg, sweep, d))
            .collect()
    };
    let points = points.into_iter().collect::<Result<Vec<_>, _>>()?;
    let label = |p: &SweepPoint| format!("delta={}", p.row.delta);
    let first = &points[0].result;
    let mut summary = summarize(cfg, first, Vec::new());
    // Counters add up over points; per-run details come from the first.
    for p in &points[1..] {
        let m = &p.result.metrics;
        summary.injected += m.injected;
        summary.served += m.served;
        summary.fetch_successes += m.fetch_successes;
        summary.fetch_failures += m.fetch_failures;
        summary.data_mismatches += m.data_mismatches;
        summary.in_flight += m.in_flight;
        summary.conserved &= m.conserved();
        for (k, v) in &m.dropped {
            *summary.dropped.entry(k.clone()).or_default() += v;
        }
        for (k, v) in &m.drop_events {
            *summary.drop_events.entry(k.clone()).or_default() += v;
        }
        summary.producer_interests += m
            .nodes
            .iter()
            .filter(|n| n.role == Role::Producer.as_str())
            .map(|n| n.interests_received)
            .sum::<u64>();
        summary.cache_hits += m.nodes.iter().map(|n| n.cache_hits).sum::<u64>();
        summary.stale_cache_hits += stale_cache_hits(&p.result.log);
        summary.log_lines += p.result.log.len();
    }
    summary.service_rates.clear();
    summary.sweep = points.iter().map(|p| p.row.clone()).collect();
    Ok(RunReport {
        summary,
        logs: points
            .iter()
            .map(|p| (label(p), p.result.log.clone()))
            .collect(),
        metrics: points
            .iter()
            .map(|p| (label(p), p.result.metrics.nodes.clone()))
            .collect(),
        overhead: overhead_rows(cfg),
    })
}

/// Runs a validated scenario and, given a directory, writes its outputs.
pub fn run_scenario(
    cfg: &ScenarioConfig,
    out_dir: Option<&Path>,
    opts: RunOptions,
) -> Result<RunReport, HarnessError> {
    let problems = validate(cfg);
    if !problems.is_empty() {
        return Err(HarnessError::Validation(problems));
    }
    let report = match &cfg.sweep {
        Some(s) => run_sweep(cfg, s, opts)?,
        None => run_single(cfg)?,
    };
    if !report.summary.conserved {
        return Err(HarnessError::Sim(SimError::Invariant(
            "interest accounting does not balance".into(),
        )));
    }
    if let Some(dir) = out_dir {
        write_outputs(&report, dir)?;
    }
    Ok(report)
}

fn io_err(path: &Path, e: impl std::fmt::Display) -> HarnessError {
    HarnessError::Io(path.display().to_string(), e.to_string())
}

const METRIC_COLUMNS: [&str; 18] = [
    "run",
    "node",
    "role",
    "interests_received",
    "contents_received",
    "interests_sent",
    "contents_sent",
    "interests_processed",
    "drops",
    "cache_hits",
    "cache_inserts",
    "cache_expires",
    "pit_aggregates",
    "batch_queued",
    "verifications",
    "batches",
    "delivered",
    "busy_us",
];

fn metric_record(run: &str, n: &NodeMetrics) -> Vec<String> {
    let counts = [
        n.interests_received,
        n.contents_received,
        n.interests_sent,
        n.contents_sent,
        n.interests_processed,
        n.drops,
        n.cache_hits,
        n.cache_inserts,
        n.cache_expires,
        n.pit_aggregates,
        n.batch_queued,
        n.verifications,
        n.batches,
        n.delivered,
        n.busy_us,
    ];
    [run.to_string(), n.node.clone(), n.role.clone()]
        .into_iter()
        .chain(counts.iter().map(u64::to_string))
        .collect()
}

fn write_csv<T: Serialize>(path: &Path, rows: &[T]) -> Result<(), HarnessError> {
    let mut w = csv::Writer::from_path(path).map_err(|e| io_err(path, e))?;
    for r in rows {
        w.serialize(r).map_err(|e| io_err(path, e))?;
    }
    w.flush().map_err(|e| io_err(path, e))
}

/// Writes `emission.log`, `metrics.csv`, `summary.json`, `overhead.csv`
/// and, for sweeps, `mu_model.csv` plus one log per point.
pub fn write_outputs(report: &RunReport, dir: &Path) -> Result<(), HarnessError> {
    std::fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
    let put = |name: &str, text: &str| {
        let path = dir.join(name);
        std::fs::write(&path, text).map_err(|e| io_err(&path, e))
    };
    put("emission.log", &report.log_text())?;
    if report.logs.len() > 1 {
        for (i, (_, log)) in report.logs.iter().enumerate() {
            put(
                &format!("emission_{i}.log"),
                &crate::simnet::log::render(log),
            )?;
        }
    }
    let path = dir.join("metrics.csv");
    let mut w = csv::Writer::from_path(&path).map_err(|e| io_err(&path, e))?;
    w.write_record(METRIC_COLUMNS)
        .map_err(|e| io_err(&path, e))?;
    for (run, nodes) in &report.metrics {
        for n in nodes {
            w.write_record(metric_record(run, n))
                .map_err(|e| io_err(&path, e))?;
        }
    }
    w.flush().map_err(|e| io_err(&path, e))?;
    let json = serde_json::to_string_pretty(&report.summary).map_err(|e| io_err(dir, e))?;
    put("summary.json", &(json + "\n"))?;
    if !report.overhead.is_empty() {
        write_csv(&dir.join("overhead.csv"), &report.overhead)?;
    }
    if !report.summary.sweep.is_empty() {
        write_csv(&dir.join("mu_model.csv"), &report.summary.sweep)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests;
