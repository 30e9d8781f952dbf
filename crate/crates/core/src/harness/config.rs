//! Scenario files: schema, parsing and validation.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use serde::Deserialize;

use super::HarnessError;
use crate::consumer::{IbacMode, ObfuscationScheme};
use crate::crypto::{SecurityLevel, SignatureSuite};
use crate::name::Name;
use crate::simnet::Role;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub name: String,
    #[serde(default)]
    pub description: String,
    #[serde(default)]
    pub seed: u64,
    /// Stop the clock here; interests still open are reported in flight.
    pub stop_ms: Option<u64>,
    #[serde(default)]
    pub router: RouterSection,
    #[serde(default)]
    pub groups: Vec<GroupDef>,
    pub nodes: Vec<NodeDef>,
    #[serde(default)]
    pub links: Vec<LinkDef>,
    #[serde(default)]
    pub producers: Vec<ProducerDef>,
    #[serde(default)]
    pub contents: Vec<ContentDef>,
    #[serde(default)]
    pub revocations: Vec<RevocationDef>,
    #[serde(default)]
    pub fetches: Vec<FetchDef>,
    pub traffic: Option<TrafficDef>,
    pub adversary: Option<AdversaryDef>,
    pub sweep: Option<SweepDef>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VerifyModeName {
    #[default]
    Individual,
    Batch,
}

/// Settings shared by every router. Service times are in seconds.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RouterSection {
    pub window_ms: Option<u64>,
    pub skew_ms: Option<u64>,
    #[serde(default)]
    pub verify_mode: VerifyModeName,
    #[serde(default = "default_batch_size")]
    pub batch_size: usize,
    #[serde(default = "default_batch_wait")]
    pub batch_max_wait_ms: u64,
    pub pit_lifetime_ms: Option<u64>,
    #[serde(default)]
    pub tau_process: f64,
    #[serde(default)]
    pub tau_verify: f64,
    /// Cost of one batch check; defaults to `tau_verify`.
    pub tau_batch: Option<f64>,
}

impl Default for RouterSection {
    fn default() -> Self {
        Self {
            window_ms: None,
            skew_ms: None,
            verify_mode: VerifyModeName::Individual,
            batch_size: default_batch_size(),
            batch_max_wait_ms: default_batch_wait(),
            pit_lifetime_ms: None,
            tau_process: 0.0,
            tau_verify: 0.0,
            tau_batch: None,
        }
    }
}

fn default_batch_size() -> usize {
    10
}

fn default_batch_wait() -> u64 {
    10
}

fn default_kappa() -> u32 {
    128
}

fn default_suite() -> String {
    SignatureSuite::default().to_string()
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroupDef {
    pub name: String,
    #[serde(default = "default_kappa")]
    pub kappa: u32,
    #[serde(default = "default_suite")]
    pub suite: String,
    /// Key generation seed; derived from the scenario seed when absent.
    pub key_seed: Option<u64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NodeDef {
    pub name: String,
    pub role: Role,
    #[serde(default)]
    pub groups: Vec<String>,
    /// Forces one mode for all of a consumer's interests; otherwise each
    /// interest follows the mode its content was published under.
    pub mode: Option<IbacMode>,
    #[serde(default)]
    pub encrypt_group_id: bool,
    #[serde(default)]
    pub clock_offset_ms: i64,
    #[serde(default)]
    pub measured: bool,
    pub tau_process: Option<f64>,
    pub tau_verify: Option<f64>,
    pub tau_batch: Option<f64>,
}

fn default_latency() -> f64 {
    1.0
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinkDef {
    pub a: String,
    pub b: String,
    #[serde(default = "default_latency")]
    pub latency_ms: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProducerDef {
    pub node: String,
    pub prefix: String,
    pub window_ms: Option<u64>,
    pub skew_ms: Option<u64>,
}

fn default_lifetime() -> u64 {
    10_000
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ContentDef {
    pub name: String,
    /// Routable prefix of the name; defaults to the producer prefix.
    pub prefix: Option<String>,
    /// Defaults to the producer whose prefix covers the name.
    pub producer: Option<String>,
    pub data: Option<String>,
    /// Pseudo-random payload of this many bytes, used when `data` is absent.
    pub size: Option<usize>,
    /// Empty means public content.
    #[serde(default)]
    pub groups: Vec<String>,
    #[serde(default = "default_scheme")]
    pub scheme: ObfuscationScheme,
    #[serde(default = "default_mode")]
    pub mode: IbacMode,
    #[serde(default = "default_lifetime")]
    pub lifetime_ms: u64,
}

fn default_scheme() -> ObfuscationScheme {
    ObfuscationScheme::Enc
}

fn default_mode() -> IbacMode {
    IbacMode::Full
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RevocationDef {
    pub group: String,
    pub at_ms: u64,
}

fn one() -> usize {
    1
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FetchDef {
    pub at_ms: u64,
    pub consumer: String,
    pub name: String,
    /// Group to request under; defaults to the first authorized one.
    pub group: Option<String>,
    #[serde(default = "one")]
    pub repeat: usize,
    #[serde(default)]
    pub every_ms: u64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrafficDef {
    pub lambda: f64,
    pub delta: f64,
    #[serde(default)]
    pub start_ms: u64,
    pub duration_ms: u64,
    pub consumers: Vec<String>,
    /// Protected names to draw from; defaults to every protected content.
    pub protected: Option<Vec<String>>,
    /// Public names to draw from; defaults to every public content.
    pub public: Option<Vec<String>>,
    pub max_interests: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ActionKind {
    ReplaySamePath,
    ReplayCrossPath,
    ForgePayload,
    NameProbe,
    ProbeCorrect,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ActionDef {
    pub kind: ActionKind,
    pub at_ms: u64,
    pub node: String,
    /// Replays: the honest consumer whose interests are captured.
    pub target: Option<String>,
    /// Replays: 1-based index of the first captured interest.
    pub nth: Option<usize>,
    /// Forgeries and probes: the content attacked.
    pub name: Option<String>,
    /// Group whose public parameters the adversary learned.
    pub group: Option<String>,
    pub mode: Option<IbacMode>,
    pub scheme: Option<ObfuscationScheme>,
    #[serde(default = "one")]
    pub count: usize,
    /// Repeat the action; replays advance `nth` by one each time.
    #[serde(default = "one")]
    pub repeat: usize,
    #[serde(default)]
    pub every_ms: u64,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AdversaryDef {
    #[serde(default)]
    pub compromised_consumers: Vec<String>,
    #[serde(default)]
    pub compromised_routers: Vec<String>,
    #[serde(default)]
    pub actions: Vec<ActionDef>,
}

fn default_window() -> u64 {
    10_000
}

/// Re-runs the traffic profile once per `δ`, with `λ = load · μ_model(δ)`
/// and at most `interests` arrivals, measuring the service rate at `node`.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepDef {
    pub deltas: Vec<f64>,
    pub interests: usize,
    pub load: f64,
    pub node: String,
    #[serde(default = "default_window")]
    pub window_ms: u64,
}

pub const BUNDLED: [(&str, &str); 9] = [
    (
        "figure_sequence",
        include_str!("../../scenarios/figure_sequence.toml"),
    ),
    (
        "replay_same_path",
        include_str!("../../scenarios/replay_same_path.toml"),
    ),
    (
        "replay_cross_path",
        include_str!("../../scenarios/replay_cross_path.toml"),
    ),
    ("forgery", include_str!("../../scenarios/forgery.toml")),
    (
        "name_probe",
        include_str!("../../scenarios/name_probe.toml"),
    ),
    (
        "multi_group",
        include_str!("../../scenarios/multi_group.toml"),
    ),
    (
        "mode_matrix",
        include_str!("../../scenarios/mode_matrix.toml"),
    ),
    (
        "revocation_expiry",
        include_str!("../../scenarios/revocation_expiry.toml"),
    ),
    (
        "service_rate_sweep",
        include_str!("../../scenarios/service_rate_sweep.toml"),
    ),
];

/// Parses and validates scenario text.
pub fn parse_scenario(text: &str) -> Result<ScenarioConfig, HarnessError> {
    let cfg: ScenarioConfig =
        toml::from_str(text).map_err(|e| HarnessError::Parse(e.to_string()))?;
    let problems = validate(&cfg);
    if problems.is_empty() {
        Ok(cfg)
    } else {
        Err(HarnessError::Validation(problems))
    }
}

pub fn load_scenario(path: &Path) -> Result<ScenarioConfig, HarnessError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| HarnessError::Io(path.display().to_string(), e.to_string()))?;
    parse_scenario(&text)
}

pub fn bundled_scenario(name: &str) -> Option<Result<ScenarioConfig, HarnessError>> {
    BUNDLED
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, text)| parse_scenario(text))
}

/// A file path if one exists, otherwise a bundled scenario name.
pub fn resolve_scenario(arg: &str) -> Result<ScenarioConfig, HarnessError> {
    let path = Path::new(arg);
    if path.is_file() {
        return load_scenario(path);
    }
    bundled_scenario(arg).unwrap_or_else(|| {
        let known: Vec<&str> = BUNDLED.iter().map(|(n, _)| *n).collect();
        Err(HarnessError::Io(
            arg.to_string(),
            format!("no such file or bundled scenario ({})", known.join(", ")),
        ))
    })
}

impl ScenarioConfig {
    pub(crate) fn node(&self, name: &str) -> Option<&NodeDef> {
        self.nodes.iter().find(|n| n.name == name)
    }

    pub(crate) fn content(&self, name: &str) -> Option<&ContentDef> {
        self.contents.iter().find(|c| c.name == name)
    }

    /// Index of the producer serving `c`.
    pub(crate) fn producer_of(&self, c: &ContentDef) -> Option<usize> {
        match &c.producer {
            Some(p) => self.producers.iter().position(|d| &d.node == p),
            None => self
                .producers
                .iter()
                .position(|d| under_prefix(&c.name, &d.prefix)),
        }
    }

    /// Parsed name of `c` with its routable prefix.
    pub(crate) fn content_name(&self, c: &ContentDef) -> Option<Name> {
        let prefix = match &c.prefix {
            Some(p) => p.clone(),
            None => self.producers.get(self.producer_of(c)?)?.prefix.clone(),
        };
        Name::parse_with_prefix(&c.name, &prefix).ok()
    }
}

fn under_prefix(name: &str, prefix: &str) -> bool {
    let n = crate::name::parse_components(name);
    let p = crate::name::parse_components(prefix);
    n.len() > p.len() && n[..p.len()] == p[..]
}

fn nonneg(x: f64) -> bool {
    x.is_finite() && x >= 0.0
}

/// Every problem with the scenario; empty when it can be run.
pub fn validate(cfg: &ScenarioConfig) -> Vec<String> {
    let mut out = Vec::new();
    let mut group_names = BTreeSet::new();
    for g in &cfg.groups {
        if !group_names.insert(g.name.as_str()) {
            out.push(format!("duplicate group {:?}", g.name));
        }
        if SecurityLevel::from_bits(g.kappa).is_err() {
            out.push(format!(
                "group {:?}: kappa must be 128 or 256, got {}",
                g.name, g.kappa
            ));
        }
        if g.suite.parse::<SignatureSuite>().is_err() {
            out.push(format!(
                "group {:?}: unknown signature suite {:?}",
                g.name, g.suite
            ));
        }
    }
    let group_ok = |g: &str| group_names.contains(g);

    let mut node_names = BTreeSet::new();
    for n in &cfg.nodes {
        if !node_names.insert(n.name.as_str()) {
            out.push(format!("duplicate node {:?}", n.name));
        }
        for g in &n.groups {
            if !group_ok(g) {
                out.push(format!("node {:?} is in undefined group {g:?}", n.name));
            }
        }
        if !n.groups.is_empty() && n.role != Role::Consumer {
            out.push(format!("node {:?}: only consumers join groups", n.name));
        }
        for t in [n.tau_process, n.tau_verify, n.tau_batch]
            .into_iter()
            .flatten()
        {
            if !nonneg(t) {
                out.push(format!(
                    "node {:?}: service times must be non-negative",
                    n.name
                ));
            }
        }
    }
    let role_of = |name: &str| cfg.node(name).map(|n| n.role);
    let expect_role =
        |out: &mut Vec<String>, what: &str, name: &str, role: Role| match role_of(name) {
            None => out.push(format!("{what} refers to undefined node {name:?}")),
            Some(r) if r != role => out.push(format!(
                "{what}: node {name:?} is a {}, not a {}",
                r.as_str(),
                role.as_str()
            )),
            _ => {}
        };

    let r = &cfg.router;
    for t in [Some(r.tau_process), Some(r.tau_verify), r.tau_batch]
        .into_iter()
        .flatten()
    {
        if !nonneg(t) {
            out.push("router service times must be non-negative".to_string());
        }
    }
    if r.verify_mode == VerifyModeName::Batch && r.batch_size == 0 {
        out.push("router batch_size must be positive".to_string());
    }

    for l in &cfg.links {
        for end in [&l.a, &l.b] {
            if role_of(end).is_none() {
                out.push(format!(
                    "link {}-{} refers to undefined node {end:?}",
                    l.a, l.b
                ));
            }
        }
        if !nonneg(l.latency_ms) {
            out.push(format!(
                "link {}-{}: latency must be non-negative",
                l.a, l.b
            ));
        }
    }

    let mut producer_nodes = BTreeSet::new();
    for p in &cfg.producers {
        expect_role(&mut out, "producer", &p.node, Role::Producer);
        if !producer_nodes.insert(p.node.as_str()) {
            out.push(format!("producer {:?} defined twice", p.node));
        }
        if crate::name::parse_components(&p.prefix).is_empty() {
            out.push(format!("producer {:?}: prefix must not be empty", p.node));
        }
    }
    for n in cfg.nodes.iter().filter(|n| n.role == Role::Producer) {
        if !producer_nodes.contains(n.name.as_str()) {
            out.push(format!(
                "producer node {:?} has no [[producers]] entry",
                n.name
            ));
        }
    }

    let mut content_names = BTreeSet::new();
    for c in &cfg.contents {
        if !content_names.insert(c.name.as_str()) {
            out.push(format!("duplicate content {:?}", c.name));
        }
        match cfg.producer_of(c) {
            None => out.push(format!("content {:?} has no producer", c.name)),
            Some(_) => {
                if cfg.content_name(c).is_none() {
                    out.push(format!(
                        "content {:?}: name does not extend its routable prefix",
                        c.name
                    ));
                }
            }
        }
        if c.data.is_some() && c.size.is_some() {
            out.push(format!("content {:?}: give data or size, not both", c.name));
        }
        for g in &c.groups {
            if !group_ok(g) {
                out.push(format!(
                    "content {:?} bound to undefined group {g:?}",
                    c.name
                ));
            }
        }
        if c.lifetime_ms == 0 {
            out.push(format!("content {:?}: lifetime must be positive", c.name));
        }
    }

    for v in &cfg.revocations {
        if !group_ok(&v.group) {
            out.push(format!("revocation of undefined group {:?}", v.group));
        }
    }

    for f in &cfg.fetches {
        expect_role(&mut out, "fetch", &f.consumer, Role::Consumer);
        if cfg.content(&f.name).is_none() {
            out.push(format!("fetch of undefined content {:?}", f.name));
        }
        if let Some(g) = &f.group {
            if !group_ok(g) {
                out.push(format!("fetch under undefined group {g:?}"));
            } else if cfg.node(&f.consumer).is_some_and(|n| !n.groups.contains(g)) {
                out.push(format!("fetch: {:?} is not a member of {g:?}", f.consumer));
            }
        }
        if f.repeat == 0 {
            out.push("fetch repeat must be positive".to_string());
        }
    }

    if let Some(t) = &cfg.traffic {
        if !(0.0..=1.0).contains(&t.delta) {
            out.push(format!("traffic delta must lie in [0, 1], got {}", t.delta));
        }
        if !(t.lambda.is_finite() && t.lambda > 0.0) {
            out.push(format!("traffic lambda must be positive, got {}", t.lambda));
        }
        if t.consumers.is_empty() {
            out.push("traffic needs at least one consumer".to_string());
        }
        for c in &t.consumers {
            expect_role(&mut out, "traffic", c, Role::Consumer);
        }
        for n in t.protected.iter().chain(t.public.iter()).flatten() {
            if cfg.content(n).is_none() {
                out.push(format!("traffic names undefined content {n:?}"));
            }
        }
    }

    if let Some(a) = &cfg.adversary {
        for c in &a.compromised_consumers {
            expect_role(&mut out, "compromised consumer", c, Role::Consumer);
        }
        for r in &a.compromised_routers {
            expect_role(&mut out, "compromised router", r, Role::Router);
        }
        for (i, act) in a.actions.iter().enumerate() {
            let what = format!("adversary action {i}");
            if !a.compromised_consumers.contains(&act.node) {
                out.push(format!(
                    "{what}: {:?} is not a compromised consumer",
                    act.node
                ));
            }
            match act.kind {
                ActionKind::ReplaySamePath | ActionKind::ReplayCrossPath => match &act.target {
                    None => out.push(format!("{what}: replay needs a target")),
                    Some(t) => expect_role(&mut out, &what, t, Role::Consumer),
                },
                _ => match act.name.as_deref().map(|n| cfg.content(n)) {
                    None => out.push(format!("{what}: needs a content name")),
                    Some(None) => out.push(format!(
                        "{what}: undefined content {:?}",
                        act.name.as_deref().unwrap()
                    )),
                    Some(Some(c)) => {
                        let group = act.group.as_ref().or(c.groups.first());
                        match group {
                            None => out.push(format!("{what}: content {:?} is public", c.name)),
                            Some(g) if !group_ok(g) => {
                                out.push(format!("{what}: undefined group {g:?}"))
                            }
                            _ => {}
                        }
                    }
                },
            }
            if act.count == 0 || act.repeat == 0 {
                out.push(format!("{what}: count and repeat must be positive"));
            }
        }
    }

    if let Some(s) = &cfg.sweep {
        if cfg.traffic.is_none() {
            out.push("sweep needs a [traffic] section".to_string());
        }
        if s.deltas.is_empty() {
            out.push("sweep needs at least one delta".to_string());
        }
        for d in &s.deltas {
            if !(0.0..=1.0).contains(d) {
                out.push(format!("sweep delta must lie in [0, 1], got {d}"));
            }
        }
        if !(s.load.is_finite() && s.load > 0.0) {
            out.push("sweep load must be positive".to_string());
        }
        if s.interests == 0 || s.window_ms == 0 {
            out.push("sweep interests and window must be positive".to_string());
        }
        expect_role(&mut out, "sweep", &s.node, Role::Router);
    }
    out
}

/// Deterministic per-purpose seed.
pub(crate) fn derive_seed(seed: u64, purpose: u64) -> u64 {
    let mut z = seed ^ purpose.wrapping_mul(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Name → index lookups, built once per scenario.
pub(crate) struct Index<'a> {
    pub node_ids: BTreeMap<&'a str, u32>,
    pub group_ix: BTreeMap<&'a str, usize>,
}

impl<'a> Index<'a> {
    pub fn new(cfg: &'a ScenarioConfig) -> Self {
        Self {
            node_ids: cfg
                .nodes
                .iter()
                .enumerate()
                .map(|(i, n)| (n.name.as_str(), i as u32 + 1))
                .collect(),
            group_ix: cfg
                .groups
                .iter()
                .enumerate()
                .map(|(i, g)| (g.name.as_str(), i))
                .collect(),
        }
    }
}
