//! Deterministic discrete-event network of consumers, routers and producers.
//!
//! Events are ordered by `(time, insertion sequence)`. Each node serves one
//! job at a time: a handler runs when the job starts and its emissions leave
//! the node when the job completes, so queueing delay follows from the
//! configured service times. Links have fixed latency and never lose
//! packets. Every injected interest carries a trace id; its first terminal
//! outcome (delivery or drop) is recorded.

mod adversary;
pub mod log;
mod topology;
mod traffic;

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use serde::Serialize;
use thiserror::Error;

pub use adversary::{AdversaryAction, AdversaryConfig, AttackKind, AttackOutcome};
pub use log::{LogKind, LogRecord};
pub use topology::{Link, NodeId, NodeSpec, Role, ServiceTimes, Topology};
pub use traffic::{Arrival, TrafficProfile};

use crate::auth::DropReason;
use crate::consumer::{interest_generation, ConsumerContext};
use crate::message::{ContentObject, Interest};
use crate::name::{Component, MessageName, Name};
use crate::producer::Producer;
use crate::router::{Emission, Fib, NoteKind, Router, RouterConfig, TraceId, Work};
use crate::wire::encode_name;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SimError {
    #[error("invalid configuration: {}", .0.join("; "))]
    Config(Vec<String>),
    #[error("simulation invariant violated: {0}")]
    Invariant(String),
}

impl SimError {
    fn config(msg: impl Into<String>) -> Self {
        SimError::Config(vec![msg.into()])
    }
}

#[derive(Debug, Clone, Default)]
pub struct SimConfig {
    pub seed: u64,
    /// Applied to every router; the batch seed is derived per node.
    pub router: RouterConfig,
    /// Stop processing events after this time; traces still open are in flight.
    pub stop_ms: Option<u64>,
}

#[derive(Debug, Clone)]
enum Packet {
    Interest {
        interest: Interest,
        trace: TraceId,
    },
    Content {
        content: ContentObject,
        traces: Vec<TraceId>,
    },
}

#[derive(Debug, Clone)]
enum Injection {
    Fetch { name: Name, context: Option<usize> },
    Replay { target: NodeId, nth: usize },
    Forge { name: Name, ctx: usize },
    Probe { name: Name, ctx: usize },
    ProbeCorrect { name: Name, ctx: usize },
}

#[derive(Debug, Clone)]
enum Job {
    Packet {
        from: NodeId,
        packet: Packet,
    },
    Timer,
    Inject {
        what: Injection,
        action: Option<usize>,
    },
}

#[derive(Debug, Clone)]
enum Event {
    Arrive {
        node: NodeId,
        from: NodeId,
        packet: Packet,
    },
    Inject {
        node: NodeId,
        what: Injection,
        action: Option<usize>,
    },
    Timer {
        node: NodeId,
    },
    Done {
        node: NodeId,
    },
}

struct ConsumerApp {
    contexts: Vec<ConsumerContext>,
    fib: Fib,
}

/// Emissions, signature work and the served data of one handled job.
type Handled = (Vec<Emission>, Work, Option<Vec<u8>>);

enum Agent {
    Router(Box<Router>),
    Producer(Box<Producer>),
    Consumer(ConsumerApp),
}

struct Busy {
    emissions: Vec<Emission>,
    processed: Option<Vec<u8>>,
}

struct NodeState {
    spec: NodeSpec,
    agent: Agent,
    jobs: VecDeque<Job>,
    busy: Option<Busy>,
    timer_at: Option<u64>,
    metrics: NodeMetrics,
}

/// Counters for one node.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct NodeMetrics {
    pub node: String,
    pub role: String,
    pub interests_received: u64,
    pub contents_received: u64,
    pub interests_sent: u64,
    pub contents_sent: u64,
    pub interests_processed: u64,
    pub drops: u64,
    pub cache_hits: u64,
    pub cache_inserts: u64,
    pub cache_expires: u64,
    pub pit_aggregates: u64,
    pub batch_queued: u64,
    pub verifications: u64,
    pub batches: u64,
    pub delivered: u64,
    pub busy_us: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Outcome {
    Served {
        at_us: u64,
        node: NodeId,
        correct: bool,
    },
    Dropped {
        at_us: u64,
        node: NodeId,
        reason: DropReason,
    },
}

/// One injected interest and what became of it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceRecord {
    pub id: TraceId,
    pub origin: NodeId,
    pub action: Option<usize>,
    /// Cleartext name the interest asks for, where known.
    pub name: Option<Name>,
    pub injected_us: u64,
    pub outcome: Option<Outcome>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct Metrics {
    pub injected: u64,
    pub served: u64,
    /// Served traces whose data differs from what the producer published.
    pub data_mismatches: u64,
    /// Terminal drops per reason, one per trace.
    pub dropped: BTreeMap<String, u64>,
    pub in_flight: u64,
    /// Drop lines in the log per reason; counts repeated drops of one trace.
    pub drop_events: BTreeMap<String, u64>,
    /// Consumer fetches (not adversary traffic) served with correct data.
    pub fetch_successes: u64,
    pub fetch_failures: u64,
    pub nodes: Vec<NodeMetrics>,
    pub attacks: Vec<AttackOutcome>,
    pub end_us: u64,
}

impl Metrics {
    /// Injected interests are served, dropped or still in flight.
    pub fn conserved(&self) -> bool {
        self.injected == self.served + self.dropped.values().sum::<u64>() + self.in_flight
    }

    pub fn node(&self, name: &str) -> Option<&NodeMetrics> {
        self.nodes.iter().find(|n| n.node == name)
    }
}

#[derive(Debug, Clone)]
pub struct SimResult {
    pub metrics: Metrics,
    pub log: Vec<LogRecord>,
    pub traces: Vec<TraceRecord>,
}

impl SimResult {
    pub fn log_text(&self) -> String {
        log::render(&self.log)
    }
}

pub struct Simulation {
    topo: Topology,
    config: SimConfig,
    nodes: BTreeMap<NodeId, NodeState>,
    events: BTreeMap<(u64, u64), Event>,
    seq: u64,
    now_us: u64,
    rng: ChaCha20Rng,
    log: Vec<LogRecord>,
    traces: Vec<TraceRecord>,
    /// Interests each consumer sent, in order, for replay capture.
    sent: BTreeMap<NodeId, Vec<(u64, Interest, TraceId)>>,
    adversary_contexts: Vec<ConsumerContext>,
    actions: Vec<AdversaryAction>,
    expected: BTreeMap<Vec<Component>, Vec<u8>>,
    public: BTreeSet<Vec<Component>>,
}

fn local_ms(now_us: u64, offset_ms: i64) -> u64 {
    ((now_us / 1000) as i64 + offset_ms).max(0) as u64
}

impl Simulation {
    pub fn new(topo: Topology, config: SimConfig) -> Self {
        let mut nodes = BTreeMap::new();
        for spec in topo.nodes() {
            let agent = match spec.role {
                Role::Router => {
                    let seed = config.seed.wrapping_mul(0x9e37_79b9_7f4a_7c15) ^ u64::from(spec.id);
                    Agent::Router(Box::new(Router::new(RouterConfig {
                        seed,
                        ..config.router.clone()
                    })))
                }
                _ => Agent::Consumer(ConsumerApp {
                    contexts: Vec::new(),
                    fib: Fib::new(),
                }),
            };
            let metrics = NodeMetrics {
                node: spec.name.clone(),
                role: spec.role.as_str().into(),
                ..Default::default()
            };
            nodes.insert(
                spec.id,
                NodeState {
                    spec: spec.clone(),
                    agent,
                    jobs: VecDeque::new(),
                    busy: None,
                    timer_at: None,
                    metrics,
                },
            );
        }
        Self {
            rng: ChaCha20Rng::seed_from_u64(config.seed),
            topo,
            config,
            nodes,
            events: BTreeMap::new(),
            seq: 0,
            now_us: 0,
            log: Vec::new(),
            traces: Vec::new(),
            sent: BTreeMap::new(),
            adversary_contexts: Vec::new(),
            actions: Vec::new(),
            expected: BTreeMap::new(),
            public: BTreeSet::new(),
        }
    }

    pub fn topology(&self) -> &Topology {
        &self.topo
    }

    fn role_of(&self, node: NodeId) -> Option<Role> {
        self.topo.node(node).map(|n| n.role)
    }

    pub fn set_producer(&mut self, node: NodeId, producer: Producer) -> Result<(), SimError> {
        if self.role_of(node) != Some(Role::Producer) {
            return Err(SimError::config(format!("node {node} is not a producer")));
        }
        for e in producer.catalog().entries() {
            self.expected
                .insert(e.name.components().to_vec(), e.data.clone());
        }
        for (components, e) in producer.catalog().public_entries() {
            self.expected.insert(components.clone(), e.data.clone());
            self.public.insert(components.clone());
        }
        self.nodes.get_mut(&node).unwrap().agent = Agent::Producer(Box::new(producer));
        Ok(())
    }

    pub fn set_consumer(
        &mut self,
        node: NodeId,
        contexts: Vec<ConsumerContext>,
    ) -> Result<(), SimError> {
        if self.role_of(node) != Some(Role::Consumer) {
            return Err(SimError::config(format!("node {node} is not a consumer")));
        }
        if let Agent::Consumer(app) = &mut self.nodes.get_mut(&node).unwrap().agent {
            app.contexts = contexts;
        }
        Ok(())
    }

    fn producers(&self) -> impl Iterator<Item = &Producer> {
        self.nodes.values().filter_map(|n| match &n.agent {
            Agent::Producer(p) => Some(p.as_ref()),
            _ => None,
        })
    }

    /// Index of the first context whose group may read `name`, preferring
    /// one whose scheme and mode match the published entry.
    fn resolve_context(&self, consumer: NodeId, name: &Name) -> Option<usize> {
        let Agent::Consumer(app) = &self.nodes.get(&consumer)?.agent else {
            return None;
        };
        let entry = self
            .producers()
            .find_map(|p| p.catalog().get(name.components()))?;
        let member = |c: &ConsumerContext| entry.groups.contains(c.group().group_id());
        app.contexts
            .iter()
            .position(|c| member(c) && c.scheme() == entry.scheme && c.mode() == entry.mode)
            .or_else(|| app.contexts.iter().position(member))
    }

    fn push(&mut self, time_us: u64, event: Event) {
        self.events.insert((time_us, self.seq), event);
        self.seq += 1;
    }

    /// Schedules one fetch. Without an explicit context the consumer uses
    /// the first of its groups authorized for `name`.
    pub fn schedule_fetch(
        &mut self,
        at_ms: u64,
        consumer: NodeId,
        name: Name,
        context: Option<usize>,
    ) -> Result<(), SimError> {
        if self.role_of(consumer) != Some(Role::Consumer) {
            return Err(SimError::config(format!(
                "fetch issuer {consumer} is not a consumer"
            )));
        }
        let context = context.or_else(|| self.resolve_context(consumer, &name));
        self.push(
            at_ms * 1000,
            Event::Inject {
                node: consumer,
                what: Injection::Fetch { name, context },
                action: None,
            },
        );
        Ok(())
    }

    /// Schedules Poisson arrivals; returns how many.
    pub fn add_traffic(&mut self, profile: &TrafficProfile) -> Result<usize, SimError> {
        if let Some(c) = profile
            .consumers
            .iter()
            .find(|&&c| self.role_of(c) != Some(Role::Consumer))
        {
            return Err(SimError::config(format!(
                "traffic issuer {c} is not a consumer"
            )));
        }
        let arrivals = profile.arrivals(&mut self.rng)?;
        let n = arrivals.len();
        for a in arrivals {
            let context = self.resolve_context(a.consumer, &a.name);
            let what = Injection::Fetch {
                name: a.name,
                context,
            };
            self.push(
                a.time_us,
                Event::Inject {
                    node: a.consumer,
                    what,
                    action: None,
                },
            );
        }
        Ok(n)
    }

    fn first_hops(&self, node: NodeId) -> BTreeSet<NodeId> {
        let producers: Vec<NodeId> = self
            .topo
            .nodes()
            .filter(|n| n.role == Role::Producer)
            .map(|n| n.id)
            .collect();
        producers
            .into_iter()
            .filter_map(|p| self.topo.next_hops(p).get(&node).copied())
            .collect()
    }

    pub fn add_adversary(&mut self, adv: AdversaryConfig) -> Result<(), SimError> {
        let mut problems = Vec::new();
        for &c in &adv.compromised_consumers {
            if self.role_of(c) != Some(Role::Consumer) {
                problems.push(format!("compromised consumer {c} is not a consumer"));
            }
        }
        let honest: Vec<NodeId> = self
            .topo
            .nodes()
            .filter(|n| n.role == Role::Consumer && !adv.compromised_consumers.contains(&n.id))
            .map(|n| n.id)
            .collect();
        let producers: Vec<NodeId> = self
            .topo
            .nodes()
            .filter(|n| n.role == Role::Producer)
            .map(|n| n.id)
            .collect();
        for &r in &adv.compromised_routers {
            if self.role_of(r) != Some(Role::Router) {
                problems.push(format!("compromised router {r} is not a router"));
                continue;
            }
            for &c in &honest {
                for &p in &producers {
                    if self.topo.path(c, p).contains(&r) {
                        problems.push(format!(
                            "compromised router {r} lies on the path from {c} to {p}"
                        ));
                    }
                }
            }
        }
        for (i, a) in adv.actions.iter().enumerate() {
            if !adv.compromised_consumers.contains(&a.node) {
                problems.push(format!(
                    "action {i} issuer {} is not a compromised consumer",
                    a.node
                ));
                continue;
            }
            match &a.kind {
                AttackKind::ReplaySamePath { target, nth }
                | AttackKind::ReplayCrossPath { target, nth } => {
                    if !honest.contains(target) {
                        problems.push(format!(
                            "action {i} replay target {target} is not an honest consumer"
                        ));
                        continue;
                    }
                    if *nth == 0 {
                        problems.push(format!("action {i} capture index is 1-based"));
                    }
                    let shared = !self
                        .first_hops(a.node)
                        .is_disjoint(&self.first_hops(*target));
                    match (&a.kind, shared) {
                        (AttackKind::ReplaySamePath { .. }, false) => problems.push(format!(
                            "action {i} same-path replay needs the target's first-hop router"
                        )),
                        (AttackKind::ReplayCrossPath { .. }, true) => problems.push(format!(
                            "action {i} cross-path replay must enter at a different router"
                        )),
                        _ => {}
                    }
                }
                AttackKind::ForgePayload { count, .. } | AttackKind::NameProbe { count, .. }
                    if *count == 0 =>
                {
                    problems.push(format!("action {i} count must be positive"))
                }
                _ => {}
            }
        }
        if !problems.is_empty() {
            return Err(SimError::Config(problems));
        }
        for a in adv.actions {
            let index = self.actions.len();
            let at_us = a.at_ms * 1000;
            let ctx_of = |oracle: &ConsumerContext, sim: &mut Self| {
                let ctx = adversary::adversary_context(oracle, &mut sim.rng);
                sim.adversary_contexts.push(ctx);
                sim.adversary_contexts.len() - 1
            };
            let injections: Vec<Injection> = match &a.kind {
                AttackKind::ReplaySamePath { target, nth }
                | AttackKind::ReplayCrossPath { target, nth } => {
                    vec![Injection::Replay {
                        target: *target,
                        nth: *nth,
                    }]
                }
                AttackKind::ForgePayload {
                    name,
                    oracle,
                    count,
                } => {
                    let ctx = ctx_of(oracle, self);
                    vec![
                        Injection::Forge {
                            name: name.clone(),
                            ctx
                        };
                        *count
                    ]
                }
                AttackKind::NameProbe {
                    name,
                    oracle,
                    count,
                } => {
                    let ctx = ctx_of(oracle, self);
                    vec![
                        Injection::Probe {
                            name: name.clone(),
                            ctx
                        };
                        *count
                    ]
                }
                AttackKind::ProbeCorrect { name, oracle } => {
                    let ctx = ctx_of(oracle, self);
                    vec![Injection::ProbeCorrect {
                        name: name.clone(),
                        ctx,
                    }]
                }
            };
            for what in injections {
                self.push(
                    at_us,
                    Event::Inject {
                        node: a.node,
                        what,
                        action: Some(index),
                    },
                );
            }
            self.actions.push(a);
        }
        Ok(())
    }

    fn install_routes(&mut self) {
        let producers: Vec<(NodeId, Vec<Component>)> = self
            .nodes
            .iter()
            .filter_map(|(&id, n)| match &n.agent {
                Agent::Producer(p) => Some((id, p.prefix().to_vec())),
                _ => None,
            })
            .collect();
        for (pid, prefix) in producers {
            for (node, hop) in self.topo.next_hops(pid) {
                match &mut self.nodes.get_mut(&node).unwrap().agent {
                    Agent::Router(r) => r.fib_mut().insert(&prefix, hop),
                    Agent::Consumer(app) => app.fib.insert(&prefix, hop),
                    Agent::Producer(_) => {}
                }
            }
        }
    }

    pub fn run(mut self) -> Result<SimResult, SimError> {
        let missing: Vec<String> = self
            .nodes
            .values()
            .filter(|n| n.spec.role == Role::Producer && !matches!(n.agent, Agent::Producer(_)))
            .map(|n| format!("producer {} has no content", n.spec.name))
            .collect();
        if !missing.is_empty() {
            return Err(SimError::Config(missing));
        }
        self.install_routes();
        let stop_us = self.config.stop_ms.map(|ms| ms * 1000);
        while let Some((&(time_us, _), _)) = self.events.first_key_value() {
            if stop_us.is_some_and(|s| time_us > s) {
                break;
            }
            let (_, event) = self.events.pop_first().unwrap();
            self.now_us = time_us;
            let node = match event {
                Event::Arrive { node, from, packet } => {
                    self.enqueue(node, Job::Packet { from, packet });
                    node
                }
                Event::Inject { node, what, action } => {
                    self.enqueue(node, Job::Inject { what, action });
                    node
                }
                Event::Timer { node } => {
                    let n = self.nodes.get_mut(&node).unwrap();
                    if n.timer_at == Some(time_us) {
                        n.timer_at = None;
                        self.enqueue(node, Job::Timer);
                    }
                    node
                }
                Event::Done { node } => {
                    let busy = self
                        .nodes
                        .get_mut(&node)
                        .unwrap()
                        .busy
                        .take()
                        .expect("done without a job");
                    self.dispatch(node, busy)?;
                    node
                }
            };
            self.start_jobs(node)?;
        }
        self.finish(stop_us.is_some())
    }

    fn enqueue(&mut self, node: NodeId, job: Job) {
        self.nodes.get_mut(&node).unwrap().jobs.push_back(job);
    }

    /// Starts queued jobs until the node is busy or idle.
    fn start_jobs(&mut self, node: NodeId) -> Result<(), SimError> {
        loop {
            let n = self.nodes.get_mut(&node).unwrap();
            if n.busy.is_some() {
                return Ok(());
            }
            let Some(job) = n.jobs.pop_front() else {
                return Ok(());
            };
            let message = matches!(job, Job::Packet { .. });
            let (emissions, work, processed) = self.handle(node, job)?;
            let n = self.nodes.get_mut(&node).unwrap();
            let cost = n
                .spec
                .service
                .job_cost(message, work.verifications, work.batches);
            n.metrics.verifications += u64::from(work.verifications);
            n.metrics.batches += u64::from(work.batches);
            n.metrics.busy_us += cost;
            let processed = processed.filter(|_| n.spec.measured);
            self.reschedule_timer(node);
            let busy = Busy {
                emissions,
                processed,
            };
            if cost == 0 {
                self.dispatch(node, busy)?;
            } else {
                self.nodes.get_mut(&node).unwrap().busy = Some(busy);
                self.push(self.now_us + cost, Event::Done { node });
            }
        }
    }

    fn reschedule_timer(&mut self, node: NodeId) {
        let n = self.nodes.get_mut(&node).unwrap();
        let Agent::Router(r) = &n.agent else { return };
        let Some(deadline) = r.next_deadline() else {
            return;
        };
        let global_ms = (deadline as i64 - n.spec.clock_offset_ms).max(0) as u64;
        let at = (global_ms * 1000).max(self.now_us);
        if n.timer_at.is_some_and(|t| t <= at) {
            return;
        }
        n.timer_at = Some(at);
        self.push(at, Event::Timer { node });
    }

    fn new_trace(&mut self, origin: NodeId, action: Option<usize>, name: Option<Name>) -> TraceId {
        let id = self.traces.len() as TraceId;
        self.traces.push(TraceRecord {
            id,
            origin,
            action,
            name,
            injected_us: self.now_us,
            outcome: None,
        });
        id
    }

    fn record(&mut self, node: NodeId, kind: LogKind, name: Vec<u8>, reason: impl Into<String>) {
        let node = self.nodes[&node].spec.name.clone();
        self.log.push(LogRecord {
            time_us: self.now_us,
            node,
            kind,
            name,
            reason: reason.into(),
        });
    }

    fn settle(&mut self, trace: TraceId, outcome: Outcome) {
        let t = &mut self.traces[trace as usize];
        if t.outcome.is_none() {
            t.outcome = Some(outcome);
        }
    }

    fn handle(
        &mut self,
        node: NodeId,
        job: Job,
    ) -> Result<Handled, SimError> {
        let now_us = self.now_us;
        let offset = self.nodes[&node].spec.clock_offset_ms;
        let local = local_ms(now_us, offset);
        let n = self.nodes.get_mut(&node).unwrap();
        match (&mut n.agent, job) {
            (
                Agent::Router(r),
                Job::Packet {
                    from,
                    packet: Packet::Interest { interest, trace },
                },
            ) => {
                n.metrics.interests_received += 1;
                let name = encode_name(&interest.name).unwrap_or_default();
                let out = r.on_interest(local, interest, from, trace);
                Ok((out.emissions, out.work, Some(name)))
            }
            (
                Agent::Router(r),
                Job::Packet {
                    from,
                    packet: Packet::Content { content, .. },
                },
            ) => {
                n.metrics.contents_received += 1;
                let out = r.on_content(local, content, from);
                Ok((out.emissions, out.work, None))
            }
            (Agent::Router(r), Job::Timer) => {
                let out = r.expire(local);
                Ok((out.emissions, out.work, None))
            }
            (
                Agent::Producer(p),
                Job::Packet {
                    from,
                    packet: Packet::Interest { interest, trace },
                },
            ) => {
                n.metrics.interests_received += 1;
                let name = encode_name(&interest.name).unwrap_or_default();
                let emission = match p.content_object_generation(&interest, local) {
                    Ok(content) => Emission::SendContent {
                        face: from,
                        content,
                        traces: vec![trace],
                    },
                    Err(reason) => Emission::Drop {
                        name: name.clone(),
                        reason,
                        traces: vec![trace],
                    },
                };
                Ok((vec![emission], Work::default(), Some(name)))
            }
            (
                Agent::Consumer(_),
                Job::Packet {
                    packet: Packet::Content { content, traces },
                    ..
                },
            ) => {
                n.metrics.contents_received += 1;
                self.deliver(node, content, traces);
                Ok((Vec::new(), Work::default(), None))
            }
            (Agent::Consumer(_), Job::Inject { what, action }) => Ok((
                self.inject(node, local, what, action)?,
                Work::default(),
                None,
            )),
            (
                _,
                Job::Packet {
                    packet: Packet::Content { content, .. },
                    ..
                },
            ) => {
                n.metrics.contents_received += 1;
                let name = encode_name(&content.name).unwrap_or_default();
                Ok((
                    vec![Emission::Drop {
                        name,
                        reason: DropReason::Unsolicited,
                        traces: Vec::new(),
                    }],
                    Work::default(),
                    None,
                ))
            }
            (
                _,
                Job::Packet {
                    packet: Packet::Interest { interest, trace },
                    ..
                },
            ) => {
                n.metrics.interests_received += 1;
                let name = encode_name(&interest.name).unwrap_or_default();
                Ok((
                    vec![Emission::Drop {
                        name,
                        reason: DropReason::NoRoute,
                        traces: vec![trace],
                    }],
                    Work::default(),
                    None,
                ))
            }
            (_, Job::Timer) => Ok((Vec::new(), Work::default(), None)),
            (_, Job::Inject { .. }) => Err(SimError::Invariant(format!(
                "injection at non-consumer node {node}"
            ))),
        }
    }

    fn deliver(&mut self, node: NodeId, content: ContentObject, traces: Vec<TraceId>) {
        let name = encode_name(&content.name).unwrap_or_default();
        for t in traces {
            let rec = &self.traces[t as usize];
            if rec.origin != node {
                continue;
            }
            let correct = rec
                .name
                .as_ref()
                .and_then(|n| self.expected.get(n.components()))
                .is_some_and(|d| *d == content.data);
            let fresh = rec.outcome.is_none();
            self.settle(
                t,
                Outcome::Served {
                    at_us: self.now_us,
                    node,
                    correct,
                },
            );
            if fresh {
                self.nodes.get_mut(&node).unwrap().metrics.delivered += 1;
                self.record(
                    node,
                    LogKind::Deliver,
                    name.clone(),
                    if correct { "ok" } else { "mismatch" },
                );
            }
        }
    }

    fn inject(
        &mut self,
        node: NodeId,
        local: u64,
        what: Injection,
        action: Option<usize>,
    ) -> Result<Vec<Emission>, SimError> {
        let Agent::Consumer(app) = &self.nodes[&node].agent else {
            unreachable!()
        };
        let (built, name, label) = match what {
            Injection::Fetch { name, context } => {
                let built = if self.public.contains(name.components()) || app.contexts.is_empty() {
                    Ok(Interest::new(MessageName::clear(&name)))
                } else {
                    let ctx = &app.contexts[context.unwrap_or(0).min(app.contexts.len() - 1)];
                    interest_generation(ctx, name.routable_prefix(), &name, local, &mut self.rng)
                };
                (built.map_err(|e| e.to_string()), Some(name), "fetch")
            }
            Injection::Replay { target, nth } => {
                let Some((_, interest, orig)) =
                    self.sent.get(&target).and_then(|s| s.get(nth - 1)).cloned()
                else {
                    self.record(node, LogKind::Inject, Vec::new(), "nothing_captured");
                    return Ok(Vec::new());
                };
                let name = self.traces[orig as usize].name.clone();
                (Ok(interest), name, "replay")
            }
            Injection::Forge { name, ctx } => {
                let ctx = &self.adversary_contexts[ctx];
                let built = adversary::forged_interest(ctx, &name, local, &mut self.rng);
                (
                    built.map_err(|e| e.to_string()),
                    Some(name),
                    "forge_payload",
                )
            }
            Injection::Probe { name, ctx } => {
                let ctx = &self.adversary_contexts[ctx];
                let built = adversary::probe_interest(ctx, &name, local, &mut self.rng);
                (built.map_err(|e| e.to_string()), Some(name), "name_probe")
            }
            Injection::ProbeCorrect { name, ctx } => {
                let ctx = &self.adversary_contexts[ctx];
                let built = adversary::correct_name_probe(ctx, &name, local, &mut self.rng);
                (
                    built.map_err(|e| e.to_string()),
                    Some(name),
                    "probe_correct",
                )
            }
        };
        let trace = self.new_trace(node, action, name);
        let interest = match built {
            Ok(i) => i,
            Err(_) => {
                self.record(node, LogKind::Inject, Vec::new(), label);
                return Ok(vec![Emission::Drop {
                    name: Vec::new(),
                    reason: DropReason::Malformed,
                    traces: vec![trace],
                }]);
            }
        };
        let wire_name = encode_name(&interest.name).unwrap_or_default();
        self.record(node, LogKind::Inject, wire_name.clone(), label);
        if action.is_none() {
            self.sent
                .entry(node)
                .or_default()
                .push((self.now_us, interest.clone(), trace));
        }
        let Agent::Consumer(app) = &self.nodes[&node].agent else {
            unreachable!()
        };
        Ok(vec![match app
            .fib
            .longest_prefix_match(&interest.name.routing_components())
        {
            Some(face) => Emission::SendInterest {
                face,
                interest,
                trace,
            },
            None => Emission::Drop {
                name: wire_name,
                reason: DropReason::NoRoute,
                traces: vec![trace],
            },
        }])
    }

    fn send(&mut self, node: NodeId, face: NodeId, packet: Packet) -> Result<(), SimError> {
        let latency = self.topo.latency_us(node, face).ok_or_else(|| {
            SimError::Invariant(format!("node {node} sent on face {face} without a link"))
        })?;
        self.push(
            self.now_us + latency,
            Event::Arrive {
                node: face,
                from: node,
                packet,
            },
        );
        Ok(())
    }

    fn dispatch(&mut self, node: NodeId, busy: Busy) -> Result<(), SimError> {
        for e in busy.emissions {
            match e {
                Emission::SendInterest {
                    face,
                    interest,
                    trace,
                } => {
                    let name = encode_name(&interest.name).unwrap_or_default();
                    self.record(node, LogKind::SendInterest, name, "");
                    self.nodes.get_mut(&node).unwrap().metrics.interests_sent += 1;
                    self.send(node, face, Packet::Interest { interest, trace })?;
                }
                Emission::SendContent {
                    face,
                    content,
                    traces,
                } => {
                    let name = encode_name(&content.name).unwrap_or_default();
                    self.record(node, LogKind::SendContent, name, "");
                    self.nodes.get_mut(&node).unwrap().metrics.contents_sent += 1;
                    self.send(node, face, Packet::Content { content, traces })?;
                }
                Emission::Drop {
                    name,
                    reason,
                    traces,
                } => {
                    let count = traces.len().max(1);
                    for _ in 0..count {
                        self.record(node, LogKind::Drop, name.clone(), reason.as_str());
                    }
                    self.nodes.get_mut(&node).unwrap().metrics.drops += count as u64;
                    for t in traces {
                        self.settle(
                            t,
                            Outcome::Dropped {
                                at_us: self.now_us,
                                node,
                                reason,
                            },
                        );
                    }
                }
                Emission::Note { name, kind, .. } => {
                    let m = &mut self.nodes.get_mut(&node).unwrap().metrics;
                    let kind = match kind {
                        NoteKind::CacheHit => {
                            m.cache_hits += 1;
                            LogKind::CacheHit
                        }
                        NoteKind::CacheInsert => {
                            m.cache_inserts += 1;
                            LogKind::CacheInsert
                        }
                        NoteKind::CacheExpire => {
                            m.cache_expires += 1;
                            LogKind::CacheExpire
                        }
                        NoteKind::PitAggregate => {
                            m.pit_aggregates += 1;
                            LogKind::PitAggregate
                        }
                        NoteKind::BatchQueued => {
                            m.batch_queued += 1;
                            LogKind::BatchQueued
                        }
                    };
                    self.record(node, kind, name, "");
                }
            }
        }
        if let Some(name) = busy.processed {
            self.nodes
                .get_mut(&node)
                .unwrap()
                .metrics
                .interests_processed += 1;
            self.record(node, LogKind::Processed, name, "");
        }
        Ok(())
    }

    fn finish(self, stopped: bool) -> Result<SimResult, SimError> {
        let mut m = Metrics {
            end_us: self.now_us,
            ..Default::default()
        };
        let mut attacks: Vec<AttackOutcome> = self
            .actions
            .iter()
            .enumerate()
            .map(|(i, a)| AttackOutcome {
                index: i,
                kind: a.kind.label().to_string(),
                node: self.nodes[&a.node].spec.name.clone(),
                at_ms: a.at_ms,
                ..Default::default()
            })
            .collect();
        for (i, a) in self.actions.iter().enumerate() {
            if let AttackKind::ReplaySamePath { target, nth }
            | AttackKind::ReplayCrossPath { target, nth } = &a.kind
            {
                if let Some((at_us, _, _)) = self.sent.get(target).and_then(|s| s.get(nth - 1)) {
                    attacks[i].capture_lead_ms =
                        Some((a.at_ms * 1000).saturating_sub(*at_us) / 1000);
                }
            }
        }
        for t in &self.traces {
            m.injected += 1;
            let attack = t.action.map(|i| &mut attacks[i]);
            let honest = attack.is_none();
            match (&t.outcome, attack) {
                (Some(Outcome::Served { correct, .. }), a) => {
                    m.served += 1;
                    if !correct {
                        m.data_mismatches += 1;
                    }
                    if honest {
                        if *correct {
                            m.fetch_successes += 1;
                        } else {
                            m.fetch_failures += 1;
                        }
                    }
                    if let Some(a) = a {
                        a.injected += 1;
                        a.delivered += 1;
                    }
                }
                (Some(Outcome::Dropped { reason, .. }), a) => {
                    *m.dropped.entry(reason.as_str().to_string()).or_default() += 1;
                    if honest {
                        m.fetch_failures += 1;
                    }
                    if let Some(a) = a {
                        a.injected += 1;
                        *a.drops.entry(reason.as_str().to_string()).or_default() += 1;
                    }
                }
                (None, a) => {
                    m.in_flight += 1;
                    if let Some(a) = a {
                        a.injected += 1;
                        a.in_flight += 1;
                    }
                }
            }
        }
        for r in &self.log {
            if r.kind == LogKind::Drop {
                *m.drop_events.entry(r.reason.clone()).or_default() += 1;
            }
        }
        m.nodes = self.nodes.values().map(|n| n.metrics.clone()).collect();
        m.attacks = attacks;
        if !m.conserved() {
            return Err(SimError::Invariant(
                "trace outcomes do not add up to injected interests".into(),
            ));
        }
        if !stopped && m.in_flight > 0 {
            return Err(SimError::Invariant(format!(
                "{} interests never reached an outcome",
                m.in_flight
            )));
        }
        Ok(SimResult {
            metrics: m,
            log: self.log,
            traces: self.traces,
        })
    }
}
