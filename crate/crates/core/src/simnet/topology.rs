//! Nodes, links and shortest-path next hops.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use serde::{Deserialize, Serialize};

use super::SimError;

pub type NodeId = u32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    Consumer,
    Producer,
    Router,
}

impl Role {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Consumer => "consumer",
            Self::Producer => "producer",
            Self::Router => "router",
        }
    }
}

/// Per-node service times in microseconds. A node handles one message at a
/// time; a message costs `process_us` plus the signature work it triggers.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ServiceTimes {
    pub process_us: u64,
    pub verify_us: u64,
    /// Cost of one batch verification.
    pub batch_us: u64,
}

impl ServiceTimes {
    pub fn from_seconds(process: f64, verify: f64, batch: f64) -> Self {
        let us = |s: f64| (s * 1e6).round().max(0.0) as u64;
        Self {
            process_us: us(process),
            verify_us: us(verify),
            batch_us: us(batch),
        }
    }

    pub(crate) fn job_cost(&self, message: bool, verifications: u32, batches: u32) -> u64 {
        let base = if message { self.process_us } else { 0 };
        base + u64::from(verifications) * self.verify_us + u64::from(batches) * self.batch_us
    }
}

#[derive(Debug, Clone)]
pub struct NodeSpec {
    pub id: NodeId,
    pub name: String,
    pub role: Role,
    /// Added to the global clock to form this node's local clock.
    pub clock_offset_ms: i64,
    pub service: ServiceTimes,
    /// Log a `processed` line for every interest this node finishes.
    pub measured: bool,
}

impl NodeSpec {
    pub fn new(id: NodeId, name: impl Into<String>, role: Role) -> Self {
        Self {
            id,
            name: name.into(),
            role,
            clock_offset_ms: 0,
            service: ServiceTimes::default(),
            measured: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Link {
    pub a: NodeId,
    pub b: NodeId,
    pub latency_us: u64,
}

#[derive(Debug, Clone)]
pub struct Topology {
    nodes: BTreeMap<NodeId, NodeSpec>,
    adjacency: BTreeMap<NodeId, BTreeMap<NodeId, u64>>,
}

impl Topology {
    /// Validates ids, names and links and requires a connected graph.
    pub fn new(nodes: Vec<NodeSpec>, links: Vec<Link>) -> Result<Self, SimError> {
        let mut problems = Vec::new();
        let mut by_id = BTreeMap::new();
        let mut names = BTreeSet::new();
        for n in nodes {
            if !names.insert(n.name.clone()) {
                problems.push(format!("duplicate node name {:?}", n.name));
            }
            let id = n.id;
            if by_id.insert(id, n).is_some() {
                problems.push(format!("duplicate node id {id}"));
            }
        }
        if by_id.is_empty() {
            problems.push("topology has no nodes".to_string());
        }
        let mut adjacency: BTreeMap<NodeId, BTreeMap<NodeId, u64>> =
            by_id.keys().map(|&id| (id, BTreeMap::new())).collect();
        for l in &links {
            if l.a == l.b {
                problems.push(format!("self-link on node {}", l.a));
                continue;
            }
            if !by_id.contains_key(&l.a) || !by_id.contains_key(&l.b) {
                problems.push(format!("link {}-{} references an unknown node", l.a, l.b));
                continue;
            }
            if adjacency
                .get_mut(&l.a)
                .unwrap()
                .insert(l.b, l.latency_us)
                .is_some()
            {
                problems.push(format!("duplicate link {}-{}", l.a, l.b));
            }
            adjacency.get_mut(&l.b).unwrap().insert(l.a, l.latency_us);
        }
        let topo = Self {
            nodes: by_id,
            adjacency,
        };
        if problems.is_empty() {
            if let Some(&start) = topo.nodes.keys().next() {
                let reached = topo.hops_from(start, false).len();
                if reached != topo.nodes.len() {
                    problems.push(format!(
                        "graph is not connected ({reached} of {} nodes reachable)",
                        topo.nodes.len()
                    ));
                }
            }
        }
        if problems.is_empty() {
            Ok(topo)
        } else {
            Err(SimError::Config(problems))
        }
    }

    pub fn node(&self, id: NodeId) -> Option<&NodeSpec> {
        self.nodes.get(&id)
    }

    pub fn nodes(&self) -> impl Iterator<Item = &NodeSpec> {
        self.nodes.values()
    }

    pub fn by_name(&self, name: &str) -> Option<&NodeSpec> {
        self.nodes.values().find(|n| n.name == name)
    }

    pub fn neighbors(&self, id: NodeId) -> impl Iterator<Item = (NodeId, u64)> + '_ {
        self.adjacency
            .get(&id)
            .into_iter()
            .flat_map(|m| m.iter().map(|(&n, &l)| (n, l)))
    }

    pub fn latency_us(&self, a: NodeId, b: NodeId) -> Option<u64> {
        self.adjacency.get(&a)?.get(&b).copied()
    }

    /// Hop counts from `start`; with `routers_only`, paths pass through
    /// routers alone (endpoints excepted).
    fn hops_from(&self, start: NodeId, routers_only: bool) -> BTreeMap<NodeId, u32> {
        let mut dist = BTreeMap::from([(start, 0u32)]);
        let mut queue = VecDeque::from([start]);
        while let Some(n) = queue.pop_front() {
            let d = dist[&n];
            if routers_only && n != start && self.nodes[&n].role != Role::Router {
                continue;
            }
            for (m, _) in self.neighbors(n) {
                if let std::collections::btree_map::Entry::Vacant(e) = dist.entry(m) {
                    e.insert(d + 1);
                    queue.push_back(m);
                }
            }
        }
        dist
    }

    /// For every node other than `dest`, the neighbor on a fewest-hop path
    /// toward `dest` that transits only routers; ties go to the smallest
    /// node id.
    pub fn next_hops(&self, dest: NodeId) -> BTreeMap<NodeId, NodeId> {
        let dist = self.hops_from(dest, true);
        let mut out = BTreeMap::new();
        for (&n, &d) in &dist {
            if n == dest {
                continue;
            }
            let via = |m: NodeId| m == dest || self.nodes[&m].role == Role::Router;
            if let Some((m, _)) = self
                .neighbors(n)
                .find(|&(m, _)| via(m) && dist.get(&m) == Some(&(d - 1)))
            {
                out.insert(n, m);
            }
        }
        out
    }

    /// Nodes visited from `from` to `to` along next hops, both ends included.
    pub fn path(&self, from: NodeId, to: NodeId) -> Vec<NodeId> {
        let hops = self.next_hops(to);
        let mut path = vec![from];
        let mut at = from;
        while at != to {
            match hops.get(&at) {
                Some(&n) => {
                    path.push(n);
                    at = n;
                }
                None => return Vec::new(),
            }
        }
        path
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line() -> Topology {
        let nodes = vec![
            NodeSpec::new(1, "c", Role::Consumer),
            NodeSpec::new(2, "r1", Role::Router),
            NodeSpec::new(3, "r2", Role::Router),
            NodeSpec::new(4, "p", Role::Producer),
        ];
        let links = vec![
            Link {
                a: 1,
                b: 2,
                latency_us: 1000,
            },
            Link {
                a: 2,
                b: 3,
                latency_us: 1000,
            },
            Link {
                a: 3,
                b: 4,
                latency_us: 1000,
            },
        ];
        Topology::new(nodes, links).unwrap()
    }

    #[test]
    fn path_along_a_line() {
        let t = line();
        assert_eq!(t.path(1, 4), vec![1, 2, 3, 4]);
        assert_eq!(t.next_hops(4)[&2], 3);
    }

    #[test]
    fn ties_prefer_small_ids() {
        let nodes = (1..=4)
            .map(|i| NodeSpec::new(i, format!("n{i}"), Role::Router))
            .collect();
        let links = vec![
            Link {
                a: 1,
                b: 3,
                latency_us: 1,
            },
            Link {
                a: 1,
                b: 2,
                latency_us: 1,
            },
            Link {
                a: 2,
                b: 4,
                latency_us: 1,
            },
            Link {
                a: 3,
                b: 4,
                latency_us: 1,
            },
        ];
        let t = Topology::new(nodes, links).unwrap();
        assert_eq!(t.path(1, 4), vec![1, 2, 4]);
    }

    #[test]
    fn paths_avoid_transit_through_end_hosts() {
        let nodes = vec![
            NodeSpec::new(1, "c", Role::Consumer),
            NodeSpec::new(2, "a", Role::Consumer),
            NodeSpec::new(3, "r1", Role::Router),
            NodeSpec::new(4, "r2", Role::Router),
            NodeSpec::new(5, "p", Role::Producer),
        ];
        let links = vec![
            Link {
                a: 1,
                b: 2,
                latency_us: 1,
            },
            Link {
                a: 2,
                b: 5,
                latency_us: 1,
            },
            Link {
                a: 1,
                b: 3,
                latency_us: 1,
            },
            Link {
                a: 3,
                b: 4,
                latency_us: 1,
            },
            Link {
                a: 4,
                b: 5,
                latency_us: 1,
            },
        ];
        let t = Topology::new(nodes, links).unwrap();
        assert_eq!(t.path(1, 5), vec![1, 3, 4, 5]);
        assert_eq!(t.path(2, 5), vec![2, 5]);
    }

    #[test]
    fn rejects_bad_graphs() {
        let nodes = vec![
            NodeSpec::new(1, "a", Role::Router),
            NodeSpec::new(2, "b", Role::Router),
        ];
        let Err(SimError::Config(p)) = Topology::new(nodes.clone(), vec![]) else {
            panic!()
        };
        assert!(p[0].contains("not connected"));
        let bad = vec![
            Link {
                a: 1,
                b: 9,
                latency_us: 1,
            },
            Link {
                a: 1,
                b: 1,
                latency_us: 1,
            },
        ];
        let Err(SimError::Config(p)) = Topology::new(nodes, bad) else {
            panic!()
        };
        assert_eq!(p.len(), 2);
    }
}
