//! Workflow graphs of serverless components and their critical path.
//!
//! A graph is a DAG rooted at a single gateway. Every edge is a synchronous
//! call: the caller waits for the callee to return, so a request's latency
//! along a path is the sum of node compute times and edge delays on it.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::latency::LatencyDistribution;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ComponentKind {
    Gateway,
    Function,
    Database,
    ExternalCacheNode,
    FileStore,
}

impl ComponentKind {
    /// Data stores never call anything.
    pub fn is_sink_only(self) -> bool {
        matches!(
            self,
            ComponentKind::Database | ComponentKind::ExternalCacheNode | ComponentKind::FileStore
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Component {
    pub id: String,
    pub kind: ComponentKind,
    pub compute: LatencyDistribution,
}

impl Component {
    pub fn new(id: impl Into<String>, kind: ComponentKind, compute: LatencyDistribution) -> Self {
        Self {
            id: id.into(),
            kind,
            compute,
        }
    }

    /// Component with zero compute time.
    pub fn idle(id: impl Into<String>, kind: ComponentKind) -> Self {
        Self::new(id, kind, LatencyDistribution::zero())
    }
}

/// Synchronous call from `caller` to `callee`. `network_delay` covers the
/// request and the response together.
#[derive(Debug, Clone, PartialEq)]
pub struct Edge {
    pub caller: String,
    pub callee: String,
    pub network_delay: LatencyDistribution,
}

impl Edge {
    pub fn new(
        caller: impl Into<String>,
        callee: impl Into<String>,
        network_delay: LatencyDistribution,
    ) -> Self {
        Self {
            caller: caller.into(),
            callee: callee.into(),
            network_delay,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct WorkflowGraph {
    pub components: Vec<Component>,
    pub edges: Vec<Edge>,
}

/// A structural problem found by [`validate_graph`].
///
/// Edge-related variants carry the index of the offending edge in
/// [`WorkflowGraph::edges`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    DuplicateId {
        id: String,
    },
    MissingGateway,
    MultipleGateways {
        ids: Vec<String>,
    },
    SelfLoop {
        edge: usize,
        id: String,
    },
    UnknownCaller {
        edge: usize,
        id: String,
    },
    UnknownCallee {
        edge: usize,
        id: String,
    },
    DuplicateEdge {
        edge: usize,
        caller: String,
        callee: String,
    },
    SinkWithOutgoing {
        edge: usize,
        id: String,
        kind: ComponentKind,
    },
    EdgeIntoGateway {
        edge: usize,
        id: String,
    },
    Cycle {
        ids: Vec<String>,
    },
    Unreachable {
        id: String,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::DuplicateId { id } => write!(f, "duplicate component id: {id}"),
            Violation::MissingGateway => write!(f, "no gateway component"),
            Violation::MultipleGateways { ids } => {
                write!(f, "more than one gateway: {}", ids.join(", "))
            }
            Violation::SelfLoop { id, .. } => write!(f, "self-loop at {id}"),
            Violation::UnknownCaller { id, .. } => write!(f, "unknown caller component {id}"),
            Violation::UnknownCallee { id, .. } => write!(f, "unknown callee component {id}"),
            Violation::DuplicateEdge { caller, callee, .. } => {
                write!(f, "duplicate edge {caller} -> {callee}")
            }
            Violation::SinkWithOutgoing { id, kind, .. } => {
                write!(f, "{kind:?} {id} cannot have outgoing edges")
            }
            Violation::EdgeIntoGateway { id, .. } => {
                write!(f, "gateway {id} cannot be called by another component")
            }
            Violation::Cycle { ids } => write!(f, "cycle through: {}", ids.join(", ")),
            Violation::Unreachable { id } => write!(f, "unreachable: {id}"),
        }
    }
}

/// Lists every invariant violation of `graph`. An empty list means the
/// graph is valid.
pub fn validate_graph(graph: &WorkflowGraph) -> Vec<Violation> {
    let mut out = Vec::new();

    let mut kinds: HashMap<&str, ComponentKind> = HashMap::new();
    let mut reported_dup = BTreeSet::new();
    for c in &graph.components {
        if kinds.insert(c.id.as_str(), c.kind).is_some() && reported_dup.insert(c.id.as_str()) {
            out.push(Violation::DuplicateId { id: c.id.clone() });
        }
    }

    let gateways: Vec<&str> = graph
        .components
        .iter()
        .filter(|c| c.kind == ComponentKind::Gateway)
        .map(|c| c.id.as_str())
        .collect();
    match gateways.len() {
        0 => out.push(Violation::MissingGateway),
        1 => {}
        _ => out.push(Violation::MultipleGateways {
            ids: gateways.iter().map(|s| s.to_string()).collect(),
        }),
    }

    // Adjacency over edges that are individually well-formed.
    let mut adjacency: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
    let mut seen_pairs = BTreeSet::new();
    for (i, e) in graph.edges.iter().enumerate() {
        let mut ok = true;
        let caller_kind = kinds.get(e.caller.as_str()).copied();
        let callee_kind = kinds.get(e.callee.as_str()).copied();
        if caller_kind.is_none() {
            out.push(Violation::UnknownCaller {
                edge: i,
                id: e.caller.clone(),
            });
            ok = false;
        }
        if callee_kind.is_none() {
            out.push(Violation::UnknownCallee {
                edge: i,
                id: e.callee.clone(),
            });
            ok = false;
        }
        if e.caller == e.callee {
            out.push(Violation::SelfLoop {
                edge: i,
                id: e.caller.clone(),
            });
            ok = false;
        }
        if !seen_pairs.insert((e.caller.as_str(), e.callee.as_str())) {
            out.push(Violation::DuplicateEdge {
                edge: i,
                caller: e.caller.clone(),
                callee: e.callee.clone(),
            });
            ok = false;
        }
        if let Some(kind) = caller_kind.filter(|k| k.is_sink_only()) {
            out.push(Violation::SinkWithOutgoing {
                edge: i,
                id: e.caller.clone(),
                kind,
            });
        }
        if callee_kind == Some(ComponentKind::Gateway) {
            out.push(Violation::EdgeIntoGateway {
                edge: i,
                id: e.callee.clone(),
            });
        }
        if ok {
            adjacency
                .entry(e.caller.as_str())
                .or_default()
                .push(e.callee.as_str());
        }
    }

    let ids: BTreeSet<&str> = graph.components.iter().map(|c| c.id.as_str()).collect();
    if let Err(cyclic) = topological_order(&ids, &adjacency) {
        out.push(Violation::Cycle {
            ids: cyclic.into_iter().map(String::from).collect(),
        });
    }

    if let [gateway] = gateways.as_slice() {
        let mut reached = BTreeSet::from([*gateway]);
        let mut queue = VecDeque::from([*gateway]);
        while let Some(n) = queue.pop_front() {
            for next in adjacency.get(n).into_iter().flatten() {
                if reached.insert(next) {
                    queue.push_back(next);
                }
            }
        }
        for id in &ids {
            if !reached.contains(id) {
                out.push(Violation::Unreachable { id: id.to_string() });
            }
        }
    }

    out
}

/// Kahn's algorithm with a sorted frontier. On a cycle, returns the ids
/// that could not be ordered.
fn topological_order<'a>(
    ids: &BTreeSet<&'a str>,
    adjacency: &BTreeMap<&'a str, Vec<&'a str>>,
) -> Result<Vec<&'a str>, Vec<&'a str>> {
    let mut indegree: BTreeMap<&str, usize> = ids.iter().map(|id| (*id, 0)).collect();
    for targets in adjacency.values() {
        for t in targets {
            if let Some(d) = indegree.get_mut(t) {
                *d += 1;
            }
        }
    }
    let mut ready: BTreeSet<&str> = indegree
        .iter()
        .filter(|(_, d)| **d == 0)
        .map(|(id, _)| *id)
        .collect();
    let mut order = Vec::with_capacity(ids.len());
    while let Some(n) = ready.pop_first() {
        order.push(n);
        for t in adjacency.get(n).into_iter().flatten() {
            if let Some(d) = indegree.get_mut(t) {
                *d -= 1;
                if *d == 0 {
                    ready.insert(t);
                }
            }
        }
    }
    if order.len() == ids.len() {
        Ok(order)
    } else {
        Err(indegree
            .into_iter()
            .filter(|(_, d)| *d > 0)
            .map(|(id, _)| id)
            .collect())
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
#[error("invalid workflow graph: {}", .0.iter().map(ToString::to_string).collect::<Vec<_>>().join("; "))]
pub struct InvalidGraph(pub Vec<Violation>);

/// The source-to-sink path with the largest expected latency.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriticalPath {
    pub ids: Vec<String>,
    /// Sum of mean compute of every node and mean delay of every edge on
    /// the path, accumulated front to back.
    pub latency_ms: f64,
    /// Number of `Function` nodes on the path.
    pub length: usize,
}

impl WorkflowGraph {
    pub fn component(&self, id: &str) -> Option<&Component> {
        self.components.iter().find(|c| c.id == id)
    }

    pub fn edge(&self, caller: &str, callee: &str) -> Option<&Edge> {
        self.edges
            .iter()
            .find(|e| e.caller == caller && e.callee == callee)
    }

    pub fn gateway(&self) -> Option<&Component> {
        self.components
            .iter()
            .find(|c| c.kind == ComponentKind::Gateway)
    }

    /// Expected latency of an explicit id sequence, accumulated in path
    /// order: `compute(v0) + delay(v0,v1) + compute(v1) + ...`.
    ///
    /// Returns `None` if an id or an edge along the path does not exist.
    pub fn path_mean(&self, ids: &[String]) -> Option<f64> {
        let mut total = self.component(ids.first()?)?.compute.mean();
        for pair in ids.windows(2) {
            total += self.edge(&pair[0], &pair[1])?.network_delay.mean();
            total += self.component(&pair[1])?.compute.mean();
        }
        Some(total)
    }
}

/// Computes the critical path of a valid graph.
///
/// Ties in expected latency go to the lexicographically smallest id
/// sequence, so the result does not depend on component or edge order.
pub fn critical_path(graph: &WorkflowGraph) -> Result<CriticalPath, InvalidGraph> {
    let violations = validate_graph(graph);
    if !violations.is_empty() {
        return Err(InvalidGraph(violations));
    }

    let by_id: HashMap<&str, &Component> = graph
        .components
        .iter()
        .map(|c| (c.id.as_str(), c))
        .collect();
    let mut adjacency: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
    for e in &graph.edges {
        adjacency
            .entry(e.caller.as_str())
            .or_default()
            .push(e.callee.as_str());
    }
    let ids: BTreeSet<&str> = by_id.keys().copied().collect();
    let order = topological_order(&ids, &adjacency).expect("validated graph is acyclic");
    let delay: HashMap<(&str, &str), f64> = graph
        .edges
        .iter()
        .map(|e| {
            (
                (e.caller.as_str(), e.callee.as_str()),
                e.network_delay.mean(),
            )
        })
        .collect();

    // Best (latency, prefix) ending at each node, built forward so that the
    // stored latency is accumulated in path order.
    let gateway = graph.gateway().expect("validated graph has a gateway");
    let mut best: HashMap<&str, (f64, Vec<&str>)> = HashMap::new();
    best.insert(
        gateway.id.as_str(),
        (gateway.compute.mean(), vec![gateway.id.as_str()]),
    );

    for node in &order {
        let Some((weight, prefix)) = best.get(node).cloned() else {
            continue;
        };
        for next in adjacency.get(node).into_iter().flatten() {
            let w = weight + delay[&(*node, *next)] + by_id[next].compute.mean();
            let mut candidate = prefix.clone();
            candidate.push(next);
            let better = match best.get(next) {
                None => true,
                Some((bw, bp)) => w > *bw || (w == *bw && candidate < *bp),
            };
            if better {
                best.insert(next, (w, candidate));
            }
        }
    }

    let (latency_ms, ids) = best
        .into_iter()
        .filter(|(id, _)| adjacency.get(id).is_none_or(|v| v.is_empty()))
        .map(|(_, v)| v)
        .reduce(|a, b| {
            if b.0 > a.0 || (b.0 == a.0 && b.1 < a.1) {
                b
            } else {
                a
            }
        })
        .expect("a finite DAG has at least one sink");

    let length = ids
        .iter()
        .filter(|id| by_id[*id].kind == ComponentKind::Function)
        .count();
    Ok(CriticalPath {
        ids: ids.into_iter().map(String::from).collect(),
        latency_ms,
        length,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(v: f64) -> LatencyDistribution {
        LatencyDistribution::constant(v).unwrap()
    }

    fn chain(lengths: usize) -> WorkflowGraph {
        let mut g = WorkflowGraph::default();
        g.components
            .push(Component::idle("gateway", ComponentKind::Gateway));
        let mut prev = "gateway".to_string();
        for i in 1..=lengths {
            let id = format!("f{i}");
            g.components
                .push(Component::new(&id, ComponentKind::Function, c(5.0)));
            g.edges
                .push(Edge::new(&prev, &id, c(if i == 1 { 0.0 } else { 90.0 })));
            prev = id;
        }
        g.components
            .push(Component::idle("db", ComponentKind::Database));
        g.edges.push(Edge::new(prev, "db", c(45.0)));
        g
    }

    /// Every gateway-to-sink path with its forward-accumulated weight.
    fn brute_force_paths(g: &WorkflowGraph) -> Vec<(f64, Vec<String>)> {
        fn walk(
            g: &WorkflowGraph,
            path: &mut Vec<String>,
            w: f64,
            out: &mut Vec<(f64, Vec<String>)>,
        ) {
            let last = path.last().unwrap().clone();
            let outgoing: Vec<&Edge> = g.edges.iter().filter(|e| e.caller == last).collect();
            if outgoing.is_empty() {
                out.push((w, path.clone()));
                return;
            }
            for e in outgoing {
                let next = g.component(&e.callee).unwrap();
                path.push(next.id.clone());
                walk(
                    g,
                    path,
                    w + e.network_delay.mean() + next.compute.mean(),
                    out,
                );
                path.pop();
            }
        }
        let gw = g.gateway().unwrap();
        let mut out = Vec::new();
        walk(g, &mut vec![gw.id.clone()], gw.compute.mean(), &mut out);
        out
    }

    fn brute_force_best(g: &WorkflowGraph) -> (f64, Vec<String>) {
        brute_force_paths(g)
            .into_iter()
            .reduce(|a, b| {
                if b.0 > a.0 || (b.0 == a.0 && b.1 < a.1) {
                    b
                } else {
                    a
                }
            })
            .unwrap()
    }

    #[test]
    fn minimal_chain_is_valid() {
        assert!(validate_graph(&chain(1)).is_empty());
    }

    #[test]
    fn self_loop_reported() {
        let mut g = chain(1);
        g.edges.push(Edge::new("f1", "f1", c(1.0)));
        let v = validate_graph(&g);
        assert!(
            v.iter().any(|v| v.to_string() == "self-loop at f1"),
            "{v:?}"
        );
    }

    #[test]
    fn unreachable_reported() {
        let mut g = chain(1);
        g.components
            .push(Component::new("f2", ComponentKind::Function, c(1.0)));
        g.edges.push(Edge::new("f2", "db", c(1.0)));
        let v = validate_graph(&g);
        assert_eq!(v, vec![Violation::Unreachable { id: "f2".into() }]);
        assert_eq!(v[0].to_string(), "unreachable: f2");
    }

    #[test]
    fn structural_violations() {
        let mut g = chain(2);
        g.components
            .push(Component::idle("gw2", ComponentKind::Gateway));
        g.components
            .push(Component::idle("f1", ComponentKind::Function));
        g.edges.push(Edge::new("db", "f1", c(0.0)));
        g.edges.push(Edge::new("f1", "f2", c(0.0)));
        g.edges.push(Edge::new("f1", "f9", c(0.0)));
        g.edges.push(Edge::new("f2", "gateway", c(0.0)));
        let v = validate_graph(&g);
        let has = |pred: &dyn Fn(&Violation) -> bool| v.iter().any(pred);
        assert!(has(
            &|v| matches!(v, Violation::DuplicateId { id } if id == "f1")
        ));
        assert!(has(&|v| matches!(v, Violation::MultipleGateways { .. })));
        assert!(has(
            &|v| matches!(v, Violation::SinkWithOutgoing { id, .. } if id == "db")
        ));
        assert!(has(&|v| matches!(
            v,
            Violation::DuplicateEdge { edge: 4, .. }
        )));
        assert!(has(
            &|v| matches!(v, Violation::UnknownCallee { edge: 5, id } if id == "f9")
        ));
        assert!(has(&|v| matches!(
            v,
            Violation::EdgeIntoGateway { edge: 6, .. }
        )));
        assert!(has(&|v| matches!(v, Violation::Cycle { .. })));
    }

    #[test]
    fn missing_gateway() {
        let g = WorkflowGraph {
            components: vec![Component::idle("db", ComponentKind::Database)],
            edges: vec![],
        };
        assert_eq!(validate_graph(&g), vec![Violation::MissingGateway]);
    }

    #[test]
    fn critical_path_rejects_invalid() {
        let mut g = chain(1);
        g.edges.push(Edge::new("f1", "f1", c(1.0)));
        assert!(critical_path(&g).is_err());
    }

    #[test]
    fn single_path() {
        let g = WorkflowGraph {
            components: vec![
                Component::idle("gateway", ComponentKind::Gateway),
                Component::new("f1", ComponentKind::Function, c(5.0)),
                Component::idle("db", ComponentKind::Database),
            ],
            edges: vec![
                Edge::new("gateway", "f1", c(0.0)),
                Edge::new("f1", "db", c(0.0)),
            ],
        };
        let cp = critical_path(&g).unwrap();
        assert_eq!(cp.ids, ["gateway", "f1", "db"]);
        assert_eq!(cp.latency_ms, 5.0);
        assert_eq!(cp.length, 1);
    }

    #[test]
    fn length_five_chain_is_the_full_chain() {
        let cp = critical_path(&chain(5)).unwrap();
        assert_eq!(cp.ids, ["gateway", "f1", "f2", "f3", "f4", "f5", "db"]);
        assert_eq!(cp.length, 5);
        assert_eq!(cp.latency_ms, 430.0);
    }

    #[test]
    fn diamond_takes_slower_branch() {
        let g = WorkflowGraph {
            components: vec![
                Component::idle("gateway", ComponentKind::Gateway),
                Component::new("f1", ComponentKind::Function, c(5.0)),
                Component::new("f2", ComponentKind::Function, c(7.0)),
                Component::idle("db", ComponentKind::Database),
            ],
            edges: vec![
                Edge::new("gateway", "f1", c(1.0)),
                Edge::new("gateway", "f2", c(1.0)),
                Edge::new("f1", "db", c(1.0)),
                Edge::new("f2", "db", c(1.0)),
            ],
        };
        let (w, path) = brute_force_best(&g);
        let cp = critical_path(&g).unwrap();
        assert_eq!(cp.ids, ["gateway", "f2", "db"]);
        assert_eq!(cp.ids, path);
        assert_eq!(cp.latency_ms, w);
        assert_eq!(w, 9.0);
    }

    #[test]
    fn ties_break_lexicographically() {
        let g = WorkflowGraph {
            components: vec![
                Component::idle("gateway", ComponentKind::Gateway),
                Component::new("b", ComponentKind::Function, c(5.0)),
                Component::new("a", ComponentKind::Function, c(5.0)),
                Component::idle("z", ComponentKind::FileStore),
                Component::idle("db", ComponentKind::Database),
            ],
            edges: vec![
                Edge::new("gateway", "b", c(0.0)),
                Edge::new("gateway", "a", c(0.0)),
                Edge::new("b", "db", c(3.0)),
                Edge::new("a", "z", c(3.0)),
            ],
        };
        assert_eq!(critical_path(&g).unwrap().ids, ["gateway", "a", "z"]);
    }

    /// Random DAG over `n` nodes with small integer weights, so float sums
    /// are exact. Node 0 is the gateway; every node i > 0 has a parent < i.
    fn arb_dag() -> impl Strategy<Value = WorkflowGraph> {
        (2usize..=8)
            .prop_flat_map(|n| {
                (
                    Just(n),
                    proptest::collection::vec(0u8..=20, n),
                    proptest::collection::vec(any::<u64>(), n),
                    proptest::collection::vec(proptest::collection::vec(0u8..=20, n), n),
                    proptest::collection::vec(0u8..3, n),
                )
            })
            .prop_map(|(n, compute, parents, extra, kinds)| {
                let id = |i: usize| format!("n{i}");
                let mut components = vec![Component::new(
                    id(0),
                    ComponentKind::Gateway,
                    c(f64::from(compute[0])),
                )];
                let mut edges = Vec::new();
                let mut is_store = vec![false; n];
                for i in 1..n {
                    // A node may be a data store only if it is last in its
                    // chain of potential callers; decide store-ness by index.
                    let kind = if i == n - 1 || kinds[i] == 0 && i > n / 2 {
                        is_store[i] = true;
                        ComponentKind::Database
                    } else {
                        ComponentKind::Function
                    };
                    components.push(Component::new(id(i), kind, c(f64::from(compute[i]))));
                    let callers: Vec<usize> = (0..i).filter(|j| !is_store[*j]).collect();
                    let parent = callers[(parents[i] % callers.len() as u64) as usize];
                    edges.push(Edge::new(id(parent), id(i), c(f64::from(extra[parent][i]))));
                    for j in callers {
                        if j != parent && extra[j][i] % 3 == 0 {
                            edges.push(Edge::new(id(j), id(i), c(f64::from(extra[i][j]))));
                        }
                    }
                }
                WorkflowGraph { components, edges }
            })
    }

    proptest! {
        #[test]
        fn random_dags_are_valid(g in arb_dag()) {
            prop_assert!(validate_graph(&g).is_empty(), "{:?}", validate_graph(&g));
        }

        #[test]
        fn matches_brute_force(g in arb_dag()) {
            let cp = critical_path(&g).unwrap();
            let paths = brute_force_paths(&g);
            for (w, _) in &paths {
                prop_assert!(cp.latency_ms >= *w);
            }
            let (w, ids) = brute_force_best(&g);
            prop_assert_eq!(cp.latency_ms, w);
            prop_assert_eq!(&cp.ids, &ids);
            prop_assert_eq!(g.path_mean(&cp.ids), Some(cp.latency_ms));
        }

        #[test]
        fn permutation_invariant(g in arb_dag(), rot_c in 0usize..8, rot_e in 0usize..32, rev in any::<bool>()) {
            let expected = critical_path(&g).unwrap();
            let mut shuffled = g.clone();
            let nc = shuffled.components.len();
            shuffled.components.rotate_left(rot_c % nc);
            let ne = shuffled.edges.len();
            if ne > 0 {
                shuffled.edges.rotate_left(rot_e % ne);
            }
            if rev {
                shuffled.components.reverse();
                shuffled.edges.reverse();
            }
            prop_assert_eq!(critical_path(&shuffled).unwrap(), expected);
        }

        #[test]
        fn inserting_a_function_never_decreases_latency(g in arb_dag(), extra in 0u8..20, split in any::<prop::sample::Index>()) {
            let before = critical_path(&g).unwrap();
            let pos = split.index(before.ids.len() - 1);
            let (caller, callee) = (before.ids[pos].clone(), before.ids[pos + 1].clone());
            let mut g2 = g.clone();
            let idx = g2.edges.iter().position(|e| e.caller == caller && e.callee == callee).unwrap();
            let old = g2.edges.remove(idx);
            g2.components.push(Component::new("inserted", ComponentKind::Function, c(f64::from(extra))));
            g2.edges.push(Edge::new(caller, "inserted", old.network_delay.clone()));
            g2.edges.push(Edge::new("inserted", callee, c(0.0)));
            let after = critical_path(&g2).unwrap();
            prop_assert!(after.latency_ms >= before.latency_ms);
        }
    }
}
