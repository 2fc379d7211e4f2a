//! Robustness and resilience analysis of infrastructure networks:
//! connectivity degradation under random failure or targeted attack,
//! flow-overload cascades, and choke-point ranking.
//!
//! Graphs are undirected and may carry parallel edges (two cables along
//! the same corridor are two failure-independent elements). Flow is
//! modeled as unweighted shortest-path betweenness; cascade capacities
//! follow the tolerance convention `capacity = alpha * initial load`, so
//! alpha is the headroom factor.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geo::GeoPoint;

#[derive(Debug, Error, PartialEq)]
pub enum NetError {
    #[error("graph has no nodes")]
    EmptyGraph,
    #[error("self-loop on node `{0}`")]
    SelfLoop(String),
    #[error("unknown node id `{0}`")]
    UnknownNode(String),
    #[error("capacity must be positive, got {0}")]
    BadCapacity(f64),
    #[error("duplicate id `{0}` in removal order")]
    DuplicateRemoval(String),
    #[error("cascade tolerance alpha must be >= 1, got {0}")]
    BadAlpha(f64),
    #[error("bad graph file: {0}")]
    BadFile(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Node {
    pub id: String,
    pub pos: Option<GeoPoint>,
    pub capacity: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub src: usize,
    pub dst: usize,
    /// cable/pipe class or interdependency label; free-form
    pub kind: String,
    pub capacity: f64,
}

/// An undirected multigraph of landing stations/junctions and
/// cables/pipes.
#[derive(Debug, Clone, PartialEq)]
pub struct InfraGraph {
    nodes: Vec<Node>,
    edges: Vec<Edge>,
    index: BTreeMap<String, usize>,
}

impl InfraGraph {
    pub fn new(nodes: Vec<Node>, edges: Vec<Edge>) -> Result<InfraGraph, NetError> {
        if nodes.is_empty() {
            return Err(NetError::EmptyGraph);
        }
        let mut index = BTreeMap::new();
        for (i, n) in nodes.iter().enumerate() {
            if !(n.capacity > 0.0) {
                return Err(NetError::BadCapacity(n.capacity));
            }
            index.insert(n.id.clone(), i);
        }
        if index.len() != nodes.len() {
            return Err(NetError::BadFile("duplicate node ids".into()));
        }
        for e in &edges {
            if e.src >= nodes.len() || e.dst >= nodes.len() {
                return Err(NetError::UnknownNode(format!("index {}", e.src.max(e.dst))));
            }
            if e.src == e.dst {
                return Err(NetError::SelfLoop(nodes[e.src].id.clone()));
            }
            if !(e.capacity > 0.0) {
                return Err(NetError::BadCapacity(e.capacity));
            }
        }
        Ok(InfraGraph {
            nodes,
            edges,
            index,
        })
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn node_index(&self, id: &str) -> Option<usize> {
        self.index.get(id).copied()
    }

    /// First alive edge joining the two endpoints, in either direction.
    pub fn find_edge(&self, src: &str, dst: &str) -> Option<usize> {
        let s = self.node_index(src)?;
        let d = self.node_index(dst)?;
        self.edges
            .iter()
            .position(|e| (e.src == s && e.dst == d) || (e.src == d && e.dst == s))
    }

    /// Loads a graph from an edge-list CSV (`src,dst,kind,capacity`) and
    /// an optional node file (`id,lat,lon`). Nodes appear in node-file
    /// order, then first-appearance order from the edge list.
    pub fn from_csv(edges_path: &Path, nodes_path: Option<&Path>) -> Result<InfraGraph, NetError> {
        let mut nodes: Vec<Node> = Vec::new();
        let mut index: BTreeMap<String, usize> = BTreeMap::new();
        let register = |nodes: &mut Vec<Node>,
                            index: &mut BTreeMap<String, usize>,
                            id: &str,
                            pos: Option<GeoPoint>| {
            if let Some(&i) = index.get(id) {
                return i;
            }
            let i = nodes.len();
            nodes.push(Node {
                id: id.to_string(),
                pos,
                capacity: 1.0,
            });
            index.insert(id.to_string(), i);
            i
        };

        if let Some(np) = nodes_path {
            let text = std::fs::read_to_string(np)
                .map_err(|e| NetError::BadFile(format!("{}: {e}", np.display())))?;
            let mut rdr = csv::ReaderBuilder::new()
                .has_headers(true)
                .comment(Some(b'#'))
                .from_reader(text.as_bytes());
            for rec in rdr.records() {
                let r = rec.map_err(|e| NetError::BadFile(e.to_string()))?;
                if r.len() != 3 {
                    return Err(NetError::BadFile(format!(
                        "node rows need 3 fields, got {}",
                        r.len()
                    )));
                }
                let lat: f64 = r[1]
                    .trim()
                    .parse()
                    .map_err(|_| NetError::BadFile(format!("bad lat `{}`", &r[1])))?;
                let lon: f64 = r[2]
                    .trim()
                    .parse()
                    .map_err(|_| NetError::BadFile(format!("bad lon `{}`", &r[2])))?;
                let pos = GeoPoint::new(lat, lon)
                    .map_err(|e| NetError::BadFile(e.to_string()))?;
                register(&mut nodes, &mut index, r[0].trim(), Some(pos));
            }
        }

        let text = std::fs::read_to_string(edges_path)
            .map_err(|e| NetError::BadFile(format!("{}: {e}", edges_path.display())))?;
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(true)
            .comment(Some(b'#'))
            .from_reader(text.as_bytes());
        let mut edges = Vec::new();
        for rec in rdr.records() {
            let r = rec.map_err(|e| NetError::BadFile(e.to_string()))?;
            if r.len() != 4 {
                return Err(NetError::BadFile(format!(
                    "edge rows need 4 fields, got {}",
                    r.len()
                )));
            }
            let src = register(&mut nodes, &mut index, r[0].trim(), None);
            let dst = register(&mut nodes, &mut index, r[1].trim(), None);
            let capacity: f64 = r[3]
                .trim()
                .parse()
                .map_err(|_| NetError::BadFile(format!("bad capacity `{}`", &r[3])))?;
            edges.push(Edge {
                src,
                dst,
                kind: r[2].trim().to_string(),
                capacity,
            });
        }
        InfraGraph::new(nodes, edges)
    }
}

/// How nodes are picked for removal in a robustness run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScenarioMode {
    Random,
    DegreeTargeted,
    Custom,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FailureScenario {
    pub mode: ScenarioMode,
    pub rng_seed: u64,
    /// consumed only in custom mode
    pub removal_order: Vec<String>,
}

impl FailureScenario {
    pub fn random(seed: u64) -> FailureScenario {
        FailureScenario {
            mode: ScenarioMode::Random,
            rng_seed: seed,
            removal_order: Vec::new(),
        }
    }

    pub fn degree_targeted() -> FailureScenario {
        FailureScenario {
            mode: ScenarioMode::DegreeTargeted,
            rng_seed: 0,
            removal_order: Vec::new(),
        }
    }

    pub fn custom(order: Vec<String>) -> FailureScenario {
        FailureScenario {
            mode: ScenarioMode::Custom,
            rng_seed: 0,
            removal_order: order,
        }
    }
}

fn adjacency(g: &InfraGraph, node_alive: &[bool], edge_alive: &[bool]) -> Vec<Vec<(usize, usize)>> {
    let mut adj = vec![Vec::new(); g.nodes.len()];
    for (ei, e) in g.edges.iter().enumerate() {
        if edge_alive[ei] && node_alive[e.src] && node_alive[e.dst] {
            adj[e.src].push((e.dst, ei));
            adj[e.dst].push((e.src, ei));
        }
    }
    adj
}

fn largest_component(g: &InfraGraph, node_alive: &[bool]) -> usize {
    let edge_alive = vec![true; g.edges.len()];
    let adj = adjacency(g, node_alive, &edge_alive);
    let mut seen = vec![false; g.nodes.len()];
    let mut best = 0;
    for s in 0..g.nodes.len() {
        if !node_alive[s] || seen[s] {
            continue;
        }
        let mut size = 0;
        let mut queue = VecDeque::from([s]);
        seen[s] = true;
        while let Some(u) = queue.pop_front() {
            size += 1;
            for &(v, _) in &adj[u] {
                if !seen[v] {
                    seen[v] = true;
                    queue.push_back(v);
                }
            }
        }
        best = best.max(size);
    }
    best
}

/// One point per removal: (fraction of original nodes removed, largest
/// component as a fraction of the original node count). The curve starts
/// at zero removals.
pub fn robustness_curve(
    g: &InfraGraph,
    scenario: &FailureScenario,
) -> Result<Vec<(f64, f64)>, NetError> {
    let n = g.nodes.len();
    let order: Vec<usize> = match scenario.mode {
        ScenarioMode::Random => {
            let mut order: Vec<usize> = (0..n).collect();
            let mut rng = ChaCha8Rng::seed_from_u64(scenario.rng_seed);
            order.shuffle(&mut rng);
            order
        }
        ScenarioMode::Custom => {
            let mut seen = BTreeSet::new();
            let mut order = Vec::with_capacity(scenario.removal_order.len());
            for id in &scenario.removal_order {
                let i = g
                    .node_index(id)
                    .ok_or_else(|| NetError::UnknownNode(id.clone()))?;
                if !seen.insert(i) {
                    return Err(NetError::DuplicateRemoval(id.clone()));
                }
                order.push(i);
            }
            order
        }
        ScenarioMode::DegreeTargeted => Vec::new(), // chosen live below
    };

    let mut node_alive = vec![true; n];
    let mut curve = Vec::with_capacity(n + 1);
    curve.push((0.0, largest_component(g, &node_alive) as f64 / n as f64));

    let steps = if scenario.mode == ScenarioMode::Custom {
        order.len()
    } else {
        n
    };
    for step in 0..steps {
        let victim = match scenario.mode {
            ScenarioMode::DegreeTargeted => {
                // highest current degree, ties by lowest id
                let edge_alive = vec![true; g.edges.len()];
                let adj = adjacency(g, &node_alive, &edge_alive);
                (0..n)
                    .filter(|&i| node_alive[i])
                    .max_by(|&a, &b| {
                        adj[a]
                            .len()
                            .cmp(&adj[b].len())
                            .then_with(|| g.nodes[b].id.cmp(&g.nodes[a].id))
                    })
                    .expect("alive nodes remain")
            }
            _ => order[step],
        };
        node_alive[victim] = false;
        curve.push((
            (step + 1) as f64 / n as f64,
            largest_component(g, &node_alive) as f64 / n as f64,
        ));
    }
    Ok(curve)
}

/// Trapezoid area under a robustness curve; the standard scalar for
/// comparing attack strategies.
pub fn curve_area(curve: &[(f64, f64)]) -> f64 {
    curve
        .windows(2)
        .map(|w| 0.5 * (w[1].0 - w[0].0) * (w[0].1 + w[1].1))
        .sum()
}

/// Shortest-path betweenness for nodes and edges on the surviving
/// subgraph (Brandes accumulation, unordered pairs counted once).
pub fn betweenness(
    g: &InfraGraph,
    node_alive: &[bool],
    edge_alive: &[bool],
) -> (Vec<f64>, Vec<f64>) {
    let n = g.nodes.len();
    let adj = adjacency(g, node_alive, edge_alive);
    let mut node_bc = vec![0.0f64; n];
    let mut edge_bc = vec![0.0f64; g.edges.len()];

    for s in 0..n {
        if !node_alive[s] {
            continue;
        }
        let mut dist = vec![usize::MAX; n];
        let mut sigma = vec![0.0f64; n];
        let mut preds: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n]; // (node, edge)
        let mut stack = Vec::new();
        let mut queue = VecDeque::from([s]);
        dist[s] = 0;
        sigma[s] = 1.0;
        while let Some(u) = queue.pop_front() {
            stack.push(u);
            for &(v, ei) in &adj[u] {
                if dist[v] == usize::MAX {
                    dist[v] = dist[u] + 1;
                    queue.push_back(v);
                }
                if dist[v] == dist[u] + 1 {
                    sigma[v] += sigma[u];
                    preds[v].push((u, ei));
                }
            }
        }
        let mut delta = vec![0.0f64; n];
        for &w in stack.iter().rev() {
            for &(v, ei) in &preds[w] {
                let c = sigma[v] / sigma[w] * (1.0 + delta[w]);
                edge_bc[ei] += c;
                delta[v] += c;
            }
            if w != s {
                node_bc[w] += delta[w];
            }
        }
    }
    // every unordered pair was counted from both endpoints
    for v in node_bc.iter_mut().chain(edge_bc.iter_mut()) {
        *v *= 0.5;
    }
    (node_bc, edge_bc)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CascadeRound {
    pub round: usize,
    pub failed_nodes: Vec<String>,
    /// failed edges as (src, dst) id pairs
    pub failed_edges: Vec<(String, String)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CascadeResult {
    pub surviving_node_fraction: f64,
    pub surviving_edge_fraction: f64,
    pub rounds: usize,
    pub timeline: Vec<CascadeRound>,
}

/// Flow-overload cascade: capacities are `alpha` times the initial
/// betweenness loads; after the seed edges fail, loads are re-derived
/// from scratch on the survivors each round and anything strictly over
/// capacity fails, until a fixed point.
pub fn cascade_simulate(
    g: &InfraGraph,
    initial_edge_failures: &BTreeSet<usize>,
    alpha: f64,
) -> Result<CascadeResult, NetError> {
    if !(alpha >= 1.0) {
        return Err(NetError::BadAlpha(alpha));
    }
    for &ei in initial_edge_failures {
        if ei >= g.edges.len() {
            return Err(NetError::UnknownNode(format!("edge index {ei}")));
        }
    }
    let mut node_alive = vec![true; g.nodes.len()];
    let mut edge_alive = vec![true; g.edges.len()];
    // elements that carried no flow initially have no headroom to scale;
    // they are unconstrained rather than instantly doomed
    let scale = |l: &f64| if *l > 0.0 { alpha * l } else { f64::INFINITY };
    let (node_cap, edge_cap) = {
        let (nb, eb) = betweenness(g, &node_alive, &edge_alive);
        (
            nb.iter().map(scale).collect::<Vec<f64>>(),
            eb.iter().map(scale).collect::<Vec<f64>>(),
        )
    };

    let mut timeline = Vec::new();
    let seed_edges: Vec<(String, String)> = initial_edge_failures
        .iter()
        .map(|&ei| {
            let e = &g.edges[ei];
            (g.nodes[e.src].id.clone(), g.nodes[e.dst].id.clone())
        })
        .collect();
    for &ei in initial_edge_failures {
        edge_alive[ei] = false;
    }
    timeline.push(CascadeRound {
        round: 0,
        failed_nodes: Vec::new(),
        failed_edges: seed_edges,
    });

    let max_rounds = g.edges.len() + g.nodes.len() + 1;
    let mut round = 0;
    while round < max_rounds {
        round += 1;
        let (node_load, edge_load) = betweenness(g, &node_alive, &edge_alive);
        let mut failed_nodes = Vec::new();
        let mut failed_edges = Vec::new();
        for i in 0..g.nodes.len() {
            if node_alive[i] && node_load[i] > node_cap[i] + 1e-9 {
                node_alive[i] = false;
                failed_nodes.push(g.nodes[i].id.clone());
            }
        }
        for ei in 0..g.edges.len() {
            if edge_alive[ei] && edge_load[ei] > edge_cap[ei] + 1e-9 {
                edge_alive[ei] = false;
                let e = &g.edges[ei];
                failed_edges.push((g.nodes[e.src].id.clone(), g.nodes[e.dst].id.clone()));
            }
        }
        if failed_nodes.is_empty() && failed_edges.is_empty() {
            break;
        }
        timeline.push(CascadeRound {
            round,
            failed_nodes,
            failed_edges,
        });
    }

    Ok(CascadeResult {
        surviving_node_fraction: node_alive.iter().filter(|a| **a).count() as f64
            / g.nodes.len() as f64,
        surviving_edge_fraction: if g.edges.is_empty() {
            1.0
        } else {
            edge_alive.iter().filter(|a| **a).count() as f64 / g.edges.len() as f64
        },
        rounds: timeline.len() - 1,
        timeline,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChokePoints {
    /// (node id, betweenness), descending
    pub nodes: Vec<(String, f64)>,
    /// ((src id, dst id), betweenness), descending
    pub edges: Vec<((String, String), f64)>,
}

/// Top-`k` nodes and edges by betweenness centrality, ties broken by id.
pub fn choke_points(g: &InfraGraph, k: usize) -> ChokePoints {
    assert!(k >= 1, "k must be >= 1");
    let node_alive = vec![true; g.nodes.len()];
    let edge_alive = vec![true; g.edges.len()];
    let (nb, eb) = betweenness(g, &node_alive, &edge_alive);
    let mut nodes: Vec<(String, f64)> = nb
        .into_iter()
        .enumerate()
        .map(|(i, b)| (g.nodes[i].id.clone(), b))
        .collect();
    nodes.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    nodes.truncate(k);
    let mut edges: Vec<((String, String), f64)> = eb
        .into_iter()
        .enumerate()
        .map(|(ei, b)| {
            let e = &g.edges[ei];
            ((g.nodes[e.src].id.clone(), g.nodes[e.dst].id.clone()), b)
        })
        .collect();
    edges.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    edges.truncate(k);
    ChokePoints { nodes, edges }
}

/// Preferential-attachment generator for benchmark graphs: each new node
/// brings `m` edges to existing nodes picked with probability
/// proportional to degree. Deterministic per seed.
pub fn preferential_attachment(n: usize, m: usize, seed: u64) -> InfraGraph {
    assert!(n > m && m >= 1, "need n > m >= 1");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let nodes: Vec<Node> = (0..n)
        .map(|i| Node {
            id: format!("n{i:04}"),
            pos: None,
            capacity: 1.0,
        })
        .collect();
    let mut edges: Vec<Edge> = Vec::new();
    // degree-weighted urn: node index appears once per incident edge
    let mut urn: Vec<usize> = Vec::new();
    // seed clique over the first m+1 nodes
    for i in 0..=m {
        for j in (i + 1)..=m {
            edges.push(Edge {
                src: i,
                dst: j,
                kind: "pa".into(),
                capacity: 1.0,
            });
            urn.push(i);
            urn.push(j);
        }
    }
    for v in (m + 1)..n {
        let mut chosen = BTreeSet::new();
        while chosen.len() < m {
            let pick = urn[rand::Rng::gen_range(&mut rng, 0..urn.len())];
            chosen.insert(pick);
        }
        for u in chosen {
            edges.push(Edge {
                src: u,
                dst: v,
                kind: "pa".into(),
                capacity: 1.0,
            });
            urn.push(u);
            urn.push(v);
        }
    }
    InfraGraph::new(nodes, edges).expect("generated graph is valid")
}

/// Writes a robustness curve as CSV.
pub fn write_curve_csv<W: std::io::Write>(
    mut w: W,
    curve: &[(f64, f64)],
) -> std::io::Result<()> {
    writeln!(w, "fraction_removed,giant_component_fraction")?;
    for (x, y) in curve {
        writeln!(w, "{},{}", crate::ais::fmt_f64(*x), crate::ais::fmt_f64(*y))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn graph(n: usize, edge_list: &[(usize, usize)]) -> InfraGraph {
        let nodes = (0..n)
            .map(|i| Node {
                id: format!("n{i:02}"),
                pos: None,
                capacity: 1.0,
            })
            .collect();
        let edges = edge_list
            .iter()
            .map(|&(s, d)| Edge {
                src: s,
                dst: d,
                kind: "cable".into(),
                capacity: 1.0,
            })
            .collect();
        InfraGraph::new(nodes, edges).unwrap()
    }

    /// Independent component census: label propagation until fixpoint,
    /// deliberately different from the BFS in production code.
    fn oracle_giant(g: &InfraGraph, alive: &[bool]) -> usize {
        let n = g.nodes().len();
        let mut label: Vec<usize> = (0..n).collect();
        loop {
            let mut changed = false;
            for e in g.edges() {
                if alive[e.src] && alive[e.dst] {
                    let m = label[e.src].min(label[e.dst]);
                    if label[e.src] != m || label[e.dst] != m {
                        label[e.src] = m;
                        label[e.dst] = m;
                        changed = true;
                    }
                }
            }
            if !changed {
                break;
            }
        }
        let mut counts: BTreeMap<usize, usize> = BTreeMap::new();
        for i in 0..n {
            if alive[i] {
                *counts.entry(label[i]).or_insert(0) += 1;
            }
        }
        counts.values().copied().max().unwrap_or(0)
    }

    #[test]
    fn path_graph_splits_on_middle_removal() {
        let g = graph(3, &[(0, 1), (1, 2)]);
        let curve =
            robustness_curve(&g, &FailureScenario::custom(vec!["n01".into()])).unwrap();
        assert_eq!(curve.len(), 2);
        assert_eq!(curve[0], (0.0, 1.0));
        assert!((curve[1].1 - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn complete_graph_k5_single_removal() {
        let mut edges = Vec::new();
        for i in 0..5 {
            for j in (i + 1)..5 {
                edges.push((i, j));
            }
        }
        let g = graph(5, &edges);
        let curve =
            robustness_curve(&g, &FailureScenario::custom(vec!["n02".into()])).unwrap();
        assert_eq!(curve[1].1, 0.8);
    }

    #[test]
    fn random_removals_match_component_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for _ in 0..10 {
            let n = 12;
            let mut edges = Vec::new();
            for i in 0..n {
                for j in (i + 1)..n {
                    if rand::Rng::gen_bool(&mut rng, 0.25) {
                        edges.push((i, j));
                    }
                }
            }
            let g = graph(n, &edges);
            let scenario = FailureScenario::random(rand::Rng::gen(&mut rng));
            let curve = robustness_curve(&g, &scenario).unwrap();

            // replay the same seed-deterministic order against the oracle
            let mut order: Vec<usize> = (0..n).collect();
            let mut rng2 = ChaCha8Rng::seed_from_u64(scenario.rng_seed);
            order.shuffle(&mut rng2);
            let mut alive = vec![true; n];
            assert_eq!(curve[0].1, oracle_giant(&g, &alive) as f64 / n as f64);
            for (k, &victim) in order.iter().enumerate() {
                alive[victim] = false;
                assert_eq!(
                    curve[k + 1].1,
                    oracle_giant(&g, &alive) as f64 / n as f64,
                    "step {k}"
                );
            }
        }
    }

    #[test]
    fn curve_is_monotone_nonincreasing() {
        let g = preferential_attachment(60, 2, 5);
        for scenario in [
            FailureScenario::random(3),
            FailureScenario::degree_targeted(),
        ] {
            let curve = robustness_curve(&g, &scenario).unwrap();
            for w in curve.windows(2) {
                assert!(w[1].1 <= w[0].1 + 1e-12);
            }
            assert_eq!(curve.len(), 61);
        }
    }

    #[test]
    fn degree_targeted_beats_random_on_scale_free() {
        let mut targeted_area = 0.0;
        let mut random_area = 0.0;
        for seed in 0..8u64 {
            let g = preferential_attachment(80, 2, seed);
            targeted_area +=
                curve_area(&robustness_curve(&g, &FailureScenario::degree_targeted()).unwrap());
            random_area +=
                curve_area(&robustness_curve(&g, &FailureScenario::random(seed + 100)).unwrap());
        }
        assert!(
            targeted_area < random_area,
            "targeted {targeted_area} vs random {random_area}"
        );
    }

    #[test]
    fn star_hub_is_top_choke_point() {
        let g = graph(6, &[(0, 1), (0, 2), (0, 3), (0, 4), (0, 5)]);
        let cp = choke_points(&g, 2);
        assert_eq!(cp.nodes[0].0, "n00");
        assert!(cp.nodes[0].1 > cp.nodes[1].1);
    }

    #[test]
    fn bridge_is_top_edge() {
        // two triangles joined by one bridge
        let g = graph(6, &[(0, 1), (1, 2), (2, 0), (3, 4), (4, 5), (5, 3), (2, 3)]);
        let cp = choke_points(&g, 1);
        assert_eq!(cp.edges[0].0, ("n02".into(), "n03".into()));
    }

    /// Brute-force betweenness: enumerate all shortest paths between all
    /// pairs by DFS and count traversals. Exponential, fine at n <= 10.
    fn oracle_betweenness(g: &InfraGraph) -> (Vec<f64>, Vec<f64>) {
        let n = g.nodes().len();
        let alive_n = vec![true; n];
        let alive_e = vec![true; g.edges().len()];
        let adj = adjacency(g, &alive_n, &alive_e);
        let mut node_bc = vec![0.0; n];
        let mut edge_bc = vec![0.0; g.edges().len()];
        for s in 0..n {
            // BFS distances
            let mut dist = vec![usize::MAX; n];
            dist[s] = 0;
            let mut q = VecDeque::from([s]);
            while let Some(u) = q.pop_front() {
                for &(v, _) in &adj[u] {
                    if dist[v] == usize::MAX {
                        dist[v] = dist[u] + 1;
                        q.push_back(v);
                    }
                }
            }
            for t in (s + 1)..n {
                if dist[t] == usize::MAX {
                    continue;
                }
                // enumerate all shortest s->t paths
                let mut paths: Vec<(Vec<usize>, Vec<usize>)> = Vec::new(); // (nodes, edges)
                let mut stack = vec![(s, vec![s], Vec::new())];
                while let Some((u, npath, epath)) = stack.pop() {
                    if u == t {
                        paths.push((npath, epath));
                        continue;
                    }
                    for &(v, ei) in &adj[u] {
                        if dist[v] == dist[u] + 1 && dist[v] <= dist[t] {
                            let mut np = npath.clone();
                            np.push(v);
                            let mut ep = epath.clone();
                            ep.push(ei);
                            stack.push((v, np, ep));
                        }
                    }
                }
                let total = paths.len() as f64;
                for (npath, epath) in &paths {
                    for &v in &npath[1..npath.len() - 1] {
                        node_bc[v] += 1.0 / total;
                    }
                    for &ei in epath {
                        edge_bc[ei] += 1.0 / total;
                    }
                }
            }
        }
        (node_bc, edge_bc)
    }

    #[test]
    fn betweenness_matches_path_enumeration_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(37);
        for case in 0..15 {
            let n = rand::Rng::gen_range(&mut rng, 4..=10);
            let mut edges = Vec::new();
            // random connected-ish graph: a spine plus random extras
            for i in 1..n {
                edges.push((rand::Rng::gen_range(&mut rng, 0..i), i));
            }
            for _ in 0..n {
                let a = rand::Rng::gen_range(&mut rng, 0..n);
                let b = rand::Rng::gen_range(&mut rng, 0..n);
                if a != b {
                    edges.push((a.min(b), a.max(b)));
                }
            }
            let g = graph(n, &edges);
            let (nb, eb) = betweenness(
                &g,
                &vec![true; g.nodes().len()],
                &vec![true; g.edges().len()],
            );
            let (onb, oeb) = oracle_betweenness(&g);
            for i in 0..n {
                assert!(
                    (nb[i] - onb[i]).abs() < 1e-9,
                    "case {case} node {i}: {} vs {}",
                    nb[i],
                    onb[i]
                );
            }
            for ei in 0..g.edges().len() {
                assert!(
                    (eb[ei] - oeb[ei]).abs() < 1e-9,
                    "case {case} edge {ei}: {} vs {}",
                    eb[ei],
                    oeb[ei]
                );
            }
        }
    }

    #[test]
    fn huge_headroom_stops_cascade_at_seed() {
        let g = preferential_attachment(30, 2, 1);
        let seed: BTreeSet<usize> = [0usize, 3].into_iter().collect();
        let out = cascade_simulate(&g, &seed, 1e9).unwrap();
        assert_eq!(out.rounds, 0);
        assert_eq!(out.timeline.len(), 1);
        assert!((out.surviving_edge_fraction
            - (g.edges().len() - 2) as f64 / g.edges().len() as f64)
            .abs()
            < 1e-12);
    }

    #[test]
    fn parallel_edge_overloads_when_twin_fails() {
        // two nodes joined by two parallel cables sharing the flow; at
        // alpha = 1 the survivor inherits double its capacity and dies
        let nodes = vec![
            Node {
                id: "a".into(),
                pos: None,
                capacity: 1.0,
            },
            Node {
                id: "b".into(),
                pos: None,
                capacity: 1.0,
            },
        ];
        let edges = vec![
            Edge {
                src: 0,
                dst: 1,
                kind: "cable".into(),
                capacity: 1.0,
            },
            Edge {
                src: 0,
                dst: 1,
                kind: "cable".into(),
                capacity: 1.0,
            },
        ];
        let g = InfraGraph::new(nodes, edges).unwrap();
        let seed: BTreeSet<usize> = [0usize].into_iter().collect();
        let out = cascade_simulate(&g, &seed, 1.0).unwrap();
        assert_eq!(out.surviving_edge_fraction, 0.0, "{:?}", out.timeline);
        assert_eq!(out.rounds, 1);
    }

    #[test]
    fn cascade_terminates_within_bound() {
        let g = preferential_attachment(40, 2, 7);
        let seed: BTreeSet<usize> = (0..5usize).collect();
        let out = cascade_simulate(&g, &seed, 1.05).unwrap();
        assert!(out.rounds <= g.edges().len() + g.nodes().len());
    }

    #[test]
    fn bad_alpha_rejected() {
        let g = graph(3, &[(0, 1), (1, 2)]);
        assert_eq!(
            cascade_simulate(&g, &BTreeSet::new(), 0.5).unwrap_err(),
            NetError::BadAlpha(0.5)
        );
    }

    #[test]
    fn validation_rejects_bad_graphs() {
        assert_eq!(
            InfraGraph::new(vec![], vec![]).unwrap_err(),
            NetError::EmptyGraph
        );
        let nodes = vec![Node {
            id: "a".into(),
            pos: None,
            capacity: 1.0,
        }];
        assert!(matches!(
            InfraGraph::new(
                nodes,
                vec![Edge {
                    src: 0,
                    dst: 0,
                    kind: "x".into(),
                    capacity: 1.0
                }]
            )
            .unwrap_err(),
            NetError::SelfLoop(_)
        ));
    }
}
