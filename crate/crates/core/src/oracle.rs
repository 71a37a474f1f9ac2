//! Exact correlation-clustering oracles: the unrestricted index, its
//! two-cluster restriction, balance tests with bad-cycle witnesses, and the
//! exact empirical-risk-minimizing partition over a training edge set.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{
    bfs_spanning_forest, connected_components_filtered, tree_path, EdgeId, GraphError, NodeId,
    Partition, Sign, SignedGraph, TwoClustering,
};

/// Node limit for full-partition enumeration (Bell-number growth).
pub const DEFAULT_DELTA_NODE_LIMIT: usize = 12;
/// Node limit for two-clustering enumeration (2^(n-1) assignments).
pub const DEFAULT_DELTA2_NODE_LIMIT: usize = 24;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum OracleError {
    #[error("graph has {actual} nodes, exceeds enumeration limit {limit}")]
    SizeLimitExceeded { actual: usize, limit: usize },
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// An exact minimum violation count together with a partition achieving it.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClusteringCost {
    pub cost: usize,
    pub witness: Partition,
}

/// An exact minimum violation count over two-cluster partitions.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TwoClusteringCost {
    pub cost: usize,
    pub witness: TwoClustering,
}

/// A simple cycle certifying imbalance. For the unrestricted index the cycle
/// carries exactly one negative edge; for the two-cluster index an odd number.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BadCycleWitness {
    /// Cycle nodes in order; `nodes[k]` and `nodes[k+1]` are joined by
    /// `edges[k]`, and `edges.last()` closes back to `nodes[0]`.
    pub nodes: Vec<NodeId>,
    pub edges: Vec<EdgeId>,
    pub negative_count: usize,
}

impl BadCycleWitness {
    /// Structural self-check used by tests: simple closed cycle, correct
    /// negative count.
    pub fn validate(&self, g: &SignedGraph) -> Result<(), String> {
        if self.nodes.len() < 3 || self.edges.len() != self.nodes.len() {
            return Err("cycle too short or node/edge count mismatch".into());
        }
        let mut seen = std::collections::HashSet::new();
        for &v in &self.nodes {
            if !seen.insert(v) {
                return Err(format!("repeated node {v}"));
            }
        }
        let mut negatives = 0;
        for (k, &e) in self.edges.iter().enumerate() {
            let a = self.nodes[k];
            let b = self.nodes[(k + 1) % self.nodes.len()];
            let edge = g.edge(e);
            if !(edge.touches(a) && edge.touches(b)) {
                return Err(format!("edge {e} does not join {a} and {b}"));
            }
            if edge.sign.is_negative() {
                negatives += 1;
            }
        }
        if negatives != self.negative_count {
            return Err(format!(
                "recorded {} negatives, found {negatives}",
                self.negative_count
            ));
        }
        Ok(())
    }
}

/// Number of sign violations of partition `f`: negative within-cluster edges
/// plus positive between-cluster edges. When `edge_subset` is given, only
/// those edges are counted (the restricted cost used for training-set risk).
pub fn partition_cost(g: &SignedGraph, f: &Partition, edge_subset: Option<&[EdgeId]>) -> usize {
    assert_eq!(f.len(), g.node_count(), "partition must be total on V");
    let violates = |e: EdgeId| {
        let edge = g.edge(e);
        let same = f.same_cluster(edge.u, edge.v);
        same == edge.sign.is_negative()
    };
    match edge_subset {
        Some(subset) => subset.iter().copied().filter(|&e| violates(e)).count(),
        None => (0..g.edge_count()).filter(|&e| violates(e)).count(),
    }
}

/// Two-cluster analogue of [`partition_cost`].
pub fn two_clustering_cost(g: &SignedGraph, x: &TwoClustering) -> usize {
    assert_eq!(x.len(), g.node_count());
    g.edges()
        .iter()
        .filter(|e| x.induced_sign(e.u, e.v) != e.sign)
        .count()
}

/// The sign partition `f` assigns to an edge: `Plus` iff the endpoints share
/// a cluster.
pub fn classify_by_partition(f: &Partition, i: NodeId, j: NodeId) -> Sign {
    if f.same_cluster(i, j) {
        Sign::Plus
    } else {
        Sign::Minus
    }
}

/// Branch-and-bound minimum of the (optionally restricted) partition cost.
///
/// Enumerates restricted-growth strings depth-first: node `i` may join any
/// block used by nodes `0..i` or open a new one, tried in block order. A
/// prefix is abandoned once its partial cost reaches the incumbent, which
/// preserves the first-found minimizer and hence deterministic tie-breaking.
fn min_cost_partition(
    g: &SignedGraph,
    edge_mask: Option<&[bool]>,
    limit: usize,
) -> Result<ClusteringCost, OracleError> {
    let n = g.node_count();
    if n > limit {
        return Err(OracleError::SizeLimitExceeded { actual: n, limit });
    }
    if n == 0 {
        return Ok(ClusteringCost {
            cost: 0,
            witness: Partition::from_labels(&[]),
        });
    }
    // Per node, the edges to lower-indexed nodes: (other endpoint, sign).
    let mut back_edges: Vec<Vec<(NodeId, Sign)>> = vec![Vec::new(); n];
    for (id, e) in g.edges().iter().enumerate() {
        if let Some(mask) = edge_mask {
            if !mask[id] {
                continue;
            }
        }
        let (lo, hi) = (e.u.min(e.v), e.u.max(e.v));
        back_edges[hi].push((lo, e.sign));
    }

    let mut assignment = vec![0usize; n];
    let mut best_cost = usize::MAX;
    let mut best: Option<Vec<usize>> = None;
    // Explicit stack of (node, candidate block, cost so far, blocks used).
    let mut frames: Vec<(usize, usize, usize, usize)> = vec![(1, 0, 0, 1)];
    if n == 1 {
        return Ok(ClusteringCost {
            cost: 0,
            witness: Partition::from_labels(&[0]),
        });
    }
    while let Some((node, block, cost, used)) = frames.pop() {
        if block > used || cost >= best_cost {
            continue;
        }
        // Schedule the next candidate block for this node before descending.
        frames.push((node, block + 1, cost, used));
        assignment[node] = block;
        let mut new_cost = cost;
        for &(other, sign) in &back_edges[node] {
            let same = assignment[other] == block;
            if same == sign.is_negative() {
                new_cost += 1;
                if new_cost >= best_cost {
                    break;
                }
            }
        }
        if new_cost >= best_cost {
            continue;
        }
        let new_used = used.max(block + 1);
        if node + 1 == n {
            best_cost = new_cost;
            best = Some(assignment.clone());
        } else {
            frames.push((node + 1, 0, new_cost, new_used));
        }
    }
    let labels = best.expect("at least one partition enumerated");
    Ok(ClusteringCost {
        cost: best_cost,
        witness: Partition::from_labels(&labels),
    })
}

/// Exact correlation clustering index with an optimal partition witness.
pub fn delta_exact(g: &SignedGraph) -> Result<ClusteringCost, OracleError> {
    delta_exact_with_limit(g, DEFAULT_DELTA_NODE_LIMIT)
}

pub fn delta_exact_with_limit(
    g: &SignedGraph,
    limit: usize,
) -> Result<ClusteringCost, OracleError> {
    min_cost_partition(g, None, limit)
}

/// Exact two-cluster correlation clustering index with an optimal
/// two-clustering witness. One side may be empty.
///
/// Enumerates the 2^(n-1) assignments with node 0 pinned to the plus side
/// (complementation preserves cost), walking a reflected Gray code so each
/// step re-examines only the flipped node's incident edges.
pub fn delta2_exact(g: &SignedGraph) -> Result<TwoClusteringCost, OracleError> {
    delta2_exact_with_limit(g, DEFAULT_DELTA2_NODE_LIMIT)
}

pub fn delta2_exact_with_limit(
    g: &SignedGraph,
    limit: usize,
) -> Result<TwoClusteringCost, OracleError> {
    let n = g.node_count();
    if n > limit {
        return Err(OracleError::SizeLimitExceeded { actual: n, limit });
    }
    let mut side = vec![Sign::Plus; n];
    let mut cost = g.edges().iter().filter(|e| e.sign.is_negative()).count();
    let mut best_cost = cost;
    let mut best = side.clone();
    if n >= 2 {
        let steps = 1u64 << (n - 1);
        for k in 1..steps {
            // Bit flipped between consecutive reflected Gray codes.
            let flipped = k.trailing_zeros() as usize + 1;
            for &(nbr, e) in g.adjacency(flipped) {
                let sign = g.sign(e);
                let was_violation = (side[flipped] * side[nbr]) != sign;
                if was_violation {
                    cost -= 1;
                } else {
                    cost += 1;
                }
            }
            side[flipped] = side[flipped].flip();
            if cost < best_cost {
                best_cost = cost;
                best = side.clone();
            }
        }
    }
    Ok(TwoClusteringCost {
        cost: best_cost,
        witness: TwoClustering::new(best),
    })
}

/// Tests two-cluster balance by parity BFS. On imbalance, returns a simple
/// cycle with an odd number of negative edges: a conflicting edge closed by
/// the tree path between its endpoints.
pub fn is_two_balanced(g: &SignedGraph) -> (bool, Option<BadCycleWitness>) {
    let forest = bfs_spanning_forest(g, None);
    for (id, e) in g.edges().iter().enumerate() {
        let predicted = forest.parity(e.u) * forest.parity(e.v);
        if predicted != e.sign {
            let path = tree_path(&forest, e.u, e.v).expect("edge endpoints share a component");
            let witness = cycle_from_path(g, &path.edges, e.u, id);
            return (false, Some(witness));
        }
    }
    (true, None)
}

/// Tests weak balance (unrestricted index zero): every component of the
/// positive subgraph must contain no internal negative edge. On failure,
/// returns the bad cycle formed by that negative edge and a positive path.
pub fn is_weakly_balanced(g: &SignedGraph) -> (bool, Option<BadCycleWitness>) {
    let positive = connected_components_filtered(g, |e| g.sign(e) == Sign::Plus);
    for (id, e) in g.edges().iter().enumerate() {
        if e.sign.is_negative() && positive.same_cluster(e.u, e.v) {
            // Positive path between the endpoints, found inside the
            // positive subgraph.
            let path = positive_path(g, e.u, e.v);
            let witness = cycle_from_path(g, &path, e.u, id);
            return (false, Some(witness));
        }
    }
    (true, None)
}

/// BFS path from `from` to `to` using positive edges only.
fn positive_path(g: &SignedGraph, from: NodeId, to: NodeId) -> Vec<EdgeId> {
    let n = g.node_count();
    let mut prev: Vec<Option<(NodeId, EdgeId)>> = vec![None; n];
    let mut visited = vec![false; n];
    let mut queue = std::collections::VecDeque::new();
    visited[from] = true;
    queue.push_back(from);
    while let Some(u) = queue.pop_front() {
        if u == to {
            break;
        }
        for &(v, e) in g.adjacency(u) {
            if g.sign(e) == Sign::Plus && !visited[v] {
                visited[v] = true;
                prev[v] = Some((u, e));
                queue.push_back(v);
            }
        }
    }
    let mut edges = Vec::new();
    let mut cur = to;
    while cur != from {
        let (p, e) = prev[cur].expect("positive path exists by component check");
        edges.push(e);
        cur = p;
    }
    edges.reverse();
    edges
}

/// Closes a simple path (given as ordered edge ids starting at `start`) with
/// `closing_edge` into a cycle witness.
fn cycle_from_path(
    g: &SignedGraph,
    path: &[EdgeId],
    start: NodeId,
    closing_edge: EdgeId,
) -> BadCycleWitness {
    let mut nodes = vec![start];
    let mut cur = start;
    for &e in path {
        cur = g.edge(e).other(cur);
        nodes.push(cur);
    }
    // The closing edge joins the path's last node back to `start`, so the
    // node list is complete as is.
    let mut edges = path.to_vec();
    edges.push(closing_edge);
    let negative_count = edges.iter().filter(|&&e| g.sign(e).is_negative()).count();
    BadCycleWitness {
        nodes,
        edges,
        negative_count,
    }
}

/// Exact minimizer of the partition cost restricted to a training edge set.
/// Ties are broken by enumeration order, so repeated runs agree.
pub fn erm_partition(
    g: &SignedGraph,
    training_edges: &[EdgeId],
) -> Result<ClusteringCost, OracleError> {
    erm_partition_with_limit(g, training_edges, DEFAULT_DELTA_NODE_LIMIT)
}

pub fn erm_partition_with_limit(
    g: &SignedGraph,
    training_edges: &[EdgeId],
    limit: usize,
) -> Result<ClusteringCost, OracleError> {
    let mut mask = vec![false; g.edge_count()];
    for &e in training_edges {
        g.check_edge_id(e)?;
        mask[e] = true;
    }
    min_cost_partition(g, Some(&mask), limit)
}
