//! The spanning-tree active learner: query a spanning tree, predict every
//! other edge by the sign product along its tree path. Also average stretch
//! and the deterministic flip bound on its mistakes.

use num::rational::Ratio;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::graph::{
    bfs_spanning_forest, path_sign_product, tree_path, wilson_random_spanning_tree, EdgeId,
    GraphError, RootedSpanningForest, Sign, SignedGraph,
};

/// How spanning trees are drawn.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum TreeStrategy {
    /// Breadth-first from node 0 (the deterministic default).
    Bfs,
    /// Uniform random spanning tree.
    Wilson,
    /// Minimum measured average stretch among the BFS tree and `k` uniform
    /// random trees.
    BestOfK(usize),
}

pub const DEFAULT_BEST_OF_K: usize = 16;

/// Draws a spanning tree of a connected graph according to the strategy.
pub fn build_spanning_tree<R: Rng + ?Sized>(
    g: &SignedGraph,
    strategy: TreeStrategy,
    rng: &mut R,
) -> Result<RootedSpanningForest, GraphError> {
    match strategy {
        TreeStrategy::Bfs => {
            if !g.is_connected() {
                return Err(GraphError::Disconnected);
            }
            Ok(bfs_spanning_forest(g, None))
        }
        TreeStrategy::Wilson => wilson_random_spanning_tree(g, rng),
        TreeStrategy::BestOfK(k) => {
            if !g.is_connected() {
                return Err(GraphError::Disconnected);
            }
            let mut best = bfs_spanning_forest(g, None);
            let mut best_stretch = average_stretch(&best, g);
            for _ in 0..k {
                let candidate = wilson_random_spanning_tree(g, rng)?;
                let stretch = average_stretch(&candidate, g);
                if stretch < best_stretch {
                    best_stretch = stretch;
                    best = candidate;
                }
            }
            Ok(best)
        }
    }
}

/// One run of the tree learner: the tree, its queried edges, the per-edge
/// predictions and the mistake count against the graph's labels.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TreeLearnerRun {
    pub forest: RootedSpanningForest,
    pub query_edges: Vec<EdgeId>,
    pub predictions: Vec<(EdgeId, Sign)>,
    pub mistakes: usize,
}

/// Queries a spanning tree and predicts every non-tree edge by the parity of
/// its tree path.
pub fn tree_learner_run<R: Rng + ?Sized>(
    g: &SignedGraph,
    strategy: TreeStrategy,
    rng: &mut R,
) -> Result<TreeLearnerRun, GraphError> {
    let forest = build_spanning_tree(g, strategy, rng)?;
    Ok(tree_learner_run_with_tree(g, forest))
}

/// Same as [`tree_learner_run`] but with a caller-supplied tree, so repeated
/// trials can share one tree. The queried labels are always read from `g`,
/// so a forest built on a differently-labeled copy works as expected.
pub fn tree_learner_run_with_tree(g: &SignedGraph, forest: RootedSpanningForest) -> TreeLearnerRun {
    let forest = forest.reparity(g);
    let mut is_tree = vec![false; g.edge_count()];
    let query_edges = forest.tree_edges();
    for &e in &query_edges {
        is_tree[e] = true;
    }
    let mut predictions = Vec::new();
    let mut mistakes = 0;
    for (id, e) in g.edges().iter().enumerate() {
        if is_tree[id] {
            continue;
        }
        let predicted = path_sign_product(&forest, e.u, e.v).expect("edge within a component");
        if predicted != e.sign {
            mistakes += 1;
        }
        predictions.push((id, predicted));
    }
    TreeLearnerRun {
        forest,
        query_edges,
        predictions,
        mistakes,
    }
}

/// Average stretch of a spanning tree:
/// `(|V| - 1 + sum of non-tree path lengths) / |E|`, exact.
pub fn average_stretch(t: &RootedSpanningForest, g: &SignedGraph) -> Ratio<u64> {
    let mut is_tree = vec![false; g.edge_count()];
    let mut tree_edge_count = 0u64;
    for e in t.tree_edges() {
        is_tree[e] = true;
        tree_edge_count += 1;
    }
    let mut numerator = tree_edge_count;
    for (id, e) in g.edges().iter().enumerate() {
        if !is_tree[id] {
            let path = tree_path(t, e.u, e.v).expect("tree spans each component");
            numerator += path.len() as u64;
        }
    }
    Ratio::new(numerator, g.edge_count() as u64)
}

/// Sum of non-tree path lengths, the tree-dependent part of the stretch and
/// of the expected-mistake bound under independent flips.
pub fn total_path_length(t: &RootedSpanningForest, g: &SignedGraph) -> usize {
    let mut is_tree = vec![false; g.edge_count()];
    for e in t.tree_edges() {
        is_tree[e] = true;
    }
    g.edges()
        .iter()
        .enumerate()
        .filter(|(id, _)| !is_tree[*id])
        .map(|(_, e)| tree_path(t, e.u, e.v).expect("spanning tree").len())
        .sum()
}

/// The literal right-hand side of the deterministic mistake bound:
/// `|F| + sum over non-tree edges of the number of flipped edges on their
/// tree path`.
pub fn flip_bound_rhs(t: &RootedSpanningForest, g: &SignedGraph, flips: &[EdgeId]) -> usize {
    let mut flipped = vec![false; g.edge_count()];
    for &e in flips {
        flipped[e] = true;
    }
    let mut is_tree = vec![false; g.edge_count()];
    for e in t.tree_edges() {
        is_tree[e] = true;
    }
    let mut total = flips.len();
    for (id, e) in g.edges().iter().enumerate() {
        if is_tree[id] {
            continue;
        }
        let path = tree_path(t, e.u, e.v).expect("spanning tree");
        total += path.edges.iter().filter(|&&pe| flipped[pe]).count();
    }
    total
}
