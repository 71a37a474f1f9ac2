//! Desk-scale online link classification: version-space halving over
//! bit-packed labelings, weighted majority over the halving experts, an
//! interactive adversary that forces the lower bound, and a small zoo of
//! baseline learners.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{
    bfs_spanning_forest, connected_components_filtered, EdgeId, NodeId, Sign, SignedGraph,
};
use crate::oracle::{delta_exact_with_limit, OracleError, DEFAULT_DELTA_NODE_LIMIT};

/// Edge limit for the 2^|E| labeling table.
pub const DEFAULT_TABLE_EDGE_LIMIT: usize = 14;

#[derive(Debug, Error)]
pub enum OnlineError {
    #[error("graph has {actual} edges, exceeds version-space limit {limit}")]
    TooManyEdges { actual: usize, limit: usize },
    #[error("adversary needs {needed} non-tree edges but the graph has {available}")]
    NotEnoughNonTreeEdges { needed: usize, available: usize },
    #[error(transparent)]
    Oracle(#[from] OracleError),
}

/// The exact correlation-clustering index of every labeling of a fixed small
/// graph. Labelings are bit-packed: bit `e` set means edge `e` is negative,
/// so index 0 is the all-positive labeling.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct VersionSpaceTable {
    pub edge_count: usize,
    pub delta: Vec<u32>,
}

impl VersionSpaceTable {
    pub fn labeling_count(&self) -> usize {
        self.delta.len()
    }

    pub fn sign_of(labeling: usize, edge: EdgeId) -> Sign {
        if labeling >> edge & 1 == 1 {
            Sign::Minus
        } else {
            Sign::Plus
        }
    }
}

/// Computes the full table; feasible only at desk scale.
pub fn build_version_space_table(g: &SignedGraph) -> Result<VersionSpaceTable, OnlineError> {
    build_version_space_table_with_limits(g, DEFAULT_TABLE_EDGE_LIMIT, DEFAULT_DELTA_NODE_LIMIT)
}

pub fn build_version_space_table_with_limits(
    g: &SignedGraph,
    edge_limit: usize,
    node_limit: usize,
) -> Result<VersionSpaceTable, OnlineError> {
    let m = g.edge_count();
    if m > edge_limit {
        return Err(OnlineError::TooManyEdges {
            actual: m,
            limit: edge_limit,
        });
    }
    let mut delta = Vec::with_capacity(1 << m);
    let mut signs = vec![Sign::Plus; m];
    for labeling in 0usize..(1 << m) {
        for (e, s) in signs.iter_mut().enumerate() {
            *s = VersionSpaceTable::sign_of(labeling, e);
        }
        let relabeled = g.with_signs(&signs);
        delta.push(delta_exact_with_limit(&relabeled, node_limit)?.cost as u32);
    }
    Ok(VersionSpaceTable {
        edge_count: m,
        delta,
    })
}

/// A partial labeling observed so far, as parallel masks.
#[derive(Clone, Debug, Default)]
pub struct Observed {
    /// Bit `e` set: edge `e` has been revealed.
    pub mask: usize,
    /// Bit `e` set (and observed): edge `e` was negative.
    pub negatives: usize,
}

impl Observed {
    pub fn record(&mut self, edge: EdgeId, label: Sign) {
        self.mask |= 1 << edge;
        if label.is_negative() {
            self.negatives |= 1 << edge;
        }
    }

    fn consistent(&self, labeling: usize) -> bool {
        labeling & self.mask == self.negatives
    }
}

/// Size of the version space: labelings consistent with the observations
/// whose index equals `d`.
pub fn version_space_size(table: &VersionSpaceTable, d: u32, observed: &Observed) -> usize {
    (0..table.labeling_count())
        .filter(|&y| table.delta[y] == d && observed.consistent(y))
        .count()
}

/// The halving predictor with parameter `d`: majority vote of the version
/// space on the queried edge; `+1` on an empty space or a tie.
pub fn halving_predict(
    table: &VersionSpaceTable,
    d: u32,
    observed: &Observed,
    edge: EdgeId,
) -> Sign {
    let mut plus = 0usize;
    let mut minus = 0usize;
    for y in 0..table.labeling_count() {
        if table.delta[y] == d && observed.consistent(y) {
            if y >> edge & 1 == 1 {
                minus += 1;
            } else {
                plus += 1;
            }
        }
    }
    if minus > plus {
        Sign::Minus
    } else {
        Sign::Plus
    }
}

// ---------------------------------------------------------------------------
// Protocol runner
// ---------------------------------------------------------------------------

/// Anything that predicts edge signs online and learns from revealed labels.
pub trait OnlineLearner {
    fn predict(&mut self, edge: EdgeId) -> Sign;
    fn observe(&mut self, edge: EdgeId, label: Sign);
}

/// The environment side of the protocol: emits the next edge, then reveals
/// its label after seeing the prediction (adversaries may pick the label at
/// that point).
pub trait OnlineEnvironment {
    fn next_edge(&mut self) -> Option<EdgeId>;
    fn reveal(&mut self, edge: EdgeId, prediction: Sign) -> Sign;
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct OnlineStep {
    pub edge: EdgeId,
    pub prediction: Sign,
    pub truth: Sign,
    pub mistake: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct OnlineRun {
    pub steps: Vec<OnlineStep>,
    pub mistakes: usize,
}

impl OnlineRun {
    pub fn order(&self) -> Vec<EdgeId> {
        self.steps.iter().map(|s| s.edge).collect()
    }
}

pub fn run_online(learner: &mut dyn OnlineLearner, env: &mut dyn OnlineEnvironment) -> OnlineRun {
    let mut steps = Vec::new();
    let mut mistakes = 0;
    while let Some(edge) = env.next_edge() {
        let prediction = learner.predict(edge);
        let truth = env.reveal(edge, prediction);
        learner.observe(edge, truth);
        let mistake = prediction != truth;
        mistakes += usize::from(mistake);
        steps.push(OnlineStep {
            edge,
            prediction,
            truth,
            mistake,
        });
    }
    OnlineRun { steps, mistakes }
}

/// Fixed labeling presented in a fixed order; truths come from the graph.
pub struct FixedOrderEnvironment<'a> {
    g: &'a SignedGraph,
    order: Vec<EdgeId>,
    cursor: usize,
}

impl<'a> FixedOrderEnvironment<'a> {
    pub fn new(g: &'a SignedGraph, order: Vec<EdgeId>) -> Self {
        FixedOrderEnvironment {
            g,
            order,
            cursor: 0,
        }
    }
}

impl OnlineEnvironment for FixedOrderEnvironment<'_> {
    fn next_edge(&mut self) -> Option<EdgeId> {
        let e = self.order.get(self.cursor).copied();
        self.cursor += 1;
        e
    }

    fn reveal(&mut self, _edge: EdgeId, _prediction: Sign) -> Sign {
        let e = self.order[self.cursor - 1];
        self.g.sign(e)
    }
}

// ---------------------------------------------------------------------------
// Learners
// ---------------------------------------------------------------------------

/// A single halving expert with its own observation state.
pub struct HalvingLearner<'a> {
    table: &'a VersionSpaceTable,
    pub d: u32,
    pub observed: Observed,
    /// `|S_t|` recorded before each prediction.
    pub space_sizes: Vec<usize>,
}

impl<'a> HalvingLearner<'a> {
    pub fn new(table: &'a VersionSpaceTable, d: u32) -> Self {
        HalvingLearner {
            table,
            d,
            observed: Observed::default(),
            space_sizes: Vec::new(),
        }
    }

    pub fn space_size(&self) -> usize {
        version_space_size(self.table, self.d, &self.observed)
    }
}

impl OnlineLearner for HalvingLearner<'_> {
    fn predict(&mut self, edge: EdgeId) -> Sign {
        self.space_sizes.push(self.space_size());
        halving_predict(self.table, self.d, &self.observed, edge)
    }

    fn observe(&mut self, edge: EdgeId, label: Sign) {
        self.observed.record(edge, label);
    }
}

pub struct ConstantLearner(pub Sign);

impl OnlineLearner for ConstantLearner {
    fn predict(&mut self, _edge: EdgeId) -> Sign {
        self.0
    }

    fn observe(&mut self, _edge: EdgeId, _label: Sign) {}
}

/// The tree predictor adapted to the online protocol: maintains a union-find
/// with parity over observed edges and predicts by parity when the endpoints
/// are already connected, `+1` otherwise.
pub struct OnlineTreeLearner<'a> {
    g: &'a SignedGraph,
    parent: Vec<NodeId>,
    /// Parity of each node relative to its union-find representative.
    parity: Vec<Sign>,
}

impl<'a> OnlineTreeLearner<'a> {
    pub fn new(g: &'a SignedGraph) -> Self {
        OnlineTreeLearner {
            g,
            parent: (0..g.node_count()).collect(),
            parity: vec![Sign::Plus; g.node_count()],
        }
    }

    fn find(&mut self, v: NodeId) -> (NodeId, Sign) {
        if self.parent[v] == v {
            return (v, Sign::Plus);
        }
        let (root, p) = self.find(self.parent[v]);
        self.parent[v] = root;
        self.parity[v] = self.parity[v] * p;
        (root, self.parity[v])
    }
}

impl OnlineLearner for OnlineTreeLearner<'_> {
    fn predict(&mut self, edge: EdgeId) -> Sign {
        let e = *self.g.edge(edge);
        let (ru, pu) = self.find(e.u);
        let (rv, pv) = self.find(e.v);
        if ru == rv {
            pu * pv
        } else {
            Sign::Plus
        }
    }

    fn observe(&mut self, edge: EdgeId, label: Sign) {
        let e = *self.g.edge(edge);
        let (ru, pu) = self.find(e.u);
        let (rv, pv) = self.find(e.v);
        if ru != rv {
            // parity[u] * parity(path u..v) must equal label * parity[v].
            self.parent[ru] = rv;
            self.parity[ru] = pu * label * pv;
        }
    }
}

/// Weighted majority over halving experts `d = 0..=|E|`, with weight decay
/// `beta` on expert mistakes. Ties vote `+1`.
pub struct WeightedMajorityLearner<'a> {
    experts: Vec<HalvingLearner<'a>>,
    weights: Vec<f64>,
    beta: f64,
    pub expert_mistakes: Vec<usize>,
    last_votes: Vec<Sign>,
}

impl<'a> WeightedMajorityLearner<'a> {
    pub fn new(table: &'a VersionSpaceTable, beta: f64) -> Self {
        // The expert pool is one halving instance per attainable index value,
        // plus d = 0 so balanced labelings keep a perfect expert.
        Self::with_experts(table, beta, (0..=table.edge_count as u32).collect())
    }

    /// A custom expert pool, one halving instance per listed index value.
    pub fn with_experts(table: &'a VersionSpaceTable, beta: f64, ds: Vec<u32>) -> Self {
        let count = ds.len();
        WeightedMajorityLearner {
            experts: ds
                .into_iter()
                .map(|d| HalvingLearner::new(table, d))
                .collect(),
            weights: vec![1.0; count],
            beta,
            expert_mistakes: vec![0; count],
            last_votes: Vec::new(),
        }
    }

    pub fn expert_count(&self) -> usize {
        self.experts.len()
    }
}

impl OnlineLearner for WeightedMajorityLearner<'_> {
    fn predict(&mut self, edge: EdgeId) -> Sign {
        self.last_votes = self.experts.iter_mut().map(|ex| ex.predict(edge)).collect();
        let score: f64 = self
            .last_votes
            .iter()
            .zip(&self.weights)
            .map(|(&v, &w)| w * f64::from(v.as_i8()))
            .sum();
        if score < 0.0 {
            Sign::Minus
        } else {
            Sign::Plus
        }
    }

    fn observe(&mut self, edge: EdgeId, label: Sign) {
        for (k, ex) in self.experts.iter_mut().enumerate() {
            if self.last_votes[k] != label {
                self.weights[k] *= self.beta;
                self.expert_mistakes[k] += 1;
            }
            ex.observe(edge, label);
        }
    }
}

/// Runs weighted majority over a fixed edge order against the graph's own
/// labels. Returns the run and the per-expert mistake counts.
pub fn weighted_majority_run(
    g: &SignedGraph,
    table: &VersionSpaceTable,
    order: &[EdgeId],
    beta: f64,
) -> (OnlineRun, Vec<usize>) {
    let mut learner = WeightedMajorityLearner::new(table, beta);
    let mut env = FixedOrderEnvironment::new(g, order.to_vec());
    let run = run_online(&mut learner, &mut env);
    (run, learner.expert_mistakes)
}

// ---------------------------------------------------------------------------
// Adversary
// ---------------------------------------------------------------------------

/// The lower-bound adversary: presents a spanning tree answering opposite to
/// every prediction, then `k` designated non-tree edges answered opposite,
/// then the remaining edges labeled consistently with the clusters spanned
/// by positive tree paths. The final labeling has index at most `k`.
pub struct TreePlusKAdversary<'a> {
    g: &'a SignedGraph,
    order: Vec<EdgeId>,
    /// Edges answered opposite to the prediction (tree edges and the pool).
    forced: Vec<bool>,
    is_tree: Vec<bool>,
    labels: Vec<Option<Sign>>,
    cursor: usize,
}

impl<'a> TreePlusKAdversary<'a> {
    pub fn new(g: &'a SignedGraph, k: usize) -> Result<Self, OnlineError> {
        let forest = bfs_spanning_forest(g, None);
        let tree_edges = forest.tree_edges();
        let mut is_tree = vec![false; g.edge_count()];
        for &e in &tree_edges {
            is_tree[e] = true;
        }
        let non_tree: Vec<EdgeId> = (0..g.edge_count()).filter(|&e| !is_tree[e]).collect();
        if non_tree.len() < k {
            return Err(OnlineError::NotEnoughNonTreeEdges {
                needed: k,
                available: non_tree.len(),
            });
        }
        let mut order = tree_edges.clone();
        order.extend(non_tree.iter().copied());
        let mut forced = vec![false; g.edge_count()];
        for &e in &tree_edges {
            forced[e] = true;
        }
        for &e in non_tree.iter().take(k) {
            forced[e] = true;
        }
        Ok(TreePlusKAdversary {
            g,
            order,
            forced,
            is_tree,
            labels: vec![None; g.edge_count()],
            cursor: 0,
        })
    }

    /// Clusters induced by the answered tree labels: components of the
    /// positive tree edges.
    fn consistent_label(&self, edge: EdgeId) -> Sign {
        let positive_tree = connected_components_filtered(self.g, |e| {
            self.is_tree[e] && self.labels[e] == Some(Sign::Plus)
        });
        let e = self.g.edge(edge);
        if positive_tree.same_cluster(e.u, e.v) {
            Sign::Plus
        } else {
            Sign::Minus
        }
    }

    /// The labeling revealed over the run; total once the run finishes.
    pub fn final_labeling(&self) -> Vec<Option<Sign>> {
        self.labels.clone()
    }

    /// Number of forced-mistake steps: tree edges plus the pool.
    pub fn forced_count(&self) -> usize {
        self.forced.iter().filter(|&&f| f).count()
    }
}

impl OnlineEnvironment for TreePlusKAdversary<'_> {
    fn next_edge(&mut self) -> Option<EdgeId> {
        let e = self.order.get(self.cursor).copied();
        self.cursor += 1;
        e
    }

    fn reveal(&mut self, edge: EdgeId, prediction: Sign) -> Sign {
        let label = if self.forced[edge] {
            prediction.flip()
        } else {
            self.consistent_label(edge)
        };
        self.labels[edge] = Some(label);
        label
    }
}

/// Convenience: the graph relabeled with the adversary's final answers.
pub fn graph_with_labels(g: &SignedGraph, labels: &[Option<Sign>]) -> SignedGraph {
    let signs: Vec<Sign> = labels
        .iter()
        .map(|l| l.expect("run must be complete"))
        .collect();
    g.with_signs(&signs)
}
