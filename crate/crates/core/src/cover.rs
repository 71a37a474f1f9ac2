//! Circuit-covering active learners.
//!
//! The selection phase is label-independent: it queries the edges of a
//! spanning tree plus one edge per sheaf, and assigns every remaining edge to
//! the test set together with a circuit (a closed walk) whose other edges are
//! all queried. The prediction phase signs each test edge with the product of
//! the queried labels along its circuit.

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{
    tree_path, EdgeId, GraphError, NodeId, RootedSpanningForest, Sign, SignedGraph,
};
use crate::tree_predict::{build_spanning_tree, TreeStrategy};

#[derive(Debug, Error)]
pub enum CoverError {
    #[error("rho must be at least 1")]
    BadRho,
    #[error("theta must be at least 1")]
    BadTheta,
    #[error("graph has no edges")]
    EmptyGraph,
    #[error("cccc requires 3 < rho and rho * |V| <= |E| (rho {rho}, |V| {nodes}, |E| {edges})")]
    RhoOutOfRange {
        rho: usize,
        nodes: usize,
        edges: usize,
    },
    #[error("circuit path edge {edge} is not in the query set")]
    MissingQueriedLabel { edge: EdgeId },
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// How the designated queried edge of each sheaf is chosen.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SheafPick {
    /// First edge in sheaf order.
    First,
    /// Uniformly at random (the randomized variant).
    Random,
}

/// How the batches of the full classifier walk the edge set.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum BatchOrder {
    /// Stored edge order.
    Stored,
    /// Seeded shuffle, for studying variance.
    Shuffled,
}

/// One circuit: a designated test edge plus the ordered queried edges
/// closing the cycle.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Circuit {
    pub test_edge: EdgeId,
    /// Queried edges from one endpoint of the test edge to the other.
    pub path: Vec<EdgeId>,
    /// Index into [`CircuitCover::epochs`].
    pub epoch: usize,
}

/// One spanning-tree run of the simplified algorithm (the full algorithm
/// performs one run per batch component).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunRecord {
    pub root: NodeId,
    /// Edges of the run's spanning tree.
    pub tree_edges: Vec<EdgeId>,
    /// Edges of the graph the run operated on: the whole edge set for the
    /// simplified algorithm, one batch component for the full one.
    pub graph_edges: Vec<EdgeId>,
}

/// Snapshot of one detach-a-subtree epoch, kept so covers can be re-verified
/// after the working tree has shrunk away.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EpochRecord {
    /// Index into [`CircuitCover::runs`].
    pub run: usize,
    pub theta: usize,
    pub subtree_root: NodeId,
    /// Nodes of the detached subtree, in DFS order.
    pub subtree_nodes: Vec<NodeId>,
    /// Nodes still in the working tree when the epoch began.
    pub active_nodes: Vec<NodeId>,
}

/// A consecutive group of cut edges with one designated queried member.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Sheaf {
    pub edges: Vec<EdgeId>,
    pub queried: EdgeId,
}

/// A circuit cover: the query/test split of the edge set, the circuits that
/// predict each test edge, and the per-edge load ledger.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CircuitCover {
    pub node_count: usize,
    pub edge_count: usize,
    pub circuits: Vec<Circuit>,
    /// Sorted queried edge ids.
    pub query_set: Vec<EdgeId>,
    /// Sorted test edge ids.
    pub test_set: Vec<EdgeId>,
    /// Per-edge count of circuits whose edge set contains the edge.
    pub load: Vec<usize>,
    pub runs: Vec<RunRecord>,
    pub epochs: Vec<EpochRecord>,
}

impl CircuitCover {
    pub fn query_count(&self) -> usize {
        self.query_set.len()
    }

    pub fn test_count(&self) -> usize {
        self.test_set.len()
    }
}

/// Exact ledger statistics of a cover.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoverStats {
    pub query_count: usize,
    pub test_count: usize,
    pub max_load: usize,
    /// Mean load over queried edges.
    pub mean_load: f64,
    /// `(load value, number of edges with that load)`, ascending.
    pub load_histogram: Vec<(usize, usize)>,
    /// `test / (Q - |V| + 1)`; `None` when the denominator is not positive.
    pub ratio_excluding_tree: Option<f64>,
    /// `test / Q`; `None` when nothing was queried.
    pub ratio_overall: Option<f64>,
}

// ---------------------------------------------------------------------------
// Tree partition
// ---------------------------------------------------------------------------

/// Fixed per-run view of the spanning tree; only `active` shrinks.
struct RunTree {
    root: NodeId,
    parent: Vec<Option<(NodeId, EdgeId)>>,
    children: Vec<Vec<NodeId>>,
    depth: Vec<usize>,
    is_tree_edge: Vec<bool>,
    tree_edges: Vec<EdgeId>,
}

impl RunTree {
    fn new(g: &SignedGraph, forest: &RootedSpanningForest, root: NodeId) -> RunTree {
        let n = g.node_count();
        let mut is_tree_edge = vec![false; g.edge_count()];
        let tree_edges = forest.tree_edges();
        for &e in &tree_edges {
            is_tree_edge[e] = true;
        }
        RunTree {
            root,
            parent: (0..n).map(|v| forest.parent(v)).collect(),
            children: forest.children(),
            depth: (0..n).map(|v| forest.depth(v)).collect(),
            is_tree_edge,
            tree_edges,
        }
    }

    /// Lowest common ancestor by depth walking; both nodes must be active,
    /// which keeps the whole walk inside the active tree.
    fn lca(&self, mut a: NodeId, mut b: NodeId) -> NodeId {
        while self.depth[a] > self.depth[b] {
            a = self.parent[a].expect("deeper node has a parent").0;
        }
        while self.depth[b] > self.depth[a] {
            b = self.parent[b].expect("deeper node has a parent").0;
        }
        while a != b {
            a = self.parent[a].expect("non-root has a parent").0;
            b = self.parent[b].expect("non-root has a parent").0;
        }
        a
    }

    /// Nodes of the active subtree rooted at `j`, in DFS preorder.
    fn subtree_nodes(&self, active: &[bool], j: NodeId) -> Vec<NodeId> {
        let mut out = Vec::new();
        let mut stack = vec![j];
        while let Some(u) = stack.pop() {
            out.push(u);
            for &c in self.children[u].iter().rev() {
                if active[c] {
                    stack.push(c);
                }
            }
        }
        out
    }

    /// Postorder of the active tree from the run root.
    fn postorder(&self, active: &[bool]) -> Vec<NodeId> {
        let mut out = Vec::new();
        let mut stack = vec![(self.root, false)];
        while let Some((u, expanded)) = stack.pop() {
            if expanded {
                out.push(u);
                continue;
            }
            stack.push((u, true));
            for &c in self.children[u].iter().rev() {
                if active[c] {
                    stack.push((c, false));
                }
            }
        }
        out
    }
}

/// Depth-first record propagation: returns the root of the first subtree (in
/// record-creation order) whose cut to the rest of the active tree reaches
/// `theta`, or the whole-tree root when no subtree does.
///
/// The cut of the subtree below `v` counts the non-tree edges with both
/// endpoints active and exactly one endpoint below `v`; such an edge charges
/// +1 at each endpoint and -2 at their meeting point, so subtree sums of
/// those charges are exactly the cut sizes.
fn tree_partition_impl(g: &SignedGraph, rt: &RunTree, active: &[bool], theta: usize) -> NodeId {
    let n = g.node_count();
    let mut charge = vec![0i64; n];
    for (id, e) in g.edges().iter().enumerate() {
        if rt.is_tree_edge[id] || !active[e.u] || !active[e.v] {
            continue;
        }
        charge[e.u] += 1;
        charge[e.v] += 1;
        charge[rt.lca(e.u, e.v)] -= 2;
    }
    let order = rt.postorder(active);
    let mut cut = vec![0i64; n];
    for &v in &order {
        let mut acc = charge[v];
        for &c in &rt.children[v] {
            if active[c] {
                acc += cut[c];
            }
        }
        cut[v] = acc;
        if v != rt.root && acc >= theta as i64 {
            return v;
        }
    }
    rt.root
}

/// Standalone tree-partition entry point, for direct testing: `active`
/// selects the working subtree, which must be connected and contain `root`.
pub fn tree_partition(
    g: &SignedGraph,
    forest: &RootedSpanningForest,
    active: &[bool],
    root: NodeId,
    theta: usize,
) -> NodeId {
    let rt = RunTree::new(g, forest, root);
    tree_partition_impl(g, &rt, active, theta)
}

// ---------------------------------------------------------------------------
// Edge partition
// ---------------------------------------------------------------------------

/// Cut edges between the detached subtree and the rest of the active tree,
/// ordered by the DFS first visit of their outside endpoint; edges sharing an
/// outside endpoint keep that node's adjacency order.
fn ordered_cut_edges(
    g: &SignedGraph,
    rt: &RunTree,
    active: &[bool],
    in_subtree: &[bool],
) -> Vec<EdgeId> {
    let mut out = Vec::new();
    let mut stack = vec![rt.root];
    while let Some(u) = stack.pop() {
        for &(nbr, eid) in g.adjacency(u) {
            if active[nbr] && in_subtree[nbr] && !rt.is_tree_edge[eid] {
                out.push(eid);
            }
        }
        for &c in rt.children[u].iter().rev() {
            if active[c] && !in_subtree[c] {
                stack.push(c);
            }
        }
    }
    out
}

/// Splits an ordered cut into consecutive sheaves. With `l` edges and ratio
/// `rho`, `max(1, l / (rho+1))` groups are formed, sized as evenly as
/// possible with the larger groups last. Every group has at least `rho + 1`
/// edges whenever `l >= rho + 1`.
fn split_sheaves(ordered: &[EdgeId], rho: usize) -> Vec<Vec<EdgeId>> {
    let l = ordered.len();
    if l == 0 {
        return Vec::new();
    }
    let k = (l / (rho + 1)).max(1);
    let base = l / k;
    let extra = l % k;
    let mut out = Vec::with_capacity(k);
    let mut start = 0;
    for idx in 0..k {
        let size = if idx < k - extra { base } else { base + 1 };
        out.push(ordered[start..start + size].to_vec());
        start += size;
    }
    debug_assert_eq!(start, l);
    out
}

fn make_sheaves<R: Rng + ?Sized>(
    g: &SignedGraph,
    rt: &RunTree,
    active: &[bool],
    in_subtree: &[bool],
    rho: usize,
    pick: SheafPick,
    rng: &mut R,
) -> Vec<Sheaf> {
    let ordered = ordered_cut_edges(g, rt, active, in_subtree);
    split_sheaves(&ordered, rho)
        .into_iter()
        .map(|edges| {
            let queried = match pick {
                SheafPick::First => edges[0],
                SheafPick::Random => edges[rng.random_range(0..edges.len())],
            };
            Sheaf { edges, queried }
        })
        .collect()
}

/// Partitions the cut between the detached subtree and the rest of the
/// working tree into sheaves, and designates one queried edge per sheaf.
#[allow(clippy::too_many_arguments)]
pub fn edge_partition<R: Rng + ?Sized>(
    g: &SignedGraph,
    forest: &RootedSpanningForest,
    active: &[bool],
    root: NodeId,
    subtree_root: NodeId,
    rho: usize,
    pick: SheafPick,
    rng: &mut R,
) -> Vec<Sheaf> {
    let rt = RunTree::new(g, forest, root);
    let mut in_subtree = vec![false; g.node_count()];
    for v in rt.subtree_nodes(active, subtree_root) {
        in_subtree[v] = true;
    }
    make_sheaves(g, &rt, active, &in_subtree, rho, pick, rng)
}

// ---------------------------------------------------------------------------
// SCCCC / CCCC
// ---------------------------------------------------------------------------

struct RunOutput {
    circuits: Vec<Circuit>,
    query: Vec<EdgeId>,
    test: Vec<EdgeId>,
    tree_edges: Vec<EdgeId>,
    epochs: Vec<EpochRecord>,
}

/// One full run on a connected graph: query a spanning tree, then repeatedly
/// detach a bounded-cut subtree, classify the edges inside it, and split its
/// cut into sheaves.
fn scccc_run<R: Rng + ?Sized>(
    g: &SignedGraph,
    rho: usize,
    theta: usize,
    tree: TreeStrategy,
    pick: SheafPick,
    rng: &mut R,
) -> Result<RunOutput, CoverError> {
    let n = g.node_count();
    let forest = build_spanning_tree(g, tree, rng)?;
    let root = 0;
    let rt = RunTree::new(g, &forest, root);

    let mut classified = vec![false; g.edge_count()];
    let mut query = rt.tree_edges.clone();
    for &e in &query {
        classified[e] = true;
    }
    let mut test = Vec::new();
    let mut circuits = Vec::new();
    let mut epochs = Vec::new();

    let mut active = vec![true; n];
    let mut active_count = n;
    let mut in_subtree = vec![false; n];
    while active_count > 0 {
        let j = tree_partition_impl(g, &rt, &active, theta);
        let subtree = rt.subtree_nodes(&active, j);
        for &v in &subtree {
            in_subtree[v] = true;
        }
        let epoch = epochs.len();
        epochs.push(EpochRecord {
            run: 0,
            theta,
            subtree_root: j,
            subtree_nodes: subtree.clone(),
            active_nodes: (0..n).filter(|&v| active[v]).collect(),
        });

        // Edges with both endpoints in the detached subtree become test
        // edges predicted along their tree path.
        for &u in &subtree {
            for &(nbr, eid) in g.adjacency(u) {
                if in_subtree[nbr] && !classified[eid] && !rt.is_tree_edge[eid] {
                    classified[eid] = true;
                    test.push(eid);
                    let path = tree_path(&forest, u, nbr).expect("same tree component");
                    circuits.push(Circuit {
                        test_edge: eid,
                        path: path.edges,
                        epoch,
                    });
                }
            }
        }

        // Cut edges are split into sheaves: one queried edge each, the rest
        // predicted through it.
        if j != root {
            for sheaf in make_sheaves(g, &rt, &active, &in_subtree, rho, pick, rng) {
                let queried = sheaf.queried;
                classified[queried] = true;
                query.push(queried);
                let qe = g.edge(queried);
                let (qi, qj) = if in_subtree[qe.u] {
                    (qe.u, qe.v)
                } else {
                    (qe.v, qe.u)
                };
                for &eid in &sheaf.edges {
                    if eid == queried {
                        continue;
                    }
                    let te = g.edge(eid);
                    let (ti, tj) = if in_subtree[te.u] {
                        (te.u, te.v)
                    } else {
                        (te.v, te.u)
                    };
                    let mut path = tree_path(&forest, ti, qi).expect("same component").edges;
                    path.push(queried);
                    path.extend(tree_path(&forest, qj, tj).expect("same component").edges);
                    classified[eid] = true;
                    test.push(eid);
                    circuits.push(Circuit {
                        test_edge: eid,
                        path,
                        epoch,
                    });
                }
            }
        }

        for &v in &subtree {
            active[v] = false;
            in_subtree[v] = false;
        }
        active_count -= subtree.len();
    }
    debug_assert!(classified.iter().all(|&c| c));
    Ok(RunOutput {
        circuits,
        query,
        test,
        tree_edges: rt.tree_edges.clone(),
        epochs,
    })
}

fn assemble_cover(
    node_count: usize,
    edge_count: usize,
    circuits: Vec<Circuit>,
    mut query: Vec<EdgeId>,
    mut test: Vec<EdgeId>,
    runs: Vec<RunRecord>,
    epochs: Vec<EpochRecord>,
) -> CircuitCover {
    let mut load = vec![0usize; edge_count];
    for c in &circuits {
        load[c.test_edge] += 1;
        for &e in &c.path {
            load[e] += 1;
        }
    }
    query.sort_unstable();
    test.sort_unstable();
    CircuitCover {
        node_count,
        edge_count,
        circuits,
        query_set: query,
        test_set: test,
        load,
        runs,
        epochs,
    }
}

/// The simplified constrained circuit covering classifier.
///
/// Queries a spanning tree, then loops: detach a subtree via
/// [`tree_partition`], classify the edges inside it along tree paths, split
/// its cut into sheaves of at least `rho + 1` edges with one query each.
/// The test set grows by at least `rho` edges per sheaf query, which yields
/// `|test| / (Q - |V| + 1) >= rho`.
pub fn scccc<R: Rng + ?Sized>(
    g: &SignedGraph,
    rho: usize,
    theta: usize,
    tree: TreeStrategy,
    pick: SheafPick,
    rng: &mut R,
) -> Result<CircuitCover, CoverError> {
    if rho == 0 {
        return Err(CoverError::BadRho);
    }
    if theta == 0 {
        return Err(CoverError::BadTheta);
    }
    if !g.is_connected() {
        return Err(CoverError::Graph(GraphError::Disconnected));
    }
    let run = scccc_run(g, rho, theta, tree, pick, rng)?;
    let record = RunRecord {
        root: 0,
        tree_edges: run.tree_edges,
        graph_edges: (0..g.edge_count()).collect(),
    };
    Ok(assemble_cover(
        g.node_count(),
        g.edge_count(),
        run.circuits,
        run.query,
        run.test,
        vec![record],
        run.epochs,
    ))
}

fn ceil_sqrt(x: usize) -> usize {
    let mut r = (x as f64).sqrt() as usize;
    while r * r < x {
        r += 1;
    }
    while r > 0 && (r - 1) * (r - 1) >= x {
        r -= 1;
    }
    r
}

/// The full constrained circuit covering classifier: walks the edge set in
/// batches of `rho * |V|`, runs [`scccc`] with threshold `ceil(sqrt(|E'|))`
/// on every connected component of each batch, and merges the covers.
///
/// Requires `3 < rho` and `rho * |V| <= |E|`, the regime in which the
/// combined query set stays below `3 |E| / rho` and the overall
/// test-to-query ratio is at least `(rho - 3) / 3`.
pub fn cccc<R: Rng + ?Sized>(
    g: &SignedGraph,
    rho: usize,
    tree: TreeStrategy,
    pick: SheafPick,
    order: BatchOrder,
    rng: &mut R,
) -> Result<CircuitCover, CoverError> {
    let (n, m) = (g.node_count(), g.edge_count());
    if m == 0 {
        return Err(CoverError::EmptyGraph);
    }
    if rho <= 3 || rho * n > m {
        return Err(CoverError::RhoOutOfRange {
            rho,
            nodes: n,
            edges: m,
        });
    }
    let mut edge_order: Vec<EdgeId> = (0..m).collect();
    if order == BatchOrder::Shuffled {
        for i in (1..m).rev() {
            let j = rng.random_range(0..=i);
            edge_order.swap(i, j);
        }
    }

    let mut circuits = Vec::new();
    let mut query = Vec::new();
    let mut test = Vec::new();
    let mut runs: Vec<RunRecord> = Vec::new();
    let mut epochs: Vec<EpochRecord> = Vec::new();

    let batch_size = rho * n;
    for batch in edge_order.chunks(batch_size) {
        let theta = ceil_sqrt(batch.len()).max(1);
        let mut in_batch = vec![false; m];
        for &e in batch {
            in_batch[e] = true;
        }
        let comps = crate::graph::connected_components_filtered(g, |e| in_batch[e]);
        // Group batch edges per component, preserving batch order.
        let mut comp_edges: Vec<Vec<EdgeId>> = vec![Vec::new(); comps.cluster_count()];
        for &e in batch {
            comp_edges[comps.cluster_of(g.edge(e).u)].push(e);
        }
        for edges in comp_edges.into_iter().filter(|c| !c.is_empty()) {
            // Local subgraph with dense node ids ordered by global id.
            let mut nodes: Vec<NodeId> = edges
                .iter()
                .flat_map(|&e| [g.edge(e).u, g.edge(e).v])
                .collect();
            nodes.sort_unstable();
            nodes.dedup();
            let mut local_id = vec![usize::MAX; n];
            for (i, &v) in nodes.iter().enumerate() {
                local_id[v] = i;
            }
            let raw: Vec<(usize, usize, i8)> = edges
                .iter()
                .map(|&e| {
                    let edge = g.edge(e);
                    (local_id[edge.u], local_id[edge.v], edge.sign.as_i8())
                })
                .collect();
            let local = SignedGraph::new(nodes.len(), &raw).expect("component subgraph is valid");
            let run = scccc_run(&local, rho, theta, tree, pick, rng)?;
            let run_index = runs.len();
            runs.push(RunRecord {
                root: nodes[0],
                tree_edges: run.tree_edges.iter().map(|&e| edges[e]).collect(),
                graph_edges: edges.clone(),
            });
            let epoch_offset = epochs.len();
            for ep in run.epochs {
                epochs.push(EpochRecord {
                    run: run_index,
                    theta: ep.theta,
                    subtree_root: nodes[ep.subtree_root],
                    subtree_nodes: ep.subtree_nodes.iter().map(|&v| nodes[v]).collect(),
                    active_nodes: ep.active_nodes.iter().map(|&v| nodes[v]).collect(),
                });
            }
            circuits.extend(run.circuits.into_iter().map(|c| Circuit {
                test_edge: edges[c.test_edge],
                path: c.path.iter().map(|&e| edges[e]).collect(),
                epoch: c.epoch + epoch_offset,
            }));
            query.extend(run.query.into_iter().map(|e| edges[e]));
            test.extend(run.test.into_iter().map(|e| edges[e]));
        }
    }
    Ok(assemble_cover(n, m, circuits, query, test, runs, epochs))
}

// ---------------------------------------------------------------------------
// Prediction, statistics, verification
// ---------------------------------------------------------------------------

/// Predicts every test edge by the sign product along its circuit's path.
/// Fails if some path edge was not queried.
pub fn predict_with_cover(
    cover: &CircuitCover,
    g: &SignedGraph,
) -> Result<Vec<(EdgeId, Sign)>, CoverError> {
    let mut queried = vec![false; g.edge_count()];
    for &e in &cover.query_set {
        queried[e] = true;
    }
    cover
        .circuits
        .iter()
        .map(|c| {
            let mut sign = Sign::Plus;
            for &e in &c.path {
                if !queried[e] {
                    return Err(CoverError::MissingQueriedLabel { edge: e });
                }
                sign = sign * g.sign(e);
            }
            Ok((c.test_edge, sign))
        })
        .collect()
}

/// Number of test edges whose circuit prediction disagrees with the label.
pub fn count_mistakes(cover: &CircuitCover, g: &SignedGraph) -> Result<usize, CoverError> {
    Ok(predict_with_cover(cover, g)?
        .into_iter()
        .filter(|&(e, s)| s != g.sign(e))
        .count())
}

/// Sum of loads over a flip set: a deterministic upper bound on the mistakes
/// the flips can cause, since a circuit errs only if it contains a flip.
pub fn flip_load_bound(cover: &CircuitCover, flips: &[EdgeId]) -> usize {
    flips.iter().map(|&e| cover.load[e]).sum()
}

/// Exact ledger statistics.
pub fn cover_stats(cover: &CircuitCover) -> CoverStats {
    let q = cover.query_count();
    let t = cover.test_count();
    let max_load = cover.load.iter().copied().max().unwrap_or(0);
    let mean_load = if q == 0 {
        0.0
    } else {
        cover
            .query_set
            .iter()
            .map(|&e| cover.load[e])
            .sum::<usize>() as f64
            / q as f64
    };
    let mut histogram = std::collections::BTreeMap::new();
    for &l in &cover.load {
        *histogram.entry(l).or_insert(0usize) += 1;
    }
    let denom = q as i64 - cover.node_count as i64 + 1;
    CoverStats {
        query_count: q,
        test_count: t,
        max_load,
        mean_load,
        load_histogram: histogram.into_iter().collect(),
        ratio_excluding_tree: (denom > 0).then(|| t as f64 / denom as f64),
        ratio_overall: (q > 0).then(|| t as f64 / q as f64),
    }
}

/// A violated cover invariant.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum CoverViolation {
    EdgeUncovered(EdgeId),
    EdgeInQueryAndTest(EdgeId),
    DuplicateTestEdge(EdgeId),
    TestEdgeWithoutCircuit(EdgeId),
    CircuitTestEdgeNotInTestSet {
        circuit: usize,
        edge: EdgeId,
    },
    UnqueriedPathEdge {
        circuit: usize,
        edge: EdgeId,
    },
    CircuitNotClosed {
        circuit: usize,
    },
    LoadMismatch {
        edge: EdgeId,
        recorded: usize,
        actual: usize,
    },
    TestEdgeLoadNotOne {
        edge: EdgeId,
        load: usize,
    },
    BadEpochIndex {
        circuit: usize,
    },
    PathOutsideEpoch {
        circuit: usize,
        edge: EdgeId,
    },
    TestEdgeOutsideEpoch {
        circuit: usize,
    },
}

impl std::fmt::Display for CoverViolation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{self:?}")
    }
}

/// Checks every structural invariant of a cover against its graph. Returns
/// all violations found; an empty list means the cover is sound.
pub fn verify_cover(cover: &CircuitCover, g: &SignedGraph) -> Vec<CoverViolation> {
    let m = g.edge_count();
    let mut violations = Vec::new();
    let mut in_query = vec![false; m];
    let mut in_test = vec![false; m];
    for &e in &cover.query_set {
        in_query[e] = true;
    }
    for &e in &cover.test_set {
        if in_test[e] {
            violations.push(CoverViolation::DuplicateTestEdge(e));
        }
        in_test[e] = true;
    }
    for e in 0..m {
        if !in_query[e] && !in_test[e] {
            violations.push(CoverViolation::EdgeUncovered(e));
        }
        if in_query[e] && in_test[e] {
            violations.push(CoverViolation::EdgeInQueryAndTest(e));
        }
    }

    // Circuits' test edges must enumerate the test set exactly once each.
    let mut circuit_count = vec![0usize; m];
    for c in &cover.circuits {
        circuit_count[c.test_edge] += 1;
    }
    for e in 0..m {
        if in_test[e] && circuit_count[e] == 0 {
            violations.push(CoverViolation::TestEdgeWithoutCircuit(e));
        }
        if circuit_count[e] > 1 {
            violations.push(CoverViolation::DuplicateTestEdge(e));
        }
    }

    let mut actual_load = vec![0usize; m];
    for (ci, c) in cover.circuits.iter().enumerate() {
        actual_load[c.test_edge] += 1;
        for &e in &c.path {
            actual_load[e] += 1;
        }
        if !in_test[c.test_edge] {
            violations.push(CoverViolation::CircuitTestEdgeNotInTestSet {
                circuit: ci,
                edge: c.test_edge,
            });
        }
        for &e in &c.path {
            if !in_query[e] {
                violations.push(CoverViolation::UnqueriedPathEdge {
                    circuit: ci,
                    edge: e,
                });
            }
        }
        if !circuit_closes(g, c) {
            violations.push(CoverViolation::CircuitNotClosed { circuit: ci });
        }
        verify_epoch_containment(cover, g, ci, c, &mut violations);
    }
    for e in 0..m {
        if cover.load.get(e).copied() != Some(actual_load[e]) {
            violations.push(CoverViolation::LoadMismatch {
                edge: e,
                recorded: cover.load.get(e).copied().unwrap_or(0),
                actual: actual_load[e],
            });
        }
        if in_test[e] && actual_load[e] != 1 && circuit_count[e] == 1 {
            violations.push(CoverViolation::TestEdgeLoadNotOne {
                edge: e,
                load: actual_load[e],
            });
        }
    }
    violations
}

/// The path must chain node-to-node from one endpoint of the test edge to
/// the other (in either orientation).
fn circuit_closes(g: &SignedGraph, c: &Circuit) -> bool {
    let te = g.edge(c.test_edge);
    if c.path.is_empty() {
        return false;
    }
    'orient: for start in [te.u, te.v] {
        let goal = te.other(start);
        let mut cur = start;
        for &e in &c.path {
            let edge = g.edge(e);
            if edge.u == cur {
                cur = edge.v;
            } else if edge.v == cur {
                cur = edge.u;
            } else {
                continue 'orient;
            }
        }
        if cur == goal {
            return true;
        }
    }
    false
}

/// Re-checks that a circuit's path lies where its creation epoch says it
/// must: tree edges inside the detached subtree for within-subtree circuits;
/// a subtree prefix, exactly one cut edge, and an outside suffix for sheaf
/// circuits.
fn verify_epoch_containment(
    cover: &CircuitCover,
    g: &SignedGraph,
    ci: usize,
    c: &Circuit,
    violations: &mut Vec<CoverViolation>,
) {
    let Some(ep) = cover.epochs.get(c.epoch) else {
        violations.push(CoverViolation::BadEpochIndex { circuit: ci });
        return;
    };
    let Some(run) = cover.runs.get(ep.run) else {
        violations.push(CoverViolation::BadEpochIndex { circuit: ci });
        return;
    };
    let n = g.node_count();
    let mut active = vec![false; n];
    let mut in_tq = vec![false; n];
    for &v in &ep.active_nodes {
        active[v] = true;
    }
    for &v in &ep.subtree_nodes {
        in_tq[v] = true;
    }
    let mut is_tree = vec![false; g.edge_count()];
    for &e in &run.tree_edges {
        is_tree[e] = true;
    }
    let te = g.edge(c.test_edge);
    let within = in_tq[te.u] && in_tq[te.v];
    let spans = (in_tq[te.u] && active[te.v] && !in_tq[te.v])
        || (in_tq[te.v] && active[te.u] && !in_tq[te.u]);
    if within {
        for &e in &c.path {
            let edge = g.edge(e);
            if !is_tree[e] || !in_tq[edge.u] || !in_tq[edge.v] {
                violations.push(CoverViolation::PathOutsideEpoch {
                    circuit: ci,
                    edge: e,
                });
            }
        }
    } else if spans {
        let mut cut_seen = false;
        for &e in &c.path {
            let edge = g.edge(e);
            if is_tree[e] {
                let inside = in_tq[edge.u] && in_tq[edge.v];
                let outside = active[edge.u] && active[edge.v] && !in_tq[edge.u] && !in_tq[edge.v];
                let ok = if cut_seen { outside } else { inside };
                if !ok {
                    violations.push(CoverViolation::PathOutsideEpoch {
                        circuit: ci,
                        edge: e,
                    });
                }
            } else {
                let spans_cut = (in_tq[edge.u] && active[edge.v] && !in_tq[edge.v])
                    || (in_tq[edge.v] && active[edge.u] && !in_tq[edge.u]);
                if cut_seen || !spans_cut {
                    violations.push(CoverViolation::PathOutsideEpoch {
                        circuit: ci,
                        edge: e,
                    });
                }
                cut_seen = true;
            }
        }
        if !cut_seen {
            violations.push(CoverViolation::CircuitNotClosed { circuit: ci });
        }
    } else {
        violations.push(CoverViolation::TestEdgeOutsideEpoch { circuit: ci });
    }
}
