//! Signed-graph representation, spanning-tree machinery, and path-sign queries.

use std::collections::HashSet;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub type NodeId = usize;
pub type EdgeId = usize;

/// An edge label: friend (`Plus`) or foe (`Minus`).
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(into = "i8", try_from = "i8")]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn as_i8(self) -> i8 {
        match self {
            Sign::Plus => 1,
            Sign::Minus => -1,
        }
    }

    pub fn flip(self) -> Sign {
        match self {
            Sign::Plus => Sign::Minus,
            Sign::Minus => Sign::Plus,
        }
    }

    pub fn is_negative(self) -> bool {
        self == Sign::Minus
    }
}

impl std::ops::Mul for Sign {
    type Output = Sign;

    fn mul(self, rhs: Sign) -> Sign {
        if self == rhs {
            Sign::Plus
        } else {
            Sign::Minus
        }
    }
}

impl From<Sign> for i8 {
    fn from(s: Sign) -> i8 {
        s.as_i8()
    }
}

impl TryFrom<i8> for Sign {
    type Error = String;

    fn try_from(v: i8) -> Result<Sign, String> {
        match v {
            1 => Ok(Sign::Plus),
            -1 => Ok(Sign::Minus),
            other => Err(format!("sign must be +1 or -1, got {other}")),
        }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GraphError {
    #[error("self-loop at node {0}")]
    SelfLoop(NodeId),
    #[error("duplicate edge between {0} and {1}")]
    DuplicateEdge(NodeId, NodeId),
    #[error("invalid sign {0}: must be +1 or -1")]
    InvalidSign(i8),
    #[error("node index {index} out of range for {node_count} nodes")]
    NodeOutOfRange { index: usize, node_count: usize },
    #[error("edge index {index} out of range for {edge_count} edges")]
    EdgeOutOfRange { index: usize, edge_count: usize },
    #[error("nodes {0} and {1} are in different components")]
    DifferentComponents(NodeId, NodeId),
    #[error("graph is disconnected")]
    Disconnected,
}

/// An undirected signed edge. Endpoints are stored as given at construction.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Edge {
    pub u: NodeId,
    pub v: NodeId,
    pub sign: Sign,
}

impl Edge {
    /// The endpoint that is not `x`. Panics if `x` is not an endpoint.
    pub fn other(&self, x: NodeId) -> NodeId {
        if x == self.u {
            self.v
        } else {
            debug_assert_eq!(x, self.v);
            self.u
        }
    }

    pub fn touches(&self, x: NodeId) -> bool {
        self.u == x || self.v == x
    }
}

/// An undirected simple graph with ±1 edge labels.
///
/// Nodes are dense integers `0..node_count`. Self-loops and parallel edges
/// are rejected at construction.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SignedGraph {
    node_count: usize,
    edges: Vec<Edge>,
    #[serde(skip)]
    adjacency: Vec<Vec<(NodeId, EdgeId)>>,
}

impl SignedGraph {
    /// Builds a validated graph from raw `(u, v, sign)` triples.
    pub fn new(node_count: usize, raw_edges: &[(usize, usize, i8)]) -> Result<Self, GraphError> {
        let mut edges = Vec::with_capacity(raw_edges.len());
        let mut seen = HashSet::with_capacity(raw_edges.len());
        for &(u, v, s) in raw_edges {
            if u >= node_count {
                return Err(GraphError::NodeOutOfRange {
                    index: u,
                    node_count,
                });
            }
            if v >= node_count {
                return Err(GraphError::NodeOutOfRange {
                    index: v,
                    node_count,
                });
            }
            if u == v {
                return Err(GraphError::SelfLoop(u));
            }
            let sign = Sign::try_from(s).map_err(|_| GraphError::InvalidSign(s))?;
            let key = (u.min(v), u.max(v));
            if !seen.insert(key) {
                return Err(GraphError::DuplicateEdge(key.0, key.1));
            }
            edges.push(Edge { u, v, sign });
        }
        Ok(Self::from_validated(node_count, edges))
    }

    /// Builds a graph from edges already known to satisfy the invariants.
    pub(crate) fn from_validated(node_count: usize, edges: Vec<Edge>) -> Self {
        let mut adjacency = vec![Vec::new(); node_count];
        for (id, e) in edges.iter().enumerate() {
            adjacency[e.u].push((e.v, id));
            adjacency[e.v].push((e.u, id));
        }
        SignedGraph {
            node_count,
            edges,
            adjacency,
        }
    }

    /// Same topology, new labels. `signs[e]` replaces the sign of edge `e`.
    pub fn with_signs(&self, signs: &[Sign]) -> SignedGraph {
        assert_eq!(signs.len(), self.edges.len());
        let edges = self
            .edges
            .iter()
            .zip(signs)
            .map(|(e, &s)| Edge { sign: s, ..*e })
            .collect();
        SignedGraph::from_validated(self.node_count, edges)
    }

    /// Copy with the signs of the listed edges flipped.
    pub fn with_flipped(&self, flips: &[EdgeId]) -> SignedGraph {
        let mut signs: Vec<Sign> = self.edges.iter().map(|e| e.sign).collect();
        for &e in flips {
            signs[e] = signs[e].flip();
        }
        self.with_signs(&signs)
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge(&self, id: EdgeId) -> &Edge {
        &self.edges[id]
    }

    /// Neighbors of `u` as `(neighbor, edge id)` in edge insertion order.
    pub fn adjacency(&self, u: NodeId) -> &[(NodeId, EdgeId)] {
        &self.adjacency[u]
    }

    pub fn sign(&self, id: EdgeId) -> Sign {
        self.edges[id].sign
    }

    /// Looks up the edge between `u` and `v`, if any.
    pub fn find_edge(&self, u: NodeId, v: NodeId) -> Option<EdgeId> {
        let (a, b) = if self.adjacency[u].len() <= self.adjacency[v].len() {
            (u, v)
        } else {
            (v, u)
        };
        self.adjacency[a]
            .iter()
            .find(|&&(nbr, _)| nbr == b)
            .map(|&(_, id)| id)
    }

    pub fn check_edge_id(&self, id: EdgeId) -> Result<(), GraphError> {
        if id >= self.edges.len() {
            return Err(GraphError::EdgeOutOfRange {
                index: id,
                edge_count: self.edges.len(),
            });
        }
        Ok(())
    }

    pub fn is_connected(&self) -> bool {
        self.node_count <= 1 || connected_components(self).cluster_count() == 1
    }
}

/// A node-to-cluster assignment with dense contiguous cluster ids.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Partition {
    cluster: Vec<usize>,
    cluster_count: usize,
}

impl Partition {
    /// Normalizes arbitrary labels to dense ids in first-seen order.
    pub fn from_labels(labels: &[usize]) -> Partition {
        let mut remap: Vec<Option<usize>> = Vec::new();
        let mut cluster = Vec::with_capacity(labels.len());
        let mut next = 0;
        for &l in labels {
            if l >= remap.len() {
                remap.resize(l + 1, None);
            }
            let id = *remap[l].get_or_insert_with(|| {
                let id = next;
                next += 1;
                id
            });
            cluster.push(id);
        }
        Partition {
            cluster,
            cluster_count: next,
        }
    }

    pub fn singletons(n: usize) -> Partition {
        Partition {
            cluster: (0..n).collect(),
            cluster_count: n,
        }
    }

    pub fn cluster_of(&self, v: NodeId) -> usize {
        self.cluster[v]
    }

    pub fn same_cluster(&self, i: NodeId, j: NodeId) -> bool {
        self.cluster[i] == self.cluster[j]
    }

    pub fn cluster_count(&self) -> usize {
        self.cluster_count
    }

    pub fn len(&self) -> usize {
        self.cluster.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cluster.is_empty()
    }

    pub fn labels(&self) -> &[usize] {
        &self.cluster
    }
}

/// A partition into at most two clusters, stored as a ±1 side per node.
/// One side may be empty.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TwoClustering {
    side: Vec<Sign>,
}

impl TwoClustering {
    pub fn new(side: Vec<Sign>) -> TwoClustering {
        TwoClustering { side }
    }

    pub fn all_plus(n: usize) -> TwoClustering {
        TwoClustering {
            side: vec![Sign::Plus; n],
        }
    }

    pub fn side(&self, v: NodeId) -> Sign {
        self.side[v]
    }

    pub fn sides(&self) -> &[Sign] {
        &self.side
    }

    pub fn same_side(&self, i: NodeId, j: NodeId) -> bool {
        self.side[i] == self.side[j]
    }

    pub fn len(&self) -> usize {
        self.side.len()
    }

    pub fn is_empty(&self) -> bool {
        self.side.is_empty()
    }

    /// The label this two-clustering induces on edge `(i, j)`:
    /// `Plus` within a side, `Minus` across.
    pub fn induced_sign(&self, i: NodeId, j: NodeId) -> Sign {
        self.side[i] * self.side[j]
    }
}

/// A rooted spanning forest with per-node parity (product of edge signs on
/// the node-to-root path). Supports O(1) path-sign queries by shared-prefix
/// cancellation: `pi_T(i, j) = parity[i] * parity[j]` within a component.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RootedSpanningForest {
    parent: Vec<Option<(NodeId, EdgeId)>>,
    root: Vec<NodeId>,
    depth: Vec<usize>,
    parity: Vec<Sign>,
}

impl RootedSpanningForest {
    pub fn node_count(&self) -> usize {
        self.parent.len()
    }

    pub fn parent(&self, v: NodeId) -> Option<(NodeId, EdgeId)> {
        self.parent[v]
    }

    pub fn root_of(&self, v: NodeId) -> NodeId {
        self.root[v]
    }

    pub fn depth(&self, v: NodeId) -> usize {
        self.depth[v]
    }

    pub fn parity(&self, v: NodeId) -> Sign {
        self.parity[v]
    }

    /// Tree edge ids, one per non-root node.
    pub fn tree_edges(&self) -> Vec<EdgeId> {
        self.parent
            .iter()
            .filter_map(|p| p.map(|(_, e)| e))
            .collect()
    }

    pub fn roots(&self) -> Vec<NodeId> {
        (0..self.parent.len())
            .filter(|&v| self.parent[v].is_none())
            .collect()
    }

    /// Children lists derived from the parent structure, in node-id order.
    pub fn children(&self) -> Vec<Vec<NodeId>> {
        let mut ch = vec![Vec::new(); self.parent.len()];
        for v in 0..self.parent.len() {
            if let Some((p, _)) = self.parent[v] {
                ch[p].push(v);
            }
        }
        ch
    }

    /// Same forest structure with parity recomputed from the graph's current
    /// labels. Needed whenever a forest built on one labeling serves
    /// path-sign queries on a relabeled copy.
    pub fn reparity(&self, g: &SignedGraph) -> RootedSpanningForest {
        forest_from_parents(g, self.parent.clone())
    }

    /// Checks every structural invariant against the host graph.
    /// Returns a description of the first violation found.
    pub fn validate(&self, g: &SignedGraph) -> Result<(), String> {
        let n = g.node_count();
        if self.parent.len() != n {
            return Err(format!(
                "forest covers {} nodes, graph has {n}",
                self.parent.len()
            ));
        }
        for v in 0..n {
            match self.parent[v] {
                None => {
                    if self.root[v] != v || self.depth[v] != 0 {
                        return Err(format!("root {v} has bad root/depth record"));
                    }
                    if self.parity[v] != Sign::Plus {
                        return Err(format!("root {v} has parity -1"));
                    }
                }
                Some((p, e)) => {
                    g.check_edge_id(e).map_err(|err| err.to_string())?;
                    let edge = g.edge(e);
                    if !(edge.touches(v) && edge.touches(p)) {
                        return Err(format!("parent edge {e} does not join {v} and {p}"));
                    }
                    if self.depth[v] != self.depth[p] + 1 {
                        return Err(format!("depth of {v} is not parent depth + 1"));
                    }
                    if self.root[v] != self.root[p] {
                        return Err(format!("root of {v} differs from root of parent"));
                    }
                    if self.parity[v] != edge.sign * self.parity[p] {
                        return Err(format!("parity recurrence violated at {v}"));
                    }
                }
            }
        }
        // Acyclicity: depths strictly decrease toward the root, so any parent
        // chain terminates; it remains to check each node reaches its root.
        for v in 0..n {
            let mut cur = v;
            while let Some((p, _)) = self.parent[cur] {
                cur = p;
            }
            if cur != self.root[v] {
                return Err(format!("node {v} does not reach its recorded root"));
            }
        }
        Ok(())
    }
}

/// Builds a rooted forest from parent pointers (each `Some((parent, edge))`).
fn forest_from_parents(
    g: &SignedGraph,
    parent: Vec<Option<(NodeId, EdgeId)>>,
) -> RootedSpanningForest {
    let n = g.node_count();
    let mut root = vec![usize::MAX; n];
    let mut depth = vec![0usize; n];
    let mut parity = vec![Sign::Plus; n];
    // Resolve each node by walking up until a resolved ancestor, then unwinding.
    let mut stack = Vec::new();
    for start in 0..n {
        let mut v = start;
        while root[v] == usize::MAX {
            match parent[v] {
                None => {
                    root[v] = v;
                    depth[v] = 0;
                    parity[v] = Sign::Plus;
                }
                Some((p, _)) => {
                    stack.push(v);
                    v = p;
                }
            }
        }
        while let Some(u) = stack.pop() {
            let (p, e) = parent[u].expect("stacked node has a parent");
            root[u] = root[p];
            depth[u] = depth[p] + 1;
            parity[u] = g.sign(e) * parity[p];
        }
    }
    RootedSpanningForest {
        parent,
        root,
        depth,
        parity,
    }
}

/// Rooted forest spanning the subgraph of the listed edges (BFS over that
/// subgraph, roots at the smallest node of each component). The listed edges
/// must be acyclic or the extra edges are simply unused.
pub fn spanning_forest_from_edges(g: &SignedGraph, edges: &[EdgeId]) -> RootedSpanningForest {
    let n = g.node_count();
    let mut keep = vec![false; g.edge_count()];
    for &e in edges {
        keep[e] = true;
    }
    let mut parent: Vec<Option<(NodeId, EdgeId)>> = vec![None; n];
    let mut visited = vec![false; n];
    let mut queue = std::collections::VecDeque::new();
    for seed in 0..n {
        if visited[seed] {
            continue;
        }
        visited[seed] = true;
        queue.push_back(seed);
        while let Some(u) = queue.pop_front() {
            for &(v, e) in g.adjacency(u) {
                if keep[e] && !visited[v] {
                    visited[v] = true;
                    parent[v] = Some((u, e));
                    queue.push_back(v);
                }
            }
        }
    }
    forest_from_parents(g, parent)
}

/// Breadth-first spanning forest. Roots are taken from `roots` in order,
/// then every still-unvisited node (in index order) starts a new tree.
pub fn bfs_spanning_forest(g: &SignedGraph, roots: Option<&[NodeId]>) -> RootedSpanningForest {
    let n = g.node_count();
    let mut parent: Vec<Option<(NodeId, EdgeId)>> = vec![None; n];
    let mut visited = vec![false; n];
    let mut queue = std::collections::VecDeque::new();

    let seeds: Vec<NodeId> = match roots {
        Some(r) => r.iter().copied().chain(0..n).collect(),
        None => (0..n).collect(),
    };
    for seed in seeds {
        if seed >= n || visited[seed] {
            continue;
        }
        visited[seed] = true;
        queue.push_back(seed);
        while let Some(u) = queue.pop_front() {
            for &(v, e) in g.adjacency(u) {
                if !visited[v] {
                    visited[v] = true;
                    parent[v] = Some((u, e));
                    queue.push_back(v);
                }
            }
        }
    }
    forest_from_parents(g, parent)
}

/// Draws a spanning tree uniformly at random over all spanning trees of a
/// connected graph, by loop-erased random walks (Wilson's algorithm).
/// The tree is rooted at node 0.
pub fn wilson_random_spanning_tree<R: Rng + ?Sized>(
    g: &SignedGraph,
    rng: &mut R,
) -> Result<RootedSpanningForest, GraphError> {
    let n = g.node_count();
    if n == 0 {
        return Ok(forest_from_parents(g, Vec::new()));
    }
    if !g.is_connected() {
        return Err(GraphError::Disconnected);
    }
    let mut in_tree = vec![false; n];
    let mut next: Vec<Option<(NodeId, EdgeId)>> = vec![None; n];
    in_tree[0] = true;
    for start in 0..n {
        let mut u = start;
        while !in_tree[u] {
            let nbrs = g.adjacency(u);
            let &(v, e) = &nbrs[rng.random_range(0..nbrs.len())];
            next[u] = Some((v, e));
            u = v;
        }
        let mut u = start;
        while !in_tree[u] {
            in_tree[u] = true;
            u = next[u].expect("walked node has a successor").0;
        }
    }
    next[0] = None;
    Ok(forest_from_parents(g, next))
}

/// The unique path between two nodes of one tree component, as ordered edge
/// ids from `i` to `j`. Empty when `i == j`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TreePath {
    pub from: NodeId,
    pub to: NodeId,
    pub edges: Vec<EdgeId>,
}

impl TreePath {
    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }
}

/// Extracts the unique tree path between `i` and `j` by lifting both
/// endpoints to their lowest common ancestor.
pub fn tree_path(t: &RootedSpanningForest, i: NodeId, j: NodeId) -> Result<TreePath, GraphError> {
    if t.root_of(i) != t.root_of(j) {
        return Err(GraphError::DifferentComponents(i, j));
    }
    let mut up_i = Vec::new();
    let mut up_j = Vec::new();
    let (mut a, mut b) = (i, j);
    while t.depth(a) > t.depth(b) {
        let (p, e) = t.parent(a).expect("deeper node has a parent");
        up_i.push(e);
        a = p;
    }
    while t.depth(b) > t.depth(a) {
        let (p, e) = t.parent(b).expect("deeper node has a parent");
        up_j.push(e);
        b = p;
    }
    while a != b {
        let (pa, ea) = t.parent(a).expect("non-ancestor has a parent");
        let (pb, eb) = t.parent(b).expect("non-ancestor has a parent");
        up_i.push(ea);
        up_j.push(eb);
        a = pa;
        b = pb;
    }
    up_j.reverse();
    up_i.extend(up_j);
    Ok(TreePath {
        from: i,
        to: j,
        edges: up_i,
    })
}

/// Product of edge signs along the tree path between `i` and `j`, in O(1)
/// via parity-to-root cancellation.
pub fn path_sign_product(
    t: &RootedSpanningForest,
    i: NodeId,
    j: NodeId,
) -> Result<Sign, GraphError> {
    if t.root_of(i) != t.root_of(j) {
        return Err(GraphError::DifferentComponents(i, j));
    }
    Ok(t.parity(i) * t.parity(j))
}

/// Component labeling of the whole graph.
pub fn connected_components(g: &SignedGraph) -> Partition {
    connected_components_filtered(g, |_| true)
}

/// Component labeling under the subgraph of edges accepted by `keep`.
/// Component ids are dense, numbered by smallest contained node.
pub fn connected_components_filtered<F: FnMut(EdgeId) -> bool>(
    g: &SignedGraph,
    keep: F,
) -> Partition {
    let n = g.node_count();
    let keep_edge: Vec<bool> = (0..g.edge_count()).map(keep).collect();
    let mut label = vec![usize::MAX; n];
    let mut count = 0;
    let mut stack = Vec::new();
    for start in 0..n {
        if label[start] != usize::MAX {
            continue;
        }
        label[start] = count;
        stack.push(start);
        while let Some(u) = stack.pop() {
            for &(v, e) in g.adjacency(u) {
                if keep_edge[e] && label[v] == usize::MAX {
                    label[v] = count;
                    stack.push(v);
                }
            }
        }
        count += 1;
    }
    Partition {
        cluster: label,
        cluster_count: count,
    }
}
