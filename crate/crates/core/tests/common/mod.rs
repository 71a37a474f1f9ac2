//! Independent brute-force oracles and shared helpers for the integration
//! and acceptance suites. These deliberately avoid the library's enumeration
//! strategies: no pruning, no Gray codes, full scans only.

#![allow(dead_code)]

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use linksign::cover::{CircuitCover, EpochRecord, RunRecord};
use linksign::graph::{EdgeId, NodeId, Sign, SignedGraph, TwoClustering};

/// Minimum partition cost by plain recursive enumeration of all set
/// partitions, cost recomputed from scratch per partition.
pub fn naive_delta(g: &SignedGraph) -> usize {
    fn cost(g: &SignedGraph, labels: &[usize]) -> usize {
        g.edges()
            .iter()
            .filter(|e| (labels[e.u] == labels[e.v]) == e.sign.is_negative())
            .count()
    }
    fn recurse(g: &SignedGraph, labels: &mut Vec<usize>, blocks: usize, best: &mut usize) {
        if labels.len() == g.node_count() {
            *best = (*best).min(cost(g, labels));
            return;
        }
        for b in 0..=blocks {
            labels.push(b);
            recurse(g, labels, blocks.max(b + 1), best);
            labels.pop();
        }
    }
    if g.node_count() == 0 {
        return 0;
    }
    let mut best = usize::MAX;
    recurse(g, &mut vec![0], 1, &mut best);
    best
}

/// Minimum partition cost restricted to a training edge set, same plain
/// enumeration.
pub fn naive_restricted_delta(g: &SignedGraph, training: &[EdgeId]) -> usize {
    fn cost(g: &SignedGraph, training: &[EdgeId], labels: &[usize]) -> usize {
        training
            .iter()
            .filter(|&&id| {
                let e = g.edge(id);
                (labels[e.u] == labels[e.v]) == e.sign.is_negative()
            })
            .count()
    }
    fn recurse(
        g: &SignedGraph,
        training: &[EdgeId],
        labels: &mut Vec<usize>,
        blocks: usize,
        best: &mut usize,
    ) {
        if labels.len() == g.node_count() {
            *best = (*best).min(cost(g, training, labels));
            return;
        }
        for b in 0..=blocks {
            labels.push(b);
            recurse(g, training, labels, blocks.max(b + 1), best);
            labels.pop();
        }
    }
    if g.node_count() == 0 {
        return 0;
    }
    let mut best = usize::MAX;
    recurse(g, training, &mut vec![0], 1, &mut best);
    best
}

/// Minimum two-cluster cost over all 2^n side assignments, full scans.
pub fn naive_delta2(g: &SignedGraph) -> usize {
    let n = g.node_count();
    if n == 0 {
        return 0;
    }
    let mut best = usize::MAX;
    for bits in 0u64..(1 << n) {
        let cost = g
            .edges()
            .iter()
            .filter(|e| {
                let same = (bits >> e.u & 1) == (bits >> e.v & 1);
                same == e.sign.is_negative()
            })
            .count();
        best = best.min(cost);
    }
    best
}

/// All simple cycles, each as (nodes in order, edge ids in order). Each cycle
/// is reported once, anchored at its smallest node.
pub fn enumerate_simple_cycles(g: &SignedGraph) -> Vec<(Vec<NodeId>, Vec<EdgeId>)> {
    let n = g.node_count();
    let mut cycles = Vec::new();
    let mut path_nodes: Vec<NodeId> = Vec::new();
    let mut path_edges: Vec<EdgeId> = Vec::new();
    let mut on_path = vec![false; n];

    fn extend(
        g: &SignedGraph,
        anchor: NodeId,
        path_nodes: &mut Vec<NodeId>,
        path_edges: &mut Vec<EdgeId>,
        on_path: &mut Vec<bool>,
        cycles: &mut Vec<(Vec<NodeId>, Vec<EdgeId>)>,
    ) {
        let last = *path_nodes.last().unwrap();
        for &(next, eid) in g.adjacency(last) {
            if next == anchor && path_nodes.len() >= 3 {
                // Report each cycle once: fix the rotation by the anchor and
                // the direction by the second node being smaller than the
                // last.
                if path_nodes[1] < *path_nodes.last().unwrap() {
                    let mut edges = path_edges.clone();
                    edges.push(eid);
                    cycles.push((path_nodes.clone(), edges));
                }
                continue;
            }
            if next <= anchor || on_path[next] {
                continue;
            }
            path_nodes.push(next);
            path_edges.push(eid);
            on_path[next] = true;
            extend(g, anchor, path_nodes, path_edges, on_path, cycles);
            on_path[next] = false;
            path_edges.pop();
            path_nodes.pop();
        }
    }

    for anchor in 0..n {
        path_nodes.push(anchor);
        on_path[anchor] = true;
        extend(
            g,
            anchor,
            &mut path_nodes,
            &mut path_edges,
            &mut on_path,
            &mut cycles,
        );
        on_path[anchor] = false;
        path_nodes.pop();
    }
    cycles
}

/// Simple cycles with exactly one negative edge.
pub fn bad_cycles_exactly_one_negative(g: &SignedGraph) -> Vec<Vec<EdgeId>> {
    enumerate_simple_cycles(g)
        .into_iter()
        .filter_map(|(_, edges)| {
            let negatives = edges.iter().filter(|&&e| g.sign(e).is_negative()).count();
            (negatives == 1).then_some(edges)
        })
        .collect()
}

/// Greedy maximal set of pairwise edge-disjoint bad cycles; its size lower
/// bounds the clustering index.
pub fn greedy_edge_disjoint_bad_cycles(g: &SignedGraph) -> usize {
    let mut used = vec![false; g.edge_count()];
    let mut count = 0;
    for cycle in bad_cycles_exactly_one_negative(g) {
        if cycle.iter().all(|&e| !used[e]) {
            for &e in &cycle {
                used[e] = true;
            }
            count += 1;
        }
    }
    count
}

/// Random connected topology with uniformly random signs.
pub fn random_signed_graph(n: usize, m: usize, rng: &mut ChaCha8Rng) -> SignedGraph {
    let g = linksign::generate::gen_random_connected(n, m, rng).expect("feasible n, m");
    let signs: Vec<Sign> = (0..m)
        .map(|_| {
            if rng.random_bool(0.5) {
                Sign::Plus
            } else {
                Sign::Minus
            }
        })
        .collect();
    g.with_signs(&signs)
}

/// Random connected topology labeled by a random bipartition (balanced).
pub fn random_balanced_graph(n: usize, m: usize, rng: &mut ChaCha8Rng) -> SignedGraph {
    let g = linksign::generate::gen_random_connected(n, m, rng).expect("feasible n, m");
    let sides = linksign::generate::random_bipartition(n, rng);
    linksign::generate::gen_two_cluster_labeling(&g, &sides).graph
}

/// All balanced labelings of a topology: one per bipartition with node 0
/// pinned (for connected graphs these are exactly the distinct labelings
/// with a zero two-cluster index).
pub fn all_balanced_labelings(g: &SignedGraph) -> Vec<SignedGraph> {
    let n = g.node_count();
    (0u64..(1 << (n - 1)))
        .map(|bits| {
            let sides: Vec<Sign> = (0..n)
                .map(|v| {
                    if v > 0 && bits >> (v - 1) & 1 == 1 {
                        Sign::Minus
                    } else {
                        Sign::Plus
                    }
                })
                .collect();
            let x = TwoClustering::new(sides);
            linksign::generate::gen_two_cluster_labeling(g, &x).graph
        })
        .collect()
}

/// All 2^|E| labelings of a topology.
pub fn all_labelings(g: &SignedGraph) -> Vec<SignedGraph> {
    let m = g.edge_count();
    (0u64..(1 << m))
        .map(|bits| {
            let signs: Vec<Sign> = (0..m)
                .map(|e| {
                    if bits >> e & 1 == 1 {
                        Sign::Minus
                    } else {
                        Sign::Plus
                    }
                })
                .collect();
            g.with_signs(&signs)
        })
        .collect()
}

/// Exhaustively recomputes every cut of one epoch and checks the
/// tree-partition postconditions:
///   (i) every node of the detached subtree other than its root has cut
///       at most theta;
///  (ii) the detached root's cut is at least theta, unless the whole working
///       tree was returned, in which case (i) holds for every active node.
///
/// Cuts count the edges of the run's own graph only (the full algorithm
/// hands each spanning-tree run one batch component).
pub fn check_epoch_postconditions(
    g: &SignedGraph,
    run: &RunRecord,
    ep: &EpochRecord,
) -> Result<(), String> {
    let n = g.node_count();
    let mut active = vec![false; n];
    for &v in &ep.active_nodes {
        active[v] = true;
    }
    let mut is_tree = vec![false; g.edge_count()];
    for &e in &run.tree_edges {
        is_tree[e] = true;
    }
    // Rebuild the working tree: BFS from the run root over active tree edges.
    let mut parent = vec![usize::MAX; n];
    let mut order = vec![run.root];
    let mut seen = vec![false; n];
    seen[run.root] = true;
    let mut head = 0;
    while head < order.len() {
        let u = order[head];
        head += 1;
        for &(v, e) in g.adjacency(u) {
            if is_tree[e] && active[v] && !seen[v] {
                seen[v] = true;
                parent[v] = u;
                order.push(v);
            }
        }
    }
    for &v in &ep.active_nodes {
        if !seen[v] {
            return Err(format!("active node {v} unreachable from the run root"));
        }
    }

    // Membership: walks parent pointers, oblivious to the implementation's
    // subtree bookkeeping.
    let in_subtree_of = |v: NodeId, u: NodeId| -> bool {
        let mut cur = u;
        loop {
            if cur == v {
                return true;
            }
            if cur == run.root || parent[cur] == usize::MAX {
                return false;
            }
            cur = parent[cur];
        }
    };

    let cut_of = |v: NodeId| -> usize {
        run.graph_edges
            .iter()
            .filter(|&&id| {
                let e = g.edge(id);
                !is_tree[id]
                    && active[e.u]
                    && active[e.v]
                    && (in_subtree_of(v, e.u) != in_subtree_of(v, e.v))
            })
            .count()
    };

    // The recorded subtree must be exactly the nodes below its root.
    let recorded: std::collections::BTreeSet<NodeId> = ep.subtree_nodes.iter().copied().collect();
    let actual: std::collections::BTreeSet<NodeId> = ep
        .active_nodes
        .iter()
        .copied()
        .filter(|&u| in_subtree_of(ep.subtree_root, u))
        .collect();
    if recorded != actual {
        return Err(format!(
            "recorded subtree of {} does not match the tree structure",
            ep.subtree_root
        ));
    }

    if ep.subtree_root == run.root {
        for &v in &ep.active_nodes {
            if cut_of(v) > ep.theta {
                return Err(format!(
                    "whole tree returned but node {v} has cut {} > theta {}",
                    cut_of(v),
                    ep.theta
                ));
            }
        }
    } else {
        for &v in &ep.subtree_nodes {
            if v != ep.subtree_root && cut_of(v) > ep.theta {
                return Err(format!(
                    "postcondition (i) violated at {v}: cut {} > theta {}",
                    cut_of(v),
                    ep.theta
                ));
            }
        }
        let root_cut = cut_of(ep.subtree_root);
        if root_cut < ep.theta {
            return Err(format!(
                "postcondition (ii) violated: cut {} < theta {}",
                root_cut, ep.theta
            ));
        }
    }
    Ok(())
}

/// Checks the postconditions of every epoch recorded in a cover.
pub fn check_cover_postconditions(g: &SignedGraph, cover: &CircuitCover) -> Result<(), String> {
    for ep in &cover.epochs {
        check_epoch_postconditions(g, &cover.runs[ep.run], ep)?;
    }
    Ok(())
}

/// Fixed small topologies used by the exhaustive suites.
pub fn small_fixed_graphs() -> Vec<SignedGraph> {
    vec![
        // Triangle.
        SignedGraph::new(3, &[(0, 1, 1), (1, 2, 1), (0, 2, 1)]).unwrap(),
        // Four-cycle with one chord.
        SignedGraph::new(4, &[(0, 1, 1), (1, 2, 1), (2, 3, 1), (3, 0, 1), (0, 2, 1)]).unwrap(),
        // K4.
        SignedGraph::new(
            4,
            &[
                (0, 1, 1),
                (0, 2, 1),
                (0, 3, 1),
                (1, 2, 1),
                (1, 3, 1),
                (2, 3, 1),
            ],
        )
        .unwrap(),
        // Two triangles sharing a node.
        SignedGraph::new(
            5,
            &[
                (0, 1, 1),
                (1, 2, 1),
                (0, 2, 1),
                (2, 3, 1),
                (3, 4, 1),
                (2, 4, 1),
            ],
        )
        .unwrap(),
        // Wheel: hub 0 over a 4-cycle.
        SignedGraph::new(
            5,
            &[
                (0, 1, 1),
                (0, 2, 1),
                (0, 3, 1),
                (0, 4, 1),
                (1, 2, 1),
                (2, 3, 1),
                (3, 4, 1),
                (4, 1, 1),
            ],
        )
        .unwrap(),
    ]
}
