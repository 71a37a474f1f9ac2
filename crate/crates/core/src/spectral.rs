//! Signed Laplacian, smallest eigenpair, the exact boolean quadratic
//! minimum, and the least-eigenvalue link classifier.

use ndarray::{Array1, Array2};
use thiserror::Error;

use crate::graph::{EdgeId, Sign, SignedGraph, TwoClustering};

/// Node limit for exhaustive ±1 minimization of the quadratic form.
pub const DEFAULT_BOOLEAN_MIN_NODE_LIMIT: usize = 20;

#[derive(Debug, Error)]
pub enum SpectralError {
    #[error("graph has {actual} nodes, exceeds enumeration limit {limit}")]
    SizeLimitExceeded { actual: usize, limit: usize },
    #[error("eigensolver did not converge within {max_iter} sweeps (residual {residual:.3e})")]
    NoConvergence {
        max_iter: usize,
        residual: f64,
        best: EigenResult,
    },
    #[error("tolerance must be positive, got {0}")]
    BadTolerance(f64),
}

/// The signed Laplacian `L = D - Y`: degrees on the diagonal, minus the
/// signed adjacency off it. Positive semidefinite; singular iff balanced.
#[derive(Clone, Debug, PartialEq)]
pub struct SignedLaplacian {
    matrix: Array2<f64>,
}

impl SignedLaplacian {
    pub fn matrix(&self) -> &Array2<f64> {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }
}

/// Builds the signed Laplacian of the whole graph.
pub fn signed_laplacian(g: &SignedGraph) -> SignedLaplacian {
    signed_laplacian_of_edges(g, (0..g.edge_count()).collect::<Vec<_>>().as_slice())
}

/// Builds the signed Laplacian of the subgraph on the given edges; degrees
/// count those edges only.
pub fn signed_laplacian_of_edges(g: &SignedGraph, edges: &[EdgeId]) -> SignedLaplacian {
    let n = g.node_count();
    let mut m = Array2::<f64>::zeros((n, n));
    for &id in edges {
        let e = g.edge(id);
        let y = f64::from(e.sign.as_i8());
        m[[e.u, e.u]] += 1.0;
        m[[e.v, e.v]] += 1.0;
        m[[e.u, e.v]] -= y;
        m[[e.v, e.u]] -= y;
    }
    SignedLaplacian { matrix: m }
}

/// The smallest eigenvalue, a unit eigenvector, and the achieved residual
/// `‖Lv - λv‖`.
#[derive(Clone, Debug)]
pub struct EigenResult {
    pub value: f64,
    pub vector: Array1<f64>,
    pub residual: f64,
}

/// Smallest eigenpair of the signed Laplacian by cyclic Jacobi rotations.
///
/// `max_iter` bounds the number of sweeps. The returned residual satisfies
/// `‖Lv - λv‖ ≤ tol`; otherwise the best iterate is reported inside the
/// error. Deterministic: the eigenvector's largest-magnitude entry is made
/// positive.
pub fn min_eigenpair(
    laplacian: &SignedLaplacian,
    tol: f64,
    max_iter: usize,
) -> Result<EigenResult, SpectralError> {
    if tol <= 0.0 {
        return Err(SpectralError::BadTolerance(tol));
    }
    let n = laplacian.dim();
    if n == 0 {
        return Ok(EigenResult {
            value: 0.0,
            vector: Array1::zeros(0),
            residual: 0.0,
        });
    }
    let mut a = laplacian.matrix.clone();
    let mut v = Array2::<f64>::eye(n);
    // Stop once the off-diagonal mass cannot move any eigenvalue by tol/10.
    let target = (tol / 10.0).max(f64::EPSILON * n as f64);
    let mut converged = false;
    for _ in 0..max_iter.max(1) {
        let mut off = 0.0;
        for p in 0..n {
            for q in (p + 1)..n {
                off += 2.0 * a[[p, q]] * a[[p, q]];
            }
        }
        if off.sqrt() <= target {
            converged = true;
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[[p, q]];
                if apq.abs() <= f64::EPSILON * 1e-2 {
                    continue;
                }
                let theta = (a[[q, q]] - a[[p, p]]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[[k, p]];
                    let akq = a[[k, q]];
                    a[[k, p]] = c * akp - s * akq;
                    a[[k, q]] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[[p, k]];
                    let aqk = a[[q, k]];
                    a[[p, k]] = c * apk - s * aqk;
                    a[[q, k]] = s * apk + c * aqk;
                }
                for k in 0..n {
                    let vkp = v[[k, p]];
                    let vkq = v[[k, q]];
                    v[[k, p]] = c * vkp - s * vkq;
                    v[[k, q]] = s * vkp + c * vkq;
                }
            }
        }
    }
    // Pick the column with the smallest diagonal entry.
    let mut min_idx = 0;
    for k in 1..n {
        if a[[k, k]] < a[[min_idx, min_idx]] {
            min_idx = k;
        }
    }
    let value = a[[min_idx, min_idx]];
    let mut vector: Array1<f64> = v.column(min_idx).to_owned();
    let norm = vector.dot(&vector).sqrt();
    if norm > 0.0 {
        vector.mapv_inplace(|x| x / norm);
    }
    // Canonical orientation: largest-magnitude entry positive.
    let mut lead = 0;
    for k in 1..n {
        if vector[k].abs() > vector[lead].abs() {
            lead = k;
        }
    }
    if vector[lead] < 0.0 {
        vector.mapv_inplace(|x| -x);
    }
    let lv = laplacian.matrix.dot(&vector);
    let residual = (&lv - &(value * &vector)).mapv(|x| x * x).sum().sqrt();
    let result = EigenResult {
        value,
        vector,
        residual,
    };
    if !converged && residual > tol {
        return Err(SpectralError::NoConvergence {
            max_iter,
            residual,
            best: result,
        });
    }
    Ok(result)
}

/// Exact minimum of `xᵀ L x` over `x ∈ {−1,+1}ⁿ`, evaluated directly on the
/// Laplacian matrix (an independent route to four times the two-cluster
/// index). Returns the minimum and a minimizing assignment.
pub fn boolean_min_quadratic(g: &SignedGraph) -> Result<(i64, TwoClustering), SpectralError> {
    boolean_min_quadratic_with_limit(g, DEFAULT_BOOLEAN_MIN_NODE_LIMIT)
}

pub fn boolean_min_quadratic_with_limit(
    g: &SignedGraph,
    limit: usize,
) -> Result<(i64, TwoClustering), SpectralError> {
    let n = g.node_count();
    if n > limit {
        return Err(SpectralError::SizeLimitExceeded { actual: n, limit });
    }
    if n == 0 {
        return Ok((0, TwoClustering::new(Vec::new())));
    }
    // Integer copy of L = D - Y.
    let mut l = vec![vec![0i64; n]; n];
    for e in g.edges() {
        let y = i64::from(e.sign.as_i8());
        l[e.u][e.u] += 1;
        l[e.v][e.v] += 1;
        l[e.u][e.v] -= y;
        l[e.v][e.u] -= y;
    }
    let mut best_val = i64::MAX;
    let mut best_x: Vec<i64> = Vec::new();
    let mut x = vec![1i64; n];
    // Global sign flip leaves the form unchanged, so pin x[0] = +1.
    for bits in 0u64..(1u64 << (n - 1)) {
        for (k, xk) in x.iter_mut().enumerate().skip(1) {
            *xk = if bits >> (k - 1) & 1 == 1 { -1 } else { 1 };
        }
        let mut val = 0i64;
        for (i, row) in l.iter().enumerate() {
            let mut acc = 0i64;
            for (j, &lij) in row.iter().enumerate() {
                acc += lij * x[j];
            }
            val += x[i] * acc;
        }
        if val < best_val {
            best_val = val;
            best_x = x.clone();
        }
    }
    let sides = best_x
        .iter()
        .map(|&s| if s > 0 { Sign::Plus } else { Sign::Minus })
        .collect();
    Ok((best_val, TwoClustering::new(sides)))
}

/// Predictions of the least-eigenvalue heuristic on the non-training edges.
#[derive(Clone, Debug)]
pub struct SpectralPrediction {
    pub sides: TwoClustering,
    pub predictions: Vec<(EdgeId, Sign)>,
}

/// The least-eigenvalue heuristic: build the signed Laplacian from the
/// training edges only, take the eigenvector of the smallest eigenvalue, cut
/// the nodes by component sign, and classify the remaining edges by
/// side-matching.
///
/// Entries with `|v_i| < tol` are placed on the plus side. When the training
/// subgraph does not connect all nodes (including the empty training set),
/// every node lands on the plus side and all test edges are predicted `+1`.
pub fn least_eigen_classifier(
    g: &SignedGraph,
    training_edges: &[EdgeId],
    tol: f64,
    max_iter: usize,
) -> Result<SpectralPrediction, SpectralError> {
    let n = g.node_count();
    let is_training = {
        let mut mask = vec![false; g.edge_count()];
        for &e in training_edges {
            mask[e] = true;
        }
        mask
    };
    let connected = n <= 1
        || crate::graph::connected_components_filtered(g, |e| is_training[e]).cluster_count() == 1;
    let sides = if connected && !training_edges.is_empty() {
        let lap = signed_laplacian_of_edges(g, training_edges);
        let eigen = min_eigenpair(&lap, tol, max_iter)?;
        TwoClustering::new(
            (0..n)
                .map(|i| {
                    if eigen.vector[i] <= -tol {
                        Sign::Minus
                    } else {
                        Sign::Plus
                    }
                })
                .collect(),
        )
    } else {
        TwoClustering::all_plus(n)
    };
    let predictions = (0..g.edge_count())
        .filter(|&e| !is_training[e])
        .map(|e| {
            let edge = g.edge(e);
            (e, sides.induced_sign(edge.u, edge.v))
        })
        .collect();
    Ok(SpectralPrediction { sides, predictions })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::bfs_spanning_forest;
    use crate::oracle::delta2_exact;

    fn triangle(signs: [i8; 3]) -> SignedGraph {
        SignedGraph::new(3, &[(0, 1, signs[0]), (1, 2, signs[1]), (0, 2, signs[2])]).unwrap()
    }

    #[test]
    fn laplacian_of_all_negative_triangle() {
        let g = triangle([-1, -1, -1]);
        let l = signed_laplacian(&g);
        for i in 0..3 {
            assert_eq!(l.matrix()[[i, i]], 2.0);
            for j in 0..3 {
                if i != j {
                    assert_eq!(l.matrix()[[i, j]], 1.0);
                }
            }
        }
    }

    #[test]
    fn laplacian_of_all_positive_triangle_is_standard() {
        let g = triangle([1, 1, 1]);
        let l = signed_laplacian(&g);
        assert_eq!(l.matrix()[[0, 1]], -1.0);
        assert_eq!(l.matrix()[[0, 0]], 2.0);
    }

    #[test]
    fn laplacian_isolated_node_row_is_zero() {
        let g = SignedGraph::new(3, &[(0, 1, 1)]).unwrap();
        let l = signed_laplacian(&g);
        for j in 0..3 {
            assert_eq!(l.matrix()[[2, j]], 0.0);
            assert_eq!(l.matrix()[[j, 2]], 0.0);
        }
    }

    #[test]
    fn min_eigen_all_negative_triangle() {
        // Spectrum of I + J is {1, 1, 4}.
        let g = triangle([-1, -1, -1]);
        let r = min_eigenpair(&signed_laplacian(&g), 1e-9, 100).unwrap();
        assert!((r.value - 1.0).abs() < 1e-9, "value {}", r.value);
        assert!(r.residual <= 1e-9);
    }

    #[test]
    fn min_eigen_balanced_graph_is_zero() {
        let g = triangle([1, 1, 1]);
        let r = min_eigenpair(&signed_laplacian(&g), 1e-9, 100).unwrap();
        assert!(r.value.abs() < 1e-9);
        // Kernel of the ordinary Laplacian is the constant vector.
        let first = r.vector[0];
        for k in 1..3 {
            assert!((r.vector[k] - first).abs() < 1e-7);
        }
    }

    #[test]
    fn boolean_min_matches_four_delta2() {
        let cases = [
            triangle([1, 1, 1]),
            triangle([-1, -1, -1]),
            SignedGraph::new(4, &[(0, 1, -1), (1, 2, 1), (2, 3, 1), (3, 0, 1)]).unwrap(),
        ];
        for g in &cases {
            let (val, witness) = boolean_min_quadratic(g).unwrap();
            let d2 = delta2_exact(g).unwrap();
            assert_eq!(val, 4 * d2.cost as i64);
            assert_eq!(
                crate::oracle::two_clustering_cost(g, &witness) as i64 * 4,
                val
            );
        }
    }

    #[test]
    fn classifier_recovers_balanced_k4_from_tree() {
        // K4 split 2/2: edges within sides positive, across negative.
        let sides = [Sign::Plus, Sign::Plus, Sign::Minus, Sign::Minus];
        let mut edges = Vec::new();
        for u in 0..4usize {
            for v in (u + 1)..4 {
                edges.push((u, v, (sides[u] * sides[v]).as_i8()));
            }
        }
        let g = SignedGraph::new(4, &edges).unwrap();
        let t = bfs_spanning_forest(&g, Some(&[0]));
        let training = t.tree_edges();
        let pred = least_eigen_classifier(&g, &training, 1e-8, 200).unwrap();
        for &(e, s) in &pred.predictions {
            assert_eq!(s, g.sign(e), "edge {e} mispredicted");
        }
    }

    #[test]
    fn classifier_empty_training_predicts_all_plus() {
        let g = triangle([-1, -1, 1]);
        let pred = least_eigen_classifier(&g, &[], 1e-8, 100).unwrap();
        assert_eq!(pred.predictions.len(), 3);
        assert!(pred.predictions.iter().all(|&(_, s)| s == Sign::Plus));
    }

    #[test]
    fn classifier_recovers_balanced_graph_from_connected_training() {
        use rand::{Rng, SeedableRng};
        use rand_chacha::ChaCha8Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        let g = {
            let base = crate::generate::gen_random_connected(10, 30, &mut rng).unwrap();
            let sides = crate::generate::random_bipartition(10, &mut rng);
            crate::generate::gen_two_cluster_labeling(&base, &sides).graph
        };
        // 60% of the edges, grown connected: a spanning tree plus extras.
        let t = bfs_spanning_forest(&g, Some(&[0]));
        let mut training = t.tree_edges();
        let mut in_training = vec![false; g.edge_count()];
        for &e in &training {
            in_training[e] = true;
        }
        while training.len() < 18 {
            let e = rng.random_range(0..g.edge_count());
            if !in_training[e] {
                in_training[e] = true;
                training.push(e);
            }
        }
        let pred = least_eigen_classifier(&g, &training, 1e-8, 300).unwrap();
        for &(e, s) in &pred.predictions {
            assert_eq!(s, g.sign(e), "edge {e} mispredicted");
        }
    }
}
