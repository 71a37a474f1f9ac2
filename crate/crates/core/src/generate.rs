//! Instance generators: planted two-cluster labelings, probabilistic flips,
//! cliques with a prescribed clustering index via edge-disjoint triangle
//! packing, and the randomized pool labeling behind the active lower bound.

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{EdgeId, NodeId, Sign, SignedGraph, TwoClustering};

#[derive(Debug, Error, PartialEq)]
pub enum GenError {
    #[error("k = {k} exceeds the feasible bound {bound} for n = {n}")]
    KOutOfRange { k: usize, bound: usize, n: usize },
    #[error("k = {k} exceeds the edge count {edges}")]
    KTooLarge { k: usize, edges: usize },
    #[error("triangle packing failed after {retries} retries (n = {n}, k = {k})")]
    PackingFailed { n: usize, k: usize, retries: usize },
    #[error("edge count {m} out of range [{min}, {max}] for n = {n}")]
    EdgeCountOutOfRange {
        m: usize,
        min: usize,
        max: usize,
        n: usize,
    },
    #[error("flip probability {0} must lie in [0, 1)")]
    BadProbability(f64),
}

/// Planted structure recorded by a generator, re-checkable against the
/// oracles.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Planted {
    /// Side assignment the labels were derived from.
    pub bipartition: Option<Vec<i8>>,
    /// Edges flipped away from the balanced base labeling.
    pub flips: Option<Vec<EdgeId>>,
    /// Edge-disjoint triangles, one negative edge each.
    pub triangles: Option<Vec<[NodeId; 3]>>,
    /// Randomly signed edge pool of the active lower-bound labeling.
    pub pool: Option<Vec<EdgeId>>,
}

/// Where an instance came from: generator name, parameters, seed, and the
/// planted structure.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub generator: String,
    pub params: Vec<(String, String)>,
    pub seed: Option<u64>,
    pub planted: Planted,
}

/// A labeled graph together with its provenance record.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LabeledInstance {
    pub graph: SignedGraph,
    pub provenance: Provenance,
}

/// Labels every edge by the product of its endpoints' sides: positive within
/// a side, negative across. The result is exactly balanced.
pub fn gen_two_cluster_labeling(g: &SignedGraph, sides: &TwoClustering) -> LabeledInstance {
    let signs: Vec<Sign> = g
        .edges()
        .iter()
        .map(|e| sides.induced_sign(e.u, e.v))
        .collect();
    LabeledInstance {
        graph: g.with_signs(&signs),
        provenance: Provenance {
            generator: "two-cluster".into(),
            params: vec![],
            seed: None,
            planted: Planted {
                bipartition: Some(sides.sides().iter().map(|s| s.as_i8()).collect()),
                ..Planted::default()
            },
        },
    }
}

/// Flips each edge of a (balanced) instance independently with probability
/// exactly `p`, recording the flip set.
pub fn gen_p_random<R: Rng + ?Sized>(
    base: &LabeledInstance,
    p: f64,
    rng: &mut R,
) -> Result<LabeledInstance, GenError> {
    if !(0.0..1.0).contains(&p) {
        return Err(GenError::BadProbability(p));
    }
    let flips: Vec<EdgeId> = (0..base.graph.edge_count())
        .filter(|_| rng.random_bool(p))
        .collect();
    let mut provenance = base.provenance.clone();
    provenance.generator = format!("{}+p-random", provenance.generator);
    provenance.params.push(("p".into(), p.to_string()));
    provenance.planted.flips = Some(flips.clone());
    Ok(LabeledInstance {
        graph: base.graph.with_flipped(&flips),
        provenance,
    })
}

/// Upper bound of the feasible index range on an n-clique:
/// `(n - 3)(n - 4) / 6`.
pub fn clique_delta_bound(n: usize) -> usize {
    if n < 4 {
        0
    } else {
        (n - 3) * (n - 4) / 6
    }
}

/// All-positive clique on `n` nodes with `k` edge-disjoint triangles given
/// one negative edge each. The triangles are found by seeded greedy packing
/// with retries; each is a bad cycle and they are edge-disjoint, so the
/// clustering index of the result is exactly `k`.
pub fn gen_clique_delta<R: Rng + ?Sized>(
    n: usize,
    k: usize,
    rng: &mut R,
) -> Result<LabeledInstance, GenError> {
    let bound = clique_delta_bound(n);
    if k > bound {
        return Err(GenError::KOutOfRange { k, bound, n });
    }
    let mut raw: Vec<(usize, usize, i8)> = Vec::new();
    for u in 0..n {
        raw.extend(((u + 1)..n).map(|v| (u, v, 1i8)));
    }
    let mut edge_of = vec![vec![usize::MAX; n]; n];
    for (id, &(u, v, _)) in raw.iter().enumerate() {
        edge_of[u][v] = id;
    }

    let mut all_triangles: Vec<[NodeId; 3]> = Vec::new();
    for a in 0..n {
        for b in (a + 1)..n {
            for c in (b + 1)..n {
                all_triangles.push([a, b, c]);
            }
        }
    }

    const RETRIES: usize = 200;
    let mut chosen: Vec<[NodeId; 3]> = Vec::new();
    for _ in 0..RETRIES {
        // Shuffle and take edge-disjoint triangles greedily.
        for i in (1..all_triangles.len()).rev() {
            all_triangles.swap(i, rng.random_range(0..=i));
        }
        let mut used = vec![false; raw.len()];
        chosen.clear();
        for t in &all_triangles {
            if chosen.len() == k {
                break;
            }
            let es = [
                edge_of[t[0]][t[1]],
                edge_of[t[1]][t[2]],
                edge_of[t[0]][t[2]],
            ];
            if es.iter().all(|&e| !used[e]) {
                for &e in &es {
                    used[e] = true;
                }
                chosen.push(*t);
            }
        }
        if chosen.len() == k {
            break;
        }
    }
    if chosen.len() != k {
        return Err(GenError::PackingFailed {
            n,
            k,
            retries: RETRIES,
        });
    }

    for t in &chosen {
        // One edge of each triangle goes negative.
        let es = [
            edge_of[t[0]][t[1]],
            edge_of[t[1]][t[2]],
            edge_of[t[0]][t[2]],
        ];
        let e = es[rng.random_range(0..3)];
        raw[e].2 = -1;
    }
    let graph = SignedGraph::new(n, &raw).expect("clique construction is valid");
    Ok(LabeledInstance {
        graph,
        provenance: Provenance {
            generator: "clique-delta".into(),
            params: vec![("n".into(), n.to_string()), ("k".into(), k.to_string())],
            seed: None,
            planted: Planted {
                triangles: Some(chosen),
                ..Planted::default()
            },
        },
    })
}

/// All edges positive except a pool of `k` edges chosen uniformly at random,
/// whose labels are set uniformly at random. Deleting the pool leaves an
/// all-positive graph, so the two-cluster index is at most `k`.
pub fn gen_active_lowerbound_labeling<R: Rng + ?Sized>(
    g: &SignedGraph,
    k: usize,
    rng: &mut R,
) -> Result<LabeledInstance, GenError> {
    let m = g.edge_count();
    if k > m {
        return Err(GenError::KTooLarge { k, edges: m });
    }
    // Partial Fisher-Yates: uniform k-subset of the edges.
    let mut ids: Vec<EdgeId> = (0..m).collect();
    for i in 0..k {
        let j = rng.random_range(i..m);
        ids.swap(i, j);
    }
    let mut pool: Vec<EdgeId> = ids[..k].to_vec();
    pool.sort_unstable();
    let mut signs = vec![Sign::Plus; m];
    for &e in &pool {
        signs[e] = if rng.random_bool(0.5) {
            Sign::Plus
        } else {
            Sign::Minus
        };
    }
    Ok(LabeledInstance {
        graph: g.with_signs(&signs),
        provenance: Provenance {
            generator: "active-lowerbound".into(),
            params: vec![("k".into(), k.to_string())],
            seed: None,
            planted: Planted {
                pool: Some(pool),
                ..Planted::default()
            },
        },
    })
}

/// Random connected all-positive topology: a random spanning tree plus
/// uniformly chosen extra edges. Used as the base graph for the planted
/// generators.
pub fn gen_random_connected<R: Rng + ?Sized>(
    n: usize,
    m: usize,
    rng: &mut R,
) -> Result<SignedGraph, GenError> {
    let max = n * n.saturating_sub(1) / 2;
    let min = n.saturating_sub(1);
    if m < min || m > max {
        return Err(GenError::EdgeCountOutOfRange { m, min, max, n });
    }
    let mut raw: Vec<(usize, usize, i8)> = Vec::with_capacity(m);
    let mut present = std::collections::HashSet::new();
    for v in 1..n {
        let u = rng.random_range(0..v);
        raw.push((u, v, 1));
        present.insert((u, v));
    }
    while raw.len() < m {
        let u = rng.random_range(0..n);
        let v = rng.random_range(0..n);
        if u == v {
            continue;
        }
        let key = (u.min(v), u.max(v));
        if present.insert(key) {
            raw.push((key.0, key.1, 1));
        }
    }
    Ok(SignedGraph::new(n, &raw).expect("generated edges are valid"))
}

/// Uniformly random side per node.
pub fn random_bipartition<R: Rng + ?Sized>(n: usize, rng: &mut R) -> TwoClustering {
    TwoClustering::new(
        (0..n)
            .map(|_| {
                if rng.random_bool(0.5) {
                    Sign::Plus
                } else {
                    Sign::Minus
                }
            })
            .collect(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{delta2_exact, delta_exact};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn two_cluster_all_one_side_is_all_positive() {
        let g = gen_random_connected(6, 9, &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
        let inst = gen_two_cluster_labeling(&g, &TwoClustering::all_plus(6));
        assert!(inst.graph.edges().iter().all(|e| e.sign == Sign::Plus));
    }

    #[test]
    fn two_cluster_k4_split_counts() {
        let mut raw = Vec::new();
        for u in 0..4usize {
            for v in (u + 1)..4 {
                raw.push((u, v, 1i8));
            }
        }
        let g = SignedGraph::new(4, &raw).unwrap();
        let sides = TwoClustering::new(vec![Sign::Plus, Sign::Plus, Sign::Minus, Sign::Minus]);
        let inst = gen_two_cluster_labeling(&g, &sides);
        let negative = inst
            .graph
            .edges()
            .iter()
            .filter(|e| e.sign.is_negative())
            .count();
        assert_eq!(negative, 4);
        assert_eq!(delta2_exact(&inst.graph).unwrap().cost, 0);
    }

    #[test]
    fn p_random_zero_changes_nothing() {
        let g = gen_random_connected(8, 12, &mut ChaCha8Rng::seed_from_u64(2)).unwrap();
        let base = gen_two_cluster_labeling(
            &g,
            &random_bipartition(8, &mut ChaCha8Rng::seed_from_u64(3)),
        );
        let perturbed = gen_p_random(&base, 0.0, &mut ChaCha8Rng::seed_from_u64(4)).unwrap();
        assert_eq!(perturbed.graph, base.graph);
        assert_eq!(perturbed.provenance.planted.flips, Some(vec![]));
    }

    #[test]
    fn p_random_flip_count_is_binomial() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let g = gen_random_connected(200, 10_000, &mut rng).unwrap();
        let base = gen_two_cluster_labeling(&g, &TwoClustering::all_plus(200));
        let perturbed = gen_p_random(&base, 0.5, &mut rng).unwrap();
        let f = perturbed.provenance.planted.flips.unwrap().len() as f64;
        // 5000 ± 3 sqrt(2500)
        assert!((f - 5000.0).abs() <= 150.0, "flips {f}");
    }

    #[test]
    fn p_random_delta2_bounded_by_flips() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for _ in 0..20 {
            let g = gen_random_connected(7, 12, &mut rng).unwrap();
            let base = gen_two_cluster_labeling(&g, &random_bipartition(7, &mut rng));
            let perturbed = gen_p_random(&base, 0.2, &mut rng).unwrap();
            let flips = perturbed.provenance.planted.flips.as_ref().unwrap().len();
            assert!(delta2_exact(&perturbed.graph).unwrap().cost <= flips);
        }
    }

    #[test]
    fn clique_delta_zero_is_all_positive() {
        let inst = gen_clique_delta(7, 0, &mut ChaCha8Rng::seed_from_u64(7)).unwrap();
        assert!(inst.graph.edges().iter().all(|e| e.sign == Sign::Plus));
        assert_eq!(delta_exact(&inst.graph).unwrap().cost, 0);
    }

    #[test]
    fn clique_delta_plants_exact_index() {
        let inst = gen_clique_delta(9, 4, &mut ChaCha8Rng::seed_from_u64(8)).unwrap();
        assert_eq!(delta_exact(&inst.graph).unwrap().cost, 4);
        let triangles = inst.provenance.planted.triangles.unwrap();
        assert_eq!(triangles.len(), 4);
    }

    #[test]
    fn clique_delta_rejects_out_of_range() {
        // Bound for n = 9 is (6)(5)/6 = 5.
        assert_eq!(
            gen_clique_delta(9, 6, &mut ChaCha8Rng::seed_from_u64(9)).unwrap_err(),
            GenError::KOutOfRange {
                k: 6,
                bound: 5,
                n: 9
            }
        );
    }

    #[test]
    fn lowerbound_labeling_bounds_delta2() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let g = gen_random_connected(7, 14, &mut rng).unwrap();
        let inst = gen_active_lowerbound_labeling(&g, 3, &mut rng).unwrap();
        assert!(delta2_exact(&inst.graph).unwrap().cost <= 3);
        assert_eq!(inst.provenance.planted.pool.as_ref().unwrap().len(), 3);

        let zero = gen_active_lowerbound_labeling(&g, 0, &mut rng).unwrap();
        assert!(zero.graph.edges().iter().all(|e| e.sign == Sign::Plus));

        // k = |E| randomizes every label.
        let full = gen_active_lowerbound_labeling(&g, 14, &mut rng).unwrap();
        assert_eq!(
            full.provenance.planted.pool.unwrap(),
            (0..14).collect::<Vec<_>>()
        );

        assert!(gen_active_lowerbound_labeling(&g, 15, &mut rng).is_err());
    }
}
