//! Python bindings for the linksign library: signed graphs, the exact
//! clustering oracles, the spectral heuristic, the circuit-covering active
//! learners, the spanning-tree learner, generators, and edge-list I/O.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use linksign::cover::{BatchOrder, SheafPick};
use linksign::graph::Sign;
use linksign::tree_predict::TreeStrategy;

fn value_err<E: std::fmt::Display>(e: E) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn sign_from_i8(s: i8) -> PyResult<Sign> {
    Sign::try_from(s).map_err(value_err)
}

fn parse_tree(tree: &str) -> PyResult<TreeStrategy> {
    match tree {
        "bfs" => Ok(TreeStrategy::Bfs),
        "wilson" => Ok(TreeStrategy::Wilson),
        "best-of-k" => Ok(TreeStrategy::BestOfK(
            linksign::tree_predict::DEFAULT_BEST_OF_K,
        )),
        other => Err(PyValueError::new_err(format!(
            "unknown tree strategy `{other}` (expected bfs, wilson, best-of-k)"
        ))),
    }
}

fn parse_pick(pick: &str) -> PyResult<SheafPick> {
    match pick {
        "first" => Ok(SheafPick::First),
        "random" => Ok(SheafPick::Random),
        other => Err(PyValueError::new_err(format!(
            "unknown sheaf pick `{other}` (expected first, random)"
        ))),
    }
}

/// An undirected simple graph with ±1 edge labels.
#[pyclass(name = "SignedGraph", skip_from_py_object)]
#[derive(Clone)]
struct PySignedGraph {
    inner: linksign::SignedGraph,
}

#[pymethods]
impl PySignedGraph {
    #[new]
    fn new(node_count: usize, edges: Vec<(usize, usize, i8)>) -> PyResult<Self> {
        let inner = linksign::SignedGraph::new(node_count, &edges).map_err(value_err)?;
        Ok(PySignedGraph { inner })
    }

    fn node_count(&self) -> usize {
        self.inner.node_count()
    }

    fn edge_count(&self) -> usize {
        self.inner.edge_count()
    }

    /// Edges as `(u, v, sign)` triples in stored order.
    fn edges(&self) -> Vec<(usize, usize, i8)> {
        self.inner
            .edges()
            .iter()
            .map(|e| (e.u, e.v, e.sign.as_i8()))
            .collect()
    }

    /// Copy with the listed edges' signs flipped.
    fn with_flipped(&self, flips: Vec<usize>) -> PyResult<Self> {
        for &e in &flips {
            self.inner.check_edge_id(e).map_err(value_err)?;
        }
        Ok(PySignedGraph {
            inner: self.inner.with_flipped(&flips),
        })
    }

    /// Copy with all signs replaced.
    fn with_signs(&self, signs: Vec<i8>) -> PyResult<Self> {
        if signs.len() != self.inner.edge_count() {
            return Err(PyValueError::new_err("one sign per edge required"));
        }
        let signs: Vec<Sign> = signs
            .into_iter()
            .map(sign_from_i8)
            .collect::<PyResult<_>>()?;
        Ok(PySignedGraph {
            inner: self.inner.with_signs(&signs),
        })
    }

    fn is_connected(&self) -> bool {
        self.inner.is_connected()
    }

    fn __repr__(&self) -> String {
        format!(
            "SignedGraph(nodes={}, edges={})",
            self.inner.node_count(),
            self.inner.edge_count()
        )
    }
}

/// A circuit cover: query/test split, circuits, and the load ledger.
#[pyclass(name = "CircuitCover")]
struct PyCircuitCover {
    inner: linksign::CircuitCover,
}

#[pymethods]
impl PyCircuitCover {
    #[getter]
    fn query_set(&self) -> Vec<usize> {
        self.inner.query_set.clone()
    }

    #[getter]
    fn test_set(&self) -> Vec<usize> {
        self.inner.test_set.clone()
    }

    #[getter]
    fn load(&self) -> Vec<usize> {
        self.inner.load.clone()
    }

    /// Circuits as `(test_edge, path)` pairs.
    fn circuits(&self) -> Vec<(usize, Vec<usize>)> {
        self.inner
            .circuits
            .iter()
            .map(|c| (c.test_edge, c.path.clone()))
            .collect()
    }

    /// Predictions as `(edge, sign)` pairs from the queried labels of `g`.
    fn predict(&self, g: &PySignedGraph) -> PyResult<Vec<(usize, i8)>> {
        linksign::predict_with_cover(&self.inner, &g.inner)
            .map(|p| p.into_iter().map(|(e, s)| (e, s.as_i8())).collect())
            .map_err(value_err)
    }

    fn mistakes(&self, g: &PySignedGraph) -> PyResult<usize> {
        linksign::count_mistakes(&self.inner, &g.inner).map_err(value_err)
    }

    /// Sum of loads over a flip set: the deterministic mistake bound.
    fn flip_load_bound(&self, flips: Vec<usize>) -> usize {
        linksign::flip_load_bound(&self.inner, &flips)
    }

    /// Structural violations (empty when the cover is sound).
    fn verify(&self, g: &PySignedGraph) -> Vec<String> {
        linksign::verify_cover(&self.inner, &g.inner)
            .iter()
            .map(|v| v.to_string())
            .collect()
    }

    /// Ledger statistics as a dict.
    fn stats<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, pyo3::types::PyDict>> {
        let stats = linksign::cover_stats(&self.inner);
        let dict = pyo3::types::PyDict::new(py);
        dict.set_item("query_count", stats.query_count)?;
        dict.set_item("test_count", stats.test_count)?;
        dict.set_item("max_load", stats.max_load)?;
        dict.set_item("mean_load", stats.mean_load)?;
        dict.set_item("load_histogram", stats.load_histogram)?;
        dict.set_item("ratio_excluding_tree", stats.ratio_excluding_tree)?;
        dict.set_item("ratio_overall", stats.ratio_overall)?;
        Ok(dict)
    }

    fn __repr__(&self) -> String {
        format!(
            "CircuitCover(queries={}, tests={}, circuits={})",
            self.inner.query_count(),
            self.inner.test_count(),
            self.inner.circuits.len()
        )
    }
}

/// Exact correlation clustering index with an optimal partition.
#[pyfunction]
fn delta_exact(g: &PySignedGraph) -> PyResult<(usize, Vec<usize>)> {
    let r = linksign::delta_exact(&g.inner).map_err(value_err)?;
    Ok((r.cost, r.witness.labels().to_vec()))
}

/// Exact two-cluster index with an optimal side assignment.
#[pyfunction]
fn delta2_exact(g: &PySignedGraph) -> PyResult<(usize, Vec<i8>)> {
    let r = linksign::delta2_exact(&g.inner).map_err(value_err)?;
    Ok((
        r.cost,
        r.witness.sides().iter().map(|s| s.as_i8()).collect(),
    ))
}

/// `(cycle nodes, cycle edges, negative edge count)`.
type PyWitness = (Vec<usize>, Vec<usize>, usize);
/// `(edge, sign)` prediction pairs.
type PyPredictions = Vec<(usize, i8)>;

fn witness_to_py(w: Option<linksign::BadCycleWitness>) -> Option<PyWitness> {
    w.map(|w| (w.nodes, w.edges, w.negative_count))
}

/// Two-cluster balance test; on imbalance also returns an odd-negative
/// cycle as `(nodes, edges, negative_count)`.
#[pyfunction]
fn is_two_balanced(g: &PySignedGraph) -> (bool, Option<PyWitness>) {
    let (ok, w) = linksign::is_two_balanced(&g.inner);
    (ok, witness_to_py(w))
}

/// Weak balance test (zero unrestricted index); on imbalance also returns a
/// one-negative cycle.
#[pyfunction]
fn is_weakly_balanced(g: &PySignedGraph) -> (bool, Option<PyWitness>) {
    let (ok, w) = linksign::is_weakly_balanced(&g.inner);
    (ok, witness_to_py(w))
}

/// Violation count of a node partition, optionally restricted to an edge
/// subset.
#[pyfunction]
#[pyo3(signature = (g, labels, edge_subset=None))]
fn partition_cost(
    g: &PySignedGraph,
    labels: Vec<usize>,
    edge_subset: Option<Vec<usize>>,
) -> PyResult<usize> {
    if labels.len() != g.inner.node_count() {
        return Err(PyValueError::new_err("one label per node required"));
    }
    let partition = linksign::Partition::from_labels(&labels);
    Ok(linksign::partition_cost(
        &g.inner,
        &partition,
        edge_subset.as_deref(),
    ))
}

/// Exact minimizer of the violation count over a training edge set.
#[pyfunction]
fn erm_partition(g: &PySignedGraph, training: Vec<usize>) -> PyResult<(usize, Vec<usize>)> {
    let r = linksign::erm_partition(&g.inner, &training).map_err(value_err)?;
    Ok((r.cost, r.witness.labels().to_vec()))
}

/// The signed Laplacian D - Y as a dense row-major matrix.
#[pyfunction]
fn signed_laplacian(g: &PySignedGraph) -> Vec<Vec<f64>> {
    let l = linksign::signed_laplacian(&g.inner);
    l.matrix().rows().into_iter().map(|r| r.to_vec()).collect()
}

/// Smallest eigenpair of the signed Laplacian: `(value, vector, residual)`.
#[pyfunction]
#[pyo3(signature = (g, tol=1e-9, max_iter=300))]
fn min_eigenpair(g: &PySignedGraph, tol: f64, max_iter: usize) -> PyResult<(f64, Vec<f64>, f64)> {
    let l = linksign::signed_laplacian(&g.inner);
    let r = linksign::min_eigenpair(&l, tol, max_iter).map_err(value_err)?;
    Ok((r.value, r.vector.to_vec(), r.residual))
}

/// Exact minimum of the ±1 quadratic form (four times the two-cluster
/// index) and a minimizing assignment.
#[pyfunction]
fn boolean_min_quadratic(g: &PySignedGraph) -> PyResult<(i64, Vec<i8>)> {
    let (v, x) = linksign::boolean_min_quadratic(&g.inner).map_err(value_err)?;
    Ok((v, x.sides().iter().map(|s| s.as_i8()).collect()))
}

/// The least-eigenvalue heuristic: train on the listed edges, classify the
/// rest. Returns `(predictions, sides)`.
#[pyfunction]
#[pyo3(signature = (g, training, tol=1e-9, max_iter=300))]
fn least_eigen_classifier(
    g: &PySignedGraph,
    training: Vec<usize>,
    tol: f64,
    max_iter: usize,
) -> PyResult<(PyPredictions, Vec<i8>)> {
    let r =
        linksign::least_eigen_classifier(&g.inner, &training, tol, max_iter).map_err(value_err)?;
    Ok((
        r.predictions
            .into_iter()
            .map(|(e, s)| (e, s.as_i8()))
            .collect(),
        r.sides.sides().iter().map(|s| s.as_i8()).collect(),
    ))
}

/// The simplified constrained circuit covering classifier.
#[pyfunction]
#[pyo3(signature = (g, rho, theta, tree="bfs", pick="first", seed=0))]
fn scccc(
    g: &PySignedGraph,
    rho: usize,
    theta: usize,
    tree: &str,
    pick: &str,
    seed: u64,
) -> PyResult<PyCircuitCover> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cover = linksign::scccc(
        &g.inner,
        rho,
        theta,
        parse_tree(tree)?,
        parse_pick(pick)?,
        &mut rng,
    )
    .map_err(value_err)?;
    Ok(PyCircuitCover { inner: cover })
}

/// The full constrained circuit covering classifier.
#[pyfunction]
#[pyo3(signature = (g, rho, tree="bfs", pick="first", shuffle_batches=false, seed=0))]
fn cccc(
    g: &PySignedGraph,
    rho: usize,
    tree: &str,
    pick: &str,
    shuffle_batches: bool,
    seed: u64,
) -> PyResult<PyCircuitCover> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let order = if shuffle_batches {
        BatchOrder::Shuffled
    } else {
        BatchOrder::Stored
    };
    let cover = linksign::cccc(
        &g.inner,
        rho,
        parse_tree(tree)?,
        parse_pick(pick)?,
        order,
        &mut rng,
    )
    .map_err(value_err)?;
    Ok(PyCircuitCover { inner: cover })
}

/// One spanning-tree learner run: returns a dict with the queried edges,
/// predictions, mistake count, and the exact average stretch.
#[pyfunction]
#[pyo3(signature = (g, tree="bfs", seed=0))]
fn tree_learner_run<'py>(
    py: Python<'py>,
    g: &PySignedGraph,
    tree: &str,
    seed: u64,
) -> PyResult<Bound<'py, pyo3::types::PyDict>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let run =
        linksign::tree_learner_run(&g.inner, parse_tree(tree)?, &mut rng).map_err(value_err)?;
    let stretch = linksign::average_stretch(&run.forest, &g.inner);
    let dict = pyo3::types::PyDict::new(py);
    dict.set_item("query_edges", run.query_edges.clone())?;
    dict.set_item(
        "predictions",
        run.predictions
            .iter()
            .map(|&(e, s)| (e, s.as_i8()))
            .collect::<Vec<_>>(),
    )?;
    dict.set_item("mistakes", run.mistakes)?;
    dict.set_item("average_stretch", (*stretch.numer(), *stretch.denom()))?;
    Ok(dict)
}

/// The literal right-hand side of the deterministic flip bound for the tree
/// drawn by the given strategy and seed.
#[pyfunction]
#[pyo3(signature = (g, flips, tree="bfs", seed=0))]
fn flip_bound_rhs(g: &PySignedGraph, flips: Vec<usize>, tree: &str, seed: u64) -> PyResult<usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let forest =
        linksign::build_spanning_tree(&g.inner, parse_tree(tree)?, &mut rng).map_err(value_err)?;
    Ok(linksign::flip_bound_rhs(&forest, &g.inner, &flips))
}

/// Random connected all-positive topology.
#[pyfunction]
fn gen_random_connected(n: usize, m: usize, seed: u64) -> PyResult<PySignedGraph> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g = linksign::gen_random_connected(n, m, &mut rng).map_err(value_err)?;
    Ok(PySignedGraph { inner: g })
}

/// Balanced labeling induced by the given ±1 sides.
#[pyfunction]
fn gen_two_cluster_labeling(g: &PySignedGraph, sides: Vec<i8>) -> PyResult<PySignedGraph> {
    if sides.len() != g.inner.node_count() {
        return Err(PyValueError::new_err("one side per node required"));
    }
    let sides: Vec<Sign> = sides
        .into_iter()
        .map(sign_from_i8)
        .collect::<PyResult<_>>()?;
    let inst = linksign::gen_two_cluster_labeling(&g.inner, &linksign::TwoClustering::new(sides));
    Ok(PySignedGraph { inner: inst.graph })
}

/// Independent flips at rate `p`; returns `(graph, flipped_edges)`.
#[pyfunction]
fn gen_p_random(g: &PySignedGraph, p: f64, seed: u64) -> PyResult<(PySignedGraph, Vec<usize>)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let base = linksign::LabeledInstance {
        graph: g.inner.clone(),
        provenance: Default::default(),
    };
    let inst = linksign::gen_p_random(&base, p, &mut rng).map_err(value_err)?;
    let flips = inst.provenance.planted.flips.clone().unwrap_or_default();
    Ok((PySignedGraph { inner: inst.graph }, flips))
}

/// Clique with a planted clustering index; returns `(graph, triangles)`.
#[pyfunction]
fn gen_clique_delta(n: usize, k: usize, seed: u64) -> PyResult<(PySignedGraph, Vec<[usize; 3]>)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let inst = linksign::gen_clique_delta(n, k, &mut rng).map_err(value_err)?;
    let triangles = inst
        .provenance
        .planted
        .triangles
        .clone()
        .unwrap_or_default();
    Ok((PySignedGraph { inner: inst.graph }, triangles))
}

/// All-positive labeling with a random ±1 pool; returns `(graph, pool)`.
#[pyfunction]
fn gen_active_lowerbound_labeling(
    g: &PySignedGraph,
    k: usize,
    seed: u64,
) -> PyResult<(PySignedGraph, Vec<usize>)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let inst =
        linksign::gen_active_lowerbound_labeling(&g.inner, k, &mut rng).map_err(value_err)?;
    let pool = inst.provenance.planted.pool.clone().unwrap_or_default();
    Ok((PySignedGraph { inner: inst.graph }, pool))
}

/// Loads an edge list; returns `(graph, token_mapping)`.
#[pyfunction]
fn load_edge_list(path: &str) -> PyResult<(PySignedGraph, Vec<String>)> {
    let (g, mapping) = linksign::load_edge_list(path).map_err(value_err)?;
    Ok((PySignedGraph { inner: g }, mapping))
}

/// Saves the graph as an edge list with decimal node tokens.
#[pyfunction]
fn save_edge_list(g: &PySignedGraph, path: &str) -> PyResult<()> {
    linksign::save_edge_list(&g.inner, path).map_err(value_err)
}

/// Weighted majority over the halving experts on a fixed edge order.
/// Returns a dict with the mistake count and the per-expert mistakes.
#[pyfunction]
#[pyo3(signature = (g, order=None, beta=0.5))]
fn weighted_majority_run<'py>(
    py: Python<'py>,
    g: &PySignedGraph,
    order: Option<Vec<usize>>,
    beta: f64,
) -> PyResult<Bound<'py, pyo3::types::PyDict>> {
    let table = linksign::build_version_space_table(&g.inner).map_err(value_err)?;
    let order = order.unwrap_or_else(|| (0..g.inner.edge_count()).collect());
    let (run, per_expert) = linksign::weighted_majority_run(&g.inner, &table, &order, beta);
    let dict = pyo3::types::PyDict::new(py);
    dict.set_item("mistakes", run.mistakes)?;
    dict.set_item("expert_mistakes", per_expert)?;
    dict.set_item(
        "steps",
        run.steps
            .iter()
            .map(|s| (s.edge, s.prediction.as_i8(), s.truth.as_i8(), s.mistake))
            .collect::<Vec<_>>(),
    )?;
    Ok(dict)
}

/// Runs a learner against the lower-bound adversary. Returns a dict with
/// the mistake count, the forced floor `|V| - 1 + k`, and the final index
/// (when small enough to verify exactly).
#[pyfunction]
#[pyo3(signature = (g, k, learner="wm", beta=0.5))]
fn adversary_run<'py>(
    py: Python<'py>,
    g: &PySignedGraph,
    k: usize,
    learner: &str,
    beta: f64,
) -> PyResult<Bound<'py, pyo3::types::PyDict>> {
    use linksign::online::{
        graph_with_labels, run_online, ConstantLearner, OnlineTreeLearner, TreePlusKAdversary,
        WeightedMajorityLearner,
    };
    let table = match learner {
        "wm" => Some(linksign::build_version_space_table(&g.inner).map_err(value_err)?),
        _ => None,
    };
    let mut adversary = TreePlusKAdversary::new(&g.inner, k).map_err(value_err)?;
    let run = match learner {
        "wm" => {
            let mut l = WeightedMajorityLearner::new(table.as_ref().unwrap(), beta);
            run_online(&mut l, &mut adversary)
        }
        "tree" => {
            let mut l = OnlineTreeLearner::new(&g.inner);
            run_online(&mut l, &mut adversary)
        }
        "constant" => {
            let mut l = ConstantLearner(Sign::Plus);
            run_online(&mut l, &mut adversary)
        }
        other => {
            return Err(PyValueError::new_err(format!(
                "unknown learner `{other}` (expected wm, tree, constant)"
            )))
        }
    };
    let final_g = graph_with_labels(&g.inner, &adversary.final_labeling());
    let final_delta = (final_g.node_count() <= linksign::oracle::DEFAULT_DELTA_NODE_LIMIT)
        .then(|| linksign::delta_exact(&final_g).map(|c| c.cost))
        .transpose()
        .map_err(value_err)?;
    let dict = pyo3::types::PyDict::new(py);
    dict.set_item("mistakes", run.mistakes)?;
    dict.set_item("forced", g.inner.node_count() - 1 + k)?;
    dict.set_item("final_delta", final_delta)?;
    Ok(dict)
}

#[pymodule]
fn linksign_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PySignedGraph>()?;
    m.add_class::<PyCircuitCover>()?;
    m.add_function(wrap_pyfunction!(delta_exact, m)?)?;
    m.add_function(wrap_pyfunction!(delta2_exact, m)?)?;
    m.add_function(wrap_pyfunction!(is_two_balanced, m)?)?;
    m.add_function(wrap_pyfunction!(is_weakly_balanced, m)?)?;
    m.add_function(wrap_pyfunction!(partition_cost, m)?)?;
    m.add_function(wrap_pyfunction!(erm_partition, m)?)?;
    m.add_function(wrap_pyfunction!(signed_laplacian, m)?)?;
    m.add_function(wrap_pyfunction!(min_eigenpair, m)?)?;
    m.add_function(wrap_pyfunction!(boolean_min_quadratic, m)?)?;
    m.add_function(wrap_pyfunction!(least_eigen_classifier, m)?)?;
    m.add_function(wrap_pyfunction!(scccc, m)?)?;
    m.add_function(wrap_pyfunction!(cccc, m)?)?;
    m.add_function(wrap_pyfunction!(tree_learner_run, m)?)?;
    m.add_function(wrap_pyfunction!(flip_bound_rhs, m)?)?;
    m.add_function(wrap_pyfunction!(gen_random_connected, m)?)?;
    m.add_function(wrap_pyfunction!(gen_two_cluster_labeling, m)?)?;
    m.add_function(wrap_pyfunction!(gen_p_random, m)?)?;
    m.add_function(wrap_pyfunction!(gen_clique_delta, m)?)?;
    m.add_function(wrap_pyfunction!(gen_active_lowerbound_labeling, m)?)?;
    m.add_function(wrap_pyfunction!(load_edge_list, m)?)?;
    m.add_function(wrap_pyfunction!(save_edge_list, m)?)?;
    m.add_function(wrap_pyfunction!(weighted_majority_run, m)?)?;
    m.add_function(wrap_pyfunction!(adversary_run, m)?)?;
    Ok(())
}
