//! Experiment orchestration: seeded, reproducible runs of the oracles,
//! spectral heuristic, circuit-covering learners, tree learner, and online
//! protocols, with a versioned JSON report.

use std::collections::BTreeMap;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cover::{
    cccc, count_mistakes, cover_stats, flip_load_bound, scccc, verify_cover, BatchOrder,
    CoverError, SheafPick,
};
use crate::generate::LabeledInstance;
use crate::graph::{EdgeId, GraphError, Sign};
use crate::online::{
    build_version_space_table, graph_with_labels, run_online, ConstantLearner,
    FixedOrderEnvironment, HalvingLearner, OnlineError, OnlineLearner, OnlineTreeLearner,
    TreePlusKAdversary, WeightedMajorityLearner,
};
use crate::oracle::{
    delta2_exact, delta_exact, is_two_balanced, is_weakly_balanced, OracleError,
    DEFAULT_DELTA2_NODE_LIMIT, DEFAULT_DELTA_NODE_LIMIT,
};
use crate::spectral::{
    boolean_min_quadratic, least_eigen_classifier, min_eigenpair, signed_laplacian, SpectralError,
    DEFAULT_BOOLEAN_MIN_NODE_LIMIT,
};
use crate::tree_predict::{
    average_stretch, build_spanning_tree, flip_bound_rhs, tree_learner_run_with_tree, TreeStrategy,
};

pub const REPORT_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error(transparent)]
    Cover(#[from] CoverError),
    #[error(transparent)]
    Online(#[from] OnlineError),
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum CoverAlgo {
    Scccc,
    Cccc,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum OnlineLearnerKind {
    WeightedMajority,
    Halving,
    Tree,
    ConstantPlus,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub enum TaskConfig {
    Oracle,
    Spectral {
        train_fraction: f64,
        tol: f64,
        max_iter: usize,
    },
    Cover {
        algo: CoverAlgo,
        rho: usize,
        /// Threshold for the simplified algorithm; defaults to
        /// `ceil(sqrt(|E| - |V| + 1))`.
        theta: Option<usize>,
        tree: TreeStrategy,
        pick: SheafPick,
        batch_order: BatchOrder,
    },
    Tree {
        tree: TreeStrategy,
        /// Per-edge flip probability applied on top of the instance labels.
        p: f64,
    },
    Online {
        learner: OnlineLearnerKind,
        /// Run against the lower-bound adversary with this pool size instead
        /// of the instance labels.
        adversary_k: Option<usize>,
        beta: f64,
    },
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub trials: usize,
    pub task: TaskConfig,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GraphSummary {
    pub nodes: usize,
    pub edges: usize,
    pub negative_edges: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct OracleReport {
    pub delta: Option<usize>,
    pub delta2: Option<usize>,
    pub two_balanced: bool,
    pub weakly_balanced: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SpectralReport {
    pub lambda_min: f64,
    pub residual: f64,
    pub boolean_min: Option<i64>,
    /// `4 * delta2 / n` when the exact index is feasible.
    pub relaxation_upper_bound: Option<f64>,
    pub train_fraction: f64,
    pub training_edges: usize,
    pub test_mistakes: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CoverTrial {
    pub trial: usize,
    pub mistakes: usize,
    pub query_count: usize,
    pub test_count: usize,
    pub max_load: usize,
    pub flip_load_bound: Option<usize>,
    pub verified: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CoverReport {
    pub algo: CoverAlgo,
    pub rho: usize,
    pub theta: Option<usize>,
    pub mean_mistakes: f64,
    pub ratio_excluding_tree: Option<f64>,
    pub ratio_overall: Option<f64>,
    pub scccc_ratio_guarantee: Option<f64>,
    pub cccc_ratio_guarantee: Option<f64>,
    pub max_load: usize,
    pub mean_load: f64,
    pub trials: Vec<CoverTrial>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TreeTrial {
    pub trial: usize,
    pub mistakes: usize,
    /// Flips applied by this trial (on top of the instance labels).
    pub flips: usize,
    /// Deterministic mistake bound for the flips relative to the balanced
    /// base: the trial's flips composed with the instance's planted ones.
    pub flip_bound_rhs: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TreeReport {
    pub p: f64,
    pub mean_mistakes: f64,
    pub average_stretch: f64,
    pub average_stretch_ratio: (u64, u64),
    /// Expectation bound on the mistakes: the sum, over each edge and each
    /// non-tree path edge, of that edge's marginal probability of disagreeing
    /// with the balanced base. Reduces to `p * (|E| + total path length)`
    /// when the instance itself is the base.
    pub expected_mistake_bound: f64,
    pub trials: Vec<TreeTrial>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct OnlineReport {
    pub learner: OnlineLearnerKind,
    pub adversary_k: Option<usize>,
    pub mean_mistakes: f64,
    pub mistakes_per_trial: Vec<usize>,
    /// `|V| - 1 + k` when running against the adversary.
    pub forced_mistakes: Option<usize>,
    /// Oracle-checked index of the adversary's final labeling.
    pub final_delta: Option<usize>,
    pub expert_mistakes: Option<Vec<usize>>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub schema_version: u32,
    pub algorithm: String,
    pub parameters: BTreeMap<String, String>,
    pub seed: u64,
    pub trials: usize,
    pub graph: GraphSummary,
    pub generator: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub oracle: Option<OracleReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub spectral: Option<SpectralReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cover: Option<CoverReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tree: Option<TreeReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub online: Option<OnlineReport>,
    pub wall_time_ms: f64,
}

impl ExperimentReport {
    /// JSON with the wall-time field zeroed; byte-identical across runs with
    /// the same seed.
    pub fn to_canonical_json(&self) -> String {
        let mut clone = self.clone();
        clone.wall_time_ms = 0.0;
        serde_json::to_string_pretty(&clone).expect("report serializes")
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Stateless splitmix64 step, used to derive independent per-trial streams
/// from `(master seed, trial index)`.
pub fn derive_seed(master: u64, index: u64) -> u64 {
    let mut z = master ^ index.wrapping_mul(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn graph_summary(instance: &LabeledInstance) -> GraphSummary {
    GraphSummary {
        nodes: instance.graph.node_count(),
        edges: instance.graph.edge_count(),
        negative_edges: instance
            .graph
            .edges()
            .iter()
            .filter(|e| e.sign.is_negative())
            .count(),
    }
}

pub fn run_experiment(
    instance: &LabeledInstance,
    config: &ExperimentConfig,
) -> Result<ExperimentReport, ExperimentError> {
    let start = Instant::now();
    if config.trials == 0 {
        return Err(ExperimentError::InvalidConfig(
            "trials must be at least 1".into(),
        ));
    }
    let mut report = ExperimentReport {
        schema_version: REPORT_SCHEMA_VERSION,
        algorithm: String::new(),
        parameters: BTreeMap::new(),
        seed: config.seed,
        trials: config.trials,
        graph: graph_summary(instance),
        generator: instance.provenance.generator.clone(),
        oracle: None,
        spectral: None,
        cover: None,
        tree: None,
        online: None,
        wall_time_ms: 0.0,
    };
    match &config.task {
        TaskConfig::Oracle => {
            report.algorithm = "oracle".into();
            report.oracle = Some(run_oracle(instance)?);
        }
        TaskConfig::Spectral {
            train_fraction,
            tol,
            max_iter,
        } => {
            report.algorithm = "spectral".into();
            report
                .parameters
                .insert("train_fraction".into(), train_fraction.to_string());
            report.parameters.insert("tol".into(), tol.to_string());
            report.spectral = Some(run_spectral(
                instance,
                *train_fraction,
                *tol,
                *max_iter,
                config.seed,
            )?);
        }
        TaskConfig::Cover {
            algo,
            rho,
            theta,
            tree,
            pick,
            batch_order,
        } => {
            report.algorithm = match algo {
                CoverAlgo::Scccc => "scccc".into(),
                CoverAlgo::Cccc => "cccc".into(),
            };
            report.parameters.insert("rho".into(), rho.to_string());
            if let Some(t) = theta {
                report.parameters.insert("theta".into(), t.to_string());
            }
            report.parameters.insert("tree".into(), format!("{tree:?}"));
            report.parameters.insert("pick".into(), format!("{pick:?}"));
            report.cover = Some(run_cover(
                instance,
                *algo,
                *rho,
                *theta,
                *tree,
                *pick,
                *batch_order,
                config,
            )?);
        }
        TaskConfig::Tree { tree, p } => {
            report.algorithm = "tree".into();
            report.parameters.insert("p".into(), p.to_string());
            report.parameters.insert("tree".into(), format!("{tree:?}"));
            report.tree = Some(run_tree(instance, *tree, *p, config)?);
        }
        TaskConfig::Online {
            learner,
            adversary_k,
            beta,
        } => {
            report.algorithm = "online".into();
            report
                .parameters
                .insert("learner".into(), format!("{learner:?}"));
            report.parameters.insert("beta".into(), beta.to_string());
            if let Some(k) = adversary_k {
                report
                    .parameters
                    .insert("adversary_k".into(), k.to_string());
            }
            report.online = Some(run_online_task(
                instance,
                *learner,
                *adversary_k,
                *beta,
                config,
            )?);
        }
    }
    report.wall_time_ms = start.elapsed().as_secs_f64() * 1e3;
    Ok(report)
}

fn run_oracle(instance: &LabeledInstance) -> Result<OracleReport, ExperimentError> {
    let g = &instance.graph;
    let delta = (g.node_count() <= DEFAULT_DELTA_NODE_LIMIT)
        .then(|| delta_exact(g).map(|c| c.cost))
        .transpose()?;
    let delta2 = (g.node_count() <= DEFAULT_DELTA2_NODE_LIMIT)
        .then(|| delta2_exact(g).map(|c| c.cost))
        .transpose()?;
    Ok(OracleReport {
        delta,
        delta2,
        two_balanced: is_two_balanced(g).0,
        weakly_balanced: is_weakly_balanced(g).0,
    })
}

fn run_spectral(
    instance: &LabeledInstance,
    train_fraction: f64,
    tol: f64,
    max_iter: usize,
    seed: u64,
) -> Result<SpectralReport, ExperimentError> {
    if !(0.0..=1.0).contains(&train_fraction) {
        return Err(ExperimentError::InvalidConfig(format!(
            "train_fraction {train_fraction} outside [0, 1]"
        )));
    }
    let g = &instance.graph;
    let eigen = min_eigenpair(&signed_laplacian(g), tol, max_iter)?;
    let boolean_min = (g.node_count() <= DEFAULT_BOOLEAN_MIN_NODE_LIMIT)
        .then(|| boolean_min_quadratic(g).map(|(v, _)| v))
        .transpose()?;
    let relaxation_upper_bound = (g.node_count() <= DEFAULT_DELTA2_NODE_LIMIT
        && g.node_count() > 0)
        .then(|| delta2_exact(g).map(|c| 4.0 * c.cost as f64 / g.node_count() as f64))
        .transpose()?;

    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, 0));
    let m = g.edge_count();
    let want = (train_fraction * m as f64).round() as usize;
    let mut ids: Vec<EdgeId> = (0..m).collect();
    for i in 0..want.min(m) {
        let j = rng.random_range(i..m);
        ids.swap(i, j);
    }
    let training: Vec<EdgeId> = ids[..want.min(m)].to_vec();
    let prediction = least_eigen_classifier(g, &training, tol, max_iter)?;
    let test_mistakes = prediction
        .predictions
        .iter()
        .filter(|&&(e, s)| s != g.sign(e))
        .count();
    Ok(SpectralReport {
        lambda_min: eigen.value,
        residual: eigen.residual,
        boolean_min,
        relaxation_upper_bound,
        train_fraction,
        training_edges: training.len(),
        test_mistakes,
    })
}

#[allow(clippy::too_many_arguments)]
fn run_cover(
    instance: &LabeledInstance,
    algo: CoverAlgo,
    rho: usize,
    theta: Option<usize>,
    tree: TreeStrategy,
    pick: SheafPick,
    batch_order: BatchOrder,
    config: &ExperimentConfig,
) -> Result<CoverReport, ExperimentError> {
    let g = &instance.graph;
    let flips = instance.provenance.planted.flips.clone();
    let theta_default = || {
        let slack = g
            .edge_count()
            .saturating_sub(g.node_count().saturating_sub(1));
        ((slack as f64).sqrt().ceil() as usize).max(1)
    };
    let results: Result<Vec<(CoverTrial, crate::cover::CoverStats)>, ExperimentError> = (0..config
        .trials)
        .into_par_iter()
        .map(|trial| {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(config.seed, trial as u64));
            let cover = match algo {
                CoverAlgo::Scccc => scccc(
                    g,
                    rho,
                    theta.unwrap_or_else(theta_default),
                    tree,
                    pick,
                    &mut rng,
                )?,
                CoverAlgo::Cccc => cccc(g, rho, tree, pick, batch_order, &mut rng)?,
            };
            let mistakes = count_mistakes(&cover, g)?;
            let stats = cover_stats(&cover);
            let verified = verify_cover(&cover, g).is_empty();
            Ok((
                CoverTrial {
                    trial,
                    mistakes,
                    query_count: stats.query_count,
                    test_count: stats.test_count,
                    max_load: stats.max_load,
                    flip_load_bound: flips.as_ref().map(|f| flip_load_bound(&cover, f)),
                    verified,
                },
                stats,
            ))
        })
        .collect();
    let results = results?;
    let trials: Vec<CoverTrial> = results.iter().map(|(t, _)| t.clone()).collect();
    // Report-level cover fields describe the first trial; per-trial numbers
    // carry the rest.
    let first_stats = &results.first().expect("at least one trial").1;
    let mean_mistakes = trials.iter().map(|t| t.mistakes as f64).sum::<f64>() / trials.len() as f64;
    Ok(CoverReport {
        algo,
        rho,
        theta: match algo {
            CoverAlgo::Scccc => Some(theta.unwrap_or_else(theta_default)),
            CoverAlgo::Cccc => None,
        },
        mean_mistakes,
        ratio_excluding_tree: first_stats.ratio_excluding_tree,
        ratio_overall: first_stats.ratio_overall,
        scccc_ratio_guarantee: matches!(algo, CoverAlgo::Scccc).then_some(rho as f64),
        cccc_ratio_guarantee: matches!(algo, CoverAlgo::Cccc).then_some((rho as f64 - 3.0) / 3.0),
        max_load: first_stats.max_load,
        mean_load: first_stats.mean_load,
        trials,
    })
}

fn run_tree(
    instance: &LabeledInstance,
    tree: TreeStrategy,
    p: f64,
    config: &ExperimentConfig,
) -> Result<TreeReport, ExperimentError> {
    if !(0.0..1.0).contains(&p) {
        return Err(ExperimentError::InvalidConfig(format!(
            "p {p} outside [0, 1)"
        )));
    }
    let g = &instance.graph;
    let m = g.edge_count();
    let mut seed_rng = ChaCha8Rng::seed_from_u64(derive_seed(config.seed, u64::MAX));
    let forest = build_spanning_tree(g, tree, &mut seed_rng)?;
    let stretch = average_stretch(&forest, g);

    // The flip bounds are stated against a balanced base labeling. When the
    // instance records the flips that produced it, each trial's flips are
    // composed with them (symmetric difference), so the bounds cover the
    // instance's own perturbation too; otherwise the instance labels act as
    // the base.
    let mut planted = vec![false; m];
    for &e in instance.provenance.planted.flips.iter().flatten() {
        planted[e] = true;
    }
    // Per-edge flip marginal relative to the base, for the expectation bound.
    let q = |e: EdgeId| if planted[e] { 1.0 - p } else { p };
    let mut expected_bound: f64 = (0..m).map(q).sum();
    let mut is_tree = vec![false; m];
    for e in forest.tree_edges() {
        is_tree[e] = true;
    }
    for (id, e) in g.edges().iter().enumerate() {
        if !is_tree[id] {
            let path = crate::graph::tree_path(&forest, e.u, e.v).expect("spanning tree");
            expected_bound += path.edges.iter().map(|&pe| q(pe)).sum::<f64>();
        }
    }

    let trials: Vec<TreeTrial> = (0..config.trials)
        .into_par_iter()
        .map(|trial| {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(config.seed, trial as u64));
            let trial_flips: Vec<EdgeId> = (0..m).filter(|_| rng.random_bool(p)).collect();
            let flipped = g.with_flipped(&trial_flips);
            let run = tree_learner_run_with_tree(&flipped, forest.clone());
            let mut in_trial = vec![false; m];
            for &e in &trial_flips {
                in_trial[e] = true;
            }
            let effective: Vec<EdgeId> = (0..m).filter(|&e| planted[e] != in_trial[e]).collect();
            TreeTrial {
                trial,
                mistakes: run.mistakes,
                flips: trial_flips.len(),
                flip_bound_rhs: flip_bound_rhs(&forest, g, &effective),
            }
        })
        .collect();
    let mean_mistakes = trials.iter().map(|t| t.mistakes as f64).sum::<f64>() / trials.len() as f64;
    Ok(TreeReport {
        p,
        mean_mistakes,
        average_stretch: *stretch.numer() as f64 / *stretch.denom() as f64,
        average_stretch_ratio: (*stretch.numer(), *stretch.denom()),
        expected_mistake_bound: expected_bound,
        trials,
    })
}

fn run_online_task(
    instance: &LabeledInstance,
    learner_kind: OnlineLearnerKind,
    adversary_k: Option<usize>,
    beta: f64,
    config: &ExperimentConfig,
) -> Result<OnlineReport, ExperimentError> {
    if !(0.0 < beta && beta < 1.0) {
        return Err(ExperimentError::InvalidConfig(format!(
            "beta {beta} outside (0, 1)"
        )));
    }
    let g = &instance.graph;
    let table = match learner_kind {
        OnlineLearnerKind::WeightedMajority | OnlineLearnerKind::Halving => {
            Some(build_version_space_table(g)?)
        }
        _ => None,
    };
    // Drives one trial: against the adversary when `k` is set, otherwise
    // over a seeded random order of the graph's own labels. Returns the run
    // plus the oracle-checked index of the adversary's final labeling.
    let drive = |learner: &mut dyn OnlineLearner,
                 trial: usize|
     -> Result<(crate::online::OnlineRun, Option<usize>), ExperimentError> {
        match adversary_k {
            Some(k) => {
                let mut adversary = TreePlusKAdversary::new(g, k)?;
                let run = run_online(learner, &mut adversary);
                let checked = if g.node_count() <= DEFAULT_DELTA_NODE_LIMIT {
                    let final_g = graph_with_labels(g, &adversary.final_labeling());
                    Some(delta_exact(&final_g)?.cost)
                } else {
                    None
                };
                Ok((run, checked))
            }
            None => {
                let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(config.seed, trial as u64));
                let mut order: Vec<EdgeId> = (0..g.edge_count()).collect();
                for i in (1..order.len()).rev() {
                    let j = rng.random_range(0..=i);
                    order.swap(i, j);
                }
                let mut env = FixedOrderEnvironment::new(g, order);
                Ok((run_online(learner, &mut env), None))
            }
        }
    };

    let mut mistakes_per_trial = Vec::with_capacity(config.trials);
    let mut final_delta = None;
    let mut expert_mistakes: Option<Vec<usize>> = None;
    for trial in 0..config.trials {
        let (run, checked) = match learner_kind {
            OnlineLearnerKind::WeightedMajority => {
                let mut wm =
                    WeightedMajorityLearner::new(table.as_ref().expect("table built"), beta);
                let out = drive(&mut wm, trial)?;
                if trial == 0 {
                    expert_mistakes = Some(wm.expert_mistakes.clone());
                }
                out
            }
            OnlineLearnerKind::Halving => {
                let d = delta_exact(g)?.cost as u32;
                let mut hal = HalvingLearner::new(table.as_ref().expect("table built"), d);
                drive(&mut hal, trial)?
            }
            OnlineLearnerKind::Tree => drive(&mut OnlineTreeLearner::new(g), trial)?,
            OnlineLearnerKind::ConstantPlus => drive(&mut ConstantLearner(Sign::Plus), trial)?,
        };
        mistakes_per_trial.push(run.mistakes);
        if checked.is_some() {
            final_delta = checked;
        }
    }
    let forced = adversary_k.map(|k| g.node_count() - 1 + k);
    let mean_mistakes =
        mistakes_per_trial.iter().map(|&m| m as f64).sum::<f64>() / config.trials as f64;
    Ok(OnlineReport {
        learner: learner_kind,
        adversary_k,
        mean_mistakes,
        mistakes_per_trial,
        forced_mistakes: forced,
        final_delta,
        expert_mistakes,
    })
}
