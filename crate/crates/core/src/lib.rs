//! Link classification in signed networks.
//!
//! An edge-labeled graph carries ±1 labels (friend/foe); the regularity of a
//! labeling is measured by the correlation clustering index (the minimum
//! number of sign violations over all node partitions) and its two-cluster
//! restriction. This crate provides:
//!
//! - [`graph`]: the signed-graph representation, spanning-tree machinery,
//!   and O(1) path-sign queries;
//! - [`oracle`]: exact computation of both indices at desk scale, balance
//!   tests with bad-cycle witnesses, and the exact training-set risk
//!   minimizer;
//! - [`spectral`]: the signed Laplacian, its smallest eigenpair, the exact
//!   boolean quadratic minimum, and the least-eigenvalue link classifier;
//! - [`cover`]: active learners that cover the graph with small circuits,
//!   trading queries for tests at a guaranteed ratio with bounded per-edge
//!   load;
//! - [`tree_predict`]: the spanning-tree active learner for probabilistically
//!   perturbed labelings, with average-stretch accounting;
//! - [`online`]: version-space halving, weighted majority over halving
//!   experts, and the adversary realizing the online lower bound;
//! - [`generate`], [`edge_list`], [`experiment`]: instance generators, the
//!   edge-list file format, and the seeded experiment harness.

pub mod cover;
pub mod edge_list;
pub mod experiment;
pub mod generate;
pub mod graph;
pub mod online;
pub mod oracle;
pub mod spectral;
pub mod tree_predict;

pub use cover::{
    cccc, count_mistakes, cover_stats, edge_partition, flip_load_bound, predict_with_cover, scccc,
    tree_partition, verify_cover, BatchOrder, Circuit, CircuitCover, CoverError, CoverStats,
    CoverViolation, EpochRecord, RunRecord, Sheaf, SheafPick,
};
pub use edge_list::{load_edge_list, parse_edge_list, save_edge_list, EdgeListError};
pub use experiment::{
    run_experiment, CoverAlgo, ExperimentConfig, ExperimentError, ExperimentReport,
    OnlineLearnerKind, TaskConfig,
};
pub use generate::{
    gen_active_lowerbound_labeling, gen_clique_delta, gen_p_random, gen_random_connected,
    gen_two_cluster_labeling, random_bipartition, GenError, LabeledInstance, Planted, Provenance,
};
pub use graph::{
    bfs_spanning_forest, connected_components, connected_components_filtered, path_sign_product,
    spanning_forest_from_edges, tree_path, wilson_random_spanning_tree, Edge, EdgeId, GraphError,
    NodeId, Partition, RootedSpanningForest, Sign, SignedGraph, TreePath, TwoClustering,
};
pub use online::{
    build_version_space_table, halving_predict, run_online, version_space_size,
    weighted_majority_run, HalvingLearner, Observed, OnlineError, OnlineRun, TreePlusKAdversary,
    VersionSpaceTable, WeightedMajorityLearner,
};
pub use oracle::{
    classify_by_partition, delta2_exact, delta_exact, erm_partition, is_two_balanced,
    is_weakly_balanced, partition_cost, two_clustering_cost, BadCycleWitness, ClusteringCost,
    OracleError, TwoClusteringCost,
};
pub use spectral::{
    boolean_min_quadratic, least_eigen_classifier, min_eigenpair, signed_laplacian, EigenResult,
    SignedLaplacian, SpectralError,
};
pub use tree_predict::{
    average_stretch, build_spanning_tree, flip_bound_rhs, tree_learner_run, TreeLearnerRun,
    TreeStrategy,
};
