//! Tree-learner and online-learner properties: the deterministic flip bound,
//! version-space halving, the weighted-majority inequality, and the
//! adversarial lower bound.

mod common;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use linksign::graph::{EdgeId, Sign};
use linksign::online::{
    build_version_space_table, graph_with_labels, run_online, ConstantLearner,
    FixedOrderEnvironment, HalvingLearner, OnlineLearner, OnlineTreeLearner, TreePlusKAdversary,
    WeightedMajorityLearner,
};
use linksign::oracle::delta_exact;
use linksign::tree_predict::{
    build_spanning_tree, flip_bound_rhs, tree_learner_run_with_tree, TreeStrategy,
};

#[test]
fn tree_mistakes_never_exceed_flip_bound() {
    let mut rng = ChaCha8Rng::seed_from_u64(61);
    for _ in 0..200 {
        let n = rng.random_range(4..=25);
        let max_m = n * (n - 1) / 2;
        let m = rng.random_range(n - 1..=max_m);
        let base = common::random_balanced_graph(n, m, &mut rng);
        let strategy = if rng.random_bool(0.5) {
            TreeStrategy::Bfs
        } else {
            TreeStrategy::Wilson
        };
        let forest = build_spanning_tree(&base, strategy, &mut rng).unwrap();
        let flips: Vec<EdgeId> = (0..m).filter(|_| rng.random_bool(0.2)).collect();
        let flipped = base.with_flipped(&flips);
        let run = tree_learner_run_with_tree(&flipped, forest.clone());
        let rhs = flip_bound_rhs(&forest, &base, &flips);
        assert!(run.mistakes <= rhs, "{} > {}", run.mistakes, rhs);
    }
}

#[test]
fn halving_space_halves_on_every_mistake() {
    let mut rng = ChaCha8Rng::seed_from_u64(62);
    let topologies = common::small_fixed_graphs();
    for g in &topologies {
        if g.edge_count() > 10 {
            continue;
        }
        for _ in 0..5 {
            let m = g.edge_count();
            let signs: Vec<Sign> = (0..m)
                .map(|_| {
                    if rng.random_bool(0.5) {
                        Sign::Plus
                    } else {
                        Sign::Minus
                    }
                })
                .collect();
            let labeled = g.with_signs(&signs);
            let table = build_version_space_table(&labeled).unwrap();
            let d = delta_exact(&labeled).unwrap().cost as u32;
            let mut order: Vec<EdgeId> = (0..m).collect();
            for i in (1..m).rev() {
                order.swap(i, rng.random_range(0..=i));
            }
            let mut learner = HalvingLearner::new(&table, d);
            let initial = learner.space_size();
            assert!(initial >= 1, "true labeling always lies in its own space");
            let mut env = FixedOrderEnvironment::new(&labeled, order);
            let run = run_online(&mut learner, &mut env);
            // Space sizes were recorded before each step; recompute after.
            let final_size = learner.space_size();
            assert!(final_size >= 1);
            for (step, window) in run.steps.iter().zip(learner.space_sizes.windows(2)) {
                if step.mistake {
                    assert!(
                        window[1] * 2 <= window[0],
                        "space went {} -> {} on a mistake",
                        window[0],
                        window[1]
                    );
                }
            }
            // Last step against the final size.
            if let Some(last) = run.steps.last() {
                if last.mistake {
                    let before = *learner.space_sizes.last().unwrap();
                    assert!(final_size * 2 <= before);
                }
            }
            assert!(
                (run.mistakes as f64) <= (initial as f64).log2() + 1e-9,
                "{} mistakes, |S1| = {initial}",
                run.mistakes
            );
        }
    }
}

#[test]
fn weighted_majority_obeys_standard_inequality() {
    let mut rng = ChaCha8Rng::seed_from_u64(63);
    for _ in 0..10 {
        let g = {
            let n = rng.random_range(4..=5);
            let max_m = (n * (n - 1) / 2).min(9);
            let m = rng.random_range(n - 1..=max_m);
            common::random_signed_graph(n, m, &mut rng)
        };
        let table = build_version_space_table(&g).unwrap();
        let mut order: Vec<EdgeId> = (0..g.edge_count()).collect();
        for i in (1..order.len()).rev() {
            order.swap(i, rng.random_range(0..=i));
        }
        let beta: f64 = 0.5;
        let (run, per_expert) = linksign::online::weighted_majority_run(&g, &table, &order, beta);
        let best = per_expert.iter().min().copied().unwrap();
        let bound = ((per_expert.len() as f64).log2() + best as f64 * (1.0 / beta).log2())
            / (2.0 / (1.0 + beta)).log2();
        assert!(run.mistakes as f64 <= bound + 1e-9);
        // The true index's expert satisfies the halving bound.
        let d = delta_exact(&g).unwrap().cost;
        let hal_mistakes = per_expert[d];
        let initial = linksign::online::version_space_size(
            &table,
            d as u32,
            &linksign::online::Observed::default(),
        );
        assert!((hal_mistakes as f64) <= (initial as f64).log2() + 1e-9);
    }
}

#[test]
fn adversary_beats_every_learner_by_tree_plus_k() {
    let mut rng = ChaCha8Rng::seed_from_u64(64);
    for _ in 0..8 {
        let n = rng.random_range(4..=6);
        let max_m = (n * (n - 1) / 2).min(10);
        let m = rng.random_range(n + 1..=max_m);
        let g = common::random_signed_graph(n, m, &mut rng);
        let non_tree = m - (n - 1);
        let k = rng.random_range(0..=non_tree.min(2));
        let table = build_version_space_table(&g).unwrap();

        let run_against = |learner: &mut dyn OnlineLearner| {
            let mut adversary = TreePlusKAdversary::new(&g, k).unwrap();
            let run = run_online(learner, &mut adversary);
            let final_g = graph_with_labels(&g, &adversary.final_labeling());
            (run.mistakes, delta_exact(&final_g).unwrap().cost)
        };

        let mut wm = WeightedMajorityLearner::new(&table, 0.5);
        let (mistakes, final_delta) = run_against(&mut wm);
        assert!(mistakes >= n - 1 + k, "wm forced only {mistakes}");
        assert!(final_delta <= k);

        let mut tree = OnlineTreeLearner::new(&g);
        let (mistakes, final_delta) = run_against(&mut tree);
        assert!(mistakes >= n - 1 + k, "tree forced only {mistakes}");
        assert!(final_delta <= k);

        for side in [Sign::Plus, Sign::Minus] {
            let mut constant = ConstantLearner(side);
            let (mistakes, final_delta) = run_against(&mut constant);
            assert!(mistakes >= n - 1 + k, "constant forced only {mistakes}");
            assert!(final_delta <= k);
        }
    }
}

#[test]
fn online_tree_learner_perfect_after_spanning_queries_on_balanced() {
    let mut rng = ChaCha8Rng::seed_from_u64(65);
    let g = common::random_balanced_graph(10, 30, &mut rng);
    let forest = build_spanning_tree(&g, TreeStrategy::Bfs, &mut rng).unwrap();
    let tree_edges = forest.tree_edges();
    let mut order = tree_edges.clone();
    let tree_set: std::collections::HashSet<EdgeId> = tree_edges.iter().copied().collect();
    order.extend((0..g.edge_count()).filter(|e| !tree_set.contains(e)));
    let mut learner = OnlineTreeLearner::new(&g);
    let mut env = FixedOrderEnvironment::new(&g, order);
    let run = run_online(&mut learner, &mut env);
    // After the spanning tree is revealed, every remaining prediction is
    // parity-forced and correct on a balanced labeling.
    for step in &run.steps[tree_edges.len()..] {
        assert!(!step.mistake);
    }
}
