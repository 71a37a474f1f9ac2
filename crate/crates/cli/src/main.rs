//! Command-line lab for link classification in signed networks: instance
//! generators, exact oracles, the spectral heuristic, circuit-covering
//! active learners, the spanning-tree learner, and online protocols.

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use linksign::cover::{BatchOrder, SheafPick};
use linksign::experiment::{
    derive_seed, run_experiment, CoverAlgo, ExperimentConfig, ExperimentError, ExperimentReport,
    OnlineLearnerKind, TaskConfig,
};
use linksign::generate::{
    gen_active_lowerbound_labeling, gen_clique_delta, gen_p_random, gen_random_connected,
    gen_two_cluster_labeling, random_bipartition, LabeledInstance, Provenance,
};
use linksign::tree_predict::{TreeStrategy, DEFAULT_BEST_OF_K};

#[derive(Parser)]
#[command(
    name = "linksign",
    version,
    about = "Link classification in signed networks"
)]
struct Cli {
    /// Master seed for all randomized choices.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Output path (stdout when omitted).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Output format for reports.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Copy, Clone, ValueEnum)]
enum TreeArg {
    Bfs,
    Wilson,
    BestOfK,
}

impl From<TreeArg> for TreeStrategy {
    fn from(t: TreeArg) -> TreeStrategy {
        match t {
            TreeArg::Bfs => TreeStrategy::Bfs,
            TreeArg::Wilson => TreeStrategy::Wilson,
            TreeArg::BestOfK => TreeStrategy::BestOfK(DEFAULT_BEST_OF_K),
        }
    }
}

#[derive(Copy, Clone, ValueEnum)]
enum PickArg {
    First,
    Random,
}

#[derive(Copy, Clone, ValueEnum)]
enum GeneratorArg {
    RandomConnected,
    TwoCluster,
    PRandom,
    CliqueDelta,
    ActiveLowerbound,
}

#[derive(Copy, Clone, ValueEnum)]
enum AlgoArg {
    Scccc,
    Cccc,
}

#[derive(Copy, Clone, ValueEnum)]
enum LearnerArg {
    Wm,
    Halving,
    Tree,
    Constant,
}

#[derive(Args)]
struct InputArg {
    /// Edge-list file to analyze.
    #[arg(long)]
    input: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a labeled instance and write it as an edge list.
    Gen {
        #[arg(long, value_enum)]
        generator: GeneratorArg,
        /// Node count (topology generators).
        #[arg(long)]
        n: Option<usize>,
        /// Edge count (topology generators).
        #[arg(long)]
        m: Option<usize>,
        /// Pool size / planted index, depending on the generator.
        #[arg(long)]
        k: Option<usize>,
        /// Flip probability for the perturbation generator.
        #[arg(long)]
        p: Option<f64>,
        /// Base edge list for labeling generators (random topology when
        /// omitted, using --n/--m).
        #[arg(long)]
        input: Option<PathBuf>,
    },
    /// Exact clustering indices and balance tests.
    Oracle {
        #[command(flatten)]
        input: InputArg,
    },
    /// Signed Laplacian eigenvalues and the least-eigenvalue classifier.
    Spectral {
        #[command(flatten)]
        input: InputArg,
        #[arg(long, default_value_t = 0.5)]
        train_frac: f64,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
        #[arg(long, default_value_t = 300)]
        max_iter: usize,
    },
    /// Circuit-covering active learners.
    Cover {
        #[command(flatten)]
        input: InputArg,
        #[arg(long, value_enum, default_value_t = AlgoArg::Scccc)]
        algo: AlgoArg,
        #[arg(long)]
        rho: usize,
        #[arg(long)]
        theta: Option<usize>,
        #[arg(long, value_enum, default_value_t = TreeArg::Bfs)]
        tree: TreeArg,
        #[arg(long, value_enum, default_value_t = PickArg::First)]
        pick: PickArg,
        /// Walk the batches in a seeded shuffled order.
        #[arg(long)]
        shuffle_batches: bool,
        #[arg(long, default_value_t = 1)]
        trials: usize,
        /// Serialize the cover itself (query list, test list, circuits,
        /// loads) as JSON to this path. Matches the report's first trial.
        #[arg(long)]
        save_cover: Option<PathBuf>,
    },
    /// Spanning-tree active learner under random flips.
    Tree {
        #[command(flatten)]
        input: InputArg,
        #[arg(long, default_value_t = 0.0)]
        p: f64,
        #[arg(long, value_enum, default_value_t = TreeArg::Bfs)]
        tree: TreeArg,
        #[arg(long, default_value_t = 1)]
        trials: usize,
    },
    /// Online protocols: weighted majority, halving, baselines, adversary.
    Online {
        #[command(flatten)]
        input: InputArg,
        #[arg(long, value_enum, default_value_t = LearnerArg::Wm)]
        learner: LearnerArg,
        /// Run against the lower-bound adversary with this pool size.
        #[arg(long)]
        k: Option<usize>,
        #[arg(long, default_value_t = 0.5)]
        beta: f64,
        #[arg(long, default_value_t = 1)]
        trials: usize,
    },
    /// Runtime smoke benchmark of the full circuit-covering classifier.
    Bench {
        #[arg(long, default_value_t = 2000)]
        n: usize,
        #[arg(long, default_value_t = 40000)]
        m: usize,
        #[arg(long, default_value_t = 5)]
        rho: usize,
    },
}

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error("parse: {0}")]
    Parse(#[from] linksign::edge_list::EdgeListError),
    #[error("generation: {0}")]
    Gen(#[from] linksign::generate::GenError),
    #[error("experiment: {0}")]
    Experiment(#[from] ExperimentError),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("{0}")]
    Config(String),
}

/// Error categories mapped to exit codes: 2 usage (clap), 3 parse, 4 size
/// limit, 5 generation, 1 other.
fn exit_code_for(err: &CliError) -> u8 {
    match err {
        CliError::Parse(_) => 3,
        CliError::Experiment(ExperimentError::Oracle(
            linksign::oracle::OracleError::SizeLimitExceeded { .. },
        )) => 4,
        CliError::Experiment(ExperimentError::Spectral(
            linksign::spectral::SpectralError::SizeLimitExceeded { .. },
        )) => 4,
        CliError::Experiment(ExperimentError::Online(
            linksign::online::OnlineError::TooManyEdges { .. },
        )) => 4,
        CliError::Gen(_) => 5,
        _ => 1,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code_for(&err))
        }
    }
}

/// Loads an edge list; when a `<path>.provenance.json` sidecar from `gen`
/// sits next to it, the planted structure (flip sets, pools, triangles)
/// rides along into the reports.
fn load_instance(path: &PathBuf) -> Result<LabeledInstance, CliError> {
    let (graph, mapping) = linksign::edge_list::load_edge_list(path)?;
    let sidecar = path.with_extension("provenance.json");
    let provenance = std::fs::read_to_string(&sidecar)
        .ok()
        .and_then(|text| serde_json::from_str::<Provenance>(&text).ok())
        .unwrap_or_else(|| Provenance {
            generator: "file".into(),
            params: vec![
                ("path".into(), path.display().to_string()),
                ("nodes".into(), mapping.len().to_string()),
            ],
            seed: None,
            planted: Default::default(),
        });
    Ok(LabeledInstance { graph, provenance })
}

fn write_output(out: &Option<PathBuf>, content: &str) -> Result<(), CliError> {
    match out {
        Some(path) => {
            let mut f = std::fs::File::create(path)?;
            f.write_all(content.as_bytes())?;
            if !content.ends_with('\n') {
                f.write_all(b"\n")?;
            }
        }
        None => {
            if content.ends_with('\n') {
                print!("{content}");
            } else {
                println!("{content}");
            }
        }
    }
    Ok(())
}

fn emit_report(
    out: &Option<PathBuf>,
    format: Format,
    report: &ExperimentReport,
) -> Result<(), CliError> {
    match format {
        Format::Json => write_output(out, &report.to_json()),
        Format::Csv => write_output(out, &report_csv(report)),
    }
}

/// Plot-ready CSV: per-trial mistake tables when the task has trials, flat
/// key,value rows otherwise.
fn report_csv(report: &ExperimentReport) -> String {
    let mut out = String::new();
    if let Some(cover) = &report.cover {
        out.push_str("trial,mistakes,query_count,test_count,max_load,flip_load_bound,verified\n");
        for t in &cover.trials {
            out.push_str(&format!(
                "{},{},{},{},{},{},{}\n",
                t.trial,
                t.mistakes,
                t.query_count,
                t.test_count,
                t.max_load,
                t.flip_load_bound.map_or(String::new(), |b| b.to_string()),
                t.verified
            ));
        }
    } else if let Some(tree) = &report.tree {
        out.push_str("trial,mistakes,flips,flip_bound_rhs\n");
        for t in &tree.trials {
            out.push_str(&format!(
                "{},{},{},{}\n",
                t.trial, t.mistakes, t.flips, t.flip_bound_rhs
            ));
        }
    } else if let Some(online) = &report.online {
        out.push_str("trial,mistakes\n");
        for (i, m) in online.mistakes_per_trial.iter().enumerate() {
            out.push_str(&format!("{i},{m}\n"));
        }
    } else {
        out.push_str("key,value\n");
        out.push_str(&format!("algorithm,{}\n", report.algorithm));
        if let Some(oracle) = &report.oracle {
            out.push_str(&format!(
                "delta,{}\ndelta2,{}\ntwo_balanced,{}\nweakly_balanced,{}\n",
                oracle.delta.map_or(String::new(), |d| d.to_string()),
                oracle.delta2.map_or(String::new(), |d| d.to_string()),
                oracle.two_balanced,
                oracle.weakly_balanced
            ));
        }
        if let Some(sp) = &report.spectral {
            out.push_str(&format!(
                "lambda_min,{}\nresidual,{}\ntest_mistakes,{}\n",
                sp.lambda_min, sp.residual, sp.test_mistakes
            ));
        }
    }
    out
}

fn run(cli: Cli) -> Result<(), CliError> {
    match &cli.command {
        Command::Gen {
            generator,
            n,
            m,
            k,
            p,
            input,
        } => run_gen(&cli, *generator, *n, *m, *k, *p, input.as_ref()),
        Command::Oracle { input } => {
            let instance = load_instance(&input.input)?;
            let config = ExperimentConfig {
                seed: cli.seed,
                trials: 1,
                task: TaskConfig::Oracle,
            };
            let report = run_experiment(&instance, &config)?;
            emit_report(&cli.out, cli.format, &report)
        }
        Command::Spectral {
            input,
            train_frac,
            tol,
            max_iter,
        } => {
            let instance = load_instance(&input.input)?;
            let config = ExperimentConfig {
                seed: cli.seed,
                trials: 1,
                task: TaskConfig::Spectral {
                    train_fraction: *train_frac,
                    tol: *tol,
                    max_iter: *max_iter,
                },
            };
            let report = run_experiment(&instance, &config)?;
            emit_report(&cli.out, cli.format, &report)
        }
        Command::Cover {
            input,
            algo,
            rho,
            theta,
            tree,
            pick,
            shuffle_batches,
            trials,
            save_cover,
        } => {
            let instance = load_instance(&input.input)?;
            let batch_order = if *shuffle_batches {
                BatchOrder::Shuffled
            } else {
                BatchOrder::Stored
            };
            let pick = match pick {
                PickArg::First => SheafPick::First,
                PickArg::Random => SheafPick::Random,
            };
            if let Some(path) = save_cover {
                let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(cli.seed, 0));
                let cover = match algo {
                    AlgoArg::Scccc => {
                        let slack = instance
                            .graph
                            .edge_count()
                            .saturating_sub(instance.graph.node_count().saturating_sub(1));
                        let theta =
                            theta.unwrap_or_else(|| ((slack as f64).sqrt().ceil() as usize).max(1));
                        linksign::cover::scccc(
                            &instance.graph,
                            *rho,
                            theta,
                            (*tree).into(),
                            pick,
                            &mut rng,
                        )
                    }
                    AlgoArg::Cccc => linksign::cover::cccc(
                        &instance.graph,
                        *rho,
                        (*tree).into(),
                        pick,
                        batch_order,
                        &mut rng,
                    ),
                }
                .map_err(|e| CliError::Experiment(ExperimentError::Cover(e)))?;
                std::fs::write(
                    path,
                    serde_json::to_string_pretty(&cover).expect("cover serializes"),
                )?;
            }
            let config = ExperimentConfig {
                seed: cli.seed,
                trials: *trials,
                task: TaskConfig::Cover {
                    algo: match algo {
                        AlgoArg::Scccc => CoverAlgo::Scccc,
                        AlgoArg::Cccc => CoverAlgo::Cccc,
                    },
                    rho: *rho,
                    theta: *theta,
                    tree: (*tree).into(),
                    pick,
                    batch_order,
                },
            };
            let report = run_experiment(&instance, &config)?;
            emit_report(&cli.out, cli.format, &report)
        }
        Command::Tree {
            input,
            p,
            tree,
            trials,
        } => {
            let instance = load_instance(&input.input)?;
            let config = ExperimentConfig {
                seed: cli.seed,
                trials: *trials,
                task: TaskConfig::Tree {
                    tree: (*tree).into(),
                    p: *p,
                },
            };
            let report = run_experiment(&instance, &config)?;
            emit_report(&cli.out, cli.format, &report)
        }
        Command::Online {
            input,
            learner,
            k,
            beta,
            trials,
        } => {
            let instance = load_instance(&input.input)?;
            let config = ExperimentConfig {
                seed: cli.seed,
                trials: *trials,
                task: TaskConfig::Online {
                    learner: match learner {
                        LearnerArg::Wm => OnlineLearnerKind::WeightedMajority,
                        LearnerArg::Halving => OnlineLearnerKind::Halving,
                        LearnerArg::Tree => OnlineLearnerKind::Tree,
                        LearnerArg::Constant => OnlineLearnerKind::ConstantPlus,
                    },
                    adversary_k: *k,
                    beta: *beta,
                },
            };
            let report = run_experiment(&instance, &config)?;
            emit_report(&cli.out, cli.format, &report)
        }
        Command::Bench { n, m, rho } => run_bench(&cli, *n, *m, *rho),
    }
}

fn run_gen(
    cli: &Cli,
    generator: GeneratorArg,
    n: Option<usize>,
    m: Option<usize>,
    k: Option<usize>,
    p: Option<f64>,
    input: Option<&PathBuf>,
) -> Result<(), CliError> {
    let mut rng = ChaCha8Rng::seed_from_u64(cli.seed);
    let need = |opt: Option<usize>, name: &str| {
        opt.ok_or_else(|| CliError::Config(format!("--{name} is required for this generator")))
    };
    let base_graph = |rng: &mut ChaCha8Rng| -> Result<linksign::SignedGraph, CliError> {
        if let Some(path) = input {
            Ok(linksign::edge_list::load_edge_list(path)?.0)
        } else {
            Ok(gen_random_connected(need(n, "n")?, need(m, "m")?, rng)?)
        }
    };
    let mut instance = match generator {
        GeneratorArg::RandomConnected => LabeledInstance {
            graph: base_graph(&mut rng)?,
            provenance: Provenance {
                generator: "random-connected".into(),
                params: vec![],
                seed: None,
                planted: Default::default(),
            },
        },
        GeneratorArg::TwoCluster => {
            let g = base_graph(&mut rng)?;
            let sides = random_bipartition(g.node_count(), &mut rng);
            gen_two_cluster_labeling(&g, &sides)
        }
        GeneratorArg::PRandom => {
            let g = base_graph(&mut rng)?;
            let sides = random_bipartition(g.node_count(), &mut rng);
            let base = gen_two_cluster_labeling(&g, &sides);
            let p = p.ok_or_else(|| CliError::Config("--p is required for p-random".into()))?;
            gen_p_random(&base, p, &mut rng)?
        }
        GeneratorArg::CliqueDelta => gen_clique_delta(need(n, "n")?, need(k, "k")?, &mut rng)?,
        GeneratorArg::ActiveLowerbound => {
            let g = base_graph(&mut rng)?;
            gen_active_lowerbound_labeling(&g, need(k, "k")?, &mut rng)?
        }
    };
    instance.provenance.seed = Some(cli.seed);

    let mut edge_list = Vec::new();
    linksign::edge_list::write_edge_list(&instance.graph, &mut edge_list)?;
    let edge_list = String::from_utf8(edge_list).expect("edge list is ascii");
    write_output(&cli.out, &edge_list)?;
    if let Some(out) = &cli.out {
        let meta = out.with_extension("provenance.json");
        std::fs::write(
            &meta,
            serde_json::to_string_pretty(&instance.provenance).expect("provenance serializes"),
        )?;
    }
    Ok(())
}

fn run_bench(cli: &Cli, n: usize, m: usize, rho: usize) -> Result<(), CliError> {
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(cli.seed, 0));
    let base = gen_random_connected(n, m, &mut rng)?;
    let sides = random_bipartition(n, &mut rng);
    let g = gen_two_cluster_labeling(&base, &sides).graph;
    let start = std::time::Instant::now();
    let cover = linksign::cover::cccc(
        &g,
        rho,
        TreeStrategy::Bfs,
        SheafPick::First,
        BatchOrder::Stored,
        &mut rng,
    )
    .map_err(|e| CliError::Experiment(ExperimentError::Cover(e)))?;
    let mistakes = linksign::cover::count_mistakes(&cover, &g)
        .map_err(|e| CliError::Experiment(ExperimentError::Cover(e)))?;
    let secs = start.elapsed().as_secs_f64();
    let stats = linksign::cover::cover_stats(&cover);
    let json = serde_json::json!({
        "bench": "cccc",
        "n": n,
        "m": m,
        "rho": rho,
        "seconds": secs,
        "query_count": stats.query_count,
        "test_count": stats.test_count,
        "max_load": stats.max_load,
        "mistakes": mistakes,
        "seed": cli.seed,
    });
    write_output(
        &cli.out,
        &serde_json::to_string_pretty(&json).expect("json serializes"),
    )
}
