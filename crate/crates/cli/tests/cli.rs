//! End-to-end CLI checks: generation round trips, report determinism, exit
//! codes per error category, and the documented subcommand surface.

use std::path::Path;
use std::process::{Command, Output};

fn linksign(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_linksign"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

#[test]
fn gen_oracle_pipeline_on_balanced_instance() {
    let dir = std::env::temp_dir().join("linksign-cli-test-balanced");
    std::fs::create_dir_all(&dir).unwrap();
    let inst = dir.join("inst.txt");
    let out = linksign(&[
        "gen",
        "--generator",
        "two-cluster",
        "--n",
        "8",
        "--m",
        "16",
        "--seed",
        "3",
        "--out",
        inst.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    assert!(Path::new(&dir.join("inst.provenance.json")).exists());

    let out = linksign(&["oracle", "--input", inst.to_str().unwrap()]);
    assert!(out.status.success());
    let report: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(report["oracle"]["delta2"], 0);
    assert_eq!(report["oracle"]["two_balanced"], true);
}

#[test]
fn cover_on_balanced_instance_reports_zero_mistakes() {
    let dir = std::env::temp_dir().join("linksign-cli-test-cover");
    std::fs::create_dir_all(&dir).unwrap();
    let inst = dir.join("inst.txt");
    assert!(linksign(&[
        "gen",
        "--generator",
        "two-cluster",
        "--n",
        "30",
        "--m",
        "150",
        "--seed",
        "11",
        "--out",
        inst.to_str().unwrap(),
    ])
    .status
    .success());
    let out = linksign(&[
        "cover",
        "--input",
        inst.to_str().unwrap(),
        "--algo",
        "cccc",
        "--rho",
        "4",
        "--seed",
        "2",
    ]);
    assert!(out.status.success());
    let report: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(report["cover"]["mean_mistakes"], 0.0);
    assert_eq!(report["cover"]["trials"][0]["verified"], true);
}

#[test]
fn tree_with_zero_p_reports_zero_bound() {
    let dir = std::env::temp_dir().join("linksign-cli-test-tree");
    std::fs::create_dir_all(&dir).unwrap();
    let inst = dir.join("inst.txt");
    assert!(linksign(&[
        "gen",
        "--generator",
        "two-cluster",
        "--n",
        "12",
        "--m",
        "30",
        "--seed",
        "5",
        "--out",
        inst.to_str().unwrap(),
    ])
    .status
    .success());
    let out = linksign(&[
        "tree",
        "--input",
        inst.to_str().unwrap(),
        "--p",
        "0",
        "--trials",
        "4",
    ]);
    assert!(out.status.success());
    let report: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(report["tree"]["mean_mistakes"], 0.0);
    assert_eq!(report["tree"]["trials"][0]["flip_bound_rhs"], 0);

    // CSV mistake table.
    let out = linksign(&[
        "tree",
        "--input",
        inst.to_str().unwrap(),
        "--p",
        "0.1",
        "--trials",
        "3",
        "--format",
        "csv",
    ]);
    assert!(out.status.success());
    let csv = stdout(&out);
    assert!(csv.starts_with("trial,mistakes,flips,flip_bound_rhs"));
    assert_eq!(csv.lines().count(), 4);
}

#[test]
fn reports_are_byte_identical_for_equal_seeds() {
    let dir = std::env::temp_dir().join("linksign-cli-test-det");
    std::fs::create_dir_all(&dir).unwrap();
    let inst = dir.join("inst.txt");
    assert!(linksign(&[
        "gen",
        "--generator",
        "p-random",
        "--n",
        "16",
        "--m",
        "40",
        "--p",
        "0.1",
        "--seed",
        "9",
        "--out",
        inst.to_str().unwrap(),
    ])
    .status
    .success());
    let run = || {
        let out = linksign(&[
            "cover",
            "--input",
            inst.to_str().unwrap(),
            "--algo",
            "scccc",
            "--rho",
            "2",
            "--tree",
            "wilson",
            "--pick",
            "random",
            "--trials",
            "3",
            "--seed",
            "21",
        ]);
        assert!(out.status.success());
        let mut v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
        v.as_object_mut().unwrap().remove("wall_time_ms");
        serde_json::to_string(&v).unwrap()
    };
    assert_eq!(run(), run());
}

#[test]
fn exit_codes_by_category() {
    let dir = std::env::temp_dir().join("linksign-cli-test-errors");
    std::fs::create_dir_all(&dir).unwrap();

    // Parse error: category 3.
    let bad = dir.join("bad.txt");
    std::fs::write(&bad, "0 1 2\n").unwrap();
    let out = linksign(&["oracle", "--input", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));

    // Size limit: category 4 (online learner needs the labeling table).
    let big = dir.join("big.txt");
    assert!(linksign(&[
        "gen",
        "--generator",
        "two-cluster",
        "--n",
        "10",
        "--m",
        "20",
        "--seed",
        "1",
        "--out",
        big.to_str().unwrap(),
    ])
    .status
    .success());
    let out = linksign(&[
        "online",
        "--input",
        big.to_str().unwrap(),
        "--learner",
        "wm",
    ]);
    assert_eq!(out.status.code(), Some(4));

    // Generation failure: category 5 (clique index above the feasible bound).
    let out = linksign(&["gen", "--generator", "clique-delta", "--n", "9", "--k", "6"]);
    assert_eq!(out.status.code(), Some(5));

    // Usage errors: clap's own exit code 2.
    let out = linksign(&["cover", "--input", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn online_adversary_reports_forced_mistakes() {
    let dir = std::env::temp_dir().join("linksign-cli-test-online");
    std::fs::create_dir_all(&dir).unwrap();
    let inst = dir.join("inst.txt");
    assert!(linksign(&[
        "gen",
        "--generator",
        "two-cluster",
        "--n",
        "5",
        "--m",
        "8",
        "--seed",
        "4",
        "--out",
        inst.to_str().unwrap(),
    ])
    .status
    .success());
    let out = linksign(&[
        "online",
        "--input",
        inst.to_str().unwrap(),
        "--learner",
        "wm",
        "--k",
        "1",
    ]);
    assert!(out.status.success());
    let report: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    let forced = report["online"]["forced_mistakes"].as_u64().unwrap();
    assert_eq!(forced, 5);
    assert!(report["online"]["mean_mistakes"].as_f64().unwrap() >= forced as f64);
    assert!(report["online"]["final_delta"].as_u64().unwrap() <= 1);
}

#[test]
fn provenance_sidecar_feeds_the_flip_load_bound() {
    let dir = std::env::temp_dir().join("linksign-cli-test-sidecar");
    std::fs::create_dir_all(&dir).unwrap();
    let inst = dir.join("inst.txt");
    assert!(linksign(&[
        "gen",
        "--generator",
        "p-random",
        "--n",
        "20",
        "--m",
        "70",
        "--p",
        "0.1",
        "--seed",
        "13",
        "--out",
        inst.to_str().unwrap(),
    ])
    .status
    .success());
    let out = linksign(&[
        "cover",
        "--input",
        inst.to_str().unwrap(),
        "--rho",
        "2",
        "--seed",
        "4",
    ]);
    assert!(out.status.success());
    let report: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(report["generator"], "two-cluster+p-random");
    let trial = &report["cover"]["trials"][0];
    let mistakes = trial["mistakes"].as_u64().unwrap();
    let bound = trial["flip_load_bound"]
        .as_u64()
        .expect("bound known from sidecar");
    assert!(mistakes <= bound);
}

#[test]
fn cover_serialization_round_trips() {
    let dir = std::env::temp_dir().join("linksign-cli-test-save-cover");
    std::fs::create_dir_all(&dir).unwrap();
    let inst = dir.join("inst.txt");
    assert!(linksign(&[
        "gen",
        "--generator",
        "two-cluster",
        "--n",
        "15",
        "--m",
        "50",
        "--seed",
        "6",
        "--out",
        inst.to_str().unwrap(),
    ])
    .status
    .success());
    let cover_path = dir.join("cover.json");
    let out = linksign(&[
        "cover",
        "--input",
        inst.to_str().unwrap(),
        "--rho",
        "2",
        "--save-cover",
        cover_path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let cover: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&cover_path).unwrap()).unwrap();
    let queries = cover["query_set"].as_array().unwrap().len();
    let tests = cover["test_set"].as_array().unwrap().len();
    assert_eq!(queries + tests, 50);
    assert_eq!(cover["circuits"].as_array().unwrap().len(), tests);
    assert_eq!(cover["load"].as_array().unwrap().len(), 50);
}

#[test]
fn bench_subcommand_emits_timing() {
    let out = linksign(&["bench", "--n", "200", "--m", "1200", "--rho", "4"]);
    assert!(out.status.success());
    let report: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(report["mistakes"], 0);
    assert!(report["seconds"].as_f64().unwrap() < 10.0);
}
