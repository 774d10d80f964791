use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use ibl_delegate::charts::chart_annotations;
use ibl_delegate::cli::{cli_main, EXIT_OK, EXIT_RUNTIME, EXIT_USAGE};
use ibl_delegate::experiments::{RunConfig, SweepConfig};
use ibl_delegate::io::{save_config, EpisodeTrace};

fn run(args: &[&str]) -> i32 {
    cli_main(std::iter::once("ibl-delegate").chain(args.iter().copied()))
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn tiny_config(dir: &Path) -> PathBuf {
    let mut cfg = RunConfig::profile("desk").unwrap();
    cfg.sweep = SweepConfig {
        grids: 2,
        level_counts: vec![1, 2],
        nav_episodes: 2_000,
        manager_games: 300,
        eval_episodes: 40,
        ..SweepConfig::desk()
    };
    let path = dir.join("tiny.json");
    std::fs::write(&path, save_config(&cfg)).unwrap();
    path
}

fn files(dir: &Path) -> BTreeMap<PathBuf, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in std::fs::read_dir(&d).unwrap() {
            let path = e.unwrap().path();
            if path.is_dir() {
                stack.push(path);
            } else {
                out.insert(path.strip_prefix(dir).unwrap().to_path_buf(), std::fs::read(&path).unwrap());
            }
        }
    }
    out
}

#[test]
fn train_evaluate_and_replay() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path();
    let cfg = tiny_config(out);
    assert_eq!(run(&["gen-grids", "--config", p(&cfg), "--out", p(out)]), EXIT_OK);
    let base = out.join("grids/grid_0_base.json");
    let level = out.join("grids/grid_0_level_2.json");
    assert!(out.join("grids/manifest.json").exists());

    for kind in ["q", "ibl"] {
        let slot = if kind == "q" { "1" } else { "2" };
        let code = run(&["train-nav", "--config", p(&cfg), "--out", p(out), "--grid", p(&base), "--kind", kind, "--slot", slot]);
        assert_eq!(code, EXIT_OK);
    }
    let (q, ibl) = (out.join("nav_q_1.json"), out.join("nav_ibl_2.json"));
    let team = ["--grid", p(&level), "--agent", p(&q), "--agent", p(&ibl), "--error-prob", "1", "--error-prob", "0"];

    let mut args = vec!["train-manager", "--config", p(&cfg), "--out", p(out)];
    args.extend(team);
    assert_eq!(run(&args), EXIT_OK);

    let trace = out.join("trace.txt");
    let manager = out.join("manager.json");
    let mut args = vec!["evaluate", "--config", p(&cfg), "--manager", p(&manager), "--trace", p(&trace)];
    args.extend(team);
    assert_eq!(run(&args), EXIT_OK);
    let parsed = EpisodeTrace::parse(&std::fs::read_to_string(&trace).unwrap()).unwrap();
    assert_eq!(parsed.replay_frames().unwrap().len(), parsed.steps.len() + 1);
    assert_eq!(run(&["replay", p(&trace)]), EXIT_OK);

    // agent count mismatch is a usage error naming the flag
    let args = ["evaluate", "--grid", p(&level), "--agent", p(&q), "--agent", p(&ibl), "--error-prob", "1"];
    assert_eq!(run(&args), EXIT_USAGE);
    // a manager snapshot is not a navigating agent
    let args = ["evaluate", "--grid", p(&level), "--agent", p(&manager)];
    assert_eq!(run(&args), EXIT_RUNTIME);
}

#[test]
fn sweep_is_reproducible_and_reportable() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = tiny_config(dir.path());
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    assert_eq!(run(&["sweep", "--config", p(&cfg), "--seed", "7", "--out", p(&a)]), EXIT_OK);
    assert_eq!(run(&["sweep", "--config", p(&cfg), "--seed", "7", "--workers", "3", "--out", p(&b)]), EXIT_OK);
    assert_eq!(files(&a), files(&b));

    let results = std::fs::read_to_string(a.join("results.csv")).unwrap();
    assert!(results.contains("# master_seed: 7"));
    // 2 grids x 2 levels x 3 scenarios x (2 solo + 2 managers)
    assert_eq!(results.lines().filter(|l| !l.starts_with('#')).count(), 1 + 48);

    // every chart annotation matches the aggregates table
    let aggregates = std::fs::read_to_string(a.join("aggregates.csv")).unwrap();
    let svg = std::fs::read_to_string(a.join("charts/lengths_divergent.svg")).unwrap();
    let annotations = chart_annotations(&svg);
    assert_eq!(annotations.len(), 8);
    for (series, level, text) in annotations {
        let row = format!("divergent,{level},{series},2,{text},");
        assert!(aggregates.contains(&row), "missing {row}");
    }

    let report = dir.path().join("report");
    assert_eq!(run(&["report", "--results", p(&a.join("results.csv")), "--out", p(&report)]), EXIT_OK);
    assert!(report.join("charts/selection_divergent.svg").exists());
    assert!(report.join("summary.json").exists());
}

#[test]
fn unknown_subcommand_is_a_usage_error() {
    assert_eq!(run(&["simulate"]), EXIT_USAGE);
    assert_eq!(run(&["sweep", "--seed", "minus-one"]), EXIT_USAGE);
}
