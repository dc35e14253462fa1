use std::path::Path;

use esboost::config::{parse_config, ExperimentKind};
use esboost::experiment::{run_experiment, SummaryRow};

fn run(text: &str, kind: ExperimentKind) -> esboost::experiment::Outputs {
    let cfg = parse_config(text).unwrap();
    run_experiment(&cfg, kind, Path::new(".")).unwrap()
}

#[test]
fn sweep_has_one_row_per_size_and_seed() {
    let out = run(
        "m_list=50,100\nd=2\nseed=3\nn_seeds=2\nmax_iters=80\nstop=rho:0.25\n",
        ExperimentKind::Sweep,
    );
    let summary = out.get("summary.csv").unwrap();
    let mut lines = summary.lines();
    assert_eq!(lines.next(), Some(SummaryRow::CSV_HEADER));
    let rows: Vec<Vec<f64>> = lines
        .map(|l| l.split(',').map(|t| t.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 4);
    assert_eq!(
        rows.iter().map(|r| r[0]).collect::<Vec<_>>(),
        vec![50.0, 50.0, 100.0, 100.0]
    );
    for r in &rows {
        assert_eq!(r[7], r[6] - 0.25);
        assert!(r[5] <= r[3]);
    }
    // Seeds are distinct per run.
    let mut seeds: Vec<u64> = summary
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(2).unwrap().parse().unwrap())
        .collect();
    seeds.dedup();
    assert_eq!(seeds.len(), 4);
}

#[test]
fn outputs_are_byte_identical() {
    let text = "m_list=40\nd=3\nseed=11\nn_seeds=3\nmax_iters=60\nstop=oracle:error\n";
    assert_eq!(
        run(text, ExperimentKind::Sweep),
        run(text, ExperimentKind::Sweep)
    );
    let text = "d=2\nm=30\nseed=5\nmax_iters=20\nloss=logistic\nstop=cv\n";
    assert_eq!(
        run(text, ExperimentKind::Train),
        run(text, ExperimentKind::Train)
    );
}

#[test]
fn written_files_match_in_memory_outputs() {
    let out = run("d=1\nm=12\nseed=2\nmax_iters=10\n", ExperimentKind::Train);
    let dir = tempfile::tempdir().unwrap();
    out.write_to(dir.path()).unwrap();
    for f in &out.files {
        assert_eq!(
            std::fs::read_to_string(dir.path().join(&f.path)).unwrap(),
            f.contents
        );
    }
    assert!(std::fs::read_dir(dir.path()).unwrap().all(|e| !e
        .unwrap()
        .file_name()
        .to_string_lossy()
        .ends_with(".tmp")));
}

#[test]
fn oracle_stop_picks_best_true_error() {
    let text = "d=2\nm=60\nseed=8\nmax_iters=150\n";
    let full = run(text, ExperimentKind::Train);
    let oracle = run(&format!("{text}stop=oracle:error\n"), ExperimentKind::Train);
    let errs: Vec<f64> = full
        .get("trace.csv")
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(8).unwrap().parse().unwrap())
        .collect();
    let best = errs.iter().copied().fold(f64::INFINITY, f64::min);
    let first = errs.iter().position(|&e| e == best).unwrap();
    let stopped = oracle.get("trace.csv").unwrap().lines().count() - 1;
    assert_eq!(stopped, first + 1);
}

#[test]
fn gen_emits_requested_sample() {
    let out = run("experiment=gen\nd=4\nm=7\nseed=1\n", ExperimentKind::Gen);
    assert_eq!(out.primary().path, Path::new("data.csv"));
    assert_eq!(out.primary().contents.lines().count(), 8);
}
