//! End-to-end checks of the `mlca` binary: every subcommand, the documented
//! exit codes, and byte-level determinism of file outputs.

use std::path::Path;
use std::process::{Command, Output};

fn mlca(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mlca"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn assert_code(out: &Output, expected: i32) {
    assert_eq!(
        out.status.code(),
        Some(expected),
        "stdout: {}\nstderr: {}",
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
}

fn read(dir: &Path, name: &str) -> String {
    std::fs::read_to_string(dir.join(name)).expect("file exists")
}

fn write_marginals(dir: &Path, name: &str) {
    std::fs::write(
        dir.join(name),
        "p0,p1,p2,p3\n0.9,0.8,0.7,0.3\n",
    )
    .unwrap();
}

#[test]
fn synth_writes_deterministic_files() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["synth", "--m", "2", "--n", "4", "--d", "3", "--seed", "7", "--out", "data.csv"];
    assert_code(&mlca(&args, dir.path()), 0);
    let first = read(dir.path(), "data.csv");
    let first_marg = read(dir.path(), "data_marginals.csv");
    assert_eq!(first.lines().count(), 5); // header + 4 rows
    assert!(first.starts_with("f0,f1,f2,l0,l1\n"));
    assert!(first_marg.starts_with("p0,p1\n"));

    assert_code(&mlca(&args, dir.path()), 0);
    assert_eq!(read(dir.path(), "data.csv"), first);
    assert_eq!(read(dir.path(), "data_marginals.csv"), first_marg);
}

#[test]
fn synth_rejects_bad_sizes() {
    let dir = tempfile::tempdir().unwrap();
    let out = mlca(
        &["synth", "--m", "2", "--n", "0", "--d", "3", "--out", "data.csv"],
        dir.path(),
    );
    assert_code(&out, 2);
}

#[test]
fn train_writes_model_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    assert_code(
        &mlca(
            &["synth", "--m", "3", "--n", "500", "--d", "5", "--seed", "1", "--out", "train.csv"],
            dir.path(),
        ),
        0,
    );
    let out = mlca(
        &["train", "--input", "train.csv", "--out", "model.json"],
        dir.path(),
    );
    assert_code(&out, 0);
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("label 0:") && stdout.contains("label 2:"), "{stdout}");
    let model = read(dir.path(), "model.json");
    assert!(model.contains("\"label_count\": 3"));
    assert_eq!(model.matches("\"iterations\"").count(), 3);
}

#[test]
fn train_usage_errors() {
    let dir = tempfile::tempdir().unwrap();
    // Missing --input is a clap error.
    assert_code(&mlca(&["train", "--out", "model.json"], dir.path()), 2);
    std::fs::write(dir.path().join("tiny.csv"), "f0,l0\n1,0\n-1,1\n").unwrap();
    assert_code(
        &mlca(
            &["train", "--input", "tiny.csv", "--out", "m.json", "--reg", "0"],
            dir.path(),
        ),
        2,
    );
}

#[test]
fn predict_from_marginals_matches_known_cases() {
    let dir = tempfile::tempdir().unwrap();
    write_marginals(dir.path(), "p.csv");

    // Hamming, sep c = 0.25: decide the two most certain labels.
    assert_code(
        &mlca(
            &[
                "predict", "--marginals", "p.csv", "--loss", "hamming", "--penalty", "sep",
                "--cost", "0.25", "--out", "pred.csv",
            ],
            dir.path(),
        ),
        0,
    );
    let pred = read(dir.path(), "pred.csv");
    let mut lines = pred.lines();
    assert_eq!(lines.next().unwrap(), "l0,l1,l2,l3,expected_loss");
    let row = lines.next().unwrap();
    assert!(row.starts_with("1,1,?,?,"), "{row}");
    let value: f64 = row.rsplit(',').next().unwrap().parse().unwrap();
    assert!((value - 0.8).abs() < 1e-9);

    // Rank, sep c = 0.03: the boundary pair {1, 4}.
    assert_code(
        &mlca(
            &[
                "predict", "--marginals", "p.csv", "--loss", "rank", "--penalty", "sep",
                "--cost", "0.03", "--out", "rank.csv",
            ],
            dir.path(),
        ),
        0,
    );
    let pred = read(dir.path(), "rank.csv");
    let row = pred.lines().nth(1).unwrap();
    assert!(row.starts_with("1>4,"), "{row}");
    let value: f64 = row.rsplit(',').next().unwrap().parse().unwrap();
    assert!((value - 0.09).abs() < 1e-9);

    // Hamming, sep c = 0.5: full prediction.
    assert_code(
        &mlca(
            &[
                "predict", "--marginals", "p.csv", "--loss", "hamming", "--penalty", "sep",
                "--cost", "0.5", "--out", "full.csv",
            ],
            dir.path(),
        ),
        0,
    );
    let pred = read(dir.path(), "full.csv");
    assert!(pred.lines().nth(1).unwrap().starts_with("1,1,1,0,"), "{pred}");
}

#[test]
fn predict_with_model_and_input() {
    let dir = tempfile::tempdir().unwrap();
    assert_code(
        &mlca(
            &["synth", "--m", "2", "--n", "300", "--d", "4", "--seed", "3", "--out", "d.csv"],
            dir.path(),
        ),
        0,
    );
    assert_code(&mlca(&["train", "--input", "d.csv", "--out", "m.json"], dir.path()), 0);
    assert_code(
        &mlca(
            &[
                "predict", "--model", "m.json", "--input", "d.csv", "--loss", "f1",
                "--penalty", "par", "--cost", "0.2", "--out", "f.csv",
            ],
            dir.path(),
        ),
        0,
    );
    let pred = read(dir.path(), "f.csv");
    assert_eq!(pred.lines().next().unwrap(), "l0,l1,expected_f");
    assert_eq!(pred.lines().count(), 301);

    // Model without input is a clap error; neither source is a usage error.
    assert_code(
        &mlca(
            &[
                "predict", "--model", "m.json", "--loss", "f1", "--penalty", "par", "--cost",
                "0.2", "--out", "x.csv",
            ],
            dir.path(),
        ),
        2,
    );
    assert_code(
        &mlca(
            &["predict", "--loss", "f1", "--penalty", "par", "--cost", "0.2", "--out", "x.csv"],
            dir.path(),
        ),
        2,
    );
}

#[test]
fn predict_rejects_unknown_loss() {
    let dir = tempfile::tempdir().unwrap();
    write_marginals(dir.path(), "p.csv");
    let out = mlca(
        &[
            "predict", "--marginals", "p.csv", "--loss", "jaccard", "--penalty", "sep",
            "--cost", "0.1", "--out", "x.csv",
        ],
        dir.path(),
    );
    assert_code(&out, 2);
}

#[test]
fn sweep_on_marginals_writes_csv_and_plot() {
    let dir = tempfile::tempdir().unwrap();
    assert_code(
        &mlca(
            &["synth", "--m", "3", "--n", "50", "--d", "3", "--seed", "5", "--out", "d.csv"],
            dir.path(),
        ),
        0,
    );
    let args = [
        "sweep", "--marginals", "d_marginals.csv", "--loss", "hamming", "--penalty", "sep",
        "--grid", "0.05:0.5:0.05", "--out", "results.csv", "--plot", "plot.svg",
    ];
    assert_code(&mlca(&args, dir.path()), 0);
    let csv = read(dir.path(), "results.csv");
    assert!(csv.starts_with("loss,penalty,series,c,fold,gen_loss,partial_loss,abstention_pct\n"));
    assert_eq!(csv.lines().count(), 1 + 3 * 10); // header + series x grid points
    let svg = read(dir.path(), "plot.svg");
    assert!(svg.starts_with("<svg") && svg.trim_end().ends_with("</svg>"));

    assert_code(&mlca(&args, dir.path()), 0);
    assert_eq!(read(dir.path(), "results.csv"), csv);
}

#[test]
fn sweep_on_dataset_with_folds() {
    let dir = tempfile::tempdir().unwrap();
    assert_code(
        &mlca(
            &["synth", "--m", "2", "--n", "60", "--d", "3", "--seed", "8", "--out", "d.csv"],
            dir.path(),
        ),
        0,
    );
    let out = mlca(
        &[
            "sweep", "--input", "d.csv", "--loss", "hamming", "--penalty", "sep", "--grid",
            "0.1:0.2:0.1", "--folds", "3", "--out", "r.csv", "--jobs", "2",
        ],
        dir.path(),
    );
    assert_code(&out, 0);
    let csv = read(dir.path(), "r.csv");
    assert_eq!(csv.lines().count(), 1 + 3 * 2 * 3); // header + series x costs x folds
}

#[test]
fn sweep_rejects_impossible_folds() {
    let dir = tempfile::tempdir().unwrap();
    assert_code(
        &mlca(
            &["synth", "--m", "2", "--n", "5", "--d", "2", "--seed", "1", "--out", "d.csv"],
            dir.path(),
        ),
        0,
    );
    let out = mlca(
        &[
            "sweep", "--input", "d.csv", "--loss", "hamming", "--penalty", "sep", "--grid",
            "0.1:0.2:0.1", "--folds", "10", "--out", "r.csv",
        ],
        dir.path(),
    );
    assert_code(&out, 2);
}

#[test]
fn f1_sweep_on_marginals() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("p.csv"),
        "p0,p1,p2\n0.9,0.5,0.2\n0.7,0.6,0.1\n0.3,0.3,0.3\n",
    )
    .unwrap();
    let out = mlca(
        &[
            "sweep", "--marginals", "p.csv", "--loss", "f1", "--penalty", "par", "--grid",
            "0.1:1:0.1", "--out", "f.csv", "--plot", "f.svg",
        ],
        dir.path(),
    );
    assert_code(&out, 0);
    let csv = read(dir.path(), "f.csv");
    assert_eq!(csv.lines().count(), 1 + 3 * 10);
    assert!(csv.lines().nth(1).unwrap().starts_with("f1,par,partial,0.1,0,"));
    assert!(read(dir.path(), "f.svg").contains("expected F"));
}

#[test]
fn oracle_check_passes_and_enforces_capacity() {
    let dir = tempfile::tempdir().unwrap();
    let out = mlca(
        &[
            "oracle-check", "--loss", "hamming", "--m", "4", "--trials", "50", "--seed", "42",
        ],
        dir.path(),
    );
    assert_code(&out, 0);
    assert!(String::from_utf8_lossy(&out.stdout).contains("oracle check passed"));

    let out = mlca(
        &["oracle-check", "--loss", "rank", "--m", "25", "--trials", "10"],
        dir.path(),
    );
    assert_code(&out, 2);
}

#[test]
fn oracle_check_f_measure_at_capacity() {
    let dir = tempfile::tempdir().unwrap();
    let start = std::time::Instant::now();
    let out = mlca(
        &["oracle-check", "--loss", "f1", "--m", "7", "--trials", "200", "--seed", "9"],
        dir.path(),
    );
    assert_code(&out, 0);
    assert!(start.elapsed().as_secs() < 60);
}
