//! Runs the built binary and checks exit codes, outputs and report files.

mod common;

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use common::small_synth;

fn admm_embed(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_admm-embed"))
        .args(args)
        .env("RUST_LOG", "warn")
        .output()
        .unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn train_transe(data: &Path, out: &Path) -> Output {
    admm_embed(&[
        "train",
        "--mode",
        "nlm+transe",
        "--corpus",
        s(&data.join("corpus.txt")),
        "--triples",
        s(&data.join("triples_train.tsv")),
        "--dim",
        "4",
        "--hidden",
        "3",
        "--context",
        "3",
        "--iterations",
        "5",
        "--ngrams-per-iter",
        "50",
        "--output",
        s(out),
    ])
}

#[test]
fn train_eval_inspect_round_trip() {
    let tmp = tempfile::tempdir().unwrap();
    let data = tmp.path().join("data");
    small_synth(&data);
    let run = tmp.path().join("run");
    let out = train_transe(&data, &run);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let ckpt = run.join("checkpoint");

    let out = admm_embed(&[
        "eval",
        "--checkpoint",
        s(&ckpt),
        "--task",
        "kb",
        "--dev",
        s(&data.join("triples_dev.tsv")),
        "--test",
        s(&data.join("triples_test.tsv")),
        "--output",
        s(&tmp.path().join("reports")),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = fs::read_to_string(tmp.path().join("reports/kb_report.csv")).unwrap();
    assert!(csv.starts_with("relation,threshold,correct,total,accuracy\n"));
    assert!(csv.lines().any(|l| l.starts_with("r0,")));
    assert!(tmp.path().join("reports/kb_report.txt").exists());

    let out = admm_embed(&[
        "eval",
        "--checkpoint",
        s(&ckpt),
        "--task",
        "neighbors",
        "--word",
        "w3",
        "--k",
        "5",
        "--output",
        s(&tmp.path().join("reports")),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = fs::read_to_string(tmp.path().join("reports/neighbors_report.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 5);

    let out = admm_embed(&[
        "eval",
        "--checkpoint",
        s(&ckpt),
        "--task",
        "analogy",
        "--analogy",
        s(&data.join("analogy.txt")),
        "--table",
        "mean",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8(out.stdout).unwrap();
    let accuracy: f64 = stdout
        .split_whitespace()
        .nth(2)
        .and_then(|x| x.parse().ok())
        .unwrap_or_else(|| panic!("no accuracy in `{stdout}`"));
    assert!((0.0..=1.0).contains(&accuracy));

    let out = admm_embed(&["inspect", s(&ckpt)]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("mode = nlm+transe"));
    assert!(text.contains("transe.R.bin: transe.R 2x4"));
}

#[test]
fn validation_failures_exit_with_one() {
    let tmp = tempfile::tempdir().unwrap();
    let data = tmp.path().join("data");
    small_synth(&data);

    let out = admm_embed(&[
        "train",
        "--mode",
        "nlm+transe",
        "--corpus",
        s(&data.join("corpus.txt")),
        "--triples",
        s(&tmp.path().join("missing.tsv")),
        "--output",
        s(&tmp.path().join("run")),
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("`triples`"));

    let out = admm_embed(&["train", "--dim", "many"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("`dim`"));

    let out = admm_embed(&["train", "--no-such-flag"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn config_file_is_overridden_by_flags() {
    let tmp = tempfile::tempdir().unwrap();
    let data = tmp.path().join("data");
    small_synth(&data);
    let cfg = tmp.path().join("run.cfg");
    fs::write(
        &cfg,
        format!(
            "# toy run\nmode = nlm\ncorpus = {}\ndim = 4\nhidden = 3\ncontext = 3\niterations = 9\nngrams-per-iter = 20\n",
            data.join("corpus.txt").display()
        ),
    )
    .unwrap();
    let run = tmp.path().join("run");
    let out = admm_embed(&["train", "--config", s(&cfg), "--iterations", "2", "--output", s(&run)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let echo = fs::read_to_string(run.join("config.txt")).unwrap();
    assert!(echo.contains("iterations = 2\n") && echo.contains("mode = nlm\n"));
    assert_eq!(fs::read_to_string(run.join("metrics.csv")).unwrap().lines().count(), 3);
}

#[test]
fn runtime_failures_exit_with_two() {
    let tmp = tempfile::tempdir().unwrap();
    let data = tmp.path().join("data");
    small_synth(&data);
    let run = tmp.path().join("run");
    assert!(train_transe(&data, &run).status.success());
    let ckpt = run.join("checkpoint");

    // Thresholds cannot be fitted without a dev set.
    let out = admm_embed(&[
        "eval",
        "--checkpoint",
        s(&ckpt),
        "--task",
        "kb",
        "--test",
        s(&data.join("triples_test.tsv")),
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("`dev`"));

    let foreign = tmp.path().join("foreign.tsv");
    fs::write(&foreign, "zebra\tr0\tw1\t1\nw1\tr0\tquokka\t0\nw2\tr9\tw3\t1\n").unwrap();
    let out = admm_embed(&[
        "eval",
        "--checkpoint",
        s(&ckpt),
        "--task",
        "kb",
        "--dev",
        s(&foreign),
        "--test",
        s(&data.join("triples_test.tsv")),
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("3 dev tokens"));

    let out = admm_embed(&["inspect", s(&tmp.path().join("nothing"))]);
    assert_eq!(out.status.code(), Some(2));

    let out = admm_embed(&[
        "train",
        "--mode",
        "nlm+gd",
        "--corpus",
        s(&data.join("corpus.txt")),
        "--graph",
        s(&data.join("graph.tsv")),
        "--rho",
        "10",
        "--lr-nlm",
        "1e300",
        "--lr-rel",
        "1e300",
        "--iterations",
        "3",
        "--output",
        s(&tmp.path().join("blowup")),
    ]);
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("step 1") && stderr.contains("iteration 1"), "{stderr}");
}

#[test]
fn synth_writes_all_files() {
    let tmp = tempfile::tempdir().unwrap();
    let out = admm_embed(&["synth", "--output", s(tmp.path()), "--ngrams", "200", "--entities", "60", "--train", "200", "--dev", "40", "--test", "40"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    for name in ["corpus.txt", "graph.tsv", "triples_train.tsv", "triples_dev.tsv", "triples_test.tsv", "analogy.txt"] {
        assert!(tmp.path().join(name).exists(), "{name}");
    }
}
