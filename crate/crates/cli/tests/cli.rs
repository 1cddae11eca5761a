//! End-to-end checks of the command-line interface: file outputs, exit
//! codes, and the reproducibility of reported numbers from saved artifacts.

use std::path::{Path, PathBuf};
use std::process::Command;
use std::sync::OnceLock;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_natlog"))
}

fn tmp_root() -> PathBuf {
    let dir = std::env::temp_dir().join(format!("natlog-cli-test-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

/// One shared generated corpus for the whole test binary.
fn corpus_dir() -> &'static Path {
    static DIR: OnceLock<PathBuf> = OnceLock::new();
    DIR.get_or_init(|| {
        let dir = tmp_root().join("corpus");
        let status = bin()
            .args(["generate", "--seed", "1", "--out"])
            .arg(&dir)
            .status()
            .expect("run generate");
        assert!(status.success());
        dir
    })
}

#[test]
fn generate_writes_files_and_is_byte_deterministic() {
    let first = corpus_dir();
    for name in ["corpus.tsv", "datasets.tsv", "lexicon.tsv", "report.txt"] {
        assert!(first.join(name).exists(), "{name} missing");
    }
    let again = tmp_root().join("corpus-again");
    let status = bin().args(["generate", "--seed", "1", "--out"]).arg(&again).status().unwrap();
    assert!(status.success());
    for name in ["corpus.tsv", "datasets.tsv"] {
        let a = std::fs::read(first.join(name)).unwrap();
        let b = std::fs::read(again.join(name)).unwrap();
        assert_eq!(a, b, "{name} differs between identical-seed runs");
    }
    let report = std::fs::read_to_string(first.join("report.txt")).unwrap();
    assert!(report.contains("datasets\t"));
    assert!(report.contains("oracle-disagreements\t"));
}

#[test]
fn generate_rejects_inconsistent_lexicons() {
    let bad = tmp_root().join("bad-lexicon.tsv");
    std::fs::write(&bad, "dog\t=\tcat\ndog\t|\tcat\n").unwrap();
    let out = tmp_root().join("bad-out");
    let status = bin()
        .args(["generate", "--lexicon"])
        .arg(&bad)
        .args(["--out"])
        .arg(&out)
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(2), "inconsistent lexicon must be a data error");
}

#[test]
fn usage_errors_exit_one() {
    let status = bin()
        .args(["train", "--setting", "bogus", "--corpus", "/nonexistent", "--out", "/tmp/x"])
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(1));

    let status = bin().args(["frobnicate"]).status().unwrap();
    assert_eq!(status.code(), Some(1));
}

#[test]
fn missing_inputs_exit_two() {
    let status = bin()
        .args([
            "eval",
            "--checkpoint",
            "/nonexistent.bin",
            "--corpus",
            "/nonexistent",
            "--manifest",
            "/nonexistent.tsv",
        ])
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(2));
}

#[test]
fn gradcheck_passes_on_a_healthy_build() {
    let output = bin().args(["gradcheck", "--seed", "3"]).output().unwrap();
    assert_eq!(output.status.code(), Some(0), "{}", String::from_utf8_lossy(&output.stderr));
    let stdout = String::from_utf8_lossy(&output.stdout);
    assert!(stdout.contains("gradient check passed"));
    assert!(stdout.contains("variant tied"));
    assert!(stdout.contains("variant untied"));
}

#[test]
fn train_then_eval_reproduces_the_report() {
    let corpus = corpus_dir();
    let out = tmp_root().join("train-smoke");
    let config = tmp_root().join("smoke-config.txt");
    std::fs::write(&config, "max_epochs=2\nearly_stop_patience=2\nword_dim=6\ncomparison_dim=8\n")
        .unwrap();
    let status = bin()
        .args(["train", "--setting", "set-out", "--target", "qsub.most.no.bark", "--seed", "4"])
        .args(["--corpus"])
        .arg(corpus)
        .args(["--config"])
        .arg(&config)
        .args(["--out"])
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let run = out.join("seed-4");
    for name in ["checkpoint.bin", "history.tsv", "manifest.tsv", "report.txt", "report.tsv", "config.txt"] {
        assert!(run.join(name).exists(), "{name} missing");
    }
    let history = std::fs::read_to_string(run.join("history.tsv")).unwrap();
    assert!(history.starts_with("epoch\ttrain_loss\ttrain_acc\ttest_acc\ttrain_loss_reg"));
    assert_eq!(history.lines().count(), 1 + 3, "header plus epochs 0..=2");

    // Re-evaluating the written checkpoint against the written manifest
    // reproduces the report numbers exactly.
    let eval_out = tmp_root().join("eval-smoke");
    let status = bin()
        .args(["eval", "--checkpoint"])
        .arg(run.join("checkpoint.bin"))
        .args(["--corpus"])
        .arg(corpus)
        .args(["--manifest"])
        .arg(run.join("manifest.tsv"))
        .args(["--out"])
        .arg(&eval_out)
        .status()
        .unwrap();
    assert!(status.success());
    let trained = std::fs::read_to_string(run.join("report.tsv")).unwrap();
    let evaluated = std::fs::read_to_string(eval_out.join("report.tsv")).unwrap();
    assert_eq!(trained, evaluated);
}

#[test]
fn multi_seed_training_writes_summary() {
    let corpus = corpus_dir();
    let out = tmp_root().join("multi-seed");
    let config = tmp_root().join("multi-config.txt");
    std::fs::write(&config, "max_epochs=1\nearly_stop_patience=1\nword_dim=4\ncomparison_dim=5\n")
        .unwrap();
    let status = bin()
        .args(["train", "--setting", "all-split", "--seed", "7", "--seeds", "2"])
        .args(["--corpus"])
        .arg(corpus)
        .args(["--config"])
        .arg(&config)
        .args(["--out"])
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let summary = std::fs::read_to_string(out.join("summary.tsv")).unwrap();
    assert!(summary.starts_with("seed\tbest_epoch"));
    assert!(summary.contains("\n7\t"));
    assert!(summary.contains("\n8\t"));
    assert!(summary.contains("# best-seed="));
    assert!(out.join("seed-7").join("checkpoint.bin").exists());
    assert!(out.join("seed-8").join("checkpoint.bin").exists());
}
