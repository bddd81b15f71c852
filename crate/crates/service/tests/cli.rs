use std::path::Path;
use std::process::{Command, Output};

use funcprobe_core::corpus::read_dataset;
use funcprobe_core::Label;

fn funcprobe(dir: &Path, args: &[&str]) -> Output {
    let out = Command::new(env!("CARGO_BIN_EXE_funcprobe"))
        .current_dir(dir)
        .args(["--config", "small.toml", "--seed", "4"])
        .args(args)
        .env("RUST_LOG", "warn")
        .output()
        .unwrap();
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    out
}

#[test]
fn generate_annotate_probe_evaluate() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    std::fs::write(d.join("small.toml"), "[probe]\nfolds = 3\n\n[probe.train]\nmax_epochs = 5\n").unwrap();
    let nouns = ["farmer", "pilot", "singer", "baker", "nurse", "judge"];
    let corpus: Vec<String> =
        (0..120).map(|i| format!("The {} who met the {} left at {i} .", nouns[i % 6], nouns[(i / 6) % 6])).collect();
    std::fs::write(d.join("wh.txt"), corpus.join("\n")).unwrap();

    funcprobe(d, &["generate", "--task", "wh", "--corpus", "wh.txt", "--target-size", "80", "--out", "gen.jsonl"]);
    let generated = read_dataset(&d.join("gen.jsonl")).unwrap();
    assert_eq!(generated.len(), 80);
    assert_eq!(generated.iter().filter(|r| r.mutation.is_mutated).count(), 40);

    funcprobe(d, &["simulate", "--items", "gen.jsonl", "--accuracy", "1.0", "--out", "resp.jsonl"]);
    let flagged = &generated.iter().find(|r| r.mutation.is_mutated).unwrap().id;
    std::fs::write(d.join("reject.txt"), format!("# reviewer\n{flagged}\n")).unwrap();
    let out = funcprobe(
        d,
        &["aggregate", "--responses", "resp.jsonl", "--items", "gen.jsonl", "--out", "final.jsonl", "--target", "30", "--reject", "reject.txt"],
    );
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.contains("100.0 100.0 100.0 60"), "{stdout}");
    let fin = read_dataset(&d.join("final.jsonl")).unwrap();
    assert_eq!(fin.iter().filter(|r| r.gold_label() == Some(Label::Unnatural)).count(), 30);
    assert_eq!(fin.len(), 60);
    assert!(fin.iter().all(|r| &r.id != flagged));

    let agreement = funcprobe(d, &["agreement", "--dataset", "final.jsonl", "--responses", "resp.jsonl"]);
    assert!(String::from_utf8(agreement.stdout).unwrap().contains("100.0 100.0 100.0 60"));

    funcprobe(d, &["probe", "--task", "wh", "--dataset", "final.jsonl", "--mode", "acceptability", "--out", "mlp.wh.jsonl"]);
    let out = funcprobe(d, &["evaluate", "--dataset", "final.jsonl", "--predictions", "*.wh.jsonl", "--out", "acc.tsv"]);
    let table = std::fs::read_to_string(d.join("acc.tsv")).unwrap();
    assert!(table.starts_with("model\ttask\taccuracy\tbaseline\tn\n"), "{table}");
    assert!(table.contains("mlp\twh\t") && table.contains("\t0.5000\t60\n"), "{table}");
    assert!(!out.stdout.is_empty());
}

#[test]
fn bad_input_exits_nonzero() {
    let dir = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_funcprobe"))
        .current_dir(dir.path())
        .args(["generate", "--task", "wh", "--corpus", "missing.txt", "--out", "x.jsonl"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("error:"));
}
