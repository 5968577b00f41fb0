use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn fixture() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/tests/fixtures/ingest")
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_normmine"))
        .arg("--quiet")
        .args(args)
        .output()
        .unwrap()
}

fn ok(args: &[&str]) -> String {
    let out = run(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// Ingests the fixture into `dir` and trains a depth-3 bank on it.
fn prepare(dir: &Path) -> (PathBuf, PathBuf) {
    let corpus = dir.join("corpus.txt");
    let bank = dir.join("bank.nmb");
    let f = fixture();
    ok(&[
        "ingest",
        "--events-dir",
        s(&f.join("events")),
        "--mentions-dir",
        s(&f.join("mentions")),
        "--corpus",
        s(&corpus),
    ]);
    ok(&[
        "train",
        "--corpus",
        s(&corpus),
        "--bank",
        s(&bank),
        "--max-depth",
        "3",
    ]);
    (corpus, bank)
}

#[test]
fn ingest_writes_corpus_metadata_and_diagnostics() {
    let dir = tempfile::tempdir().unwrap();
    let (corpus, _) = prepare(dir.path());
    let text = std::fs::read_to_string(&corpus).unwrap();
    assert_eq!(
        text,
        std::fs::read_to_string(fixture().join("golden_corpus.txt")).unwrap()
    );
    let diag = std::fs::read_to_string(dir.path().join("corpus.diagnostics.txt")).unwrap();
    assert!(diag.contains("sequences_emitted=907\n"), "{diag}");
    assert!(dir.path().join("corpus.meta.tsv").exists());

    let again = dir.path().join("again.txt");
    let f = fixture();
    ok(&[
        "ingest",
        "--events-dir",
        s(&f.join("events")),
        "--mentions-dir",
        s(&f.join("mentions")),
        "--corpus",
        s(&again),
    ]);
    assert_eq!(std::fs::read(&again).unwrap(), text.as_bytes());
}

#[test]
fn empty_input_directories_give_an_empty_corpus() {
    let dir = tempfile::tempdir().unwrap();
    let events = dir.path().join("events");
    let mentions = dir.path().join("mentions");
    std::fs::create_dir_all(&events).unwrap();
    std::fs::create_dir_all(&mentions).unwrap();
    let corpus = dir.path().join("c.txt");
    ok(&[
        "ingest",
        "--events-dir",
        s(&events),
        "--mentions-dir",
        s(&mentions),
        "--corpus",
        s(&corpus),
    ]);
    assert_eq!(std::fs::read_to_string(&corpus).unwrap(), "");
}

#[test]
fn user_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("nope.txt");
    let out = run(&[
        "train",
        "--corpus",
        s(&missing),
        "--bank",
        s(&dir.path().join("b")),
    ]);
    assert_eq!(out.status.code(), Some(2));

    let bad = dir.path().join("bad.txt");
    std::fs::write(&bad, "F01 X99 END\n").unwrap();
    let out = run(&[
        "train",
        "--corpus",
        s(&bad),
        "--bank",
        s(&dir.path().join("b")),
    ]);
    assert_eq!(out.status.code(), Some(2));

    let (corpus, bank) = prepare(dir.path());
    let out = run(&[
        "evaluate",
        "--corpus",
        s(&corpus),
        "--bank",
        s(&bank),
        "--out-dir",
        s(dir.path()),
        "--norm",
        "O(21)",
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!out.stderr.is_empty());

    let out = run(&["mine", "--workers", "two"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn hypothesis_file_restricts_mining() {
    let dir = tempfile::tempdir().unwrap();
    let (corpus, bank) = prepare(dir.path());
    let hyps = dir.path().join("hyps.txt");
    std::fs::write(&hyps, "# one norm\nO(4,4,-)\n\n").unwrap();
    let out = dir.path().join("out");
    let stdout = ok(&[
        "mine",
        "--corpus",
        s(&corpus),
        "--bank",
        s(&bank),
        "--out-dir",
        s(&out),
        "--hypotheses",
        s(&hyps),
    ]);
    assert!(stdout.contains("positive_log_odds_norms="));
    let csv = std::fs::read_to_string(out.join("norms.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines.len(), 2, "{csv}");
    assert!(lines[1].starts_with("\"O(4,4,-)\","), "{csv}");
    let detail: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("norms_detail.json")).unwrap())
            .unwrap();
    assert_eq!(detail["hypotheses"], 1);
}

#[test]
fn config_values_apply_and_flags_override_them() {
    let dir = tempfile::tempdir().unwrap();
    let (corpus, bank) = prepare(dir.path());
    let out = dir.path().join("out");
    let cfg = dir.path().join("run.toml");
    std::fs::write(
        &cfg,
        format!(
            "[paths]\ncorpus = {:?}\nbank = {:?}\nout_dir = {:?}\n\n[evaluate]\nnorm = \"P(2)\"\nn_synth = 4\nsynth_size = 50\n",
            s(&corpus),
            s(&bank),
            s(&out)
        ),
    )
    .unwrap();
    let report = ok(&["--config", s(&cfg), "evaluate"]);
    assert!(report.contains("P(2)"), "{report}");
    let hist = std::fs::read_to_string(out.join("lrt_hist.csv")).unwrap();
    // Sturges: 4 samples, 3 bins.
    assert_eq!(hist.lines().count(), 4, "{hist}");

    let report = ok(&[
        "--config",
        s(&cfg),
        "evaluate",
        "--norm",
        "O(4)",
        "--n-synth",
        "8",
    ]);
    assert!(report.contains("O(4)"), "{report}");
    let hist = std::fs::read_to_string(out.join("lrt_hist.csv")).unwrap();
    assert_eq!(hist.lines().count(), 5, "{hist}");

    std::fs::write(&cfg, "[evaluate]\nnsynth = 3\n").unwrap();
    let out = run(&["--config", s(&cfg), "evaluate"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn synth_samples_null_and_planted_corpora() {
    let dir = tempfile::tempdir().unwrap();
    let (_, bank) = prepare(dir.path());
    let null = dir.path().join("null.txt");
    ok(&[
        "synth",
        "--bank",
        s(&bank),
        "--out",
        s(&null),
        "--null",
        "--n",
        "200",
        "--seed",
        "9",
    ]);
    let text = std::fs::read_to_string(&null).unwrap();
    assert_eq!(text.lines().count(), 200);
    assert!(text.lines().all(|l| l.ends_with("END")));

    let planted = dir.path().join("planted.txt");
    ok(&[
        "synth",
        "--bank",
        s(&bank),
        "--out",
        s(&planted),
        "--norm",
        "O(4,4,-)",
        "--n",
        "200",
        "--seed",
        "9",
        "--p-comp",
        "1",
        "--p-sanc",
        "0",
    ]);
    let again = dir.path().join("planted2.txt");
    ok(&[
        "synth",
        "--bank",
        s(&bank),
        "--out",
        s(&again),
        "--norm",
        "O(4,4,-)",
        "--n",
        "200",
        "--seed",
        "9",
        "--p-comp",
        "1",
        "--p-sanc",
        "0",
    ]);
    assert_eq!(
        std::fs::read(&planted).unwrap(),
        std::fs::read(&again).unwrap()
    );
    // Everyone complies: the first code 4 event is answered by the other side.
    for line in std::fs::read_to_string(&planted).unwrap().lines() {
        let toks: Vec<&str> = line.split_whitespace().collect();
        if let Some(i) = toks.iter().position(|t| t.ends_with("04")) {
            let answer = if toks[i] == "F04" { "B04" } else { "F04" };
            assert!(toks[i + 1..].contains(&answer), "{line}");
        }
    }

    let out = run(&[
        "synth",
        "--bank",
        s(&bank),
        "--out",
        s(&planted),
        "--null",
        "--norm",
        "O(4)",
    ]);
    assert_eq!(out.status.code(), Some(2));
}
