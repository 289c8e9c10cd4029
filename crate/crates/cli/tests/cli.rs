use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_sketchsearch"))
}

fn repo() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn build_fixture_index(dir: &Path, name: &str) -> PathBuf {
    let out = dir.join(name);
    let corpus = repo().join("fixtures/sample_corpus");
    let res = run(&["index", "build", p(&corpus), "-o", p(&out)]);
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    out
}

#[test]
fn index_build_counts_fixture() {
    let tmp = tempfile::tempdir().unwrap();
    let index = build_fixture_index(tmp.path(), "a.idx");
    let info = stdout(&run(&["index", "info", p(&index)]));
    assert!(info.lines().any(|l| l == "screens\t10"), "{info}");
    assert!(info.lines().any(|l| l == "invisible_elements\t1"), "{info}");
}

#[test]
fn index_rebuild_is_byte_identical() {
    let tmp = tempfile::tempdir().unwrap();
    let a = build_fixture_index(tmp.path(), "a.idx");
    let b = build_fixture_index(tmp.path(), "b.idx");
    assert_eq!(std::fs::read(a).unwrap(), std::fs::read(b).unwrap());
}

#[test]
fn empty_corpus_is_a_data_error() {
    let tmp = tempfile::tempdir().unwrap();
    let empty = tmp.path().join("empty");
    std::fs::create_dir(&empty).unwrap();
    let res = run(&["index", "build", p(&empty), "-o", p(&tmp.path().join("x.idx"))]);
    assert_eq!(res.status.code(), Some(2));
    assert!(!tmp.path().join("x.idx").exists());
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(run(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(run(&["eval", "topk"]).status.code(), Some(1));
    assert_eq!(run(&["--help"]).status.code(), Some(0));
}

#[test]
fn classify_prints_one_row_per_record() {
    let tmp = tempfile::tempdir().unwrap();
    let file = tmp.path().join("squiggle.ndjson");
    let xs: Vec<f64> = (0..60).map(|i| i as f64 * 4.0).collect();
    let ys: Vec<f64> = (0..60).map(|i| 20.0 * (i as f64 / 3.0).sin()).collect();
    let line = serde_json::json!({ "word": "squiggle", "drawing": [[xs, ys]] }).to_string();
    std::fs::write(&file, format!("{line}\n{line}\n")).unwrap();

    let out = stdout(&run(&["classify", p(&file)]));
    let rows: Vec<Vec<&str>> = out.lines().skip(1).map(|l| l.split('\t').collect()).collect();
    assert_eq!(rows.len(), 2);
    for r in &rows {
        assert_eq!(r[1], "squiggle");
        assert_eq!(r[2], "squiggle");
        let probs: Vec<f64> = [3, 5, 7].iter().map(|&i| r[i].parse().unwrap()).collect();
        assert!(probs.windows(2).all(|w| w[0] >= w[1]));
    }

    let empty = tmp.path().join("empty.ndjson");
    std::fs::write(&empty, "").unwrap();
    assert_eq!(run(&["classify", p(&empty)]).status.code(), Some(2));
}

#[test]
fn classify_with_random_neural_weights() {
    let file = repo().join("fixtures/strokes30.ndjson");
    let out = run(&["classify", p(&file), "--recognizer", "neural", "--random-weights", "7"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(stdout(&out).lines().count(), 31);
}

#[test]
fn eval_strokes_matches_oracle_table() {
    let tmp = tempfile::tempdir().unwrap();
    let tsv = tmp.path().join("table.tsv");
    let fixture = repo().join("fixtures/strokes30.ndjson");
    let res = run(&["eval", "strokes", p(&fixture), "--out", p(&tsv)]);
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    let got = std::fs::read_to_string(tsv).unwrap();
    let want = std::fs::read_to_string(repo().join("fixtures/strokes30.expected.tsv")).unwrap();
    let rows = |s: &str| -> Vec<(String, String, String, f64)> {
        s.lines()
            .skip(1)
            .map(|l| {
                let f: Vec<&str> = l.split('\t').collect();
                (f[0].into(), f[1].into(), f[2].into(), f[3].parse().unwrap())
            })
            .collect()
    };
    let (g, w) = (rows(&got), rows(&want));
    assert_eq!(g.len(), w.len());
    for (a, b) in g.iter().zip(&w) {
        assert_eq!((&a.0, &a.1, &a.2), (&b.0, &b.1, &b.2));
        assert!((a.3 - b.3).abs() < 1e-12, "{a:?} vs {b:?}");
    }
}

#[test]
fn synth_sessions_and_topk() {
    let tmp = tempfile::tempdir().unwrap();
    let corpus = tmp.path().join("corpus");
    let sessions = tmp.path().join("sessions.ndjson");
    let index = tmp.path().join("synth.idx");
    let ranks = tmp.path().join("ranks.tsv");
    assert!(run(&["synth", "corpus", p(&corpus), "--screens", "150", "--seed", "3"]).status.success());
    let res = run(&[
        "synth", "sessions", "--screens", "150", "--seed", "3", "--queries", "20", "-o", p(&sessions),
    ]);
    assert!(res.status.success());
    assert!(run(&["index", "build", p(&corpus), "-o", p(&index)]).status.success());

    let out = run(&["eval", "topk", p(&sessions), p(&index), "--k", "1,10", "--ranks", p(&ranks)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = stdout(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "k\thits\tsessions\taccuracy");
    let hits: Vec<usize> = lines[1..].iter().map(|l| l.split('\t').nth(1).unwrap().parse().unwrap()).collect();
    assert_eq!(hits.len(), 2);
    assert!(hits[0] <= hits[1] && hits[1] <= 20);
    assert!(hits[1] >= 15, "{text}");
    assert_eq!(std::fs::read_to_string(ranks).unwrap().lines().count(), 21);

    let top = stdout(&run(&["search", p(&index), p(&sessions), "--top", "3"]));
    assert_eq!(top.lines().count(), 1 + 20 * 3);
}

#[test]
fn topk_warns_on_unknown_target() {
    let tmp = tempfile::tempdir().unwrap();
    let index = build_fixture_index(tmp.path(), "a.idx");
    let sessions = tmp.path().join("s.ndjson");
    std::fs::write(
        &sessions,
        r#"{"target":"nope","canvas":[450,800],"elements":[{"category":"slider","bbox":[225,240,350,24]}]}"#,
    )
    .unwrap();
    let out = run(&["eval", "topk", p(&sessions), p(&index), "--k", "1"]);
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("nope"));
    assert_eq!(stdout(&out).lines().nth(1), Some("1\t0\t1\t0.0000"));
}
