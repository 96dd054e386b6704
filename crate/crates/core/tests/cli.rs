//! Runs the `shiftlab` binary on small files.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use shiftlab::cli::Report;

const BIN: &str = env!("CARGO_BIN_EXE_shiftlab");

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p
}

fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(BIN)
        .args(args)
        .current_dir(dir)
        .env_remove("SHIFTLAB_SEED")
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn fixtures() -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    write(
        d,
        "ones3.json",
        r#"{"name": "ones3", "rows": [[1,1,1],[1,1,1],[1,1,1]]}"#,
    );
    write(
        d,
        "b3.json",
        r#"{"name": "b3", "rows": [[1,1,1],[1,1,0],[1,1,0]]}"#,
    );
    write(d, "a41.json", r#"{"rows": [[4,1],[1,0]]}"#);
    write(d, "id2.txt", "1 0\n0 1\n");
    write(d, "golden.txt", "# golden mean shift\n1 1\n1 0\n");
    write(
        d,
        "phi.json",
        r#"{"m":0,"n":1,"source_alphabet":2,"target_alphabet":3,
            "source_matrix":[[1,1],[1,0]],"target_matrix":[[1,1,0],[0,0,1],[1,1,0]],
            "table":{"11":1,"12":2,"21":3}}"#,
    );
    write(
        d,
        "psi.json",
        r#"{"m":0,"n":0,"source_alphabet":3,"target_alphabet":2,
            "source_matrix":[[1,1,0],[0,0,1],[1,1,0]],"target_matrix":[[1,1],[1,0]],
            "table":{"1":"1","2":"1","3":"2"}}"#,
    );
    dir
}

#[test]
fn compare_distinguishes_with_exit_1() {
    let dir = fixtures();
    let o = run(dir.path(), &["compare", "ones3.json", "b3.json"]);
    assert_eq!(o.status.code(), Some(1));
    let text = stdout(&o);
    assert!(
        text.contains("e-pair: Inequivalent ((Z/2,[1]) vs (Z/2,[0]))"),
        "{text}"
    );
    assert!(text.contains("verdict: distinguished"), "{text}");

    let o = run(dir.path(), &["compare", "golden.txt", "golden.txt"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("not distinguished by these invariants"));
}

#[test]
fn invariant_of_a41() {
    let dir = fixtures();
    let o = run(dir.path(), &["invariant", "a41.json"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(
        text.contains("e-pair: (Z/4,[2]) (element order 2)"),
        "{text}"
    );
    assert!(text.contains("unit-pair: (Z/4,[0])"), "{text}");
    assert!(text.contains("e-pair vs unit-pair: Inequivalent"), "{text}");
}

#[test]
fn analyze_warns_on_identity() {
    let dir = fixtures();
    let o = run(dir.path(), &["--json", "analyze", "id2.txt"]);
    assert_eq!(o.status.code(), Some(0));
    let Report::Analyze(r) = serde_json::from_str(&stdout(&o)).unwrap() else {
        panic!("wrong report")
    };
    assert!(r.spec.is_permutation);
    assert!(!r.spec.standard_hypotheses_hold());
    assert!(!r.spec.warnings.is_empty());
}

#[test]
fn input_errors_exit_2_with_location() {
    let dir = fixtures();
    write(dir.path(), "bad.txt", "1 1\n1 q\n");
    let o = run(dir.path(), &["bf", "bad.txt"]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8(o.stderr).unwrap();
    assert!(
        err.contains("bad.txt") && err.contains("line 2, entry 2"),
        "{err}"
    );

    write(dir.path(), "ragged.json", r#"{"rows": [[1,1],[1]]}"#);
    assert_eq!(
        run(dir.path(), &["bf", "ragged.json"]).status.code(),
        Some(2)
    );
    write(dir.path(), "rect.txt", "1 1 0\n1 0 1\n");
    assert_eq!(run(dir.path(), &["bf", "rect.txt"]).status.code(), Some(2));
    assert_eq!(run(dir.path(), &["kms", "id2.txt"]).status.code(), Some(2));
    assert_eq!(
        run(dir.path(), &["bf", "missing.json"]).status.code(),
        Some(2)
    );
    assert_eq!(
        run(dir.path(), &["parry", "golden.txt"]).status.code(),
        Some(2)
    );
}

#[test]
fn json_reports_round_trip() {
    let dir = fixtures();
    let d = dir.path();
    let out_dir = d.join("eg");
    let out_dir = out_dir.to_str().unwrap();
    let cases: Vec<Vec<&str>> = vec![
        vec!["analyze", "golden.txt"],
        vec!["invariant", "a41.json"],
        vec!["compare", "ones3.json", "b3.json"],
        vec!["bf", "ones3.json"],
        vec!["k0", "a41.json"],
        vec!["kunneth", "b3.json"],
        vec!["edge-graph", "a41.json", "--out-dir", out_dir],
        vec![
            "sse",
            "random",
            "golden.txt",
            "--steps",
            "3",
            "--seed",
            "11",
        ],
        vec![
            "se", "verify", "a41.json", "a41.json", "a41.json", "a41.json", "--ell", "2",
        ],
        vec!["parry", "golden.txt", "--word", "121"],
        vec!["parry", "golden.txt", "--check", "4"],
        vec!["kms", "ones3.json", "--nmax", "4"],
        vec!["entropy", "golden.txt"],
        vec![
            "conjugacy",
            "verify",
            "phi.json",
            "psi.json",
            "--lag",
            "0",
            "--period",
            "6",
        ],
    ];
    for args in cases {
        let mut full = vec!["--json"];
        full.extend(&args);
        let o = run(d, &full);
        assert!(matches!(o.status.code(), Some(0 | 1)), "{args:?}: {:?}", o);
        let text = stdout(&o);
        let report: Report =
            serde_json::from_str(&text).unwrap_or_else(|e| panic!("{args:?}: {e}\n{text}"));
        assert_eq!(report.to_json() + "\n", text, "{args:?}");
        assert_eq!(report.exit_code(), o.status.code().unwrap(), "{args:?}");
    }
}

#[test]
fn output_is_deterministic() {
    let dir = fixtures();
    for args in [
        vec!["--json", "compare", "ones3.json", "b3.json"],
        vec!["--json", "kms", "ones3.json"],
        vec!["sse", "random", "a41.json", "--steps", "4", "--seed", "3"],
    ] {
        let first = run(dir.path(), &args);
        let second = run(dir.path(), &args);
        assert_eq!(first.stdout, second.stdout, "{args:?}");
    }
}

#[test]
fn seed_comes_from_environment() {
    let dir = fixtures();
    let with_env = Command::new(BIN)
        .args(["--json", "sse", "random", "a41.json"])
        .current_dir(dir.path())
        .env("SHIFTLAB_SEED", "17")
        .output()
        .unwrap();
    let explicit = run(
        dir.path(),
        &["--json", "sse", "random", "a41.json", "--seed", "17"],
    );
    assert_eq!(with_env.stdout, explicit.stdout);
    let Report::SseRandom(r) = serde_json::from_str(&stdout(&explicit)).unwrap() else {
        panic!("wrong report")
    };
    assert_eq!(r.seed, 17);
}

#[test]
fn edge_graph_files_feed_back_in() {
    let dir = fixtures();
    let d = dir.path();
    let o = run(d, &["edge-graph", "golden.txt", "--out-dir", "eg"]);
    assert_eq!(o.status.code(), Some(0), "{o:?}");
    for f in ["A_G.json", "R.json", "S.json"] {
        assert!(d.join("eg").join(f).exists(), "{f}");
    }
    // A = R S and A_G = S R, written as a chain file
    let chain = format!(
        r#"{{"matrices": [[[1,1],[1,0]], {}], "steps": [{{"R": {}, "S": {}}}]}}"#,
        rows_of(&d.join("eg/A_G.json")),
        rows_of(&d.join("eg/R.json")),
        rows_of(&d.join("eg/S.json"))
    );
    write(d, "chain.json", &chain);
    let o = run(d, &["sse", "verify", "chain.json"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let o = run(d, &["compare", "golden.txt", "eg/A_G.json"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
}

fn rows_of(p: &Path) -> String {
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(p).unwrap()).unwrap();
    v["rows"].to_string()
}

#[test]
fn failed_verifications_exit_1() {
    let dir = fixtures();
    let d = dir.path();
    write(
        d,
        "chain.json",
        r#"{"matrices": [[[1,1],[1,0]], [[2]]], "steps": [{"R": [[1],[1]], "S": [[1,1]]}]}"#,
    );
    let o = run(d, &["sse", "verify", "chain.json"]);
    assert_eq!(o.status.code(), Some(1), "{}", stdout(&o));
    let o = run(
        d,
        &["conjugacy", "verify", "phi.json", "psi.json", "--lag", "1"],
    );
    assert_eq!(o.status.code(), Some(1));
    let o = run(
        d,
        &[
            "se",
            "verify",
            "golden.txt",
            "golden.txt",
            "id2.txt",
            "id2.txt",
            "--ell",
            "2",
        ],
    );
    assert_eq!(o.status.code(), Some(1));
}
