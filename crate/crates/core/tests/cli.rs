use std::path::Path;
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_ultradiffusion"))
}

fn write(dir: &Path, name: &str, body: &str) -> std::path::PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p
}

fn synthetic_csv(dir: &Path, stories: usize) -> std::path::PathBuf {
    let out = dir.join("synthetic");
    let status = bin()
        .args(["simulate", "--t-n", "20", "--mu", "0.1", "--m", "300", "--seed", "11"])
        .args(["--stories", &stories.to_string(), "--out-dir"])
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    out.join("events.csv")
}

#[test]
fn empty_input_is_an_input_error() {
    let dir = tempfile::tempdir().unwrap();
    let empty = write(dir.path(), "empty.csv", "");
    let header_only = write(dir.path(), "header.csv", "story_id,timestamp\n");
    for p in [empty, header_only] {
        let out = bin().args(["fit", "--input"]).arg(&p).output().unwrap();
        assert_eq!(out.status.code(), Some(1));
        assert!(!String::from_utf8_lossy(&out.stderr).is_empty());
    }
}

#[test]
fn malformed_and_missing_inputs() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write(dir.path(), "bad.csv", "story_id,timestamp\na,1\na,x\n");
    let out = bin().args(["fit", "--input"]).arg(&bad).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 3"));

    let neg = write(dir.path(), "neg.csv", "story_id,timestamp\na,-1\n");
    let out = bin().args(["compare", "--input"]).arg(&neg).output().unwrap();
    assert_eq!(out.status.code(), Some(1));

    let out = bin().args(["fit", "--input"]).arg(dir.path().join("nope.csv")).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn short_stories_are_skipped() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(dir.path(), "short.csv", "story_id,timestamp\ns,1\ns,2\ns,3\n");
    let out = bin().args(["fit", "--input"]).arg(&p).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("skipping story s"));

    let out = bin().args(["fit", "--min-events", "3", "--input"]).arg(&p).output().unwrap();
    assert!(out.status.code().is_some());
    assert!(!String::from_utf8_lossy(&out.stderr).contains("skipping"));
}

#[test]
fn fit_writes_curve_tables_and_json() {
    let dir = tempfile::tempdir().unwrap();
    let input = synthetic_csv(dir.path(), 3);
    let out_dir = dir.path().join("fit");
    let out = bin()
        .args(["fit", "--mapping", "paper", "--grid-points", "50", "--input"])
        .arg(&input)
        .arg("--out-dir")
        .arg(&out_dir)
        .output()
        .unwrap();
    assert!(out.status.code() == Some(0) || out.status.code() == Some(2));

    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out_dir.join("fits.json")).unwrap()).unwrap();
    let records = json.as_array().unwrap();
    assert_eq!(records.len(), 3);
    for r in records {
        for key in ["story_id", "h1", "h2", "h3", "r2", "t_N", "mu", "M", "mode"] {
            assert!(r.get(key).is_some(), "missing {key}");
        }
        assert_eq!(r["mode"], "paper");
        assert_eq!(r["M"], 300);
    }
    let table = std::fs::read_to_string(out_dir.join("synthetic-0.tsv")).unwrap();
    let mut lines = table.lines();
    assert_eq!(lines.next(), Some("t\tobserved\tfitted\tsimulated"));
    assert_eq!(lines.count(), 50);
}

#[test]
fn reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let input = synthetic_csv(dir.path(), 4);
    let run = |name: &str| {
        let d = dir.path().join(name);
        bin().args(["compare", "--input"]).arg(&input).arg("--out-dir").arg(&d).status().unwrap();
        bin().args(["aggregate", "--input"]).arg(&input).arg("--out-dir").arg(&d).status().unwrap();
        let mut files: Vec<_> = std::fs::read_dir(&d).unwrap().map(|e| e.unwrap().path()).collect();
        files.sort();
        files
            .iter()
            .map(|p| (p.file_name().unwrap().to_owned(), std::fs::read(p).unwrap()))
            .collect::<Vec<_>>()
    };
    let a = run("a");
    assert!(!a.is_empty());
    assert_eq!(a, run("b"));

    let again = synthetic_csv(&dir.path().join("again"), 4);
    assert_eq!(std::fs::read(&input).unwrap(), std::fs::read(again).unwrap());
}

#[test]
fn simulate_on_trace_space() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(dir.path(), "t.csv", "story_id,timestamp\nx,1\nx,5\nx,6\nx,8\nx,12\nx,17\n");
    let out = bin()
        .args(["simulate", "--mu", "1", "--rescale-distances", "--min-events", "1", "--input"])
        .arg(&p)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let json: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(json[0]["states"], 7);
}

#[test]
fn oracle_check_reports_tampered_tolerances() {
    let out = bin().args(["oracle-check", "--tolerance-scale", "0"]).output().unwrap();
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stdout).contains("FAIL"));
}
