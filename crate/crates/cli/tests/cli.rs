use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

const TENT: &str = r#"{"tree": {"vertices": ["a", "b"], "edges": [["a", "b", "1"]]},
 "breakpoints": {"0": [["0", "0", "0"], ["1/2", "0", "1"], ["1", "0", "0"]]}}"#;
const HALF: &str = r#"{"tree": {"vertices": ["a", "b"], "edges": [["a", "b", "1"]]},
 "breakpoints": {"0": [["0", "0", "0"], ["1", "0", "1/2"]]}}"#;
const IDENTITY: &str = r#"{"tree": {"vertices": ["a", "b"], "edges": [["a", "b", "1"]]},
 "breakpoints": {"0": [["0", "0", "0"], ["1", "0", "1"]]}}"#;
const CONSTANT: &str = r#"{"tree": {"vertices": ["a", "b"], "edges": [["a", "b", "1"]]},
 "breakpoints": {"0": [["0", "0", "1/2"], ["1", "0", "1/2"]]}}"#;
const TRIOD_TREE: &str = r#"{"vertices": ["c", "a", "b", "d"], "edges": [["c", "a", 1], ["c", "b", 1], ["c", "d", 1]]}"#;
const TRIOD_FOLD: &str = r#"{"breakpoints": {
 "0": [["0", "0", "1/2"], ["1", "0", "1"]],
 "1": [["0", "0", "1/2"], ["1", "0", "1/4"]],
 "2": [["0", "0", "1/2"], ["1", "0", "1/4"]]}}"#;
const WHOLE: &str = r#"{"0": ["0", "1"]}"#;

struct Workspace {
    dir: tempfile::TempDir,
}

impl Workspace {
    fn new() -> Self {
        Workspace { dir: tempfile::tempdir().unwrap() }
    }

    fn file(&self, name: &str, text: &str) -> PathBuf {
        let path = self.dir.path().join(name);
        std::fs::write(&path, text).unwrap();
        path
    }

    fn out(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }
}

fn treedyn(args: &[&str], paths: &[(&str, &Path)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_treedyn"));
    cmd.args(args);
    for (flag, path) in paths {
        cmd.arg(flag).arg(path);
    }
    cmd.output().unwrap()
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn point(v: &Value) -> (u64, String) {
    (v["edge"].as_u64().unwrap(), v["t"].as_str().unwrap().to_string())
}

#[test]
fn analyze_tent() {
    let ws = Workspace::new();
    let (map, out) = (ws.file("tent.json", TENT), ws.out("run"));
    let o = treedyn(&["analyze"], &[("--map", &map), ("--out", &out)]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let report = json(&out.join("analysis.json"));
    let fixed: Vec<_> = report["fixed_points"].as_array().unwrap().iter().map(point).collect();
    assert_eq!(fixed, vec![(0, "0".into()), (0, "2/3".into())]);
    assert_eq!(report["cut_points"]["no_periodic_cut_points"], false);
    assert!(report["afp"].is_null());
    assert_eq!(report["version"], env!("CARGO_PKG_VERSION"));
    assert_eq!(report["config"]["command"], "analyze");
}

#[test]
fn analyze_contraction_on_a_triod_finds_the_attractor() {
    let ws = Workspace::new();
    let tree = ws.file("tree.json", TRIOD_TREE);
    let (map, out) = (ws.file("fold.json", TRIOD_FOLD), ws.out("run"));
    let o = treedyn(&["analyze"], &[("--tree", &tree), ("--map", &map), ("--out", &out)]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let report = json(&out.join("analysis.json"));
    assert_eq!(report["cut_points"]["no_periodic_cut_points"], true);
    let afp = point(&report["afp"]["afp"]);
    let fixed: Vec<_> = report["fixed_points"].as_array().unwrap().iter().map(point).collect();
    assert_eq!(fixed, vec![afp.clone()]);
    assert_eq!(afp, (0, "1".into()));
    assert!(report["basin"]["closure"].is_object());
}

#[test]
fn analyze_identity_warns_about_fixed_segments() {
    let ws = Workspace::new();
    let (map, out) = (ws.file("id.json", IDENTITY), ws.out("run"));
    let o = treedyn(&["analyze"], &[("--map", &map), ("--out", &out)]);
    assert_eq!(o.status.code(), Some(0));
    let report = json(&out.join("analysis.json"));
    assert_eq!(report["warnings"][0]["kind"], "FixedSegmentPresent");
    assert_eq!(report["fixed_segments"].as_array().unwrap().len(), 1);
}

#[test]
fn malformed_input_exits_with_two() {
    let ws = Workspace::new();
    let map = ws.file("bad.json", "{\n  \"tree\": [1,\n}");
    let o = treedyn(&["analyze"], &[("--map", &map), ("--out", &ws.out("run"))]);
    assert_eq!(o.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&o.stderr);
    assert!(stderr.contains("line 2 column"), "{stderr}");

    let tent = ws.file("tent.json", TENT);
    let o = treedyn(&["entropy", "--eps-list", "1/64,1/16"], &[("--map", &tent), ("--out", &ws.out("run"))]);
    assert_eq!(o.status.code(), Some(2));
    let o = treedyn(&["classify"], &[("--map", &tent), ("--out", &ws.out("run"))]);
    assert_eq!(o.status.code(), Some(2));
    let missing = ws.out("missing.json");
    let o = treedyn(&["analyze"], &[("--map", &missing)]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn classify_verdicts() {
    let ws = Workspace::new();
    let whole = ws.file("whole.json", WHOLE);
    for (name, spec, tag, period) in
        [("tent", TENT, "AsymptoticallyPeriodic", Some(1)), ("constant", CONSTANT, "Both", Some(1))]
    {
        let (map, out) = (ws.file(&format!("{name}.json"), spec), ws.out(name));
        let o = treedyn(&["classify"], &[("--map", &map), ("--continuum", &whole), ("--out", &out)]);
        assert_eq!(o.status.code(), Some(0), "{name}");
        let v = json(&out.join("verdict.json"));
        assert_eq!(v["verdict"]["tag"], tag, "{name}");
        assert_eq!(v["verdict"]["period"].as_u64(), period.map(|p: u64| p), "{name}");
        let csv = std::fs::read_to_string(out.join("orbit.csv")).unwrap();
        assert!(csv.starts_with("n,diameter,step_distance\n0,1,"), "{csv}");
    }
}

#[test]
fn undecided_exits_with_three() {
    let ws = Workspace::new();
    let (map, whole, out) = (ws.file("half.json", HALF), ws.file("whole.json", WHOLE), ws.out("run"));
    let o = treedyn(&["classify", "--budget", "1"], &[("--map", &map), ("--continuum", &whole), ("--out", &out)]);
    assert_eq!(o.status.code(), Some(3));
    assert_eq!(json(&out.join("verdict.json"))["verdict"]["tag"], "Undecided");
}

const SMALL: [&str; 6] = ["--n-max", "8", "--eps-list", "1/16,1/64", "--grid", "1/512"];

fn entropy_run(ws: &Workspace, spec: &str, name: &str) -> (Value, String) {
    let (map, out) = (ws.file(&format!("{name}.json"), spec), ws.out(name));
    let mut args = vec!["entropy"];
    args.extend(SMALL);
    let o = treedyn(&args, &[("--map", &map), ("--out", &out)]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    (json(&out.join("entropy.json")), std::fs::read_to_string(out.join("entropy.csv")).unwrap())
}

#[test]
fn entropy_tables() {
    let ws = Workspace::new();
    let (tent, csv) = entropy_run(&ws, TENT, "tent");
    let (lo, hi) = (tent["lower"].as_f64().unwrap(), tent["upper"].as_f64().unwrap());
    assert!(lo <= 2f64.ln() && 2f64.ln() <= hi, "[{lo}, {hi}]");
    assert!(lo > 0.5);
    assert!(csv.starts_with("n,epsilon,sep_lb,span_ub,rate_lb,rate_ub\n"));
    assert_eq!(csv.lines().count(), 1 + 2 * 3);
    assert!(ws.out("tent").join("plot").join("entropy_eps_1_64.csv").exists());

    let (constant, csv) = entropy_run(&ws, CONSTANT, "constant");
    assert_eq!(constant["lower"].as_f64(), Some(0.0));
    for line in csv.lines().skip(1) {
        let rate_lb = line.split(',').nth(4).unwrap();
        assert!(rate_lb.is_empty() || rate_lb == "0", "{line}");
    }
}

#[test]
fn envelope_of_a_contraction_has_zero_upper_rates() {
    let ws = Workspace::new();
    let (map, out) = (ws.file("half.json", HALF), ws.out("run"));
    let mut args = vec!["envelope"];
    args.extend(SMALL);
    let o = treedyn(&args, &[("--map", &map), ("--out", &out)]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let report = json(&out.join("envelope.json"));
    let cells = report["bounds"]["cells"].as_array().unwrap();
    let rates: Vec<f64> = cells.iter().filter_map(|c| c["rate_ub"].as_f64()).collect();
    assert!(!rates.is_empty());
    assert!(rates.iter().all(|r| r.abs() < 0.05), "{rates:?}");
    for family in report["families"].as_array().unwrap() {
        assert_eq!(family["pairs"]["sampled"], family["pairs"]["separated"]);
    }
}

#[test]
fn reports_are_deterministic() {
    let ws = Workspace::new();
    let map = ws.file("tent.json", TENT);
    let mut bytes = Vec::new();
    for (i, workers) in ["1", "3"].iter().enumerate() {
        let out = ws.out(&format!("run{i}"));
        let mut args = vec!["envelope", "--seed", "7", "--workers", workers];
        args.extend(SMALL);
        let o = treedyn(&args, &[("--map", &map), ("--out", &out)]);
        assert_eq!(o.status.code(), Some(0));
        bytes.push(std::fs::read(out.join("envelope.json")).unwrap());
    }
    assert_eq!(bytes[0], bytes[1]);
}

#[test]
fn invariants_hold_for_sample_maps() {
    let ws = Workspace::new();
    for (name, spec) in [("tent", TENT), ("half", HALF), ("identity", IDENTITY)] {
        let (map, out) = (ws.file(&format!("{name}.json"), spec), ws.out(name));
        let o = treedyn(&["verify-invariants", "--seed", "3"], &[("--map", &map), ("--out", &out)]);
        assert_eq!(o.status.code(), Some(0), "{name}");
        assert_eq!(json(&out.join("invariants.json"))["passed"], true);
    }
}
