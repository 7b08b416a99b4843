use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::{json, Value};
use tempfile::TempDir;

fn tbf(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tbf")).args(args).output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn stdout_json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&o.stdout)))
}

struct Work {
    dir: TempDir,
    config: PathBuf,
}

impl Work {
    fn new(config: Value) -> Self {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("config.json");
        fs::write(&path, config.to_string()).unwrap();
        Self { dir, config: path }
    }

    fn desk() -> Self {
        Self::new(json!({
            "geometry": { "m_rows": 2, "m_cols": 4 },
            "ofdm": { "n_subcarriers": 64, "cp_length": 16, "slots_per_frame": 4, "symbols_per_slot": 2 },
            "dataset": { "grid": { "spacing_m": 2.0, "floors_m": [1.5], "half_width_m": 6.0 }, "n_draws": 8 },
            "wknn": { "n_queries": 20, "snr_sweep_db": [] },
        }))
    }

    fn path(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }

    fn run(&self, out: Option<&str>, rest: &[&str]) -> Output {
        let mut args = vec!["--config", self.config.to_str().unwrap()];
        let out_path = out.map(|o| self.path(o));
        if let Some(o) = &out_path {
            args.extend(["--out", o.to_str().unwrap()]);
        }
        args.extend(rest);
        tbf(&args)
    }
}

fn all_files(root: &Path) -> Vec<PathBuf> {
    let mut out: Vec<PathBuf> = walkdir::WalkDir::new(root)
        .into_iter()
        .map(Result::unwrap)
        .filter(|e| e.file_type().is_file())
        .map(|e| e.path().strip_prefix(root).unwrap().to_path_buf())
        .collect();
    out.sort();
    out
}

#[test]
fn usage_errors_exit_64_and_help_exits_0() {
    assert_eq!(code(&tbf(&["frobnicate"])), 64);
    assert_eq!(code(&tbf(&["verify"])), 64);
    assert_eq!(code(&tbf(&["--k", "many", "scene", "gen"])), 64);
    let help = tbf(&["--help"]);
    assert_eq!(code(&help), 0);
    assert!(String::from_utf8_lossy(&help.stdout).contains("dataset"));
}

#[test]
fn invalid_input_exits_1() {
    let w = Work::new(json!({ "ofdm": { "cp_lenght": 16 } }));
    let o = w.run(None, &["scene", "gen"]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("ofdm.cp_lenght"));

    let w = Work::desk();
    assert_eq!(code(&w.run(None, &["dataset", "build"])), 1);
    assert_eq!(code(&w.run(Some("o"), &["--gamma", "1.5", "dataset", "build"])), 1);
    assert_eq!(code(&w.run(Some("o"), &["--gamma", "0.1,0.2", "dataset", "build"])), 1);
    assert_eq!(code(&w.run(None, &["wknn", "eval", "--db", w.path("missing").to_str().unwrap()])), 1);
}

#[test]
fn threshold_miss_exits_2() {
    let w = Work::new(json!({
        "geometry": { "m_rows": 2, "m_cols": 2 },
        "ofdm": { "n_subcarriers": 8, "cp_length": 4, "slots_per_frame": 4, "symbols_per_slot": 2 },
    }));
    let ok = w.run(Some("t2"), &["verify", "theorem2", "--pairs", "10"]);
    assert_eq!(code(&ok), 0, "{}", String::from_utf8_lossy(&ok.stderr));
    assert!(w.path("t2/theorem2.csv").is_file());
    assert_eq!(code(&w.run(None, &["verify", "theorem2", "--pairs", "10", "--tolerance", "0"])), 2);
}

#[test]
fn theorem1_snapped_and_off_grid_pass() {
    let w = Work::new(json!({
        "geometry": { "m_rows": 4, "m_cols": 4 },
        "ofdm": { "n_subcarriers": 64, "cp_length": 16, "slots_per_frame": 4, "symbols_per_slot": 3 },
    }));
    let snapped = w.run(None, &["--snap-to-grid", "verify", "theorem1"]);
    assert_eq!(code(&snapped), 0, "{}", String::from_utf8_lossy(&snapped.stderr));
    assert!(stdout_json(&snapped)["min_fraction"].as_f64().unwrap() >= 1.0 - 1e-9);

    let off = w.run(Some("t1"), &["verify", "theorem1", "--levels", "2"]);
    assert_eq!(code(&off), 0, "{}", String::from_utf8_lossy(&off.stderr));
    let csv = fs::read_to_string(w.path("t1/theorem1_sweep.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 3 * 4 * 3);
}

#[test]
fn self_queries_give_zero_error() {
    let w = Work::desk();
    let built = w.run(Some("ds"), &["--seed", "4", "dataset", "build"]);
    assert_eq!(code(&built), 0, "{}", String::from_utf8_lossy(&built.stderr));
    assert_eq!(stdout_json(&built)["records"], 49);
    let ds = w.path("ds");
    let ds = ds.to_str().unwrap();
    let o = w.run(Some("ev"), &["wknn", "eval", "--db", ds, "--queries", ds]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let rep = stdout_json(&o);
    assert_eq!(rep["queries"], 49);
    assert!(rep["mean_error_m"].as_f64().unwrap() < 1e-6);
    assert!(!w.path("ev/snr_sweep.csv").exists());
    assert_eq!(fs::read_to_string(w.path("ev/errors.csv")).unwrap().lines().count(), 50);
}

#[test]
fn generated_queries_report_sweep() {
    let w = Work::new(json!({
        "geometry": { "m_rows": 2, "m_cols": 4 },
        "ofdm": { "n_subcarriers": 64, "cp_length": 16, "slots_per_frame": 4, "symbols_per_slot": 2 },
        "dataset": { "grid": { "spacing_m": 2.0, "floors_m": [1.5], "half_width_m": 6.0 }, "n_draws": 4 },
        "wknn": { "n_queries": 10, "snr_sweep_db": [0, 20] },
    }));
    let o = w.run(Some("ev"), &["--k", "3", "wknn", "eval"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let rep = stdout_json(&o);
    assert_eq!(rep["k"], 3);
    assert_eq!(rep["snr_sweep"].as_array().unwrap().len(), 2);
    let sweep = fs::read_to_string(w.path("ev/snr_sweep.csv")).unwrap();
    assert_eq!(sweep.lines().next().unwrap(), "snr_db,0,20");
    let table = fs::read_to_string(w.path("ev/range_table.csv")).unwrap();
    assert_eq!(table.lines().next().unwrap(), "distance_m,count,wknn");
}

#[test]
fn export_copies_bit_exactly() {
    let w = Work::desk();
    assert_eq!(code(&w.run(Some("src"), &["dataset", "build"])), 0);
    let src = w.path("src");
    let o = w.run(Some("dst"), &["export", "--from", src.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let files = all_files(&src);
    assert_eq!(files, all_files(&w.path("dst")));
    for f in &files {
        assert_eq!(fs::read(src.join(f)).unwrap(), fs::read(w.path("dst").join(f)).unwrap(), "{}", f.display());
    }
    let manifest: Value = serde_json::from_str(&fs::read_to_string(src.join("manifest.json")).unwrap()).unwrap();
    assert!(manifest["scene_config"].is_object());
    assert!(manifest["dataset_config"].is_object());

    assert_eq!(code(&w.run(Some("src"), &["export", "--from", src.to_str().unwrap()])), 1);
    fs::remove_file(src.join(&files.iter().find(|f| f.starts_with("blobs")).unwrap())).unwrap();
    assert_eq!(code(&w.run(Some("dst2"), &["export", "--from", src.to_str().unwrap()])), 1);
}

#[test]
fn preprocess_sweep_and_fingerprint_show() {
    let w = Work::desk();
    let o = w.run(Some("pp"), &["preprocess", "sweep"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let rep = stdout_json(&o);
    assert_eq!(rep["support_monotone"], true);
    assert_eq!(rep["sweep"].as_array().unwrap().len(), 5);
    assert_eq!(fs::read_to_string(w.path("pp/mask_sweep.csv")).unwrap().lines().count(), 6);

    let o = w.run(Some("fp"), &["fingerprint", "show", "--position", "3,-2,1.5", "--heading", "0.5"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let rep = stdout_json(&o);
    assert_eq!(rep["shape"], json!([8, 16, 4]));
    for name in ["angle_delay", "angle_doppler", "delay_doppler", "slice_angle", "slice_delay", "slice_doppler", "paths"] {
        assert!(w.path(&format!("fp/{name}.csv")).is_file(), "{name}");
    }
    assert_eq!(fs::read_to_string(w.path("fp/angle_delay.csv")).unwrap().lines().count(), 1 + 8 * 16);
}

#[test]
fn lemmas_pass() {
    let o = tbf(&["verify", "lemmas", "--seeds", "5"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(stdout_json(&o)["pass"], true);
}

#[test]
fn position_needs_three_coordinates() {
    let w = Work::desk();
    assert_eq!(code(&w.run(Some("fp"), &["fingerprint", "show", "--position", "1,2"])), 64);
    assert_eq!(code(&w.run(Some("fp"), &["fingerprint", "show", "--position", "-1,2,1.5"])), 0);
}
