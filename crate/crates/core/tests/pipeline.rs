use std::path::Path;

use qmap_core::harness::{parse_config_str, run_experiment, run_experiment_with, Cache, Origin, RunOptions};
use qmap_core::quantization::PropagatorSpec;
use qmap_core::classical::{ClassicalMap, DampingSymbol};

fn config(exp: &str, extra: &str, out: &Path) -> qmap_core::harness::ExperimentConfig {
    let text = format!(
        r#"{{"experiment":"{exp}","map":{{"m":1,"alpha":0.05}},"damping":{{"kind":"a2"}},"samples":500{extra}}}"#
    );
    let mut cfg = parse_config_str(&text).unwrap();
    cfg.output_dir = out.to_path_buf();
    cfg
}

fn names(report: &qmap_core::harness::RunReport) -> Vec<String> {
    report
        .files
        .iter()
        .map(|f| f.path.file_name().unwrap().to_string_lossy().into_owned())
        .collect()
}

#[test]
fn every_experiment_writes_its_tables() {
    let dir = tempfile::tempdir().unwrap();
    let cases = [
        ("spectrum", r#","N_list":[12]"#, "spectrum_N12.csv"),
        ("weyl-law", r#","N_list":[12,16]"#, "weyl_law.csv"),
        ("width-scan", r#","N_list":[12,16,20]"#, "width_fit.csv"),
        ("angular", r#","N_list":[12]"#, "angular.csv"),
        ("large-dev", r#","N_list":[12,16]"#, "large_dev.csv"),
        ("classical-stats", r#","N_list":[]"#, "classical_stats.csv"),
    ];
    for (exp, extra, expected) in cases {
        let out = dir.path().join(exp);
        let report = run_experiment(&config(exp, extra, &out)).unwrap();
        assert_eq!(report.failed_rows(), 0, "{exp}");
        assert!(names(&report).iter().any(|n| n == expected), "{exp}: {:?}", names(&report));
        assert!(out.join("manifest.json").exists());
        report.verify_manifest().unwrap();
        let table = std::fs::read_to_string(out.join(expected)).unwrap();
        assert!(table.lines().nth(1).unwrap().starts_with("# config_hash="), "{exp}");
    }
}

#[test]
fn width_scan_reports_fit() {
    let dir = tempfile::tempdir().unwrap();
    let report = run_experiment(&config("width-scan", r#","N_list":[16,24,32,48]"#, dir.path())).unwrap();
    let fit = report.fit.unwrap();
    assert_eq!(fit.points.len(), 4);
    assert!(fit.a.is_finite() && fit.b.is_finite());
}

#[test]
fn cached_run_matches_fresh_run() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = config("weyl-law", r#","N_list":[20,24]"#, &dir.path().join("a"));
    cfg.cache_dir = Some(dir.path().join("cache"));
    let first = run_experiment_with(&cfg, &RunOptions { threads: 2 }).unwrap();
    cfg.output_dir = dir.path().join("b");
    let second = run_experiment(&cfg).unwrap();
    let check = second.cache_check.unwrap();
    assert!(check.ok, "{check:?}");
    assert_eq!(first.config_hash, second.config_hash);
    let a = std::fs::read(dir.path().join("a/weyl_law.csv")).unwrap();
    let b = std::fs::read(dir.path().join("b/weyl_law.csv")).unwrap();
    assert_eq!(a, b);
}

#[test]
fn cache_round_trips_spectra() {
    let dir = tempfile::tempdir().unwrap();
    let cache = Cache::new(dir.path());
    let spec = PropagatorSpec::new(ClassicalMap::new(1, 0.05), DampingSymbol::A2, 18).unwrap();
    let (fresh, o1) = cache.spectrum(&spec).unwrap();
    let (cached, o2) = cache.spectrum(&spec).unwrap();
    assert_eq!(o1, Origin::Computed);
    assert_eq!(o2, Origin::Cached);
    assert_eq!(fresh.eigenvalues, cached.eigenvalues);
    assert_eq!(fresh.residual, cached.residual);
    // computing a spectrum also stores its operator
    let (op, o3) = cache.propagator(&spec).unwrap();
    assert_eq!(o3, Origin::Cached);
    assert_eq!(op.dim(), 18);
}

#[test]
fn seed_changes_sampled_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = config("classical-stats", r#","N_list":[]"#, &dir.path().join("s1"));
    let a = run_experiment(&cfg).unwrap();
    cfg.seed += 1;
    cfg.output_dir = dir.path().join("s2");
    let b = run_experiment(&cfg).unwrap();
    assert_ne!(a.config_hash, b.config_hash);
    let ta = std::fs::read_to_string(dir.path().join("s1/classical_stats.csv")).unwrap();
    let tb = std::fs::read_to_string(dir.path().join("s2/classical_stats.csv")).unwrap();
    assert_ne!(ta, tb);
}
