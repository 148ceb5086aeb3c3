use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Instant;

use serde::Serialize;
use sha2::{Digest, Sha256};

use super::cache::{spectrum_difference, spectrum_of, write_atomic, Cache, Origin};
use super::config::{Experiment, ExperimentConfig};
use super::plots::{emit_plots, Plot};
use crate::classical::{
    default_geometric_mean, deviation_distribution, expansion_rate, large_dev_params, rate_table,
    rate_table_max_decrease, BirkhoffStats, ClassicalMap, LargeDevParams, SymbolRange, DEFAULT_EXPANSION_GRID,
};
use crate::quantization::{damped_propagator, PropagatorSpec};
use crate::spectral::{
    angular_moments, large_count, loglog_fit, operator_trace_sequence, strip_fraction, weyl_inequality_check,
    width, SpectrumResult, WidthFit,
};
use crate::{DenseOperator, Error, Result};

#[derive(Clone, Debug)]
pub struct RunOptions {
    /// Worker threads for the per-`N` grid.
    pub threads: usize,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self { threads: 1 }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ManifestEntry {
    pub path: PathBuf,
    pub sha256: String,
    pub bytes: u64,
}

#[derive(Clone, Debug, Serialize)]
pub struct Row {
    /// `None` for rows not tied to a matrix size.
    pub dim: Option<usize>,
    pub failed: Option<String>,
    pub columns: Vec<String>,
    pub values: Vec<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct CacheCheck {
    pub dim: usize,
    pub max_difference: f64,
    pub ok: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct RunReport {
    pub config: ExperimentConfig,
    pub config_hash: String,
    pub rows: Vec<Row>,
    pub files: Vec<ManifestEntry>,
    pub cache_check: Option<CacheCheck>,
    pub fit: Option<WidthFit>,
    pub large_dev: Vec<LargeDevParams>,
    pub elapsed_seconds: f64,
}

impl RunReport {
    pub fn failed_rows(&self) -> usize {
        self.rows.iter().filter(|r| r.failed.is_some()).count()
    }

    /// Every listed file exists and hashes to the recorded digest.
    pub fn verify_manifest(&self) -> Result<()> {
        for e in &self.files {
            let bytes = std::fs::read(&e.path)?;
            if sha256_hex(&bytes) != e.sha256 {
                return Err(Error::CorruptFile(format!("{} does not match its manifest hash", e.path.display())));
            }
        }
        Ok(())
    }
}

fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// CSV text: header, a comment row echoing the config hash and seed, then
/// the records.
fn csv_bytes(cfg_hash: &str, seed: u64, header: &[String], rows: &[Vec<String>]) -> Vec<u8> {
    let mut w = csv::WriterBuilder::new().flexible(true).from_writer(Vec::new());
    w.write_record(header).expect("in-memory csv");
    w.flush().expect("in-memory csv");
    let mut out = w.into_inner().expect("in-memory csv");
    out.extend_from_slice(format!("# config_hash={cfg_hash} seed={seed}\n").as_bytes());
    let mut w = csv::WriterBuilder::new().flexible(true).from_writer(out);
    for r in rows {
        w.write_record(r).expect("in-memory csv");
    }
    w.into_inner().expect("in-memory csv")
}

struct Output {
    name: String,
    bytes: Vec<u8>,
}

struct DimResult {
    dim: usize,
    rows: Vec<Vec<f64>>,
    files: Vec<Output>,
    origin: Option<Origin>,
    spectrum: Option<SpectrumResult>,
}

struct Context<'a> {
    cfg: &'a ExperimentConfig,
    hash: String,
    map: ClassicalMap,
    mean: f64,
    range: SymbolRange,
    cache: Option<Cache>,
    large_dev: Vec<LargeDevParams>,
}

impl Context<'_> {
    fn spec(&self, dim: usize) -> Result<PropagatorSpec> {
        PropagatorSpec::new(self.map, self.cfg.damping.clone(), dim)
    }

    fn spectrum(&self, spec: &PropagatorSpec) -> Result<(SpectrumResult, Origin)> {
        match &self.cache {
            Some(c) => c.spectrum(spec),
            None => Ok((spectrum_of(&damped_propagator(spec)?, super::cache_key(spec))?, Origin::Computed)),
        }
    }

    fn propagator(&self, spec: &PropagatorSpec) -> Result<DenseOperator> {
        match &self.cache {
            Some(c) => Ok(c.propagator(spec)?.0),
            None => damped_propagator(spec),
        }
    }

    fn csv(&self, header: &[&str], rows: &[Vec<String>]) -> Vec<u8> {
        let header: Vec<String> = header.iter().map(|s| s.to_string()).collect();
        csv_bytes(&self.hash, self.cfg.seed, &header, rows)
    }

    /// Summary columns after `N,status` for the per-`N` experiments.
    fn columns(&self) -> Vec<String> {
        let p = self.cfg.powers();
        let mut cols: Vec<String> = match self.cfg.experiment {
            Experiment::Spectrum => vec!["min_modulus".into(), "max_modulus".into()],
            Experiment::WeylLaw => {
                let mut c = vec!["geometric_mean".into(), "strip_fraction".into(), "width".into()];
                c.extend(p.iter().map(|n| format!("weyl_min_slack_n{n}")));
                c
            }
            Experiment::WidthScan => vec!["width".into()],
            Experiment::Angular => {
                let mut c: Vec<String> = p.iter().map(|k| format!("moment_abs_k{k}")).collect();
                c.extend(p.iter().map(|n| format!("trace_abs_n{n}")));
                c
            }
            Experiment::LargeDev => vec![
                "c".into(),
                "large_count".into(),
                "log_count_over_log_h".into(),
                "nu_hat".into(),
                "tau_c".into(),
            ],
            Experiment::ClassicalStats => vec![],
        };
        cols.push("residual".into());
        cols
    }

    fn run_dim(&self, dim: usize) -> Result<DimResult> {
        let spec = self.spec(dim)?;
        let (s, origin) = self.spectrum(&spec)?;
        let mut files = Vec::new();
        let mut rows = Vec::new();
        let h = 1.0 / dim as f64;
        match self.cfg.experiment {
            Experiment::Spectrum => {
                let recs: Vec<Vec<String>> = s
                    .eigenvalues
                    .iter()
                    .zip(s.moduli.iter().zip(&s.angles))
                    .enumerate()
                    .map(|(j, (z, (r, t)))| {
                        vec![(j + 1).to_string(), fmt_f64(z.re), fmt_f64(z.im), fmt_f64(*r), fmt_f64(*t)]
                    })
                    .collect();
                files.push(Output {
                    name: format!("spectrum_N{dim}.csv"),
                    bytes: self.csv(&["index", "re", "im", "modulus", "angle"], &recs),
                });
                let svg = emit_plots(&Plot::Scatter { spectrum: &s, mean: self.mean, range: self.range })?;
                files.push(Output { name: format!("spectrum_N{dim}.svg"), bytes: svg.into_bytes() });
                rows.push(vec![*s.moduli.last().unwrap(), s.moduli[0], s.residual]);
            }
            Experiment::WeylLaw => {
                let d = self.cfg.delta;
                let mut v = vec![self.mean, strip_fraction(&s, self.mean - d, self.mean + d)?, width(&s)?];
                for n in self.cfg.powers() {
                    v.push(weyl_inequality_check(&s, &spec, n)?.min_slack);
                }
                v.push(s.residual);
                rows.push(v);
                let svg = emit_plots(&Plot::Densities { spectrum: &s, mean: self.mean, range: self.range })?;
                files.push(Output { name: format!("density_N{dim}.svg"), bytes: svg.into_bytes() });
            }
            Experiment::WidthScan => rows.push(vec![width(&s)?, s.residual]),
            Experiment::Angular => {
                let p = self.cfg.powers();
                let kmax = p.iter().copied().max().unwrap_or(0);
                let moments = angular_moments(&s, kmax);
                let traces = operator_trace_sequence(&self.propagator(&spec)?, kmax);
                let mut v: Vec<f64> = p.iter().map(|&k| moments[k].norm()).collect();
                v.extend(p.iter().map(|&n| traces[n - 1].norm()));
                v.push(s.residual);
                rows.push(v);
                let svg = emit_plots(&Plot::Densities { spectrum: &s, mean: self.mean, range: self.range })?;
                files.push(Output { name: format!("density_N{dim}.svg"), bytes: svg.into_bytes() });
            }
            Experiment::LargeDev => {
                for (i, &c) in self.cfg.c_list.iter().enumerate() {
                    let count = large_count(&s, self.mean, c)?;
                    let slope = if count > 0.0 { count.ln() / h.ln() } else { f64::INFINITY };
                    let (nu, tau) = self.large_dev.get(i).map_or((f64::NAN, f64::NAN), |p| (p.nu, p.tau_c));
                    rows.push(vec![c, count, slope, nu, tau, s.residual]);
                }
            }
            Experiment::ClassicalStats => unreachable!("no per-N work"),
        }
        Ok(DimResult { dim, rows, files, origin: Some(origin), spectrum: Some(s) })
    }
}

/// Runs `jobs` on up to `threads` scoped workers; results come back in
/// input order.
fn parallel_map<T: Sync, R: Send>(items: &[T], threads: usize, f: impl Fn(&T) -> R + Sync) -> Vec<R> {
    let threads = threads.clamp(1, items.len().max(1));
    if threads == 1 {
        return items.iter().map(f).collect();
    }
    let next = AtomicUsize::new(0);
    let slots: Mutex<Vec<Option<R>>> = Mutex::new((0..items.len()).map(|_| None).collect());
    std::thread::scope(|scope| {
        for _ in 0..threads {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::SeqCst);
                if i >= items.len() {
                    break;
                }
                let r = f(&items[i]);
                slots.lock().unwrap()[i] = Some(r);
            });
        }
    });
    slots.into_inner().unwrap().into_iter().map(|r| r.expect("every job ran")).collect()
}

struct Writer {
    dir: PathBuf,
    files: Vec<ManifestEntry>,
}

impl Writer {
    fn put(&mut self, name: &str, bytes: &[u8]) -> Result<()> {
        let path = self.dir.join(name);
        write_atomic(&path, bytes)?;
        self.files.push(ManifestEntry {
            path,
            sha256: sha256_hex(bytes),
            bytes: bytes.len() as u64,
        });
        Ok(())
    }
}

fn classical_stats(cfg: &ExperimentConfig, map: &ClassicalMap) -> Result<Vec<BirkhoffStats>> {
    cfg.powers()
        .iter()
        .map(|&n| deviation_distribution(&cfg.damping, map, n, cfg.samples, cfg.seed))
        .collect()
}

/// `ℓc` grid for rate tables: 40 uniform points on `(0, 0.2]`.
fn lc_grid() -> Vec<f64> {
    (1..=40).map(|i| i as f64 * 0.005).collect()
}

pub fn run_experiment(cfg: &ExperimentConfig) -> Result<RunReport> {
    run_experiment_with(cfg, &RunOptions::default())
}

pub fn run_experiment_with(cfg: &ExperimentConfig, opts: &RunOptions) -> Result<RunReport> {
    let start = Instant::now();
    let mut cfg = cfg.clone();
    cfg.validate()?;
    let cfg = cfg;
    let map = cfg.map.classical();
    let mut ctx = Context {
        cfg: &cfg,
        hash: cfg.hash(),
        map,
        mean: default_geometric_mean(&cfg.damping),
        range: cfg.damping.range(),
        cache: cfg.cache_dir.as_ref().map(Cache::new),
        large_dev: Vec::new(),
    };
    let mut out = Writer { dir: cfg.output_dir.clone(), files: Vec::new() };
    std::fs::create_dir_all(&out.dir)?;
    let mut report_rows = Vec::new();
    let mut fit = None;
    let mut cache_check = None;

    if matches!(cfg.experiment, Experiment::LargeDev | Experiment::ClassicalStats) {
        let stats = classical_stats(&cfg, &map)?;
        let mut grid = lc_grid();
        for &c in &cfg.c_list {
            grid.push((1.0 + c / ctx.mean).ln());
        }
        grid.sort_by(f64::total_cmp);
        grid.dedup();
        let table = rate_table(&stats, &grid)?;
        let recs: Vec<Vec<String>> = table.iter().map(|&(l, r)| vec![fmt_f64(l), fmt_f64(r)]).collect();
        out.put("rate_table.csv", &ctx.csv(&["lc", "rate"], &recs))?;

        if cfg.experiment == Experiment::ClassicalStats {
            let cols = ["n", "samples", "seed", "mean", "second_moment"];
            let recs: Vec<Vec<String>> = stats
                .iter()
                .map(|s| {
                    vec![
                        s.n.to_string(),
                        s.samples.to_string(),
                        s.seed.to_string(),
                        fmt_f64(s.mean()),
                        fmt_f64(s.second_moment),
                    ]
                })
                .collect();
            out.put("classical_stats.csv", &ctx.csv(&cols, &recs))?;
            for s in &stats {
                report_rows.push(Row {
                    dim: None,
                    failed: None,
                    columns: vec!["n".into(), "mean".into(), "second_moment".into()],
                    values: vec![s.n as f64, s.mean(), s.second_moment],
                });
            }
            let first = stats.first().map_or(0.0, |s| s.second_moment);
            let top = stats.iter().map(|s| s.second_moment).fold(0.0, f64::max);
            let ratio = if first > 0.0 { top / first } else { 0.0 };
            let decrease = rate_table_max_decrease(&table);
            let gamma = expansion_rate(&map, DEFAULT_EXPANSION_GRID)?;
            let summary = vec![vec![
                fmt_f64(ctx.mean),
                fmt_f64(ctx.range.a_minus),
                fmt_f64(ctx.range.a_plus),
                fmt_f64(gamma),
                fmt_f64(ratio),
                fmt_f64(decrease),
                (decrease <= cfg.tolerances.rate_noise).to_string(),
            ]];
            let cols = [
                "geometric_mean",
                "a_minus",
                "a_plus",
                "gamma",
                "second_moment_max_ratio",
                "rate_max_decrease",
                "rate_monotone",
            ];
            out.put("classical_summary.csv", &ctx.csv(&cols, &summary))?;
        } else {
            let mut recs = Vec::new();
            for &c in &cfg.c_list {
                match large_dev_params(&cfg.damping, &map, &table, c) {
                    Ok(p) => {
                        recs.push([p.c, p.lc, p.rate, p.gamma, p.t, p.tau_c, p.nu].iter().map(|&x| fmt_f64(x)).collect());
                        ctx.large_dev.push(p);
                    }
                    Err(e) => {
                        log::warn!("large-deviation constants unavailable for c = {c}: {e}");
                        break;
                    }
                }
            }
            out.put("large_dev_params.csv", &ctx.csv(&["c", "lc", "rate", "gamma", "T", "tau_c", "nu"], &recs))?;
        }
    }

    if cfg.experiment != Experiment::ClassicalStats {
        let columns = ctx.columns();
        let results = parallel_map(&cfg.dims, opts.threads, |&dim| {
            let r = ctx.run_dim(dim);
            match &r {
                Ok(_) => log::info!("N = {dim} done"),
                Err(e) => log::error!("N = {dim} failed: {e}"),
            }
            r
        });
        let mut summary = Vec::new();
        let mut points = Vec::new();
        let mut cached: Option<(usize, SpectrumResult)> = None;
        for (&dim, r) in cfg.dims.iter().zip(results) {
            match r {
                Ok(res) => {
                    for f in &res.files {
                        out.put(&f.name, &f.bytes)?;
                    }
                    for v in &res.rows {
                        let mut rec = vec![dim.to_string(), "ok".to_string()];
                        rec.extend(v.iter().map(|&x| fmt_f64(x)));
                        rec.push(String::new());
                        summary.push(rec);
                        report_rows.push(Row {
                            dim: Some(dim),
                            failed: None,
                            columns: columns.clone(),
                            values: v.clone(),
                        });
                    }
                    if cfg.experiment == Experiment::WidthScan {
                        points.push((dim, res.rows[0][0]));
                    }
                    if cached.is_none() && res.origin == Some(Origin::Cached) {
                        cached = res.spectrum.map(|s| (res.dim, s));
                    }
                }
                Err(e) => {
                    let mut rec = vec![dim.to_string(), "FAILED".to_string()];
                    rec.extend(columns.iter().map(|_| String::new()));
                    rec.push(e.to_string());
                    summary.push(rec);
                    report_rows.push(Row {
                        dim: Some(dim),
                        failed: Some(e.to_string()),
                        columns: columns.clone(),
                        values: vec![],
                    });
                }
            }
        }
        let mut header = vec!["N", "status"];
        header.extend(columns.iter().map(String::as_str));
        header.push("error");
        let name = format!("{}.csv", cfg.experiment.name().replace('-', "_"));
        out.put(&name, &ctx.csv(&header, &summary))?;

        if cfg.experiment == Experiment::WidthScan && !points.is_empty() {
            let usable: Vec<(usize, f64)> = points.iter().copied().filter(|p| p.1 > 0.0).collect();
            match loglog_fit(&usable) {
                Ok(f) => {
                    let rec = vec![vec![fmt_f64(f.a), fmt_f64(f.b), fmt_f64(f.residual), fmt_f64(f.b_stderr)]];
                    out.put("width_fit.csv", &ctx.csv(&["A", "B", "residual", "B_stderr"], &rec))?;
                    fit = Some(f);
                }
                Err(e) => log::warn!("width fit skipped: {e}"),
            }
            let svg = emit_plots(&Plot::Width { points: &points, fit: fit.as_ref() })?;
            out.put("width_scan.svg", svg.as_bytes())?;
        }

        if let Some((dim, s)) = cached {
            let fresh = spectrum_of(&damped_propagator(&ctx.spec(dim)?)?, s.provenance.clone())?;
            let diff = spectrum_difference(&s, &fresh);
            let ok = diff <= cfg.tolerances.cache;
            if !ok {
                log::warn!("cached spectrum for N = {dim} differs from a fresh one by {diff:e}");
            }
            cache_check = Some(CacheCheck { dim, max_difference: diff, ok });
        }
    }

    let report = RunReport {
        config: cfg.clone(),
        config_hash: ctx.hash.clone(),
        rows: report_rows,
        files: out.files,
        cache_check,
        fit,
        large_dev: ctx.large_dev,
        elapsed_seconds: start.elapsed().as_secs_f64(),
    };
    let manifest = serde_json::to_vec_pretty(&report).expect("report serializes");
    write_atomic(&cfg.output_dir.join("manifest.json"), &manifest)?;
    Ok(report)
}

/// Relative paths of the files a report wrote, for display.
pub fn relative_files<'a>(report: &'a RunReport, base: &'a Path) -> impl Iterator<Item = PathBuf> + 'a {
    report
        .files
        .iter()
        .map(move |e| e.path.strip_prefix(base).unwrap_or(&e.path).to_path_buf())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::config::parse_config_str;

    fn config(experiment: &str, damping: &str, dims: &str, out: &Path) -> ExperimentConfig {
        let text = format!(
            r#"{{"experiment":"{experiment}","map":{{"m":1,"alpha":0.05}},"damping":{damping},"N_list":{dims},"samples":200,"output_dir":{:?}}}"#,
            out.display().to_string()
        );
        parse_config_str(&text).unwrap()
    }

    #[test]
    fn unitary_spectrum_run() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = config("spectrum", r#"{"kind":"constant","value":1.0}"#, "[16]", dir.path());
        let report = run_experiment(&cfg).unwrap();
        report.verify_manifest().unwrap();
        let text = std::fs::read_to_string(dir.path().join("spectrum_N16.csv")).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "index,re,im,modulus,angle");
        assert!(lines[1].starts_with("# config_hash="));
        assert_eq!(lines.len(), 18);
        for l in &lines[2..] {
            let r: f64 = l.split(',').nth(3).unwrap().parse().unwrap();
            assert!((r - 1.0).abs() < 1e-9);
        }
        let svg = std::fs::read_to_string(dir.path().join("spectrum_N16.svg")).unwrap();
        assert_eq!(svg.matches(r#"class="pt""#).count(), 16);
        assert_eq!(svg.matches(r#"class="ref""#).count(), 1);
        assert!(dir.path().join("manifest.json").exists());
    }

    #[test]
    fn parallel_map_keeps_order() {
        let items: Vec<usize> = (0..23).collect();
        assert_eq!(parallel_map(&items, 4, |&x| x * x), items.iter().map(|x| x * x).collect::<Vec<_>>());
    }

    #[test]
    fn rerun_is_byte_identical_and_cache_is_checked() {
        let dir = tempfile::tempdir().unwrap();
        let cache = dir.path().join("cache");
        let mut a = config("weyl-law", r#"{"kind":"a2"}"#, "[24, 32]", &dir.path().join("a"));
        a.cache_dir = Some(cache.clone());
        let ra = run_experiment_with(&a, &RunOptions { threads: 2 }).unwrap();
        assert!(ra.cache_check.is_none());
        let mut b = a.clone();
        b.output_dir = dir.path().join("b");
        let rb = run_experiment_with(&b, &RunOptions { threads: 2 }).unwrap();
        let check = rb.cache_check.as_ref().unwrap();
        assert!(check.ok && check.max_difference <= 1e-12);
        for (x, y) in ra.files.iter().zip(&rb.files) {
            assert_eq!(x.sha256, y.sha256, "{}", x.path.display());
        }
        let c = RunOptions { threads: 1 };
        let mut d = a.clone();
        d.output_dir = dir.path().join("d");
        d.cache_dir = None;
        let rd = run_experiment_with(&d, &c).unwrap();
        for (x, y) in ra.files.iter().zip(&rd.files) {
            assert_eq!(x.sha256, y.sha256);
        }
    }

    #[test]
    fn classical_and_large_dev_runs() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = config("classical-stats", r#"{"kind":"a2"}"#, "[]", dir.path());
        let r = run_experiment(&cfg).unwrap();
        assert_eq!(r.rows.len(), 4);
        assert!(dir.path().join("classical_summary.csv").exists());
        let cfg = config("large-dev", r#"{"kind":"a2"}"#, "[16]", &dir.path().join("ld"));
        let r = run_experiment(&cfg).unwrap();
        assert_eq!(r.large_dev.len(), 1);
        assert!((r.large_dev[0].t - 0.089).abs() < 0.002);
        r.verify_manifest().unwrap();
    }

    #[test]
    fn width_scan_and_angular_runs() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = config("width-scan", r#"{"kind":"a2"}"#, "[16, 24, 32]", dir.path());
        let r = run_experiment(&cfg).unwrap();
        assert!(r.fit.is_some());
        let svg = std::fs::read_to_string(dir.path().join("width_scan.svg")).unwrap();
        assert_eq!(svg.matches("<polyline").count(), 2);
        let cfg = config("angular", r#"{"kind":"a1"}"#, "[16]", &dir.path().join("ang"));
        let r = run_experiment(&cfg).unwrap();
        assert_eq!(r.rows[0].values.len(), 11);
    }

    #[test]
    fn failed_rows_are_marked() {
        let dir = tempfile::tempdir().unwrap();
        let cache = dir.path().join("cache");
        let cfg0 = config("width-scan", r#"{"kind":"a2"}"#, "[8]", dir.path());
        // a file where the cache directory should be makes every write fail
        std::fs::write(&cache, b"not a directory").unwrap();
        let mut cfg = cfg0.clone();
        cfg.cache_dir = Some(cache);
        let r = run_experiment(&cfg).unwrap();
        assert_eq!(r.failed_rows(), 1);
        let text = std::fs::read_to_string(dir.path().join("width_scan.csv")).unwrap();
        assert!(text.lines().nth(2).unwrap().starts_with("8,FAILED"));
    }
}
