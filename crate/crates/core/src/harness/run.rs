use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use num_complex::Complex64 as C64;
use serde::Serialize;
use sha2::{Digest, Sha256};

use super::config::{value_label, ConfigFile, EngineParams, ExperimentConfig, InitSpec, Observable, SweepSpec};
use super::HarnessError;
use crate::analysis::output::{csv_table, fmt_f64, histogram_plot, line_plot, Series};
use crate::analysis::{
    binder_grouped, fit_xi, histogram_even_m, steady_state_samples, BinderEstimate, DecayOutcome, EnsembleStats,
    FitWindow, Histogram, XiOutcome,
};
use crate::automaton::run_automaton_ensemble;
use crate::dense::jump::{jump_trajectory, Drive};
use crate::dense::{cat_coherence_ensemble, DenseState, NonCliffordModel};
use crate::ensemble;
use crate::protocol::{evolve, run_ensemble, RecordOptions};
use crate::rng::stream_rng;
use crate::stabilizer::InitState;

/// Column header of every magnetization table.
pub const MAGNETIZATION_HEADER: [&str; 4] = ["t", "mean_M", "stderr_M", "mean_M_even_parity_tag"];

/// Everything computed for one experiment point.
#[derive(Debug, Clone)]
pub struct PointResult {
    pub times: Vec<f64>,
    pub mean: Vec<f64>,
    pub stderr: Vec<f64>,
    /// `1` where `t` is an even period, `0` otherwise.
    pub parity: Vec<u8>,
    pub histogram: Option<Histogram>,
    pub fit: Option<DecayOutcome>,
    pub steady: Option<BinderEstimate>,
    pub coherence: Option<(f64, f64, f64)>,
}

impl PointResult {
    fn from_series(cfg: &ExperimentConfig, series: &[Vec<f64>]) -> Result<Self, HarnessError> {
        let st = EnsembleStats::from_series(series).map_err(|e| HarnessError::Runtime(e.to_string()))?;
        let t_len = st.mean.len();
        let a = &cfg.analysis;
        let histogram = Some(
            histogram_even_m(series, a.hist_t_from, a.hist_t_to, a.hist_bins)
                .map_err(|e| HarnessError::Runtime(e.to_string()))?,
        );
        let fit = st
            .fit_even_decay(FitWindow {
                t_min: a.fit_t_min,
                ..FitWindow::default()
            })
            .ok();
        Ok(PointResult {
            times: (0..t_len).map(|t| t as f64).collect(),
            parity: (0..t_len).map(|t| (t % 2 == 0) as u8).collect(),
            mean: st.mean,
            stderr: st.stderr,
            histogram,
            fit,
            steady: None,
            coherence: None,
        })
    }

    fn magnetization_rows(&self) -> Vec<Vec<f64>> {
        (0..self.times.len())
            .map(|i| vec![self.times[i], self.mean[i], self.stderr[i], self.parity[i] as f64])
            .collect()
    }
}

fn realize_dense(cfg: &ExperimentConfig, rng: &mut crate::rng::TrajRng) -> Result<DenseState, HarnessError> {
    let n = cfg.lattice.num_sites();
    let rt = |e: String| HarnessError::Runtime(e);
    match &cfg.init {
        InitSpec::Cat { alpha } => {
            let beta = (1.0 - alpha * alpha).max(0.0).sqrt();
            DenseState::cat(n, C64::new(*alpha, 0.0), C64::new(beta, 0.0)).map_err(|e| rt(e.to_string()))
        }
        InitSpec::Protocol(init) => {
            let st = init.realize(n, rng).map_err(|e| rt(e.to_string()))?;
            match st {
                InitState::AllPlus => DenseState::plus(n),
                InitState::AllZero => DenseState::zero(n),
                InitState::ProductXPattern(p) => DenseState::x_product(&p),
            }
            .map_err(|e| rt(e.to_string()))
        }
    }
}

fn protocol_init(cfg: &ExperimentConfig) -> &crate::protocol::Init {
    match &cfg.init {
        InitSpec::Protocol(i) => i,
        InitSpec::Cat { .. } => unreachable!("cat init is limited to the jump engine"),
    }
}

/// Runs one point on stream family `(master_seed, point, *)`.
pub fn compute_point(cfg: &ExperimentConfig, point: u32) -> Result<PointResult, HarnessError> {
    let rt = |e: String| HarnessError::Runtime(e);
    let n_traj = cfg.trajectories;
    let seed = cfg.master_seed;
    match &cfg.params {
        EngineParams::Clifford(p) => match cfg.observable {
            Observable::Magnetization => {
                let recs = run_ensemble(p, protocol_init(cfg), n_traj, seed, point, RecordOptions::default())
                    .map_err(|e| rt(e.to_string()))?;
                let series: Vec<Vec<f64>> = recs.into_iter().map(|r| r.magnetization).collect();
                PointResult::from_series(cfg, &series)
            }
            Observable::SteadyState {
                burn_in,
                every,
                per_trajectory,
            } => {
                let groups = steady_state_samples(p, burn_in, every, per_trajectory, n_traj, seed, point);
                let b = binder_grouped(&groups).map_err(|e| rt(e.to_string()))?;
                Ok(PointResult {
                    times: Vec::new(),
                    mean: Vec::new(),
                    stderr: Vec::new(),
                    parity: Vec::new(),
                    histogram: None,
                    fit: None,
                    steady: Some(b),
                    coherence: None,
                })
            }
        },
        EngineParams::Dense(p) => {
            let series = ensemble::map_indexed(n_traj, |i| {
                let mut rng = stream_rng(seed, point, i as u32);
                let mut s = realize_dense(cfg, &mut rng)?;
                Ok(evolve(&mut s, p, &mut rng, RecordOptions::default()).magnetization)
            })
            .into_iter()
            .collect::<Result<Vec<_>, HarnessError>>()?;
            PointResult::from_series(cfg, &series)
        }
        EngineParams::ClassicalCA(a) => {
            let recs = run_automaton_ensemble(
                cfg.lattice.clone(),
                a,
                protocol_init(cfg),
                cfg.steps,
                n_traj,
                seed,
                point,
                RecordOptions::default(),
            )
            .map_err(|e| rt(e.to_string()))?;
            let series: Vec<Vec<f64>> = recs.into_iter().map(|r| r.magnetization).collect();
            PointResult::from_series(cfg, &series)
        }
        EngineParams::NonClifford(p) => {
            let model = NonCliffordModel::new(p.clone()).map_err(|e| rt(e.to_string()))?;
            let series = model.run_ensemble(n_traj, point);
            PointResult::from_series(cfg, &series)
        }
        EngineParams::Jump(jp) => {
            let runs = ensemble::map_indexed(n_traj, |i| {
                let mut rng = stream_rng(seed, point, i as u32);
                let s = realize_dense(cfg, &mut rng)?;
                jump_trajectory(s, &cfg.lattice, jp, &mut rng).map_err(|e| rt(e.to_string()))
            })
            .into_iter()
            .collect::<Result<Vec<_>, HarnessError>>()?;
            let series: Vec<&[f64]> = runs.iter().map(|r| r.magnetization.as_slice()).collect();
            let st = EnsembleStats::from_series(&series).map_err(|e| rt(e.to_string()))?;
            let times = runs[0].times.clone();
            let parity = times
                .iter()
                .map(|&t| match jp.drive {
                    Some(Drive::PeriodicZPulse { period, .. }) => ((t / period).floor() as i64 % 2 == 0) as u8,
                    _ => 1,
                })
                .collect();
            let finals: Vec<DenseState> = runs.into_iter().map(|r| r.final_state).collect();
            Ok(PointResult {
                times,
                mean: st.mean,
                stderr: st.stderr,
                parity,
                histogram: None,
                fit: None,
                steady: None,
                coherence: Some(cat_coherence_ensemble(&finals)),
            })
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ManifestEntry {
    pub file: String,
    pub sha256: String,
    pub bytes: u64,
}

/// Provenance record written once per run.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub config_sha256: String,
    pub code_version: String,
    pub parallel: bool,
    pub wall_clock_seconds: f64,
    pub outputs: Vec<ManifestEntry>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// Writes files under a root directory and remembers their checksums.
pub struct OutputDir {
    root: PathBuf,
    entries: Vec<ManifestEntry>,
}

impl OutputDir {
    pub fn create(root: &Path) -> Result<Self, HarnessError> {
        fs::create_dir_all(root).map_err(|e| HarnessError::Io(format!("{}: {e}", root.display())))?;
        Ok(OutputDir {
            root: root.to_path_buf(),
            entries: Vec::new(),
        })
    }

    pub fn write(&mut self, rel: &str, contents: &str) -> Result<(), HarnessError> {
        let path = self.root.join(rel);
        if let Some(dir) = path.parent() {
            fs::create_dir_all(dir).map_err(|e| HarnessError::Io(format!("{}: {e}", dir.display())))?;
        }
        fs::write(&path, contents).map_err(|e| HarnessError::Io(format!("{}: {e}", path.display())))?;
        self.entries.push(ManifestEntry {
            file: rel.to_string(),
            sha256: sha256_hex(contents.as_bytes()),
            bytes: contents.len() as u64,
        });
        Ok(())
    }

    pub fn finish(mut self, command: &str, config_text: &str, started: Instant) -> Result<PathBuf, HarnessError> {
        self.entries.sort_by(|a, b| a.file.cmp(&b.file));
        let m = RunManifest {
            command: command.to_string(),
            config_sha256: sha256_hex(config_text.as_bytes()),
            code_version: env!("CARGO_PKG_VERSION").to_string(),
            parallel: ensemble::parallel_enabled(),
            wall_clock_seconds: started.elapsed().as_secs_f64(),
            outputs: self.entries,
        };
        let path = self.root.join("manifest.json");
        let text = serde_json::to_string_pretty(&m).map_err(|e| HarnessError::Io(e.to_string()))? + "\n";
        fs::write(&path, text).map_err(|e| HarnessError::Io(format!("{}: {e}", path.display())))?;
        Ok(path)
    }
}

fn fit_row(fit: &Option<DecayOutcome>) -> (String, Vec<f64>) {
    match fit {
        Some(DecayOutcome::Fit(f)) => ("fit".into(), vec![f.tau, f.tau_err, f.amplitude, f.t_min, f.t_max]),
        _ => ("unresolvable".into(), vec![f64::NAN; 5]),
    }
}

fn write_point(out: &mut OutputDir, prefix: &str, cfg: &ExperimentConfig, r: &PointResult) -> Result<(), HarnessError> {
    if let Some(b) = &r.steady {
        out.write(
            &format!("{prefix}steady_state.csv"),
            &csv_table(
                &["U", "stderr_U", "M2", "M4", "R", "samples"],
                &[vec![b.u, b.stderr, b.m2, b.m4, b.m2.sqrt(), b.samples as f64]],
            ),
        )?;
        return Ok(());
    }
    out.write(
        &format!("{prefix}magnetization.csv"),
        &csv_table(&MAGNETIZATION_HEADER, &r.magnetization_rows()),
    )?;
    if let Some(h) = &r.histogram {
        let rows: Vec<Vec<f64>> = (0..h.bins())
            .map(|k| vec![h.edges[k], h.edges[k + 1], h.counts[k] as f64])
            .collect();
        out.write(&format!("{prefix}histogram.csv"), &csv_table(&["bin_lo", "bin_hi", "count"], &rows))?;
        if cfg.plots {
            out.write(
                &format!("{prefix}histogram.svg"),
                &histogram_plot("even-time magnetization", &h.edges, &h.counts),
            )?;
        }
    }
    if r.fit.is_some() || r.histogram.is_some() {
        let (status, v) = fit_row(&r.fit);
        let mut s = "status,tau,tau_err,amplitude,t_min,t_max\n".to_string();
        let cells: Vec<String> = v.iter().map(|x| fmt_f64(*x)).collect();
        s.push_str(&format!("{status},{}\n", cells.join(",")));
        out.write(&format!("{prefix}decay_fit.csv"), &s)?;
    }
    if let Some((pp, mm, c)) = r.coherence {
        out.write(
            &format!("{prefix}coherence.csv"),
            &csv_table(&["p_plus", "p_minus", "coherence"], &[vec![pp, mm, c]]),
        )?;
    }
    if cfg.plots {
        let even: Vec<(f64, f64)> = (0..r.times.len())
            .filter(|&i| r.parity[i] == 1)
            .map(|i| (r.times[i], r.mean[i]))
            .collect();
        let odd: Vec<(f64, f64)> = (0..r.times.len())
            .filter(|&i| r.parity[i] == 0)
            .map(|i| (r.times[i], r.mean[i]))
            .collect();
        out.write(
            &format!("{prefix}magnetization.svg"),
            &line_plot(
                "mean magnetization",
                "t",
                "M",
                &[
                    Series {
                        label: "even t",
                        points: even,
                    },
                    Series {
                        label: "odd t",
                        points: odd,
                    },
                ],
                false,
            ),
        )?;
    }
    Ok(())
}

fn output_root(cfg: &ExperimentConfig, out: Option<&Path>) -> Result<PathBuf, HarnessError> {
    out.map(Path::to_path_buf)
        .or_else(|| cfg.output.clone())
        .ok_or_else(|| HarnessError::Usage("no output directory: pass --out or set `output`".into()))
}

/// Summary of a finished run or sweep.
#[derive(Debug, Clone)]
pub struct RunSummary {
    pub root: PathBuf,
    pub manifest: PathBuf,
    pub points: Vec<PointResult>,
}

/// `run`: a config without swept keys.
pub fn run(config_text: &str, out: Option<&Path>) -> Result<RunSummary, HarnessError> {
    let started = Instant::now();
    let file = ConfigFile::parse(config_text)?;
    if let Some(s) = &file.sweep {
        return Err(HarnessError::Usage(format!("`{}` is swept; use the sweep command", s.key)));
    }
    let cfg = &file.points[0];
    let root = output_root(cfg, out)?;
    let result = compute_point(cfg, 0)?;
    let mut dir = OutputDir::create(&root)?;
    write_point(&mut dir, "", cfg, &result)?;
    let manifest = dir.finish("run", config_text, started)?;
    Ok(RunSummary {
        root,
        manifest,
        points: vec![result],
    })
}

fn is_size_key(k: &str) -> bool {
    matches!(k, "lattice.size" | "lattice.rows" | "lattice.cols")
}

/// `sweep`: one swept key; point `k` uses stream family `(seed, k, *)`.
pub fn sweep(config_text: &str, out: Option<&Path>) -> Result<RunSummary, HarnessError> {
    let started = Instant::now();
    let file = ConfigFile::parse(config_text)?;
    let spec: &SweepSpec = file
        .sweep
        .as_ref()
        .ok_or_else(|| HarnessError::Usage("no swept key: declare one key as a list of values".into()))?;
    let root = output_root(&file.points[0], out)?;
    let mut results = Vec::with_capacity(file.points.len());
    for (k, cfg) in file.points.iter().enumerate() {
        results.push(compute_point(cfg, k as u32)?);
    }
    let mut dir = OutputDir::create(&root)?;
    let mut combined = String::new();
    for (k, (cfg, r)) in file.points.iter().zip(&results).enumerate() {
        write_point(&mut dir, &format!("point_{k:02}/"), cfg, r)?;
        let label = value_label(&spec.values[k]);
        if let Some(b) = &r.steady {
            if combined.is_empty() {
                combined = format!("{},U,stderr_U,M2,M4,R\n", spec.key);
            }
            let cells: Vec<String> = [b.u, b.stderr, b.m2, b.m4, b.m2.sqrt()].iter().map(|v| fmt_f64(*v)).collect();
            combined.push_str(&format!("{label},{}\n", cells.join(",")));
        } else {
            if combined.is_empty() {
                combined = format!("{},{}\n", spec.key, MAGNETIZATION_HEADER.join(","));
            }
            for row in r.magnetization_rows() {
                let cells: Vec<String> = row.iter().map(|v| fmt_f64(*v)).collect();
                combined.push_str(&format!("{label},{}\n", cells.join(",")));
            }
        }
    }
    dir.write("combined.csv", &combined)?;

    if is_size_key(&spec.key) && results.iter().all(|r| r.steady.is_none() && r.histogram.is_some()) {
        let mut table = "L,status,tau,tau_err\n".to_string();
        let mut pts = Vec::new();
        for (k, r) in results.iter().enumerate() {
            let l = value_label(&spec.values[k]);
            let (status, v) = fit_row(&r.fit);
            table.push_str(&format!("{l},{status},{},{}\n", fmt_f64(v[0]), fmt_f64(v[1])));
            if let (Some(DecayOutcome::Fit(f)), Ok(lv)) = (&r.fit, l.parse::<f64>()) {
                pts.push((lv, f.tau));
            }
        }
        dir.write("tau_table.csv", &table)?;
        let xi = if pts.len() >= 2 { fit_xi(&pts).ok() } else { None };
        let row = match xi {
            Some(XiOutcome::Fit(f)) => format!(
                "fit,{},{},{},{},{}\n",
                fmt_f64(f.xi),
                fmt_f64(f.slope),
                fmt_f64(f.slope_err),
                fmt_f64(f.intercept),
                fmt_f64(f.r_squared)
            ),
            Some(XiOutcome::NoExponentialScaling { slope }) => {
                format!("no_exponential_scaling,nan,{},nan,nan,nan\n", fmt_f64(slope))
            }
            None => "insufficient_points,nan,nan,nan,nan,nan\n".to_string(),
        };
        dir.write("xi_fit.csv", &format!("status,xi,slope,slope_err,intercept,r_squared\n{row}"))?;
        if file.points[0].plots && !pts.is_empty() {
            let log_pts: Vec<(f64, f64)> = pts.iter().map(|&(l, t)| (l, t.ln())).collect();
            dir.write(
                "tau_vs_L.svg",
                &line_plot(
                    "lifetime scaling",
                    "L",
                    "log tau",
                    &[Series {
                        label: "log tau",
                        points: log_pts,
                    }],
                    true,
                ),
            )?;
        }
    }
    let manifest = dir.finish("sweep", config_text, started)?;
    Ok(RunSummary {
        root,
        manifest,
        points: results,
    })
}
