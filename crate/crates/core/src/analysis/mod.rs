//! Ensemble statistics, decay and scaling fits, Binder analysis, histograms,
//! autocorrelators, and CSV/SVG output.

mod autocorr;
mod binder;
mod fit;
mod hist;
pub mod output;

pub use autocorr::{autocorrelator, autocorrelator_series, burn_in_drift, default_burn_in, DriftCheck};
pub use binder::{
    binder, binder_crossing, binder_grouped, pair_crossing, scaling_collapse, BinderCrossing, BinderEstimate,
    CollapseObservable,
};
pub use fit::{fit_decay, fit_xi, DecayFit, DecayOutcome, FitWindow, ScalingFit, XiOutcome};
pub use hist::{histogram_even_m, Histogram};

use thiserror::Error;

use crate::ensemble;
use crate::protocol::{step_period, ProtocolParams, TrajectoryRecord};
use crate::rng::stream_rng;
use crate::stabilizer::{InitState, StabilizerState};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AnalysisError {
    #[error("need at least {needed} points, got {got}")]
    TooFewPoints { needed: usize, got: usize },
    #[error("shape error: {0}")]
    Shape(String),
    #[error("undefined: {0}")]
    Undefined(String),
    #[error("curves for L = {la} and L = {lb} do not cross on the grid")]
    NoCrossing { la: usize, lb: usize },
}

/// Sample mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub mean: f64,
    pub stderr: f64,
    pub n: usize,
}

impl Estimate {
    pub fn from_samples(xs: impl IntoIterator<Item = f64>) -> Self {
        let (mut n, mut s, mut q) = (0usize, 0.0, 0.0);
        for x in xs {
            n += 1;
            s += x;
            q += x * x;
        }
        let nf = n as f64;
        let mean = if n > 0 { s / nf } else { f64::NAN };
        let stderr = if n > 1 {
            (((q / nf - mean * mean) * nf / (nf - 1.0)).max(0.0) / nf).sqrt()
        } else {
            0.0
        };
        Estimate { mean, stderr, n }
    }

    /// `|a - b| / sqrt(se_a^2 + se_b^2)`.
    pub fn z_to(&self, o: &Estimate) -> f64 {
        (self.mean - o.mean).abs() / self.stderr.hypot(o.stderr)
    }
}

/// Per-time moments of the sample magnetization over trajectories.
#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleStats {
    pub samples: usize,
    pub mean: Vec<f64>,
    pub stderr: Vec<f64>,
    pub m2: Vec<f64>,
    pub m2_err: Vec<f64>,
    pub m4: Vec<f64>,
    pub m4_err: Vec<f64>,
    pub histogram: Option<Histogram>,
}

impl EnsembleStats {
    pub fn from_series<S: AsRef<[f64]>>(series: &[S]) -> Result<Self, AnalysisError> {
        let first = series.first().ok_or(AnalysisError::TooFewPoints { needed: 1, got: 0 })?;
        let t_len = first.as_ref().len();
        if series.iter().any(|s| s.as_ref().len() != t_len) {
            return Err(AnalysisError::Shape("series lengths differ".into()));
        }
        let mut st = EnsembleStats {
            samples: series.len(),
            mean: Vec::with_capacity(t_len),
            stderr: Vec::with_capacity(t_len),
            m2: Vec::with_capacity(t_len),
            m2_err: Vec::with_capacity(t_len),
            m4: Vec::with_capacity(t_len),
            m4_err: Vec::with_capacity(t_len),
            histogram: None,
        };
        for t in 0..t_len {
            let m = Estimate::from_samples(series.iter().map(|s| s.as_ref()[t]));
            let m2 = Estimate::from_samples(series.iter().map(|s| s.as_ref()[t].powi(2)));
            let m4 = Estimate::from_samples(series.iter().map(|s| s.as_ref()[t].powi(4)));
            st.mean.push(m.mean);
            st.stderr.push(m.stderr);
            st.m2.push(m2.mean);
            st.m2_err.push(m2.stderr);
            st.m4.push(m4.mean);
            st.m4_err.push(m4.stderr);
        }
        Ok(st)
    }

    pub fn from_records(records: &[TrajectoryRecord]) -> Result<Self, AnalysisError> {
        let s: Vec<&[f64]> = records.iter().map(|r| r.magnetization.as_slice()).collect();
        Self::from_series(&s)
    }

    /// Attaches the even-time histogram over `[t_from, t_to]`.
    pub fn with_histogram<S: AsRef<[f64]>>(
        mut self,
        series: &[S],
        t_from: usize,
        t_to: usize,
        bins: usize,
    ) -> Result<Self, AnalysisError> {
        self.histogram = Some(histogram_even_m(series, t_from, t_to, bins)?);
        Ok(self)
    }

    /// `(t, mean, stderr)` at even times.
    pub fn even_times(&self) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
        let idx = (0..self.mean.len()).step_by(2);
        (
            idx.clone().map(|t| t as f64).collect(),
            idx.clone().map(|t| self.mean[t]).collect(),
            idx.map(|t| self.stderr[t]).collect(),
        )
    }

    /// Decay fit on the even-time mean.
    pub fn fit_even_decay(&self, window: FitWindow) -> Result<DecayOutcome, AnalysisError> {
        let (t, y, e) = self.even_times();
        fit_decay(&t, &y, Some(&e), window)
    }
}

/// Per-trajectory staggered average `(-1)^t M(t)` over `[t_from, t_to]`,
/// then mean and standard error across trajectories.
pub fn plateau_amplitude<S: AsRef<[f64]>>(series: &[S], t_from: usize, t_to: usize) -> Estimate {
    Estimate::from_samples(series.iter().map(|s| {
        let s = s.as_ref();
        let end = t_to.min(s.len() - 1);
        let vals: Vec<f64> = (t_from..=end)
            .map(|t| if t % 2 == 0 { s[t] } else { -s[t] })
            .collect();
        vals.iter().sum::<f64>() / vals.len() as f64
    }))
}

/// First even `t >= 2` with `M(t) < threshold`; `None` if it never happens.
pub fn first_even_below(series: &[f64], threshold: f64) -> Option<usize> {
    (2..series.len()).step_by(2).find(|&t| series[t] < threshold)
}

/// Median of the values, with `None` (never crossed) ranked above every
/// number. Returns `None` when that median itself is censored.
pub fn median_censored(values: &[Option<usize>]) -> Option<f64> {
    let mut v: Vec<f64> = values.iter().map(|x| x.map_or(f64::INFINITY, |t| t as f64)).collect();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n == 0 {
        return None;
    }
    let m = if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) / 2.0
    };
    m.is_finite().then_some(m)
}

/// Sample magnetization `N^-1 sum_j x_j` from measuring every `X_j` on a
/// copy of the state.
pub fn snapshot_magnetization<R: rand::Rng + ?Sized>(s: &StabilizerState, rng: &mut R) -> f64 {
    let mut c = s.clone();
    let n = c.num_qubits();
    let sum: i64 = (0..n).map(|q| c.measure_x(q, rng).value as i64).sum();
    sum as f64 / n as f64
}

/// Steady-state magnetization snapshots for moment analysis. Each trajectory
/// starts from `|0...0>`, runs `burn_in` periods, then takes a snapshot every
/// `every` periods, `per_traj` times. Trajectory `i` uses stream
/// `(seed, point, i)`; the result has one group per trajectory.
pub fn steady_state_samples(
    params: &ProtocolParams,
    burn_in: usize,
    every: usize,
    per_traj: usize,
    n_traj: usize,
    seed: u64,
    point: u32,
) -> Vec<Vec<f64>> {
    let n = params.num_sites();
    let every = every.max(1);
    ensemble::map_indexed(n_traj, |i| {
        let mut rng = stream_rng(seed, point, i as u32);
        let mut s = StabilizerState::new(n, &InitState::AllZero);
        for _ in 0..burn_in {
            step_period(&mut s, params, &mut rng);
        }
        let mut out = Vec::with_capacity(per_traj);
        for k in 0..per_traj {
            if k > 0 {
                for _ in 0..every {
                    step_period(&mut s, params, &mut rng);
                }
            }
            out.push(snapshot_magnetization(&s, &mut rng));
        }
        out
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn moments_are_consistent() {
        let series = vec![vec![1.0, -0.5, 0.2], vec![0.6, -1.0, 0.0], vec![0.2, 0.1, -0.4]];
        let st = EnsembleStats::from_series(&series).unwrap();
        for t in 0..3 {
            assert!(st.m2[t] + 1e-15 >= st.mean[t] * st.mean[t]);
            assert!(st.m4[t] + 1e-15 >= st.m2[t] * st.m2[t]);
        }
        assert_eq!(st.samples, 3);
    }

    #[test]
    fn censored_median() {
        assert_eq!(median_censored(&[Some(4), None, Some(2)]), Some(4.0));
        assert_eq!(median_censored(&[None, None, Some(2)]), None);
        assert_eq!(first_even_below(&[1.0, -1.0, 0.9, -0.9, 0.3], 0.5), Some(4));
    }
}
