use super::{AnalysisError, Estimate};
use crate::ensemble;
use crate::protocol::{step_period, ProtocolParams};
use crate::rng::stream_rng;
use crate::stabilizer::{InitState, StabilizerState};

/// Default burn-in: five times the longer lattice side.
pub fn default_burn_in(params: &ProtocolParams) -> usize {
    let (r, c) = params.lattice.dims();
    5 * r.max(c)
}

/// `C_t(j, j')` at several separations in time from one set of runs.
///
/// Each repetition starts from `|0...0>`, runs `burn_in` periods, measures
/// `X_{j'}` (outcome `m`), then records `m <X_j>` after each period up to the
/// largest requested `t`. Repetition `i` uses stream `(seed, 0, i)`.
pub fn autocorrelator_series(
    params: &ProtocolParams,
    j: usize,
    j_prime: usize,
    ts: &[usize],
    reps: usize,
    seed: u64,
    burn_in: Option<usize>,
) -> Result<Vec<Estimate>, AnalysisError> {
    params.validate().map_err(|e| AnalysisError::Shape(e.to_string()))?;
    let n = params.num_sites();
    if reps == 0 || j >= n || j_prime >= n {
        return Err(AnalysisError::Shape("need reps >= 1 and valid sites".into()));
    }
    let burn = burn_in.unwrap_or_else(|| default_burn_in(params));
    let t_max = ts.iter().copied().max().unwrap_or(0);
    let samples: Vec<Vec<f64>> = ensemble::map_indexed(reps, |i| {
        let mut rng = stream_rng(seed, 0, i as u32);
        let mut s = StabilizerState::new(n, &InitState::AllZero);
        for _ in 0..burn {
            step_period(&mut s, params, &mut rng);
        }
        let m = s.measure_x(j_prime, &mut rng).value as f64;
        let mut vals = vec![0.0; t_max + 1];
        vals[0] = m * s.expect_x(j) as f64;
        for v in vals.iter_mut().skip(1) {
            step_period(&mut s, params, &mut rng);
            *v = m * s.expect_x(j) as f64;
        }
        ts.iter().map(|&t| vals[t]).collect()
    });
    Ok((0..ts.len())
        .map(|k| Estimate::from_samples(samples.iter().map(|v| v[k])))
        .collect())
}

/// `C_t(j, j')` with the default burn-in.
pub fn autocorrelator(
    params: &ProtocolParams,
    j: usize,
    j_prime: usize,
    t: usize,
    reps: usize,
    seed: u64,
) -> Result<Estimate, AnalysisError> {
    Ok(autocorrelator_series(params, j, j_prime, &[t], reps, seed, None)?.remove(0))
}

/// Drift of the ensemble `<M^2>` across the last quarter of a burn-in.
#[derive(Debug, Clone, PartialEq)]
pub struct DriftCheck {
    pub early: f64,
    pub late: f64,
    pub drift: f64,
    pub stderr: f64,
    pub ok: bool,
}

/// Compares `<M^2>` at `3 burn_in / 4` and at `burn_in` with a paired
/// standard error; `ok` if the drift is below one standard error.
pub fn burn_in_drift<S: AsRef<[f64]>>(series: &[S], burn_in: usize) -> Result<DriftCheck, AnalysisError> {
    let t0 = 3 * burn_in / 4;
    if series.len() < 2 || series.iter().any(|s| s.as_ref().len() <= burn_in) {
        return Err(AnalysisError::Shape("series shorter than the burn-in".into()));
    }
    let early = Estimate::from_samples(series.iter().map(|s| s.as_ref()[t0].powi(2)));
    let late = Estimate::from_samples(series.iter().map(|s| s.as_ref()[burn_in].powi(2)));
    let d = Estimate::from_samples(
        series
            .iter()
            .map(|s| s.as_ref()[burn_in].powi(2) - s.as_ref()[t0].powi(2)),
    );
    Ok(DriftCheck {
        early: early.mean,
        late: late.mean,
        drift: d.mean,
        stderr: d.stderr,
        ok: d.mean.abs() < d.stderr || d.stderr == 0.0 && d.mean == 0.0,
    })
}
