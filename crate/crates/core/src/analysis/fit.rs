use super::AnalysisError;

/// Fit window in periods; both ends inclusive.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitWindow {
    pub t_min: f64,
    pub t_max: f64,
}

impl Default for FitWindow {
    fn default() -> Self {
        FitWindow {
            t_min: 10.0,
            t_max: f64::INFINITY,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecayFit {
    pub tau: f64,
    pub tau_err: f64,
    pub amplitude: f64,
    pub t_min: f64,
    pub t_max: f64,
    /// Root of the (weighted) sum of squared residuals in linear space.
    pub residual: f64,
    pub points: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub enum DecayOutcome {
    Fit(DecayFit),
    Unresolvable { reason: String },
}

impl DecayOutcome {
    pub fn fit(&self) -> Option<&DecayFit> {
        match self {
            DecayOutcome::Fit(f) => Some(f),
            DecayOutcome::Unresolvable { .. } => None,
        }
    }
}

/// Weighted straight-line fit `y = a + b x`; returns `(a, b, cov_bb, cov_ab, cov_aa)`
/// for unit-variance weights.
fn weighted_line(x: &[f64], y: &[f64], w: &[f64]) -> Option<(f64, f64, f64, f64, f64)> {
    let sw: f64 = w.iter().sum();
    let sx: f64 = x.iter().zip(w).map(|(a, w)| a * w).sum();
    let sy: f64 = y.iter().zip(w).map(|(a, w)| a * w).sum();
    let xm = sx / sw;
    let ym = sy / sw;
    let sxx: f64 = x.iter().zip(w).map(|(a, w)| w * (a - xm) * (a - xm)).sum();
    let sxy: f64 = x.iter().zip(y).zip(w).map(|((a, b), w)| w * (a - xm) * (b - ym)).sum();
    if !(sxx > 0.0) || !(sw > 0.0) {
        return None;
    }
    let b = sxy / sxx;
    let a = ym - b * xm;
    let var_b = 1.0 / sxx;
    let cov_ab = -xm / sxx;
    let var_a = 1.0 / sw + xm * xm / sxx;
    Some((a, b, var_b, cov_ab, var_a))
}

/// Least-squares fit of `A exp(-t / tau)` to the points inside `window`.
///
/// With all values positive the fit is linear in `log y` (weighted by
/// `(y / stderr)^2` when errors are given); otherwise the parameters are
/// refined by damped Gauss-Newton in linear space. If errors are given the
/// uncertainty of `tau` uses them as absolute; otherwise it is scaled by the
/// residual variance.
pub fn fit_decay(
    t: &[f64],
    y: &[f64],
    stderr: Option<&[f64]>,
    window: FitWindow,
) -> Result<DecayOutcome, AnalysisError> {
    if t.len() != y.len() || stderr.is_some_and(|s| s.len() != y.len()) {
        return Err(AnalysisError::Shape("time, value and error lengths differ".into()));
    }
    let idx: Vec<usize> = (0..t.len())
        .filter(|&i| t[i] >= window.t_min && t[i] <= window.t_max)
        .collect();
    if idx.len() < 8 {
        return Err(AnalysisError::TooFewPoints {
            needed: 8,
            got: idx.len(),
        });
    }
    if idx.iter().any(|&i| !y[i].is_finite() || !t[i].is_finite()) {
        return Err(AnalysisError::Shape("non-finite input".into()));
    }
    let tw: Vec<f64> = idx.iter().map(|&i| t[i]).collect();
    let yw: Vec<f64> = idx.iter().map(|&i| y[i]).collect();
    let sw: Option<Vec<f64>> = stderr.map(|s| idx.iter().map(|&i| s[i]).collect());
    if let Some(s) = &sw {
        if yw.iter().zip(s).all(|(v, e)| v.abs() < 3.0 * e) {
            return Ok(DecayOutcome::Unresolvable {
                reason: "all values below the 3-sigma noise floor".into(),
            });
        }
    }
    let lin_w: Vec<f64> = match &sw {
        Some(s) => s.iter().map(|e| if *e > 0.0 { 1.0 / (e * e) } else { 1.0 }).collect(),
        None => vec![1.0; yw.len()],
    };
    let n = yw.len();
    let all_pos = yw.iter().all(|&v| v > 0.0);

    // Log-linear estimate on the positive points.
    let pos: Vec<usize> = (0..n).filter(|&i| yw[i] > 0.0).collect();
    if pos.len() < 2 {
        return Ok(DecayOutcome::Unresolvable {
            reason: "fewer than two positive values".into(),
        });
    }
    let lx: Vec<f64> = pos.iter().map(|&i| tw[i]).collect();
    let ly: Vec<f64> = pos.iter().map(|&i| yw[i].ln()).collect();
    let lw: Vec<f64> = pos.iter().map(|&i| lin_w[i] * yw[i] * yw[i]).collect();
    let lw = if sw.is_some() { lw } else { vec![1.0; pos.len()] };
    let Some((a0, b0, var_b0, _, _)) = weighted_line(&lx, &ly, &lw) else {
        return Err(AnalysisError::Shape("degenerate time window".into()));
    };
    let (mut ln_a, mut k) = (a0, -b0);
    let mut var_k = var_b0;
    let mut chi_scale = {
        let rss: f64 = lx
            .iter()
            .zip(&ly)
            .zip(&lw)
            .map(|((x, v), w)| w * (v - (a0 + b0 * x)).powi(2))
            .sum();
        rss / (pos.len().saturating_sub(2).max(1)) as f64
    };

    if !all_pos {
        // Damped Gauss-Newton on y = exp(ln_a - k t).
        let cost = |la: f64, kk: f64| -> f64 {
            (0..n)
                .map(|i| lin_w[i] * (yw[i] - (la - kk * tw[i]).exp()).powi(2))
                .sum()
        };
        let mut lambda = 1e-3;
        let mut c = cost(ln_a, k);
        for _ in 0..200 {
            let (mut h11, mut h12, mut h22, mut g1, mut g2) = (0.0, 0.0, 0.0, 0.0, 0.0);
            for i in 0..n {
                let m = (ln_a - k * tw[i]).exp();
                let r = yw[i] - m;
                let (d1, d2) = (m, -tw[i] * m);
                h11 += lin_w[i] * d1 * d1;
                h12 += lin_w[i] * d1 * d2;
                h22 += lin_w[i] * d2 * d2;
                g1 += lin_w[i] * d1 * r;
                g2 += lin_w[i] * d2 * r;
            }
            let (a11, a22) = (h11 * (1.0 + lambda), h22 * (1.0 + lambda));
            let det = a11 * a22 - h12 * h12;
            if det.abs() < 1e-300 {
                break;
            }
            let da = (a22 * g1 - h12 * g2) / det;
            let dk = (a11 * g2 - h12 * g1) / det;
            let c_new = cost(ln_a + da, k + dk);
            if c_new < c {
                ln_a += da;
                k += dk;
                let converged = (c - c_new) < 1e-14 * c.max(1e-300);
                c = c_new;
                lambda = (lambda / 10.0).max(1e-12);
                if converged {
                    break;
                }
            } else {
                lambda *= 10.0;
                if lambda > 1e12 {
                    break;
                }
            }
        }
        let det = h_det(&tw, &lin_w, ln_a, k);
        var_k = det.1;
        chi_scale = c / (n.saturating_sub(2).max(1)) as f64;
    }

    if !(k > 0.0) || !k.is_finite() {
        return Ok(DecayOutcome::Unresolvable {
            reason: format!("non-decaying fit (rate {k:.3e})"),
        });
    }
    let var_k = if sw.is_some() { var_k } else { var_k * chi_scale };
    let tau = 1.0 / k;
    let amplitude = ln_a.exp();
    let residual = (0..n)
        .map(|i| lin_w[i] * (yw[i] - amplitude * (-k * tw[i]).exp()).powi(2))
        .sum::<f64>()
        .sqrt();
    Ok(DecayOutcome::Fit(DecayFit {
        tau,
        tau_err: var_k.sqrt() * tau * tau,
        amplitude,
        t_min: tw[0],
        t_max: *tw.last().unwrap(),
        residual,
        points: n,
    }))
}

/// Inverse of the Gauss-Newton normal matrix at `(ln_a, k)`: `(var_a, var_k)`.
fn h_det(t: &[f64], w: &[f64], ln_a: f64, k: f64) -> (f64, f64) {
    let (mut h11, mut h12, mut h22) = (0.0, 0.0, 0.0);
    for i in 0..t.len() {
        let m = (ln_a - k * t[i]).exp();
        let (d1, d2) = (m, -t[i] * m);
        h11 += w[i] * d1 * d1;
        h12 += w[i] * d1 * d2;
        h22 += w[i] * d2 * d2;
    }
    let det = h11 * h22 - h12 * h12;
    (h22 / det, h11 / det)
}

/// `tau ~ exp(L / xi)` regression result.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalingFit {
    pub xi: f64,
    pub slope: f64,
    pub slope_err: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum XiOutcome {
    Fit(ScalingFit),
    NoExponentialScaling { slope: f64 },
}

/// Unweighted regression of `ln tau` on `L`.
pub fn fit_xi(taus: &[(f64, f64)]) -> Result<XiOutcome, AnalysisError> {
    if taus.len() < 3 {
        return Err(AnalysisError::TooFewPoints {
            needed: 3,
            got: taus.len(),
        });
    }
    if taus.iter().any(|&(_, t)| !(t > 0.0) || !t.is_finite()) {
        return Err(AnalysisError::Shape("every tau must be positive and finite".into()));
    }
    let x: Vec<f64> = taus.iter().map(|p| p.0).collect();
    let y: Vec<f64> = taus.iter().map(|p| p.1.ln()).collect();
    let w = vec![1.0; x.len()];
    let (a, b, var_b, _, _) =
        weighted_line(&x, &y, &w).ok_or_else(|| AnalysisError::Shape("all sizes equal".into()))?;
    let ym = y.iter().sum::<f64>() / y.len() as f64;
    let ss_tot: f64 = y.iter().map(|v| (v - ym).powi(2)).sum();
    let ss_res: f64 = x.iter().zip(&y).map(|(xi, yi)| (yi - a - b * xi).powi(2)).sum();
    let dof = (x.len() - 2).max(1) as f64;
    if !(b > 0.0) {
        return Ok(XiOutcome::NoExponentialScaling { slope: b });
    }
    let r_squared = if ss_tot > 0.0 { 1.0 - ss_res / ss_tot } else { 1.0 };
    Ok(XiOutcome::Fit(ScalingFit {
        xi: 1.0 / b,
        slope: b,
        slope_err: (var_b * ss_res / dof).sqrt(),
        intercept: a,
        r_squared,
    }))
}
