use super::AnalysisError;

#[derive(Debug, Clone, PartialEq)]
pub struct BinderEstimate {
    pub u: f64,
    /// Jackknife standard error over groups.
    pub stderr: f64,
    pub m2: f64,
    pub m4: f64,
    pub samples: usize,
}

fn u_from(s2: f64, s4: f64, n: f64) -> Option<f64> {
    let m2 = s2 / n;
    let m4 = s4 / n;
    (m2 > 0.0).then(|| (3.0 - m4 / (m2 * m2)) / 2.0)
}

/// `U = (3 - <M^4> / <M^2>^2) / 2` over independent samples.
pub fn binder(samples: &[f64]) -> Result<BinderEstimate, AnalysisError> {
    let groups: Vec<&[f64]> = samples.chunks(1).collect();
    binder_grouped(&groups)
}

/// Binder parameter pooling all samples, with jackknife errors that leave
/// out one group (trajectory) at a time.
pub fn binder_grouped<G: AsRef<[f64]>>(groups: &[G]) -> Result<BinderEstimate, AnalysisError> {
    let sums: Vec<(f64, f64, f64)> = groups
        .iter()
        .map(|g| {
            let g = g.as_ref();
            let s2: f64 = g.iter().map(|m| m * m).sum();
            let s4: f64 = g.iter().map(|m| m.powi(4)).sum();
            (s2, s4, g.len() as f64)
        })
        .collect();
    let (s2, s4, n) = sums
        .iter()
        .fold((0.0, 0.0, 0.0), |a, b| (a.0 + b.0, a.1 + b.1, a.2 + b.2));
    if n < 2.0 {
        return Err(AnalysisError::TooFewPoints {
            needed: 2,
            got: n as usize,
        });
    }
    let u = u_from(s2, s4, n).ok_or(AnalysisError::Undefined("<M^2> = 0".into()))?;
    let g = sums.len() as f64;
    let mut stderr = 0.0;
    if sums.len() >= 2 {
        let loo: Vec<f64> = sums
            .iter()
            .filter_map(|(a, b, c)| u_from(s2 - a, s4 - b, n - c))
            .collect();
        if loo.len() == sums.len() {
            let mean = loo.iter().sum::<f64>() / g;
            stderr = ((g - 1.0) / g * loo.iter().map(|v| (v - mean).powi(2)).sum::<f64>()).sqrt();
        }
    }
    Ok(BinderEstimate {
        u,
        stderr,
        m2: s2 / n,
        m4: s4 / n,
        samples: n as usize,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct BinderCrossing {
    pub p_c: f64,
    /// Max minus min of the pairwise crossings.
    pub spread: f64,
    /// `(L_a, L_b, crossing)` for every pair of sizes.
    pub pairs: Vec<(usize, usize, f64)>,
}

/// First sign change of `U_a - U_b` on the grid, by linear interpolation.
pub fn pair_crossing(grid: &[f64], ua: &[f64], ub: &[f64]) -> Option<f64> {
    let d: Vec<f64> = ua.iter().zip(ub).map(|(a, b)| a - b).collect();
    for k in 0..grid.len().saturating_sub(1) {
        if d[k] == 0.0 {
            return Some(grid[k]);
        }
        if d[k] * d[k + 1] < 0.0 {
            return Some(grid[k] + (grid[k + 1] - grid[k]) * d[k] / (d[k] - d[k + 1]));
        }
    }
    (d.last() == Some(&0.0)).then(|| *grid.last().unwrap())
}

/// Pairwise crossings of Binder curves sampled on a common grid.
pub fn binder_crossing(grid: &[f64], curves: &[(usize, Vec<f64>)]) -> Result<BinderCrossing, AnalysisError> {
    if curves.len() < 2 {
        return Err(AnalysisError::TooFewPoints {
            needed: 2,
            got: curves.len(),
        });
    }
    if curves.iter().any(|c| c.1.len() != grid.len()) || grid.len() < 2 {
        return Err(AnalysisError::Shape("curves must share the grid".into()));
    }
    let mut pairs = Vec::new();
    for a in 0..curves.len() {
        for b in a + 1..curves.len() {
            let p = pair_crossing(grid, &curves[a].1, &curves[b].1).ok_or(AnalysisError::NoCrossing {
                la: curves[a].0,
                lb: curves[b].0,
            })?;
            pairs.push((curves[a].0, curves[b].0, p));
        }
    }
    let ps: Vec<f64> = pairs.iter().map(|p| p.2).collect();
    let p_c = ps.iter().sum::<f64>() / ps.len() as f64;
    let spread = ps.iter().cloned().fold(f64::NEG_INFINITY, f64::max) - ps.iter().cloned().fold(f64::INFINITY, f64::min);
    Ok(BinderCrossing { p_c, spread, pairs })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CollapseObservable {
    Binder,
    Rms,
}

fn interp(xs: &[f64], ys: &[f64], x: f64) -> Option<f64> {
    if xs.len() < 2 || x < xs[0] || x > *xs.last().unwrap() {
        return None;
    }
    let k = xs.partition_point(|&v| v <= x).clamp(1, xs.len() - 1);
    let (x0, x1) = (xs[k - 1], xs[k]);
    let f = if x1 > x0 { (x - x0) / (x1 - x0) } else { 0.0 };
    Some(ys[k - 1] + f * (ys[k] - ys[k - 1]))
}

/// Collapse quality: every point is compared with the mean of the other
/// sizes' curves, linearly interpolated at the same rescaled abscissa. The
/// mean squared deviation is divided by the mean squared rescaled ordinate,
/// so rescalings of the ordinate are compared fairly. Lower is better.
pub fn scaling_collapse(
    grid: &[f64],
    curves: &[(usize, Vec<f64>)],
    p_c: f64,
    nu: f64,
    beta: f64,
    observable: CollapseObservable,
) -> Result<f64, AnalysisError> {
    if curves.iter().any(|c| c.1.len() != grid.len()) || curves.len() < 2 {
        return Err(AnalysisError::Shape("need at least two curves on the grid".into()));
    }
    if !(nu > 0.0) {
        return Err(AnalysisError::Shape("nu must be positive".into()));
    }
    let scaled: Vec<(Vec<f64>, Vec<f64>)> = curves
        .iter()
        .map(|(l, ys)| {
            let l = *l as f64;
            let xs: Vec<f64> = grid.iter().map(|p| (p - p_c) * l.powf(1.0 / nu)).collect();
            let ys: Vec<f64> = match observable {
                CollapseObservable::Binder => ys.clone(),
                CollapseObservable::Rms => ys.iter().map(|y| y * l.powf(beta / nu)).collect(),
            };
            (xs, ys)
        })
        .collect();
    let mut dev = 0.0;
    let mut norm = 0.0;
    let mut count = 0usize;
    for (i, (xs, ys)) in scaled.iter().enumerate() {
        for (x, y) in xs.iter().zip(ys) {
            let others: Vec<f64> = scaled
                .iter()
                .enumerate()
                .filter(|(k, _)| *k != i)
                .filter_map(|(_, (ox, oy))| interp(ox, oy, *x))
                .collect();
            if others.is_empty() {
                continue;
            }
            let m = others.iter().sum::<f64>() / others.len() as f64;
            dev += (y - m).powi(2);
            norm += y * y;
            count += 1;
        }
    }
    if count == 0 {
        return Err(AnalysisError::Undefined("rescaled curves do not overlap".into()));
    }
    Ok(if norm > 0.0 { dev / norm } else { 0.0 })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binder_examples() {
        let s: Vec<f64> = (0..100).map(|i| if i % 2 == 0 { 1.0 } else { -1.0 }).collect();
        let b = binder(&s).unwrap();
        assert!((b.u - 1.0).abs() < 1e-12);
        assert!(binder(&[0.0, 0.0]).is_err());
    }

    #[test]
    fn crossing_examples() {
        let grid: Vec<f64> = (0..9).map(|i| 0.03 + 0.0025 * i as f64).collect();
        let a: Vec<f64> = grid.iter().map(|p| 1.0 - 10.0 * (p - 0.04)).collect();
        let b: Vec<f64> = grid.iter().map(|p| 1.0 - 30.0 * (p - 0.04)).collect();
        let c = binder_crossing(&grid, &[(8, a.clone()), (12, b)]).unwrap();
        assert!((c.p_c - 0.04).abs() < 1e-12);
        let par: Vec<f64> = a.iter().map(|v| v + 0.1).collect();
        assert!(matches!(
            binder_crossing(&grid, &[(8, a), (12, par)]),
            Err(AnalysisError::NoCrossing { .. })
        ));
    }

    #[test]
    fn constant_curves_collapse_perfectly() {
        let grid = [0.0, 0.1, 0.2, 0.3];
        let c = vec![(4, vec![0.5; 4]), (8, vec![0.5; 4])];
        assert_eq!(scaling_collapse(&grid, &c, 0.15, 1.7, 0.0, CollapseObservable::Binder).unwrap(), 0.0);
    }
}
