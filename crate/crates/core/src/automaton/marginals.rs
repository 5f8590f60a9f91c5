use super::AutomatonError;
use crate::protocol::TrajectoryRecord;

/// Running per-site, per-time sums of `<X_j>(t)` over trajectories.
#[derive(Debug, Clone, PartialEq)]
pub struct SiteMarginals {
    pub times: usize,
    pub sites: usize,
    pub count: usize,
    sum: Vec<f64>,
    sum_sq: Vec<f64>,
}

impl SiteMarginals {
    pub fn new(times: usize, sites: usize) -> Self {
        SiteMarginals {
            times,
            sites,
            count: 0,
            sum: vec![0.0; times * sites],
            sum_sq: vec![0.0; times * sites],
        }
    }

    /// Adds one row-major `(t, j)` series.
    pub fn add_series(&mut self, series: &[f32]) -> Result<(), AutomatonError> {
        if series.len() != self.sum.len() {
            return Err(AutomatonError::Shape(format!(
                "series of length {} for {} x {} marginals",
                series.len(),
                self.times,
                self.sites
            )));
        }
        for ((s, q), &v) in self.sum.iter_mut().zip(self.sum_sq.iter_mut()).zip(series) {
            let v = v as f64;
            *s += v;
            *q += v * v;
        }
        self.count += 1;
        Ok(())
    }

    pub fn add_record(&mut self, rec: &TrajectoryRecord) -> Result<(), AutomatonError> {
        let s = rec
            .site_x
            .as_ref()
            .ok_or_else(|| AutomatonError::Shape("record has no site series".into()))?;
        self.add_series(s)
    }

    pub fn from_records(records: &[TrajectoryRecord]) -> Result<Self, AutomatonError> {
        let first = records.first().ok_or_else(|| AutomatonError::Shape("no records".into()))?;
        let times = first.magnetization.len();
        let len = first.site_x.as_ref().map_or(0, |v| v.len());
        if times == 0 || len % times != 0 {
            return Err(AutomatonError::Shape("inconsistent site series".into()));
        }
        let mut m = SiteMarginals::new(times, len / times);
        for r in records {
            m.add_record(r)?;
        }
        Ok(m)
    }

    pub fn merge(&mut self, other: &SiteMarginals) -> Result<(), AutomatonError> {
        if (self.times, self.sites) != (other.times, other.sites) {
            return Err(AutomatonError::Shape("marginal shapes differ".into()));
        }
        for (a, b) in self.sum.iter_mut().zip(&other.sum) {
            *a += b;
        }
        for (a, b) in self.sum_sq.iter_mut().zip(&other.sum_sq) {
            *a += b;
        }
        self.count += other.count;
        Ok(())
    }

    pub fn mean(&self, t: usize, j: usize) -> f64 {
        self.sum[t * self.sites + j] / self.count as f64
    }

    /// Standard error of the mean.
    pub fn stderr(&self, t: usize, j: usize) -> f64 {
        let n = self.count as f64;
        if self.count < 2 {
            return 0.0;
        }
        let i = t * self.sites + j;
        let m = self.sum[i] / n;
        let var = ((self.sum_sq[i] / n - m * m) * n / (n - 1.0)).max(0.0);
        (var / n).sqrt()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MarginalReport {
    pub max_deviation: f64,
    /// Largest `|difference| / combined SE` over entries with nonzero SE.
    pub max_z: f64,
    /// `(t, j)` of the largest `z`.
    pub worst: (usize, usize),
    pub compared: usize,
    pub failures: usize,
    pub pass: bool,
}

/// Compares two marginal tables entry by entry. An entry fails if its
/// difference exceeds `n_se` combined standard errors; entries where both
/// standard errors vanish must agree to `1e-12`.
pub fn marginals_match(
    quantum: &SiteMarginals,
    classical: &SiteMarginals,
    n_se: f64,
) -> Result<MarginalReport, AutomatonError> {
    if (quantum.times, quantum.sites) != (classical.times, classical.sites) {
        return Err(AutomatonError::Shape(format!(
            "{}x{} vs {}x{}",
            quantum.times, quantum.sites, classical.times, classical.sites
        )));
    }
    if quantum.count == 0 || classical.count == 0 {
        return Err(AutomatonError::Shape("empty marginals".into()));
    }
    let mut rep = MarginalReport {
        max_deviation: 0.0,
        max_z: 0.0,
        worst: (0, 0),
        compared: 0,
        failures: 0,
        pass: true,
    };
    for t in 0..quantum.times {
        for j in 0..quantum.sites {
            let d = (quantum.mean(t, j) - classical.mean(t, j)).abs();
            let se = quantum.stderr(t, j).hypot(classical.stderr(t, j));
            rep.max_deviation = rep.max_deviation.max(d);
            rep.compared += 1;
            let bad = if se == 0.0 {
                d > 1e-12
            } else {
                let z = d / se;
                if z > rep.max_z {
                    rep.max_z = z;
                    rep.worst = (t, j);
                }
                z > n_se
            };
            if bad {
                rep.failures += 1;
            }
        }
    }
    rep.pass = rep.failures == 0;
    Ok(rep)
}
