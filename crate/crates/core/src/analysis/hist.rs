use super::AnalysisError;

/// Fixed-width histogram on `[lo, hi]`; the top edge belongs to the last bin.
#[derive(Debug, Clone, PartialEq)]
pub struct Histogram {
    pub edges: Vec<f64>,
    pub counts: Vec<u64>,
}

impl Histogram {
    pub fn new(bins: usize, lo: f64, hi: f64) -> Result<Self, AnalysisError> {
        if bins < 8 {
            return Err(AnalysisError::Shape(format!("need at least 8 bins, got {bins}")));
        }
        if !(hi > lo) {
            return Err(AnalysisError::Shape("empty histogram range".into()));
        }
        let w = (hi - lo) / bins as f64;
        Ok(Histogram {
            edges: (0..=bins).map(|i| lo + w * i as f64).collect(),
            counts: vec![0; bins],
        })
    }

    pub fn bins(&self) -> usize {
        self.counts.len()
    }

    pub fn bin_of(&self, v: f64) -> Option<usize> {
        let (lo, hi) = (self.edges[0], *self.edges.last().unwrap());
        if !(v >= lo && v <= hi) {
            return None;
        }
        let b = ((v - lo) / (hi - lo) * self.bins() as f64).floor() as usize;
        Some(b.min(self.bins() - 1))
    }

    /// Adds `v`; values outside the range are dropped and reported.
    pub fn add(&mut self, v: f64) -> bool {
        match self.bin_of(v) {
            Some(b) => {
                self.counts[b] += 1;
                true
            }
            None => false,
        }
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn centers(&self) -> Vec<f64> {
        self.edges.windows(2).map(|w| (w[0] + w[1]) / 2.0).collect()
    }

    /// Nonempty bins whose count is at least both neighbors' and strictly
    /// above one of them (plateaus report their first bin).
    pub fn local_maxima(&self) -> Vec<usize> {
        let c = &self.counts;
        let n = c.len();
        let mut out = Vec::new();
        let mut i = 0;
        while i < n {
            let mut k = i;
            while k + 1 < n && c[k + 1] == c[i] {
                k += 1;
            }
            let left = if i == 0 { 0 } else { c[i - 1] };
            let right = if k + 1 == n { 0 } else { c[k + 1] };
            if c[i] > 0 && c[i] > left && c[i] > right {
                out.push(i);
            }
            i = k + 1;
        }
        out
    }

    /// The `k` highest local maxima, highest first.
    pub fn dominant_peaks(&self, k: usize) -> Vec<usize> {
        let mut m = self.local_maxima();
        m.sort_by(|a, b| self.counts[*b].cmp(&self.counts[*a]).then(a.cmp(b)));
        m.truncate(k);
        m
    }

    /// Fraction of the mass in bins whose center is above `x`.
    pub fn fraction_above(&self, x: f64) -> f64 {
        let t = self.total();
        if t == 0 {
            return f64::NAN;
        }
        let above: u64 = self
            .centers()
            .iter()
            .zip(&self.counts)
            .filter(|(c, _)| **c > x)
            .map(|(_, n)| *n)
            .sum();
        above as f64 / t as f64
    }

    /// `(<M^2>, <M^4>)` evaluated at the bin centers.
    pub fn moments(&self) -> (f64, f64) {
        let t = self.total() as f64;
        let (mut m2, mut m4) = (0.0, 0.0);
        for (c, n) in self.centers().iter().zip(&self.counts) {
            m2 += *n as f64 * c * c;
            m4 += *n as f64 * c.powi(4);
        }
        (m2 / t, m4 / t)
    }

    pub fn binder(&self) -> f64 {
        let (m2, m4) = self.moments();
        (3.0 - m4 / (m2 * m2)) / 2.0
    }
}

/// Histogram of the sample magnetization over all series at the even times
/// in `[t_from, t_to]`, on `[-1, 1]`.
pub fn histogram_even_m<S: AsRef<[f64]>>(
    series: &[S],
    t_from: usize,
    t_to: usize,
    bins: usize,
) -> Result<Histogram, AnalysisError> {
    let mut h = Histogram::new(bins, -1.0, 1.0)?;
    for s in series {
        let s = s.as_ref();
        let end = t_to.min(s.len().saturating_sub(1));
        for t in (t_from..=end).filter(|t| t % 2 == 0) {
            h.add(s[t]);
        }
    }
    Ok(h)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn top_bin_and_peaks() {
        let series = vec![vec![1.0, -1.0, 1.0, -1.0]; 3];
        let h = histogram_even_m(&series, 0, 3, 10).unwrap();
        assert_eq!(h.counts[9], 6);
        assert_eq!(h.total(), 6);

        let mixed = vec![vec![1.0], vec![-1.0], vec![1.0], vec![-1.0]];
        let h = histogram_even_m(&mixed, 0, 0, 8).unwrap();
        assert_eq!(h.local_maxima(), vec![0, 7]);
        assert_eq!(h.counts[0], h.counts[7]);
        assert!(Histogram::new(7, -1.0, 1.0).is_err());
    }
}
