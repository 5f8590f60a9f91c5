use num_complex::Complex64 as C64;

use super::kernels::{self, apply_op_comb, conj_matrix, i_pow};
use super::{DenseError, DenseState, PauliMask, MAX_DENSITY_QUBITS};

/// Density matrix stored as a vector on `2n` qubits: entry
/// `ket | (bra << n)` holds `rho[ket][bra]`. A conjugation `U rho U^dag`
/// becomes `U` on the ket bits and `conj(U)` on the bra bits.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    n: usize,
    data: Vec<C64>,
}

impl DensityMatrix {
    pub fn from_pure(psi: &DenseState) -> Result<Self, DenseError> {
        Self::from_pure_with_cap(psi, MAX_DENSITY_QUBITS)
    }

    /// Like [`DensityMatrix::from_pure`] with a caller-chosen qubit cap.
    pub fn from_pure_with_cap(psi: &DenseState, cap: usize) -> Result<Self, DenseError> {
        let n = psi.num_qubits();
        if n > cap {
            return Err(DenseError::TooLarge { n, cap });
        }
        let a = psi.amplitudes();
        let dim = 1usize << n;
        let mut data = vec![C64::new(0.0, 0.0); dim * dim];
        for b in 0..dim {
            let cb = a[b].conj();
            for k in 0..dim {
                data[k | (b << n)] = a[k] * cb;
            }
        }
        Ok(DensityMatrix { n, data })
    }

    pub fn zeros(n: usize) -> Self {
        DensityMatrix {
            n,
            data: vec![C64::new(0.0, 0.0); 1 << (2 * n)],
        }
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        1 << self.n
    }

    pub fn get(&self, ket: usize, bra: usize) -> C64 {
        self.data[ket | (bra << self.n)]
    }

    pub fn set(&mut self, ket: usize, bra: usize, v: C64) {
        let n = self.n;
        self.data[ket | (bra << n)] = v;
    }

    fn bra_k(p: PauliMask) -> u32 {
        (4 - p.y_count() % 4) % 4
    }

    /// `rho <- P rho P`.
    pub fn conj_pauli(&mut self, p: PauliMask) {
        let n = self.n;
        let (zero, one) = (C64::new(0.0, 0.0), C64::new(1.0, 0.0));
        apply_op_comb(&mut self.data, p.x, p.z, p.y_count(), zero, one);
        apply_op_comb(&mut self.data, p.x << n, p.z << n, Self::bra_k(p), zero, one);
    }

    /// `rho <- R rho R^dag` with `R = exp(-i theta P / 2)`.
    pub fn conj_rotation(&mut self, p: PauliMask, theta: f64) {
        let n = self.n;
        let (s, c) = (theta / 2.0).sin_cos();
        apply_op_comb(&mut self.data, p.x, p.z, p.y_count(), C64::new(c, 0.0), C64::new(0.0, -s));
        apply_op_comb(&mut self.data, p.x << n, p.z << n, Self::bra_k(p), C64::new(c, 0.0), C64::new(0.0, s));
    }

    /// `rho <- Pi rho Pi` with `Pi = (1 + w P) / 2`; no renormalization.
    pub fn sandwich_projector(&mut self, p: PauliMask, w: i8) {
        let n = self.n;
        let (a, b) = (C64::new(0.5, 0.0), C64::new(0.5 * w as f64, 0.0));
        apply_op_comb(&mut self.data, p.x, p.z, p.y_count(), a, b);
        apply_op_comb(&mut self.data, p.x << n, p.z << n, Self::bra_k(p), a, b);
    }

    /// `rho <- U rho U^dag` for a single-qubit `U`.
    pub fn conj_1q(&mut self, q: usize, m: [[C64; 2]; 2]) {
        kernels::apply_1q(&mut self.data, q, m);
        kernels::apply_1q(&mut self.data, q + self.n, conj_matrix(m));
    }

    /// `rho <- D rho D^dag` for a diagonal `D` with entries `f(basis index)`.
    pub fn conj_diag(&mut self, f: impl Fn(usize) -> C64) {
        let n = self.n;
        let mask = (1usize << n) - 1;
        let diag: Vec<C64> = (0..1usize << n).map(&f).collect();
        for (i, v) in self.data.iter_mut().enumerate() {
            *v *= diag[i & mask] * diag[i >> n].conj();
        }
    }

    pub fn conj_cx(&mut self, c: usize, t: usize) {
        kernels::apply_cx(&mut self.data, c, t);
        kernels::apply_cx(&mut self.data, c + self.n, t + self.n);
    }

    /// `rho <- (1 - p) rho + p other`.
    pub fn mix(&mut self, p: f64, other: &DensityMatrix) {
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a = *a * (1.0 - p) + *b * p;
        }
    }

    /// `rho <- rho + s other`.
    pub fn add_scaled(&mut self, s: f64, other: &DensityMatrix) {
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += *b * s;
        }
    }

    pub fn scale(&mut self, s: f64) {
        kernels::scale(&mut self.data, s);
    }

    /// `rho <- (1 - p) rho + p K(rho)` for a channel `K`.
    pub fn mix_channel(&mut self, p: f64, k: impl FnOnce(&mut DensityMatrix)) {
        if p == 0.0 {
            return;
        }
        let mut other = self.clone();
        k(&mut other);
        if p == 1.0 {
            *self = other;
        } else {
            self.mix(p, &other);
        }
    }

    pub fn trace(&self) -> C64 {
        (0..self.dim()).map(|k| self.get(k, k)).sum()
    }

    /// `Tr[P rho]`.
    pub fn expect(&self, p: PauliMask) -> f64 {
        let ik = i_pow(p.y_count());
        let mut acc = C64::new(0.0, 0.0);
        for k in 0..self.dim() {
            let m = k ^ p.x;
            let s = if (m & p.z).count_ones() % 2 == 1 { -1.0 } else { 1.0 };
            acc += self.get(m, k) * s;
        }
        (acc * ik).re
    }

    pub fn expect_x(&self, q: usize) -> f64 {
        self.expect(PauliMask::x(q))
    }

    /// `Tr[rho M]` with `M = N^-1 sum_j X_j`.
    pub fn magnetization(&self) -> f64 {
        (0..self.n).map(|q| self.expect_x(q)).sum::<f64>() / self.n as f64
    }

    /// `<psi| rho |psi>`.
    pub fn fidelity_pure(&self, psi: &DenseState) -> f64 {
        let a = psi.amplitudes();
        let mut acc = C64::new(0.0, 0.0);
        for b in 0..self.dim() {
            let mut row = C64::new(0.0, 0.0);
            for k in 0..self.dim() {
                row += a[k].conj() * self.get(k, b);
            }
            acc += row * a[b];
        }
        acc.re
    }

    /// Reduced state on the listed qubits, in the given order.
    pub fn partial_trace_keep(&self, keep: &[usize]) -> DensityMatrix {
        let n = self.n;
        let traced: Vec<usize> = (0..n).filter(|q| !keep.contains(q)).collect();
        let kd = 1usize << keep.len();
        let td = 1usize << traced.len();
        let spread = |sub: usize, qs: &[usize]| -> usize {
            qs.iter().enumerate().map(|(i, &q)| ((sub >> i) & 1) << q).sum()
        };
        let mut out = DensityMatrix::zeros(keep.len());
        for k in 0..kd {
            let kf = spread(k, keep);
            for b in 0..kd {
                let bf = spread(b, keep);
                let mut acc = C64::new(0.0, 0.0);
                for e in 0..td {
                    let ef = spread(e, &traced);
                    acc += self.get(kf | ef, bf | ef);
                }
                out.set(k, b, acc);
            }
        }
        out
    }

    pub fn max_abs_diff(&self, other: &DensityMatrix) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Largest deviation from Hermiticity.
    pub fn hermiticity_error(&self) -> f64 {
        let d = self.dim();
        let mut e: f64 = 0.0;
        for k in 0..d {
            for b in 0..d {
                e = e.max((self.get(k, b) - self.get(b, k).conj()).norm());
            }
        }
        e
    }

    /// Smallest eigenvalue, via Jacobi on the real symmetric embedding
    /// `[[A, -B], [B, A]]` of `rho = A + iB`. Intended for small `n`.
    pub fn min_eigenvalue(&self) -> f64 {
        let d = self.dim();
        let m = 2 * d;
        let mut a = vec![0.0; m * m];
        for i in 0..d {
            for j in 0..d {
                let v = self.get(i, j);
                a[i * m + j] = v.re;
                a[(i + d) * m + j + d] = v.re;
                a[i * m + j + d] = -v.im;
                a[(i + d) * m + j] = v.im;
            }
        }
        jacobi_eigenvalues(&mut a, m).into_iter().fold(f64::INFINITY, f64::min)
    }
}

fn jacobi_eigenvalues(a: &mut [f64], m: usize) -> Vec<f64> {
    for _sweep in 0..100 {
        let mut off = 0.0;
        for p in 0..m {
            for q in p + 1..m {
                off += a[p * m + q] * a[p * m + q];
            }
        }
        if off < 1e-30 {
            break;
        }
        for p in 0..m {
            for q in p + 1..m {
                let apq = a[p * m + q];
                if apq.abs() < 1e-300 {
                    continue;
                }
                let theta = (a[q * m + q] - a[p * m + p]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..m {
                    let akp = a[k * m + p];
                    let akq = a[k * m + q];
                    a[k * m + p] = c * akp - s * akq;
                    a[k * m + q] = s * akp + c * akq;
                }
                for k in 0..m {
                    let apk = a[p * m + k];
                    let aqk = a[q * m + k];
                    a[p * m + k] = c * apk - s * aqk;
                    a[q * m + k] = s * apk + c * aqk;
                }
            }
        }
    }
    (0..m).map(|i| a[i * m + i]).collect()
}
