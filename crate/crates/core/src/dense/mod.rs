//! Exact small-N simulation: pure states, density matrices, the exact
//! one-period channel, the non-Clifford trajectory model and jump unravelings.

mod density;
pub mod jump;
pub mod kernels;
pub mod nonclifford;
pub mod oracle;
mod state;

pub use density::DensityMatrix;
pub use jump::{jump_trajectory, JumpParams, JumpRecord, JumpVariant};
pub use nonclifford::{NonCliffordModel, NonCliffordParams};
pub use oracle::oracle_apply_period;
pub use state::{DenseState, DETERMINISTIC_EPS};

use num_complex::Complex64 as C64;
use thiserror::Error;

use crate::stabilizer::PauliString;

/// Default cap for pure states.
pub const MAX_STATE_QUBITS: usize = 20;
/// Default cap for density matrices.
pub const MAX_DENSITY_QUBITS: usize = 9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DenseError {
    #[error("{n} qubits exceeds the dense cap of {cap}")]
    TooLarge { n: usize, cap: usize },
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("invalid parameter: {0}")]
    Param(String),
}

/// Hermitian Pauli product given by X and Z bit masks (`Y` where both set).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct PauliMask {
    pub x: usize,
    pub z: usize,
}

impl PauliMask {
    pub fn x(q: usize) -> Self {
        PauliMask { x: 1 << q, z: 0 }
    }

    pub fn y(q: usize) -> Self {
        PauliMask { x: 1 << q, z: 1 << q }
    }

    pub fn z(q: usize) -> Self {
        PauliMask { x: 0, z: 1 << q }
    }

    pub fn xx(a: usize, b: usize) -> Self {
        PauliMask {
            x: (1 << a) | (1 << b),
            z: 0,
        }
    }

    pub fn zz(a: usize, b: usize) -> Self {
        PauliMask {
            x: 0,
            z: (1 << a) | (1 << b),
        }
    }

    /// Product of commuting masks on disjoint or equal supports (phase ignored).
    pub fn times(self, o: PauliMask) -> Self {
        PauliMask {
            x: self.x ^ o.x,
            z: self.z ^ o.z,
        }
    }

    pub fn y_count(self) -> u32 {
        (self.x & self.z).count_ones()
    }

    /// Operator part of a Pauli string; the sign is dropped.
    pub fn from_string(p: &PauliString) -> Self {
        let mut m = PauliMask::default();
        for q in p.support() {
            let (xb, zb) = p.get(q).bits();
            m.x |= (xb as usize) << q;
            m.z |= (zb as usize) << q;
        }
        m
    }
}

/// `(<+|rho|+>, <-|rho|->, |<+|rho|->|)` on the all-plus/all-minus states.
pub fn cat_coherence(rho: &DensityMatrix) -> (f64, f64, f64) {
    let n = rho.num_qubits();
    let plus = DenseState::plus(n).expect("n within cap");
    let minus = DenseState::x_product(&vec![true; n]).expect("n within cap");
    let (p, m) = (plus.amplitudes(), minus.amplitudes());
    let d = rho.dim();
    let mut pp = C64::new(0.0, 0.0);
    let mut mm = C64::new(0.0, 0.0);
    let mut pm = C64::new(0.0, 0.0);
    for k in 0..d {
        for b in 0..d {
            let r = rho.get(k, b);
            pp += p[k].conj() * r * p[b];
            mm += m[k].conj() * r * m[b];
            pm += p[k].conj() * r * m[b];
        }
    }
    (pp.re, mm.re, pm.norm())
}

/// Cat coherence of the average of pure-state trajectories.
pub fn cat_coherence_ensemble(states: &[DenseState]) -> (f64, f64, f64) {
    assert!(!states.is_empty());
    let n = states[0].num_qubits();
    let plus = DenseState::plus(n).expect("n within cap");
    let minus = DenseState::x_product(&vec![true; n]).expect("n within cap");
    let mut pp = 0.0;
    let mut mm = 0.0;
    let mut pm = C64::new(0.0, 0.0);
    for s in states {
        let a = plus.inner(s);
        let b = minus.inner(s);
        pp += a.norm_sqr();
        mm += b.norm_sqr();
        pm += a * b.conj();
    }
    let k = states.len() as f64;
    (pp / k, mm / k, pm.norm() / k)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    #[test]
    fn pulse_unitary_examples() {
        let mut s = DenseState::plus(2).unwrap();
        let s0 = s.clone();
        s.pulse_unitary(&[2.0 * std::f64::consts::PI; 2]);
        assert!((s.fidelity(&s0) - 1.0).abs() < 1e-12);

        let mut s = DenseState::plus(1).unwrap();
        s.pulse_unitary(&[std::f64::consts::PI]);
        let minus = DenseState::x_product(&[true]).unwrap();
        assert!((s.fidelity(&minus) - 1.0).abs() < 1e-12);

        // exp(-i pi Z / 4)|+> is proportional to |+i>
        let mut s = DenseState::plus(1).unwrap();
        s.pulse_unitary(&[std::f64::consts::FRAC_PI_2]);
        assert!(s.expect_x(0).abs() < 1e-12);
        assert!((s.expect(PauliMask::y(0)) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn cat_coherence_examples() {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let cat = DenseState::cat(3, c(h), c(h)).unwrap();
        let (a, b, o) = cat_coherence(&DensityMatrix::from_pure(&cat).unwrap());
        assert!((a - 0.5).abs() < 1e-12 && (b - 0.5).abs() < 1e-12 && (o - 0.5).abs() < 1e-12);

        let mut mix = DensityMatrix::from_pure(&DenseState::plus(3).unwrap()).unwrap();
        let minus = DensityMatrix::from_pure(&DenseState::x_product(&[true; 3]).unwrap()).unwrap();
        mix.mix(0.5, &minus);
        let (a, b, o) = cat_coherence(&mix);
        assert!((a - 0.5).abs() < 1e-12 && (b - 0.5).abs() < 1e-12 && o < 1e-12);

        let plus = DensityMatrix::from_pure(&DenseState::plus(3).unwrap()).unwrap();
        let (a, b, o) = cat_coherence(&plus);
        assert!((a - 1.0).abs() < 1e-12 && b.abs() < 1e-12 && o < 1e-12);
    }

    #[test]
    fn density_matches_pure_evolution() {
        let mut psi = DenseState::plus(3).unwrap();
        psi.pauli_rotation(PauliMask::zz(0, 2), 0.7);
        psi.h(1);
        let mut rho = DensityMatrix::from_pure(&DenseState::plus(3).unwrap()).unwrap();
        rho.conj_rotation(PauliMask::zz(0, 2), 0.7);
        rho.conj_1q(1, kernels::hadamard());
        let direct = DensityMatrix::from_pure(&psi).unwrap();
        assert!(rho.max_abs_diff(&direct) < 1e-12);
        let y = PauliMask::y(0).times(PauliMask::z(2));
        assert!((rho.expect(y) - psi.expect(y)).abs() < 1e-12);
        assert!(rho.min_eigenvalue() > -1e-10);
        assert!(rho.hermiticity_error() < 1e-12);
    }

    #[test]
    fn partial_trace_of_product() {
        let psi = DenseState::x_product(&[false, true, false]).unwrap();
        let rho = DensityMatrix::from_pure(&psi).unwrap();
        let r = rho.partial_trace_keep(&[1]);
        let m = DensityMatrix::from_pure(&DenseState::x_product(&[true]).unwrap()).unwrap();
        assert!(r.max_abs_diff(&m) < 1e-12);
    }

    #[test]
    fn size_caps() {
        assert!(DenseState::zero(21).is_err());
        let big = DenseState::plus(10).unwrap();
        assert!(DensityMatrix::from_pure(&big).is_err());
    }
}
