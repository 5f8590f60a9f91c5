//! Non-Clifford trajectory model: disordered Z rotations, static disordered
//! XX couplings, and Born-sampled NEC measurement-feedback.

use num_complex::Complex64 as C64;
use rand::Rng;
use std::sync::Arc;

use super::{DenseError, DenseState, PauliMask, MAX_STATE_QUBITS};
use crate::ensemble;
use crate::lattice::{BondId, LatticeTopology, Sublattice};
use crate::rng::stream_rng;

#[derive(Debug, Clone)]
pub struct NonCliffordParams {
    pub h: f64,
    pub delta_h: f64,
    pub j: f64,
    pub delta_j: f64,
    pub p_nec: f64,
    pub lattice: Arc<LatticeTopology>,
    pub steps: usize,
    pub seed: u64,
}

impl NonCliffordParams {
    /// `J = 1`, `delta_J = delta_h = 0.2`.
    pub fn new(lattice: Arc<LatticeTopology>, h: f64, p_nec: f64, steps: usize, seed: u64) -> Self {
        NonCliffordParams {
            h,
            delta_h: 0.2,
            j: 1.0,
            delta_j: 0.2,
            p_nec,
            lattice,
            steps,
            seed,
        }
    }

    pub fn validate(&self) -> Result<(), DenseError> {
        if !(self.delta_h >= 0.0 && self.delta_j >= 0.0) {
            return Err(DenseError::Param("disorder widths must be non-negative".into()));
        }
        if !(0.0..=1.0).contains(&self.p_nec) {
            return Err(DenseError::Param(format!("p_nec = {} is not a probability", self.p_nec)));
        }
        let n = self.lattice.num_sites();
        if n > MAX_STATE_QUBITS {
            return Err(DenseError::TooLarge {
                n,
                cap: MAX_STATE_QUBITS,
            });
        }
        Ok(())
    }
}

fn uniform<R: Rng + ?Sized>(rng: &mut R, center: f64, half: f64) -> f64 {
    if half == 0.0 {
        center
    } else {
        center + half * (2.0 * rng.gen::<f64>() - 1.0)
    }
}

/// Model with couplings fixed at construction. The couplings come from the
/// reserved stream `(seed, u32::MAX, u32::MAX)`; trajectory `i` at sweep
/// point `k` uses stream `(seed, k, i)`.
#[derive(Debug, Clone)]
pub struct NonCliffordModel {
    params: NonCliffordParams,
    couplings: Vec<(BondId, f64)>,
    /// `exp(-i sum J s_a s_b)` per computational basis index.
    xx_phase: Vec<C64>,
}

impl NonCliffordModel {
    pub fn new(params: NonCliffordParams) -> Result<Self, DenseError> {
        params.validate()?;
        let mut rng = stream_rng(params.seed, u32::MAX, u32::MAX);
        let couplings: Vec<(BondId, f64)> = params
            .lattice
            .bonds()
            .into_iter()
            .map(|b| (b, uniform(&mut rng, params.j, params.delta_j)))
            .collect();
        let n = params.lattice.num_sites();
        let xx_phase = (0..1usize << n)
            .map(|idx| {
                let e: f64 = couplings
                    .iter()
                    .map(|(b, jv)| {
                        let par = ((idx >> b.a) ^ (idx >> b.b)) & 1;
                        if par == 0 {
                            *jv
                        } else {
                            -*jv
                        }
                    })
                    .sum();
                C64::from_polar(1.0, -e)
            })
            .collect();
        Ok(NonCliffordModel {
            params,
            couplings,
            xx_phase,
        })
    }

    pub fn params(&self) -> &NonCliffordParams {
        &self.params
    }

    pub fn couplings(&self) -> &[(BondId, f64)] {
        &self.couplings
    }

    /// `exp(-i sum_<ab> J_ab X_a X_b)`.
    pub fn apply_ux(&self, state: &mut DenseState) {
        state.hadamard_all();
        let ph = &self.xx_phase;
        state.apply_diag(|i| ph[i]);
        state.hadamard_all();
    }

    /// `exp(-i sum_j h_j Z_j)` with fresh `h_j`.
    pub fn apply_uz<R: Rng + ?Sized>(&self, state: &mut DenseState, rng: &mut R) {
        let n = state.num_qubits();
        let thetas: Vec<f64> = (0..n)
            .map(|_| 2.0 * uniform(rng, self.params.h, self.params.delta_h))
            .collect();
        state.pulse_unitary(&thetas);
    }

    /// Measurement-feedback pass over sublattice A then B.
    pub fn apply_feedback<R: Rng + ?Sized>(&self, state: &mut DenseState, rng: &mut R) {
        let lat = &self.params.lattice;
        for l in [Sublattice::A, Sublattice::B] {
            for &j in lat.sublattice_sites(l) {
                if rng.gen::<f64>() >= self.params.p_nec {
                    continue;
                }
                let Some((bn, be)) = lat.nec_targets(j) else {
                    continue;
                };
                let wn = state.measure(PauliMask::xx(j, bn.other(j)), rng);
                let we = state.measure(PauliMask::xx(j, be.other(j)), rng);
                if wn.is_minus() && we.is_minus() {
                    state.pauli_rotation(PauliMask::z(j), std::f64::consts::PI);
                }
            }
        }
    }

    pub fn step<R: Rng + ?Sized>(&self, state: &mut DenseState, rng: &mut R) {
        self.apply_uz(state, rng);
        self.apply_ux(state);
        if self.params.p_nec > 0.0 {
            self.apply_feedback(state, rng);
        }
    }

    /// `M(t)` for `t = 0..=steps` from `|+...+>`.
    pub fn run<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        let n = self.params.lattice.num_sites();
        let mut s = DenseState::plus(n).expect("size validated");
        let mag = |s: &DenseState| (0..n).map(|q| s.expect_x(q)).sum::<f64>() / n as f64;
        let mut out = Vec::with_capacity(self.params.steps + 1);
        out.push(mag(&s));
        for _ in 0..self.params.steps {
            self.step(&mut s, rng);
            out.push(mag(&s));
        }
        out
    }

    /// Per-trajectory magnetization series.
    pub fn run_ensemble(&self, n_traj: usize, point: u32) -> Vec<Vec<f64>> {
        ensemble::map_indexed(n_traj, |i| {
            let mut rng = stream_rng(self.params.seed, point, i as u32);
            self.run(&mut rng)
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{build_lattice, LatticeKind};

    fn lat(r: usize, c: usize) -> Arc<LatticeTopology> {
        Arc::new(build_lattice(LatticeKind::SquarePeriodic, (r, c)).unwrap())
    }

    #[test]
    fn pi_half_field_flips_exactly() {
        let mut p = NonCliffordParams::new(lat(2, 3), std::f64::consts::FRAC_PI_2, 0.0, 6, 1);
        p.delta_h = 0.0;
        p.j = 0.0;
        p.delta_j = 0.0;
        let m = NonCliffordModel::new(p).unwrap();
        let series = m.run(&mut stream_rng(1, 0, 0));
        for (t, v) in series.iter().enumerate() {
            let s = if t % 2 == 0 { 1.0 } else { -1.0 };
            assert!((v - s).abs() < 1e-12);
        }
    }

    #[test]
    fn unitary_step_preserves_norm() {
        let mut p = NonCliffordParams::new(lat(3, 3), 1.2, 0.0, 1, 4);
        p.delta_h = 0.0;
        p.delta_j = 0.0;
        let m = NonCliffordModel::new(p).unwrap();
        let mut s = DenseState::plus(9).unwrap();
        let mut rng = stream_rng(0, 0, 0);
        for _ in 0..5 {
            m.step(&mut s, &mut rng);
            assert!((s.norm() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn ux_matches_product_of_rotations() {
        let p = NonCliffordParams::new(lat(2, 3), 0.3, 0.0, 1, 9);
        let m = NonCliffordModel::new(p).unwrap();
        let mut a = DenseState::zero(6).unwrap();
        a.h(0);
        a.pauli_rotation(PauliMask::y(3), 0.4);
        let mut b = a.clone();
        m.apply_ux(&mut a);
        for (bond, jv) in m.couplings() {
            b.pauli_rotation(PauliMask::xx(bond.a, bond.b), 2.0 * jv);
        }
        assert!((a.fidelity(&b) - 1.0).abs() < 1e-12);
        assert!(a.inner(&b).re > 0.0);
    }
}
