//! Exact one-period channel on a density matrix: every probabilistic branch
//! of the protocol summed with its weight.

use super::{DenseError, DensityMatrix, PauliMask, MAX_DENSITY_QUBITS};
use crate::lattice::{LatticeTopology, SiteId, Sublattice};
use crate::protocol::{majority_threshold, ProtocolParams, Rule};

/// `rho <- sum_w K_w rho K_w^dag` where `K_w` projects onto outcomes `w` of
/// the commuting `masks`, followed by `Z_j` with probability `fire(w)`.
pub fn feedback_channel(rho: &mut DensityMatrix, j: SiteId, masks: &[PauliMask], fire: impl Fn(&[i8]) -> f64) {
    let k = masks.len();
    let mut out = DensityMatrix::zeros(rho.num_qubits());
    let mut w = vec![1i8; k];
    for bits in 0..1usize << k {
        let mut term = rho.clone();
        for (i, m) in masks.iter().enumerate() {
            w[i] = if (bits >> i) & 1 == 1 { -1 } else { 1 };
            term.sandwich_projector(*m, w[i]);
        }
        if term.trace().re.abs() < 1e-300 {
            continue;
        }
        let q = fire(&w);
        if q < 1.0 {
            out.add_scaled(1.0 - q, &term);
        }
        if q > 0.0 {
            term.conj_pauli(PauliMask::z(j));
            out.add_scaled(q, &term);
        }
    }
    *rho = out;
}

/// Probability that a record of a true outcome `w` reads `-1`.
fn p_record_minus(w: i8, p_me: f64) -> f64 {
    if w < 0 {
        1.0 - p_me
    } else {
        p_me
    }
}

/// Measurement-feedback map for one NEC site with record errors. Identity
/// when the site has no NEC triple.
pub fn nec_site_channel(rho: &mut DensityMatrix, lattice: &LatticeTopology, j: SiteId, p_me: f64) {
    let Some((bn, be)) = lattice.nec_targets(j) else {
        return;
    };
    let masks = [PauliMask::xx(j, bn.other(j)), PauliMask::xx(j, be.other(j))];
    feedback_channel(rho, j, &masks, |w| p_record_minus(w[0], p_me) * p_record_minus(w[1], p_me));
}

/// Majority-vote measurement-feedback map for one site with record errors.
pub fn majority_site_channel(rho: &mut DensityMatrix, lattice: &LatticeTopology, j: SiteId, p_me: f64) {
    let bonds = lattice.majority_bonds(j);
    if bonds.is_empty() {
        return;
    }
    let masks: Vec<PauliMask> = bonds.iter().map(|b| PauliMask::xx(j, b.other(j))).collect();
    let thr = majority_threshold(bonds.len());
    feedback_channel(rho, j, &masks, |w| {
        // distribution of the number of recorded walls
        let mut dist = vec![1.0];
        for &wi in w {
            let p = p_record_minus(wi, p_me);
            let mut next = vec![0.0; dist.len() + 1];
            for (c, &d) in dist.iter().enumerate() {
                next[c] += d * (1.0 - p);
                next[c + 1] += d * p;
            }
            dist = next;
        }
        dist[thr.min(dist.len())..].iter().sum()
    });
}

/// `rho <- Pi+ rho Pi+ + Z Pi- rho Pi- Z` on qubit `q`.
pub fn reset_plus_channel(rho: &mut DensityMatrix, q: usize) {
    let mut minus = rho.clone();
    rho.sandwich_projector(PauliMask::x(q), 1);
    minus.sandwich_projector(PauliMask::x(q), -1);
    minus.conj_pauli(PauliMask::z(q));
    rho.add_scaled(1.0, &minus);
}

/// Pulse step: flips, entangling gates, resets, depolarization.
pub fn pulse_channel(rho: &mut DensityMatrix, params: &ProtocolParams) {
    let lat = &params.lattice;
    let n = lat.num_sites();
    for j in 0..n {
        rho.mix_channel(params.p_flip, |r| r.conj_pauli(PauliMask::z(j)));
    }
    if params.p_unit > 0.0 {
        for j in 0..n {
            let deg = lat.degree(j);
            if deg == 0 {
                continue;
            }
            let mut acc = rho.clone();
            acc.scale(1.0 - params.p_unit);
            for k in lat.neighbor_list(j) {
                let mut t = rho.clone();
                t.conj_rotation(PauliMask::zz(j, k), std::f64::consts::FRAC_PI_2);
                acc.add_scaled(params.p_unit / deg as f64, &t);
            }
            *rho = acc;
        }
    }
    for j in 0..n {
        rho.mix_channel(params.p_reset, |r| reset_plus_channel(r, j));
    }
    if params.p_dep > 0.0 {
        for j in 0..n {
            let mut acc = rho.clone();
            acc.scale(1.0 - params.p_dep);
            for p in [PauliMask::x(j), PauliMask::y(j), PauliMask::z(j)] {
                let mut t = rho.clone();
                t.conj_pauli(p);
                acc.add_scaled(params.p_dep / 3.0, &t);
            }
            *rho = acc;
        }
    }
}

/// Correction step: sublattice A then B, each site selected with `p_nec`.
pub fn correction_channel(rho: &mut DensityMatrix, params: &ProtocolParams) {
    let lat = &params.lattice;
    for l in [Sublattice::A, Sublattice::B] {
        for &j in lat.sublattice_sites(l) {
            rho.mix_channel(params.p_nec, |r| match params.rule {
                Rule::Nec => nec_site_channel(r, lat, j, params.p_me),
                Rule::MajorityVote => majority_site_channel(r, lat, j, params.p_me),
            });
        }
    }
}

/// One exact period: pulse step then correction step.
pub fn oracle_apply_period(rho: &DensityMatrix, params: &ProtocolParams) -> Result<DensityMatrix, DenseError> {
    let n = rho.num_qubits();
    if n > MAX_DENSITY_QUBITS {
        return Err(DenseError::TooLarge {
            n,
            cap: MAX_DENSITY_QUBITS,
        });
    }
    if n != params.num_sites() {
        return Err(DenseError::Shape(format!(
            "density matrix on {n} qubits, lattice has {} sites",
            params.num_sites()
        )));
    }
    params.validate().map_err(|e| DenseError::Param(e.to_string()))?;
    let mut out = rho.clone();
    pulse_channel(&mut out, params);
    correction_channel(&mut out, params);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dense::DenseState;
    use crate::lattice::{build_lattice, LatticeKind};
    use std::sync::Arc;

    fn lat22() -> Arc<LatticeTopology> {
        Arc::new(build_lattice(LatticeKind::SquarePeriodic, (2, 2)).unwrap())
    }

    #[test]
    fn all_plus_is_fixed_by_correction() {
        let mut p = ProtocolParams::new(lat22(), 1);
        p.p_nec = 1.0;
        let rho = DensityMatrix::from_pure(&DenseState::plus(4).unwrap()).unwrap();
        let out = oracle_apply_period(&rho, &p).unwrap();
        assert!(out.max_abs_diff(&rho) < 1e-12);
    }

    #[test]
    fn perfect_flips_alternate() {
        let mut p = ProtocolParams::new(lat22(), 1);
        p.p_flip = 1.0;
        let mut rho = DensityMatrix::from_pure(&DenseState::x_product(&[false, true, false, false]).unwrap()).unwrap();
        let m0 = rho.magnetization();
        for t in 1..5 {
            rho = oracle_apply_period(&rho, &p).unwrap();
            let s = if t % 2 == 0 { 1.0 } else { -1.0 };
            assert!((rho.magnetization() - s * m0).abs() < 1e-12);
        }
    }

    #[test]
    fn fig1_channel_is_trace_preserving_and_positive() {
        let mut p = ProtocolParams::fig1(lat22(), 1);
        p.p_dep = 0.05;
        let mut rho = DensityMatrix::from_pure(&DenseState::plus(4).unwrap()).unwrap();
        for _ in 0..3 {
            rho = oracle_apply_period(&rho, &p).unwrap();
            assert!((rho.trace().re - 1.0).abs() < 1e-10);
            assert!(rho.trace().im.abs() < 1e-10);
            assert!(rho.hermiticity_error() < 1e-10);
        }
        assert!(rho.min_eigenvalue() > -1e-10);
    }

    #[test]
    fn majority_channel_repairs_flipped_site() {
        let lat = Arc::new(build_lattice(LatticeKind::SquarePeriodic, (3, 3)).unwrap());
        let mut p = ProtocolParams::new(lat, 1);
        p.p_nec = 1.0;
        p.rule = Rule::MajorityVote;
        let mut pattern = vec![false; 9];
        pattern[4] = true;
        let rho = DensityMatrix::from_pure(&DenseState::x_product(&pattern).unwrap()).unwrap();
        let out = oracle_apply_period(&rho, &p).unwrap();
        assert!((out.magnetization() - 1.0).abs() < 1e-12);
    }
}
