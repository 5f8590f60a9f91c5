//! Continuum-time unraveling: per-site Poisson correction events with an
//! optional Z drive between them.
//!
//! For every variant the jump operators of a site sum to `Gamma * I`, so the
//! no-jump evolution is the drive alone and event times are exactly Poisson.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::oracle::{feedback_channel, nec_site_channel};
use super::{DenseError, DenseState, DensityMatrix, PauliMask};
use crate::lattice::{LatticeTopology, SiteId};
use crate::protocol::nec_correct_site;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum JumpVariant {
    /// Domain-wall measurements and conditional flip.
    CoherentNec,
    /// Center, North and East measured individually in the X basis.
    IncoherentNec,
    /// Center and all neighbors measured; center set to the majority.
    MajorityVote5,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Drive {
    /// `H = (omega / 2) sum_j Z_j`.
    ZField { omega: f64 },
    /// `prod_j exp(-i theta Z_j / 2)` at every positive multiple of `period`.
    PeriodicZPulse { period: f64, theta: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum EventSampling {
    /// Exponential waiting times per site.
    Poisson,
    /// Steps of `dt`; each site fires with probability `Gamma * dt`.
    FixedDt { dt: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct JumpParams {
    pub gamma: f64,
    pub t_max: f64,
    pub sample_dt: f64,
    pub drive: Option<Drive>,
    pub variant: JumpVariant,
    pub sampling: EventSampling,
}

impl JumpParams {
    pub fn new(gamma: f64, t_max: f64, variant: JumpVariant) -> Self {
        JumpParams {
            gamma,
            t_max,
            sample_dt: t_max.max(f64::MIN_POSITIVE),
            drive: None,
            variant,
            sampling: EventSampling::Poisson,
        }
    }

    pub fn validate(&self) -> Result<(), DenseError> {
        if !(self.gamma >= 0.0) || !self.gamma.is_finite() {
            return Err(DenseError::Param(format!("gamma = {} must be non-negative", self.gamma)));
        }
        if !(self.t_max >= 0.0) || !(self.sample_dt > 0.0) {
            return Err(DenseError::Param("t_max must be >= 0 and sample_dt > 0".into()));
        }
        if let EventSampling::FixedDt { dt } = self.sampling {
            if !(dt > 0.0) || self.gamma * dt > 1.0 {
                return Err(DenseError::Param(format!("need dt > 0 and gamma * dt <= 1, got dt = {dt}")));
            }
        }
        if let Some(Drive::PeriodicZPulse { period, .. }) = self.drive {
            if !(period > 0.0) {
                return Err(DenseError::Param("pulse period must be positive".into()));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct JumpRecord {
    pub times: Vec<f64>,
    pub magnetization: Vec<f64>,
    /// `(time, site)` of every correction event.
    pub events: Vec<(f64, SiteId)>,
    pub final_state: DenseState,
}

fn incoherent_masks(lattice: &LatticeTopology, j: SiteId) -> Option<[PauliMask; 3]> {
    let (bn, be) = lattice.nec_targets(j)?;
    Some([PauliMask::x(j), PauliMask::x(bn.other(j)), PauliMask::x(be.other(j))])
}

fn majority_masks(lattice: &LatticeTopology, j: SiteId) -> Vec<PauliMask> {
    std::iter::once(j)
        .chain(lattice.neighbor_list(j))
        .map(PauliMask::x)
        .collect()
}

/// Center flips when strictly more than half of the center-plus-neighbor
/// outcomes disagree with it.
fn majority_flips(w: &[i8]) -> bool {
    let dis = w[1..].iter().filter(|&&v| v != w[0]).count();
    2 * dis > w.len()
}

/// Applies one sampled correction event at site `j`.
pub fn apply_event<R: Rng + ?Sized>(
    state: &mut DenseState,
    lattice: &LatticeTopology,
    j: SiteId,
    variant: JumpVariant,
    rng: &mut R,
) {
    match variant {
        JumpVariant::CoherentNec => {
            nec_correct_site(state, lattice, j, 0.0, rng);
        }
        JumpVariant::IncoherentNec => {
            if let Some(masks) = incoherent_masks(lattice, j) {
                let w: Vec<i8> = masks.iter().map(|m| state.measure(*m, rng).value).collect();
                if w[1] != w[0] && w[2] != w[0] {
                    state.apply_pauli(PauliMask::z(j));
                }
            }
        }
        JumpVariant::MajorityVote5 => {
            let masks = majority_masks(lattice, j);
            let w: Vec<i8> = masks.iter().map(|m| state.measure(*m, rng).value).collect();
            if majority_flips(&w) {
                state.apply_pauli(PauliMask::z(j));
            }
        }
    }
}

/// Exact averaged effect of one event at `j` on a density matrix.
pub fn event_channel(rho: &mut DensityMatrix, lattice: &LatticeTopology, j: SiteId, variant: JumpVariant) {
    match variant {
        JumpVariant::CoherentNec => nec_site_channel(rho, lattice, j, 0.0),
        JumpVariant::IncoherentNec => {
            if let Some(masks) = incoherent_masks(lattice, j) {
                feedback_channel(rho, j, &masks, |w| (w[1] != w[0] && w[2] != w[0]) as u8 as f64);
            }
        }
        JumpVariant::MajorityVote5 => {
            let masks = majority_masks(lattice, j);
            feedback_channel(rho, j, &masks, |w| majority_flips(w) as u8 as f64);
        }
    }
}

/// `Gamma * sum_j (E_j[rho] - rho)` with `E_j` the event channel.
pub fn lindblad_derivative(
    rho: &DensityMatrix,
    lattice: &LatticeTopology,
    gamma: f64,
    variant: JumpVariant,
) -> DensityMatrix {
    let n = rho.num_qubits();
    let mut out = DensityMatrix::zeros(n);
    for j in 0..n {
        let mut e = rho.clone();
        event_channel(&mut e, lattice, j, variant);
        out.add_scaled(gamma, &e);
        out.add_scaled(-gamma, rho);
    }
    out
}

/// Exact average of one fixed-`dt` step without drive: sites in ascending
/// order, each firing with probability `p = Gamma * dt`.
pub fn bernoulli_step_channel(rho: &mut DensityMatrix, lattice: &LatticeTopology, p: f64, variant: JumpVariant) {
    for j in 0..rho.num_qubits() {
        rho.mix_channel(p, |r| event_channel(r, lattice, j, variant));
    }
}

fn evolve_field(state: &mut DenseState, drive: Option<Drive>, dt: f64) {
    if let Some(Drive::ZField { omega }) = drive {
        if dt > 0.0 && omega != 0.0 {
            let n = state.num_qubits();
            state.pulse_unitary(&vec![omega * dt; n]);
        }
    }
}

struct Driver {
    drive: Option<Drive>,
    t: f64,
    next_pulse: f64,
}

impl Driver {
    fn new(drive: Option<Drive>) -> Self {
        let next_pulse = match drive {
            Some(Drive::PeriodicZPulse { period, .. }) => period,
            _ => f64::INFINITY,
        };
        Driver { drive, t: 0.0, next_pulse }
    }

    /// Evolves to `t_to`, applying every pulse with time `<= t_to`.
    fn advance(&mut self, state: &mut DenseState, t_to: f64) {
        while self.next_pulse <= t_to {
            evolve_field(state, self.drive, self.next_pulse - self.t);
            self.t = self.next_pulse;
            if let Some(Drive::PeriodicZPulse { period, theta }) = self.drive {
                let n = state.num_qubits();
                state.pulse_unitary(&vec![theta; n]);
                self.next_pulse += period;
            }
        }
        evolve_field(state, self.drive, t_to - self.t);
        self.t = t_to;
    }
}

#[derive(Default)]
struct Series {
    times: Vec<f64>,
    magnetization: Vec<f64>,
    events: Vec<(f64, SiteId)>,
}

fn magnetization(s: &DenseState) -> f64 {
    let n = s.num_qubits();
    (0..n).map(|q| s.expect_x(q)).sum::<f64>() / n as f64
}

/// Samples one trajectory. `M` is recorded at multiples of `sample_dt` up to
/// `t_max`, after any pulse at the same instant.
pub fn jump_trajectory<R: Rng + ?Sized>(
    mut state: DenseState,
    lattice: &LatticeTopology,
    params: &JumpParams,
    rng: &mut R,
) -> Result<JumpRecord, DenseError> {
    params.validate()?;
    let n = lattice.num_sites();
    if state.num_qubits() != n {
        return Err(DenseError::Shape(format!(
            "state on {} qubits, lattice has {n} sites",
            state.num_qubits()
        )));
    }
    let n_samples = (params.t_max / params.sample_dt + 1e-9).floor() as usize;
    let sample_times: Vec<f64> = (0..=n_samples).map(|k| k as f64 * params.sample_dt).collect();
    let mut rec = Series::default();
    let mut driver = Driver::new(params.drive);
    let record = |s: &DenseState, t: f64, rec: &mut Series| {
        rec.times.push(t);
        rec.magnetization.push(magnetization(s));
    };

    match params.sampling {
        EventSampling::Poisson => {
            let wait = |rng: &mut R| -> f64 {
                if params.gamma > 0.0 {
                    -(1.0 - rng.gen::<f64>()).ln() / params.gamma
                } else {
                    f64::INFINITY
                }
            };
            let mut next: Vec<f64> = (0..n).map(|_| wait(rng)).collect();
            let mut si = 0;
            loop {
                let (j, te) = next
                    .iter()
                    .copied()
                    .enumerate()
                    .fold((usize::MAX, f64::INFINITY), |a, (j, t)| if t < a.1 { (j, t) } else { a });
                while si < sample_times.len() && sample_times[si] <= te.min(params.t_max) {
                    driver.advance(&mut state, sample_times[si]);
                    record(&state, sample_times[si], &mut rec);
                    si += 1;
                }
                if te > params.t_max {
                    break;
                }
                driver.advance(&mut state, te);
                apply_event(&mut state, lattice, j, params.variant, rng);
                rec.events.push((te, j));
                next[j] = te + wait(rng);
            }
            driver.advance(&mut state, params.t_max);
        }
        EventSampling::FixedDt { dt } => {
            let steps = (params.t_max / dt + 1e-9).floor() as usize;
            let every = ((params.sample_dt / dt).round() as usize).max(1);
            let p = params.gamma * dt;
            record(&state, 0.0, &mut rec);
            for k in 1..=steps {
                let t = k as f64 * dt;
                driver.advance(&mut state, t);
                if p > 0.0 {
                    for j in 0..n {
                        if rng.gen::<f64>() < p {
                            apply_event(&mut state, lattice, j, params.variant, rng);
                            rec.events.push((t, j));
                        }
                    }
                }
                if k % every == 0 {
                    record(&state, t, &mut rec);
                }
            }
        }
    }
    Ok(JumpRecord {
        times: rec.times,
        magnetization: rec.magnetization,
        events: rec.events,
        final_state: state,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{build_lattice, LatticeKind};
    use crate::rng::stream_rng;
    use num_complex::Complex64 as C64;

    fn lat22() -> LatticeTopology {
        build_lattice(LatticeKind::SquarePeriodic, (2, 2)).unwrap()
    }

    #[test]
    fn zero_rate_is_free_evolution() {
        let l = lat22();
        let mut p = JumpParams::new(0.0, 3.0, JumpVariant::CoherentNec);
        p.sample_dt = 1.0;
        p.drive = Some(Drive::PeriodicZPulse {
            period: 1.0,
            theta: std::f64::consts::PI,
        });
        let r = jump_trajectory(DenseState::plus(4).unwrap(), &l, &p, &mut stream_rng(0, 0, 0)).unwrap();
        assert!(r.events.is_empty());
        let expect = [1.0, -1.0, 1.0, -1.0];
        for (m, e) in r.magnetization.iter().zip(expect) {
            assert!((m - e).abs() < 1e-12);
        }
    }

    #[test]
    fn coherent_events_keep_cat() {
        let l = lat22();
        let cat = DenseState::cat(4, C64::new(0.6, 0.0), C64::new(0.8, 0.0)).unwrap();
        let p = JumpParams::new(1.0, 20.0, JumpVariant::CoherentNec);
        let r = jump_trajectory(cat.clone(), &l, &p, &mut stream_rng(2, 0, 0)).unwrap();
        assert!(!r.events.is_empty());
        assert!((r.final_state.fidelity(&cat) - 1.0).abs() < 1e-10);
    }

    #[test]
    fn majority_vote_repairs_single_error() {
        let l = build_lattice(LatticeKind::SquarePeriodic, (3, 3)).unwrap();
        let mut pattern = vec![false; 9];
        pattern[4] = true;
        let mut s = DenseState::x_product(&pattern).unwrap();
        apply_event(&mut s, &l, 4, JumpVariant::MajorityVote5, &mut stream_rng(0, 0, 0));
        assert!((magnetization(&s) - 1.0).abs() < 1e-12);
        // a neighbor of the error sees 1 of 5 disagreeing: no flip
        apply_event(&mut s, &l, 1, JumpVariant::MajorityVote5, &mut stream_rng(0, 0, 0));
        assert!((magnetization(&s) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn negative_rate_rejected() {
        let p = JumpParams::new(-1.0, 1.0, JumpVariant::CoherentNec);
        assert!(jump_trajectory(DenseState::plus(4).unwrap(), &lat22(), &p, &mut stream_rng(0, 0, 0)).is_err());
    }
}
