//! One Floquet period of the noisy Clifford protocol and trajectory execution.
//!
//! Randomness is consumed in a fixed order:
//! * pulse step: one draw per site for the flip, then (if `p_unit > 0`) one per
//!   site for the gate plus one neighbor index when it fires, then (if
//!   `p_reset > 0`) one per site plus any measurement draw, then (if
//!   `p_dep > 0`) one per site plus one Pauli index when it fires;
//! * correction step: per sublattice, per site in ascending order, one
//!   selection draw whether or not the site is selected; a selected site draws
//!   for each random measurement in N, E (, S, W) order and then, if
//!   `p_me > 0`, one draw per recorded outcome in the same order.
//!
//! A probability that is exactly zero skips its pass and its draws.

use rand::Rng;
use serde::{Deserialize, Serialize};
use std::str::FromStr;
use std::sync::Arc;
use thiserror::Error;

use crate::dense::{DenseState, PauliMask};
use crate::ensemble;
use crate::lattice::{LatticeTopology, SiteId, Sublattice};
use crate::rng::{stream_rng, TrajRng};
use crate::stabilizer::{InitState, MeasurementOutcome, StabilizerState};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ProtocolError {
    #[error("`{name}` = {value} is not a probability in [0, 1]")]
    Probability { name: &'static str, value: f64 },
    #[error("initial state length {got} does not match {expected} sites")]
    InitLength { expected: usize, got: usize },
    #[error("unknown rule `{0}`")]
    UnknownRule(String),
    #[error("unknown init `{0}`")]
    UnknownInit(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Rule {
    Nec,
    MajorityVote,
}

impl FromStr for Rule {
    type Err = ProtocolError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().replace(['-', '_'], "").as_str() {
            "nec" | "toom" => Ok(Rule::Nec),
            "majority" | "majorityvote" => Ok(Rule::MajorityVote),
            _ => Err(ProtocolError::UnknownRule(s.to_string())),
        }
    }
}

/// Number of recorded domain walls needed to fire on a bulk site.
pub const BULK_MAJORITY_THRESHOLD: usize = 2;

/// Firing threshold for a site with `k` incident bonds.
pub fn majority_threshold(k: usize) -> usize {
    if k >= 4 {
        BULK_MAJORITY_THRESHOLD
    } else {
        k / 2 + 1
    }
}

/// Channel probabilities and lattice for one experiment.
#[derive(Debug, Clone)]
pub struct ProtocolParams {
    pub p_flip: f64,
    pub p_nec: f64,
    pub p_unit: f64,
    pub p_reset: f64,
    pub p_me: f64,
    pub p_dep: f64,
    pub rule: Rule,
    pub lattice: Arc<LatticeTopology>,
    pub steps: usize,
}

impl ProtocolParams {
    /// All probabilities zero, NEC rule.
    pub fn new(lattice: Arc<LatticeTopology>, steps: usize) -> Self {
        ProtocolParams {
            p_flip: 0.0,
            p_nec: 0.0,
            p_unit: 0.0,
            p_reset: 0.0,
            p_me: 0.0,
            p_dep: 0.0,
            rule: Rule::Nec,
            lattice,
            steps,
        }
    }

    /// `(p_flip, p_nec, p_unit, p_reset, p_me) = (0.95, 0.8, 0.02, 0.02, 0.01)`.
    pub fn fig1(lattice: Arc<LatticeTopology>, steps: usize) -> Self {
        ProtocolParams {
            p_flip: 0.95,
            p_nec: 0.8,
            p_unit: 0.02,
            p_reset: 0.02,
            p_me: 0.01,
            ..Self::new(lattice, steps)
        }
    }

    pub fn validate(&self) -> Result<(), ProtocolError> {
        for (name, value) in [
            ("p_flip", self.p_flip),
            ("p_nec", self.p_nec),
            ("p_unit", self.p_unit),
            ("p_reset", self.p_reset),
            ("p_me", self.p_me),
            ("p_dep", self.p_dep),
        ] {
            if !(0.0..=1.0).contains(&value) {
                return Err(ProtocolError::Probability { name, value });
            }
        }
        Ok(())
    }

    pub fn num_sites(&self) -> usize {
        self.lattice.num_sites()
    }
}

/// Initial state of a trajectory.
#[derive(Debug, Clone, PartialEq)]
pub enum Init {
    AllPlus,
    AllMinus,
    AllZero,
    /// `true` marks a `|->` site.
    XPattern(Vec<bool>),
    /// Independent X-basis product with `P(|->) = (1 - m0) / 2` per site,
    /// drawn from the trajectory stream before the first step.
    RandomX { m0: f64 },
}

impl FromStr for Init {
    type Err = ProtocolError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t = s.trim().to_ascii_lowercase();
        match t.as_str() {
            "all_plus" | "plus" => return Ok(Init::AllPlus),
            "all_minus" | "minus" => return Ok(Init::AllMinus),
            "all_zero" | "zero" => return Ok(Init::AllZero),
            _ => {}
        }
        if let Some(v) = t.strip_prefix("random_x:") {
            let m0: f64 = v.parse().map_err(|_| ProtocolError::UnknownInit(s.to_string()))?;
            if !(-1.0..=1.0).contains(&m0) {
                return Err(ProtocolError::UnknownInit(s.to_string()));
            }
            return Ok(Init::RandomX { m0 });
        }
        if let Some(v) = t.strip_prefix("pattern:") {
            let bits = v
                .chars()
                .map(|c| match c {
                    '+' | '0' => Ok(false),
                    '-' | '1' => Ok(true),
                    _ => Err(ProtocolError::UnknownInit(s.to_string())),
                })
                .collect::<Result<Vec<_>, _>>()?;
            return Ok(Init::XPattern(bits));
        }
        Err(ProtocolError::UnknownInit(s.to_string()))
    }
}

impl Init {
    /// Concrete product state for one trajectory.
    pub fn realize<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Result<InitState, ProtocolError> {
        Ok(match self {
            Init::AllPlus => InitState::AllPlus,
            Init::AllZero => InitState::AllZero,
            Init::AllMinus => InitState::ProductXPattern(vec![true; n]),
            Init::XPattern(v) => {
                if v.len() != n {
                    return Err(ProtocolError::InitLength {
                        expected: n,
                        got: v.len(),
                    });
                }
                InitState::ProductXPattern(v.clone())
            }
            Init::RandomX { m0 } => {
                let p_minus = (1.0 - m0) / 2.0;
                InitState::ProductXPattern((0..n).map(|_| rng.gen::<f64>() < p_minus).collect())
            }
        })
    }
}

/// Operations the protocol needs from a simulator.
pub trait QubitBackend {
    fn num_qubits(&self) -> usize;
    fn z_pulse(&mut self, q: usize);
    fn zz_half(&mut self, a: usize, b: usize);
    fn measure_xx<R: Rng + ?Sized>(&mut self, a: usize, b: usize, rng: &mut R) -> MeasurementOutcome;
    fn reset_plus<R: Rng + ?Sized>(&mut self, q: usize, rng: &mut R) -> MeasurementOutcome;
    fn depolarize<R: Rng + ?Sized>(&mut self, q: usize, p_dep: f64, rng: &mut R);
    fn expect_x(&self, q: usize) -> f64;

    fn magnetization(&self) -> f64 {
        let n = self.num_qubits();
        (0..n).map(|q| self.expect_x(q)).sum::<f64>() / n as f64
    }
}

impl QubitBackend for StabilizerState {
    fn num_qubits(&self) -> usize {
        StabilizerState::num_qubits(self)
    }
    fn z_pulse(&mut self, q: usize) {
        self.z(q);
    }
    fn zz_half(&mut self, a: usize, b: usize) {
        StabilizerState::zz_half(self, a, b);
    }
    fn measure_xx<R: Rng + ?Sized>(&mut self, a: usize, b: usize, rng: &mut R) -> MeasurementOutcome {
        StabilizerState::measure_xx(self, a, b, rng)
    }
    fn reset_plus<R: Rng + ?Sized>(&mut self, q: usize, rng: &mut R) -> MeasurementOutcome {
        StabilizerState::reset_plus(self, q, rng)
    }
    fn depolarize<R: Rng + ?Sized>(&mut self, q: usize, p_dep: f64, rng: &mut R) {
        StabilizerState::depolarize(self, q, p_dep, rng);
    }
    fn expect_x(&self, q: usize) -> f64 {
        StabilizerState::expect_x(self, q) as f64
    }
    fn magnetization(&self) -> f64 {
        self.total_x() as f64 / StabilizerState::num_qubits(self) as f64
    }
}

impl QubitBackend for DenseState {
    fn num_qubits(&self) -> usize {
        DenseState::num_qubits(self)
    }
    fn z_pulse(&mut self, q: usize) {
        self.apply_pauli(PauliMask::z(q));
    }
    fn zz_half(&mut self, a: usize, b: usize) {
        self.pauli_rotation(PauliMask::zz(a, b), std::f64::consts::FRAC_PI_2);
    }
    fn measure_xx<R: Rng + ?Sized>(&mut self, a: usize, b: usize, rng: &mut R) -> MeasurementOutcome {
        self.measure(PauliMask::xx(a, b), rng)
    }
    fn reset_plus<R: Rng + ?Sized>(&mut self, q: usize, rng: &mut R) -> MeasurementOutcome {
        DenseState::reset_plus(self, q, rng)
    }
    fn depolarize<R: Rng + ?Sized>(&mut self, q: usize, p_dep: f64, rng: &mut R) {
        DenseState::depolarize(self, q, p_dep, rng);
    }
    fn expect_x(&self, q: usize) -> f64 {
        DenseState::expect_x(self, q)
    }
}

/// Noisy pulse step: flips, entangling gates, resets, depolarization.
pub fn step_pulse<B: QubitBackend, R: Rng + ?Sized>(state: &mut B, params: &ProtocolParams, rng: &mut R) {
    let n = params.num_sites();
    let lat = &params.lattice;
    if params.p_flip > 0.0 {
        for j in 0..n {
            if rng.gen::<f64>() < params.p_flip {
                state.z_pulse(j);
            }
        }
    }
    if params.p_unit > 0.0 {
        for j in 0..n {
            if rng.gen::<f64>() < params.p_unit {
                let deg = lat.degree(j);
                if deg > 0 {
                    let k = lat.neighbor_list(j).nth(rng.gen_range(0..deg)).expect("degree counted");
                    state.zz_half(j, k);
                }
            }
        }
    }
    if params.p_reset > 0.0 {
        for j in 0..n {
            if rng.gen::<f64>() < params.p_reset {
                state.reset_plus(j, rng);
            }
        }
    }
    if params.p_dep > 0.0 {
        for j in 0..n {
            state.depolarize(j, params.p_dep, rng);
        }
    }
}

/// Recorded (possibly corrupted) outcomes of one NEC check.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NecRecord {
    pub w_n: i8,
    pub w_e: i8,
    pub fired: bool,
}

#[inline]
fn corrupt<R: Rng + ?Sized>(v: i8, p_me: f64, rng: &mut R) -> i8 {
    if p_me > 0.0 && rng.gen::<f64>() < p_me {
        -v
    } else {
        v
    }
}

/// Measures `W_n` then `W_e`, corrupts the records, and pulses `j` if both
/// recorded outcomes are `-1`. Returns `None` when `j` lacks an NEC triple.
pub fn nec_correct_site<B: QubitBackend, R: Rng + ?Sized>(
    state: &mut B,
    lattice: &LatticeTopology,
    j: SiteId,
    p_me: f64,
    rng: &mut R,
) -> Option<NecRecord> {
    let (bn, be) = lattice.nec_targets(j)?;
    let wn = state.measure_xx(j, bn.other(j), rng).value;
    let we = state.measure_xx(j, be.other(j), rng).value;
    let w_n = corrupt(wn, p_me, rng);
    let w_e = corrupt(we, p_me, rng);
    let fired = w_n < 0 && w_e < 0;
    if fired {
        state.z_pulse(j);
    }
    Some(NecRecord { w_n, w_e, fired })
}

/// Measures every incident bond in N, E, S, W order and pulses `j` when the
/// number of recorded walls reaches [`majority_threshold`].
pub fn majority_correct_site<B: QubitBackend, R: Rng + ?Sized>(
    state: &mut B,
    lattice: &LatticeTopology,
    j: SiteId,
    p_me: f64,
    rng: &mut R,
) -> (Vec<i8>, bool) {
    let bonds = lattice.majority_bonds(j);
    let truth: Vec<i8> = bonds.iter().map(|b| state.measure_xx(j, b.other(j), rng).value).collect();
    let rec: Vec<i8> = truth.into_iter().map(|v| corrupt(v, p_me, rng)).collect();
    let walls = rec.iter().filter(|&&v| v < 0).count();
    let fired = !bonds.is_empty() && walls >= majority_threshold(bonds.len());
    if fired {
        state.z_pulse(j);
    }
    (rec, fired)
}

/// Correction step: sublattice A then B, ascending; returns pulses fired.
pub fn step_correct<B: QubitBackend, R: Rng + ?Sized>(
    state: &mut B,
    params: &ProtocolParams,
    rng: &mut R,
) -> u32 {
    if params.p_nec == 0.0 {
        return 0;
    }
    let lat = &params.lattice;
    let mut fired = 0;
    for l in [Sublattice::A, Sublattice::B] {
        for &j in lat.sublattice_sites(l) {
            if rng.gen::<f64>() >= params.p_nec {
                continue;
            }
            let f = match params.rule {
                Rule::Nec => nec_correct_site(state, lat, j, params.p_me, rng).is_some_and(|r| r.fired),
                Rule::MajorityVote => majority_correct_site(state, lat, j, params.p_me, rng).1,
            };
            fired += f as u32;
        }
    }
    fired
}

/// One full period: pulse step then correction step.
pub fn step_period<B: QubitBackend, R: Rng + ?Sized>(state: &mut B, params: &ProtocolParams, rng: &mut R) -> u32 {
    step_pulse(state, params, rng);
    step_correct(state, params, rng)
}

/// Per-trajectory output.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryRecord {
    /// `M(t)` for `t = 0..=steps`.
    pub magnetization: Vec<f64>,
    /// Pulses fired by the correction step in period `t` (entry 0 is 0).
    pub triggers: Vec<u32>,
    /// Optional `<X_j>(t)` values, row-major in `(t, j)`.
    pub site_x: Option<Vec<f32>>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct RecordOptions {
    pub site_series: bool,
}

/// Runs `params.steps` periods on a prepared backend.
pub fn evolve<B: QubitBackend, R: Rng + ?Sized>(
    state: &mut B,
    params: &ProtocolParams,
    rng: &mut R,
    opts: RecordOptions,
) -> TrajectoryRecord {
    let n = state.num_qubits();
    let t_len = params.steps + 1;
    let mut mags = Vec::with_capacity(t_len);
    let mut trig = Vec::with_capacity(t_len);
    let mut sites = opts.site_series.then(|| Vec::with_capacity(t_len * n));
    let snap = |s: &B, m: &mut Vec<f64>, v: &mut Option<Vec<f32>>| {
        m.push(s.magnetization());
        if let Some(v) = v {
            v.extend((0..n).map(|q| s.expect_x(q) as f32));
        }
    };
    snap(state, &mut mags, &mut sites);
    trig.push(0);
    for _ in 0..params.steps {
        trig.push(step_period(state, params, rng));
        snap(state, &mut mags, &mut sites);
    }
    TrajectoryRecord {
        magnetization: mags,
        triggers: trig,
        site_x: sites,
    }
}

/// Stabilizer trajectory from an initial-state recipe and a seeded stream.
pub fn run_trajectory_rng(
    params: &ProtocolParams,
    init: &Init,
    rng: &mut TrajRng,
    opts: RecordOptions,
) -> Result<TrajectoryRecord, ProtocolError> {
    params.validate()?;
    let n = params.num_sites();
    let st = init.realize(n, rng)?;
    let mut state = StabilizerState::new(n, &st);
    Ok(evolve(&mut state, params, rng, opts))
}

/// Trajectory with stream `(seed, point 0, trajectory 0)`.
pub fn run_trajectory(params: &ProtocolParams, init: &Init, seed: u64) -> Result<TrajectoryRecord, ProtocolError> {
    let mut rng = stream_rng(seed, 0, 0);
    run_trajectory_rng(params, init, &mut rng, RecordOptions::default())
}

/// Runs `n_traj` stabilizer trajectories on stream `(master_seed, point, i)`.
pub fn run_ensemble(
    params: &ProtocolParams,
    init: &Init,
    n_traj: usize,
    master_seed: u64,
    point: u32,
    opts: RecordOptions,
) -> Result<Vec<TrajectoryRecord>, ProtocolError> {
    params.validate()?;
    ensemble::map_indexed(n_traj, |i| {
        let mut rng = stream_rng(master_seed, point, i as u32);
        run_trajectory_rng(params, init, &mut rng, opts)
    })
    .into_iter()
    .collect()
}
