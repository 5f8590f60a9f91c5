//! Classical probabilistic cellular automata on the same lattices: Toom's
//! NEC rule, the majority rule, and their noisy versions.
//!
//! The noisy step in sublattice mode consumes random numbers in the same order
//! as the quantum protocol restricted to flips and corrections, so a classical
//! run and a quantum run in the classical limit agree draw for draw.

mod marginals;

pub use marginals::{marginals_match, MarginalReport, SiteMarginals};

use rand::Rng;
use std::sync::Arc;
use thiserror::Error;

use crate::ensemble;
use crate::lattice::{LatticeTopology, SiteId, Sublattice};
use crate::protocol::{majority_threshold, Init, RecordOptions, Rule, TrajectoryRecord};
use crate::rng::stream_rng;
use crate::stabilizer::InitState;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AutomatonError {
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("raster parse error: {0}")]
    Raster(String),
    #[error("initial state `{0}` has no classical counterpart")]
    Init(String),
}

/// One classical spin per site, bit-packed; a set bit is `-1`.
#[derive(Debug, Clone)]
pub struct SpinGrid {
    lattice: Arc<LatticeTopology>,
    bits: Vec<u64>,
}

impl SpinGrid {
    pub fn all_plus(lattice: Arc<LatticeTopology>) -> Self {
        let words = lattice.num_sites().div_ceil(64);
        SpinGrid {
            lattice,
            bits: vec![0; words],
        }
    }

    /// `true` marks a `-1` site.
    pub fn from_pattern(lattice: Arc<LatticeTopology>, minus: &[bool]) -> Result<Self, AutomatonError> {
        if minus.len() != lattice.num_sites() {
            return Err(AutomatonError::Shape(format!(
                "{} values for {} sites",
                minus.len(),
                lattice.num_sites()
            )));
        }
        let mut g = Self::all_plus(lattice);
        for (j, &m) in minus.iter().enumerate() {
            if m {
                g.flip(j);
            }
        }
        Ok(g)
    }

    pub fn lattice(&self) -> &Arc<LatticeTopology> {
        &self.lattice
    }

    pub fn num_sites(&self) -> usize {
        self.lattice.num_sites()
    }

    #[inline]
    pub fn is_minus(&self, j: SiteId) -> bool {
        (self.bits[j / 64] >> (j % 64)) & 1 == 1
    }

    #[inline]
    pub fn get(&self, j: SiteId) -> i8 {
        if self.is_minus(j) {
            -1
        } else {
            1
        }
    }

    #[inline]
    pub fn flip(&mut self, j: SiteId) {
        self.bits[j / 64] ^= 1 << (j % 64);
    }

    pub fn set(&mut self, j: SiteId, v: i8) {
        if (v < 0) != self.is_minus(j) {
            self.flip(j);
        }
    }

    pub fn pattern(&self) -> Vec<bool> {
        (0..self.num_sites()).map(|j| self.is_minus(j)).collect()
    }

    pub fn count_minus(&self) -> usize {
        self.bits.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn magnetization(&self) -> f64 {
        let n = self.num_sites();
        (n as f64 - 2.0 * self.count_minus() as f64) / n as f64
    }

    /// Global spin inversion.
    pub fn inverted(&self) -> Self {
        let mut g = self.clone();
        let n = self.num_sites();
        for (w, word) in g.bits.iter_mut().enumerate() {
            let live = (n - 64 * w).min(64);
            *word ^= if live == 64 { u64::MAX } else { (1u64 << live) - 1 };
        }
        g
    }

    /// Plain-text raster: one line per torus row, `1` for `-1`, `0` for `+1`.
    pub fn to_raster(&self) -> String {
        let (rows, cols) = self.lattice.dims();
        let mut grid = vec![vec!['0'; cols]; rows];
        for j in 0..self.num_sites() {
            let (r, c) = self.lattice.torus_coords(j);
            if self.is_minus(j) {
                grid[r][c] = '1';
            }
        }
        let mut s = String::with_capacity(rows * (cols + 1));
        for row in grid {
            s.extend(row);
            s.push('\n');
        }
        s
    }

    pub fn from_raster(lattice: Arc<LatticeTopology>, text: &str) -> Result<Self, AutomatonError> {
        let (rows, cols) = lattice.dims();
        let lines: Vec<&str> = text.lines().filter(|l| !l.trim().is_empty()).collect();
        if lines.len() != rows {
            return Err(AutomatonError::Raster(format!("expected {rows} rows, got {}", lines.len())));
        }
        let mut cell = vec![vec![false; cols]; rows];
        for (r, line) in lines.iter().enumerate() {
            let chars: Vec<char> = line.trim().chars().collect();
            if chars.len() != cols {
                return Err(AutomatonError::Raster(format!("row {r}: expected {cols} cells")));
            }
            for (c, ch) in chars.into_iter().enumerate() {
                cell[r][c] = match ch {
                    '0' => false,
                    '1' => true,
                    _ => return Err(AutomatonError::Raster(format!("row {r}: bad cell `{ch}`"))),
                };
            }
        }
        let minus: Vec<bool> = (0..lattice.num_sites())
            .map(|j| {
                let (r, c) = lattice.torus_coords(j);
                cell[r][c]
            })
            .collect();
        Self::from_pattern(lattice, &minus)
    }
}

impl PartialEq for SpinGrid {
    fn eq(&self, o: &Self) -> bool {
        self.bits == o.bits && self.lattice.kind() == o.lattice.kind() && self.lattice.dims() == o.lattice.dims()
    }
}

impl Eq for SpinGrid {}

#[inline]
fn nec_wants_flip(g: &SpinGrid, j: SiteId) -> bool {
    match g.lattice.nec_targets(j) {
        Some((bn, be)) => {
            let s = g.is_minus(j);
            g.is_minus(bn.other(j)) != s && g.is_minus(be.other(j)) != s
        }
        None => false,
    }
}

/// Synchronous NEC update: every site whose North and East neighbors both
/// differ from it is flipped.
pub fn nec_step(grid: &SpinGrid) -> SpinGrid {
    let mut out = grid.clone();
    for j in 0..grid.num_sites() {
        if nec_wants_flip(grid, j) {
            out.flip(j);
        }
    }
    out
}

/// Synchronous majority update with the protocol's wall-count threshold.
pub fn majority_step(grid: &SpinGrid) -> SpinGrid {
    let mut out = grid.clone();
    for j in 0..grid.num_sites() {
        let bonds = grid.lattice.majority_bonds(j);
        let walls = bonds
            .iter()
            .filter(|b| grid.is_minus(b.other(j)) != grid.is_minus(j))
            .count();
        if !bonds.is_empty() && walls >= majority_threshold(bonds.len()) {
            out.flip(j);
        }
    }
    out
}

/// Noisy automaton parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AutomatonParams {
    pub p_flip: f64,
    pub p_nec: f64,
    pub p_me: f64,
    /// Sublattice A then B, sequentially; otherwise one synchronous update.
    pub sublattice_mode: bool,
    pub rule: Rule,
}

impl AutomatonParams {
    pub fn nec(p_flip: f64, p_nec: f64, p_me: f64, sublattice_mode: bool) -> Self {
        AutomatonParams {
            p_flip,
            p_nec,
            p_me,
            sublattice_mode,
            rule: Rule::Nec,
        }
    }
}

#[inline]
fn record<R: Rng + ?Sized>(wall: bool, p_me: f64, rng: &mut R) -> bool {
    if p_me > 0.0 && rng.gen::<f64>() < p_me {
        !wall
    } else {
        wall
    }
}

/// Selection and record draws for one site against `g`; true if it fires.
fn decide<R: Rng + ?Sized>(g: &SpinGrid, j: SiteId, p: &AutomatonParams, rng: &mut R) -> bool {
    if rng.gen::<f64>() >= p.p_nec {
        return false;
    }
    let lat = &g.lattice;
    let s = g.is_minus(j);
    match p.rule {
        Rule::Nec => {
            let Some((bn, be)) = lat.nec_targets(j) else {
                return false;
            };
            let wn = g.is_minus(bn.other(j)) != s;
            let we = g.is_minus(be.other(j)) != s;
            let rn = record(wn, p.p_me, rng);
            let re = record(we, p.p_me, rng);
            rn && re
        }
        Rule::MajorityVote => {
            let bonds = lat.majority_bonds(j);
            let truth: Vec<bool> = bonds.iter().map(|b| g.is_minus(b.other(j)) != s).collect();
            let walls = truth.into_iter().filter(|&w| record(w, p.p_me, rng)).count();
            !bonds.is_empty() && walls >= majority_threshold(bonds.len())
        }
    }
}

/// One noisy period with an explicit rule.
pub fn noisy_step<R: Rng + ?Sized>(grid: &mut SpinGrid, p: &AutomatonParams, rng: &mut R) -> u32 {
    let n = grid.num_sites();
    if p.p_flip > 0.0 {
        for j in 0..n {
            if rng.gen::<f64>() < p.p_flip {
                grid.flip(j);
            }
        }
    }
    if p.p_nec == 0.0 {
        return 0;
    }
    let mut fired = 0;
    if p.sublattice_mode {
        let lat = grid.lattice.clone();
        for l in [Sublattice::A, Sublattice::B] {
            for &j in lat.sublattice_sites(l) {
                if decide(grid, j, p, rng) {
                    grid.flip(j);
                    fired += 1;
                }
            }
        }
    } else {
        let snapshot = grid.clone();
        for j in 0..n {
            if decide(&snapshot, j, p, rng) {
                grid.flip(j);
                fired += 1;
            }
        }
    }
    fired
}

/// Flips with `p_flip`, then NEC checks with `p_nec` and record errors `p_me`.
pub fn noisy_automaton_step<R: Rng + ?Sized>(
    grid: &mut SpinGrid,
    p_flip: f64,
    p_nec: f64,
    p_me: f64,
    sublattice_mode: bool,
    rng: &mut R,
) {
    noisy_step(grid, &AutomatonParams::nec(p_flip, p_nec, p_me, sublattice_mode), rng);
}

fn initial_pattern<R: Rng + ?Sized>(init: &Init, n: usize, rng: &mut R) -> Result<Vec<bool>, AutomatonError> {
    match init.realize(n, rng).map_err(|e| AutomatonError::Shape(e.to_string()))? {
        InitState::AllPlus => Ok(vec![false; n]),
        InitState::ProductXPattern(v) => Ok(v),
        InitState::AllZero => Err(AutomatonError::Init("all_zero".into())),
    }
}

/// Runs `steps` noisy periods and records `M(t)` (and optionally spins).
pub fn run_automaton<R: Rng + ?Sized>(
    lattice: Arc<LatticeTopology>,
    params: &AutomatonParams,
    init: &Init,
    steps: usize,
    rng: &mut R,
    opts: RecordOptions,
) -> Result<TrajectoryRecord, AutomatonError> {
    let n = lattice.num_sites();
    let pattern = initial_pattern(init, n, rng)?;
    let mut g = SpinGrid::from_pattern(lattice, &pattern)?;
    let mut mags = Vec::with_capacity(steps + 1);
    let mut trig = Vec::with_capacity(steps + 1);
    let mut sites = opts.site_series.then(|| Vec::with_capacity((steps + 1) * n));
    let snap = |g: &SpinGrid, m: &mut Vec<f64>, s: &mut Option<Vec<f32>>| {
        m.push(g.magnetization());
        if let Some(s) = s {
            s.extend((0..n).map(|j| g.get(j) as f32));
        }
    };
    snap(&g, &mut mags, &mut sites);
    trig.push(0);
    for _ in 0..steps {
        trig.push(noisy_step(&mut g, params, rng));
        snap(&g, &mut mags, &mut sites);
    }
    Ok(TrajectoryRecord {
        magnetization: mags,
        triggers: trig,
        site_x: sites,
    })
}

/// Ensemble on streams `(master_seed, point, i)`.
#[allow(clippy::too_many_arguments)]
pub fn run_automaton_ensemble(
    lattice: Arc<LatticeTopology>,
    params: &AutomatonParams,
    init: &Init,
    steps: usize,
    n_traj: usize,
    master_seed: u64,
    point: u32,
    opts: RecordOptions,
) -> Result<Vec<TrajectoryRecord>, AutomatonError> {
    ensemble::map_indexed(n_traj, |i| {
        let mut rng = stream_rng(master_seed, point, i as u32);
        run_automaton(lattice.clone(), params, init, steps, &mut rng, opts)
    })
    .into_iter()
    .collect()
}
