use std::sync::Arc;

use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::analysis::EnsembleStats;
use crate::compiler::{compile_nec_round_with, simulate_channel, CompileOptions, Gateset, HardwareLayout, NecVariant};
use crate::dense::oracle::correction_channel;
use crate::dense::{oracle_apply_period, DenseState, DensityMatrix};
use crate::lattice::{build_lattice, LatticeKind};
use crate::protocol::{run_ensemble, Init, ProtocolParams, RecordOptions};
use crate::stabilizer::{Gate, InitState, StabilizerState};

/// One line of the oracle-check report.
#[derive(Debug, Clone)]
pub struct CheckLine {
    pub name: &'static str,
    pub pass: bool,
    pub detail: String,
}

impl std::fmt::Display for CheckLine {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let tag = if self.pass { "PASS" } else { "FAIL" };
        write!(f, "{tag} {}: {}", self.name, self.detail)
    }
}

const CHANNEL_TOL: f64 = 1e-10;
const Z_LIMIT: f64 = 3.0;

fn random_rho(n: usize, rng: &mut ChaCha8Rng) -> DensityMatrix {
    let mut rho = DensityMatrix::zeros(n);
    for _ in 0..3 {
        let amps = (0..1 << n)
            .map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        let psi = DenseState::from_amplitudes(n, amps).expect("small state");
        rho.add_scaled(1.0 / 3.0, &DensityMatrix::from_pure(&psi).expect("small state"));
    }
    rho
}

fn compiled_rounds(seed: u64) -> CheckLine {
    let lat = Arc::new(build_lattice(LatticeKind::SquarePeriodic, (2, 2)).expect("2x2"));
    let layout = HardwareLayout::for_lattice(&lat);
    let mut p = ProtocolParams::new(lat.clone(), 1);
    p.p_nec = 1.0;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    let mut err = None;
    for _ in 0..2 {
        let rho = random_rho(4, &mut rng);
        let mut want = rho.clone();
        correction_channel(&mut want, &p);
        for variant in [NecVariant::MeasureAndFeedback, NecVariant::ToffoliReset] {
            for gateset in [Gateset::CrossResonance, Gateset::CPhase] {
                let opts = CompileOptions {
                    gateset,
                    correct_byproduct: true,
                };
                match compile_nec_round_with(&layout, &lat, variant, &opts).and_then(|c| simulate_channel(&c, &rho)) {
                    Ok(got) => worst = worst.max(got.max_abs_diff(&want)),
                    Err(e) => err = Some(e.to_string()),
                }
            }
        }
    }
    CheckLine {
        name: "compiled-round",
        pass: err.is_none() && worst < CHANNEL_TOL,
        detail: err.unwrap_or_else(|| format!("max |delta rho| = {worst:.2e} (tol {CHANNEL_TOL:e})")),
    }
}

fn clifford_cross(seed: u64) -> CheckLine {
    const GATES: [Gate; 10] = [
        Gate::X,
        Gate::Y,
        Gate::Z,
        Gate::H,
        Gate::S,
        Gate::SDag,
        Gate::CX,
        Gate::CZ,
        Gate::ZPulse,
        Gate::ZZHalf,
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let n = rng.gen_range(2..=6);
        let mut tab = StabilizerState::new(n, &InitState::AllPlus);
        let mut psi = DenseState::plus(n).expect("small state");
        for _ in 0..40 {
            let g = GATES[rng.gen_range(0..GATES.len())];
            let a = rng.gen_range(0..n);
            let b = (a + rng.gen_range(1..n)) % n;
            let t = if g.arity() == 2 { vec![a, b] } else { vec![a] };
            tab.apply_gate(g, &t).expect("valid gate");
            psi.apply_gate(g, &t).expect("valid gate");
        }
        for q in 0..n {
            worst = worst.max((tab.expect_x(q) as f64 - psi.expect_x(q)).abs());
        }
    }
    CheckLine {
        name: "clifford-cross",
        pass: worst < CHANNEL_TOL,
        detail: format!("max |<X>_tab - <X>_dense| = {worst:.2e} over 20 random circuits"),
    }
}

fn oracle_vs_ensemble(seed: u64) -> CheckLine {
    const T: usize = 5;
    const N: usize = 4000;
    let lat = Arc::new(build_lattice(LatticeKind::SquarePeriodic, (2, 2)).expect("2x2"));
    let mut p = ProtocolParams::new(lat, T);
    p.p_flip = 0.1;
    p.p_nec = 0.8;
    p.p_unit = 0.05;
    p.p_reset = 0.05;
    p.p_me = 0.05;
    p.p_dep = 0.05;
    let recs = match run_ensemble(&p, &Init::AllPlus, N, seed, 0, RecordOptions::default()) {
        Ok(r) => r,
        Err(e) => {
            return CheckLine {
                name: "oracle-ensemble",
                pass: false,
                detail: e.to_string(),
            }
        }
    };
    let st = EnsembleStats::from_records(&recs).expect("non-empty");
    let mut rho = DensityMatrix::from_pure(&DenseState::plus(4).expect("4 qubits")).expect("4 qubits");
    let mut worst = 0.0f64;
    for t in 1..=T {
        rho = oracle_apply_period(&rho, &p).expect("2x2 oracle");
        let z = (st.mean[t] - rho.magnetization()).abs() / st.stderr[t].max(1e-12);
        worst = worst.max(z);
    }
    CheckLine {
        name: "oracle-ensemble",
        pass: worst < Z_LIMIT,
        detail: format!("max |z| = {worst:.2} over t <= {T}, {N} trajectories (limit {Z_LIMIT})"),
    }
}

/// Cross-checks between independent implementations.
pub fn oracle_check(seed: u64) -> Vec<CheckLine> {
    vec![compiled_rounds(seed), clifford_cross(seed), oracle_vs_ensemble(seed)]
}
