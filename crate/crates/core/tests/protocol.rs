use std::sync::Arc;

use num_complex::Complex64 as C64;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use toomdtc::dense::oracle::nec_site_channel;
use toomdtc::dense::{DenseState, DensityMatrix};
use toomdtc::lattice::{build_lattice, LatticeKind, LatticeTopology, Sublattice};
use toomdtc::protocol::{run_ensemble, step_correct, Init, ProtocolParams, RecordOptions};
use toomdtc::stabilizer::{InitState, StabilizerState};

fn lattice(kind: LatticeKind, r: usize, c: usize) -> Arc<LatticeTopology> {
    Arc::new(build_lattice(kind, (r, c)).unwrap())
}

#[test]
fn inverted_start_gives_negated_records() {
    let lat = lattice(LatticeKind::SquarePeriodic, 4, 4);
    let mut p = ProtocolParams::fig1(lat, 60);
    p.p_reset = 0.0;
    p.p_dep = 0.02;
    let pat: Vec<bool> = (0..16).map(|j| j % 5 == 0).collect();
    let inv: Vec<bool> = pat.iter().map(|b| !b).collect();
    let a = run_ensemble(&p, &Init::XPattern(pat), 200, 4, 0, RecordOptions::default()).unwrap();
    let b = run_ensemble(&p, &Init::XPattern(inv), 200, 4, 0, RecordOptions::default()).unwrap();
    for (ra, rb) in a.iter().zip(&b) {
        assert_eq!(ra.triggers, rb.triggers);
        for (x, y) in ra.magnetization.iter().zip(&rb.magnetization) {
            assert_eq!(*x, -*y);
        }
    }
}

fn random_rho(n: usize, seed: u64) -> DensityMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rho = DensityMatrix::zeros(n);
    for _ in 0..2 {
        let amps = (0..1 << n)
            .map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        rho.add_scaled(0.5, &DensityMatrix::from_pure(&DenseState::from_amplitudes(n, amps).unwrap()).unwrap());
    }
    rho
}

#[test]
fn sublattice_corrections_commute() {
    for (kind, r, c) in [(LatticeKind::SquarePeriodic, 2, 4), (LatticeKind::SquareOpen, 3, 3)] {
        let lat = lattice(kind, r, c);
        let rho = random_rho(lat.num_sites(), 21);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for sub in [Sublattice::A, Sublattice::B] {
            let sites = lat.sublattice_sites(sub).to_vec();
            let apply = |order: &[usize]| {
                let mut out = rho.clone();
                for &j in order {
                    out.mix_channel(0.7, |m| nec_site_channel(m, &lat, j, 0.0));
                }
                out
            };
            let base = apply(&sites);
            for _ in 0..4 {
                let mut perm = sites.clone();
                perm.shuffle(&mut rng);
                assert!(apply(&perm).max_abs_diff(&base) < 1e-12, "{kind:?} {sub:?} {perm:?}");
            }
        }
    }
}

#[test]
fn uniform_x_states_are_fixed_by_error_free_correction() {
    let lat = lattice(LatticeKind::SquarePeriodic, 6, 6);
    let mut p = ProtocolParams::new(lat, 1);
    p.p_nec = 1.0;
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for init in [InitState::AllPlus, InitState::ProductXPattern(vec![true; 36])] {
        let s0 = StabilizerState::new(36, &init);
        let mut s = s0.clone();
        for _ in 0..5 {
            assert_eq!(step_correct(&mut s, &p, &mut rng), 0);
        }
        assert_eq!(s, s0);
    }
}
