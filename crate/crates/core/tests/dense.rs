use std::sync::Arc;

use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use toomdtc::dense::jump::{bernoulli_step_channel, lindblad_derivative};
use toomdtc::dense::{oracle_apply_period, DenseState, DensityMatrix, JumpVariant, NonCliffordModel, NonCliffordParams, PauliMask};
use toomdtc::lattice::{build_lattice, LatticeKind, LatticeTopology};
use toomdtc::protocol::{evolve, ProtocolParams, RecordOptions};
use toomdtc::stabilizer::{InitState, StabilizerState};

fn periodic(r: usize, c: usize) -> Arc<LatticeTopology> {
    Arc::new(build_lattice(LatticeKind::SquarePeriodic, (r, c)).unwrap())
}

fn random_pure(n: usize, seed: u64) -> DenseState {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let amps = (0..1 << n)
        .map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect();
    DenseState::from_amplitudes(n, amps).unwrap()
}

#[test]
fn bernoulli_steps_approach_the_master_equation() {
    let lat = periodic(2, 2);
    let rho = DensityMatrix::from_pure(&random_pure(4, 3)).unwrap();
    let gamma = 1.0;
    for variant in [JumpVariant::CoherentNec, JumpVariant::IncoherentNec, JumpVariant::MajorityVote5] {
        let deriv = lindblad_derivative(&rho, &lat, gamma, variant);
        let err = |dt: f64| {
            let mut step = rho.clone();
            bernoulli_step_channel(&mut step, &lat, gamma * dt, variant);
            let mut euler = rho.clone();
            euler.add_scaled(dt, &deriv);
            step.max_abs_diff(&euler)
        };
        let (e1, e2) = (err(1e-2), err(5e-3));
        assert!(e1 < 1e-2 * 1e-2 * 10.0, "{variant:?}: {e1:e}");
        let ratio = e2 / e1;
        assert!((0.2..0.3).contains(&ratio), "{variant:?}: error ratio {ratio}");
    }
}

#[test]
fn feedback_outcomes_follow_the_born_rule() {
    let lat = periodic(2, 3);
    let p = NonCliffordParams::new(lat.clone(), 0.9 * std::f64::consts::FRAC_PI_2, 0.9, 1, 5);
    let model = NonCliffordModel::new(p).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let mut psi = DenseState::plus(6).unwrap();
    model.apply_uz(&mut psi, &mut rng);
    model.apply_ux(&mut psi);
    model.apply_uz(&mut psi, &mut rng);
    model.apply_ux(&mut psi);

    let j = 0;
    let (bn, be) = lat.nec_targets(j).unwrap();
    let (mn, me) = (PauliMask::xx(j, bn.other(j)), PauliMask::xx(j, be.other(j)));
    let p_n = (1.0 - psi.expect(mn)) / 2.0;
    // P(both -1) = <(1 - XX_n)(1 - XX_e)> / 4
    let p_both = (1.0 - psi.expect(mn) - psi.expect(me) + psi.expect(mn.times(me))) / 4.0;
    assert!(p_n > 0.05 && p_n < 0.95, "degenerate test state: {p_n}");

    let draws = 10_000;
    let (mut hits_n, mut hits_both) = (0usize, 0usize);
    for _ in 0..draws {
        let mut s = psi.clone();
        let a = s.measure(mn, &mut rng);
        let b = s.measure(me, &mut rng);
        hits_n += a.is_minus() as usize;
        hits_both += (a.is_minus() && b.is_minus()) as usize;
        assert!((s.norm() - 1.0).abs() < 1e-12);
    }
    for (hits, p) in [(hits_n, p_n), (hits_both, p_both)] {
        let f = hits as f64 / draws as f64;
        let se = (p * (1.0 - p) / draws as f64).sqrt();
        assert!((f - p).abs() < 3.0 * se, "frequency {f} vs probability {p} (se {se})");
    }
}

#[test]
fn dense_and_tableau_trajectories_coincide() {
    let lat = periodic(2, 3);
    let mut p = ProtocolParams::fig1(lat, 40);
    p.p_dep = 0.03;
    for seed in 0..20u64 {
        let pattern: Vec<bool> = (0..6).map(|q| (seed >> q) & 1 == 1).collect();
        let mut tab = StabilizerState::new(6, &InitState::ProductXPattern(pattern.clone()));
        let mut psi = DenseState::x_product(&pattern).unwrap();
        let a = evolve(&mut tab, &p, &mut ChaCha8Rng::seed_from_u64(seed), RecordOptions { site_series: true });
        let b = evolve(&mut psi, &p, &mut ChaCha8Rng::seed_from_u64(seed), RecordOptions { site_series: true });
        assert_eq!(a.triggers, b.triggers, "seed {seed}");
        let (xa, xb) = (a.site_x.unwrap(), b.site_x.unwrap());
        for (u, v) in xa.iter().zip(&xb) {
            assert!((u - v).abs() < 1e-6, "seed {seed}");
        }
    }
}

#[test]
fn exact_period_is_trace_preserving() {
    let lat = periodic(2, 2);
    let mut p = ProtocolParams::fig1(lat, 1);
    p.p_dep = 0.05;
    let mut rho = DensityMatrix::from_pure(&random_pure(4, 9)).unwrap();
    for _ in 0..5 {
        rho = oracle_apply_period(&rho, &p).unwrap();
        assert!((rho.trace().re - 1.0).abs() < 1e-10);
        assert!(rho.trace().im.abs() < 1e-10);
        assert!(rho.hermiticity_error() < 1e-10);
        assert!(rho.min_eigenvalue() > -1e-10);
    }
}
