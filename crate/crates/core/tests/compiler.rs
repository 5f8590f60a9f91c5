use std::sync::Arc;

use num_complex::Complex64 as C64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use toomdtc::compiler::*;
use toomdtc::dense::oracle::{correction_channel, pulse_channel};
use toomdtc::dense::{DenseState, DensityMatrix};
use toomdtc::lattice::{build_lattice, LatticeKind};
use toomdtc::protocol::ProtocolParams;

const TOL: f64 = 1e-10;

fn random_rho(n: usize, terms: usize, seed: u64) -> DensityMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rho = DensityMatrix::zeros(n);
    for _ in 0..terms {
        let amps = (0..1 << n)
            .map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        let psi = DenseState::from_amplitudes(n, amps).unwrap();
        rho.add_scaled(1.0 / terms as f64, &DensityMatrix::from_pure(&psi).unwrap());
    }
    rho
}

fn two_plus_one() -> HardwareLayout {
    HardwareLayout::new(2, 1, &[(0, 0), (1, 0)]).unwrap()
}

fn product(minus: &[bool]) -> DensityMatrix {
    DensityMatrix::from_pure(&DenseState::x_product(minus).unwrap()).unwrap()
}

#[test]
fn gadget_branches_on_product_inputs() {
    let layout = two_plus_one();
    for gateset in [Gateset::CrossResonance, Gateset::CPhase] {
        let (c, r) = compile_dw_measurement(&layout, 0, 1, gateset).unwrap();
        for bits in 0..4 {
            let minus = [bits & 1 == 1, bits & 2 == 2];
            let wall = minus[0] != minus[1];
            let rho = product(&minus);
            let br = simulate_branches(&c, &rho).unwrap();
            assert_eq!(br.len(), 1, "{gateset:?} {minus:?}");
            assert!((br[0].probability() - 1.0).abs() < TOL);
            let expected = if wall { gateset.wall_outcome() } else { -gateset.wall_outcome() };
            assert_eq!(br[0].records[r], Some(expected));
            assert!(br[0].system_state(2).max_abs_diff(&rho) < TOL);
        }
    }
}

#[test]
fn cross_resonance_outcome_sign() {
    let (c, r) = compile_dw_measurement(&two_plus_one(), 0, 1, Gateset::CrossResonance).unwrap();
    let br = simulate_branches(&c, &product(&[false, false])).unwrap();
    assert_eq!(br[0].records[r], Some(-1));
    let br = simulate_branches(&c, &product(&[false, true])).unwrap();
    assert_eq!(br[0].records[r], Some(1));
}

#[test]
fn gadget_keeps_coherence_within_a_sector() {
    let cat = DenseState::cat(2, C64::new(1.0, 0.0), C64::new(1.0, 0.0)).unwrap();
    let rho = DensityMatrix::from_pure(&cat).unwrap();
    let layout = two_plus_one();
    let (c, r) = compile_dw_measurement(&layout, 0, 1, Gateset::CrossResonance).unwrap();
    let br = simulate_branches(&c, &rho).unwrap();
    assert_eq!(br.len(), 1);
    assert_eq!(br[0].records[r], Some(-1));
    assert!((br[0].system_state(2).fidelity_pure(&cat) - 1.0).abs() < TOL);

    // without the correction the branch carries X_0, which flips the cat's sign
    let opts = CompileOptions {
        gateset: Gateset::CrossResonance,
        correct_byproduct: false,
    };
    let (c, _) = compile_dw_measurement_with(&layout, 0, 1, &opts).unwrap();
    let br = simulate_branches(&c, &rho).unwrap();
    assert!(br[0].system_state(2).fidelity_pure(&cat) < TOL);
}

#[test]
fn gadget_splits_mixed_sectors() {
    // (|++> + |+->)/sqrt2 has W = +1 and W = -1 with weight 1/2 each
    let s = 0.5f64.sqrt();
    let amps = vec![C64::new(s, 0.0), C64::new(0.0, 0.0), C64::new(s, 0.0), C64::new(0.0, 0.0)];
    let mut psi = DenseState::from_amplitudes(2, amps).unwrap();
    psi.hadamard_all();
    let rho = DensityMatrix::from_pure(&psi).unwrap();
    let (c, r) = compile_dw_measurement(&two_plus_one(), 0, 1, Gateset::CPhase).unwrap();
    let br = simulate_branches(&c, &rho).unwrap();
    assert_eq!(br.len(), 2);
    for b in &br {
        assert!((b.probability() - 0.5).abs() < TOL);
        let minus1 = b.records[r] == Some(-1);
        let want = product(&[false, minus1]);
        assert!(b.system_state(2).max_abs_diff(&want) < TOL);
    }
}

fn abstract_round(rho: &DensityMatrix, rows: usize, cols: usize) -> DensityMatrix {
    let lat = Arc::new(build_lattice(LatticeKind::SquarePeriodic, (rows, cols)).unwrap());
    let mut p = ProtocolParams::new(lat, 1);
    p.p_nec = 1.0;
    let mut out = rho.clone();
    correction_channel(&mut out, &p);
    out
}

#[test]
fn compiled_rounds_match_the_abstract_channel() {
    let lat = build_lattice(LatticeKind::SquarePeriodic, (2, 2)).unwrap();
    let layout = HardwareLayout::for_lattice(&lat);
    for seed in 0..3 {
        let rho = random_rho(4, 3, seed);
        let want = abstract_round(&rho, 2, 2);
        for variant in [NecVariant::MeasureAndFeedback, NecVariant::ToffoliReset] {
            for gateset in [Gateset::CrossResonance, Gateset::CPhase] {
                let opts = CompileOptions {
                    gateset,
                    correct_byproduct: true,
                };
                let c = compile_nec_round_with(&layout, &lat, variant, &opts).unwrap();
                let got = simulate_channel(&c, &rho).unwrap();
                let d = got.max_abs_diff(&want);
                assert!(d < TOL, "{variant:?} {gateset:?}: {d:e}");
            }
        }
    }
}

#[test]
fn uncorrected_byproduct_preserves_x_statistics() {
    let lat = Arc::new(build_lattice(LatticeKind::SquarePeriodic, (2, 2)).unwrap());
    let layout = HardwareLayout::for_lattice(&lat);
    let mut p = ProtocolParams::new(lat.clone(), 1);
    p.p_flip = 0.9;
    p.p_reset = 0.1;
    p.p_dep = 0.05;
    let full: Vec<usize> = vec![0, 3, 1, 2];
    let compile = |sites: &[usize], correct| {
        let opts = CompileOptions {
            gateset: Gateset::CrossResonance,
            correct_byproduct: correct,
        };
        compile_nec_sites(&layout, &lat, sites, NecVariant::MeasureAndFeedback, &opts).unwrap()
    };
    let cat = DenseState::cat(4, C64::new(0.6, 0.0), C64::new(0.8, 0.0)).unwrap();
    let mut differs = 0.0f64;
    for sites in [&full[..], &[0][..]] {
        let (on, off) = (compile(sites, true), compile(sites, false));
        let mut a = DensityMatrix::from_pure(&cat).unwrap();
        let mut b = a.clone();
        for _ in 0..3 {
            pulse_channel(&mut a, &p);
            pulse_channel(&mut b, &p);
            a = simulate_channel(&on, &a).unwrap();
            b = simulate_channel(&off, &b).unwrap();
            differs = differs.max(a.max_abs_diff(&b));
            let (xa, xb) = (x_populations(&a), x_populations(&b));
            for (u, v) in xa.iter().zip(&xb) {
                assert!((u - v).abs() < TOL);
            }
        }
    }
    // a lone site leaves an odd frame that flips the cat coherence
    assert!(differs > 1e-3);
}

fn x_populations(rho: &DensityMatrix) -> Vec<f64> {
    let n = rho.num_qubits();
    let mut r = rho.clone();
    for q in 0..n {
        r.conj_1q(q, toomdtc::dense::kernels::hadamard());
    }
    (0..r.dim()).map(|k| r.get(k, k).re).collect()
}

#[test]
fn single_gadget_text_lines() {
    let layout = two_plus_one();
    let (c, _) = compile_dw_measurement(&layout, 0, 1, Gateset::CrossResonance).unwrap();
    let text = emit_text(&c);
    let body: Vec<&str> = text.lines().skip(1).collect();
    assert_eq!(
        body,
        ["PREP_PLUS a0", "CR q0 a0 0.5pi", "CR q1 a0 0.5pi", "MX a0 -> r0", "X q0 IF r0==-1"]
    );
    let opts = CompileOptions {
        gateset: Gateset::CrossResonance,
        correct_byproduct: false,
    };
    let (c, _) = compile_dw_measurement_with(&layout, 0, 1, &opts).unwrap();
    assert_eq!(emit_text(&c).lines().count(), 1 + 4);
    assert!(matches!(
        compile_dw_measurement(&HardwareLayout::new(3, 1, &[(0, 0), (1, 0)]).unwrap(), 0, 2, Gateset::CPhase),
        Err(CompileError::BondNotMeasurable(0, 2))
    ));
}

#[derive(Debug, Clone)]
enum Step {
    Gate(usize, usize, usize, f64),
    Measure(usize),
    Cond(usize, usize, usize, i8, i8, bool),
}

fn step() -> impl Strategy<Value = Step> {
    let angle = prop_oneof![Just(1.0), Just(0.5), -4.0f64..4.0, any::<f64>().prop_filter("finite", |a| a.is_finite())];
    prop_oneof![
        (0usize..9, 0usize..8, 0usize..8, angle).prop_map(|(o, a, b, t)| Step::Gate(o, a, b, t)),
        (0usize..8).prop_map(Step::Measure),
        (0usize..5, 0usize..8, 0usize..64, prop_oneof![Just(1i8), Just(-1i8)], prop_oneof![Just(1i8), Just(-1i8)], any::<bool>())
            .prop_map(|(o, q, r, v, w, two)| Step::Cond(o, q, r, v, w, two)),
    ]
}

fn qubit_of(i: usize) -> Qubit {
    if i < 4 {
        Qubit::Sys(i)
    } else {
        Qubit::Anc(i - 4)
    }
}

fn build(steps: &[Step]) -> Circuit {
    let ops: Vec<Opcode> = Opcode::ALL.iter().copied().filter(|o| *o != Opcode::Mx).collect();
    let mut c = Circuit::new(4, 4);
    for s in steps {
        match *s {
            Step::Gate(o, a, b, t) => {
                let op = ops[o];
                let b = if a == b { (b + 1) % 8 } else { b };
                let qs: Vec<Qubit> = [a, b][..op.arity()].iter().map(|&i| qubit_of(i)).collect();
                let mut ins = Instruction::new(op, &qs);
                if op.takes_angle() {
                    ins = ins.with_angle(t);
                }
                c.push(ins);
            }
            Step::Measure(q) => {
                c.measure_x(qubit_of(q));
            }
            Step::Cond(o, q, r, v, w, two) => {
                let n = c.num_records();
                if n == 0 {
                    continue;
                }
                let mut tests = vec![(r % n, v)];
                if two {
                    tests.push(((r / 8) % n, w));
                }
                let op = [Opcode::X, Opcode::Z, Opcode::H, Opcode::PrepPlus, Opcode::Reset][o];
                c.push(Instruction::new(op, &[qubit_of(q)]).when(&tests));
            }
        }
    }
    c
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]
    #[test]
    fn text_round_trip(steps in prop::collection::vec(step(), 0..40)) {
        let c = build(&steps);
        prop_assert!(c.validate().is_ok());
        let back = parse(&emit_text(&c)).unwrap();
        prop_assert_eq!(back, c);
    }
}
