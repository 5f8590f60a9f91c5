use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use toomdtc::dense::{DenseState, PauliMask};
use toomdtc::stabilizer::{Gate, InitState, Pauli, PauliString, StabilizerState};

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

#[derive(Debug, Clone)]
enum Op {
    Gate(usize, usize, usize),
    Measure(Vec<u8>, bool),
    Reset(usize),
}

fn op(n: usize) -> impl Strategy<Value = Op> {
    prop_oneof![
        3 => (0..GATES.len(), 0..n, 1..n).prop_map(|(g, a, d)| Op::Gate(g, a, d)),
        2 => (prop::collection::vec(0u8..4, n), any::<bool>()).prop_map(|(p, s)| Op::Measure(p, s)),
        1 => (0..n).prop_map(Op::Reset),
    ]
}

fn case() -> impl Strategy<Value = (usize, u8, Vec<Op>)> {
    (1usize..=4).prop_flat_map(|n| (Just(n), 0u8..3, prop::collection::vec(op(n.max(2)), 0..=30)))
}

fn pauli_string(codes: &[u8], n: usize, negate: bool) -> PauliString {
    let ps: Vec<Pauli> = codes[..n].iter().map(|&c| [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z][c as usize]).collect();
    let mut p = PauliString::from_paulis(&ps);
    if negate {
        p.negate();
    }
    p
}

/// Born probability of `+1` for a signed Pauli on the dense state.
fn p_plus(psi: &DenseState, p: &PauliString) -> f64 {
    (1.0 + p.sign() as f64 * psi.expect(PauliMask::from_string(p))) / 2.0
}

/// Checks one stabilizer outcome against the dense Born rule, then steers the
/// dense state into the same branch.
fn follow(psi: &mut DenseState, p: &PauliString, value: i8, deterministic: bool) -> Result<(), TestCaseError> {
    let pp = p_plus(psi, p);
    if deterministic {
        let want = if value > 0 { 1.0 } else { 0.0 };
        prop_assert!((pp - want).abs() < 1e-12, "deterministic {value} but P(+1) = {pp}");
    } else {
        prop_assert!((pp - 0.5).abs() < 1e-12, "random branch with P(+1) = {pp}");
    }
    psi.project(PauliMask::from_string(p), value * p.sign());
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn stabilizer_agrees_with_dense_amplitudes((n, init, ops) in case(), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (st, mut psi) = match init {
            0 => (InitState::AllPlus, DenseState::plus(n).unwrap()),
            1 => (InitState::AllZero, DenseState::zero(n).unwrap()),
            _ => {
                let pat: Vec<bool> = (0..n).map(|q| q % 2 == 1).collect();
                (InitState::ProductXPattern(pat.clone()), DenseState::x_product(&pat).unwrap())
            }
        };
        let mut s = StabilizerState::new(n, &st);
        for o in &ops {
            match o {
                Op::Gate(g, a, d) => {
                    let g = GATES[*g];
                    if g.arity() == 2 && n < 2 {
                        continue;
                    }
                    let a = a % n;
                    let t = if g.arity() == 2 { vec![a, (a + d) % n] } else { vec![a] };
                    s.apply_gate(g, &t).unwrap();
                    psi.apply_gate(g, &t).unwrap();
                }
                Op::Measure(codes, neg) => {
                    let p = pauli_string(codes, n, *neg);
                    if p.weight() == 0 {
                        continue;
                    }
                    let m = s.measure_pauli(&p, &mut rng).unwrap();
                    follow(&mut psi, &p, m.value, m.was_deterministic)?;
                    let again = s.measure_pauli(&p, &mut rng).unwrap();
                    prop_assert!(again.was_deterministic);
                    prop_assert_eq!(again.value, m.value);
                }
                Op::Reset(q) => {
                    let q = q % n;
                    let p = PauliString::single(n, q, Pauli::X);
                    let m = s.reset_plus(q, &mut rng);
                    follow(&mut psi, &p, m.value, m.was_deterministic)?;
                    if m.value < 0 {
                        psi.apply_pauli(PauliMask::z(q));
                    }
                    prop_assert_eq!(s.expect_x(q), 1);
                }
            }
            prop_assert!(s.audit().is_ok(), "{:?}", s.audit());
            prop_assert!((psi.norm() - 1.0).abs() < 1e-12);
        }
        for q in 0..n {
            prop_assert!((s.expect_x(q) as f64 - psi.expect_x(q)).abs() < 1e-12);
        }
        for code in 1..4u32.pow(n as u32) {
            let codes: Vec<u8> = (0..n).map(|k| (code / 4u32.pow(k as u32) % 4) as u8).collect();
            let p = pauli_string(&codes, n, false);
            let want = s.peek_pauli(&p).map_or(0.0, |v| v as f64);
            prop_assert!((psi.expect(PauliMask::from_string(&p)) - want).abs() < 1e-12, "{}", p);
        }
    }
}
