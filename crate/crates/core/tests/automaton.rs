use std::sync::Arc;

use proptest::prelude::*;
use toomdtc::automaton::{nec_step, SpinGrid};
use toomdtc::dense::oracle::oracle_apply_period;
use toomdtc::dense::{DenseState, DensityMatrix};
use toomdtc::lattice::{build_lattice, LatticeKind, LatticeTopology, Sublattice};
use toomdtc::protocol::ProtocolParams;

fn periodic(r: usize, c: usize) -> Arc<LatticeTopology> {
    Arc::new(build_lattice(LatticeKind::SquarePeriodic, (r, c)).unwrap())
}

#[test]
fn errors_in_a_rectangle_erode_within_its_perimeter() {
    let l = 8;
    let lat = periodic(l, l);
    for a in 1..=3usize {
        for b in 1..=3usize {
            let cells: Vec<(usize, usize)> = (0..a).flat_map(|r| (0..b).map(move |c| (r, c))).collect();
            for (r0, c0) in [(0, 0), (3, 5), (6, 6)] {
                for mask in 1u32..1 << cells.len() {
                    for background in [false, true] {
                        let mut pat = vec![background; l * l];
                        for (k, &(r, c)) in cells.iter().enumerate() {
                            if mask >> k & 1 == 1 {
                                pat[((r0 + r) % l) * l + (c0 + c) % l] = !background;
                            }
                        }
                        let mut g = SpinGrid::from_pattern(lat.clone(), &pat).unwrap();
                        for _ in 0..a + b {
                            g = nec_step(&g);
                        }
                        assert!(
                            g.pattern().iter().all(|&m| m == background),
                            "{a}x{b} at ({r0},{c0}) mask {mask:b} survives {} steps",
                            a + b
                        );
                    }
                }
            }
        }
    }
}

/// The same pattern on the annulus and on its torus relabeling.
fn relabeled(ann: &LatticeTopology, pat: &[bool]) -> Vec<bool> {
    let (_, cols) = ann.dims();
    let mut out = vec![false; pat.len()];
    for (j, &m) in pat.iter().enumerate() {
        let (r, c) = ann.torus_coords(j);
        out[r * cols + c] = m;
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn nec_step_commutes_with_inversion(pat in prop::collection::vec(any::<bool>(), 48), open in any::<bool>()) {
        let kind = if open { LatticeKind::SquareOpen } else { LatticeKind::SquarePeriodic };
        let lat = Arc::new(build_lattice(kind, (6, 8)).unwrap());
        let g = SpinGrid::from_pattern(lat, &pat).unwrap();
        prop_assert_eq!(nec_step(&g.inverted()), nec_step(&g).inverted());
    }

    #[test]
    fn annular_rule_matches_the_torus(pat in prop::collection::vec(any::<bool>(), 24), steps in 1usize..6) {
        let ann = Arc::new(build_lattice(LatticeKind::AnnularTriangular, (4, 6)).unwrap());
        let (rows, cols) = ann.dims();
        let sq = periodic(rows, cols);
        let mut ga = SpinGrid::from_pattern(ann.clone(), &pat).unwrap();
        let mut gs = SpinGrid::from_pattern(sq, &relabeled(&ann, &pat)).unwrap();
        for _ in 0..steps {
            ga = nec_step(&ga);
            gs = nec_step(&gs);
            prop_assert_eq!(relabeled(&ann, &ga.pattern()), gs.pattern());
        }
    }
}

/// Exact law of the noisy sublattice automaton: a distribution over the
/// `2^N` spin configurations (bit `j` set = spin `j` is `-1`).
fn classical_period(dist: &[f64], lat: &LatticeTopology, p_flip: f64, p_nec: f64, p_me: f64) -> Vec<f64> {
    let n = lat.num_sites();
    let mut d = dist.to_vec();
    for j in 0..n {
        let mut next = vec![0.0; d.len()];
        for (s, &w) in d.iter().enumerate() {
            next[s] += (1.0 - p_flip) * w;
            next[s ^ 1 << j] += p_flip * w;
        }
        d = next;
    }
    let rec = |wall: bool| if wall { 1.0 - p_me } else { p_me };
    for sub in [Sublattice::A, Sublattice::B] {
        for &j in lat.sublattice_sites(sub) {
            let (bn, be) = lat.nec_targets(j).unwrap();
            let mut next = vec![0.0; d.len()];
            for (s, &w) in d.iter().enumerate() {
                let spin = |k: usize| s >> k & 1;
                let q = p_nec * rec(spin(j) != spin(bn.other(j))) * rec(spin(j) != spin(be.other(j)));
                next[s] += (1.0 - q) * w;
                next[s ^ 1 << j] += q * w;
            }
            d = next;
        }
    }
    d
}

fn x_populations(rho: &DensityMatrix) -> Vec<f64> {
    let mut r = rho.clone();
    for q in 0..r.num_qubits() {
        r.conj_1q(q, toomdtc::dense::kernels::hadamard());
    }
    (0..r.dim()).map(|k| r.get(k, k).re).collect()
}

#[test]
fn quantum_x_statistics_equal_the_classical_chain() {
    for (rows, cols) in [(2, 2), (2, 4)] {
        let lat = periodic(rows, cols);
        let n = lat.num_sites();
        let mut p = ProtocolParams::new(lat.clone(), 1);
        p.p_flip = 0.3;
        p.p_nec = 0.7;
        p.p_me = 0.1;
        let mut minus = vec![false; n];
        minus[1] = true;
        let mut rho = DensityMatrix::from_pure(&DenseState::x_product(&minus).unwrap()).unwrap();
        let mut dist = vec![0.0; 1 << n];
        dist[0b10] = 1.0;
        for t in 1..=6 {
            rho = oracle_apply_period(&rho, &p).unwrap();
            dist = classical_period(&dist, &lat, p.p_flip, p.p_nec, p.p_me);
            let q = x_populations(&rho);
            let worst = q.iter().zip(&dist).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            assert!(worst < 1e-12, "{rows}x{cols} t={t}: {worst:e}");
        }
    }
}
