use std::collections::HashSet;

use toomdtc::lattice::{build_lattice, Direction, LatticeKind, LatticeTopology, Sublattice};

fn periodic(r: usize, c: usize) -> LatticeTopology {
    build_lattice(LatticeKind::SquarePeriodic, (r, c)).unwrap()
}

#[test]
fn bonds_join_opposite_sublattices() {
    for (kind, dims) in [
        (LatticeKind::SquarePeriodic, (4, 4)),
        (LatticeKind::SquarePeriodic, (6, 8)),
        (LatticeKind::SquareOpen, (3, 5)),
        (LatticeKind::SquareOpen, (4, 4)),
    ] {
        let lat = build_lattice(kind, dims).unwrap();
        for b in lat.bonds() {
            let (x, y) = b.sites();
            assert_ne!(lat.sublattice(x), lat.sublattice(y), "{kind:?} {dims:?} {x}-{y}");
        }
    }
}

#[test]
fn degrees_and_bond_counts() {
    let lat = periodic(6, 6);
    for j in 0..lat.num_sites() {
        assert_eq!(lat.degree(j), 4);
        assert!(lat.nec_targets(j).is_some());
    }
    assert_eq!(lat.bonds().len(), 2 * 36);
    let open = build_lattice(LatticeKind::SquareOpen, (4, 5)).unwrap();
    for j in 0..open.num_sites() {
        let (r, c) = (j / 5, j % 5);
        let edge = (r == 0 || r == 3) as usize + (c == 0 || c == 4) as usize;
        assert_eq!(open.degree(j), 4 - edge);
    }
}

#[test]
fn nec_triples_of_one_sublattice_have_distinct_centers() {
    for l in [4usize, 6, 8] {
        let lat = periodic(l, l);
        for sub in [Sublattice::A, Sublattice::B] {
            let sites = lat.sublattice_sites(sub);
            for (i, &j) in sites.iter().enumerate() {
                let (bn, be) = lat.nec_targets(j).unwrap();
                let triple = [j, bn.other(j), be.other(j)];
                for &k in &sites[i + 1..] {
                    let (cn, ce) = lat.nec_targets(k).unwrap();
                    assert!(![k, cn.other(k), ce.other(k)].contains(&j));
                    assert!(!triple.contains(&k));
                }
            }
        }
    }
}

#[test]
fn annulus_is_a_torus() {
    for dims in [(2, 4), (4, 3), (4, 6), (6, 5)] {
        let ann = build_lattice(LatticeKind::AnnularTriangular, dims).unwrap();
        let (rows, cols) = ann.dims();
        let sq = periodic(rows, cols);
        assert_eq!(ann.num_sites(), rows * cols);
        let coords: Vec<(usize, usize)> = (0..ann.num_sites()).map(|j| ann.torus_coords(j)).collect();
        let distinct: HashSet<_> = coords.iter().collect();
        assert_eq!(distinct.len(), coords.len(), "{dims:?}: torus labels must be a bijection");
        let at = |(r, c): (usize, usize)| r * cols + c;
        for j in 0..ann.num_sites() {
            for d in Direction::ALL {
                let img = ann.neighbor(j, d).map(|k| coords[k]);
                let want = sq.neighbor(at(coords[j]), d).map(|k| sq.torus_coords(k));
                assert_eq!(img, want, "{dims:?} site {j} {d:?}");
            }
        }
        let geo = ann.annular_geometry().unwrap();
        for b in ann.bonds() {
            let (x, y) = b.sites();
            assert!(!geo.shared_ancillas(x, y).is_empty(), "{dims:?}: bond {x}-{y} has no ancilla");
        }
    }
}
