use super::CompileError;
use crate::lattice::{LatticeKind, LatticeTopology, SiteId};

/// System qubits, ancillas and the system-ancilla couplings between them.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HardwareLayout {
    num_system: usize,
    num_ancilla: usize,
    couplings: Vec<(SiteId, usize)>,
    ancillas_of: Vec<Vec<usize>>,
    source: Option<(LatticeKind, (usize, usize))>,
}

impl HardwareLayout {
    /// Layout from an explicit coupling list.
    pub fn new(num_system: usize, num_ancilla: usize, couplings: &[(SiteId, usize)]) -> Result<Self, CompileError> {
        if let Some(&(s, a)) = couplings.iter().find(|(s, a)| *s >= num_system || *a >= num_ancilla) {
            return Err(CompileError::Invalid(format!("coupling q{s}-a{a} out of range")));
        }
        Ok(Self::build(num_system, num_ancilla, couplings.to_vec(), None))
    }

    fn build(
        num_system: usize,
        num_ancilla: usize,
        mut couplings: Vec<(SiteId, usize)>,
        source: Option<(LatticeKind, (usize, usize))>,
    ) -> Self {
        couplings.sort_unstable();
        couplings.dedup();
        let mut ancillas_of = vec![Vec::new(); num_system];
        for &(s, a) in &couplings {
            ancillas_of[s].push(a);
        }
        for v in &mut ancillas_of {
            v.sort_unstable();
        }
        HardwareLayout {
            num_system,
            num_ancilla,
            couplings,
            ancillas_of,
            source,
        }
    }

    /// The hardware layout for a lattice. Square lattices place ancilla
    /// `(r, c)` on the plaquette coupled to `(r, c)`, `(r+1, c)`, `(r, c+1)`
    /// and `(r+1, c+1)`; open lattices keep the couplings that exist. The
    /// annulus uses its ring geometry.
    pub fn for_lattice(lattice: &LatticeTopology) -> Self {
        let (rows, cols) = lattice.dims();
        let source = Some((lattice.kind(), (rows, cols)));
        match lattice.kind() {
            LatticeKind::AnnularTriangular => {
                let g = lattice.annular_geometry().expect("annular lattice carries its geometry");
                let couplings = (0..g.num_data())
                    .flat_map(|d| g.ancillas_of(d).into_iter().map(move |a| (d, a)))
                    .collect();
                Self::build(g.num_data(), g.num_ancillas(), couplings, source)
            }
            kind => {
                let periodic = kind == LatticeKind::SquarePeriodic;
                let (ar, ac) = if periodic {
                    (rows, cols)
                } else {
                    ((rows - 1).max(1), (cols - 1).max(1))
                };
                let mut couplings = Vec::new();
                for r in 0..ar {
                    for c in 0..ac {
                        let a = r * ac + c;
                        for (dr, dc) in [(0, 0), (1, 0), (0, 1), (1, 1)] {
                            let (mut rr, mut cc) = (r + dr, c + dc);
                            if periodic {
                                rr %= rows;
                                cc %= cols;
                            } else if rr >= rows || cc >= cols {
                                continue;
                            }
                            couplings.push((rr * cols + cc, a));
                        }
                    }
                }
                Self::build(rows * cols, ar * ac, couplings, source)
            }
        }
    }

    pub fn num_system(&self) -> usize {
        self.num_system
    }

    pub fn num_ancilla(&self) -> usize {
        self.num_ancilla
    }

    pub fn couplings(&self) -> &[(SiteId, usize)] {
        &self.couplings
    }

    pub fn source(&self) -> Option<(LatticeKind, (usize, usize))> {
        self.source
    }

    pub fn ancillas_of(&self, s: SiteId) -> &[usize] {
        &self.ancillas_of[s]
    }

    /// Ancillas coupled to both qubits, ascending.
    pub fn shared_ancillas(&self, a: SiteId, b: SiteId) -> Vec<usize> {
        if a >= self.num_system || b >= self.num_system {
            return Vec::new();
        }
        let other = &self.ancillas_of[b];
        self.ancillas_of[a].iter().copied().filter(|x| other.contains(x)).collect()
    }

    pub fn measurable(&self, a: SiteId, b: SiteId) -> bool {
        a != b && !self.shared_ancillas(a, b).is_empty()
    }

    /// Ancilla used for bond `(a, b)`: the lowest shared id.
    pub fn bond_ancilla(&self, a: SiteId, b: SiteId) -> Option<usize> {
        if a == b {
            return None;
        }
        self.shared_ancillas(a, b).first().copied()
    }

    /// Two different ancillas for bonds `(j, n)` and `(j, e)`: the lowest
    /// pair in lexicographic order.
    pub fn distinct_ancillas(&self, j: SiteId, n: SiteId, e: SiteId) -> Option<(usize, usize)> {
        let sn = self.shared_ancillas(j, n);
        let se = self.shared_ancillas(j, e);
        sn.iter()
            .flat_map(|&x| se.iter().map(move |&y| (x, y)))
            .find(|(x, y)| x != y)
    }

    /// Every lattice bond shares at least one ancilla.
    pub fn covers(&self, lattice: &LatticeTopology) -> bool {
        lattice.bonds().iter().all(|b| {
            let (x, y) = b.sites();
            self.measurable(x, y)
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::build_lattice;

    #[test]
    fn plaquette_ancillas_cover_every_bond() {
        for (kind, dims) in [
            (LatticeKind::SquarePeriodic, (4, 4)),
            (LatticeKind::SquarePeriodic, (2, 3)),
            (LatticeKind::SquareOpen, (3, 5)),
            (LatticeKind::SquareOpen, (1, 4)),
            (LatticeKind::AnnularTriangular, (2, 6)),
        ] {
            let lat = build_lattice(kind, dims).unwrap();
            let l = HardwareLayout::for_lattice(&lat);
            assert!(l.covers(&lat), "{kind} {dims:?}");
        }
    }

    #[test]
    fn lowest_shared_ancilla_wins() {
        let lat = build_lattice(LatticeKind::SquarePeriodic, (4, 4)).unwrap();
        let l = HardwareLayout::for_lattice(&lat);
        // (0,1)-(1,1) is shared by plaquettes (0,0) and (0,1)
        assert_eq!(l.shared_ancillas(1, 5), vec![0, 1]);
        assert_eq!(l.bond_ancilla(1, 5), Some(0));
        let (an, ae) = l.distinct_ancillas(0, 4, 1).unwrap();
        assert_ne!(an, ae);
    }
}
