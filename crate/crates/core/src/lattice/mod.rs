//! Lattice geometries and adjacency queries.
//!
//! Sites are indexed `0..N`. For square lattices the index is `row * cols + col`.
//! North is `row + 1`, East is `col + 1`. The annular geometry indexes its data
//! qubits ring by ring from the inside out and exposes torus coordinates through
//! [`LatticeTopology::torus_coords`].

mod annular;

use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;
use thiserror::Error;

pub use annular::AnnularGeometry;

/// Index of a site in `[0, N)`.
pub type SiteId = usize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum LatticeKind {
    SquarePeriodic,
    SquareOpen,
    AnnularTriangular,
}

impl LatticeKind {
    pub fn name(self) -> &'static str {
        match self {
            LatticeKind::SquarePeriodic => "square_periodic",
            LatticeKind::SquareOpen => "square_open",
            LatticeKind::AnnularTriangular => "annular_triangular",
        }
    }
}

impl fmt::Display for LatticeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for LatticeKind {
    type Err = LatticeError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "square_periodic" | "squareperiodic" | "periodic" => Ok(LatticeKind::SquarePeriodic),
            "square_open" | "squareopen" | "open" => Ok(LatticeKind::SquareOpen),
            "annular_triangular" | "annulartriangular" | "annular" => {
                Ok(LatticeKind::AnnularTriangular)
            }
            other => Err(LatticeError::UnknownKind(other.to_string())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Direction {
    North,
    East,
    South,
    West,
}

impl Direction {
    pub const ALL: [Direction; 4] = [
        Direction::North,
        Direction::East,
        Direction::South,
        Direction::West,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn opposite(self) -> Direction {
        match self {
            Direction::North => Direction::South,
            Direction::East => Direction::West,
            Direction::South => Direction::North,
            Direction::West => Direction::East,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Sublattice {
    A,
    B,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Orientation {
    North,
    East,
    Other,
}

/// Unordered pair of adjacent sites, stored with `a <= b`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BondId {
    pub a: SiteId,
    pub b: SiteId,
    pub orientation: Orientation,
}

impl BondId {
    pub fn new(x: SiteId, y: SiteId, orientation: Orientation) -> Self {
        BondId {
            a: x.min(y),
            b: x.max(y),
            orientation,
        }
    }

    pub fn sites(&self) -> (SiteId, SiteId) {
        (self.a, self.b)
    }

    pub fn contains(&self, s: SiteId) -> bool {
        self.a == s || self.b == s
    }

    /// The endpoint that is not `s`.
    pub fn other(&self, s: SiteId) -> SiteId {
        if self.a == s {
            self.b
        } else {
            self.a
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LatticeError {
    #[error("lattice dimension {0}x{1} below minimum {2}")]
    TooSmall(usize, usize, usize),
    #[error("annular dims {0}x{1} cannot be stitched into a torus: {2}")]
    AnnularStitch(usize, usize, String),
    #[error("unknown lattice kind `{0}`")]
    UnknownKind(String),
}

/// Immutable geometry with all adjacency tables precomputed.
#[derive(Debug, Clone)]
pub struct LatticeTopology {
    kind: LatticeKind,
    dims: (usize, usize),
    neighbors: Vec<[Option<SiteId>; 4]>,
    sublattice: Vec<Sublattice>,
    nec: Vec<Option<(BondId, BondId)>>,
    majority: Vec<Vec<BondId>>,
    sublattice_sites: [Vec<SiteId>; 2],
    torus: Vec<(usize, usize)>,
    annular: Option<AnnularGeometry>,
}

/// Smallest periodic dimension accepted by [`build_lattice`].
pub const MIN_PERIODIC_DIM: usize = 2;

/// Builds a lattice. `dims` is `(rows, cols)` for square kinds and
/// `(data_rings, sites_per_ring)` for the annulus.
pub fn build_lattice(kind: LatticeKind, dims: (usize, usize)) -> Result<LatticeTopology, LatticeError> {
    let (rows, cols) = dims;
    match kind {
        LatticeKind::SquarePeriodic => {
            if rows < MIN_PERIODIC_DIM || cols < MIN_PERIODIC_DIM {
                return Err(LatticeError::TooSmall(rows, cols, MIN_PERIODIC_DIM));
            }
            Ok(square(kind, rows, cols, true))
        }
        LatticeKind::SquareOpen => {
            if rows < 1 || cols < 1 {
                return Err(LatticeError::TooSmall(rows, cols, 1));
            }
            Ok(square(kind, rows, cols, false))
        }
        LatticeKind::AnnularTriangular => {
            let geom = AnnularGeometry::new(rows, cols)?;
            Ok(from_annular(geom))
        }
    }
}

fn square(kind: LatticeKind, rows: usize, cols: usize, periodic: bool) -> LatticeTopology {
    let n = rows * cols;
    let idx = |r: usize, c: usize| r * cols + c;
    let mut neighbors = vec![[None; 4]; n];
    let mut torus = Vec::with_capacity(n);
    for r in 0..rows {
        for c in 0..cols {
            let s = idx(r, c);
            torus.push((r, c));
            let nb = &mut neighbors[s];
            if periodic {
                nb[0] = Some(idx((r + 1) % rows, c));
                nb[1] = Some(idx(r, (c + 1) % cols));
                nb[2] = Some(idx((r + rows - 1) % rows, c));
                nb[3] = Some(idx(r, (c + cols - 1) % cols));
            } else {
                nb[0] = (r + 1 < rows).then(|| idx(r + 1, c));
                nb[1] = (c + 1 < cols).then(|| idx(r, c + 1));
                nb[2] = (r > 0).then(|| idx(r - 1, c));
                nb[3] = (c > 0).then(|| idx(r, c - 1));
            }
        }
    }
    let sublattice = torus
        .iter()
        .map(|&(r, c)| if (r + c) % 2 == 0 { Sublattice::A } else { Sublattice::B })
        .collect();
    assemble(kind, (rows, cols), neighbors, sublattice, torus, None)
}

fn from_annular(geom: AnnularGeometry) -> LatticeTopology {
    let neighbors = geom.effective_neighbors();
    let torus = geom.torus_coordinates();
    let sublattice = torus
        .iter()
        .map(|&(r, c)| if (r + c) % 2 == 0 { Sublattice::A } else { Sublattice::B })
        .collect();
    let dims = geom.dims();
    assemble(LatticeKind::AnnularTriangular, dims, neighbors, sublattice, torus, Some(geom))
}

fn assemble(
    kind: LatticeKind,
    dims: (usize, usize),
    neighbors: Vec<[Option<SiteId>; 4]>,
    sublattice: Vec<Sublattice>,
    torus: Vec<(usize, usize)>,
    annular: Option<AnnularGeometry>,
) -> LatticeTopology {
    let n = neighbors.len();
    let orient = |d: Direction| match d {
        Direction::North | Direction::South => Orientation::North,
        Direction::East | Direction::West => Orientation::East,
    };
    let mut nec = Vec::with_capacity(n);
    let mut majority = Vec::with_capacity(n);
    for (s, nb) in neighbors.iter().enumerate() {
        nec.push(match (nb[0], nb[1]) {
            (Some(north), Some(east)) => Some((
                BondId::new(s, north, Orientation::North),
                BondId::new(s, east, Orientation::East),
            )),
            _ => None,
        });
        majority.push(
            Direction::ALL
                .iter()
                .filter_map(|&d| nb[d.index()].map(|t| BondId::new(s, t, orient(d))))
                .collect(),
        );
    }
    let mut sublattice_sites = [Vec::new(), Vec::new()];
    for (s, &l) in sublattice.iter().enumerate() {
        sublattice_sites[l as usize].push(s);
    }
    LatticeTopology {
        kind,
        dims,
        neighbors,
        sublattice,
        nec,
        majority,
        sublattice_sites,
        torus,
        annular,
    }
}

impl LatticeTopology {
    pub fn kind(&self) -> LatticeKind {
        self.kind
    }

    pub fn dims(&self) -> (usize, usize) {
        self.dims
    }

    pub fn num_sites(&self) -> usize {
        self.neighbors.len()
    }

    pub fn neighbor(&self, j: SiteId, d: Direction) -> Option<SiteId> {
        self.neighbors[j][d.index()]
    }

    /// Neighbor table entries in N, E, S, W order.
    pub fn neighbors(&self, j: SiteId) -> &[Option<SiteId>; 4] {
        &self.neighbors[j]
    }

    /// Present neighbor entries in N, E, S, W order. Repeats are kept on
    /// lattices where two directions reach the same site.
    pub fn neighbor_list(&self, j: SiteId) -> impl Iterator<Item = SiteId> + '_ {
        self.neighbors[j].iter().flatten().copied()
    }

    pub fn degree(&self, j: SiteId) -> usize {
        self.neighbors[j].iter().flatten().count()
    }

    pub fn sublattice(&self, j: SiteId) -> Sublattice {
        self.sublattice[j]
    }

    /// Sites of one sublattice in ascending order.
    pub fn sublattice_sites(&self, l: Sublattice) -> &[SiteId] {
        &self.sublattice_sites[l as usize]
    }

    /// The (North, East) bond pair of `j`, if both exist.
    pub fn nec_targets(&self, j: SiteId) -> Option<(BondId, BondId)> {
        self.nec[j]
    }

    /// Bonds incident to `j` in N, E, S, W order.
    pub fn majority_bonds(&self, j: SiteId) -> &[BondId] {
        &self.majority[j]
    }

    /// Row/column position of `j` on the square (or unrolled torus) grid.
    pub fn torus_coords(&self, j: SiteId) -> (usize, usize) {
        self.torus[j]
    }

    pub fn annular_geometry(&self) -> Option<&AnnularGeometry> {
        self.annular.as_ref()
    }

    /// Distinct bonds, each listed once, in ascending site order.
    pub fn bonds(&self) -> Vec<BondId> {
        let mut out: Vec<BondId> = Vec::new();
        for j in 0..self.num_sites() {
            for (d, t) in [Direction::North, Direction::East]
                .iter()
                .filter_map(|&d| self.neighbor(j, d).map(|t| (d, t)))
            {
                let o = if d == Direction::North {
                    Orientation::North
                } else {
                    Orientation::East
                };
                let b = BondId::new(j, t, o);
                if b.a != b.b && !out.iter().any(|x| x.a == b.a && x.b == b.b) {
                    out.push(b);
                }
            }
        }
        out
    }

    /// Structured-text description: kind, dims and an explicit bond list.
    pub fn describe(&self) -> String {
        #[derive(Serialize)]
        struct Description<'a> {
            kind: &'a str,
            dims: [usize; 2],
            sites: usize,
            bonds: Vec<(SiteId, SiteId, Orientation)>,
        }
        let d = Description {
            kind: self.kind.name(),
            dims: [self.dims.0, self.dims.1],
            sites: self.num_sites(),
            bonds: self.bonds().iter().map(|b| (b.a, b.b, b.orientation)).collect(),
        };
        serde_json::to_string_pretty(&d).expect("serializable")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn periodic_4x4() {
        let l = build_lattice(LatticeKind::SquarePeriodic, (4, 4)).unwrap();
        assert_eq!(l.num_sites(), 16);
        assert!((0..16).all(|j| l.degree(j) == 4));
        assert_eq!(l.sublattice_sites(Sublattice::A).len(), 8);
        assert_eq!(l.sublattice_sites(Sublattice::B).len(), 8);
        let (n, e) = l.nec_targets(0).unwrap();
        assert_eq!((n.a, n.b, n.orientation), (0, 4, Orientation::North));
        assert_eq!((e.a, e.b, e.orientation), (0, 1, Orientation::East));
    }

    #[test]
    fn open_3x3_degrees() {
        let l = build_lattice(LatticeKind::SquareOpen, (3, 3)).unwrap();
        let deg: Vec<usize> = (0..9).map(|j| l.degree(j)).collect();
        assert_eq!(deg, vec![2, 3, 2, 3, 4, 3, 2, 3, 2]);
        // top-right corner is row 2, col 2
        assert!(l.nec_targets(8).is_none());
        assert_eq!(l.majority_bonds(0).len(), 2);
        assert_eq!(l.majority_bonds(1).len(), 3);
        assert_eq!(l.majority_bonds(4).len(), 4);
    }

    #[test]
    fn rejects_small() {
        assert!(build_lattice(LatticeKind::SquarePeriodic, (1, 4)).is_err());
        assert!(build_lattice(LatticeKind::SquareOpen, (0, 4)).is_err());
    }

    #[test]
    fn majority_order_nesw() {
        let l = build_lattice(LatticeKind::SquarePeriodic, (4, 4)).unwrap();
        let o: Vec<SiteId> = l.majority_bonds(5).iter().map(|b| b.other(5)).collect();
        assert_eq!(o, vec![9, 6, 1, 4]);
    }

    #[test]
    fn describe_lists_bonds() {
        let l = build_lattice(LatticeKind::SquarePeriodic, (3, 3)).unwrap();
        let v: serde_json::Value = serde_json::from_str(&l.describe()).unwrap();
        assert_eq!(v["bonds"].as_array().unwrap().len(), 18);
        assert_eq!(v["kind"], "square_periodic");
    }

    #[test]
    fn kind_parse() {
        assert_eq!("square_periodic".parse::<LatticeKind>().unwrap(), LatticeKind::SquarePeriodic);
        assert!("hex".parse::<LatticeKind>().is_err());
    }
}
