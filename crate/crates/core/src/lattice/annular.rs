//! Annular triangular lattice with three-colour qubit assignment.
//!
//! Physical qubits sit on a triangular lattice wrapped around an annulus.
//! Ring `rho` runs radially from `0` (inner edge) to `3R` (outer edge) and the
//! angular position `s` runs over `0..S` with `s = rho (mod 2)`. Rings with
//! `rho % 3 == 0` hold ancillas, `rho % 3 == 1` the red data rings and
//! `rho % 3 == 2` the green ones. Two data qubits can be measured together when
//! they share an ancilla.
//!
//! The sweep reduction keeps four of the six same-colour bonds. On red rings the
//! North move goes outward with `ds = -1`, on green rings it goes inward with
//! `ds = +1`, and East is `ds = +2` along the ring. The outermost red and green
//! rings are stitched together, as are the innermost ones.

use super::{LatticeError, SiteId};
use std::collections::HashMap;

#[derive(Debug, Clone)]
pub struct AnnularGeometry {
    pairs: usize,
    ring_len: usize,
    data: Vec<(usize, usize)>,
    ancillas: Vec<(usize, usize)>,
    data_index: HashMap<(usize, usize), usize>,
    ancilla_index: HashMap<(usize, usize), usize>,
    north: Vec<SiteId>,
    torus: Vec<(usize, usize)>,
}

const OFFSETS: [(i64, i64); 6] = [(1, 1), (-1, -1), (-1, 1), (1, -1), (2, 0), (-2, 0)];

impl AnnularGeometry {
    /// `data_rings` must be even (red/green pairs); `sites_per_ring >= 2`.
    pub fn new(data_rings: usize, sites_per_ring: usize) -> Result<Self, LatticeError> {
        if data_rings < 2 || data_rings % 2 != 0 {
            return Err(LatticeError::AnnularStitch(
                data_rings,
                sites_per_ring,
                "data ring count must be a positive even number".into(),
            ));
        }
        if sites_per_ring < 2 {
            return Err(LatticeError::AnnularStitch(
                data_rings,
                sites_per_ring,
                "need at least two sites per ring".into(),
            ));
        }
        let pairs = data_rings / 2;
        let s_len = 2 * sites_per_ring;
        let mut data = Vec::new();
        let mut ancillas = Vec::new();
        for rho in 0..=3 * pairs {
            for s in (rho % 2..s_len).step_by(2) {
                if rho % 3 == 0 {
                    ancillas.push((rho, s));
                } else {
                    data.push((rho, s));
                }
            }
        }
        let data_index = data.iter().enumerate().map(|(i, &p)| (p, i)).collect();
        let ancilla_index = ancillas.iter().enumerate().map(|(i, &p)| (p, i)).collect();
        let mut g = AnnularGeometry {
            pairs,
            ring_len: s_len,
            data,
            ancillas,
            data_index,
            ancilla_index,
            north: Vec::new(),
            torus: Vec::new(),
        };
        g.north = (0..g.data.len()).map(|d| g.sweep_north(d)).collect::<Result<_, _>>()?;
        g.torus = g.relabel()?;
        Ok(g)
    }

    /// Effective square dims `(2R, S/2)`.
    pub fn dims(&self) -> (usize, usize) {
        (2 * self.pairs, self.ring_len / 2)
    }

    pub fn ring_length(&self) -> usize {
        self.ring_len
    }

    pub fn num_data(&self) -> usize {
        self.data.len()
    }

    pub fn num_ancillas(&self) -> usize {
        self.ancillas.len()
    }

    /// Physical `(rho, s)` of a data qubit.
    pub fn data_position(&self, d: SiteId) -> (usize, usize) {
        self.data[d]
    }

    pub fn ancilla_position(&self, a: usize) -> (usize, usize) {
        self.ancillas[a]
    }

    fn wrap(&self, s: i64) -> usize {
        s.rem_euclid(self.ring_len as i64) as usize
    }

    fn physical_neighbors(&self, (rho, s): (usize, usize)) -> impl Iterator<Item = (usize, usize)> + '_ {
        let max = 3 * self.pairs as i64;
        OFFSETS.iter().filter_map(move |&(dr, ds)| {
            let r = rho as i64 + dr;
            (0..=max).contains(&r).then(|| (r as usize, self.wrap(s as i64 + ds)))
        })
    }

    /// Ancillas physically coupled to data qubit `d`, ascending.
    pub fn ancillas_of(&self, d: SiteId) -> Vec<usize> {
        let mut v: Vec<usize> = self
            .physical_neighbors(self.data[d])
            .filter_map(|p| self.ancilla_index.get(&p).copied())
            .collect();
        v.sort_unstable();
        v.dedup();
        v
    }

    /// Ancillas shared by two data qubits, ascending.
    pub fn shared_ancillas(&self, a: SiteId, b: SiteId) -> Vec<usize> {
        let xb = self.ancillas_of(b);
        self.ancillas_of(a).into_iter().filter(|x| xb.contains(x)).collect()
    }

    fn colour(rho: usize) -> usize {
        rho % 3
    }

    fn ring_pair(rho: usize) -> usize {
        rho / 3
    }

    fn north_is_outward(rho: usize) -> bool {
        Self::colour(rho) == 1
    }

    fn sweep_north(&self, d: SiteId) -> Result<SiteId, LatticeError> {
        let (rho, s) = self.data[d];
        let outward = Self::north_is_outward(rho);
        let k = Self::ring_pair(rho);
        let target_rho = match (outward, k) {
            (true, k) if k + 1 < self.pairs => rho + 3,
            (true, _) => rho + 1,
            (false, 0) => rho - 1,
            (false, _) => rho - 3,
        };
        let ds: i64 = if outward { -1 } else { 1 };
        let tgt = (target_rho, self.wrap(s as i64 + ds));
        let t = *self.data_index.get(&tgt).ok_or_else(|| {
            LatticeError::AnnularStitch(2 * self.pairs, self.ring_len / 2, format!("no site at {tgt:?}"))
        })?;
        if self.shared_ancillas(d, t).is_empty() {
            return Err(LatticeError::AnnularStitch(
                2 * self.pairs,
                self.ring_len / 2,
                format!("bond {d}-{t} has no shared ancilla"),
            ));
        }
        Ok(t)
    }

    fn along(&self, d: SiteId, ds: i64) -> SiteId {
        let (rho, s) = self.data[d];
        self.data_index[&(rho, self.wrap(s as i64 + ds))]
    }

    /// Effective neighbor table in N, E, S, W order.
    pub fn effective_neighbors(&self) -> Vec<[Option<SiteId>; 4]> {
        let n = self.data.len();
        let mut south = vec![usize::MAX; n];
        for (d, &t) in self.north.iter().enumerate() {
            south[t] = d;
        }
        (0..n)
            .map(|d| {
                [
                    Some(self.north[d]),
                    Some(self.along(d, 2)),
                    Some(south[d]),
                    Some(self.along(d, -2)),
                ]
            })
            .collect()
    }

    /// Torus coordinates by walking North and East from the first red site.
    pub fn torus_coordinates(&self) -> Vec<(usize, usize)> {
        self.torus.clone()
    }

    fn relabel(&self) -> Result<Vec<(usize, usize)>, LatticeError> {
        let (rows, cols) = self.dims();
        let n = self.data.len();
        let mut coords = vec![None; n];
        let mut row_start = 0;
        for r in 0..rows {
            let mut d = row_start;
            for c in 0..cols {
                if coords[d].is_some() {
                    return Err(LatticeError::AnnularStitch(rows, cols, "relabeling revisits a site".into()));
                }
                coords[d] = Some((r, c));
                d = self.along(d, 2);
            }
            if d != row_start {
                return Err(LatticeError::AnnularStitch(rows, cols, "ring does not close".into()));
            }
            row_start = self.north[row_start];
        }
        if row_start != 0 {
            return Err(LatticeError::AnnularStitch(rows, cols, "sweep does not close".into()));
        }
        coords
            .into_iter()
            .map(|c| c.ok_or_else(|| LatticeError::AnnularStitch(rows, cols, "unreached site".into())))
            .collect()
    }
}
