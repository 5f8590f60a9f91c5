use std::fmt;
use std::str::FromStr;

use super::StabilizerError;

/// Single-qubit Pauli label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub fn from_bits(x: bool, z: bool) -> Pauli {
        match (x, z) {
            (false, false) => Pauli::I,
            (true, false) => Pauli::X,
            (true, true) => Pauli::Y,
            (false, true) => Pauli::Z,
        }
    }

    pub fn bits(self) -> (bool, bool) {
        match self {
            Pauli::I => (false, false),
            Pauli::X => (true, false),
            Pauli::Y => (true, true),
            Pauli::Z => (false, true),
        }
    }

    pub fn symbol(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }
}

pub(crate) fn words_for(n: usize) -> usize {
    n.div_ceil(64).max(1)
}

/// In-place `lhs *= rhs` on packed Pauli bits. Returns the log-i phase picked up.
#[inline]
pub(crate) fn mul_assign_words(x1: &mut [u64], z1: &mut [u64], x2: &[u64], z2: &[u64]) -> u8 {
    let mut cnt1 = 0u64;
    let mut cnt2 = 0u64;
    for k in 0..x1.len() {
        let ox = x1[k];
        let oz = z1[k];
        let nx = ox ^ x2[k];
        let nz = oz ^ z2[k];
        x1[k] = nx;
        z1[k] = nz;
        let x1z2 = ox & z2[k];
        let anti = (x2[k] & oz) ^ x1z2;
        cnt2 ^= (cnt1 ^ nx ^ nz ^ x1z2) & anti;
        cnt1 ^= anti;
    }
    ((cnt1.count_ones() + 2 * cnt2.count_ones()) & 3) as u8
}

/// Log-i phase of `lhs * rhs` without storing the product.
#[inline]
pub(crate) fn product_phase(x1: &[u64], z1: &[u64], x2: &[u64], z2: &[u64]) -> u8 {
    let mut cnt1 = 0u64;
    let mut cnt2 = 0u64;
    for k in 0..x1.len() {
        let ox = x1[k];
        let oz = z1[k];
        let nx = ox ^ x2[k];
        let nz = oz ^ z2[k];
        let x1z2 = ox & z2[k];
        let anti = (x2[k] & oz) ^ x1z2;
        cnt2 ^= (cnt1 ^ nx ^ nz ^ x1z2) & anti;
        cnt1 ^= anti;
    }
    ((cnt1.count_ones() + 2 * cnt2.count_ones()) & 3) as u8
}

/// True when the two packed Paulis anticommute.
#[inline]
pub(crate) fn anticommutes_words(x1: &[u64], z1: &[u64], x2: &[u64], z2: &[u64]) -> bool {
    let mut acc = 0u64;
    for k in 0..x1.len() {
        acc ^= (x1[k] & z2[k]) ^ (z1[k] & x2[k]);
    }
    acc.count_ones() & 1 == 1
}

/// `i^phase` times a tensor product of Paulis, with `Y` Hermitian.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct PauliString {
    n: usize,
    pub(crate) x: Vec<u64>,
    pub(crate) z: Vec<u64>,
    phase: u8,
}

impl PauliString {
    pub fn identity(n: usize) -> Self {
        let w = words_for(n);
        PauliString {
            n,
            x: vec![0; w],
            z: vec![0; w],
            phase: 0,
        }
    }

    pub fn single(n: usize, q: usize, p: Pauli) -> Self {
        let mut s = Self::identity(n);
        s.set(q, p);
        s
    }

    /// `X_a X_b` on `n` qubits.
    pub fn xx(n: usize, a: usize, b: usize) -> Self {
        let mut s = Self::identity(n);
        s.set(a, Pauli::X);
        s.set(b, Pauli::X);
        s
    }

    pub fn from_paulis(ps: &[Pauli]) -> Self {
        let mut s = Self::identity(ps.len());
        for (q, &p) in ps.iter().enumerate() {
            s.set(q, p);
        }
        s
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    /// Log-i phase in `0..4`.
    pub fn phase(&self) -> u8 {
        self.phase
    }

    pub fn set_phase(&mut self, p: u8) {
        self.phase = p & 3;
    }

    pub fn is_hermitian(&self) -> bool {
        self.phase % 2 == 0
    }

    /// Sign of a Hermitian string: `+1` or `-1`.
    pub fn sign(&self) -> i8 {
        if self.phase == 2 {
            -1
        } else {
            1
        }
    }

    pub fn negate(&mut self) {
        self.phase = (self.phase + 2) & 3;
    }

    pub fn get(&self, q: usize) -> Pauli {
        let (w, b) = (q / 64, q % 64);
        Pauli::from_bits((self.x[w] >> b) & 1 == 1, (self.z[w] >> b) & 1 == 1)
    }

    pub fn set(&mut self, q: usize, p: Pauli) {
        assert!(q < self.n, "qubit {q} out of range for {} qubits", self.n);
        let (w, b) = (q / 64, q % 64);
        let (xb, zb) = p.bits();
        self.x[w] = (self.x[w] & !(1 << b)) | ((xb as u64) << b);
        self.z[w] = (self.z[w] & !(1 << b)) | ((zb as u64) << b);
    }

    pub fn weight(&self) -> usize {
        self.x
            .iter()
            .zip(&self.z)
            .map(|(a, b)| (a | b).count_ones() as usize)
            .sum()
    }

    /// Qubits with a non-identity factor, ascending.
    pub fn support(&self) -> Vec<usize> {
        (0..self.n).filter(|&q| self.get(q) != Pauli::I).collect()
    }

    pub fn has_x(&self) -> bool {
        self.x.iter().any(|&w| w != 0)
    }

    pub fn commutes(&self, other: &PauliString) -> bool {
        !anticommutes_words(&self.x, &self.z, &other.x, &other.z)
    }

    /// `self = self * rhs`.
    pub fn mul_assign(&mut self, rhs: &PauliString) {
        assert_eq!(self.n, rhs.n);
        let l = mul_assign_words(&mut self.x, &mut self.z, &rhs.x, &rhs.z);
        self.phase = (self.phase + rhs.phase + l) & 3;
    }

    pub fn mul(&self, rhs: &PauliString) -> PauliString {
        let mut out = self.clone();
        out.mul_assign(rhs);
        out
    }

    pub(crate) fn clear(&mut self) {
        self.x.iter_mut().for_each(|w| *w = 0);
        self.z.iter_mut().for_each(|w| *w = 0);
        self.phase = 0;
    }

    pub(crate) fn mul_assign_raw(&mut self, x: &[u64], z: &[u64], log_i: u8) {
        let l = mul_assign_words(&mut self.x, &mut self.z, x, z);
        self.phase = (self.phase + log_i + l) & 3;
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self.phase {
            0 => "+",
            1 => "+i",
            2 => "-",
            _ => "-i",
        })?;
        for q in 0..self.n {
            write!(f, "{}", self.get(q).symbol())?;
        }
        Ok(())
    }
}

impl fmt::Debug for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for PauliString {
    type Err = StabilizerError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (phase, body) = if let Some(r) = s.strip_prefix("+i") {
            (1, r)
        } else if let Some(r) = s.strip_prefix("-i") {
            (3, r)
        } else if let Some(r) = s.strip_prefix('+') {
            (0, r)
        } else if let Some(r) = s.strip_prefix('-') {
            (2, r)
        } else {
            (0, s)
        };
        let ps = body
            .chars()
            .map(|c| match c {
                'I' | '_' => Ok(Pauli::I),
                'X' => Ok(Pauli::X),
                'Y' => Ok(Pauli::Y),
                'Z' => Ok(Pauli::Z),
                other => Err(StabilizerError::Parse(format!("bad Pauli symbol `{other}`"))),
            })
            .collect::<Result<Vec<_>, _>>()?;
        if ps.is_empty() {
            return Err(StabilizerError::Parse("empty Pauli string".into()));
        }
        let mut p = PauliString::from_paulis(&ps);
        p.phase = phase;
        Ok(p)
    }
}
