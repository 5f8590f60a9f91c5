//! Stabilizer simulation with a bit-packed inverse tableau.
//!
//! A state `C|0...0>` is stored through the images `C^dag X_q C` and
//! `C^dag Z_q C` for every qubit `q`. Applying a gate rewrites a handful of
//! rows as products of old rows. Measuring a Pauli `P` pulls it back to
//! `Q = C^dag P C`; the outcome is deterministic iff `Q` has no `X` part, in
//! which case its sign is the outcome. This makes deterministic measurements
//! and `expect_x` cost `O(N/64)`, which dominates the feedback protocol.
//!
//! Random outcomes consume exactly one `f64` draw: the outcome is `+1` iff the
//! draw is below `0.5`.

mod pauli;

pub use pauli::{Pauli, PauliString};

use pauli::{anticommutes_words, mul_assign_words, product_phase, words_for};
use rand::Rng;
use std::fmt;
use std::str::FromStr;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StabilizerError {
    #[error("unknown gate `{0}`")]
    UnknownGate(String),
    #[error("gate {gate:?} expects {expected} targets, got {got}")]
    Arity { gate: Gate, expected: usize, got: usize },
    #[error("repeated target {0}")]
    RepeatedTarget(usize),
    #[error("qubit {0} out of range")]
    OutOfRange(usize),
    #[error("cannot measure a non-Hermitian Pauli string {0}")]
    ImaginaryPhase(String),
    #[error("Pauli string has {got} qubits, state has {expected}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("parse error: {0}")]
    Parse(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Gate {
    X,
    Y,
    Z,
    H,
    S,
    SDag,
    CX,
    CZ,
    /// `exp(-i pi Z / 2)`, identical to `Z` up to global phase.
    ZPulse,
    /// `exp(-i pi Z Z / 4)`.
    ZZHalf,
}

impl Gate {
    pub fn arity(self) -> usize {
        match self {
            Gate::CX | Gate::CZ | Gate::ZZHalf => 2,
            _ => 1,
        }
    }
}

impl FromStr for Gate {
    type Err = StabilizerError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s.to_ascii_uppercase().as_str() {
            "X" => Gate::X,
            "Y" => Gate::Y,
            "Z" => Gate::Z,
            "H" => Gate::H,
            "S" => Gate::S,
            "S_DAG" | "SDAG" => Gate::SDag,
            "CX" | "CNOT" => Gate::CX,
            "CZ" => Gate::CZ,
            "ZPULSE" => Gate::ZPulse,
            "ZZHALF" => Gate::ZZHalf,
            _ => return Err(StabilizerError::UnknownGate(s.to_string())),
        })
    }
}

/// Outcome of a projective Pauli measurement.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MeasurementOutcome {
    pub value: i8,
    pub was_deterministic: bool,
}

impl MeasurementOutcome {
    pub fn is_minus(&self) -> bool {
        self.value < 0
    }
}

/// Initial product states.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum InitState {
    AllPlus,
    AllZero,
    /// `true` marks a `-1` X eigenvalue on that site.
    ProductXPattern(Vec<bool>),
}

#[derive(Clone, PartialEq, Eq)]
pub struct StabilizerState {
    n: usize,
    w: usize,
    xs: Vec<u64>,
    zs: Vec<u64>,
    signs: Vec<bool>,
}

impl StabilizerState {
    pub fn new(n: usize, init: &InitState) -> Self {
        assert!(n >= 1, "need at least one qubit");
        let w = words_for(n);
        let mut st = StabilizerState {
            n,
            w,
            xs: vec![0; 2 * n * w],
            zs: vec![0; 2 * n * w],
            signs: vec![false; 2 * n],
        };
        for q in 0..n {
            st.xs[q * w + q / 64] |= 1 << (q % 64);
            st.zs[(n + q) * w + q / 64] |= 1 << (q % 64);
        }
        match init {
            InitState::AllZero => {}
            InitState::AllPlus => (0..n).for_each(|q| st.h(q)),
            InitState::ProductXPattern(signs) => {
                assert_eq!(signs.len(), n, "pattern length must match qubit count");
                for q in 0..n {
                    st.h(q);
                    if signs[q] {
                        st.z(q);
                    }
                }
            }
        }
        st
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    #[inline]
    fn xrow(&self, q: usize) -> usize {
        q
    }

    #[inline]
    fn zrow(&self, q: usize) -> usize {
        self.n + q
    }

    #[inline]
    fn row(&self, r: usize) -> (&[u64], &[u64]) {
        let w = self.w;
        (&self.xs[r * w..(r + 1) * w], &self.zs[r * w..(r + 1) * w])
    }

    /// `row[dst] *= row[src]`, plus `extra` log-i phase.
    fn row_mul(&mut self, dst: usize, src: usize, extra: u8) {
        debug_assert_ne!(dst, src);
        let w = self.w;
        let (xd, xsrc) = two_slices(&mut self.xs, dst, src, w);
        let (zd, zsrc) = two_slices(&mut self.zs, dst, src, w);
        let l = mul_assign_words(xd, zd, xsrc, zsrc);
        let ph = 2 * self.signs[dst] as u8 + 2 * self.signs[src] as u8 + l + extra;
        debug_assert!(ph % 2 == 0, "row product left the Hermitian set");
        self.signs[dst] = ph & 3 == 2;
    }

    fn check_targets(&self, gate: Gate, t: &[usize]) -> Result<(), StabilizerError> {
        if t.len() != gate.arity() {
            return Err(StabilizerError::Arity {
                gate,
                expected: gate.arity(),
                got: t.len(),
            });
        }
        for (i, &q) in t.iter().enumerate() {
            if q >= self.n {
                return Err(StabilizerError::OutOfRange(q));
            }
            if t[..i].contains(&q) {
                return Err(StabilizerError::RepeatedTarget(q));
            }
        }
        Ok(())
    }

    /// Checked gate application.
    pub fn apply_gate(&mut self, gate: Gate, targets: &[usize]) -> Result<(), StabilizerError> {
        self.check_targets(gate, targets)?;
        match gate {
            Gate::X => self.x(targets[0]),
            Gate::Y => self.y(targets[0]),
            Gate::Z | Gate::ZPulse => self.z(targets[0]),
            Gate::H => self.h(targets[0]),
            Gate::S => self.s(targets[0]),
            Gate::SDag => self.s_dag(targets[0]),
            Gate::CX => self.cx(targets[0], targets[1]),
            Gate::CZ => self.cz(targets[0], targets[1]),
            Gate::ZZHalf => self.zz_half(targets[0], targets[1]),
        }
        Ok(())
    }

    pub fn x(&mut self, q: usize) {
        let r = self.zrow(q);
        self.signs[r] ^= true;
    }

    pub fn z(&mut self, q: usize) {
        let r = self.xrow(q);
        self.signs[r] ^= true;
    }

    pub fn y(&mut self, q: usize) {
        let (a, b) = (self.xrow(q), self.zrow(q));
        self.signs[a] ^= true;
        self.signs[b] ^= true;
    }

    pub fn h(&mut self, q: usize) {
        let w = self.w;
        let (a, b) = (self.xrow(q), self.zrow(q));
        for k in 0..w {
            self.xs.swap(a * w + k, b * w + k);
            self.zs.swap(a * w + k, b * w + k);
        }
        self.signs.swap(a, b);
    }

    /// `S = diag(1, i)`: `S^dag X S = -Y`.
    pub fn s(&mut self, q: usize) {
        let (a, b) = (self.xrow(q), self.zrow(q));
        // -Y = -i X Z
        self.row_mul(a, b, 3);
    }

    pub fn s_dag(&mut self, q: usize) {
        let (a, b) = (self.xrow(q), self.zrow(q));
        self.row_mul(a, b, 1);
    }

    pub fn cx(&mut self, c: usize, t: usize) {
        let (xc, xt) = (self.xrow(c), self.xrow(t));
        let (zc, zt) = (self.zrow(c), self.zrow(t));
        self.row_mul(xc, xt, 0);
        self.row_mul(zt, zc, 0);
    }

    pub fn cz(&mut self, a: usize, b: usize) {
        let (xa, xb) = (self.xrow(a), self.xrow(b));
        let (za, zb) = (self.zrow(a), self.zrow(b));
        self.row_mul(xa, zb, 0);
        self.row_mul(xb, za, 0);
    }

    /// `exp(-i pi Z_a Z_b / 4)`: pulls `X_a` back to `-Y_a Z_b`.
    pub fn zz_half(&mut self, a: usize, b: usize) {
        let (xa, xb) = (self.xrow(a), self.xrow(b));
        let (za, zb) = (self.zrow(a), self.zrow(b));
        // -Y_a Z_b = -i X_a Z_a Z_b
        self.row_mul(xa, za, 3);
        self.row_mul(xa, zb, 0);
        // -Z_a Y_b = -i X_b Z_b Z_a (Z_a commutes with both factors)
        self.row_mul(xb, zb, 3);
        self.row_mul(xb, za, 0);
    }

    /// `+1`/`-1` if `±X_j` stabilizes the state, else `0`.
    #[inline]
    pub fn expect_x(&self, j: usize) -> i8 {
        let (x, _) = self.row(self.xrow(j));
        if x.iter().any(|&w| w != 0) {
            0
        } else if self.signs[self.xrow(j)] {
            -1
        } else {
            1
        }
    }

    /// `sum_j expect_x(j)`.
    pub fn total_x(&self) -> i64 {
        (0..self.n).map(|j| self.expect_x(j) as i64).sum()
    }

    /// Pull-back of a Hermitian Pauli string, written into `out`.
    fn pull_back(&self, p: &PauliString, out: &mut PauliString) {
        out.clear();
        out.set_phase(p.phase());
        for q in p.support() {
            let (xb, zb) = p.get(q).bits();
            if xb {
                let r = self.xrow(q);
                let (x, z) = self.row(r);
                out.mul_assign_raw(x, z, 2 * self.signs[r] as u8);
            }
            if zb {
                let r = self.zrow(q);
                let (x, z) = self.row(r);
                out.mul_assign_raw(x, z, 2 * self.signs[r] as u8);
            }
            if xb && zb {
                // Y = i X Z
                let ph = out.phase();
                out.set_phase(ph + 1);
            }
        }
    }

    /// Deterministic value of `p` if it is (up to sign) a stabilizer.
    pub fn peek_pauli(&self, p: &PauliString) -> Option<i8> {
        let mut q = PauliString::identity(self.n);
        self.pull_back(p, &mut q);
        (!q.has_x()).then(|| q.sign())
    }

    pub fn measure_pauli<R: Rng + ?Sized>(
        &mut self,
        p: &PauliString,
        rng: &mut R,
    ) -> Result<MeasurementOutcome, StabilizerError> {
        if p.num_qubits() != self.n {
            return Err(StabilizerError::LengthMismatch {
                expected: self.n,
                got: p.num_qubits(),
            });
        }
        if !p.is_hermitian() {
            return Err(StabilizerError::ImaginaryPhase(p.to_string()));
        }
        let mut q = PauliString::identity(self.n);
        self.pull_back(p, &mut q);
        Ok(self.measure_pulled(q, rng))
    }

    fn measure_pulled<R: Rng + ?Sized>(&mut self, mut q: PauliString, rng: &mut R) -> MeasurementOutcome {
        if !q.has_x() {
            return MeasurementOutcome {
                value: q.sign(),
                was_deterministic: true,
            };
        }
        let value: i8 = if rng.gen::<f64>() < 0.5 { 1 } else { -1 };
        if value < 0 {
            q.negate();
        }
        self.collapse(&q);
        MeasurementOutcome {
            value,
            was_deterministic: false,
        }
    }

    /// Conjugates every row by `(Z_p + B)/sqrt(2)` where `B` is the signed
    /// pulled-back observable and `p` a qubit where `B` has an X factor.
    fn collapse(&mut self, b: &PauliString) {
        let w = self.w;
        let pivot = (0..self.n)
            .find(|&q| (b.x[q / 64] >> (q % 64)) & 1 == 1)
            .expect("random branch needs an X factor");
        let mut ab = PauliString::single(self.n, pivot, Pauli::Z);
        ab.mul_assign(b);
        let (pw, pb) = (pivot / 64, pivot % 64);
        for r in 0..2 * self.n {
            let rx = &self.xs[r * w..(r + 1) * w];
            let rz = &self.zs[r * w..(r + 1) * w];
            let ac_a = (rx[pw] >> pb) & 1 == 1;
            let ac_b = anticommutes_words(rx, rz, &b.x, &b.z);
            match (ac_a, ac_b) {
                (false, false) => {}
                (true, true) => self.signs[r] ^= true,
                (a_only, _) => {
                    let rx = &mut self.xs[r * w..(r + 1) * w];
                    let rz = &mut self.zs[r * w..(r + 1) * w];
                    let l = mul_assign_words(rx, rz, &ab.x, &ab.z);
                    let ph = 2 * self.signs[r] as u8 + ab.phase() + l + if a_only { 2 } else { 0 };
                    debug_assert!(ph % 2 == 0);
                    self.signs[r] = ph & 3 == 2;
                }
            }
        }
    }

    /// Measures `X_a X_b`.
    pub fn measure_xx<R: Rng + ?Sized>(&mut self, a: usize, b: usize, rng: &mut R) -> MeasurementOutcome {
        debug_assert_ne!(a, b);
        let (ra, rb) = (self.xrow(a), self.xrow(b));
        let (xa, za) = self.row(ra);
        let (xb, zb) = self.row(rb);
        if xa.iter().zip(xb).all(|(p, q)| p == q) {
            let ph = product_phase(xa, za, xb, zb) + 2 * self.signs[ra] as u8 + 2 * self.signs[rb] as u8;
            return MeasurementOutcome {
                value: if ph & 3 == 0 { 1 } else { -1 },
                was_deterministic: true,
            };
        }
        let mut q = PauliString::identity(self.n);
        q.mul_assign_raw(xa, za, 2 * self.signs[ra] as u8);
        q.mul_assign_raw(xb, zb, 2 * self.signs[rb] as u8);
        self.measure_pulled(q, rng)
    }

    /// Measures `X_q`.
    pub fn measure_x<R: Rng + ?Sized>(&mut self, q: usize, rng: &mut R) -> MeasurementOutcome {
        let e = self.expect_x(q);
        if e != 0 {
            return MeasurementOutcome {
                value: e,
                was_deterministic: true,
            };
        }
        let r = self.xrow(q);
        let (x, z) = self.row(r);
        let mut p = PauliString::identity(self.n);
        p.mul_assign_raw(x, z, 2 * self.signs[r] as u8);
        self.measure_pulled(p, rng)
    }

    /// Measures `X_j` and applies `Z_j` on a `-1` outcome.
    pub fn reset_plus<R: Rng + ?Sized>(&mut self, j: usize, rng: &mut R) -> MeasurementOutcome {
        let m = self.measure_x(j, rng);
        if m.is_minus() {
            self.z(j);
        }
        m
    }

    /// With probability `p_dep`, one of `X`, `Y`, `Z` uniformly. Draws one
    /// `f64`, plus one index draw when the error fires.
    pub fn depolarize<R: Rng + ?Sized>(&mut self, j: usize, p_dep: f64, rng: &mut R) {
        if rng.gen::<f64>() < p_dep {
            match rng.gen_range(0..3) {
                0 => self.x(j),
                1 => self.y(j),
                _ => self.z(j),
            }
        }
    }

    /// Forward generators `C P C^dag` for `P` in `{X_q}` (destabilizers) and
    /// `{Z_q}` (stabilizers), recovered from the symplectic inverse.
    pub fn generators(&self) -> (Vec<PauliString>, Vec<PauliString>) {
        let n = self.n;
        let bit = |v: &[u64], r: usize, q: usize| (v[r * self.w + q / 64] >> (q % 64)) & 1 == 1;
        let mut forward = Vec::with_capacity(2 * n);
        for g in 0..2 * n {
            // Row g of the inverse symplectic matrix: column of the partner
            // generator, with x/z halves swapped.
            let (partner_is_x, pq) = if g < n { (false, g) } else { (true, g - n) };
            let mut f = PauliString::identity(n);
            for q in 0..n {
                // entry for input generator X_q -> z-part of output, Z_q -> x-part
                let from_x_row = if partner_is_x { bit(&self.xs, q, pq) } else { bit(&self.zs, q, pq) };
                let from_z_row = if partner_is_x {
                    bit(&self.xs, n + q, pq)
                } else {
                    bit(&self.zs, n + q, pq)
                };
                f.set(q, Pauli::from_bits(from_z_row, from_x_row));
            }
            let mut img = PauliString::identity(n);
            self.pull_back(&f, &mut img);
            if img.sign() < 0 {
                f.negate();
            }
            forward.push(f);
        }
        let stab = forward.split_off(n);
        (forward, stab)
    }

    pub fn stabilizers(&self) -> Vec<PauliString> {
        self.generators().1
    }

    /// One stabilizer generator per line, e.g. `+XXI`.
    pub fn dump(&self) -> String {
        let mut s = String::new();
        for p in self.stabilizers() {
            s.push_str(&p.to_string());
            s.push('\n');
        }
        s
    }

    /// Verifies the symplectic structure of the tableau.
    pub fn audit(&self) -> Result<(), String> {
        let n = self.n;
        for r1 in 0..2 * n {
            for r2 in r1..2 * n {
                let (x1, z1) = self.row(r1);
                let (x2, z2) = self.row(r2);
                let anti = anticommutes_words(x1, z1, x2, z2);
                let want = r2 == r1 + n && r1 < n;
                if anti != want {
                    return Err(format!("rows {r1} and {r2}: anticommute={anti}, expected {want}"));
                }
            }
        }
        for r in 0..2 * n {
            let (x, z) = self.row(r);
            let tail = (n % 64 != 0).then(|| !0u64 << (n % 64));
            if let Some(mask) = tail {
                if x[self.w - 1] & mask != 0 || z[self.w - 1] & mask != 0 {
                    return Err(format!("row {r} has bits past qubit {n}"));
                }
            }
            if x.iter().chain(z).all(|&v| v == 0) {
                return Err(format!("row {r} is the identity"));
            }
        }
        Ok(())
    }
}

fn two_slices(v: &mut [u64], a: usize, b: usize, w: usize) -> (&mut [u64], &[u64]) {
    if a < b {
        let (lo, hi) = v.split_at_mut(b * w);
        (&mut lo[a * w..(a + 1) * w], &hi[..w])
    } else {
        let (lo, hi) = v.split_at_mut(a * w);
        (&mut hi[..w], &lo[b * w..(b + 1) * w])
    }
}

impl fmt::Debug for StabilizerState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "StabilizerState({} qubits)\n{}", self.n, self.dump())
    }
}
