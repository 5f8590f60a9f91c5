use num_complex::Complex64 as C64;
use rand::Rng;

use super::kernels::{self, apply_1q, apply_op_comb, hadamard, i_pow};
use super::{DenseError, PauliMask, MAX_STATE_QUBITS};
use crate::stabilizer::{Gate, MeasurementOutcome, PauliString, StabilizerError};

/// Outcomes with Born probability within this distance of 0 or 1 are treated
/// as deterministic and consume no randomness.
pub const DETERMINISTIC_EPS: f64 = 1e-12;

/// Pure state on `n` qubits; qubit `q` is bit `q` of the basis index.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseState {
    n: usize,
    amps: Vec<C64>,
}

impl DenseState {
    pub fn zero(n: usize) -> Result<Self, DenseError> {
        Self::check_size(n, MAX_STATE_QUBITS)?;
        let mut amps = vec![C64::new(0.0, 0.0); 1 << n];
        amps[0] = C64::new(1.0, 0.0);
        Ok(DenseState { n, amps })
    }

    /// Product of X eigenstates; `minus[q]` selects `|->` on qubit `q`.
    pub fn x_product(minus: &[bool]) -> Result<Self, DenseError> {
        let n = minus.len();
        Self::check_size(n, MAX_STATE_QUBITS)?;
        let amp = (1u64 << n) as f64;
        let a = 1.0 / amp.sqrt();
        let mask: usize = minus
            .iter()
            .enumerate()
            .filter(|(_, &m)| m)
            .map(|(q, _)| 1 << q)
            .sum();
        let amps = (0..1usize << n)
            .map(|c| {
                let s = if (c & mask).count_ones() % 2 == 1 { -a } else { a };
                C64::new(s, 0.0)
            })
            .collect();
        Ok(DenseState { n, amps })
    }

    pub fn plus(n: usize) -> Result<Self, DenseError> {
        Self::x_product(&vec![false; n])
    }

    /// `alpha |+...+> + beta |-...->`, normalized.
    pub fn cat(n: usize, alpha: C64, beta: C64) -> Result<Self, DenseError> {
        let p = Self::plus(n)?;
        let m = Self::x_product(&vec![true; n])?;
        let amps = p.amps.iter().zip(&m.amps).map(|(a, b)| alpha * a + beta * b).collect();
        Self::from_amplitudes(n, amps)
    }

    pub fn from_amplitudes(n: usize, mut amps: Vec<C64>) -> Result<Self, DenseError> {
        Self::check_size(n, MAX_STATE_QUBITS)?;
        if amps.len() != 1 << n {
            return Err(DenseError::Shape(format!("expected {} amplitudes, got {}", 1 << n, amps.len())));
        }
        let nrm = kernels::norm_sqr(&amps).sqrt();
        if nrm == 0.0 {
            return Err(DenseError::Shape("zero vector".into()));
        }
        kernels::scale(&mut amps, 1.0 / nrm);
        Ok(DenseState { n, amps })
    }

    fn check_size(n: usize, cap: usize) -> Result<(), DenseError> {
        if n == 0 || n > cap {
            Err(DenseError::TooLarge { n, cap })
        } else {
            Ok(())
        }
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub fn amplitudes_mut(&mut self) -> &mut [C64] {
        &mut self.amps
    }

    pub fn norm(&self) -> f64 {
        kernels::norm_sqr(&self.amps).sqrt()
    }

    pub fn normalize(&mut self) {
        let n = self.norm();
        kernels::scale(&mut self.amps, 1.0 / n);
    }

    /// `|<self|other>|`.
    pub fn fidelity(&self, other: &DenseState) -> f64 {
        self.inner(other).norm()
    }

    pub fn inner(&self, other: &DenseState) -> C64 {
        self.amps.iter().zip(&other.amps).map(|(a, b)| a.conj() * b).sum()
    }

    pub fn apply_pauli(&mut self, p: PauliMask) {
        apply_op_comb(&mut self.amps, p.x, p.z, p.y_count(), C64::new(0.0, 0.0), C64::new(1.0, 0.0));
    }

    /// `exp(-i theta P / 2)`.
    pub fn pauli_rotation(&mut self, p: PauliMask, theta: f64) {
        let (s, c) = (theta / 2.0).sin_cos();
        apply_op_comb(&mut self.amps, p.x, p.z, p.y_count(), C64::new(c, 0.0), C64::new(0.0, -s));
    }

    /// `prod_j exp(-i theta_j Z_j / 2)`.
    pub fn pulse_unitary(&mut self, thetas: &[f64]) {
        assert_eq!(thetas.len(), self.n, "one angle per site");
        let phases: Vec<(C64, C64)> = thetas
            .iter()
            .map(|&t| (C64::from_polar(1.0, -t / 2.0), C64::from_polar(1.0, t / 2.0)))
            .collect();
        kernels::apply_diag(&mut self.amps, |c| {
            phases
                .iter()
                .enumerate()
                .fold(C64::new(1.0, 0.0), |acc, (q, &(p0, p1))| acc * if c >> q & 1 == 1 { p1 } else { p0 })
        });
    }

    pub fn apply_1q(&mut self, q: usize, m: [[C64; 2]; 2]) {
        apply_1q(&mut self.amps, q, m);
    }

    pub fn h(&mut self, q: usize) {
        apply_1q(&mut self.amps, q, hadamard());
    }

    pub fn apply_diag(&mut self, f: impl Fn(usize) -> C64) {
        kernels::apply_diag(&mut self.amps, f);
    }

    pub fn cx(&mut self, c: usize, t: usize) {
        kernels::apply_cx(&mut self.amps, c, t);
    }

    pub fn cz(&mut self, a: usize, b: usize) {
        let m = (1usize << a) | (1usize << b);
        self.apply_diag(|c| if c & m == m { C64::new(-1.0, 0.0) } else { C64::new(1.0, 0.0) });
    }

    /// Gate set shared with the stabilizer engine, applied as exact unitaries.
    pub fn apply_gate(&mut self, gate: Gate, t: &[usize]) -> Result<(), StabilizerError> {
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
        let one = C64::new(1.0, 0.0);
        let zero = C64::new(0.0, 0.0);
        match gate {
            Gate::X => self.apply_pauli(PauliMask::x(t[0])),
            Gate::Y => self.apply_pauli(PauliMask::y(t[0])),
            Gate::Z => self.apply_pauli(PauliMask::z(t[0])),
            Gate::ZPulse => self.pauli_rotation(PauliMask::z(t[0]), std::f64::consts::PI),
            Gate::H => self.h(t[0]),
            Gate::S => self.apply_1q(t[0], [[one, zero], [zero, i_pow(1)]]),
            Gate::SDag => self.apply_1q(t[0], [[one, zero], [zero, i_pow(3)]]),
            Gate::CX => self.cx(t[0], t[1]),
            Gate::CZ => self.cz(t[0], t[1]),
            Gate::ZZHalf => self.pauli_rotation(PauliMask::zz(t[0], t[1]), std::f64::consts::FRAC_PI_2),
        }
        Ok(())
    }

    /// `<P>` for a Hermitian Pauli.
    pub fn expect(&self, p: PauliMask) -> f64 {
        kernels::expect_op(&self.amps, p.x, p.z, p.y_count()).re
    }

    pub fn expect_x(&self, q: usize) -> f64 {
        self.expect(PauliMask::x(q))
    }

    /// Projects onto the `w` eigenspace of `p` and renormalizes. Returns the
    /// Born probability of that outcome.
    pub fn project(&mut self, p: PauliMask, w: i8) -> f64 {
        let prob = (1.0 + w as f64 * self.expect(p)) / 2.0;
        apply_op_comb(
            &mut self.amps,
            p.x,
            p.z,
            p.y_count(),
            C64::new(0.5, 0.0),
            C64::new(w as f64 * 0.5, 0.0),
        );
        if prob > 0.0 {
            kernels::scale(&mut self.amps, 1.0 / prob.sqrt());
        }
        prob
    }

    /// Born-rule measurement. A single `f64` is drawn only when neither
    /// outcome is (numerically) certain; the outcome is `+1` iff the draw is
    /// below `P(+1)`.
    pub fn measure<R: Rng + ?Sized>(&mut self, p: PauliMask, rng: &mut R) -> MeasurementOutcome {
        self.measure_signed(p, 1, rng)
    }

    /// Measures `sign * P`.
    fn measure_signed<R: Rng + ?Sized>(&mut self, p: PauliMask, sign: i8, rng: &mut R) -> MeasurementOutcome {
        let p_plus = ((1.0 + sign as f64 * self.expect(p)) / 2.0).clamp(0.0, 1.0);
        let (value, det) = if p_plus > 1.0 - DETERMINISTIC_EPS {
            (1, true)
        } else if p_plus < DETERMINISTIC_EPS {
            (-1, true)
        } else if rng.gen::<f64>() < p_plus {
            (1, false)
        } else {
            (-1, false)
        };
        self.project(p, value * sign);
        MeasurementOutcome {
            value,
            was_deterministic: det,
        }
    }

    pub fn measure_pauli<R: Rng + ?Sized>(
        &mut self,
        p: &PauliString,
        rng: &mut R,
    ) -> Result<MeasurementOutcome, StabilizerError> {
        if !p.is_hermitian() {
            return Err(StabilizerError::ImaginaryPhase(p.to_string()));
        }
        if p.num_qubits() != self.n {
            return Err(StabilizerError::LengthMismatch {
                expected: self.n,
                got: p.num_qubits(),
            });
        }
        Ok(self.measure_signed(PauliMask::from_string(p), p.sign(), rng))
    }

    pub fn reset_plus<R: Rng + ?Sized>(&mut self, q: usize, rng: &mut R) -> MeasurementOutcome {
        let m = self.measure(PauliMask::x(q), rng);
        if m.is_minus() {
            self.apply_pauli(PauliMask::z(q));
        }
        m
    }

    /// Same draw order as the stabilizer engine.
    pub fn depolarize<R: Rng + ?Sized>(&mut self, q: usize, p_dep: f64, rng: &mut R) {
        if rng.gen::<f64>() < p_dep {
            let p = match rng.gen_range(0..3) {
                0 => PauliMask::x(q),
                1 => PauliMask::y(q),
                _ => PauliMask::z(q),
            };
            self.apply_pauli(p);
        }
    }

    /// Applies `H` on every qubit.
    pub fn hadamard_all(&mut self) {
        for q in 0..self.n {
            self.h(q);
        }
    }
}
