//! In-place kernels on amplitude vectors. Qubit `q` is bit `q` of the index.

use num_complex::Complex64 as C64;

/// `i^k` for `k` in `0..4`.
#[inline]
pub fn i_pow(k: u32) -> C64 {
    match k & 3 {
        0 => C64::new(1.0, 0.0),
        1 => C64::new(0.0, 1.0),
        2 => C64::new(-1.0, 0.0),
        _ => C64::new(0.0, -1.0),
    }
}

#[inline]
fn parity(v: usize) -> bool {
    v.count_ones() & 1 == 1
}

/// `psi <- a psi + b O psi` with `O = i^k X^x Z^z` (X applied after Z).
pub fn apply_op_comb(amps: &mut [C64], x: usize, z: usize, k: u32, a: C64, b: C64) {
    let bk = b * i_pow(k);
    if x == 0 {
        for (c, v) in amps.iter_mut().enumerate() {
            let f = if parity(c & z) { -bk } else { bk };
            *v = a * *v + f * *v;
        }
        return;
    }
    let hb = 1usize << (usize::BITS - 1 - x.leading_zeros());
    for c in 0..amps.len() {
        if c & hb != 0 {
            continue;
        }
        let d = c ^ x;
        let (pc, pd) = (amps[c], amps[d]);
        let fc = if parity(d & z) { -bk } else { bk };
        let fd = if parity(c & z) { -bk } else { bk };
        amps[c] = a * pc + fc * pd;
        amps[d] = a * pd + fd * pc;
    }
}

/// Applies a 2x2 matrix `[[m00, m01], [m10, m11]]` on qubit `q`.
pub fn apply_1q(amps: &mut [C64], q: usize, m: [[C64; 2]; 2]) {
    let bit = 1usize << q;
    for c in 0..amps.len() {
        if c & bit != 0 {
            continue;
        }
        let (a0, a1) = (amps[c], amps[c | bit]);
        amps[c] = m[0][0] * a0 + m[0][1] * a1;
        amps[c | bit] = m[1][0] * a0 + m[1][1] * a1;
    }
}

/// Multiplies each amplitude by `f(index)`.
pub fn apply_diag(amps: &mut [C64], f: impl Fn(usize) -> C64) {
    for (c, v) in amps.iter_mut().enumerate() {
        *v *= f(c);
    }
}

/// Controlled-X on computational-basis bits.
pub fn apply_cx(amps: &mut [C64], c: usize, t: usize) {
    let (cb, tb) = (1usize << c, 1usize << t);
    for i in 0..amps.len() {
        if i & cb != 0 && i & tb == 0 {
            amps.swap(i, i | tb);
        }
    }
}

/// `<psi| O |psi>` for `O = i^k X^x Z^z`.
pub fn expect_op(amps: &[C64], x: usize, z: usize, k: u32) -> C64 {
    let ik = i_pow(k);
    let mut acc = C64::new(0.0, 0.0);
    for (c, v) in amps.iter().enumerate() {
        let d = c ^ x;
        // (O psi)[c] = i^k (-1)^{|d & z|} psi[d]
        let s = if parity(d & z) { -1.0 } else { 1.0 };
        acc += v.conj() * amps[d] * s;
    }
    acc * ik
}

pub fn norm_sqr(amps: &[C64]) -> f64 {
    amps.iter().map(|v| v.norm_sqr()).sum()
}

pub fn scale(amps: &mut [C64], s: f64) {
    amps.iter_mut().for_each(|v| *v *= s);
}

pub fn hadamard() -> [[C64; 2]; 2] {
    let h = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    [[h, h], [h, -h]]
}

pub fn conj_matrix(m: [[C64; 2]; 2]) -> [[C64; 2]; 2] {
    [[m[0][0].conj(), m[0][1].conj()], [m[1][0].conj(), m[1][1].conj()]]
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn y_on_zero_is_i_one() {
        // Y = i X Z
        let mut v = vec![c(1.0, 0.0), c(0.0, 0.0)];
        apply_op_comb(&mut v, 1, 1, 1, c(0.0, 0.0), c(1.0, 0.0));
        assert!((v[1] - c(0.0, 1.0)).norm() < 1e-15 && v[0].norm() < 1e-15);
    }

    #[test]
    fn expectation_of_x_on_plus() {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let v = vec![c(h, 0.0), c(h, 0.0)];
        assert!((expect_op(&v, 1, 0, 0).re - 1.0).abs() < 1e-12);
        assert!(expect_op(&v, 0, 1, 0).norm() < 1e-12);
    }

    #[test]
    fn cx_permutes() {
        let mut v = vec![c(0.0, 0.0); 4];
        v[1] = c(1.0, 0.0); // control (bit 0) set
        apply_cx(&mut v, 0, 1);
        assert_eq!(v[3], c(1.0, 0.0));
    }
}
