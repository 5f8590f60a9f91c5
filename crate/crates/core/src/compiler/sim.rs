use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_complex::Complex64 as C64;

use super::{Circuit, CompileError, Opcode};
use crate::dense::kernels::hadamard;
use crate::dense::{DenseError, DensityMatrix, PauliMask, MAX_DENSITY_QUBITS};

/// One measurement history with its unnormalized joint state; the trace is
/// the probability of the history.
#[derive(Debug, Clone)]
pub struct Branch {
    pub records: Vec<Option<i8>>,
    pub rho: DensityMatrix,
}

impl Branch {
    pub fn probability(&self) -> f64 {
        self.rho.trace().re
    }

    /// Normalized state of the system qubits (the first `num_system`).
    pub fn system_state(&self, num_system: usize) -> DensityMatrix {
        let keep: Vec<usize> = (0..num_system).collect();
        let mut r = self.rho.partial_trace_keep(&keep);
        r.scale(1.0 / self.probability());
        r
    }
}

const PRUNE: f64 = 1e-15;

fn embed(c: &Circuit, rho_sys: &DensityMatrix) -> Result<DensityMatrix, CompileError> {
    c.validate()?;
    let n = c.total_qubits();
    if n > MAX_DENSITY_QUBITS {
        return Err(DenseError::TooLarge { n, cap: MAX_DENSITY_QUBITS }.into());
    }
    if rho_sys.num_qubits() != c.num_system {
        return Err(DenseError::Shape(format!(
            "state on {} qubits, circuit has {} system qubits",
            rho_sys.num_qubits(),
            c.num_system
        ))
        .into());
    }
    let d = rho_sys.dim();
    let mut rho = DensityMatrix::zeros(n);
    for k in 0..d {
        for b in 0..d {
            rho.set(k, b, rho_sys.get(k, b));
        }
    }
    Ok(rho)
}

/// `rho <- Pi rho Pi + F Pi' rho Pi' F`: prepares the `w = +1` eigenstate
/// of `p`, with `f` flipping the other eigenstate onto it.
fn reinit(rho: &mut DensityMatrix, p: PauliMask, f: PauliMask) {
    let mut other = rho.clone();
    rho.sandwich_projector(p, 1);
    other.sandwich_projector(p, -1);
    other.conj_pauli(f);
    rho.add_scaled(1.0, &other);
}

fn phase_on(bits: usize, a: f64) -> impl Fn(usize) -> C64 {
    let ph = C64::from_polar(1.0, PI * a);
    move |i| if i & bits == bits { ph } else { C64::new(1.0, 0.0) }
}

fn apply_unitary_or_reset(c: &Circuit, ins: &super::Instruction, rho: &mut DensityMatrix) {
    let q: Vec<usize> = ins.qubits.iter().map(|&q| c.flat(q)).collect();
    let a = ins.angle.unwrap_or(0.0);
    match ins.op {
        Opcode::PrepPlus => reinit(rho, PauliMask::x(q[0]), PauliMask::z(q[0])),
        Opcode::Reset => reinit(rho, PauliMask::z(q[0]), PauliMask::x(q[0])),
        Opcode::H => rho.conj_1q(q[0], hadamard()),
        Opcode::X => rho.conj_pauli(PauliMask::x(q[0])),
        Opcode::Z => rho.conj_pauli(PauliMask::z(q[0])),
        Opcode::Phase => rho.conj_diag(phase_on(1 << q[0], a)),
        Opcode::Cx => rho.conj_cx(q[0], q[1]),
        Opcode::Cr => rho.conj_rotation(PauliMask::x(q[0]).times(PauliMask::z(q[1])), PI * a),
        Opcode::CPhase => rho.conj_diag(phase_on((1 << q[0]) | (1 << q[1]), a)),
        Opcode::Mx => unreachable!("measurements branch"),
    }
}

fn run(c: &Circuit, rho_sys: &DensityMatrix, merge: bool) -> Result<Vec<Branch>, CompileError> {
    let rho = embed(c, rho_sys)?;
    let nr = c.num_records();
    let mut last_use: Vec<Option<usize>> = vec![None; nr];
    for (k, ins) in c.instructions.iter().enumerate() {
        if let Some(cond) = &ins.condition {
            for &(r, _) in &cond.tests {
                last_use[r] = Some(k);
            }
        }
    }
    let mut branches = vec![Branch {
        records: vec![None; nr],
        rho,
    }];
    for (k, ins) in c.instructions.iter().enumerate() {
        let mut next = Vec::with_capacity(branches.len() * 2);
        for mut b in branches {
            if ins.op == Opcode::Mx {
                let r = ins.record.expect("validated");
                let q = c.flat(ins.qubits[0]);
                for w in [1i8, -1] {
                    let mut rho = b.rho.clone();
                    rho.sandwich_projector(PauliMask::x(q), w);
                    if rho.trace().re > PRUNE {
                        let mut records = b.records.clone();
                        records[r] = Some(w);
                        next.push(Branch { records, rho });
                    }
                }
                continue;
            }
            let fire = match &ins.condition {
                None => true,
                Some(cond) => cond
                    .holds(&b.records)
                    .ok_or_else(|| CompileError::Invalid(format!("instruction {k} reads a missing record")))?,
            };
            if fire {
                apply_unitary_or_reset(c, ins, &mut b.rho);
            }
            next.push(b);
        }
        if merge {
            let mut map: BTreeMap<Vec<Option<i8>>, DensityMatrix> = BTreeMap::new();
            for mut b in next {
                for (r, slot) in b.records.iter_mut().enumerate() {
                    if slot.is_some() && last_use[r].map_or(true, |u| u <= k) {
                        *slot = None;
                    }
                }
                match map.get_mut(&b.records) {
                    Some(acc) => acc.add_scaled(1.0, &b.rho),
                    None => {
                        map.insert(b.records, b.rho);
                    }
                }
            }
            branches = map.into_iter().map(|(records, rho)| Branch { records, rho }).collect();
        } else {
            branches = next;
        }
    }
    Ok(branches)
}

/// Every measurement history of the circuit with its unnormalized joint
/// state. Ancillas start in `|0>`.
pub fn simulate_branches(c: &Circuit, rho_sys: &DensityMatrix) -> Result<Vec<Branch>, CompileError> {
    run(c, rho_sys, false)
}

/// The system-qubit channel of the circuit: all histories summed and the
/// ancillas traced out. Records are dropped once no later condition reads
/// them, which keeps the branch count small.
pub fn simulate_channel(c: &Circuit, rho_sys: &DensityMatrix) -> Result<DensityMatrix, CompileError> {
    let branches = run(c, rho_sys, true)?;
    let mut total = DensityMatrix::zeros(c.total_qubits());
    for b in &branches {
        total.add_scaled(1.0, &b.rho);
    }
    let keep: Vec<usize> = (0..c.num_system).collect();
    Ok(total.partial_trace_keep(&keep))
}
