//! Gate-level compilation of the correction step for ancilla-mediated
//! hardware layouts, a text format for circuits, and an exact simulator.
//!
//! System qubits are written `q<i>`, ancillas `a<i>`, measurement records
//! `r<k>`. Angles are stored in units of pi.

mod layout;
mod sim;
mod text;

pub use layout::HardwareLayout;
pub use sim::{simulate_branches, simulate_channel, Branch};
pub use text::{emit_text, parse, HEADER};

use thiserror::Error;

use crate::dense::DenseError;
use crate::lattice::{LatticeTopology, SiteId, Sublattice};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CompileError {
    #[error("bond {0}-{1} shares no ancilla in the layout")]
    BondNotMeasurable(SiteId, SiteId),
    #[error("site {0} has no two distinct ancillas for its NEC bonds")]
    NoDistinctAncillas(SiteId),
    #[error("layout does not match lattice: {0}")]
    Mismatch(String),
    #[error("invalid circuit: {0}")]
    Invalid(String),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error(transparent)]
    Dense(#[from] DenseError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Qubit {
    Sys(usize),
    Anc(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Opcode {
    /// Initialize to `|+>`.
    PrepPlus,
    /// Initialize to `|0>`.
    Reset,
    H,
    X,
    Z,
    /// `diag(1, e^{i angle})`.
    Phase,
    /// Control first.
    Cx,
    /// `exp(-i angle X_a Z_b / 2)` on operands `(a, b)`.
    Cr,
    /// `diag(1, 1, 1, e^{i angle})`.
    CPhase,
    /// X-basis measurement into a fresh record.
    Mx,
}

impl Opcode {
    pub fn mnemonic(self) -> &'static str {
        match self {
            Opcode::PrepPlus => "PREP_PLUS",
            Opcode::Reset => "RESET",
            Opcode::H => "H",
            Opcode::X => "X",
            Opcode::Z => "Z",
            Opcode::Phase => "P",
            Opcode::Cx => "CX",
            Opcode::Cr => "CR",
            Opcode::CPhase => "CPHASE",
            Opcode::Mx => "MX",
        }
    }

    pub fn from_mnemonic(s: &str) -> Option<Opcode> {
        Some(match s {
            "PREP_PLUS" => Opcode::PrepPlus,
            "RESET" => Opcode::Reset,
            "H" => Opcode::H,
            "X" => Opcode::X,
            "Z" => Opcode::Z,
            "P" => Opcode::Phase,
            "CX" => Opcode::Cx,
            "CR" => Opcode::Cr,
            "CPHASE" => Opcode::CPhase,
            "MX" => Opcode::Mx,
            _ => return None,
        })
    }

    pub fn arity(self) -> usize {
        match self {
            Opcode::Cx | Opcode::Cr | Opcode::CPhase => 2,
            _ => 1,
        }
    }

    pub fn takes_angle(self) -> bool {
        matches!(self, Opcode::Phase | Opcode::Cr | Opcode::CPhase)
    }

    pub const ALL: [Opcode; 10] = [
        Opcode::PrepPlus,
        Opcode::Reset,
        Opcode::H,
        Opcode::X,
        Opcode::Z,
        Opcode::Phase,
        Opcode::Cx,
        Opcode::Cr,
        Opcode::CPhase,
        Opcode::Mx,
    ];
}

/// Conjunction of record equality tests.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Condition {
    pub tests: Vec<(usize, i8)>,
}

/// Most tests a condition may hold.
pub const MAX_CONDITION_TERMS: usize = 2;

impl Condition {
    pub fn holds(&self, records: &[Option<i8>]) -> Option<bool> {
        let mut all = true;
        for &(r, v) in &self.tests {
            all &= records.get(r).copied().flatten()? == v;
        }
        Some(all)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Instruction {
    pub op: Opcode,
    pub qubits: Vec<Qubit>,
    /// In units of pi.
    pub angle: Option<f64>,
    pub record: Option<usize>,
    pub condition: Option<Condition>,
}

impl Instruction {
    pub fn new(op: Opcode, qubits: &[Qubit]) -> Self {
        Instruction {
            op,
            qubits: qubits.to_vec(),
            angle: None,
            record: None,
            condition: None,
        }
    }

    pub fn with_angle(mut self, a: f64) -> Self {
        self.angle = Some(a);
        self
    }

    pub fn when(mut self, tests: &[(usize, i8)]) -> Self {
        self.condition = Some(Condition { tests: tests.to_vec() });
        self
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Circuit {
    pub num_system: usize,
    pub num_ancilla: usize,
    pub instructions: Vec<Instruction>,
    num_records: usize,
}

impl Circuit {
    pub fn new(num_system: usize, num_ancilla: usize) -> Self {
        Circuit {
            num_system,
            num_ancilla,
            instructions: Vec::new(),
            num_records: 0,
        }
    }

    pub fn num_records(&self) -> usize {
        self.num_records
    }

    pub fn len(&self) -> usize {
        self.instructions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instructions.is_empty()
    }

    /// Appends a non-measuring instruction.
    pub fn push(&mut self, ins: Instruction) -> &mut Self {
        debug_assert!(ins.op != Opcode::Mx);
        self.instructions.push(ins);
        self
    }

    pub fn gate(&mut self, op: Opcode, qubits: &[Qubit]) -> &mut Self {
        self.push(Instruction::new(op, qubits))
    }

    pub fn gate_angle(&mut self, op: Opcode, qubits: &[Qubit], angle: f64) -> &mut Self {
        self.push(Instruction::new(op, qubits).with_angle(angle))
    }

    /// Appends `MX q -> r` with the next record index and returns it.
    pub fn measure_x(&mut self, q: Qubit) -> usize {
        let r = self.num_records;
        self.num_records += 1;
        let mut ins = Instruction::new(Opcode::Mx, &[q]);
        ins.record = Some(r);
        self.instructions.push(ins);
        r
    }

    /// Appends an instruction exactly as given, including a record slot.
    /// Used by the parser; [`Circuit::validate`] checks the result.
    pub fn push_raw(&mut self, ins: Instruction) {
        if let Some(r) = ins.record {
            self.num_records = self.num_records.max(r + 1);
        }
        self.instructions.push(ins);
    }

    pub fn total_qubits(&self) -> usize {
        self.num_system + self.num_ancilla
    }

    /// Flat index: system qubits first, then ancillas.
    pub fn flat(&self, q: Qubit) -> usize {
        match q {
            Qubit::Sys(i) => i,
            Qubit::Anc(i) => self.num_system + i,
        }
    }

    pub fn count(&self, op: Opcode) -> usize {
        self.instructions.iter().filter(|i| i.op == op).count()
    }

    pub fn validate(&self) -> Result<(), CompileError> {
        let bad = |k: usize, m: String| Err(CompileError::Invalid(format!("instruction {k}: {m}")));
        let mut written = vec![false; self.num_records];
        for (k, ins) in self.instructions.iter().enumerate() {
            if ins.qubits.len() != ins.op.arity() {
                return bad(k, format!("{} takes {} operands", ins.op.mnemonic(), ins.op.arity()));
            }
            for q in &ins.qubits {
                let ok = match *q {
                    Qubit::Sys(i) => i < self.num_system,
                    Qubit::Anc(i) => i < self.num_ancilla,
                };
                if !ok {
                    return bad(k, format!("operand {q:?} out of range"));
                }
            }
            if ins.qubits.len() == 2 && ins.qubits[0] == ins.qubits[1] {
                return bad(k, "repeated operand".into());
            }
            if ins.op.takes_angle() != ins.angle.is_some() {
                return bad(k, "angle mismatch".into());
            }
            if let Some(a) = ins.angle {
                if !a.is_finite() {
                    return bad(k, "non-finite angle".into());
                }
            }
            if let Some(c) = &ins.condition {
                if ins.op == Opcode::Mx {
                    return bad(k, "measurements cannot be conditioned".into());
                }
                if c.tests.is_empty() || c.tests.len() > MAX_CONDITION_TERMS {
                    return bad(k, format!("condition needs 1 to {MAX_CONDITION_TERMS} tests"));
                }
                for &(r, v) in &c.tests {
                    if r >= written.len() || !written[r] {
                        return bad(k, format!("condition reads r{r} before it is written"));
                    }
                    if v != 1 && v != -1 {
                        return bad(k, format!("record value {v} is not +-1"));
                    }
                }
            }
            match (ins.op, ins.record) {
                (Opcode::Mx, Some(r)) => {
                    if r >= written.len() || written[r] {
                        return bad(k, format!("record r{r} written twice"));
                    }
                    written[r] = true;
                }
                (Opcode::Mx, None) => return bad(k, "measurement without record".into()),
                (_, Some(_)) => return bad(k, "only measurements write records".into()),
                _ => {}
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Gateset {
    /// Two cross-resonance gates; outcome `+1` marks a domain wall.
    CrossResonance,
    /// Hadamards around two controlled phases; outcome `-1` marks a wall.
    CPhase,
}

impl Gateset {
    /// Record value that signals `W = -1`.
    pub fn wall_outcome(self) -> i8 {
        match self {
            Gateset::CrossResonance => 1,
            Gateset::CPhase => -1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NecVariant {
    MeasureAndFeedback,
    ToffoliReset,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CompileOptions {
    pub gateset: Gateset,
    /// Undo the cross-resonance byproduct `exp(-i pi X_j / 2)`.
    pub correct_byproduct: bool,
}

impl Default for CompileOptions {
    fn default() -> Self {
        CompileOptions {
            gateset: Gateset::CrossResonance,
            correct_byproduct: true,
        }
    }
}

fn sys(j: SiteId) -> Qubit {
    Qubit::Sys(j)
}

/// Entangles ancilla `a` with the parity of `X_j X_j'`. Cross-resonance
/// leaves the ancilla in `|->` iff there is no wall, with `-i X_j` on the
/// system in that branch; the CPhase form leaves it in `|->` iff there is a
/// wall.
fn couple_bond(c: &mut Circuit, j: SiteId, jp: SiteId, a: usize, gateset: Gateset) {
    let b = Qubit::Anc(a);
    c.gate(Opcode::PrepPlus, &[b]);
    match gateset {
        Gateset::CrossResonance => {
            c.gate_angle(Opcode::Cr, &[sys(j), b], 0.5);
            c.gate_angle(Opcode::Cr, &[sys(jp), b], 0.5);
        }
        Gateset::CPhase => {
            c.gate(Opcode::H, &[sys(j)]).gate(Opcode::H, &[sys(jp)]);
            c.gate_angle(Opcode::CPhase, &[sys(j), b], 1.0);
            c.gate_angle(Opcode::CPhase, &[sys(jp), b], 1.0);
            c.gate(Opcode::H, &[sys(j)]).gate(Opcode::H, &[sys(jp)]);
        }
    }
}

fn emit_dw(
    c: &mut Circuit,
    layout: &HardwareLayout,
    j: SiteId,
    jp: SiteId,
    opts: &CompileOptions,
) -> Result<usize, CompileError> {
    let a = layout.bond_ancilla(j, jp).ok_or(CompileError::BondNotMeasurable(j, jp))?;
    couple_bond(c, j, jp, a, opts.gateset);
    let r = c.measure_x(Qubit::Anc(a));
    if opts.gateset == Gateset::CrossResonance && opts.correct_byproduct {
        c.push(Instruction::new(Opcode::X, &[sys(j)]).when(&[(r, -1)]));
    }
    Ok(r)
}

/// Domain-wall measurement of bond `(j, j')` as a circuit fragment over the
/// whole layout, with the index of its record. The cross-resonance byproduct
/// is corrected.
pub fn compile_dw_measurement(
    layout: &HardwareLayout,
    j: SiteId,
    jp: SiteId,
    gateset: Gateset,
) -> Result<(Circuit, usize), CompileError> {
    compile_dw_measurement_with(
        layout,
        j,
        jp,
        &CompileOptions {
            gateset,
            ..CompileOptions::default()
        },
    )
}

pub fn compile_dw_measurement_with(
    layout: &HardwareLayout,
    j: SiteId,
    jp: SiteId,
    opts: &CompileOptions,
) -> Result<(Circuit, usize), CompileError> {
    let mut c = Circuit::new(layout.num_system(), layout.num_ancilla());
    if j >= layout.num_system() || jp >= layout.num_system() || j == jp {
        return Err(CompileError::BondNotMeasurable(j, jp));
    }
    let r = emit_dw(&mut c, layout, j, jp, opts)?;
    Ok((c, r))
}

/// `CCZ` as a phase polynomial over `CX` and `P(+-pi/4)`.
fn ccz(c: &mut Circuit, a: Qubit, b: Qubit, t: Qubit) {
    for q in [a, b, t] {
        c.gate_angle(Opcode::Phase, &[q], 0.25);
    }
    c.gate(Opcode::Cx, &[a, b]).gate_angle(Opcode::Phase, &[b], -0.25);
    c.gate(Opcode::Cx, &[a, t]).gate_angle(Opcode::Phase, &[t], -0.25);
    c.gate(Opcode::Cx, &[b, t]).gate_angle(Opcode::Phase, &[t], -0.25);
    c.gate(Opcode::Cx, &[a, t]).gate_angle(Opcode::Phase, &[t], 0.25);
    c.gate(Opcode::Cx, &[b, t]).gate(Opcode::Cx, &[a, b]);
}

fn check_match(layout: &HardwareLayout, lattice: &LatticeTopology) -> Result<(), CompileError> {
    if layout.num_system() != lattice.num_sites() {
        return Err(CompileError::Mismatch(format!(
            "layout has {} system qubits, lattice has {} sites",
            layout.num_system(),
            lattice.num_sites()
        )));
    }
    if let Some((kind, dims)) = layout.source() {
        if kind != lattice.kind() || dims != lattice.dims() {
            return Err(CompileError::Mismatch(format!(
                "layout built for {kind} {dims:?}, lattice is {} {:?}",
                lattice.kind(),
                lattice.dims()
            )));
        }
    }
    Ok(())
}

/// One full NEC correction round with every site selected: sublattice A then
/// B, ascending within each.
pub fn compile_nec_round(
    layout: &HardwareLayout,
    lattice: &LatticeTopology,
    variant: NecVariant,
) -> Result<Circuit, CompileError> {
    compile_nec_round_with(layout, lattice, variant, &CompileOptions::default())
}

pub fn compile_nec_round_with(
    layout: &HardwareLayout,
    lattice: &LatticeTopology,
    variant: NecVariant,
    opts: &CompileOptions,
) -> Result<Circuit, CompileError> {
    let order: Vec<SiteId> = [Sublattice::A, Sublattice::B]
        .iter()
        .flat_map(|&l| lattice.sublattice_sites(l).iter().copied())
        .collect();
    compile_nec_sites(layout, lattice, &order, variant, opts)
}

/// NEC feedback for the listed sites, in order. Sites without an NEC triple
/// are skipped.
pub fn compile_nec_sites(
    layout: &HardwareLayout,
    lattice: &LatticeTopology,
    sites: &[SiteId],
    variant: NecVariant,
    opts: &CompileOptions,
) -> Result<Circuit, CompileError> {
    check_match(layout, lattice)?;
    let mut c = Circuit::new(layout.num_system(), layout.num_ancilla());
    let wall = opts.gateset.wall_outcome();
    for &j in sites {
        let Some((bn, be)) = lattice.nec_targets(j) else {
            continue;
        };
        let (n, e) = (bn.other(j), be.other(j));
        match variant {
            NecVariant::MeasureAndFeedback => {
                let rn = emit_dw(&mut c, layout, j, n, opts)?;
                let re = emit_dw(&mut c, layout, j, e, opts)?;
                c.push(Instruction::new(Opcode::Z, &[sys(j)]).when(&[(rn, wall), (re, wall)]));
            }
            NecVariant::ToffoliReset => {
                let (an, ae) = layout.distinct_ancillas(j, n, e).ok_or(CompileError::NoDistinctAncillas(j))?;
                for (t, a) in [(n, an), (e, ae)] {
                    couple_bond(&mut c, j, t, a, opts.gateset);
                    let b = Qubit::Anc(a);
                    c.gate(Opcode::H, &[b]);
                    if opts.gateset == Gateset::CrossResonance {
                        // ancilla is |1> exactly in the branch carrying -i X_j
                        c.gate(Opcode::Cx, &[b, sys(j)]);
                        c.gate(Opcode::X, &[b]);
                    }
                }
                ccz(&mut c, Qubit::Anc(an), Qubit::Anc(ae), sys(j));
                c.gate(Opcode::Reset, &[Qubit::Anc(an)]);
                c.gate(Opcode::Reset, &[Qubit::Anc(ae)]);
            }
        }
    }
    Ok(c)
}
