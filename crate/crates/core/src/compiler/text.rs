use std::fmt::Write as _;

use super::{Circuit, CompileError, Condition, Instruction, Opcode, Qubit};

/// First line of every circuit file.
pub const HEADER: &str = "TOOMDTC-CIRCUIT v1";

fn qubit(q: Qubit) -> String {
    match q {
        Qubit::Sys(i) => format!("q{i}"),
        Qubit::Anc(i) => format!("a{i}"),
    }
}

fn angle(a: f64) -> String {
    if a == 1.0 {
        "pi".into()
    } else if a == -1.0 {
        "-pi".into()
    } else {
        format!("{a:?}pi")
    }
}

/// Header line `TOOMDTC-CIRCUIT v1 qubits=<n> ancillas=<m>`, then one
/// instruction per line.
pub fn emit_text(c: &Circuit) -> String {
    let mut s = format!("{HEADER} qubits={} ancillas={}\n", c.num_system, c.num_ancilla);
    for ins in &c.instructions {
        s.push_str(ins.op.mnemonic());
        for q in &ins.qubits {
            s.push(' ');
            s.push_str(&qubit(*q));
        }
        if let Some(a) = ins.angle {
            s.push(' ');
            s.push_str(&angle(a));
        }
        if let Some(r) = ins.record {
            let _ = write!(s, " -> r{r}");
        }
        if let Some(cond) = &ins.condition {
            let tests: Vec<String> = cond.tests.iter().map(|(r, v)| format!("r{r}=={v}")).collect();
            let _ = write!(s, " IF {}", tests.join(" AND "));
        }
        s.push('\n');
    }
    s
}

fn index(tok: &str, prefix: char) -> Option<usize> {
    tok.strip_prefix(prefix)?.parse().ok()
}

fn parse_qubit(tok: &str) -> Option<Qubit> {
    index(tok, 'q').map(Qubit::Sys).or_else(|| index(tok, 'a').map(Qubit::Anc))
}

fn parse_angle(tok: &str) -> Option<f64> {
    let body = tok.strip_suffix("pi")?;
    match body {
        "" => Some(1.0),
        "-" => Some(-1.0),
        b => b.parse().ok(),
    }
}

fn parse_count(tok: Option<&str>, key: &str) -> Option<usize> {
    tok?.strip_prefix(key)?.strip_prefix('=')?.parse().ok()
}

/// Inverse of [`emit_text`]. Blank lines and `#` comments are ignored.
pub fn parse(text: &str) -> Result<Circuit, CompileError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty());
    let err = |line: usize, msg: &str| CompileError::Parse { line, msg: msg.to_string() };
    let (hl, head) = lines.next().ok_or_else(|| err(1, "missing header"))?;
    let rest = head.strip_prefix(HEADER).ok_or_else(|| err(hl, "bad header"))?;
    let mut ht = rest.split_whitespace();
    let nq = parse_count(ht.next(), "qubits").ok_or_else(|| err(hl, "header needs qubits=<n>"))?;
    let na = parse_count(ht.next(), "ancillas").ok_or_else(|| err(hl, "header needs ancillas=<n>"))?;
    if ht.next().is_some() {
        return Err(err(hl, "trailing header fields"));
    }
    let mut c = Circuit::new(nq, na);
    for (ln, line) in lines {
        let (body, cond) = match line.split_once(" IF ") {
            Some((b, k)) => (b, Some(k)),
            None => (line, None),
        };
        let (body, rec) = match body.split_once(" -> ") {
            Some((b, r)) => (b, Some(index(r.trim(), 'r').ok_or_else(|| err(ln, "bad record"))?)),
            None => (body, None),
        };
        let mut toks = body.split_whitespace();
        let op = toks
            .next()
            .and_then(Opcode::from_mnemonic)
            .ok_or_else(|| err(ln, "unknown opcode"))?;
        let mut qubits = Vec::with_capacity(op.arity());
        for _ in 0..op.arity() {
            let t = toks.next().ok_or_else(|| err(ln, "missing operand"))?;
            qubits.push(parse_qubit(t).ok_or_else(|| err(ln, "bad operand"))?);
        }
        let angle = if op.takes_angle() {
            let t = toks.next().ok_or_else(|| err(ln, "missing angle"))?;
            Some(parse_angle(t).ok_or_else(|| err(ln, "bad angle"))?)
        } else {
            None
        };
        if toks.next().is_some() {
            return Err(err(ln, "trailing tokens"));
        }
        let condition = match cond {
            None => None,
            Some(k) => {
                let mut tests = Vec::new();
                for t in k.split(" AND ") {
                    let (r, v) = t.trim().split_once("==").ok_or_else(|| err(ln, "bad condition"))?;
                    let r = index(r, 'r').ok_or_else(|| err(ln, "bad condition record"))?;
                    let v: i8 = v.parse().map_err(|_| err(ln, "bad condition value"))?;
                    tests.push((r, v));
                }
                Some(Condition { tests })
            }
        };
        c.push_raw(Instruction {
            op,
            qubits,
            angle,
            record: rec,
            condition,
        });
    }
    c.validate().map_err(|e| CompileError::Parse { line: 0, msg: e.to_string() })?;
    Ok(c)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn instruction_lines() {
        let mut c = Circuit::new(2, 3);
        c.gate(Opcode::PrepPlus, &[Qubit::Sys(1)]);
        c.gate_angle(Opcode::Cr, &[Qubit::Sys(0), Qubit::Anc(2)], 0.5);
        c.gate_angle(Opcode::CPhase, &[Qubit::Sys(0), Qubit::Anc(2)], 1.0);
        let r = c.measure_x(Qubit::Anc(2));
        let s = c.measure_x(Qubit::Anc(1));
        c.push(Instruction::new(Opcode::Z, &[Qubit::Sys(0)]).when(&[(r, -1), (s, -1)]));
        c.gate(Opcode::Reset, &[Qubit::Anc(2)]);
        let text = emit_text(&c);
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "TOOMDTC-CIRCUIT v1 qubits=2 ancillas=3");
        assert_eq!(lines[2], "CR q0 a2 0.5pi");
        assert_eq!(lines[3], "CPHASE q0 a2 pi");
        assert_eq!(lines[4], "MX a2 -> r0");
        assert_eq!(lines[6], "Z q0 IF r0==-1 AND r1==-1");
        assert_eq!(lines[7], "RESET a2");
        assert_eq!(parse(&text).unwrap(), c);
    }

    #[test]
    fn empty_circuit_has_no_instruction_lines() {
        let c = Circuit::new(4, 4);
        let t = emit_text(&c);
        assert_eq!(t.lines().count(), 1);
        assert_eq!(parse(&t).unwrap(), c);
    }

    #[test]
    fn rejects_garbage() {
        assert!(parse("").is_err());
        assert!(parse("TOOMDTC-CIRCUIT v2 qubits=1 ancillas=0\n").is_err());
        assert!(parse("TOOMDTC-CIRCUIT v1 qubits=1 ancillas=0\nH q3\n").is_err());
        assert!(parse("TOOMDTC-CIRCUIT v1 qubits=1 ancillas=0\nFOO q0\n").is_err());
    }
}
