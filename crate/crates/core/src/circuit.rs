//! Gate-level circuits, the line-oriented text format, and ASAP layering.
//!
//! Text format, one instruction per line, `#` starts a comment:
//!
//! ```text
//! qubits 2
//! h 0
//! rot 1 pi/2 0 -0.25
//! cnot 0 1
//! cpswap 0 1 pi/4
//! ```

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::fmt::Write as _;
use thiserror::Error;

/// One gate of the supported set.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Gate {
    H {
        qubit: usize,
    },
    /// `Rx(gamma) · Rz(beta) · Rx(alpha)`.
    Rot {
        qubit: usize,
        alpha: f64,
        beta: f64,
        gamma: f64,
    },
    Cnot {
        control: usize,
        target: usize,
    },
    /// `SWAP · CP(phi)`: a controlled phase followed by a swap of the two wires.
    CpSwap {
        control: usize,
        target: usize,
        phi: f64,
    },
}

impl Gate {
    pub fn qubits(&self) -> Vec<usize> {
        match *self {
            Gate::H { qubit } | Gate::Rot { qubit, .. } => vec![qubit],
            Gate::Cnot { control, target } | Gate::CpSwap { control, target, .. } => {
                vec![control, target]
            }
        }
    }

    pub fn is_two_qubit(&self) -> bool {
        matches!(self, Gate::Cnot { .. } | Gate::CpSwap { .. })
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum CircuitError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("line {line}: qubit index {index} out of range for {num_qubits} qubits")]
    QubitOutOfRange { line: usize, index: usize, num_qubits: usize },
    #[error("line {line}: malformed angle `{text}`")]
    MalformedAngle { line: usize, text: String },
    #[error("line {line}: two-qubit gate uses qubit {qubit} twice")]
    RepeatedOperand { line: usize, qubit: usize },
    #[error("circuit needs at least one qubit")]
    NoQubits,
    #[error("{0}")]
    Invalid(String),
}

/// An ordered gate list over `num_qubits` wires. Gates sharing a qubit execute in list order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GateCircuit {
    pub num_qubits: usize,
    pub gates: Vec<Gate>,
}

impl GateCircuit {
    /// Builds a circuit, checking operand ranges and distinct two-qubit operands.
    pub fn new(num_qubits: usize, gates: Vec<Gate>) -> Result<Self, CircuitError> {
        if num_qubits == 0 {
            return Err(CircuitError::NoQubits);
        }
        for (i, g) in gates.iter().enumerate() {
            check_gate(g, num_qubits, i + 1)?;
        }
        Ok(Self { num_qubits, gates })
    }

    pub fn two_qubit_gate_count(&self) -> usize {
        self.gates.iter().filter(|g| g.is_two_qubit()).count()
    }
}

fn check_gate(g: &Gate, num_qubits: usize, line: usize) -> Result<(), CircuitError> {
    let qs = g.qubits();
    for &q in &qs {
        if q >= num_qubits {
            return Err(CircuitError::QubitOutOfRange { line, index: q, num_qubits });
        }
    }
    if qs.len() == 2 && qs[0] == qs[1] {
        return Err(CircuitError::RepeatedOperand { line, qubit: qs[0] });
    }
    let angles: &[f64] = match g {
        Gate::Rot { alpha, beta, gamma, .. } => &[*alpha, *beta, *gamma],
        Gate::CpSwap { phi, .. } => &[*phi],
        _ => &[],
    };
    if angles.iter().any(|a| !a.is_finite()) {
        return Err(CircuitError::Invalid(format!("gate {line}: non-finite angle")));
    }
    Ok(())
}

/// Parses an angle: a decimal literal, or `[-][k*]pi[/d]`.
pub fn parse_angle(text: &str) -> Option<f64> {
    let t = text.trim();
    if let Ok(v) = t.parse::<f64>() {
        return v.is_finite().then_some(v);
    }
    let (sign, body) = match t.strip_prefix('-') {
        Some(rest) => (-1.0, rest),
        None => (1.0, t.strip_prefix('+').unwrap_or(t)),
    };
    let (num, rest) = match body.split_once('*') {
        Some((k, rest)) => (k.trim().parse::<f64>().ok()?, rest.trim()),
        None => (1.0, body),
    };
    let rest = rest.strip_prefix("pi")?;
    let den = if rest.is_empty() {
        1.0
    } else {
        let d = rest.strip_prefix('/')?.trim().parse::<f64>().ok()?;
        if d == 0.0 {
            return None;
        }
        d
    };
    let v = sign * num * PI / den;
    v.is_finite().then_some(v)
}

/// Parses the text format. Errors carry 1-based line numbers.
pub fn parse_circuit(text: &str) -> Result<GateCircuit, CircuitError> {
    let mut num_qubits: Option<usize> = None;
    let mut gates = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let toks: Vec<&str> = content.split_whitespace().collect();
        let syntax = |msg: &str| CircuitError::Syntax { line, msg: msg.to_string() };
        let op = toks[0].to_ascii_lowercase();
        if op == "qubits" {
            if num_qubits.is_some() {
                return Err(syntax("duplicate `qubits` header"));
            }
            if toks.len() != 2 {
                return Err(syntax("expected `qubits <n>`"));
            }
            let n: usize = toks[1].parse().map_err(|_| syntax("qubit count is not an integer"))?;
            if n == 0 {
                return Err(syntax("qubit count must be positive"));
            }
            num_qubits = Some(n);
            continue;
        }
        let n = num_qubits.ok_or_else(|| syntax("instruction before `qubits` header"))?;
        let qubit = |s: &str| -> Result<usize, CircuitError> {
            s.parse::<usize>().map_err(|_| syntax(&format!("bad qubit index `{s}`")))
        };
        let angle = |s: &str| -> Result<f64, CircuitError> {
            parse_angle(s).ok_or_else(|| CircuitError::MalformedAngle { line, text: s.to_string() })
        };
        let arity = |k: usize| -> Result<(), CircuitError> {
            if toks.len() == k + 1 {
                Ok(())
            } else {
                Err(syntax(&format!("`{op}` takes {k} operands")))
            }
        };
        let gate = match op.as_str() {
            "h" => {
                arity(1)?;
                Gate::H { qubit: qubit(toks[1])? }
            }
            "rot" => {
                arity(4)?;
                Gate::Rot {
                    qubit: qubit(toks[1])?,
                    alpha: angle(toks[2])?,
                    beta: angle(toks[3])?,
                    gamma: angle(toks[4])?,
                }
            }
            "cnot" => {
                arity(2)?;
                Gate::Cnot { control: qubit(toks[1])?, target: qubit(toks[2])? }
            }
            "cpswap" => {
                arity(3)?;
                Gate::CpSwap { control: qubit(toks[1])?, target: qubit(toks[2])?, phi: angle(toks[3])? }
            }
            other => return Err(syntax(&format!("unknown instruction `{other}`"))),
        };
        check_gate(&gate, n, line)?;
        gates.push(gate);
    }
    let num_qubits = num_qubits
        .ok_or(CircuitError::Syntax { line: text.lines().count().max(1), msg: "missing `qubits` header".into() })?;
    Ok(GateCircuit { num_qubits, gates })
}

/// Renders a circuit in the text format. Angles use the shortest exact decimal form,
/// so `parse_circuit(render_circuit(c)) == c`.
pub fn render_circuit(c: &GateCircuit) -> String {
    let mut s = format!("qubits {}\n", c.num_qubits);
    for g in &c.gates {
        let _ = match *g {
            Gate::H { qubit } => writeln!(s, "h {qubit}"),
            Gate::Rot { qubit, alpha, beta, gamma } => {
                writeln!(s, "rot {qubit} {alpha:?} {beta:?} {gamma:?}")
            }
            Gate::Cnot { control, target } => writeln!(s, "cnot {control} {target}"),
            Gate::CpSwap { control, target, phi } => writeln!(s, "cpswap {control} {target} {phi:?}"),
        };
    }
    s
}

/// Greedy as-soon-as-possible layering: each gate lands one layer after the latest
/// layer touching any of its qubits.
pub fn layers(c: &GateCircuit) -> Vec<Vec<Gate>> {
    let mut next_free = vec![0usize; c.num_qubits];
    let mut out: Vec<Vec<Gate>> = Vec::new();
    for g in &c.gates {
        let qs = g.qubits();
        let layer = qs.iter().map(|&q| next_free[q]).max().unwrap_or(0);
        if out.len() <= layer {
            out.resize_with(layer + 1, Vec::new);
        }
        out[layer].push(*g);
        for q in qs {
            next_free[q] = layer + 1;
        }
    }
    out
}

/// Number of layers when only the two-qubit gates are layered.
pub fn two_qubit_layer_count(c: &GateCircuit) -> usize {
    let gates: Vec<Gate> = c.gates.iter().copied().filter(Gate::is_two_qubit).collect();
    layers(&GateCircuit { num_qubits: c.num_qubits, gates }).len()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_minimal_program() {
        let c = parse_circuit("qubits 2\nh 0\ncnot 0 1").unwrap();
        assert_eq!(c.num_qubits, 2);
        assert_eq!(c.gates, vec![Gate::H { qubit: 0 }, Gate::Cnot { control: 0, target: 1 }]);
    }

    #[test]
    fn empty_program_has_no_gates() {
        let c = parse_circuit("qubits 1\n").unwrap();
        assert_eq!(c, GateCircuit { num_qubits: 1, gates: vec![] });
    }

    #[test]
    fn out_of_range_operand_is_rejected() {
        let e = parse_circuit("qubits 2\ncnot 0 2").unwrap_err();
        assert_eq!(e, CircuitError::QubitOutOfRange { line: 2, index: 2, num_qubits: 2 });
    }

    #[test]
    fn angle_forms() {
        assert_eq!(parse_angle("pi/4"), Some(PI / 4.0));
        assert_eq!(parse_angle("-pi/2"), Some(-PI / 2.0));
        assert_eq!(parse_angle("pi"), Some(PI));
        assert_eq!(parse_angle("3*pi/4"), Some(3.0 * PI / 4.0));
        assert_eq!(parse_angle("0.125"), Some(0.125));
        assert_eq!(parse_angle("pi/0"), None);
        assert_eq!(parse_angle("tau"), None);
        assert!(matches!(parse_circuit("qubits 1\nrot 0 1 x 2"), Err(CircuitError::MalformedAngle { line: 2, .. })));
    }

    #[test]
    fn comments_and_errors_carry_lines() {
        let c = parse_circuit("# header\nqubits 2 # two\n\nh 1 # trailing\n").unwrap();
        assert_eq!(c.gates, vec![Gate::H { qubit: 1 }]);
        assert!(matches!(parse_circuit("qubits 2\nfoo 1"), Err(CircuitError::Syntax { line: 2, .. })));
        assert!(matches!(parse_circuit("h 0"), Err(CircuitError::Syntax { line: 1, .. })));
        assert!(matches!(
            parse_circuit("qubits 2\ncnot 1 1"),
            Err(CircuitError::RepeatedOperand { line: 2, qubit: 1 })
        ));
    }

    #[test]
    fn layering() {
        let c = GateCircuit::new(2, vec![Gate::H { qubit: 0 }, Gate::H { qubit: 1 }]).unwrap();
        assert_eq!(layers(&c).len(), 1);
        let c = GateCircuit::new(2, vec![Gate::H { qubit: 0 }, Gate::Cnot { control: 0, target: 1 }]).unwrap();
        assert_eq!(layers(&c).len(), 2);
    }
}
