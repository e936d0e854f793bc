use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum GateKind {
    X,
    H,
    S,
    Sdg,
    Cx,
    Ccx,
    Mcx,
}

impl GateKind {
    pub fn name(self) -> &'static str {
        match self {
            GateKind::X => "X",
            GateKind::H => "H",
            GateKind::S => "S",
            GateKind::Sdg => "SDG",
            GateKind::Cx => "CX",
            GateKind::Ccx => "CCX",
            GateKind::Mcx => "MCX",
        }
    }

    /// X-type gates permute computational basis states.
    pub fn is_classical(self) -> bool {
        matches!(self, GateKind::X | GateKind::Cx | GateKind::Ccx | GateKind::Mcx)
    }

    fn from_name(s: &str) -> Option<Self> {
        Some(match s {
            "X" => GateKind::X,
            "H" => GateKind::H,
            "S" => GateKind::S,
            "SDG" => GateKind::Sdg,
            "CX" => GateKind::Cx,
            "CCX" => GateKind::Ccx,
            "MCX" => GateKind::Mcx,
            _ => return None,
        })
    }
}

/// `Closed` fires on |1>, `Open` on |0>.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Polarity {
    Closed,
    Open,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Control {
    pub qubit: usize,
    pub polarity: Polarity,
}

impl Control {
    pub fn closed(qubit: usize) -> Self {
        Self {
            qubit,
            polarity: Polarity::Closed,
        }
    }

    pub fn open(qubit: usize) -> Self {
        Self {
            qubit,
            polarity: Polarity::Open,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Gate {
    pub kind: GateKind,
    pub target: usize,
    pub controls: Vec<Control>,
}

impl Gate {
    pub fn single(kind: GateKind, target: usize) -> Self {
        Self {
            kind,
            target,
            controls: Vec::new(),
        }
    }

    /// X on `target` if every control fires. Uses the narrowest kind:
    /// `X`, `CX` or `CCX` when all controls are closed, `MCX` otherwise.
    pub fn controlled_x(target: usize, controls: Vec<Control>) -> Self {
        let all_closed = controls.iter().all(|c| c.polarity == Polarity::Closed);
        let kind = match controls.len() {
            0 => GateKind::X,
            1 if all_closed => GateKind::Cx,
            2 if all_closed => GateKind::Ccx,
            _ => GateKind::Mcx,
        };
        Self { kind, target, controls }
    }

    pub fn cx(control: usize, target: usize) -> Self {
        Self {
            kind: GateKind::Cx,
            target,
            controls: vec![Control::closed(control)],
        }
    }

    pub fn ccx(c1: usize, c2: usize, target: usize) -> Self {
        Self {
            kind: GateKind::Ccx,
            target,
            controls: vec![Control::closed(c1), Control::closed(c2)],
        }
    }

    pub fn qubits(&self) -> impl Iterator<Item = usize> + '_ {
        std::iter::once(self.target).chain(self.controls.iter().map(|c| c.qubit))
    }

    pub fn validate(&self, width: usize) -> Result<()> {
        let mut qs: Vec<usize> = self.qubits().collect();
        if qs.iter().any(|&q| q >= width) {
            return Err(Error::invalid(format!("gate `{self}` touches a qubit >= {width}")));
        }
        qs.sort_unstable();
        if qs.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::invalid(format!("gate `{self}` repeats a qubit")));
        }
        let n = self.controls.len();
        let closed = self.controls.iter().all(|c| c.polarity == Polarity::Closed);
        let ok = match self.kind {
            GateKind::X | GateKind::H | GateKind::S | GateKind::Sdg => n == 0,
            GateKind::Cx => n == 1 && closed,
            GateKind::Ccx => n == 2 && closed,
            GateKind::Mcx => n >= 1,
        };
        if !ok {
            return Err(Error::invalid(format!("gate `{self}` has {n} controls")));
        }
        Ok(())
    }

    /// The same gate with one more closed control.
    pub fn with_control(&self, qubit: usize) -> Gate {
        let mut controls = vec![Control::closed(qubit)];
        controls.extend(self.controls.iter().copied());
        assert!(self.kind.is_classical(), "only X-type gates can take extra controls");
        Gate::controlled_x(self.target, controls)
    }

    /// Applies an X-type gate to a basis index; `width` qubits, qubit 0 most significant.
    #[inline]
    pub fn apply_classical(&self, x: usize, width: usize) -> usize {
        debug_assert!(self.kind.is_classical());
        let bit = |q: usize| (x >> (width - 1 - q)) & 1;
        let fires = self.controls.iter().all(|c| match c.polarity {
            Polarity::Closed => bit(c.qubit) == 1,
            Polarity::Open => bit(c.qubit) == 0,
        });
        if fires {
            x ^ (1 << (width - 1 - self.target))
        } else {
            x
        }
    }
}

impl fmt::Display for Gate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} q{}", self.kind.name(), self.target)?;
        if !self.controls.is_empty() {
            f.write_str(" ;")?;
            for c in &self.controls {
                let p = match c.polarity {
                    Polarity::Closed => "c+",
                    Polarity::Open => "c-",
                };
                write!(f, " {p} q{}", c.qubit)?;
            }
        }
        Ok(())
    }
}

fn parse_qubit(tok: &str) -> Result<usize> {
    tok.strip_prefix('q')
        .and_then(|n| n.parse().ok())
        .ok_or_else(|| Error::Parse(format!("expected qubit like `q3`, got `{tok}`")))
}

impl FromStr for Gate {
    type Err = Error;

    fn from_str(line: &str) -> Result<Self> {
        let (head, tail) = match line.split_once(';') {
            Some((h, t)) => (h, Some(t)),
            None => (line, None),
        };
        let mut it = head.split_whitespace();
        let name = it.next().ok_or_else(|| Error::Parse("empty gate line".into()))?;
        let kind = GateKind::from_name(name).ok_or_else(|| Error::Parse(format!("unknown gate `{name}`")))?;
        let target = parse_qubit(it.next().ok_or_else(|| Error::Parse(format!("`{line}` lacks a target")))?)?;
        if let Some(extra) = it.next() {
            return Err(Error::Parse(format!("unexpected `{extra}` in `{line}`")));
        }
        let mut controls = Vec::new();
        if let Some(t) = tail {
            let toks: Vec<&str> = t.split_whitespace().collect();
            if !toks.len().is_multiple_of(2) {
                return Err(Error::Parse(format!("malformed controls in `{line}`")));
            }
            for pair in toks.chunks(2) {
                let polarity = match pair[0] {
                    "c+" => Polarity::Closed,
                    "c-" => Polarity::Open,
                    other => return Err(Error::Parse(format!("unknown control marker `{other}`"))),
                };
                controls.push(Control {
                    qubit: parse_qubit(pair[1])?,
                    polarity,
                });
            }
        }
        Ok(Gate { kind, target, controls })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Circuit {
    pub n_qubits: usize,
    pub n_ancillas: usize,
    pub gates: Vec<Gate>,
}

impl Circuit {
    pub fn new(n_qubits: usize) -> Self {
        Self {
            n_qubits,
            n_ancillas: 0,
            gates: Vec::new(),
        }
    }

    pub fn width(&self) -> usize {
        self.n_qubits + self.n_ancillas
    }

    pub fn push(&mut self, g: Gate) {
        self.gates.push(g);
    }

    pub fn validate(&self) -> Result<()> {
        self.gates.iter().try_for_each(|g| g.validate(self.width()))
    }

    pub fn is_classical(&self) -> bool {
        self.gates.iter().all(|g| g.kind.is_classical())
    }

    /// Image of a basis index under an X-type circuit.
    pub fn apply_classical(&self, x: usize) -> usize {
        let w = self.width();
        self.gates.iter().fold(x, |x, g| g.apply_classical(x, w))
    }

    /// Preimage of a basis index under an X-type circuit.
    pub fn apply_classical_inverse(&self, x: usize) -> usize {
        let w = self.width();
        self.gates.iter().rev().fold(x, |x, g| g.apply_classical(x, w))
    }

    pub fn to_gate_list(&self) -> String {
        let mut s = format!("# qubits={} ancillas={}\n", self.n_qubits, self.n_ancillas);
        for g in &self.gates {
            s.push_str(&g.to_string());
            s.push('\n');
        }
        s
    }

    /// Parses the gate-list format. Without a header the width is inferred
    /// from the largest qubit index.
    pub fn parse_gate_list(text: &str) -> Result<Circuit> {
        let mut header: Option<(usize, usize)> = None;
        let mut gates = Vec::new();
        for raw in text.lines() {
            let line = raw.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(comment) = line.strip_prefix('#') {
                let mut q = None;
                let mut a = None;
                for tok in comment.split_whitespace() {
                    if let Some(v) = tok.strip_prefix("qubits=") {
                        q = v.parse().ok();
                    } else if let Some(v) = tok.strip_prefix("ancillas=") {
                        a = v.parse().ok();
                    }
                }
                if let (Some(q), Some(a)) = (q, a) {
                    header = Some((q, a));
                }
                continue;
            }
            gates.push(line.parse::<Gate>()?);
        }
        let (n_qubits, n_ancillas) = header.unwrap_or_else(|| {
            let max = gates.iter().flat_map(|g| g.qubits()).max().map_or(0, |q| q + 1);
            (max, 0)
        });
        let c = Circuit {
            n_qubits,
            n_ancillas,
            gates,
        };
        c.validate()?;
        Ok(c)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn text_roundtrip() {
        let g: Gate = "MCX q2 ; c+ q0 c- q1".parse().unwrap();
        assert_eq!(g.controls, vec![Control::closed(0), Control::open(1)]);
        assert_eq!(g.to_string(), "MCX q2 ; c+ q0 c- q1");
        assert_eq!("H q0".parse::<Gate>().unwrap(), Gate::single(GateKind::H, 0));
        assert!("FOO q1".parse::<Gate>().is_err());
        assert!("X q1 q2".parse::<Gate>().is_err());
        assert!("CX q1 ; c* q0".parse::<Gate>().is_err());

        let mut c = Circuit::new(3);
        c.push(Gate::cx(0, 1));
        c.push(Gate::single(GateKind::Sdg, 2));
        let back = Circuit::parse_gate_list(&c.to_gate_list()).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn validation() {
        assert!(Gate::cx(1, 1).validate(3).is_err());
        assert!(Gate::cx(0, 3).validate(3).is_err());
        assert!(Gate::single(GateKind::Mcx, 0).validate(3).is_err());
    }

    #[test]
    fn classical_action() {
        // qubit 0 is the most significant bit
        let g = Gate::controlled_x(1, vec![Control::open(0)]);
        assert_eq!(g.apply_classical(0b00, 2), 0b01);
        assert_eq!(g.apply_classical(0b10, 2), 0b10);
    }
}
