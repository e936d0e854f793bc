//! Measurement circuits for the power-of-two bases.
//!
//! Qubit 0 is the most significant bit of a basis index. For label `B_t` or
//! `C_t` with `t` of bit length `k`, the active qubit is `s = n − k` and the
//! circuit is the shift `(U_{k−1})^j`, `j = t − 2^{k−1}`, on qubits
//! `s+1..n`, controlled on qubit `s`. Measuring X (for `B_t`) or Y (for
//! `C_t`) on qubit `s` and Z elsewhere afterwards realizes the basis.
//!
//! `U_l` is the cyclic decrement `|m> -> |m − 1 mod 2^l>`. The controlled
//! block therefore maps the suffix of `k` to the suffix of `j` for every
//! pair `(j, k)` of the partition; equivalently its inverse, the increment,
//! carries the `j` suffix to the `k` suffix.

use serde::{Deserialize, Serialize};

use super::gate::{Circuit, Control, Gate};
use crate::bases::{family, BasisLabel, DdbFamily, VectorKind};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PowerMode {
    /// One decrement block per set bit of the exponent.
    #[default]
    Binary,
    /// Non-adjacent form: fewer blocks, negative digits use increments.
    SignedDigit,
}

impl std::str::FromStr for PowerMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "binary" => Ok(PowerMode::Binary),
            "signed-digit" => Ok(PowerMode::SignedDigit),
            _ => Err(Error::invalid(format!("unknown mode `{s}` (binary or signed-digit)"))),
        }
    }
}

/// Single-qubit measurement axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PauliAxis {
    Z,
    X,
    Y,
}

/// A circuit, the per-qubit measurement axes to apply after it, and the
/// map from measured bitstring to the basis' canonical outcome index.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasurementSpec {
    pub label: BasisLabel,
    pub circuit: Circuit,
    pub layer: Vec<PauliAxis>,
    /// `outcome_map[b]` is the basis outcome for bitstring `b`.
    pub outcome_map: Vec<usize>,
}

impl MeasurementSpec {
    pub fn layer_string(&self) -> String {
        self.layer
            .iter()
            .map(|a| match a {
                PauliAxis::Z => 'Z',
                PauliAxis::X => 'X',
                PauliAxis::Y => 'Y',
            })
            .collect()
    }

    /// Qubit carrying X or Y, if any.
    pub fn active_qubit(&self) -> Option<usize> {
        self.layer.iter().position(|a| *a != PauliAxis::Z)
    }
}

/// Decrement cascade on `qubits` (most significant first): multi-controlled
/// X on each qubit with every less significant qubit as an open control,
/// from the top down, ending with X on the least significant qubit.
pub fn decrement_gates(qubits: &[usize]) -> Vec<Gate> {
    (0..qubits.len())
        .map(|i| Gate::controlled_x(qubits[i], qubits[i + 1..].iter().map(|&q| Control::open(q)).collect()))
        .collect()
}

/// The inverse cascade, `|m> -> |m + 1 mod 2^l>`.
pub fn increment_gates(qubits: &[usize]) -> Vec<Gate> {
    let mut g = decrement_gates(qubits);
    g.reverse();
    g
}

pub fn shift_circuit(l: usize) -> Result<Circuit> {
    if l == 0 {
        return Err(Error::invalid("shift needs at least one qubit"));
    }
    let qubits: Vec<usize> = (0..l).collect();
    Ok(Circuit {
        n_qubits: l,
        n_ancillas: 0,
        gates: decrement_gates(&qubits),
    })
}

/// Non-adjacent form of `j`, least significant digit first.
pub fn naf_digits(mut j: u64) -> Vec<i8> {
    let mut out = Vec::new();
    while j > 0 {
        if j & 1 == 1 {
            let d: i8 = if j & 3 == 3 { -1 } else { 1 };
            out.push(d);
            if d == 1 {
                j -= 1;
            } else {
                j += 1;
            }
        } else {
            out.push(0);
        }
        j >>= 1;
    }
    out
}

/// Gates for `(U_l)^j` on `qubits` (most significant first).
pub fn shift_power_gates(qubits: &[usize], j: u64, mode: PowerMode) -> Vec<Gate> {
    let l = qubits.len();
    let mut gates = Vec::new();
    match mode {
        PowerMode::Binary => {
            for b in 0..l {
                if (j >> b) & 1 == 1 {
                    // (U_l)^{2^b} is U_{l−b} on the top l−b qubits.
                    gates.extend(decrement_gates(&qubits[..l - b]));
                }
            }
        }
        PowerMode::SignedDigit => {
            for (b, &d) in naf_digits(j).iter().enumerate() {
                if b >= l || d == 0 {
                    continue;
                }
                if d > 0 {
                    gates.extend(decrement_gates(&qubits[..l - b]));
                } else {
                    gates.extend(increment_gates(&qubits[..l - b]));
                }
            }
        }
    }
    gates
}

pub fn power_shift_circuit(l: usize, j: u64, mode: PowerMode) -> Result<Circuit> {
    if l == 0 || l >= 64 || j == 0 || j >= (1u64 << l) {
        return Err(Error::invalid(format!("power {j} outside 1..2^{l}")));
    }
    let qubits: Vec<usize> = (0..l).collect();
    Ok(Circuit {
        n_qubits: l,
        n_ancillas: 0,
        gates: shift_power_gates(&qubits, j, mode),
    })
}

fn check_label(n: usize, label: BasisLabel) -> Result<()> {
    if n == 0 || n > 20 {
        return Err(Error::invalid(format!("qubit count {n} outside 1..=20")));
    }
    if let Some(t) = label.partition_index() {
        if t == 0 || t >= (1usize << n) {
            return Err(Error::InvalidLabel(format!("{label} for {n} qubits")));
        }
    }
    Ok(())
}

/// Active qubit `s` and shift power for `B_t`/`C_t`.
fn level(n: usize, t: usize) -> (usize, u64) {
    let k = (usize::BITS - t.leading_zeros()) as usize;
    (n - k, (t - (1 << (k - 1))) as u64)
}

/// Permutation part of the measurement for `label`.
pub fn basis_permutation_circuit(n: usize, label: BasisLabel, mode: PowerMode) -> Result<Circuit> {
    check_label(n, label)?;
    let mut c = Circuit::new(n);
    if let Some(t) = label.partition_index() {
        let (s, j) = level(n, t);
        if j > 0 {
            let lower: Vec<usize> = (s + 1..n).collect();
            c.gates = shift_power_gates(&lower, j, mode)
                .into_iter()
                .map(|g| g.with_control(s))
                .collect();
        }
    }
    Ok(c)
}

pub fn synth_basis_circuit(n: usize, label: BasisLabel, mode: PowerMode) -> Result<MeasurementSpec> {
    check_label(n, label)?;
    if n > 16 {
        return Err(Error::SizeCap { qubits: n, limit: 16 });
    }
    synth_basis_circuit_with(&family(1 << n)?, label, mode)
}

/// As [`synth_basis_circuit`] with a prebuilt family for `d = 2^n`.
pub fn synth_basis_circuit_with(fam: &DdbFamily, label: BasisLabel, mode: PowerMode) -> Result<MeasurementSpec> {
    let d = fam.dim;
    if !d.is_power_of_two() || d < 2 {
        return Err(Error::InvalidDimension {
            dim: d,
            reason: "circuits need a power of two",
        });
    }
    let n = d.trailing_zeros() as usize;
    let circuit = basis_permutation_circuit(n, label, mode)?;
    let mut layer = vec![PauliAxis::Z; n];
    let outcome_map = match label.partition_index() {
        None => (0..d).collect(),
        Some(t) => {
            let (s, _) = level(n, t);
            let (axis, plus, minus) = match label {
                BasisLabel::C(_) => (PauliAxis::Y, VectorKind::PsiPlus, VectorKind::PsiMinus),
                _ => (PauliAxis::X, VectorKind::PhiPlus, VectorKind::PhiMinus),
            };
            layer[s] = axis;
            let bit = 1usize << (n - 1 - s);
            (0..d)
                .map(|b| {
                    let x0 = circuit.apply_classical_inverse(b & !bit);
                    let x1 = circuit.apply_classical_inverse(b | bit);
                    debug_assert!(x0 < x1);
                    let kind = if b & bit == 0 { plus } else { minus };
                    let (found, outcome) = fam.locate(kind, x0, x1)?;
                    if found != label {
                        return Err(Error::invalid(format!(
                            "internal: bitstring {b} of {label} lands in {found}"
                        )));
                    }
                    Ok(outcome)
                })
                .collect::<Result<Vec<_>>>()?
        }
    };
    Ok(MeasurementSpec {
        label,
        circuit,
        layer,
        outcome_map,
    })
}

/// The three measurements that determine one element `ρ_jk`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ElementCircuits {
    pub n: usize,
    pub j: usize,
    pub k: usize,
    /// First differing bit, 1-based from the most significant.
    pub s: usize,
    /// `(k_suffix − j_suffix) mod 2^{n−s}`.
    pub shift: u64,
    pub diag: MeasurementSpec,
    pub phi: MeasurementSpec,
    pub psi: MeasurementSpec,
    /// Bitstrings whose probabilities feed the element formula.
    pub outcomes: ElementOutcomes,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ElementOutcomes {
    pub diag_j: usize,
    pub diag_k: usize,
    pub phi_plus: usize,
    pub phi_minus: usize,
    pub psi_plus: usize,
    pub psi_minus: usize,
}

pub fn element_circuits(n: usize, j: usize, k: usize, mode: PowerMode) -> Result<ElementCircuits> {
    if n == 0 || n > 16 {
        return Err(Error::invalid(format!("qubit count {n} outside 1..=16")));
    }
    let d = 1usize << n;
    if j >= k || k >= d {
        return Err(Error::invalid(format!("need 0 <= j < k < {d}, got j={j}, k={k}")));
    }
    let diff = j ^ k;
    let top = (usize::BITS - 1 - diff.leading_zeros()) as usize; // bit position from the LSB
    let s = n - top; // 1-based from the MSB
    let modulus = 1u64 << (n - s);
    let mask = (modulus - 1) as usize;
    let shift = ((k & mask) as u64 + modulus - (j & mask) as u64) % modulus;
    let t = (1usize << (n - s)) + shift as usize;
    let fam = family(d)?;
    let diag = synth_basis_circuit_with(&fam, BasisLabel::B0, mode)?;
    let phi = synth_basis_circuit_with(&fam, BasisLabel::B(t), mode)?;
    let psi = synth_basis_circuit_with(&fam, BasisLabel::C(t), mode)?;
    let bit = 1usize << (n - s);
    let outcomes = ElementOutcomes {
        diag_j: j,
        diag_k: k,
        phi_plus: j,
        phi_minus: j | bit,
        psi_plus: j,
        psi_minus: j | bit,
    };
    Ok(ElementCircuits {
        n,
        j,
        k,
        s,
        shift,
        diag,
        phi,
        psi,
        outcomes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuits::gate::GateKind;

    #[test]
    fn shift_examples() {
        let c1 = shift_circuit(1).unwrap();
        assert_eq!(c1.gates, vec![Gate::single(GateKind::X, 0)]);
        let c2 = shift_circuit(2).unwrap();
        assert_eq!(c2.apply_classical(0), 3);
        let c3 = shift_circuit(3).unwrap();
        assert_eq!(
            c3.gates,
            vec![
                Gate::controlled_x(0, vec![Control::open(1), Control::open(2)]),
                Gate::controlled_x(1, vec![Control::open(2)]),
                Gate::single(GateKind::X, 2),
            ]
        );
        for m in 0..8 {
            assert_eq!(c3.apply_classical(m), (m + 7) % 8);
        }
        assert!(shift_circuit(0).is_err());
    }

    #[test]
    fn power_examples() {
        let c = power_shift_circuit(3, 4, PowerMode::Binary).unwrap();
        assert_eq!(c.gates, vec![Gate::single(GateKind::X, 0)]);
        let bin = power_shift_circuit(3, 7, PowerMode::Binary).unwrap();
        let naf = power_shift_circuit(3, 7, PowerMode::SignedDigit).unwrap();
        assert_eq!(bin.gates.len(), 3 + 2 + 1);
        assert_eq!(naf.gates, increment_gates(&[0, 1, 2]));
        let c = power_shift_circuit(2, 3, PowerMode::Binary).unwrap();
        assert_eq!(c.apply_classical(1), 2);
        assert!(power_shift_circuit(2, 4, PowerMode::Binary).is_err());
        assert!(power_shift_circuit(2, 0, PowerMode::Binary).is_err());
    }

    #[test]
    fn naf() {
        assert_eq!(naf_digits(7), vec![-1, 0, 0, 1]);
        assert_eq!(naf_digits(5), vec![1, 0, 1]);
        for j in 1..2000u64 {
            let digits = naf_digits(j);
            let v: i64 = digits.iter().enumerate().map(|(b, &d)| d as i64 * (1i64 << b)).sum();
            assert_eq!(v, j as i64);
            assert!(digits.windows(2).all(|w| w[0] == 0 || w[1] == 0));
        }
    }

    #[test]
    fn two_qubit_circuits() {
        let b1 = synth_basis_circuit(2, BasisLabel::B(1), PowerMode::Binary).unwrap();
        assert!(b1.circuit.gates.is_empty());
        assert_eq!(b1.layer_string(), "ZX");
        let b2 = synth_basis_circuit(2, BasisLabel::B(2), PowerMode::Binary).unwrap();
        assert!(b2.circuit.gates.is_empty());
        assert_eq!(b2.layer_string(), "XZ");
        let b3 = synth_basis_circuit(2, BasisLabel::B(3), PowerMode::Binary).unwrap();
        assert_eq!(b3.circuit.gates, vec![Gate::cx(0, 1)]);
        assert_eq!(b3.layer_string(), "XZ");
        assert_eq!(b3.outcome_map, vec![0, 2, 1, 3]);

        let c1 = synth_basis_circuit(1, BasisLabel::C(1), PowerMode::Binary).unwrap();
        assert_eq!(c1.layer_string(), "Y");
        assert!(synth_basis_circuit(2, BasisLabel::B(4), PowerMode::Binary).is_err());
    }

    #[test]
    fn element_examples() {
        let e = element_circuits(3, 2, 5, PowerMode::Binary).unwrap();
        assert_eq!((e.s, e.shift), (1, 3));
        let e = element_circuits(2, 0, 3, PowerMode::Binary).unwrap();
        assert_eq!((e.s, e.shift), (1, 1));
        assert_eq!(e.phi.label, BasisLabel::B(3));
        let e = element_circuits(3, 4, 5, PowerMode::Binary).unwrap();
        assert_eq!((e.s, e.shift), (3, 0));
        assert!(e.phi.circuit.gates.is_empty());
        assert!(element_circuits(2, 3, 3, PowerMode::Binary).is_err());
    }
}
