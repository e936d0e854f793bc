use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::gate::{Circuit, Gate, GateKind, Polarity};

/// Leading coefficient of the quadratic cost model for an `m`-control
/// Toffoli synthesized without ancillas (`c_B · m^2` elementary gates).
pub const BARENCO_COEFFICIENT: usize = 48;

/// Rewrites every controlled gate over {X, H, S, SDG, CX, CCX}: open
/// controls become X-conjugated closed controls and gates with `m >= 3`
/// controls become a Toffoli ladder through `m − 2` clean ancillas, which
/// are appended after the existing qubits and restored.
pub fn expand_mcx(c: &Circuit) -> Circuit {
    let base = c.width();
    let needed = c
        .gates
        .iter()
        .map(|g| g.controls.len().saturating_sub(2))
        .max()
        .unwrap_or(0);
    let mut out = Circuit {
        n_qubits: c.n_qubits,
        n_ancillas: c.n_ancillas + needed,
        gates: Vec::new(),
    };
    for g in &c.gates {
        if !g.kind.is_classical() {
            out.push(g.clone());
            continue;
        }
        let flips: Vec<usize> = g
            .controls
            .iter()
            .filter(|c| c.polarity == Polarity::Open)
            .map(|c| c.qubit)
            .collect();
        for &q in &flips {
            out.push(Gate::single(GateKind::X, q));
        }
        let ctl: Vec<usize> = g.controls.iter().map(|c| c.qubit).collect();
        match ctl.len() {
            0 => out.push(Gate::single(GateKind::X, g.target)),
            1 => out.push(Gate::cx(ctl[0], g.target)),
            2 => out.push(Gate::ccx(ctl[0], ctl[1], g.target)),
            m => {
                let anc: Vec<usize> = (base..base + m - 2).collect();
                let mut ladder = vec![Gate::ccx(ctl[0], ctl[1], anc[0])];
                for i in 2..m - 1 {
                    ladder.push(Gate::ccx(ctl[i], anc[i - 2], anc[i - 1]));
                }
                out.gates.extend(ladder.iter().cloned());
                out.push(Gate::ccx(ctl[m - 1], anc[m - 3], g.target));
                out.gates.extend(ladder.into_iter().rev());
            }
        }
        for &q in &flips {
            out.push(Gate::single(GateKind::X, q));
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CountModel {
    /// Literal gate count after [`expand_mcx`].
    #[default]
    Expanded,
    /// Ancilla-free estimate: `c_B · m^2` per gate with `m >= 3` controls.
    BarencoEstimate,
}

impl std::str::FromStr for CountModel {
    type Err = crate::error::Error;

    fn from_str(s: &str) -> crate::error::Result<Self> {
        match s {
            "expanded" => Ok(CountModel::Expanded),
            "barenco-estimate" | "barenco" => Ok(CountModel::BarencoEstimate),
            _ => Err(crate::error::Error::invalid(format!("unknown count model `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GateCount {
    pub model: CountModel,
    pub total: usize,
    pub by_kind: BTreeMap<String, usize>,
    pub ancillas: usize,
    /// Gates in the circuit as given, before any expansion.
    pub input_gates: usize,
}

pub fn gate_count(c: &Circuit, model: CountModel) -> GateCount {
    let mut by_kind = BTreeMap::new();
    let (total, ancillas) = match model {
        CountModel::Expanded => {
            let e = expand_mcx(c);
            for g in &e.gates {
                *by_kind.entry(g.kind.name().to_string()).or_insert(0) += 1;
            }
            (e.gates.len(), e.n_ancillas)
        }
        CountModel::BarencoEstimate => {
            let mut total = 0;
            for g in &c.gates {
                let open = g.controls.iter().filter(|c| c.polarity == Polarity::Open).count();
                let m = g.controls.len();
                let (name, cost) = match m {
                    0 => (g.kind.name(), 1),
                    1 => ("CX", 1),
                    2 => ("CCX", 1),
                    _ => ("MCX", BARENCO_COEFFICIENT * m * m),
                };
                *by_kind.entry(name.to_string()).or_insert(0) += cost;
                if open > 0 && g.kind.is_classical() {
                    *by_kind.entry("X".to_string()).or_insert(0) += 2 * open;
                }
                total += cost + if g.kind.is_classical() { 2 * open } else { 0 };
            }
            (total, c.n_ancillas)
        }
    };
    GateCount {
        model,
        total,
        by_kind,
        ancillas,
        input_gates: c.gates.len(),
    }
}

/// True if `c` only uses gates a QASM backend accepts directly.
pub fn is_elementary(c: &Circuit) -> bool {
    c.gates.iter().all(|g| g.kind != GateKind::Mcx)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuits::gate::Control;
    use crate::circuits::simulate::{ancillas_restored, permutation_table};
    use crate::circuits::synth::shift_circuit;

    #[test]
    fn passthrough_and_open_controls() {
        let mut c = Circuit::new(3);
        c.push(Gate::ccx(0, 1, 2));
        assert_eq!(expand_mcx(&c).gates, c.gates);

        let mut c = Circuit::new(2);
        c.push(Gate::controlled_x(1, vec![Control::open(0)]));
        assert_eq!(
            expand_mcx(&c).gates,
            vec![Gate::single(GateKind::X, 0), Gate::cx(0, 1), Gate::single(GateKind::X, 0)]
        );
    }

    #[test]
    fn three_control_ladder() {
        let mut c = Circuit::new(4);
        c.push(Gate::controlled_x(3, vec![Control::closed(0), Control::closed(1), Control::closed(2)]));
        let e = expand_mcx(&c);
        assert_eq!(e.n_ancillas, 1);
        assert_eq!(e.gates.len(), 3);
        assert!(e.gates.iter().all(|g| g.kind == GateKind::Ccx));
        let orig = permutation_table(&c).unwrap();
        let exp = permutation_table(&e).unwrap();
        for x in 0..16 {
            assert_eq!(exp[x << 1], orig[x] << 1);
        }
        assert!(ancillas_restored(&e).unwrap());
    }

    #[test]
    fn shift_counts() {
        assert_eq!(gate_count(&shift_circuit(1).unwrap(), CountModel::Expanded).total, 1);
        // U_3: MCX(2 open) -> 4 X + CCX, MCX(1 open) -> 2 X + CX, X
        let c = gate_count(&shift_circuit(3).unwrap(), CountModel::Expanded);
        assert_eq!(c.total, 5 + 3 + 1);
        assert_eq!(c.by_kind["CCX"], 1);
        assert_eq!(c.ancillas, 0);
    }
}
