use std::fmt::Write;

use super::count::expand_mcx;
use super::gate::{Circuit, GateKind};
use super::synth::{MeasurementSpec, PauliAxis};

fn header(s: &mut String, width: usize) {
    s.push_str("OPENQASM 2.0;\ninclude \"qelib1.inc\";\n");
    let _ = writeln!(s, "qreg q[{width}];");
}

fn body(s: &mut String, c: &Circuit) {
    for g in &c.gates {
        let q: Vec<String> = g
            .controls
            .iter()
            .map(|c| c.qubit)
            .chain(std::iter::once(g.target))
            .map(|q| format!("q[{q}]"))
            .collect();
        let name = match g.kind {
            GateKind::X => "x",
            GateKind::H => "h",
            GateKind::S => "s",
            GateKind::Sdg => "sdg",
            GateKind::Cx => "cx",
            GateKind::Ccx => "ccx",
            GateKind::Mcx => unreachable!("expand_mcx leaves no MCX"),
        };
        let _ = writeln!(s, "{name} {};", q.join(","));
    }
}

/// OpenQASM 2.0 text for `c` after [`expand_mcx`]; ancillas follow the data
/// qubits in the single register.
pub fn to_qasm(c: &Circuit) -> String {
    let e = expand_mcx(c);
    let mut s = String::new();
    header(&mut s, e.width());
    body(&mut s, &e);
    s
}

/// The full measurement: permutation circuit, basis change for the Pauli
/// layer (`h` for X, `sdg; h` for Y) and measurement of the data qubits
/// into `c[0..n]`.
pub fn measurement_qasm(spec: &MeasurementSpec) -> String {
    let e = expand_mcx(&spec.circuit);
    let mut s = String::new();
    header(&mut s, e.width());
    let _ = writeln!(s, "creg c[{}];", e.n_qubits);
    body(&mut s, &e);
    for (q, axis) in spec.layer.iter().enumerate() {
        match axis {
            PauliAxis::Z => {}
            PauliAxis::X => {
                let _ = writeln!(s, "h q[{q}];");
            }
            PauliAxis::Y => {
                let _ = writeln!(s, "sdg q[{q}];\nh q[{q}];");
            }
        }
    }
    for q in 0..e.n_qubits {
        let _ = writeln!(s, "measure q[{q}] -> c[{q}];");
    }
    s
}
