//! Measurement circuits for `d = 2^n`: shift-power permutations, a
//! single-qubit Pauli layer, Toffoli expansion and text emission.

mod count;
mod emit;
mod gate;
mod simulate;
mod synth;

pub use count::{expand_mcx, gate_count, is_elementary, CountModel, GateCount, BARENCO_COEFFICIENT};
pub use emit::{measurement_qasm, to_qasm};
pub use gate::{Circuit, Control, Gate, GateKind, Polarity};
pub use simulate::{ancillas_restored, measured_vectors, permutation_table, simulate_unitary, PERMUTATION_LIMIT, UNITARY_LIMIT};
pub use synth::{
    basis_permutation_circuit, decrement_gates, element_circuits, increment_gates, naf_digits, power_shift_circuit,
    shift_circuit, shift_power_gates, synth_basis_circuit, synth_basis_circuit_with, ElementCircuits, ElementOutcomes,
    MeasurementSpec, PauliAxis, PowerMode,
};
