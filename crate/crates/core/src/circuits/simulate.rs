use num_complex::Complex64 as C64;

use super::gate::{Circuit, GateKind};
use super::synth::{MeasurementSpec, PauliAxis};
use crate::error::{Error, Result};
use crate::linalg::ComplexMatrix;

pub const PERMUTATION_LIMIT: usize = 16;
pub const UNITARY_LIMIT: usize = 8;

const H: f64 = std::f64::consts::FRAC_1_SQRT_2;

/// `table[x]` is the image of basis state `x` over all qubits, ancillas included.
pub fn permutation_table(c: &Circuit) -> Result<Vec<usize>> {
    let w = c.width();
    if w > PERMUTATION_LIMIT {
        return Err(Error::SizeCap {
            qubits: w,
            limit: PERMUTATION_LIMIT,
        });
    }
    if !c.is_classical() {
        return Err(Error::invalid("circuit is not a permutation (contains H/S/SDG)"));
    }
    c.validate()?;
    Ok((0..1usize << w).map(|x| c.apply_classical(x)).collect())
}

/// Checks that every input with clean ancillas leaves them clean.
pub fn ancillas_restored(c: &Circuit) -> Result<bool> {
    let table = permutation_table(c)?;
    let a = c.n_ancillas;
    let mask = (1usize << a) - 1;
    Ok((0..1usize << c.n_qubits).all(|x| table[x << a] & mask == 0))
}

fn apply_gate(state: &mut [C64], g: &super::gate::Gate, width: usize) {
    let bit = |q: usize| 1usize << (width - 1 - q);
    match g.kind {
        k if k.is_classical() => {
            let mut next = vec![C64::new(0.0, 0.0); state.len()];
            for (x, &amp) in state.iter().enumerate() {
                next[g.apply_classical(x, width)] += amp;
            }
            state.copy_from_slice(&next);
        }
        GateKind::H => {
            let b = bit(g.target);
            for x in 0..state.len() {
                if x & b == 0 {
                    let (a0, a1) = (state[x], state[x | b]);
                    state[x] = (a0 + a1) * H;
                    state[x | b] = (a0 - a1) * H;
                }
            }
        }
        GateKind::S | GateKind::Sdg => {
            let b = bit(g.target);
            let ph = if g.kind == GateKind::S {
                C64::new(0.0, 1.0)
            } else {
                C64::new(0.0, -1.0)
            };
            for (x, amp) in state.iter_mut().enumerate() {
                if x & b != 0 {
                    *amp *= ph;
                }
            }
        }
        _ => unreachable!(),
    }
}

/// Action of the circuit on the data register (ancillas start and must end
/// in |0>), as a `2^n x 2^n` matrix.
pub fn simulate_unitary(c: &Circuit) -> Result<ComplexMatrix> {
    let w = c.width();
    if w > UNITARY_LIMIT {
        return Err(Error::SizeCap {
            qubits: w,
            limit: UNITARY_LIMIT,
        });
    }
    c.validate()?;
    let a = c.n_ancillas;
    let dim = 1usize << c.n_qubits;
    let mut u = ComplexMatrix::zeros(dim, dim);
    for col in 0..dim {
        let mut state = vec![C64::new(0.0, 0.0); 1 << w];
        state[col << a] = C64::new(1.0, 0.0);
        for g in &c.gates {
            apply_gate(&mut state, g, w);
        }
        for (x, amp) in state.iter().enumerate() {
            if x & ((1 << a) - 1) != 0 {
                if amp.norm() > 1e-12 {
                    return Err(Error::invalid("ancilla left entangled or dirty"));
                }
                continue;
            }
            u[(x >> a, col)] = *amp;
        }
    }
    Ok(u)
}

fn axis_matrix(axis: PauliAxis) -> ComplexMatrix {
    match axis {
        PauliAxis::Z => ComplexMatrix::identity(2),
        PauliAxis::X => ComplexMatrix::from_vec(2, 2, vec![C64::new(H, 0.0), C64::new(H, 0.0), C64::new(H, 0.0), C64::new(-H, 0.0)]).unwrap(),
        // columns: eigenvectors (|0> + i|1>)/√2 and (|0> − i|1>)/√2
        PauliAxis::Y => ComplexMatrix::from_vec(2, 2, vec![C64::new(H, 0.0), C64::new(H, 0.0), C64::new(0.0, H), C64::new(0.0, -H)]).unwrap(),
    }
}

/// Matrix whose column `b` is the state measured by bitstring `b`: the
/// circuit inverse applied to the layer eigenvectors.
pub fn measured_vectors(spec: &MeasurementSpec) -> Result<ComplexMatrix> {
    let u = simulate_unitary(&spec.circuit)?;
    let mut layer = ComplexMatrix::identity(1);
    for &axis in &spec.layer {
        layer = layer.kron(&axis_matrix(axis));
    }
    Ok(&u.adjoint() * &layer)
}
