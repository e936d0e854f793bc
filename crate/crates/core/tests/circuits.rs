use std::collections::BTreeSet;

use ddb_core::bases::{family, BasisLabel};
use ddb_core::circuits::{
    ancillas_restored, element_circuits, expand_mcx, gate_count, is_elementary, measured_vectors, permutation_table,
    power_shift_circuit, synth_basis_circuit_with, CountModel, PowerMode,
};

const MODES: [PowerMode; 2] = [PowerMode::Binary, PowerMode::SignedDigit];

#[test]
fn measured_vectors_match_family() {
    for n in 1..=5usize {
        let fam = family(1 << n).unwrap();
        for label in fam.labels() {
            for mode in MODES {
                let spec = synth_basis_circuit_with(&fam, label, mode).unwrap();
                let v = measured_vectors(&spec).unwrap();
                let basis = fam.basis(label).unwrap();
                for (b, &idx) in spec.outcome_map.iter().enumerate() {
                    let want = basis.vectors[idx].to_dense();
                    for (r, w) in want.iter().enumerate() {
                        assert!((v[(r, b)] - w).norm() < 1e-12, "n={n} {label} {mode:?} b={b}");
                    }
                }
            }
        }
    }
}

#[test]
fn power_shift_exhaustive() {
    for l in 1..=8usize {
        let m = 1usize << l;
        for j in 1..m {
            for mode in MODES {
                let t = permutation_table(&power_shift_circuit(l, j as u64, mode).unwrap()).unwrap();
                assert!((0..m).all(|x| t[x] == (x + m - j) % m), "l={l} j={j} {mode:?}");
            }
        }
    }
}

#[test]
fn expansion_preserves_action() {
    for n in 2..=6usize {
        let fam = family(1 << n).unwrap();
        for t in 1..(1 << n) {
            let spec = synth_basis_circuit_with(&fam, BasisLabel::B(t), PowerMode::Binary).unwrap();
            let e = expand_mcx(&spec.circuit);
            assert!(is_elementary(&e));
            assert!(ancillas_restored(&e).unwrap(), "n={n} t={t}");
            let orig = permutation_table(&spec.circuit).unwrap();
            let exp = permutation_table(&e).unwrap();
            let a = e.n_ancillas;
            assert!((0..1 << n).all(|x| exp[x << a] == orig[x] << a));
        }
    }
}

#[test]
fn counts_bounded_and_signed_digit_no_worse() {
    for n in 2..=8usize {
        let fam = family(1 << n).unwrap();
        let bound = 16 * n.pow(4);
        let mut worst = 0;
        for t in 1..(1 << n) {
            let label = BasisLabel::B(t);
            let bin = gate_count(&synth_basis_circuit_with(&fam, label, PowerMode::Binary).unwrap().circuit, CountModel::Expanded);
            let naf = gate_count(&synth_basis_circuit_with(&fam, label, PowerMode::SignedDigit).unwrap().circuit, CountModel::Expanded);
            assert!(naf.total <= bin.total, "n={n} t={t}: {} > {}", naf.total, bin.total);
            worst = worst.max(bin.total);
        }
        assert!(worst <= bound, "n={n}: {worst} > {bound}");
    }
}

#[test]
fn element_circuit_types() {
    for n in 1..=5usize {
        let d = 1usize << n;
        let mut circuits = BTreeSet::new();
        for j in 0..d {
            for k in j + 1..d {
                let e = element_circuits(n, j, k, PowerMode::Binary).unwrap();
                circuits.insert(e.phi.circuit.to_gate_list());
            }
        }
        assert!(circuits.len() < d, "n={n}: {}", circuits.len());
    }
}
