use num_complex::Complex64 as C64;
use proptest::prelude::*;

use ddb_core::bases::{family, BasisLabel};
use ddb_core::circuits::{
    element_circuits, expand_mcx, measured_vectors, permutation_table, power_shift_circuit, Circuit, Control, Gate,
    PowerMode,
};
use ddb_core::linalg::{eigh, project_density, project_simplex, random_rank_r_dm, ComplexMatrix};
use ddb_core::partitions::{construct_partitions, verify_cover};
use ddb_core::reconstruct::{direct_full_with, element_direct, DirectOptions};
use ddb_core::simulator::{family_probs, sample_counts, ProbVector};

fn hermitian(d: usize) -> impl Strategy<Value = ComplexMatrix> {
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), d * d).prop_map(move |v| {
        let m = ComplexMatrix::from_vec(d, d, v.into_iter().map(|(a, b)| C64::new(a, b)).collect()).unwrap();
        m.hermitian_part()
    })
}

fn mode() -> impl Strategy<Value = PowerMode> {
    prop_oneof![Just(PowerMode::Binary), Just(PowerMode::SignedDigit)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn partitions_cover_exactly(d in 2usize..200) {
        let ps = construct_partitions(d).unwrap();
        prop_assert!(verify_cover(&ps).ok);
        for p in &ps.partitions {
            prop_assert_eq!(p.singletons.len(), d % 2);
        }
    }

    #[test]
    fn simplex_projection(v in prop::collection::vec(-3.0f64..3.0, 1..20)) {
        let p = project_simplex(&v);
        prop_assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        prop_assert!(p.iter().all(|&x| x >= 0.0));
        let again = project_simplex(&p);
        prop_assert!(p.iter().zip(&again).all(|(a, b)| (a - b).abs() < 1e-12));
    }

    #[test]
    fn density_projection_is_physical(m in (2usize..7).prop_flat_map(hermitian)) {
        let rho = project_density(&m).unwrap();
        let x = rho.matrix();
        prop_assert!((x.trace().re - 1.0).abs() < 1e-10);
        prop_assert!(x.hermiticity_defect() < 1e-12);
        prop_assert!(eigh(x).unwrap().eigenvalues[0] > -1e-10);
    }

    #[test]
    fn direct_recovers_any_state(d in 2usize..11, r in 1usize..11, seed in any::<u64>()) {
        let rho = random_rank_r_dm(d, r.min(d), seed).unwrap();
        let fam = family(d).unwrap();
        let rep = direct_full_with(&fam, &family_probs(&rho, &fam).unwrap(), DirectOptions::default()).unwrap();
        prop_assert!((&rep.estimate - rho.matrix()).frobenius_norm() < 1e-9);
    }

    #[test]
    fn sampled_counts_total(p in prop::collection::vec(0.0f64..1.0, 1..10), shots in 1u64..5000, seed in any::<u64>()) {
        prop_assume!(p.iter().sum::<f64>() > 1e-3);
        let s: f64 = p.iter().sum();
        let pv = ProbVector::new(p.iter().map(|x| x / s).collect()).unwrap();
        let c = sample_counts(&pv, shots, seed).unwrap();
        prop_assert_eq!(c.counts.iter().sum::<u64>(), shots);
        for (k, &x) in c.counts.iter().zip(pv.as_slice()) {
            if x == 0.0 {
                prop_assert_eq!(*k, 0);
            }
        }
    }

    #[test]
    fn power_shift_decrements((l, j) in (1usize..11).prop_flat_map(|l| (Just(l), 1usize..1 << l)), mode in mode()) {
        let m = 1usize << l;
        let t = permutation_table(&power_shift_circuit(l, j as u64, mode).unwrap()).unwrap();
        prop_assert!((0..m).all(|x| t[x] == (x + m - j) % m));
    }

    #[test]
    fn mcx_expansion_preserves_action(
        target in 0usize..6,
        ctl in prop::collection::vec((0usize..6, any::<bool>()), 0..6),
    ) {
        let mut controls: Vec<Control> = Vec::new();
        for (q, open) in ctl {
            if q != target && controls.iter().all(|c| c.qubit != q) {
                controls.push(if open { Control::open(q) } else { Control::closed(q) });
            }
        }
        let mut c = Circuit::new(6);
        c.push(Gate::controlled_x(target, controls));
        let e = expand_mcx(&c);
        let (orig, exp) = (permutation_table(&c).unwrap(), permutation_table(&e).unwrap());
        let a = e.n_ancillas;
        prop_assert!((0..64).all(|x| exp[x << a] == orig[x] << a));
    }

    #[test]
    fn gate_text_roundtrip(target in 0usize..8, ctl in prop::collection::vec((0usize..8, any::<bool>()), 0..4)) {
        let mut controls: Vec<Control> = Vec::new();
        for (q, open) in ctl {
            if q != target && controls.iter().all(|c| c.qubit != q) {
                controls.push(if open { Control::open(q) } else { Control::closed(q) });
            }
        }
        let g = Gate::controlled_x(target, controls);
        prop_assert_eq!(g.to_string().parse::<Gate>().unwrap(), g);
    }

    #[test]
    fn element_circuits_extract_element(n in 1usize..5, a in any::<usize>(), b in any::<usize>(), seed in any::<u64>()) {
        let d = 1usize << n;
        let (j, k) = (a % d, b % d);
        prop_assume!(j != k);
        let (j, k) = (j.min(k), j.max(k));
        let rho = random_rank_r_dm(d, 2.min(d), seed).unwrap();
        let e = element_circuits(n, j, k, PowerMode::Binary).unwrap();
        let prob = |spec, b: usize| {
            let v = measured_vectors(spec).unwrap().column(b);
            let w = rho.matrix().matvec(&v);
            v.iter().zip(&w).map(|(x, y)| x.conj() * y).sum::<C64>().re
        };
        let est = element_direct(
            prob(&e.phi, e.outcomes.phi_plus),
            prob(&e.psi, e.outcomes.psi_plus),
            prob(&e.diag, e.outcomes.diag_j),
            prob(&e.diag, e.outcomes.diag_k),
        );
        prop_assert!((est - rho.get(j, k)).norm() < 1e-12);
        // the minus outcomes carry the rest of the pair's weight
        let pair = prob(&e.phi, e.outcomes.phi_plus) + prob(&e.phi, e.outcomes.phi_minus);
        prop_assert!((pair - rho.get(j, j).re - rho.get(k, k).re).abs() < 1e-12);
    }

    #[test]
    fn label_text_roundtrip(t in 1usize..500, imag in any::<bool>()) {
        let l = if imag { BasisLabel::C(t) } else { BasisLabel::B(t) };
        prop_assert_eq!(l.to_string().parse::<BasisLabel>().unwrap(), l);
    }
}
