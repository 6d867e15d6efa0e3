use num_complex::Complex64;
use proptest::prelude::*;

use ineqprep::arithmetic::{compare_flag, multiply_permutation, FunctionTablePair};
use ineqprep::layout::RegisterLayout;
use ineqprep::permutation::BasisPermutation;
use ineqprep::prep::{counting_oracle_general, counting_oracle_inverse};
use ineqprep::statevector::Statevector;

fn layout() -> RegisterLayout {
    RegisterLayout::from_widths([("x", 2), ("y", 3), ("z", 2)]).unwrap()
}

fn state_from(parts: &[(f64, f64)]) -> Statevector {
    let amps = parts.iter().map(|&(re, im)| Complex64::new(re, im)).collect();
    Statevector::from_amplitudes(layout(), amps).unwrap()
}

fn amplitudes() -> impl Strategy<Value = Vec<(f64, f64)>> {
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 128)
        .prop_filter("nonzero", |v| v.iter().any(|&(a, b)| a.abs() + b.abs() > 1e-3))
}

proptest! {
    #[test]
    fn table_permutation_round_trip(parts in amplitudes(), table in Just((0..32u64).collect::<Vec<_>>()).prop_shuffle()) {
        let start = state_from(&parts);
        let perm = BasisPermutation::from_table(&layout(), &["x", "y"], table).unwrap();
        let mut s = start.clone();
        s.apply_permutation(&perm).unwrap();
        prop_assert!((s.norm() - 1.0).abs() < 1e-12);
        s.apply_permutation(&perm.inverse()).unwrap();
        prop_assert_eq!(s.amplitudes(), start.amplitudes());
    }

    #[test]
    fn xor_load_is_involution(parts in amplitudes(), key in 0u64..4, mul in 0u64..8) {
        let start = state_from(&parts);
        let perm = BasisPermutation::xor_load(&layout(), &["y"], "z", move |v| (v * mul + key) % 4).unwrap();
        let mut s = start.clone();
        s.apply_permutation(&perm).unwrap();
        s.apply_permutation(&perm).unwrap();
        prop_assert_eq!(s.amplitudes(), start.amplitudes());
    }

    #[test]
    fn gates_preserve_norm(parts in amplitudes(), qubit in 0usize..7, theta in -6.3f64..6.3, bits in 1usize..=3) {
        let mut s = state_from(&parts);
        s.apply_ry(qubit, theta).unwrap();
        s.apply_hadamard_layer("y", bits).unwrap();
        prop_assert!((s.norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn hadamard_layer_is_involution(parts in amplitudes(), bits in 1usize..=3) {
        let start = state_from(&parts);
        let mut s = start.clone();
        s.apply_hadamard_layer("y", bits).unwrap();
        s.apply_hadamard_layer("y", bits).unwrap();
        prop_assert!(s.distance(&start).unwrap() < 1e-12);
    }

    #[test]
    fn multiplier_is_injective_on_domain(bw in 1usize..=3, m in 1usize..=4) {
        let layout = RegisterLayout::from_widths([("b", bw), ("a", bw + m)]).unwrap();
        let perm = multiply_permutation(&layout, "b", "a").unwrap();
        let resolved = perm.resolve(&layout).unwrap();
        let mut seen = std::collections::HashSet::new();
        for b in 1..1u64 << bw {
            for j in 0..1u64 << m {
                let idx = layout.index_of(&[("b", b), ("a", j)]).unwrap();
                let out = resolved.map(idx);
                prop_assert_eq!(layout.label(out, "a").unwrap(), b * j);
                prop_assert_eq!(layout.label(out, "b").unwrap(), b);
                prop_assert!(seen.insert(out));
            }
        }
    }

    #[test]
    fn comparator_matches_predicate(work in 0u64..32, threshold in 0u64..40) {
        let layout = RegisterLayout::from_widths([("w", 5), ("f", 1)]).unwrap();
        let mut s = Statevector::basis(layout, &[("w", work)]).unwrap();
        compare_flag(&mut s, "w", threshold, "f").unwrap();
        let flag = u64::from(work >= threshold);
        prop_assert!((s.amplitude(&[("w", work), ("f", flag)]).unwrap().re - 1.0).abs() < 1e-15);
    }

    #[test]
    fn counts_bounded_by_truncation(alpha in 1u64..64, c in 1u64..64, m in 1usize..=10) {
        prop_assume!(c <= alpha);
        let t = counting_oracle_inverse(alpha, c, m).unwrap();
        let grid = (1u64 << m) as f64;
        prop_assert!((t as f64 / grid - c as f64 / alpha as f64).abs() < 1.0 / grid);
    }

    #[test]
    fn reciprocal_tables_match_inverse_counts(alpha in 1u64..16, m in 2usize..=6) {
        let tables = FunctionTablePair::reciprocal(4, m).unwrap();
        prop_assert_eq!(
            counting_oracle_general(alpha, &tables).unwrap(),
            counting_oracle_inverse(alpha, 1, m).unwrap()
        );
    }
}
