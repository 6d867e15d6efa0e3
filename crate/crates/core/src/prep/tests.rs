use super::*;
use crate::amplification::amplified_probability;
use crate::layout::RegisterLayout;

fn data(alphas: &[u64], n: usize) -> OracleData {
    OracleData::new(alphas.to_vec(), n).unwrap()
}

fn assert_close(a: &[f64], b: &[f64], tol: f64) {
    assert_eq!(a.len(), b.len());
    for (x, y) in a.iter().zip(b) {
        assert!((x - y).abs() < tol, "{a:?} vs {b:?}");
    }
}

#[test]
fn all_ones_is_uniform_without_rounds() {
    let cfg = InversePrepConfig::inverse(data(&[1, 1, 1, 1], 2), 1, 3).unwrap();
    let (_, r) = prepare_inverse(&cfg).unwrap();
    assert_close(&r.post_selected_amplitudes, &[0.5; 4], 1e-12);
    assert!((r.success_probability_raw - 1.0).abs() < 1e-12);
    assert_eq!(r.aa_rounds_used, 0);
    assert_eq!(r.multiplication_count, 2);
}

#[test]
fn powers_of_two_are_exact() {
    let cfg = InversePrepConfig::inverse(data(&[1, 2, 4], 3), 1, 4).unwrap();
    let (s, r) = prepare_inverse(&cfg.clone().with_aa(AaRounds::Fixed(0))).unwrap();
    assert_close(&r.post_selected_amplitudes, &normalized_counts(&[16, 8, 4]), 1e-12);
    assert!((r.success_probability_raw - 0.4375).abs() < 1e-12);
    assert!((r.fidelity_vs_target.unwrap() - 1.0).abs() < 1e-12);
    assert!(r.max_componentwise_error.unwrap() < 1e-12);
    assert_eq!(s.layout().width("I").unwrap(), 2);

    let (_, amplified) = prepare_inverse(&cfg).unwrap();
    assert_eq!(amplified.aa_rounds_used, 1);
    assert!((amplified.success_probability_final - amplified_probability(0.4375, 1)).abs() < 1e-10);
    assert_close(&amplified.post_selected_amplitudes, &r.post_selected_amplitudes, 1e-10);
}

#[test]
fn three_and_five() {
    let cfg = InversePrepConfig::inverse(data(&[3, 5], 3), 1, 4).unwrap();
    let (_, r) = prepare_inverse(&cfg).unwrap();
    assert_close(&r.post_selected_amplitudes, &normalized_counts(&[6, 4]), 1e-12);
    let err = r.max_componentwise_error.unwrap();
    assert!((err - 0.05).abs() < 1e-12 && err < 0.0625);
}

#[test]
fn division_examples() {
    let d = data(&[2, 4], 3);
    let (_, r) = prepare_division(&d, &[1, 3], 4, AaRounds::Auto, Backend::Dense).unwrap();
    assert_close(&r.post_selected_amplitudes, &normalized_counts(&[8, 12]), 1e-12);
    assert!(r.max_componentwise_error.unwrap() < 1e-12);

    let d = data(&[3, 5], 3);
    let (_, r) = prepare_division(&d, &[3, 5], 3, AaRounds::Auto, Backend::Dense).unwrap();
    assert_close(&r.post_selected_amplitudes, &[0.5f64.sqrt(); 2], 1e-12);

    let (_, r) = prepare_division(&d, &[2, 2], 5, AaRounds::Auto, Backend::Block).unwrap();
    assert_close(&r.post_selected_amplitudes, &normalized_counts(&[22, 13]), 1e-12);
    assert!(r.max_componentwise_error.unwrap() < 1.0 / 32.0);

    assert!(prepare_division(&d, &[4, 2], 5, AaRounds::Auto, Backend::Dense).is_err());
    assert!(prepare_division(&d, &[0, 2], 5, AaRounds::Auto, Backend::Dense).is_err());
}

#[test]
fn general_inverse_square_root() {
    let tables = FunctionTablePair::inv_sqrt_1p(2, 4).unwrap();
    let d = OracleData::with_zeros(vec![0, 3], 2).unwrap();
    let cfg = GeneralPrepConfig::new(d, tables).unwrap();
    for backend in [Backend::Dense, Backend::Block] {
        let (_, r) = prepare_general(&cfg.clone().with_backend(backend)).unwrap();
        assert_close(&r.post_selected_amplitudes, &normalized_counts(&[16, 8]), 1e-12);
        assert!(r.max_componentwise_error.unwrap() < 1e-12);
        assert_eq!(r.multiplication_count, 2);
    }
}

#[test]
fn general_linear_reduction() {
    let tables = FunctionTablePair::linear(2, 3).unwrap();
    let cfg = GeneralPrepConfig::new(data(&[1, 2, 3], 2), tables).unwrap();
    let (_, r) = prepare_general(&cfg).unwrap();
    assert_close(&r.post_selected_amplitudes, &normalized_counts(&[1, 2, 3]), 1e-12);
    assert_eq!(r.multiplication_count, 0);
}

#[test]
fn general_single_entry() {
    let tables = FunctionTablePair::inv_sqrt_1p(3, 3).unwrap();
    let cfg = GeneralPrepConfig::new(data(&[5], 3), tables).unwrap();
    let (_, r) = prepare_general(&cfg).unwrap();
    assert_close(&r.post_selected_amplitudes, &[1.0], 1e-12);
}

#[test]
fn general_reciprocal_matches_inverse() {
    let d = data(&[3, 5, 7], 3);
    let (_, inv) = prepare_inverse(&InversePrepConfig::inverse(d.clone(), 1, 4).unwrap()).unwrap();
    let cfg = GeneralPrepConfig::new(d, FunctionTablePair::reciprocal(3, 4).unwrap()).unwrap();
    let (_, gen) = prepare_general(&cfg).unwrap();
    assert!(reports_agree(&inv, &gen, 1e-12));
}

#[test]
fn zero_component_rejected() {
    // f = α/4 vanishes at α = 0
    let tables = FunctionTablePair::linear(2, 3).unwrap();
    let d = OracleData::with_zeros(vec![0, 2], 2).unwrap();
    assert!(GeneralPrepConfig::new(d, tables).is_err());
}

#[test]
fn backends_agree() {
    let cfg = InversePrepConfig::inverse(data(&[3, 5], 3), 1, 4).unwrap();
    assert!(simulate_equivalence_check(&cfg.clone().into()).unwrap());
    let cfg = InversePrepConfig::inverse(data(&[2, 3, 5, 7, 6], 3), 2, 3).unwrap();
    assert!(simulate_equivalence_check(&cfg.into()).unwrap());
}

#[test]
fn corrupted_comparator_is_caught() {
    let cfg: PrepConfig = InversePrepConfig::inverse(data(&[3, 5], 3), 1, 4).unwrap().into();
    let mut circuit = dense_circuit(&cfg).unwrap();
    let at = circuit.comparator_step();
    let layout: &RegisterLayout = circuit.layout();
    let identity = crate::permutation::BasisPermutation::identity(layout, &["flag"]).unwrap();
    circuit.program_mut().steps_mut()[at] = crate::amplification::Step::Permute {
        perm: std::sync::Arc::new(identity),
        guards: Vec::new(),
        multiplications: 0,
    };
    assert!(!equivalence_with_circuit(&cfg, &circuit).unwrap());
}

#[test]
fn non_power_of_two_index_uses_uniform_prep() {
    let cfg = InversePrepConfig::inverse(data(&[1, 2, 4], 3), 1, 4).unwrap();
    let circuit = dense_circuit(&cfg.clone().into()).unwrap();
    assert!(circuit.layout().contains("anc1"));
    let cfg = InversePrepConfig::inverse(data(&[1, 2, 4, 8], 4), 1, 4).unwrap();
    let circuit = dense_circuit(&cfg.into()).unwrap();
    assert!(!circuit.layout().contains("anc1"));
}

#[test]
fn aa_rounds_parse() {
    assert_eq!("auto".parse::<AaRounds>().unwrap(), AaRounds::Auto);
    assert_eq!("3".parse::<AaRounds>().unwrap(), AaRounds::Fixed(3));
    assert!("x".parse::<AaRounds>().is_err());
    assert_eq!(serde_json::to_string(&AaRounds::Fixed(2)).unwrap(), "\"2\"");
    assert_eq!("block".parse::<Backend>().unwrap(), Backend::Block);
}
