use relu_mip::error::Error;
use relu_mip::formulation::NeuronId;
use relu_mip::oracle::{
    brute_force_most_violated, build_facet_witness, check_redundancy_certificate, hull_equivalence,
    hull_values, ideal_system, ideal_vertices, single_neuron_vars, CertificateCase,
    MAX_ENUMERATED_SUPPORT,
};
use relu_mip::relaxation::{build_context, AffineForm, InputBox, NeuronContext};
use relu_mip::sampling;
use relu_mip::separation::separate;

fn corner_neuron() -> NeuronContext {
    build_context(
        AffineForm::new(vec![1.0, 1.0], -1.5),
        InputBox::cube(2, 0.0, 1.0).unwrap(),
    )
    .unwrap()
}

#[test]
fn exhaustive_search_on_fractional_point() {
    let (subset, v) = brute_force_most_violated(&corner_neuron(), &[1.0, 0.0], 0.25, 0.5).unwrap();
    assert_eq!(subset, vec![1]);
    assert!((v - 0.5).abs() < 1e-12);
}

#[test]
fn exhaustive_search_on_graph_vertex() {
    let mut rng = sampling::rng(70);
    for _ in 0..50 {
        let c = sampling::strictly_active_context(&mut rng, 8);
        let (_, v) = brute_force_most_violated(&c, c.breve_upper(), c.m_plus(), 1.0).unwrap();
        assert!(v.abs() < 1e-12);
    }
}

#[test]
fn exhaustive_search_matches_separation() {
    let mut rng = sampling::rng(71);
    for _ in 0..200 {
        let c = sampling::strictly_active_context(&mut rng, 10);
        let (x, y, z) = sampling::relaxation_point(&mut rng, &c);
        let (_, slow) = brute_force_most_violated(&c, &x, y, z).unwrap();
        let fast = separate(&c, NeuronId::new(1, 0), &x, y, z, f64::NEG_INFINITY).unwrap();
        assert!((slow - fast.violation).abs() <= 1e-9);
    }
}

#[test]
fn exhaustive_search_refuses_large_support() {
    let n = MAX_ENUMERATED_SUPPORT + 1;
    let c = build_context(
        AffineForm::new(vec![1.0; n], -1.0),
        InputBox::cube(n, 0.0, 1.0).unwrap(),
    )
    .unwrap();
    let err = brute_force_most_violated(&c, &vec![0.5; n], 0.0, 0.5).unwrap_err();
    assert!(matches!(err, Error::SupportTooLarge { .. }), "{err:?}");
}

#[test]
fn facet_witness_on_two_input_neuron() {
    let w = build_facet_witness(&corner_neuron(), &[1]).unwrap();
    assert_eq!(w.points.len(), 4);
    let report = w.verify(&corner_neuron(), 1e-9).unwrap();
    assert_eq!(report.rank, 3);
    assert_eq!(report.expected_rank, 3);
    assert!(report.passed(1e-9));
}

#[test]
fn facet_witness_on_one_input_neuron() {
    let c = build_context(
        AffineForm::new(vec![1.0], -0.5),
        InputBox::cube(1, 0.0, 1.0).unwrap(),
    )
    .unwrap();
    let w = build_facet_witness(&c, &[0]).unwrap();
    assert_eq!(w.points.len(), 3);
    let report = w.verify(&c, 1e-9).unwrap();
    assert_eq!(report.rank, 2);
    assert!(report.passed(1e-9));
}

#[test]
fn facet_witness_rejects_bad_subsets() {
    let c = build_context(
        AffineForm::new(vec![1.0, 0.0], -0.5),
        InputBox::cube(2, 0.0, 1.0).unwrap(),
    )
    .unwrap();
    assert!(build_facet_witness(&c, &[1]).is_err());
    assert!(build_facet_witness(&c, &[5]).is_err());
    let on = build_context(
        AffineForm::new(vec![1.0], 2.0),
        InputBox::cube(1, 0.0, 1.0).unwrap(),
    )
    .unwrap();
    assert!(build_facet_witness(&on, &[]).is_err());
}

#[test]
fn facet_witnesses_on_random_contexts() {
    let mut rng = sampling::rng(72);
    for _ in 0..100 {
        let c = sampling::strictly_active_context(&mut rng, 8);
        let subset = sampling::support_subset(&mut rng, &c);
        let w = build_facet_witness(&c, &subset).unwrap();
        assert_eq!(w.points.len(), c.dim() + 2);
        let r = w.verify(&c, 1e-9).unwrap();
        assert!(r.passed(1e-9), "{r:?}");
    }
}

#[test]
fn certificates_on_two_input_neuron() {
    // h at the complement of I: lower corners outside I, upper corners inside.
    let c = corner_neuron();
    let empty = check_redundancy_certificate(&c, &[]).unwrap();
    assert!((empty.h_value + 1.5).abs() < 1e-12);
    assert_eq!(empty.case, CertificateCase::Nonnegativity);
    let full = check_redundancy_certificate(&c, &[0, 1]).unwrap();
    assert!((full.h_value - 0.5).abs() < 1e-12);
    assert_eq!(full.case, CertificateCase::AffineLowerBound);
    for cert in [&empty, &full] {
        assert!(cert.residual <= 1e-10);
        assert!(cert.multipliers.iter().all(|(_, m)| *m >= 0.0));
    }
}

#[test]
fn certificates_on_random_contexts() {
    let mut rng = sampling::rng(73);
    let (mut neg, mut nonneg) = (0, 0);
    for _ in 0..500 {
        let c = sampling::strictly_active_context(&mut rng, 8);
        let subset = sampling::support_subset(&mut rng, &c);
        let cert = check_redundancy_certificate(&c, &subset).unwrap();
        assert!(cert.residual <= 1e-10);
        if cert.h_value < 0.0 {
            neg += 1;
        } else {
            nonneg += 1;
        }
    }
    assert!(neg > 0 && nonneg > 0);
}

#[test]
fn hull_equivalence_on_two_input_neuron() {
    assert!(hull_equivalence(&corner_neuron(), 20, 1).unwrap() <= 1e-6);
}

#[test]
fn hull_values_at_fixed_input() {
    let (ideal, extended) =
        hull_values(&corner_neuron(), &[0.0, 0.0, 1.0, 0.0], Some(&[1.0, 0.0])).unwrap();
    assert!(ideal.abs() < 1e-9);
    assert!(extended.abs() < 1e-9);
}

#[test]
fn hull_values_for_indicator_only_objective() {
    let (ideal, extended) = hull_values(&corner_neuron(), &[0.0, 0.0, 0.0, 1.0], None).unwrap();
    assert!((ideal - 1.0).abs() < 1e-9);
    assert!((extended - 1.0).abs() < 1e-9);
    let (ideal, extended) = hull_values(&corner_neuron(), &[0.0, 0.0, 0.0, -1.0], None).unwrap();
    assert!(ideal.abs() < 1e-9);
    assert!(extended.abs() < 1e-9);
}

#[test]
fn hull_equivalence_refuses_large_inputs() {
    let c = build_context(
        AffineForm::new(vec![1.0; 9], -1.0),
        InputBox::cube(9, 0.0, 1.0).unwrap(),
    )
    .unwrap();
    assert!(hull_equivalence(&c, 1, 0).is_err());
}

#[test]
fn ideal_system_size() {
    let c = corner_neuron();
    // One lower row plus one row per subset of the support.
    assert_eq!(ideal_system(&c).unwrap().len(), 1 + 4);
    let vars = single_neuron_vars(2);
    assert_eq!((vars.y, vars.z), (2, 3));
}

#[test]
fn hull_vertices_are_integral() {
    let mut rng = sampling::rng(74);
    for _ in 0..50 {
        let c = sampling::strictly_active_context(&mut rng, 3);
        let vertices = ideal_vertices(&c).unwrap();
        assert!(!vertices.is_empty());
        let z = single_neuron_vars(c.dim()).z;
        for v in &vertices {
            assert!(
                v[z].abs() <= 1e-7 || (v[z] - 1.0).abs() <= 1e-7,
                "z = {}",
                v[z]
            );
        }
    }
}
