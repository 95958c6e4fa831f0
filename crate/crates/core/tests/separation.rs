use rand::Rng;
use relu_mip::formulation::{
    cut_to_constraint, ideal_cut_rhs, single_neuron_mip, Cut, FormulationKind, NeuronId,
};
use relu_mip::lp_core::{resolve_with_rows, LpOptions, LpProblem, LpSolver, LpStatus};
use relu_mip::oracle::brute_force_most_violated;
use relu_mip::relaxation::{build_context, AffineForm, InputBox, NeuronContext};
use relu_mip::sampling;
use relu_mip::separation::{
    most_violated_subset, pool_insert, separate, CutPool, DEFAULT_MIN_VIOLATION,
};

const ID: NeuronId = NeuronId {
    layer: 1,
    neuron: 0,
};

fn corner_neuron() -> NeuronContext {
    build_context(
        AffineForm::new(vec![1.0, 1.0], -1.5),
        InputBox::cube(2, 0.0, 1.0).unwrap(),
    )
    .unwrap()
}

fn sum_neuron(eta: usize) -> NeuronContext {
    build_context(
        AffineForm::new(vec![1.0; eta], 0.0),
        InputBox::cube(eta, -1.0, 1.0).unwrap(),
    )
    .unwrap()
}

#[test]
fn subset_at_fractional_point() {
    assert_eq!(
        most_violated_subset(&corner_neuron(), &[1.0, 0.0], 0.5),
        vec![1]
    );
    assert_eq!(
        most_violated_subset(&sum_neuron(2), &[1.0, -1.0], 0.5),
        vec![1]
    );
}

#[test]
fn subset_at_upper_corner_is_empty() {
    let mut rng = sampling::rng(40);
    for _ in 0..100 {
        let c = sampling::strictly_active_context(&mut rng, 8);
        assert!(most_violated_subset(&c, c.breve_upper(), 1.0).is_empty());
    }
}

#[test]
fn separates_fractional_point() {
    let cut = separate(
        &corner_neuron(),
        ID,
        &[1.0, 0.0],
        0.25,
        0.5,
        DEFAULT_MIN_VIOLATION,
    )
    .unwrap();
    assert_eq!(cut.cut.subset(), &[1]);
    assert!((cut.violation - 0.5).abs() < 1e-12);
}

#[test]
fn graph_point_is_not_cut() {
    assert!(separate(
        &corner_neuron(),
        ID,
        &[1.0, 1.0],
        0.5,
        1.0,
        DEFAULT_MIN_VIOLATION
    )
    .is_none());
}

#[test]
fn alternating_point_on_sum_neuron() {
    let c = sum_neuron(4);
    let cut = separate(
        &c,
        ID,
        &[1.0, -1.0, 1.0, -1.0],
        2.0,
        0.5,
        DEFAULT_MIN_VIOLATION,
    )
    .unwrap();
    assert_eq!(cut.cut.subset(), &[1, 3]);
    assert!((cut.violation - 2.0).abs() < 1e-12);
}

#[test]
fn violation_threshold_is_strict() {
    let c = corner_neuron();
    assert!(separate(&c, ID, &[1.0, 0.0], 0.25, 0.5, 0.5).is_none());
    assert!(separate(&c, ID, &[1.0, 0.0], 0.25, 0.5, 0.5 - 1e-9).is_some());
}

#[test]
fn pool_semantics() {
    let mut pool = CutPool::new();
    let a = Cut::new(ID, vec![0, 1]);
    assert!(pool_insert(&mut pool, a.clone()));
    assert!(!pool_insert(&mut pool, a.clone()));
    assert!(pool_insert(
        &mut pool,
        Cut::new(NeuronId::new(1, 1), vec![0, 1])
    ));
    assert!(!pool_insert(&mut pool, Cut::new(ID, vec![1, 0])));
    assert_eq!(pool.len(), 2);
    assert!(pool.record(Cut::new(ID, vec![]), 0.3) && pool.contains(&Cut::new(ID, vec![])));
    assert!(!pool.record(Cut::new(ID, vec![]), 0.4));
    let stats = pool.stats(&Cut::new(ID, vec![])).unwrap();
    assert_eq!(stats.times_violated, 2);
    assert_eq!(stats.last_violation, 0.4);
    let keys: Vec<&Cut> = pool.iter().collect();
    assert_eq!(keys.len(), 3);
}

#[test]
fn agrees_with_exhaustive_enumeration() {
    let mut rng = sampling::rng(41);
    for _ in 0..1000 {
        let c = sampling::strictly_active_context(&mut rng, 12);
        let (x, y, z) = sampling::relaxation_point(&mut rng, &c);
        let fast = separate(&c, ID, &x, y, z, f64::NEG_INFINITY).unwrap();
        let (subset, slow) = brute_force_most_violated(&c, &x, y, z).unwrap();
        assert!(
            (fast.violation - slow).abs() <= 1e-9,
            "{} vs {slow}",
            fast.violation
        );
        let rhs = ideal_cut_rhs(&c, &subset, &x, z).unwrap();
        assert!((y - rhs - slow).abs() <= 1e-9);
    }
}

#[test]
fn true_points_are_never_cut() {
    let mut rng = sampling::rng(42);
    for _ in 0..1000 {
        let c = sampling::strictly_active_context(&mut rng, 10);
        let x = sampling::uniform_point(&mut rng, c.bounds());
        let f = c.affine().eval(&x);
        let z = if f > 0.0 {
            1.0
        } else if f < 0.0 {
            0.0
        } else {
            rng.random_range(0..2) as f64
        };
        assert!(separate(&c, ID, &x, f.max(0.0), z, 1e-9).is_none());
    }
}

#[test]
fn cut_loop_decreases_bound_and_terminates() {
    let mut rng = sampling::rng(43);
    for case in 0..100 {
        let c = sampling::strictly_active_context(&mut rng, 6);
        let fixed = (case % 2 == 0).then(|| sampling::uniform_point(&mut rng, c.bounds()));
        let model = single_neuron_mip(&c, FormulationKind::BigM, fixed.as_deref()).unwrap();
        let vars = model.neuron_blocks()[0].vars.clone();
        let mut solver =
            LpSolver::new(LpProblem::from_model(&model), LpOptions::default()).unwrap();
        let mut sol = solver.solve();
        let limit = 1usize << c.support().len();
        let mut rounds = 0;
        loop {
            assert_eq!(sol.status, LpStatus::Optimal);
            let x: Vec<f64> = vars.x.iter().map(|&j| sol.primal[j]).collect();
            let Some(found) = separate(
                &c,
                ID,
                &x,
                sol.primal[vars.y],
                sol.primal[vars.z],
                DEFAULT_MIN_VIOLATION,
            ) else {
                break;
            };
            let row = cut_to_constraint(&c, &found.cut, &vars).unwrap();
            let next = resolve_with_rows(&mut solver, &[row]).unwrap();
            assert!(next.objective <= sol.objective + 1e-9);
            sol = next;
            rounds += 1;
            assert!(rounds <= limit, "no termination after {rounds} rounds");
        }
        if let Some(x) = &fixed {
            let exact = c.affine().eval(x).max(0.0);
            assert!(sol.objective >= exact - 1e-7);
        }
    }
}
