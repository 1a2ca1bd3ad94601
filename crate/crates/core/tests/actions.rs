use cat0lab::action::{
    energy, examples, fixed_point_search, minimize_energy, shalom_search, EnergyOptions, EnergyStatus,
    FixedPointOptions, FixedPointResult, ShalomOptions, ShalomOutcome,
};
use cat0lab::space::Point;

#[test]
fn energy_dominates_displacement_bound() {
    for ex in examples::bundled_examples() {
        let rep = energy(&ex.action, &ex.measure, &ex.start, &ex.generators).unwrap();
        assert!(rep.energy + 1e-12 >= rep.lower_bound, "{}: {rep:?}", ex.name);
    }
}

#[test]
fn translation_energy_is_t_squared() {
    let ex = examples::translation_line(1.5);
    let rep = energy(&ex.action, &ex.measure, &Point::Euclidean(vec![4.0]), &ex.generators).unwrap();
    assert!((rep.energy - 2.25).abs() < 1e-12);
}

#[test]
fn energies_never_increase() {
    for ex in examples::bundled_examples() {
        let run = minimize_energy(&ex.action, &ex.measure, &ex.start, &ex.generators, &EnergyOptions::default()).unwrap();
        for w in run.energies.windows(2) {
            assert!(w[1] <= w[0] * (1.0 + 1e-12) + 1e-15, "{}: {} -> {}", ex.name, w[0], w[1]);
        }
    }
}

#[test]
fn parabolic_escapes_upwards() {
    let ex = examples::parabolic();
    let run = minimize_energy(&ex.action, &ex.measure, &ex.start, &ex.generators, &EnergyOptions::default()).unwrap();
    assert_eq!(run.status, EnergyStatus::Escaped);
    assert!(run.map.basepoint.as_hyperbolic().unwrap().im > 10.0);
    assert!(run.report.energy < run.energies[0]);
}

#[test]
fn finite_groups_have_fixed_points() {
    let opts = FixedPointOptions::default();
    for ex in [examples::dihedral_plane(6), examples::grigorchuk_tree(4)] {
        let res = fixed_point_search(&ex.action, &ex.measure, &ex.generators, &ex.start, &opts).unwrap();
        match res {
            FixedPointResult::Found { point, .. } => {
                let d = ex.action.displacement(&point, &ex.generators).unwrap();
                assert!(d < 1e-6, "{}: displacement {d}", ex.name);
            }
            FixedPointResult::Failure { failure, .. } => panic!("{}: {failure:?}", ex.name),
        }
    }
}

#[test]
fn infinite_dihedral_has_no_fixed_point() {
    let ex = examples::dihedral_line();
    let res = fixed_point_search(&ex.action, &ex.measure, &ex.generators, &ex.start, &FixedPointOptions::default()).unwrap();
    match res {
        FixedPointResult::Failure { failure, .. } => assert!((failure.delta_infimum - 0.5).abs() < 1e-9),
        FixedPointResult::Found { point, .. } => panic!("{point:?}"),
    }
}

#[test]
fn shalom_outcomes_on_simple_actions() {
    let opts = ShalomOptions::default();
    let rot = examples::rotation_plane(4);
    let out = shalom_search(&rot.action, &rot.generators, 3, &Point::Euclidean(vec![2.0, 1.0]), &opts).unwrap();
    assert!(matches!(out, ShalomOutcome::FixedPointFound { .. }), "{out:?}");
    let tr = examples::translation_line(2.0);
    let out = shalom_search(&tr.action, &tr.generators, 3, &tr.start, &opts).unwrap();
    match out {
        ShalomOutcome::DeltaBoundedBelow { bound, .. } => assert_eq!(bound, 2.0),
        other => panic!("{other:?}"),
    }
}

#[test]
fn shalom_certificate_on_parabolic() {
    let ex = examples::parabolic();
    let out = shalom_search(&ex.action, &ex.generators, 4, &ex.start, &ShalomOptions::default()).unwrap();
    let ShalomOutcome::Certificate(c) = out else { panic!("{out:?}") };
    assert!(c.delta_at_vn <= c.r_n / 4.0 + 1e-12);
    assert!(c.sampled_min_delta_in_ball >= c.r_n / 8.0);
}
