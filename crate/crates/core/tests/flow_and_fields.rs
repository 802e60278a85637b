use perpetua::{
    flow_map, integrate, pushforward_acceleration, pushforward_velocity, transformed_system, AnalysisRegion,
    IntegratorConfig, ParameterSet, SystemDefinition, TransformationMap, VectorField,
};

fn field(states: &[&str], params: &[(&str, f64)], sources: &[&str]) -> VectorField {
    let def = SystemDefinition::parse("test", states, ParameterSet::from_pairs(params.iter().copied()), sources).unwrap();
    VectorField::new(def).unwrap()
}

fn square_map() -> TransformationMap {
    let domain = AnalysisRegion::new(vec![(0.0, 3.0)]).unwrap();
    TransformationMap::parse(&["x"], &["y"], ParameterSet::new(), &["x^2"], domain, false).unwrap()
}

#[test]
fn decay_halves_in_ln_two() {
    let f = field(&["x"], &[], &["-x"]);
    let x = flow_map(&f, &[2.0], std::f64::consts::LN_2, &IntegratorConfig::default()).unwrap();
    assert!((x[0] - 1.0).abs() < 1e-7);
    assert_eq!(flow_map(&f, &[2.0], 0.0, &IntegratorConfig::default()).unwrap(), vec![2.0]);
}

#[test]
fn flows_compose() {
    let f = field(&["x", "y"], &[], &["y", "-sin(x) - 0.1*y"]);
    let cfg = IntegratorConfig::default();
    for (t1, t2) in [(0.3, 0.9), (1.1, 0.4), (2.0, 2.5)] {
        let direct = flow_map(&f, &[1.0, 0.2], t1 + t2, &cfg).unwrap();
        let mid = flow_map(&f, &[1.0, 0.2], t1, &cfg).unwrap();
        let composed = flow_map(&f, &mid, t2, &cfg).unwrap();
        for i in 0..2 {
            assert!((direct[i] - composed[i]).abs() < 1e-6);
        }
    }
}

#[test]
fn rk4_error_falls_sixteenfold_per_halving() {
    let f = field(&["x"], &[], &["-x"]);
    let exact = (-1.0f64).exp();
    let error = |step: f64| (flow_map(&f, &[1.0], 1.0, &IntegratorConfig::rk4(step)).unwrap()[0] - exact).abs();
    let ratio = error(0.1) / error(0.05);
    assert!((ratio - 16.0).abs() < 1.0, "ratio {ratio}");
}

#[test]
fn trajectories_approach_the_stable_point() {
    let f = field(&["x"], &[("A", 1.0)], &["x^2 - A^2"]);
    let t = integrate(&f, &[0.0], 30.0, 31, &IntegratorConfig::default()).unwrap();
    assert!((t.final_state().unwrap()[0] + 1.0).abs() < 1e-9);
    assert_eq!(t.times.len(), 31);
    assert!((t.times[30] - 30.0).abs() < 1e-12);
}

#[test]
fn square_map_pushforwards() {
    let f = field(&["x"], &[("A", 1.0)], &["x^2 - A^2"]);
    let h = square_map();
    assert!((pushforward_velocity(&f, &h, &[2.0]).unwrap()[0] - 12.0).abs() < 1e-12);
    assert!((pushforward_acceleration(&f, &h, &[2.0]).unwrap()[0] - 66.0).abs() < 1e-12);
}

#[test]
fn pushforward_acceleration_is_second_derivative_of_image() {
    let f = field(&["x", "y"], &[], &["1 - x^2", "-y + 0.5*x*y"]);
    let domain = AnalysisRegion::cube(2, -5.0, 5.0).unwrap();
    let h = TransformationMap::parse(&["x", "y"], &["u", "v"], ParameterSet::new(), &["x + y^2", "exp(0.3*y) + x"], domain, false)
        .unwrap();
    let dt = 1e-3;
    let traj = integrate(&f, &[0.2, 0.7], 0.5, 501, &IntegratorConfig::rk4(1e-4)).unwrap();
    let images: Vec<Vec<f64>> = traj.states.iter().map(|x| h.apply(x).unwrap()).collect();
    for k in (1..traj.len() - 1).step_by(25) {
        let g = pushforward_acceleration(&f, &h, &traj.states[k]).unwrap();
        for i in 0..2 {
            let fd = (images[k + 1][i] - 2.0 * images[k][i] + images[k - 1][i]) / (dt * dt);
            assert!((g[i] - fd).abs() < 1e-5 * g[i].abs().max(1.0), "{} vs {fd}", g[i]);
        }
    }
}

#[test]
fn transformed_field_agrees_with_pushforward() {
    let f = field(&["x"], &[("A", 1.0)], &["x^2 - A^2"]);
    let h = square_map();
    let image = h.image_of(h.domain()).unwrap();
    let inverse = TransformationMap::parse(&["y"], &["x"], ParameterSet::new(), &["sqrt(y)"], image, false).unwrap();
    let g = transformed_system(&f, &h, &inverse).unwrap();
    for x in [0.1, 0.5, 1.0, 1.7, 2.9] {
        let y = h.apply(&[x]).unwrap();
        let direct = g.velocity(&y).unwrap()[0];
        let pushed = pushforward_velocity(&f, &h, &[x]).unwrap()[0];
        assert!((direct - pushed).abs() < 1e-12 * pushed.abs().max(1.0));
    }
}

#[test]
fn mismatched_inverse_is_rejected() {
    let f = field(&["x"], &[], &["x"]);
    let h = square_map();
    let image = h.image_of(h.domain()).unwrap();
    let wrong = TransformationMap::parse(&["y"], &["x"], ParameterSet::new(), &["y/2"], image, false).unwrap();
    assert!(transformed_system(&f, &h, &wrong).is_err());
}
