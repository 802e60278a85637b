use perpetua::{acceleration_field, differentiate, parse_expression, Expr, ParameterSet, Scope, SystemDefinition, VectorField};
use proptest::prelude::*;

fn scope() -> Scope {
    Scope::new(&["x", "y"], &["A"])
}

fn params() -> ParameterSet {
    ParameterSet::from_pairs([("A", 1.3)])
}

/// Source text over `x`, `y` and `A`, including functions that can hit
/// their domain boundaries.
fn any_source() -> impl Strategy<Value = String> {
    let leaf = prop_oneof![
        Just("x".to_string()),
        Just("y".to_string()),
        Just("A".to_string()),
        (-50i32..50).prop_map(|k| format!("{}", k as f64 / 8.0)),
    ];
    leaf.prop_recursive(5, 48, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("({a}) + ({b})")),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("({a}) - ({b})")),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("({a})*({b})")),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("({a})/({b})")),
            (inner.clone(), 0u32..4).prop_map(|(a, k)| format!("({a})^{k}")),
            inner.clone().prop_map(|a| format!("-({a})")),
            inner.clone().prop_map(|a| format!("sqrt({a})")),
            inner.clone().prop_map(|a| format!("log({a})")),
            inner.clone().prop_map(|a| format!("sin({a})")),
            inner.prop_map(|a| format!("exp({a})")),
        ]
    })
}

/// Smooth everywhere, so finite differences are meaningful at any point.
fn smooth_source() -> impl Strategy<Value = String> {
    let leaf = prop_oneof![
        Just("x".to_string()),
        Just("y".to_string()),
        Just("A".to_string()),
        (-20i32..20).prop_map(|k| format!("{}", k as f64 / 4.0)),
    ];
    leaf.prop_recursive(4, 32, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("({a}) + ({b})")),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("({a})*({b})")),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("({a})/(2 + ({b})^2)")),
            (inner.clone(), 2u32..4).prop_map(|(a, k)| format!("({a})^{k}")),
            inner.clone().prop_map(|a| format!("sqrt(1 + ({a})^2)")),
            inner.clone().prop_map(|a| format!("cos({a})")),
            inner.prop_map(|a| format!("exp(0.2*({a}))")),
        ]
    })
}

fn points() -> impl Strategy<Value = Vec<[f64; 2]>> {
    prop::collection::vec((-2.0..2.0f64, -2.0..2.0f64).prop_map(|(a, b)| [a, b]), 100)
}

fn same(a: &Result<f64, perpetua::EvalError>, b: &Result<f64, perpetua::EvalError>) -> bool {
    match (a, b) {
        (Ok(u), Ok(v)) => u.to_bits() == v.to_bits(),
        (Err(_), Err(_)) => true,
        _ => false,
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn printing_round_trips(source in any_source(), pts in points()) {
        let e = parse_expression(&source, &scope()).unwrap();
        let printed = e.to_string();
        let again = parse_expression(&printed, &scope()).unwrap();
        prop_assert_eq!(again.to_string(), printed.clone());
        for p in &pts {
            let (u, v) = (e.evaluate(p, &params()), again.evaluate(p, &params()));
            prop_assert!(same(&u, &v), "{} vs {} at {:?}: {:?} vs {:?}", source, printed, p, u, v);
        }
    }

    #[test]
    fn evaluation_is_repeatable(source in any_source(), pts in points()) {
        let e = parse_expression(&source, &scope()).unwrap();
        for p in &pts {
            prop_assert!(same(&e.evaluate(p, &params()), &e.evaluate(p, &params())));
        }
    }

    #[test]
    fn derivatives_match_central_differences(source in smooth_source(), x in -1.5..1.5f64, y in -1.5..1.5f64) {
        let e = parse_expression(&source, &scope()).unwrap();
        let h = 1e-6;
        for (k, name) in ["x", "y"].iter().enumerate() {
            let d = differentiate(&e, name).evaluate(&[x, y], &params()).unwrap();
            let mut hi = [x, y];
            let mut lo = [x, y];
            hi[k] += h;
            lo[k] -= h;
            let fd = (e.evaluate(&hi, &params()).unwrap() - e.evaluate(&lo, &params()).unwrap()) / (2.0 * h);
            prop_assert!((d - fd).abs() <= 1e-6 * d.abs().max(1.0), "d/d{} {}: {} vs {}", name, source, d, fd);
        }
    }

    #[test]
    fn acceleration_equals_jacobian_times_velocity(a in smooth_source(), b in smooth_source(), x in -1.5..1.5f64, y in -1.5..1.5f64) {
        let def = SystemDefinition::parse("random", &["x", "y"], params(), &[a, b]).unwrap();
        let f = VectorField::new(def).unwrap();
        let accel = acceleration_field(&f).unwrap().velocity(&[x, y]).unwrap();
        let jet = f.jet(&[x, y], perpetua::JetOrder::First).unwrap();
        let direct = jet.jacobian.mul_vec(&jet.value);
        for i in 0..2 {
            prop_assert!((accel[i] - direct[i]).abs() <= 1e-12 * direct[i].abs().max(1.0));
        }
    }
}

#[test]
fn free_variables_cover_states_and_parameters() {
    let e = parse_expression("2*x*(x^2 - A^2)", &Scope::new(&["x"], &["A"])).unwrap();
    let names: Vec<String> = e.free_variables().into_iter().collect();
    assert_eq!(names, ["A", "x"]);
    assert!(parse_expression("3.0", &scope()).unwrap().free_variables().is_empty());
}

#[test]
fn derivative_of_absent_variable_folds_to_zero() {
    let e = parse_expression("x^2 - A^2", &scope()).unwrap();
    assert_eq!(differentiate(&e, "y"), Expr::constant(0.0));
    assert_eq!(differentiate(&e, "x").to_string(), "2*x");
}
