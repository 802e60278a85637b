use perpetua::{
    acceleration_field, classify_point, find_fixed_points, find_perpetual_points, newton_root, AnalysisRegion,
    ParameterSet, PointKind, SolverConfig, SystemDefinition, VectorField,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn field(states: &[&str], sources: &[String]) -> VectorField {
    let def = SystemDefinition::parse("test", states, ParameterSet::from_pairs([("A", 1.0)]), sources).unwrap();
    VectorField::new(def).unwrap()
}

fn random_cubic(rng: &mut ChaCha8Rng) -> Vec<String> {
    let monomials = ["1", "x", "y", "x^2", "x*y", "y^2", "x^3", "x^2*y", "x*y^2", "y^3"];
    let mut out = Vec::new();
    for _ in 0..2 {
        let mut terms = Vec::new();
        for m in monomials {
            if rng.gen_bool(0.5) {
                terms.push(format!("({:?})*{m}", rng.gen_range(-2.0..2.0)));
            }
        }
        out.push(if terms.is_empty() { "1".to_string() } else { terms.join(" + ") });
    }
    out
}

#[test]
fn newton_cases() {
    let cfg = SolverConfig::default();
    let bounds = AnalysisRegion::new(vec![(-3.0, 3.0)]).unwrap();
    let f = field(&["x"], &["x^2 - A^2".into()]);
    let accel = acceleration_field(&f).unwrap();
    assert!(newton_root(&accel, &[0.3], &bounds, &cfg).unwrap().location[0].abs() < 1e-12);
    assert!((newton_root(&f, &[0.9], &bounds, &cfg).unwrap().location[0] - 1.0).abs() < 1e-12);
    let no_root = field(&["x"], &["x^2 + 1".into()]);
    assert!(newton_root(&no_root, &[0.0], &bounds, &cfg).is_err());
}

#[test]
fn classification_follows_the_definitions() {
    let cfg = SolverConfig::default();
    let f = field(&["x"], &["x^2 - A^2".into()]);
    assert_eq!(classify_point(&f, &[1.0], &cfg).unwrap().unwrap().kind, PointKind::FixedPoint);
    assert_eq!(classify_point(&f, &[0.0], &cfg).unwrap().unwrap().kind, PointKind::PerpetualPoint);
    assert!(classify_point(&f, &[0.5], &cfg).unwrap().is_none());
}

#[test]
fn fixed_points_are_zeros_of_the_acceleration() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let cfg = SolverConfig::default();
    let region = AnalysisRegion::cube(2, -2.0, 2.0).unwrap();
    for _ in 0..20 {
        let f = field(&["x", "y"], &random_cubic(&mut rng));
        let accel = acceleration_field(&f).unwrap();
        for p in find_fixed_points(&f, &region, &cfg).unwrap().points {
            let a = accel.velocity(&p.location).unwrap();
            assert!(a.iter().all(|v| v.abs() <= 1e-8));
            assert!(p.residual <= cfg.root_tol);
        }
        for p in find_perpetual_points(&f, &region, &cfg).unwrap().points {
            assert!(p.velocity_norm > cfg.velocity_floor);
            assert!(p.residual <= cfg.root_tol);
        }
    }
}

#[test]
fn searches_are_reproducible() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let region = AnalysisRegion::cube(2, -2.0, 2.0).unwrap();
    for seed in [0, 7] {
        let cfg = SolverConfig { rng_seed: seed, ..SolverConfig::default() };
        let f = field(&["x", "y"], &random_cubic(&mut rng));
        assert_eq!(find_perpetual_points(&f, &region, &cfg).unwrap(), find_perpetual_points(&f, &region, &cfg).unwrap());
        assert_eq!(find_fixed_points(&f, &region, &cfg).unwrap(), find_fixed_points(&f, &region, &cfg).unwrap());
    }
}

#[test]
fn results_are_sorted_and_separated() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let cfg = SolverConfig::default();
    let region = AnalysisRegion::cube(2, -2.0, 2.0).unwrap();
    for _ in 0..20 {
        let f = field(&["x", "y"], &random_cubic(&mut rng));
        let points = find_perpetual_points(&f, &region, &cfg).unwrap().points;
        for w in points.windows(2) {
            assert!(w[0].location <= w[1].location);
            let d: f64 = w[0].location.iter().zip(&w[1].location).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
            assert!(d > cfg.dedup_tol);
        }
    }
}

#[test]
fn planar_example() {
    let f = field(&["x", "y"], &["1 - x^2".into(), "-y".into()]);
    let region = AnalysisRegion::cube(2, -3.0, 3.0).unwrap();
    let cfg = SolverConfig::default();
    let fps = find_fixed_points(&f, &region, &cfg).unwrap().points;
    let locations: Vec<Vec<f64>> = fps.iter().map(|p| p.location.iter().map(|v| (v * 1e9).round() / 1e9).collect()).collect();
    assert_eq!(locations, vec![vec![-1.0, 0.0], vec![1.0, 0.0]]);
    let pps = find_perpetual_points(&f, &region, &cfg).unwrap().points;
    assert_eq!(pps.len(), 1);
    assert!(pps[0].location.iter().all(|v| v.abs() < 1e-10));
    let mu: Vec<f64> = pps[0].spectrum.values().iter().map(|z| z.re).collect();
    assert!((mu[0] + 2.0).abs() < 1e-10 && (mu[1] - 1.0).abs() < 1e-10);
}

#[test]
fn empty_when_no_roots() {
    let f = field(&["x"], &["x^2 + A^2".into()]);
    let region = AnalysisRegion::new(vec![(-3.0, 3.0)]).unwrap();
    assert!(find_fixed_points(&f, &region, &SolverConfig::default()).unwrap().points.is_empty());
}
