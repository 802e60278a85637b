//! Standard workloads shared by the benchmarks.

use perpetua::{AnalysisRegion, ParameterSet, SystemDefinition, VectorField};

/// `x' = x^2 - A^2` on `[-3, 3]`.
pub fn quadratic() -> (VectorField, AnalysisRegion) {
    let def = SystemDefinition::parse("quadratic", &["x"], ParameterSet::from_pairs([("A", 1.0)]), &["x^2 - A^2"])
        .expect("valid system");
    (VectorField::new(def).expect("valid field"), AnalysisRegion::new(vec![(-3.0, 3.0)]).expect("valid region"))
}

/// Damped Duffing oscillator on `[-2, 2]^2`.
pub fn duffing() -> (VectorField, AnalysisRegion) {
    let def = SystemDefinition::parse(
        "duffing",
        &["x", "y"],
        ParameterSet::from_pairs([("delta", 0.3)]),
        &["y", "x - x^3 - delta*y"],
    )
    .expect("valid system");
    (VectorField::new(def).expect("valid field"), AnalysisRegion::cube(2, -2.0, 2.0).expect("valid region"))
}

/// Lorenz system with the classical parameters, on a box around its attractor.
pub fn lorenz() -> (VectorField, AnalysisRegion) {
    let def = SystemDefinition::parse(
        "lorenz",
        &["x", "y", "z"],
        ParameterSet::from_pairs([("sigma", 10.0), ("rho", 28.0), ("beta", 8.0 / 3.0)]),
        &["sigma*(y - x)", "x*(rho - z) - y", "x*y - beta*z"],
    )
    .expect("valid system");
    let region = AnalysisRegion::new(vec![(-20.0, 20.0), (-25.0, 25.0), (0.0, 50.0)]).expect("valid region");
    (VectorField::new(def).expect("valid field"), region)
}
