//! Vector fields, coordinate maps and the quantities derived from them:
//! Jacobians, Hessians, the acceleration field `F = Df f`, and the
//! velocity and acceleration induced in new coordinates.

use std::sync::OnceLock;

use crate::error::{Error, EvalError, Result};
use crate::expr::{build, differentiate, Expr, Program};
use crate::region::AnalysisRegion;
use crate::spectra::SquareMatrix;
use crate::system::{validate_names, parse_components, ParameterSet, SystemDefinition};
use crate::expr::Scope;

/// Value, Jacobian and (optionally) Hessian of a vector map at a point.
#[derive(Debug, Clone, PartialEq)]
pub struct JetValue {
    pub value: Vec<f64>,
    pub jacobian: SquareMatrix,
    /// Flattened `[i][j][k]` = d^2 component_i / dx_j dx_k.
    pub hessian: Option<Vec<f64>>,
}

impl JetValue {
    pub fn dim(&self) -> usize {
        self.value.len()
    }

    pub fn hessian_entry(&self, i: usize, j: usize, k: usize) -> Option<f64> {
        let n = self.dim();
        self.hessian.as_ref().map(|h| h[(i * n + j) * n + k])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum JetOrder {
    First,
    Second,
}

/// Components with eagerly built first partials and lazily built second
/// partials, each compiled to a straight-line program.
#[derive(Debug, Clone)]
struct SymbolicMap {
    state_names: Vec<String>,
    params: ParameterSet,
    components: Vec<Expr>,
    jacobian: Vec<Expr>,
    value_program: Program,
    jet_program: Program,
    hessian: OnceLock<std::result::Result<(Vec<Expr>, Program), EvalError>>,
}

impl SymbolicMap {
    fn new(state_names: Vec<String>, params: ParameterSet, components: Vec<Expr>) -> Result<Self> {
        let n = state_names.len();
        let jacobian: Vec<Expr> = components
            .iter()
            .flat_map(|c| state_names.iter().map(move |x| differentiate(c, x)))
            .collect();
        let value_program = Program::compile(&components, n, &params)?;
        let jet_program = Program::compile(components.iter().chain(&jacobian), n, &params)?;
        Ok(SymbolicMap {
            state_names,
            params,
            components,
            jacobian,
            value_program,
            jet_program,
            hessian: OnceLock::new(),
        })
    }

    fn dim(&self) -> usize {
        self.state_names.len()
    }

    fn hessian(&self) -> std::result::Result<&(Vec<Expr>, Program), EvalError> {
        self.hessian
            .get_or_init(|| {
                let n = self.dim();
                let mut exprs = vec![Expr::Const(0.0); n * n * n];
                for i in 0..n {
                    for j in 0..n {
                        for k in j..n {
                            let d = differentiate(&self.jacobian[i * n + j], &self.state_names[k]);
                            exprs[(i * n + k) * n + j] = d.clone();
                            exprs[(i * n + j) * n + k] = d;
                        }
                    }
                }
                let program = Program::compile(&exprs, n, &self.params)?;
                Ok((exprs, program))
            })
            .as_ref()
            .map_err(Clone::clone)
    }

    fn value(&self, point: &[f64]) -> std::result::Result<Vec<f64>, EvalError> {
        self.value_program.eval(point)
    }

    fn jet(&self, point: &[f64], order: JetOrder) -> std::result::Result<JetValue, EvalError> {
        let n = self.dim();
        let mut out = self.jet_program.eval(point)?;
        let jac = out.split_off(n);
        let jacobian = SquareMatrix::new(n, jac).map_err(|_| EvalError::NonFinite { op: "jacobian" })?;
        let hessian = match order {
            JetOrder::First => None,
            JetOrder::Second => Some(self.hessian()?.1.eval(point)?),
        };
        Ok(JetValue { value: out, jacobian, hessian })
    }
}

/// A compiled autonomous vector field.
#[derive(Debug, Clone)]
pub struct VectorField {
    definition: SystemDefinition,
    map: SymbolicMap,
}

impl VectorField {
    pub fn new(definition: SystemDefinition) -> Result<Self> {
        let map = SymbolicMap::new(
            definition.state_names().to_vec(),
            definition.parameters().clone(),
            definition.components().to_vec(),
        )?;
        Ok(VectorField { definition, map })
    }

    pub fn definition(&self) -> &SystemDefinition {
        &self.definition
    }

    pub fn name(&self) -> &str {
        self.definition.name()
    }

    pub fn dim(&self) -> usize {
        self.definition.dim()
    }

    pub fn state_names(&self) -> &[String] {
        self.definition.state_names()
    }

    pub fn components(&self) -> &[Expr] {
        self.definition.components()
    }

    /// Row-major symbolic Jacobian.
    pub fn jacobian_exprs(&self) -> &[Expr] {
        &self.map.jacobian
    }

    /// Symbolic second partials, flattened `[i][j][k]`.
    pub fn hessian_exprs(&self) -> Result<&[Expr]> {
        Ok(&self.map.hessian()?.0)
    }

    pub fn velocity(&self, point: &[f64]) -> std::result::Result<Vec<f64>, EvalError> {
        self.map.value(point)
    }

    pub fn jet(&self, point: &[f64], order: JetOrder) -> std::result::Result<JetValue, EvalError> {
        self.map.jet(point, order)
    }
}

/// `F_i = sum_j (df_i/dx_j) f_j`, built symbolically.
pub fn acceleration_field(f: &VectorField) -> Result<VectorField> {
    let n = f.dim();
    let jac = f.jacobian_exprs();
    let comps = f.components();
    let accel: Vec<Expr> = (0..n)
        .map(|i| {
            (0..n).fold(Expr::Const(0.0), |acc, j| {
                build::add(acc, build::mul(jac[i * n + j].clone(), comps[j].clone()))
            })
        })
        .collect();
    let def = SystemDefinition::new(
        format!("{}_acceleration", f.name()),
        f.state_names().to_vec(),
        f.definition().parameters().clone(),
        accel,
    )?;
    VectorField::new(def)
}

/// A coordinate change `Y = h(X)` on a declared domain box.
#[derive(Debug, Clone)]
pub struct TransformationMap {
    target_names: Vec<String>,
    domain: AnalysisRegion,
    declared_linear: bool,
    map: SymbolicMap,
}

impl TransformationMap {
    /// Build from parsed components over `source_names`. When
    /// `declared_linear` is set the Hessian is sampled at 100 domain points
    /// and must vanish there.
    pub fn new(
        source_names: Vec<String>,
        target_names: Vec<String>,
        params: ParameterSet,
        components: Vec<Expr>,
        domain: AnalysisRegion,
        declared_linear: bool,
    ) -> Result<Self> {
        validate_names(&source_names, &params)?;
        validate_names(&target_names, &ParameterSet::new())?;
        let n = source_names.len();
        if components.len() != n || target_names.len() != n || domain.dim() != n {
            return Err(Error::Definition(format!(
                "map has {} components, {} target names and a {}-dimensional domain for {} source coordinates",
                components.len(),
                target_names.len(),
                domain.dim(),
                n
            )));
        }
        let map = SymbolicMap::new(source_names, params, components)?;
        let h = TransformationMap { target_names, domain, declared_linear, map };
        if declared_linear {
            let max_entry = h.max_sampled_hessian()?;
            if !(max_entry < 1e-12) {
                return Err(Error::NotLinear { max_entry });
            }
        }
        Ok(h)
    }

    pub fn parse<S: AsRef<str>, T: AsRef<str>, U: AsRef<str>>(
        source_names: &[S],
        target_names: &[T],
        params: ParameterSet,
        sources: &[U],
        domain: AnalysisRegion,
        declared_linear: bool,
    ) -> Result<Self> {
        let source: Vec<String> = source_names.iter().map(|s| s.as_ref().to_string()).collect();
        let target: Vec<String> = target_names.iter().map(|s| s.as_ref().to_string()).collect();
        validate_names(&source, &params)?;
        let pnames: Vec<&str> = params.names().collect();
        let components = parse_components(sources, &Scope::new(&source, &pnames))?;
        TransformationMap::new(source, target, params, components, domain, declared_linear)
    }

    pub fn identity(names: &[String], domain: AnalysisRegion) -> Result<Self> {
        let comps = names.iter().enumerate().map(|(i, n)| Expr::var(n, i)).collect();
        TransformationMap::new(names.to_vec(), names.to_vec(), ParameterSet::new(), comps, domain, true)
    }

    fn max_sampled_hessian(&self) -> Result<f64> {
        let mut worst: f64 = 0.0;
        for p in self.domain.sample_points(2, 100, 0x5eed) {
            let jet = self.map.jet(&p, JetOrder::Second)?;
            if let Some(h) = jet.hessian {
                worst = h.iter().fold(worst, |m, v| m.max(v.abs()));
            }
        }
        Ok(worst)
    }

    pub fn dim(&self) -> usize {
        self.map.dim()
    }

    pub fn source_names(&self) -> &[String] {
        &self.map.state_names
    }

    pub fn target_names(&self) -> &[String] {
        &self.target_names
    }

    pub fn params(&self) -> &ParameterSet {
        &self.map.params
    }

    pub fn components(&self) -> &[Expr] {
        &self.map.components
    }

    pub fn jacobian_exprs(&self) -> &[Expr] {
        &self.map.jacobian
    }

    pub fn domain(&self) -> &AnalysisRegion {
        &self.domain
    }

    pub fn declared_linear(&self) -> bool {
        self.declared_linear
    }

    pub fn apply(&self, point: &[f64]) -> std::result::Result<Vec<f64>, EvalError> {
        self.map.value(point)
    }

    pub fn jet(&self, point: &[f64], order: JetOrder) -> std::result::Result<JetValue, EvalError> {
        self.map.jet(point, order)
    }

    /// Bounding box of `h` over `region` intersected with the domain,
    /// estimated from corners, a grid and random samples.
    pub fn image_of(&self, region: &AnalysisRegion) -> Option<AnalysisRegion> {
        let source = region.intersect(&self.domain)?;
        let per_dim = match self.dim() {
            1 => 201,
            2 => 21,
            _ => 9,
        };
        let images: Vec<Vec<f64>> = source
            .sample_points(per_dim, 256, 0x1a6e)
            .iter()
            .filter_map(|p| self.apply(p).ok())
            .collect();
        AnalysisRegion::bounding(&images)
    }

    /// Smallest pivot of `Dh` over sampled domain points; zero marks a
    /// map that is not locally invertible somewhere.
    pub fn min_jacobian_pivot(&self) -> f64 {
        self.domain
            .sample_points(3, 64, 0xd1ff)
            .iter()
            .filter_map(|p| self.jet(p, JetOrder::First).ok())
            .map(|j| j.jacobian.min_pivot() / j.jacobian.max_abs().max(1.0))
            .fold(f64::INFINITY, f64::min)
    }

    pub fn describe(&self) -> String {
        let comps: Vec<String> = self.components().iter().map(ToString::to_string).collect();
        format!(
            "({}) -> ({}) = ({})",
            self.source_names().join(", "),
            self.target_names.join(", "),
            comps.join(", ")
        )
    }
}

/// Largest `||h_inverse(h(x)) - x||` over 100 samples of `h`'s domain.
pub fn inverse_residual(h: &TransformationMap, h_inverse: &TransformationMap) -> f64 {
    h.domain()
        .sample_points(2, 100, 0x1357)
        .iter()
        .map(|x| {
            h.apply(x)
                .and_then(|y| h_inverse.apply(&y))
                .map(|back| norm(&sub(&back, x)))
                .unwrap_or(f64::INFINITY)
        })
        .fold(0.0, f64::max)
}

/// Transformed velocity at `h(point)`: `Dh(point) f(point)`.
pub fn pushforward_velocity(
    f: &VectorField,
    h: &TransformationMap,
    point: &[f64],
) -> std::result::Result<Vec<f64>, EvalError> {
    let velocity = f.velocity(point)?;
    let dh = h.jet(point, JetOrder::First)?.jacobian;
    Ok(dh.mul_vec(&velocity))
}

/// Transformed acceleration at `h(point)`:
/// `sum_jk H_ijk f_j f_k + sum_j Dh_ij F_j`.
pub fn pushforward_acceleration(
    f: &VectorField,
    h: &TransformationMap,
    point: &[f64],
) -> std::result::Result<Vec<f64>, EvalError> {
    let n = f.dim();
    let fj = f.jet(point, JetOrder::First)?;
    let accel = fj.jacobian.mul_vec(&fj.value);
    let hj = h.jet(point, JetOrder::Second)?;
    let mut out = hj.jacobian.mul_vec(&accel);
    if let Some(hess) = &hj.hessian {
        for (i, o) in out.iter_mut().enumerate() {
            let mut curvature = 0.0;
            for j in 0..n {
                for k in 0..n {
                    curvature += hess[(i * n + j) * n + k] * fj.value[j] * fj.value[k];
                }
            }
            *o += curvature;
        }
    }
    Ok(out)
}

/// Symbolic `g(Y) = [Dh f](h_inverse(Y))` in the target coordinates.
pub fn transformed_system(
    f: &VectorField,
    h: &TransformationMap,
    h_inverse: &TransformationMap,
) -> Result<VectorField> {
    let n = f.dim();
    if h.dim() != n || h_inverse.dim() != n {
        return Err(Error::Definition("map and system dimensions differ".into()));
    }
    if h.source_names() != f.state_names() {
        return Err(Error::Definition(format!(
            "map is written in ({}) but the system state is ({})",
            h.source_names().join(", "),
            f.state_names().join(", ")
        )));
    }
    if h_inverse.source_names() != h.target_names() || h_inverse.target_names() != h.source_names() {
        return Err(Error::Definition("inverse map coordinates do not mirror the map".into()));
    }
    let residual = inverse_residual(h, h_inverse);
    if !(residual < 1e-9) {
        return Err(Error::InverseMismatch { residual });
    }
    let jac = h.jacobian_exprs();
    let comps = f.components();
    let inverse = h_inverse.components();
    let g: Vec<Expr> = (0..n)
        .map(|i| {
            let pushed = (0..n).fold(Expr::Const(0.0), |acc, j| {
                build::add(acc, build::mul(jac[i * n + j].clone(), comps[j].clone()))
            });
            pushed.substitute(&|index, _| inverse[index].clone())
        })
        .collect();
    let params = f
        .definition()
        .parameters()
        .merged(h.params())?
        .merged(h_inverse.params())?;
    let def = SystemDefinition::new(
        format!("{}_transformed", f.name()),
        h.target_names().to_vec(),
        params,
        g,
    )?;
    VectorField::new(def)
}

pub(crate) fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub(crate) fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quadratic(a: f64) -> VectorField {
        let def = SystemDefinition::parse(
            "quadratic",
            &["x"],
            ParameterSet::from_pairs([("A", a)]),
            &["x^2 - A^2"],
        )
        .unwrap();
        VectorField::new(def).unwrap()
    }

    fn affine(alpha: f64, beta: f64) -> (TransformationMap, TransformationMap) {
        let p = ParameterSet::from_pairs([("alpha", alpha), ("beta", beta)]);
        let dom = AnalysisRegion::new(vec![(-10.0, 10.0)]).unwrap();
        let h = TransformationMap::parse(&["x"], &["y"], p.clone(), &["alpha*x + beta"], dom, true).unwrap();
        let img = h.image_of(h.domain()).unwrap();
        let inv = TransformationMap::parse(&["y"], &["x"], p, &["(y - beta)/alpha"], img, true).unwrap();
        (h, inv)
    }

    fn square() -> (TransformationMap, TransformationMap) {
        let dom = AnalysisRegion::new(vec![(0.0, 3.0)]).unwrap();
        let p = ParameterSet::new();
        let h = TransformationMap::parse(&["x"], &["y"], p.clone(), &["x^2"], dom, false).unwrap();
        let img = h.image_of(h.domain()).unwrap();
        let inv = TransformationMap::parse(&["y"], &["x"], p, &["sqrt(y)"], img, false).unwrap();
        (h, inv)
    }

    #[test]
    fn jets_of_field_and_maps() {
        let f = quadratic(1.0);
        let j = f.jet(&[2.0], JetOrder::First).unwrap();
        assert_eq!(j.value, [3.0]);
        assert_eq!(j.jacobian.entries(), [4.0]);
        assert!(j.hessian.is_none());

        let (h, _) = affine(2.0, 5.0);
        let j = h.jet(&[1.0], JetOrder::Second).unwrap();
        assert_eq!((j.value[0], j.jacobian[(0, 0)], j.hessian_entry(0, 0, 0)), (7.0, 2.0, Some(0.0)));

        let (sq, _) = square();
        let j = sq.jet(&[3.0], JetOrder::Second).unwrap();
        assert_eq!((j.value[0], j.jacobian[(0, 0)], j.hessian_entry(0, 0, 0)), (9.0, 6.0, Some(2.0)));
    }

    #[test]
    fn acceleration_of_example_and_constant() {
        let f = quadratic(1.0);
        let acc = acceleration_field(&f).unwrap();
        assert_eq!(acc.components()[0].to_string(), "2*x*(x^2 - A^2)");
        let c = VectorField::new(
            SystemDefinition::parse("c", &["x"], ParameterSet::from_pairs([("c", 3.0)]), &["c"]).unwrap(),
        )
        .unwrap();
        assert_eq!(acceleration_field(&c).unwrap().components()[0], Expr::Const(0.0));
    }

    #[test]
    fn acceleration_of_planar_system() {
        let def = SystemDefinition::parse("p", &["x", "y"], ParameterSet::new(), &["1 - x^2", "-y"]).unwrap();
        let acc = acceleration_field(&VectorField::new(def).unwrap()).unwrap();
        for (x, y) in [(0.3, -1.2), (2.0, 0.5), (-1.5, 3.0)] {
            let v = acc.velocity(&[x, y]).unwrap();
            assert_eq!(v, [-2.0 * x * (1.0 - x * x), y]);
        }
    }

    #[test]
    fn linear_declaration_is_checked() {
        let dom = AnalysisRegion::new(vec![(0.0, 3.0)]).unwrap();
        let err = TransformationMap::parse(&["x"], &["y"], ParameterSet::new(), &["x^2"], dom, true).unwrap_err();
        assert!(matches!(err, Error::NotLinear { .. }));
    }

    #[test]
    fn pushforwards_on_examples() {
        let f = quadratic(1.0);
        let (h, _) = affine(2.0, 5.0);
        assert_eq!(pushforward_velocity(&f, &h, &[0.0]).unwrap(), [-2.0]);
        assert_eq!(pushforward_acceleration(&f, &h, &[2.0]).unwrap(), [24.0]);
        let (sq, _) = square();
        assert_eq!(pushforward_velocity(&f, &sq, &[2.0]).unwrap(), [12.0]);
        assert_eq!(pushforward_acceleration(&f, &sq, &[2.0]).unwrap(), [66.0]);
        let id = TransformationMap::identity(&["x".to_string()], AnalysisRegion::new(vec![(-5.0, 5.0)]).unwrap()).unwrap();
        assert_eq!(pushforward_velocity(&f, &id, &[1.7]).unwrap(), f.velocity(&[1.7]).unwrap());
        let acc = acceleration_field(&f).unwrap();
        assert_eq!(pushforward_acceleration(&f, &id, &[1.7]).unwrap(), acc.velocity(&[1.7]).unwrap());
    }

    #[test]
    fn transformed_systems_match_closed_forms() {
        let f = quadratic(1.0);
        let (h, inv) = affine(2.0, 5.0);
        let g = transformed_system(&f, &h, &inv).unwrap();
        for y in [-3.0, 0.0, 5.0, 7.5] {
            let closed = ((y - 5.0) * (y - 5.0) - 4.0) / 2.0;
            assert!((g.velocity(&[y]).unwrap()[0] - closed).abs() < 1e-12);
        }
        let (sq, sq_inv) = square();
        let g = transformed_system(&f, &sq, &sq_inv).unwrap();
        for y in [0.0, 0.25, 1.0, 4.0] {
            let closed = 2.0 * f64::sqrt(y) * (y - 1.0);
            assert!((g.velocity(&[y]).unwrap()[0] - closed).abs() < 1e-12);
        }
        let names = vec!["x".to_string()];
        let id = TransformationMap::identity(&names, AnalysisRegion::new(vec![(-5.0, 5.0)]).unwrap()).unwrap();
        let g = transformed_system(&f, &id, &id).unwrap();
        assert_eq!(g.components(), f.components());
    }

    #[test]
    fn bad_inverse_is_rejected() {
        let f = quadratic(1.0);
        let (h, _) = affine(2.0, 5.0);
        let p = ParameterSet::from_pairs([("beta", 5.0)]);
        let wrong = TransformationMap::parse(&["y"], &["x"], p, &["y - beta"], h.image_of(h.domain()).unwrap(), true).unwrap();
        assert!(matches!(transformed_system(&f, &h, &wrong), Err(Error::InverseMismatch { .. })));
    }

    #[test]
    fn hessian_is_symmetric() {
        let def = SystemDefinition::parse(
            "s",
            &["x", "y", "z"],
            ParameterSet::new(),
            &["x*y^2*sin(z)", "exp(x*z) + y^3", "log(1 + x^2*y^2) - z*x"],
        )
        .unwrap();
        let f = VectorField::new(def).unwrap();
        let j = f.jet(&[0.3, -0.7, 1.1], JetOrder::Second).unwrap();
        for i in 0..3 {
            for a in 0..3 {
                for b in 0..3 {
                    let d = j.hessian_entry(i, a, b).unwrap() - j.hessian_entry(i, b, a).unwrap();
                    assert!(d.abs() <= 1e-12);
                }
            }
        }
    }
}
