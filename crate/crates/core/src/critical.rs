//! Multi-start damped Newton search for fixed points (`f = 0`) and
//! perpetual points (`F = 0` with `f != 0`).

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, EvalError, Result};
use crate::field::{acceleration_field, norm, JetOrder, VectorField};
use crate::region::AnalysisRegion;
use crate::spectra::{eigenvalues, solve_linear, SquareMatrix, Spectrum};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub seed_count: usize,
    pub max_newton_iters: usize,
    pub root_tol: f64,
    pub dedup_tol: f64,
    /// Velocity norm separating fixed points from perpetual points.
    pub velocity_floor: f64,
    pub backtrack: f64,
    pub min_step: f64,
    pub rng_seed: u64,
    /// Newton may roam this fraction of the region width outside it; roots
    /// found there are reported with `boundary = true`.
    pub boundary_margin: f64,
    /// Relative pivot below which the Jacobian at a root counts as singular.
    pub degenerate_pivot: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            seed_count: 256,
            max_newton_iters: 100,
            root_tol: 1e-10,
            dedup_tol: 1e-6,
            velocity_floor: 1e-6,
            backtrack: 0.5,
            min_step: 1e-12,
            rng_seed: 0,
            boundary_margin: 0.1,
            degenerate_pivot: 1e-10,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("root_tol", self.root_tol),
            ("dedup_tol", self.dedup_tol),
            ("velocity_floor", self.velocity_floor),
            ("min_step", self.min_step),
            ("degenerate_pivot", self.degenerate_pivot),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Config(format!("{name} must be positive, got {v}")));
            }
        }
        if self.root_tol >= self.dedup_tol {
            return Err(Error::Config("root_tol must be smaller than dedup_tol".into()));
        }
        if !(self.backtrack > 0.0 && self.backtrack < 1.0) {
            return Err(Error::Config("backtrack factor must lie in (0, 1)".into()));
        }
        if self.seed_count == 0 || self.max_newton_iters == 0 {
            return Err(Error::Config("seed_count and max_newton_iters must be positive".into()));
        }
        if !(self.boundary_margin >= 0.0) {
            return Err(Error::Config("boundary_margin must be non-negative".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PointKind {
    FixedPoint,
    PerpetualPoint,
}

impl PointKind {
    pub fn label(self) -> &'static str {
        match self {
            PointKind::FixedPoint => "fixed point",
            PointKind::PerpetualPoint => "perpetual point",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriticalPoint {
    pub kind: PointKind,
    pub location: Vec<f64>,
    /// Norm of the solved field (`f` or `F`) at the location.
    pub residual: f64,
    pub velocity: Vec<f64>,
    pub velocity_norm: f64,
    /// Eigenvalues of `Df` at fixed points, of `DF` at perpetual points.
    pub spectrum: Spectrum,
    pub degenerate: bool,
    /// Located outside the search region, inside its margin band.
    pub boundary: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointSearch {
    pub points: Vec<CriticalPoint>,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NewtonRoot {
    pub location: Vec<f64>,
    pub residual: f64,
    pub iterations: usize,
}

/// Residual function with Jacobian, as seen by the Newton solver.
pub(crate) trait ResidualMap: Sync {
    fn residual(&self, x: &[f64]) -> std::result::Result<Vec<f64>, EvalError>;
    fn residual_jacobian(&self, x: &[f64]) -> std::result::Result<(Vec<f64>, SquareMatrix), EvalError>;
}

impl ResidualMap for VectorField {
    fn residual(&self, x: &[f64]) -> std::result::Result<Vec<f64>, EvalError> {
        self.velocity(x)
    }

    fn residual_jacobian(&self, x: &[f64]) -> std::result::Result<(Vec<f64>, SquareMatrix), EvalError> {
        let jet = self.jet(x, JetOrder::First)?;
        Ok((jet.value, jet.jacobian))
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn no_convergence(reason: &'static str, iterations: usize, residual: f64) -> Error {
    Error::NewtonNoConvergence { reason, iterations, residual }
}

/// Damped Newton with backtracking on `||r||^2`, confined to `bounds`.
pub(crate) fn damped_newton<R: ResidualMap + ?Sized>(
    map: &R,
    seed: &[f64],
    bounds: &AnalysisRegion,
    cfg: &SolverConfig,
) -> Result<NewtonRoot> {
    let mut x = seed.to_vec();
    let (mut r, mut jac) = map
        .residual_jacobian(&x)
        .map_err(|_| no_convergence("domain error at seed", 0, f64::NAN))?;
    let mut norm_r = norm(&r);
    let mut iterations = 0;
    // A small residual alone is not enough near a multiple root, where the
    // residual is flat; the Newton correction must be small as well.
    let step_tol = 1e-2 * cfg.dedup_tol;
    loop {
        let neg_r: Vec<f64> = r.iter().map(|v| -v).collect();
        let newton = solve_linear(&jac, &neg_r).ok();
        let small = norm_r <= cfg.root_tol;
        if small && newton.as_ref().is_none_or(|d| norm(d) <= step_tol) {
            break;
        }
        if iterations == cfg.max_newton_iters {
            return Err(no_convergence("iteration cap", iterations, norm_r));
        }
        iterations += 1;
        let direction = newton.unwrap_or_else(|| jac.transpose().mul_vec(&neg_r));
        // slope of 0.5*||r||^2 along the direction
        let slope = dot(&jac.transpose().mul_vec(&r), &direction);
        if !(slope < 0.0) {
            if small {
                break;
            }
            return Err(no_convergence("singular jacobian without descent", iterations, norm_r));
        }
        let mut step = 1.0;
        let accepted = loop {
            let trial: Vec<f64> = x.iter().zip(&direction).map(|(a, d)| a + step * d).collect();
            if bounds.contains(&trial, 0.0) {
                if let Ok(rt) = map.residual(&trial) {
                    let nt = norm(&rt);
                    if nt * nt <= norm_r * norm_r + 2e-4 * step * slope {
                        break Some(trial);
                    }
                }
            }
            step *= cfg.backtrack;
            if step < cfg.min_step {
                break None;
            }
        };
        let Some(trial) = accepted else {
            if small {
                // at the precision floor
                break;
            }
            return Err(no_convergence("line search found no descent", iterations, norm_r));
        };
        x = trial;
        (r, jac) = map
            .residual_jacobian(&x)
            .map_err(|_| no_convergence("domain error", iterations, norm_r))?;
        norm_r = norm(&r);
    }
    // a few undamped steps to reach working precision where they help
    for _ in 0..3 {
        let neg_r: Vec<f64> = r.iter().map(|v| -v).collect();
        let Ok(d) = solve_linear(&jac, &neg_r) else { break };
        let trial: Vec<f64> = x.iter().zip(&d).map(|(a, b)| a + b).collect();
        if !bounds.contains(&trial, 0.0) {
            break;
        }
        match map.residual_jacobian(&trial) {
            Ok((rt, jt)) if norm(&rt) < norm_r => {
                x = trial;
                norm_r = norm(&rt);
                r = rt;
                jac = jt;
            }
            _ => break,
        }
    }
    Ok(NewtonRoot { location: x, residual: norm_r, iterations })
}

/// Solve `field(x) = 0` from `seed`, staying inside `bounds`.
pub fn newton_root(
    field: &VectorField,
    seed: &[f64],
    bounds: &AnalysisRegion,
    cfg: &SolverConfig,
) -> Result<NewtonRoot> {
    damped_newton(field, seed, bounds, cfg)
}

pub(crate) fn is_degenerate(m: &SquareMatrix, cfg: &SolverConfig) -> bool {
    m.min_pivot() < cfg.degenerate_pivot * m.max_abs().max(1.0)
}

fn lexicographic(a: &[f64], b: &[f64]) -> std::cmp::Ordering {
    a.iter()
        .zip(b)
        .map(|(x, y)| x.total_cmp(y))
        .find(|o| o.is_ne())
        .unwrap_or(std::cmp::Ordering::Equal)
}

/// Keep the lowest-residual representative of every cluster of points
/// closer than `tol`, then order by location.
pub(crate) fn deduplicate(mut points: Vec<CriticalPoint>, tol: f64) -> Vec<CriticalPoint> {
    points.sort_by(|a, b| a.residual.total_cmp(&b.residual).then(lexicographic(&a.location, &b.location)));
    let mut kept: Vec<CriticalPoint> = Vec::new();
    for p in points {
        let close = kept.iter().any(|k| {
            let d: Vec<f64> = k.location.iter().zip(&p.location).map(|(a, b)| a - b).collect();
            norm(&d) <= tol
        });
        if !close {
            kept.push(p);
        }
    }
    kept.sort_by(|a, b| lexicographic(&a.location, &b.location));
    kept
}

fn multistart(field: &VectorField, region: &AnalysisRegion, cfg: &SolverConfig) -> Vec<NewtonRoot> {
    let bounds = region.expanded(cfg.boundary_margin);
    let seeds = region.lattice(cfg.seed_count, cfg.rng_seed);
    let roots: Vec<Option<NewtonRoot>> = seeds
        .par_iter()
        .map(|seed| damped_newton(field, seed, &bounds, cfg).ok())
        .collect();
    roots.into_iter().flatten().collect()
}

fn continuum_warning(points: &[CriticalPoint], kind: PointKind) -> Option<String> {
    let degenerate = points.iter().filter(|p| p.degenerate).count();
    (degenerate > 10).then(|| {
        format!(
            "degenerate continuum: {degenerate} non-isolated {} roots with singular Jacobian; \
             the listed {}s sample a continuum and are not an isolated set",
            kind.label(),
            kind.label()
        )
    })
}

fn check_dims(f: &VectorField, region: &AnalysisRegion, cfg: &SolverConfig) -> Result<()> {
    cfg.validate()?;
    if region.dim() != f.dim() {
        return Err(Error::Region(format!(
            "region has {} dimensions, system has {}",
            region.dim(),
            f.dim()
        )));
    }
    Ok(())
}

/// Build the record for a converged root of `f` (fixed) or of `accel`
/// (perpetual); `None` when a perpetual candidate has velocity below the floor.
pub(crate) fn critical_point_at(
    f: &VectorField,
    accel: &VectorField,
    kind: PointKind,
    root: NewtonRoot,
    region: &AnalysisRegion,
    cfg: &SolverConfig,
) -> Result<Option<CriticalPoint>> {
    let velocity = f.velocity(&root.location)?;
    let velocity_norm = norm(&velocity);
    let solved = match kind {
        PointKind::FixedPoint => f,
        PointKind::PerpetualPoint => {
            if velocity_norm <= cfg.velocity_floor {
                return Ok(None);
            }
            accel
        }
    };
    let jacobian = solved.jet(&root.location, JetOrder::First)?.jacobian;
    Ok(Some(CriticalPoint {
        kind,
        residual: root.residual,
        velocity,
        velocity_norm,
        spectrum: eigenvalues(&jacobian)?,
        degenerate: is_degenerate(&jacobian, cfg),
        boundary: !region.contains(&root.location, cfg.dedup_tol),
        location: root.location,
    }))
}

pub(crate) fn search_with(
    f: &VectorField,
    accel: &VectorField,
    kind: PointKind,
    region: &AnalysisRegion,
    cfg: &SolverConfig,
) -> Result<PointSearch> {
    check_dims(f, region, cfg)?;
    let solved = match kind {
        PointKind::FixedPoint => f,
        PointKind::PerpetualPoint => accel,
    };
    let mut points = Vec::new();
    for root in multistart(solved, region, cfg) {
        points.extend(critical_point_at(f, accel, kind, root, region, cfg)?);
    }
    let points = deduplicate(points, cfg.dedup_tol);
    let warnings = continuum_warning(&points, kind).into_iter().collect();
    Ok(PointSearch { points, warnings })
}

/// Zeros of `f` in `region`, each with the eigenvalues of `Df`.
pub fn find_fixed_points(f: &VectorField, region: &AnalysisRegion, cfg: &SolverConfig) -> Result<PointSearch> {
    // the acceleration argument is not consulted for fixed points
    search_with(f, f, PointKind::FixedPoint, region, cfg)
}

/// Zeros of the acceleration field with velocity above the floor, each
/// with the eigenvalues of `DF`.
pub fn find_perpetual_points(f: &VectorField, region: &AnalysisRegion, cfg: &SolverConfig) -> Result<PointSearch> {
    let accel = acceleration_field(f)?;
    search_with(f, &accel, PointKind::PerpetualPoint, region, cfg)
}

/// Classify a given point: fixed if `||f|| <= velocity_floor`, perpetual
/// if `||f||` exceeds the floor while `||F|| <= root_tol`, otherwise none.
pub fn classify_point(f: &VectorField, point: &[f64], cfg: &SolverConfig) -> Result<Option<CriticalPoint>> {
    let accel = acceleration_field(f)?;
    classify_with(f, &accel, point, cfg)
}

pub(crate) fn classify_with(
    f: &VectorField,
    accel: &VectorField,
    point: &[f64],
    cfg: &SolverConfig,
) -> Result<Option<CriticalPoint>> {
    let fj = f.jet(point, JetOrder::First)?;
    let velocity_norm = norm(&fj.value);
    if velocity_norm <= cfg.velocity_floor {
        return Ok(Some(CriticalPoint {
            kind: PointKind::FixedPoint,
            location: point.to_vec(),
            residual: velocity_norm,
            spectrum: eigenvalues(&fj.jacobian)?,
            degenerate: is_degenerate(&fj.jacobian, cfg),
            velocity: fj.value,
            velocity_norm,
            boundary: false,
        }));
    }
    let aj = accel.jet(point, JetOrder::First)?;
    let residual = norm(&aj.value);
    if residual <= cfg.root_tol {
        return Ok(Some(CriticalPoint {
            kind: PointKind::PerpetualPoint,
            location: point.to_vec(),
            residual,
            spectrum: eigenvalues(&aj.jacobian)?,
            degenerate: is_degenerate(&aj.jacobian, cfg),
            velocity: fj.value,
            velocity_norm,
            boundary: false,
        }));
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::system::{ParameterSet, SystemDefinition};

    fn field(states: &[&str], params: &[(&str, f64)], comps: &[&str]) -> VectorField {
        let def = SystemDefinition::parse("t", states, ParameterSet::from_pairs(params.iter().copied()), comps).unwrap();
        VectorField::new(def).unwrap()
    }

    fn line(lo: f64, hi: f64) -> AnalysisRegion {
        AnalysisRegion::new(vec![(lo, hi)]).unwrap()
    }

    #[test]
    fn newton_examples() {
        let cfg = SolverConfig::default();
        let f = field(&["x"], &[("A", 1.0)], &["x^2 - A^2"]);
        let acc = acceleration_field(&f).unwrap();
        let bounds = line(-3.0, 3.0);
        let r = newton_root(&acc, &[0.3], &bounds, &cfg).unwrap();
        assert!(r.location[0].abs() < 1e-12);
        let g = field(&["x"], &[], &["x^2 - 1"]);
        let r = newton_root(&g, &[0.9], &bounds, &cfg).unwrap();
        assert!((r.location[0] - 1.0).abs() < 1e-14);
        let h = field(&["x"], &[], &["x^2 + 1"]);
        assert!(matches!(newton_root(&h, &[0.0], &bounds, &cfg), Err(Error::NewtonNoConvergence { .. })));
    }

    #[test]
    fn quadratic_points() {
        let cfg = SolverConfig::default();
        let f = field(&["x"], &[("A", 1.0)], &["x^2 - A^2"]);
        let fps = find_fixed_points(&f, &line(-3.0, 3.0), &cfg).unwrap();
        let locs: Vec<f64> = fps.points.iter().map(|p| p.location[0]).collect();
        assert_eq!(locs.len(), 2);
        assert!((locs[0] + 1.0).abs() < 1e-12 && (locs[1] - 1.0).abs() < 1e-12);
        assert!((fps.points[0].spectrum.values()[0].re + 2.0).abs() < 1e-12);
        assert!((fps.points[1].spectrum.values()[0].re - 2.0).abs() < 1e-12);

        let pps = find_perpetual_points(&f, &line(-3.0, 3.0), &cfg).unwrap();
        assert_eq!(pps.points.len(), 1);
        let pp = &pps.points[0];
        assert!(pp.location[0].abs() < 1e-12);
        assert!((pp.velocity[0] + 1.0).abs() < 1e-12);
        assert!((pp.spectrum.values()[0].re + 2.0).abs() < 1e-12);
        assert!(pps.warnings.is_empty());

        let none = field(&["x"], &[("A", 1.0)], &["x^2 + A^2"]);
        assert!(find_fixed_points(&none, &line(-3.0, 3.0), &cfg).unwrap().points.is_empty());
    }

    #[test]
    fn classification_examples() {
        let cfg = SolverConfig::default();
        let f = field(&["x"], &[("A", 1.0)], &["x^2 - A^2"]);
        assert_eq!(classify_point(&f, &[1.0], &cfg).unwrap().unwrap().kind, PointKind::FixedPoint);
        assert_eq!(classify_point(&f, &[0.0], &cfg).unwrap().unwrap().kind, PointKind::PerpetualPoint);
        assert!(classify_point(&f, &[0.5], &cfg).unwrap().is_none());
    }

    #[test]
    fn nilpotent_system_is_flagged() {
        let cfg = SolverConfig { seed_count: 64, ..SolverConfig::default() };
        let f = field(&["x", "y"], &[], &["y", "0"]);
        let region = AnalysisRegion::cube(2, -1.0, 1.0).unwrap();
        let pps = find_perpetual_points(&f, &region, &cfg).unwrap();
        assert!(!pps.points.is_empty());
        assert!(pps.points.iter().all(|p| p.degenerate));
        assert!(pps.warnings.iter().any(|w| w.contains("degenerate continuum")));
    }

    #[test]
    fn config_validation() {
        let bad = SolverConfig { root_tol: 1e-5, dedup_tol: 1e-6, ..SolverConfig::default() };
        assert!(bad.validate().is_err());
        assert!(SolverConfig { backtrack: 1.0, ..SolverConfig::default() }.validate().is_err());
        assert!(SolverConfig::default().validate().is_ok());
    }
}
