use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;

use perpetua::{
    acceleration_field, find_fixed_points, find_perpetual_points, integrate_prefix, transformed_system,
    verify_conjugacy, AnalysisRegion, ConjugacyReport, CriticalPoint, IntegratorConfig, SolverConfig, Spectrum,
    TheoremId, Tolerances, VectorField,
};

use crate::files::{in_file, load_map, load_system, region_from_pairs, Loaded, MapFile, SystemFile};
use crate::CliError;

#[derive(Debug, Clone, Serialize)]
pub struct InputDigest {
    pub role: &'static str,
    pub file: String,
    pub sha256: String,
}

impl InputDigest {
    fn of<T>(role: &'static str, loaded: &Loaded<T>) -> Self {
        InputDigest { role, file: loaded.label.clone(), sha256: loaded.sha256.clone() }
    }
}

/// Top-level report: tool identity, input digests and the command body.
#[derive(Debug, Clone, Serialize)]
pub struct ReportDocument<T> {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'static str,
    pub inputs: Vec<InputDigest>,
    #[serde(flatten)]
    pub body: T,
}

impl<T> ReportDocument<T> {
    fn new(command: &'static str, inputs: Vec<InputDigest>, body: T) -> Self {
        ReportDocument { tool: "perpetua", version: env!("CARGO_PKG_VERSION"), command, inputs, body }
    }
}

impl<T: Serialize> ReportDocument<T> {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Analysis {
    pub system: SystemFile,
    /// Components of the acceleration field `F = Df f`.
    pub acceleration: Vec<String>,
    pub region: AnalysisRegion,
    pub solver: SolverConfig,
    pub fixed_points: Vec<CriticalPoint>,
    pub perpetual_points: Vec<CriticalPoint>,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Transform {
    pub map: MapFile,
    /// Definition of `g`, ready to be saved and analysed on its own.
    pub transformed: SystemFile,
    pub analysis: Analysis,
}

#[derive(Debug, Clone, Serialize)]
pub struct Verification {
    pub passed: bool,
    pub report: ConjugacyReport,
}

/// Parse `lo:hi[,lo:hi...]`.
pub fn parse_region(spec: &str) -> Result<AnalysisRegion, CliError> {
    let bad = || CliError::Input(format!("invalid region `{spec}`: expected lo:hi[,lo:hi...]"));
    let pairs = spec
        .split(',')
        .map(|part| {
            let (lo, hi) = part.split_once(':').ok_or_else(bad)?;
            let lo: f64 = lo.trim().parse().map_err(|_| bad())?;
            let hi: f64 = hi.trim().parse().map_err(|_| bad())?;
            Ok([lo, hi])
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    region_from_pairs(&pairs).map_err(|e| CliError::Input(format!("invalid region `{spec}`: {e}")))
}

fn resolve_region(
    sys: &Loaded<SystemFile>,
    f: &VectorField,
    region: Option<&AnalysisRegion>,
) -> Result<AnalysisRegion, CliError> {
    let region = match (region, sys.file.region()) {
        (Some(r), _) => r.clone(),
        (None, Some(r)) => r.map_err(|e| in_file(&sys.label, e))?,
        (None, None) => {
            return Err(CliError::Input(format!("{}: no region in the file; pass --region", sys.label)))
        }
    };
    if region.dim() != f.dim() {
        return Err(CliError::Input(format!(
            "region has {} dimensions but {} has {}",
            region.dim(),
            f.name(),
            f.dim()
        )));
    }
    Ok(region)
}

fn load_field(path: &Path) -> Result<(Loaded<SystemFile>, VectorField), CliError> {
    let sys = load_system(path)?;
    let f = sys.file.to_field().map_err(|e| in_file(&sys.label, e))?;
    Ok((sys, f))
}

fn analysis_of(f: &VectorField, system: SystemFile, region: AnalysisRegion, solver: &SolverConfig) -> Result<Analysis, CliError> {
    solver.validate().map_err(|e| CliError::Input(e.to_string()))?;
    let accel = acceleration_field(f).map_err(CliError::from_library)?;
    let fps = find_fixed_points(f, &region, solver).map_err(CliError::from_library)?;
    let pps = find_perpetual_points(f, &region, solver).map_err(CliError::from_library)?;
    Ok(Analysis {
        system,
        acceleration: accel.components().iter().map(ToString::to_string).collect(),
        region,
        solver: solver.clone(),
        fixed_points: fps.points,
        perpetual_points: pps.points,
        warnings: fps.warnings.into_iter().chain(pps.warnings).collect(),
    })
}

pub fn analyze(
    system: &Path,
    region: Option<&AnalysisRegion>,
    solver: &SolverConfig,
) -> Result<ReportDocument<Analysis>, CliError> {
    let (sys, f) = load_field(system)?;
    let region = resolve_region(&sys, &f, region)?;
    let body = analysis_of(&f, sys.file.clone(), region, solver)?;
    Ok(ReportDocument::new("analyze", vec![InputDigest::of("system", &sys)], body))
}

struct Pair {
    sys: Loaded<SystemFile>,
    map: Loaded<MapFile>,
    f: VectorField,
    h: perpetua::TransformationMap,
    region: AnalysisRegion,
}

fn load_pair(system: &Path, map: &Path, region: Option<&AnalysisRegion>) -> Result<Pair, CliError> {
    let (sys, f) = load_field(system)?;
    let region = resolve_region(&sys, &f, region)?;
    let map = load_map(map)?;
    if map.file.map.len() != f.dim() {
        return Err(CliError::Input(format!(
            "{}: map has {} components for a {}-dimensional system",
            map.label,
            map.file.map.len(),
            f.dim()
        )));
    }
    let h = map.file.to_map(f.state_names()).map_err(|e| in_file(&map.label, e))?;
    Ok(Pair { sys, map, f, h, region })
}

fn transformed_of(pair: &Pair) -> Result<VectorField, CliError> {
    let inverse = pair
        .map
        .file
        .to_inverse(&pair.h)
        .ok_or_else(|| CliError::Input(format!("{}: map has no `inverse`; it is needed to build g", pair.map.label)))?
        .map_err(|e| in_file(&pair.map.label, e))?;
    transformed_system(&pair.f, &pair.h, &inverse).map_err(|e| in_file(&pair.map.label, e))
}

fn image_region(pair: &Pair) -> Result<AnalysisRegion, CliError> {
    pair.h
        .image_of(&pair.region)
        .ok_or_else(|| CliError::Input("region does not overlap the map domain".into()))
}

pub fn transform(
    system: &Path,
    map: &Path,
    region: Option<&AnalysisRegion>,
    solver: &SolverConfig,
) -> Result<ReportDocument<Transform>, CliError> {
    let pair = load_pair(system, map, region)?;
    let g = transformed_of(&pair)?;
    let image = image_region(&pair)?;
    let transformed = SystemFile::from_field(&g, Some(&image));
    let analysis = analysis_of(&g, transformed.clone(), image, solver)?;
    let inputs = vec![InputDigest::of("system", &pair.sys), InputDigest::of("map", &pair.map)];
    Ok(ReportDocument::new("transform", inputs, Transform { map: pair.map.file.clone(), transformed, analysis }))
}

#[derive(Debug, Clone)]
pub struct VerifyRequest<'a> {
    pub system: &'a Path,
    pub map: &'a Path,
    /// Independent definition of `g`; built from the inverse map otherwise.
    pub target: Option<&'a Path>,
    pub region: Option<&'a AnalysisRegion>,
    pub solver: SolverConfig,
    pub tolerances: Tolerances,
    pub integrator: IntegratorConfig,
    pub theorems: Vec<TheoremId>,
}

pub fn verify(req: &VerifyRequest<'_>) -> Result<ReportDocument<Verification>, CliError> {
    let pair = load_pair(req.system, req.map, req.region)?;
    let mut inputs = vec![InputDigest::of("system", &pair.sys), InputDigest::of("map", &pair.map)];
    let g = match req.target {
        Some(path) => {
            let (tsys, g) = load_field(path)?;
            if g.state_names() != pair.h.target_names() {
                return Err(CliError::Input(format!(
                    "{}: state ({}) does not match the map's target coordinates ({})",
                    tsys.label,
                    g.state_names().join(", "),
                    pair.h.target_names().join(", ")
                )));
            }
            inputs.push(InputDigest::of("target", &tsys));
            g
        }
        None => transformed_of(&pair)?,
    };
    req.solver.validate().map_err(|e| CliError::Input(e.to_string()))?;
    req.tolerances.validate().map_err(|e| CliError::Input(e.to_string()))?;
    req.integrator.validate().map_err(|e| CliError::Input(e.to_string()))?;
    let report = verify_conjugacy(
        &pair.f,
        &g,
        &pair.h,
        &pair.region,
        &req.solver,
        &req.tolerances,
        &req.integrator,
        &req.theorems,
    )
    .map_err(CliError::from_library)?;
    Ok(ReportDocument::new("verify", inputs, Verification { passed: report.passed(), report }))
}

fn num(v: f64) -> String {
    if v == 0.0 {
        "0".to_string()
    } else if v.is_nan() {
        "nan".to_string()
    } else {
        format!("{v:?}")
    }
}

fn spectrum_cell(s: &Spectrum) -> String {
    s.values()
        .iter()
        .map(|z| if z.im == 0.0 { num(z.re) } else { format!("{}{:+}i", num(z.re), z.im) })
        .collect::<Vec<_>>()
        .join(";")
}

/// One row per critical point.
pub fn points_csv(analysis: &Analysis) -> String {
    let n = analysis.system.state.len();
    let mut out = String::from("kind");
    for name in &analysis.system.state {
        let _ = write!(out, ",{name}");
    }
    out.push_str(",residual,velocity_norm,spectrum,degenerate,boundary\n");
    for p in analysis.fixed_points.iter().chain(&analysis.perpetual_points) {
        out.push_str(match p.kind {
            perpetua::PointKind::FixedPoint => "fixed",
            perpetua::PointKind::PerpetualPoint => "perpetual",
        });
        for v in p.location.iter().take(n) {
            let _ = write!(out, ",{}", num(*v));
        }
        let _ = writeln!(
            out,
            ",{},{},{},{},{}",
            num(p.residual),
            num(p.velocity_norm),
            spectrum_cell(&p.spectrum),
            p.degenerate,
            p.boundary
        );
    }
    out
}

/// One row per check.
pub fn checks_csv(v: &Verification) -> String {
    let mut out = String::from("theorem_id,verdict,worst_residual,tolerance\n");
    for c in &v.report.checks {
        let _ = writeln!(out, "{},{},{},{}", c.theorem_id, c.verdict.label(), num(c.worst_residual), num(c.tolerance));
    }
    out
}

#[derive(Debug, Clone)]
pub struct PortraitRequest<'a> {
    pub system: &'a Path,
    pub region: Option<&'a AnalysisRegion>,
    /// Points per axis.
    pub grid: Vec<usize>,
    pub trajectories: usize,
    pub starts: Vec<Vec<f64>>,
    pub horizon: f64,
    pub samples: usize,
    pub rng_seed: u64,
    pub integrator: IntegratorConfig,
    pub out: &'a Path,
}

#[derive(Debug, Clone, Serialize)]
pub struct PortraitSummary {
    pub files: Vec<PathBuf>,
    pub warnings: Vec<String>,
}

/// Parse `N` or `NxM`.
pub fn parse_grid(spec: &str) -> Result<Vec<usize>, CliError> {
    let counts = spec
        .split(['x', 'X'])
        .map(|p| p.trim().parse::<usize>().ok().filter(|n| *n >= 2))
        .collect::<Option<Vec<_>>>()
        .filter(|v| !v.is_empty() && v.len() <= 2)
        .ok_or_else(|| CliError::Input(format!("invalid grid `{spec}`: expected N or NxM with N, M >= 2")))?;
    Ok(counts)
}

/// Parse `x[,y]`.
pub fn parse_point(spec: &str) -> Result<Vec<f64>, CliError> {
    spec.split(',')
        .map(|p| p.trim().parse::<f64>().ok().filter(|v| v.is_finite()))
        .collect::<Option<Vec<_>>>()
        .ok_or_else(|| CliError::Input(format!("invalid point `{spec}`")))
}

fn axis(lo: f64, hi: f64, count: usize, i: usize) -> f64 {
    lo + (hi - lo) * i as f64 / (count - 1) as f64
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    std::fs::write(path, contents).map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))
}

/// Grid samples of `f` and `F`, plus one file per trajectory.
pub fn portrait(req: &PortraitRequest<'_>) -> Result<PortraitSummary, CliError> {
    let (sys, f) = load_field(req.system)?;
    let n = f.dim();
    if n > 2 {
        return Err(CliError::Input(format!("portraits need a 1-D or 2-D system, {} has {n} dimensions", f.name())));
    }
    let region = resolve_region(&sys, &f, req.region)?;
    let grid: Vec<usize> = match (n, req.grid.as_slice()) {
        (1, [c]) => vec![*c],
        (2, [c]) => vec![*c, *c],
        (2, [a, b]) => vec![*a, *b],
        _ => return Err(CliError::Input(format!("grid needs {n} counts for a {n}-dimensional system"))),
    };
    for s in &req.starts {
        if s.len() != n {
            return Err(CliError::Input(format!("start point has {} coordinates, expected {n}", s.len())));
        }
    }
    req.integrator.validate().map_err(|e| CliError::Input(e.to_string()))?;
    if req.samples < 2 || !req.horizon.is_finite() {
        return Err(CliError::Input("trajectories need a finite --T and at least two samples".into()));
    }
    let accel = acceleration_field(&f).map_err(CliError::from_library)?;
    std::fs::create_dir_all(req.out)
        .map_err(|e| CliError::Io(format!("cannot create {}: {e}", req.out.display())))?;

    let names = ["x", "y"];
    let mut csv = String::new();
    csv.push_str(&names[..n].join(","));
    for prefix in ["f", "F"] {
        for i in 1..=n {
            let _ = write!(csv, ",{prefix}{i}");
        }
    }
    csv.push('\n');
    let bounds = region.bounds();
    let total: usize = grid.iter().product();
    for flat in 0..total {
        let point: Vec<f64> = if n == 1 {
            vec![axis(bounds[0].0, bounds[0].1, grid[0], flat)]
        } else {
            let (i, j) = (flat / grid[1], flat % grid[1]);
            vec![axis(bounds[0].0, bounds[0].1, grid[0], i), axis(bounds[1].0, bounds[1].1, grid[1], j)]
        };
        let vel = f.velocity(&point).unwrap_or_else(|_| vec![f64::NAN; n]);
        let acc = accel.velocity(&point).unwrap_or_else(|_| vec![f64::NAN; n]);
        let cells: Vec<String> = point.iter().chain(&vel).chain(&acc).map(|v| num(*v)).collect();
        csv.push_str(&cells.join(","));
        csv.push('\n');
    }
    let grid_path = req.out.join("grid.csv");
    write_file(&grid_path, &csv)?;
    let mut summary = PortraitSummary { files: vec![grid_path], warnings: Vec::new() };

    let mut starts = req.starts.clone();
    if starts.len() < req.trajectories {
        let lattice = region.lattice(req.trajectories, req.rng_seed);
        let missing = req.trajectories - starts.len();
        starts.extend((0..missing).map(|i| lattice[i * lattice.len() / missing].clone()));
    }
    for (k, x0) in starts.iter().enumerate() {
        let (traj, err) = integrate_prefix(&f, x0, req.horizon, req.samples, &req.integrator)
            .map_err(CliError::from_library)?;
        if let Some(e) = err {
            summary.warnings.push(format!("trajectory {}: stopped early: {e}", k + 1));
        }
        let mut out = String::from("t,");
        out.push_str(&names[..n].join(","));
        out.push('\n');
        for (t, x) in traj.times.iter().zip(&traj.states) {
            let cells: Vec<String> = std::iter::once(t).chain(x).map(|v| num(*v)).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        let path = req.out.join(format!("trajectory_{}.csv", k + 1));
        write_file(&path, &out)?;
        summary.files.push(path);
    }
    Ok(summary)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn region_and_grid_syntax() {
        assert_eq!(parse_region("-3:3").unwrap().bounds(), [(-3.0, 3.0)]);
        assert_eq!(parse_region("0:1, -2:2").unwrap().bounds(), [(0.0, 1.0), (-2.0, 2.0)]);
        assert!(parse_region("3:-3").is_err());
        assert!(parse_region("1").is_err());
        assert_eq!(parse_grid("101").unwrap(), [101]);
        assert_eq!(parse_grid("2x3").unwrap(), [2, 3]);
        assert!(parse_grid("1x3").is_err());
        assert!(parse_grid("2x2x2").is_err());
        assert_eq!(parse_point("1, -0.5").unwrap(), [1.0, -0.5]);
    }

    #[test]
    fn numbers_print_without_negative_zero() {
        assert_eq!(num(-0.0), "0");
        assert_eq!(num(0.25), "0.25");
        assert_eq!(num(-1e-20), "-1e-20");
        assert_eq!(num(2.0), "2.0");
    }
}
