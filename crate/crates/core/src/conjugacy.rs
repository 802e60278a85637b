//! Numerical checks that a coordinate change `Y = h(X)` carries the flow,
//! the fixed and perpetual points and their spectra of `f` onto those of
//! `g`, plus detection of critical points of `g` that have no counterpart.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::critical::{
    critical_point_at, damped_newton, search_with, CriticalPoint, PointKind, PointSearch, ResidualMap,
    SolverConfig,
};
use crate::error::{Error, EvalError, Result};
use crate::field::{acceleration_field, norm, sub, JetOrder, TransformationMap, VectorField};
use crate::flow::{integrate_prefix, IntegratorConfig};
use crate::region::AnalysisRegion;
use crate::spectra::{eigenvalues, spectrum_distance, SquareMatrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum TheoremId {
    #[serde(rename = "FlowConjugacy")]
    FlowConjugacy,
    #[serde(rename = "T1-FixedPointMapping")]
    FixedPointMapping,
    #[serde(rename = "T2-PerpetualPointMapping")]
    PerpetualPointMapping,
    #[serde(rename = "T3-SpectrumPreservation")]
    SpectrumPreservation,
    #[serde(rename = "R1-NewPoints")]
    NewPoints,
}

impl TheoremId {
    pub const ALL: [TheoremId; 5] = [
        TheoremId::FlowConjugacy,
        TheoremId::FixedPointMapping,
        TheoremId::PerpetualPointMapping,
        TheoremId::SpectrumPreservation,
        TheoremId::NewPoints,
    ];

    /// Command-line spelling: `flow`, `t1`, `t2`, `t3`, `r1`.
    pub fn short_name(self) -> &'static str {
        match self {
            TheoremId::FlowConjugacy => "flow",
            TheoremId::FixedPointMapping => "t1",
            TheoremId::PerpetualPointMapping => "t2",
            TheoremId::SpectrumPreservation => "t3",
            TheoremId::NewPoints => "r1",
        }
    }

    pub fn from_short_name(name: &str) -> Option<TheoremId> {
        TheoremId::ALL.into_iter().find(|t| t.short_name().eq_ignore_ascii_case(name))
    }

    pub fn label(self) -> &'static str {
        match self {
            TheoremId::FlowConjugacy => "FlowConjugacy",
            TheoremId::FixedPointMapping => "T1-FixedPointMapping",
            TheoremId::PerpetualPointMapping => "T2-PerpetualPointMapping",
            TheoremId::SpectrumPreservation => "T3-SpectrumPreservation",
            TheoremId::NewPoints => "R1-NewPoints",
        }
    }
}

impl fmt::Display for TheoremId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Holds,
    Fails,
    NotApplicable,
}

impl Verdict {
    pub fn label(self) -> &'static str {
        match self {
            Verdict::Holds => "holds",
            Verdict::Fails => "fails",
            Verdict::NotApplicable => "not-applicable",
        }
    }
}

/// One compared point. For the flow check `source` is the initial point
/// and `mapped` its image; for point checks `source` is a critical point
/// of `f` (or a preimage for new-point records).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointRecord {
    pub kind: Option<PointKind>,
    pub source: Option<Vec<f64>>,
    pub mapped: Option<Vec<f64>>,
    pub matched: Option<Vec<f64>>,
    pub residual: f64,
    pub spectrum_distance: Option<f64>,
    pub similarity_residual: Option<f64>,
    /// Whether this record takes part in the verdict.
    pub decisive: bool,
    pub via_local_search: bool,
    pub note: Option<String>,
}

impl PointRecord {
    fn new(kind: Option<PointKind>) -> Self {
        PointRecord {
            kind,
            source: None,
            mapped: None,
            matched: None,
            residual: 0.0,
            spectrum_distance: None,
            similarity_residual: None,
            decisive: true,
            via_local_search: false,
            note: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TheoremCheck {
    pub theorem_id: TheoremId,
    pub verdict: Verdict,
    pub worst_residual: f64,
    pub tolerance: f64,
    pub details: Vec<PointRecord>,
    pub advisory: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Distance within which `h(x*)` and a critical point of `g` agree.
    pub match_tol: f64,
    pub spectrum_tol: f64,
    /// Bound on `||Dh J Dh^-1 - J'|| / max(1, ||J'||)`.
    pub similarity_tol: f64,
    pub flow_tol: f64,
    pub flow_horizon: f64,
    pub flow_samples: usize,
    pub initial_points: usize,
}

impl Tolerances {
    pub fn for_solver(cfg: &SolverConfig) -> Self {
        Tolerances {
            match_tol: 10.0 * cfg.dedup_tol,
            spectrum_tol: 1e-6,
            similarity_tol: 1e-7,
            flow_tol: 1e-6,
            flow_horizon: 1.0,
            flow_samples: 32,
            initial_points: 5,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("match_tol", self.match_tol),
            ("spectrum_tol", self.spectrum_tol),
            ("similarity_tol", self.similarity_tol),
            ("flow_tol", self.flow_tol),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Config(format!("{name} must be positive, got {v}")));
            }
        }
        if !self.flow_horizon.is_finite() || self.flow_samples < 2 || self.initial_points == 0 {
            return Err(Error::Config(
                "flow check needs a finite horizon, two samples and one initial point".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConjugacyReport {
    pub system: String,
    pub transformed_system: String,
    pub transformation: String,
    pub linear: bool,
    /// `Dh` invertible at every sampled domain point.
    pub diffeomorphic: bool,
    pub min_jacobian_pivot: f64,
    pub source_region: AnalysisRegion,
    pub image_region: AnalysisRegion,
    pub checks: Vec<TheoremCheck>,
    pub tolerances: Tolerances,
    pub solver: SolverConfig,
}

impl ConjugacyReport {
    pub fn check(&self, id: TheoremId) -> Option<&TheoremCheck> {
        self.checks.iter().find(|c| c.theorem_id == id)
    }

    /// No requested check failed.
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.verdict != Verdict::Fails)
    }
}

fn fmt_point(p: &[f64]) -> String {
    let parts: Vec<String> = p
        .iter()
        .map(|v| {
            let r = (v * 1e9).round() / 1e9;
            format!("{}", if r == 0.0 { 0.0 } else { r })
        })
        .collect();
    if parts.len() == 1 {
        parts[0].clone()
    } else {
        format!("({})", parts.join(", "))
    }
}

fn distance(a: &[f64], b: &[f64]) -> f64 {
    norm(&sub(a, b))
}

/// `h(x) - target`, solved for a preimage.
struct Preimage<'a> {
    h: &'a TransformationMap,
    target: &'a [f64],
}

impl ResidualMap for Preimage<'_> {
    fn residual(&self, x: &[f64]) -> std::result::Result<Vec<f64>, EvalError> {
        Ok(sub(&self.h.apply(x)?, self.target))
    }

    fn residual_jacobian(&self, x: &[f64]) -> std::result::Result<(Vec<f64>, SquareMatrix), EvalError> {
        let jet = self.h.jet(x, JetOrder::First)?;
        Ok((sub(&jet.value, self.target), jet.jacobian))
    }
}

/// One side of the comparison: a field, its acceleration field, the box it
/// is searched in and the critical points found there.
struct Side<'a> {
    field: &'a VectorField,
    accel: VectorField,
    region: AnalysisRegion,
    fixed: PointSearch,
    perpetual: PointSearch,
}

impl<'a> Side<'a> {
    fn new(field: &'a VectorField, region: AnalysisRegion, cfg: &SolverConfig) -> Result<Self> {
        let accel = acceleration_field(field)?;
        let fixed = search_with(field, &accel, PointKind::FixedPoint, &region, cfg)?;
        let perpetual = search_with(field, &accel, PointKind::PerpetualPoint, &region, cfg)?;
        Ok(Side { field, accel, region, fixed, perpetual })
    }

    fn points(&self, kind: PointKind) -> &PointSearch {
        match kind {
            PointKind::FixedPoint => &self.fixed,
            PointKind::PerpetualPoint => &self.perpetual,
        }
    }

    fn nearest(&self, kind: PointKind, y: &[f64]) -> Option<(&CriticalPoint, f64)> {
        self.points(kind)
            .points
            .iter()
            .map(|p| (p, distance(&p.location, y)))
            .min_by(|a, b| a.1.total_cmp(&b.1))
    }

    /// Newton seeded at `y` for a point of `kind`.
    fn local_search(&self, kind: PointKind, y: &[f64], cfg: &SolverConfig) -> Option<CriticalPoint> {
        let solved = match kind {
            PointKind::FixedPoint => self.field,
            PointKind::PerpetualPoint => &self.accel,
        };
        let bounds = self.region.expanded(cfg.boundary_margin);
        let root = damped_newton(solved, y, &bounds, cfg).ok()?;
        critical_point_at(self.field, &self.accel, kind, root, &self.region, cfg).ok().flatten()
    }

    /// Critical point of `kind` within `tol` of `y`: from the independent
    /// search first, else from a local solve.
    fn find_match(&self, kind: PointKind, y: &[f64], tol: f64, cfg: &SolverConfig) -> Option<(CriticalPoint, bool)> {
        if let Some((p, d)) = self.nearest(kind, y) {
            if d <= tol {
                return Some((p.clone(), false));
            }
        }
        self.local_search(kind, y, cfg)
            .filter(|p| distance(&p.location, y) <= tol)
            .map(|p| (p, true))
    }
}

/// Mapped pair of critical points (or a source point left unmatched).
struct Pairing {
    source: CriticalPoint,
    mapped: Option<Vec<f64>>,
    matched: Option<CriticalPoint>,
    via_local_search: bool,
    in_scope: bool,
    note: Option<String>,
}

/// Runs the individual checks on a fixed pair of systems, sharing the
/// critical-point searches between them.
pub struct Verifier<'a> {
    f: Side<'a>,
    g: Side<'a>,
    h: &'a TransformationMap,
    cfg: SolverConfig,
    tol: Tolerances,
    min_pivot: f64,
}

impl<'a> Verifier<'a> {
    /// Searches `f` on `region` and `g` on the image of `region` under `h`.
    pub fn new(
        f: &'a VectorField,
        g: &'a VectorField,
        h: &'a TransformationMap,
        region: &AnalysisRegion,
        cfg: &SolverConfig,
        tol: &Tolerances,
    ) -> Result<Self> {
        cfg.validate()?;
        tol.validate()?;
        let n = f.dim();
        if g.dim() != n || h.dim() != n || region.dim() != n {
            return Err(Error::Definition(format!(
                "dimensions differ: f {n}, g {}, h {}, region {}",
                g.dim(),
                h.dim(),
                region.dim()
            )));
        }
        if h.source_names() != f.state_names() {
            return Err(Error::Definition(format!(
                "map is written in ({}) but the system state is ({})",
                h.source_names().join(", "),
                f.state_names().join(", ")
            )));
        }
        let image = h
            .image_of(region)
            .ok_or_else(|| Error::Region("region and map domain do not overlap in a box".into()))?;
        Ok(Verifier {
            f: Side::new(f, region.clone(), cfg)?,
            g: Side::new(g, image, cfg)?,
            h,
            cfg: cfg.clone(),
            tol: tol.clone(),
            min_pivot: h.min_jacobian_pivot(),
        })
    }

    pub fn image_region(&self) -> &AnalysisRegion {
        &self.g.region
    }

    pub fn source_points(&self, kind: PointKind) -> &PointSearch {
        self.f.points(kind)
    }

    pub fn image_points(&self, kind: PointKind) -> &PointSearch {
        self.g.points(kind)
    }

    fn diffeomorphic(&self) -> bool {
        self.min_pivot > 1e-10
    }

    fn pair(&self, kind: PointKind) -> Vec<Pairing> {
        let domain = self.h.domain();
        self.f
            .points(kind)
            .points
            .iter()
            .map(|x| {
                let mut pairing = Pairing {
                    source: x.clone(),
                    mapped: None,
                    matched: None,
                    via_local_search: false,
                    in_scope: !x.boundary,
                    note: x.boundary.then(|| "outside the region, in its margin band".to_string()),
                };
                if !domain.contains(&x.location, self.cfg.dedup_tol) {
                    pairing.in_scope = false;
                    pairing.note = Some("outside the map domain".into());
                    return pairing;
                }
                match self.h.apply(&x.location) {
                    Ok(y) => {
                        if let Some((m, local)) = self.g.find_match(kind, &y, self.tol.match_tol, &self.cfg) {
                            pairing.matched = Some(m);
                            pairing.via_local_search = local;
                        }
                        pairing.mapped = Some(y);
                    }
                    Err(e) => pairing.note = Some(format!("map not defined here: {e}")),
                }
                pairing
            })
            .collect()
    }

    fn mapping_record(&self, p: &Pairing) -> PointRecord {
        let mut rec = PointRecord::new(Some(p.source.kind));
        rec.source = Some(p.source.location.clone());
        rec.mapped = p.mapped.clone();
        rec.matched = p.matched.as_ref().map(|m| m.location.clone());
        rec.decisive = p.in_scope;
        rec.via_local_search = p.via_local_search;
        rec.note = p.note.clone();
        rec.residual = match (&p.mapped, &p.matched) {
            (Some(y), Some(m)) => distance(y, &m.location),
            (Some(y), None) => self
                .g
                .nearest(p.source.kind, y)
                .map_or(f64::INFINITY, |(_, d)| d),
            _ => f64::INFINITY,
        };
        if let Some(m) = &p.matched {
            rec.spectrum_distance = spectrum_distance(&p.source.spectrum, &m.spectrum).ok();
        }
        rec
    }

    /// Critical points of `g` of `kind` that no image `h(x*)` accounts for,
    /// with the reason attached.
    fn unmatched_image_points(&self, kind: PointKind, pairs: &[Pairing]) -> Vec<PointRecord> {
        let mut out = Vec::new();
        for y in &self.g.points(kind).points {
            let claimed = pairs.iter().any(|p| {
                p.matched.as_ref().is_some_and(|m| distance(&m.location, &y.location) <= self.tol.match_tol)
            });
            if claimed {
                continue;
            }
            let mut rec = PointRecord::new(Some(kind));
            rec.matched = Some(y.location.clone());
            rec.decisive = !y.boundary;
            match self.preimage(&y.location) {
                None => {
                    rec.residual = f64::INFINITY;
                    rec.note = Some(format!(
                        "{} y = {} of g has no preimage in the region",
                        kind.label(),
                        fmt_point(&y.location)
                    ));
                }
                Some(x) if !self.f.region.contains(&x, self.cfg.dedup_tol) => {
                    rec.source = Some(x);
                    rec.decisive = false;
                    rec.note = Some("preimage lies outside the region".into());
                }
                Some(x) => {
                    let confirmed = self.f.find_match(kind, &x, self.tol.match_tol, &self.cfg);
                    let hx = self.h.apply(&x).unwrap_or_default();
                    rec.residual = distance(&hx, &y.location);
                    rec.mapped = Some(hx);
                    rec.source = Some(x.clone());
                    if let Some((p, _)) = confirmed {
                        rec.source = Some(p.location.clone());
                        rec.decisive = false;
                        rec.via_local_search = true;
                        rec.note = Some(format!(
                            "preimage x = {} is a {} of f missed by the search",
                            fmt_point(&x),
                            kind.label()
                        ));
                        continue;
                    }
                    let other = match kind {
                        PointKind::FixedPoint => PointKind::PerpetualPoint,
                        PointKind::PerpetualPoint => PointKind::FixedPoint,
                    };
                    let cross = self
                        .f
                        .nearest(other, &x)
                        .filter(|(_, d)| *d <= self.tol.match_tol)
                        .map(|_| format!(", it is a {} of f", other.label()))
                        .unwrap_or_default();
                    rec.note = Some(format!(
                        "{} y = {} of g is newly created; its preimage is not a {} of f (preimage x = {}{})",
                        kind.label(),
                        fmt_point(&y.location),
                        kind.label(),
                        fmt_point(&x),
                        cross
                    ));
                }
            }
            out.push(rec);
        }
        out
    }

    /// Solve `h(x) = y` from seeds spread over the source region.
    fn preimage(&self, y: &[f64]) -> Option<Vec<f64>> {
        let bounds = self.f.region.intersect(self.h.domain())?;
        let map = Preimage { h: self.h, target: y };
        let center = bounds.center();
        std::iter::once(center)
            .chain(bounds.lattice(16, self.cfg.rng_seed))
            .find_map(|seed| damped_newton(&map, &seed, &bounds, &self.cfg).ok())
            .map(|root| root.location)
    }

    fn new_point_advisories(records: &[PointRecord]) -> Vec<String> {
        records.iter().filter(|r| r.decisive).filter_map(|r| r.note.clone()).collect()
    }

    /// Theorem-style point mapping for one kind. Perpetual points are only
    /// judged for a linear `h`; otherwise the findings become advisories.
    pub fn point_mapping(&self, kind: PointKind) -> TheoremCheck {
        let id = match kind {
            PointKind::FixedPoint => TheoremId::FixedPointMapping,
            PointKind::PerpetualPoint => TheoremId::PerpetualPointMapping,
        };
        let pairs = self.pair(kind);
        let details: Vec<PointRecord> = pairs.iter().map(|p| self.mapping_record(p)).collect();
        let worst = details.iter().filter(|r| r.decisive).map(|r| r.residual).fold(0.0, f64::max);
        let all_matched = pairs.iter().filter(|p| p.in_scope).all(|p| p.matched.is_some());
        let mut advisory = self.f.points(kind).warnings.clone();
        advisory.extend(self.g.points(kind).warnings.iter().map(|w| format!("g: {w}")));
        let applicable = kind == PointKind::FixedPoint || self.h.declared_linear();
        for p in pairs.iter().filter(|p| p.in_scope && p.matched.is_none()) {
            let Some(y) = &p.mapped else { continue };
            let mut line = format!(
                "{} x = {} maps to y = {}, which is not a {} of g",
                kind.label(),
                fmt_point(&p.source.location),
                fmt_point(y),
                kind.label()
            );
            if kind == PointKind::PerpetualPoint {
                if let Some((fp, _)) = self
                    .g
                    .nearest(PointKind::FixedPoint, y)
                    .filter(|(_, d)| *d <= self.tol.match_tol)
                {
                    line.push_str(&format!(" (g has a fixed point at y = {})", fmt_point(&fp.location)));
                }
            }
            advisory.push(line);
        }
        advisory.extend(Self::new_point_advisories(&self.unmatched_image_points(kind, &pairs)));
        let verdict = if !applicable {
            advisory.insert(0, "h is not linear: perpetual points need not map onto perpetual points".into());
            Verdict::NotApplicable
        } else if all_matched && worst <= self.tol.match_tol {
            Verdict::Holds
        } else {
            Verdict::Fails
        };
        TheoremCheck { theorem_id: id, verdict, worst_residual: worst, tolerance: self.tol.match_tol, details, advisory }
    }

    /// Eigenvalues at matched fixed points (of `Df`, `Dg`) and perpetual
    /// points (of `DF`, `DG`), together with the similarity residual.
    pub fn spectrum_preservation(&self) -> TheoremCheck {
        let mut check = TheoremCheck {
            theorem_id: TheoremId::SpectrumPreservation,
            verdict: Verdict::NotApplicable,
            worst_residual: 0.0,
            tolerance: self.tol.spectrum_tol,
            details: Vec::new(),
            advisory: Vec::new(),
        };
        if !self.h.declared_linear() {
            check.advisory.push("h is not linear: spectra are only compared for linear maps".into());
            return check;
        }
        if !self.diffeomorphic() {
            check.advisory.push(format!(
                "Dh is singular on the domain (relative pivot {:e}); spectra need not correspond",
                self.min_pivot
            ));
            return check;
        }
        let mut failed = false;
        for kind in [PointKind::FixedPoint, PointKind::PerpetualPoint] {
            for p in self.pair(kind) {
                let mut rec = self.mapping_record(&p);
                if p.in_scope {
                    match (&p.matched, &p.mapped) {
                        (Some(_), Some(y)) => match self.similarity(kind, &p.source.location, y) {
                            Ok((d, s)) => {
                                rec.spectrum_distance = Some(d);
                                rec.similarity_residual = Some(s);
                                rec.residual = d;
                                check.worst_residual = check.worst_residual.max(d);
                                failed |= !(d <= self.tol.spectrum_tol && s <= self.tol.similarity_tol);
                            }
                            Err(e) => {
                                rec.note = Some(format!("similarity check failed: {e}"));
                                failed = true;
                            }
                        },
                        _ => {
                            rec.note = Some("no matched point to compare".into());
                            failed = true;
                        }
                    }
                }
                check.details.push(rec);
            }
        }
        check.verdict = if failed { Verdict::Fails } else { Verdict::Holds };
        check
    }

    /// Spectrum distance and `||Dh J Dh^-1 - J'|| / max(1, ||J'||)`, with `J`
    /// the Jacobian of `f` (or `F`) at `x` and `J'` that of `g` (or `G`) at
    /// `y = h(x)`. The image point is used rather than the matched one so
    /// that points on a continuum are compared at corresponding locations.
    fn similarity(&self, kind: PointKind, x: &[f64], y: &[f64]) -> Result<(f64, f64)> {
        let (fs, gs) = match kind {
            PointKind::FixedPoint => (self.f.field, self.g.field),
            PointKind::PerpetualPoint => (&self.f.accel, &self.g.accel),
        };
        let j = fs.jet(x, JetOrder::First)?.jacobian;
        let j_img = gs.jet(y, JetOrder::First)?.jacobian;
        let dh = self.h.jet(x, JetOrder::First)?.jacobian;
        let conj = dh.mul(&j)?.mul(&dh.inverse()?)?;
        let distance = spectrum_distance(&eigenvalues(&j)?, &eigenvalues(&j_img)?)?;
        Ok((distance, conj.sub(&j_img)?.norm_inf() / j_img.norm_inf().max(1.0)))
    }

    /// Critical points of `g` of either kind with no counterpart among the
    /// images of those of `f`. Judged only for linear `h`.
    pub fn new_points(&self) -> TheoremCheck {
        let mut details = Vec::new();
        for kind in [PointKind::FixedPoint, PointKind::PerpetualPoint] {
            let pairs = self.pair(kind);
            details.extend(self.unmatched_image_points(kind, &pairs));
        }
        let new: Vec<&PointRecord> = details.iter().filter(|r| r.decisive).collect();
        let mut advisory: Vec<String> = new.iter().filter_map(|r| r.note.clone()).collect();
        let verdict = if !self.h.declared_linear() {
            advisory.insert(
                0,
                format!("h is not linear: new critical points may be created ({} found)", new.len()),
            );
            Verdict::NotApplicable
        } else if new.is_empty() {
            Verdict::Holds
        } else {
            Verdict::Fails
        };
        TheoremCheck {
            theorem_id: TheoremId::NewPoints,
            verdict,
            worst_residual: new.len() as f64,
            tolerance: 0.0,
            details,
            advisory,
        }
    }

    /// Flow check from `count` initial points spread over the region and
    /// the map domain.
    pub fn flow(&self, integrator: &IntegratorConfig) -> Result<TheoremCheck> {
        let initial = initial_points(&self.f.region, self.h, self.tol.initial_points, self.cfg.rng_seed)?;
        verify_flow_conjugacy_with(self.f.field, self.g.field, self.h, &initial, &self.tol, integrator)
    }

    pub fn run(&self, theorems: &[TheoremId], integrator: &IntegratorConfig) -> Result<Vec<TheoremCheck>> {
        let mut seen = Vec::new();
        let mut checks = Vec::new();
        for &id in theorems {
            if seen.contains(&id) {
                continue;
            }
            seen.push(id);
            checks.push(match id {
                TheoremId::FlowConjugacy => self.flow(integrator)?,
                TheoremId::FixedPointMapping => self.point_mapping(PointKind::FixedPoint),
                TheoremId::PerpetualPointMapping => self.point_mapping(PointKind::PerpetualPoint),
                TheoremId::SpectrumPreservation => self.spectrum_preservation(),
                TheoremId::NewPoints => self.new_points(),
            });
        }
        Ok(checks)
    }
}

/// `count` well spread points of `region` inside the domain of `h`.
pub fn initial_points(region: &AnalysisRegion, h: &TransformationMap, count: usize, rng_seed: u64) -> Result<Vec<Vec<f64>>> {
    let usable = region
        .intersect(h.domain())
        .ok_or_else(|| Error::Region("region and map domain do not overlap in a box".into()))?;
    let lattice = usable.lattice(count, rng_seed);
    let total = lattice.len();
    Ok((0..count.min(total)).map(|i| lattice[i * total / count.min(total)].clone()).collect())
}

/// Check `psi_t(h(x0)) = h(phi_t(x0))` at evenly spaced times. The residual
/// at each sample is `||psi - h(phi)|| / max(1, ||h(phi)||)`, so it is an
/// absolute error near the origin and a relative one on large orbits.
pub fn verify_flow_conjugacy(
    f: &VectorField,
    g: &VectorField,
    h: &TransformationMap,
    initial_points: &[Vec<f64>],
    horizon: f64,
    tol: f64,
) -> Result<TheoremCheck> {
    let tolerances = Tolerances {
        flow_tol: tol,
        flow_horizon: horizon,
        initial_points: initial_points.len().max(1),
        ..Tolerances::for_solver(&SolverConfig::default())
    };
    verify_flow_conjugacy_with(f, g, h, initial_points, &tolerances, &IntegratorConfig::default())
}

fn verify_flow_conjugacy_with(
    f: &VectorField,
    g: &VectorField,
    h: &TransformationMap,
    initial_points: &[Vec<f64>],
    tol: &Tolerances,
    integrator: &IntegratorConfig,
) -> Result<TheoremCheck> {
    let mut check = TheoremCheck {
        theorem_id: TheoremId::FlowConjugacy,
        verdict: Verdict::Holds,
        worst_residual: 0.0,
        tolerance: tol.flow_tol,
        details: Vec::new(),
        advisory: Vec::new(),
    };
    let domain_slack = 1e-9 * h.domain().widths().iter().fold(1.0, |m: f64, w| m.max(*w));
    for x0 in initial_points {
        let mut rec = PointRecord::new(None);
        rec.source = Some(x0.clone());
        if !h.domain().contains(x0, domain_slack) {
            rec.decisive = false;
            rec.note = Some("initial point outside the map domain".into());
            check.details.push(rec);
            continue;
        }
        let y0 = h.apply(x0)?;
        rec.mapped = Some(y0.clone());
        let (phi, phi_err) = integrate_prefix(f, x0, tol.flow_horizon, tol.flow_samples, integrator)?;
        let (psi, psi_err) = integrate_prefix(g, &y0, tol.flow_horizon, tol.flow_samples, integrator)?;
        let mut valid = phi.len().min(psi.len());
        let mut reasons: Vec<String> = Vec::new();
        if let Some(e) = phi_err {
            reasons.push(format!("f: {}", brief(&e)));
        }
        if let Some(e) = psi_err {
            reasons.push(format!("g: {}", brief(&e)));
        }
        let mut worst: f64 = 0.0;
        for k in 0..valid {
            if !h.domain().contains(&phi.states[k], domain_slack) {
                reasons.push(format!("f trajectory leaves the map domain before t = {}", phi.times[k]));
                valid = k;
                break;
            }
            let hx = h.apply(&phi.states[k])?;
            let r = distance(&psi.states[k], &hx) / norm(&hx).max(1.0);
            worst = worst.max(r);
        }
        if valid < tol.flow_samples {
            let until = if valid == 0 { 0.0 } else { phi.times[valid - 1] };
            rec.note = Some(format!("truncated to [0, {until}]: {}", reasons.join("; ")));
        }
        rec.matched = (valid > 0).then(|| psi.states[valid - 1].clone());
        rec.residual = worst;
        check.worst_residual = check.worst_residual.max(worst);
        check.details.push(rec);
    }
    let truncated = check.details.iter().filter(|r| r.note.is_some()).count();
    if truncated > 0 {
        check.advisory.push(format!("{truncated} initial point(s) truncated before the horizon"));
    }
    if !(check.worst_residual <= tol.flow_tol) {
        check.verdict = Verdict::Fails;
    }
    Ok(check)
}

fn brief(e: &Error) -> String {
    match e {
        Error::BlowUp { time, .. } => format!("blow-up at t = {time:.6}"),
        other => other.to_string(),
    }
}

/// Fixed (or perpetual) points of `f` mapped by `h` and matched against
/// those found independently for `g` on the image of `region`.
pub fn verify_point_mapping(
    f: &VectorField,
    h: &TransformationMap,
    g: &VectorField,
    region: &AnalysisRegion,
    cfg: &SolverConfig,
    kind: PointKind,
) -> Result<TheoremCheck> {
    let v = Verifier::new(f, g, h, region, cfg, &Tolerances::for_solver(cfg))?;
    Ok(v.point_mapping(kind))
}

pub fn verify_spectrum_preservation(
    f: &VectorField,
    h: &TransformationMap,
    g: &VectorField,
    region: &AnalysisRegion,
    cfg: &SolverConfig,
) -> Result<TheoremCheck> {
    let v = Verifier::new(f, g, h, region, cfg, &Tolerances::for_solver(cfg))?;
    Ok(v.spectrum_preservation())
}

pub fn detect_new_points(
    f: &VectorField,
    h: &TransformationMap,
    g: &VectorField,
    region: &AnalysisRegion,
    cfg: &SolverConfig,
) -> Result<TheoremCheck> {
    let v = Verifier::new(f, g, h, region, cfg, &Tolerances::for_solver(cfg))?;
    Ok(v.new_points())
}

/// All requested checks in one report, each listed once in request order.
pub fn verify_conjugacy(
    f: &VectorField,
    g: &VectorField,
    h: &TransformationMap,
    region: &AnalysisRegion,
    cfg: &SolverConfig,
    tol: &Tolerances,
    integrator: &IntegratorConfig,
    theorems: &[TheoremId],
) -> Result<ConjugacyReport> {
    let v = Verifier::new(f, g, h, region, cfg, tol)?;
    let checks = v.run(theorems, integrator)?;
    Ok(ConjugacyReport {
        system: f.name().to_string(),
        transformed_system: g.name().to_string(),
        transformation: h.describe(),
        linear: h.declared_linear(),
        diffeomorphic: v.diffeomorphic(),
        min_jacobian_pivot: v.min_pivot,
        source_region: region.clone(),
        image_region: v.image_region().clone(),
        checks,
        tolerances: tol.clone(),
        solver: cfg.clone(),
    })
}
