use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Axis-aligned box `[lo, hi]` per coordinate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct AnalysisRegion {
    bounds: Vec<(f64, f64)>,
}

impl AnalysisRegion {
    pub fn new(bounds: Vec<(f64, f64)>) -> Result<Self> {
        if bounds.is_empty() {
            return Err(Error::Region("region needs at least one dimension".into()));
        }
        for (i, &(lo, hi)) in bounds.iter().enumerate() {
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return Err(Error::Region(format!("dimension {i}: need lo < hi, got [{lo}, {hi}]")));
            }
        }
        Ok(AnalysisRegion { bounds })
    }

    pub fn cube(dim: usize, lo: f64, hi: f64) -> Result<Self> {
        AnalysisRegion::new(vec![(lo, hi); dim])
    }

    pub fn dim(&self) -> usize {
        self.bounds.len()
    }

    pub fn bounds(&self) -> &[(f64, f64)] {
        &self.bounds
    }

    pub fn widths(&self) -> Vec<f64> {
        self.bounds.iter().map(|(lo, hi)| hi - lo).collect()
    }

    pub fn center(&self) -> Vec<f64> {
        self.bounds.iter().map(|(lo, hi)| 0.5 * (lo + hi)).collect()
    }

    /// Membership in the closed box enlarged by `slack` on every side.
    pub fn contains(&self, point: &[f64], slack: f64) -> bool {
        point.len() == self.dim()
            && point
                .iter()
                .zip(&self.bounds)
                .all(|(x, (lo, hi))| *x >= lo - slack && *x <= hi + slack)
    }

    /// The box grown by `fraction` of its width on each side.
    pub fn expanded(&self, fraction: f64) -> AnalysisRegion {
        AnalysisRegion {
            bounds: self
                .bounds
                .iter()
                .map(|&(lo, hi)| {
                    let pad = fraction * (hi - lo);
                    (lo - pad, hi + pad)
                })
                .collect(),
        }
    }

    pub fn intersect(&self, other: &AnalysisRegion) -> Option<AnalysisRegion> {
        if self.dim() != other.dim() {
            return None;
        }
        let bounds: Vec<_> = self
            .bounds
            .iter()
            .zip(&other.bounds)
            .map(|(a, b)| (a.0.max(b.0), a.1.min(b.1)))
            .collect();
        AnalysisRegion::new(bounds).ok()
    }

    /// Smallest box containing all `points`, or `None` if it is degenerate.
    pub fn bounding(points: &[Vec<f64>]) -> Option<AnalysisRegion> {
        let dim = points.first()?.len();
        let mut bounds = vec![(f64::INFINITY, f64::NEG_INFINITY); dim];
        for p in points {
            for (b, x) in bounds.iter_mut().zip(p) {
                b.0 = b.0.min(*x);
                b.1 = b.1.max(*x);
            }
        }
        AnalysisRegion::new(bounds).ok()
    }

    /// Deterministic sample points: all corners, a regular grid with
    /// `per_dim` points per axis, and `random` uniform draws.
    pub fn sample_points(&self, per_dim: usize, random: usize, rng_seed: u64) -> Vec<Vec<f64>> {
        let dim = self.dim();
        let mut points = Vec::new();
        let per_dim = per_dim.max(2);
        let total = per_dim.pow(dim as u32);
        for flat in 0..total {
            let mut rest = flat;
            let p = self
                .bounds
                .iter()
                .map(|&(lo, hi)| {
                    let k = rest % per_dim;
                    rest /= per_dim;
                    lo + (hi - lo) * k as f64 / (per_dim - 1) as f64
                })
                .collect();
            points.push(p);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
        for _ in 0..random {
            points.push(self.bounds.iter().map(|&(lo, hi)| rng.gen_range(lo..=hi)).collect());
        }
        points
    }

    /// Stratified seeds: `ceil(count^(1/n))` cells per axis, one jittered
    /// point per cell, jitter drawn from a generator seeded with `rng_seed`.
    pub fn lattice(&self, count: usize, rng_seed: u64) -> Vec<Vec<f64>> {
        let dim = self.dim();
        let per_dim = cells_per_dim(count, dim);
        let total = per_dim.pow(dim as u32);
        let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
        let mut seeds = Vec::with_capacity(total);
        for flat in 0..total {
            let mut rest = flat;
            let mut p = Vec::with_capacity(dim);
            for &(lo, hi) in &self.bounds {
                let k = rest % per_dim;
                rest /= per_dim;
                let cell = (hi - lo) / per_dim as f64;
                let jitter: f64 = rng.gen_range(0.05..0.95);
                p.push(lo + cell * (k as f64 + jitter));
            }
            seeds.push(p);
        }
        seeds
    }
}

pub(crate) fn cells_per_dim(count: usize, dim: usize) -> usize {
    let count = count.max(1);
    let mut k = (count as f64).powf(1.0 / dim as f64).round() as usize;
    while k.pow(dim as u32) < count {
        k += 1;
    }
    while k > 1 && (k - 1).pow(dim as u32) >= count {
        k -= 1;
    }
    k.max(1)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validates_bounds() {
        assert!(AnalysisRegion::new(vec![(1.0, 1.0)]).is_err());
        assert!(AnalysisRegion::new(vec![(0.0, f64::INFINITY)]).is_err());
        assert!(AnalysisRegion::new(vec![]).is_err());
    }

    #[test]
    fn lattice_is_stratified_and_reproducible() {
        let r = AnalysisRegion::new(vec![(-3.0, 3.0), (0.0, 1.0)]).unwrap();
        let a = r.lattice(10, 7);
        assert_eq!(a.len(), 16);
        assert_eq!(a, r.lattice(10, 7));
        assert_ne!(a, r.lattice(10, 8));
        assert!(a.iter().all(|p| r.contains(p, 0.0)));
        assert_eq!(cells_per_dim(27, 3), 3);
        assert_eq!(cells_per_dim(28, 3), 4);
        assert_eq!(cells_per_dim(1, 2), 1);
    }

    #[test]
    fn intersect_and_expand() {
        let a = AnalysisRegion::new(vec![(-3.0, 3.0)]).unwrap();
        let b = AnalysisRegion::new(vec![(0.0, 10.0)]).unwrap();
        assert_eq!(a.intersect(&b).unwrap().bounds(), [(0.0, 3.0)]);
        assert!(a.intersect(&AnalysisRegion::new(vec![(4.0, 5.0)]).unwrap()).is_none());
        assert_eq!(a.expanded(0.1).bounds(), [(-3.6, 3.6)]);
    }
}
