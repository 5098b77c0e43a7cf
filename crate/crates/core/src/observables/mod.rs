//! Partial and observable diameters, Lipschitz-order checks through
//! explicit maps, and dissipation diagnostics along cloud sequences.

use crate::error::{invalid, Result};
use crate::measures::{dist, fill_unit_direction, project, PointCloud};
use crate::metrics::prokhorov_empirical;
use crate::rng::{derive_seed, rng_from_seed};
use rand::Rng;
use rayon::prelude::*;

/// Shortest interval carrying at least a (1 - kappa) fraction of the
/// samples: the minimum length over windows of ceil((1 - kappa) m)
/// consecutive order statistics, exact for empirical measures on the
/// line.
pub fn partial_diameter_1d(samples: &[f64], kappa: f64) -> Result<f64> {
    if samples.is_empty() {
        return Err(invalid("sample list must be nonempty"));
    }
    if !samples.iter().all(|v| v.is_finite()) {
        return Err(invalid("samples must be finite"));
    }
    validate_kappa(kappa)?;
    let m = samples.len();
    // Slack keeps the integer window width from flipping on rounding of
    // (1 - kappa) * m.
    let w = (((1.0 - kappa) * m as f64) - 1e-9).ceil().max(1.0) as usize;
    let mut sorted = samples.to_vec();
    sorted.sort_unstable_by(f64::total_cmp);
    let mut best = f64::INFINITY;
    for i in 0..=(m - w) {
        let len = sorted[i + w - 1] - sorted[i];
        if len < best {
            best = len;
        }
    }
    Ok(best)
}

/// A 1-Lipschitz scalar observable used as an optimization candidate: a
/// coordinate, a projection onto a direction of norm at most 1, or the
/// distance to an anchor point. Evaluate only on points of the dimension
/// the witness was built for.
#[derive(Debug, Clone, PartialEq)]
pub enum WitnessKind {
    Coordinate(usize),
    Direction(Vec<f64>),
    Anchor(Vec<f64>),
}

impl WitnessKind {
    /// Value of the observable at one point.
    pub fn evaluate(&self, point: &[f64]) -> f64 {
        match self {
            WitnessKind::Coordinate(i) => point[*i],
            WitnessKind::Direction(u) => u.iter().zip(point).map(|(a, b)| a * b).sum(),
            WitnessKind::Anchor(a) => dist(a, point),
        }
    }
}

/// Certified lower bound on the kappa-observable diameter, with the
/// witness observable that attains it.
#[derive(Debug, Clone, PartialEq)]
pub struct ObsDiamEstimate {
    pub kappa: f64,
    pub lower_bound: f64,
    pub witness: WitnessKind,
}

/// Candidate observables for a cloud: every coordinate, n_directions
/// random unit directions, and n_directions anchor distances with
/// anchors drawn from the cloud itself.
pub fn witness_family(cloud: &PointCloud, n_directions: usize, seed: u64) -> Vec<WitnessKind> {
    let n = cloud.dim();
    let mut family: Vec<WitnessKind> = (0..n).map(WitnessKind::Coordinate).collect();
    let mut rng = rng_from_seed(derive_seed(seed, "witness-directions", 0));
    for _ in 0..n_directions {
        let mut u = vec![0.0; n];
        fill_unit_direction(&mut rng, &mut u);
        family.push(WitnessKind::Direction(u));
    }
    let mut rng = rng_from_seed(derive_seed(seed, "witness-anchors", 0));
    for _ in 0..n_directions {
        let i = rng.random_range(0..cloud.len());
        family.push(WitnessKind::Anchor(cloud.point(i).to_vec()));
    }
    family
}

/// Largest 1-D partial diameter over explicit witness value vectors
/// (each one observable evaluated at every cloud point). Returns the
/// winning index and its bound; ties resolve to the lowest index.
pub fn obs_diameter_from_values(values: &[Vec<f64>], kappa: f64) -> Result<(usize, f64)> {
    if values.is_empty() {
        return Err(invalid("witness value family must be nonempty"));
    }
    let bounds = values
        .par_iter()
        .map(|vals| partial_diameter_1d(vals, kappa))
        .collect::<Result<Vec<_>>>()?;
    let mut best = (0_usize, f64::NEG_INFINITY);
    for (idx, &bound) in bounds.iter().enumerate() {
        if bound > best.1 {
            best = (idx, bound);
        }
    }
    Ok(best)
}

/// Certified lower bound on the kappa-observable diameter: the largest
/// 1-D partial diameter over the cloud's witness family. Candidates
/// evaluate in parallel; the reduction is deterministic, taking the max
/// with ties to the lowest candidate index.
pub fn obs_diameter_lower(
    cloud: &PointCloud,
    kappa: f64,
    n_directions: usize,
    seed: u64,
) -> Result<ObsDiamEstimate> {
    validate_kappa(kappa)?;
    let family = witness_family(cloud, n_directions, seed);
    let values: Vec<Vec<f64>> = family
        .par_iter()
        .map(|w| cloud.points().map(|p| w.evaluate(p)).collect())
        .collect();
    let (idx, lower_bound) = obs_diameter_from_values(&values, kappa)?;
    Ok(ObsDiamEstimate { kappa, lower_bound, witness: family[idx].clone() })
}

/// Push-forward map family for domination checks.
#[derive(Debug, Clone, PartialEq)]
pub enum DominationMap {
    /// Keep the first k coordinates.
    Projection(usize),
    /// Multiply coordinate i by ratios[i].
    Scale(Vec<f64>),
}

/// Empirical domination evidence for an explicit map: the worst relative
/// expansion over sample pairs (0 when every pair contracted) and the
/// Prokhorov distance between the mapped cloud and the target samples.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DominationReport {
    pub lip_violation: f64,
    pub dp_pushforward: f64,
}

pub fn check_domination(map: &DominationMap, x: &PointCloud, y: &PointCloud) -> Result<DominationReport> {
    let mapped = match map {
        DominationMap::Projection(k) => project(x, *k)?,
        DominationMap::Scale(ratios) => {
            if ratios.len() != x.dim() {
                return Err(invalid("ratio count must match the cloud dimension"));
            }
            if !ratios.iter().all(|r| r.is_finite() && *r > 0.0) {
                return Err(invalid("ratios must be finite and positive"));
            }
            let mut data = x.coords().to_vec();
            for row in data.chunks_mut(x.dim()) {
                for (v, r) in row.iter_mut().zip(ratios) {
                    *v *= r;
                }
            }
            if !data.iter().all(|v| v.is_finite()) {
                return Err(invalid("scaled coordinates overflow"));
            }
            PointCloud::from_validated(x.dim(), data, None)
        }
    };
    if mapped.dim() != y.dim() {
        return Err(invalid("target cloud dimension must match the mapped cloud"));
    }
    let m = x.len();
    let mut violation = 0.0_f64;
    for i in 0..m {
        for j in (i + 1)..m {
            let before = dist(x.point(i), x.point(j));
            if before > 0.0 {
                let stretch = dist(mapped.point(i), mapped.point(j)) / before - 1.0;
                if stretch > violation {
                    violation = stretch;
                }
            }
        }
    }
    let dp = prokhorov_empirical(&mapped, y, 1e-3)?;
    Ok(DominationReport { lip_violation: violation, dp_pushforward: dp })
}

/// Observable-diameter lower bounds along a sequence of clouds, with the
/// least-squares slope against the index as the reported trend.
#[derive(Debug, Clone, PartialEq)]
pub struct DissipationSeries {
    pub bounds: Vec<f64>,
    pub slope: f64,
}

/// Per-cloud witness seeds derive from the cloud dimension, so identical
/// clouds receive identical candidate draws and a constant sequence
/// reports an exactly flat series.
pub fn dissipation_series(
    clouds: &[PointCloud],
    kappa: f64,
    n_directions: usize,
    seed: u64,
) -> Result<DissipationSeries> {
    if clouds.is_empty() {
        return Err(invalid("cloud sequence must be nonempty"));
    }
    validate_kappa(kappa)?;
    let mut bounds = Vec::with_capacity(clouds.len());
    for cloud in clouds {
        let stream = derive_seed(seed, "dissipation-witnesses", cloud.dim() as u64);
        bounds.push(obs_diameter_lower(cloud, kappa, n_directions, stream)?.lower_bound);
    }
    let slope = least_squares_slope(&bounds);
    Ok(DissipationSeries { bounds, slope })
}

fn least_squares_slope(series: &[f64]) -> f64 {
    let k = series.len();
    if k < 2 {
        return 0.0;
    }
    let mean_x = (k as f64 - 1.0) / 2.0;
    let mean_y = series.iter().sum::<f64>() / k as f64;
    let (mut num, mut den) = (0.0, 0.0);
    for (j, y) in series.iter().enumerate() {
        let dx = j as f64 - mean_x;
        num += dx * (y - mean_y);
        den += dx * dx;
    }
    num / den
}

fn validate_kappa(kappa: f64) -> Result<()> {
    if !kappa.is_finite() || kappa <= 0.0 || kappa >= 1.0 {
        return Err(invalid("kappa must lie strictly between 0 and 1"));
    }
    Ok(())
}
