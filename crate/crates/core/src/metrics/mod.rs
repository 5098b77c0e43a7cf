//! Distances between measures: total variation, Prokhorov, Ky Fan,
//! Wasserstein (sorted 1-D, exact assignment, Gaussian closed form), and
//! a box-distance upper-bound heuristic.

mod assignment;
mod prokhorov;

pub use prokhorov::{coupling_feasibility, prokhorov_discrete, prokhorov_empirical, CouplingFeasibility};

use crate::error::{invalid, Result};
use crate::measures::{dist, GaussianSpec, PointCloud};

/// The exact assignment solver is O(m^3); refuse instances past this.
pub const ASSIGNMENT_LIMIT: usize = 4096;

/// Two weightings of one finite support: k atoms shared by both measures,
/// each weight vector nonnegative and summing to 1 within 1e-12.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscretePair {
    support: PointCloud,
    weights_mu: Vec<f64>,
    weights_nu: Vec<f64>,
}

impl DiscretePair {
    pub fn new(support: PointCloud, weights_mu: Vec<f64>, weights_nu: Vec<f64>) -> Result<Self> {
        if weights_mu.len() != support.len() || weights_nu.len() != support.len() {
            return Err(invalid("weight vectors must match the support size"));
        }
        for w in [&weights_mu, &weights_nu] {
            if !w.iter().all(|v| v.is_finite() && *v >= 0.0) {
                return Err(invalid("weights must be finite and nonnegative"));
            }
            let total: f64 = w.iter().sum();
            if (total - 1.0).abs() > 1e-12 {
                return Err(invalid("weights must sum to 1 within 1e-12"));
            }
        }
        Ok(Self { support, weights_mu, weights_nu })
    }

    pub fn support(&self) -> &PointCloud {
        &self.support
    }

    pub fn weights_mu(&self) -> &[f64] {
        &self.weights_mu
    }

    pub fn weights_nu(&self) -> &[f64] {
        &self.weights_nu
    }
}

/// Total variation distance between the pair's weightings: half the L1
/// distance between the weight vectors, the largest mass disagreement
/// over atom subsets.
pub fn tv_discrete(pair: &DiscretePair) -> f64 {
    0.5 * pair
        .weights_mu
        .iter()
        .zip(&pair.weights_nu)
        .map(|(a, b)| (a - b).abs())
        .sum::<f64>()
}

/// Smallest eps such that at most an eps fraction of the distances
/// exceeds eps, for a list read as per-index gaps between two maps under
/// the uniform measure. Exact: with the list sorted, exactly k entries
/// exceed eps on a half-open regime between order statistics, and within
/// a regime the smallest admissible eps is the regime floor or k/m,
/// whichever is larger.
pub fn kyfan_pairs(distances: &[f64]) -> Result<f64> {
    if distances.is_empty() {
        return Err(invalid("distance list must be nonempty"));
    }
    if !distances.iter().all(|d| d.is_finite() && *d >= 0.0) {
        return Err(invalid("distances must be finite and nonnegative"));
    }
    let m = distances.len();
    let mut sorted = distances.to_vec();
    sorted.sort_unstable_by(f64::total_cmp);
    let mut best = f64::INFINITY;
    for k in 0..=m {
        let floor = if k == m { 0.0 } else { sorted[m - k - 1] };
        let candidate = floor.max(k as f64 / m as f64);
        let fits = k == 0 || candidate < sorted[m - k];
        if fits && candidate < best {
            best = candidate;
        }
    }
    Ok(best)
}

/// p-Wasserstein distance between two sorted equal-length samples on the
/// line: matching i-th against i-th order statistic is optimal there, so
/// the value is (mean |x_(i) - y_(i)|^p)^(1/p).
pub fn wasserstein_1d(xs: &[f64], ys: &[f64], p: f64) -> Result<f64> {
    if xs.len() != ys.len() {
        return Err(invalid("sample lists must have equal length"));
    }
    if xs.is_empty() {
        return Err(invalid("sample lists must be nonempty"));
    }
    validate_order(p)?;
    for s in [xs, ys] {
        if !s.iter().all(|v| v.is_finite()) {
            return Err(invalid("samples must be finite"));
        }
        if s.windows(2).any(|w| w[0] > w[1]) {
            return Err(invalid("samples must be sorted ascending"));
        }
    }
    let mean = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| (x - y).abs().powf(p))
        .sum::<f64>()
        / xs.len() as f64;
    Ok(mean.powf(p.recip()))
}

/// p-Wasserstein distance between equal-size empirical measures by exact
/// minimum-cost assignment on pairwise distances raised to p. Arguments
/// are evaluated in a canonical order, so the value is bitwise symmetric.
pub fn wasserstein_assignment(x: &PointCloud, y: &PointCloud, p: f64) -> Result<f64> {
    if x.dim() != y.dim() {
        return Err(invalid("point clouds must share a dimension"));
    }
    if x.len() != y.len() {
        return Err(invalid("point clouds must have equal sample counts"));
    }
    if x.len() > ASSIGNMENT_LIMIT {
        return Err(invalid("assignment solver is limited to 4096 points"));
    }
    validate_order(p)?;
    let (a, b) = canonical_pair(x, y);
    let m = a.len();
    let mut cost = vec![0.0; m * m];
    for i in 0..m {
        let ai = a.point(i);
        for j in 0..m {
            cost[i * m + j] = dist(ai, b.point(j)).powf(p);
        }
    }
    if !cost.iter().all(|c| c.is_finite()) {
        return Err(invalid("pairwise transport costs overflow"));
    }
    let assign = assignment::min_cost_assignment(&cost, m);
    let total: f64 = assign.iter().enumerate().map(|(i, &j)| cost[i * m + j]).sum();
    Ok((total / m as f64).powf(p.recip()))
}

/// 2-Wasserstein distance between centered axis-aligned Gaussians in
/// closed form: the root of summed squared differences of per-axis
/// standard deviations, the shorter list padded with zeros.
pub fn gelbrich_w2(a: &GaussianSpec, b: &GaussianSpec) -> f64 {
    let (sa, sb) = (a.stddevs(), b.stddevs());
    let mut total = 0.0;
    for i in 0..sa.len().max(sb.len()) {
        let va = sa.get(i).copied().unwrap_or(0.0);
        let vb = sb.get(i).copied().unwrap_or(0.0);
        total += (va - vb) * (va - vb);
    }
    total.sqrt()
}

/// Upper bound on the box distance between equal-size empirical metric
/// measure spaces. Builds a candidate correspondence from the W2-optimal
/// assignment, greedily drops up to trim*m points with the largest
/// distance-matrix distortion, and returns 3 times the largest of the
/// remaining distortion, the dropped mass fraction, and the Prokhorov
/// distance from the mapped cloud to the target. A heuristic upper
/// bound, never claimed tight.
pub fn box_upper_bound(x: &PointCloud, y: &PointCloud, trim: f64) -> Result<f64> {
    if x.dim() != y.dim() {
        return Err(invalid("point clouds must share a dimension"));
    }
    if x.len() != y.len() {
        return Err(invalid("point clouds must have equal sample counts"));
    }
    let m = x.len();
    if m > ASSIGNMENT_LIMIT {
        return Err(invalid("assignment solver is limited to 4096 points"));
    }
    if !trim.is_finite() || !(0.0..0.5).contains(&trim) {
        return Err(invalid("trim fraction must lie in [0, 0.5)"));
    }
    let mut cost = vec![0.0; m * m];
    for i in 0..m {
        let xi = x.point(i);
        for j in 0..m {
            let d = dist(xi, y.point(j));
            cost[i * m + j] = d * d;
        }
    }
    let sigma = assignment::min_cost_assignment(&cost, m);
    let mut dx = vec![0.0; m * m];
    let mut dy = vec![0.0; m * m];
    for i in 0..m {
        for j in 0..m {
            dx[i * m + j] = dist(x.point(i), x.point(j));
            dy[i * m + j] = dist(y.point(sigma[i]), y.point(sigma[j]));
        }
    }
    let row_worst = |keep: &[bool], i: usize| {
        let mut worst = 0.0_f64;
        for j in 0..m {
            if keep[j] && j != i {
                let gap = (dx[i * m + j] - dy[i * m + j]).abs();
                if gap > worst {
                    worst = gap;
                }
            }
        }
        worst
    };
    let mut keep = vec![true; m];
    let mut dropped = 0_usize;
    for _ in 0..(trim * m as f64).floor() as usize {
        let mut worst = 0.0;
        let mut at = usize::MAX;
        for i in 0..m {
            if keep[i] {
                let w = row_worst(&keep, i);
                if w > worst {
                    worst = w;
                    at = i;
                }
            }
        }
        // All remaining distortions zero: dropping more cannot help.
        if at == usize::MAX {
            break;
        }
        keep[at] = false;
        dropped += 1;
    }
    let mut distortion = 0.0_f64;
    let mut mapped = Vec::with_capacity((m - dropped) * y.dim());
    for i in 0..m {
        if keep[i] {
            distortion = distortion.max(row_worst(&keep, i));
            mapped.extend_from_slice(y.point(sigma[i]));
        }
    }
    let mapped = PointCloud::from_validated(y.dim(), mapped, None);
    let dp = prokhorov_empirical(&mapped, y, 1e-3)?;
    Ok(3.0 * distortion.max(dropped as f64 / m as f64).max(dp))
}

fn validate_order(p: f64) -> Result<()> {
    if !p.is_finite() || p < 1.0 {
        return Err(invalid("order p must be finite and at least 1"));
    }
    Ok(())
}

/// Orders two clouds by (count, coordinates) so symmetric metrics can
/// evaluate one fixed orientation and return bitwise equal values either
/// way around.
pub(crate) fn canonical_pair<'a>(x: &'a PointCloud, y: &'a PointCloud) -> (&'a PointCloud, &'a PointCloud) {
    let ord = x.len().cmp(&y.len()).then_with(|| {
        x.coords()
            .iter()
            .zip(y.coords())
            .map(|(a, b)| a.total_cmp(b))
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    if ord == std::cmp::Ordering::Greater {
        (y, x)
    } else {
        (x, y)
    }
}
