//! Probability measures as samplable objects: uniform sphere/ball, linear
//! pushforwards onto solid and surface ellipsoids, axis-aligned Gaussians,
//! plus coordinate projections and membership masks for the radial/angular
//! regions the transport estimates need.

mod io;

pub use io::{read_binary, read_csv, write_binary, write_csv};

use crate::error::{invalid, Result};
use crate::rng::rng_from_seed;
use rand::Rng;
use rand_distr::StandardNormal;

/// Solid ellipsoids carry the normalized volume measure, surfaces the linear
/// pushforward of the round sphere measure (not the surface-area measure; the
/// two differ for non-round semiaxes).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EllipsoidKind {
    Solid,
    Surface,
}

/// An axis-aligned ellipsoid with semiaxes α_1..α_n, n ≥ 2, all positive.
#[derive(Debug, Clone)]
pub struct EllipsoidSpec {
    pub kind: EllipsoidKind,
    semiaxes: Vec<f64>,
}

impl EllipsoidSpec {
    pub fn new(kind: EllipsoidKind, semiaxes: Vec<f64>) -> Result<Self> {
        if semiaxes.len() < 2 {
            return Err(invalid("ellipsoid needs dimension >= 2"));
        }
        if !semiaxes.iter().all(|a| a.is_finite() && *a > 0.0) {
            return Err(invalid("semiaxes must be strictly positive and finite"));
        }
        Ok(Self { kind, semiaxes })
    }

    /// Round ellipsoid with all semiaxes equal to `alpha`.
    pub fn round(kind: EllipsoidKind, n: usize, alpha: f64) -> Result<Self> {
        Self::new(kind, vec![alpha; n])
    }

    pub fn dim(&self) -> usize {
        self.semiaxes.len()
    }

    pub fn semiaxes(&self) -> &[f64] {
        &self.semiaxes
    }

    /// Semiaxes under the 1/√(n−1) normalization that keeps coordinate
    /// variances of the associated measures bounded as n grows.
    pub fn normalized_axes(&self) -> Vec<f64> {
        let s = ((self.dim() - 1) as f64).sqrt();
        self.semiaxes.iter().map(|a| a / s).collect()
    }
}

/// A centered axis-aligned Gaussian with standard deviations a_1..a_n ≥ 0.
/// Zero entries are degenerate axes (point mass at 0 in that coordinate).
#[derive(Debug, Clone)]
pub struct GaussianSpec {
    stddevs: Vec<f64>,
}

impl GaussianSpec {
    pub fn new(stddevs: Vec<f64>) -> Result<Self> {
        if stddevs.is_empty() {
            return Err(invalid("gaussian needs at least one axis"));
        }
        if !stddevs.iter().all(|a| a.is_finite() && *a >= 0.0) {
            return Err(invalid("stddevs must be nonnegative and finite"));
        }
        Ok(Self { stddevs })
    }

    pub fn round(n: usize, a: f64) -> Result<Self> {
        Self::new(vec![a; n])
    }

    pub fn dim(&self) -> usize {
        self.stddevs.len()
    }

    pub fn stddevs(&self) -> &[f64] {
        &self.stddevs
    }

    /// Σ a_i², the trace of the covariance.
    pub fn second_moment(&self) -> f64 {
        self.stddevs.iter().map(|a| a * a).sum()
    }
}

/// Where a cloud's coordinates came from, for report provenance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SeedProvenance {
    pub seed: u64,
    pub stream: String,
}

/// m equally weighted points in fixed dimension; the uniform empirical
/// measure on its points. Coordinates are finite; equality compares
/// dimension and coordinates, not provenance.
#[derive(Debug, Clone)]
pub struct PointCloud {
    dim: usize,
    data: Vec<f64>, // row-major, m * dim
    provenance: Option<SeedProvenance>,
}

impl PartialEq for PointCloud {
    fn eq(&self, other: &Self) -> bool {
        self.dim == other.dim && self.data == other.data
    }
}

impl PointCloud {
    /// Validating constructor for externally produced coordinates.
    pub fn from_rows(dim: usize, data: Vec<f64>, provenance: Option<SeedProvenance>) -> Result<Self> {
        if dim == 0 {
            return Err(invalid("point cloud dimension must be positive"));
        }
        if data.is_empty() || data.len() % dim != 0 {
            return Err(invalid("coordinate count must be a positive multiple of dim"));
        }
        if !data.iter().all(|x| x.is_finite()) {
            return Err(invalid("coordinates must be finite"));
        }
        Ok(Self { dim, data, provenance })
    }

    /// Internal constructor for coordinates produced by this crate's samplers.
    fn from_sampler(dim: usize, data: Vec<f64>, seed: u64, stream: &str) -> Self {
        Self::from_validated(dim, data, Some(SeedProvenance { seed, stream: stream.to_string() }))
    }

    /// Internal constructor for coordinates this crate already validated.
    pub(crate) fn from_validated(dim: usize, data: Vec<f64>, provenance: Option<SeedProvenance>) -> Self {
        debug_assert!(dim > 0 && !data.is_empty() && data.len() % dim == 0);
        debug_assert!(data.iter().all(|x| x.is_finite()));
        Self { dim, data, provenance }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of points m.
    pub fn len(&self) -> usize {
        self.data.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        false // m >= 1 by construction
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn points(&self) -> impl ExactSizeIterator<Item = &[f64]> {
        self.data.chunks_exact(self.dim)
    }

    pub fn coords(&self) -> &[f64] {
        &self.data
    }

    pub fn provenance(&self) -> Option<&SeedProvenance> {
        self.provenance.as_ref()
    }

    /// Euclidean norms of all points.
    pub fn norms(&self) -> Vec<f64> {
        self.points().map(norm).collect()
    }
}

pub(crate) fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

pub(crate) fn dist(x: &[f64], y: &[f64]) -> f64 {
    x.iter()
        .zip(y)
        .map(|(a, b)| {
            let d = a - b;
            d * d
        })
        .sum::<f64>()
        .sqrt()
}

/// Membership regions: D keeps points whose first N−1 coordinate directions
/// are ε-small relative to the norm; F keeps points far enough from the
/// origin in the metric rescaled by the axes; DcapF intersects both.
#[derive(Debug, Clone)]
pub enum RegionSpec {
    D { n_constraints: usize, eps: f64 },
    F { theta: f64, axes: Vec<f64> },
    DcapF { n_constraints: usize, eps: f64, theta: f64, axes: Vec<f64> },
}

impl RegionSpec {
    pub fn d(n_constraints: usize, eps: f64) -> Result<Self> {
        validate_d(n_constraints, eps)?;
        Ok(RegionSpec::D { n_constraints, eps })
    }

    pub fn f(theta: f64, axes: Vec<f64>) -> Result<Self> {
        validate_f(theta, &axes)?;
        Ok(RegionSpec::F { theta, axes })
    }

    pub fn d_cap_f(n_constraints: usize, eps: f64, theta: f64, axes: Vec<f64>) -> Result<Self> {
        validate_d(n_constraints, eps)?;
        validate_f(theta, &axes)?;
        Ok(RegionSpec::DcapF { n_constraints, eps, theta, axes })
    }
}

fn validate_d(n_constraints: usize, eps: f64) -> Result<()> {
    if n_constraints < 1 {
        return Err(invalid("D region needs N >= 1"));
    }
    if !(eps.is_finite() && eps > 0.0) {
        return Err(invalid("D region needs eps > 0"));
    }
    Ok(())
}

fn validate_f(theta: f64, axes: &[f64]) -> Result<()> {
    if !(theta > 0.0 && theta < 1.0) {
        return Err(invalid("F region needs 0 < theta < 1"));
    }
    if axes.is_empty() || !axes.iter().all(|a| a.is_finite() && *a > 0.0) {
        return Err(invalid("F region needs positive finite axes"));
    }
    Ok(())
}

/// Uniform measure on the unit sphere in R^n: a standard normal vector
/// normalized to unit length. Deterministic in (n, m, seed).
pub fn sample_sphere(n: usize, m: usize, seed: u64) -> Result<PointCloud> {
    if n < 2 {
        return Err(invalid("sphere sampling needs n >= 2"));
    }
    if m == 0 {
        return Err(invalid("need at least one sample"));
    }
    let mut rng = rng_from_seed(seed);
    let mut data = vec![0.0; n * m];
    for row in data.chunks_exact_mut(n) {
        fill_unit_direction(&mut rng, row);
    }
    Ok(PointCloud::from_sampler(n, data, seed, "sphere"))
}

/// Uniform measure on the closed unit ball in R^n: independent direction and
/// radius U^{1/n}. n = 1 is the uniform measure on [−1, 1].
pub fn sample_ball(n: usize, m: usize, seed: u64) -> Result<PointCloud> {
    if n < 1 {
        return Err(invalid("ball sampling needs n >= 1"));
    }
    if m == 0 {
        return Err(invalid("need at least one sample"));
    }
    let mut rng = rng_from_seed(seed);
    let mut data = vec![0.0; n * m];
    let inv_n = 1.0 / n as f64;
    for row in data.chunks_exact_mut(n) {
        fill_unit_direction(&mut rng, row);
        let r = rng.random::<f64>().powf(inv_n);
        for v in row.iter_mut() {
            *v *= r;
        }
    }
    Ok(PointCloud::from_sampler(n, data, seed, "ball"))
}

pub(crate) fn fill_unit_direction(rng: &mut impl Rng, row: &mut [f64]) {
    loop {
        let mut sq = 0.0;
        for v in row.iter_mut() {
            let g: f64 = rng.sample(StandardNormal);
            *v = g;
            sq += g * g;
        }
        // Exactly-zero draws have probability zero; redraw defensively.
        if sq > 0.0 {
            let inv = 1.0 / sq.sqrt();
            for v in row.iter_mut() {
                *v *= inv;
            }
            return;
        }
    }
}

/// Product of centered 1-D Gaussians with the spec's standard deviations.
/// Degenerate axes (a_i = 0) emit exact zeros but still consume one draw, so
/// streams stay aligned across specs of equal dimension.
pub fn sample_gaussian(spec: &GaussianSpec, m: usize, seed: u64) -> Result<PointCloud> {
    if m == 0 {
        return Err(invalid("need at least one sample"));
    }
    let n = spec.dim();
    let mut rng = rng_from_seed(seed);
    let mut data = vec![0.0; n * m];
    for row in data.chunks_exact_mut(n) {
        for (v, &a) in row.iter_mut().zip(spec.stddevs()) {
            let g: f64 = rng.sample(StandardNormal);
            *v = if a == 0.0 { 0.0 } else { a * g };
        }
    }
    Ok(PointCloud::from_sampler(n, data, seed, "gaussian"))
}

/// Coordinatewise multiplication by the semiaxes; invertible when all are
/// nonzero.
pub fn linear_scale(cloud: &PointCloud, semiaxes: &[f64]) -> Result<PointCloud> {
    if semiaxes.len() != cloud.dim() {
        return Err(invalid(format!(
            "semiaxes length {} does not match cloud dim {}",
            semiaxes.len(),
            cloud.dim()
        )));
    }
    if !semiaxes.iter().all(|a| a.is_finite()) {
        return Err(invalid("semiaxes must be finite"));
    }
    let mut data = cloud.coords().to_vec();
    for row in data.chunks_exact_mut(cloud.dim()) {
        for (v, &a) in row.iter_mut().zip(semiaxes) {
            *v *= a;
        }
    }
    Ok(PointCloud {
        dim: cloud.dim(),
        data,
        provenance: cloud.provenance.clone(),
    })
}

/// Samples the ellipsoid measure as the linear pushforward of the round
/// sphere/ball sample under the same seed, so the composed and direct routes
/// agree exactly.
pub fn sample_ellipsoid(spec: &EllipsoidSpec, m: usize, seed: u64) -> Result<PointCloud> {
    let base = match spec.kind {
        EllipsoidKind::Surface => sample_sphere(spec.dim(), m, seed)?,
        EllipsoidKind::Solid => sample_ball(spec.dim(), m, seed)?,
    };
    linear_scale(&base, spec.semiaxes())
}

/// Keeps the first k coordinates of every point.
pub fn project(cloud: &PointCloud, k: usize) -> Result<PointCloud> {
    if k < 1 || k > cloud.dim() {
        return Err(invalid(format!(
            "projection dimension {} out of range 1..={}",
            k,
            cloud.dim()
        )));
    }
    if k == cloud.dim() {
        return Ok(cloud.clone());
    }
    let mut data = Vec::with_capacity(k * cloud.len());
    for p in cloud.points() {
        data.extend_from_slice(&p[..k]);
    }
    Ok(PointCloud {
        dim: k,
        data,
        provenance: cloud.provenance.clone(),
    })
}

/// Per-point region membership and the retained fraction. The zero vector is
/// never a member of D (the defining ratio is undefined there).
pub fn region_mask(cloud: &PointCloud, region: &RegionSpec) -> Result<(Vec<bool>, f64)> {
    let mask: Vec<bool> = match region {
        RegionSpec::D { n_constraints, eps } => {
            check_d_dim(*n_constraints, cloud.dim())?;
            cloud.points().map(|p| in_d(p, *n_constraints, *eps)).collect()
        }
        RegionSpec::F { theta, axes } => {
            check_f_dim(axes, cloud.dim())?;
            cloud.points().map(|p| in_f(p, *theta, axes)).collect()
        }
        RegionSpec::DcapF { n_constraints, eps, theta, axes } => {
            check_d_dim(*n_constraints, cloud.dim())?;
            check_f_dim(axes, cloud.dim())?;
            cloud
                .points()
                .map(|p| in_d(p, *n_constraints, *eps) && in_f(p, *theta, axes))
                .collect()
        }
    };
    let retained = mask.iter().filter(|b| **b).count() as f64 / mask.len() as f64;
    Ok((mask, retained))
}

fn check_d_dim(n_constraints: usize, dim: usize) -> Result<()> {
    if n_constraints > dim {
        return Err(invalid("D region N exceeds cloud dimension"));
    }
    Ok(())
}

fn check_f_dim(axes: &[f64], dim: usize) -> Result<()> {
    if axes.len() != dim {
        return Err(invalid("F region axes length does not match cloud dimension"));
    }
    Ok(())
}

/// |x_j|/‖x‖ < eps for j = 1..N−1; vacuous for N = 1 except at the origin.
fn in_d(p: &[f64], n_constraints: usize, eps: f64) -> bool {
    let r = norm(p);
    if r == 0.0 {
        return false;
    }
    p[..n_constraints - 1].iter().all(|x| x.abs() / r < eps)
}

/// ‖L^{-1} x‖ ≥ θ√n with L the diagonal map of the axes.
fn in_f(p: &[f64], theta: f64, axes: &[f64]) -> bool {
    let r2: f64 = p.iter().zip(axes).map(|(x, a)| (x / a) * (x / a)).sum();
    r2.sqrt() >= theta * (p.len() as f64).sqrt()
}
