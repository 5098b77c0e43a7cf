//! Radial transport maps between Gaussian measures and ellipsoid measures.
//!
//! The radial profile R matches the Gaussian mass of the ball B_r to the
//! normalized-volume mass of a ball inside the sphere of radius sqrt(n-1);
//! rescaling each point by R(r)/r pushes the standard Gaussian onto the
//! solid ball, and conjugating by the diagonal axis map L extends this to
//! arbitrary axis-aligned Gaussians and ellipsoids. A surface variant sends
//! every point straight to the boundary, and an annulus variant does the
//! same mass-matching between radially truncated measures.

mod gamma;

pub use gamma::{ln_reg_lower_gamma, reg_lower_gamma};

use crate::error::{invalid, MmError, Result};
use crate::measures::{norm, PointCloud};

/// Mass-matching radial profile in a fixed dimension n >= 2:
/// R(r) = sqrt(n-1) * P(n/2, r^2/2)^(1/n), with P the regularized lower
/// incomplete gamma. Strictly increasing, R(0) = 0, saturating at
/// sqrt(n-1) as r grows.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RadialProfile {
    n: usize,
}

impl RadialProfile {
    pub fn new(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(invalid("radial profile needs dimension >= 2"));
        }
        Ok(Self { n })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// The limiting radius sqrt(n-1).
    pub fn saturation(&self) -> f64 {
        ((self.n - 1) as f64).sqrt()
    }
}

/// Evaluates the profile in log domain, so deep-tail radii (tiny Gaussian
/// mass at large n) stay finite instead of underflowing.
pub fn radial_r(profile: &RadialProfile, r: f64) -> Result<f64> {
    if !(r.is_finite() && r >= 0.0) {
        return Err(invalid("radius must be nonnegative and finite"));
    }
    if r == 0.0 {
        return Ok(0.0);
    }
    let n = profile.n as f64;
    let ln_p = ln_reg_lower_gamma(n / 2.0, r * r / 2.0)?;
    Ok(profile.saturation() * (ln_p / n).exp().min(1.0))
}

/// Mass-matching radius between the Gaussian and the normalized solid-ball
/// measure, both truncated to the annulus
/// theta*sqrt(n-1) <= r <= sqrt(n-1)/theta. Equals the lower annulus edge
/// when r sits at it and sqrt(n-1) at the upper edge.
pub fn annulus_profile(theta: f64, n: usize, r: f64) -> Result<f64> {
    if n < 2 {
        return Err(invalid("annulus profile needs dimension >= 2"));
    }
    if !(theta.is_finite() && theta > 0.0 && theta < 1.0) {
        return Err(invalid("annulus profile needs 0 < theta < 1"));
    }
    if !r.is_finite() {
        return Err(invalid("radius must be finite"));
    }
    let sat = ((n - 1) as f64).sqrt();
    let lo = theta * sat;
    let hi = sat / theta;
    if r < lo || r > hi {
        return Err(invalid(format!(
            "radius {r} outside the transport annulus [{lo}, {hi}]"
        )));
    }
    let s = n as f64 / 2.0;
    let ln_p_lo = ln_reg_lower_gamma(s, lo * lo / 2.0)?;
    let ln_p_hi = ln_reg_lower_gamma(s, hi * hi / 2.0)?;
    let ln_p_r = ln_reg_lower_gamma(s, r * r / 2.0)?;
    let ln_num = ln_diff_exp(ln_p_r, ln_p_lo);
    let ln_den = ln_diff_exp(ln_p_hi, ln_p_lo);
    if ln_den == f64::NEG_INFINITY {
        // Would need theta so close to 1 that the annulus carries no mass
        // resolvable in f64.
        return Err(MmError::Runtime(format!(
            "annulus with theta={theta}, n={n} carries no resolvable mass"
        )));
    }
    // Volume fraction of the annulus filled up to the matched radius,
    // clamped into [0, 1] against rounding at the endpoints.
    let ln_gfrac = (ln_num - ln_den).min(0.0);
    let nf = n as f64;
    let ln_theta_n = nf * theta.ln();
    let ln_one_minus_theta_n = (-ln_theta_n.exp()).ln_1p();
    let ln_t = log_add_exp(ln_theta_n, ln_one_minus_theta_n + ln_gfrac);
    Ok(sat * (ln_t / nf).exp().min(1.0))
}

/// ln(e^a - e^b) for a >= b, -inf when the difference rounds to nothing.
fn ln_diff_exp(a: f64, b: f64) -> f64 {
    if a <= b || a == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    a + (-(b - a).exp()).ln_1p()
}

/// ln(e^a + e^b).
fn log_add_exp(a: f64, b: f64) -> f64 {
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    if hi == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    hi + (lo - hi).exp().ln_1p()
}

/// The three radial rescalings, all acting as x -> c(r) * x with
/// r = ||L^{-1} x|| for the diagonal axis map L:
///   PhiE: c = R(r)/r, Gaussian onto the solid ellipsoid;
///   PhiS: c = sqrt(n-1)/r, Gaussian onto the surface;
///   PsiAnnulus: c = annulus_profile(theta, n, r)/r between truncations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TransportVariant {
    PhiE,
    PhiS,
    PsiAnnulus { theta: f64 },
}

#[derive(Debug, Clone)]
pub struct TransportMapSpec {
    pub variant: TransportVariant,
    semiaxes: Vec<f64>,
}

impl TransportMapSpec {
    pub fn new(variant: TransportVariant, semiaxes: Vec<f64>) -> Result<Self> {
        if semiaxes.len() < 2 {
            return Err(invalid("transport map needs dimension >= 2"));
        }
        if !semiaxes.iter().all(|a| a.is_finite() && *a > 0.0) {
            return Err(invalid("transport semiaxes must be strictly positive and finite"));
        }
        if let TransportVariant::PsiAnnulus { theta } = variant {
            if !(theta.is_finite() && theta > 0.0 && theta < 1.0) {
                return Err(invalid("annulus transport needs 0 < theta < 1"));
            }
        }
        Ok(Self { variant, semiaxes })
    }

    pub fn dim(&self) -> usize {
        self.semiaxes.len()
    }

    pub fn semiaxes(&self) -> &[f64] {
        &self.semiaxes
    }

    fn rescaled_norm(&self, x: &[f64]) -> f64 {
        x.iter()
            .zip(&self.semiaxes)
            .map(|(v, a)| (v / a) * (v / a))
            .sum::<f64>()
            .sqrt()
    }

    /// Image of a single point.
    pub fn map_point(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.dim() {
            return Err(invalid(format!(
                "point dimension {} does not match map dimension {}",
                x.len(),
                self.dim()
            )));
        }
        let n = self.dim();
        let r = self.rescaled_norm(x);
        let scale = match self.variant {
            TransportVariant::PhiE => {
                if r == 0.0 {
                    // Continuous extension at the origin (a measure-zero point).
                    return Ok(vec![0.0; n]);
                }
                radial_r(&RadialProfile::new(n)?, r)? / r
            }
            TransportVariant::PhiS => {
                if r == 0.0 {
                    return Err(invalid("surface transport is undefined at the origin"));
                }
                ((n - 1) as f64).sqrt() / r
            }
            TransportVariant::PsiAnnulus { theta } => {
                if r == 0.0 {
                    return Err(invalid("annulus transport is undefined at the origin"));
                }
                annulus_profile(theta, n, r)? / r
            }
        };
        Ok(x.iter().map(|v| v * scale).collect())
    }
}

/// Pointwise image of a whole cloud; provenance carries over.
pub fn apply_transport(spec: &TransportMapSpec, cloud: &PointCloud) -> Result<PointCloud> {
    if cloud.dim() != spec.dim() {
        return Err(invalid(format!(
            "cloud dimension {} does not match map dimension {}",
            cloud.dim(),
            spec.dim()
        )));
    }
    let mut data = Vec::with_capacity(cloud.coords().len());
    for p in cloud.points() {
        data.extend_from_slice(&spec.map_point(p)?);
    }
    Ok(PointCloud::from_validated(cloud.dim(), data, cloud.provenance().cloned()))
}

/// Operator-norm probe of a differential: `degenerate` flags a Jacobian the
/// power iteration saw as numerically zero (the value is then 0).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OpNormEstimate {
    pub value: f64,
    pub degenerate: bool,
}

/// Default finite-difference step for [`opnorm_of_map`].
pub fn default_step(x: &[f64]) -> f64 {
    1e-5 * norm(x).max(1.0)
}

/// Largest singular value of the central-difference Jacobian of `map` at
/// `x`, by power iteration on J^T J (30 iterations or relative residual
/// 1e-10). Works for rectangular Jacobians.
pub fn opnorm_of_map<F>(map: F, x: &[f64], h: f64) -> Result<OpNormEstimate>
where
    F: Fn(&[f64]) -> Result<Vec<f64>>,
{
    if !(h.is_finite() && h > 0.0) {
        return Err(invalid("finite-difference step must be positive and finite"));
    }
    if x.is_empty() {
        return Err(invalid("operator norm probe needs a nonempty point"));
    }
    let n = x.len();
    let p = map(x)?.len();
    let mut jac = vec![0.0; p * n]; // row-major p x n
    let mut probe = x.to_vec();
    for c in 0..n {
        probe[c] = x[c] + h;
        let fp = map(&probe)?;
        probe[c] = x[c] - h;
        let fm = map(&probe)?;
        probe[c] = x[c];
        if fp.len() != p || fm.len() != p {
            return Err(invalid("map output dimension changed between evaluations"));
        }
        for r in 0..p {
            jac[r * n + c] = (fp[r] - fm[r]) / (2.0 * h);
        }
    }
    if !jac.iter().all(|v| v.is_finite()) {
        return Err(MmError::Runtime("Jacobian probe produced nonfinite entries".into()));
    }
    if jac.iter().all(|v| *v == 0.0) {
        return Ok(OpNormEstimate { value: 0.0, degenerate: true });
    }

    let sqrt_n = (n as f64).sqrt();
    let mut u = vec![1.0 / sqrt_n; n];
    let mut v = vec![0.0; p];
    let mut w = vec![0.0; n];
    let mut lambda_prev = f64::NEG_INFINITY;
    let mut lambda = 0.0;
    for _ in 0..30 {
        for (r, vr) in v.iter_mut().enumerate() {
            *vr = jac[r * n..(r + 1) * n].iter().zip(&u).map(|(j, ui)| j * ui).sum();
        }
        for (c, wc) in w.iter_mut().enumerate() {
            *wc = v.iter().enumerate().map(|(r, vr)| jac[r * n + c] * vr).sum();
        }
        // w = J^T J u; with ||u|| = 1 the inner product is the Rayleigh
        // quotient, converging to the top eigenvalue (the squared norm).
        lambda = u.iter().zip(&w).map(|(a, b)| a * b).sum::<f64>();
        let norm_w = norm(&w);
        if norm_w < 1e-300 {
            // The start vector lies in the kernel; for the radial maps this
            // only happens when the Jacobian itself is negligible.
            return Ok(OpNormEstimate { value: 0.0, degenerate: true });
        }
        for (ui, wi) in u.iter_mut().zip(&w) {
            *ui = wi / norm_w;
        }
        if (lambda - lambda_prev).abs() <= 1e-10 * lambda.abs().max(1e-300) {
            break;
        }
        lambda_prev = lambda;
    }
    Ok(OpNormEstimate { value: lambda.max(0.0).sqrt(), degenerate: false })
}

/// Operator norm of a transport map's differential at `x`.
pub fn opnorm_at(spec: &TransportMapSpec, x: &[f64], h: f64) -> Result<OpNormEstimate> {
    opnorm_of_map(|y| spec.map_point(y), x, h)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::{linear_scale, sample_ball, sample_gaussian, sample_sphere, GaussianSpec};
    use proptest::prelude::*;

    #[test]
    fn radial_profile_frozen_references() {
        // 60-digit arbitrary-precision references for R(r).
        let cases = [
            (50, 5.0, 6.1182445946546194),
            (50, 7.0, 6.899852148489737),
            (50, 9.0, 6.999493737549614),
            (200, 14.0, 14.047871775483624),
            (2000, 1.0, 1.6442983159098275),
            (2000, 40.0, 44.134339803598879),
            (3, 1.0, 0.82530780364741717),
        ];
        for (n, r, want) in cases {
            let got = radial_r(&RadialProfile::new(n).unwrap(), r).unwrap();
            assert!(
                (got - want).abs() <= 1e-8 * want,
                "R(n={n}, r={r}) = {got}, want {want}"
            );
        }
    }

    #[test]
    fn radial_profile_trivia() {
        let p = RadialProfile::new(10).unwrap();
        assert_eq!(radial_r(&p, 0.0).unwrap(), 0.0);
        let saturated = radial_r(&p, 100.0).unwrap();
        assert!((saturated - 3.0).abs() <= 1e-9);
        assert!(radial_r(&p, f64::NAN).is_err());
        assert!(radial_r(&p, -1.0).is_err());
        assert!(RadialProfile::new(1).is_err());
    }

    #[test]
    fn radial_profile_saturates_from_below() {
        // Bounded by sqrt(n-1) everywhere, within 1e-6 of it past 3*sqrt(n).
        // (Dimensions 2 and 3 genuinely miss the 1e-6 margin at 3*sqrt(n):
        // at n=2 the gap is ~6e-5, so the grid starts at 4.)
        for n in [4usize, 10, 50, 220] {
            let p = RadialProfile::new(n).unwrap();
            let sat = p.saturation();
            for mult in [0.2, 0.7, 1.0, 1.8, 3.0, 4.5] {
                let r = mult * (n as f64).sqrt();
                let val = radial_r(&p, r).unwrap();
                assert!(val <= sat + 1e-12, "n={n}, r={r}: {val} above {sat}");
                if mult >= 3.0 {
                    assert!(sat - val <= 1e-6, "n={n}, r={r}: gap {}", sat - val);
                }
            }
        }
    }

    #[test]
    fn radial_profile_matches_gaussian_ball_mass() {
        // Defining property, Monte Carlo: the Gaussian mass of B_r equals
        // the normalized-volume mass of B_R(r) inside the sqrt(n-1) ball.
        let n = 50;
        let m = 100_000;
        let p = RadialProfile::new(n).unwrap();
        let gauss = sample_gaussian(&GaussianSpec::round(n, 1.0).unwrap(), m, 21).unwrap();
        let ball = linear_scale(&sample_ball(n, m, 22).unwrap(), &vec![p.saturation(); n]).unwrap();
        let gauss_norms = gauss.norms();
        let ball_norms = ball.norms();
        for r in [5.0, 7.0, 9.0] {
            let rr = radial_r(&p, r).unwrap();
            let gmass = gauss_norms.iter().filter(|v| **v <= r).count() as f64 / m as f64;
            let emass = ball_norms.iter().filter(|v| **v <= rr).count() as f64 / m as f64;
            assert!(
                (gmass - emass).abs() <= 0.01,
                "r={r}: gaussian mass {gmass} vs ball mass {emass}"
            );
        }
    }

    #[test]
    fn annulus_profile_endpoints() {
        for (theta, n) in [(0.9f64, 200usize), (0.7, 20), (0.9, 2000)] {
            let sat = ((n - 1) as f64).sqrt();
            let lo = theta * sat;
            let hi = sat / theta;
            let at_lo = annulus_profile(theta, n, lo).unwrap();
            let at_hi = annulus_profile(theta, n, hi).unwrap();
            assert!((at_lo - lo).abs() <= 1e-9 * lo, "lower endpoint: {at_lo} vs {lo}");
            assert!((at_hi - sat).abs() <= 1e-9 * sat, "upper endpoint: {at_hi} vs {sat}");
        }
    }

    #[test]
    fn annulus_profile_frozen_references() {
        // 60-digit arbitrary-precision references at theta = 0.9.
        let cases = [
            (200usize, 14.0, 14.047050636169433),
            (200, 13.0, 13.87286744800696),
            (2000, 44.0, 44.668618185324069),
        ];
        for (n, r, want) in cases {
            let got = annulus_profile(0.9, n, r).unwrap();
            assert!(
                (got - want).abs() <= 1e-8 * want,
                "Rt(n={n}, r={r}) = {got}, want {want}"
            );
        }
    }

    #[test]
    fn annulus_profile_ratio_bounds() {
        // theta^2 <= Rt/r <= 1/theta across the annulus.
        for (theta, n) in [(0.7f64, 20usize), (0.9, 200), (0.9, 2000)] {
            let sat = ((n - 1) as f64).sqrt();
            let lo = theta * sat;
            let hi = sat / theta;
            for k in 0..=20 {
                let r = lo + (hi - lo) * k as f64 / 20.0;
                let rt = annulus_profile(theta, n, r).unwrap();
                let ratio = rt / r;
                assert!(
                    theta * theta <= ratio + 1e-12 && ratio <= 1.0 / theta + 1e-12,
                    "theta={theta}, n={n}, r={r}: ratio {ratio}"
                );
            }
        }
    }

    #[test]
    fn annulus_profile_rejects_out_of_range() {
        let sat = 199f64.sqrt();
        assert!(annulus_profile(0.9, 200, 0.9 * sat - 0.01).is_err());
        assert!(annulus_profile(0.9, 200, sat / 0.9 + 0.01).is_err());
        assert!(annulus_profile(0.0, 200, sat).is_err());
        assert!(annulus_profile(1.0, 200, sat).is_err());
        assert!(annulus_profile(0.9, 1, 1.0).is_err());
        assert!(annulus_profile(0.9, 200, f64::NAN).is_err());
    }

    #[test]
    fn transport_spec_validation() {
        assert!(TransportMapSpec::new(TransportVariant::PhiE, vec![1.0]).is_err());
        assert!(TransportMapSpec::new(TransportVariant::PhiE, vec![1.0, 0.0]).is_err());
        assert!(TransportMapSpec::new(TransportVariant::PsiAnnulus { theta: 1.5 }, vec![1.0, 1.0]).is_err());
        assert!(TransportMapSpec::new(TransportVariant::PhiS, vec![2.0, 1.0]).is_ok());
    }

    #[test]
    fn phi_s_lands_on_the_surface() {
        let axes = vec![2.0, 1.0, 0.5, 3.0, 1.5];
        let n = axes.len();
        let spec = TransportMapSpec::new(TransportVariant::PhiS, axes.clone()).unwrap();
        let gauss = sample_gaussian(&GaussianSpec::new(axes.clone()).unwrap(), 200, 23).unwrap();
        let out = apply_transport(&spec, &gauss).unwrap();
        let sat = ((n - 1) as f64).sqrt();
        for y in out.points() {
            let q: f64 = y
                .iter()
                .zip(&axes)
                .map(|(v, a)| (v / (sat * a)) * (v / (sat * a)))
                .sum();
            assert!((q - 1.0).abs() <= 1e-9, "surface constraint violated: {q}");
        }
    }

    #[test]
    fn phi_e_lands_inside_the_solid() {
        let axes = vec![2.0, 1.0, 0.5, 3.0, 1.5, 0.25, 1.0];
        let n = axes.len();
        let spec = TransportMapSpec::new(TransportVariant::PhiE, axes.clone()).unwrap();
        let gauss = sample_gaussian(&GaussianSpec::new(axes.clone()).unwrap(), 500, 24).unwrap();
        let out = apply_transport(&spec, &gauss).unwrap();
        let sat = ((n - 1) as f64).sqrt();
        for y in out.points() {
            let q: f64 = y
                .iter()
                .zip(&axes)
                .map(|(v, a)| (v / (sat * a)) * (v / (sat * a)))
                .sum();
            assert!(q <= 1.0 + 1e-12, "left the solid ellipsoid: {q}");
        }
    }

    #[test]
    fn phi_e_fixes_the_origin_and_phi_s_rejects_it() {
        let e = TransportMapSpec::new(TransportVariant::PhiE, vec![1.0, 1.0]).unwrap();
        assert_eq!(e.map_point(&[0.0, 0.0]).unwrap(), vec![0.0, 0.0]);
        let s = TransportMapSpec::new(TransportVariant::PhiS, vec![1.0, 1.0]).unwrap();
        assert!(s.map_point(&[0.0, 0.0]).is_err());
        let psi = TransportMapSpec::new(TransportVariant::PsiAnnulus { theta: 0.9 }, vec![1.0, 1.0]).unwrap();
        assert!(psi.map_point(&[0.0, 0.0]).is_err());
    }

    #[test]
    fn phi_s_round_dim_2_has_unit_output_norm() {
        // sqrt(n-1) = 1 in dimension 2: the map is radial projection onto
        // the unit circle.
        let s = TransportMapSpec::new(TransportVariant::PhiS, vec![1.0, 1.0]).unwrap();
        for x in [[3.0, 4.0], [0.1, 0.0], [-2.0, 7.0]] {
            let y = s.map_point(&x).unwrap();
            assert!((norm(&y) - 1.0).abs() <= 1e-12);
        }
    }

    #[test]
    fn phi_s_with_shared_seed_reproduces_surface_samples() {
        // Gaussian sampling and sphere sampling consume the same normal
        // stream, so applying PhiS to a Gaussian cloud must reproduce the
        // directly sampled surface ellipsoid almost exactly; in particular
        // the two clouds are within any Prokhorov tolerance of interest.
        for (n, axes) in [(50, vec![1.0; 50]), (200, vec![1.0; 200]), (50, geometric_axes(50))] {
            let sat = ((n - 1) as f64).sqrt();
            let spec = TransportMapSpec::new(TransportVariant::PhiS, axes.clone()).unwrap();
            let gauss = sample_gaussian(&GaussianSpec::new(axes.clone()).unwrap(), 300, 25).unwrap();
            let pushed = apply_transport(&spec, &gauss).unwrap();
            let surface_axes: Vec<f64> = axes.iter().map(|a| sat * a).collect();
            let direct = linear_scale(&sample_sphere(n, 300, 25).unwrap(), &surface_axes).unwrap();
            for (y, z) in pushed.points().zip(direct.points()) {
                for (a, b) in y.iter().zip(z) {
                    assert!((a - b).abs() <= 1e-9 * a.abs().max(1.0));
                }
            }
        }
    }

    fn geometric_axes(n: usize) -> Vec<f64> {
        (0..n).map(|i| 0.95f64.powi(i as i32)).collect()
    }

    #[test]
    fn phi_e_pushes_the_radial_law_onto_the_ball_law() {
        // Norms are a 1-Lipschitz image; two-sample KS between transported
        // Gaussian norms and solid-ball norms must sit at the Monte Carlo
        // floor.
        let n = 50;
        let m = 20_000;
        let sat = ((n - 1) as f64).sqrt();
        let spec = TransportMapSpec::new(TransportVariant::PhiE, vec![1.0; n]).unwrap();
        let gauss = sample_gaussian(&GaussianSpec::round(n, 1.0).unwrap(), m, 26).unwrap();
        let pushed = apply_transport(&spec, &gauss).unwrap();
        let ball = linear_scale(&sample_ball(n, m, 27).unwrap(), &vec![sat; n]).unwrap();
        let mut a = pushed.norms();
        let mut b = ball.norms();
        a.sort_unstable_by(|x, y| x.partial_cmp(y).unwrap());
        b.sort_unstable_by(|x, y| x.partial_cmp(y).unwrap());
        let (mut i, mut j, mut ks) = (0usize, 0usize, 0.0f64);
        while i < a.len() && j < b.len() {
            if a[i] <= b[j] {
                i += 1;
            } else {
                j += 1;
            }
            ks = ks.max((i as f64 / m as f64 - j as f64 / m as f64).abs());
        }
        assert!(ks <= 0.02, "KS between radial laws = {ks}");
    }

    #[test]
    fn opnorm_of_surface_map_at_its_own_radius_is_one() {
        let s = TransportMapSpec::new(TransportVariant::PhiS, vec![1.0, 1.0, 1.0]).unwrap();
        let x = [2f64.sqrt(), 0.0, 0.0];
        let est = opnorm_at(&s, &x, default_step(&x)).unwrap();
        assert!(!est.degenerate);
        assert!((est.value - 1.0).abs() <= 5e-4, "opnorm {}", est.value);
    }

    #[test]
    fn opnorm_of_pure_linear_map_is_largest_axis() {
        let linear = |y: &[f64]| -> Result<Vec<f64>> { Ok(vec![3.0 * y[0], y[1]]) };
        for x in [[0.5, 0.5], [-4.0, 1.0], [10.0, -3.0]] {
            let est = opnorm_of_map(linear, &x, default_step(&x)).unwrap();
            assert!((est.value - 3.0).abs() <= 1e-6, "opnorm {}", est.value);
        }
    }

    #[test]
    fn opnorm_finite_difference_steps_are_consistent() {
        let spec = TransportMapSpec::new(TransportVariant::PhiE, vec![1.0; 8]).unwrap();
        let x: Vec<f64> = (0..8).map(|i| 0.4 + 0.3 * i as f64).collect();
        let h = default_step(&x);
        let full = opnorm_at(&spec, &x, h).unwrap().value;
        let half = opnorm_at(&spec, &x, h / 2.0).unwrap().value;
        assert!((full - half).abs() <= 1e-3, "h: {full}, h/2: {half}");
    }

    #[test]
    fn opnorm_flags_degenerate_jacobians() {
        let constant = |_: &[f64]| -> Result<Vec<f64>> { Ok(vec![1.0, 2.0]) };
        let est = opnorm_of_map(constant, &[0.3, 0.4], 1e-5).unwrap();
        assert_eq!(est.value, 0.0);
        assert!(est.degenerate);
        assert!(opnorm_of_map(constant, &[0.3, 0.4], 0.0).is_err());
    }

    proptest! {
        #[test]
        fn radial_profile_strictly_increases_below_saturation(
            n in 2usize..400,
            grid in proptest::collection::vec(0.05f64..1.1, 2..12),
        ) {
            let p = RadialProfile::new(n).unwrap();
            let scale = (n as f64).sqrt();
            let mut rs: Vec<f64> = grid.iter().map(|g| g * scale).collect();
            rs.sort_unstable_by(|a, b| a.partial_cmp(b).unwrap());
            rs.dedup_by(|b, a| (*b - *a).abs() < 1e-3 * scale);
            let vals: Vec<f64> = rs.iter().map(|r| radial_r(&p, *r).unwrap()).collect();
            for w in vals.windows(2) {
                prop_assert!(w[0] < w[1], "not strictly increasing: {} then {}", w[0], w[1]);
            }
        }

        #[test]
        fn phi_s_is_radially_homogeneous(
            t in 0.01f64..100.0,
            x0 in -5.0f64..5.0,
            x1 in 0.1f64..5.0,
        ) {
            let s = TransportMapSpec::new(TransportVariant::PhiS, vec![2.0, 0.7]).unwrap();
            let base = s.map_point(&[x0, x1]).unwrap();
            let scaled = s.map_point(&[t * x0, t * x1]).unwrap();
            for (a, b) in base.iter().zip(&scaled) {
                prop_assert!((a - b).abs() <= 1e-10 * a.abs().max(1.0));
            }
        }

        #[test]
        fn phi_e_stays_inside_and_preserves_direction(
            coords in proptest::collection::vec(-3.0f64..3.0, 4),
        ) {
            prop_assume!(coords.iter().any(|c| c.abs() > 1e-6));
            let spec = TransportMapSpec::new(TransportVariant::PhiE, vec![1.0; 4]).unwrap();
            let y = spec.map_point(&coords).unwrap();
            let r = norm(&coords);
            let ry = norm(&y);
            prop_assert!(ry <= 3f64.sqrt() + 1e-12);
            // Same direction: y = c x with c >= 0.
            for (a, b) in coords.iter().zip(&y) {
                prop_assert!((a * ry - b * r).abs() <= 1e-9 * r.max(1.0));
            }
        }
    }
}
