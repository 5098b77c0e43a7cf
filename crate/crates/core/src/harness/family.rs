//! Semiaxis families over a dimension schedule and their limit diagnostics.
//!
//! A family assigns a positive semiaxis list a_1j..a_nj to every step j of
//! a dimension schedule n(j). The diagnostics compare the family against a
//! declared limit list and report which convergence regimes the numbers
//! are consistent with; they are hints, not certificates, because a finite
//! table cannot witness a limit.

use crate::error::{invalid, Result};

/// Per-step additive adjustment applied to every semiaxis of step j.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Perturbation {
    None,
    /// Adds c/j with j counted from 1, so the rows approach the base list.
    InverseJ(f64),
}

/// How the semiaxis rows are produced.
#[derive(Debug, Clone, PartialEq)]
pub enum FamilyGenerator {
    /// One explicit row per step; row lengths must match the schedule.
    Explicit(Vec<Vec<f64>>),
    /// Every semiaxis equals the given constant.
    Round(f64),
    /// a_i = scale * ratio^(i-1) at every step.
    Geometric { ratio: f64, scale: f64 },
    /// The limit list padded with zeros, plus the perturbation.
    CustomLimit { limit: Vec<f64>, perturbation: Perturbation },
}

/// Materialized family: positive finite semiaxes at every schedule step.
#[derive(Debug, Clone, PartialEq)]
pub struct SequenceFamily {
    dims: Vec<usize>,
    rows: Vec<Vec<f64>>,
}

/// Structural checks over the whole table.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FamilyChecks {
    /// n(j) never decreases along the schedule.
    pub dims_nondecreasing: bool,
    /// Every row is monotone nonincreasing in the axis index.
    pub axes_nonincreasing: bool,
    /// The final two rows agree entrywise within 1e-6 on their common
    /// prefix, the finite stand-in for rowwise convergence.
    pub limit_exists: bool,
}

/// Entrywise agreement tolerance for the convergence check.
const LIMIT_TOL: f64 = 1e-6;

impl SequenceFamily {
    pub fn new(generator: FamilyGenerator, dims: Vec<usize>) -> Result<Self> {
        if dims.is_empty() {
            return Err(invalid("family needs at least one schedule step"));
        }
        if dims.iter().any(|n| *n == 0) {
            return Err(invalid("family dimensions must be positive"));
        }
        let rows: Vec<Vec<f64>> = match &generator {
            FamilyGenerator::Explicit(rows) => {
                if rows.len() != dims.len() {
                    return Err(invalid(format!(
                        "explicit family has {} rows for {} schedule steps",
                        rows.len(),
                        dims.len()
                    )));
                }
                for (j, (row, n)) in rows.iter().zip(&dims).enumerate() {
                    if row.len() != *n {
                        return Err(invalid(format!(
                            "explicit row {j} has {} entries, schedule says {n}",
                            row.len()
                        )));
                    }
                }
                rows.clone()
            }
            FamilyGenerator::Round(a) => dims.iter().map(|n| vec![*a; *n]).collect(),
            FamilyGenerator::Geometric { ratio, scale } => dims
                .iter()
                .map(|n| (0..*n).map(|i| scale * ratio.powi(i as i32)).collect())
                .collect(),
            FamilyGenerator::CustomLimit { limit, perturbation } => dims
                .iter()
                .enumerate()
                .map(|(j, n)| {
                    let bump = match perturbation {
                        Perturbation::None => 0.0,
                        Perturbation::InverseJ(c) => c / (j as f64 + 1.0),
                    };
                    (0..*n).map(|i| limit.get(i).copied().unwrap_or(0.0) + bump).collect()
                })
                .collect(),
        };
        for row in &rows {
            if !row.iter().all(|a| a.is_finite() && *a > 0.0) {
                return Err(invalid("family semiaxes must be strictly positive and finite"));
            }
        }
        Ok(Self { dims, rows })
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    /// Semiaxes of step j; panics when j is outside the schedule, like
    /// slice indexing.
    pub fn axes(&self, j: usize) -> &[f64] {
        &self.rows[j]
    }

    pub fn checks(&self) -> FamilyChecks {
        let dims_nondecreasing = self.dims.windows(2).all(|w| w[0] <= w[1]);
        let axes_nonincreasing =
            self.rows.iter().all(|row| row.windows(2).all(|w| w[0] >= w[1]));
        let limit_exists = if self.rows.len() < 2 {
            true
        } else {
            let last = &self.rows[self.rows.len() - 1];
            let prev = &self.rows[self.rows.len() - 2];
            last.iter().zip(prev).all(|(a, b)| (a - b).abs() <= LIMIT_TOL)
        };
        FamilyChecks { dims_nondecreasing, axes_nonincreasing, limit_exists }
    }
}

/// Limit diagnostics: partial sums of the squared limit entries, the
/// per-step squared deviation from the (zero-padded) limit, and regime
/// hints read off the finite data.
#[derive(Debug, Clone, PartialEq)]
pub struct CriteriaReport {
    pub l2_limit_sum: Vec<f64>,
    pub deviation_series: Vec<f64>,
    pub verdict_hints: Vec<String>,
}

/// Threshold below which a tail sum or final deviation counts as settled.
const HINT_TOL: f64 = 1e-6;
/// Threshold below which the padded tail value counts as vanishing.
const ZERO_TOL: f64 = 1e-3;

/// Pure arithmetic over the family table and a limit list (implicitly
/// zero-padded beyond its support). The hints name the convergence
/// regimes the data is consistent with:
///
/// - `box-candidate`: the limit looks square-summable and the deviation
///   series either sits below tolerance or closes at least half its
///   initial value while nonincreasing over its final half;
/// - `concentration-candidate`: the limit looks square-summable (second
///   half of the padded squares sums below tolerance);
/// - `asymptotic-concentration-candidate`: the padded limit tail value
///   looks like zero;
/// - `weak-only`: none of the above.
pub fn check_criteria(fam: &SequenceFamily, limit: &[f64]) -> CriteriaReport {
    let mut l2_limit_sum = Vec::with_capacity(limit.len());
    let mut acc = 0.0;
    for a in limit {
        acc += a * a;
        l2_limit_sum.push(acc);
    }

    let padded = |i: usize| limit.get(i).copied().unwrap_or(0.0);
    let deviation_series: Vec<f64> = (0..fam.dims().len())
        .map(|j| {
            fam.axes(j)
                .iter()
                .enumerate()
                .map(|(i, a)| {
                    let d = a - padded(i);
                    d * d
                })
                .sum()
        })
        .collect();

    // Horizon: the longest row the data ever reaches, or the declared
    // support when that is longer.
    let horizon = fam.dims().iter().copied().max().unwrap_or(0).max(limit.len()).max(1);
    let tail_half: f64 = (horizon / 2..horizon).map(|i| padded(i) * padded(i)).sum();
    let l2_ok = tail_half <= HINT_TOL;
    let zero_ok = padded(horizon - 1).abs() <= ZERO_TOL;

    let first_dev = deviation_series.first().copied().unwrap_or(0.0);
    let final_dev = deviation_series.last().copied().unwrap_or(0.0);
    let tail_start = deviation_series.len() / 2;
    let tail_nonincreasing =
        deviation_series[tail_start..].windows(2).all(|w| w[0] >= w[1]);
    let dev_ok =
        final_dev <= HINT_TOL || (final_dev <= 0.5 * first_dev && tail_nonincreasing);

    let mut verdict_hints = Vec::new();
    if l2_ok && dev_ok {
        verdict_hints.push("box-candidate".to_string());
    }
    if l2_ok {
        verdict_hints.push("concentration-candidate".to_string());
    }
    if zero_ok {
        verdict_hints.push("asymptotic-concentration-candidate".to_string());
    }
    if verdict_hints.is_empty() {
        verdict_hints.push("weak-only".to_string());
    }

    CriteriaReport { l2_limit_sum, deviation_series, verdict_hints }
}
