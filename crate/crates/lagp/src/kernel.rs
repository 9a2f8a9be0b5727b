//! Separable squared-exponential correlation on (possibly latent-augmented)
//! inputs: `K(a, b) = exp(-sum_l phi_l (a_l - b_l)^2)`.
//!
//! The exponent power is fixed at 2. Each coordinate carries its own inverse
//! range `phi_l > 0`; for latent-augmented points the last coordinate is the
//! inferred latent input and the last `phi` weights it.

use crate::data::Points;
use crate::error::{Error, Result};

/// Per-coordinate inverse range parameters of the correlation function.
///
/// One strictly positive, finite entry per active input coordinate: `p` for a
/// plain process on the original inputs, `p + 1` when a latent coordinate is
/// appended.
#[derive(Debug, Clone, PartialEq)]
pub struct Ranges(Vec<f64>);

impl Ranges {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::BadConfig("ranges must have at least one entry".into()));
        }
        for &v in &values {
            if !v.is_finite() || v <= 0.0 {
                return Err(Error::InvalidRange(v));
            }
        }
        Ok(Ranges(values))
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }
}

/// Correlation between two points of the same dimension as `ranges`.
pub fn sq_exp_corr(a: &[f64], b: &[f64], ranges: &Ranges) -> Result<f64> {
    if a.len() != ranges.dim() || b.len() != ranges.dim() {
        return Err(Error::DimensionMismatch {
            expected: ranges.dim(),
            got: if a.len() != ranges.dim() { a.len() } else { b.len() },
        });
    }
    if a.iter().chain(b.iter()).any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("correlation input"));
    }
    Ok(corr_unchecked(a, b, ranges.values()))
}

/// Hot-path correlation without validation; callers guarantee shapes.
#[inline]
pub(crate) fn corr_unchecked(a: &[f64], b: &[f64], phi: &[f64]) -> f64 {
    let mut s = 0.0;
    for l in 0..phi.len() {
        let d = a[l] - b[l];
        s += phi[l] * d * d;
    }
    (-s).exp()
}

/// Correlations between `query` and every point in `points` (flat row-major).
pub(crate) fn cross_corr_into(
    points: &[f64],
    dim: usize,
    query: &[f64],
    phi: &[f64],
    out: &mut Vec<f64>,
) {
    debug_assert_eq!(query.len(), dim);
    debug_assert_eq!(phi.len(), dim);
    out.clear();
    out.extend(
        points
            .chunks_exact(dim)
            .map(|row| corr_unchecked(row, query, phi)),
    );
}

/// Correlations between `query` and every point in `points`.
pub fn cross_corr(points: &Points, query: &[f64], ranges: &Ranges) -> Result<Vec<f64>> {
    if points.dim() != ranges.dim() || query.len() != ranges.dim() {
        return Err(Error::DimensionMismatch {
            expected: ranges.dim(),
            got: query.len(),
        });
    }
    let mut out = Vec::with_capacity(points.len());
    cross_corr_into(points.as_flat(), points.dim(), query, ranges.values(), &mut out);
    Ok(out)
}

/// Dense `n x n` correlation matrix (row-major, unit diagonal, no nugget).
pub fn corr_matrix(points: &Points, ranges: &Ranges) -> Result<Vec<f64>> {
    if points.dim() != ranges.dim() {
        return Err(Error::DimensionMismatch {
            expected: ranges.dim(),
            got: points.dim(),
        });
    }
    let n = points.len();
    let phi = ranges.values();
    let mut k = vec![0.0; n * n];
    for i in 0..n {
        k[i * n + i] = 1.0;
        for j in 0..i {
            let v = corr_unchecked(points.point(i), points.point(j), phi);
            k[i * n + j] = v;
            k[j * n + i] = v;
        }
    }
    Ok(k)
}
