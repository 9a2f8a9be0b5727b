//! Cholesky factors of squared-exponential correlation matrices with a
//! nugget, stored as a packed lower triangle so that appending one design
//! point is an O(t²) bordered update instead of an O(t³) refactorization.

use crate::data::Points;
use crate::error::{Error, Result};
use crate::kernel::{corr_unchecked, Ranges};

/// Smallest jitter tried when a factorization fails outright.
const JITTER_FLOOR: f64 = 1e-10;
/// Largest diagonal jitter before giving up.
const JITTER_CAP: f64 = 1e-3;

/// Lower-triangular Cholesky factor `L` of `K + alpha I`, where `K` is the
/// correlation matrix of a point set and `alpha` is the nugget.
///
/// Rows are packed contiguously (`row i` holds `i + 1` entries), so extending
/// the factor by one point appends one row. The log-determinant of
/// `K + alpha I` is cached because the sequential resampling weight needs it
/// on every update.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrFactor {
    order: usize,
    nugget: f64,
    rows: Vec<f64>,
    log_det: f64,
}

/// In-place Cholesky of a packed lower-triangular symmetric matrix.
///
/// On success the buffer holds `L`; on failure returns the pivot index that
/// went non-positive.
pub(crate) fn chol_packed(a: &mut [f64], n: usize) -> std::result::Result<(), usize> {
    for i in 0..n {
        let row_i = i * (i + 1) / 2;
        for j in 0..=i {
            let row_j = j * (j + 1) / 2;
            let mut s = a[row_i + j];
            for k in 0..j {
                s -= a[row_i + k] * a[row_j + k];
            }
            if j < i {
                a[row_i + j] = s / a[row_j + j];
            } else {
                if !(s > 0.0) || !s.is_finite() {
                    return Err(i);
                }
                a[row_i + i] = s.sqrt();
            }
        }
    }
    Ok(())
}

/// Forward substitution `L x = b` on a packed factor buffer.
pub(crate) fn forward_packed(rows: &[f64], n: usize, b: &mut [f64]) {
    for i in 0..n {
        let base = i * (i + 1) / 2;
        let mut s = b[i];
        for k in 0..i {
            s -= rows[base + k] * b[k];
        }
        b[i] = s / rows[base + i];
    }
}

/// Backward substitution `L^T x = b` on a packed factor buffer.
pub(crate) fn backward_packed(rows: &[f64], n: usize, b: &mut [f64]) {
    for i in (0..n).rev() {
        let mut s = b[i];
        for k in (i + 1)..n {
            s -= rows[k * (k + 1) / 2 + i] * b[k];
        }
        b[i] = s / rows[i * (i + 1) / 2 + i];
    }
}

impl CorrFactor {
    /// Factorizes `K + nugget I` for the given points and ranges.
    ///
    /// If the factorization fails, the diagonal is jittered starting at
    /// `max(nugget, 1e-10)` and escalating tenfold up to `1e-3`; past that the
    /// offending design is reported as an error.
    pub fn build(points: &Points, ranges: &Ranges, nugget: f64) -> Result<Self> {
        if points.dim() != ranges.dim() {
            return Err(Error::DimensionMismatch {
                expected: ranges.dim(),
                got: points.dim(),
            });
        }
        if !(nugget >= 0.0) || !nugget.is_finite() {
            return Err(Error::NonFinite("nugget"));
        }
        if points.as_flat().iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("design points"));
        }
        let n = points.len();
        assert!(n >= 1, "need at least one point to factorize");
        let phi = ranges.values();

        // Assemble the packed lower triangle of K once; retries only touch
        // the diagonal.
        let mut packed = vec![0.0; n * (n + 1) / 2];
        for i in 0..n {
            let base = i * (i + 1) / 2;
            for j in 0..i {
                packed[base + j] = corr_unchecked(points.point(i), points.point(j), phi);
            }
            packed[base + i] = 1.0 + nugget;
        }

        let mut jitter = 0.0;
        loop {
            let mut attempt = packed.clone();
            if jitter > 0.0 {
                for i in 0..n {
                    attempt[i * (i + 1) / 2 + i] += jitter;
                }
            }
            match chol_packed(&mut attempt, n) {
                Ok(()) => {
                    if jitter > 0.0 {
                        log::warn!(
                            "correlation factor of order {n} needed diagonal jitter {jitter:e}"
                        );
                    }
                    let log_det = log_det_from_rows(&attempt, n);
                    return Ok(CorrFactor {
                        order: n,
                        nugget,
                        rows: attempt,
                        log_det,
                    });
                }
                Err(pivot) => {
                    last_pivot = pivot;
                    let next = if jitter == 0.0 {
                        nugget.max(JITTER_FLOOR)
                    } else {
                        jitter * 10.0
                    };
                    if next > JITTER_CAP {
                        return Err(Error::Factorization {
                            order: n,
                            pivot: last_pivot,
                            max_jitter: JITTER_CAP,
                        });
                    }
                    jitter = next;
                }
            }
        }
    }

    /// Extends the factor by one point given its correlations `cross` with the
    /// existing points and its self-correlation (1 for a distinct point; the
    /// stored nugget is added internally).
    ///
    /// The result matches a full refactorization of the bordered matrix: the
    /// new row is `v = L^{-1} cross` and the new pivot is
    /// `sqrt(self_corr + nugget - |v|^2)`, jittered like [`CorrFactor::build`]
    /// if the Schur complement is not positive.
    pub fn extended(&self, cross: &[f64], self_corr: f64) -> Result<Self> {
        if cross.len() != self.order {
            return Err(Error::DimensionMismatch {
                expected: self.order,
                got: cross.len(),
            });
        }
        if cross.iter().any(|v| !v.is_finite()) || !self_corr.is_finite() {
            return Err(Error::NonFinite("factor extension"));
        }
        let mut v = cross.to_vec();
        forward_packed(&self.rows, self.order, &mut v);
        let base = self_corr + self.nugget - v.iter().map(|x| x * x).sum::<f64>();

        let mut jitter = 0.0;
        let schur = loop {
            let s = base + jitter;
            if s > 0.0 && s.is_finite() {
                break s;
            }
            let next = if jitter == 0.0 {
                self.nugget.max(JITTER_FLOOR)
            } else {
                jitter * 10.0
            };
            if next > JITTER_CAP {
                return Err(Error::SchurNotPositive {
                    order: self.order + 1,
                });
            }
            jitter = next;
        };
        if jitter > 0.0 {
            log::warn!(
                "factor extension to order {} needed diagonal jitter {jitter:e}",
                self.order + 1
            );
        }

        let pivot = schur.sqrt();
        let mut rows = Vec::with_capacity(self.rows.len() + self.order + 1);
        rows.extend_from_slice(&self.rows);
        rows.extend_from_slice(&v);
        rows.push(pivot);
        Ok(CorrFactor {
            order: self.order + 1,
            nugget: self.nugget,
            rows,
            log_det: self.log_det + 2.0 * pivot.ln(),
        })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn nugget(&self) -> f64 {
        self.nugget
    }

    /// Cached `log det(K + nugget I)`.
    pub fn log_det(&self) -> f64 {
        self.log_det
    }

    /// `(K + nugget I)^{-1} rhs` via two triangular solves.
    pub fn solve(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        if rhs.len() != self.order {
            return Err(Error::DimensionMismatch {
                expected: self.order,
                got: rhs.len(),
            });
        }
        let mut x = rhs.to_vec();
        forward_packed(&self.rows, self.order, &mut x);
        backward_packed(&self.rows, self.order, &mut x);
        Ok(x)
    }

    /// `L^{-1} rhs` (forward substitution only), in place.
    pub fn forward(&self, rhs: &mut [f64]) {
        debug_assert_eq!(rhs.len(), self.order);
        forward_packed(&self.rows, self.order, rhs);
    }

    /// `L^{-T} rhs` (backward substitution only), in place.
    pub fn backward(&self, rhs: &mut [f64]) {
        debug_assert_eq!(rhs.len(), self.order);
        backward_packed(&self.rows, self.order, rhs);
    }

    /// `L x`, used to draw correlated Gaussians from whitened noise.
    pub fn mul_lower(&self, x: &[f64]) -> Vec<f64> {
        debug_assert_eq!(x.len(), self.order);
        let mut out = vec![0.0; self.order];
        for i in 0..self.order {
            let base = i * (i + 1) / 2;
            let mut s = 0.0;
            for k in 0..=i {
                s += self.rows[base + k] * x[k];
            }
            out[i] = s;
        }
        out
    }

    /// Row `i` of the packed factor (length `i + 1`).
    pub fn row(&self, i: usize) -> &[f64] {
        let base = i * (i + 1) / 2;
        &self.rows[base..base + i + 1]
    }

    /// Reassembles the dense `L L^T` (row-major), mainly for verification.
    pub fn reconstruct(&self) -> Vec<f64> {
        let n = self.order;
        let mut out = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                let m = i.min(j);
                let (bi, bj) = (i * (i + 1) / 2, j * (j + 1) / 2);
                let mut s = 0.0;
                for k in 0..=m {
                    s += self.rows[bi + k] * self.rows[bj + k];
                }
                out[i * n + j] = s;
            }
        }
        out
    }
}

fn log_det_from_rows(rows: &[f64], n: usize) -> f64 {
    (0..n).map(|i| 2.0 * rows[i * (i + 1) / 2 + i].ln()).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::corr_matrix;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha12Rng;

    fn ranges1(phi: f64) -> Ranges {
        Ranges::new(vec![phi]).unwrap()
    }

    #[test]
    fn single_point_unit_factor() {
        let pts = Points::from_rows(1, &[vec![0.3]]).unwrap();
        let f = CorrFactor::build(&pts, &ranges1(1.0), 0.0).unwrap();
        assert_eq!(f.order(), 1);
        assert_eq!(f.row(0), &[1.0]);
        assert_eq!(f.log_det(), 0.0);
    }

    #[test]
    fn duplicate_points_log_det_matches_2x2_algebra() {
        // K + aI = [[1+a, 1], [1, 1+a]] has determinant (1+a)^2 - 1 = 2a + a^2.
        let a = 1e-7;
        let pts = Points::from_rows(2, &[vec![0.4, 0.1], vec![0.4, 0.1]]).unwrap();
        let r = Ranges::new(vec![1.0, 2.0]).unwrap();
        let f = CorrFactor::build(&pts, &r, a).unwrap();
        assert_abs_diff_eq!(f.log_det(), (2.0 * a + a * a).ln(), epsilon = 1e-9);
    }

    #[test]
    fn reconstruction_matches_direct_matrix() {
        let pts = Points::from_rows(1, &[vec![0.0], vec![1.0], vec![2.0], vec![3.0]]).unwrap();
        let r = ranges1(1.0);
        let nugget = 1e-7;
        let f = CorrFactor::build(&pts, &r, nugget).unwrap();
        let mut k = corr_matrix(&pts, &r).unwrap();
        for i in 0..4 {
            k[i * 4 + i] += nugget;
        }
        let rec = f.reconstruct();
        let mut num = 0.0;
        let mut den = 0.0;
        for (a, b) in rec.iter().zip(k.iter()) {
            num += (a - b) * (a - b);
            den += b * b;
        }
        assert!((num / den).sqrt() < 1e-10);
    }

    #[test]
    fn extend_two_point_hand_cholesky() {
        let pts = Points::from_rows(1, &[vec![0.0]]).unwrap();
        let f = CorrFactor::build(&pts, &ranges1(1.0), 0.0).unwrap();
        let c = (-1.0f64).exp();
        let g = f.extended(&[c], 1.0).unwrap();
        assert_abs_diff_eq!(g.row(1)[0], c, epsilon = 1e-15);
        assert_abs_diff_eq!(g.row(1)[1], (1.0 - c * c).sqrt(), epsilon = 1e-15);
    }

    #[test]
    fn extend_with_zero_cross_is_block_diagonal() {
        let a = 1e-7;
        let pts = Points::from_rows(1, &[vec![0.0], vec![0.5]]).unwrap();
        let f = CorrFactor::build(&pts, &ranges1(2.0), a).unwrap();
        let g = f.extended(&[0.0, 0.0], 1.0).unwrap();
        assert_eq!(&g.row(2)[..2], &[0.0, 0.0]);
        assert_abs_diff_eq!(g.row(2)[2], (1.0 + a).sqrt(), epsilon = 1e-15);
    }

    #[test]
    fn chained_extensions_match_full_build() {
        // Random designs in 1..=6 dimensions, grown point by point to t = 50.
        let mut rng = ChaCha12Rng::seed_from_u64(7);
        for &dim in &[1usize, 2, 6] {
            let phi: Vec<f64> = (0..dim).map(|_| rng.gen_range(0.2..3.0)).collect();
            let r = Ranges::new(phi).unwrap();
            let t = 50;
            let mut pts = Points::new(dim);
            for _ in 0..t {
                let row: Vec<f64> = (0..dim).map(|_| rng.gen_range(0.0..1.0)).collect();
                pts.push(&row).unwrap();
            }
            let nugget = 1e-7;

            let mut first = Points::new(dim);
            first.push(pts.point(0)).unwrap();
            let mut f = CorrFactor::build(&first, &r, nugget).unwrap();
            for i in 1..t {
                let mut grown = Points::new(dim);
                for j in 0..i {
                    grown.push(pts.point(j)).unwrap();
                }
                let cross: Vec<f64> = (0..i)
                    .map(|j| corr_unchecked(pts.point(j), pts.point(i), r.values()))
                    .collect();
                f = f.extended(&cross, 1.0).unwrap();
                grown.push(pts.point(i)).unwrap();
                let rebuilt = CorrFactor::build(&grown, &r, nugget).unwrap();
                for row in 0..f.order() {
                    for (a, b) in f.row(row).iter().zip(rebuilt.row(row)) {
                        assert!((a - b).abs() < 1e-8, "dim {dim} t {i} row {row}");
                    }
                }
            }
        }
    }

    #[test]
    fn solve_identity_cases() {
        let pts = Points::from_rows(1, &[vec![0.0]]).unwrap();
        let f = CorrFactor::build(&pts, &ranges1(1.0), 0.0).unwrap();
        assert_eq!(f.solve(&[3.0]).unwrap(), vec![3.0]);
    }

    #[test]
    fn solve_column_gives_unit_vector() {
        let pts =
            Points::from_rows(1, &[vec![0.0], vec![0.4], vec![1.1], vec![1.9], vec![2.5]]).unwrap();
        let r = ranges1(0.8);
        let nugget = 1e-7;
        let f = CorrFactor::build(&pts, &r, nugget).unwrap();
        let n = 5;
        let mut k = corr_matrix(&pts, &r).unwrap();
        for i in 0..n {
            k[i * n + i] += nugget;
        }
        let col: Vec<f64> = (0..n).map(|i| k[i * n + 2]).collect();
        let x = f.solve(&col).unwrap();
        for (i, v) in x.iter().enumerate() {
            let want = if i == 2 { 1.0 } else { 0.0 };
            assert!((v - want).abs() < 1e-10, "entry {i}: {v}");
        }
    }

    // Gauss-Jordan inverse, independent of the factor code.
    fn invert_dense(a: &[f64], n: usize) -> Vec<f64> {
        let mut m = vec![0.0; n * 2 * n];
        for i in 0..n {
            for j in 0..n {
                m[i * 2 * n + j] = a[i * n + j];
            }
            m[i * 2 * n + n + i] = 1.0;
        }
        for col in 0..n {
            let mut piv = col;
            for r in col + 1..n {
                if m[r * 2 * n + col].abs() > m[piv * 2 * n + col].abs() {
                    piv = r;
                }
            }
            if piv != col {
                for c in 0..2 * n {
                    m.swap(col * 2 * n + c, piv * 2 * n + c);
                }
            }
            let d = m[col * 2 * n + col];
            for c in 0..2 * n {
                m[col * 2 * n + c] /= d;
            }
            for r in 0..n {
                if r != col {
                    let f = m[r * 2 * n + col];
                    for c in 0..2 * n {
                        m[r * 2 * n + c] -= f * m[col * 2 * n + c];
                    }
                }
            }
        }
        let mut inv = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                inv[i * n + j] = m[i * 2 * n + n + j];
            }
        }
        inv
    }

    #[test]
    fn solve_matches_explicit_inverse() {
        let mut rng = ChaCha12Rng::seed_from_u64(11);
        let n = 5;
        let rows: Vec<Vec<f64>> = (0..n).map(|_| vec![rng.gen_range(0.0..2.0)]).collect();
        let pts = Points::from_rows(1, &rows).unwrap();
        let r = ranges1(1.3);
        let nugget = 1e-6;
        let f = CorrFactor::build(&pts, &r, nugget).unwrap();

        let mut k = corr_matrix(&pts, &r).unwrap();
        for i in 0..n {
            k[i * n + i] += nugget;
        }
        let inv = invert_dense(&k, n);
        let rhs: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let got = f.solve(&rhs).unwrap();
        for i in 0..n {
            let want: f64 = (0..n).map(|j| inv[i * n + j] * rhs[j]).sum();
            assert!((got[i] - want).abs() < 1e-9);
        }
    }

    #[test]
    fn shape_errors() {
        let pts = Points::from_rows(1, &[vec![0.0], vec![1.0]]).unwrap();
        let f = CorrFactor::build(&pts, &ranges1(1.0), 1e-7).unwrap();
        assert!(f.solve(&[1.0]).is_err());
        assert!(f.extended(&[1.0, 0.0, 0.0], 1.0).is_err());
        assert!(f.extended(&[f64::NAN, 0.0], 1.0).is_err());
    }

    #[test]
    fn non_finite_points_rejected() {
        let pts = Points::from_rows(1, &[vec![f64::NAN]]).unwrap();
        assert!(CorrFactor::build(&pts, &ranges1(1.0), 0.0).is_err());
    }
}
