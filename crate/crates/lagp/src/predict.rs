//! Bayesian prediction for a GP with a constant-plus-linear mean and unknown
//! scale: regression coefficients carry a flat prior and the scale an
//! inverse-gamma prior, both marginalized in closed form, so the predictive
//! law at a new input is a location-scale Student-t. Also: zero-mean unit
//! scale kriging for the latent field, the joint marginal likelihood used by
//! rejuvenation moves, and leave-one-out cross-validation residuals.

use statrs::function::gamma::ln_gamma;

use crate::data::{Dataset, Points};
use crate::error::{Error, Result};
use crate::factor::{backward_packed, chol_packed, forward_packed, CorrFactor};

/// Variance floor applied before evaluating the Student-t log density.
const VAR_FLOOR: f64 = 1e-12;

/// Hyperparameters of the marginalized priors.
///
/// The process scale has an inverse-gamma prior with shape `a/2` and rate
/// `b/2`; each log inverse-range is Gaussian with the given mean and
/// variance (correlation ranges are log-normal). `latent_*` entries apply to
/// the latent field's own correlation ranges.
#[derive(Debug, Clone, PartialEq)]
pub struct PriorConfig {
    pub a: f64,
    pub b: f64,
    pub log_range_mean: f64,
    pub log_range_var: f64,
    pub latent_log_range_mean: f64,
    pub latent_log_range_var: f64,
}

impl Default for PriorConfig {
    fn default() -> Self {
        PriorConfig {
            a: 4.0,
            b: 2.0,
            log_range_mean: 0.5,
            log_range_var: 0.25,
            latent_log_range_mean: 0.5,
            latent_log_range_var: 0.25,
        }
    }
}

impl PriorConfig {
    pub fn validate(&self) -> Result<()> {
        let ok = self.a > 0.0
            && self.b > 0.0
            && self.log_range_var > 0.0
            && self.latent_log_range_var > 0.0
            && self.log_range_mean.is_finite()
            && self.latent_log_range_mean.is_finite();
        if ok {
            Ok(())
        } else {
            Err(Error::BadConfig(
                "prior requires a, b and log-range variances > 0".into(),
            ))
        }
    }
}

/// Constant-plus-linear basis `h(x) = [1, x_1, ..., x_p]`.
pub fn linear_basis(x: &[f64]) -> Vec<f64> {
    let mut h = Vec::with_capacity(x.len() + 1);
    h.push(1.0);
    h.extend_from_slice(x);
    h
}

/// Marginalized predictive law at one query point: a location-scale
/// Student-t with `dof` degrees of freedom, location `mean`, and squared
/// scale `var`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StudentTPredictive {
    pub dof: f64,
    pub mean: f64,
    pub var: f64,
}

/// Cached per-dataset quantities for repeated predictions against one
/// correlation factor: basis image under `L^{-1}`, generalized least squares
/// coefficients, residual quadratic form, and the Gram factor of the basis.
#[derive(Debug, Clone)]
pub struct PredictorState {
    t: usize,
    q: usize,
    a: f64,
    b: f64,
    nu_resid: f64,
    dof: f64,
    coeff: f64,
    beta: Vec<f64>,
    alpha: Vec<f64>,
    g: Vec<f64>, // L^{-1} H, column-major (q columns of length t)
    m_chol: Vec<f64>,
    log_det_m: f64,
    log_det_k: f64,
    phi_quad: f64,
}

impl PredictorState {
    /// Builds the cache from the correlation factor of the (possibly
    /// augmented) design, the original inputs (for the basis), and outputs.
    pub fn new(
        factor: &CorrFactor,
        inputs: &Points,
        outputs: &[f64],
        prior: &PriorConfig,
    ) -> Result<Self> {
        prior.validate()?;
        let t = factor.order();
        if inputs.len() != t || outputs.len() != t {
            return Err(Error::LengthMismatch {
                left: inputs.len(),
                right: t,
            });
        }
        let p = inputs.dim();
        let q = p + 1;
        if t < q + 1 {
            return Err(Error::InsufficientData { have: t, need: q + 1 });
        }

        // G = L^{-1} H, one forward solve per basis column.
        let mut g = vec![0.0; q * t];
        for col in 0..q {
            let dst = &mut g[col * t..(col + 1) * t];
            for (i, slot) in dst.iter_mut().enumerate() {
                *slot = if col == 0 { 1.0 } else { inputs.point(i)[col - 1] };
            }
            factor.forward(dst);
        }
        let mut w = outputs.to_vec();
        factor.forward(&mut w);

        // Gram matrix M = G^T G (packed lower triangle) and its factor.
        let mut m = vec![0.0; q * (q + 1) / 2];
        for i in 0..q {
            for j in 0..=i {
                let gi = &g[i * t..(i + 1) * t];
                let gj = &g[j * t..(j + 1) * t];
                m[i * (i + 1) / 2 + j] = gi.iter().zip(gj).map(|(x, y)| x * y).sum();
            }
        }
        chol_packed(&mut m, q).map_err(|_| Error::SingularBasis)?;
        let log_det_m: f64 = (0..q)
            .map(|i| 2.0 * m[i * (i + 1) / 2 + i].ln())
            .sum();

        // beta = M^{-1} G^T w  (generalized least squares).
        let mut beta = vec![0.0; q];
        for col in 0..q {
            let gcol = &g[col * t..(col + 1) * t];
            beta[col] = gcol.iter().zip(&w).map(|(x, y)| x * y).sum();
        }
        forward_packed(&m, q, &mut beta);
        backward_packed(&m, q, &mut beta);

        // Whitened residual and its squared norm.
        let mut resid = w;
        for col in 0..q {
            let gcol = &g[col * t..(col + 1) * t];
            for i in 0..t {
                resid[i] -= gcol[i] * beta[col];
            }
        }
        let phi_quad: f64 = resid.iter().map(|x| x * x).sum();

        let mut alpha = resid;
        factor.backward(&mut alpha);

        let nu_resid = (t - q) as f64;
        let dof = prior.a + nu_resid;
        let coeff = (prior.b + phi_quad) / dof;

        Ok(PredictorState {
            t,
            q,
            a: prior.a,
            b: prior.b,
            nu_resid,
            dof,
            coeff,
            beta,
            alpha,
            g,
            m_chol: m,
            log_det_m,
            log_det_k: factor.log_det(),
            phi_quad,
        })
    }

    /// Degrees of freedom of the predictive law.
    pub fn dof(&self) -> f64 {
        self.dof
    }

    /// Residual degrees of freedom `t - p - 1` (data size minus basis size).
    pub fn nu_resid(&self) -> f64 {
        self.nu_resid
    }

    /// Generalized least squares coefficients of the mean field.
    pub fn beta(&self) -> &[f64] {
        &self.beta
    }

    /// Residual quadratic form `F^T K^{-1} F - beta^T M beta`.
    pub fn phi_quad(&self) -> f64 {
        self.phi_quad
    }

    /// Predictive law at a query with correlations `cross` to the design,
    /// self-correlation `self_corr`, and basis vector `h_query`.
    ///
    /// The squared scale combines the kriging bracket with the propagated
    /// uncertainty of the marginalized regression coefficients; it is floored
    /// at zero if rounding drives it negative.
    pub fn predict(
        &self,
        factor: &CorrFactor,
        cross: &[f64],
        self_corr: f64,
        h_query: &[f64],
    ) -> Result<StudentTPredictive> {
        if cross.len() != self.t {
            return Err(Error::DimensionMismatch {
                expected: self.t,
                got: cross.len(),
            });
        }
        if h_query.len() != self.q {
            return Err(Error::DimensionMismatch {
                expected: self.q,
                got: h_query.len(),
            });
        }
        let mut v = cross.to_vec();
        factor.forward(&mut v);

        let mean: f64 = h_query.iter().zip(&self.beta).map(|(x, y)| x * y).sum::<f64>()
            + cross.iter().zip(&self.alpha).map(|(x, y)| x * y).sum::<f64>();

        let bracket = self_corr - v.iter().map(|x| x * x).sum::<f64>();

        // d = h_query - H^T K^{-1} k; its M^{-1}-quadratic form is the
        // coefficient-uncertainty contribution.
        let mut d = vec![0.0; self.q];
        for col in 0..self.q {
            let gcol = &self.g[col * self.t..(col + 1) * self.t];
            d[col] = h_query[col] - gcol.iter().zip(&v).map(|(x, y)| x * y).sum::<f64>();
        }
        forward_packed(&self.m_chol, self.q, &mut d);
        let d_quad: f64 = d.iter().map(|x| x * x).sum();

        let var = (self.coeff * (bracket + d_quad)).max(0.0);
        Ok(StudentTPredictive {
            dof: self.dof,
            mean,
            var,
        })
    }

    /// Log marginal likelihood of the outputs with coefficients and scale
    /// integrated out, including all normalizing constants.
    pub fn log_marginal(&self) -> f64 {
        let half_nu = 0.5 * self.nu_resid;
        let half_an = 0.5 * (self.a + self.nu_resid);
        -half_nu * (2.0 * std::f64::consts::PI).ln() - 0.5 * self.log_det_k
            - 0.5 * self.log_det_m
            - half_an * (0.5 * (self.b + self.phi_quad)).ln()
            + ln_gamma(half_an)
            - ln_gamma(0.5 * self.a)
            + 0.5 * self.a * (0.5 * self.b).ln()
    }
}

/// One-shot marginalized prediction; see [`PredictorState::predict`].
pub fn marginal_predictive(
    inputs: &Points,
    outputs: &[f64],
    factor: &CorrFactor,
    prior: &PriorConfig,
    cross: &[f64],
    self_corr: f64,
    h_query: &[f64],
) -> Result<StudentTPredictive> {
    PredictorState::new(factor, inputs, outputs, prior)?.predict(factor, cross, self_corr, h_query)
}

/// Log marginal likelihood of a dataset under one correlation factor.
pub fn log_marginal_likelihood(
    factor: &CorrFactor,
    inputs: &Points,
    outputs: &[f64],
    prior: &PriorConfig,
) -> Result<f64> {
    Ok(PredictorState::new(factor, inputs, outputs, prior)?.log_marginal())
}

/// Log density of the location-scale Student-t predictive at `y`.
///
/// The squared scale is floored at `1e-12` so interpolating predictions keep
/// a usable (if extreme) density.
pub fn student_t_log_density(pred: &StudentTPredictive, y: f64) -> f64 {
    let s2 = pred.var.max(VAR_FLOOR);
    let nu = pred.dof;
    let z2 = (y - pred.mean) * (y - pred.mean) / s2;
    ln_gamma(0.5 * (nu + 1.0))
        - ln_gamma(0.5 * nu)
        - 0.5 * (nu * std::f64::consts::PI).ln()
        - 0.5 * s2.ln()
        - 0.5 * (nu + 1.0) * (1.0 + z2 / nu).ln()
}

/// Zero-mean, unit-scale kriging of the latent field: returns the
/// conditional mean and variance at a query with correlations `cross` to the
/// design and self-correlation `self_corr`. The variance is floored at zero.
pub fn latent_krige(
    latent_values: &[f64],
    factor: &CorrFactor,
    cross: &[f64],
    self_corr: f64,
) -> Result<(f64, f64)> {
    if latent_values.len() != factor.order() || cross.len() != factor.order() {
        return Err(Error::DimensionMismatch {
            expected: factor.order(),
            got: cross.len(),
        });
    }
    let mut v = cross.to_vec();
    factor.forward(&mut v);
    let mut w = latent_values.to_vec();
    factor.forward(&mut w);
    let mean = v.iter().zip(&w).map(|(x, y)| x * y).sum();
    let var = (self_corr - v.iter().map(|x| x * x).sum::<f64>()).max(0.0);
    Ok((mean, var))
}

/// Kriging weights reused across many queries against the same factor.
#[derive(Debug, Clone)]
pub struct KrigeCache {
    whitened: Vec<f64>, // L^{-1} g
}

impl KrigeCache {
    pub fn new(latent_values: &[f64], factor: &CorrFactor) -> Self {
        let mut w = latent_values.to_vec();
        factor.forward(&mut w);
        KrigeCache { whitened: w }
    }

    /// Same contract as [`latent_krige`] given `v = L^{-1} cross`.
    pub fn predict_whitened(&self, v: &[f64], self_corr: f64) -> (f64, f64) {
        let mean = v.iter().zip(&self.whitened).map(|(x, y)| x * y).sum();
        let var = (self_corr - v.iter().map(|x| x * x).sum::<f64>()).max(0.0);
        (mean, var)
    }
}

/// Leave-one-out cross-validation standardized residuals under fixed
/// hyperparameters: for each design point, the predictive is refitted on the
/// remaining rows (latent values, when present, travel with their rows) and
/// the held-out output is standardized by the fold's predictive scale.
pub fn loo_cv_residuals(
    data: &Dataset,
    ranges: &crate::kernel::Ranges,
    latent_values: Option<&[f64]>,
    prior: &PriorConfig,
    nugget: f64,
) -> Result<Vec<f64>> {
    let t = data.len();
    let p = data.dim();
    if t < p + 3 {
        return Err(Error::InsufficientData { have: t, need: p + 3 });
    }
    if let Some(z) = latent_values {
        if z.len() != t {
            return Err(Error::LengthMismatch { left: z.len(), right: t });
        }
        if ranges.dim() != p + 1 {
            return Err(Error::DimensionMismatch { expected: p + 1, got: ranges.dim() });
        }
    } else if ranges.dim() != p {
        return Err(Error::DimensionMismatch { expected: p, got: ranges.dim() });
    }

    let corr_dim = if latent_values.is_some() { p + 1 } else { p };
    let mut residuals = Vec::with_capacity(t);
    for fold in 0..t {
        let fold_result = (|| -> Result<f64> {
            let mut corr_pts = Points::with_capacity(corr_dim, t - 1);
            let mut basis_pts = Points::with_capacity(p, t - 1);
            let mut outputs = Vec::with_capacity(t - 1);
            let mut row = Vec::with_capacity(corr_dim);
            for j in 0..t {
                if j == fold {
                    continue;
                }
                row.clear();
                row.extend_from_slice(data.point(j));
                if let Some(z) = latent_values {
                    row.push(z[j]);
                }
                corr_pts.push(&row)?;
                basis_pts.push(data.point(j))?;
                outputs.push(data.outputs()[j]);
            }
            let factor = CorrFactor::build(&corr_pts, ranges, nugget)?;
            let state = PredictorState::new(&factor, &basis_pts, &outputs, prior)?;

            row.clear();
            row.extend_from_slice(data.point(fold));
            if let Some(z) = latent_values {
                row.push(z[fold]);
            }
            let cross = crate::kernel::cross_corr(&corr_pts, &row, ranges)?;
            let pred = state.predict(
                &factor,
                &cross,
                1.0 + nugget,
                &linear_basis(data.point(fold)),
            )?;
            let sd = pred.var.max(VAR_FLOOR).sqrt();
            Ok((data.outputs()[fold] - pred.mean) / sd)
        })();
        match fold_result {
            Ok(r) => residuals.push(r),
            Err(e) => {
                return Err(Error::LooFold {
                    fold,
                    source: Box::new(e),
                })
            }
        }
    }
    Ok(residuals)
}
