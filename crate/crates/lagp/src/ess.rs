//! Elliptical slice sampling: rejection-free MCMC update for a vector with a
//! Gaussian prior, proposing along the ellipse through the current state and
//! a fresh prior draw and shrinking the angle bracket until acceptance.

use rand::Rng;

use crate::error::{Error, Result};

/// Hard cap on shrink iterations; the sampler accepts with probability one,
/// so hitting this indicates a broken likelihood (for example all -inf).
const MAX_SHRINK: usize = 1000;

/// One elliptical slice update of `current` under the prior
/// `N(prior_mean, Sigma)` and the log-likelihood `log_lik`.
///
/// `prior_draw` must return a fresh zero-mean draw from `N(0, Sigma)`.
/// `current_ll` is `log_lik(current)`; passing it avoids a re-evaluation.
/// Returns the accepted state and its log-likelihood.
pub fn elliptical_slice<R, D, F>(
    current: &[f64],
    prior_mean: &[f64],
    mut prior_draw: D,
    mut log_lik: F,
    current_ll: f64,
    rng: &mut R,
) -> Result<(Vec<f64>, f64)>
where
    R: Rng,
    D: FnMut(&mut R) -> Vec<f64>,
    F: FnMut(&[f64]) -> f64,
{
    let n = current.len();
    debug_assert_eq!(prior_mean.len(), n);
    let nu = prior_draw(rng);
    debug_assert_eq!(nu.len(), n);

    let log_y = current_ll + rng.gen::<f64>().ln();
    let mut theta = rng.gen::<f64>() * std::f64::consts::TAU;
    let mut lo = theta - std::f64::consts::TAU;
    let mut hi = theta;

    let centered: Vec<f64> = current
        .iter()
        .zip(prior_mean)
        .map(|(x, m)| x - m)
        .collect();

    for _ in 0..MAX_SHRINK {
        let (sin_t, cos_t) = theta.sin_cos();
        let proposal: Vec<f64> = (0..n)
            .map(|i| prior_mean[i] + centered[i] * cos_t + nu[i] * sin_t)
            .collect();
        let ll = log_lik(&proposal);
        if ll > log_y {
            return Ok((proposal, ll));
        }
        if theta < 0.0 {
            lo = theta;
        } else {
            hi = theta;
        }
        theta = rng.gen_range(lo..hi);
    }
    Err(Error::EssStalled(MAX_SHRINK))
}
