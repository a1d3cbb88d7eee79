//! Maximum-likelihood fits for the mixed and Brownian-motion-with-noise
//! families.
//!
//! Both fits profile the noise level `α` in closed form and search the
//! remaining shape parameter.

use alloc::format;

use crate::error::{Error, Result};
use crate::grid::GridFunction;
use crate::likelihood::{
    functional_loglik, mv_loglik_mixed_level, profile_delta_functional, profile_delta_mv,
    quad_form_bm, quad_form_mixed, sums, ModelParams,
};
use crate::math;

/// Lower and upper bound of the `λ` search for the Brownian model.
pub const LAMBDA_BOUNDS: (f64, f64) = (1e-3, 1e3);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Route {
    Functional,
    #[cfg_attr(feature = "serde", serde(rename = "mv", alias = "multivariate"))]
    Multivariate,
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct FitResult {
    /// For the multivariate mixed route `delta` is the level variance ratio
    /// of `α(I + δJ)` with `J` the all-ones matrix.
    pub params: ModelParams,
    pub loglik: f64,
    pub route: Route,
    pub iterations: usize,
    pub converged: bool,
    /// Set when the shape parameter ended on a search or parameter bound.
    pub at_bound: bool,
}

/// The objective minimized by [`fit_mixed`] on the given route.
pub fn mixed_objective(data: &GridFunction, route: Route, alpha: f64, delta: f64) -> f64 {
    match route {
        Route::Functional => quad_form_mixed(data, alpha, delta) + math::ln(alpha) + math::ln_1p(delta),
        Route::Multivariate => mv_loglik_mixed_level(data.values(), alpha, delta),
    }
}

/// Alternating profile fit of `α(I + δ𝟏)`.
///
/// On the functional route `data` is the embedded function. On the
/// multivariate route its values are the observation vector `y`. Each sweep
/// sets `δ` to its profile at the current `α` and then `α` to its exact
/// minimizer at that `δ`; iteration stops when neither changes by more than
/// `tol` (relative to `max(1, |·|)`).
pub fn fit_mixed(data: &GridFunction, route: Route, tol: f64, max_iter: usize) -> Result<FitResult> {
    if data.values().iter().all(|&v| v == 0.0) {
        return Err(Error::NoData);
    }
    if !(tol > 0.0) {
        return Err(Error::invalid("tol must be positive"));
    }
    let y = data.values();
    let n = y.len() as f64;
    let (sum, sum_sq) = sums(y);

    let alpha_given = |delta: f64| match route {
        Route::Functional => quad_form_mixed(data, 1.0, delta),
        Route::Multivariate => (sum_sq - delta / (1.0 + n * delta) * sum * sum) / n,
    };
    let delta_given = |alpha: f64| match route {
        Route::Functional => profile_delta_functional(data, alpha),
        Route::Multivariate => profile_delta_mv(y, alpha),
    };

    let mut delta = 0.0;
    let mut alpha = alpha_given(delta);
    let mut objective = mixed_objective(data, route, alpha, delta);
    let mut converged = false;
    let mut iterations = 0;
    while iterations < max_iter {
        iterations += 1;
        let next_delta = delta_given(alpha);
        let next_alpha = alpha_given(next_delta);
        if !(next_alpha > 0.0) || !next_alpha.is_finite() {
            return Err(Error::NonFiniteLikelihood(format!(
                "alpha update gave {next_alpha} at delta = {next_delta}"
            )));
        }
        let next_objective = mixed_objective(data, route, next_alpha, next_delta);
        if next_objective > objective + 1e-12 * (1.0 + objective.abs()) {
            // coordinate-wise exact minimization cannot ascend; stop on rounding noise
            break;
        }
        let step = rel_change(alpha, next_alpha).max(rel_change(delta, next_delta));
        alpha = next_alpha;
        delta = next_delta;
        objective = next_objective;
        if step < tol {
            converged = true;
            break;
        }
    }
    if !objective.is_finite() {
        return Err(Error::NonFiniteLikelihood(format!("alpha = {alpha}, delta = {delta}")));
    }
    Ok(FitResult {
        params: ModelParams::Mixed { alpha, delta },
        loglik: objective,
        route,
        iterations,
        converged,
        at_bound: delta == 0.0,
    })
}

fn rel_change(old: f64, new: f64) -> f64 {
    (new - old).abs() / old.abs().max(1.0)
}

/// The corrected likelihood of the Brownian model with `α` profiled out:
/// `1 + log q(λ) + log cosh(λ) / n_pen` where `q(λ) = ⟨f, (I + λ²𝐁)⁻¹f⟩`
/// and `α̂² = q(λ)`.
pub fn bm_profile_objective(f: &GridFunction, n_pen: usize, lambda: f64) -> Result<f64> {
    let q = quad_form_bm(f, 1.0, lambda);
    let value = 1.0 + math::ln(q) + math::ln_cosh(lambda) / n_pen as f64;
    if value.is_finite() {
        Ok(value)
    } else {
        Err(Error::NonFiniteLikelihood(format!("lambda = {lambda}, quad = {q}")))
    }
}

const COARSE_POINTS: usize = 61;
const GOLDEN: f64 = 0.618_033_988_749_894_9;

/// Fits `α²(I + λ²𝐁)` by minimizing the corrected functional likelihood.
///
/// A coarse scan over `log λ` brackets the minimum and golden-section search
/// refines it to `tol` in `log λ`.
pub fn fit_bm_noise(f: &GridFunction, n_pen: usize, tol: f64) -> Result<FitResult> {
    if f.values().iter().all(|&v| v == 0.0) {
        return Err(Error::NoData);
    }
    if n_pen == 0 {
        return Err(Error::invalid("n_pen must be at least 1"));
    }
    if !(tol > 0.0) {
        return Err(Error::invalid("tol must be positive"));
    }
    let (lo, hi) = (math::ln(LAMBDA_BOUNDS.0), math::ln(LAMBDA_BOUNDS.1));
    let obj = |x: f64| bm_profile_objective(f, n_pen, math::exp(x));

    let step = (hi - lo) / (COARSE_POINTS - 1) as f64;
    let mut best = (0, f64::INFINITY);
    for i in 0..COARSE_POINTS {
        let v = obj(lo + i as f64 * step)?;
        if v < best.1 {
            best = (i, v);
        }
    }
    let mut iterations = COARSE_POINTS;
    let mut a = lo + best.0.saturating_sub(1) as f64 * step;
    let mut b = lo + (best.0 + 1).min(COARSE_POINTS - 1) as f64 * step;
    let mut c = b - GOLDEN * (b - a);
    let mut d = a + GOLDEN * (b - a);
    let mut fc = obj(c)?;
    let mut fd = obj(d)?;
    iterations += 2;
    while b - a > tol {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - GOLDEN * (b - a);
            fc = obj(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + GOLDEN * (b - a);
            fd = obj(d)?;
        }
        iterations += 1;
    }
    let (mut x, mut value) = if fc <= fd { (c, fc) } else { (d, fd) };
    // the bracket never contains the endpoints themselves
    for edge in [lo, hi] {
        if (edge - x).abs() <= step {
            let v = obj(edge)?;
            if v <= value {
                x = edge;
                value = v;
            }
        }
    }
    let lambda = math::exp(x);
    let alpha = math::sqrt(quad_form_bm(f, 1.0, lambda));
    let params = ModelParams::bm_noise(alpha, lambda)?;
    let loglik = functional_loglik(f, &params, n_pen, true)?.total;
    Ok(FitResult {
        params,
        loglik,
        route: Route::Functional,
        iterations,
        converged: true,
        at_bound: (x - lo).abs() <= tol || (hi - x).abs() <= tol,
    })
}
