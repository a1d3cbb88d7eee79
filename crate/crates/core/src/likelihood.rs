//! Multivariate and functional log-likelihoods.
//!
//! All log-likelihoods here are *twice the negative* log-likelihood up to the
//! `2π` constant, i.e. `yᵀM⁻¹y + log det M` in the multivariate case, and
//! smaller is better.
//!
//! The functional form for `O = D(I + K)D` is
//!
//! ```text
//! l(f) = ⟨f, O⁻¹f⟩ + ∫₀¹ log D(t)² dt + c·log d(K)
//! ```
//!
//! with `c = 1` (naive) or `c = 1/n_pen` (corrected). The middle term is the
//! log noise variance: `log α` for the mixed model `α(I + δ𝟏)` and `2 log α`
//! for Brownian motion with noise `α²(I + λ²𝐁)`.

use alloc::format;

use crate::error::{Error, Result};
use crate::fredholm::fredholm_det_analytic;
use crate::grid::{midpoint, GridFunction};
use crate::linalg::{Cholesky, Matrix};
use crate::math;
use crate::operators::{Kernel, Multiplier, OperatorSpec};

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "family", rename_all = "kebab-case"))]
pub enum ModelParams {
    /// `α(I + δ𝟏)`: noise variance `α`, shared level variance `αδ`.
    Mixed { alpha: f64, delta: f64 },
    /// `α²(I + λ²𝐁)` with `𝐁` the `min(s,t)` operator.
    BmNoise { alpha: f64, lambda: f64 },
    /// Triangular operator with kernel `α e^{−λ(t−s)} 1_{s≤t}`.
    Ou { alpha: f64, lambda: f64 },
}

fn check_positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(format!("{name} must be positive and finite, got {v}")))
    }
}

impl ModelParams {
    pub fn mixed(alpha: f64, delta: f64) -> Result<Self> {
        check_positive("alpha", alpha)?;
        if !(delta >= 0.0) || !delta.is_finite() {
            return Err(Error::invalid(format!("delta must be >= 0, got {delta}")));
        }
        Ok(ModelParams::Mixed { alpha, delta })
    }

    pub fn bm_noise(alpha: f64, lambda: f64) -> Result<Self> {
        check_positive("alpha", alpha)?;
        check_positive("lambda", lambda)?;
        Ok(ModelParams::BmNoise { alpha, lambda })
    }

    pub fn ou(alpha: f64, lambda: f64) -> Result<Self> {
        check_positive("alpha", alpha)?;
        check_positive("lambda", lambda)?;
        Ok(ModelParams::Ou { alpha, lambda })
    }

    pub fn family(&self) -> &'static str {
        match self {
            ModelParams::Mixed { .. } => "mixed",
            ModelParams::BmNoise { .. } => "bm-noise",
            ModelParams::Ou { .. } => "ou",
        }
    }

    pub fn alpha(&self) -> f64 {
        match *self {
            ModelParams::Mixed { alpha, .. }
            | ModelParams::BmNoise { alpha, .. }
            | ModelParams::Ou { alpha, .. } => alpha,
        }
    }

    /// The `(D, K)` pair of the decomposition `O = D(I + K)D`.
    pub fn decomposition(&self) -> Result<(Multiplier, Kernel)> {
        match *self {
            ModelParams::Mixed { alpha, delta } => {
                Ok((Multiplier::Constant(math::sqrt(alpha)), Kernel::Constant(delta)))
            }
            ModelParams::BmNoise { alpha, lambda } => {
                Ok((Multiplier::Constant(alpha), Kernel::Min.scaled(lambda * lambda)))
            }
            ModelParams::Ou { .. } => Err(Error::LikelihoodUnspecified("ou")),
        }
    }

    /// The covariance operator for `mixed` / `bm-noise`, or the process
    /// operator itself for `ou`.
    pub fn operator(&self) -> Result<OperatorSpec> {
        match *self {
            ModelParams::Ou { alpha, lambda } => Ok(OperatorSpec::Triangular(Kernel::ou(alpha, lambda))),
            _ => {
                let (d, k) = self.decomposition()?;
                Ok(OperatorSpec::dkd(d, k))
            }
        }
    }

    /// `∫₀¹ log D(t)² dt`, the log noise variance.
    pub fn log_noise_variance(&self) -> Result<f64> {
        match *self {
            ModelParams::Mixed { alpha, .. } => Ok(math::ln(alpha)),
            ModelParams::BmNoise { alpha, .. } => Ok(2.0 * math::ln(alpha)),
            ModelParams::Ou { .. } => Err(Error::LikelihoodUnspecified("ou")),
        }
    }
}

/// Components of a functional log-likelihood; `total = quad + log_d_term + det_term`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct LoglikValue {
    pub total: f64,
    pub quad: f64,
    pub log_d_term: f64,
    pub det_term: f64,
    pub corrected: bool,
    pub n_used: usize,
}

/// `yᵀM⁻¹y + log det M` from one Cholesky factorization.
pub fn mv_loglik(y: &[f64], m: &Matrix) -> Result<f64> {
    if m.rows() != y.len() || !m.is_square() {
        return Err(Error::invalid("dimension mismatch between y and M"));
    }
    let chol = Cholesky::new(m)?;
    Ok(chol.quad_form(y) + chol.log_det())
}

/// Multivariate likelihood of `y ~ N(0, α(I + δJ))` in closed form, where
/// `J` is the all-ones matrix: `α⁻¹(Σy² − δ/(1+nδ)(Σy)²) + n log α + log(1 + nδ)`.
pub fn mv_loglik_mixed_level(y: &[f64], alpha: f64, delta: f64) -> f64 {
    let n = y.len() as f64;
    let (sum, sum_sq) = sums(y);
    (sum_sq - delta / (1.0 + n * delta) * sum * sum) / alpha + n * math::ln(alpha) + math::ln_1p(n * delta)
}

pub(crate) fn sums(y: &[f64]) -> (f64, f64) {
    y.iter().fold((0.0, 0.0), |(s, s2), v| (s + v, s2 + v * v))
}

/// `⟨f, (α(I + δ𝟏))⁻¹ f⟩ = α⁻¹(‖f‖² − δ/(δ+1)(∫f)²)`.
pub fn quad_form_mixed(f: &GridFunction, alpha: f64, delta: f64) -> f64 {
    let m = f.integral();
    (f.norm_sq() - delta / (delta + 1.0) * m * m) / alpha
}

/// Solves `g(t) = f(t) − λ ∫₀ᵗ tanh(λs) g(s) ds` on the midpoint grid in one
/// forward sweep. Cells before `i` enter with full weight and cell `i` itself
/// with half weight.
pub fn volterra_tanh(f: &GridFunction, lambda: f64) -> GridFunction {
    let n = f.n();
    let nf = n as f64;
    let mut g = alloc::vec::Vec::with_capacity(n);
    let mut running = 0.0;
    for (i, &fi) in f.values().iter().enumerate() {
        let h = math::tanh(lambda * midpoint(i, n));
        let gi = (fi - lambda * running / nf) / (1.0 + lambda * h / (2.0 * nf));
        running += h * gi;
        g.push(gi);
    }
    GridFunction::from_values_unchecked(g)
}

/// `⟨f, (α²(I + λ²𝐁))⁻¹ f⟩ = α⁻² ∫ g²` with `g` from [`volterra_tanh`]. O(n).
pub fn quad_form_bm(f: &GridFunction, alpha: f64, lambda: f64) -> f64 {
    volterra_tanh(f, lambda).norm_sq() / (alpha * alpha)
}

/// The functional log-likelihood of `f` under `model`.
pub fn functional_loglik(
    f: &GridFunction,
    model: &ModelParams,
    n_pen: usize,
    corrected: bool,
) -> Result<LoglikValue> {
    if corrected && n_pen == 0 {
        return Err(Error::invalid("n_pen must be at least 1 for the corrected likelihood"));
    }
    let quad = match *model {
        ModelParams::Mixed { alpha, delta } => quad_form_mixed(f, alpha, delta),
        ModelParams::BmNoise { alpha, lambda } => quad_form_bm(f, alpha, lambda),
        ModelParams::Ou { .. } => return Err(Error::LikelihoodUnspecified("ou")),
    };
    let log_d_term = model.log_noise_variance()?;
    let log_det = fredholm_det_analytic(model)?
        .log_det
        .ok_or(Error::DeterminantZero)?;
    let c = if corrected { 1.0 / n_pen as f64 } else { 1.0 };
    let det_term = c * log_det;
    Ok(LoglikValue {
        total: quad + log_d_term + det_term,
        quad,
        log_d_term,
        det_term,
        corrected,
        n_used: if corrected { n_pen } else { 1 },
    })
}

/// Unclamped stationary point in `δ` of the naive mixed likelihood:
/// `α⁻¹(∫f)² − 1`.
pub fn profile_delta_functional_raw(f: &GridFunction, alpha: f64) -> f64 {
    let m = f.integral();
    m * m / alpha - 1.0
}

/// [`profile_delta_functional_raw`] clamped to `δ ≥ 0`.
pub fn profile_delta_functional(f: &GridFunction, alpha: f64) -> f64 {
    profile_delta_functional_raw(f, alpha).max(0.0)
}

/// Unclamped multivariate profile `α⁻¹n⁻²(Σy)² − 1/n`.
pub fn profile_delta_mv_raw(y: &[f64], alpha: f64) -> f64 {
    let n = y.len() as f64;
    let s: f64 = y.iter().sum();
    s * s / (alpha * n * n) - 1.0 / n
}

/// [`profile_delta_mv_raw`] clamped to `δ ≥ 0`.
pub fn profile_delta_mv(y: &[f64], alpha: f64) -> f64 {
    profile_delta_mv_raw(y, alpha).max(0.0)
}
