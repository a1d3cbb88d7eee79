//! Fredholm determinants `d(K)` of integral operators on `L²[0,1]`.
//!
//! Three routes:
//!
//! * [`fredholm_det_series`] sums the defining series
//!   `Σ_k (1/k!) ∫…∫ det[K(x_p, x_q)] dx` with midpoint product quadrature.
//!   It is exponential in `k_max` and kept as an oracle.
//! * [`fredholm_det_matrix`] takes `log det(I + Q_n)` with
//!   `Q_n = (1/n) K(mᵢ, mⱼ)`; this is the production route.
//! * [`fredholm_det_analytic`] gives the closed forms of the two model
//!   families.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::grid::midpoint;
use crate::likelihood::ModelParams;
use crate::linalg::{lu_log_det, small_det, Matrix};
use crate::math;
use crate::operators::{Kernel, Multiplier};

pub const SERIES_MAX_ORDER: usize = 6;
pub const SERIES_MAX_GRID: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum DetRoute {
    Series,
    Matrix,
    Analytic,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DetResult {
    /// `d(K)` itself. For the series route this can be `≤ 0` at truncation.
    pub det: f64,
    /// `log d(K)` when `d(K) > 0`.
    pub log_det: Option<f64>,
    pub route: DetRoute,
    /// Grid size (series and matrix routes); zero for closed forms.
    pub n: usize,
    /// Highest series order summed (series route only).
    pub k_max: Option<usize>,
    /// Individual series terms `d_0, …, d_{k_max}` (series route only).
    pub terms: Vec<f64>,
}

/// Truncated defining series on the `grid_n`-point midpoint product grid.
///
/// Integrand rows for repeated nodes coincide, so only strictly increasing
/// index tuples contribute and `(1/k!) Σ_{i₁..i_k}` collapses to a sum of
/// principal minors of `Q = K(mᵢ,mⱼ)/grid_n` over `i₁ < … < i_k`.
pub fn fredholm_det_series(k: &Kernel, grid_n: usize, k_max: usize) -> Result<DetResult> {
    if k_max > SERIES_MAX_ORDER {
        return Err(Error::invalid("series order is capped at 6"));
    }
    if grid_n == 0 || grid_n > SERIES_MAX_GRID {
        return Err(Error::invalid("series grid must have between 1 and 64 points"));
    }
    let nf = grid_n as f64;
    let q = Matrix::from_fn(grid_n, grid_n, |i, j| k.eval(midpoint(i, grid_n), midpoint(j, grid_n)) / nf);
    let mut terms = vec![1.0];
    for order in 1..=k_max.min(grid_n) {
        terms.push(principal_minor_sum(&q, order));
    }
    terms.resize(k_max + 1, 0.0);
    let det: f64 = terms.iter().sum();
    Ok(DetResult {
        det,
        log_det: (det > 0.0).then(|| math::ln(det)),
        route: DetRoute::Series,
        n: grid_n,
        k_max: Some(k_max),
        terms,
    })
}

/// `Σ_{i₁<…<i_k} det Q[i, i]`, enumerated in lexicographic order.
fn principal_minor_sum(q: &Matrix, k: usize) -> f64 {
    let n = q.rows();
    let mut idx: Vec<usize> = (0..k).collect();
    let mut buf = vec![0.0; k * k];
    let mut total = 0.0;
    loop {
        for (p, &ip) in idx.iter().enumerate() {
            for (r, &iq) in idx.iter().enumerate() {
                buf[p * k + r] = q[(ip, iq)];
            }
        }
        total += small_det(&mut buf, k);
        // next combination
        let mut pos = k;
        loop {
            if pos == 0 {
                return total;
            }
            pos -= 1;
            if idx[pos] < n - k + pos {
                break;
            }
        }
        idx[pos] += 1;
        for p in pos + 1..k {
            idx[p] = idx[p - 1] + 1;
        }
    }
}

/// `log det(I + Q_n)` by pivoted LU. Errors when `I + Q_n` is singular or has
/// a nonpositive determinant.
pub fn fredholm_det_matrix(k: &Kernel, n: usize) -> Result<DetResult> {
    if n == 0 {
        return Err(Error::invalid("n must be positive"));
    }
    let nf = n as f64;
    let r = Matrix::from_fn(n, n, |i, j| {
        k.eval(midpoint(i, n), midpoint(j, n)) / nf + if i == j { 1.0 } else { 0.0 }
    });
    let ld = lu_log_det(&r).ok_or(Error::DeterminantZero)?;
    let det = ld.value();
    Ok(DetResult {
        det,
        log_det: (ld.sign > 0.0).then_some(ld.log_abs),
        route: DetRoute::Matrix,
        n,
        k_max: None,
        terms: Vec::new(),
    })
}

/// Closed forms: `1 + δ` for the mixed model, `cosh λ` for Brownian motion
/// with noise.
pub fn fredholm_det_analytic(model: &ModelParams) -> Result<DetResult> {
    let (det, log_det) = match *model {
        ModelParams::Mixed { delta, .. } => (1.0 + delta, math::ln_1p(delta)),
        ModelParams::BmNoise { lambda, .. } => (math::cosh(lambda), math::ln_cosh(lambda)),
        ModelParams::Ou { .. } => return Err(Error::NoClosedForm("ou")),
    };
    Ok(DetResult {
        det,
        log_det: Some(log_det),
        route: DetRoute::Analytic,
        n: 0,
        k_max: None,
        terms: Vec::new(),
    })
}

/// `(1/n) log det S_n` and the midpoint estimate of `∫₀¹ log D(t) dt`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogDetMultiplication {
    pub mean_log_det: f64,
    pub integral_estimate: f64,
}

pub fn log_det_multiplication(d: &Multiplier, n: usize) -> Result<LogDetMultiplication> {
    if n == 0 {
        return Err(Error::invalid("n must be positive"));
    }
    let diag: Vec<f64> = (0..n).map(|i| d.eval(midpoint(i, n))).collect();
    if let Some(i) = diag.iter().position(|v| !(*v > 0.0) || !v.is_finite()) {
        return Err(Error::NotBoundedBelow {
            t: midpoint(i, n),
            value: diag[i],
        });
    }
    let s = Matrix::from_diagonal(&diag);
    let mean_log_det = s.diagonal().iter().map(|&v| math::ln(v)).sum::<f64>() / n as f64;
    let log_d = crate::grid::GridFunction::from_fn(n, |t| math::ln(d.eval(t)))?;
    Ok(LogDetMultiplication {
        mean_log_det,
        integral_estimate: log_d.integral(),
    })
}
