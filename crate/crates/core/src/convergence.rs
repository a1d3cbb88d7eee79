//! Convergence of the scaled multivariate likelihood to the functional one.
//!
//! For each grid size `n` the harness builds `y_n`, its piecewise-constant
//! embedding `f_n` and the factored matrices `M_n = S_n R_n S_n`, then
//! compares
//!
//! * `(1/n) yᵀM_n⁻¹y` with `⟨f_n, O⁻¹f_n⟩`,
//! * `log det R_n` with `log d(K)`,
//! * `(1/n) log det S_n` with `∫ log D`,
//! * `(1/n)(yᵀM_n⁻¹y + log det M_n)` with the corrected likelihood at `n_pen = n`.

use alloc::format;
use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::error::{Error, Result};
use crate::fredholm::{fredholm_det_analytic, log_det_multiplication};
use crate::gaussian::NoiseStream;
use crate::grid::{midpoint, GridFunction};
use crate::likelihood::{functional_loglik, ModelParams};
use crate::linalg::Cholesky;
use crate::math;
use crate::operators::OperatorSpec;

pub const DEFAULT_SCHEDULE: [usize; 5] = [32, 64, 128, 256, 512];

/// Entrywise tolerance of the `M_n = S_n R_n S_n` check, relative to `max(1, max|M_n|)`.
pub const FACTORIZATION_TOL: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "rule", rename_all = "kebab-case"))]
pub enum DataRule {
    /// `y_i = sin(2πmᵢ) + mᵢ`.
    FixedFunction,
    /// `y_n ~ N(0, M_n)`, drawn from stream `n` of the seed.
    Simulated { seed: u64 },
}

/// The bounded test function of [`DataRule::FixedFunction`].
pub fn fixed_function(t: f64) -> f64 {
    math::sin(2.0 * PI * t) + t
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ConvergenceRow {
    pub n: usize,
    pub gap_quad: f64,
    pub gap_det: f64,
    #[cfg_attr(feature = "serde", serde(rename = "gap_d"))]
    pub gap_d: f64,
    pub gap_total: f64,
    /// `(1/n)(yᵀM_n⁻¹y + log det M_n)`.
    pub mv_scaled: f64,
    /// Corrected functional likelihood of `f_n` with `n_pen = n`.
    pub functional: f64,
    /// Signed differences (matrix minus functional) behind the first three gaps.
    pub diff_quad: f64,
    pub diff_det: f64,
    pub diff_d: f64,
}

impl ConvergenceRow {
    /// `gap_total` rebuilt from the signed parts. `log det M_n` splits as
    /// `2 log det S_n + log det R_n`, so the `D` difference enters twice and the
    /// determinant difference enters with weight `1/n`.
    pub fn gap_total_from_parts(&self) -> f64 {
        (self.diff_quad + 2.0 * self.diff_d + self.diff_det / self.n as f64).abs()
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ConvergenceReport {
    pub model: ModelParams,
    pub data_rule: DataRule,
    pub rows: Vec<ConvergenceRow>,
}

pub fn run_convergence(model: &ModelParams, schedule: &[usize], rule: DataRule) -> Result<ConvergenceReport> {
    if schedule.is_empty() {
        return Err(Error::invalid("empty n schedule"));
    }
    if schedule.windows(2).any(|w| w[1] <= w[0]) || schedule[0] == 0 {
        return Err(Error::invalid("n schedule must be positive and strictly increasing"));
    }
    let (d, k) = model.decomposition()?;
    let op = OperatorSpec::dkd(d.clone(), k);
    let log_det_k = fredholm_det_analytic(model)?.log_det.ok_or(Error::DeterminantZero)?;
    let log_d_exact = 0.5 * model.log_noise_variance()?;

    let mut rows = Vec::with_capacity(schedule.len());
    for &n in schedule {
        let row = convergence_row(model, &op, &d, n, rule, log_det_k, log_d_exact)
            .map_err(|e| Error::AtGridSize { n, source: alloc::boxed::Box::new(e) })?;
        rows.push(row);
    }
    Ok(ConvergenceReport {
        model: *model,
        data_rule: rule,
        rows,
    })
}

fn convergence_row(
    model: &ModelParams,
    op: &OperatorSpec,
    d: &crate::operators::Multiplier,
    n: usize,
    rule: DataRule,
    log_det_k: f64,
    log_d_exact: f64,
) -> Result<ConvergenceRow> {
    let mats = op.dkd_matrices(n)?;
    let residual = mats.factorization_residual();
    let scale = mats.m.max_abs().max(1.0);
    if !(residual <= FACTORIZATION_TOL * scale) {
        return Err(Error::NonFiniteLikelihood(format!(
            "M_n = S_n R_n S_n fails with residual {residual:e}"
        )));
    }
    let chol_m = Cholesky::new(&mats.m)?;
    let y: Vec<f64> = match rule {
        DataRule::FixedFunction => (0..n).map(|i| fixed_function(midpoint(i, n))).collect(),
        DataRule::Simulated { seed } => {
            let z = NoiseStream::with_stream(seed, n as u64).normals(n);
            chol_m.lower_mul(&z)
        }
    };
    let f = GridFunction::new(y.clone())?;
    let nf = n as f64;

    let mv_quad = chol_m.quad_form(&y) / nf;
    let mv_scaled = (chol_m.quad_form(&y) + chol_m.log_det()) / nf;
    let log_det_r = Cholesky::new(&mats.r)?.log_det();
    let mean_log_s = log_det_multiplication(d, n)?.mean_log_det;

    let l = functional_loglik(&f, model, n, true)?;
    let diff_quad = mv_quad - l.quad;
    let diff_det = log_det_r - log_det_k;
    let diff_d = mean_log_s - log_d_exact;
    let gaps = [diff_quad.abs(), diff_det.abs(), diff_d.abs(), (mv_scaled - l.total).abs()];
    if gaps.iter().any(|g| !g.is_finite()) {
        return Err(Error::NonFiniteLikelihood(format!("non-finite gap {gaps:?}")));
    }
    Ok(ConvergenceRow {
        n,
        gap_quad: gaps[0],
        gap_det: gaps[1],
        gap_d: gaps[2],
        gap_total: gaps[3],
        mv_scaled,
        functional: l.total,
        diff_quad,
        diff_det,
        diff_d,
    })
}
