use alloc::vec::Vec;
use core::f64::consts::{PI, SQRT_2};

use crate::error::{Error, Result};
use crate::grid::{midpoint, GridFunction};
use crate::math;

/// An operator diagonal in the sine basis `φ_k(t) = √2 sin(kπt)`, `k = 1..=m`,
/// acting as the identity on the orthogonal complement of that span.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralOperator {
    eigenvalues: Vec<f64>,
}

/// Square root of the Brownian-bridge-plus-noise covariance `I + K_bb`,
/// truncated to the first `m` sine modes. Eigenvalues are `√(1 + k⁻²π⁻²)`.
pub fn bb_noise_operator(m: usize) -> Result<SpectralOperator> {
    if m == 0 {
        return Err(Error::invalid("truncation level must be at least 1"));
    }
    let eigenvalues = (1..=m)
        .map(|k| math::sqrt(1.0 + 1.0 / ((k * k) as f64 * PI * PI)))
        .collect();
    SpectralOperator::new(eigenvalues)
}

impl SpectralOperator {
    pub fn new(eigenvalues: Vec<f64>) -> Result<Self> {
        if eigenvalues.is_empty() {
            return Err(Error::invalid("spectral operator needs at least one mode"));
        }
        if let Some(i) = eigenvalues.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(i));
        }
        Ok(SpectralOperator { eigenvalues })
    }

    pub fn truncation(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// Eigenvalue of mode `k` (one-based).
    pub fn eigenvalue(&self, k: usize) -> f64 {
        self.eigenvalues[k - 1]
    }

    pub fn eigenfunction(k: usize, t: f64) -> f64 {
        SQRT_2 * math::sin(k as f64 * PI * t)
    }

    /// The operator with squared eigenvalues.
    pub fn squared(&self) -> SpectralOperator {
        SpectralOperator {
            eigenvalues: self.eigenvalues.iter().map(|v| v * v).collect(),
        }
    }

    /// Kernel of `R² − I` on the truncated span:
    /// `Σ_k (λ_k² − 1) φ_k(s) φ_k(t)`.
    pub fn square_minus_identity_kernel(&self, s: f64, t: f64) -> f64 {
        self.eigenvalues
            .iter()
            .enumerate()
            .map(|(i, v)| {
                let k = i + 1;
                (v * v - 1.0) * Self::eigenfunction(k, s) * Self::eigenfunction(k, t)
            })
            .sum()
    }

    /// `R f` on the midpoint grid. The sampled sine modes are orthonormal on
    /// an `n`-cell grid for `k < n`, so the grid must be finer than the
    /// truncation.
    pub fn apply(&self, f: &GridFunction) -> Result<GridFunction> {
        let n = f.n();
        let m = self.truncation();
        if m >= n {
            return Err(Error::invalid("grid must have more cells than spectral modes"));
        }
        let mut out = f.values().to_vec();
        let mut phi = alloc::vec![0.0; n];
        for (idx, &lambda) in self.eigenvalues.iter().enumerate() {
            let k = idx + 1;
            for (i, p) in phi.iter_mut().enumerate() {
                *p = Self::eigenfunction(k, midpoint(i, n));
            }
            let coef = phi.iter().zip(f.values()).map(|(a, b)| a * b).sum::<f64>() / n as f64;
            let w = (lambda - 1.0) * coef;
            for (o, p) in out.iter_mut().zip(&phi) {
                *o += w * p;
            }
        }
        GridFunction::new(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::{Kernel, OperatorSpec};

    #[test]
    fn first_eigenvalue() {
        let r = bb_noise_operator(5).unwrap();
        assert!((r.eigenvalue(1) - (1.0 + 1.0 / (PI * PI)).sqrt()).abs() < 1e-15);
        assert!(bb_noise_operator(0).is_err());
    }

    #[test]
    fn eigenvalues_approach_one() {
        let r = bb_noise_operator(10_000).unwrap();
        let ev = r.eigenvalues();
        assert!(ev.windows(2).all(|w| w[1] < w[0]));
        assert!(ev[ev.len() - 1] - 1.0 < 1e-9);
        assert!(ev.iter().all(|&v| v > 1.0));
    }

    #[test]
    fn squared_eigenvalues() {
        let r = bb_noise_operator(8).unwrap();
        let sq = r.squared();
        for k in 1..=8 {
            let expected = 1.0 + 1.0 / ((k * k) as f64 * PI * PI);
            assert!((sq.eigenvalue(k) - expected).abs() < 1e-15);
        }
    }

    #[test]
    fn square_kernel_recovers_bridge_covariance() {
        let r = bb_noise_operator(4000).unwrap();
        for &(s, t) in &[(0.2, 0.7), (0.5, 0.5), (0.9, 0.3)] {
            let approx = r.square_minus_identity_kernel(s, t);
            assert!((approx - Kernel::BrownianBridge.eval(s, t)).abs() < 1e-3);
        }
    }

    #[test]
    fn applying_twice_matches_identity_plus_bridge() {
        let n = 512;
        let r = bb_noise_operator(8).unwrap();
        let f = GridFunction::from_fn(n, |t| {
            SpectralOperator::eigenfunction(1, t) + 0.5 * SpectralOperator::eigenfunction(3, t)
        })
        .unwrap();
        let twice = r.apply(&r.apply(&f).unwrap()).unwrap();
        let o = OperatorSpec::sum(OperatorSpec::Identity, OperatorSpec::integral(Kernel::BrownianBridge));
        let direct = o.apply(&f).unwrap();
        for (a, b) in twice.values().iter().zip(direct.values()) {
            assert!((a - b).abs() < 1e-5);
        }
        assert!(r.apply(&GridFunction::zeros(8)).is_err());
    }
}
