use alloc::format;

use super::{Kernel, OperatorSpec, Support};
use crate::error::{Error, Result};

/// Midpoint-rule settings for pointwise covariances.
///
/// `domain_end` is the right end `T` of the interval `[0, T]` the kernel is
/// evaluated on; it is 1 for operators on `L²[0,1]` and larger for truncated
/// versions of processes on the real line.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CovarianceQuadrature {
    pub n_quad: usize,
    pub domain_end: f64,
}

impl Default for CovarianceQuadrature {
    fn default() -> Self {
        CovarianceQuadrature {
            n_quad: 1024,
            domain_end: 1.0,
        }
    }
}

impl CovarianceQuadrature {
    pub fn on_interval(domain_end: f64) -> Self {
        CovarianceQuadrature {
            domain_end,
            ..Default::default()
        }
    }
}

fn midpoint_integral(a: f64, b: f64, n: usize, f: impl Fn(f64) -> f64) -> f64 {
    if b <= a {
        return 0.0;
    }
    let h = (b - a) / n as f64;
    (0..n).map(|i| f(a + (i as f64 + 0.5) * h)).sum::<f64>() * h
}

fn kernel_covariance(k: &Kernel, t1: f64, t2: f64, q: &CovarianceQuadrature) -> f64 {
    let (a, b) = match k.support() {
        Support::Full => (0.0, q.domain_end),
        Support::Lower => (0.0, t1.min(t2)),
        Support::Upper => (t1.max(t2), q.domain_end),
    };
    midpoint_integral(a, b, q.n_quad, |s| k.eval(t1, s) * k.eval(t2, s))
}

/// `Cov(Ŏ(t₁), Ŏ(t₂))` for a locally continuous integral operator: the
/// quadrature of `∫ K(t₁,s) K(t₂,s) ds` over the kernel's support.
pub fn pointwise_covariance(
    o: &OperatorSpec,
    t1: f64,
    t2: f64,
    quad: &CovarianceQuadrature,
) -> Result<f64> {
    if quad.n_quad == 0 || !(quad.domain_end > 0.0) {
        return Err(Error::invalid("quadrature needs n_quad > 0 and a positive domain"));
    }
    for t in [t1, t2] {
        if !(0.0..=quad.domain_end).contains(&t) {
            return Err(Error::invalid(format!("point {t} outside [0, {}]", quad.domain_end)));
        }
    }
    match o {
        OperatorSpec::Zero => Ok(0.0),
        OperatorSpec::Integral(k) | OperatorSpec::Triangular(k) => {
            Ok(kernel_covariance(k, t1, t2, quad))
        }
        OperatorSpec::Scaled(c, inner) => Ok(c * c * pointwise_covariance(inner, t1, t2, quad)?),
        other => Err(Error::NoLocalContinuity(other.label())),
    }
}

fn blocks(b: &OperatorSpec) -> Result<&[OperatorSpec; 4]> {
    match b {
        OperatorSpec::Block2x2(parts) => Ok(parts),
        other => Err(Error::invalid(format!("expected a 2x2 block operator, got {}", other.label()))),
    }
}

/// The operator `C` with `Cov(Ŏ₁(f), Ŏ₂(g)) = ⟨f, C g⟩`, namely
/// `O₁₁O₂₁* + O₁₂O₂₂*`.
pub fn block_cross_covariance(b: &OperatorSpec) -> Result<OperatorSpec> {
    let [o11, o12, o21, o22] = blocks(b)?;
    Ok(OperatorSpec::sum(
        OperatorSpec::compose(o11.clone(), o21.adjoint()),
        OperatorSpec::compose(o12.clone(), o22.adjoint()),
    ))
}

/// Variance operator of component `0` (`O₁₁O₁₁* + O₁₂O₁₂*`) or `1`
/// (`O₂₁O₂₁* + O₂₂O₂₂*`).
pub fn block_component_variance(b: &OperatorSpec, component: usize) -> Result<OperatorSpec> {
    let [o11, o12, o21, o22] = blocks(b)?;
    let (x, y) = match component {
        0 => (o11, o12),
        1 => (o21, o22),
        _ => return Err(Error::invalid("block component must be 0 or 1")),
    };
    Ok(OperatorSpec::sum(
        OperatorSpec::compose(x.clone(), x.adjoint()),
        OperatorSpec::compose(y.clone(), y.adjoint()),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GridFunction;
    use crate::linalg::Matrix;

    #[test]
    fn brownian_covariance_is_scaled_min() {
        let lambda = 1.7;
        let o = OperatorSpec::integral(Kernel::Forward.scaled(lambda));
        let q = CovarianceQuadrature::default();
        for &(t1, t2) in &[(0.2, 0.7), (0.5, 0.5), (0.9, 0.1), (0.33, 0.34)] {
            let c = pointwise_covariance(&o, t1, t2, &q).unwrap();
            assert!((c - lambda * lambda * f64::min(t1, t2)).abs() < 1e-12);
            assert_eq!(c, pointwise_covariance(&o, t2, t1, &q).unwrap());
        }
    }

    #[test]
    fn ou_covariance_on_wide_interval() {
        let (alpha, lambda) = (1.5, 2.0);
        let o = OperatorSpec::integral(Kernel::ou(alpha, lambda));
        let q = CovarianceQuadrature::on_interval(10.0);
        for &(t1, t2) in &[(5.0, 5.5), (4.0, 6.0), (7.0, 7.0)] {
            let c = pointwise_covariance(&o, t1, t2, &q).unwrap();
            let stationary =
                alpha * alpha / (2.0 * lambda) * (-lambda * f64::abs(t1 - t2)).exp();
            assert!((c - stationary).abs() < 1e-4, "{c} vs {stationary}");
        }
    }

    #[test]
    fn full_support_kernel_and_zero() {
        let q = CovarianceQuadrature::default();
        let zero = OperatorSpec::integral(Kernel::zero());
        assert_eq!(pointwise_covariance(&zero, 0.3, 0.6, &q).unwrap(), 0.0);
        assert_eq!(pointwise_covariance(&OperatorSpec::Zero, 0.3, 0.6, &q).unwrap(), 0.0);
        // ∫ min(t1,s) min(t2,s) ds for t1 = t2 = 1 is 1/3
        let b = OperatorSpec::integral(Kernel::Min);
        let c = pointwise_covariance(&b, 1.0, 1.0, &q).unwrap();
        assert!((c - 1.0 / 3.0).abs() < 1e-6);
        let upper = OperatorSpec::integral(Kernel::Forward).adjoint();
        // ∫_{max}^1 1 ds
        assert!((pointwise_covariance(&upper, 0.25, 0.5, &q).unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn unsupported_variants_error() {
        let q = CovarianceQuadrature::default();
        assert!(matches!(
            pointwise_covariance(&OperatorSpec::Identity, 0.3, 0.4, &q),
            Err(Error::NoLocalContinuity(_))
        ));
        let o = OperatorSpec::integral(Kernel::Min);
        assert!(pointwise_covariance(&o, 1.2, 0.4, &q).is_err());
    }

    #[test]
    fn block_cross_covariance_examples() {
        let n = 4;
        let i = || OperatorSpec::Identity;
        let z = || OperatorSpec::Zero;
        let independent = OperatorSpec::block(i(), z(), z(), OperatorSpec::integral(Kernel::Min));
        let c = block_cross_covariance(&independent).unwrap();
        assert_eq!(c.matrix_approx(n).unwrap(), Matrix::zeros(n, n));

        let shared = OperatorSpec::block(z(), i(), z(), i());
        let c = block_cross_covariance(&shared).unwrap();
        assert_eq!(c.matrix_approx(n).unwrap(), Matrix::identity(n));

        let all = OperatorSpec::block(i(), i(), i(), i());
        let c = block_cross_covariance(&all).unwrap();
        assert_eq!(c.matrix_approx(n).unwrap(), Matrix::identity(n).scale(2.0));

        assert!(block_cross_covariance(&i()).is_err());
    }

    #[test]
    fn block_cross_covariance_matches_adjoint_route() {
        // ⟨O*(f,0), O*(0,g)⟩ on the doubled grid against ⟨f, C g⟩.
        let n = 8;
        let b = OperatorSpec::block(
            OperatorSpec::integral(Kernel::Forward),
            OperatorSpec::scaled(0.5, OperatorSpec::Identity),
            OperatorSpec::integral(Kernel::Min),
            OperatorSpec::integral(Kernel::ou(1.0, 3.0)),
        );
        let f = GridFunction::from_fn(n, |t| 1.0 + t).unwrap();
        let g = GridFunction::from_fn(n, |t| (4.0 * t).cos()).unwrap();
        let z = GridFunction::zeros(n);
        let bs = b.adjoint();
        let left = bs.apply(&GridFunction::stack(&f, &z).unwrap()).unwrap();
        let right = bs.apply(&GridFunction::stack(&z, &g).unwrap()).unwrap();
        // per-component inner products: the doubled grid has 2n cells of width 1/n
        let direct = 2.0 * left.inner_product(&right).unwrap();
        let via_c = f.inner_product(&block_cross_covariance(&b).unwrap().apply(&g).unwrap()).unwrap();
        assert!((direct - via_c).abs() < 1e-13);

        let left2 = bs.apply(&GridFunction::stack(&f, &z).unwrap()).unwrap();
        let var_direct = 2.0 * left2.norm_sq();
        let var_op = block_component_variance(&b, 0).unwrap();
        assert!((var_direct - f.inner_product(&var_op.apply(&f).unwrap()).unwrap()).abs() < 1e-13);
    }
}
