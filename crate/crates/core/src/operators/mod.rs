//! Symbolic operators on `L²[0,1]` and their midpoint discretization.
//!
//! Operators are expression trees; nothing is materialized until
//! [`OperatorSpec::apply`] or [`OperatorSpec::matrix_approx`] is called on a
//! concrete grid. Kernel operators use the weights `(1/n) K(mᵢ, mⱼ)` with
//! `mᵢ = (i − ½)/n`, except that triangular kernels put half weight on the
//! diagonal cell (the exact integral of a step function up to the midpoint).

mod covariance;
mod kernel;
mod spectral;

use alloc::boxed::Box;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

pub use covariance::{
    block_component_variance, block_cross_covariance, pointwise_covariance, CovarianceQuadrature,
};
pub use kernel::{CustomKernel, Kernel, KernelFn, Multiplier, MultiplierFn, Support};
pub use spectral::{bb_noise_operator, SpectralOperator};

use crate::error::{Error, Result};
use crate::grid::{midpoint, GridFunction};
use crate::linalg::Matrix;

#[derive(Debug, Clone, PartialEq)]
pub enum OperatorSpec {
    Zero,
    Identity,
    Multiplication(Multiplier),
    /// Integral operator with a kernel that is not lower-triangular.
    Integral(Kernel),
    /// Integral operator with a lower-triangular (Volterra) kernel.
    Triangular(Kernel),
    Scaled(f64, Box<OperatorSpec>),
    Sum(Box<OperatorSpec>, Box<OperatorSpec>),
    /// `Compose(a, b) = a ∘ b`.
    Compose(Box<OperatorSpec>, Box<OperatorSpec>),
    /// `D (I + K) D`.
    CompositeDkd { d: Multiplier, k: Kernel },
    /// `[[O₁₁, O₁₂], [O₂₁, O₂₂]]` acting on the doubled grid, first half = component 1.
    Block2x2(Box<[OperatorSpec; 4]>),
}

/// The factored matrix approximation `M_n = S_n R_n S_n` of `D(I+K)D`.
#[derive(Debug, Clone)]
pub struct DkdMatrices {
    /// `(1/n) D(mᵢ) K(mᵢ,mⱼ) D(mⱼ) + D(mᵢ)² 1_{i=j}`.
    pub m: Matrix,
    /// Diagonal of `S_n`, i.e. `D(mᵢ)`.
    pub s_diag: Vec<f64>,
    /// `(1/n) K(mᵢ,mⱼ) + 1_{i=j}`.
    pub r: Matrix,
}

impl DkdMatrices {
    pub fn s(&self) -> Matrix {
        Matrix::from_diagonal(&self.s_diag)
    }

    /// Largest entry of `|M_n − S_n R_n S_n|`, with the product formed by dense
    /// multiplication.
    pub fn factorization_residual(&self) -> f64 {
        let s = self.s();
        s.matmul(&self.r).matmul(&s).max_abs_diff(&self.m)
    }
}

/// `(1/n) K(mᵢ, mⱼ)` with half weight on the diagonal for triangular kernels.
pub fn kernel_matrix(k: &Kernel, n: usize) -> Matrix {
    let nf = n as f64;
    let half_diag = k.support() != Support::Full;
    Matrix::from_fn(n, n, |i, j| {
        let w = if half_diag && i == j { 0.5 } else { 1.0 };
        w * k.eval(midpoint(i, n), midpoint(j, n)) / nf
    })
}

fn apply_kernel(k: &Kernel, f: &[f64]) -> Vec<f64> {
    let n = f.len();
    let nf = n as f64;
    let support = k.support();
    (0..n)
        .map(|i| {
            let t = midpoint(i, n);
            let (lo, hi) = match support {
                Support::Full => (0, n),
                Support::Lower => (0, i + 1),
                Support::Upper => (i, n),
            };
            let mut s = 0.0;
            for (j, fj) in f.iter().enumerate().take(hi).skip(lo) {
                let w = if support != Support::Full && j == i { 0.5 } else { 1.0 };
                s += w * k.eval(t, midpoint(j, n)) * fj;
            }
            s / nf
        })
        .collect()
}

impl OperatorSpec {
    /// Integral operator, mapped to [`OperatorSpec::Triangular`] when the
    /// kernel is lower-triangular.
    pub fn integral(k: Kernel) -> OperatorSpec {
        if k.is_triangular() {
            OperatorSpec::Triangular(k)
        } else {
            OperatorSpec::Integral(k)
        }
    }

    pub fn triangular(k: Kernel) -> Result<OperatorSpec> {
        if !k.is_triangular() {
            return Err(Error::invalid(format!("kernel {} is not lower-triangular", k.name())));
        }
        Ok(OperatorSpec::Triangular(k))
    }

    pub fn multiplication(d: Multiplier) -> OperatorSpec {
        OperatorSpec::Multiplication(d)
    }

    pub fn scaled(c: f64, o: OperatorSpec) -> OperatorSpec {
        OperatorSpec::Scaled(c, Box::new(o))
    }

    pub fn sum(a: OperatorSpec, b: OperatorSpec) -> OperatorSpec {
        OperatorSpec::Sum(Box::new(a), Box::new(b))
    }

    pub fn compose(a: OperatorSpec, b: OperatorSpec) -> OperatorSpec {
        OperatorSpec::Compose(Box::new(a), Box::new(b))
    }

    pub fn dkd(d: Multiplier, k: Kernel) -> OperatorSpec {
        OperatorSpec::CompositeDkd { d, k }
    }

    pub fn block(o11: OperatorSpec, o12: OperatorSpec, o21: OperatorSpec, o22: OperatorSpec) -> Self {
        OperatorSpec::Block2x2(Box::new([o11, o12, o21, o22]))
    }

    /// Short human-readable description.
    pub fn label(&self) -> String {
        match self {
            OperatorSpec::Zero => "0".into(),
            OperatorSpec::Identity => "I".into(),
            OperatorSpec::Multiplication(d) => format!("D[{}]", d.name()),
            OperatorSpec::Integral(k) => format!("K[{}]", k.name()),
            OperatorSpec::Triangular(k) => format!("T[{}]", k.name()),
            OperatorSpec::Scaled(c, o) => format!("{c}*{}", o.label()),
            OperatorSpec::Sum(a, b) => format!("({} + {})", a.label(), b.label()),
            OperatorSpec::Compose(a, b) => format!("{}∘{}", a.label(), b.label()),
            OperatorSpec::CompositeDkd { d, k } => format!("D[{}](I+K[{}])D", d.name(), k.name()),
            OperatorSpec::Block2x2(b) => format!(
                "[[{}, {}], [{}, {}]]",
                b[0].label(),
                b[1].label(),
                b[2].label(),
                b[3].label()
            ),
        }
    }

    /// Midpoint discretization of `O f` on the grid of `f`.
    pub fn apply(&self, f: &GridFunction) -> Result<GridFunction> {
        self.apply_values(f.values()).map(GridFunction::from_values_unchecked)
    }

    fn apply_values(&self, f: &[f64]) -> Result<Vec<f64>> {
        let n = f.len();
        Ok(match self {
            OperatorSpec::Zero => alloc::vec![0.0; n],
            OperatorSpec::Identity => f.to_vec(),
            OperatorSpec::Multiplication(d) => f
                .iter()
                .enumerate()
                .map(|(i, v)| d.eval(midpoint(i, n)) * v)
                .collect(),
            OperatorSpec::Integral(k) | OperatorSpec::Triangular(k) => apply_kernel(k, f),
            OperatorSpec::Scaled(c, o) => o.apply_values(f)?.into_iter().map(|v| c * v).collect(),
            OperatorSpec::Sum(a, b) => {
                let mut x = a.apply_values(f)?;
                for (x, y) in x.iter_mut().zip(b.apply_values(f)?) {
                    *x += y;
                }
                x
            }
            OperatorSpec::Compose(a, b) => a.apply_values(&b.apply_values(f)?)?,
            OperatorSpec::CompositeDkd { d, k } => {
                let dv: Vec<f64> = (0..n).map(|i| d.eval(midpoint(i, n))).collect();
                let df: Vec<f64> = f.iter().zip(&dv).map(|(a, b)| a * b).collect();
                let kdf = apply_kernel(k, &df);
                df.iter()
                    .zip(&kdf)
                    .zip(&dv)
                    .map(|((a, b), d)| d * (a + b))
                    .collect()
            }
            OperatorSpec::Block2x2(b) => {
                if !n.is_multiple_of(2) {
                    return Err(Error::invalid("block operator needs an even (doubled) grid"));
                }
                let (f1, f2) = f.split_at(n / 2);
                let mut top = b[0].apply_values(f1)?;
                for (x, y) in top.iter_mut().zip(b[1].apply_values(f2)?) {
                    *x += y;
                }
                let mut bottom = b[2].apply_values(f1)?;
                for (x, y) in bottom.iter_mut().zip(b[3].apply_values(f2)?) {
                    *x += y;
                }
                top.extend(bottom);
                top
            }
        })
    }

    pub fn adjoint(&self) -> OperatorSpec {
        match self {
            OperatorSpec::Zero | OperatorSpec::Identity | OperatorSpec::Multiplication(_) => {
                self.clone()
            }
            OperatorSpec::Integral(k) => OperatorSpec::integral(k.transpose()),
            OperatorSpec::Triangular(k) => OperatorSpec::Integral(k.transpose()),
            OperatorSpec::Scaled(c, o) => OperatorSpec::scaled(*c, o.adjoint()),
            OperatorSpec::Sum(a, b) => OperatorSpec::sum(a.adjoint(), b.adjoint()),
            OperatorSpec::Compose(a, b) => OperatorSpec::compose(b.adjoint(), a.adjoint()),
            OperatorSpec::CompositeDkd { d, k } => OperatorSpec::CompositeDkd {
                d: d.clone(),
                k: k.transpose(),
            },
            OperatorSpec::Block2x2(b) => OperatorSpec::block(
                b[0].adjoint(),
                b[2].adjoint(),
                b[1].adjoint(),
                b[3].adjoint(),
            ),
        }
    }

    /// Dense matrix `A` with `apply(O, f) = A f` on an `n`-cell grid (`2n`
    /// for block operators).
    pub fn matrix_approx(&self, n: usize) -> Result<Matrix> {
        if n == 0 {
            return Err(Error::invalid("n must be positive"));
        }
        Ok(match self {
            OperatorSpec::Zero => Matrix::zeros(n, n),
            OperatorSpec::Identity => Matrix::identity(n),
            OperatorSpec::Multiplication(d) => {
                let diag: Vec<f64> = (0..n).map(|i| d.eval(midpoint(i, n))).collect();
                Matrix::from_diagonal(&diag)
            }
            OperatorSpec::Integral(k) | OperatorSpec::Triangular(k) => kernel_matrix(k, n),
            OperatorSpec::Scaled(c, o) => o.matrix_approx(n)?.scale(*c),
            OperatorSpec::Sum(a, b) => a.matrix_approx(n)?.add(&b.matrix_approx(n)?),
            OperatorSpec::Compose(a, b) => a.matrix_approx(n)?.matmul(&b.matrix_approx(n)?),
            OperatorSpec::CompositeDkd { .. } => self.dkd_matrices(n)?.m,
            OperatorSpec::Block2x2(b) => {
                let parts = [
                    b[0].matrix_approx(n)?,
                    b[1].matrix_approx(n)?,
                    b[2].matrix_approx(n)?,
                    b[3].matrix_approx(n)?,
                ];
                Matrix::from_fn(2 * n, 2 * n, |i, j| parts[2 * (i / n) + j / n][(i % n, j % n)])
            }
        })
    }

    /// `M_n`, `S_n` and `R_n` for a [`OperatorSpec::CompositeDkd`].
    pub fn dkd_matrices(&self, n: usize) -> Result<DkdMatrices> {
        let OperatorSpec::CompositeDkd { d, k } = self else {
            return Err(Error::invalid(format!(
                "factored matrix approximation needs D(I+K)D, got {}",
                self.label()
            )));
        };
        if n == 0 {
            return Err(Error::invalid("n must be positive"));
        }
        let mut s_diag = Vec::with_capacity(n);
        for i in 0..n {
            let t = midpoint(i, n);
            let value = d.eval(t);
            if !(value > 0.0) || !value.is_finite() {
                return Err(Error::NotBoundedBelow { t, value });
            }
            s_diag.push(value);
        }
        let q = kernel_matrix(k, n);
        let r = Matrix::from_fn(n, n, |i, j| q[(i, j)] + if i == j { 1.0 } else { 0.0 });
        let m = Matrix::from_fn(n, n, |i, j| {
            let cross = s_diag[i] * q[(i, j)] * s_diag[j];
            if i == j {
                cross + s_diag[i] * s_diag[i]
            } else {
                cross
            }
        });
        Ok(DkdMatrices { m, s_diag, r })
    }
}
