//! Gaussian processes on `L²[0,1]` defined through operators.
//!
//! A process is specified by an operator `O`; applying it to a test function
//! `f` yields a centered Gaussian with `Cov(Ŏ(f), Ŏ(g)) = ⟨O*f, O*g⟩`. The
//! crate discretizes everything on the midpoint grid of an `n`-cell
//! equipartition of `[0,1]` and provides:
//!
//! * [`grid`]: piecewise-constant functions, data embedding and quadrature,
//! * [`operators`]: symbolic operator trees, adjoints, matrix approximations
//!   and pointwise covariance formulas,
//! * [`gaussian`]: white noise and operator-filtered process sampling,
//! * [`fredholm`]: Fredholm determinants by series, matrix and closed form,
//! * [`likelihood`]: multivariate and functional log-likelihoods,
//! * [`inference`]: profile maximum-likelihood fits,
//! * [`convergence`]: the functional-vs-multivariate likelihood gap study.
//!
//! The crate is `no_std` (with `alloc`) when the default `std` feature is off.

#![cfg_attr(not(feature = "std"), no_std)]
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

extern crate alloc;

pub mod convergence;
mod error;
pub mod fredholm;
pub mod gaussian;
pub mod grid;
pub mod inference;
pub mod likelihood;
pub mod linalg;
mod math;
pub mod operators;

pub use error::{Error, Result};
pub use grid::{GridFunction, Samples};
pub use likelihood::ModelParams;
pub use operators::{Kernel, Multiplier, OperatorSpec};
