use alloc::boxed::Box;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::sync::Arc;
use core::fmt;
use core::str::FromStr;

use crate::error::Error;
use crate::math;

/// Where a kernel `K(t, s)` may be nonzero.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Support {
    Full,
    /// `K(t, s) = 0` for `s > t`.
    Lower,
    /// `K(t, s) = 0` for `s < t`.
    Upper,
}

impl Support {
    fn flip(self) -> Support {
        match self {
            Support::Full => Support::Full,
            Support::Lower => Support::Upper,
            Support::Upper => Support::Lower,
        }
    }
}

pub type KernelFn = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;

/// A user-supplied kernel. Equality is by identity of the closure.
#[derive(Clone)]
pub struct CustomKernel {
    name: String,
    symmetric: bool,
    support: Support,
    f: KernelFn,
}

/// Bivariate kernel `K(t, s)` of an integral operator `(Kf)(t) = ∫ K(t,s) f(s) ds`.
///
/// Triangular kernels take their lower-triangle limit on the diagonal, so
/// `Forward` evaluates to 1 at `s = t`.
#[derive(Clone)]
pub enum Kernel {
    /// `K ≡ c`; `c = 1` is the `ones` kernel.
    Constant(f64),
    /// `min(s, t)`.
    Min,
    /// `min(s, t) − st`.
    BrownianBridge,
    /// `1_{s ≤ t}`.
    Forward,
    /// `α e^{−λ(t−s)} 1_{s ≤ t}`.
    Ou { alpha: f64, lambda: f64 },
    Scaled(f64, Box<Kernel>),
    /// `(t, s) ↦ K(s, t)`.
    Transposed(Box<Kernel>),
    Custom(CustomKernel),
}

impl Kernel {
    pub fn ones() -> Kernel {
        Kernel::Constant(1.0)
    }

    pub fn zero() -> Kernel {
        Kernel::Constant(0.0)
    }

    pub fn ou(alpha: f64, lambda: f64) -> Kernel {
        Kernel::Ou { alpha, lambda }
    }

    pub fn custom(
        name: impl Into<String>,
        symmetric: bool,
        support: Support,
        f: impl Fn(f64, f64) -> f64 + Send + Sync + 'static,
    ) -> Kernel {
        Kernel::Custom(CustomKernel {
            name: name.into(),
            symmetric,
            support,
            f: Arc::new(f),
        })
    }

    pub fn scaled(self, c: f64) -> Kernel {
        match self {
            Kernel::Constant(a) => Kernel::Constant(c * a),
            Kernel::Scaled(a, k) => Kernel::Scaled(c * a, k),
            k => Kernel::Scaled(c, Box::new(k)),
        }
    }

    pub fn eval(&self, t: f64, s: f64) -> f64 {
        match self {
            Kernel::Constant(c) => *c,
            Kernel::Min => t.min(s),
            Kernel::BrownianBridge => t.min(s) - t * s,
            Kernel::Forward => {
                if s <= t {
                    1.0
                } else {
                    0.0
                }
            }
            Kernel::Ou { alpha, lambda } => {
                if s <= t {
                    alpha * math::exp(-lambda * (t - s))
                } else {
                    0.0
                }
            }
            Kernel::Scaled(c, k) => c * k.eval(t, s),
            Kernel::Transposed(k) => k.eval(s, t),
            Kernel::Custom(c) => match c.support {
                Support::Lower if s > t => 0.0,
                Support::Upper if s < t => 0.0,
                _ => (c.f)(t, s),
            },
        }
    }

    pub fn support(&self) -> Support {
        match self {
            Kernel::Constant(_) | Kernel::Min | Kernel::BrownianBridge => Support::Full,
            Kernel::Forward | Kernel::Ou { .. } => Support::Lower,
            Kernel::Scaled(_, k) => k.support(),
            Kernel::Transposed(k) => k.support().flip(),
            Kernel::Custom(c) => c.support,
        }
    }

    pub fn is_symmetric(&self) -> bool {
        match self {
            Kernel::Constant(_) | Kernel::Min | Kernel::BrownianBridge => true,
            Kernel::Forward | Kernel::Ou { .. } => false,
            Kernel::Scaled(_, k) | Kernel::Transposed(k) => k.is_symmetric(),
            Kernel::Custom(c) => c.symmetric,
        }
    }

    pub fn is_triangular(&self) -> bool {
        self.support() == Support::Lower
    }

    /// The kernel of the adjoint operator. An involution up to structure.
    pub fn transpose(&self) -> Kernel {
        if self.is_symmetric() {
            return self.clone();
        }
        match self {
            Kernel::Transposed(k) => (**k).clone(),
            Kernel::Scaled(c, k) => Kernel::Scaled(*c, Box::new(k.transpose())),
            k => Kernel::Transposed(Box::new(k.clone())),
        }
    }

    pub fn name(&self) -> String {
        match self {
            Kernel::Constant(c) if *c == 1.0 => "ones".to_string(),
            Kernel::Constant(c) => format!("{c}"),
            Kernel::Min => "brownian".to_string(),
            Kernel::BrownianBridge => "bb".to_string(),
            Kernel::Forward => "fwd".to_string(),
            Kernel::Ou { alpha, lambda } => format!("ou({alpha},{lambda})"),
            Kernel::Scaled(c, k) => format!("{c}*{}", k.name()),
            Kernel::Transposed(k) => format!("{}^T", k.name()),
            Kernel::Custom(c) => c.name.clone(),
        }
    }
}

impl PartialEq for Kernel {
    fn eq(&self, other: &Kernel) -> bool {
        use Kernel::*;
        match (self, other) {
            (Constant(a), Constant(b)) => a == b,
            (Min, Min) | (BrownianBridge, BrownianBridge) | (Forward, Forward) => true,
            (Ou { alpha: a1, lambda: l1 }, Ou { alpha: a2, lambda: l2 }) => a1 == a2 && l1 == l2,
            (Scaled(a, k), Scaled(b, j)) => a == b && k == j,
            (Transposed(k), Transposed(j)) => k == j,
            (Custom(a), Custom(b)) => a.name == b.name && Arc::ptr_eq(&a.f, &b.f),
            _ => false,
        }
    }
}

impl fmt::Debug for Kernel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Kernel({})", self.name())
    }
}

impl fmt::Display for Kernel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

/// Registry names: `ones`, `brownian`, `bb`, `fwd`, `ou(alpha,lambda)`.
impl FromStr for Kernel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Kernel, Error> {
        let s = s.trim();
        match s {
            "ones" => return Ok(Kernel::ones()),
            "brownian" | "min" => return Ok(Kernel::Min),
            "bb" => return Ok(Kernel::BrownianBridge),
            "fwd" => return Ok(Kernel::Forward),
            _ => {}
        }
        let args = s
            .strip_prefix("ou(")
            .and_then(|r| r.strip_suffix(')'))
            .ok_or_else(|| Error::invalid(format!("unknown kernel `{s}`")))?;
        let mut parts = args.split(',').map(|p| p.trim().parse::<f64>());
        match (parts.next(), parts.next(), parts.next()) {
            (Some(Ok(alpha)), Some(Ok(lambda)), None) if alpha > 0.0 && lambda > 0.0 => {
                Ok(Kernel::ou(alpha, lambda))
            }
            _ => Err(Error::invalid(format!(
                "expected ou(alpha,lambda) with positive parameters, got `{s}`"
            ))),
        }
    }
}

pub type MultiplierFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// The function `D(t)` of a multiplication operator `(Df)(t) = D(t) f(t)`.
#[derive(Clone)]
pub enum Multiplier {
    Constant(f64),
    Custom { name: String, f: MultiplierFn },
}

impl Multiplier {
    pub fn custom(name: impl Into<String>, f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        Multiplier::Custom {
            name: name.into(),
            f: Arc::new(f),
        }
    }

    pub fn eval(&self, t: f64) -> f64 {
        match self {
            Multiplier::Constant(c) => *c,
            Multiplier::Custom { f, .. } => f(t),
        }
    }

    pub fn name(&self) -> String {
        match self {
            Multiplier::Constant(c) => format!("{c}"),
            Multiplier::Custom { name, .. } => name.clone(),
        }
    }
}

impl PartialEq for Multiplier {
    fn eq(&self, other: &Multiplier) -> bool {
        match (self, other) {
            (Multiplier::Constant(a), Multiplier::Constant(b)) => a == b,
            (Multiplier::Custom { name: a, f }, Multiplier::Custom { name: b, f: g }) => {
                a == b && Arc::ptr_eq(f, g)
            }
            _ => false,
        }
    }
}

impl fmt::Debug for Multiplier {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Multiplier({})", self.name())
    }
}
