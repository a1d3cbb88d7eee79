//! Piecewise-constant functions on the `n`-cell equipartition of `[0,1]`.
//!
//! Cell `i` (zero-based) is `(i/n, (i+1)/n]` and is represented by its
//! midpoint `(i + ½)/n`. Inner products and integrals are exact for the
//! step function the values describe.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Midpoint of cell `i` (zero-based) on an `n`-cell grid.
#[inline]
pub fn midpoint(i: usize, n: usize) -> f64 {
    (i as f64 + 0.5) / n as f64
}

/// All `n` cell midpoints.
pub fn midpoints(n: usize) -> Vec<f64> {
    (0..n).map(|i| midpoint(i, n)).collect()
}

/// Index of the cell `(i/n, (i+1)/n]` containing `u`; `u = 0` maps to cell 0.
pub fn cell_of(u: f64, n: usize) -> usize {
    let scaled = libm::ceil(u * n as f64);
    if scaled <= 1.0 {
        0
    } else {
        (scaled as usize - 1).min(n - 1)
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GridFunction {
    values: Vec<f64>,
}

impl GridFunction {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::invalid("grid function needs at least one cell"));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(i));
        }
        Ok(GridFunction { values })
    }

    pub fn zeros(n: usize) -> Self {
        Self::constant(n, 0.0)
    }

    pub fn constant(n: usize, c: f64) -> Self {
        assert!(n >= 1 && c.is_finite());
        GridFunction { values: vec![c; n] }
    }

    /// Samples `f` at the cell midpoints.
    pub fn from_fn(n: usize, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new((0..n).map(|i| f(midpoint(i, n))).collect())
    }

    pub(crate) fn from_values_unchecked(values: Vec<f64>) -> Self {
        debug_assert!(!values.is_empty());
        GridFunction { values }
    }

    /// Indicator of `[a, b]`: each cell holds the fraction of it covered by
    /// the interval, so the integral equals `b − a`.
    pub fn indicator(a: f64, b: f64, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::invalid("n must be positive"));
        }
        if !(a < b) || a < 0.0 || b > 1.0 {
            return Err(Error::invalid("indicator needs 0 <= a < b <= 1"));
        }
        let nf = n as f64;
        let values = (0..n)
            .map(|i| {
                let lo = i as f64 / nf;
                let hi = (i + 1) as f64 / nf;
                let overlap = b.min(hi) - a.max(lo);
                if overlap > 0.0 {
                    (overlap * nf).min(1.0)
                } else {
                    0.0
                }
            })
            .collect();
        Ok(GridFunction { values })
    }

    pub fn n(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    fn check_same_grid(&self, other: &GridFunction) -> Result<()> {
        if self.n() != other.n() {
            return Err(Error::GridMismatch {
                left: self.n(),
                right: other.n(),
            });
        }
        Ok(())
    }

    /// `⟨f, g⟩ = (1/n) Σ fᵢ gᵢ`.
    pub fn inner_product(&self, other: &GridFunction) -> Result<f64> {
        self.check_same_grid(other)?;
        let s: f64 = self.values.iter().zip(&other.values).map(|(a, b)| a * b).sum();
        Ok(s / self.n() as f64)
    }

    pub fn norm_sq(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>() / self.n() as f64
    }

    pub fn integral(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.n() as f64
    }

    pub fn scale(&self, c: f64) -> GridFunction {
        GridFunction {
            values: self.values.iter().map(|v| c * v).collect(),
        }
    }

    pub fn add(&self, other: &GridFunction) -> Result<GridFunction> {
        self.check_same_grid(other)?;
        Ok(GridFunction {
            values: self.values.iter().zip(&other.values).map(|(a, b)| a + b).collect(),
        })
    }

    /// `c·self + other`.
    pub fn axpy(&self, c: f64, other: &GridFunction) -> Result<GridFunction> {
        self.check_same_grid(other)?;
        Ok(GridFunction {
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| c * a + b)
                .collect(),
        })
    }

    /// The values paired with their cell midpoints.
    pub fn midpoint_samples(&self) -> Samples {
        let n = self.n();
        Samples {
            points: self
                .values
                .iter()
                .enumerate()
                .map(|(i, &y)| (midpoint(i, n), y))
                .collect(),
        }
    }

    /// Concatenates two grid functions of equal size into one on the doubled
    /// grid (first half is the first component).
    pub fn stack(first: &GridFunction, second: &GridFunction) -> Result<GridFunction> {
        first.check_same_grid(second)?;
        let mut values = first.values.clone();
        values.extend_from_slice(&second.values);
        Ok(GridFunction { values })
    }

    /// Inverse of [`GridFunction::stack`].
    pub fn split_halves(&self) -> Result<(GridFunction, GridFunction)> {
        if !self.n().is_multiple_of(2) {
            return Err(Error::invalid("cannot split an odd-sized grid"));
        }
        let (a, b) = self.values.split_at(self.n() / 2);
        Ok((
            GridFunction { values: a.to_vec() },
            GridFunction { values: b.to_vec() },
        ))
    }
}

/// Discrete observations `(u_k, y_k)` with strictly increasing `u_k` in `[0,1]`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Samples {
    points: Vec<(f64, f64)>,
}

impl Samples {
    pub fn new(points: Vec<(f64, f64)>) -> Result<Self> {
        for (k, &(u, y)) in points.iter().enumerate() {
            if !u.is_finite() || !y.is_finite() {
                return Err(Error::NonFinite(k));
            }
            if !(0.0..=1.0).contains(&u) {
                return Err(Error::invalid("sample location outside [0,1]"));
            }
            if k > 0 && points[k - 1].0 >= u {
                return Err(Error::invalid("sample locations must be strictly increasing"));
            }
        }
        Ok(Samples { points })
    }

    /// Observations at the midpoints `(k − ½)/m`.
    pub fn aligned(ys: &[f64]) -> Result<Self> {
        let m = ys.len();
        Self::new(ys.iter().enumerate().map(|(k, &y)| (midpoint(k, m), y)).collect())
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[(f64, f64)] {
        &self.points
    }

    pub fn ys(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.1).collect()
    }
}

/// Piecewise-constant embedding on `n` cells. Each cell takes the mean of the
/// samples in it; empty cells copy the nearest nonempty cell (lower index on
/// ties).
pub fn embed_piecewise_constant(samples: &Samples, n: usize) -> Result<GridFunction> {
    if samples.is_empty() {
        return Err(Error::NoData);
    }
    if n == 0 {
        return Err(Error::invalid("n must be positive"));
    }
    let mut sums = vec![0.0; n];
    let mut counts = vec![0usize; n];
    for &(u, y) in samples.points() {
        let c = cell_of(u, n);
        sums[c] += y;
        counts[c] += 1;
    }
    let filled: Vec<usize> = (0..n).filter(|&i| counts[i] > 0).collect();
    let mut values = vec![0.0; n];
    // `filled` is sorted; walk it alongside the cells.
    let mut next = 0;
    for (i, v) in values.iter_mut().enumerate() {
        while next + 1 < filled.len() && filled[next + 1] <= i {
            next += 1;
        }
        let src = if counts[i] > 0 {
            i
        } else {
            let below = filled[next];
            if below > i {
                below
            } else {
                match filled.get(next + 1) {
                    Some(&above) if above - i < i - below => above,
                    _ => below,
                }
            }
        };
        *v = sums[src] / counts[src] as f64;
    }
    Ok(GridFunction { values })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use proptest::prelude::*;

    fn gf(v: &[f64]) -> GridFunction {
        GridFunction::new(v.to_vec()).unwrap()
    }

    #[test]
    fn embed_one_sample_per_cell() {
        let s = Samples::new(vec![(1.0 / 6.0, 1.0), (0.5, 2.0), (5.0 / 6.0, 3.0)]).unwrap();
        assert_eq!(embed_piecewise_constant(&s, 3).unwrap().values(), &[1.0, 2.0, 3.0]);
    }

    #[test]
    fn embed_zero_data() {
        let s = Samples::new(vec![(0.1, 0.0), (0.35, 0.0), (0.9, 0.0)]).unwrap();
        assert_eq!(embed_piecewise_constant(&s, 7).unwrap(), GridFunction::zeros(7));
    }

    #[test]
    fn embed_nearest_cell_fill() {
        let s = Samples::new(vec![(0.2, 1.0), (0.7, 3.0)]).unwrap();
        assert_eq!(embed_piecewise_constant(&s, 4).unwrap().values(), &[1.0, 1.0, 3.0, 3.0]);
    }

    #[test]
    fn embed_fill_prefers_strictly_nearer_above_and_averages_cells() {
        // cells of n=5: sample in cell 0 and cell 3 -> cell 1 from 0, cell 2 from 3
        let s = Samples::new(vec![(0.1, 1.0), (0.65, 4.0), (0.7, 6.0)]).unwrap();
        assert_eq!(
            embed_piecewise_constant(&s, 5).unwrap().values(),
            &[1.0, 1.0, 5.0, 5.0, 5.0]
        );
    }

    #[test]
    fn embed_rejects_empty() {
        assert_eq!(
            embed_piecewise_constant(&Samples::default(), 4).unwrap_err(),
            Error::NoData
        );
    }

    #[test]
    fn samples_validation() {
        assert!(Samples::new(vec![(0.5, 1.0), (0.5, 2.0)]).is_err());
        assert!(Samples::new(vec![(1.5, 1.0)]).is_err());
        assert!(Samples::new(vec![(0.5, f64::NAN)]).is_err());
    }

    #[test]
    fn inner_product_examples() {
        for n in [1, 3, 10] {
            let one = GridFunction::constant(n, 1.0);
            assert!((one.inner_product(&one).unwrap() - 1.0).abs() < 1e-15);
        }
        let a = GridFunction::indicator(0.0, 0.5, 8).unwrap();
        let b = GridFunction::indicator(0.5, 1.0, 8).unwrap();
        assert!((a.inner_product(&a).unwrap() - 0.5).abs() < 1e-15);
        assert_eq!(a.inner_product(&b).unwrap(), 0.0);
        assert!(matches!(
            a.inner_product(&GridFunction::zeros(3)),
            Err(Error::GridMismatch { .. })
        ));
    }

    #[test]
    fn indicator_examples() {
        assert_eq!(GridFunction::indicator(0.0, 1.0, 4).unwrap().values(), &[1.0; 4]);
        assert_eq!(GridFunction::indicator(0.0, 0.5, 2).unwrap().values(), &[1.0, 0.0]);
        assert_eq!(GridFunction::indicator(0.25, 0.75, 2).unwrap().values(), &[0.5, 0.5]);
        assert!(GridFunction::indicator(0.5, 0.5, 2).is_err());
        let odd = GridFunction::indicator(0.13, 0.71, 7).unwrap();
        assert!((odd.integral() - 0.58).abs() < 1e-14);
    }

    #[test]
    fn integral_examples() {
        assert!((GridFunction::constant(5, 2.5).integral() - 2.5).abs() < 1e-15);
        assert!((GridFunction::indicator(0.0, 0.5, 10).unwrap().integral() - 0.5).abs() < 1e-15);
        assert_eq!(gf(&[1.0, 2.0, 3.0, 4.0]).integral(), 2.5);
    }

    #[test]
    fn rejects_non_finite() {
        assert_eq!(GridFunction::new(vec![1.0, f64::INFINITY]).unwrap_err(), Error::NonFinite(1));
        assert!(GridFunction::new(vec![]).is_err());
    }

    #[test]
    fn stack_and_split() {
        let a = gf(&[1.0, 2.0]);
        let b = gf(&[3.0, 4.0]);
        let s = GridFunction::stack(&a, &b).unwrap();
        assert_eq!(s.split_halves().unwrap(), (a, b));
    }

    fn vals(n: usize) -> impl Strategy<Value = Vec<f64>> {
        proptest::collection::vec(-10.0..10.0f64, n)
    }

    proptest! {
        #[test]
        fn bilinear_and_cauchy_schwarz((f, g, h) in (1usize..40).prop_flat_map(|n| (vals(n), vals(n), vals(n))),
                                       alpha in -5.0..5.0f64) {
            let (f, g, h) = (gf(&f), gf(&g), gf(&h));
            let lhs = f.axpy(alpha, &g).unwrap().inner_product(&h).unwrap();
            let rhs = alpha * f.inner_product(&h).unwrap() + g.inner_product(&h).unwrap();
            prop_assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + lhs.abs()));
            let fg = f.inner_product(&g).unwrap();
            prop_assert!(fg * fg <= f.norm_sq() * g.norm_sq() * (1.0 + 1e-12) + 1e-300);
            prop_assert_eq!(f.inner_product(&g).unwrap(), g.inner_product(&f).unwrap());
            prop_assert!(f.inner_product(&f).unwrap() >= 0.0);
        }

        #[test]
        fn embed_restrict_identity(v in (1usize..60).prop_flat_map(vals)) {
            let f = gf(&v);
            prop_assert_eq!(embed_piecewise_constant(&f.midpoint_samples(), f.n()).unwrap(), f);
        }
    }
}
