//! Sampling of white noise and operator-defined Gaussian processes.
//!
//! Randomness comes from [`NoiseStream`], a ChaCha20 keystream addressed by
//! `(seed, stream, counter)`. Draw `k` of a stream is the Box–Muller
//! transform of keystream words `4k..4k+4`, so a seed and draw index always
//! yield the same standard normal. Replicate `r` of a multi-replicate call
//! uses stream `r + 1` of the caller's seed, keeping replicate counters
//! disjoint.

use alloc::vec::Vec;
use core::f64::consts::TAU;

use rand_chacha::ChaCha20Rng;
use rand_core::{RngCore, SeedableRng};

use crate::error::{Error, Result};
use crate::grid::{midpoint, GridFunction};
use crate::linalg::{Cholesky, Matrix};
use crate::math;
use crate::operators::{pointwise_covariance, CovarianceQuadrature, OperatorSpec};

/// Deterministic source of i.i.d. `N(0,1)` draws.
#[derive(Debug, Clone)]
pub struct NoiseStream {
    seed: u64,
    stream: u64,
    counter: u64,
    rng: ChaCha20Rng,
}

impl NoiseStream {
    pub fn new(seed: u64) -> Self {
        Self::with_stream(seed, 0)
    }

    pub fn with_stream(seed: u64, stream: u64) -> Self {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        NoiseStream {
            seed,
            stream,
            counter: 0,
            rng,
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream(&self) -> u64 {
        self.stream
    }

    /// Index of the next draw.
    pub fn counter(&self) -> u64 {
        self.counter
    }

    /// An independent stream for replicate `r`.
    pub fn replicate(&self, r: u64) -> NoiseStream {
        NoiseStream::with_stream(self.seed, r + 1)
    }

    /// Moves to draw index `counter`.
    pub fn seek(&mut self, counter: u64) {
        self.rng.set_word_pos(u128::from(counter) * 4);
        self.counter = counter;
    }

    /// The draw at `index` of `(seed, stream)` without disturbing any stream.
    pub fn draw_at(seed: u64, stream: u64, index: u64) -> f64 {
        let mut s = NoiseStream::with_stream(seed, stream);
        s.seek(index);
        s.next_normal()
    }

    pub fn next_normal(&mut self) -> f64 {
        let a = self.rng.next_u64();
        let b = self.rng.next_u64();
        self.counter += 1;
        // u1 in (0, 1], u2 in [0, 1)
        let u1 = ((a >> 11) + 1) as f64 * (1.0 / (1u64 << 53) as f64);
        let u2 = (b >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
        math::sqrt(-2.0 * math::ln(u1)) * math::cos(TAU * u2)
    }

    pub fn normals(&mut self, k: usize) -> Vec<f64> {
        (0..k).map(|_| self.next_normal()).collect()
    }
}

/// One joint draw of a Gaussian vector, e.g. `(W(f₁), …, W(f_k))`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct JointSample {
    pub replicate: usize,
    pub values: Vec<f64>,
}

fn common_grid(fs: &[GridFunction]) -> Result<usize> {
    let first = fs.first().ok_or_else(|| Error::invalid("no test functions"))?;
    let n = first.n();
    if let Some(g) = fs.iter().find(|g| g.n() != n) {
        return Err(Error::GridMismatch { left: n, right: g.n() });
    }
    Ok(n)
}

/// `W(f_j) = Σᵢ ⟨f_j, eᵢ⟩ Xᵢ` with the orthonormal cell basis `eᵢ = √n 1_{cell i}`,
/// drawing `X₁..X_n` from `stream`.
pub fn sample_white_noise_basis(fs: &[GridFunction], stream: &mut NoiseStream) -> Result<JointSample> {
    let n = common_grid(fs)?;
    let x = stream.normals(n);
    let scale = 1.0 / math::sqrt(n as f64);
    let values = fs
        .iter()
        .map(|f| f.values().iter().zip(&x).map(|(a, b)| a * b).sum::<f64>() * scale)
        .collect();
    Ok(JointSample { replicate: 0, values })
}

/// Basis-expansion route for `Ŏ(f) = W(O* f)`. Each replicate draws from its
/// own substream.
pub fn sample_process_basis(
    o: &OperatorSpec,
    fs: &[GridFunction],
    stream: &NoiseStream,
    reps: usize,
) -> Result<Vec<JointSample>> {
    common_grid(fs)?;
    let adj = o.adjoint();
    let filtered = fs.iter().map(|f| adj.apply(f)).collect::<Result<Vec<_>>>()?;
    (0..reps)
        .map(|r| {
            let mut s = stream.replicate(r as u64);
            sample_white_noise_basis(&filtered, &mut s).map(|mut js| {
                js.replicate = r;
                js
            })
        })
        .collect()
}

/// Gram matrix `Γ_jk = ⟨O* f_j, O* f_k⟩`.
pub fn process_gram(o: &OperatorSpec, fs: &[GridFunction]) -> Result<Matrix> {
    common_grid(fs)?;
    let adj = o.adjoint();
    let filtered = fs.iter().map(|f| adj.apply(f)).collect::<Result<Vec<_>>>()?;
    let k = fs.len();
    let mut g = Matrix::zeros(k, k);
    for i in 0..k {
        for j in 0..=i {
            let v = filtered[i].inner_product(&filtered[j])?;
            g[(i, j)] = v;
            g[(j, i)] = v;
        }
    }
    Ok(g)
}

fn draw_correlated(chol: &Cholesky, stream: &NoiseStream, reps: usize) -> Vec<JointSample> {
    (0..reps)
        .map(|r| {
            let mut s = stream.replicate(r as u64);
            let z = s.normals(chol.dim());
            JointSample {
                replicate: r,
                values: chol.lower_mul(&z),
            }
        })
        .collect()
}

/// Draws from `N(0, Σ)` for a dense covariance matrix, one stream per replicate.
pub fn sample_gaussian_vector(cov: &Matrix, stream: &NoiseStream, reps: usize) -> Result<Vec<JointSample>> {
    let chol = Cholesky::with_jitter(cov)?;
    Ok(draw_correlated(&chol, stream, reps))
}

/// `(Ŏ(f₁), …, Ŏ(f_k))` drawn through the Cholesky factor of the Gram matrix.
pub fn sample_process(
    o: &OperatorSpec,
    fs: &[GridFunction],
    stream: &NoiseStream,
    reps: usize,
) -> Result<Vec<JointSample>> {
    let gram = process_gram(o, fs)?;
    let chol = Cholesky::with_jitter(&gram)?;
    Ok(draw_correlated(&chol, stream, reps))
}

/// `W(A_j)` for intervals `A_j = [a_j, b_j] ⊆ [0,1]`.
///
/// The interval endpoints partition `[0,1]` into pieces of length `ℓ_c`;
/// piece `c` carries `√ℓ_c X_c` and `W(A_j)` sums the pieces inside `A_j`,
/// which gives `Cov(W(A_j), W(A_k)) = μ(A_j ∩ A_k)` exactly.
pub fn sample_set_noise(
    sets: &[(f64, f64)],
    stream: &NoiseStream,
    reps: usize,
) -> Result<Vec<JointSample>> {
    for &(a, b) in sets {
        if !(0.0..=1.0).contains(&a) || !(0.0..=1.0).contains(&b) || a > b {
            return Err(Error::invalid("intervals must satisfy 0 <= a <= b <= 1"));
        }
    }
    let mut breaks: Vec<f64> = sets.iter().flat_map(|&(a, b)| [a, b]).chain([0.0, 1.0]).collect();
    breaks.sort_by(f64::total_cmp);
    breaks.dedup();
    let pieces = breaks.len() - 1;
    let sd: Vec<f64> = breaks.windows(2).map(|w| math::sqrt(w[1] - w[0])).collect();
    let membership: Vec<Vec<usize>> = sets
        .iter()
        .map(|&(a, b)| {
            (0..pieces)
                .filter(|&c| breaks[c] >= a && breaks[c + 1] <= b)
                .collect()
        })
        .collect();
    Ok((0..reps)
        .map(|r| {
            let mut s = stream.replicate(r as u64);
            let z: Vec<f64> = sd.iter().map(|w| w * s.next_normal()).collect();
            JointSample {
                replicate: r,
                values: membership.iter().map(|cs| cs.iter().map(|&c| z[c]).sum()).collect(),
            }
        })
        .collect())
}

/// Path values at the `n` midpoints of `[0, T]` (`T = quad.domain_end`),
/// drawn from `N(0, Σ)` with `Σᵢⱼ` the pointwise covariance.
pub fn sample_path(
    o: &OperatorSpec,
    n: usize,
    stream: &NoiseStream,
    quad: &CovarianceQuadrature,
) -> Result<GridFunction> {
    let cov = path_covariance(o, n, quad)?;
    let chol = Cholesky::with_jitter(&cov)?;
    let mut s = stream.clone();
    let z = s.normals(n);
    GridFunction::new(chol.lower_mul(&z))
}

/// Several independent paths sharing one covariance factorization.
pub fn sample_paths(
    o: &OperatorSpec,
    n: usize,
    stream: &NoiseStream,
    reps: usize,
    quad: &CovarianceQuadrature,
) -> Result<Vec<GridFunction>> {
    let cov = path_covariance(o, n, quad)?;
    let chol = Cholesky::with_jitter(&cov)?;
    draw_correlated(&chol, stream, reps)
        .into_iter()
        .map(|js| GridFunction::new(js.values))
        .collect()
}

/// `Σᵢⱼ = Cov(Ŏ(mᵢ), Ŏ(mⱼ))` at the midpoints of `[0, T]`.
pub fn path_covariance(o: &OperatorSpec, n: usize, quad: &CovarianceQuadrature) -> Result<Matrix> {
    if n == 0 {
        return Err(Error::invalid("n must be positive"));
    }
    let pts: Vec<f64> = (0..n).map(|i| quad.domain_end * midpoint(i, n)).collect();
    let mut cov = Matrix::zeros(n, n);
    for i in 0..n {
        for j in 0..=i {
            let c = pointwise_covariance(o, pts[i], pts[j], quad)?;
            cov[(i, j)] = c;
            cov[(j, i)] = c;
        }
    }
    Ok(cov)
}

/// Unbiased sample covariance of the replicate vectors.
pub fn empirical_cov(samples: &[JointSample]) -> Result<Matrix> {
    if samples.len() < 2 {
        return Err(Error::invalid("need at least 2 replicates"));
    }
    let k = samples[0].values.len();
    if samples.iter().any(|s| s.values.len() != k) {
        return Err(Error::invalid("replicates have different lengths"));
    }
    let reps = samples.len() as f64;
    let mean: Vec<f64> = (0..k)
        .map(|j| samples.iter().map(|s| s.values[j]).sum::<f64>() / reps)
        .collect();
    let mut cov = Matrix::zeros(k, k);
    for s in samples {
        for i in 0..k {
            let di = s.values[i] - mean[i];
            for j in 0..=i {
                cov[(i, j)] += di * (s.values[j] - mean[j]);
            }
        }
    }
    for i in 0..k {
        for j in 0..=i {
            let v = cov[(i, j)] / (reps - 1.0);
            cov[(i, j)] = v;
            cov[(j, i)] = v;
        }
    }
    Ok(cov)
}
