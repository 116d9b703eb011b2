//! Comparison metrics: acceptance rate, MSE/bias of sample means, and the
//! squared ECDF distance to the target CDF.

use rand::RngCore;

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::targets::Target;

/// Componentwise-dominance counter over a fixed sample set.
///
/// For each coordinate the samples are ranked, and bitsets marking the first
/// `j·stride` ranks are stored. A query ANDs one (patched) bitset per
/// coordinate and counts the surviving bits.
#[derive(Clone, Debug)]
pub struct Ecdf<T> {
    dim: usize,
    n: usize,
    words: usize,
    stride: usize,
    sorted_vals: Vec<Vec<T>>,
    sorted_idx: Vec<Vec<u32>>,
    /// `prefix[c][j]` marks the samples of rank `< j·stride` in coordinate `c`.
    prefix: Vec<Vec<Vec<u64>>>,
}

/// Upper bound on the prefix-bitset tables, in bytes.
const ECDF_TABLE_BYTES: usize = 64 << 20;

impl<T: Scalar> Ecdf<T> {
    pub fn new(samples: &[Vec<T>]) -> Result<Self> {
        let first = samples.first().ok_or(Error::EmptySample)?;
        let dim = first.len();
        for x in samples {
            Error::check_dim(dim, x.len())?;
        }
        let n = samples.len();
        let words = n.div_ceil(64);
        let by_memory = (dim * n * words * 8).div_ceil(ECDF_TABLE_BYTES);
        let stride = by_memory.max(256).next_multiple_of(64);
        let mut sorted_idx = Vec::with_capacity(dim);
        let mut sorted_vals = Vec::with_capacity(dim);
        let mut prefix = Vec::with_capacity(dim);
        for c in 0..dim {
            let mut idx: Vec<u32> = (0..n as u32).collect();
            idx.sort_by(|&a, &b| samples[a as usize][c].total_cmp_scalar(&samples[b as usize][c]));
            sorted_vals.push(idx.iter().map(|&i| samples[i as usize][c]).collect());
            let mut tables = Vec::with_capacity(n / stride + 1);
            let mut bits = vec![0u64; words];
            tables.push(bits.clone());
            for chunk in idx.chunks(stride) {
                if chunk.len() < stride {
                    break;
                }
                for &i in chunk {
                    bits[i as usize / 64] |= 1 << (i % 64);
                }
                tables.push(bits.clone());
            }
            prefix.push(tables);
            sorted_idx.push(idx);
        }
        Ok(Ecdf {
            dim,
            n,
            words,
            stride,
            sorted_vals,
            sorted_idx,
            prefix,
        })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of samples `x` with `x ≤ z` in every coordinate.
    pub fn count_below(&self, z: &[T]) -> usize {
        debug_assert_eq!(z.len(), self.dim);
        let cuts: Vec<usize> = (0..self.dim)
            .map(|c| self.sorted_vals[c].partition_point(|&v| v <= z[c]))
            .collect();
        let min = cuts.iter().copied().min().unwrap_or(0);
        if min == 0 || self.dim == 1 {
            return min;
        }
        let mut acc = vec![u64::MAX; self.words];
        let mut scratch = vec![0u64; self.words];
        for (c, &cut) in cuts.iter().enumerate() {
            if cut == self.n {
                continue;
            }
            let j = cut / self.stride;
            scratch.copy_from_slice(&self.prefix[c][j]);
            for &i in &self.sorted_idx[c][j * self.stride..cut] {
                scratch[i as usize / 64] |= 1 << (i % 64);
            }
            for (a, &s) in acc.iter_mut().zip(&scratch) {
                *a &= s;
            }
        }
        let full = self.n / 64;
        let mut count: usize = acc[..full].iter().map(|w| w.count_ones() as usize).sum();
        if full < self.words {
            count += (acc[full] & ((1u64 << (self.n % 64)) - 1)).count_ones() as usize;
        }
        count
    }

    pub fn eval(&self, z: &[T]) -> T {
        T::from_count(self.count_below(z)) / T::from_count(self.n)
    }
}

trait TotalCmp {
    fn total_cmp_scalar(&self, other: &Self) -> std::cmp::Ordering;
}

impl<T: Scalar> TotalCmp for T {
    fn total_cmp_scalar(&self, other: &Self) -> std::cmp::Ordering {
        self.partial_cmp(other)
            .unwrap_or_else(|| self.is_nan().cmp(&other.is_nan()))
    }
}

/// `(1/n) #{t : X_t ≤ z}`, componentwise and inclusive.
pub fn ecdf_eval<T: Scalar>(samples: &[Vec<T>], z: &[T]) -> Result<T> {
    if samples.is_empty() {
        return Err(Error::EmptySample);
    }
    Error::check_dim(samples[0].len(), z.len())?;
    let hits = samples
        .iter()
        .filter(|x| x.iter().zip(z).all(|(&a, &b)| a <= b))
        .count();
    Ok(T::from_count(hits) / T::from_count(samples.len()))
}

/// Evaluation points `y_j` with their target CDF values `F(y_j)`.
#[derive(Clone, Debug)]
pub struct OracleSet<T> {
    pub points: Vec<Vec<T>>,
    pub cdf: Vec<T>,
}

impl<T: Scalar> OracleSet<T> {
    pub fn new(points: Vec<Vec<T>>, cdf: Vec<T>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::EmptySample);
        }
        Error::check_dim(points.len(), cdf.len())?;
        Ok(OracleSet { points, cdf })
    }

    /// `m` i.i.d. target draws, scored with the closed-form CDF.
    pub fn from_target(target: &dyn Target<T>, m: usize, rng: &mut dyn RngCore) -> Result<Self> {
        let points = draw_iid(target, m, rng)?;
        let cdf = points
            .iter()
            .map(|y| target.cdf(y).ok_or(Error::MissingCdf))
            .collect::<Result<Vec<_>>>()?;
        Self::new(points, cdf)
    }

    /// `m` i.i.d. target draws, scored with the ECDF of `reference` draws.
    pub fn from_reference(
        target: &dyn Target<T>,
        m: usize,
        reference: usize,
        rng: &mut dyn RngCore,
    ) -> Result<Self> {
        let points = draw_iid(target, m, rng)?;
        let refs = Ecdf::new(&draw_iid(target, reference, rng)?)?;
        let cdf = points.iter().map(|y| refs.eval(y)).collect();
        Self::new(points, cdf)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

fn draw_iid<T: Scalar>(
    target: &dyn Target<T>,
    m: usize,
    rng: &mut dyn RngCore,
) -> Result<Vec<Vec<T>>> {
    (0..m)
        .map(|_| {
            target
                .sample_iid(rng)
                .ok_or_else(|| Error::Target("target has no i.i.d. sampler".into()))
        })
        .collect()
}

/// `(1/M) Σ_j |F_n(y_j) − F(y_j)|²` with `F_n` the ECDF of `samples`.
pub fn dn_hat<T: Scalar>(samples: &[Vec<T>], oracle: &OracleSet<T>) -> Result<T> {
    let ecdf = Ecdf::new(samples)?;
    Error::check_dim(ecdf.dim(), oracle.points[0].len())?;
    let m = T::from_count(oracle.len());
    Ok(oracle
        .points
        .iter()
        .zip(&oracle.cdf)
        .map(|(y, &f)| {
            let e = ecdf.eval(y) - f;
            e * e
        })
        .sum::<T>()
        / m)
}

/// [`dn_hat`] with `F` supplied as a function; `None` from `cdf` is a missing CDF.
pub fn dn_hat_with<T: Scalar>(
    samples: &[Vec<T>],
    oracle_draws: &[Vec<T>],
    cdf: impl Fn(&[T]) -> Option<T>,
) -> Result<T> {
    let values = oracle_draws
        .iter()
        .map(|y| cdf(y).ok_or(Error::MissingCdf))
        .collect::<Result<Vec<_>>>()?;
    dn_hat(samples, &OracleSet::new(oracle_draws.to_vec(), values)?)
}

/// Mean over replicates.
pub fn dn_bar<T: Scalar>(values: &[T]) -> Result<T> {
    if values.is_empty() {
        return Err(Error::EmptyInput);
    }
    Ok(values.iter().copied().sum::<T>() / T::from_count(values.len()))
}

/// Per-coordinate `(mse, bias)` of replicate means against `truth`.
pub fn mse_bias<T: Scalar>(replicate_means: &[Vec<T>], truth: &[T]) -> Result<(Vec<T>, Vec<T>)> {
    if replicate_means.is_empty() {
        return Err(Error::EmptyInput);
    }
    let d = truth.len();
    let mut mse = vec![T::zero(); d];
    let mut bias = vec![T::zero(); d];
    let b = T::from_count(replicate_means.len());
    for m in replicate_means {
        Error::check_dim(d, m.len())?;
        for i in 0..d {
            let e = m[i] - truth[i];
            mse[i] += e * e / b;
            bias[i] += e / b;
        }
    }
    Ok((mse, bias))
}

/// Coordinate-wise sample mean.
pub fn sample_mean<T: Scalar>(samples: &[Vec<T>]) -> Result<Vec<T>> {
    let first = samples.first().ok_or(Error::EmptySample)?;
    let n = T::from_count(samples.len());
    let mut m = vec![T::zero(); first.len()];
    for x in samples {
        Error::check_dim(m.len(), x.len())?;
        for (a, &v) in m.iter_mut().zip(x) {
            *a += v;
        }
    }
    m.iter_mut().for_each(|a| *a /= n);
    Ok(m)
}

/// Per-replicate metrics; `mse` and `bias` here are the single-replicate
/// squared and signed errors of `coord_means`.
#[derive(Clone, Debug, PartialEq)]
pub struct RunSummary {
    pub acceptance_rate: f64,
    pub coord_means: Vec<f64>,
    pub mse: Vec<f64>,
    pub bias: Vec<f64>,
    pub dn_hat: Option<f64>,
}

impl RunSummary {
    pub fn new(
        acceptance_rate: f64,
        coord_means: Vec<f64>,
        truth: Option<&[f64]>,
        dn_hat: Option<f64>,
    ) -> Self {
        let (mse, bias) = match truth {
            Some(t) => coord_means
                .iter()
                .zip(t)
                .map(|(&m, &v)| ((m - v) * (m - v), m - v))
                .unzip(),
            None => (Vec::new(), Vec::new()),
        };
        RunSummary {
            acceptance_rate,
            coord_means,
            mse,
            bias,
            dn_hat,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KsResult {
    pub statistic: f64,
    pub p_value: f64,
}

/// Kolmogorov survival function `Q(λ) = 2 Σ (−1)^{k−1} e^{−2k²λ²}`.
pub fn kolmogorov_q(lambda: f64) -> f64 {
    if lambda < 0.2 {
        return 1.0;
    }
    let mut sum = 0.0;
    let mut sign = 1.0;
    for k in 1..=200 {
        let term = (-2.0 * (k * k) as f64 * lambda * lambda).exp();
        sum += sign * term;
        if term < 1e-16 * sum.abs() {
            break;
        }
        sign = -sign;
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

/// Two-sample Kolmogorov–Smirnov test with the asymptotic p-value.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> Result<KsResult> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptySample);
    }
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j, mut d) = (0, 0, 0.0f64);
    while i < a.len() && j < b.len() {
        let v = a[i].min(b[j]);
        while i < a.len() && a[i] <= v {
            i += 1;
        }
        while j < b.len() && b[j] <= v {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    let ne = na * nb / (na + nb);
    let sq = ne.sqrt();
    Ok(KsResult {
        statistic: d,
        p_value: kolmogorov_q((sq + 0.12 + 0.11 / sq) * d),
    })
}
