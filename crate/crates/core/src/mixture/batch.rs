use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::mixture::online::{maximize, responsibilities, MStepConfig, SuffStats};
use crate::mixture::MixtureState;
use crate::mvn::{CovMatrix, GaussianParams};
use crate::scalar::{log_sum_exp, Scalar};

#[derive(Clone, Debug)]
pub struct BatchEmResult<T> {
    pub mixture: MixtureState<T>,
    pub iterations: usize,
    /// Mean log-likelihood per sample at the returned parameters.
    pub mean_log_likelihood: T,
}

fn mean_log_likelihood<T: Scalar>(samples: &[Vec<T>], m: &MixtureState<T>) -> T {
    let n = T::from_count(samples.len());
    let mut logs = vec![T::zero(); m.k()];
    samples
        .iter()
        .map(|x| {
            for (l, (&w, c)) in logs.iter_mut().zip(m.weights().iter().zip(m.components())) {
                *l = w.ln() + c.log_pdf_unchecked(x);
            }
            log_sum_exp(&logs)
        })
        .sum::<T>()
        / n
}

/// Classical EM from `init`, stopping when the mean log-likelihood moves by
/// less than `tol` or after `max_iter` iterations.
pub fn batch_em<T: Scalar>(
    samples: &[Vec<T>],
    init: MixtureState<T>,
    cfg: &MStepConfig<T>,
    tol: T,
    max_iter: usize,
) -> Result<BatchEmResult<T>> {
    if samples.is_empty() {
        return Err(Error::EmptySample);
    }
    let dim = init.dim();
    for x in samples {
        Error::check_dim(dim, x.len())?;
    }
    let inv_n = T::one() / T::from_count(samples.len());
    let mut mixture = init;
    let mut ll = mean_log_likelihood(samples, &mixture);
    let mut iterations = 0;
    while iterations < max_iter {
        iterations += 1;
        let k = mixture.k();
        let mut stats = SuffStats {
            theta0: vec![T::zero(); k],
            theta1: vec![vec![T::zero(); dim]; k],
            theta2: vec![Matrix::zeros(dim, dim); k],
            n: samples.len(),
        };
        for x in samples {
            let nu = responsibilities(x, &mixture)?;
            for (j, &v) in nu.iter().enumerate() {
                let w = v * inv_n;
                stats.theta0[j] += w;
                for (t, &xi) in stats.theta1[j].iter_mut().zip(x) {
                    *t += w * xi;
                }
                stats.theta2[j].add_outer(w, x, x);
            }
        }
        mixture = maximize(&stats, &mixture, cfg);
        let next = mean_log_likelihood(samples, &mixture);
        let delta = (next - ll).abs();
        ll = next;
        if delta < tol {
            break;
        }
    }
    Ok(BatchEmResult {
        mixture,
        iterations,
        mean_log_likelihood: ll,
    })
}

/// Deterministic starting mixture: samples are sorted along their highest-variance
/// coordinate and cut into `k` equal slabs, each contributing its own moments.
pub fn quantile_split_init<T: Scalar>(
    samples: &[Vec<T>],
    k: usize,
    cfg: &MStepConfig<T>,
) -> Result<MixtureState<T>> {
    if k == 0 {
        return Err(Error::Domain("mixture needs at least one component".into()));
    }
    if samples.len() < 2 * k {
        return Err(Error::Domain(format!(
            "{} samples cannot seed {k} components",
            samples.len()
        )));
    }
    let dim = samples[0].len();
    let n = T::from_count(samples.len());
    let spread = |j: usize| {
        let m: T = samples.iter().map(|x| x[j]).sum::<T>() / n;
        samples.iter().map(|x| (x[j] - m) * (x[j] - m)).sum::<T>()
    };
    let axis = (0..dim)
        .max_by(|&a, &b| {
            spread(a)
                .partial_cmp(&spread(b))
                .unwrap_or(std::cmp::Ordering::Equal)
        })
        .unwrap_or(0);
    let mut idx: Vec<usize> = (0..samples.len()).collect();
    idx.sort_by(|&a, &b| {
        samples[a][axis]
            .partial_cmp(&samples[b][axis])
            .unwrap_or(std::cmp::Ordering::Equal)
    });

    let mut components = Vec::with_capacity(k);
    let mut weights = Vec::with_capacity(k);
    for c in 0..k {
        let chunk = &idx[c * samples.len() / k..(c + 1) * samples.len() / k];
        let cn = T::from_count(chunk.len());
        let mut mean = vec![T::zero(); dim];
        for &i in chunk {
            for (m, &v) in mean.iter_mut().zip(&samples[i]) {
                *m += v / cn;
            }
        }
        let mut cov = Matrix::zeros(dim, dim);
        for &i in chunk {
            let d: Vec<T> = samples[i].iter().zip(&mean).map(|(&a, &b)| a - b).collect();
            cov.add_outer(T::one() / cn, &d, &d);
        }
        let tr = cov.trace();
        cov.add_diagonal(cfg.ridge.max(T::cst(1e-6)) * tr.max(T::one()) / T::from_count(dim));
        components.push(GaussianParams::new(mean, CovMatrix::new(cov)?)?);
        weights.push(cn / n);
    }
    MixtureState::new(weights, components)
}
