//! Online EM for Gaussian mixtures by stochastic approximation of the
//! expected complete-data sufficient statistics.

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::mixture::MixtureState;
use crate::mvn::{CovMatrix, GaussianParams};
use crate::scalar::Scalar;

/// Regularization applied by every M-step.
#[derive(Clone, Copy, Debug)]
pub struct MStepConfig<T> {
    /// Relative ridge: `ridge · trace(Σ)/d` is added to the diagonal.
    pub ridge: T,
    /// Lower clamp on component weights before renormalization.
    pub weight_floor: T,
}

impl<T: Scalar> Default for MStepConfig<T> {
    fn default() -> Self {
        MStepConfig {
            ridge: T::cst(1e-6),
            weight_floor: T::cst(1e-4),
        }
    }
}

/// Per-component running averages of `(1, x, x xᵀ)` weighted by responsibilities.
#[derive(Clone, Debug)]
pub struct SuffStats<T> {
    pub theta0: Vec<T>,
    pub theta1: Vec<Vec<T>>,
    pub theta2: Vec<Matrix<T>>,
    /// Observations absorbed so far, counting the prior pseudo-observations.
    pub n: usize,
}

impl<T: Scalar> SuffStats<T> {
    /// Statistics reproducing `m` exactly, worth `prior_weight` observations.
    pub fn from_mixture(m: &MixtureState<T>, prior_weight: usize) -> Self {
        let mut theta0 = Vec::with_capacity(m.k());
        let mut theta1 = Vec::with_capacity(m.k());
        let mut theta2 = Vec::with_capacity(m.k());
        for (&w, c) in m.weights().iter().zip(m.components()) {
            theta0.push(w);
            theta1.push(c.mean.iter().map(|&v| w * v).collect());
            let mut second = c.cov.entries().clone();
            second.add_outer(T::one(), &c.mean, &c.mean);
            theta2.push(second.scale(w));
        }
        SuffStats {
            theta0,
            theta1,
            theta2,
            n: prior_weight,
        }
    }

    pub fn k(&self) -> usize {
        self.theta0.len()
    }

    /// `1/(n+1)`, the weight the next observation receives.
    pub fn next_step_weight(&self) -> T {
        T::one() / T::from_count(self.n + 1)
    }
}

/// Posterior membership probabilities `νᵏ ∝ βᵏ N(x; μᵏ, Σᵏ)`, computed in log space.
pub fn responsibilities<T: Scalar>(x: &[T], m: &MixtureState<T>) -> Result<Vec<T>> {
    Error::check_dim(m.dim(), x.len())?;
    let logs: Vec<T> = m
        .weights()
        .iter()
        .zip(m.components())
        .map(|(&w, c)| w.ln() + c.log_pdf_unchecked(x))
        .collect();
    let top = logs.iter().copied().fold(T::neg_infinity(), T::max);
    if !top.is_finite() {
        return Err(Error::Domain("all component densities vanish".into()));
    }
    let w: Vec<T> = logs.into_iter().map(|l| (l - top).exp()).collect();
    let total: T = w.iter().copied().sum();
    Ok(w.into_iter().map(|v| v / total).collect())
}

/// Maps sufficient statistics to mixture parameters. Components whose
/// statistics cannot produce an SPD covariance keep their parameters from `prev`.
pub fn maximize<T: Scalar>(
    s: &SuffStats<T>,
    prev: &MixtureState<T>,
    cfg: &MStepConfig<T>,
) -> MixtureState<T> {
    let dim = prev.dim();
    let d = T::from_count(dim);
    let tiny = T::min_positive_value().sqrt();
    let mut components = Vec::with_capacity(s.k());
    for k in 0..s.k() {
        let t0 = s.theta0[k];
        if !(t0 > tiny) {
            components.push(prev.component(k).clone());
            continue;
        }
        let mean: Vec<T> = s.theta1[k].iter().map(|&v| v / t0).collect();
        let mut cov = s.theta2[k].scale(T::one() / t0);
        cov.add_outer(-T::one(), &mean, &mean);
        cov.symmetrize();
        let tr = cov.trace();
        if tr > T::zero() {
            cov.add_diagonal(cfg.ridge * tr / d);
        }
        let next = CovMatrix::new(cov)
            .and_then(|c| GaussianParams::new(mean.clone(), c))
            .unwrap_or_else(|_| GaussianParams {
                mean,
                cov: prev.component(k).cov.clone(),
            });
        components.push(next);
    }
    let floored: Vec<T> = s.theta0.iter().map(|&w| w.max(cfg.weight_floor)).collect();
    let total: T = floored.iter().copied().sum();
    let weights = floored.into_iter().map(|w| w / total).collect();
    MixtureState::new(weights, components).unwrap_or_else(|_| prev.clone())
}

/// One stochastic-approximation step `θ ← (1−γ) θ + γ ν(x) T(x)` followed by
/// the M-step. `γ = 0` returns the inputs unchanged.
pub fn em_update<T: Scalar>(
    s: &SuffStats<T>,
    x: &[T],
    m: &MixtureState<T>,
    gamma: T,
    cfg: &MStepConfig<T>,
) -> (SuffStats<T>, MixtureState<T>) {
    if gamma == T::zero() {
        return (s.clone(), m.clone());
    }
    let nu = match responsibilities(x, m) {
        Ok(nu) => nu,
        Err(_) => return (s.clone(), m.clone()),
    };
    let keep = T::one() - gamma;
    let mut next = s.clone();
    let xx = Matrix::outer(x, x);
    for (k, &nu_k) in nu.iter().enumerate() {
        let g = gamma * nu_k;
        next.theta0[k] = keep * next.theta0[k] + g;
        for (t, &xi) in next.theta1[k].iter_mut().zip(x) {
            *t = keep * *t + g * xi;
        }
        next.theta2[k].axpby(keep, g, &xx);
    }
    let mixture = maximize(&next, m, cfg);
    (next, mixture)
}

/// Recursive estimator with the `γₙ = 1/n` schedule.
#[derive(Clone, Debug)]
pub struct OnlineEm<T> {
    stats: SuffStats<T>,
    mixture: MixtureState<T>,
    config: MStepConfig<T>,
}

impl<T: Scalar> OnlineEm<T> {
    /// Starts from `init`, which counts as `prior_weight` pseudo-observations.
    pub fn new(init: MixtureState<T>, prior_weight: usize, config: MStepConfig<T>) -> Self {
        OnlineEm {
            stats: SuffStats::from_mixture(&init, prior_weight),
            mixture: init,
            config,
        }
    }

    pub fn observe(&mut self, x: &[T]) {
        let gamma = self.stats.next_step_weight();
        let (stats, mixture) = em_update(&self.stats, x, &self.mixture, gamma, &self.config);
        self.stats = stats;
        self.stats.n += 1;
        self.mixture = mixture;
    }

    pub fn mixture(&self) -> &MixtureState<T> {
        &self.mixture
    }

    pub fn stats(&self) -> &SuffStats<T> {
        &self.stats
    }
}
