//! Proposal policies. A policy owns the adaptation state; [`ProposalKernel`]
//! is the immutable snapshot chains propose from between adaptation points.

use rand::Rng;

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::mixture::{region_assign, MStepConfig, MixtureState, OnlineEm};
use crate::mvn::{sample_around, CovMatrix};
use crate::samplers::moments::RunningMoments;
use crate::scalar::{log_add_exp, Scalar};

/// Absolute ridge added to empirical covariances before scaling.
pub const COV_RIDGE: f64 = 1e-6;

/// Optimal random-walk scale `2.38²/d`.
pub fn eps_d<T: Scalar>(dim: usize) -> T {
    T::cst(2.38 * 2.38) / T::from_count(dim)
}

/// Fixed two-region split `{a·x ≤ b}` (region 1) and its complement (region 2).
#[derive(Clone, Debug, PartialEq)]
pub struct HalfSpace<T> {
    pub normal: Vec<T>,
    pub offset: T,
}

impl<T: Scalar> HalfSpace<T> {
    pub fn new(normal: Vec<T>, offset: T) -> Self {
        HalfSpace { normal, offset }
    }

    /// 0-based region index.
    pub fn side(&self, x: &[T]) -> usize {
        let dot: T = self.normal.iter().zip(x).map(|(&a, &b)| a * b).sum();
        usize::from(dot > self.offset)
    }
}

#[derive(Clone, Debug)]
pub enum Partition<T> {
    HalfSpace(HalfSpace<T>),
    Mixture(MixtureState<T>),
}

impl<T: Scalar> Partition<T> {
    pub fn region(&self, x: &[T]) -> usize {
        match self {
            Partition::HalfSpace(h) => h.side(x),
            Partition::Mixture(m) => region_assign(x, m).index(),
        }
    }
}

#[derive(Clone, Debug)]
pub enum ProposalKernel<T> {
    /// `y ~ N(x, Σ)`.
    Gaussian { cov: CovMatrix<T> },
    /// `y ~ (1−α) N(x, Σ_{k(x)}) + α N(x, Σ_w)` with `k(x)` from the partition.
    Regional {
        alpha: T,
        local: Vec<CovMatrix<T>>,
        whole: CovMatrix<T>,
        partition: Partition<T>,
    },
}

impl<T: Scalar> ProposalKernel<T> {
    pub fn propose<R: Rng + ?Sized>(&self, x: &[T], rng: &mut R) -> Vec<T> {
        match self {
            ProposalKernel::Gaussian { cov } => sample_around(x, cov, rng),
            ProposalKernel::Regional {
                alpha,
                local,
                whole,
                partition,
            } => {
                let u: f64 = rng.random();
                if T::cst(u) < *alpha {
                    sample_around(x, whole, rng)
                } else {
                    sample_around(x, &local[partition.region(x)], rng)
                }
            }
        }
    }

    /// `log q(from → to)`.
    pub fn log_density(&self, from: &[T], to: &[T]) -> T {
        let diff: Vec<T> = to.iter().zip(from).map(|(&a, &b)| a - b).collect();
        match self {
            ProposalKernel::Gaussian { cov } => cov.log_kernel(&diff),
            ProposalKernel::Regional {
                alpha,
                local,
                whole,
                partition,
            } => {
                let k = partition.region(from);
                log_add_exp(
                    (T::one() - *alpha).ln() + local[k].log_kernel(&diff),
                    alpha.ln() + whole.log_kernel(&diff),
                )
            }
        }
    }

    /// Whether `q(x → y) = q(y → x)` for all pairs, so the Hastings term vanishes.
    pub fn is_symmetric(&self) -> bool {
        match self {
            ProposalKernel::Gaussian { .. } => true,
            ProposalKernel::Regional { local, .. } => local.len() == 1,
        }
    }
}

fn regularized_scaled<T: Scalar>(
    cov: Option<Matrix<T>>,
    fallback: &CovMatrix<T>,
    eps: T,
) -> CovMatrix<T> {
    cov.and_then(|mut c| {
        c.symmetrize();
        c.add_diagonal(T::cst(COV_RIDGE));
        CovMatrix::new(c).ok()
    })
    .unwrap_or_else(|| fallback.clone())
    .scaled(eps)
}

/// Adaptive Metropolis: one global covariance from all observed states.
#[derive(Clone, Debug)]
pub struct AmPolicy<T> {
    pub moments: RunningMoments<T>,
    pub initial: CovMatrix<T>,
    pub eps: T,
}

impl<T: Scalar> AmPolicy<T> {
    pub fn new(moments: RunningMoments<T>, initial: CovMatrix<T>) -> Self {
        let eps = eps_d(initial.dim());
        AmPolicy {
            moments,
            initial,
            eps,
        }
    }

    pub fn proposal_cov(&self) -> CovMatrix<T> {
        regularized_scaled(self.moments.covariance(), &self.initial, self.eps)
    }
}

/// Regional adaptation with a fixed half-space boundary.
#[derive(Clone, Debug)]
pub struct RaptPolicy<T> {
    pub boundary: HalfSpace<T>,
    pub regional: [RunningMoments<T>; 2],
    pub whole: RunningMoments<T>,
    pub initial_regional: [CovMatrix<T>; 2],
    pub initial_whole: CovMatrix<T>,
    pub alpha: T,
    pub eps: T,
}

impl<T: Scalar> RaptPolicy<T> {
    pub fn observe(&mut self, x: &[T]) {
        self.regional[self.boundary.side(x)].update(x);
        self.whole.update(x);
    }
}

/// Regions and local covariances from an online-EM mixture fit.
#[derive(Clone, Debug)]
pub struct RaptorPolicy<T> {
    pub em: OnlineEm<T>,
    pub alpha: T,
    pub eps: T,
}

impl<T: Scalar> RaptorPolicy<T> {
    pub fn new(init: MixtureState<T>, prior_weight: usize, alpha: T) -> Self {
        let eps = eps_d(init.dim());
        RaptorPolicy {
            em: OnlineEm::new(init, prior_weight, MStepConfig::default()),
            alpha,
            eps,
        }
    }

    pub fn mixture(&self) -> &MixtureState<T> {
        self.em.mixture()
    }
}

#[derive(Clone, Debug)]
pub enum ProposalPolicy<T> {
    /// Non-adaptive random walk with a fixed (already scaled) covariance.
    Fixed(CovMatrix<T>),
    Am(AmPolicy<T>),
    Rapt(RaptPolicy<T>),
    Raptor(RaptorPolicy<T>),
}

impl<T: Scalar> ProposalPolicy<T> {
    pub fn check_alpha(alpha: T) -> Result<()> {
        if alpha > T::zero() && alpha < T::one() {
            Ok(())
        } else {
            Err(Error::Domain(format!("alpha = {alpha} not in (0,1)")))
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            ProposalPolicy::Fixed(c) => c.dim(),
            ProposalPolicy::Am(p) => p.initial.dim(),
            ProposalPolicy::Rapt(p) => p.initial_whole.dim(),
            ProposalPolicy::Raptor(p) => p.mixture().dim(),
        }
    }

    /// Feeds one chain state to the adaptation estimators.
    pub fn observe(&mut self, x: &[T]) {
        match self {
            ProposalPolicy::Fixed(_) => {}
            ProposalPolicy::Am(p) => p.moments.update(x),
            ProposalPolicy::Rapt(p) => p.observe(x),
            ProposalPolicy::Raptor(p) => p.em.observe(x),
        }
    }

    /// Snapshot of the current proposal.
    pub fn kernel(&self) -> ProposalKernel<T> {
        match self {
            ProposalPolicy::Fixed(cov) => ProposalKernel::Gaussian { cov: cov.clone() },
            ProposalPolicy::Am(p) => ProposalKernel::Gaussian {
                cov: p.proposal_cov(),
            },
            ProposalPolicy::Rapt(p) => ProposalKernel::Regional {
                alpha: p.alpha,
                local: (0..2)
                    .map(|k| {
                        regularized_scaled(
                            p.regional[k].covariance(),
                            &p.initial_regional[k],
                            p.eps,
                        )
                    })
                    .collect(),
                whole: regularized_scaled(p.whole.covariance(), &p.initial_whole, p.eps),
                partition: Partition::HalfSpace(p.boundary.clone()),
            },
            ProposalPolicy::Raptor(p) => {
                let m = p.mixture();
                ProposalKernel::Regional {
                    alpha: p.alpha,
                    local: m.components().iter().map(|c| c.cov.scaled(p.eps)).collect(),
                    whole: m.whole().cov.scaled(p.eps),
                    partition: Partition::Mixture(m.clone()),
                }
            }
        }
    }

    /// Mixture estimate, for RAPTOR policies.
    pub fn mixture(&self) -> Option<&MixtureState<T>> {
        match self {
            ProposalPolicy::Raptor(p) => Some(p.mixture()),
            _ => None,
        }
    }
}
