//! Random-walk Metropolis–Hastings with adaptive proposals.

mod moments;
mod policy;

pub use moments::RunningMoments;
pub use policy::{
    eps_d, AmPolicy, HalfSpace, Partition, ProposalKernel, ProposalPolicy, RaptPolicy,
    RaptorPolicy, COV_RIDGE,
};

use rand::Rng;

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::targets::Target;

#[derive(Clone, Debug, PartialEq)]
pub struct ChainState<T> {
    pub x: Vec<T>,
    pub logpi: T,
    pub steps: u64,
    pub accepts: u64,
}

impl<T: Scalar> ChainState<T> {
    /// Starts a chain at `x`, which must have positive target density.
    pub fn new(x: Vec<T>, target: &dyn Target<T>) -> Result<Self> {
        Error::check_dim(target.dim(), x.len())?;
        let logpi = target.log_density(&x);
        if logpi.is_nan() || logpi == T::neg_infinity() {
            return Err(Error::Target(format!(
                "start point has log density {logpi}"
            )));
        }
        Ok(ChainState {
            x,
            logpi,
            steps: 0,
            accepts: 0,
        })
    }

    pub fn acceptance_rate(&self) -> f64 {
        if self.steps == 0 {
            0.0
        } else {
            self.accepts as f64 / self.steps as f64
        }
    }
}

/// Log Metropolis–Hastings ratio for moving `x → y` under `kernel`.
pub fn log_mh_ratio<T: Scalar>(
    x: &[T],
    logpi_x: T,
    y: &[T],
    logpi_y: T,
    kernel: &ProposalKernel<T>,
) -> T {
    let mut r = logpi_y - logpi_x;
    if !kernel.is_symmetric() {
        r += kernel.log_density(y, x) - kernel.log_density(x, y);
    }
    r
}

/// One Metropolis–Hastings transition. Returns whether the proposal was accepted.
pub fn mh_step<T: Scalar, R: Rng + ?Sized>(
    chain: &mut ChainState<T>,
    kernel: &ProposalKernel<T>,
    target: &dyn Target<T>,
    rng: &mut R,
) -> Result<bool> {
    let y = kernel.propose(&chain.x, rng);
    let logpi_y = target.log_density(&y);
    if logpi_y.is_nan() {
        return Err(Error::Target(format!("log density is NaN at {y:?}")));
    }
    chain.steps += 1;
    if logpi_y == T::neg_infinity() {
        return Ok(false);
    }
    let r = log_mh_ratio(&chain.x, chain.logpi, &y, logpi_y, kernel);
    let accept = r >= T::zero() || {
        let u: f64 = rng.random();
        T::cst(u).ln() < r
    };
    if accept {
        chain.x = y;
        chain.logpi = logpi_y;
        chain.accepts += 1;
    }
    Ok(accept)
}

#[cfg(test)]
mod tests;
