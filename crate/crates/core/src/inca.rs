//! Pooled inter-chain adaptation: M chains step against one policy snapshot,
//! then their new states feed the shared estimator in chain order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::samplers::{mh_step, ChainState, ProposalKernel, ProposalPolicy};
use crate::scalar::Scalar;
use crate::targets::Target;

/// Maps a 1-based pooled index to `(chain, time)`, both 1-based.
pub fn pool_index(k: usize, m: usize) -> Result<(usize, usize)> {
    if k < 1 || m < 1 {
        return Err(Error::Domain(format!(
            "pool_index needs k, M >= 1 (k = {k}, M = {m})"
        )));
    }
    let j = (k + m - 1) / m;
    Ok((k - m * (j - 1), j))
}

/// Inverse of [`pool_index`].
pub fn pooled_position(chain: usize, time: usize, m: usize) -> usize {
    m * (time - 1) + chain
}

/// Independent generator for stream `stream` under `seed`.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

#[derive(Clone, Debug)]
pub struct ChainPool<T> {
    chains: Vec<ChainState<T>>,
    rngs: Vec<ChaCha8Rng>,
    policy: ProposalPolicy<T>,
    kernel: ProposalKernel<T>,
    adapt: bool,
    sweep: usize,
}

impl<T: Scalar> ChainPool<T> {
    /// One chain per start; chain `i` draws from `rngs[i]`.
    pub fn new(
        starts: Vec<Vec<T>>,
        rngs: Vec<ChaCha8Rng>,
        policy: ProposalPolicy<T>,
        target: &dyn Target<T>,
    ) -> Result<Self> {
        if starts.is_empty() {
            return Err(Error::Domain("a pool needs at least one chain".into()));
        }
        if rngs.len() != starts.len() {
            return Err(Error::DimensionMismatch {
                expected: starts.len(),
                found: rngs.len(),
            });
        }
        Error::check_dim(target.dim(), policy.dim())?;
        let chains = starts
            .into_iter()
            .map(|x| ChainState::new(x, target))
            .collect::<Result<Vec<_>>>()?;
        let kernel = policy.kernel();
        Ok(ChainPool {
            chains,
            rngs,
            policy,
            kernel,
            adapt: true,
            sweep: 0,
        })
    }

    /// Disables (or re-enables) adaptation; a frozen pool keeps its current kernel.
    pub fn set_adapt(&mut self, adapt: bool) {
        self.adapt = adapt;
    }

    pub fn chains(&self) -> &[ChainState<T>] {
        &self.chains
    }

    pub fn policy(&self) -> &ProposalPolicy<T> {
        &self.policy
    }

    pub fn kernel(&self) -> &ProposalKernel<T> {
        &self.kernel
    }

    pub fn sweeps(&self) -> usize {
        self.sweep
    }

    pub fn into_policy(self) -> ProposalPolicy<T> {
        self.policy
    }

    fn absorb(&mut self) {
        if self.adapt {
            for c in &self.chains {
                self.policy.observe(&c.x);
            }
            self.kernel = self.policy.kernel();
        }
        self.sweep += 1;
    }

    pub fn sweep(&mut self, target: &dyn Target<T>) -> Result<()> {
        for (c, rng) in self.chains.iter_mut().zip(&mut self.rngs) {
            mh_step(c, &self.kernel, target, rng)?;
        }
        self.absorb();
        Ok(())
    }

    /// Same result as [`ChainPool::sweep`], with the chain steps run on the rayon pool.
    pub fn sweep_parallel(&mut self, target: &dyn Target<T>) -> Result<()> {
        let kernel = &self.kernel;
        self.chains
            .par_iter_mut()
            .zip(self.rngs.par_iter_mut())
            .try_for_each(|(c, rng)| mh_step(c, kernel, target, rng).map(|_| ()))?;
        self.absorb();
        Ok(())
    }
}
