//! Target distributions: unnormalized log-densities plus, where the target
//! allows it, an i.i.d. sampler and a CDF used by the diagnostics.

mod banana;
mod gaussmix;
mod loh;

use rand::RngCore;

use crate::scalar::Scalar;

pub use banana::{banana_iid_sample, banana_logpdf, BananaSpec};
pub use gaussmix::{gaussmix_cdf, gaussmix_iid_sample, gaussmix_logpdf, GaussMixSpec};
pub use loh::{
    betabinom_logpmf, binom_logpmf, loh_log_posterior, read_loh_csv, synthetic_loh_records,
    write_loh_csv, LohRecord, LohSpec, BUNDLED_LOH_CSV, LOH_GAMMA_BOUND, SYNTHETIC_SEED,
};

/// A distribution to be sampled by Metropolis–Hastings.
///
/// `log_density` may be unnormalized and returns `-inf` outside the support.
pub trait Target<T: Scalar>: Send + Sync {
    fn dim(&self) -> usize;

    /// Log-density at `x`; `x.len() == self.dim()` is a caller precondition.
    fn log_density(&self, x: &[T]) -> T;

    /// One exact draw, if the target supports i.i.d. sampling.
    fn sample_iid(&self, _rng: &mut dyn RngCore) -> Option<Vec<T>> {
        None
    }

    /// Joint CDF `P(X ≤ z)` componentwise, if available in closed form.
    fn cdf(&self, _z: &[T]) -> Option<T> {
        None
    }

    /// Analytic mean, when known.
    fn true_mean(&self) -> Option<Vec<T>> {
        None
    }

    /// Maps a sampled point back to the model's natural parametrization.
    fn to_natural(&self, x: &[T]) -> Vec<T> {
        x.to_vec()
    }

    /// Display names of the coordinates (natural scale).
    fn coord_names(&self) -> Vec<String> {
        (1..=self.dim()).map(|i| format!("x{i}")).collect()
    }
}

/// Closed set of targets the experiment harness can run.
#[derive(Clone, Debug)]
pub enum TargetModel<T> {
    GaussMix(GaussMixSpec<T>),
    Banana(BananaSpec<T>),
    Loh(LohSpec),
}

impl<T: Scalar> TargetModel<T> {
    fn inner(&self) -> &dyn Target<T> {
        match self {
            TargetModel::GaussMix(s) => s,
            TargetModel::Banana(s) => s,
            TargetModel::Loh(s) => s,
        }
    }
}

impl<T: Scalar> Target<T> for TargetModel<T> {
    fn dim(&self) -> usize {
        self.inner().dim()
    }
    fn log_density(&self, x: &[T]) -> T {
        self.inner().log_density(x)
    }
    fn sample_iid(&self, rng: &mut dyn RngCore) -> Option<Vec<T>> {
        self.inner().sample_iid(rng)
    }
    fn cdf(&self, z: &[T]) -> Option<T> {
        self.inner().cdf(z)
    }
    fn true_mean(&self) -> Option<Vec<T>> {
        self.inner().true_mean()
    }
    fn to_natural(&self, x: &[T]) -> Vec<T> {
        self.inner().to_natural(x)
    }
    fn coord_names(&self) -> Vec<String> {
        self.inner().coord_names()
    }
}
