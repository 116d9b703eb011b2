//! Gaussian-mixture approximation of the target and the regions derived from it.
//!
//! [`MixtureState`] holds `K` weighted components plus their whole-space
//! moments. [`OnlineEm`] fits it recursively from a stream of chain states;
//! [`batch_em`] is the classical fit used for warm starts. Regions assign each
//! point to the component whose (unweighted) density is largest.

mod batch;
mod io;
mod online;
mod region;

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::mvn::{CovMatrix, GaussianParams};
use crate::scalar::Scalar;

pub use batch::{batch_em, quantile_split_init, BatchEmResult};
pub use io::{read_mixture, write_mixture};
pub use online::{em_update, maximize, responsibilities, MStepConfig, OnlineEm, SuffStats};
pub use region::{
    region_assign, region_slice_raster, LabelGrid, RasterGrid, RegionLabel, DEFAULT_RASTER_RES,
};

#[derive(Clone, Debug)]
pub struct MixtureState<T> {
    weights: Vec<T>,
    components: Vec<GaussianParams<T>>,
    whole: GaussianParams<T>,
}

impl<T: Scalar> MixtureState<T> {
    /// Weights must be nonnegative and sum to one (within `1e-9`); they are
    /// renormalized exactly.
    pub fn new(weights: Vec<T>, components: Vec<GaussianParams<T>>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::EmptyInput);
        }
        Error::check_dim(components.len(), weights.len())?;
        let dim = components[0].dim();
        for c in &components {
            Error::check_dim(dim, c.dim())?;
        }
        if weights.iter().any(|&w| !(w >= T::zero())) {
            return Err(Error::Domain("mixture weights must be nonnegative".into()));
        }
        let total: T = weights.iter().copied().sum();
        if (total - T::one()).abs() > T::cst(1e-9).max(T::epsilon() * T::cst(16.0)) {
            return Err(Error::Domain(format!(
                "mixture weights sum to {total}, not 1"
            )));
        }
        let weights: Vec<T> = weights.into_iter().map(|w| w / total).collect();
        let (mean, cov) = whole_moments(&weights, &components);
        let whole = GaussianParams::new(mean, CovMatrix::new(cov)?)?;
        Ok(MixtureState {
            weights,
            components,
            whole,
        })
    }

    /// Equal-weight mixture of the given `(mean, covariance)` pairs.
    pub fn equal_weights(components: Vec<GaussianParams<T>>) -> Result<Self> {
        let k = T::from_count(components.len().max(1));
        Self::new(vec![T::one() / k; components.len()], components)
    }

    pub fn k(&self) -> usize {
        self.components.len()
    }

    pub fn dim(&self) -> usize {
        self.whole.dim()
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    pub fn components(&self) -> &[GaussianParams<T>] {
        &self.components
    }

    pub fn component(&self, k: usize) -> &GaussianParams<T> {
        &self.components[k]
    }

    /// Whole-space mean and covariance (cached).
    pub fn whole(&self) -> &GaussianParams<T> {
        &self.whole
    }

    /// Permutes components: new component `i` is old component `order[i]`.
    pub fn reordered(&self, order: &[usize]) -> Result<Self> {
        Self::new(
            order.iter().map(|&i| self.weights[i]).collect(),
            order.iter().map(|&i| self.components[i].clone()).collect(),
        )
    }

    /// Component order sorting the means' coordinate `coord` ascending.
    pub fn order_by_coord(&self, coord: usize) -> Vec<usize> {
        let mut order: Vec<usize> = (0..self.k()).collect();
        order.sort_by(|&a, &b| {
            self.components[a].mean[coord]
                .partial_cmp(&self.components[b].mean[coord])
                .unwrap_or(std::cmp::Ordering::Equal)
        });
        order
    }
}

/// `μʷ = Σ βᵏ μᵏ`, `Σʷ = Σ βᵏ (Σᵏ + μᵏ μᵏᵀ) − μʷ μʷᵀ`.
pub fn whole_moments<T: Scalar>(
    weights: &[T],
    components: &[GaussianParams<T>],
) -> (Vec<T>, Matrix<T>) {
    let dim = components[0].dim();
    let mut mean = vec![T::zero(); dim];
    let mut cov = Matrix::zeros(dim, dim);
    for (&w, c) in weights.iter().zip(components) {
        for (m, &v) in mean.iter_mut().zip(&c.mean) {
            *m += w * v;
        }
        cov.axpby(T::one(), w, c.cov.entries());
        cov.add_outer(w, &c.mean, &c.mean);
    }
    cov.add_outer(-T::one(), &mean, &mean);
    cov.symmetrize();
    (mean, cov)
}
