use rand::{Rng, RngCore};

use crate::error::{Error, Result};
use crate::mvn::std_normal;
use crate::scalar::{log_add_exp, Scalar};
use crate::targets::Target;

/// Two-component Gaussian mixture `ξ N(-d·1, I) + (1-ξ) N(d·1, S·I)`.
#[derive(Clone, Debug)]
pub struct GaussMixSpec<T> {
    pub xi: T,
    pub d_sep: T,
    pub s_ratio: T,
    pub dim: usize,
}

impl<T: Scalar> GaussMixSpec<T> {
    pub fn new(xi: T, d_sep: T, s_ratio: T, dim: usize) -> Result<Self> {
        if !(xi > T::zero() && xi < T::one()) {
            return Err(Error::Domain(format!("mixture weight {xi} not in (0,1)")));
        }
        if !(s_ratio > T::zero()) {
            return Err(Error::Domain(format!(
                "variance ratio {s_ratio} must be positive"
            )));
        }
        if dim == 0 {
            return Err(Error::Domain("dimension must be positive".into()));
        }
        Ok(GaussMixSpec {
            xi,
            d_sep,
            s_ratio,
            dim,
        })
    }

    fn log_iso_normal(x: &[T], center: T, var: T) -> T {
        let d = T::from_count(x.len());
        let sq: T = x.iter().map(|&v| (v - center) * (v - center)).sum();
        -T::cst(0.5) * (d * (T::cst(2.0) * T::PI() * var).ln() + sq / var)
    }

    fn log_pdf_unchecked(&self, x: &[T]) -> T {
        let a = self.xi.ln() + Self::log_iso_normal(x, -self.d_sep, T::one());
        let b = (T::one() - self.xi).ln() + Self::log_iso_normal(x, self.d_sep, self.s_ratio);
        log_add_exp(a, b)
    }

    fn cdf_unchecked(&self, z: &[T]) -> T {
        let sd2 = self.s_ratio.sqrt();
        let p1: T = z
            .iter()
            .map(|&v| (v + self.d_sep).std_normal_cdf())
            .product();
        let p2: T = z
            .iter()
            .map(|&v| ((v - self.d_sep) / sd2).std_normal_cdf())
            .product();
        self.xi * p1 + (T::one() - self.xi) * p2
    }
}

pub fn gaussmix_logpdf<T: Scalar>(x: &[T], spec: &GaussMixSpec<T>) -> Result<T> {
    Error::check_dim(spec.dim, x.len())?;
    Ok(spec.log_pdf_unchecked(x))
}

pub fn gaussmix_iid_sample<T: Scalar, R: Rng + ?Sized>(
    spec: &GaussMixSpec<T>,
    rng: &mut R,
) -> Vec<T> {
    let u: f64 = rng.random();
    let (center, sd) = if T::cst(u) < spec.xi {
        (-spec.d_sep, T::one())
    } else {
        (spec.d_sep, spec.s_ratio.sqrt())
    };
    (0..spec.dim)
        .map(|_| center + sd * std_normal::<T, _>(rng))
        .collect()
}

/// Joint CDF, factorized over coordinates within each component.
pub fn gaussmix_cdf<T: Scalar>(z: &[T], spec: &GaussMixSpec<T>) -> Result<T> {
    Error::check_dim(spec.dim, z.len())?;
    Ok(spec.cdf_unchecked(z))
}

impl<T: Scalar> Target<T> for GaussMixSpec<T> {
    fn dim(&self) -> usize {
        self.dim
    }
    fn log_density(&self, x: &[T]) -> T {
        self.log_pdf_unchecked(x)
    }
    fn sample_iid(&self, rng: &mut dyn RngCore) -> Option<Vec<T>> {
        Some(gaussmix_iid_sample(self, rng))
    }
    fn cdf(&self, z: &[T]) -> Option<T> {
        Some(self.cdf_unchecked(z))
    }
    fn true_mean(&self) -> Option<Vec<T>> {
        let m = self.xi * (-self.d_sep) + (T::one() - self.xi) * self.d_sep;
        Some(vec![m; self.dim])
    }
}
