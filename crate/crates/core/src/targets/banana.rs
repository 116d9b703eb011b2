use rand::{Rng, RngCore};

use crate::error::{Error, Result};
use crate::mvn::std_normal;
use crate::scalar::Scalar;
use crate::targets::Target;

/// Curved ("banana") density with bananicity `b`.
#[derive(Clone, Debug)]
pub struct BananaSpec<T> {
    pub b: T,
    pub dim: usize,
}

impl<T: Scalar> BananaSpec<T> {
    pub fn new(b: T, dim: usize) -> Result<Self> {
        if !(b >= T::zero()) {
            return Err(Error::Domain(format!("bananicity {b} must be nonnegative")));
        }
        if dim < 2 {
            return Err(Error::Domain("banana target needs dimension >= 2".into()));
        }
        Ok(BananaSpec { b, dim })
    }

    fn log_pdf_unchecked(&self, x: &[T]) -> T {
        let half = T::cst(0.5);
        let bend = x[1] + self.b * x[0] * x[0] - T::cst(100.0) * self.b;
        let rest: T = x[2..].iter().map(|&v| v * v).sum();
        -x[0] * x[0] / T::cst(200.0) - half * bend * bend - half * rest
    }
}

/// Unnormalized log-density.
pub fn banana_logpdf<T: Scalar>(x: &[T], spec: &BananaSpec<T>) -> Result<T> {
    Error::check_dim(spec.dim, x.len())?;
    Ok(spec.log_pdf_unchecked(x))
}

/// Exact draw by shearing a Gaussian: `x₂ = z₂ - b z₁² + 100 b`.
pub fn banana_iid_sample<T: Scalar, R: Rng + ?Sized>(spec: &BananaSpec<T>, rng: &mut R) -> Vec<T> {
    let mut x: Vec<T> = (0..spec.dim).map(|_| std_normal::<T, _>(rng)).collect();
    x[0] = x[0] * T::cst(10.0);
    x[1] = x[1] - spec.b * x[0] * x[0] + T::cst(100.0) * spec.b;
    x
}

impl<T: Scalar> Target<T> for BananaSpec<T> {
    fn dim(&self) -> usize {
        self.dim
    }
    fn log_density(&self, x: &[T]) -> T {
        self.log_pdf_unchecked(x)
    }
    fn sample_iid(&self, rng: &mut dyn RngCore) -> Option<Vec<T>> {
        Some(banana_iid_sample(self, rng))
    }
    fn true_mean(&self) -> Option<Vec<T>> {
        Some(vec![T::zero(); self.dim])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn zero_on_ridge_crest() {
        let spec = BananaSpec::new(0.1f64, 5).unwrap();
        assert_eq!(
            banana_logpdf(&[0.0, 10.0, 0.0, 0.0, 0.0], &spec).unwrap(),
            0.0
        );
    }

    #[test]
    fn hand_evaluated_point() {
        let spec = BananaSpec::new(0.1f64, 5).unwrap();
        let v = banana_logpdf(&[10.0, 0.0, 0.0, 0.0, 0.0], &spec).unwrap();
        assert!((v + 0.5).abs() < 1e-12);
    }

    #[test]
    fn flat_banana_is_independent_gaussian() {
        let spec = BananaSpec::new(0.0f64, 3).unwrap();
        let x = [3.0, -2.0, 0.5];
        let expected = -9.0 / 200.0 - 0.5 * 4.0 - 0.5 * 0.25;
        assert!((banana_logpdf(&x, &spec).unwrap() - expected).abs() < 1e-14);
        let mut a = ChaCha8Rng::seed_from_u64(8);
        let mut b = ChaCha8Rng::seed_from_u64(8);
        let draw = banana_iid_sample(&spec, &mut a);
        let z0: f64 = std_normal(&mut b);
        let z1: f64 = std_normal(&mut b);
        assert_eq!(draw[0], 10.0 * z0);
        assert_eq!(draw[1], z1);
    }

    #[test]
    fn invalid_specs_rejected() {
        assert!(BananaSpec::new(-0.1, 5).is_err());
        assert!(BananaSpec::new(0.1, 1).is_err());
        assert!(banana_logpdf(&[0.0; 4], &BananaSpec::new(0.1f64, 5).unwrap()).is_err());
    }

    #[test]
    fn shear_preserves_log_density_offset() {
        // log f(x) equals the Gaussian log-kernel of the unsheared draw z
        let spec = BananaSpec::new(0.1f64, 5).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        for _ in 0..50 {
            let x = banana_iid_sample(&spec, &mut rng);
            let z1 = x[1] + 0.1 * x[0] * x[0] - 10.0;
            let gauss = -x[0] * x[0] / 200.0
                - 0.5 * z1 * z1
                - 0.5 * x[2..].iter().map(|v| v * v).sum::<f64>();
            assert!((banana_logpdf(&x, &spec).unwrap() - gauss).abs() < 1e-9);
        }
    }

    #[test]
    fn second_coordinate_mean_vanishes() {
        let spec = BananaSpec::new(0.1f64, 5).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        // sd(x₂) ≈ √201, so 10⁶ draws put the 0.05 tolerance at ~3.5 standard errors
        let n = 1_000_000;
        let (mut s1, mut s2, mut ss1) = (0.0, 0.0, 0.0);
        for _ in 0..n {
            let x = banana_iid_sample(&spec, &mut rng);
            s1 += x[0];
            ss1 += x[0] * x[0];
            s2 += x[1];
        }
        let n = n as f64;
        assert!((s2 / n).abs() < 0.05);
        let var1 = ss1 / n - (s1 / n).powi(2);
        assert!((var1 / 100.0 - 1.0).abs() < 0.05);
    }
}
