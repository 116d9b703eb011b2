use crate::linalg::Matrix;
use crate::scalar::Scalar;

/// Recursive mean and scatter `Σ (x − x̄)(x − x̄)ᵀ` of a stream.
#[derive(Clone, Debug)]
pub struct RunningMoments<T> {
    n: usize,
    mean: Vec<T>,
    scatter: Matrix<T>,
}

impl<T: Scalar> RunningMoments<T> {
    pub fn new(dim: usize) -> Self {
        RunningMoments {
            n: 0,
            mean: vec![T::zero(); dim],
            scatter: Matrix::zeros(dim, dim),
        }
    }

    /// Moments of `weight` pseudo-observations with the given mean and
    /// (unbiased) covariance.
    pub fn from_prior(mean: Vec<T>, cov: &Matrix<T>, weight: usize) -> Self {
        let scatter = cov.scale(T::from_count(weight.saturating_sub(1)));
        RunningMoments {
            n: weight,
            mean,
            scatter,
        }
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn count(&self) -> usize {
        self.n
    }

    pub fn mean(&self) -> &[T] {
        &self.mean
    }

    pub fn scatter(&self) -> &Matrix<T> {
        &self.scatter
    }

    /// Rank-one Welford update; keeps the scatter exactly symmetric.
    pub fn update(&mut self, x: &[T]) {
        debug_assert_eq!(x.len(), self.dim());
        self.n += 1;
        let n = T::from_count(self.n);
        let delta: Vec<T> = x.iter().zip(&self.mean).map(|(&a, &m)| a - m).collect();
        for (m, &d) in self.mean.iter_mut().zip(&delta) {
            *m += d / n;
        }
        let w = (n - T::one()) / n;
        let d = self.dim();
        for i in 0..d {
            for j in 0..=i {
                let v = self.scatter[(i, j)] + w * delta[i] * delta[j];
                self.scatter[(i, j)] = v;
                self.scatter[(j, i)] = v;
            }
        }
    }

    /// Unbiased covariance; `None` before two observations.
    pub fn covariance(&self) -> Option<Matrix<T>> {
        (self.n >= 2).then(|| self.scatter.scale(T::one() / T::from_count(self.n - 1)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn two_points() {
        let mut m = RunningMoments::new(1);
        assert!(m.covariance().is_none());
        m.update(&[0.0f64]);
        assert!(m.covariance().is_none());
        m.update(&[2.0]);
        assert_eq!(m.mean(), &[1.0]);
        assert_eq!(m.covariance().unwrap()[(0, 0)], 2.0);
    }

    #[test]
    fn matches_two_pass() {
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        let xs: Vec<Vec<f64>> = (0..1000)
            .map(|_| {
                (0..3)
                    .map(|j| 100.0 + (j as f64 + 1.0) * rng.random::<f64>())
                    .collect()
            })
            .collect();
        let mut m = RunningMoments::new(3);
        xs.iter().for_each(|x| m.update(x));
        let n = xs.len() as f64;
        let mean: Vec<f64> = (0..3)
            .map(|j| xs.iter().map(|x| x[j]).sum::<f64>() / n)
            .collect();
        let mut cov = Matrix::zeros(3, 3);
        for x in &xs {
            let d: Vec<f64> = x.iter().zip(&mean).map(|(a, b)| a - b).collect();
            cov.add_outer(1.0 / (n - 1.0), &d, &d);
        }
        let got = m.covariance().unwrap();
        assert!((&got - &cov).max_abs() <= 1e-8 * cov.max_abs());
        assert_eq!(got.asymmetry(), 0.0);
    }

    #[test]
    fn prior_reproduces_its_covariance() {
        let cov = Matrix::from_rows(&[[2.0f64, 0.5], [0.5, 1.0]]);
        let m = RunningMoments::from_prior(vec![1.0, -1.0], &cov, 10);
        assert!((&m.covariance().unwrap() - &cov).max_abs() < 1e-15);
        assert_eq!(m.count(), 10);
    }
}
