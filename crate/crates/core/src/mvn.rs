//! Multivariate Gaussian primitives: SPD covariances with a cached Cholesky
//! factor, log-density evaluation by triangular solve, and seeded sampling.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::scalar::Scalar;

/// Relative pivot tolerance of the Cholesky factorization.
pub const PIVOT_TOL: f64 = 1e-12;

/// Absolute tolerance on `|m_ij - m_ji|` accepted by [`CovMatrix::new`].
pub const SYMMETRY_TOL: f64 = 1e-10;

/// Draws one standard normal variate.
#[inline]
pub fn std_normal<T: Scalar, R: Rng + ?Sized>(rng: &mut R) -> T {
    let z: f64 = rng.sample(StandardNormal);
    T::cst(z)
}

/// Lower Cholesky factor `L` with `L Lᵀ = m`.
///
/// A pivot is rejected when it does not exceed `PIVOT_TOL` times the largest
/// diagonal entry of `m` (or the scalar's machine epsilon, if larger).
pub fn chol<T: Scalar>(m: &Matrix<T>) -> Result<Matrix<T>> {
    if !m.is_square() {
        return Err(Error::DimensionMismatch {
            expected: m.rows(),
            found: m.cols(),
        });
    }
    let n = m.rows();
    let scale = (0..n).fold(T::zero(), |s, i| s.max(m[(i, i)].abs()));
    let tol = T::cst(PIVOT_TOL).max(T::epsilon()) * scale;
    let mut l = Matrix::zeros(n, n);
    for j in 0..n {
        let mut pivot = m[(j, j)];
        for k in 0..j {
            pivot -= l[(j, k)] * l[(j, k)];
        }
        if !(pivot > tol) {
            return Err(Error::NotPositiveDefinite {
                pivot: pivot.as_f64(),
                index: j,
            });
        }
        let ljj = pivot.sqrt();
        l[(j, j)] = ljj;
        for i in (j + 1)..n {
            let mut acc = m[(i, j)];
            for k in 0..j {
                acc -= l[(i, k)] * l[(j, k)];
            }
            l[(i, j)] = acc / ljj;
        }
    }
    Ok(l)
}

/// Symmetric positive definite covariance with its factorization cached.
#[derive(Clone, Debug)]
pub struct CovMatrix<T> {
    entries: Matrix<T>,
    chol: Matrix<T>,
    log_det: T,
}

impl<T: Scalar> CovMatrix<T> {
    pub fn new(entries: Matrix<T>) -> Result<Self> {
        let tol =
            T::cst(SYMMETRY_TOL).max(T::epsilon() * T::cst(64.0) * (T::one() + entries.max_abs()));
        let asym = entries.asymmetry();
        if asym > tol {
            return Err(Error::NotSymmetric(asym.as_f64()));
        }
        let chol = chol(&entries)?;
        let log_det = T::cst(2.0) * (0..chol.rows()).map(|i| chol[(i, i)].ln()).sum::<T>();
        Ok(CovMatrix {
            entries,
            chol,
            log_det,
        })
    }

    pub fn identity(dim: usize) -> Self {
        Self::new(Matrix::identity(dim)).expect("identity is SPD")
    }

    pub fn dim(&self) -> usize {
        self.entries.rows()
    }

    pub fn entries(&self) -> &Matrix<T> {
        &self.entries
    }

    pub fn chol(&self) -> &Matrix<T> {
        &self.chol
    }

    pub fn log_det(&self) -> T {
        self.log_det
    }

    /// `s · Σ`, reusing the factorization (`√s · L`).
    pub fn scaled(&self, s: T) -> Self {
        assert!(s > T::zero(), "covariance scale must be positive");
        let dim = T::from_count(self.dim());
        CovMatrix {
            entries: self.entries.scale(s),
            chol: self.chol.scale(s.sqrt()),
            log_det: self.log_det + dim * s.ln(),
        }
    }

    /// `vᵀ Σ⁻¹ v` through one forward substitution.
    pub fn mahalanobis_sq(&self, v: &[T]) -> T {
        self.chol.solve_lower(v).iter().map(|&w| w * w).sum()
    }

    /// `log N(diff; 0, Σ)` without any dimension checks.
    #[inline]
    pub fn log_kernel(&self, diff: &[T]) -> T {
        let d = T::from_count(self.dim());
        let half = T::cst(0.5);
        -half * d * (T::cst(2.0) * T::PI()).ln()
            - half * self.log_det
            - half * self.mahalanobis_sq(diff)
    }
}

#[derive(Clone, Debug)]
pub struct GaussianParams<T> {
    pub mean: Vec<T>,
    pub cov: CovMatrix<T>,
}

impl<T: Scalar> GaussianParams<T> {
    pub fn new(mean: Vec<T>, cov: CovMatrix<T>) -> Result<Self> {
        Error::check_dim(cov.dim(), mean.len())?;
        Ok(GaussianParams { mean, cov })
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn log_pdf(&self, x: &[T]) -> Result<T> {
        mvn_logpdf(x, self)
    }

    /// Log-density without the dimension check; `x.len()` must equal `dim()`.
    #[inline]
    pub fn log_pdf_unchecked(&self, x: &[T]) -> T {
        let diff: Vec<T> = x.iter().zip(&self.mean).map(|(&a, &m)| a - m).collect();
        self.cov.log_kernel(&diff)
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<T> {
        mvn_sample(self, rng)
    }
}

pub fn mvn_logpdf<T: Scalar>(x: &[T], p: &GaussianParams<T>) -> Result<T> {
    Error::check_dim(p.dim(), x.len())?;
    Ok(p.log_pdf_unchecked(x))
}

/// `μ + L z` with `z` standard normal.
pub fn mvn_sample<T: Scalar, R: Rng + ?Sized>(p: &GaussianParams<T>, rng: &mut R) -> Vec<T> {
    let z: Vec<T> = (0..p.dim()).map(|_| std_normal(rng)).collect();
    p.cov
        .chol()
        .lower_mul_vec(&z)
        .into_iter()
        .zip(&p.mean)
        .map(|(a, &m)| a + m)
        .collect()
}

/// Draw from `N(center, Σ)`.
pub fn sample_around<T: Scalar, R: Rng + ?Sized>(
    center: &[T],
    cov: &CovMatrix<T>,
    rng: &mut R,
) -> Vec<T> {
    let z: Vec<T> = (0..center.len()).map(|_| std_normal(rng)).collect();
    cov.chol()
        .lower_mul_vec(&z)
        .into_iter()
        .zip(center)
        .map(|(a, &c)| a + c)
        .collect()
}
