use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::linalg::Matrix;
use crate::mixture::MixtureState;
use crate::mvn::{CovMatrix, GaussianParams};
use crate::targets::GaussMixSpec;

struct Flat(usize);

impl Target<f64> for Flat {
    fn dim(&self) -> usize {
        self.0
    }
    fn log_density(&self, _x: &[f64]) -> f64 {
        0.0
    }
}

struct StdNormal1;

impl Target<f64> for StdNormal1 {
    fn dim(&self) -> usize {
        1
    }
    fn log_density(&self, x: &[f64]) -> f64 {
        -0.5 * x[0] * x[0]
    }
}

struct NanAwayFromZero;

impl Target<f64> for NanAwayFromZero {
    fn dim(&self) -> usize {
        1
    }
    fn log_density(&self, x: &[f64]) -> f64 {
        if x[0] == 0.0 {
            0.0
        } else {
            f64::NAN
        }
    }
}

fn cov1(v: f64) -> CovMatrix<f64> {
    CovMatrix::new(Matrix::diag(&[v])).unwrap()
}

fn two_region_kernel(alpha: f64) -> ProposalKernel<f64> {
    let m = MixtureState::new(
        vec![0.5, 0.5],
        vec![
            GaussianParams::new(vec![-2.0], cov1(0.25)).unwrap(),
            GaussianParams::new(vec![2.0], cov1(4.0)).unwrap(),
        ],
    )
    .unwrap();
    ProposalKernel::Regional {
        alpha,
        local: vec![cov1(0.25), cov1(4.0)],
        whole: cov1(9.0),
        partition: Partition::Mixture(m),
    }
}

#[test]
fn optimal_scale_in_one_dimension() {
    let kernel = ProposalKernel::Gaussian {
        cov: cov1(2.38 * 2.38),
    };
    let mut chain = ChainState::new(vec![0.0], &StdNormal1).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let n = 200_000;
    let mut sum = 0.0;
    for _ in 0..n {
        mh_step(&mut chain, &kernel, &StdNormal1, &mut rng).unwrap();
        sum += chain.x[0];
    }
    let ar = chain.acceptance_rate();
    assert!((ar - 0.44).abs() < 0.03, "acceptance {ar}");
    assert!((sum / n as f64).abs() < 0.02);
}

#[test]
fn equal_density_symmetric_move_always_accepted() {
    let kernel = ProposalKernel::Gaussian {
        cov: CovMatrix::identity(3),
    };
    let mut chain = ChainState::new(vec![0.0; 3], &Flat(3)).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..1000 {
        assert!(mh_step(&mut chain, &kernel, &Flat(3), &mut rng).unwrap());
    }
    assert_eq!(chain.accepts, 1000);
}

#[test]
fn single_region_hastings_term_is_exactly_zero() {
    let m = MixtureState::new(
        vec![1.0],
        vec![GaussianParams::new(vec![0.5, 0.5], CovMatrix::identity(2)).unwrap()],
    )
    .unwrap();
    let kernel = ProposalKernel::Regional {
        alpha: 0.3,
        local: vec![CovMatrix::new(Matrix::from_rows(&[[2.0, 0.3], [0.3, 1.0]])).unwrap()],
        whole: CovMatrix::new(Matrix::diag(&[5.0, 7.0])).unwrap(),
        partition: Partition::Mixture(m),
    };
    let (x, y) = ([0.1, -2.3], [1.7, 0.4]);
    assert_eq!(kernel.log_density(&x, &y) - kernel.log_density(&y, &x), 0.0);
    assert!(kernel.is_symmetric());
}

#[test]
fn regional_kernel_density_integrates_to_one() {
    for (alpha, from) in [(0.2, -2.5), (0.2, 1.0), (0.7, 0.3)] {
        let k = two_region_kernel(alpha);
        let h = 1e-3;
        let total: f64 = (-40_000..=40_000)
            .map(|i| k.log_density(&[from], &[from + i as f64 * h]).exp() * h)
            .sum();
        assert!((total - 1.0).abs() < 1e-6, "{total}");
    }
}

#[test]
fn regional_kernel_is_asymmetric_across_regions() {
    let k = two_region_kernel(0.2);
    assert!(!k.is_symmetric());
    let (x, y) = ([-1.0], [1.0]);
    let direct =
        |var: f64, d: f64| -0.5 * (2.0 * std::f64::consts::PI * var).ln() - 0.5 * d * d / var;
    let q_xy = (0.8 * direct(0.25, 2.0).exp() + 0.2 * direct(9.0, 2.0).exp()).ln();
    let q_yx = (0.8 * direct(4.0, 2.0).exp() + 0.2 * direct(9.0, 2.0).exp()).ln();
    assert!((k.log_density(&x, &y) - q_xy).abs() < 1e-12);
    assert!((k.log_density(&y, &x) - q_yx).abs() < 1e-12);
    let r = log_mh_ratio(&x, 0.0, &y, 0.0, &k);
    assert!((r - (q_yx - q_xy)).abs() < 1e-12);
}

#[test]
fn proposal_increments_follow_alpha_mixture() {
    let alpha = 0.25;
    let local = CovMatrix::new(Matrix::from_rows(&[[1.0, 0.5], [0.5, 2.0]])).unwrap();
    let whole = CovMatrix::new(Matrix::diag(&[6.0, 3.0])).unwrap();
    let k = ProposalKernel::Regional {
        alpha,
        local: vec![local.clone(), CovMatrix::identity(2)],
        whole: whole.clone(),
        partition: Partition::HalfSpace(HalfSpace::new(vec![1.0, 0.0], 10.0)),
    };
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let n = 200_000;
    let x = [1.0, 1.0];
    let mut emp = Matrix::zeros(2, 2);
    for _ in 0..n {
        let y = k.propose(&x, &mut rng);
        let d = [y[0] - x[0], y[1] - x[1]];
        emp.add_outer(1.0 / n as f64, &d, &d);
    }
    let mut expected = local.entries().clone();
    expected.axpby(1.0 - alpha, alpha, whole.entries());
    assert!((&emp - &expected).max_abs() < 0.05, "{emp:?}");
}

#[test]
fn nan_target_is_an_error() {
    let kernel = ProposalKernel::Gaussian { cov: cov1(1.0) };
    let mut chain = ChainState::new(vec![0.0], &NanAwayFromZero).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    assert!(matches!(
        mh_step(&mut chain, &kernel, &NanAwayFromZero, &mut rng),
        Err(Error::Target(_))
    ));
    assert!(ChainState::new(vec![1.0], &NanAwayFromZero).is_err());
}

#[test]
fn frozen_regional_kernel_keeps_bimodal_target() {
    // the regions differ in scale, so the Hastings correction is needed here
    let target = GaussMixSpec::new(0.3f64, 2.0, 4.0, 1).unwrap();
    let k = two_region_kernel(0.2);
    let mut chain = ChainState::new(vec![0.0], &target).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let n = 400_000;
    let (mut sum, mut below) = (0.0, 0usize);
    for _ in 0..n {
        mh_step(&mut chain, &k, &target, &mut rng).unwrap();
        sum += chain.x[0];
        below += usize::from(chain.x[0] <= 0.0);
    }
    let mean = sum / n as f64;
    let cdf0 = target.cdf(&[0.0]).unwrap();
    assert!(
        (mean - target.true_mean().unwrap()[0]).abs() < 0.05,
        "{mean}"
    );
    assert!((below as f64 / n as f64 - cdf0).abs() < 0.01);
}

#[test]
fn am_policy_uses_initial_until_two_points() {
    let init = CovMatrix::new(Matrix::diag(&[4.0, 1.0])).unwrap();
    let mut p = ProposalPolicy::Am(AmPolicy::new(RunningMoments::new(2), init));
    let eps = eps_d::<f64>(2);
    let cov_of = |p: &ProposalPolicy<f64>| match p.kernel() {
        ProposalKernel::Gaussian { cov } => cov.entries().clone(),
        _ => unreachable!(),
    };
    assert_eq!(cov_of(&p)[(0, 0)], 4.0 * eps);
    p.observe(&[0.0, 0.0]);
    assert_eq!(cov_of(&p)[(0, 0)], 4.0 * eps);
    p.observe(&[2.0, 0.0]);
    let c = cov_of(&p);
    assert!((c[(0, 0)] - eps * (2.0 + COV_RIDGE)).abs() < 1e-12);
    assert!((c[(1, 1)] - eps * COV_RIDGE).abs() < 1e-15);
}

#[test]
fn rapt_policy_routes_points_by_side() {
    let mut p = RaptPolicy {
        boundary: HalfSpace::new(vec![1.0], 0.0),
        regional: [RunningMoments::new(1), RunningMoments::new(1)],
        whole: RunningMoments::new(1),
        initial_regional: [cov1(1.0), cov1(1.0)],
        initial_whole: cov1(1.0),
        alpha: 0.2,
        eps: eps_d(1),
    };
    for x in [-1.0, -3.0, 0.0, 5.0, 7.0] {
        p.observe(&[x]);
    }
    assert_eq!(p.regional[0].count(), 3);
    assert_eq!(p.regional[1].count(), 2);
    assert_eq!(p.regional[1].mean(), &[6.0]);
    assert_eq!(p.whole.count(), 5);
}
