//! Checks shared by the correctness tests and the acceptance report.
#![allow(dead_code)]

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use raptor::diagnostics::{ks_two_sample, KsResult};
use raptor::inca::{pool_index, pooled_position};
use raptor::mixture::{batch_em, region_slice_raster, MStepConfig, RasterGrid};
use raptor::samplers::{
    mh_step, ChainState, HalfSpace, Partition, ProposalKernel, ProposalPolicy, RaptorPolicy,
};
use raptor::targets::{betabinom_logpmf, gaussmix_iid_sample};
use raptor::{
    CovMatrix, GaussMixSpec, GaussianParams, Matrix, MixtureState, OnlineEm, TargetModel,
};

pub const STEPS: usize = 500_000;
pub const THIN: usize = 50;

pub fn bimodal() -> TargetModel {
    TargetModel::GaussMix(GaussMixSpec::new(0.3, 2.0, 2.0, 1).unwrap())
}

pub fn cov1(v: f64) -> CovMatrix {
    CovMatrix::new(Matrix::diag(&[v])).unwrap()
}

pub fn gp1(mean: f64, var: f64) -> GaussianParams {
    GaussianParams::new(vec![mean], cov1(var)).unwrap()
}

pub fn run_frozen(kernel: &ProposalKernel<f64>, target: &TargetModel, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut chain = ChainState::new(vec![0.0], target).unwrap();
    let mut out = Vec::with_capacity(STEPS / THIN);
    for t in 0..STEPS {
        mh_step(&mut chain, kernel, target, &mut rng).unwrap();
        if t % THIN == THIN - 1 {
            out.push(chain.x[0]);
        }
    }
    out
}

pub fn iid(target: &TargetModel, n: usize, seed: u64) -> Vec<f64> {
    let TargetModel::GaussMix(spec) = target else {
        unreachable!()
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| gaussmix_iid_sample(spec, &mut rng)[0])
        .collect()
}

pub fn fixed_kernel() -> ProposalKernel<f64> {
    ProposalKernel::Gaussian {
        cov: cov1(2.38 * 2.38 * 5.0),
    }
}

pub fn half_space_kernel() -> ProposalKernel<f64> {
    ProposalKernel::Regional {
        alpha: 0.3,
        local: vec![cov1(2.0), cov1(6.0)],
        whole: cov1(25.0),
        partition: Partition::HalfSpace(HalfSpace::new(vec![1.0], 0.0)),
    }
}

/// Unequal variances move the boundary off the midpoint and make the kernel asymmetric.
pub fn mixture_kernel() -> ProposalKernel<f64> {
    let mix = MixtureState::new(vec![0.3, 0.7], vec![gp1(-2.0, 1.0), gp1(2.0, 2.0)]).unwrap();
    ProposalPolicy::Raptor(RaptorPolicy::new(mix, 100, 0.2)).kernel()
}

/// KS results of each frozen kernel's thinned chain against exact draws.
pub fn frozen_ks() -> Vec<(&'static str, KsResult)> {
    let target = bimodal();
    let n = STEPS / THIN;
    [
        ("fixed", fixed_kernel()),
        ("half-space", half_space_kernel()),
        ("mixture", mixture_kernel()),
    ]
    .into_iter()
    .zip(1u64..)
    .map(|((name, k), s)| {
        (
            name,
            ks_two_sample(&run_frozen(&k, &target, s), &iid(&target, n, 100 + s)).unwrap(),
        )
    })
    .collect()
}

/// Largest mean gap and largest relative Frobenius covariance gap between
/// online and batch EM on 10⁴ draws from a ±3 two-component mixture.
pub fn online_vs_batch() -> (f64, f64, MixtureState) {
    let dim = 2;
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let spec = GaussMixSpec::new(0.5, 3.0, 1.0, dim).unwrap();
    let draws: Vec<Vec<f64>> = (0..10_000)
        .map(|_| gaussmix_iid_sample(&spec, &mut rng))
        .collect();
    let init = MixtureState::equal_weights(vec![
        GaussianParams::new(vec![-1.0; dim], CovMatrix::identity(dim).scaled(2.0)).unwrap(),
        GaussianParams::new(vec![1.0; dim], CovMatrix::identity(dim).scaled(2.0)).unwrap(),
    ])
    .unwrap();
    let cfg = MStepConfig::default();
    let mut online = OnlineEm::new(init.clone(), 100, cfg);
    for x in &draws {
        online.observe(x);
    }
    let batch = batch_em(&draws, init, &cfg, 1e-10, 1000).unwrap().mixture;
    let on = online.mixture().clone();
    let (mut mean_gap, mut cov_gap) = (0.0f64, 0.0f64);
    for k in 0..2 {
        let (a, b) = (on.component(k), batch.component(k));
        for j in 0..dim {
            mean_gap = mean_gap.max((a.mean[j] - b.mean[j]).abs());
        }
        let rel =
            (a.cov.entries() - b.cov.entries()).frobenius_norm() / b.cov.entries().frobenius_norm();
        cov_gap = cov_gap.max(rel);
    }
    (mean_gap, cov_gap, on)
}

/// Distance between the rastered boundary of N(0, I) vs N(0, 4I) and the exact
/// radius, plus the cell width.
pub fn disc_boundary_error() -> (f64, f64) {
    let mix = MixtureState::new(
        vec![0.5, 0.5],
        vec![
            GaussianParams::new(vec![0.0, 0.0], CovMatrix::identity(2)).unwrap(),
            GaussianParams::new(vec![0.0, 0.0], CovMatrix::identity(2).scaled(4.0)).unwrap(),
        ],
    )
    .unwrap();
    let grid = RasterGrid {
        x_range: (-4.0, 4.0),
        y_range: (-4.0, 4.0),
        res: 301,
    };
    let raster = region_slice_raster(&mix, &[], &grid).unwrap();
    let ticks = RasterGrid::ticks(grid.x_range, grid.res);
    let r = (8.0f64 / 3.0 * 4.0f64.ln()).sqrt();
    let centre = grid.res / 2;
    // farthest inner-region cell along each axis through the centre, both directions
    let mut worst = 0.0f64;
    for (row, col, sign) in [
        (true, 1usize, 1.0),
        (true, 0, -1.0),
        (false, 1, 1.0),
        (false, 0, -1.0),
    ] {
        let idx: Vec<usize> = if col == 1 {
            (centre..grid.res).collect()
        } else {
            (0..=centre).rev().collect()
        };
        let first_outer = idx
            .into_iter()
            .find(|&j| if row { raster.label(centre, j) } else { raster.label(j, centre) } == 2)
            .unwrap();
        worst = worst.max((sign * ticks[first_outer] - r).abs());
    }
    (worst, 8.0 / 300.0)
}

pub fn pool_index_bijective() -> bool {
    (1..=16).all(|m| {
        let mut seen = vec![false; 10_001];
        let ok = (1..=10_000).all(|k| match pool_index(k, m) {
            Ok((c, t)) if (1..=m).contains(&c) && t >= 1 => {
                let back = pooled_position(c, t, m);
                back == k && !std::mem::replace(&mut seen[back], true)
            }
            _ => false,
        });
        ok && seen[1..].iter().all(|&s| s)
    })
}

/// Worst `|Σₓ pmf − 1|` over N ≤ 50 and a grid of (π₂, γ).
pub fn betabinom_worst() -> f64 {
    let mut worst = 0.0f64;
    for n in 0..=50u32 {
        for &pi2 in &[0.01f64, 0.2, 0.5, 0.77, 0.99] {
            for &gamma in &[-30.0f64, -8.0, -1.0, 0.0, 2.5, 10.0, 30.0] {
                let total: f64 = (0..=n)
                    .map(|x| betabinom_logpmf(x, n, pi2, gamma).unwrap().exp())
                    .sum();
                worst = worst.max((total - 1.0).abs());
            }
        }
    }
    worst
}
