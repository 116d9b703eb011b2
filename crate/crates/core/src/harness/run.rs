use rand::Rng;
use rayon::prelude::*;

use crate::diagnostics::{dn_bar, dn_hat, mse_bias, sample_mean, OracleSet, RunSummary};
use crate::error::{Error, Result};
use crate::harness::config::{Algorithm, ScenarioConfig, StartRule, TargetConfig};
use crate::inca::{stream_rng, ChainPool};
use crate::linalg::Matrix;
use crate::mixture::{batch_em, quantile_split_init, region_assign, MStepConfig, MixtureState};
use crate::mvn::{sample_around, CovMatrix, GaussianParams};
use crate::samplers::{
    eps_d, AmPolicy, HalfSpace, ProposalPolicy, RaptPolicy, RaptorPolicy, RunningMoments,
};
use crate::scalar::Scalar;
use crate::targets::{read_loh_csv, BananaSpec, GaussMixSpec, LohSpec, Target, TargetModel};

// RNG stream layout: the high bits pick the role, the low bits the replicate/chain.
const STREAM_STARTS: u64 = 1 << 40;
const STREAM_CHAINS: u64 = 2 << 40;
const STREAM_ORACLE: u64 = 3 << 40;
const STREAM_PRELIM: u64 = 4 << 40;

fn chain_stream(rep: usize, chain: usize) -> u64 {
    STREAM_CHAINS + ((rep as u64) << 20) + chain as u64
}

/// Output of the preliminary random-walk stage.
#[derive(Clone, Debug)]
pub struct Preliminary {
    pub samples: Vec<Vec<f64>>,
    pub mean: Vec<f64>,
    /// Unbiased sample covariance of `samples`.
    pub cov: Matrix<f64>,
    pub mixture: MixtureState<f64>,
    pub acceptance_rate: f64,
}

/// Plain random-walk Metropolis with proposal `ε_d I` from each start for
/// `iterations` steps, then a batch-EM `k`-component fit of every visited state.
pub fn preliminary_stage(
    target: &dyn Target<f64>,
    starts: &[Vec<f64>],
    iterations: usize,
    k: usize,
    seed: u64,
) -> Result<Preliminary> {
    if iterations == 0 {
        return Err(Error::config(
            "prelim_iterations",
            "the preliminary stage needs at least one iteration",
        ));
    }
    let d = target.dim();
    let policy = ProposalPolicy::Fixed(CovMatrix::identity(d).scaled(eps_d(d)));
    let rngs = (0..starts.len())
        .map(|i| stream_rng(seed, STREAM_PRELIM + i as u64))
        .collect();
    let mut pool = ChainPool::new(starts.to_vec(), rngs, policy, target)?;
    let mut samples = Vec::with_capacity(iterations * starts.len());
    let mut moments = RunningMoments::new(d);
    for _ in 0..iterations {
        pool.sweep(target)?;
        for c in pool.chains() {
            moments.update(&c.x);
            samples.push(c.x.clone());
        }
    }
    let cov = moments
        .covariance()
        .ok_or_else(|| Error::config("prelim_iterations", "too few preliminary samples"))?;
    let cfg = MStepConfig::default();
    let init = quantile_split_init(&samples, k, &cfg)?;
    let mixture = batch_em(&samples, init, &cfg, 1e-8, 500)?.mixture;
    let (acc, steps) = pool
        .chains()
        .iter()
        .fold((0, 0), |(a, s), c| (a + c.accepts, s + c.steps));
    Ok(Preliminary {
        mean: moments.mean().to_vec(),
        cov,
        samples,
        mixture,
        acceptance_rate: acc as f64 / steps as f64,
    })
}

/// Starting estimator state shared by every replicate.
#[derive(Clone, Debug)]
pub struct InitialState {
    /// RAPTOR's starting mixture.
    pub mixture: MixtureState<f64>,
    pub whole_mean: Vec<f64>,
    /// Whole-space covariance for AM and RAPT, and the spread of Gaussian starts.
    pub whole_cov: CovMatrix<f64>,
    /// `[rapt, rapt2]` fixed boundaries.
    pub boundaries: [HalfSpace<f64>; 2],
    /// Starting regional moments `[variant][side]`.
    pub regional: [[(Vec<f64>, CovMatrix<f64>); 2]; 2],
}

/// A fully resolved scenario: target, starting state and oracle.
#[derive(Clone, Debug)]
pub struct Scenario {
    pub config: ScenarioConfig,
    pub target: TargetModel<f64>,
    pub init: InitialState,
    pub preliminary: Option<Preliminary>,
    pub oracle: Option<OracleSet<f64>>,
    /// Natural-scale true mean, when known.
    pub truth: Option<Vec<f64>>,
    /// Coordinate whose region means order the regions (region 1 = lowest).
    pub order_coord: usize,
    /// Coordinates spanned by the region rasters.
    pub raster_axes: (usize, usize),
    /// Distribution of Gaussian chain starts.
    pub start_dist: GaussianParams<f64>,
}

fn unit(d: usize, i: usize) -> Vec<f64> {
    let mut v = vec![0.0; d];
    v[i] = 1.0;
    v
}

/// Moments of the samples on each side of `h`, falling back to `fallback`
/// when a side has too few points for an SPD estimate.
fn split_moments(
    samples: &[Vec<f64>],
    h: &HalfSpace<f64>,
    fallback: &(Vec<f64>, CovMatrix<f64>),
) -> [(Vec<f64>, CovMatrix<f64>); 2] {
    let d = fallback.0.len();
    let mut m = [RunningMoments::new(d), RunningMoments::new(d)];
    for x in samples {
        m[h.side(x)].update(x);
    }
    m.map(|r| {
        if r.count() > d {
            if let Some(c) = r.covariance().and_then(|c| CovMatrix::new(c).ok()) {
                return (r.mean().to_vec(), c);
            }
        }
        fallback.clone()
    })
}

fn radical_inverse(mut i: u64, base: u64) -> f64 {
    let (mut f, mut r) = (1.0, 0.0);
    while i > 0 {
        f /= base as f64;
        r += f * (i % base) as f64;
        i /= base;
    }
    r
}

impl Scenario {
    pub fn new(config: ScenarioConfig) -> Result<Self> {
        config.validate()?;
        let seed = config.seed;
        let target = match &config.target {
            TargetConfig::GaussMix { xi, d, s, dim } => {
                TargetModel::GaussMix(GaussMixSpec::new(*xi, *d, *s, *dim)?)
            }
            TargetConfig::Banana { b, dim } => TargetModel::Banana(BananaSpec::new(*b, *dim)?),
            TargetConfig::Loh { data: None } => TargetModel::Loh(LohSpec::bundled()),
            TargetConfig::Loh { data: Some(p) } => {
                let f = std::io::BufReader::new(std::fs::File::open(p)?);
                TargetModel::Loh(LohSpec::new(read_loh_csv(f)?)?)
            }
        };
        let dim = target.dim();
        let (init, preliminary, start_dist) = match &config.target {
            TargetConfig::GaussMix { xi, d, s, .. } => {
                let id = |v: f64| CovMatrix::new(Matrix::scaled_identity(dim, v));
                let mu = |c: f64| vec![c; dim];
                let c1 = GaussianParams::new(mu(-1.5 * d), id(0.5)?)?;
                let c2 = GaussianParams::new(mu(1.5 * d), id(0.5 * s)?)?;
                let mixture = MixtureState::new(vec![0.5, 0.5], vec![c1.clone(), c2.clone()])?;
                let mut a = vec![0.0; dim];
                a[0] = 1.0;
                a[1] = 1.0;
                let regional = [
                    (c1.mean.clone(), c1.cov.clone()),
                    (c2.mean.clone(), c2.cov.clone()),
                ];
                let truth = MixtureState::new(
                    vec![*xi, 1.0 - xi],
                    vec![
                        GaussianParams::new(mu(-d), id(1.0)?)?,
                        GaussianParams::new(mu(*d), id(*s)?)?,
                    ],
                )?;
                let start_dist = truth.whole().clone();
                let init = InitialState {
                    whole_mean: mixture.whole().mean.clone(),
                    whole_cov: id(5.0 * s)?,
                    boundaries: [HalfSpace::new(a.clone(), 0.0), HalfSpace::new(a, 2.0)],
                    regional: [regional.clone(), regional],
                    mixture,
                };
                (init, None, start_dist)
            }
            TargetConfig::Banana { .. } | TargetConfig::Loh { .. } => {
                let is_loh = matches!(config.target, TargetConfig::Loh { .. });
                let mut rng = stream_rng(seed, STREAM_PRELIM - 1);
                let starts = if is_loh {
                    (0..config.chains)
                        .map(|i| halton_start(i as u64 + 1))
                        .collect()
                } else {
                    vec![draw_start(&config.start, dim, None, &mut rng)]
                };
                let pre =
                    preliminary_stage(&target, &starts, config.prelim_iterations, config.k, seed)?;
                let whole_cov = CovMatrix::new(pre.cov.clone())?;
                let boundaries = if is_loh {
                    [
                        HalfSpace::new(unit(dim, 1), 0.0),
                        HalfSpace::new(unit(dim, 1), 1.0),
                    ]
                } else {
                    [
                        HalfSpace::new(unit(dim, 0), 0.0),
                        HalfSpace::new(unit(dim, 1), -1.0),
                    ]
                };
                let fallback = (pre.mean.clone(), whole_cov.clone());
                let regional = [
                    split_moments(&pre.samples, &boundaries[0], &fallback),
                    split_moments(&pre.samples, &boundaries[1], &fallback),
                ];
                let start_dist = GaussianParams::new(pre.mean.clone(), whole_cov.clone())?;
                let init = InitialState {
                    mixture: pre.mixture.clone(),
                    whole_mean: pre.mean.clone(),
                    whole_cov,
                    boundaries,
                    regional,
                };
                (init, Some(pre), start_dist)
            }
        };
        let oracle = if config.oracle_size == 0 {
            None
        } else {
            let mut rng = stream_rng(seed, STREAM_ORACLE);
            Some(if target.cdf(&vec![0.0; dim]).is_some() {
                OracleSet::from_target(&target, config.oracle_size, &mut rng)?
            } else {
                if config.reference_size == 0 {
                    return Err(Error::config(
                        "reference_size",
                        "target has no closed-form CDF; set reference_size",
                    ));
                }
                OracleSet::from_reference(
                    &target,
                    config.oracle_size,
                    config.reference_size,
                    &mut rng,
                )?
            })
        };
        let (order_coord, raster_axes) = match config.target {
            TargetConfig::Loh { .. } => (1, (1, 2)),
            _ => (0, (0, 1)),
        };
        Ok(Scenario {
            truth: target.true_mean(),
            config,
            target,
            init,
            preliminary,
            oracle,
            order_coord,
            raster_axes,
            start_dist,
        })
    }

    fn policy(&self, alg: Algorithm) -> ProposalPolicy<f64> {
        let w = self.config.prior_weight;
        let init = &self.init;
        let prior =
            |m: &[f64], c: &CovMatrix<f64>| RunningMoments::from_prior(m.to_vec(), c.entries(), w);
        match alg {
            Algorithm::Am => ProposalPolicy::Am(AmPolicy::new(
                prior(&init.whole_mean, &init.whole_cov),
                init.whole_cov.clone(),
            )),
            Algorithm::Rapt | Algorithm::Rapt2 => {
                let v = usize::from(alg == Algorithm::Rapt2);
                let reg = &init.regional[v];
                ProposalPolicy::Rapt(RaptPolicy {
                    boundary: init.boundaries[v].clone(),
                    regional: [prior(&reg[0].0, &reg[0].1), prior(&reg[1].0, &reg[1].1)],
                    whole: prior(&init.whole_mean, &init.whole_cov),
                    initial_regional: [reg[0].1.clone(), reg[1].1.clone()],
                    initial_whole: init.whole_cov.clone(),
                    alpha: self.config.alpha,
                    eps: eps_d(self.target.dim()),
                })
            }
            Algorithm::Raptor => ProposalPolicy::Raptor(RaptorPolicy::new(
                init.mixture.clone(),
                w,
                self.config.alpha,
            )),
        }
    }

    /// Chain starting points for replicate `rep`.
    pub fn starts(&self, rep: usize) -> Vec<Vec<f64>> {
        let c = &self.config;
        let mut rng = stream_rng(c.seed, STREAM_STARTS + rep as u64);
        (0..c.chains)
            .map(|i| match c.start {
                StartRule::Halton => halton_start((rep * c.chains + i) as u64 + 1),
                rule => draw_start(&rule, self.target.dim(), Some(&self.start_dist), &mut rng),
            })
            .collect()
    }
}

/// Halton point `i` on `[0.1, 0.9]³ × [−20, 20]`, returned in sampling coordinates.
pub fn halton_start(i: u64) -> Vec<f64> {
    let h: Vec<f64> = [2, 3, 5, 7]
        .iter()
        .map(|&b| radical_inverse(i, b))
        .collect();
    let mut v: Vec<f64> = h[..3].iter().map(|&u| (0.1 + 0.8 * u).logit()).collect();
    v.push(-20.0 + 40.0 * h[3]);
    v
}

/// Gaussian starts are overdispersed: twice the covariance of `around`.
fn draw_start<R: Rng>(
    rule: &StartRule,
    dim: usize,
    around: Option<&GaussianParams<f64>>,
    rng: &mut R,
) -> Vec<f64> {
    match (rule, around) {
        (StartRule::Gaussian, Some(g)) => sample_around(&g.mean, &g.cov.scaled(2.0), rng),
        (StartRule::Uniform { lo, hi }, _) => {
            (0..dim).map(|_| rng.random_range(*lo..*hi)).collect()
        }
        _ => vec![0.0; dim],
    }
}

/// Local (regional) estimate in sampling coordinates.
#[derive(Clone, Debug, PartialEq)]
pub struct LocalEstimate {
    pub weight: f64,
    pub mean: Vec<f64>,
    pub cov: Matrix<f64>,
}

impl LocalEstimate {
    pub fn corr(&self, i: usize, j: usize) -> f64 {
        self.cov[(i, j)] / (self.cov[(i, i)] * self.cov[(j, j)]).sqrt()
    }
}

/// Natural-scale sample means of the post-burn-in states labelled with one region.
#[derive(Clone, Debug, PartialEq)]
pub struct RegionMean {
    /// 1-based region label; 0 stands for the whole space.
    pub region: usize,
    pub count: usize,
    pub mean: Vec<f64>,
}

#[derive(Clone, Debug)]
pub struct ReplicateOutput {
    pub algorithm: Algorithm,
    pub replicate: usize,
    /// Pooled post-burn-in sample count.
    pub n: usize,
    pub summary: RunSummary,
    /// `(n, D̂_n)` at the configured checkpoints and at the final size.
    pub dn_trace: Vec<(usize, f64)>,
    pub local: Option<Vec<LocalEstimate>>,
    pub region_means: Option<Vec<RegionMean>>,
    /// Post-burn-in region-label changes per chain.
    pub switches: Option<Vec<usize>>,
    /// Final mixture with components in region order.
    pub final_mixture: Option<MixtureState<f64>>,
    /// Natural-scale states, `[iteration][chain][coord]` flattened, burn-in included.
    pub traces: Option<Vec<f64>>,
}

enum Labeller {
    Mixture(MixtureState<f64>),
    Half(HalfSpace<f64>),
}

impl Labeller {
    fn label(&self, x: &[f64]) -> usize {
        match self {
            Labeller::Mixture(m) => region_assign(x, m).index(),
            Labeller::Half(h) => h.side(x),
        }
    }
}

fn moments_estimate(
    r: &RunningMoments<f64>,
    fallback: &CovMatrix<f64>,
    weight: f64,
) -> LocalEstimate {
    LocalEstimate {
        weight,
        mean: r.mean().to_vec(),
        cov: r.covariance().unwrap_or_else(|| fallback.entries().clone()),
    }
}

/// Runs one replicate of one algorithm.
pub fn run_replicate(
    scn: &Scenario,
    alg: Algorithm,
    rep: usize,
    record_traces: bool,
) -> Result<ReplicateOutput> {
    let cfg = &scn.config;
    let target = &scn.target;
    let (m, d) = (cfg.chains, target.dim());
    let rngs = (0..m)
        .map(|i| stream_rng(cfg.seed, chain_stream(rep, i)))
        .collect();
    let mut pool = ChainPool::new(scn.starts(rep), rngs, scn.policy(alg), target)?;

    let post = cfg.iterations - cfg.burn_in;
    let mut samples: Vec<Vec<f64>> = Vec::with_capacity(post * m);
    let mut traces = record_traces.then(|| Vec::with_capacity(cfg.iterations * m * d));
    let (mut acc0, mut steps0) = (0u64, 0u64);
    for t in 1..=cfg.iterations {
        pool.sweep(target)?;
        if t == cfg.burn_in {
            for c in pool.chains() {
                acc0 += c.accepts;
                steps0 += c.steps;
            }
        }
        if t > cfg.burn_in {
            samples.extend(pool.chains().iter().map(|c| c.x.clone()));
        }
        if let Some(tr) = traces.as_mut() {
            for c in pool.chains() {
                tr.extend(target.to_natural(&c.x));
            }
        }
    }
    let (acc, steps) = pool
        .chains()
        .iter()
        .fold((0, 0), |(a, s), c| (a + c.accepts, s + c.steps));
    let ar = (acc - acc0) as f64 / (steps - steps0) as f64;

    let natural: Vec<Vec<f64>> = samples.iter().map(|x| target.to_natural(x)).collect();
    let means = sample_mean(&natural)?;
    let mut dn_trace = Vec::new();
    if let Some(oracle) = &scn.oracle {
        for &c in cfg
            .dn_checkpoints
            .iter()
            .filter(|&&c| c > 0 && c < samples.len())
        {
            dn_trace.push((c, dn_hat(&samples[..c], oracle)?));
        }
        dn_trace.push((samples.len(), dn_hat(&samples, oracle)?));
    }
    let summary = RunSummary::new(
        ar,
        means,
        scn.truth.as_deref(),
        dn_trace.last().map(|p| p.1),
    );

    let policy = pool.into_policy();
    let (local, labeller, final_mixture) = match &policy {
        ProposalPolicy::Raptor(p) => {
            let order = p.mixture().order_by_coord(scn.order_coord);
            let mix = p.mixture().reordered(&order)?;
            let local = mix
                .components()
                .iter()
                .zip(mix.weights())
                .map(|(c, &w)| LocalEstimate {
                    weight: w,
                    mean: c.mean.clone(),
                    cov: c.cov.entries().clone(),
                })
                .collect();
            (Some(local), Some(Labeller::Mixture(mix.clone())), Some(mix))
        }
        ProposalPolicy::Rapt(p) => {
            let total = (p.regional[0].count() + p.regional[1].count()) as f64;
            let local = (0..2)
                .map(|k| {
                    moments_estimate(
                        &p.regional[k],
                        &p.initial_regional[k],
                        p.regional[k].count() as f64 / total,
                    )
                })
                .collect();
            (Some(local), Some(Labeller::Half(p.boundary.clone())), None)
        }
        _ => (None, None, None),
    };

    let (region_means, switches) = match &labeller {
        Some(lab) => {
            let labels: Vec<usize> = samples.iter().map(|x| lab.label(x)).collect();
            let k = local.as_ref().map_or(2, Vec::len);
            let mut rm: Vec<RegionMean> = (0..k)
                .map(|r| {
                    let members: Vec<Vec<f64>> = natural
                        .iter()
                        .zip(&labels)
                        .filter(|(_, &l)| l == r)
                        .map(|(x, _)| x.clone())
                        .collect();
                    RegionMean {
                        region: r + 1,
                        count: members.len(),
                        mean: sample_mean(&members).unwrap_or_else(|_| vec![f64::NAN; d]),
                    }
                })
                .collect();
            rm.push(RegionMean {
                region: 0,
                count: natural.len(),
                mean: summary.coord_means.clone(),
            });
            let sw = (0..m)
                .map(|i| {
                    let seq: Vec<usize> = labels.iter().skip(i).step_by(m).copied().collect();
                    seq.windows(2).filter(|w| w[0] != w[1]).count()
                })
                .collect();
            (Some(rm), Some(sw))
        }
        None => (None, None),
    };

    Ok(ReplicateOutput {
        algorithm: alg,
        replicate: rep,
        n: samples.len(),
        summary,
        dn_trace,
        local,
        region_means,
        switches,
        final_mixture,
        traces,
    })
}

/// Across-replicate summary of one algorithm.
#[derive(Clone, Debug)]
pub struct Aggregate {
    pub algorithm: Algorithm,
    pub replications: usize,
    pub n: usize,
    pub ar: f64,
    pub means: Vec<f64>,
    pub mse: Option<Vec<f64>>,
    pub bias: Option<Vec<f64>>,
    pub dn_bar: Option<f64>,
    pub dn_trace: Vec<(usize, f64)>,
    pub local: Option<Vec<LocalEstimate>>,
    pub region_means: Option<Vec<RegionMean>>,
}

impl Aggregate {
    /// Coordinate-summed MSE.
    pub fn mse_sum(&self) -> Option<f64> {
        self.mse.as_ref().map(|m| m.iter().sum())
    }

    pub fn from_replicates(reps: &[&ReplicateOutput], truth: Option<&[f64]>) -> Result<Self> {
        let first = reps.first().ok_or(Error::EmptyInput)?;
        let b = reps.len() as f64;
        let replicate_means: Vec<Vec<f64>> =
            reps.iter().map(|r| r.summary.coord_means.clone()).collect();
        let means = sample_mean(&replicate_means)?;
        let (mse, bias) = match truth {
            Some(t) => {
                let (m, b) = mse_bias(&replicate_means, t)?;
                (Some(m), Some(b))
            }
            None => (None, None),
        };
        let dn: Vec<f64> = reps.iter().filter_map(|r| r.summary.dn_hat).collect();
        let dn_trace = first
            .dn_trace
            .iter()
            .enumerate()
            .map(|(i, &(n, _))| {
                let vals: Vec<f64> = reps.iter().map(|r| r.dn_trace[i].1).collect();
                Ok((n, dn_bar(&vals)?))
            })
            .collect::<Result<Vec<_>>>()?;
        let local = first.local.as_ref().map(|l0| {
            (0..l0.len())
                .map(|k| {
                    let ests: Vec<&LocalEstimate> = reps
                        .iter()
                        .filter_map(|r| r.local.as_ref().map(|l| &l[k]))
                        .collect();
                    let n = ests.len() as f64;
                    let d = l0[k].mean.len();
                    let mut cov = Matrix::zeros(d, d);
                    ests.iter().for_each(|e| cov.axpby(1.0, 1.0 / n, &e.cov));
                    LocalEstimate {
                        weight: ests.iter().map(|e| e.weight).sum::<f64>() / n,
                        mean: sample_mean(&ests.iter().map(|e| e.mean.clone()).collect::<Vec<_>>())
                            .unwrap_or_default(),
                        cov,
                    }
                })
                .collect()
        });
        let region_means = first.region_means.as_ref().map(|r0| {
            (0..r0.len())
                .map(|k| {
                    let rows: Vec<&RegionMean> = reps
                        .iter()
                        .filter_map(|r| r.region_means.as_ref().map(|v| &v[k]))
                        .collect();
                    let valid: Vec<Vec<f64>> = rows
                        .iter()
                        .filter(|r| r.count > 0)
                        .map(|r| r.mean.clone())
                        .collect();
                    RegionMean {
                        region: r0[k].region,
                        count: rows.iter().map(|r| r.count).sum(),
                        mean: sample_mean(&valid)
                            .unwrap_or_else(|_| vec![f64::NAN; r0[k].mean.len()]),
                    }
                })
                .collect()
        });
        Ok(Aggregate {
            algorithm: first.algorithm,
            replications: reps.len(),
            n: first.n,
            ar: reps.iter().map(|r| r.summary.acceptance_rate).sum::<f64>() / b,
            means,
            mse,
            bias,
            dn_bar: if dn.is_empty() {
                None
            } else {
                Some(dn_bar(&dn)?)
            },
            dn_trace,
            local,
            region_means,
        })
    }
}

#[derive(Clone, Debug)]
pub struct ExperimentResult {
    pub scenario: Scenario,
    pub hash: String,
    /// Ordered by algorithm (config order), then replicate.
    pub replicates: Vec<ReplicateOutput>,
    pub aggregates: Vec<Aggregate>,
}

impl ExperimentResult {
    pub fn aggregate(&self, alg: Algorithm) -> Option<&Aggregate> {
        self.aggregates.iter().find(|a| a.algorithm == alg)
    }

    pub fn replicates_of(&self, alg: Algorithm) -> impl Iterator<Item = &ReplicateOutput> {
        self.replicates.iter().filter(move |r| r.algorithm == alg)
    }
}

/// Runs every (algorithm, replicate) pair; replicates run on the rayon pool.
pub fn run_experiment(cfg: ScenarioConfig) -> Result<ExperimentResult> {
    let hash = cfg.hash();
    let scenario = Scenario::new(cfg)?;
    let c = &scenario.config;
    let jobs: Vec<(Algorithm, usize)> = c
        .algorithms
        .iter()
        .flat_map(|&a| (0..c.replications).map(move |r| (a, r)))
        .collect();
    let replicates = jobs
        .par_iter()
        .map(|&(a, r)| run_replicate(&scenario, a, r, c.traces && r == 0))
        .collect::<Result<Vec<_>>>()?;
    let aggregates = c
        .algorithms
        .iter()
        .map(|&a| {
            let reps: Vec<&ReplicateOutput> =
                replicates.iter().filter(|r| r.algorithm == a).collect();
            Aggregate::from_replicates(&reps, scenario.truth.as_deref())
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ExperimentResult {
        scenario,
        hash,
        replicates,
        aggregates,
    })
}
