//! Acceptance curves, the between/within chain statistic and the
//! three-sampler mean squared error protocol.

use std::time::Instant;

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::envelope::{Partition, Scheme};
use crate::error::{Error, Result};
use crate::interval::IntervalBox;
use crate::sampler::{derive_seed, rng_from_seed, LocalChain, RngSeed, TrioSampler};
use crate::shape::TargetShape;

/// Sampling caps for one point of an acceptance curve. Sampling stops at
/// whichever cap is reached first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SweepCaps {
    pub max_accepts: u64,
    pub max_trials: u64,
}

impl Default for SweepCaps {
    fn default() -> Self {
        SweepCaps {
            max_accepts: 10_000,
            max_trials: 100_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AcceptanceCurvePoint {
    pub partition_size: usize,
    pub guaranteed_lower_bound: f64,
    pub empirical_acceptance: f64,
    pub n_trials: u64,
    pub n_accepted: u64,
    /// Seconds spent sampling, when timing was requested.
    pub cpu_seconds: Option<f64>,
}

impl AcceptanceCurvePoint {
    /// Binomial standard error of the empirical acceptance.
    pub fn standard_error(&self) -> f64 {
        let a = self.empirical_acceptance;
        (a * (1.0 - a) / self.n_trials as f64).sqrt()
    }
}

/// Empirical acceptance of `partition` as it stands.
pub fn measure_acceptance<S: TargetShape>(
    partition: &Partition<S>,
    caps: SweepCaps,
    seed: RngSeed,
    timed: bool,
) -> Result<AcceptanceCurvePoint> {
    let start = Instant::now();
    let mut sampler = TrioSampler::new(partition, seed)?;
    while sampler.accepted() < caps.max_accepts && sampler.proposals() < caps.max_trials {
        sampler.draw()?;
    }
    let n_trials = sampler.proposals();
    let n_accepted = sampler.accepted();
    Ok(AcceptanceCurvePoint {
        partition_size: partition.len(),
        guaranteed_lower_bound: partition.acceptance_bounds()?.lo(),
        empirical_acceptance: if n_trials == 0 {
            0.0
        } else {
            n_accepted as f64 / n_trials as f64
        },
        n_trials,
        n_accepted,
        cpu_seconds: timed.then(|| start.elapsed().as_secs_f64()),
    })
}

/// Refines one partition through `sizes` (ascending) and measures the
/// acceptance at each. Size `k` of the list samples with seed
/// `derive_seed(seed, k)`.
pub fn sweep_partition<S: TargetShape>(
    partition: &mut Partition<S>,
    sizes: &[usize],
    caps: SweepCaps,
    seed: RngSeed,
    timed: bool,
) -> Result<Vec<AcceptanceCurvePoint>> {
    if sizes.windows(2).any(|w| w[0] > w[1]) || sizes.contains(&0) {
        return Err(Error::Config("sizes must be positive and ascending".into()));
    }
    let mut out = Vec::with_capacity(sizes.len());
    for (k, &size) in sizes.iter().enumerate() {
        partition.refine_to(size)?;
        out.push(measure_acceptance(partition, caps, derive_seed(seed, k as u64), timed)?);
    }
    Ok(out)
}

pub fn acceptance_sweep<S: TargetShape>(
    shape: S,
    domain: IntervalBox,
    scheme: Scheme,
    sizes: &[usize],
    caps: SweepCaps,
    seed: RngSeed,
) -> Result<Vec<AcceptanceCurvePoint>> {
    let mut partition = Partition::new(shape, domain, scheme)?;
    sweep_partition(&mut partition, sizes, caps, seed, false)
}

/// Per-coordinate between-chain (`b`) and within-chain (`w`) variation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BWReport {
    /// Population variance of the chain means.
    pub b: Vec<f64>,
    /// Mean of the population variances within each chain.
    pub w: Vec<f64>,
    /// `b / w`; 0 when both vanish, infinite when only `w` does.
    pub ratio: Vec<f64>,
}

impl BWReport {
    pub fn max_ratio(&self) -> f64 {
        self.ratio.iter().copied().fold(0.0, f64::max)
    }
}

/// Running mean and population variance (Welford).
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct RunningMoments {
    n: u64,
    mean: f64,
    m2: f64,
}

impl RunningMoments {
    pub fn push(&mut self, x: f64) {
        self.n += 1;
        let delta = x - self.mean;
        self.mean += delta / self.n as f64;
        self.m2 += delta * (x - self.mean);
    }

    pub fn count(&self) -> u64 {
        self.n
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    pub fn variance(&self) -> f64 {
        if self.n == 0 {
            0.0
        } else {
            (self.m2 / self.n as f64).max(0.0)
        }
    }
}

fn ratio(b: f64, w: f64) -> f64 {
    if w > 0.0 {
        b / w
    } else if b > 0.0 {
        f64::INFINITY
    } else {
        0.0
    }
}

/// B/W from per-chain, per-coordinate moments of equal-length chains.
pub fn bw_from_moments(moments: &[Vec<RunningMoments>]) -> Result<BWReport> {
    let m = moments.len();
    if m < 2 {
        return Err(Error::InsufficientChains);
    }
    let len = moments[0].first().map_or(0, RunningMoments::count);
    let dim = moments[0].len();
    if len < 2 || dim == 0 || moments.iter().any(|c| c.len() != dim || c[0].count() != len) {
        return Err(Error::InsufficientChains);
    }
    let mut report = BWReport {
        b: Vec::with_capacity(dim),
        w: Vec::with_capacity(dim),
        ratio: Vec::with_capacity(dim),
    };
    for k in 0..dim {
        let mut between = RunningMoments::default();
        let mut within = 0.0;
        for chain in moments {
            between.push(chain[k].mean());
            within += chain[k].variance();
        }
        let b = between.variance();
        let w = within / m as f64;
        report.b.push(b);
        report.w.push(w);
        report.ratio.push(ratio(b, w));
    }
    Ok(report)
}

/// B/W over whole chains, each a sequence of points of equal dimension.
pub fn bw_statistic<C: AsRef<[Vec<f64>]>>(chains: &[C]) -> Result<BWReport> {
    let moments: Vec<Vec<RunningMoments>> = chains
        .iter()
        .map(|c| {
            let c = c.as_ref();
            let dim = c.first().map_or(0, Vec::len);
            let mut acc = vec![RunningMoments::default(); dim];
            for x in c {
                if x.len() != dim {
                    return Err(Error::InsufficientChains);
                }
                for (a, &v) in acc.iter_mut().zip(x) {
                    a.push(v);
                }
            }
            Ok(acc)
        })
        .collect::<Result<_>>()?;
    bw_from_moments(&moments)
}

/// Settings of the local Metropolis B/W experiment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BwExperimentConfig {
    pub n_chains: usize,
    pub cube_side: f64,
    /// Steps between evaluations of the stopping rule.
    pub check_every: usize,
    /// Burn-in ends when B/W is at most this for every coordinate.
    pub threshold: f64,
    /// Post burn-in run length as a multiple of the burn-in.
    pub post_factor: usize,
    /// Give up on the stopping rule after this many steps per chain.
    pub max_steps: usize,
}

impl Default for BwExperimentConfig {
    fn default() -> Self {
        BwExperimentConfig {
            n_chains: 4,
            cube_side: 6.0,
            check_every: 100,
            threshold: 0.05,
            post_factor: 100,
            max_steps: 1_000_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BwTracePoint {
    pub step: usize,
    /// Running mean of the first coordinate, per chain.
    pub running_means: Vec<f64>,
    pub report: BWReport,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BwExperiment {
    pub starts: Vec<Vec<f64>>,
    /// Step at which the stopping rule fired.
    pub burn_in: Option<usize>,
    /// Per-chain running means (all coordinates) when the rule fired.
    pub means_at_burn_in: Option<Vec<Vec<f64>>>,
    /// Per-chain running means at the end of the run.
    pub final_means: Vec<Vec<f64>>,
    pub trace: Vec<BwTracePoint>,
}

/// Runs dispersed local Metropolis chains, started uniformly over the
/// domain, until B/W falls to the threshold, then for `post_factor` times
/// as long again. Chain `c` uses seed `derive_seed(seed, c + 1)`; the start
/// points come from `derive_seed(seed, 0)`.
pub fn lmhs_bw_experiment<S: TargetShape>(
    shape: &S,
    domain: &IntervalBox,
    config: &BwExperimentConfig,
    seed: RngSeed,
) -> Result<BwExperiment> {
    if config.n_chains < 2 {
        return Err(Error::InsufficientChains);
    }
    let check_every = config.check_every.max(1);
    let mut start_rng = rng_from_seed(derive_seed(seed, 0));
    let starts: Vec<Vec<f64>> = (0..config.n_chains)
        .map(|_| {
            domain
                .dims()
                .iter()
                .map(|iv| iv.lo() + start_rng.random::<f64>() * (iv.hi() - iv.lo()))
                .collect()
        })
        .collect();
    let mut chains = starts
        .iter()
        .enumerate()
        .map(|(c, s)| {
            LocalChain::new(shape, domain, s, config.cube_side, derive_seed(seed, c as u64 + 1))
                .map(LocalChain::without_history)
        })
        .collect::<Result<Vec<_>>>()?;
    let dim = domain.dim();
    let mut moments = vec![vec![RunningMoments::default(); dim]; config.n_chains];
    let record = |moments: &mut Vec<Vec<RunningMoments>>, chains: &Vec<LocalChain<'_, S>>| {
        for (acc, chain) in moments.iter_mut().zip(chains) {
            for (a, &v) in acc.iter_mut().zip(&chain.state().point) {
                a.push(v);
            }
        }
    };
    record(&mut moments, &chains);

    let mut trace = Vec::new();
    let mut burn_in = None;
    let mut means_at_burn_in = None;
    let mut step = 0;
    let mut end = config.max_steps;
    while step < end {
        for chain in chains.iter_mut() {
            chain.step()?;
        }
        record(&mut moments, &chains);
        step += 1;
        if step % check_every == 0 {
            let report = bw_from_moments(&moments)?;
            let running_means = moments.iter().map(|c| c[0].mean()).collect();
            if burn_in.is_none() && report.ratio.iter().all(|&r| r <= config.threshold) {
                burn_in = Some(step);
                means_at_burn_in = Some(moments.iter().map(|c| c.iter().map(RunningMoments::mean).collect()).collect());
                end = step.saturating_mul(config.post_factor + 1).min(config.max_steps.max(step));
            }
            trace.push(BwTracePoint {
                step,
                running_means,
                report,
            });
        }
    }
    Ok(BwExperiment {
        starts,
        burn_in,
        means_at_burn_in,
        final_means: moments
            .iter()
            .map(|c| c.iter().map(RunningMoments::mean).collect())
            .collect(),
        trace,
    })
}

/// Estimates of the target mean from one replicate of the MSE protocol.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReplicateEstimate {
    pub mrs: Vec<f64>,
    pub is: Vec<f64>,
    pub imhs: Vec<f64>,
    pub proposals: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MseReport {
    pub mse_mrs: f64,
    pub mse_is: f64,
    pub mse_imhs: f64,
    /// Pooled rejection acceptance over all replicates.
    pub acceptance: f64,
    pub replicates: Vec<ReplicateEstimate>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct MseConfig {
    pub n_mrs: usize,
    pub n_reps: usize,
    /// Proposal cap per replicate.
    pub max_trials: u64,
    /// Worker threads; 1 runs inline. Results do not depend on it.
    pub workers: usize,
}

impl Default for MseConfig {
    fn default() -> Self {
        MseConfig {
            n_mrs: 100,
            n_reps: 500,
            max_trials: 100_000_000,
            workers: 1,
        }
    }
}

fn one_replicate<S: TargetShape>(
    partition: &Partition<S>,
    n_mrs: usize,
    max_trials: u64,
    seed: RngSeed,
) -> Result<ReplicateEstimate> {
    let dim = partition.domain().dim();
    let mut sampler = TrioSampler::new(partition, seed)?;
    let mut mrs_sum = vec![0.0; dim];
    let mut is_sum = vec![0.0; dim];
    let mut is_weight = 0.0;
    let mut chain_sum = vec![0.0; dim];
    let mut chain_len = 0u64;
    let mut chain_state: Vec<f64> = Vec::new();
    let mut n_accepted = 0;
    while n_accepted < n_mrs {
        if sampler.proposals() >= max_trials {
            return Err(Error::TrialCapExceeded(max_trials));
        }
        let rec = sampler.draw()?;
        for (s, x) in is_sum.iter_mut().zip(&rec.point) {
            *s += rec.importance_weight * x;
        }
        is_weight += rec.importance_weight;
        if rec.imhs_accepted {
            chain_state.clone_from(&rec.point);
        }
        if rec.mrs_accepted {
            n_accepted += 1;
            for (s, x) in mrs_sum.iter_mut().zip(&rec.point) {
                *s += x;
            }
        }
        // The chain is averaged from the first rejection-accepted proposal on.
        if n_accepted > 0 {
            chain_len += 1;
            for (s, x) in chain_sum.iter_mut().zip(&chain_state) {
                *s += x;
            }
        }
    }
    Ok(ReplicateEstimate {
        mrs: mrs_sum.iter().map(|s| s / n_mrs as f64).collect(),
        is: is_sum.iter().map(|s| s / is_weight).collect(),
        imhs: chain_sum.iter().map(|s| s / chain_len as f64).collect(),
        proposals: sampler.proposals(),
    })
}

fn mean_squared_error(estimates: impl Iterator<Item = f64>, n: usize) -> f64 {
    estimates.sum::<f64>() / n as f64
}

fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Repeats, `n_reps` times, sampling until `n_mrs` rejection acceptances and
/// estimates the mean three ways from the shared proposals: the average of
/// the accepted points, the self-normalized importance estimate over all
/// proposals, and the chain average from the first accepted proposal on.
/// Replicate `j` uses seed `derive_seed(seed, j)`.
pub fn mse_protocol<S: TargetShape>(
    partition: &Partition<S>,
    true_mean: &[f64],
    config: &MseConfig,
    seed: RngSeed,
) -> Result<MseReport> {
    if true_mean.len() != partition.domain().dim() {
        return Err(Error::DimensionMismatch {
            expected: partition.domain().dim(),
            got: true_mean.len(),
        });
    }
    if config.n_mrs == 0 || config.n_reps == 0 {
        return Err(Error::Config("n_mrs and n_reps must be positive".into()));
    }
    let run = |j: usize| one_replicate(partition, config.n_mrs, config.max_trials, derive_seed(seed, j as u64));
    let replicates: Vec<ReplicateEstimate> = if config.workers > 1 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(config.workers)
            .build()
            .map_err(|e| Error::Config(e.to_string()))?;
        pool.install(|| (0..config.n_reps).into_par_iter().map(run).collect::<Result<_>>())?
    } else {
        (0..config.n_reps).map(run).collect::<Result<_>>()?
    };
    let n = replicates.len();
    let proposals: u64 = replicates.iter().map(|r| r.proposals).sum();
    Ok(MseReport {
        mse_mrs: mean_squared_error(replicates.iter().map(|r| squared_distance(&r.mrs, true_mean)), n),
        mse_is: mean_squared_error(replicates.iter().map(|r| squared_distance(&r.is, true_mean)), n),
        mse_imhs: mean_squared_error(replicates.iter().map(|r| squared_distance(&r.imhs, true_mean)), n),
        acceptance: (config.n_mrs * n) as f64 / proposals as f64,
        replicates,
    })
}
