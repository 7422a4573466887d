//! Per-realization interference and rates, and Monte Carlo estimators for
//! the two network-level figures of merit: the average sum-rate and the
//! epsilon-outage guaranteed sum-rate.
//!
//! Estimators are deterministic functions of (config, strategy, trials):
//! trial `t` of point `p` always draws from the same substream, trials are
//! reduced in index order, and worker count never changes a byte of output.

use rayon::prelude::*;

use crate::channel::{sample_direct_gains, ChannelRealization};
use crate::config::NetworkConfig;
use crate::error::{Error, Result};
use crate::power::PowerStrategy;
use crate::rng::{trial_rng, StreamFamily};

use rand::Rng;
use rand_distr::Exp1;

/// Which figure of merit an estimate refers to.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Metric {
    /// Expected total rate over channel realizations (no delay constraint).
    Average,
    /// Outage-constrained rate at the given epsilon (strict delay).
    GuaranteedEps(f64),
}

impl std::fmt::Display for Metric {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Metric::Average => f.write_str("average"),
            Metric::GuaranteedEps(eps) => write!(f, "guaranteed(eps={eps})"),
        }
    }
}

/// Monte Carlo estimate with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SumRateEstimate {
    /// nats/s
    pub mean: f64,
    /// sample standard deviation / sqrt(trials)
    pub stderr: f64,
    pub trials: usize,
    pub metric: Metric,
}

/// One cluster realization's outcome under a power strategy.
#[derive(Debug, Clone)]
pub struct TrialOutcome {
    /// Direct gains drawn for the realization.
    pub direct: Vec<f64>,
    /// Emitted power per link, 0 or 1.
    pub powers: Vec<f64>,
    /// Interference seen by each link; only meaningful (and nonzero) for
    /// active links, since inactive links have zero rate regardless.
    pub interference: Vec<f64>,
    /// Achieved rate per link in nats/s; zero wherever the power is zero.
    pub rates: Vec<f64>,
    /// Number of active links, m_j.
    pub active_count: usize,
}

impl TrialOutcome {
    pub fn sum_rate(&self) -> f64 {
        self.rates.iter().sum()
    }
}

/// Interference at the receiver of link `i`: sum over sampled cross gains
/// into `i`, weighted by the transmit powers.
pub fn interference_at(
    realization: &ChannelRealization,
    powers: &[f64],
    i: usize,
) -> Result<f64> {
    let n = realization.n();
    if powers.len() != n {
        return Err(Error::Index(format!(
            "powers length {} does not match cluster size {n}",
            powers.len()
        )));
    }
    if i >= n {
        return Err(Error::Index(format!("link index {i} outside 0..{n}")));
    }
    let mut sum = 0.0;
    for &k in realization.active() {
        if k != i {
            sum += realization.cross_gain(k, i) * powers[k];
        }
    }
    Ok(sum)
}

/// Shannon rate of one link on its cluster's subchannel:
/// `(W/M) log(1 + h p / (I + N0 W / M))`.
pub fn link_rate(h: f64, p: f64, interference: f64, w: f64, m: u32, n0: f64) -> f64 {
    let w_over_m = w / m as f64;
    let noise = n0 * w_over_m;
    w_over_m * (h * p / (interference + noise)).ln_1p()
}

/// Simulates one cluster: draws direct gains, applies the strategy, lazily
/// materializes cross gains for the active set, and evaluates all rates.
pub fn simulate_cluster<R: Rng + ?Sized>(
    config: &NetworkConfig,
    strategy: &PowerStrategy,
    rng: &mut R,
) -> TrialOutcome {
    let n = config.n();
    let direct = sample_direct_gains(n, rng);
    let powers: Vec<f64> = direct.iter().map(|&h| strategy.power(h)).collect();
    let active: Vec<usize> = (0..n).filter(|&i| powers[i] > 0.0).collect();
    let active_count = active.len();
    let realization = ChannelRealization::materialize(
        n,
        direct,
        active,
        config.alpha,
        &config.shadowing,
        rng,
    );
    let w_over_m = config.cluster_bandwidth();
    let noise = config.cluster_noise();
    let mut interference = vec![0.0; n];
    let mut rates = vec![0.0; n];
    for (i, i_val) in realization.interference_of_sampled(&powers) {
        interference[i] = i_val;
        rates[i] = w_over_m * (realization.direct_gain(i) / (i_val + noise)).ln_1p();
    }
    TrialOutcome {
        direct: realization.direct().to_vec(),
        powers,
        interference,
        rates,
        active_count,
    }
}

/// Simulates all M clusters of one network trial on a single stream.
pub fn simulate_network_trial<R: Rng + ?Sized>(
    config: &NetworkConfig,
    strategy: &PowerStrategy,
    rng: &mut R,
) -> Vec<TrialOutcome> {
    (0..config.m).map(|_| simulate_cluster(config, strategy, rng)).collect()
}

fn mean_stderr(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Monte Carlo estimate of the network average sum-rate.
pub fn average_sum_rate(
    config: &NetworkConfig,
    strategy: &PowerStrategy,
    trials: usize,
) -> Result<SumRateEstimate> {
    average_sum_rate_at_point(config, strategy, trials, 0)
}

/// Same as [`average_sum_rate`] with an explicit sweep-point index selecting
/// the substream family, so distinct sweep points never share randomness.
pub fn average_sum_rate_at_point(
    config: &NetworkConfig,
    strategy: &PowerStrategy,
    trials: usize,
    point: u32,
) -> Result<SumRateEstimate> {
    if trials < 2 {
        return Err(Error::domain("average_sum_rate needs trials >= 2"));
    }
    let sums: Vec<f64> = (0..trials as u32)
        .into_par_iter()
        .map(|t| {
            let mut rng = trial_rng(config.seed, StreamFamily::Trials, point, t);
            simulate_network_trial(config, strategy, &mut rng)
                .iter()
                .map(TrialOutcome::sum_rate)
                .sum()
        })
        .collect();
    let (mean, stderr) = mean_stderr(&sums);
    Ok(SumRateEstimate { mean, stderr, trials, metric: Metric::Average })
}

/// Interference observations at active links over `samples` realizations,
/// pooled across clusters and flattened in (trial, cluster, link) order.
pub fn interference_samples(
    config: &NetworkConfig,
    strategy: &PowerStrategy,
    samples: usize,
) -> Result<Vec<f64>> {
    interference_samples_at_point(config, strategy, samples, 0)
}

pub fn interference_samples_at_point(
    config: &NetworkConfig,
    strategy: &PowerStrategy,
    samples: usize,
    point: u32,
) -> Result<Vec<f64>> {
    if samples < 100 {
        return Err(Error::domain("interference sampling needs samples >= 100"));
    }
    let per_trial: Vec<Vec<f64>> = (0..samples as u32)
        .into_par_iter()
        .map(|t| {
            let mut rng = trial_rng(config.seed, StreamFamily::Quantile, point, t);
            let mut vals = Vec::new();
            for outcome in simulate_network_trial(config, strategy, &mut rng) {
                for (i, &p) in outcome.powers.iter().enumerate() {
                    if p > 0.0 {
                        vals.push(outcome.interference[i]);
                    }
                }
            }
            vals
        })
        .collect();
    Ok(per_trial.into_iter().flatten().collect())
}

/// Empirical `level`-quantile of the interference seen by active links.
pub fn interference_quantile(
    config: &NetworkConfig,
    strategy: &PowerStrategy,
    level: f64,
    samples: usize,
) -> Result<f64> {
    interference_quantile_at_point(config, strategy, level, samples, 0)
}

pub fn interference_quantile_at_point(
    config: &NetworkConfig,
    strategy: &PowerStrategy,
    level: f64,
    samples: usize,
    point: u32,
) -> Result<f64> {
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::domain(format!("quantile level must lie in (0, 1), got {level}")));
    }
    let mut values = interference_samples_at_point(config, strategy, samples, point)?;
    if values.len() < 100 {
        return Err(Error::InsufficientSamples { needed: 100, got: values.len() });
    }
    values.sort_by(f64::total_cmp);
    Ok(empirical_quantile_sorted(&values, level))
}

/// Inverse-ECDF quantile (smallest x with F(x) >= level) of sorted data.
pub fn empirical_quantile_sorted(sorted: &[f64], level: f64) -> f64 {
    let n = sorted.len();
    let idx = ((n as f64 * level).ceil() as usize).saturating_sub(1).min(n - 1);
    sorted[idx]
}

/// Monte Carlo estimate of the epsilon-outage guaranteed sum-rate.
///
/// The per-link guaranteed rate at direct gain h is
/// `(W/M) log(1 + g(h) h / (Q + N0W/M))` where Q is the empirical
/// `(1 - eps)`-quantile of the interference at active links. The expectation
/// over h uses the exact decomposition `E[R*] = q E[R* | h > tau]` for
/// threshold policies, drawing `h = tau + Exp(1)` (memorylessness), which
/// removes the dead mass below the threshold from the estimator variance.
pub fn guaranteed_sum_rate(
    config: &NetworkConfig,
    strategy: &PowerStrategy,
    eps: f64,
    samples: usize,
) -> Result<SumRateEstimate> {
    guaranteed_sum_rate_at_point(config, strategy, eps, samples, 0)
}

pub fn guaranteed_sum_rate_at_point(
    config: &NetworkConfig,
    strategy: &PowerStrategy,
    eps: f64,
    samples: usize,
    point: u32,
) -> Result<SumRateEstimate> {
    if !(eps > 0.0 && eps <= 0.5) {
        return Err(Error::domain(format!("eps must lie in (0, 0.5], got {eps}")));
    }
    if samples < 100 {
        return Err(Error::domain("guaranteed_sum_rate needs samples >= 100"));
    }
    let quantile =
        interference_quantile_at_point(config, strategy, 1.0 - eps, samples, point)?;
    let w_over_m = config.cluster_bandwidth();
    let denom = quantile + config.cluster_noise();
    let links = (config.n() * config.m as usize) as f64;

    let rates: Vec<f64> = (0..samples as u32)
        .into_par_iter()
        .map(|t| {
            let mut rng = trial_rng(config.seed, StreamFamily::GainDraws, point, t);
            match *strategy {
                PowerStrategy::OnOff { tau } | PowerStrategy::CustomThreshold { tau } => {
                    if tau.is_infinite() {
                        return 0.0;
                    }
                    let excess: f64 = rng.sample(Exp1);
                    let h = tau + excess;
                    (-tau).exp() * w_over_m * (h / denom).ln_1p()
                }
                PowerStrategy::FullPower => {
                    let h: f64 = rng.sample(Exp1);
                    w_over_m * (h / denom).ln_1p()
                }
            }
        })
        .collect();
    let (mean, stderr) = mean_stderr(&rates);
    Ok(SumRateEstimate {
        mean: links * mean,
        stderr: links * stderr,
        trials: samples,
        metric: Metric::GuaranteedEps(eps),
    })
}

/// Fraction of the Monte Carlo sum-rate contributed by links whose direct
/// gain exceeds the truncation level c log n.
pub fn truncation_contribution(
    config: &NetworkConfig,
    strategy: &PowerStrategy,
    c: f64,
    trials: usize,
) -> Result<f64> {
    if !(c > 1.0) {
        return Err(Error::domain("truncation constant c must exceed 1"));
    }
    if trials == 0 {
        return Err(Error::domain("truncation_contribution needs trials >= 1"));
    }
    let h_th = c * (config.n() as f64).ln();
    let parts: Vec<(f64, f64)> = (0..trials as u32)
        .into_par_iter()
        .map(|t| {
            let mut rng = trial_rng(config.seed, StreamFamily::Trials, 0, t);
            let mut total = 0.0;
            let mut tail = 0.0;
            for outcome in simulate_network_trial(config, strategy, &mut rng) {
                for (i, &rate) in outcome.rates.iter().enumerate() {
                    total += rate;
                    if outcome.direct[i] > h_th {
                        tail += rate;
                    }
                }
            }
            (total, tail)
        })
        .collect();
    let total: f64 = parts.iter().map(|p| p.0).sum();
    let tail: f64 = parts.iter().map(|p| p.1).sum();
    if total == 0.0 {
        return Ok(0.0);
    }
    Ok(tail / total)
}
