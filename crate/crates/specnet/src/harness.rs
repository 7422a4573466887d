//! Seeded Monte Carlo experiment driver: sweeps over cluster counts or
//! network sizes, strategy comparisons under common random numbers, and the
//! interference-concentration and scaling-law diagnostic suites.
//!
//! Every sweep point owns a substream family indexed by its position, so a
//! sweep rerun with the same spec reproduces identical bytes regardless of
//! how points or trials are scheduled.

use crate::asymptotics;
use crate::config::NetworkConfig;
use crate::error::{Error, Result};
use crate::metrics::{
    average_sum_rate_at_point, guaranteed_sum_rate_at_point, simulate_network_trial, Metric,
    SumRateEstimate,
};
use crate::power::{
    expected_onoff_utility, threshold_asymptotic, threshold_exact, threshold_fixed_point,
    PowerStrategy, SolveMethod, ThresholdSolution,
};
use crate::rng::{trial_rng, StreamFamily};

/// Networks larger than this refuse FullPower runs: the dense cross-gain
/// draw is quadratic in the cluster size, unlike the lazy on-off path.
pub const FULL_POWER_K_CAP: u32 = 1_000;

/// Default trial counts keeping the standard error below about one percent
/// of the mean at desk-scale runtimes.
pub fn default_trials(k: u32) -> usize {
    if k <= 1_000 {
        20_000
    } else if k <= 10_000 {
        2_000
    } else {
        200
    }
}

/// Swept parameter and its values.
#[derive(Debug, Clone)]
pub enum SweepAxis {
    /// Cluster counts, each of which must divide K.
    MOverDivisors(Vec<u32>),
    /// Network sizes at fixed M.
    KList(Vec<u32>),
    /// Shadowing probability grid.
    AlphaGrid(Vec<f64>),
    /// Mean shadowing factor grid.
    VarpiGrid(Vec<f64>),
}

/// Power policy selection for an experiment: either a threshold re-solved at
/// every sweep point from the point's (n, alpha_hat), or a fixed policy.
#[derive(Debug, Clone, Copy)]
pub enum StrategySpec {
    OnOffSolved(SolveMethod),
    Fixed(PowerStrategy),
}

#[derive(Debug, Clone)]
pub struct SweepSpec {
    pub base: NetworkConfig,
    pub axis: SweepAxis,
    pub strategy: StrategySpec,
    pub metric: Metric,
    /// Per-point trial count; `None` applies [`default_trials`].
    pub trials: Option<usize>,
}

/// One evaluated sweep point.
#[derive(Debug, Clone)]
pub struct SweepRow {
    pub axis_value: f64,
    /// Concrete scenario at this point.
    pub config: NetworkConfig,
    pub strategy: PowerStrategy,
    /// Solver that produced the threshold, when one ran.
    pub method: Option<SolveMethod>,
    pub estimate: SumRateEstimate,
    /// Closed-form prediction for this point, when one applies.
    pub predictor: Option<f64>,
    /// estimate.mean / predictor, when the predictor is positive.
    pub ratio: Option<f64>,
}

#[derive(Debug, Clone, Default)]
pub struct SweepResult {
    pub rows: Vec<SweepRow>,
    /// Points that failed numerically: (axis value, error message).
    pub failures: Vec<(f64, String)>,
}

/// Threshold for a sweep point. Clusters of one or two links sit outside
/// the solvers' domain: a single link faces no interference, so it should
/// always transmit (tau = 0), and a pair is handled by a grid search of the
/// same expected-utility objective.
pub fn solve_point_threshold(
    n: usize,
    alpha_hat: f64,
    method: SolveMethod,
) -> Result<ThresholdSolution> {
    if !(alpha_hat > 0.0) {
        return Err(Error::domain("threshold solving needs alpha_hat > 0"));
    }
    match n {
        0 => Err(Error::domain("cluster size must be positive")),
        1 => Ok(ThresholdSolution {
            tau: 0.0,
            q: 1.0,
            method: SolveMethod::GridSearch,
            objective_value: None,
        }),
        2 => {
            let mut best = (0.0, f64::NEG_INFINITY);
            for i in 0..=30_000 {
                let tau = i as f64 * 1e-4;
                let v = expected_onoff_utility(tau, 2, alpha_hat, 1.0, 1)?;
                if v > best.1 {
                    best = (tau, v);
                }
            }
            Ok(ThresholdSolution {
                tau: best.0,
                q: (-best.0).exp(),
                method: SolveMethod::GridSearch,
                objective_value: Some(best.1),
            })
        }
        _ => match method {
            SolveMethod::Asymptotic => threshold_asymptotic(n),
            SolveMethod::ExactRoot | SolveMethod::GridSearch => threshold_exact(n, alpha_hat),
            SolveMethod::FixedPoint => threshold_fixed_point(n, alpha_hat),
        },
    }
}

fn resolve_strategy(
    spec: StrategySpec,
    config: &NetworkConfig,
) -> Result<(PowerStrategy, Option<SolveMethod>)> {
    match spec {
        StrategySpec::Fixed(s) => Ok((s, None)),
        StrategySpec::OnOffSolved(method) => {
            let sol = solve_point_threshold(config.n(), config.alpha_hat(), method)?;
            Ok((PowerStrategy::OnOff { tau: sol.tau }, Some(sol.method)))
        }
    }
}

fn check_full_power_cap(strategy: &StrategySpec, k: u32) -> Result<()> {
    if matches!(strategy, StrategySpec::Fixed(PowerStrategy::FullPower))
        && k > FULL_POWER_K_CAP
    {
        return Err(Error::config(format!(
            "full-power runs are capped at K <= {FULL_POWER_K_CAP} (dense cross-gain sampling); got K = {k}"
        )));
    }
    Ok(())
}

/// Builds the concrete config of one sweep point.
fn point_config(base: &NetworkConfig, axis: &SweepAxis, idx: usize) -> Result<(f64, NetworkConfig)> {
    match axis {
        SweepAxis::MOverDivisors(ms) => {
            let m = ms[idx];
            let cfg = NetworkConfig::new(
                base.k,
                m,
                base.bandwidth_w,
                base.noise_n0,
                base.alpha,
                base.shadowing.clone(),
                base.seed,
            )?;
            Ok((m as f64, cfg))
        }
        SweepAxis::KList(ks) => {
            let k = ks[idx];
            let cfg = NetworkConfig::new(
                k,
                base.m,
                base.bandwidth_w,
                base.noise_n0,
                base.alpha,
                base.shadowing.clone(),
                base.seed,
            )?;
            Ok((k as f64, cfg))
        }
        SweepAxis::AlphaGrid(alphas) => {
            let alpha = alphas[idx];
            let cfg = NetworkConfig::new(
                base.k,
                base.m,
                base.bandwidth_w,
                base.noise_n0,
                alpha,
                base.shadowing.clone(),
                base.seed,
            )?;
            Ok((alpha, cfg))
        }
        SweepAxis::VarpiGrid(varpis) => {
            let varpi = varpis[idx];
            let cfg = NetworkConfig::new(
                base.k,
                base.m,
                base.bandwidth_w,
                base.noise_n0,
                base.alpha,
                base.shadowing.with_mean(varpi)?,
                base.seed,
            )?;
            Ok((varpi, cfg))
        }
    }
}

fn axis_len(axis: &SweepAxis) -> usize {
    match axis {
        SweepAxis::MOverDivisors(v) => v.len(),
        SweepAxis::KList(v) => v.len(),
        SweepAxis::AlphaGrid(v) => v.len(),
        SweepAxis::VarpiGrid(v) => v.len(),
    }
}

/// Closed-form prediction for one point, where one applies.
pub fn predictor_for(config: &NetworkConfig, metric: Metric) -> Option<f64> {
    let w = config.bandwidth_w;
    match metric {
        Metric::Average => {
            if config.alpha_hat() == 0.0 {
                asymptotics::closed_form_alpha0(config.k, config.m, w, config.noise_n0).ok()
            } else if config.n() == 1 {
                asymptotics::closed_form_m_equals_k(config.k, w, config.noise_n0)
                    .map(|(exact, _)| exact)
                    .ok()
            } else {
                asymptotics::avg_sum_rate_asymptote(config.k, config.m, config.alpha_hat(), w)
                    .ok()
            }
        }
        Metric::GuaranteedEps(_) => {
            let ah = config.alpha_hat();
            if ah > 0.0 {
                Some(w / ah * (config.k as f64).ln())
            } else {
                None
            }
        }
    }
}

/// Validates a sweep spec before any work starts: axis values must produce
/// legal configs (divisibility in particular) and full-power runs must stay
/// under the size cap.
pub fn validate_spec(spec: &SweepSpec) -> Result<()> {
    if let SweepAxis::KList(ks) = &spec.axis {
        for &k in ks {
            check_full_power_cap(&spec.strategy, k)?;
        }
    } else {
        check_full_power_cap(&spec.strategy, spec.base.k)?;
    }
    for idx in 0..axis_len(&spec.axis) {
        point_config(&spec.base, &spec.axis, idx)?;
    }
    Ok(())
}

/// Runs one estimate per axis point. Numerical failures at a point are
/// recorded in the result, not fatal; invalid specs fail up front.
pub fn run_sweep(spec: &SweepSpec) -> Result<SweepResult> {
    validate_spec(spec)?;
    let mut result = SweepResult::default();
    for idx in 0..axis_len(&spec.axis) {
        let (axis_value, config) = point_config(&spec.base, &spec.axis, idx)?;
        let trials = spec.trials.unwrap_or_else(|| default_trials(config.k));
        let point = idx as u32;
        let run = || -> Result<SweepRow> {
            let (strategy, method) = resolve_strategy(spec.strategy, &config)?;
            let estimate = match spec.metric {
                Metric::Average => average_sum_rate_at_point(&config, &strategy, trials, point)?,
                Metric::GuaranteedEps(eps) => {
                    guaranteed_sum_rate_at_point(&config, &strategy, eps, trials, point)?
                }
            };
            let predictor = predictor_for(&config, spec.metric);
            let ratio = predictor.filter(|&p| p > 0.0).map(|p| estimate.mean / p);
            Ok(SweepRow { axis_value, config: config.clone(), strategy, method, estimate, predictor, ratio })
        };
        match run() {
            Ok(row) => result.rows.push(row),
            Err(e) => result.failures.push((axis_value, e.to_string())),
        }
    }
    Ok(result)
}

/// One strategy's estimate in a comparison table.
#[derive(Debug, Clone)]
pub struct StrategyEstimate {
    pub strategy: PowerStrategy,
    pub method: Option<SolveMethod>,
    pub estimate: SumRateEstimate,
}

/// Estimates the average sum-rate of each strategy on the *same* substreams
/// (common random numbers), which cancels most of the channel noise out of
/// the comparison.
pub fn compare_strategies(
    config: &NetworkConfig,
    strategies: &[StrategySpec],
    trials: usize,
) -> Result<Vec<StrategyEstimate>> {
    if strategies.len() < 2 {
        return Err(Error::domain("compare_strategies needs at least two strategies"));
    }
    for spec in strategies {
        check_full_power_cap(spec, config.k)?;
    }
    strategies
        .iter()
        .map(|&spec| {
            let (strategy, method) = resolve_strategy(spec, config)?;
            let estimate = average_sum_rate_at_point(config, &strategy, trials, 0)?;
            Ok(StrategyEstimate { strategy, method, estimate })
        })
        .collect()
}

/// Result of the interference-concentration diagnostic.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConcentrationReport {
    /// Predicted interference mean, (n - 1) alpha_hat q.
    pub mu_n: f64,
    pub outcome: ConcentrationOutcome,
    /// Number of (trial, active link) observations pooled.
    pub observations: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ConcentrationOutcome {
    /// Fraction of observations with |I - mu_n| > rel_dev * mu_n.
    Exceedance(f64),
    /// mu_n = 0 (no shadowing or no activation): deviations are undefined.
    DegenerateZeroMean,
}

/// Measures how tightly the interference concentrates around its mean:
/// the fraction of (trial, active link) pairs whose interference deviates
/// from mu_n = (n-1) alpha_hat q by more than `rel_dev * mu_n`.
pub fn concentration_suite(
    config: &NetworkConfig,
    strategy: &PowerStrategy,
    trials: usize,
    rel_dev: f64,
) -> Result<ConcentrationReport> {
    if !(rel_dev > 0.0) {
        return Err(Error::domain("rel_dev must be positive"));
    }
    if trials == 0 {
        return Err(Error::domain("concentration_suite needs trials >= 1"));
    }
    let q = match strategy.tau() {
        Some(tau) => (-tau).exp(),
        None => 1.0,
    };
    let mu_n = (config.n() as f64 - 1.0) * config.alpha_hat() * q;

    use rayon::prelude::*;
    let per_trial: Vec<(usize, usize, usize)> = (0..trials as u32)
        .into_par_iter()
        .map(|t| {
            let mut rng = trial_rng(config.seed, StreamFamily::Diagnostics, 0, t);
            let mut exceeded = 0usize;
            let mut observed = 0usize;
            let mut max_active = 0usize;
            for outcome in simulate_network_trial(config, strategy, &mut rng) {
                max_active = max_active.max(outcome.active_count);
                for (i, &p) in outcome.powers.iter().enumerate() {
                    if p > 0.0 {
                        observed += 1;
                        if (outcome.interference[i] - mu_n).abs() > rel_dev * mu_n {
                            exceeded += 1;
                        }
                    }
                }
            }
            (exceeded, observed, max_active)
        })
        .collect();

    if per_trial.iter().all(|&(_, _, max_active)| max_active < 2) {
        return Err(Error::NoActiveLinks);
    }
    let observations: usize = per_trial.iter().map(|p| p.1).sum();
    if mu_n == 0.0 {
        return Ok(ConcentrationReport {
            mu_n,
            outcome: ConcentrationOutcome::DegenerateZeroMean,
            observations,
        });
    }
    let exceeded: usize = per_trial.iter().map(|p| p.0).sum();
    Ok(ConcentrationReport {
        mu_n,
        outcome: ConcentrationOutcome::Exceedance(exceeded as f64 / observations as f64),
        observations,
    })
}

/// One row of the scaling-law table.
#[derive(Debug, Clone)]
pub struct ScalingRow {
    pub k: u32,
    pub estimate: SumRateEstimate,
    /// (W / alpha_hat) log K
    pub predictor: f64,
    pub ratio: f64,
    /// |ratio - 1|
    pub abs_dev: f64,
}

/// Average sum-rate versus the (W/alpha_hat) log K law over increasing K,
/// with the on-off threshold re-solved exactly at every size.
pub fn scaling_suite(
    base: &NetworkConfig,
    k_list: &[u32],
    trials: Option<usize>,
) -> Result<Vec<ScalingRow>> {
    if !k_list.windows(2).all(|w| w[0] < w[1]) {
        return Err(Error::domain("k_list must be strictly increasing"));
    }
    let mut rows = Vec::with_capacity(k_list.len());
    for (idx, &k) in k_list.iter().enumerate() {
        let config = NetworkConfig::new(
            k,
            base.m,
            base.bandwidth_w,
            base.noise_n0,
            base.alpha,
            base.shadowing.clone(),
            base.seed,
        )?;
        let sol =
            solve_point_threshold(config.n(), config.alpha_hat(), SolveMethod::ExactRoot)?;
        let strategy = PowerStrategy::OnOff { tau: sol.tau };
        let t = trials.unwrap_or_else(|| default_trials(k));
        let estimate = average_sum_rate_at_point(&config, &strategy, t, idx as u32)?;
        let predictor = config.bandwidth_w / config.alpha_hat() * (k as f64).ln();
        let ratio = estimate.mean / predictor;
        rows.push(ScalingRow { k, estimate, predictor, ratio, abs_dev: (ratio - 1.0).abs() });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::Shadowing;

    fn lognormal_base(k: u32, alpha: f64, varpi: f64, seed: u64) -> NetworkConfig {
        NetworkConfig::new(
            k,
            1,
            1.0,
            1.0,
            alpha,
            Shadowing::truncated_lognormal(varpi, 1.0, 1e-3, 10.0).unwrap(),
            seed,
        )
        .unwrap()
    }

    #[test]
    fn empty_axis_gives_empty_result() {
        let spec = SweepSpec {
            base: lognormal_base(20, 0.5, 0.5, 1),
            axis: SweepAxis::MOverDivisors(vec![]),
            strategy: StrategySpec::OnOffSolved(SolveMethod::ExactRoot),
            metric: Metric::Average,
            trials: Some(10),
        };
        let result = run_sweep(&spec).unwrap();
        assert!(result.rows.is_empty());
        assert!(result.failures.is_empty());
    }

    #[test]
    fn nondivisor_m_fails_before_any_work() {
        let spec = SweepSpec {
            base: lognormal_base(20, 0.5, 0.5, 1),
            axis: SweepAxis::MOverDivisors(vec![1, 3]),
            strategy: StrategySpec::OnOffSolved(SolveMethod::ExactRoot),
            metric: Metric::Average,
            trials: Some(10),
        };
        let err = run_sweep(&spec).unwrap_err();
        assert!(err.to_string().contains("divide"));
    }

    #[test]
    fn m_sweep_is_nonincreasing_within_noise() {
        let spec = SweepSpec {
            base: lognormal_base(20, 0.5, 0.5, 2),
            axis: SweepAxis::MOverDivisors(vec![1, 2, 4, 5, 10, 20]),
            strategy: StrategySpec::OnOffSolved(SolveMethod::ExactRoot),
            metric: Metric::Average,
            trials: Some(4_000),
        };
        let result = run_sweep(&spec).unwrap();
        assert_eq!(result.rows.len(), 6);
        for pair in result.rows.windows(2) {
            let (a, b) = (&pair[0].estimate, &pair[1].estimate);
            let combined = (a.stderr.powi(2) + b.stderr.powi(2)).sqrt();
            assert!(
                b.mean <= a.mean + 3.0 * combined,
                "M = {} -> {}: {} vs {}",
                pair[0].axis_value,
                pair[1].axis_value,
                a.mean,
                b.mean
            );
        }
        let first = result.rows[0].estimate.mean;
        assert!(result.rows.iter().all(|r| r.estimate.mean <= first));
    }

    #[test]
    fn k_sweep_is_strictly_increasing() {
        let spec = SweepSpec {
            base: lognormal_base(100, 0.5, 0.5, 3),
            axis: SweepAxis::KList(vec![100, 400, 1600]),
            strategy: StrategySpec::OnOffSolved(SolveMethod::ExactRoot),
            metric: Metric::Average,
            trials: Some(2_000),
        };
        let result = run_sweep(&spec).unwrap();
        let means: Vec<f64> = result.rows.iter().map(|r| r.estimate.mean).collect();
        assert!(means.windows(2).all(|w| w[1] > w[0]), "means = {means:?}");
    }

    #[test]
    fn sweeps_are_bit_reproducible() {
        let spec = SweepSpec {
            base: lognormal_base(40, 0.5, 0.5, 4),
            axis: SweepAxis::MOverDivisors(vec![1, 2, 4]),
            strategy: StrategySpec::OnOffSolved(SolveMethod::ExactRoot),
            metric: Metric::Average,
            trials: Some(500),
        };
        let a = run_sweep(&spec).unwrap();
        let b = run_sweep(&spec).unwrap();
        for (ra, rb) in a.rows.iter().zip(&b.rows) {
            assert_eq!(ra.estimate.mean.to_bits(), rb.estimate.mean.to_bits());
            assert_eq!(ra.estimate.stderr.to_bits(), rb.estimate.stderr.to_bits());
        }
    }

    #[test]
    fn thread_count_does_not_change_results() {
        let spec = SweepSpec {
            base: lognormal_base(40, 0.5, 0.5, 5),
            axis: SweepAxis::KList(vec![40, 80]),
            strategy: StrategySpec::OnOffSolved(SolveMethod::ExactRoot),
            metric: Metric::Average,
            trials: Some(400),
        };
        let serial = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap()
            .install(|| run_sweep(&spec).unwrap());
        let parallel = rayon::ThreadPoolBuilder::new()
            .num_threads(8)
            .build()
            .unwrap()
            .install(|| run_sweep(&spec).unwrap());
        for (ra, rb) in serial.rows.iter().zip(&parallel.rows) {
            assert_eq!(ra.estimate.mean.to_bits(), rb.estimate.mean.to_bits());
        }
    }

    #[test]
    fn alpha_and_varpi_axes_build_points() {
        let spec = SweepSpec {
            base: lognormal_base(20, 0.5, 0.5, 6),
            axis: SweepAxis::AlphaGrid(vec![0.2, 0.8]),
            strategy: StrategySpec::Fixed(PowerStrategy::OnOff { tau: 1.0 }),
            metric: Metric::Average,
            trials: Some(200),
        };
        let result = run_sweep(&spec).unwrap();
        assert_eq!(result.rows.len(), 2);
        assert_eq!(result.rows[1].config.alpha, 0.8);

        let spec = SweepSpec {
            axis: SweepAxis::VarpiGrid(vec![0.3, 0.9]),
            ..spec
        };
        let result = run_sweep(&spec).unwrap();
        assert_eq!(result.rows.len(), 2);
        assert!((result.rows[0].config.shadowing.mean() - 0.3).abs() < 1e-12);
    }

    #[test]
    fn duplicated_strategy_compares_bit_identically() {
        let cfg = lognormal_base(50, 0.5, 0.5, 7);
        let spec = StrategySpec::Fixed(PowerStrategy::OnOff { tau: 1.2 });
        let table = compare_strategies(&cfg, &[spec, spec], 500).unwrap();
        assert_eq!(table[0].estimate.mean.to_bits(), table[1].estimate.mean.to_bits());
    }

    #[test]
    fn full_power_dominates_when_interference_is_free() {
        // alpha = 0: silencing a link can only lose rate, and under common
        // random numbers the dominance holds per draw, not just on average.
        let cfg = NetworkConfig::new(
            60,
            1,
            1.0,
            1.0,
            0.0,
            Shadowing::constant(0.5).unwrap(),
            8,
        )
        .unwrap();
        let table = compare_strategies(
            &cfg,
            &[
                StrategySpec::Fixed(PowerStrategy::FullPower),
                StrategySpec::Fixed(PowerStrategy::OnOff { tau: 1.0 }),
            ],
            2_000,
        )
        .unwrap();
        assert!(table[0].estimate.mean >= table[1].estimate.mean);
    }

    #[test]
    fn onoff_beats_full_power_under_strong_interference() {
        let cfg = lognormal_base(100, 0.5, 0.5, 9);
        let table = compare_strategies(
            &cfg,
            &[
                StrategySpec::OnOffSolved(SolveMethod::ExactRoot),
                StrategySpec::Fixed(PowerStrategy::FullPower),
            ],
            3_000,
        )
        .unwrap();
        let (on, full) = (&table[0].estimate, &table[1].estimate);
        let combined = (on.stderr.powi(2) + full.stderr.powi(2)).sqrt();
        assert!(on.mean - full.mean > 3.0 * combined);
    }

    #[test]
    fn full_power_cap_is_enforced() {
        let cfg = lognormal_base(2_000, 0.5, 0.5, 10);
        let err = compare_strategies(
            &cfg,
            &[
                StrategySpec::Fixed(PowerStrategy::FullPower),
                StrategySpec::OnOffSolved(SolveMethod::ExactRoot),
            ],
            100,
        )
        .unwrap_err();
        assert!(err.to_string().contains("capped"));
    }

    #[test]
    fn comparison_needs_two_strategies() {
        let cfg = lognormal_base(20, 0.5, 0.5, 11);
        assert!(compare_strategies(
            &cfg,
            &[StrategySpec::Fixed(PowerStrategy::FullPower)],
            100
        )
        .is_err());
    }

    #[test]
    fn concentration_improves_with_cluster_size() {
        let small = lognormal_base(100, 0.5, 1.0, 12);
        let sol = solve_point_threshold(100, 0.5, SolveMethod::ExactRoot).unwrap();
        let rep_small = concentration_suite(
            &small,
            &PowerStrategy::OnOff { tau: sol.tau },
            300,
            0.2,
        )
        .unwrap();

        let big = lognormal_base(2_000, 0.5, 1.0, 12);
        let sol = solve_point_threshold(2_000, 0.5, SolveMethod::ExactRoot).unwrap();
        let rep_big =
            concentration_suite(&big, &PowerStrategy::OnOff { tau: sol.tau }, 300, 0.2).unwrap();

        match (rep_small.outcome, rep_big.outcome) {
            (ConcentrationOutcome::Exceedance(s), ConcentrationOutcome::Exceedance(b)) => {
                assert!(s > b, "small-n exceedance {s} not above large-n {b}");
            }
            other => panic!("unexpected outcomes: {other:?}"),
        }
    }

    #[test]
    fn concentration_reports_degenerate_mean_without_shadowing() {
        let cfg = NetworkConfig::new(
            50,
            1,
            1.0,
            1.0,
            0.0,
            Shadowing::constant(0.5).unwrap(),
            13,
        )
        .unwrap();
        let rep =
            concentration_suite(&cfg, &PowerStrategy::OnOff { tau: 0.5 }, 100, 0.2).unwrap();
        assert_eq!(rep.mu_n, 0.0);
        assert_eq!(rep.outcome, ConcentrationOutcome::DegenerateZeroMean);
    }

    #[test]
    fn concentration_requires_active_links() {
        let cfg = lognormal_base(30, 0.5, 0.5, 14);
        let err = concentration_suite(
            &cfg,
            &PowerStrategy::OnOff { tau: f64::INFINITY },
            50,
            0.2,
        )
        .unwrap_err();
        assert!(matches!(err, Error::NoActiveLinks));
    }

    #[test]
    fn cluster_means_agree_with_each_other() {
        // Homogeneous network: per-cluster average sum-rates match within
        // statistical noise.
        let cfg = NetworkConfig::new(
            200,
            4,
            1.0,
            1.0,
            0.5,
            Shadowing::constant(0.8).unwrap(),
            15,
        )
        .unwrap();
        let strategy = PowerStrategy::OnOff { tau: 1.0 };
        let trials = 3_000usize;
        let mut sums = vec![Vec::with_capacity(trials); 4];
        for t in 0..trials {
            let mut rng = trial_rng(cfg.seed, StreamFamily::Trials, 0, t as u32);
            for (j, outcome) in simulate_network_trial(&cfg, &strategy, &mut rng)
                .iter()
                .enumerate()
            {
                sums[j].push(outcome.sum_rate());
            }
        }
        let stats: Vec<(f64, f64)> = sums
            .iter()
            .map(|v| {
                let n = v.len() as f64;
                let mean = v.iter().sum::<f64>() / n;
                let var = v.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
                (mean, (var / n).sqrt())
            })
            .collect();
        for i in 0..4 {
            for j in i + 1..4 {
                let tol = 4.0 * (stats[i].1.powi(2) + stats[j].1.powi(2)).sqrt();
                assert!(
                    (stats[i].0 - stats[j].0).abs() <= tol,
                    "clusters {i} and {j}: {} vs {}",
                    stats[i].0,
                    stats[j].0
                );
            }
        }
    }

    #[test]
    fn scaling_rows_stay_in_band() {
        let base = NetworkConfig::new(
            100,
            1,
            1.0,
            1.0,
            0.5,
            Shadowing::constant(1.0).unwrap(),
            16,
        )
        .unwrap();
        let rows = scaling_suite(&base, &[200, 1_000], Some(2_000)).unwrap();
        for row in &rows {
            assert!((0.4..=1.6).contains(&row.ratio), "K = {}: ratio {}", row.k, row.ratio);
        }
    }

    #[test]
    fn scaling_requires_increasing_sizes() {
        let base = lognormal_base(100, 0.5, 0.5, 17);
        assert!(scaling_suite(&base, &[1_000, 100], Some(100)).is_err());
    }

    #[test]
    fn degenerate_cluster_thresholds() {
        let single = solve_point_threshold(1, 0.5, SolveMethod::ExactRoot).unwrap();
        assert_eq!(single.tau, 0.0);
        assert_eq!(single.q, 1.0);
        let pair = solve_point_threshold(2, 0.25, SolveMethod::ExactRoot).unwrap();
        assert_eq!(pair.method, SolveMethod::GridSearch);
        assert!(pair.tau > 0.0 && pair.tau < 3.0);
    }
}
