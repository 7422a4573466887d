//! Power strategies and threshold solvers for the on-off policy.
//!
//! A link transmits at full power exactly when its direct gain exceeds a
//! threshold tau, so the activation probability is q = e^(-tau). Three
//! solvers produce tau for a cluster of n links with effective cross-gain
//! mean alpha_hat:
//!
//! - `threshold_asymptotic`: the large-n form log n - 2 log log n, with the
//!   O(1) slack taken as zero;
//! - `threshold_exact`: root of the first-order condition of the expected
//!   on-off utility, the reference solver;
//! - `threshold_fixed_point`: solution of tau^2 e^tau = n alpha_hat, the
//!   simplified stationarity condition.

use crate::error::{Error, Result};

/// Transmit-power policy as a function of the link's own direct gain.
/// Powers are normalized to the maximum, so emitted values are 0 or 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PowerStrategy {
    /// Threshold policy with tau produced by a named solver.
    OnOff { tau: f64 },
    /// Everyone transmits, the selfish baseline.
    FullPower,
    /// Threshold policy with a caller-chosen tau.
    CustomThreshold { tau: f64 },
}

impl PowerStrategy {
    /// Power emitted for direct gain `h`.
    pub fn power(&self, h: f64) -> f64 {
        match *self {
            PowerStrategy::OnOff { tau } | PowerStrategy::CustomThreshold { tau } => {
                on_off_power(h, tau)
            }
            PowerStrategy::FullPower => 1.0,
        }
    }

    /// Threshold of the policy, if it has one.
    pub fn tau(&self) -> Option<f64> {
        match *self {
            PowerStrategy::OnOff { tau } | PowerStrategy::CustomThreshold { tau } => Some(tau),
            PowerStrategy::FullPower => None,
        }
    }

    /// Short label used in CSV output.
    pub fn kind_label(&self) -> &'static str {
        match self {
            PowerStrategy::OnOff { .. } => "onoff",
            PowerStrategy::FullPower => "full",
            PowerStrategy::CustomThreshold { .. } => "custom",
        }
    }
}

/// Step policy: 1 iff h > tau. Ties resolve to off, a zero-probability
/// event fixed for determinism.
pub fn on_off_power(h: f64, tau: f64) -> f64 {
    if h > tau {
        1.0
    } else {
        0.0
    }
}

/// Which solver produced a threshold.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveMethod {
    Asymptotic,
    ExactRoot,
    FixedPoint,
    /// Fallback when the first-order condition had no bracketed root.
    GridSearch,
}

impl std::fmt::Display for SolveMethod {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            SolveMethod::Asymptotic => "asymptotic",
            SolveMethod::ExactRoot => "exact",
            SolveMethod::FixedPoint => "fixed-point",
            SolveMethod::GridSearch => "grid-search",
        };
        f.write_str(s)
    }
}

/// A solved activation threshold.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThresholdSolution {
    pub tau: f64,
    /// Activation probability, always exactly e^(-tau).
    pub q: f64,
    pub method: SolveMethod,
    /// Expected on-off utility at tau, normalized to W = M = 1. The
    /// asymptotic solver leaves it unset since it does not see alpha_hat.
    pub objective_value: Option<f64>,
}

/// Large-n threshold: tau = log n - 2 log log n, so q = log^2(n) / n.
pub fn threshold_asymptotic(n: usize) -> Result<ThresholdSolution> {
    if n < 3 {
        return Err(Error::domain(format!(
            "threshold_asymptotic needs n >= 3 so log log n > 0, got {n}"
        )));
    }
    let ln_n = (n as f64).ln();
    let tau = ln_n - 2.0 * ln_n.ln();
    Ok(ThresholdSolution { tau, q: (-tau).exp(), method: SolveMethod::Asymptotic, objective_value: None })
}

/// Expected per-cluster utility of the on-off policy at threshold `tau`:
///
/// ```text
///   (n e^(-tau) W / M) * log(1 + tau e^tau / (n alpha_hat))
/// ```
pub fn expected_onoff_utility(
    tau: f64,
    n: usize,
    alpha_hat: f64,
    bandwidth_w: f64,
    clusters_m: u32,
) -> Result<f64> {
    if tau < 0.0 || tau.is_nan() {
        return Err(Error::domain(format!("tau must be >= 0, got {tau}")));
    }
    if n < 2 {
        return Err(Error::domain(format!("utility needs n >= 2, got {n}")));
    }
    if !(alpha_hat > 0.0) {
        return Err(Error::domain(format!("alpha_hat must be positive, got {alpha_hat}")));
    }
    if tau.is_infinite() {
        return Ok(0.0);
    }
    let c = n as f64 * alpha_hat;
    // For large tau the ratio tau e^tau / c overflows f64 even though the
    // utility itself underflows; switch to log form there.
    let log_term = if tau > 1.0 && tau + tau.ln() - c.ln() > 30.0 {
        tau + tau.ln() - c.ln()
    } else {
        (tau * tau.exp() / c).ln_1p()
    };
    Ok(n as f64 * (-tau).exp() * bandwidth_w / clusters_m as f64 * log_term)
}

/// First-order condition of the expected on-off utility in tau.
fn utility_stationarity(tau: f64, n_alpha_hat: f64) -> f64 {
    let te = tau * tau.exp();
    -(-tau).exp() * (te / n_alpha_hat).ln_1p() + (1.0 + tau) / (n_alpha_hat + te)
}

/// Bisection on a bracketed sign change; `tol` is the final bracket width.
pub fn bisect<F: Fn(f64) -> f64>(
    f: F,
    mut lo: f64,
    mut hi: f64,
    tol: f64,
    max_iter: usize,
) -> Result<f64> {
    let mut flo = f(lo);
    let fhi = f(hi);
    if flo == 0.0 {
        return Ok(lo);
    }
    if fhi == 0.0 {
        return Ok(hi);
    }
    if flo.signum() == fhi.signum() {
        return Err(Error::NoRoot { lo, hi });
    }
    for _ in 0..max_iter {
        let mid = 0.5 * (lo + hi);
        if hi - lo < tol {
            return Ok(mid);
        }
        let fmid = f(mid);
        if fmid == 0.0 {
            return Ok(mid);
        }
        if fmid.signum() == flo.signum() {
            lo = mid;
            flo = fmid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Argmax of `f` on an inclusive grid from `lo` to `hi` with step `step`.
fn grid_search_max<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, step: f64) -> (f64, f64) {
    let mut best_x = lo;
    let mut best = f(lo);
    let steps = ((hi - lo) / step).ceil() as usize;
    for i in 1..=steps {
        let x = (lo + i as f64 * step).min(hi);
        let v = f(x);
        if v > best {
            best = v;
            best_x = x;
        }
    }
    (best_x, best)
}

/// Reference threshold: root of the utility's first-order condition on
/// [0.1, log n], found by bisection to a 1e-9 bracket. If the condition has
/// no sign change there, falls back to a 1e-4-step grid search over the same
/// bracket and flags the method accordingly.
pub fn threshold_exact(n: usize, alpha_hat: f64) -> Result<ThresholdSolution> {
    if n < 3 {
        return Err(Error::domain(format!("threshold_exact needs n >= 3, got {n}")));
    }
    if !(alpha_hat > 0.0 && alpha_hat <= 1.0) {
        return Err(Error::domain(format!(
            "threshold_exact needs alpha_hat in (0, 1], got {alpha_hat}"
        )));
    }
    let c = n as f64 * alpha_hat;
    let lo = 0.1;
    let hi = (n as f64).ln();
    let (tau, method) = match bisect(|t| utility_stationarity(t, c), lo, hi, 1e-9, 200) {
        Ok(root) => (root, SolveMethod::ExactRoot),
        Err(Error::NoRoot { .. }) => {
            let (x, _) = grid_search_max(
                |t| expected_onoff_utility(t, n, alpha_hat, 1.0, 1).unwrap_or(f64::NEG_INFINITY),
                lo,
                hi,
                1e-4,
            );
            (x, SolveMethod::GridSearch)
        }
        Err(e) => return Err(e),
    };
    Ok(ThresholdSolution {
        tau,
        q: (-tau).exp(),
        method,
        objective_value: Some(expected_onoff_utility(tau, n, alpha_hat, 1.0, 1)?),
    })
}

/// Simplified stationarity solver: tau with tau^2 e^tau = n alpha_hat.
/// The left side is strictly increasing for tau > 0, so bisection applies.
pub fn threshold_fixed_point(n: usize, alpha_hat: f64) -> Result<ThresholdSolution> {
    let c = n as f64 * alpha_hat;
    if !(c > 1.0) {
        return Err(Error::domain(format!(
            "threshold_fixed_point needs n * alpha_hat > 1, got {c}"
        )));
    }
    let hi = c.ln() + 1.0;
    let tau = bisect(|t| t * t * t.exp() - c, 1e-12, hi, 1e-12, 300)?;
    Ok(ThresholdSolution {
        tau,
        q: (-tau).exp(),
        method: SolveMethod::FixedPoint,
        objective_value: Some(expected_onoff_utility(tau, n, alpha_hat, 1.0, 1)?),
    })
}
