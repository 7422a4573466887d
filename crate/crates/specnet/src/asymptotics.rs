//! Closed-form predictors and bounds for the network sum-rate, used as
//! oracles against the Monte Carlo estimators.
//!
//! Everything here is a pure, deterministic formula evaluation. Asymptotic
//! statements are evaluated with their `1 + o(1)` factors as one and `O(1)`
//! slacks as zero, so finite-size comparisons against simulation carry
//! tolerance bands rather than equalities.

use std::fmt;

use crate::config::ShadowMoments;
use crate::error::{Error, Result};
use crate::expint::{e1, EULER_GAMMA};

/// Interference regime or bound family a report belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    Strong,
    Moderate,
    Weak,
    AlphaZero,
    MEqualsK,
    MThetaK,
    GuaranteedUpper,
    GuaranteedLower,
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Regime::Strong => "strong",
            Regime::Moderate => "moderate",
            Regime::Weak => "weak",
            Regime::AlphaZero => "alpha-zero",
            Regime::MEqualsK => "m-equals-k",
            Regime::MThetaK => "m-theta-k",
            Regime::GuaranteedUpper => "guaranteed-upper",
            Regime::GuaranteedLower => "guaranteed-lower",
        };
        f.write_str(s)
    }
}

/// One evaluated bound with its defining inputs echoed for provenance.
#[derive(Debug, Clone)]
pub struct BoundReport {
    pub name: &'static str,
    pub value: f64,
    pub regime: Regime,
    pub inputs: Vec<(&'static str, f64)>,
}

/// Classifies the interference regime from n * q * alpha_hat. The source
/// statements are asymptotic (omega(1) / Theta(1) / o(1)); the numeric
/// thresholds are this crate's desk-scale convention.
pub fn classify_regime(n_q_alpha_hat: f64) -> Regime {
    if n_q_alpha_hat >= 10.0 {
        Regime::Strong
    } else if n_q_alpha_hat > 0.1 {
        Regime::Moderate
    } else {
        Regime::Weak
    }
}

/// Strong-interference average sum-rate asymptote, (W / alpha_hat) log(K/M).
pub fn avg_sum_rate_asymptote(k: u32, m: u32, alpha_hat: f64, w: f64) -> Result<f64> {
    if m == 0 || k / m.max(1) < 3 {
        return Err(Error::domain(format!(
            "asymptote needs K/M >= 3, got K = {k}, M = {m}"
        )));
    }
    if !(alpha_hat > 0.0) {
        return Err(Error::domain("asymptote needs alpha_hat > 0"));
    }
    Ok(w / alpha_hat * (k as f64 / m as f64).ln())
}

/// Scenario-level constants entering the single-user utility upper bound.
#[derive(Debug, Clone, Copy)]
pub struct XiParams {
    pub n: usize,
    pub alpha: f64,
    pub moments: ShadowMoments,
    /// Activation probability of the shared on-off policy.
    pub q: f64,
    pub bandwidth_w: f64,
    pub clusters_m: u32,
    pub noise_n0: f64,
}

impl XiParams {
    fn noise_per_cluster(&self) -> f64 {
        self.noise_n0 * self.bandwidth_w / self.clusters_m as f64
    }

    /// lambda = (n - 1) alpha_hat q + N0 W / M
    pub fn lambda(&self) -> f64 {
        let ah = self.alpha * self.moments.varpi;
        (self.n as f64 - 1.0) * ah * self.q + self.noise_per_cluster()
    }

    /// lambda' = (n - 2) alpha_hat q + N0 W / M
    pub fn lambda_prime(&self) -> f64 {
        let ah = self.alpha * self.moments.varpi;
        (self.n as f64 - 2.0) * ah * self.q + self.noise_per_cluster()
    }
}

/// Third-order expansion of the expected utility upper bound for one link
/// transmitting power `p` at direct gain `h`, all other links following the
/// on-off policy with activation probability `q`:
///
/// ```text
///   (W/M)(h/lambda) p
///     + n (alpha W mu / (M lambda')) (1 - varpi p/lambda'
///         + 2 kappa (p/lambda')^2 - 6 eta (p/lambda')^3)
///     + n (1 - alpha) W mu / (M lambda')
/// ```
///
/// with mu = (1 + tau) e^(-tau) and tau = -log q. Valid only as lambda' gets
/// large; refuses below lambda' = 10 rather than extrapolate.
pub fn xi_upper_bound(p: f64, h: f64, params: &XiParams) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::domain(format!("power must lie in [0, 1], got {p}")));
    }
    if !(h >= 0.0) {
        return Err(Error::domain("direct gain must be nonnegative"));
    }
    if !(params.q > 0.0 && params.q <= 1.0) {
        return Err(Error::domain("activation probability must lie in (0, 1]"));
    }
    let lp = params.lambda_prime();
    if lp < 10.0 {
        return Err(Error::Validity(format!(
            "xi expansion needs lambda' >= 10, got {lp:.4}"
        )));
    }
    let w_over_m = params.bandwidth_w / params.clusters_m as f64;
    let tau = -params.q.ln();
    let mu = (1.0 + tau) * params.q;
    let m = &params.moments;
    let ratio = p / lp;
    let poly = 1.0 - m.varpi * ratio + 2.0 * m.kappa * ratio * ratio
        - 6.0 * m.eta * ratio * ratio * ratio;
    let n = params.n as f64;
    Ok(w_over_m * h / params.lambda() * p
        + n * params.alpha * w_over_m * mu / lp * poly
        + n * (1.0 - params.alpha) * w_over_m * mu / lp)
}

/// Interference-free network: average sum-rate (K W / M) e^(N0W/M) E1(N0W/M).
pub fn closed_form_alpha0(k: u32, m: u32, w: f64, n0: f64) -> Result<f64> {
    if m == 0 || k == 0 {
        return Err(Error::domain("k and m must be positive"));
    }
    let noise = n0 * w / m as f64;
    if !(noise > 0.0) {
        return Err(Error::domain("closed form needs N0 W / M > 0"));
    }
    Ok(k as f64 * w / m as f64 * noise.exp() * e1(noise)?)
}

/// Single-link clusters (M = K): exact value W e^(N0W/K) E1(N0W/K) and its
/// large-K asymptote W (log K - log N0W - gamma).
pub fn closed_form_m_equals_k(k: u32, w: f64, n0: f64) -> Result<(f64, f64)> {
    if k < 2 {
        return Err(Error::domain("m-equals-k form needs K >= 2"));
    }
    let n0w = n0 * w;
    if !(n0w > 0.0) {
        return Err(Error::domain("m-equals-k form needs N0 W > 0"));
    }
    let x = n0w / k as f64;
    let exact = w * x.exp() * e1(x)?;
    let asymptote = w * ((k as f64).ln() - n0w.ln() - EULER_GAMMA);
    Ok((exact, asymptote))
}

/// Moderate/weak-interference upper bound (c M / N0) n q log n, tagged with
/// the regime inferred from n * q * alpha_hat.
pub fn bound_moderate_weak(
    n: usize,
    q: f64,
    m: u32,
    c: f64,
    n0: f64,
    w: f64,
    alpha_hat: f64,
) -> Result<BoundReport> {
    if !(c > 1.0) {
        return Err(Error::domain("the truncation constant c must exceed 1"));
    }
    if !(q >= 0.0 && q <= 1.0) {
        return Err(Error::domain("q must lie in [0, 1]"));
    }
    if !(n0 > 0.0) {
        return Err(Error::domain("bound needs N0 > 0"));
    }
    let nf = n as f64;
    let value = c * m as f64 / n0 * nf * q * nf.ln();
    Ok(BoundReport {
        name: "moderate-weak-upper",
        value,
        regime: classify_regime(nf * q * alpha_hat),
        inputs: vec![
            ("n", nf),
            ("q", q),
            ("m", m as f64),
            ("c", c),
            ("n0", n0),
            ("w", w),
            ("alpha_hat", alpha_hat),
        ],
    })
}

/// Upper bound on the average sum-rate when M grows like K: `gamma_clusters`
/// clusters hold a single active link and the rest hold `m_active > 1`.
pub fn bound_theta_k(
    m: u32,
    gamma_clusters: u32,
    m_active: u32,
    k: u32,
    w: f64,
    n0: f64,
    alpha: f64,
) -> Result<BoundReport> {
    if gamma_clusters > m {
        return Err(Error::domain("gamma_clusters cannot exceed the cluster count"));
    }
    if m_active < 2 {
        return Err(Error::domain("bound_theta_k needs m_active >= 2"));
    }
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::domain("alpha must lie in [0, 1]"));
    }
    let n0w = n0 * w;
    if !(n0w > 0.0) {
        return Err(Error::domain("bound needs N0 W > 0"));
    }
    let log_term = (k as f64 / n0w).ln_1p();
    let mf = m as f64;
    let single = gamma_clusters as f64 * w / mf * log_term;
    let multi = (mf - gamma_clusters as f64) * w / mf
        * m_active as f64
        * (1.0 - alpha).powi(m_active as i32 - 1)
        * log_term;
    Ok(BoundReport {
        name: "m-theta-k-upper",
        value: single + multi,
        regime: Regime::MThetaK,
        inputs: vec![
            ("m", mf),
            ("gamma_clusters", gamma_clusters as f64),
            ("m_active", m_active as f64),
            ("k", k as f64),
            ("w", w),
            ("n0", n0),
            ("alpha", alpha),
        ],
    })
}

/// psi_n = log n + 2 log log n, the direct-gain cap used by the guaranteed
/// lower bound.
pub fn psi_n(n: usize) -> Result<f64> {
    if n < 3 {
        return Err(Error::domain("psi_n needs n >= 3"));
    }
    let ln_n = (n as f64).ln();
    Ok(ln_n + 2.0 * ln_n.ln())
}

/// Composite Simpson rule on [a, b].
fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, panels: usize) -> f64 {
    debug_assert!(panels % 2 == 0);
    let h = (b - a) / panels as f64;
    let mut acc = f(a) + f(b);
    for i in 1..panels {
        let weight = if i % 2 == 1 { 4.0 } else { 2.0 };
        acc += weight * f(a + i as f64 * h);
    }
    acc * h / 3.0
}

/// Guaranteed sum-rate bounds under the on-off policy with threshold `tau`:
///
/// - upper: (W / alpha_hat) log K;
/// - lower: n W times the integral over nu in [tau, psi_n] of
///   `log(1 + nu / ((n-1) alpha_hat q (1 + eps_conc) + N0W/M)) e^(-nu)`,
///   evaluated by quadrature. `eps_conc` is the interference concentration
///   slack.
pub fn guaranteed_bounds(
    k: u32,
    m: u32,
    alpha_hat: f64,
    w: f64,
    n0: f64,
    tau: f64,
    eps_conc: f64,
) -> Result<(f64, f64)> {
    if m == 0 || k == 0 || k % m != 0 {
        return Err(Error::domain("guaranteed_bounds needs M dividing K"));
    }
    if !(alpha_hat > 0.0 && alpha_hat <= 1.0) {
        return Err(Error::domain("alpha_hat must lie in (0, 1]"));
    }
    if !(0.0..0.5).contains(&eps_conc) {
        return Err(Error::domain("eps_conc must lie in [0, 0.5)"));
    }
    let n = (k / m) as usize;
    let psi = psi_n(n)?;
    if !(tau >= 0.0 && tau < psi) {
        return Err(Error::domain(format!(
            "tau must lie in [0, psi_n = {psi:.4}), got {tau}"
        )));
    }
    let q = (-tau).exp();
    let denom = (n as f64 - 1.0) * alpha_hat * q * (1.0 + eps_conc) + n0 * w / m as f64;
    let lower = n as f64
        * w
        * simpson(|nu| (nu / denom).ln_1p() * (-nu).exp(), tau, psi, 4000);
    let upper = w / alpha_hat * (k as f64).ln();
    Ok((lower, upper))
}

/// Linearized closed form of the guaranteed lower bound, using the
/// antiderivative of nu e^(-nu) on [tau, psi]. Valid when nu/denominator
/// stays small over the window; kept as a cross-check for the quadrature.
#[allow(dead_code)]
fn guaranteed_lower_linearized(
    n: usize,
    alpha_hat: f64,
    w: f64,
    noise_per_cluster: f64,
    tau: f64,
    eps_conc: f64,
) -> f64 {
    let q = (-tau).exp();
    let psi = (n as f64).ln() + 2.0 * (n as f64).ln().ln();
    let denom = (n as f64 - 1.0) * alpha_hat * q * (1.0 + eps_conc) + noise_per_cluster;
    n as f64 * w * ((tau + 1.0) * (-tau).exp() - (psi + 1.0) * (-psi).exp()) / denom
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::power::threshold_exact;

    #[test]
    fn asymptote_direct_evaluation() {
        let v = avg_sum_rate_asymptote(1_000_000, 1, 0.5, 1.0).unwrap();
        assert!((v - 27.631_021_115_928_55).abs() < 1e-9);
        // alpha_hat = 1, M = 1 reduces to W log K.
        let v = avg_sum_rate_asymptote(1000, 1, 1.0, 2.0).unwrap();
        assert!((v - 2.0 * 1000f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn asymptote_decreases_in_m() {
        let mut prev = f64::INFINITY;
        for m in [1u32, 2, 4, 8, 16] {
            let v = avg_sum_rate_asymptote(1024, m, 0.5, 1.0).unwrap();
            assert!(v < prev);
            prev = v;
        }
    }

    #[test]
    fn asymptote_m_difference_identity() {
        // asym(K, M) - asym(K, 1) = -(W/alpha_hat) log M exactly.
        for m in [2u32, 4, 10] {
            let a = avg_sum_rate_asymptote(1000, m, 0.25, 1.5).unwrap();
            let b = avg_sum_rate_asymptote(1000, 1, 0.25, 1.5).unwrap();
            let diff = a - b + 1.5 / 0.25 * (m as f64).ln();
            assert!(diff.abs() < 1e-10);
        }
    }

    #[test]
    fn asymptote_domain_guards() {
        assert!(avg_sum_rate_asymptote(4, 2, 0.5, 1.0).is_err()); // n = 2 < 3
        assert!(avg_sum_rate_asymptote(100, 1, 0.0, 1.0).is_err());
    }

    #[test]
    fn alpha0_closed_form_reference() {
        // 25 e^0.25 E1(0.25), value frozen from the series oracle.
        let v = closed_form_alpha0(100, 4, 1.0, 1.0).unwrap();
        assert!((v - 33.522_136_120_784_8).abs() < 1e-9);
    }

    #[test]
    fn alpha0_per_link_rate_is_k_free() {
        // K enters linearly, so value/K is constant for fixed M and noise.
        let a = closed_form_alpha0(100, 4, 1.0, 1.0).unwrap() / 100.0;
        let b = closed_form_alpha0(1000, 4, 1.0, 1.0).unwrap() / 1000.0;
        assert!((a - b).abs() < 1e-12);
    }

    #[test]
    fn alpha0_decreases_in_m() {
        let mut prev = f64::INFINITY;
        for m in [1u32, 2, 4, 5, 10, 20] {
            let v = closed_form_alpha0(100, m, 1.0, 1.0).unwrap();
            assert!(v < prev, "not decreasing at m = {m}");
            prev = v;
        }
    }

    #[test]
    fn m_equals_k_reference_values() {
        let (_, asym) = closed_form_m_equals_k(10_000, 1.0, 1.0).unwrap();
        assert!((asym - 8.633_124_707_074_65).abs() < 1e-9);

        // K = 2 with N0 W = 1: e^(1/2) E1(1/2).
        let (exact, _) = closed_form_m_equals_k(2, 1.0, 1.0).unwrap();
        assert!((exact - 0.922_910_632_483_73).abs() < 1e-9);
    }

    #[test]
    fn m_equals_k_asymptote_tightens_with_k() {
        let gap = |k: u32| {
            let (exact, asym) = closed_form_m_equals_k(k, 1.0, 1.0).unwrap();
            (exact - asym).abs()
        };
        assert!(gap(1_000_000) < gap(1_000));
    }

    #[test]
    fn alpha0_and_m_equals_k_coincide_at_m_equals_k() {
        for k in [10u32, 1000, 100_000] {
            let a = closed_form_alpha0(k, k, 1.0, 1.0).unwrap();
            let (b, _) = closed_form_m_equals_k(k, 1.0, 1.0).unwrap();
            assert!((a - b).abs() < 1e-10 * b.abs());
        }
    }

    #[test]
    fn moderate_weak_bound_formula() {
        // n q = 1/alpha_hat puts the bound at (c M / (alpha_hat N0)) log n.
        let n = 100usize;
        let ah = 0.5;
        let q = 1.0 / (n as f64 * ah);
        let r = bound_moderate_weak(n, q, 2, 1.5, 0.7, 1.0, ah).unwrap();
        let expect = 1.5 * 2.0 / (ah * 0.7) * (n as f64).ln();
        assert!((r.value - expect).abs() < 1e-10);
        assert_eq!(r.regime, Regime::Moderate);

        let zero = bound_moderate_weak(n, 0.0, 2, 1.5, 0.7, 1.0, ah).unwrap();
        assert_eq!(zero.value, 0.0);

        // Linear in q.
        let r1 = bound_moderate_weak(n, 0.01, 1, 2.0, 1.0, 1.0, ah).unwrap();
        let r2 = bound_moderate_weak(n, 0.02, 1, 2.0, 1.0, 1.0, ah).unwrap();
        assert!((r2.value - 2.0 * r1.value).abs() < 1e-12);
    }

    #[test]
    fn regime_thresholds() {
        assert_eq!(classify_regime(12.0), Regime::Strong);
        assert_eq!(classify_regime(1.0), Regime::Moderate);
        assert_eq!(classify_regime(0.05), Regime::Weak);
    }

    #[test]
    fn theta_k_bound_cases() {
        // All clusters single-active: the second term vanishes.
        let r = bound_theta_k(8, 8, 2, 800, 1.0, 1.0, 0.5).unwrap();
        let expect = (800f64).ln_1p();
        assert!((r.value - expect).abs() < 1e-12);

        // alpha = 1 with m_active = 2 kills the multi-active term too.
        let r = bound_theta_k(8, 4, 2, 800, 1.0, 1.0, 1.0).unwrap();
        let expect = 0.5 * (800f64).ln_1p();
        assert!((r.value - expect).abs() < 1e-12);
    }

    #[test]
    fn lambda_alpha_stays_below_one() {
        for m_active in 2u32..=10 {
            for a in 1..=9 {
                let alpha = a as f64 / 10.0;
                let lambda = alpha * m_active as f64 * (1.0 - alpha).powi(m_active as i32 - 1);
                assert!(lambda < 1.0, "Lambda({alpha}, {m_active}) = {lambda}");
            }
        }
    }

    #[test]
    fn guaranteed_bounds_reference_value() {
        // Frozen from independent quadrature: K = 10^4, M = 1, ah = 0.5,
        // tau = tau_exact, eps_conc = 0 gives lower = 10.60496.
        let tau = threshold_exact(10_000, 0.5).unwrap().tau;
        let (lower, upper) = guaranteed_bounds(10_000, 1, 0.5, 1.0, 1.0, tau, 0.0).unwrap();
        assert!((lower - 10.604_96).abs() < 1e-4, "lower = {lower}");
        assert!((upper - 18.420_680_743_952_367).abs() < 1e-9);
    }

    #[test]
    fn guaranteed_lower_below_upper() {
        for k in [1_000u32, 10_000, 100_000] {
            for ah in [0.25, 0.5, 1.0] {
                let tau = threshold_exact(k as usize, ah).unwrap().tau;
                let (lower, upper) = guaranteed_bounds(k, 1, ah, 1.0, 1.0, tau, 0.0).unwrap();
                assert!(lower <= upper, "k={k}, ah={ah}: {lower} > {upper}");
                assert!(lower > 0.0);
            }
        }
    }

    #[test]
    fn guaranteed_ratio_band_at_desk_scale() {
        let tau = threshold_exact(100_000, 0.5).unwrap().tau;
        let (lower, upper) = guaranteed_bounds(100_000, 1, 0.5, 1.0, 1.0, tau, 0.0).unwrap();
        let ratio = lower / upper;
        assert!((0.3..=1.0).contains(&ratio), "ratio = {ratio}");
    }

    #[test]
    fn guaranteed_lower_decreases_in_concentration_slack() {
        let tau = threshold_exact(10_000, 0.5).unwrap().tau;
        let (l0, _) = guaranteed_bounds(10_000, 1, 0.5, 1.0, 1.0, tau, 0.0).unwrap();
        let (l1, _) = guaranteed_bounds(10_000, 1, 0.5, 1.0, 1.0, tau, 0.1).unwrap();
        assert!(l1 < l0);
    }

    #[test]
    fn guaranteed_bounds_domain_guards() {
        assert!(guaranteed_bounds(10_000, 1, 0.5, 1.0, 1.0, 20.0, 0.0).is_err()); // tau >= psi
        assert!(guaranteed_bounds(10_000, 1, 0.5, 1.0, 1.0, 5.0, 0.5).is_err()); // eps_conc
        assert!(guaranteed_bounds(10, 3, 0.5, 1.0, 1.0, 1.0, 0.0).is_err()); // M does not divide K
    }

    #[test]
    fn quadrature_close_to_linearized_form() {
        // The log integrand is nearly linear over [tau, psi] when the
        // denominator dominates, so the two forms agree within a few percent.
        let n = 10_000usize;
        let tau = threshold_exact(n, 0.5).unwrap().tau;
        let (lower, _) = guaranteed_bounds(n as u32, 1, 0.5, 1.0, 1.0, tau, 0.0).unwrap();
        let lin = guaranteed_lower_linearized(n, 0.5, 1.0, 1.0, tau, 0.0);
        assert!((lower - lin).abs() / lin < 0.25, "quad {lower} vs lin {lin}");
        assert!(lower <= lin); // log(1+x) <= x pointwise
    }

    fn xi_params() -> XiParams {
        XiParams {
            n: 10_000,
            alpha: 1.0,
            moments: ShadowMoments { varpi: 0.5, kappa: 0.25, eta: 0.125 },
            q: 0.01,
            bandwidth_w: 1.0,
            clusters_m: 1,
            noise_n0: 1.0,
        }
    }

    #[test]
    fn xi_at_zero_power_merges_alpha_branches() {
        let p = xi_params();
        let v = xi_upper_bound(0.0, 3.0, &p).unwrap();
        let tau = -p.q.ln();
        let mu = (1.0 + tau) * p.q;
        let expect = p.n as f64 * 1.0 * mu / p.lambda_prime();
        assert!((v - expect).abs() < 1e-12 * expect);
    }

    #[test]
    fn xi_is_convex_in_power() {
        let params = xi_params();
        for &h in &[0.1, 1.0, 5.0] {
            let grid: Vec<f64> =
                (0..=100).map(|i| xi_upper_bound(i as f64 / 100.0, h, &params).unwrap()).collect();
            for w in grid.windows(3) {
                let second = w[2] - 2.0 * w[1] + w[0];
                assert!(second >= -1e-15, "second difference {second} at h={h}");
            }
        }
    }

    #[test]
    fn xi_maximizer_sits_at_an_endpoint() {
        let params = xi_params();
        for &h in &[0.05, 0.5, 2.0, 8.0] {
            let (mut best_i, mut best) = (0usize, f64::NEG_INFINITY);
            for i in 0..=100 {
                let v = xi_upper_bound(i as f64 / 100.0, h, &params).unwrap();
                if v > best {
                    best = v;
                    best_i = i;
                }
            }
            assert!(best_i == 0 || best_i == 100, "interior maximizer at h={h}");
        }
    }

    #[test]
    fn xi_refuses_small_lambda_prime() {
        let mut params = xi_params();
        params.q = 1e-5; // lambda' ~ 1.05
        match xi_upper_bound(0.5, 1.0, &params) {
            Err(Error::Validity(_)) => {}
            other => panic!("expected validity error, got {other:?}"),
        }
    }
}
