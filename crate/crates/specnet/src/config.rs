//! Scenario configuration: network parameters, shadowing models, and the
//! flat key-value config file format.

use std::fmt;

use rand::Rng;
use rand_distr::StandardNormal;
use statrs::function::erf::erf;

use crate::error::{Error, Result};

/// First three moments of the shadowing factor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShadowMoments {
    /// varpi = E[beta]
    pub varpi: f64,
    /// kappa = E[beta^2]
    pub kappa: f64,
    /// eta = E[beta^3]
    pub eta: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ShadowingKind {
    Constant,
    Uniform,
    TruncatedLognormal,
}

impl fmt::Display for ShadowingKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ShadowingKind::Constant => "constant",
            ShadowingKind::Uniform => "uniform",
            ShadowingKind::TruncatedLognormal => "lognormal",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq)]
enum ShadowParams {
    Constant,
    Uniform {
        lo: f64,
        hi: f64,
    },
    Lognormal {
        mu: f64,
        sigma: f64,
        window_lo: f64,
        window_hi: f64,
        /// Multiplier restoring E[beta] = varpi after truncation.
        correction: f64,
    },
}

/// Distribution of the shadowing factor beta: bounded, positive, mean <= 1.
///
/// The emitted samples always satisfy `beta_min() <= beta <= beta_max()` with
/// `beta_min() > 0` and `beta_max()` finite, and their mean equals `mean()`
/// exactly (for the truncated lognormal this holds after a closed-form
/// multiplicative correction of the truncated distribution).
#[derive(Debug, Clone, PartialEq)]
pub struct Shadowing {
    kind: ShadowingKind,
    mean: f64,
    variance: f64,
    beta_min: f64,
    beta_max: f64,
    params: ShadowParams,
}

/// Standard normal CDF.
fn phi(z: f64) -> f64 {
    0.5 * (1.0 + erf(z / std::f64::consts::SQRT_2))
}

impl Shadowing {
    /// Degenerate shadowing: beta = `mean` always.
    pub fn constant(mean: f64) -> Result<Self> {
        check_mean(mean)?;
        Ok(Shadowing {
            kind: ShadowingKind::Constant,
            mean,
            variance: 0.0,
            beta_min: mean,
            beta_max: mean,
            params: ShadowParams::Constant,
        })
    }

    /// Uniform shadowing with the given mean and variance; the support
    /// `[mean - sqrt(3 var), mean + sqrt(3 var)]` must stay positive.
    pub fn uniform(mean: f64, variance: f64) -> Result<Self> {
        check_mean(mean)?;
        if !(variance >= 0.0) {
            return Err(Error::config("shadow.variance must be >= 0"));
        }
        let half = (3.0 * variance).sqrt();
        let lo = mean - half;
        let hi = mean + half;
        if lo <= 0.0 {
            return Err(Error::config(format!(
                "uniform shadowing support [{lo}, {hi}] leaves the positive axis; reduce shadow.variance"
            )));
        }
        Ok(Shadowing {
            kind: ShadowingKind::Uniform,
            mean,
            variance,
            beta_min: lo,
            beta_max: hi,
            params: ShadowParams::Uniform { lo, hi },
        })
    }

    /// Lognormal shadowing fitted to (mean, variance), truncated to
    /// `[window_lo, window_hi]`, then rescaled so the truncated mean is
    /// exactly `mean` again. The support of emitted samples is the window
    /// times the correction factor.
    pub fn truncated_lognormal(
        mean: f64,
        variance: f64,
        window_lo: f64,
        window_hi: f64,
    ) -> Result<Self> {
        check_mean(mean)?;
        if !(variance > 0.0) {
            return Err(Error::config("lognormal shadowing needs shadow.variance > 0"));
        }
        if !(window_lo > 0.0 && window_hi.is_finite() && window_hi > window_lo) {
            return Err(Error::config(
                "lognormal truncation window must satisfy 0 < beta_min < beta_max < inf",
            ));
        }
        let sigma2 = (1.0 + variance / (mean * mean)).ln();
        let sigma = sigma2.sqrt();
        let mu = mean.ln() - 0.5 * sigma2;

        let za = (window_lo.ln() - mu) / sigma;
        let zb = (window_hi.ln() - mu) / sigma;
        let mass = phi(zb) - phi(za);
        if mass < 1e-6 {
            return Err(Error::config(
                "lognormal truncation window carries negligible probability mass",
            ));
        }
        // Closed-form partial moment of the lognormal on the window.
        let partial = |k: f64| -> f64 {
            (k * mu + 0.5 * k * k * sigma2).exp() * (phi(zb - k * sigma) - phi(za - k * sigma))
                / mass
        };
        let correction = mean / partial(1.0);
        Ok(Shadowing {
            kind: ShadowingKind::TruncatedLognormal,
            mean,
            variance,
            beta_min: correction * window_lo,
            beta_max: correction * window_hi,
            params: ShadowParams::Lognormal { mu, sigma, window_lo, window_hi, correction },
        })
    }

    pub fn kind(&self) -> ShadowingKind {
        self.kind
    }

    /// varpi: the mean shadowing factor of emitted samples.
    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// Target variance the model was fitted to.
    pub fn variance(&self) -> f64 {
        self.variance
    }

    /// Lower bound of emitted samples (strictly positive).
    pub fn beta_min(&self) -> f64 {
        self.beta_min
    }

    /// Upper bound of emitted samples (finite).
    pub fn beta_max(&self) -> f64 {
        self.beta_max
    }

    /// Truncation window of the lognormal model, if applicable.
    pub fn lognormal_window(&self) -> Option<(f64, f64)> {
        match self.params {
            ShadowParams::Lognormal { window_lo, window_hi, .. } => Some((window_lo, window_hi)),
            _ => None,
        }
    }

    /// (varpi, kappa, eta) of the emitted samples, in closed form.
    pub fn moments(&self) -> ShadowMoments {
        match &self.params {
            ShadowParams::Constant => ShadowMoments {
                varpi: self.mean,
                kappa: self.mean * self.mean,
                eta: self.mean.powi(3),
            },
            ShadowParams::Uniform { .. } => {
                let m = self.mean;
                let v = self.variance;
                ShadowMoments {
                    varpi: m,
                    kappa: v + m * m,
                    // Central third moment of a uniform law is zero.
                    eta: m.powi(3) + 3.0 * m * v,
                }
            }
            ShadowParams::Lognormal { mu, sigma, window_lo, window_hi, correction } => {
                let sigma2 = sigma * sigma;
                let za = (window_lo.ln() - mu) / sigma;
                let zb = (window_hi.ln() - mu) / sigma;
                let mass = phi(zb) - phi(za);
                let partial = |k: f64| -> f64 {
                    (k * mu + 0.5 * k * k * sigma2).exp()
                        * (phi(zb - k * sigma) - phi(za - k * sigma))
                        / mass
                };
                ShadowMoments {
                    varpi: self.mean,
                    kappa: correction * correction * partial(2.0),
                    eta: correction.powi(3) * partial(3.0),
                }
            }
        }
    }

    /// Draws one shadowing factor.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match &self.params {
            ShadowParams::Constant => self.mean,
            ShadowParams::Uniform { lo, hi } => lo + (hi - lo) * rng.random::<f64>(),
            ShadowParams::Lognormal { mu, sigma, window_lo, window_hi, correction } => loop {
                let z: f64 = rng.sample(StandardNormal);
                let t = (mu + sigma * z).exp();
                if t >= *window_lo && t <= *window_hi {
                    let beta = correction * t;
                    debug_assert!(beta >= self.beta_min && beta <= self.beta_max);
                    return beta;
                }
            },
        }
    }
}

fn check_mean(mean: f64) -> Result<()> {
    if !(mean > 0.0 && mean <= 1.0) {
        return Err(Error::config(format!("shadow.mean must lie in (0, 1], got {mean}")));
    }
    Ok(())
}

/// Full scenario description; every estimator in the crate is a function of
/// one of these plus a power strategy.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkConfig {
    /// Total number of links.
    pub k: u32,
    /// Number of clusters; must divide `k`.
    pub m: u32,
    /// Total bandwidth W in Hz.
    pub bandwidth_w: f64,
    /// Noise power spectral density N0 in W/Hz.
    pub noise_n0: f64,
    /// Probability that a cross link is shadowed (nonzero).
    pub alpha: f64,
    pub shadowing: Shadowing,
    /// Master seed; all substreams derive from it.
    pub seed: u64,
}

impl NetworkConfig {
    pub fn new(
        k: u32,
        m: u32,
        bandwidth_w: f64,
        noise_n0: f64,
        alpha: f64,
        shadowing: Shadowing,
        seed: u64,
    ) -> Result<Self> {
        if k == 0 || m == 0 {
            return Err(Error::config("k and m must be positive"));
        }
        if k % m != 0 {
            return Err(Error::config(format!(
                "m must divide k (clusters hold equally many links); k = {k}, m = {m}"
            )));
        }
        if !(bandwidth_w > 0.0) {
            return Err(Error::config("bandwidth_w must be positive"));
        }
        if !(noise_n0 >= 0.0) {
            return Err(Error::config("noise_n0 must be nonnegative"));
        }
        if !(0.0..=1.0).contains(&alpha) {
            return Err(Error::config(format!("alpha must lie in [0, 1], got {alpha}")));
        }
        let cfg = NetworkConfig { k, m, bandwidth_w, noise_n0, alpha, shadowing, seed };
        debug_assert!((0.0..=1.0).contains(&cfg.alpha_hat()));
        Ok(cfg)
    }

    /// Links per cluster, n = K/M.
    pub fn n(&self) -> usize {
        (self.k / self.m) as usize
    }

    /// Effective cross-gain mean, alpha_hat = alpha * varpi.
    pub fn alpha_hat(&self) -> f64 {
        self.alpha * self.shadowing.mean()
    }

    /// Per-cluster bandwidth W/M.
    pub fn cluster_bandwidth(&self) -> f64 {
        self.bandwidth_w / self.m as f64
    }

    /// Per-cluster noise power N0 W / M.
    pub fn cluster_noise(&self) -> f64 {
        self.noise_n0 * self.bandwidth_w / self.m as f64
    }

    /// Serializes to the flat key-value config format.
    pub fn to_config_string(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("k = {}\n", self.k));
        out.push_str(&format!("m = {}\n", self.m));
        out.push_str(&format!("bandwidth_w = {}\n", self.bandwidth_w));
        out.push_str(&format!("noise_n0 = {}\n", self.noise_n0));
        out.push_str(&format!("alpha = {}\n", self.alpha));
        out.push_str(&format!("shadow.kind = {}\n", self.shadowing.kind()));
        out.push_str(&format!("shadow.mean = {}\n", self.shadowing.mean()));
        out.push_str(&format!("shadow.variance = {}\n", self.shadowing.variance()));
        if let Some((lo, hi)) = self.shadowing.lognormal_window() {
            out.push_str(&format!("shadow.beta_min = {lo}\n"));
            out.push_str(&format!("shadow.beta_max = {hi}\n"));
        }
        out.push_str(&format!("seed = {}\n", self.seed));
        out
    }

    /// Parses the flat key-value config format. Missing keys fall back to
    /// the defaults of [`NetworkConfig::default`]; unknown keys are errors.
    pub fn from_config_str(text: &str) -> Result<Self> {
        let mut b = ConfigBuilder::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::config(format!("line {}: expected `key = value`, got `{raw}`", lineno + 1))
            })?;
            b.set(key.trim(), value.trim())?;
        }
        b.build()
    }
}

impl Default for NetworkConfig {
    fn default() -> Self {
        NetworkConfig {
            k: 100,
            m: 1,
            bandwidth_w: 1.0,
            noise_n0: 1.0,
            alpha: 0.5,
            shadowing: Shadowing::truncated_lognormal(0.5, 1.0, 1e-3, 10.0)
                .expect("default shadowing is valid"),
            seed: 42,
        }
    }
}

/// Accumulates key-value pairs, then validates the whole scenario at once.
#[derive(Debug, Default)]
pub struct ConfigBuilder {
    k: Option<u32>,
    m: Option<u32>,
    bandwidth_w: Option<f64>,
    noise_n0: Option<f64>,
    alpha: Option<f64>,
    shadow_kind: Option<ShadowingKind>,
    shadow_mean: Option<f64>,
    shadow_variance: Option<f64>,
    shadow_beta_min: Option<f64>,
    shadow_beta_max: Option<f64>,
    seed: Option<u64>,
}

impl ConfigBuilder {
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        fn int<T: std::str::FromStr>(key: &str, v: &str) -> Result<T> {
            v.parse()
                .map_err(|_| Error::config(format!("key `{key}`: cannot parse `{v}` as integer")))
        }
        fn real(key: &str, v: &str) -> Result<f64> {
            v.parse()
                .map_err(|_| Error::config(format!("key `{key}`: cannot parse `{v}` as number")))
        }
        match key {
            "k" => self.k = Some(int(key, value)?),
            "m" => self.m = Some(int(key, value)?),
            "bandwidth_w" => self.bandwidth_w = Some(real(key, value)?),
            "noise_n0" => self.noise_n0 = Some(real(key, value)?),
            "alpha" => self.alpha = Some(real(key, value)?),
            "shadow.kind" => {
                self.shadow_kind = Some(match value {
                    "constant" => ShadowingKind::Constant,
                    "uniform" => ShadowingKind::Uniform,
                    "lognormal" => ShadowingKind::TruncatedLognormal,
                    other => {
                        return Err(Error::config(format!(
                            "shadow.kind must be constant|uniform|lognormal, got `{other}`"
                        )))
                    }
                })
            }
            "shadow.mean" => self.shadow_mean = Some(real(key, value)?),
            "shadow.variance" => self.shadow_variance = Some(real(key, value)?),
            "shadow.beta_min" => self.shadow_beta_min = Some(real(key, value)?),
            "shadow.beta_max" => self.shadow_beta_max = Some(real(key, value)?),
            "seed" => self.seed = Some(int(key, value)?),
            other => return Err(Error::config(format!("unknown config key `{other}`"))),
        }
        Ok(())
    }

    pub fn build(self) -> Result<NetworkConfig> {
        let defaults = NetworkConfig::default();
        let kind = self.shadow_kind.unwrap_or(ShadowingKind::TruncatedLognormal);
        let mean = self.shadow_mean.unwrap_or(0.5);
        let shadowing = match kind {
            ShadowingKind::Constant => {
                if self.shadow_variance.is_some_and(|v| v != 0.0) {
                    return Err(Error::config("constant shadowing has zero variance"));
                }
                reject_window(kind, &self.shadow_beta_min, &self.shadow_beta_max)?;
                Shadowing::constant(mean)?
            }
            ShadowingKind::Uniform => {
                let variance = self.shadow_variance.ok_or_else(|| {
                    Error::config("uniform shadowing requires shadow.variance")
                })?;
                reject_window(kind, &self.shadow_beta_min, &self.shadow_beta_max)?;
                Shadowing::uniform(mean, variance)?
            }
            ShadowingKind::TruncatedLognormal => Shadowing::truncated_lognormal(
                mean,
                self.shadow_variance.unwrap_or(1.0),
                self.shadow_beta_min.unwrap_or(1e-3),
                self.shadow_beta_max.unwrap_or(10.0),
            )?,
        };
        NetworkConfig::new(
            self.k.unwrap_or(defaults.k),
            self.m.unwrap_or(defaults.m),
            self.bandwidth_w.unwrap_or(defaults.bandwidth_w),
            self.noise_n0.unwrap_or(defaults.noise_n0),
            self.alpha.unwrap_or(defaults.alpha),
            shadowing,
            self.seed.unwrap_or(defaults.seed),
        )
    }
}

fn reject_window(kind: ShadowingKind, lo: &Option<f64>, hi: &Option<f64>) -> Result<()> {
    if lo.is_some() || hi.is_some() {
        return Err(Error::config(format!(
            "shadow.beta_min/beta_max only apply to lognormal shadowing, not `{kind}` \
             (bounds are derived from mean and variance)"
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn divisibility_is_enforced() {
        let sh = Shadowing::constant(0.5).unwrap();
        let err = NetworkConfig::new(20, 3, 1.0, 1.0, 0.5, sh, 1).unwrap_err();
        assert!(err.to_string().contains("divide"));
    }

    #[test]
    fn alpha_range_is_enforced() {
        let sh = Shadowing::constant(0.5).unwrap();
        assert!(NetworkConfig::new(10, 2, 1.0, 1.0, 1.5, sh.clone(), 1).is_err());
        assert!(NetworkConfig::new(10, 2, 1.0, 1.0, -0.1, sh, 1).is_err());
    }

    #[test]
    fn uniform_support_must_stay_positive() {
        assert!(Shadowing::uniform(0.5, 1.0).is_err()); // lo = 0.5 - sqrt(3) < 0
        let sh = Shadowing::uniform(0.5, 0.02).unwrap();
        assert!(sh.beta_min() > 0.0);
        assert!((sh.beta_min() + sh.beta_max() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn uniform_moments_closed_form() {
        let sh = Shadowing::uniform(0.6, 0.03).unwrap();
        let m = sh.moments();
        assert!((m.kappa - (0.03 + 0.36)).abs() < 1e-12);
        assert!((m.eta - (0.216 + 3.0 * 0.6 * 0.03)).abs() < 1e-12);
    }

    #[test]
    fn lognormal_effective_bounds_scale_with_correction() {
        let sh = Shadowing::truncated_lognormal(0.5, 1.0, 1e-3, 10.0).unwrap();
        let (lo, hi) = sh.lognormal_window().unwrap();
        assert_eq!(lo, 1e-3);
        assert_eq!(hi, 10.0);
        // Truncation cuts the upper tail, so the correction exceeds one.
        assert!(sh.beta_max() > 10.0 && sh.beta_max() < 11.0);
        assert!(sh.beta_min() > 0.0);
    }

    #[test]
    fn mean_must_be_a_probability_scale() {
        assert!(Shadowing::constant(0.0).is_err());
        assert!(Shadowing::constant(1.2).is_err());
        assert!(Shadowing::constant(1.0).is_ok());
    }

    #[test]
    fn config_round_trip_is_exact() {
        let cfg = NetworkConfig::default();
        let text = cfg.to_config_string();
        let back = NetworkConfig::from_config_str(&text).unwrap();
        assert_eq!(cfg, back);

        let cfg2 = NetworkConfig::new(
            400,
            4,
            2.5,
            0.125,
            0.7,
            Shadowing::uniform(0.8, 0.01).unwrap(),
            99,
        )
        .unwrap();
        let back2 = NetworkConfig::from_config_str(&cfg2.to_config_string()).unwrap();
        assert_eq!(cfg2, back2);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let err = NetworkConfig::from_config_str("bandwidth = 2\n").unwrap_err();
        assert!(err.to_string().contains("unknown config key"));
    }

    #[test]
    fn comments_and_blank_lines_are_ignored() {
        let cfg = NetworkConfig::from_config_str(
            "# scenario\nk = 12\nm = 3 # three clusters\n\nshadow.kind = constant\nshadow.mean = 0.5\n",
        )
        .unwrap();
        assert_eq!(cfg.k, 12);
        assert_eq!(cfg.m, 3);
        assert_eq!(cfg.n(), 4);
        assert_eq!(cfg.shadowing.kind(), ShadowingKind::Constant);
    }

    #[test]
    fn window_keys_rejected_for_bounded_kinds() {
        let err = NetworkConfig::from_config_str(
            "shadow.kind = constant\nshadow.mean = 0.5\nshadow.beta_min = 0.1\n",
        )
        .unwrap_err();
        assert!(err.to_string().contains("only apply to lognormal"));
    }

    #[test]
    fn alpha_hat_is_product_of_alpha_and_mean() {
        let cfg = NetworkConfig::new(
            100,
            2,
            1.0,
            1.0,
            0.5,
            Shadowing::constant(0.8).unwrap(),
            7,
        )
        .unwrap();
        assert!((cfg.alpha_hat() - 0.4).abs() < 1e-15);
        assert_eq!(cfg.n(), 50);
        assert!((cfg.cluster_noise() - 0.5).abs() < 1e-15);
    }
}
