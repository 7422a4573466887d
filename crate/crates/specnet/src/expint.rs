//! Exponential-integral numerics: E1(x) and the asymptotic expansion of
//! Ei(x) for large negative arguments.
//!
//! E1 backs the interference-free closed forms (single-link clusters and the
//! zero-shadowing network), so it must hold better than 1e-8 relative error
//! over the whole argument range those formulas touch. The Euler series
//!
//! ```text
//!   E1(x) = -gamma - ln(x) + sum_{s>=1} (-1)^(s+1) x^s / (s * s!)
//! ```
//!
//! is accurate for small x but loses roughly 2x/ln(10) significant digits to
//! cancellation as x grows (the largest term scales like e^x/x^2 while the
//! result scales like e^(-x)/x), which in f64 makes it unusable beyond x ~ 8.
//! The asymptotic expansion only reaches 1e-8 for x >= 25. Neither form can
//! cover the middle, so above `switch_point` we evaluate the standard
//! continued fraction
//!
//! ```text
//!   E1(x) = e^(-x) / (x + 1 - 1^2/(x + 3 - 2^2/(x + 5 - ...)))
//! ```
//!
//! by the modified Lentz scheme, which is good to near machine precision on
//! the entire x > 1 range.

use crate::error::{Error, Result};

/// Euler's constant.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Tuning knobs for the series/continued-fraction evaluation of [`e1`].
#[derive(Debug, Clone, Copy)]
pub struct SeriesConfig {
    /// Term budget for the series and iteration budget for the fraction.
    pub max_terms: usize,
    /// Relative stopping tolerance; must be below 1e-8.
    pub rel_tol: f64,
    /// Crossover argument between the Euler series and the fraction.
    pub switch_point: f64,
}

impl SeriesConfig {
    pub fn new(max_terms: usize, rel_tol: f64, switch_point: f64) -> Result<Self> {
        if max_terms == 0 {
            return Err(Error::domain("max_terms must be positive"));
        }
        if !(rel_tol > 0.0 && rel_tol < 1e-8) {
            return Err(Error::domain("rel_tol must lie in (0, 1e-8)"));
        }
        if !(switch_point > 0.0) {
            return Err(Error::domain("switch_point must be positive"));
        }
        Ok(SeriesConfig { max_terms, rel_tol, switch_point })
    }
}

impl Default for SeriesConfig {
    fn default() -> Self {
        // The series keeps full f64 accuracy up to x = 1; the fraction takes
        // over from there, so the crossover sits at the conservative end.
        SeriesConfig { max_terms: 200, rel_tol: 1e-12, switch_point: 1.0 }
    }
}

/// Exponential integral E1(x) = int_1^inf e^(-t x)/t dt for x > 0.
pub fn e1(x: f64) -> Result<f64> {
    e1_with(x, &SeriesConfig::default())
}

/// E1 with explicit evaluation parameters.
pub fn e1_with(x: f64, cfg: &SeriesConfig) -> Result<f64> {
    if !(x > 0.0) {
        return Err(Error::domain(format!("e1 requires x > 0, got {x}")));
    }
    if x <= cfg.switch_point {
        e1_series_tol(x, cfg.max_terms, cfg.rel_tol)
    } else {
        e1_fraction(x, cfg.max_terms, cfg.rel_tol)
    }
}

/// Euler-series evaluation of E1 truncated after `terms` tail terms.
///
/// Exposed as the reference series form; the partial sums alternate around
/// the limit, so the truncation error is bounded by the first omitted term.
/// Only meaningful in f64 for small x (say x <= 2).
pub fn e1_series(x: f64, terms: usize) -> Result<f64> {
    if !(x > 0.0) {
        return Err(Error::domain(format!("e1_series requires x > 0, got {x}")));
    }
    let mut sum = 0.0;
    let mut term = 1.0; // x^s / s! carried incrementally
    for s in 1..=terms {
        term *= x / s as f64;
        let signed = if s % 2 == 1 { term } else { -term };
        sum += signed / s as f64;
    }
    Ok(-EULER_GAMMA - x.ln() + sum)
}

fn e1_series_tol(x: f64, max_terms: usize, rel_tol: f64) -> Result<f64> {
    let base = -EULER_GAMMA - x.ln();
    let mut sum = 0.0;
    let mut comp = 0.0; // Kahan compensation
    let mut term = 1.0;
    for s in 1..=max_terms {
        term *= x / s as f64;
        let delta = if s % 2 == 1 { term } else { -term } / s as f64;
        let y = delta - comp;
        let t = sum + y;
        comp = (t - sum) - y;
        sum = t;
        let value = base + sum;
        if term / (s + 1) as f64 <= rel_tol * value.abs() {
            return Ok(value);
        }
    }
    Err(Error::SeriesDivergence { x, max_terms })
}

/// Modified Lentz evaluation of the E1 continued fraction, for x > 1.
fn e1_fraction(x: f64, max_iter: usize, rel_tol: f64) -> Result<f64> {
    const TINY: f64 = 1e-300;
    let mut b = x + 1.0;
    let mut c = 1.0 / TINY;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..=max_iter {
        let a = -((i * i) as f64);
        b += 2.0;
        d = 1.0 / (a * d + b);
        c = b + a / c;
        let del = c * d;
        h *= del;
        if (del - 1.0).abs() < rel_tol {
            return Ok(h * (-x).exp());
        }
    }
    Err(Error::SeriesDivergence { x, max_terms: max_iter })
}

/// Truncated asymptotic expansion of Ei(x) for large negative x:
///
/// ```text
///   Ei(x) ~ (e^x / x) * sum_{k=0}^{L-1} k!/x^k,   x -> -inf.
/// ```
///
/// The first omitted term bounds the error, so the expansion is only useful
/// for |x| well above L; callers should keep |x| >= 10.
pub fn ei_asymptotic(x: f64, order: usize) -> Result<f64> {
    if !(x < 0.0) {
        return Err(Error::domain(format!("ei_asymptotic requires x < 0, got {x}")));
    }
    if order == 0 {
        return Err(Error::domain("ei_asymptotic requires order >= 1"));
    }
    let mut sum = 0.0;
    let mut term = 1.0; // k!/x^k
    for k in 0..order {
        if k > 0 {
            term *= k as f64 / x;
        }
        sum += term;
    }
    Ok(x.exp() / x * sum)
}
