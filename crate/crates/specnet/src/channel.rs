//! Random channel realizations for one cluster: exponential direct gains and
//! lazily materialized cross gains.
//!
//! A cross gain is nonzero with probability `alpha`, in which case it is the
//! product of a shadowing factor and an independent unit-mean exponential.
//! Only links that actually transmit can contribute interference, and only
//! transmitting links have a nonzero rate, so a realization samples cross
//! gains solely for ordered pairs inside the active set. With the on-off
//! policy the active set has mean size n*q ~ log^2(n), which keeps cluster
//! sizes of 10^4 and beyond cheap where a dense n x n draw would not be.

use rand::Rng;
use rand_distr::Exp1;

use crate::config::{NetworkConfig, Shadowing};
use crate::error::{Error, Result};

/// Which links' cross gains to materialize.
#[derive(Debug, Clone)]
pub enum ActiveSet {
    All,
    Links(Vec<usize>),
}

/// Draws `n` i.i.d. unit-mean exponential direct gains.
pub fn sample_direct_gains<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<f64> {
    (0..n).map(|_| rng.sample::<f64, _>(Exp1)).collect()
}

/// Draws one cross gain: zero with probability `1 - alpha`, otherwise
/// `beta * h` with `beta` from the shadowing model and `h ~ Exp(1)`.
pub fn sample_cross_gain<R: Rng + ?Sized>(
    alpha: f64,
    shadowing: &Shadowing,
    rng: &mut R,
) -> f64 {
    if rng.random::<f64>() < alpha {
        let beta = shadowing.sample(rng);
        let h: f64 = rng.sample(Exp1);
        beta * h
    } else {
        0.0
    }
}

/// One cluster's channel realization.
///
/// Cross gains exist only for ordered pairs (k, i) of distinct links inside
/// the active set used at sampling time; queries for unsampled pairs return
/// zero, which is consistent because those pairs never enter any rate.
#[derive(Debug, Clone)]
pub struct ChannelRealization {
    n: usize,
    direct: Vec<f64>,
    /// Sorted link indices whose cross gains were materialized.
    active: Vec<usize>,
    /// Row-major active x active matrix; entry (ak, ai) is the gain from
    /// transmitter active[ak] to receiver active[ai]. Diagonal is unused.
    cross: Vec<f64>,
}

impl ChannelRealization {
    /// Links in the cluster.
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn direct(&self) -> &[f64] {
        &self.direct
    }

    pub fn direct_gain(&self, i: usize) -> f64 {
        self.direct[i]
    }

    /// Sorted indices of links with materialized cross gains.
    pub fn active(&self) -> &[usize] {
        &self.active
    }

    /// Number of sampled ordered cross pairs, a * (a - 1).
    pub fn cross_entry_count(&self) -> usize {
        let a = self.active.len();
        a * a.saturating_sub(1)
    }

    /// Gain from transmitter `k` to the receiver of link `i`; zero for the
    /// diagonal and for pairs outside the sampled set.
    pub fn cross_gain(&self, k: usize, i: usize) -> f64 {
        if k == i {
            return 0.0;
        }
        match (self.active.binary_search(&k), self.active.binary_search(&i)) {
            (Ok(ak), Ok(ai)) => self.cross[ak * self.active.len() + ai],
            _ => 0.0,
        }
    }

    /// Interference seen by every sampled link under the given powers,
    /// returned as (link index, interference) in ascending link order.
    pub fn interference_of_sampled(&self, powers: &[f64]) -> Vec<(usize, f64)> {
        let a = self.active.len();
        let mut out = Vec::with_capacity(a);
        for ai in 0..a {
            let mut sum = 0.0;
            for ak in 0..a {
                if ak != ai {
                    sum += self.cross[ak * a + ai] * powers[self.active[ak]];
                }
            }
            out.push((self.active[ai], sum));
        }
        out
    }

    /// Builds a realization from explicit gains; pairs not listed are zero.
    /// Intended for hand-constructed cases.
    pub fn from_parts(
        n: usize,
        direct: Vec<f64>,
        entries: &[((usize, usize), f64)],
    ) -> Result<Self> {
        if direct.len() != n {
            return Err(Error::Index(format!(
                "direct gains length {} does not match n = {n}",
                direct.len()
            )));
        }
        let mut touched: Vec<usize> = entries
            .iter()
            .flat_map(|((k, i), _)| [*k, *i])
            .collect();
        touched.sort_unstable();
        touched.dedup();
        if touched.iter().any(|&i| i >= n) {
            return Err(Error::Index("cross entry index outside the cluster".into()));
        }
        let a = touched.len();
        let mut cross = vec![0.0; a * a];
        for ((k, i), gain) in entries {
            if k == i {
                return Err(Error::Index("cross entries need k != i".into()));
            }
            let ak = touched.binary_search(k).unwrap();
            let ai = touched.binary_search(i).unwrap();
            cross[ak * a + ai] = *gain;
        }
        Ok(ChannelRealization { n, direct, active: touched, cross })
    }

    /// Materializes cross gains for the given active set on top of existing
    /// direct gains. Draw order is fixed (transmitters outer, receivers
    /// inner, both ascending), so equal streams give equal realizations.
    pub fn materialize<R: Rng + ?Sized>(
        n: usize,
        direct: Vec<f64>,
        active: Vec<usize>,
        alpha: f64,
        shadowing: &Shadowing,
        rng: &mut R,
    ) -> Self {
        debug_assert!(active.windows(2).all(|w| w[0] < w[1]));
        debug_assert!(active.last().is_none_or(|&i| i < n));
        let a = active.len();
        let mut cross = vec![0.0; a * a];
        for ak in 0..a {
            for ai in 0..a {
                if ak != ai {
                    cross[ak * a + ai] = sample_cross_gain(alpha, shadowing, rng);
                }
            }
        }
        ChannelRealization { n, direct, active, cross }
    }
}

/// Samples a full realization: direct gains for all `n` links, cross gains
/// for ordered pairs inside `active_set`.
pub fn sample_realization<R: Rng + ?Sized>(
    config: &NetworkConfig,
    active_set: &ActiveSet,
    rng: &mut R,
) -> Result<ChannelRealization> {
    let n = config.n();
    let active = match active_set {
        ActiveSet::All => (0..n).collect::<Vec<_>>(),
        ActiveSet::Links(links) => {
            let mut v = links.clone();
            v.sort_unstable();
            v.dedup();
            if v.last().is_some_and(|&i| i >= n) {
                return Err(Error::Index(format!(
                    "active set contains an index outside 0..{n}"
                )));
            }
            v
        }
    };
    let direct = sample_direct_gains(n, rng);
    Ok(ChannelRealization::materialize(
        n,
        direct,
        active,
        config.alpha,
        &config.shadowing,
        rng,
    ))
}
