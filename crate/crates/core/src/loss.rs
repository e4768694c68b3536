//! Key rate over lossy fiber. Eve is granted full knowledge of the key bit
//! whenever a photon is lost, so the entropy term scales by `1 − p_l`, and
//! lost rounds that Alice still accepts add errors to `H(A|B)`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::estimate::symmetric_stats;
use crate::keyrate::key_rate;
use crate::qmath::shannon_entropy;
use crate::Mode;

pub const DEFAULT_ALPHA: f64 = 0.25;
/// Final bracket width of [`max_distance`], km.
pub const DISTANCE_WIDTH: f64 = 0.01;
/// Beyond this the search reports [`MaxDistance::Unlimited`], km.
pub const DISTANCE_CEILING: f64 = 1e4;

/// Per-channel loss probability of `d` km of fiber at `alpha` dB/km.
pub fn loss_probability(alpha: f64, d: f64) -> f64 {
    -(-alpha * d / 10.0 * std::f64::consts::LN_10).exp_m1()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LossConfig {
    pub mode: Mode,
    pub q: f64,
    pub q_x: f64,
    pub alpha: f64,
    pub d: f64,
}

impl LossConfig {
    pub fn new(mode: Mode, q: f64, q_x: f64, alpha: f64, d: f64) -> Result<Self> {
        if alpha.is_nan() || alpha < 0.0 {
            return Err(Error::Domain(format!("attenuation {alpha} dB/km must be non-negative")));
        }
        if d.is_nan() || d < 0.0 {
            return Err(Error::Domain(format!("distance {d} km must be non-negative")));
        }
        for (name, v) in [("Q", q), ("Q_X", q_x)] {
            if !(0.0..=0.5).contains(&v) {
                return Err(Error::Domain(format!("{name} = {v} outside [0, 0.5]")));
            }
        }
        Ok(Self { mode, q, q_x, alpha, d })
    }

    pub fn p_l(&self) -> f64 {
        loss_probability(self.alpha, self.d)
    }
}

/// Raw-key distribution `[p̃₀₀, p̃₀₁, p̃₁₀, p̃₁₁]` with per-channel loss `p_l`.
pub fn lossy_key_distribution(q: f64, p_l: f64) -> [f64; 4] {
    let same = (1.0 - q).powi(2) * (1.0 - p_l) + p_l * (1.0 - q);
    let diff = q * q * (1.0 - p_l) + p_l * q;
    let m = 2.0 * (same + diff);
    [same / m, diff / m, diff / m, same / m]
}

/// `H̃(A|B)` of [`lossy_key_distribution`].
pub fn lossy_h_a_given_b(q: f64, p_l: f64) -> Result<f64> {
    let p = lossy_key_distribution(q, p_l);
    Ok(shannon_entropy(&p)? - shannon_entropy(&[p[0] + p[2], p[1] + p[3]])?)
}

/// Loss-free entropy bound of a symmetric channel.
pub fn lossless_entropy_bound(mode: Mode, q: f64, q_x: f64) -> Result<f64> {
    let stats = symmetric_stats(q, q, q_x, mode)?;
    let p_acc = (1.0 - q).powi(2) + q * q;
    Ok(key_rate(mode, &stats, p_acc)?.s_ae_lower)
}

fn rate_from(s_bound: f64, q: f64, p_l: f64) -> Result<f64> {
    Ok((1.0 - p_l) * s_bound - lossy_h_a_given_b(q, p_l)?)
}

/// `(1 − p_l)·S − H̃(A|B)`.
pub fn lossy_key_rate(cfg: &LossConfig) -> Result<f64> {
    rate_from(lossless_entropy_bound(cfg.mode, cfg.q, cfg.q_x)?, cfg.q, cfg.p_l())
}

/// Range of a channel with positive key rate.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(untagged)]
pub enum MaxDistance {
    Km(f64),
    /// Positive rate at any length: no attenuation, or beyond the search
    /// ceiling.
    Unlimited,
}

impl MaxDistance {
    pub fn km(self) -> Option<f64> {
        match self {
            MaxDistance::Km(d) => Some(d),
            MaxDistance::Unlimited => None,
        }
    }
}

impl std::fmt::Display for MaxDistance {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            MaxDistance::Km(d) => write!(f, "{d:.2}"),
            MaxDistance::Unlimited => f.write_str("unlimited"),
        }
    }
}

/// Largest distance with positive rate, to [`DISTANCE_WIDTH`].
pub fn max_distance(q: f64, q_x: f64, alpha: f64, mode: Mode) -> Result<MaxDistance> {
    LossConfig::new(mode, q, q_x, alpha, 0.0)?;
    let s = lossless_entropy_bound(mode, q, q_x)?;
    let positive = |d: f64| rate_from(s, q, loss_probability(alpha, d)).map(|r| r > 0.0);
    if !positive(0.0)? {
        return Ok(MaxDistance::Km(0.0));
    }
    if alpha == 0.0 {
        return Ok(MaxDistance::Unlimited);
    }
    let mut hi = 1.0;
    while positive(hi)? {
        if hi >= DISTANCE_CEILING {
            return Ok(MaxDistance::Unlimited);
        }
        hi *= 2.0;
    }
    let mut lo = 0.0;
    while hi - lo > DISTANCE_WIDTH {
        let mid = 0.5 * (lo + hi);
        if positive(mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(MaxDistance::Km(lo))
}

/// One line of a distance sweep.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DistanceRow {
    pub mode: Mode,
    #[serde(rename = "Q")]
    pub q: f64,
    #[serde(rename = "Q_X")]
    pub q_x: f64,
    pub alpha: f64,
    pub d: f64,
    pub p_l: f64,
    pub rate: f64,
}

/// Lossy rate along a grid of distances, in grid order.
pub fn distance_sweep(mode: Mode, q: f64, q_x: f64, alpha: f64, distances: &[f64]) -> Result<Vec<DistanceRow>> {
    LossConfig::new(mode, q, q_x, alpha, 0.0)?;
    let s = lossless_entropy_bound(mode, q, q_x)?;
    distances
        .iter()
        .map(|&d| {
            let cfg = LossConfig::new(mode, q, q_x, alpha, d)?;
            let p_l = cfg.p_l();
            Ok(DistanceRow { mode, q, q_x, alpha, d, p_l, rate: rate_from(s, q, p_l)? })
        })
        .collect()
}
