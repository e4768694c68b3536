//! BB84 followed by repetition-code classical advantage distillation (CAD),
//! four-state and six-state, as a reference curve.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::optimize::{bisect_boundary, scan_then_refine};
use crate::qmath::h2;

const LAMBDA4_SCAN_POINTS: usize = 1001;
const LAMBDA4_TOL: f64 = 1e-10;
pub const CAD_THRESHOLD_WIDTH: f64 = 1e-5;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum BasisMode {
    #[serde(rename = "four-state")]
    FourState,
    #[serde(rename = "six-state")]
    SixState,
}

impl BasisMode {
    pub fn from_states(n: u8) -> Option<Self> {
        match n {
            4 => Some(BasisMode::FourState),
            6 => Some(BasisMode::SixState),
            _ => None,
        }
    }

    pub fn tag(self) -> &'static str {
        match self {
            BasisMode::FourState => "BB84-XZ",
            BasisMode::SixState => "BB84-XYZ",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CadConfig {
    pub block: u32,
    pub basis: BasisMode,
    pub q: f64,
}

impl CadConfig {
    pub fn new(block: u32, basis: BasisMode, q: f64) -> Result<Self> {
        if block == 0 {
            return Err(Error::Domain("CAD block size must be at least 1".into()));
        }
        if !(0.0..=0.5).contains(&q) {
            return Err(Error::Domain(format!("Q = {q} outside [0, 0.5]")));
        }
        Ok(Self { block, basis, q })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CadReport {
    pub e_c: f64,
    pub rate: f64,
    pub effective_rate: f64,
    pub entropy: f64,
    /// Minimising `λ₄`; `None` for six-state.
    pub bell_weight_worst: Option<f64>,
}

/// Error rate of the distilled bit: `Q^C / (Q^C + (1−Q)^C)`.
pub fn cad_error(block: u32, q: f64) -> f64 {
    if q <= 0.0 {
        return 0.0;
    }
    let a = q.powi(block as i32);
    let b = (1.0 - q).powi(block as i32);
    if a > f64::MIN_POSITIVE * 1e3 {
        return a / (a + b);
    }
    let log_r = block as f64 * (q.ln() - (-q).ln_1p());
    let r = log_r.exp();
    r / (1.0 + r)
}

/// `1 − h((1−L)/2)`; the series form keeps small `L` accurate.
fn one_minus_h_half(l: f64) -> f64 {
    let l = l.abs().min(1.0);
    if l < 1e-3 {
        let l2 = l * l;
        let mut term = l2;
        let mut sum = 0.0;
        for n in 1..=6 {
            let n = n as f64;
            sum += term / (2.0 * n * (2.0 * n - 1.0));
            term *= l2;
        }
        return sum / std::f64::consts::LN_2;
    }
    if l == 1.0 {
        return 1.0;
    }
    ((1.0 + l) * l.ln_1p() + (1.0 - l) * (-l).ln_1p()) / (2.0 * std::f64::consts::LN_2)
}

/// `S(A|E)` after CAD for given eigenvalue ratios.
fn entropy_after_cad(block: u32, e_c: f64, eq: f64, diff: f64) -> f64 {
    let c = block as i32;
    (1.0 - e_c) * one_minus_h_half(eq.powi(c)) + e_c * one_minus_h_half(diff.powi(c))
}

fn four_state_ratios(q: f64, bell_weight: f64) -> (f64, f64) {
    let eq = (1.0 - 3.0 * q + 2.0 * bell_weight) / (1.0 - q);
    let diff = if q == 0.0 { 0.0 } else { (q - 2.0 * bell_weight).abs() / q };
    (eq, diff)
}

/// Rate, entropy and distilled error for one configuration; the four-state
/// entropy is minimised over `λ₄ ∈ [0, Q]`.
pub fn cad_rate(cfg: &CadConfig) -> CadReport {
    let e_c = cad_error(cfg.block, cfg.q);
    let (entropy, bell_weight_worst) = match cfg.basis {
        BasisMode::SixState => {
            let eq = (1.0 - 2.0 * cfg.q) / (1.0 - cfg.q);
            (entropy_after_cad(cfg.block, e_c, eq, 0.0), None)
        }
        BasisMode::FourState => {
            let f = |l4: f64| {
                let (eq, diff) = four_state_ratios(cfg.q, l4);
                entropy_after_cad(cfg.block, e_c, eq, diff)
            };
            let m = scan_then_refine(f, 0.0, cfg.q, LAMBDA4_SCAN_POINTS, LAMBDA4_TOL);
            (m.value, Some(m.x))
        }
    };
    let rate = (entropy - h2(e_c)).max(0.0);
    CadReport { e_c, rate, effective_rate: effective(cfg, rate, false), entropy, bell_weight_worst }
}

fn effective(cfg: &CadConfig, rate: f64, two_channels: bool) -> f64 {
    let c = cfg.block as i32;
    let p_acc = (1.0 - cfg.q).powi(c) + cfg.q.powi(c);
    let r = p_acc * rate / cfg.block as f64;
    if two_channels {
        2.0 * r
    } else {
        r
    }
}

/// Secret bits per transmitted qubit; doubled when both directions of a
/// two-way channel run BB84.
pub fn cad_effective_rate(cfg: &CadConfig, two_channels: bool) -> f64 {
    effective(cfg, cad_rate(cfg).rate, two_channels)
}

/// Largest `Q` with positive CAD rate, by bisection on `[0, 0.5]`.
pub fn cad_threshold(block: u32, basis: BasisMode) -> Result<f64> {
    let positive = |q: f64| CadConfig::new(block, basis, q).map(|c| cad_rate(&c).rate > 0.0).unwrap_or(false);
    if !positive(1e-6) {
        return Err(Error::DegenerateSearch(format!("{} [{block}]: rate not positive at Q = 1e-6", basis.tag())));
    }
    let (lo, _) = bisect_boundary(positive, 0.0, 0.5, CAD_THRESHOLD_WIDTH);
    Ok(lo)
}

/// One line of a comparison table.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CadRow {
    pub protocol_tag: String,
    #[serde(rename = "C")]
    pub block: u32,
    #[serde(rename = "Q")]
    pub q: f64,
    pub rate: f64,
    pub effective_rate: f64,
    pub entropy: f64,
}

pub fn cad_row(cfg: &CadConfig, two_channels: bool) -> CadRow {
    let r = cad_rate(cfg);
    CadRow {
        protocol_tag: format!("{}[{}]", cfg.basis.tag(), cfg.block),
        block: cfg.block,
        q: cfg.q,
        rate: r.rate,
        effective_rate: effective(cfg, r.rate, two_channels),
        entropy: r.entropy,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn h_ref(x: f64) -> f64 {
        if x <= 0.0 || x >= 1.0 {
            0.0
        } else {
            -x * x.log2() - (1.0 - x) * (1.0 - x).log2()
        }
    }

    #[test]
    fn cad_error_examples() {
        assert_eq!(cad_error(1, 0.3), 0.3);
        assert_eq!(cad_error(3, 0.0), 0.0);
        assert!((cad_error(2, 0.1) - 0.012_195_121_951_219_512).abs() < 1e-17);
        assert_eq!(cad_error(5, 0.5), 0.5);
    }

    #[test]
    fn cad_error_survives_huge_blocks() {
        // 0.45^1000 underflows; the ratio (0.45/0.55)^1000 does not
        assert_eq!(0.45f64.powi(1000), 0.0);
        let e = cad_error(1000, 0.45);
        let r = (1000.0 * (0.45f64 / 0.55).ln()).exp();
        assert!(e > 0.0);
        assert!((e / (r / (1.0 + r)) - 1.0).abs() < 1e-9);
        assert_eq!(cad_error(100_000, 0.5), 0.5);
    }

    #[test]
    fn one_minus_h_half_matches_direct_formula() {
        for l in [0.0, 1e-6, 5e-4, 1e-3, 0.2, 0.9, 1.0] {
            let direct = 1.0 - h_ref((1.0 - l) / 2.0);
            assert!((one_minus_h_half(l) - direct).abs() < 1e-13, "L = {l}");
        }
        // tiny L, where the direct formula loses everything
        assert!((one_minus_h_half(1e-9) - 0.5e-18 / std::f64::consts::LN_2).abs() < 1e-30);
    }

    #[test]
    fn noiseless_rates() {
        for basis in [BasisMode::FourState, BasisMode::SixState] {
            for c in [1, 2, 7] {
                let cfg = CadConfig::new(c, basis, 0.0).unwrap();
                assert_eq!(cad_rate(&cfg).rate, 1.0);
            }
        }
        let one = CadConfig::new(1, BasisMode::SixState, 0.0).unwrap();
        assert_eq!(cad_effective_rate(&one, false), 1.0);
        let two = CadConfig::new(2, BasisMode::SixState, 0.0).unwrap();
        assert_eq!(cad_effective_rate(&two, false), 0.5);
    }

    #[test]
    fn two_channel_effective_rate() {
        let cfg = CadConfig::new(2, BasisMode::SixState, 0.05).unwrap();
        let r = cad_rate(&cfg).rate;
        assert!(r > 0.0);
        // p_acc = 0.95² + 0.05² = 0.905
        assert!((cad_effective_rate(&cfg, true) - 2.0 * 0.5 * 0.905 * r).abs() < 1e-15);
    }

    #[test]
    fn no_distillation_reduces_to_plain_bb84() {
        // C = 1 six-state: 1 − h(Q) − (1−Q) h((1−Λ)/2) with Λ = (1−2Q)/(1−Q)
        let q = 0.08;
        let eq = (1.0 - 2.0 * q) / (1.0 - q);
        let expect = 1.0 - h_ref(q) - (1.0 - q) * h_ref((1.0 - eq) / 2.0) - q;
        let cfg = CadConfig::new(1, BasisMode::SixState, q).unwrap();
        assert!((cad_rate(&cfg).rate - expect).abs() < 1e-12);
        // C = 1 four-state is the standard 1 − 2h(Q)
        let cfg = CadConfig::new(1, BasisMode::FourState, q).unwrap();
        assert!((cad_rate(&cfg).rate - (1.0 - 2.0 * h_ref(q))).abs() < 1e-9);
    }

    #[test]
    fn rejects_bad_config() {
        assert!(CadConfig::new(0, BasisMode::SixState, 0.1).is_err());
        assert!(CadConfig::new(2, BasisMode::SixState, 0.6).is_err());
    }

    #[test]
    fn threshold_grows_with_block_size() {
        let mut prev = 0.0;
        for c in 1..=20 {
            let t = cad_threshold(c, BasisMode::SixState).unwrap();
            assert!(t >= prev - 1e-12, "C = {c}: {t} < {prev}");
            prev = t;
        }
    }

    proptest! {
        #[test]
        fn rate_is_entropy_minus_error_entropy(c in 1u32..40, q in 0.0f64..0.5, six in any::<bool>()) {
            let basis = if six { BasisMode::SixState } else { BasisMode::FourState };
            let r = cad_rate(&CadConfig::new(c, basis, q).unwrap());
            let raw = r.entropy - h2(r.e_c);
            prop_assert!((r.rate - raw.max(0.0)).abs() < 1e-12);
            prop_assert!((0.0..=0.5).contains(&r.e_c));
        }

        #[test]
        fn four_state_minimum_beats_endpoints(c in 1u32..20, q in 0.001f64..0.5) {
            let cfg = CadConfig::new(c, BasisMode::FourState, q).unwrap();
            let r = cad_rate(&cfg);
            let l4 = r.bell_weight_worst.unwrap();
            prop_assert!((0.0..=q).contains(&l4));
            let e = cad_error(c, q);
            for end in [0.0, q] {
                let (eq, diff) = four_state_ratios(q, end);
                prop_assert!(r.entropy <= entropy_after_cad(c, e, eq, diff) + 1e-12);
            }
        }
    }
}
