//! Parameter estimation: from observable statistics to constraints on the
//! inner products of Eve's conditional states.
//!
//! Two estimators are provided. [`mode2_bounds`] uses Z and X statistics
//! only; the two cross terms it cannot observe are replaced by their
//! Cauchy-Schwarz maxima, which yields a lower bound on `Λ₁ + Λ₂`.
//! [`mode3_bounds`] adds Y-basis statistics, which pin down the imaginary
//! parts needed to solve for the cross terms, so `Λ₁ + Λ₂` is recovered
//! exactly.
//!
//! Throughout, `Λ₁ = Re<e^0_{0,0}|e^1_{1,3}>` and
//! `Λ₂ = Re<e^0_{1,1}|e^1_{0,2}>`.

mod stats;

pub use stats::{Basis, ChannelStatistics, Outcome, Prep, CONDITIONING_FLOOR};

use crate::attack::{label_seen, label_sent};
use crate::error::{Error, Result};
use crate::Mode;

/// Statistics of a symmetric two-way channel: Z errors `q_f` forward and
/// `q_r` on return, error `q_x` on the reflection path in every basis, and
/// ½ for every mismatched event.
pub fn symmetric_stats(q_f: f64, q_r: f64, q_x: f64, mode: Mode) -> Result<ChannelStatistics> {
    for (name, v) in [("Q_F", q_f), ("Q_R", q_r), ("Q_X", q_x)] {
        if !(0.0..=0.5).contains(&v) {
            return Err(Error::Domain(format!("{name} = {v} outside [0, 0.5]")));
        }
    }
    let mut s = ChannelStatistics::empty(mode);
    let bases = Basis::for_mode(mode);
    let preps: &[Prep] = match mode {
        Mode::Mode2 => &[Prep::Zero, Prep::One, Prep::Plus],
        Mode::Mode3 => &Prep::ALL,
    };
    for &prep in preps {
        for bob in 0..2u8 {
            let fwd = match prep {
                Prep::Zero | Prep::One if Prep::from_bit(bob) == prep => 1.0 - q_f,
                Prep::Zero | Prep::One => q_f,
                _ => 0.5,
            };
            s.set_forward(prep, bob, Some(fwd));
            for &basis in bases {
                for o in basis.outcomes() {
                    let p = match basis {
                        Basis::Z if o == Outcome::from_bit(bob) => 1.0 - q_r,
                        Basis::Z => q_r,
                        _ => 0.5,
                    };
                    s.set_returned(prep, bob, o, Some(p));
                }
            }
        }
        let sent_basis = prep.as_outcome().basis();
        for &basis in bases {
            for o in basis.outcomes() {
                let p = if basis != sent_basis {
                    0.5
                } else if o == prep.as_outcome() {
                    1.0 - q_x
                } else {
                    q_x
                };
                s.set_reflected(prep, o, Some(p));
            }
        }
    }
    Ok(s)
}

/// `<e^k_{i,j}|e^k_{i,j}>` for the eight vectors that enter the key state
/// and its bounds, indexed by forward label `j` (which fixes Bob's bit `i`)
/// and Alice's Z outcome `k`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ReturnNorms(pub [[f64; 2]; 4]);

impl ReturnNorms {
    pub fn get(&self, label: usize, alice: usize) -> f64 {
        self.0[label][alice]
    }

    /// Post-selection normalization: half the mass of the four kept vectors.
    pub fn normalization(&self) -> f64 {
        0.5 * (self.get(0, 0) + self.get(1, 0) + self.get(3, 1) + self.get(2, 1))
    }

    /// `(n(e^0_{0,0}), n(e^1_{1,3}))`.
    pub fn agree_pair(&self) -> (f64, f64) {
        (self.get(0, 0), self.get(3, 1))
    }

    /// `(n(e^0_{1,1}), n(e^1_{0,2}))`.
    pub fn disagree_pair(&self) -> (f64, f64) {
        (self.get(1, 0), self.get(2, 1))
    }
}

/// Each norm is a forward probability times a return probability.
pub fn norms_from_stats(stats: &ChannelStatistics) -> Result<ReturnNorms> {
    let mut out = [[0.0; 2]; 4];
    for (label, row) in out.iter_mut().enumerate() {
        let prep = Prep::from_bit(label_sent(label));
        for (alice, slot) in row.iter_mut().enumerate() {
            *slot = stats.joint(prep, label_seen(label), Outcome::from_bit(alice as u8))?;
        }
    }
    Ok(ReturnNorms(out))
}

/// Constraints on Eve's inner products implied by the statistics.
#[derive(Clone, Debug, PartialEq)]
pub struct InnerProductBounds {
    pub norms: ReturnNorms,
    /// `Λ₁ + Λ₂`, or a lower bound on it.
    pub overlap_sum: f64,
    pub overlap_sum_is_exact: bool,
    /// Cauchy-Schwarz cap on `|Λ₁|`.
    pub agree_cap: f64,
    /// Cauchy-Schwarz cap on `|Λ₂|`.
    pub disagree_cap: f64,
    /// `Re<e^0_{0,0}|e^1_{0,2}> + Re<e^1_{0,0}|e^0_{0,2}>`.
    pub cross_sum0: f64,
    /// `Re<e^0_{1,1}|e^1_{1,3}> + Re<e^1_{1,1}|e^0_{1,3}>`.
    pub cross_sum1: f64,
    /// Recovered `Re<e^0_{0,0}|e^1_{0,2}>` and `Re<e^0_{1,1}|e^1_{1,3}>`;
    /// `None` where the statistics were insufficient.
    pub cross_re: [Option<f64>; 2],
    /// Value of `overlap_sum` before it was clipped into `[−agree_cap−disagree_cap, agree_cap+disagree_cap]`.
    pub clipped_from: Option<f64>,
}

impl InnerProductBounds {
    fn new(norms: ReturnNorms, overlap_sum: f64, exact: bool, q: (f64, f64), cross_re: [Option<f64>; 2]) -> Self {
        let (a0, a1) = norms.agree_pair();
        let (d0, d1) = norms.disagree_pair();
        let agree_cap = (a0 * a1).sqrt();
        let disagree_cap = (d0 * d1).sqrt();
        let cap = agree_cap + disagree_cap;
        let clipped = overlap_sum.clamp(-cap, cap);
        Self {
            norms,
            overlap_sum: clipped,
            overlap_sum_is_exact: exact,
            agree_cap,
            disagree_cap,
            cross_sum0: q.0,
            cross_sum1: q.1,
            cross_re,
            clipped_from: (clipped != overlap_sum).then_some(overlap_sum),
        }
    }
}

/// The pair `(q₁, q₂)` from X-basis statistics on the measure-and-resend path.
pub fn cross_sums(stats: &ChannelStatistics) -> Result<(f64, f64)> {
    let q = |bob: u8| -> Result<f64> {
        let plus = stats.require_forward(Prep::Plus, bob)?;
        Ok(2.0 * stats.joint(Prep::Plus, bob, Outcome::Plus)? - plus
            + (0.5 * stats.require_forward(Prep::Zero, bob)? - stats.joint(Prep::Zero, bob, Outcome::Plus)?)
            + (0.5 * stats.require_forward(Prep::One, bob)? - stats.joint(Prep::One, bob, Outcome::Plus)?))
    };
    Ok((q(0)?, q(1)?))
}

/// Two-basis estimate: `Λ₁ + Λ₂` bounded below using the X error of the
/// reflection path, with unobservable cross terms at their Cauchy-Schwarz
/// maxima.
pub fn mode2_bounds(stats: &ChannelStatistics) -> Result<InnerProductBounds> {
    let norms = norms_from_stats(stats)?;
    let (cross_sum0, cross_sum1) = cross_sums(stats)?;
    let q_x = stats.require_reflected(Prep::Plus, Outcome::Minus)?;
    let p0 = stats.require_reflected(Prep::Zero, Outcome::Plus)?;
    let p1 = stats.require_reflected(Prep::One, Outcome::Plus)?;
    // |Re<e^1_{0,0}|e^0_{1,3}>| and |Re<e^1_{1,1}|e^0_{0,2}>|
    let cap_a = (norms.get(0, 1) * norms.get(3, 0)).sqrt();
    let cap_b = (norms.get(1, 1) * norms.get(2, 0)).sqrt();
    let lower = 2.0 - 2.0 * q_x - (cross_sum0 + cross_sum1 + p0 + p1 + cap_a + cap_b);
    Ok(InnerProductBounds::new(norms, lower, false, (cross_sum0, cross_sum1), [None, None]))
}

/// `Re<g_0|g_3>` of the reflection path from X and Y statistics.
pub fn reflection_overlap(stats: &ChannelStatistics) -> Result<f64> {
    let x_err = stats.require_reflected(Prep::Plus, Outcome::Minus)?;
    let y_err = stats.require_reflected(Prep::ZeroY, Outcome::OneY)?;
    let sum = stats.require_reflected(Prep::Zero, Outcome::Plus)?
        + stats.require_reflected(Prep::One, Outcome::Plus)?
        + stats.require_reflected(Prep::Zero, Outcome::ZeroY)?
        + stats.require_reflected(Prep::One, Outcome::ZeroY)?;
    Ok(1.0 - x_err - y_err - 0.5 * (sum - 2.0))
}

/// `Re<e^0_{i,a}|e^1_{i,b}>` for Bob's bit `i`, where `a`, `b` are the
/// forward labels with Alice sending 0 and 1: the sum comes from `q_i`,
/// the difference from the `|0_Y>` statistics.
pub fn cross_overlap(stats: &ChannelStatistics, bob: u8, q: f64) -> Result<f64> {
    let p_from0 = stats.require_forward(Prep::Zero, bob)?;
    let p_from1 = stats.require_forward(Prep::One, bob)?;
    let j = |prep, o| stats.joint(prep, bob, o);
    // Im<e^0|e^1> within each forward label
    let im_self0 = j(Prep::Zero, Outcome::ZeroY)? - 0.5 * p_from0;
    let im_self1 = j(Prep::One, Outcome::ZeroY)? - 0.5 * p_from1;
    // Im<e^0_a|e^0_b> and Im<e^1_a|e^1_b>
    let im_00 = 0.5 * (j(Prep::Zero, Outcome::Zero)? + j(Prep::One, Outcome::Zero)?) - j(Prep::ZeroY, Outcome::Zero)?;
    let im_11 = 0.5 * (j(Prep::Zero, Outcome::One)? + j(Prep::One, Outcome::One)?) - j(Prep::ZeroY, Outcome::One)?;
    let y_same = j(Prep::ZeroY, Outcome::ZeroY)?;
    let diff = 0.5 * (4.0 * y_same - p_from0 - p_from1) - (im_self0 - im_00) - (im_self1 - im_11);
    Ok(0.5 * (q + diff))
}

/// Three-basis estimate: `Λ₁ + Λ₂ = Re<g_0|g_3> − Re<e^0_{0,0}|e^1_{0,2}>
/// − Re<e^0_{1,1}|e^1_{1,3}>`, all observable. A cross term whose
/// statistics are missing is replaced by its Cauchy-Schwarz maximum; if
/// the reflection Y statistics are missing the two-basis bound is used.
pub fn mode3_bounds(stats: &ChannelStatistics) -> Result<InnerProductBounds> {
    if stats.mode() != Mode::Mode3 {
        return Err(Error::MissingStatistic("Y-basis rows (statistics are two-basis)".into()));
    }
    let overlap = match reflection_overlap(stats) {
        Ok(v) => v,
        Err(Error::MissingStatistic(_)) => return mode2_bounds(stats),
        Err(e) => return Err(e),
    };
    let norms = norms_from_stats(stats)?;
    let (cross_sum0, cross_sum1) = cross_sums(stats)?;
    let caps = [(norms.get(0, 0) * norms.get(2, 1)).sqrt(), (norms.get(1, 0) * norms.get(3, 1)).sqrt()];
    let mut cross = [None, None];
    let mut sum = overlap;
    for (bob, q) in [(0u8, cross_sum0), (1u8, cross_sum1)] {
        match cross_overlap(stats, bob, q) {
            Ok(v) => {
                cross[bob as usize] = Some(v);
                sum -= v;
            }
            Err(Error::MissingStatistic(_)) => sum -= caps[bob as usize],
            Err(e) => return Err(e),
        }
    }
    let exact = cross.iter().all(Option::is_some);
    Ok(InnerProductBounds::new(norms, sum, exact, (cross_sum0, cross_sum1), cross))
}

/// Dispatch on the protocol variant.
pub fn bounds_for(mode: Mode, stats: &ChannelStatistics) -> Result<InnerProductBounds> {
    match mode {
        Mode::Mode2 => mode2_bounds(stats),
        Mode::Mode3 => mode3_bounds(stats),
    }
}
