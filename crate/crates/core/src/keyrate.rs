//! Key-rate lower bound: worst case of the pairwise entropy bound over the
//! unobserved split of `Λ₁ + Λ₂`, minus `H(A|B)`.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::estimate::{bounds_for, symmetric_stats, ChannelStatistics, InnerProductBounds, ReturnNorms};
use crate::optimize::{bisect_boundary, scan_then_refine, Minimum};
use crate::qmath::{pair_bound_term, shannon_entropy};
use crate::Mode;

/// Grid size for the scan over `Λ₂`.
pub const LAMBDA_SCAN_POINTS: usize = 2001;
/// Final bracket width of the golden refinement over `Λ₂`.
pub const LAMBDA_TOL: f64 = 1e-10;
/// Final bracket width of [`noise_threshold`].
pub const THRESHOLD_WIDTH: f64 = 1e-5;

const FEASIBILITY_SLACK: f64 = 1e-12;
const SUM_SCAN_POINTS: usize = 201;

/// How the reflection X error relates to the per-channel Z error.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ChannelKind {
    /// Two independent depolarizing legs: `Q_X = 2Q(1−Q)`.
    Independent,
    /// Correlated legs: `Q_X = Q`.
    Dependent,
    /// Caller-supplied `Q_X`.
    Custom,
}

impl ChannelKind {
    pub fn label(self) -> &'static str {
        match self {
            ChannelKind::Independent => "independent",
            ChannelKind::Dependent => "dependent",
            ChannelKind::Custom => "custom",
        }
    }
}

impl std::fmt::Display for ChannelKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

/// A symmetric two-way channel.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChannelFamily {
    kind: ChannelKind,
    q: f64,
    q_x: f64,
}

impl ChannelFamily {
    /// `q_x` is required for [`ChannelKind::Custom`] and ignored otherwise.
    pub fn new(kind: ChannelKind, q: f64, q_x: Option<f64>) -> Result<Self> {
        if !(0.0..=0.5).contains(&q) {
            return Err(Error::Domain(format!("Q = {q} outside [0, 0.5]")));
        }
        let q_x = match kind {
            ChannelKind::Independent => 2.0 * q * (1.0 - q),
            ChannelKind::Dependent => q,
            ChannelKind::Custom => q_x.ok_or_else(|| Error::Domain("custom channel needs Q_X".into()))?,
        };
        if !(0.0..=0.5).contains(&q_x) {
            return Err(Error::Domain(format!("Q_X = {q_x} outside [0, 0.5]")));
        }
        Ok(Self { kind, q, q_x })
    }

    pub fn kind(&self) -> ChannelKind {
        self.kind
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn q_x(&self) -> f64 {
        self.q_x
    }

    pub fn stats(&self, mode: Mode) -> Result<ChannelStatistics> {
        symmetric_stats(self.q, self.q, self.q_x, mode)
    }

    /// Probability that a Z/measure-and-resend iteration is accepted.
    pub fn p_acc(&self) -> f64 {
        (1.0 - self.q).powi(2) + self.q * self.q
    }
}

/// How `Λ₁ + Λ₂` is tied to the estimated value.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum SumConstraint {
    /// The sum equals the estimate.
    #[default]
    Equal,
    /// The sum is anywhere between the estimate and its Cauchy-Schwarz cap.
    AtLeast,
}

/// Outcome of the worst-case minimisation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EntropyBound {
    pub value: f64,
    pub disagree_overlap: f64,
    pub agree_overlap: f64,
}

/// Raw-key error of a symmetric channel after post-selection.
pub fn key_error(q: f64) -> f64 {
    let a = q * q;
    let b = (1.0 - q) * (1.0 - q);
    a / (a + b)
}

/// Joint distribution of the raw-key pair (Alice's bit, Bob's bit).
fn key_distribution(norms: &ReturnNorms, normalization: f64) -> [[f64; 2]; 2] {
    let w = 2.0 * normalization;
    [[norms.get(0, 0) / w, norms.get(1, 0) / w], [norms.get(2, 1) / w, norms.get(3, 1) / w]]
}

/// `H(A|B) = H(A, B) − H(B)` over the post-selected raw key.
pub fn h_a_given_b(norms: &ReturnNorms, normalization: f64) -> Result<f64> {
    if normalization.is_nan() || normalization <= 0.0 {
        return Err(Error::Domain(format!("normalization {normalization} must be positive")));
    }
    let p = key_distribution(norms, normalization);
    let joint = shannon_entropy(&[p[0][0], p[0][1], p[1][0], p[1][1]])?;
    let bob = shannon_entropy(&[p[0][0] + p[1][0], p[0][1] + p[1][1]])?;
    Ok(joint - bob)
}

fn feasible_interval(sum: f64, agree_cap: f64, disagree_cap: f64) -> Result<(f64, f64)> {
    let lo = (-disagree_cap).max(sum - agree_cap);
    let hi = disagree_cap.min(sum + agree_cap);
    if lo > hi + FEASIBILITY_SLACK {
        return Err(Error::Infeasible(format!(
            "no Λ₂ in [{:.3e}, {:.3e}] compatible with Λ₁ + Λ₂ = {sum:.12}",
            -disagree_cap, disagree_cap
        )));
    }
    Ok((lo, hi.max(lo)))
}

fn fixed_sum_minimum(b: &InnerProductBounds, sum: f64) -> Result<Minimum> {
    let (a0, a1) = b.norms.agree_pair();
    let (d0, d1) = b.norms.disagree_pair();
    let w = 2.0 * b.norms.normalization();
    let (lo, hi) = feasible_interval(sum, b.agree_cap, b.disagree_cap)?;
    let objective = |l2: f64| pair_bound_term(a0, a1, sum - l2, w) + pair_bound_term(d0, d1, l2, w);
    Ok(scan_then_refine(objective, lo, hi, LAMBDA_SCAN_POINTS, LAMBDA_TOL))
}

/// Minimum over `Λ₂` of the pairwise bound on `S(A|E)`, with
/// `Λ₁ = overlap_sum − Λ₂` and both within their Cauchy-Schwarz caps.
pub fn entropy_lower_bound(bounds: &InnerProductBounds, constraint: SumConstraint) -> Result<EntropyBound> {
    if bounds.norms.normalization() <= 0.0 {
        return Err(Error::Domain("post-selection probability is zero".into()));
    }
    let (sum, m) = match constraint {
        SumConstraint::Equal => (bounds.overlap_sum, fixed_sum_minimum(bounds, bounds.overlap_sum)?),
        SumConstraint::AtLeast => {
            let cap = bounds.agree_cap + bounds.disagree_cap;
            let outer = |s: f64| fixed_sum_minimum(bounds, s).map(|m| m.value).unwrap_or(f64::INFINITY);
            let best = scan_then_refine(outer, bounds.overlap_sum, cap, SUM_SCAN_POINTS, LAMBDA_TOL);
            (best.x, fixed_sum_minimum(bounds, best.x)?)
        }
    };
    Ok(EntropyBound { value: m.value.max(0.0), disagree_overlap: m.x, agree_overlap: sum - m.x })
}

/// Everything reported for one key-rate evaluation.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct KeyRateReport {
    pub s_ae_lower: f64,
    pub h_ab: f64,
    pub rate: f64,
    pub effective_rate: f64,
    pub p_acc: f64,
    pub disagree_overlap_worst: f64,
    pub agree_overlap_worst: f64,
    pub key_error: f64,
}

/// `r = S(A|E) − H(A|B)` and `r̃ = ½·p_acc·r`.
pub fn key_rate(mode: Mode, stats: &ChannelStatistics, p_acc: f64) -> Result<KeyRateReport> {
    key_rate_with(mode, stats, p_acc, SumConstraint::Equal)
}

pub fn key_rate_with(
    mode: Mode,
    stats: &ChannelStatistics,
    p_acc: f64,
    constraint: SumConstraint,
) -> Result<KeyRateReport> {
    if !(0.0..=1.0).contains(&p_acc) {
        return Err(Error::Domain(format!("p_acc = {p_acc} outside [0, 1]")));
    }
    let bounds = bounds_for(mode, stats)?;
    let s = entropy_lower_bound(&bounds, constraint)?;
    let n = bounds.norms.normalization();
    let h_ab = h_a_given_b(&bounds.norms, n)?;
    let p = key_distribution(&bounds.norms, n);
    let rate = s.value - h_ab;
    Ok(KeyRateReport {
        s_ae_lower: s.value,
        h_ab,
        rate,
        effective_rate: 0.5 * p_acc * rate,
        p_acc,
        disagree_overlap_worst: s.disagree_overlap,
        agree_overlap_worst: s.agree_overlap,
        key_error: p[0][1] + p[1][0],
    })
}

/// Key rate of a symmetric channel.
pub fn channel_key_rate(mode: Mode, channel: &ChannelFamily) -> Result<KeyRateReport> {
    key_rate(mode, &channel.stats(mode)?, channel.p_acc())
}

/// Largest `Q` with positive rate, by bisection on `[0, 0.5]`. The rate at
/// `Q = 0.5` is taken as non-positive without evaluating it.
pub fn noise_threshold(mode: Mode, kind: ChannelKind) -> Result<f64> {
    if kind == ChannelKind::Custom {
        return Err(Error::Domain("threshold needs an independent or dependent channel".into()));
    }
    let positive =
        |q: f64| -> Result<bool> { Ok(channel_key_rate(mode, &ChannelFamily::new(kind, q, None)?)?.rate > 0.0) };
    if !positive(1e-6)? {
        return Err(Error::DegenerateSearch(format!("{mode} {kind}: rate not positive at Q = 1e-6")));
    }
    let (lo, _) = bisect_boundary(|q| positive(q).unwrap_or(false), 0.0, 0.5, THRESHOLD_WIDTH);
    Ok(lo)
}

/// One line of a key-rate sweep.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepRow {
    pub mode: Mode,
    pub kind: ChannelKind,
    pub q: f64,
    pub q_x: f64,
    pub s_ae_lower: f64,
    pub h_ab: f64,
    pub rate: f64,
    pub effective_rate: f64,
    pub disagree_overlap_worst: f64,
}

/// Key rate along a grid of `Q`, in grid order.
pub fn sweep(mode: Mode, kind: ChannelKind, qs: &[f64], q_x: Option<f64>) -> Result<Vec<SweepRow>> {
    qs.par_iter()
        .map(|&q| {
            let ch = ChannelFamily::new(kind, q, q_x)?;
            let r = channel_key_rate(mode, &ch)?;
            Ok(SweepRow {
                mode,
                kind,
                q,
                q_x: ch.q_x(),
                s_ae_lower: r.s_ae_lower,
                h_ab: r.h_ab,
                rate: r.rate,
                effective_rate: r.effective_rate,
                disagree_overlap_worst: r.disagree_overlap_worst,
            })
        })
        .collect()
}

/// `n` evenly spaced points on `[lo, hi]`.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..n).map(|k| if k + 1 == n { hi } else { lo + (hi - lo) * k as f64 / (n - 1) as f64 }).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qmath::binary_entropy;

    fn report(mode: Mode, kind: ChannelKind, q: f64) -> KeyRateReport {
        channel_key_rate(mode, &ChannelFamily::new(kind, q, None).unwrap()).unwrap()
    }

    #[test]
    fn derived_q_x() {
        let f = ChannelFamily::new(ChannelKind::Independent, 0.1, None).unwrap();
        assert!((f.q_x() - 0.18).abs() < 1e-15);
        assert_eq!(ChannelFamily::new(ChannelKind::Dependent, 0.1, Some(0.4)).unwrap().q_x(), 0.1);
        assert_eq!(ChannelFamily::new(ChannelKind::Custom, 0.1, Some(0.4)).unwrap().q_x(), 0.4);
        assert!(ChannelFamily::new(ChannelKind::Custom, 0.1, None).is_err());
        assert!(ChannelFamily::new(ChannelKind::Dependent, 0.6, None).is_err());
    }

    #[test]
    fn h_a_given_b_examples() {
        let zero = ReturnNorms([[1.0, 0.0], [0.0, 0.0], [0.0, 0.0], [0.0, 1.0]]);
        assert_eq!(h_a_given_b(&zero, 1.0).unwrap(), 0.0);

        let flat = ReturnNorms([[0.5, 0.0], [0.5, 0.0], [0.0, 0.5], [0.0, 0.5]]);
        assert!((h_a_given_b(&flat, 1.0).unwrap() - 1.0).abs() < 1e-15);

        let q = 0.1;
        let stats = symmetric_stats(q, q, 0.18, Mode::Mode2).unwrap();
        let n = crate::estimate::norms_from_stats(&stats).unwrap();
        let h = h_a_given_b(&n, n.normalization()).unwrap();
        // h(0.01 / 0.82) at 40 digits
        assert!((h - 0.095_017_245_671_076_34).abs() < 1e-14);

        assert!(matches!(h_a_given_b(&zero, 0.0), Err(Error::Domain(_))));
    }

    #[test]
    fn noiseless_channel() {
        for mode in [Mode::Mode2, Mode::Mode3] {
            let r = report(mode, ChannelKind::Dependent, 0.0);
            assert_eq!(r.s_ae_lower, 1.0);
            assert_eq!(r.rate, 1.0);
            assert_eq!(r.effective_rate, 0.5);
            assert_eq!(r.disagree_overlap_worst, 0.0);
            assert_eq!(r.key_error, 0.0);
        }
    }

    #[test]
    fn report_invariants() {
        for q in [0.02, 0.1, 0.2] {
            let r = report(Mode::Mode3, ChannelKind::Independent, q);
            assert!((r.rate - (r.s_ae_lower - r.h_ab)).abs() < 1e-12);
            assert!((r.effective_rate - 0.5 * r.p_acc * r.rate).abs() < 1e-12);
            assert!(r.disagree_overlap_worst.abs() <= q * q + 1e-12);
            assert!((r.key_error - key_error(q)).abs() < 1e-15);
        }
    }

    #[test]
    fn three_bases_beat_two() {
        let m2 = report(Mode::Mode2, ChannelKind::Independent, 0.1);
        let m3 = report(Mode::Mode3, ChannelKind::Independent, 0.1);
        assert!(m3.rate > m2.rate);
    }

    #[test]
    fn dependent_three_basis_rate_vanishes_near_quarter() {
        let r = report(Mode::Mode3, ChannelKind::Dependent, 0.26);
        assert!(r.rate.abs() < 0.01, "{r:?}");
        assert!((r.s_ae_lower - r.h_ab).abs() < 0.01);
    }

    #[test]
    fn minimum_matches_dense_grid() {
        // independent objective: λ from the eigenvalues of each 2x2 Gram block
        let q: f64 = 0.1;
        let (a, d) = ((1.0 - q).powi(2), q * q);
        let norm = 2.0 * (a + d);
        let sum = 1.0 - 2.0 * q;
        let term = |n: f64, re: f64| {
            if n == 0.0 {
                return 0.0;
            }
            let lam = 0.5 + re.abs() / (2.0 * n);
            (2.0 * n / norm) * (1.0 - binary_entropy(lam.min(1.0)).unwrap())
        };
        let lo = (-d).max(sum - a);
        let hi = d.min(sum + a);
        let grid = 1_000_000;
        let mut best = f64::INFINITY;
        for k in 0..=grid {
            let l2 = lo + (hi - lo) * k as f64 / grid as f64;
            best = best.min(term(a, sum - l2) + term(d, l2));
        }
        let r = report(Mode::Mode3, ChannelKind::Dependent, q);
        assert!((r.s_ae_lower - best).abs() < 1e-6, "{} vs {best}", r.s_ae_lower);
        assert!(r.s_ae_lower <= best + 1e-12);
    }

    #[test]
    fn infeasible_interval_is_an_error() {
        assert!(matches!(feasible_interval(1.0, 0.1, 0.1), Err(Error::Infeasible(_))));
        assert_eq!(feasible_interval(0.2, 0.1, 0.1).unwrap(), (0.1, 0.1));
    }

    #[test]
    fn relaxed_sum_is_no_larger() {
        for (mode, q) in [(Mode::Mode2, 0.1), (Mode::Mode3, 0.2)] {
            let ch = ChannelFamily::new(ChannelKind::Independent, q, None).unwrap();
            let stats = ch.stats(mode).unwrap();
            let eq = key_rate_with(mode, &stats, ch.p_acc(), SumConstraint::Equal).unwrap();
            let ge = key_rate_with(mode, &stats, ch.p_acc(), SumConstraint::AtLeast).unwrap();
            assert!(ge.s_ae_lower <= eq.s_ae_lower + 1e-12);
        }
    }

    #[test]
    fn rate_is_non_increasing_along_both_families() {
        // past Q ≈ 0.29 the two-basis bound on Λ₁ + Λ₂ is so negative that
        // the entropy term grows again; the rate stays negative there
        let qs = linspace(0.0, 0.28, 100);
        for mode in [Mode::Mode2, Mode::Mode3] {
            for kind in [ChannelKind::Independent, ChannelKind::Dependent] {
                let rows = sweep(mode, kind, &qs, None).unwrap();
                for w in rows.windows(2) {
                    assert!(w[1].rate <= w[0].rate + 1e-9, "{mode} {kind} at Q = {}", w[1].q);
                }
            }
        }
    }

    #[test]
    fn no_positive_rate_above_threshold() {
        for mode in [Mode::Mode2, Mode::Mode3] {
            for kind in [ChannelKind::Independent, ChannelKind::Dependent] {
                let t = noise_threshold(mode, kind).unwrap();
                let rows = sweep(mode, kind, &linspace(t + THRESHOLD_WIDTH, 0.5, 100), None).unwrap();
                assert!(rows.iter().all(|r| r.rate <= 1e-12), "{mode} {kind}");
            }
        }
    }

    #[test]
    fn threshold_ordering() {
        let t = |m, k| noise_threshold(m, k).unwrap();
        let m2i = t(Mode::Mode2, ChannelKind::Independent);
        let m2d = t(Mode::Mode2, ChannelKind::Dependent);
        let m3i = t(Mode::Mode3, ChannelKind::Independent);
        let m3d = t(Mode::Mode3, ChannelKind::Dependent);
        assert!(m3i >= m2i && m3d >= m2d);
        assert!(m2d >= m2i && m3d >= m3i);
        assert!(noise_threshold(Mode::Mode2, ChannelKind::Custom).is_err());
    }

    #[test]
    fn linspace_endpoints() {
        let g = linspace(0.0, 0.3, 7);
        assert_eq!(g.len(), 7);
        assert_eq!(g[0], 0.0);
        assert_eq!(g[6], 0.3);
        assert!(linspace(0.0, 1.0, 0).is_empty());
    }
}
