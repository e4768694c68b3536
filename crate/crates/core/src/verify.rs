//! Seeded fuzzing of the estimators against the exact oracle.
//!
//! Each random attack is pushed through [`observables`] and the estimators,
//! and every observable identity is compared with the inner products read
//! directly off Eve's vectors.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::attack::{eve_vectors, key_state, observables, random_attack, EveVectors};
use crate::error::Result;
use crate::estimate::{
    cross_overlap, cross_sums, mode2_bounds, mode3_bounds, norms_from_stats, reflection_overlap, ChannelStatistics,
    Outcome, Prep,
};
use crate::qmath::{conditional_entropy_cq, inner, norm_sqr, pairwise_entropy_bound, CVector};

pub const IDENTITY_TOL: f64 = 1e-9;

/// Worst deviation of one identity over the corpus.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckSummary {
    pub name: &'static str,
    pub worst: f64,
    pub failures: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FuzzReport {
    pub attacks: usize,
    pub ancilla_dim: usize,
    pub seed: u64,
    pub checks: Vec<CheckSummary>,
}

impl FuzzReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.failures == 0)
    }

    pub fn check(&self, name: &str) -> Option<&CheckSummary> {
        self.checks.iter().find(|c| c.name == name)
    }
}

/// Signed deviations for one attack: a positive value above
/// [`IDENTITY_TOL`] is a failure.
pub fn attack_deviations(ev: &EveVectors, stats: &ChannelStatistics) -> Result<Vec<(&'static str, f64)>> {
    let mut out = Vec::new();
    let r = &ev.returned;
    let re = |a: &CVector, b: &CVector| inner(a, b).re;
    let im = |a: &CVector, b: &CVector| inner(a, b).im;

    let norms = norms_from_stats(stats)?;
    let mut worst_norm: f64 = 0.0;
    for label in 0..4 {
        for k in 0..2 {
            worst_norm = worst_norm.max((norms.get(label, k) - norm_sqr(ev.key(label, k))).abs());
        }
    }
    out.push(("norms", worst_norm));

    // Im<e^0|e^1> within each forward label
    let mut worst_diag: f64 = 0.0;
    for label in 0..4 {
        let prep = Prep::from_bit(crate::attack::label_sent(label));
        let bob = crate::attack::label_seen(label);
        let observed = stats.joint(prep, bob, Outcome::ZeroY)? - 0.5 * stats.require_forward(prep, bob)?;
        worst_diag = worst_diag.max((observed - im(ev.key(label, 0), ev.key(label, 1))).abs());
    }
    out.push(("im_within_label", worst_diag));

    let (cross_sum0, cross_sum1) = cross_sums(stats)?;
    let cross_sum0_true = re(&r[0][0][0], &r[0][2][1]) + re(&r[0][0][1], &r[0][2][0]);
    let cross_sum1_true = re(&r[1][1][0], &r[1][3][1]) + re(&r[1][1][1], &r[1][3][0]);
    out.push(("cross_sums", (cross_sum0 - cross_sum0_true).abs().max((cross_sum1 - cross_sum1_true).abs())));

    let mut worst_cross_im: f64 = 0.0;
    let mut worst_y_relation: f64 = 0.0;
    for (bob, la, lb) in [(0u8, 0usize, 2usize), (1, 1, 3)] {
        let i = bob as usize;
        let (a, b, c, d) = (&r[i][la][0], &r[i][lb][0], &r[i][la][1], &r[i][lb][1]);
        let j = |prep, o| stats.joint(prep, bob, o);
        let im_ab =
            0.5 * (j(Prep::Zero, Outcome::Zero)? + j(Prep::One, Outcome::Zero)?) - j(Prep::ZeroY, Outcome::Zero)?;
        let im_cd = 0.5 * (j(Prep::Zero, Outcome::One)? + j(Prep::One, Outcome::One)?) - j(Prep::ZeroY, Outcome::One)?;
        worst_cross_im = worst_cross_im.max((im_ab - im(a, b)).abs()).max((im_cd - im(c, d)).abs());
        let lhs = 4.0 * j(Prep::ZeroY, Outcome::ZeroY)?;
        let rhs = stats.require_forward(Prep::Zero, bob)?
            + stats.require_forward(Prep::One, bob)?
            + 2.0 * (re(a, d) - re(c, b))
            + 2.0 * (im(a, c) - im(a, b))
            + 2.0 * (im(b, d) - im(c, d));
        worst_y_relation = worst_y_relation.max((lhs - rhs).abs());
    }
    out.push(("im_across_labels", worst_cross_im));
    out.push(("zero_y_relation", worst_y_relation));

    let g = &ev.reflected;
    out.push(("reflection_overlap", (reflection_overlap(stats)? - re(&g[0], &g[3])).abs()));

    let m3 = mode3_bounds(stats)?;
    let truth = ev.agree_overlap() + ev.disagree_overlap();
    out.push(("mode3_overlap_sum", (m3.overlap_sum - truth).abs()));
    let c0 = (cross_overlap(stats, 0, cross_sum0)? - ev.cross_bob0()).abs();
    let c1 = (cross_overlap(stats, 1, cross_sum1)? - ev.cross_bob1()).abs();
    out.push(("mode3_cross_re", c0.max(c1)));
    out.push(("feasibility", m3.overlap_sum.abs() - (m3.agree_cap + m3.disagree_cap)));

    let m2 = mode2_bounds(&stats.restricted_to(crate::Mode::Mode2))?;
    out.push(("mode2_soundness", m2.overlap_sum - truth));
    Ok(out)
}

/// Entropy checks for one attack: bound minus exact `S(A|E)`.
fn entropy_deviation(attack: &crate::attack::AttackPair) -> Result<f64> {
    let cq = key_state(attack)?.to_cq()?;
    Ok(pairwise_entropy_bound(&cq)? - conditional_entropy_cq(&cq)?)
}

/// Runs every check on `count` random attacks with `d_e`-dimensional
/// ancillas. Per-attack seeds are drawn from `seed`.
pub fn fuzz(count: usize, d_e: usize, seed: u64) -> Result<FuzzReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let seeds: Vec<u64> = (0..count).map(|_| rng.random()).collect();
    let per_attack: Vec<Vec<(&'static str, f64)>> = seeds
        .par_iter()
        .map(|&s| {
            let attack = random_attack(d_e, s)?;
            let ev = eve_vectors(&attack);
            let stats = observables(&attack);
            let mut devs = attack_deviations(&ev, &stats)?;
            devs.push(("entropy_bound", entropy_deviation(&attack)?));
            Ok(devs)
        })
        .collect::<Result<_>>()?;
    let mut checks: Vec<CheckSummary> = Vec::new();
    for devs in &per_attack {
        for &(name, v) in devs {
            let slot = match checks.iter_mut().position(|c| c.name == name) {
                Some(i) => &mut checks[i],
                None => {
                    checks.push(CheckSummary { name, worst: f64::NEG_INFINITY, failures: 0 });
                    checks.last_mut().expect("just pushed")
                }
            };
            slot.worst = slot.worst.max(v);
            if v > IDENTITY_TOL || v.is_nan() {
                slot.failures += 1;
            }
        }
    }
    Ok(FuzzReport { attacks: count, ancilla_dim: d_e, seed, checks })
}
