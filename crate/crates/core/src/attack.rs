//! Exact oracle for collective attacks.
//!
//! Eve's attack on one iteration is a pair of unitaries `(U_F, U_R)` on
//! `qubit ⊗ ancilla`, applied on the way to Bob and on the way back, with
//! a fresh ancilla `|χ>` per iteration. Basis ordering is qubit-major:
//! index `t·d_E + e`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimate::{ChannelStatistics, Outcome, Prep, CONDITIONING_FLOOR};
use crate::qmath::{self, inner, norm_sqr, CVector, ComplexMatrix, CqDecomposition, C64, I, ONE, ZERO};
use crate::Mode;

pub const MAX_ANCILLA_DIM: usize = 16;
const UNITARY_TOL: f64 = 1e-10;
const NORM_TOL: f64 = 1e-12;

/// Qubit amplitudes of a named state.
pub fn qubit_state(o: Outcome) -> [C64; 2] {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    match o {
        Outcome::Zero => [ONE, ZERO],
        Outcome::One => [ZERO, ONE],
        Outcome::Plus => [C64::new(s, 0.0), C64::new(s, 0.0)],
        Outcome::Minus => [C64::new(s, 0.0), C64::new(-s, 0.0)],
        Outcome::ZeroY => [C64::new(s, 0.0), C64::new(0.0, s)],
        Outcome::OneY => [C64::new(s, 0.0), C64::new(0.0, -s)],
    }
}

/// `|q> ⊗ |eve>`.
pub fn embed(q: [C64; 2], eve: &CVector) -> CVector {
    qmath::kron_vec(&CVector::from_vec(q.to_vec()), eve)
}

/// Eve's part of a joint vector, for qubit basis state `t`.
pub fn eve_block(v: &CVector, t: usize) -> CVector {
    let d = v.len() / 2;
    v.rows(t * d, d).into_owned()
}

/// `(<k| ⊗ I) v`: Eve's unnormalized state after Alice sees `k`.
pub fn project(v: &CVector, k: Outcome) -> CVector {
    let [a, b] = qubit_state(k);
    eve_block(v, 0) * a.conj() + eve_block(v, 1) * b.conj()
}

/// A collective attack: unitaries on the forward and return legs plus
/// Eve's initial ancilla.
#[derive(Clone, Debug, PartialEq)]
pub struct AttackPair {
    d_e: usize,
    forward: ComplexMatrix,
    reverse: ComplexMatrix,
    chi: CVector,
}

impl AttackPair {
    pub fn new(forward: ComplexMatrix, reverse: ComplexMatrix, chi: CVector) -> Result<Self> {
        let d_e = chi.len();
        if d_e == 0 || d_e > MAX_ANCILLA_DIM {
            return Err(Error::Dimension(format!("ancilla dimension {d_e} not in 1..={MAX_ANCILLA_DIM}")));
        }
        for (name, u) in [("U_F", &forward), ("U_R", &reverse)] {
            if u.rows() != 2 * d_e || u.cols() != 2 * d_e {
                return Err(Error::Dimension(format!(
                    "{name} is {}x{}, expected {n}x{n}",
                    u.rows(),
                    u.cols(),
                    n = 2 * d_e
                )));
            }
            let res = u.unitarity_residual();
            if res > UNITARY_TOL {
                return Err(Error::Domain(format!("{name} is not unitary (residual {res:e})")));
            }
        }
        let n = norm_sqr(&chi).sqrt();
        if (n - 1.0).abs() > NORM_TOL {
            return Err(Error::Domain(format!("ancilla norm {n} is not 1")));
        }
        Ok(Self { d_e, forward, reverse, chi })
    }

    /// No attack at all.
    pub fn identity(d_e: usize) -> Result<Self> {
        let mut chi = CVector::zeros(d_e);
        if d_e > 0 {
            chi[0] = ONE;
        }
        Self::new(ComplexMatrix::identity(2 * d_e), ComplexMatrix::identity(2 * d_e), chi)
    }

    pub fn ancilla_dim(&self) -> usize {
        self.d_e
    }

    pub fn forward(&self) -> &ComplexMatrix {
        &self.forward
    }

    pub fn reverse(&self) -> &ComplexMatrix {
        &self.reverse
    }

    pub fn chi(&self) -> &CVector {
        &self.chi
    }

    /// `U_F |q, χ>`.
    pub fn after_forward(&self, q: [C64; 2]) -> CVector {
        self.forward.apply(&embed(q, &self.chi))
    }

    pub fn after_reverse(&self, v: &CVector) -> CVector {
        self.reverse.apply(v)
    }

    pub fn write_json<W: std::io::Write>(&self, w: W) -> Result<()> {
        let pairs = |zs: Vec<C64>| zs.into_iter().map(|z| [z.re, z.im]).collect::<Vec<_>>();
        let doc = AttackJson {
            d_e: self.d_e,
            chi: pairs(self.chi.iter().copied().collect()),
            u_f: pairs(self.forward.row_major()),
            u_r: pairs(self.reverse.row_major()),
        };
        serde_json::to_writer_pretty(w, &doc)?;
        Ok(())
    }

    pub fn read_json<R: std::io::Read>(r: R) -> Result<Self> {
        let doc: AttackJson = serde_json::from_reader(r)?;
        let zs = |v: &[[f64; 2]]| v.iter().map(|[re, im]| C64::new(*re, *im)).collect::<Vec<_>>();
        if doc.chi.len() != doc.d_e {
            return Err(Error::Dimension(format!("chi has {} entries, d_E is {}", doc.chi.len(), doc.d_e)));
        }
        let n = 2 * doc.d_e;
        let forward = ComplexMatrix::from_row_major(n, n, &zs(&doc.u_f))?;
        let reverse = ComplexMatrix::from_row_major(n, n, &zs(&doc.u_r))?;
        Self::new(forward, reverse, CVector::from_vec(zs(&doc.chi)))
    }
}

#[derive(Serialize, Deserialize)]
struct AttackJson {
    #[serde(rename = "d_E")]
    d_e: usize,
    chi: Vec<[f64; 2]>,
    #[serde(rename = "U_F")]
    u_f: Vec<[f64; 2]>,
    #[serde(rename = "U_R")]
    u_r: Vec<[f64; 2]>,
}

/// Forward label `j` of `|e_j>`: Alice sent `j / 2`, Bob saw `j % 2`.
pub fn label_sent(label: usize) -> u8 {
    (label / 2) as u8
}

pub fn label_seen(label: usize) -> u8 {
    (label % 2) as u8
}

/// Eve's conditional (unnormalized) states.
#[derive(Clone, Debug)]
pub struct EveVectors {
    /// `|e_0> … |e_3>`: `U_F|0,χ> = |0,e_0> + |1,e_1>`, `U_F|1,χ> = |0,e_2> + |1,e_3>`.
    pub forward: [CVector; 4],
    /// `[i][j][k]`: `U_R|i, e_j> = |0, e^0_{i,j}> + |1, e^1_{i,j}>`.
    pub returned: [[[CVector; 2]; 4]; 2],
    /// Reflection path: `U_R U_F|0,χ> = |0,g_0> + |1,g_1>`, `U_R U_F|1,χ> = |0,g_2> + |1,g_3>`.
    pub reflected: [CVector; 4],
}

impl EveVectors {
    /// `|e^k_{i,j}>` with Bob's bit `i` fixed by the label, the only
    /// combination that occurs in the protocol.
    pub fn key(&self, label: usize, alice: usize) -> &CVector {
        &self.returned[label_seen(label) as usize][label][alice]
    }

    /// `Λ₁ = Re<e^0_{0,0}|e^1_{1,3}>`.
    pub fn agree_overlap(&self) -> f64 {
        inner(self.key(0, 0), self.key(3, 1)).re
    }

    /// `Λ₂ = Re<e^0_{1,1}|e^1_{0,2}>`.
    pub fn disagree_overlap(&self) -> f64 {
        inner(self.key(1, 0), self.key(2, 1)).re
    }

    /// `Re<e^0_{0,0}|e^1_{0,2}>`.
    pub fn cross_bob0(&self) -> f64 {
        inner(self.key(0, 0), self.key(2, 1)).re
    }

    /// `Re<e^0_{1,1}|e^1_{1,3}>`.
    pub fn cross_bob1(&self) -> f64 {
        inner(self.key(1, 0), self.key(3, 1)).re
    }
}

pub fn eve_vectors(attack: &AttackPair) -> EveVectors {
    let zero = attack.after_forward(qubit_state(Outcome::Zero));
    let one = attack.after_forward(qubit_state(Outcome::One));
    let forward = [eve_block(&zero, 0), eve_block(&zero, 1), eve_block(&one, 0), eve_block(&one, 1)];
    let returned = std::array::from_fn(|i| {
        std::array::from_fn(|j| {
            let q = qubit_state(Outcome::from_bit(i as u8));
            let out = attack.after_reverse(&embed(q, &forward[j]));
            [eve_block(&out, 0), eve_block(&out, 1)]
        })
    });
    let v0 = attack.after_reverse(&zero);
    let v1 = attack.after_reverse(&one);
    let reflected = [eve_block(&v0, 0), eve_block(&v0, 1), eve_block(&v1, 0), eve_block(&v1, 1)];
    EveVectors { forward, returned, reflected }
}

/// Every observable statistic, by exact state evolution.
pub fn observables(attack: &AttackPair) -> ChannelStatistics {
    let mut stats = ChannelStatistics::empty(Mode::Mode3);
    for prep in Prep::ALL {
        let psi = attack.after_forward(qubit_state(prep.as_outcome()));
        for bob in 0..2u8 {
            let block = eve_block(&psi, bob as usize);
            let p = norm_sqr(&block);
            stats.set_forward(prep, bob, Some(p));
            if p < CONDITIONING_FLOOR {
                continue;
            }
            let resent = embed(qubit_state(Outcome::from_bit(bob)), &(block / C64::new(p.sqrt(), 0.0)));
            let back = attack.after_reverse(&resent);
            for k in Outcome::ALL {
                stats.set_returned(prep, bob, k, Some(norm_sqr(&project(&back, k))));
            }
        }
        let back = attack.after_reverse(&psi);
        for k in Outcome::ALL {
            stats.set_reflected(prep, k, Some(norm_sqr(&project(&back, k))));
        }
    }
    stats
}

/// Eve's side of a key-distillation iteration: raw-key pairs
/// `(e^0_{0,0}, e^1_{1,3})` and `(e^0_{1,1}, e^1_{0,2})` and the
/// post-selection normalization.
#[derive(Clone, Debug)]
pub struct KeyState {
    pub agree: (CVector, CVector),
    pub disagree: (CVector, CVector),
    pub normalization: f64,
}

impl KeyState {
    /// The cq-state of Alice's raw-key bit and Eve's memory, with Bob's
    /// register traced out.
    pub fn to_cq(&self) -> Result<CqDecomposition> {
        CqDecomposition::new(
            vec![self.agree.0.clone(), self.disagree.0.clone()],
            vec![self.agree.1.clone(), self.disagree.1.clone()],
            2.0 * self.normalization,
        )
    }

    pub fn norms(&self) -> [f64; 4] {
        [norm_sqr(&self.agree.0), norm_sqr(&self.agree.1), norm_sqr(&self.disagree.0), norm_sqr(&self.disagree.1)]
    }
}

pub fn key_state(attack: &AttackPair) -> Result<KeyState> {
    let ev = eve_vectors(attack);
    let agree = (ev.key(0, 0).clone(), ev.key(3, 1).clone());
    let disagree = (ev.key(1, 0).clone(), ev.key(2, 1).clone());
    let normalization = 0.5 * (norm_sqr(&agree.0) + norm_sqr(&agree.1) + norm_sqr(&disagree.0) + norm_sqr(&disagree.1));
    if normalization < 1e-12 {
        return Err(Error::DegenerateAttack(normalization));
    }
    Ok(KeyState { agree, disagree, normalization })
}

/// `S(A|E)` of the literal post-selected key state.
pub fn exact_conditional_entropy(attack: &AttackPair) -> Result<f64> {
    qmath::conditional_entropy_cq(&key_state(attack)?.to_cq()?)
}

/// Pauli-channel dilation `|t,0> ↦ Σ_m K_m|t> ⊗ |m>` on qubit ⊗ 4-dim
/// register, completed to a unitary.
fn depolarizing_dilation(q: f64) -> Result<ComplexMatrix> {
    let p = 2.0 * q;
    let a = (1.0 - 0.75 * p).max(0.0).sqrt();
    let b = (0.25 * p).sqrt();
    let c = |z: C64, s: f64| z * s;
    // Kraus operators as 2x2 row-major arrays: I, X, Y, Z
    let kraus: [[C64; 4]; 4] = [
        [c(ONE, a), ZERO, ZERO, c(ONE, a)],
        [ZERO, c(ONE, b), c(ONE, b), ZERO],
        [ZERO, c(-I, b), c(I, b), ZERO],
        [c(ONE, b), ZERO, ZERO, c(-ONE, b)],
    ];
    let mut cols = Vec::new();
    for t in 0..2 {
        let mut col = CVector::zeros(8);
        for (m, k) in kraus.iter().enumerate() {
            for t_out in 0..2 {
                col[t_out * 4 + m] = k[t_out * 2 + t];
            }
        }
        cols.push((t * 4, col));
    }
    ComplexMatrix::complete_unitary(8, &cols)
}

/// Independent depolarizing noise `ρ ↦ (1−2Q)ρ + Q·I` on each leg, with
/// separate 4-dim registers for the two legs (`d_E = 16`).
pub fn depolarizing_attack(q: f64) -> Result<AttackPair> {
    if !(0.0..=0.5).contains(&q) {
        return Err(Error::Domain(format!("depolarizing parameter {q} outside [0, 0.5]")));
    }
    let w = depolarizing_dilation(q)?;
    // ancilla index = fwd·4 + rev
    let forward = ComplexMatrix::from_fn(32, 32, |row, col| {
        let (t2, f2, r2) = (row / 16, (row / 4) % 4, row % 4);
        let (t1, f1, r1) = (col / 16, (col / 4) % 4, col % 4);
        if r1 == r2 {
            w.get(t2 * 4 + f2, t1 * 4 + f1)
        } else {
            ZERO
        }
    });
    let reverse = ComplexMatrix::from_fn(32, 32, |row, col| {
        let (t2, f2, r2) = (row / 16, (row / 4) % 4, row % 4);
        let (t1, f1, r1) = (col / 16, (col / 4) % 4, col % 4);
        if f1 == f2 {
            w.get(t2 * 4 + r2, t1 * 4 + r1)
        } else {
            ZERO
        }
    });
    let mut chi = CVector::zeros(16);
    chi[0] = ONE;
    AttackPair::new(forward, reverse, chi)
}

fn gaussian_matrix(n: usize, rng: &mut ChaCha8Rng) -> nalgebra::DMatrix<C64> {
    nalgebra::DMatrix::from_fn(n, n, |_, _| {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        C64::new(re, im)
    })
}

fn haar_unitary(n: usize, rng: &mut ChaCha8Rng) -> ComplexMatrix {
    let qr = gaussian_matrix(n, rng).qr();
    let (mut q, r) = (qr.q(), qr.r());
    for c in 0..n {
        let d = r[(c, c)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { ONE };
        for row in 0..n {
            q[(row, c)] *= phase;
        }
    }
    ComplexMatrix::from_fn(n, n, |r, c| q[(r, c)])
}

/// Seeded random attack: Haar-distributed `U_F`, `U_R` and a random
/// unit ancilla.
pub fn random_attack(d_e: usize, seed: u64) -> Result<AttackPair> {
    if !(2..=MAX_ANCILLA_DIM).contains(&d_e) {
        return Err(Error::Domain(format!("ancilla dimension {d_e} not in 2..={MAX_ANCILLA_DIM}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let forward = haar_unitary(2 * d_e, &mut rng);
    let reverse = haar_unitary(2 * d_e, &mut rng);
    let raw = gaussian_matrix(d_e, &mut rng).column(0).into_owned();
    let chi = &raw / C64::new(norm_sqr(&raw).sqrt(), 0.0);
    AttackPair::new(forward, reverse, chi)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: &CVector, b: &CVector, tol: f64) -> bool {
        a.len() == b.len() && a.iter().zip(b.iter()).all(|(x, y)| (x - y).norm() <= tol)
    }

    #[test]
    fn identity_attack_vectors() {
        let att = AttackPair::identity(2).unwrap();
        let ev = eve_vectors(&att);
        let chi = att.chi().clone();
        let zero = CVector::zeros(2);
        assert!(close(&ev.forward[0], &chi, 0.0));
        assert!(close(&ev.forward[1], &zero, 0.0));
        assert!(close(&ev.forward[2], &zero, 0.0));
        assert!(close(&ev.forward[3], &chi, 0.0));
        assert!(close(&ev.returned[0][0][0], &chi, 0.0));
        assert!(close(&ev.returned[0][0][1], &zero, 0.0));
    }

    #[test]
    fn bit_flip_forward() {
        let x = ComplexMatrix::from_row_major(2, 2, &[ZERO, ONE, ONE, ZERO]).unwrap();
        let flip = x.kron(&ComplexMatrix::identity(2));
        let mut chi = CVector::zeros(2);
        chi[1] = ONE;
        let att = AttackPair::new(flip, ComplexMatrix::identity(4), chi.clone()).unwrap();
        let ev = eve_vectors(&att);
        assert!(norm_sqr(&ev.forward[0]) == 0.0);
        assert!(close(&ev.forward[1], &chi, 0.0));

        let obs = observables(&att);
        assert_eq!(obs.forward(Prep::Zero, 1), Some(1.0));
        assert_eq!(obs.forward(Prep::Zero, 0), Some(0.0));
        assert_eq!(obs.returned(Prep::Zero, 0, Outcome::Zero), None);
        assert!((obs.returned(Prep::Zero, 1, Outcome::One).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn identity_observables() {
        let obs = observables(&AttackPair::identity(3).unwrap());
        assert!((obs.forward(Prep::Zero, 0).unwrap() - 1.0).abs() < 1e-15);
        assert!((obs.reflected(Prep::Plus, Outcome::Plus).unwrap() - 1.0).abs() < 1e-15);
        assert!(obs.reflected(Prep::Plus, Outcome::Minus).unwrap().abs() < 1e-15);
        assert!(obs.returned(Prep::One, 1, Outcome::Zero).unwrap().abs() < 1e-15);
        obs.validate().unwrap();
    }

    #[test]
    fn identity_key_state() {
        let att = AttackPair::identity(2).unwrap();
        let ks = key_state(&att).unwrap();
        assert!((ks.normalization - 1.0).abs() < 1e-15);
        assert_eq!(ks.norms(), [1.0, 1.0, 0.0, 0.0]);
        assert!((exact_conditional_entropy(&att).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn copy_attack_leaves_no_uncertainty() {
        // CNOT from the qubit into a 2-dim ancilla, nothing on the way back
        let mut cnot = ComplexMatrix::zeros(4, 4);
        for (r, c) in [(0, 0), (1, 1), (3, 2), (2, 3)] {
            cnot.set(r, c, ONE);
        }
        let mut chi = CVector::zeros(2);
        chi[0] = ONE;
        let att = AttackPair::new(cnot, ComplexMatrix::identity(4), chi).unwrap();
        assert!(exact_conditional_entropy(&att).unwrap().abs() < 1e-12);
    }

    #[test]
    fn degenerate_attack_is_reported() {
        let x = ComplexMatrix::from_row_major(2, 2, &[ZERO, ONE, ONE, ZERO]).unwrap();
        let flip = x.kron(&ComplexMatrix::identity(2));
        let mut chi = CVector::zeros(2);
        chi[0] = ONE;
        // flips on both legs cancel
        let ok = AttackPair::new(flip.clone(), flip.clone(), chi.clone()).unwrap();
        assert!(key_state(&ok).is_ok());
        // a single return flip means Alice never gets her bit back
        let bad = AttackPair::new(ComplexMatrix::identity(4), flip, chi).unwrap();
        assert!(matches!(key_state(&bad), Err(Error::DegenerateAttack(_))));
    }

    #[test]
    fn depolarizing_rejects_out_of_range() {
        assert!(depolarizing_attack(-0.01).is_err());
        assert!(depolarizing_attack(0.51).is_err());
    }

    #[test]
    fn depolarizing_is_unitary_and_matches_noise() {
        for q in [0.0, 0.1, 0.25, 0.5] {
            let att = depolarizing_attack(q).unwrap();
            assert!(att.forward().unitarity_residual() <= 1e-10);
            assert!(att.reverse().unitarity_residual() <= 1e-10);
            let obs = observables(&att);
            assert!((obs.forward(Prep::Zero, 1).unwrap() - q).abs() < 1e-12);
        }
        let obs = observables(&depolarizing_attack(0.25).unwrap());
        assert!((obs.forward(Prep::Zero, 1).unwrap() - 0.25).abs() < 1e-12);
        assert!((obs.reflected(Prep::Plus, Outcome::Minus).unwrap() - 0.375).abs() < 1e-12);
    }

    #[test]
    fn depolarizing_zero_equals_identity_observables() {
        let a = observables(&depolarizing_attack(0.0).unwrap());
        let b = observables(&AttackPair::identity(2).unwrap());
        assert!(a.max_abs_diff(&b) < 1e-12);
    }

    #[test]
    fn random_attack_is_deterministic() {
        let a = random_attack(4, 7).unwrap();
        let b = random_attack(4, 7).unwrap();
        let c = random_attack(4, 8).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert!(random_attack(1, 0).is_err());
        assert!(random_attack(17, 0).is_err());
    }

    #[test]
    fn random_attack_rows_are_normalized() {
        let obs = observables(&random_attack(4, 99).unwrap());
        obs.validate().unwrap();
        for prep in Prep::ALL {
            let s = obs.forward(prep, 0).unwrap() + obs.forward(prep, 1).unwrap();
            assert!((s - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn eve_vector_norms_follow_unitarity() {
        for seed in 0..20 {
            let ev = eve_vectors(&random_attack(3, seed).unwrap());
            let n = |v: &CVector| norm_sqr(v);
            assert!((n(&ev.forward[0]) + n(&ev.forward[1]) - 1.0).abs() < 1e-10);
            assert!((n(&ev.forward[2]) + n(&ev.forward[3]) - 1.0).abs() < 1e-10);
            for i in 0..2 {
                for j in 0..4 {
                    let s = n(&ev.returned[i][j][0]) + n(&ev.returned[i][j][1]);
                    assert!((s - n(&ev.forward[j])).abs() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn reflection_vectors_are_sums_of_return_vectors() {
        let ev = eve_vectors(&random_attack(4, 5).unwrap());
        let k = |l: usize, a: usize| ev.key(l, a).clone();
        let expect = [k(0, 0) + k(1, 0), k(0, 1) + k(1, 1), k(2, 0) + k(3, 0), k(2, 1) + k(3, 1)];
        for (g, e) in ev.reflected.iter().zip(&expect) {
            assert!(close(g, e, 1e-12));
        }
    }

    #[test]
    fn key_state_normalization_matches_norms() {
        for seed in 0..20 {
            let ks = key_state(&random_attack(4, seed).unwrap()).unwrap();
            let half_sum = 0.5 * ks.norms().iter().sum::<f64>();
            assert!((ks.normalization - half_sum).abs() < 1e-12);
        }
    }

    #[test]
    fn depolarizing_key_state_normalization() {
        for q in [0.05, 0.2, 0.4] {
            let ks = key_state(&depolarizing_attack(q).unwrap()).unwrap();
            let expect = (1.0 - q) * (1.0 - q) + q * q;
            assert!((ks.normalization - expect).abs() < 1e-12);
        }
    }

    #[test]
    fn json_round_trip() {
        let att = random_attack(3, 11).unwrap();
        let mut buf = Vec::new();
        att.write_json(&mut buf).unwrap();
        let back = AttackPair::read_json(buf.as_slice()).unwrap();
        let diff = att
            .forward()
            .row_major()
            .iter()
            .zip(back.forward().row_major())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        assert!(diff <= 1e-12);
        assert!(close(att.chi(), back.chi(), 1e-12));
    }

    #[test]
    fn json_rejects_non_unitary() {
        let text = r#"{"d_E":1,"chi":[[1,0]],"U_F":[[1,0],[1,0],[0,0],[1,0]],"U_R":[[1,0],[0,0],[0,0],[1,0]]}"#;
        assert!(matches!(AttackPair::read_json(text.as_bytes()), Err(Error::Domain(_))));
        let short = r#"{"d_E":2,"chi":[[1,0]],"U_F":[],"U_R":[]}"#;
        assert!(AttackPair::read_json(short.as_bytes()).is_err());
    }
}
