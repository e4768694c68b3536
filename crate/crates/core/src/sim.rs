//! Iteration-level Monte Carlo run of the protocol against a collective
//! attack.
//!
//! Before sampling, the attack is reduced to a table of exact branch
//! probabilities: for each prepared state, Bob's Z outcome, and then Alice's
//! outcome in each basis after the return leg (or after reflection). The
//! post-measurement state after Bob's outcome is the renormalized
//! projection, so the table is the collapse dynamics, not an approximation.
//!
//! Runs are split into shards. Shard `s` draws from ChaCha8 seeded with the
//! run seed on stream `s`; shards are merged in index order, so the outcome
//! depends on `(seed, shards)` only, not on the thread pool.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::attack::{embed, project, qubit_state, AttackPair};
use crate::error::{Error, Result};
use crate::estimate::{Basis, ChannelStatistics, Outcome, Prep};
use crate::qmath::{norm_sqr, C64};
use crate::Mode;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ProtocolConfig {
    pub mode: Mode,
    /// Probability of the Z basis for Alice and of Measure and Resend for Bob.
    pub p: f64,
    /// Probability that an iteration is not a test iteration.
    pub q: f64,
    pub iterations: u64,
    pub seed: u64,
    pub shards: u32,
}

impl ProtocolConfig {
    pub fn new(mode: Mode, iterations: u64, seed: u64) -> Self {
        Self { mode, p: 0.9, q: 0.9, iterations, seed, shards: 1 }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("p", self.p), ("q", self.q)] {
            if !(v > 0.0 && v < 1.0) {
                return Err(Error::Domain(format!("{name} = {v} outside (0, 1)")));
            }
        }
        if self.iterations == 0 {
            return Err(Error::Domain("iterations must be positive".into()));
        }
        if self.shards == 0 {
            return Err(Error::Domain("shards must be positive".into()));
        }
        Ok(())
    }
}

/// What Bob did and saw.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BobAction {
    Measured(u8),
    Reflected,
}

impl BobAction {
    pub fn label(self) -> &'static str {
        match self {
            BobAction::Measured(0) => "0",
            BobAction::Measured(_) => "1",
            BobAction::Reflected => "R",
        }
    }
}

/// One cell of the iteration tally. Alice's measurement basis is that of
/// `alice`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TallyKey {
    pub prepared: Prep,
    pub bob: BobAction,
    pub alice: Outcome,
    pub accept: bool,
    pub test: bool,
}

impl TallyKey {
    /// Key-distillation iterations and every Z/Z measure-and-resend
    /// iteration with `Test = 0` are kept out of parameter estimation, so
    /// that acceptance does not bias the statistics.
    pub fn used_for_statistics(&self) -> bool {
        let zz = matches!(self.prepared, Prep::Zero | Prep::One)
            && matches!(self.bob, BobAction::Measured(_))
            && self.alice.basis() == Basis::Z;
        !(zz && !self.test)
    }

    pub fn key_distillation(&self) -> bool {
        self.accept && !self.test && matches!(self.bob, BobAction::Measured(_))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SimulationOutcome {
    pub config: ProtocolConfig,
    pub raw_key_a: Vec<u8>,
    pub raw_key_b: Vec<u8>,
    pub counts: BTreeMap<TallyKey, u64>,
    pub empirical: ChannelStatistics,
}

impl SimulationOutcome {
    pub fn disagreements(&self) -> usize {
        self.raw_key_a.iter().zip(&self.raw_key_b).filter(|(a, b)| a != b).count()
    }

    /// Tally as CSV, preceded by `#` lines recording the configuration.
    pub fn write_counts_csv<W: Write>(&self, w: W) -> Result<()> {
        self.write_counts(w, b',')
    }

    pub fn write_counts<W: Write>(&self, mut w: W, delimiter: u8) -> Result<()> {
        write_header(&mut w, &self.config)?;
        let mut out = csv::WriterBuilder::new().delimiter(delimiter).from_writer(w);
        out.write_record(["prepared", "bob", "alice_basis", "alice", "accept", "test", "count"])?;
        for (k, n) in &self.counts {
            let basis = match k.alice.basis() {
                Basis::Z => "Z",
                Basis::X => "X",
                Basis::Y => "Y",
            };
            out.write_record([
                k.prepared.label(),
                k.bob.label(),
                basis,
                k.alice.label(),
                if k.accept { "1" } else { "0" },
                if k.test { "1" } else { "0" },
                &n.to_string(),
            ])?;
        }
        out.flush()?;
        Ok(())
    }

    /// Raw keys as hex, most significant bit first, with the bit length.
    pub fn write_keys<W: Write>(&self, mut w: W) -> Result<()> {
        write_header(&mut w, &self.config)?;
        writeln!(w, "bits={}", self.raw_key_a.len())?;
        writeln!(w, "key_a={}", to_hex(&self.raw_key_a))?;
        writeln!(w, "key_b={}", to_hex(&self.raw_key_b))?;
        Ok(())
    }
}

fn write_header<W: Write>(w: &mut W, c: &ProtocolConfig) -> Result<()> {
    writeln!(
        w,
        "# seed={} mode={} p={} q={} iterations={} shards={}",
        c.seed,
        c.mode.number(),
        c.p,
        c.q,
        c.iterations,
        c.shards
    )?;
    Ok(())
}

/// Packs bits eight to a byte, MSB first, zero-padded at the end.
pub fn to_hex(bits: &[u8]) -> String {
    let mut s = String::with_capacity(bits.len() / 4 + 2);
    for chunk in bits.chunks(8) {
        let byte = chunk.iter().enumerate().fold(0u8, |acc, (i, &b)| acc | ((b & 1) << (7 - i)));
        let _ = write!(s, "{byte:02x}");
    }
    s
}

/// Exact branch probabilities of one attack.
#[derive(Clone, Debug)]
struct BranchTable {
    /// `[prep][j]`: Bob measures `j`.
    forward: [[f64; 2]; 4],
    /// `[prep][j][k]`: Alice observes `k` after Bob resent `|j>`.
    returned: [[[f64; 6]; 2]; 4],
    /// `[prep][k]`: Alice observes `k` after reflection.
    reflected: [[f64; 6]; 4],
}

impl BranchTable {
    fn new(attack: &AttackPair) -> Self {
        let mut t = BranchTable { forward: [[0.0; 2]; 4], returned: [[[0.0; 6]; 2]; 4], reflected: [[0.0; 6]; 4] };
        for prep in Prep::ALL {
            let i = prep.index();
            let psi = attack.after_forward(qubit_state(prep.as_outcome()));
            for j in 0..2u8 {
                let eve = project(&psi, Outcome::from_bit(j));
                let p = norm_sqr(&eve);
                t.forward[i][j as usize] = p;
                if p > 0.0 {
                    let collapsed = eve / C64::new(p.sqrt(), 0.0);
                    let back = attack.after_reverse(&embed(qubit_state(Outcome::from_bit(j)), &collapsed));
                    for k in Outcome::ALL {
                        t.returned[i][j as usize][k.index()] = norm_sqr(&project(&back, k));
                    }
                }
            }
            let back = attack.after_reverse(&psi);
            for k in Outcome::ALL {
                t.reflected[i][k.index()] = norm_sqr(&project(&back, k));
            }
        }
        t
    }
}

fn sample_basis(rng: &mut ChaCha8Rng, mode: Mode, p: f64) -> Basis {
    if rng.random::<f64>() < p {
        Basis::Z
    } else if mode == Mode::Mode2 || rng.random::<bool>() {
        Basis::X
    } else {
        Basis::Y
    }
}

/// Picks one of the two outcomes of `basis` from their weights.
fn sample_outcome(rng: &mut ChaCha8Rng, basis: Basis, probs: &[f64; 6]) -> Outcome {
    let [a, b] = basis.outcomes();
    let (pa, pb) = (probs[a.index()], probs[b.index()]);
    if rng.random::<f64>() * (pa + pb) < pa {
        a
    } else {
        b
    }
}

struct Shard {
    raw_key_a: Vec<u8>,
    raw_key_b: Vec<u8>,
    counts: BTreeMap<TallyKey, u64>,
}

fn run_shard(cfg: &ProtocolConfig, table: &BranchTable, shard: u32, iterations: u64) -> Shard {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(shard as u64);
    let mut out = Shard { raw_key_a: Vec::new(), raw_key_b: Vec::new(), counts: BTreeMap::new() };
    for _ in 0..iterations {
        let sent_basis = sample_basis(&mut rng, cfg.mode, cfg.p);
        let (prep, k_a) = match sent_basis {
            Basis::Z => {
                let bit = rng.random::<bool>() as u8;
                (Prep::from_bit(bit), Some(bit))
            }
            Basis::X => (Prep::Plus, None),
            Basis::Y => (Prep::ZeroY, None),
        };
        let i = prep.index();
        let bob = if rng.random::<f64>() < cfg.p {
            let f = table.forward[i];
            let j = if rng.random::<f64>() * (f[0] + f[1]) < f[0] { 0 } else { 1 };
            BobAction::Measured(j)
        } else {
            BobAction::Reflected
        };
        let measure_basis = sample_basis(&mut rng, cfg.mode, cfg.p);
        let probs = match bob {
            BobAction::Measured(j) => &table.returned[i][j as usize],
            BobAction::Reflected => &table.reflected[i],
        };
        let alice = sample_outcome(&mut rng, measure_basis, probs);
        let accept = match k_a {
            Some(bit) => alice == Outcome::from_bit(bit),
            None => false,
        };
        let test = rng.random::<f64>() >= cfg.q;
        let key = TallyKey { prepared: prep, bob, alice, accept, test };
        if key.key_distillation() {
            if let (Some(a), BobAction::Measured(b)) = (k_a, bob) {
                out.raw_key_a.push(a);
                out.raw_key_b.push(b);
            }
        }
        *out.counts.entry(key).or_insert(0) += 1;
    }
    out
}

/// Runs `cfg.iterations` protocol iterations against `attack`.
pub fn run_protocol(cfg: &ProtocolConfig, attack: &AttackPair) -> Result<SimulationOutcome> {
    cfg.validate()?;
    let table = BranchTable::new(attack);
    let n = cfg.shards as u64;
    let shards: Vec<Shard> = (0..cfg.shards)
        .into_par_iter()
        .map(|s| {
            let len = cfg.iterations / n + u64::from((s as u64) < cfg.iterations % n);
            run_shard(cfg, &table, s, len)
        })
        .collect();
    let mut outcome = SimulationOutcome {
        config: *cfg,
        raw_key_a: Vec::new(),
        raw_key_b: Vec::new(),
        counts: BTreeMap::new(),
        empirical: ChannelStatistics::empty(cfg.mode),
    };
    for s in shards {
        outcome.raw_key_a.extend(s.raw_key_a);
        outcome.raw_key_b.extend(s.raw_key_b);
        for (k, c) in s.counts {
            *outcome.counts.entry(k).or_insert(0) += c;
        }
    }
    outcome.empirical = empirical_statistics(&outcome.counts, cfg.mode);
    Ok(outcome)
}

/// Number of iterations behind each row of [`empirical_statistics`].
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SampleSizes {
    forward: [u64; 4],
    returned: [[[u64; 3]; 2]; 4],
    reflected: [[u64; 3]; 4],
}

impl SampleSizes {
    pub fn from_counts(counts: &BTreeMap<TallyKey, u64>) -> Self {
        let mut n = SampleSizes::default();
        for (k, &c) in counts.iter().filter(|(k, _)| k.used_for_statistics()) {
            let i = k.prepared.index();
            let b = k.alice.basis() as usize;
            match k.bob {
                BobAction::Measured(j) => {
                    n.forward[i] += c;
                    n.returned[i][j as usize][b] += c;
                }
                BobAction::Reflected => n.reflected[i][b] += c,
            }
        }
        n
    }

    /// Measure-and-resend iterations with `prep` sent.
    pub fn forward(&self, prep: Prep) -> u64 {
        self.forward[prep.index()]
    }

    pub fn returned(&self, prep: Prep, bob: u8, basis: Basis) -> u64 {
        self.returned[prep.index()][bob as usize][basis as usize]
    }

    pub fn reflected(&self, prep: Prep, basis: Basis) -> u64 {
        self.reflected[prep.index()][basis as usize]
    }
}

/// Ratio estimates of every statistic from a tally; rows whose conditioning
/// count is zero are left absent.
pub fn empirical_statistics(counts: &BTreeMap<TallyKey, u64>, mode: Mode) -> ChannelStatistics {
    let mut forward = [[0u64; 2]; 4];
    let mut returned = [[[0u64; 6]; 2]; 4];
    let mut reflected = [[0u64; 6]; 4];
    for (k, &c) in counts.iter().filter(|(k, _)| k.used_for_statistics()) {
        let i = k.prepared.index();
        match k.bob {
            BobAction::Measured(j) => {
                forward[i][j as usize] += c;
                returned[i][j as usize][k.alice.index()] += c;
            }
            BobAction::Reflected => reflected[i][k.alice.index()] += c,
        }
    }
    let ratio = |row: &[u64; 6], o: Outcome| {
        let total = row[o.index()] + row[o.partner().index()];
        (total > 0).then(|| row[o.index()] as f64 / total as f64)
    };
    let mut stats = ChannelStatistics::empty(mode);
    for prep in Prep::ALL {
        let i = prep.index();
        let f_total = forward[i][0] + forward[i][1];
        for j in 0..2u8 {
            let fwd = (f_total > 0).then(|| forward[i][j as usize] as f64 / f_total as f64);
            stats.set_forward(prep, j, fwd);
            for o in Outcome::ALL {
                stats.set_returned(prep, j, o, ratio(&returned[i][j as usize], o));
            }
        }
        for o in Outcome::ALL {
            stats.set_reflected(prep, o, ratio(&reflected[i], o));
        }
    }
    stats
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::attack::{depolarizing_attack, observables, random_attack};

    #[test]
    fn identity_attack_is_noiseless() {
        let cfg = ProtocolConfig { shards: 3, ..ProtocolConfig::new(Mode::Mode3, 20_000, 7) };
        let out = run_protocol(&cfg, &AttackPair::identity(2).unwrap()).unwrap();
        assert!(!out.raw_key_a.is_empty());
        assert_eq!(out.raw_key_a, out.raw_key_b);
        let e = &out.empirical;
        assert_eq!(e.reflected(Prep::Plus, Outcome::Plus), Some(1.0));
        assert_eq!(e.reflected(Prep::ZeroY, Outcome::ZeroY), Some(1.0));
        assert_eq!(e.forward(Prep::Zero, 1), Some(0.0));
        assert_eq!(e.returned(Prep::One, 1, Outcome::One), Some(1.0));
    }

    #[test]
    fn tally_accounts_for_every_iteration() {
        let cfg = ProtocolConfig { shards: 4, ..ProtocolConfig::new(Mode::Mode2, 10_001, 3) };
        let out = run_protocol(&cfg, &depolarizing_attack(0.1).unwrap()).unwrap();
        assert_eq!(out.counts.values().sum::<u64>(), 10_001);
        let key_rows: u64 = out.counts.iter().filter(|(k, _)| k.key_distillation()).map(|(_, c)| c).sum();
        assert_eq!(key_rows as usize, out.raw_key_a.len());
        assert!(out.counts.keys().all(|k| k.prepared != Prep::ZeroY && k.alice.basis() != Basis::Y));
    }

    #[test]
    fn seeded_runs_repeat() {
        let attack = random_attack(4, 11).unwrap();
        let cfg = ProtocolConfig { shards: 5, ..ProtocolConfig::new(Mode::Mode3, 5_000, 99) };
        let a = run_protocol(&cfg, &attack).unwrap();
        let b = run_protocol(&cfg, &attack).unwrap();
        assert_eq!(a, b);
        let other = run_protocol(&ProtocolConfig { seed: 100, ..cfg }, &attack).unwrap();
        assert_ne!(a.counts, other.counts);
    }

    #[test]
    fn tiny_runs_leave_rows_absent() {
        let out = run_protocol(&ProtocolConfig::new(Mode::Mode3, 10, 1), &depolarizing_attack(0.1).unwrap()).unwrap();
        let absent = Prep::ALL
            .iter()
            .flat_map(|&p| Outcome::ALL.map(move |o| (p, o)))
            .filter(|&(p, o)| out.empirical.reflected(p, o).is_none())
            .count();
        assert!(absent > 0);
    }

    #[test]
    fn branch_table_matches_oracle() {
        let attack = random_attack(3, 5).unwrap();
        let t = BranchTable::new(&attack);
        let obs = observables(&attack);
        for prep in Prep::ALL {
            for j in 0..2u8 {
                let f = t.forward[prep.index()][j as usize];
                assert!((obs.forward(prep, j).unwrap() - f).abs() < 1e-12);
                for o in Outcome::ALL {
                    let r = t.returned[prep.index()][j as usize][o.index()];
                    assert!((obs.returned(prep, j, o).unwrap() - r).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn config_validation() {
        let ok = ProtocolConfig::new(Mode::Mode2, 1, 0);
        assert!(ok.validate().is_ok());
        assert!(ProtocolConfig { p: 1.0, ..ok }.validate().is_err());
        assert!(ProtocolConfig { q: 0.0, ..ok }.validate().is_err());
        assert!(ProtocolConfig { iterations: 0, ..ok }.validate().is_err());
        assert!(ProtocolConfig { shards: 0, ..ok }.validate().is_err());
    }

    #[test]
    fn hex_packing() {
        assert_eq!(to_hex(&[1, 0, 1, 0, 0, 0, 0, 1, 1]), "a180");
        assert_eq!(to_hex(&[]), "");
    }

    #[test]
    fn export_records_seed() {
        let cfg = ProtocolConfig::new(Mode::Mode2, 200, 42);
        let out = run_protocol(&cfg, &depolarizing_attack(0.05).unwrap()).unwrap();
        let mut buf = Vec::new();
        out.write_counts_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("# seed=42 mode=2"));
        assert!(text.lines().nth(1).unwrap().starts_with("prepared,bob,alice_basis"));
        let mut buf = Vec::new();
        out.write_keys(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.contains(&format!("bits={}", out.raw_key_a.len())));
    }
}
