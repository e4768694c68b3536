//! Observable channel statistics and their CSV form.
//!
//! Three families of conditional probabilities are tracked:
//!
//! * forward, `p^{A→B}_{i,j}`: Bob measures `|j>` given Alice sent `|i>` and
//!   Bob chose Measure and Resend;
//! * returned, `p^{A→A}_{i,j,k}`: Alice observes `k` given she sent `i`, Bob
//!   measured and resent `|j>`, and Alice measured in the basis of `k`;
//! * reflected, `p^{A→A}_{i,R,k}`: as above but Bob reflected.
//!
//! A row whose conditioning event was never observed (or has probability
//! zero) is stored as `None`.
//!
//! # CSV schema
//!
//! Header `path,prepared,bob,alice,probability`, then one line per present
//! statistic:
//!
//! | path | prepared        | bob        | alice                    |
//! |------|-----------------|------------|--------------------------|
//! | `AB` | `0`,`1`,`+`,`0Y`| `0`,`1`    | empty                    |
//! | `AA` | same            | `0`,`1`    | `0`,`1`,`+`,`-`,`0Y`,`1Y`|
//! | `AR` | same            | `R`        | same                     |
//!
//! Probabilities are written in shortest round-trip form, so a write/read
//! cycle is lossless. On import the mode is three-basis exactly when some
//! row involves the Y basis.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::Mode;

const ROW_TOL: f64 = 1e-9;
/// Conditioning events below this probability leave their row undefined.
pub const CONDITIONING_FLOOR: f64 = 1e-12;

/// States Alice may prepare.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Prep {
    Zero,
    One,
    Plus,
    ZeroY,
}

impl Prep {
    pub const ALL: [Prep; 4] = [Prep::Zero, Prep::One, Prep::Plus, Prep::ZeroY];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_bit(bit: u8) -> Self {
        if bit == 0 {
            Prep::Zero
        } else {
            Prep::One
        }
    }

    pub fn as_outcome(self) -> Outcome {
        match self {
            Prep::Zero => Outcome::Zero,
            Prep::One => Outcome::One,
            Prep::Plus => Outcome::Plus,
            Prep::ZeroY => Outcome::ZeroY,
        }
    }

    pub fn label(self) -> &'static str {
        self.as_outcome().label()
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|p| p.label() == s)
    }

    /// Whether the state is only prepared in the three-basis variant.
    pub fn needs_y(self) -> bool {
        self == Prep::ZeroY
    }
}

/// Measurement bases available to Alice.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Basis {
    Z,
    X,
    Y,
}

impl Basis {
    pub fn outcomes(self) -> [Outcome; 2] {
        match self {
            Basis::Z => [Outcome::Zero, Outcome::One],
            Basis::X => [Outcome::Plus, Outcome::Minus],
            Basis::Y => [Outcome::ZeroY, Outcome::OneY],
        }
    }

    pub fn for_mode(mode: Mode) -> &'static [Basis] {
        match mode {
            Mode::Mode2 => &[Basis::Z, Basis::X],
            Mode::Mode3 => &[Basis::Z, Basis::X, Basis::Y],
        }
    }
}

/// Alice's measurement outcomes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Outcome {
    Zero,
    One,
    Plus,
    Minus,
    ZeroY,
    OneY,
}

impl Outcome {
    pub const ALL: [Outcome; 6] =
        [Outcome::Zero, Outcome::One, Outcome::Plus, Outcome::Minus, Outcome::ZeroY, Outcome::OneY];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn basis(self) -> Basis {
        match self {
            Outcome::Zero | Outcome::One => Basis::Z,
            Outcome::Plus | Outcome::Minus => Basis::X,
            Outcome::ZeroY | Outcome::OneY => Basis::Y,
        }
    }

    /// The other outcome of the same basis.
    pub fn partner(self) -> Outcome {
        match self {
            Outcome::Zero => Outcome::One,
            Outcome::One => Outcome::Zero,
            Outcome::Plus => Outcome::Minus,
            Outcome::Minus => Outcome::Plus,
            Outcome::ZeroY => Outcome::OneY,
            Outcome::OneY => Outcome::ZeroY,
        }
    }

    pub fn from_bit(bit: u8) -> Self {
        if bit == 0 {
            Outcome::Zero
        } else {
            Outcome::One
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Outcome::Zero => "0",
            Outcome::One => "1",
            Outcome::Plus => "+",
            Outcome::Minus => "-",
            Outcome::ZeroY => "0Y",
            Outcome::OneY => "1Y",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|o| o.label() == s)
    }
}

/// All observable statistics of the two-way channel.
#[derive(Clone, Debug, PartialEq)]
pub struct ChannelStatistics {
    mode: Mode,
    forward: [[Option<f64>; 2]; 4],
    returned: [[[Option<f64>; 6]; 2]; 4],
    reflected: [[Option<f64>; 6]; 4],
}

#[derive(Debug, Serialize, Deserialize)]
struct CsvRow {
    path: String,
    prepared: String,
    bob: String,
    alice: String,
    probability: f64,
}

impl ChannelStatistics {
    /// Statistics with every row absent.
    pub fn empty(mode: Mode) -> Self {
        Self { mode, forward: [[None; 2]; 4], returned: [[[None; 6]; 2]; 4], reflected: [[None; 6]; 4] }
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn forward(&self, prep: Prep, bob: u8) -> Option<f64> {
        self.forward[prep.index()][bob as usize]
    }

    pub fn returned(&self, prep: Prep, bob: u8, alice: Outcome) -> Option<f64> {
        self.returned[prep.index()][bob as usize][alice.index()]
    }

    pub fn reflected(&self, prep: Prep, alice: Outcome) -> Option<f64> {
        self.reflected[prep.index()][alice.index()]
    }

    pub fn set_forward(&mut self, prep: Prep, bob: u8, p: Option<f64>) {
        self.forward[prep.index()][bob as usize] = p;
    }

    pub fn set_returned(&mut self, prep: Prep, bob: u8, alice: Outcome, p: Option<f64>) {
        self.returned[prep.index()][bob as usize][alice.index()] = p;
    }

    pub fn set_reflected(&mut self, prep: Prep, alice: Outcome, p: Option<f64>) {
        self.reflected[prep.index()][alice.index()] = p;
    }

    pub fn require_forward(&self, prep: Prep, bob: u8) -> Result<f64> {
        self.forward(prep, bob).ok_or_else(|| Error::MissingStatistic(format!("p_AB[{},{}]", prep.label(), bob)))
    }

    pub fn require_returned(&self, prep: Prep, bob: u8, alice: Outcome) -> Result<f64> {
        self.returned(prep, bob, alice)
            .ok_or_else(|| Error::MissingStatistic(format!("p_AA[{},{},{}]", prep.label(), bob, alice.label())))
    }

    pub fn require_reflected(&self, prep: Prep, alice: Outcome) -> Result<f64> {
        self.reflected(prep, alice)
            .ok_or_else(|| Error::MissingStatistic(format!("p_AA[{},R,{}]", prep.label(), alice.label())))
    }

    /// `p^{A→B}_{i,j} · p^{A→A}_{i,j,k}`, the probability of Bob seeing `j`
    /// and Alice seeing `k` (given the bases). Well defined as zero when the
    /// forward probability vanishes even if the returned row is absent.
    pub fn joint(&self, prep: Prep, bob: u8, alice: Outcome) -> Result<f64> {
        let fwd = self.require_forward(prep, bob)?;
        if fwd < CONDITIONING_FLOOR {
            return Ok(match self.returned(prep, bob, alice) {
                Some(r) => fwd * r,
                None => 0.0,
            });
        }
        Ok(fwd * self.require_returned(prep, bob, alice)?)
    }

    /// Checks ranges and per-basis normalization of every present row.
    pub fn validate(&self) -> Result<()> {
        let check = |name: String, p: f64| -> Result<()> {
            if !(-ROW_TOL..=1.0 + ROW_TOL).contains(&p) || p.is_nan() {
                return Err(Error::Domain(format!("{name} = {p} is not a probability")));
            }
            Ok(())
        };
        let pair = |name: String, a: Option<f64>, b: Option<f64>| -> Result<()> {
            if let (Some(a), Some(b)) = (a, b) {
                if (a + b - 1.0).abs() > ROW_TOL {
                    return Err(Error::Domain(format!("row {name} sums to {}", a + b)));
                }
            }
            Ok(())
        };
        for prep in Prep::ALL {
            for bob in 0..2u8 {
                if let Some(p) = self.forward(prep, bob) {
                    check(format!("p_AB[{},{bob}]", prep.label()), p)?;
                }
                for o in Outcome::ALL {
                    if let Some(p) = self.returned(prep, bob, o) {
                        check(format!("p_AA[{},{bob},{}]", prep.label(), o.label()), p)?;
                    }
                }
                for basis in [Basis::Z, Basis::X, Basis::Y] {
                    let [a, b] = basis.outcomes();
                    pair(
                        format!("p_AA[{},{bob},{:?}]", prep.label(), basis),
                        self.returned(prep, bob, a),
                        self.returned(prep, bob, b),
                    )?;
                }
            }
            pair(format!("p_AB[{}]", prep.label()), self.forward(prep, 0), self.forward(prep, 1))?;
            for o in Outcome::ALL {
                if let Some(p) = self.reflected(prep, o) {
                    check(format!("p_AA[{},R,{}]", prep.label(), o.label()), p)?;
                }
            }
            for basis in [Basis::Z, Basis::X, Basis::Y] {
                let [a, b] = basis.outcomes();
                pair(
                    format!("p_AA[{},R,{:?}]", prep.label(), basis),
                    self.reflected(prep, a),
                    self.reflected(prep, b),
                )?;
            }
        }
        Ok(())
    }

    /// Largest absolute entrywise difference over rows present in both;
    /// infinite if the sets of present rows differ.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        let mut worst = 0.0f64;
        let mut cmp = |a: Option<f64>, b: Option<f64>| match (a, b) {
            (Some(a), Some(b)) => worst = worst.max((a - b).abs()),
            (None, None) => {}
            _ => worst = f64::INFINITY,
        };
        for prep in Prep::ALL {
            for bob in 0..2u8 {
                cmp(self.forward(prep, bob), other.forward(prep, bob));
                for o in Outcome::ALL {
                    cmp(self.returned(prep, bob, o), other.returned(prep, bob, o));
                }
            }
            for o in Outcome::ALL {
                cmp(self.reflected(prep, o), other.reflected(prep, o));
            }
        }
        worst
    }

    /// Keep only what a two-basis run can observe.
    pub fn restricted_to(&self, mode: Mode) -> Self {
        let mut out = self.clone();
        out.mode = mode;
        if mode == Mode::Mode3 {
            return out;
        }
        for prep in Prep::ALL {
            for bob in 0..2u8 {
                if prep.needs_y() {
                    out.set_forward(prep, bob, None);
                }
                for o in Outcome::ALL {
                    if prep.needs_y() || o.basis() == Basis::Y {
                        out.set_returned(prep, bob, o, None);
                    }
                }
            }
            for o in Outcome::ALL {
                if prep.needs_y() || o.basis() == Basis::Y {
                    out.set_reflected(prep, o, None);
                }
            }
        }
        out
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        for prep in Prep::ALL {
            for bob in 0..2u8 {
                if let Some(p) = self.forward(prep, bob) {
                    wr.serialize(CsvRow {
                        path: "AB".into(),
                        prepared: prep.label().into(),
                        bob: bob.to_string(),
                        alice: String::new(),
                        probability: p,
                    })?;
                }
            }
        }
        for prep in Prep::ALL {
            for bob in 0..2u8 {
                for o in Outcome::ALL {
                    if let Some(p) = self.returned(prep, bob, o) {
                        wr.serialize(CsvRow {
                            path: "AA".into(),
                            prepared: prep.label().into(),
                            bob: bob.to_string(),
                            alice: o.label().into(),
                            probability: p,
                        })?;
                    }
                }
            }
        }
        for prep in Prep::ALL {
            for o in Outcome::ALL {
                if let Some(p) = self.reflected(prep, o) {
                    wr.serialize(CsvRow {
                        path: "AR".into(),
                        prepared: prep.label().into(),
                        bob: "R".into(),
                        alice: o.label().into(),
                        probability: p,
                    })?;
                }
            }
        }
        wr.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(r: R) -> Result<Self> {
        let mut rd = csv::Reader::from_reader(r);
        let mut out = Self::empty(Mode::Mode2);
        let mut uses_y = false;
        for (line, row) in rd.deserialize::<CsvRow>().enumerate() {
            let row = row?;
            let bad = |what: &str| Error::Parse(format!("record {}: bad {what}", line + 1));
            let prep = Prep::parse(&row.prepared).ok_or_else(|| bad("prepared state"))?;
            uses_y |= prep.needs_y();
            let bit = || match row.bob.as_str() {
                "0" => Ok(0u8),
                "1" => Ok(1u8),
                _ => Err(bad("bob outcome")),
            };
            let alice = || Outcome::parse(&row.alice).ok_or_else(|| bad("alice outcome"));
            match row.path.as_str() {
                "AB" => out.set_forward(prep, bit()?, Some(row.probability)),
                "AA" => {
                    let o = alice()?;
                    uses_y |= o.basis() == Basis::Y;
                    out.set_returned(prep, bit()?, o, Some(row.probability));
                }
                "AR" => {
                    if row.bob != "R" {
                        return Err(bad("reflect marker"));
                    }
                    let o = alice()?;
                    uses_y |= o.basis() == Basis::Y;
                    out.set_reflected(prep, o, Some(row.probability));
                }
                _ => return Err(bad("path tag")),
            }
        }
        if uses_y {
            out.mode = Mode::Mode3;
        }
        out.validate()?;
        Ok(out)
    }
}
