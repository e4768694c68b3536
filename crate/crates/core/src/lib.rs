//! Security analysis toolkit for a two-way semi-quantum key distribution
//! protocol in which the classical party measures and resends in the Z basis
//! or reflects, and the quantum party keeps only iterations whose Z outcome
//! on return matches what she sent.
//!
//! The crate is organised bottom-up:
//!
//! * [`qmath`]: complex matrices, Shannon/von Neumann entropies, and the
//!   pairwise lower bound on `S(A|E)` for cq-states.
//! * [`attack`]: the exact oracle. A collective attack is a pair of unitaries
//!   on qubit ⊗ ancilla; from it we derive every observable and the literal
//!   post-selected key state.
//! * [`estimate`]: observable statistics in, inner-product constraints out,
//!   for the two-basis and three-basis variants.
//! * [`keyrate`]: worst-case minimisation of the entropy bound, `H(A|B)`,
//!   effective rate and noise thresholds.
//! * [`bb84cad`]: BB84 with repetition-code advantage distillation, for
//!   comparison.
//! * [`loss`]: lossy fiber channels and maximal distance.
//! * [`sim`]: an iteration-level Monte Carlo run of the protocol.
//! * [`verify`]: fuzzing harness that cross-checks estimators against the
//!   oracle.

pub mod attack;
pub mod bb84cad;
pub mod error;
pub mod estimate;
pub mod keyrate;
pub mod loss;
pub mod optimize;
pub mod qmath;
pub mod sim;
pub mod verify;

pub use error::{Error, Result};

/// Protocol variant: two bases (Z, X) or three (Z, X, Y) on the quantum side.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, serde::Serialize, serde::Deserialize)]
pub enum Mode {
    Mode2,
    Mode3,
}

impl Mode {
    pub fn number(self) -> u8 {
        match self {
            Mode::Mode2 => 2,
            Mode::Mode3 => 3,
        }
    }

    pub fn from_number(n: u8) -> Option<Self> {
        match n {
            2 => Some(Mode::Mode2),
            3 => Some(Mode::Mode3),
            _ => None,
        }
    }
}

impl std::fmt::Display for Mode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "MODE-{}", self.number())
    }
}
