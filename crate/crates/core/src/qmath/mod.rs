//! Linear algebra and entropy primitives shared by the rest of the crate.

mod entropy;
mod matrix;

pub(crate) use entropy::h2;
pub use entropy::{
    binary_entropy, conditional_entropy_cq, pair_bound_term, pairwise_entropy_bound, shannon_entropy,
    von_neumann_entropy, CqDecomposition,
};
pub use matrix::{inner, kron_vec, norm_sqr, CVector, ComplexMatrix, C64, I, ONE, ZERO};
