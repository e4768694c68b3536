//! Shannon and von Neumann entropies (base 2) and the pairwise lower bound
//! on `S(A|E)` for classical-quantum states.

use super::matrix::{inner, norm_sqr, CVector, ComplexMatrix};
use crate::error::{Error, Result};

const DOMAIN_SLACK: f64 = 1e-12;
const EIGEN_CLAMP: f64 = 1e-9;
const STATE_TOL: f64 = 1e-9;

fn xlog2x(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        x * x.log2()
    }
}

/// Binary entropy with the argument clamped into `[0, 1]`.
pub(crate) fn h2(x: f64) -> f64 {
    let x = x.clamp(0.0, 1.0);
    if x == 0.0 || x == 1.0 {
        return 0.0;
    }
    // ln_1p keeps the second term accurate for tiny x
    -(x * x.log2()) - (1.0 - x) * (-x).ln_1p() / std::f64::consts::LN_2
}

/// `h(x) = −x log₂x − (1−x) log₂(1−x)`.
pub fn binary_entropy(x: f64) -> Result<f64> {
    if !(-DOMAIN_SLACK..=1.0 + DOMAIN_SLACK).contains(&x) || x.is_nan() {
        return Err(Error::Domain(format!("binary entropy argument {x} outside [0, 1]")));
    }
    Ok(h2(x))
}

/// Shannon entropy of a probability vector.
pub fn shannon_entropy(dist: &[f64]) -> Result<f64> {
    if let Some(bad) = dist.iter().find(|p| **p < -DOMAIN_SLACK || p.is_nan()) {
        return Err(Error::Domain(format!("negative probability {bad}")));
    }
    let sum: f64 = dist.iter().sum();
    if (sum - 1.0).abs() > 1e-9 {
        return Err(Error::NotNormalized { sum });
    }
    Ok(-dist.iter().map(|&p| xlog2x(p.max(0.0))).sum::<f64>())
}

/// `−tr ρ log₂ ρ` of a density operator.
pub fn von_neumann_entropy(rho: &ComplexMatrix) -> Result<f64> {
    let herm = rho.hermiticity_residual();
    if herm > STATE_TOL {
        return Err(Error::Domain(format!("operator is not Hermitian (residual {herm:e})")));
    }
    let tr = rho.trace();
    if (tr.re - 1.0).abs() > STATE_TOL || tr.im.abs() > STATE_TOL {
        return Err(Error::Domain(format!("trace {tr} is not 1")));
    }
    let vals = rho.hermitian_eigenvalues()?;
    if let Some(neg) = vals.iter().find(|&&v| v < -EIGEN_CLAMP) {
        return Err(Error::Domain(format!("operator has negative eigenvalue {neg:e}")));
    }
    Ok(-vals.iter().map(|&v| xlog2x(v.max(0.0))).sum::<f64>())
}

/// A cq-state `ρ_AE = (1/N) Σ_a |a><a| ⊗ Σ_i |E_i^a><E_i^a|` given by
/// Eve's (sub-normalized) conditional vectors.
#[derive(Clone, Debug)]
pub struct CqDecomposition {
    zero: Vec<CVector>,
    one: Vec<CVector>,
    normalization: f64,
}

impl CqDecomposition {
    pub fn new(zero: Vec<CVector>, one: Vec<CVector>, normalization: f64) -> Result<Self> {
        if normalization.is_nan() || normalization <= 0.0 {
            return Err(Error::Domain(format!("normalization {normalization} must be positive")));
        }
        let dim = zero.first().or(one.first()).map(|v| v.len()).unwrap_or(0);
        if dim == 0 {
            return Err(Error::Dimension("cq decomposition needs at least one vector".into()));
        }
        for v in zero.iter().chain(&one) {
            if v.len() != dim {
                return Err(Error::Dimension("vectors of differing dimension".into()));
            }
            let n = norm_sqr(v);
            if n > 1.0 + DOMAIN_SLACK {
                return Err(Error::Domain(format!("vector norm² {n} exceeds 1")));
            }
        }
        Ok(Self { zero, one, normalization })
    }

    pub fn zero(&self) -> &[CVector] {
        &self.zero
    }

    pub fn one(&self) -> &[CVector] {
        &self.one
    }

    pub fn normalization(&self) -> f64 {
        self.normalization
    }

    pub fn eve_dim(&self) -> usize {
        self.zero.first().or(self.one.first()).map(|v| v.len()).unwrap_or(0)
    }

    /// The literal `2d × 2d` density operator, key register first.
    pub fn density_operator(&self) -> ComplexMatrix {
        let d = self.eve_dim();
        let mut rho = ComplexMatrix::zeros(2 * d, 2 * d);
        for (a, vecs) in [&self.zero, &self.one].into_iter().enumerate() {
            for v in vecs {
                for r in 0..d {
                    for c in 0..d {
                        let z = rho.get(a * d + r, a * d + c) + v[r] * v[c].conj();
                        rho.set(a * d + r, a * d + c, z);
                    }
                }
            }
        }
        rho.scale(1.0 / self.normalization)
    }
}

/// One summand of the pairwise bound: a pair with norms² `n0`, `n1` and
/// real overlap `re`, weighted by `(n0 + n1) / normalization`.
pub fn pair_bound_term(n0: f64, n1: f64, re: f64, normalization: f64) -> f64 {
    let total = n0 + n1;
    if total <= 0.0 {
        return 0.0;
    }
    let disc = ((n0 - n1).powi(2) + 4.0 * re * re).sqrt();
    let lambda = (0.5 * (1.0 + disc / total)).clamp(0.5, 1.0);
    (total / normalization) * (h2(n0 / total) - h2(lambda))
}

/// Lower bound on `S(A|E)` from pairing `E_i^0` with `E_i^1`.
///
/// Pairs are taken in the order given; unpaired trailing vectors add
/// nothing. The result is never negative.
pub fn pairwise_entropy_bound(blocks: &CqDecomposition) -> Result<f64> {
    let n = blocks.normalization;
    if n <= 0.0 {
        return Err(Error::Domain("normalization must be positive".into()));
    }
    let total: f64 = blocks
        .zero
        .iter()
        .zip(&blocks.one)
        .map(|(a, b)| pair_bound_term(norm_sqr(a), norm_sqr(b), inner(a, b).re, n))
        .sum();
    Ok(total.max(0.0))
}

/// Exact `S(A|E) = S(AE) − S(E)` by eigendecomposition.
pub fn conditional_entropy_cq(blocks: &CqDecomposition) -> Result<f64> {
    let rho_ae = blocks.density_operator();
    let rho_e = rho_ae.partial_trace_first(2, blocks.eve_dim())?;
    Ok(von_neumann_entropy(&rho_ae)? - von_neumann_entropy(&rho_e)?)
}

#[cfg(test)]
mod tests {
    use super::super::matrix::{C64, ONE, ZERO};
    use super::*;
    use proptest::prelude::*;

    fn vec2(a: C64, b: C64) -> CVector {
        CVector::from_vec(vec![a, b])
    }

    #[test]
    fn binary_entropy_anchors() {
        assert_eq!(binary_entropy(0.5).unwrap(), 1.0);
        assert_eq!(binary_entropy(0.0).unwrap(), 0.0);
        assert_eq!(binary_entropy(1.0).unwrap(), 0.0);
        // 40-digit evaluation of the two-term formula
        assert!((binary_entropy(0.11).unwrap() - 0.499_915_958_164_528).abs() < 1e-14);
    }

    #[test]
    fn binary_entropy_clamps_round_off_and_rejects_the_rest() {
        assert_eq!(binary_entropy(-1e-13).unwrap(), 0.0);
        assert_eq!(binary_entropy(1.0 + 1e-13).unwrap(), 0.0);
        assert!(matches!(binary_entropy(-1e-6), Err(Error::Domain(_))));
        assert!(binary_entropy(1.1).is_err());
        assert!(binary_entropy(f64::NAN).is_err());
    }

    #[test]
    fn shannon_entropy_examples() {
        assert_eq!(shannon_entropy(&[1.0, 0.0, 0.0, 0.0]).unwrap(), 0.0);
        assert!((shannon_entropy(&[0.25; 4]).unwrap() - 2.0).abs() < 1e-15);
        assert!((shannon_entropy(&[0.5, 0.25, 0.25]).unwrap() - 1.5).abs() < 1e-15);
    }

    #[test]
    fn shannon_entropy_reports_sum() {
        match shannon_entropy(&[0.5, 0.6]) {
            Err(Error::NotNormalized { sum }) => assert!((sum - 1.1).abs() < 1e-15),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn von_neumann_examples() {
        let mixed = ComplexMatrix::identity(2).scale(0.5);
        assert!((von_neumann_entropy(&mixed).unwrap() - 1.0).abs() < 1e-14);

        let s = 0.5f64.sqrt();
        let pure = ComplexMatrix::projector(&vec2(C64::new(s, 0.0), C64::new(0.0, s)));
        assert!(von_neumann_entropy(&pure).unwrap().abs() < 1e-12);

        let diag = ComplexMatrix::from_row_major(2, 2, &[C64::new(0.9, 0.0), ZERO, ZERO, C64::new(0.1, 0.0)]).unwrap();
        let expect = binary_entropy(0.1).unwrap();
        assert!((von_neumann_entropy(&diag).unwrap() - expect).abs() < 1e-14);
    }

    #[test]
    fn von_neumann_rejects_bad_operators() {
        let skew = ComplexMatrix::from_row_major(2, 2, &[C64::new(0.5, 0.0), ONE, ZERO, C64::new(0.5, 0.0)]).unwrap();
        assert!(von_neumann_entropy(&skew).is_err());
        assert!(von_neumann_entropy(&ComplexMatrix::identity(2)).is_err());
    }

    #[test]
    fn pairwise_bound_examples() {
        let s = 0.5f64.sqrt();
        let a = vec2(C64::new(s, 0.0), ZERO);
        let b = vec2(ZERO, C64::new(s, 0.0));
        let orth = CqDecomposition::new(vec![a.clone()], vec![b], 1.0).unwrap();
        assert!(pairwise_entropy_bound(&orth).unwrap().abs() < 1e-15);

        let par = CqDecomposition::new(vec![a.clone()], vec![a.clone()], 1.0).unwrap();
        assert!((pairwise_entropy_bound(&par).unwrap() - 1.0).abs() < 1e-15);

        let one = vec2(ONE, ZERO);
        let lopsided = CqDecomposition::new(vec![one], vec![vec2(ZERO, ZERO)], 1.0).unwrap();
        assert_eq!(pairwise_entropy_bound(&lopsided).unwrap(), 0.0);
    }

    #[test]
    fn exact_entropy_examples() {
        let e0 = vec2(ONE, ZERO);
        let e1 = vec2(ZERO, ONE);
        let orth = CqDecomposition::new(vec![e0.clone()], vec![e1], 2.0).unwrap();
        assert!(conditional_entropy_cq(&orth).unwrap().abs() < 1e-12);
        let same = CqDecomposition::new(vec![e0.clone()], vec![e0], 2.0).unwrap();
        assert!((conditional_entropy_cq(&same).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_nonpositive_normalization() {
        let v = vec2(ONE, ZERO);
        assert!(CqDecomposition::new(vec![v.clone()], vec![v], 0.0).is_err());
    }

    #[test]
    fn diagonal_von_neumann_matches_shannon() {
        let diag = [0.1, 0.2, 0.3, 0.4];
        let rho = ComplexMatrix::from_fn(4, 4, |r, c| if r == c { C64::new(diag[r], 0.0) } else { ZERO });
        let a = von_neumann_entropy(&rho).unwrap();
        let b = shannon_entropy(&diag).unwrap();
        assert!((a - b).abs() < 1e-10);
    }

    proptest! {
        #[test]
        fn binary_entropy_is_symmetric(x in 0.0f64..=1.0) {
            let a = binary_entropy(x).unwrap();
            let b = binary_entropy(1.0 - x).unwrap();
            prop_assert!((a - b).abs() < 1e-12);
        }

        #[test]
        fn diagonal_states_reduce_to_shannon(raw in proptest::collection::vec(0.0f64..1.0, 2..8)) {
            let sum: f64 = raw.iter().sum();
            prop_assume!(sum > 1e-3);
            let p: Vec<f64> = raw.iter().map(|x| x / sum).collect();
            let n = p.len();
            let rho = ComplexMatrix::from_fn(n, n, |r, c| if r == c { C64::new(p[r], 0.0) } else { ZERO });
            let a = von_neumann_entropy(&rho).unwrap();
            let b = shannon_entropy(&p).unwrap();
            prop_assert!((a - b).abs() < 1e-10);
        }
    }
}
