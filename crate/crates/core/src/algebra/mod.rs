//! Exact arithmetic kernel: F_p, weighted monomials, the free algebra
//! `F_p⟨X⟩^τ`, and truncated integer series.

mod field;
mod monomial;
mod poly;
mod series;

pub use field::{is_prime, Fp, PrimeField, MAX_MODULUS};
pub use monomial::{word_counts, words_of_degree, Monomial, Weights, MAX_GENERATORS};
pub use poly::{Context, Poly, Valuation};
pub use series::{IntSeries, SeriesOrdering};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AlgebraError {
    #[error("modulus {0} is not a prime below 65536")]
    InvalidModulus(u64),
    #[error("invalid weights: {0}")]
    InvalidWeights(String),
    #[error("generator index {letter} out of range 1..={d}")]
    LetterOutOfRange { letter: usize, d: usize },
    #[error("polynomials live over different contexts (prime or weights differ)")]
    ContextMismatch,
    #[error("series with constant term {0} is not invertible over Z")]
    NotInvertible(i64),
    #[error("series cutoffs differ ({left} vs {right})")]
    CutoffMismatch { left: usize, right: usize },
}

#[cfg(test)]
mod proptests {
    use super::*;
    use proptest::prelude::*;
    use std::sync::Arc;

    fn ctx() -> Arc<Context> {
        Context::new(
            PrimeField::new(3).unwrap(),
            Weights::new(vec![1, 2, 1]).unwrap(),
        )
    }

    fn arb_poly() -> impl Strategy<Value = Poly> {
        prop::collection::vec((prop::collection::vec(0u8..3, 0..4), -3i64..4), 0..5).prop_map(
            |terms| {
                let c = ctx();
                let terms = terms
                    .into_iter()
                    .map(|(l, k)| (Monomial::new(l, &c.weights).unwrap(), k));
                Poly::from_terms(&c, terms)
            },
        )
    }

    proptest! {
        #[test]
        fn mul_associative_and_distributive(a in arb_poly(), b in arb_poly(), c in arb_poly()) {
            prop_assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
            prop_assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
            prop_assert_eq!(&(&a + &b) * &c, &(&a * &c) + &(&b * &c));
        }

        #[test]
        fn valuation_is_additive(a in arb_poly(), b in arb_poly()) {
            prop_assume!(!a.is_zero() && !b.is_zero());
            let va = a.tau_valuation().finite().unwrap();
            let vb = b.tau_valuation().finite().unwrap();
            prop_assert_eq!((&a * &b).tau_valuation(), Valuation::Finite(va + vb));
        }

        #[test]
        fn components_sum_back(a in arb_poly()) {
            let c = ctx();
            let total = a
                .components()
                .values()
                .fold(Poly::zero(&c), |acc, part| &acc + part);
            prop_assert_eq!(total, a);
        }

        #[test]
        fn series_inverse_is_exact(tail in prop::collection::vec(-4i64..5, 1..9), neg in any::<bool>()) {
            let mut coeffs = vec![if neg { -1 } else { 1 }];
            coeffs.extend(tail);
            let s = IntSeries::new(coeffs);
            let n = s.cutoff();
            prop_assert_eq!(s.mul(&s.inverse().unwrap()), IntSeries::one(n));
        }
    }
}
