//! Truncated power series in `Z⟦t⟧`.

use std::cmp::Ordering;
use std::fmt;

use serde::Serialize;

use super::{AlgebraError, Weights};

/// Coefficients `c_0, …, c_N` of a series known up to the cutoff `N`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct IntSeries {
    coeffs: Vec<i64>,
}

/// Result of comparing two series in the order where `f > g` iff the first
/// nonzero coefficient of `f − g` is positive.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SeriesOrdering {
    Less,
    /// All coefficients agree up to the cutoff.
    EqualToCutoff,
    Greater,
}

impl IntSeries {
    /// Builds a series from `c_0..=c_N`; an empty vector is rejected.
    pub fn new(coeffs: Vec<i64>) -> Self {
        assert!(!coeffs.is_empty(), "a series needs at least c_0");
        Self { coeffs }
    }

    pub fn zero(cutoff: usize) -> Self {
        Self {
            coeffs: vec![0; cutoff + 1],
        }
    }

    pub fn one(cutoff: usize) -> Self {
        let mut s = Self::zero(cutoff);
        s.coeffs[0] = 1;
        s
    }

    /// `1 − (t^{τ_1} + … + t^{τ_d}) + (t^{σ_1} + … + t^{σ_m})`, the reciprocal
    /// of the extremal quotient series.
    pub fn relation_polynomial(weights: &Weights, sigmas: &[u32], cutoff: usize) -> Self {
        let mut s = Self::one(cutoff);
        for &t in weights.as_slice() {
            if (t as usize) <= cutoff {
                s.coeffs[t as usize] -= 1;
            }
        }
        for &sigma in sigmas {
            if (sigma as usize) <= cutoff {
                s.coeffs[sigma as usize] += 1;
            }
        }
        s
    }

    pub fn cutoff(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[i64] {
        &self.coeffs
    }

    pub fn coeff(&self, n: usize) -> i64 {
        self.coeffs[n]
    }

    pub fn truncate(&self, cutoff: usize) -> Self {
        assert!(cutoff <= self.cutoff());
        Self {
            coeffs: self.coeffs[..=cutoff].to_vec(),
        }
    }

    /// Cauchy product truncated at the smaller cutoff.
    pub fn mul(&self, other: &IntSeries) -> IntSeries {
        let n = self.cutoff().min(other.cutoff());
        let mut out = vec![0i64; n + 1];
        for (i, &a) in self.coeffs.iter().enumerate().take(n + 1) {
            if a == 0 {
                continue;
            }
            for (j, &b) in other.coeffs.iter().enumerate().take(n + 1 - i) {
                out[i + j] = out[i + j]
                    .checked_add(a.checked_mul(b).expect("series coefficient overflow"))
                    .expect("series coefficient overflow");
            }
        }
        IntSeries { coeffs: out }
    }

    pub fn sub(&self, other: &IntSeries) -> Result<IntSeries, AlgebraError> {
        if self.cutoff() != other.cutoff() {
            return Err(AlgebraError::CutoffMismatch {
                left: self.cutoff(),
                right: other.cutoff(),
            });
        }
        Ok(IntSeries {
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| a - b)
                .collect(),
        })
    }

    /// Multiplicative inverse over `Z`, which exists iff `c_0 = ±1`.
    pub fn inverse(&self) -> Result<IntSeries, AlgebraError> {
        let c0 = self.coeffs[0];
        if c0 != 1 && c0 != -1 {
            return Err(AlgebraError::NotInvertible(c0));
        }
        let n = self.cutoff();
        let mut inv = vec![0i64; n + 1];
        inv[0] = c0;
        for k in 1..=n {
            let mut acc = 0i64;
            for j in 1..=k {
                acc = acc
                    .checked_add(
                        self.coeffs[j]
                            .checked_mul(inv[k - j])
                            .expect("series coefficient overflow"),
                    )
                    .expect("series coefficient overflow");
            }
            // c0 * inv[k] = -acc and c0 = ±1
            inv[k] = -acc * c0;
        }
        Ok(IntSeries { coeffs: inv })
    }

    pub fn compare(&self, other: &IntSeries) -> Result<SeriesOrdering, AlgebraError> {
        if self.cutoff() != other.cutoff() {
            return Err(AlgebraError::CutoffMismatch {
                left: self.cutoff(),
                right: other.cutoff(),
            });
        }
        for (a, b) in self.coeffs.iter().zip(&other.coeffs) {
            match a.cmp(b) {
                Ordering::Less => return Ok(SeriesOrdering::Less),
                Ordering::Greater => return Ok(SeriesOrdering::Greater),
                Ordering::Equal => {}
            }
        }
        Ok(SeriesOrdering::EqualToCutoff)
    }

    /// Index and value of the first negative coefficient, if any.
    pub fn first_negative(&self) -> Option<(usize, i64)> {
        self.coeffs
            .iter()
            .enumerate()
            .find(|(_, &c)| c < 0)
            .map(|(i, &c)| (i, c))
    }
}

impl fmt::Display for IntSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.coeffs.iter().map(|c| c.to_string()).collect();
        write!(f, "[{}] + O(t^{})", parts.join(", "), self.coeffs.len())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn geometric_series() {
        let one_minus_t = IntSeries::new(vec![1, -1, 0, 0, 0, 0]);
        let ones = IntSeries::new(vec![1; 6]);
        assert_eq!(one_minus_t.mul(&ones), IntSeries::one(5));
        assert_eq!(one_minus_t.inverse().unwrap(), ones);
        assert_eq!(ones.mul(&IntSeries::one(5)), ones);
    }

    #[test]
    fn three_variable_quadratic_inverse() {
        let s = IntSeries::new(vec![1, -3, 3, 0, 0, 0, 0]);
        let inv = s.inverse().unwrap();
        assert_eq!(inv.coeffs(), &[1, 3, 6, 9, 9, 0, -27]);
        assert_eq!(inv.inverse().unwrap(), s);
    }

    #[test]
    fn non_unit_constant_is_rejected() {
        assert!(matches!(
            IntSeries::new(vec![2, 1]).inverse(),
            Err(AlgebraError::NotInvertible(2))
        ));
        // -1 is a unit of Z
        let s = IntSeries::new(vec![-1, 1, 0]);
        assert_eq!(s.mul(&s.inverse().unwrap()), IntSeries::one(2));
    }

    #[test]
    fn total_order() {
        let a = IntSeries::new(vec![1, 3, 6]);
        let b = IntSeries::new(vec![1, 3, 5]);
        assert_eq!(a.compare(&b).unwrap(), SeriesOrdering::Greater);
        assert_eq!(a.compare(&a).unwrap(), SeriesOrdering::EqualToCutoff);
        let c = IntSeries::new(vec![0, 0, 1]);
        let d = IntSeries::new(vec![0, 1, 0]);
        assert_eq!(c.compare(&d).unwrap(), SeriesOrdering::Less);
        assert!(a.compare(&IntSeries::one(4)).is_err());
    }

    #[test]
    fn relation_polynomial_shape() {
        let w = Weights::uniform(3);
        let s = IntSeries::relation_polynomial(&w, &[2, 2, 2], 4);
        assert_eq!(s.coeffs(), &[1, -3, 3, 0, 0]);
    }
}
