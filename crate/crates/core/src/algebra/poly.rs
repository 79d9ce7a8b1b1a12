//! Sparse noncommutative polynomials in `F_p⟨X_1, …, X_d⟩` graded by τ.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use serde::{Serialize, Serializer};

use super::{AlgebraError, Monomial, PrimeField, Weights};

/// The ambient data shared by polynomials that may be combined: the prime
/// and the generator weights (which also fix `d`).
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Context {
    pub field: PrimeField,
    pub weights: Weights,
}

impl Context {
    pub fn new(field: PrimeField, weights: Weights) -> Arc<Self> {
        Arc::new(Self { field, weights })
    }

    pub fn d(&self) -> usize {
        self.weights.len()
    }

    pub fn p(&self) -> u32 {
        self.field.modulus()
    }
}

/// `ν_τ` of a polynomial. The zero polynomial has valuation [`Valuation::Infinity`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Valuation {
    Finite(u32),
    Infinity,
}

impl Valuation {
    pub fn finite(self) -> Option<u32> {
        match self {
            Valuation::Finite(v) => Some(v),
            Valuation::Infinity => None,
        }
    }
}

impl fmt::Display for Valuation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Valuation::Finite(v) => write!(f, "{v}"),
            Valuation::Infinity => write!(f, "infinity"),
        }
    }
}

impl Serialize for Valuation {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        match self {
            Valuation::Finite(v) => serializer.serialize_u32(*v),
            Valuation::Infinity => serializer.serialize_str("infinity"),
        }
    }
}

/// An element of `A = F_p⟨X⟩^τ`: a finite map monomial → nonzero coefficient.
#[derive(Clone, Debug)]
pub struct Poly {
    ctx: Arc<Context>,
    terms: BTreeMap<Monomial, u32>,
}

impl PartialEq for Poly {
    fn eq(&self, other: &Self) -> bool {
        same_context(&self.ctx, &other.ctx) && self.terms == other.terms
    }
}

impl Eq for Poly {}

fn same_context(a: &Arc<Context>, b: &Arc<Context>) -> bool {
    Arc::ptr_eq(a, b) || **a == **b
}

impl Poly {
    pub fn zero(ctx: &Arc<Context>) -> Self {
        Self {
            ctx: Arc::clone(ctx),
            terms: BTreeMap::new(),
        }
    }

    pub fn one(ctx: &Arc<Context>) -> Self {
        Self::monomial(ctx, Monomial::one(), 1)
    }

    /// The generator `X_i` (1-based).
    pub fn var(ctx: &Arc<Context>, i: usize) -> Result<Self, AlgebraError> {
        let m = Monomial::from_indices(&[i], &ctx.weights)?;
        Ok(Self::monomial(ctx, m, 1))
    }

    pub fn monomial(ctx: &Arc<Context>, m: Monomial, coeff: i64) -> Self {
        let mut p = Self::zero(ctx);
        p.add_term(m, ctx.field.reduce(coeff));
        p
    }

    /// Sums the given terms, reducing coefficients mod p.
    pub fn from_terms<I>(ctx: &Arc<Context>, terms: I) -> Self
    where
        I: IntoIterator<Item = (Monomial, i64)>,
    {
        let mut p = Self::zero(ctx);
        for (m, c) in terms {
            p.add_term(m, ctx.field.reduce(c));
        }
        p
    }

    /// Builds a polynomial from 1-based index words.
    pub fn from_index_terms(
        ctx: &Arc<Context>,
        terms: &[(&[usize], i64)],
    ) -> Result<Self, AlgebraError> {
        let mut p = Self::zero(ctx);
        for (word, c) in terms {
            let m = Monomial::from_indices(word, &ctx.weights)?;
            p.add_term(m, ctx.field.reduce(*c));
        }
        Ok(p)
    }

    pub fn ctx(&self) -> &Arc<Context> {
        &self.ctx
    }

    pub fn field(&self) -> PrimeField {
        self.ctx.field
    }

    pub fn weights(&self) -> &Weights {
        &self.ctx.weights
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Terms in storage order: ascending τ-degree, then letters.
    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, u32)> + '_ {
        self.terms.iter().map(|(m, &c)| (m, c))
    }

    pub fn coeff(&self, m: &Monomial) -> u32 {
        self.terms.get(m).copied().unwrap_or(0)
    }

    /// Coefficient of the word with the given 1-based indices.
    pub fn coeff_of_indices(&self, indices: &[usize]) -> u32 {
        match Monomial::from_indices(indices, &self.ctx.weights) {
            Ok(m) => self.coeff(&m),
            Err(_) => 0,
        }
    }

    /// Adds `c · m` in place, dropping the term if it cancels.
    pub fn add_term(&mut self, m: Monomial, c: u32) {
        if c == 0 {
            return;
        }
        let field = self.ctx.field;
        match self.terms.entry(m) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                let s = field.add(*o.get(), c);
                if s == 0 {
                    o.remove();
                } else {
                    *o.get_mut() = s;
                }
            }
        }
    }

    fn check_context(&self, other: &Poly) -> Result<(), AlgebraError> {
        if same_context(&self.ctx, &other.ctx) {
            Ok(())
        } else {
            Err(AlgebraError::ContextMismatch)
        }
    }

    pub fn try_add(&self, other: &Poly) -> Result<Poly, AlgebraError> {
        self.check_context(other)?;
        let mut out = self.clone();
        for (m, c) in other.terms() {
            out.add_term(m.clone(), c);
        }
        Ok(out)
    }

    pub fn try_sub(&self, other: &Poly) -> Result<Poly, AlgebraError> {
        self.check_context(other)?;
        let mut out = self.clone();
        let field = self.ctx.field;
        for (m, c) in other.terms() {
            out.add_term(m.clone(), field.neg(c));
        }
        Ok(out)
    }

    pub fn try_mul(&self, other: &Poly) -> Result<Poly, AlgebraError> {
        self.try_mul_truncated(other, u32::MAX)
    }

    /// Product keeping only terms of τ-degree at most `max_degree`.
    pub fn try_mul_truncated(&self, other: &Poly, max_degree: u32) -> Result<Poly, AlgebraError> {
        self.check_context(other)?;
        let field = self.ctx.field;
        let mut out = Poly::zero(&self.ctx);
        for (a, ca) in self.terms() {
            if a.degree() > max_degree {
                break;
            }
            let room = max_degree - a.degree();
            for (b, cb) in other.terms() {
                // terms are sorted by degree, so nothing further fits
                if b.degree() > room {
                    break;
                }
                out.add_term(a.concat(b), field.mul(ca, cb));
            }
        }
        Ok(out)
    }

    pub fn scale(&self, c: u32) -> Poly {
        let field = self.ctx.field;
        let c = c % field.modulus();
        if c == 0 {
            return Poly::zero(&self.ctx);
        }
        Poly {
            ctx: Arc::clone(&self.ctx),
            terms: self
                .terms
                .iter()
                .map(|(m, &v)| (m.clone(), field.mul(v, c)))
                .collect(),
        }
    }

    /// `ν_τ`: minimum τ-degree over the support.
    pub fn tau_valuation(&self) -> Valuation {
        match self.terms.keys().next() {
            Some(m) => Valuation::Finite(m.degree()),
            None => Valuation::Infinity,
        }
    }

    /// Largest τ-degree in the support, `None` for zero.
    pub fn max_degree(&self) -> Option<u32> {
        self.terms.keys().next_back().map(Monomial::degree)
    }

    /// The sum of the terms of τ-degree exactly `n`.
    pub fn homogeneous_component(&self, n: u32) -> Poly {
        Poly {
            ctx: Arc::clone(&self.ctx),
            terms: self
                .terms
                .iter()
                .filter(|(m, _)| m.degree() == n)
                .map(|(m, &c)| (m.clone(), c))
                .collect(),
        }
    }

    /// All nonzero homogeneous components keyed by degree.
    pub fn components(&self) -> BTreeMap<u32, Poly> {
        let mut out: BTreeMap<u32, Poly> = BTreeMap::new();
        for (m, c) in self.terms() {
            out.entry(m.degree())
                .or_insert_with(|| Poly::zero(&self.ctx))
                .terms
                .insert(m.clone(), c);
        }
        out
    }

    /// Drops every term of τ-degree above `max_degree`.
    pub fn truncate(&self, max_degree: u32) -> Poly {
        Poly {
            ctx: Arc::clone(&self.ctx),
            terms: self
                .terms
                .iter()
                .filter(|(m, _)| m.degree() <= max_degree)
                .map(|(m, &c)| (m.clone(), c))
                .collect(),
        }
    }

    /// True for zero and for polynomials whose terms share one τ-degree.
    pub fn is_homogeneous(&self) -> bool {
        match (self.terms.keys().next(), self.terms.keys().next_back()) {
            (Some(a), Some(b)) => a.degree() == b.degree(),
            _ => true,
        }
    }

    /// Same terms, reinterpreted under different weights on the same letters.
    pub fn with_context(&self, ctx: &Arc<Context>) -> Result<Poly, AlgebraError> {
        if ctx.d() != self.ctx.d() || ctx.field != self.ctx.field {
            return Err(AlgebraError::ContextMismatch);
        }
        let mut out = Poly::zero(ctx);
        for (m, c) in self.terms() {
            out.add_term(Monomial::new(m.letters().to_vec(), &ctx.weights)?, c);
        }
        Ok(out)
    }

    /// Renders with caller-supplied generator names.
    pub fn display_with(&self, names: &[String]) -> String {
        if self.is_zero() {
            return "0".to_string();
        }
        let parts: Vec<String> = self
            .terms()
            .map(|(m, c)| match (c, m.is_one()) {
                (c, true) => c.to_string(),
                (1, false) => m.display_with(names),
                (c, false) => format!("{c}*{}", m.display_with(names)),
            })
            .collect();
        parts.join(" + ")
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        for (i, (m, c)) in self.terms().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            match (c, m.is_one()) {
                (c, true) => write!(f, "{c}")?,
                (1, false) => write!(f, "{m}")?,
                (c, false) => write!(f, "{c}*{m}")?,
            }
        }
        Ok(())
    }
}

impl Serialize for Poly {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

// Operator forms panic on a context mismatch; use the `try_*` methods when
// the operands come from different sources.

impl Add for &Poly {
    type Output = Poly;
    fn add(self, rhs: &Poly) -> Poly {
        self.try_add(rhs).expect("polynomial contexts differ")
    }
}

impl Sub for &Poly {
    type Output = Poly;
    fn sub(self, rhs: &Poly) -> Poly {
        self.try_sub(rhs).expect("polynomial contexts differ")
    }
}

impl Mul for &Poly {
    type Output = Poly;
    fn mul(self, rhs: &Poly) -> Poly {
        self.try_mul(rhs).expect("polynomial contexts differ")
    }
}

impl Neg for &Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        self.scale(self.ctx.field.neg(1))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx(p: u64, tau: Vec<u32>) -> Arc<Context> {
        Context::new(PrimeField::new(p).unwrap(), Weights::new(tau).unwrap())
    }

    #[test]
    fn additive_inverse_cancels() {
        let c = ctx(5, vec![1, 1]);
        let x1 = Poly::var(&c, 1).unwrap();
        assert!((&x1 + &(-&x1)).is_zero());
    }

    #[test]
    fn addition_reduces_mod_p() {
        let c = ctx(3, vec![1, 1]);
        let x1 = Poly::var(&c, 1).unwrap();
        let x2 = Poly::var(&c, 2).unwrap();
        let sum = &(&x1 + &x2) + &x2;
        let expected = Poly::from_index_terms(&c, &[(&[1], 1), (&[2], 2)]).unwrap();
        assert_eq!(sum, expected);
        assert_eq!(&sum + &Poly::zero(&c), sum);
    }

    #[test]
    fn multiplication_is_noncommutative() {
        let c = ctx(3, vec![1, 1]);
        let x1 = Poly::var(&c, 1).unwrap();
        let x2 = Poly::var(&c, 2).unwrap();
        assert_ne!(&x1 * &x2, &x2 * &x1);
        assert_eq!((&x1 * &x2).to_string(), "X1X2");

        let prod = &(&x1 + &x2) * &(&x1 - &x2);
        let expected = Poly::from_index_terms(
            &c,
            &[(&[1, 1], 1), (&[2, 1], 1), (&[1, 2], 2), (&[2, 2], 2)],
        )
        .unwrap();
        assert_eq!(prod, expected);
        assert_eq!(&prod * &Poly::one(&c), prod);
    }

    #[test]
    fn valuation_and_components() {
        let c = ctx(3, vec![1, 1]);
        let f = Poly::from_index_terms(&c, &[(&[1, 2], 1), (&[1, 1, 1], 1)]).unwrap();
        assert_eq!(f.tau_valuation(), Valuation::Finite(2));
        assert_eq!(Poly::zero(&c).tau_valuation(), Valuation::Infinity);

        let g = Poly::from_index_terms(&c, &[(&[1], 1), (&[1, 2], 1)]).unwrap();
        assert_eq!(g.homogeneous_component(2).to_string(), "X1X2");
        assert!(g.homogeneous_component(7).is_zero());

        let w = ctx(2, vec![2, 1]);
        let h = Poly::from_index_terms(&w, &[(&[1, 1], 1), (&[2, 2, 2, 2], 1)]).unwrap();
        assert_eq!(h.tau_valuation(), Valuation::Finite(4));
        assert_eq!(h.homogeneous_component(4), h);
        assert!(h.is_homogeneous());
    }

    #[test]
    fn context_mismatch_is_an_error() {
        let a = Poly::var(&ctx(3, vec![1, 1]), 1).unwrap();
        let b = Poly::var(&ctx(5, vec![1, 1]), 1).unwrap();
        assert!(matches!(a.try_add(&b), Err(AlgebraError::ContextMismatch)));
        assert!(matches!(a.try_mul(&b), Err(AlgebraError::ContextMismatch)));
    }

    #[test]
    fn truncated_product_drops_high_terms() {
        let c = ctx(7, vec![1, 2]);
        let f = &Poly::one(&c) + &Poly::var(&c, 2).unwrap();
        let sq = f.try_mul_truncated(&f, 3).unwrap();
        assert_eq!(sq.max_degree(), Some(2));
        assert_eq!(sq, (&f * &f).truncate(3));
    }
}
