//! Group words and their Magnus expansions `x_i ↦ 1 + X_i`.

use std::fmt;
use std::sync::Arc;

use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::algebra::{AlgebraError, Context, Monomial, Poly, PrimeField, Valuation, Weights};

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum MagnusError {
    #[error("cutoff must be at least 1")]
    CutoffTooSmall,
    #[error("expansion is trivial up to degree {cutoff}; increase precision")]
    PrecisionExceeded { cutoff: u32 },
    #[error("substitution needs {expected} images, got {got}")]
    ArityMismatch { expected: usize, got: usize },
    #[error("generator index {index} out of range 1..={d}")]
    GeneratorOutOfRange { index: usize, d: usize },
    #[error("relator {relator} has a nonzero linear term, so the presentation is not minimal")]
    NonMinimal { relator: String },
    #[error("invalid presentation: {0}")]
    InvalidPresentation(String),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Atom {
    /// A generator, 0-based.
    Gen(usize),
    /// `[a, b] = a⁻¹ b⁻¹ a b`.
    Commutator(Box<GroupWord>, Box<GroupWord>),
    /// A parenthesized subword.
    Group(Box<GroupWord>),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Factor {
    pub atom: Atom,
    /// Nonzero exponent.
    pub exp: i64,
}

/// A word in the free group: a product of atoms raised to integer powers.
/// The empty product is the identity.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct GroupWord {
    pub factors: Vec<Factor>,
}

impl GroupWord {
    pub fn identity() -> Self {
        Self::default()
    }

    /// The generator `x_i` (1-based).
    pub fn gen(i: usize) -> Self {
        assert!(i >= 1, "generators are 1-based");
        Self::from_atom(Atom::Gen(i - 1), 1)
    }

    pub fn from_atom(atom: Atom, exp: i64) -> Self {
        if exp == 0 {
            return Self::identity();
        }
        Self {
            factors: vec![Factor { atom, exp }],
        }
    }

    pub fn commutator(a: GroupWord, b: GroupWord) -> Self {
        Self::from_atom(Atom::Commutator(Box::new(a), Box::new(b)), 1)
    }

    pub fn is_identity(&self) -> bool {
        self.factors.is_empty()
    }

    /// Concatenation.
    pub fn mul(&self, other: &GroupWord) -> GroupWord {
        let mut factors = self.factors.clone();
        factors.extend(other.factors.iter().cloned());
        GroupWord { factors }
    }

    /// `w^e`, kept structural.
    pub fn pow(&self, e: i64) -> GroupWord {
        if e == 0 || self.is_identity() {
            return GroupWord::identity();
        }
        if e == 1 {
            return self.clone();
        }
        if let [single] = self.factors.as_slice() {
            return GroupWord::from_atom(single.atom.clone(), single.exp * e);
        }
        GroupWord::from_atom(Atom::Group(Box::new(self.clone())), e)
    }

    pub fn inverse(&self) -> GroupWord {
        GroupWord {
            factors: self
                .factors
                .iter()
                .rev()
                .map(|f| Factor {
                    atom: f.atom.clone(),
                    exp: -f.exp,
                })
                .collect(),
        }
    }

    /// Largest generator index used (1-based), 0 for the identity.
    pub fn max_generator(&self) -> usize {
        self.factors
            .iter()
            .map(|f| match &f.atom {
                Atom::Gen(i) => i + 1,
                Atom::Commutator(a, b) => a.max_generator().max(b.max_generator()),
                Atom::Group(w) => w.max_generator(),
            })
            .max()
            .unwrap_or(0)
    }

    /// Renders with generator names; `1` for the identity.
    pub fn display_with(&self, names: &[String]) -> String {
        if self.is_identity() {
            return "1".to_string();
        }
        let parts: Vec<String> = self
            .factors
            .iter()
            .map(|f| {
                let base = match &f.atom {
                    Atom::Gen(i) => names
                        .get(*i)
                        .cloned()
                        .unwrap_or_else(|| format!("x{}", i + 1)),
                    Atom::Commutator(a, b) => {
                        format!("[{}, {}]", a.display_with(names), b.display_with(names))
                    }
                    Atom::Group(w) => format!("({})", w.display_with(names)),
                };
                if f.exp == 1 {
                    base
                } else {
                    format!("{base}^{}", f.exp)
                }
            })
            .collect();
        parts.join(" ")
    }
}

impl fmt::Display for GroupWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.display_with(&[]))
    }
}

/// `x_i ↦ images[i]`, keeping exponents and brackets.
pub fn substitute(w: &GroupWord, images: &[GroupWord], d: usize) -> Result<GroupWord, MagnusError> {
    if images.len() != d {
        return Err(MagnusError::ArityMismatch {
            expected: d,
            got: images.len(),
        });
    }
    fn go(w: &GroupWord, images: &[GroupWord]) -> Result<GroupWord, MagnusError> {
        let mut factors = Vec::with_capacity(w.factors.len());
        for f in &w.factors {
            let atom = match &f.atom {
                Atom::Gen(i) => {
                    let img = images.get(*i).ok_or(MagnusError::GeneratorOutOfRange {
                        index: i + 1,
                        d: images.len(),
                    })?;
                    match img.factors.as_slice() {
                        [single] if single.exp == 1 => single.atom.clone(),
                        _ if f.exp == 1 => {
                            factors.extend(img.factors.iter().cloned());
                            continue;
                        }
                        _ => Atom::Group(Box::new(img.clone())),
                    }
                }
                Atom::Commutator(a, b) => {
                    Atom::Commutator(Box::new(go(a, images)?), Box::new(go(b, images)?))
                }
                Atom::Group(inner) => Atom::Group(Box::new(go(inner, images)?)),
            };
            factors.push(Factor { atom, exp: f.exp });
        }
        Ok(GroupWord { factors })
    }
    go(w, images)
}

/// The Magnus expansion truncated above τ-degree `cutoff`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MagnusExpansion {
    pub poly: Poly,
    pub cutoff: u32,
}

impl MagnusExpansion {
    /// `ψ(w) = expansion − 1`.
    pub fn minus_one(&self) -> Poly {
        &self.poly - &Poly::one(self.poly.ctx())
    }
}

impl Serialize for MagnusExpansion {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut s = serializer.serialize_struct("MagnusExpansion", 2)?;
        s.serialize_field("poly", &self.poly)?;
        s.serialize_field("cutoff", &self.cutoff)?;
        s.end()
    }
}

struct Expander<'a> {
    ctx: &'a Arc<Context>,
    cutoff: u32,
}

impl Expander<'_> {
    fn mul(&self, a: &Poly, b: &Poly) -> Poly {
        a.try_mul_truncated(b, self.cutoff)
            .expect("expansions share one context")
    }

    /// Inverse of a series with constant term 1: `Σ_k (1 − u)^k`.
    fn inverse(&self, u: &Poly) -> Poly {
        let one = Poly::one(self.ctx);
        let h = &one - u;
        let mut out = one.clone();
        let mut term = one;
        loop {
            term = self.mul(&term, &h);
            if term.is_zero() {
                return out;
            }
            out = &out + &term;
        }
    }

    fn pow(&self, base: &Poly, e: i64) -> Poly {
        let mut b = if e < 0 {
            self.inverse(base)
        } else {
            base.clone()
        };
        let mut k = e.unsigned_abs();
        let mut acc = Poly::one(self.ctx);
        while k > 0 {
            if k & 1 == 1 {
                acc = self.mul(&acc, &b);
            }
            k >>= 1;
            if k > 0 {
                b = self.mul(&b, &b);
            }
        }
        acc
    }

    fn atom(&self, a: &Atom) -> Result<Poly, MagnusError> {
        match a {
            Atom::Gen(i) => {
                let d = self.ctx.d();
                if *i >= d {
                    return Err(MagnusError::GeneratorOutOfRange { index: i + 1, d });
                }
                let x = Poly::var(self.ctx, i + 1)?.truncate(self.cutoff);
                Ok(&Poly::one(self.ctx) + &x)
            }
            Atom::Commutator(a, b) => {
                let ea = self.word(a)?;
                let eb = self.word(b)?;
                let ia = self.inverse(&ea);
                let ib = self.inverse(&eb);
                Ok(self.mul(&self.mul(&ia, &ib), &self.mul(&ea, &eb)))
            }
            Atom::Group(w) => self.word(w),
        }
    }

    fn word(&self, w: &GroupWord) -> Result<Poly, MagnusError> {
        let mut acc = Poly::one(self.ctx);
        for f in &w.factors {
            let base = self.atom(&f.atom)?;
            acc = self.mul(&acc, &self.pow(&base, f.exp));
        }
        Ok(acc)
    }
}

/// Image of `w` under `x_i ↦ 1 + X_i`, dropping τ-degrees above `cutoff`.
pub fn expand(
    w: &GroupWord,
    ctx: &Arc<Context>,
    cutoff: u32,
) -> Result<MagnusExpansion, MagnusError> {
    if cutoff < 1 {
        return Err(MagnusError::CutoffTooSmall);
    }
    let poly = Expander { ctx, cutoff }.word(w)?;
    Ok(MagnusExpansion { poly, cutoff })
}

/// `ε_{I,p}(w)`: the coefficient of `X_I` (1-based indices) under the
/// standard grading.
pub fn epsilon(
    w: &GroupWord,
    indices: &[usize],
    field: PrimeField,
    d: usize,
) -> Result<u32, MagnusError> {
    let ctx = Context::new(field, Weights::uniform(d));
    let cutoff = (indices.len() as u32).max(1);
    let e = expand(w, &ctx, cutoff)?;
    let m = Monomial::from_indices(indices, &ctx.weights)?;
    Ok(e.poly.coeff(&m))
}

/// `ω_τ(w)` if it is at most the cutoff.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", content = "value", rename_all = "kebab-case")]
pub enum Omega {
    Exact(u32),
    /// `ψ(w)` vanishes through this degree: `w` is deeper or trivial.
    BeyondCutoff(u32),
}

impl Omega {
    pub fn exact(self) -> Option<u32> {
        match self {
            Omega::Exact(n) => Some(n),
            Omega::BeyondCutoff(_) => None,
        }
    }
}

impl fmt::Display for Omega {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Omega::Exact(n) => write!(f, "{n}"),
            Omega::BeyondCutoff(c) => write!(f, ">{c}"),
        }
    }
}

pub fn omega_tau(w: &GroupWord, ctx: &Arc<Context>, cutoff: u32) -> Result<Omega, MagnusError> {
    let e = expand(w, ctx, cutoff)?;
    Ok(match e.minus_one().tau_valuation() {
        Valuation::Finite(n) => Omega::Exact(n),
        Valuation::Infinity => Omega::BeyondCutoff(cutoff),
    })
}

/// The lowest homogeneous component of `ψ(w) − 1`.
pub fn initial_form(w: &GroupWord, ctx: &Arc<Context>, cutoff: u32) -> Result<Poly, MagnusError> {
    let e = expand(w, ctx, cutoff)?;
    let h = e.minus_one();
    match h.tau_valuation() {
        Valuation::Finite(n) => Ok(h.homogeneous_component(n)),
        Valuation::Infinity => Err(MagnusError::PrecisionExceeded { cutoff }),
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NamedRelator {
    pub name: String,
    pub word: GroupWord,
}

/// `G = ⟨x_1, …, x_d | r_1, …, r_m⟩` as a pro-p presentation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Presentation {
    field: PrimeField,
    names: Vec<String>,
    weights: Weights,
    relators: Vec<NamedRelator>,
}

impl Presentation {
    /// Validates names, weights and minimality (no relator has a nonzero
    /// degree-1 term under the standard grading).
    pub fn new(
        field: PrimeField,
        names: Vec<String>,
        weights: Weights,
        relators: Vec<NamedRelator>,
    ) -> Result<Self, MagnusError> {
        let d = names.len();
        if d == 0 {
            return Err(MagnusError::InvalidPresentation("no generators".into()));
        }
        if weights.len() != d {
            return Err(MagnusError::InvalidPresentation(format!(
                "{} weights for {d} generators",
                weights.len()
            )));
        }
        for (i, n) in names.iter().enumerate() {
            if names[..i].contains(n) {
                return Err(MagnusError::InvalidPresentation(format!(
                    "duplicate generator name {n:?}"
                )));
            }
        }
        for (i, r) in relators.iter().enumerate() {
            if relators[..i].iter().any(|s| s.name == r.name) {
                return Err(MagnusError::InvalidPresentation(format!(
                    "duplicate relator name {:?}",
                    r.name
                )));
            }
            let top = r.word.max_generator();
            if top > d {
                return Err(MagnusError::GeneratorOutOfRange { index: top, d });
            }
        }
        let p = Self {
            field,
            names,
            weights,
            relators,
        };
        let ctx = p.uniform_context();
        for r in &p.relators {
            let e = expand(&r.word, &ctx, 1)?;
            if !e.poly.homogeneous_component(1).is_zero() {
                return Err(MagnusError::NonMinimal {
                    relator: r.name.clone(),
                });
            }
        }
        Ok(p)
    }

    pub fn field(&self) -> PrimeField {
        self.field
    }

    pub fn p(&self) -> u32 {
        self.field.modulus()
    }

    pub fn d(&self) -> usize {
        self.names.len()
    }

    pub fn m(&self) -> usize {
        self.relators.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn weights(&self) -> &Weights {
        &self.weights
    }

    pub fn relators(&self) -> &[NamedRelator] {
        &self.relators
    }

    /// Same group data under different weights.
    pub fn with_weights(&self, weights: Weights) -> Result<Self, MagnusError> {
        if weights.len() != self.d() {
            return Err(MagnusError::ArityMismatch {
                expected: self.d(),
                got: weights.len(),
            });
        }
        let mut p = self.clone();
        p.weights = weights;
        Ok(p)
    }

    /// Context with τ = (1, …, 1).
    pub fn uniform_context(&self) -> Arc<Context> {
        Context::new(self.field, Weights::uniform(self.d()))
    }

    /// Context with the presentation's own weights.
    pub fn context(&self) -> Arc<Context> {
        Context::new(self.field, self.weights.clone())
    }

    /// Applies `x_i ↦ images[i]` to every relator.
    pub fn substitute(&self, images: &[GroupWord]) -> Result<Self, MagnusError> {
        let relators = self
            .relators
            .iter()
            .map(|r| {
                Ok(NamedRelator {
                    name: r.name.clone(),
                    word: substitute(&r.word, images, self.d())?,
                })
            })
            .collect::<Result<Vec<_>, MagnusError>>()?;
        Self::new(
            self.field,
            self.names.clone(),
            self.weights.clone(),
            relators,
        )
    }

    /// Initial forms of all relators at the given weights.
    pub fn initial_forms(&self, ctx: &Arc<Context>, cutoff: u32) -> Result<Vec<Poly>, MagnusError> {
        self.relators
            .iter()
            .map(|r| initial_form(&r.word, ctx, cutoff))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ctx(p: u64, tau: Vec<u32>) -> Arc<Context> {
        Context::new(PrimeField::new(p).unwrap(), Weights::new(tau).unwrap())
    }

    fn x(i: usize) -> GroupWord {
        GroupWord::gen(i)
    }

    #[test]
    fn generator_and_inverse() {
        let c = ctx(5, vec![1, 1]);
        assert_eq!(expand(&x(1), &c, 3).unwrap().poly.to_string(), "1 + X1");
        let w = x(1).mul(&x(1).inverse());
        for cutoff in 1..6 {
            assert_eq!(expand(&w, &c, cutoff).unwrap().poly, Poly::one(&c));
        }
        assert_eq!(expand(&x(1), &c, 0), Err(MagnusError::CutoffTooSmall));
    }

    #[test]
    fn power_product_over_f2() {
        let c = ctx(2, vec![1, 1]);
        let w = x(1).pow(2).mul(&x(2).pow(4));
        let e = expand(&w, &c, 8).unwrap().poly;
        let expected = Poly::from_index_terms(
            &c,
            &[
                (&[], 1),
                (&[1, 1], 1),
                (&[2, 2, 2, 2], 1),
                (&[1, 1, 2, 2, 2, 2], 1),
            ],
        )
        .unwrap();
        assert_eq!(e, expected);
    }

    #[test]
    fn commutator_expansion() {
        let c = ctx(3, vec![1, 1]);
        let e = expand(&GroupWord::commutator(x(1), x(2)), &c, 2)
            .unwrap()
            .poly;
        let expected =
            Poly::from_index_terms(&c, &[(&[], 1), (&[1, 2], 1), (&[2, 1], -1)]).unwrap();
        assert_eq!(e, expected);
    }

    #[test]
    fn epsilon_values() {
        let f3 = PrimeField::new(3).unwrap();
        let comm = GroupWord::commutator(x(1), x(2));
        assert_eq!(epsilon(&comm, &[1, 2], f3, 2).unwrap(), 1);
        assert_eq!(epsilon(&comm, &[2, 1], f3, 2).unwrap(), 2);
        assert_eq!(epsilon(&x(2), &[2], f3, 2).unwrap(), 1);
        assert_eq!(epsilon(&x(2), &[1], f3, 2).unwrap(), 0);
        assert_eq!(epsilon(&x(1).pow(3), &[1, 1, 1], f3, 1).unwrap(), 1);
    }

    #[test]
    fn valuations() {
        let c = ctx(5, vec![1, 1, 1]);
        assert_eq!(omega_tau(&x(1).pow(5), &c, 8).unwrap(), Omega::Exact(5));
        let deep = GroupWord::commutator(GroupWord::commutator(x(1), x(3)), x(3));
        assert_eq!(omega_tau(&deep, &c, 8).unwrap(), Omega::Exact(3));
        assert_eq!(omega_tau(&deep, &c, 2).unwrap(), Omega::BeyondCutoff(2));

        let w = ctx(2, vec![2, 1]);
        let r = x(1).pow(2).mul(&x(2).pow(4));
        assert_eq!(omega_tau(&r, &w, 12).unwrap(), Omega::Exact(4));
        let rho = initial_form(&r, &w, 12).unwrap();
        assert_eq!(
            rho,
            Poly::from_index_terms(&w, &[(&[1, 1], 1), (&[2, 2, 2, 2], 1)]).unwrap()
        );
        assert_eq!(
            initial_form(&deep, &c, 2),
            Err(MagnusError::PrecisionExceeded { cutoff: 2 })
        );
    }

    #[test]
    fn demuskin_type_example_initial_form() {
        let c = ctx(3, vec![1, 1, 1]);
        let r = x(1).pow(3).mul(&x(2).pow(3)).mul(&GroupWord::commutator(
            GroupWord::commutator(x(1), x(3)),
            x(3),
        ));
        let rho = initial_form(&r, &c, 4).unwrap();
        let expected = Poly::from_index_terms(
            &c,
            &[
                (&[1, 1, 1], 1),
                (&[2, 2, 2], 1),
                (&[1, 3, 3], 1),
                (&[3, 1, 3], 1),
                (&[3, 3, 1], 1),
            ],
        )
        .unwrap();
        assert_eq!(rho, expected);
    }

    #[test]
    fn substitution() {
        let w = x(1).mul(&x(2));
        let swapped = substitute(&w, &[x(2), x(1)], 2).unwrap();
        assert_eq!(swapped, x(2).mul(&x(1)));
        assert_eq!(substitute(&w, &[x(1), x(2)], 2).unwrap(), w);
        let comm = GroupWord::commutator(x(1), x(2));
        let image = substitute(&comm, &[x(1), x(1).mul(&x(2))], 2).unwrap();
        assert_eq!(image, GroupWord::commutator(x(1), x(1).mul(&x(2))));
        assert_eq!(
            substitute(&w, &[x(1)], 2),
            Err(MagnusError::ArityMismatch {
                expected: 2,
                got: 1
            })
        );
    }

    #[test]
    fn presentation_rejects_linear_relators() {
        let f = PrimeField::new(3).unwrap();
        let names = vec!["a".to_string(), "b".to_string()];
        let bad = vec![NamedRelator {
            name: "r".into(),
            word: x(1).mul(&GroupWord::commutator(x(1), x(2))),
        }];
        assert!(matches!(
            Presentation::new(f, names.clone(), Weights::uniform(2), bad),
            Err(MagnusError::NonMinimal { .. })
        ));
        // x^3 is fine over F_3
        let ok = vec![NamedRelator {
            name: "r".into(),
            word: x(1).pow(3),
        }];
        assert!(Presentation::new(f, names, Weights::uniform(2), ok).is_ok());
    }

    fn arb_word(d: usize) -> impl Strategy<Value = GroupWord> {
        let leaf = (1..=d, -3i64..=3)
            .prop_filter("nonzero", |(_, e)| *e != 0)
            .prop_map(|(i, e)| x(i).pow(e));
        leaf.prop_recursive(3, 12, 3, |inner| {
            prop_oneof![
                prop::collection::vec(inner.clone(), 1..4)
                    .prop_map(|ws| ws.iter().fold(GroupWord::identity(), |a, b| a.mul(b))),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| GroupWord::commutator(a, b)),
                (inner, -2i64..=2).prop_map(|(w, e)| w.pow(e)),
            ]
        })
    }

    /// Words in `F_(n)`: commutators of weight `n` and p-th powers of deep words.
    fn deep_words() -> Vec<GroupWord> {
        let c12 = GroupWord::commutator(x(1), x(2));
        let c123 = GroupWord::commutator(c12.clone(), x(3));
        let c1223 = GroupWord::commutator(c12.clone(), GroupWord::commutator(x(2), x(3)));
        vec![
            c123.clone(),
            c1223,
            GroupWord::commutator(c123, x(1)),
            x(1).pow(3),
            c12.pow(3),
            x(2).pow(9),
            x(1).pow(3).mul(&GroupWord::commutator(
                GroupWord::commutator(x(1), x(3)),
                x(3),
            )),
        ]
    }

    #[test]
    fn membership_in_filtration_matches_vanishing_epsilons() {
        let f = PrimeField::new(3).unwrap();
        let c = Context::new(f, Weights::uniform(3));
        for w in deep_words() {
            let n = omega_tau(&w, &c, 9).unwrap().exact().unwrap();
            for k in 1..n {
                for m in crate::algebra::words_of_degree(&c.weights, k) {
                    assert_eq!(epsilon(&w, &m.indices(), f, 3).unwrap(), 0, "{w} {m}");
                }
            }
            let rho = initial_form(&w, &c, 9).unwrap();
            let m = rho.terms().next().unwrap().0.clone();
            assert_ne!(epsilon(&w, &m.indices(), f, 3).unwrap(), 0);
        }
    }

    /// Index tuples obtained by interleaving `I[..a]` and `I[a..]`.
    fn shuffles(idx: &[usize], a: usize) -> Vec<Vec<usize>> {
        let n = idx.len();
        let mut out = Vec::new();
        for mask in 0u32..(1 << n) {
            if mask.count_ones() as usize != a {
                continue;
            }
            let (mut l, mut r) = (0, a);
            let mut t = Vec::with_capacity(n);
            for pos in 0..n {
                if mask & (1 << pos) != 0 {
                    t.push(idx[l]);
                    l += 1;
                } else {
                    t.push(idx[r]);
                    r += 1;
                }
            }
            out.push(t);
        }
        out
    }

    #[test]
    fn shuffle_sums_vanish_on_deep_words() {
        let f = PrimeField::new(3).unwrap();
        let c = Context::new(f, Weights::uniform(3));
        for w in deep_words() {
            let n = omega_tau(&w, &c, 9).unwrap().exact().unwrap() as usize;
            let e = expand(&w, &c, n as u32).unwrap().poly;
            for m in crate::algebra::words_of_degree(&c.weights, n as u32) {
                for a in 1..n {
                    let total = shuffles(&m.indices(), a)
                        .iter()
                        .fold(0, |acc, t| f.add(acc, e.coeff_of_indices(t)));
                    assert_eq!(total, 0, "{w} {m} a={a}");
                }
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn expansion_is_multiplicative(u in arb_word(3), v in arb_word(3)) {
            let c = ctx(3, vec![1, 2, 1]);
            let eu = expand(&u, &c, 5).unwrap().poly;
            let ev = expand(&v, &c, 5).unwrap().poly;
            let euv = expand(&u.mul(&v), &c, 5).unwrap().poly;
            prop_assert_eq!(euv, eu.try_mul_truncated(&ev, 5).unwrap());
        }

        #[test]
        fn inverse_word_inverts_series(u in arb_word(2)) {
            let c = ctx(5, vec![1, 1]);
            let eu = expand(&u, &c, 5).unwrap().poly;
            let einv = expand(&u.inverse(), &c, 5).unwrap().poly;
            prop_assert_eq!(eu.try_mul_truncated(&einv, 5).unwrap(), Poly::one(&c));
        }

        #[test]
        fn identity_substitution_is_identity(u in arb_word(3)) {
            let images: Vec<GroupWord> = (1..=3).map(x).collect();
            prop_assert_eq!(substitute(&u, &images, 3).unwrap(), u);
        }
    }
}
