//! Multiplicative total orders on monomials.
//!
//! Two kinds are shipped: degree-lexicographic orders induced by a total
//! order on the letters, and the order `<_U` which, at equal τ-degree, ranks
//! words by how many letters lie outside `U` and how far right they sit.

use std::cmp::Ordering;
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::algebra::{Monomial, Poly, Weights};

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum OrderError {
    #[error("letter order must list each of the {d} generators exactly once")]
    NotAPermutation { d: usize },
    #[error("generator {0} is out of range")]
    LetterOutOfRange(usize),
    #[error("the zero polynomial has no high term")]
    ZeroPolynomial,
    #[error("cannot parse order {input:?}: {reason}")]
    Parse { input: String, reason: String },
}

/// Anything that totally orders monomials.
pub trait MonomialOrdering {
    fn compare(&self, a: &Monomial, b: &Monomial) -> Ordering;
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum OrderKind {
    DegLex,
    /// `in_u[i]` says whether letter `i` (0-based) belongs to `U`.
    UOrder {
        in_u: Vec<bool>,
    },
}

/// A shipped monomial order together with the weights it grades by.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MonomialOrder {
    kind: OrderKind,
    /// `rank[letter]` is the position of the letter in the ascending order.
    rank: Vec<u8>,
    weights: Weights,
}

/// The statistics `l^U` and `k^U` of a word.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct OrderStats {
    pub l_u: u32,
    pub k_u: u64,
}

fn ranks_from(letter_order: &[usize], d: usize) -> Result<Vec<u8>, OrderError> {
    if letter_order.len() != d {
        return Err(OrderError::NotAPermutation { d });
    }
    let mut rank = vec![u8::MAX; d];
    for (pos, &i) in letter_order.iter().enumerate() {
        if i == 0 || i > d {
            return Err(OrderError::LetterOutOfRange(i));
        }
        if rank[i - 1] != u8::MAX {
            return Err(OrderError::NotAPermutation { d });
        }
        rank[i - 1] = pos as u8;
    }
    Ok(rank)
}

impl MonomialOrder {
    /// Degree-lex order; `letter_order` lists 1-based generators ascending.
    pub fn deglex(weights: &Weights, letter_order: &[usize]) -> Result<Self, OrderError> {
        Ok(Self {
            kind: OrderKind::DegLex,
            rank: ranks_from(letter_order, weights.len())?,
            weights: weights.clone(),
        })
    }

    /// Degree-lex with `X_1 < X_2 < … < X_d`.
    pub fn natural_deglex(weights: &Weights) -> Self {
        let order: Vec<usize> = (1..=weights.len()).collect();
        Self::deglex(weights, &order).expect("identity is a permutation")
    }

    /// The order `<_U` for a set `u` of 1-based generators.
    pub fn u_order(
        weights: &Weights,
        u: &[usize],
        letter_order: &[usize],
    ) -> Result<Self, OrderError> {
        let d = weights.len();
        let mut in_u = vec![false; d];
        for &i in u {
            if i == 0 || i > d {
                return Err(OrderError::LetterOutOfRange(i));
            }
            in_u[i - 1] = true;
        }
        Ok(Self {
            kind: OrderKind::UOrder { in_u },
            rank: ranks_from(letter_order, d)?,
            weights: weights.clone(),
        })
    }

    /// `<_U` with `U = {X_1, …, X_c}` and the natural letter order.
    pub fn u_order_prefix(weights: &Weights, c: usize) -> Self {
        let u: Vec<usize> = (1..=c).collect();
        let order: Vec<usize> = (1..=weights.len()).collect();
        Self::u_order(weights, &u, &order).expect("prefix set is valid")
    }

    pub fn kind(&self) -> &OrderKind {
        &self.kind
    }

    pub fn weights(&self) -> &Weights {
        &self.weights
    }

    /// 1-based generators in ascending order.
    pub fn letter_order(&self) -> Vec<usize> {
        let mut order: Vec<usize> = (1..=self.rank.len()).collect();
        order.sort_by_key(|&i| self.rank[i - 1]);
        order
    }

    /// 1-based members of `U`, empty for degree-lex orders.
    pub fn u_set(&self) -> Vec<usize> {
        match &self.kind {
            OrderKind::DegLex => Vec::new(),
            OrderKind::UOrder { in_u } => (0..in_u.len())
                .filter(|&i| in_u[i])
                .map(|i| i + 1)
                .collect(),
        }
    }

    /// `l^U` and `k^U`; both are zero for degree-lex orders.
    pub fn stats(&self, m: &Monomial) -> OrderStats {
        let OrderKind::UOrder { in_u } = &self.kind else {
            return OrderStats { l_u: 0, k_u: 0 };
        };
        let mut prefix = 0u64;
        let mut l_u = 0;
        let mut k_u = 0u64;
        for &l in m.letters() {
            prefix += self.weights.weight(l) as u64;
            if !in_u[l as usize] {
                l_u += 1;
                k_u += prefix;
            }
        }
        OrderStats { l_u, k_u }
    }

    fn lex(&self, a: &Monomial, b: &Monomial) -> Ordering {
        for (&x, &y) in a.letters().iter().zip(b.letters()) {
            if x != y {
                return self.rank[x as usize].cmp(&self.rank[y as usize]);
            }
        }
        a.len().cmp(&b.len())
    }

    pub fn compare(&self, a: &Monomial, b: &Monomial) -> Ordering {
        let by_degree = a.degree().cmp(&b.degree());
        if by_degree != Ordering::Equal {
            return by_degree;
        }
        if let OrderKind::UOrder { .. } = self.kind {
            let (sa, sb) = (self.stats(a), self.stats(b));
            let by_stats = sa.l_u.cmp(&sb.l_u).then(sa.k_u.cmp(&sb.k_u));
            if by_stats != Ordering::Equal {
                return by_stats;
            }
        }
        let out = self.lex(a, b);
        debug_assert!(out != Ordering::Equal || a == b, "distinct words tied");
        out
    }

    /// The largest monomial in the support of `f`.
    pub fn high_term(&self, f: &Poly) -> Result<Monomial, OrderError> {
        f.terms()
            .map(|(m, _)| m)
            .max_by(|a, b| self.compare(a, b))
            .cloned()
            .ok_or(OrderError::ZeroPolynomial)
    }

    /// Parses `deglex`, `deglex:x1<x3<x2`, `u-order:U=x1,x2` or
    /// `u-order:U=x1,x2;x2<x1<x3`. Letters are resolved against `names`, and
    /// `xK`/`XK` always means the K-th generator.
    pub fn parse(input: &str, names: &[String], weights: &Weights) -> Result<Self, OrderError> {
        let err = |reason: &str| OrderError::Parse {
            input: input.to_string(),
            reason: reason.to_string(),
        };
        let d = weights.len();
        let natural: Vec<usize> = (1..=d).collect();
        let resolve = |tok: &str| -> Result<usize, OrderError> {
            let tok = tok.trim();
            if let Some(i) = names.iter().position(|n| n == tok) {
                return Ok(i + 1);
            }
            let digits = tok.strip_prefix(['x', 'X']).unwrap_or("");
            match digits.parse::<usize>() {
                Ok(i) if i >= 1 && i <= d => Ok(i),
                _ => Err(err(&format!("unknown generator {tok:?}"))),
            }
        };
        let chain =
            |s: &str| -> Result<Vec<usize>, OrderError> { s.split('<').map(resolve).collect() };
        let (kind, rest) = match input.trim().split_once(':') {
            Some((k, r)) => (k.trim(), Some(r.trim())),
            None => (input.trim(), None),
        };
        match kind {
            "deglex" => {
                let order = match rest {
                    Some(r) if !r.is_empty() => chain(r)?,
                    _ => natural,
                };
                Self::deglex(weights, &order)
            }
            "u-order" => {
                let rest = rest.ok_or_else(|| err("expected U=..."))?;
                let (u_part, order_part) = match rest.split_once(';') {
                    Some((a, b)) => (a, Some(b)),
                    None => (rest, None),
                };
                let u_list = u_part
                    .trim()
                    .strip_prefix("U=")
                    .ok_or_else(|| err("expected U=..."))?;
                let u = if u_list.trim().is_empty() {
                    Vec::new()
                } else {
                    u_list
                        .split(',')
                        .map(resolve)
                        .collect::<Result<Vec<_>, _>>()?
                };
                let order = match order_part {
                    Some(o) if !o.trim().is_empty() => chain(o)?,
                    _ => natural,
                };
                Self::u_order(weights, &u, &order)
            }
            _ => Err(err("expected deglex or u-order")),
        }
    }
}

impl MonomialOrdering for MonomialOrder {
    fn compare(&self, a: &Monomial, b: &Monomial) -> Ordering {
        MonomialOrder::compare(self, a, b)
    }
}

impl fmt::Display for MonomialOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let chain: Vec<String> = self
            .letter_order()
            .iter()
            .map(|i| format!("x{i}"))
            .collect();
        match &self.kind {
            OrderKind::DegLex => write!(f, "deglex:{}", chain.join("<")),
            OrderKind::UOrder { .. } => {
                let u: Vec<String> = self.u_set().iter().map(|i| format!("x{i}")).collect();
                write!(f, "u-order:U={};{}", u.join(","), chain.join("<"))
            }
        }
    }
}

impl Serialize for MonomialOrder {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

/// A quadruple violating multiplicativity.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Counterexample {
    pub alpha: Monomial,
    pub alpha_prime: Monomial,
    pub beta: Monomial,
    pub gamma: Monomial,
    /// `"unit"` if `1 < α` failed, `"transport"` if `βαγ < βα'γ` failed.
    pub failure: &'static str,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MultiplicativityReport {
    pub trials: usize,
    pub counterexample: Option<Counterexample>,
}

fn random_word(rng: &mut ChaCha8Rng, weights: &Weights, max_len: usize) -> Monomial {
    let len = rng.gen_range(0..=max_len);
    let letters: Vec<u8> = (0..len)
        .map(|_| rng.gen_range(0..weights.len()) as u8)
        .collect();
    Monomial::new(letters, weights).expect("letters in range")
}

/// Randomized check of `1 < α` and `α < α' ⇒ βαγ < βα'γ`.
pub fn check_multiplicative<O: MonomialOrdering>(
    order: &O,
    weights: &Weights,
    trials: usize,
    max_len: usize,
    seed: u64,
) -> MultiplicativityReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let one = Monomial::one();
    for t in 0..trials {
        let a = random_word(&mut rng, weights, max_len);
        let b = random_word(&mut rng, weights, max_len);
        let beta = random_word(&mut rng, weights, max_len);
        let gamma = random_word(&mut rng, weights, max_len);
        if !a.is_one() && order.compare(&one, &a) != Ordering::Less {
            return MultiplicativityReport {
                trials: t + 1,
                counterexample: Some(Counterexample {
                    alpha: one,
                    alpha_prime: a,
                    beta: Monomial::one(),
                    gamma: Monomial::one(),
                    failure: "unit",
                }),
            };
        }
        let (lo, hi) = match order.compare(&a, &b) {
            Ordering::Less => (a, b),
            Ordering::Greater => (b, a),
            Ordering::Equal => continue,
        };
        let left = beta.concat(&lo).concat(&gamma);
        let right = beta.concat(&hi).concat(&gamma);
        if order.compare(&left, &right) != Ordering::Less {
            return MultiplicativityReport {
                trials: t + 1,
                counterexample: Some(Counterexample {
                    alpha: lo,
                    alpha_prime: hi,
                    beta,
                    gamma,
                    failure: "transport",
                }),
            };
        }
    }
    MultiplicativityReport {
        trials,
        counterexample: None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{Context, PrimeField};
    use proptest::prelude::*;

    fn word(w: &Weights, idx: &[usize]) -> Monomial {
        Monomial::from_indices(idx, w).unwrap()
    }

    #[test]
    fn u_order_uses_out_of_u_positions() {
        let w = Weights::uniform(2);
        let o = MonomialOrder::u_order(&w, &[1], &[1, 2]).unwrap();
        // X2 sits at position 1 in X2X1 (k = 1) and position 2 in X1X2 (k = 2)
        assert_eq!(
            o.compare(&word(&w, &[2, 1]), &word(&w, &[1, 2])),
            Ordering::Less
        );
        assert_eq!(o.stats(&word(&w, &[1, 2])), OrderStats { l_u: 1, k_u: 2 });
    }

    #[test]
    fn deglex_compares_degree_first() {
        let w = Weights::uniform(2);
        let o = MonomialOrder::natural_deglex(&w);
        assert_eq!(
            o.compare(&word(&w, &[1]), &word(&w, &[1, 2])),
            Ordering::Less
        );
        let a = word(&w, &[2, 1]);
        assert_eq!(o.compare(&a, &a), Ordering::Equal);
    }

    #[test]
    fn circuit_high_terms() {
        let w = Weights::uniform(4);
        let ctx = Context::new(PrimeField::new(3).unwrap(), w.clone());
        let o = MonomialOrder::deglex(&w, &[1, 3, 2, 4]).unwrap();
        let rho = Poly::from_index_terms(&ctx, &[(&[2, 1], 1), (&[1, 2], -1)]).unwrap();
        assert_eq!(o.high_term(&rho).unwrap(), word(&w, &[2, 1]));
        assert_eq!(
            o.high_term(&Poly::zero(&ctx)),
            Err(OrderError::ZeroPolynomial)
        );
    }

    #[test]
    fn u_order_high_term_prefers_out_of_u_letters() {
        let w = Weights::uniform(3);
        let ctx = Context::new(PrimeField::new(3).unwrap(), w.clone());
        let rho = Poly::from_index_terms(
            &ctx,
            &[
                (&[1, 1, 1], 1),
                (&[2, 2, 2], 1),
                (&[1, 3, 3], 1),
                (&[3, 1, 3], 1),
                (&[3, 3, 1], 1),
            ],
        )
        .unwrap();
        let o = MonomialOrder::u_order_prefix(&w, 2);
        // l^U is 2 for the last three words; k^U is 5, 4, 3 respectively
        assert_eq!(o.high_term(&rho).unwrap(), word(&w, &[1, 3, 3]));
    }

    #[test]
    fn parse_and_display_round_trip() {
        let w = Weights::uniform(4);
        let names: Vec<String> = (1..=4).map(|i| format!("x{i}")).collect();
        let o = MonomialOrder::parse("deglex:x1<x3<x2<x4", &names, &w).unwrap();
        assert_eq!(o.letter_order(), vec![1, 3, 2, 4]);
        assert_eq!(MonomialOrder::parse(&o.to_string(), &names, &w).unwrap(), o);
        let u = MonomialOrder::parse("u-order:U=x1,x2;x1<x2<x3<x4", &names, &w).unwrap();
        assert_eq!(u.u_set(), vec![1, 2]);
        assert_eq!(MonomialOrder::parse(&u.to_string(), &names, &w).unwrap(), u);
        assert!(MonomialOrder::parse("deglex:x1<x1<x2<x3", &names, &w).is_err());
        assert!(MonomialOrder::parse("revlex", &names, &w).is_err());
    }

    #[test]
    fn shipped_orders_are_multiplicative() {
        let w = Weights::new(vec![1, 2, 1]).unwrap();
        let orders = [
            MonomialOrder::natural_deglex(&w),
            MonomialOrder::deglex(&w, &[3, 1, 2]).unwrap(),
            MonomialOrder::u_order(&w, &[2], &[2, 3, 1]).unwrap(),
            MonomialOrder::u_order_prefix(&w, 1),
        ];
        for o in &orders {
            let report = check_multiplicative(o, &w, 10_000, 5, 7);
            assert_eq!(report.counterexample, None, "{o}");
        }
    }

    /// Plain lexicographic order in which a proper prefix is smaller.
    struct PureLex;

    impl MonomialOrdering for PureLex {
        fn compare(&self, a: &Monomial, b: &Monomial) -> Ordering {
            a.letters().cmp(b.letters())
        }
    }

    #[test]
    fn pure_lex_is_not_multiplicative() {
        let w = Weights::uniform(2);
        // X1 < X1X1, but after appending X2: X1X2 > X1X1X2
        let (a, b) = (word(&w, &[1]), word(&w, &[1, 1]));
        let g = word(&w, &[2]);
        assert_eq!(PureLex.compare(&a, &b), Ordering::Less);
        assert_eq!(
            PureLex.compare(&a.concat(&g), &b.concat(&g)),
            Ordering::Greater
        );
        let report = check_multiplicative(&PureLex, &w, 10_000, 4, 1);
        let ce = report.counterexample.expect("pure lex must fail");
        assert_eq!(ce.failure, "transport");
    }

    fn arb_word(d: usize) -> impl Strategy<Value = Vec<u8>> {
        prop::collection::vec(0u8..d as u8, 0..6)
    }

    proptest! {
        #[test]
        fn u_order_is_a_strict_total_order(a in arb_word(3), b in arb_word(3), c in arb_word(3)) {
            let w = Weights::new(vec![1, 1, 2]).unwrap();
            let o = MonomialOrder::u_order(&w, &[1, 3], &[2, 1, 3]).unwrap();
            let (a, b, c) = (
                Monomial::new(a, &w).unwrap(),
                Monomial::new(b, &w).unwrap(),
                Monomial::new(c, &w).unwrap(),
            );
            prop_assert_eq!(o.compare(&a, &b), o.compare(&b, &a).reverse());
            prop_assert_eq!(o.compare(&a, &b) == Ordering::Equal, a == b);
            if o.compare(&a, &b) == Ordering::Less && o.compare(&b, &c) == Ordering::Less {
                prop_assert_eq!(o.compare(&a, &c), Ordering::Less);
            }
        }

        #[test]
        fn high_term_of_product_is_product_of_high_terms(
            f in prop::collection::vec((arb_word(3), 1i64..5), 1..5),
            g in prop::collection::vec((arb_word(3), 1i64..5), 1..5),
            c in 0usize..4,
        ) {
            let w = Weights::uniform(3);
            let ctx = Context::new(PrimeField::new(5).unwrap(), w.clone());
            let mk = |t: Vec<(Vec<u8>, i64)>| Poly::from_terms(
                &ctx,
                t.into_iter().map(|(l, k)| (Monomial::new(l, &w).unwrap(), k)),
            );
            let (f, g) = (mk(f), mk(g));
            prop_assume!(!f.is_zero() && !g.is_zero());
            for o in [MonomialOrder::u_order_prefix(&w, c.min(3)), MonomialOrder::deglex(&w, &[2, 3, 1]).unwrap()] {
                let lhs = o.high_term(&(&f * &g)).unwrap();
                let rhs = o.high_term(&f).unwrap().concat(&o.high_term(&g).unwrap());
                prop_assert_eq!(lhs, rhs);
            }
        }
    }
}
