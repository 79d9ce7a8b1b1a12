//! Strong freeness of homogeneous sequences in `A = F_p⟨X⟩^τ`.
//!
//! Two independent engines:
//!
//! * [`anick_check`] takes high terms under a multiplicative order and tests
//!   them for combinatorial freeness. Success is a proof; failure says
//!   nothing.
//! * [`strongly_free_oracle`] computes the Hilbert series of `B = A/ℛ`
//!   degree by degree and compares `B(t)·(1 − Σt^{τ_i} + Σt^{σ_j})` with 1.
//!   A nonzero coefficient refutes; agreement up to `N` is evidence only.

use std::collections::{HashMap, HashSet};
use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::algebra::{word_counts, words_of_degree, Context, IntSeries, Monomial, Poly, Weights};
use crate::linalg::{Budget, BudgetExceeded, Echelon};
use crate::orders::MonomialOrder;

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum FreenessError {
    #[error("relator {0} is the empty monomial")]
    EmptyMonomial(usize),
    #[error("relator {0} is zero")]
    ZeroRelator(usize),
    #[error("relator {0} is not homogeneous for the given weights")]
    NotHomogeneous(usize),
    #[error("relator {0} lives over a different prime or weight vector")]
    ContextMismatch(usize),
    #[error(
        "internal invariant violated: coefficient {coefficient} of P(t) - 1 at degree {degree} is negative"
    )]
    PositivityViolated { degree: u32, coefficient: i64 },
    #[error(transparent)]
    Budget(#[from] BudgetExceeded),
}

/// Why a monomial sequence fails to be combinatorially free. Indices are
/// 0-based positions in the input sequence.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Violation {
    /// `rhos[inner]` occurs inside `rhos[outer]` at `offset`.
    Submonomial {
        inner: usize,
        outer: usize,
        offset: usize,
    },
    /// The prefix of `rhos[prefix_of]` of this length equals the suffix of
    /// `rhos[suffix_of]` of the same length; both are proper.
    Overlap {
        prefix_of: usize,
        suffix_of: usize,
        length: usize,
    },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "result", rename_all = "kebab-case")]
pub enum CombinatorialFreeness {
    Free,
    NotFree { violation: Violation },
}

impl CombinatorialFreeness {
    pub fn is_free(&self) -> bool {
        matches!(self, CombinatorialFreeness::Free)
    }
}

/// Tests that no `ρ_i` is a subword of another `ρ_j` and that no proper
/// prefix of any `ρ_i` is a proper suffix of any `ρ_j` (`i = j` included).
pub fn combinatorially_free(rhos: &[Monomial]) -> Result<CombinatorialFreeness, FreenessError> {
    if let Some(i) = rhos.iter().position(Monomial::is_one) {
        return Err(FreenessError::EmptyMonomial(i));
    }
    for (i, inner) in rhos.iter().enumerate() {
        for (j, outer) in rhos.iter().enumerate() {
            if i == j {
                continue;
            }
            if let Some(offset) = outer.find(inner) {
                return Ok(CombinatorialFreeness::NotFree {
                    violation: Violation::Submonomial {
                        inner: i,
                        outer: j,
                        offset,
                    },
                });
            }
        }
    }
    for (i, a) in rhos.iter().enumerate() {
        for (j, b) in rhos.iter().enumerate() {
            // proper on both sides: shorter than either word
            for length in 1..a.len().min(b.len()) {
                if a.letters()[..length] == b.letters()[b.len() - length..] {
                    return Ok(CombinatorialFreeness::NotFree {
                        violation: Violation::Overlap {
                            prefix_of: i,
                            suffix_of: j,
                            length,
                        },
                    });
                }
            }
        }
    }
    Ok(CombinatorialFreeness::Free)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Engine {
    Anick,
    Oracle,
}

/// The certificate attached to a successful Anick check.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AnickCertificate {
    pub order: MonomialOrder,
    pub high_terms: Vec<Monomial>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "status", rename_all = "kebab-case")]
pub enum FreenessStatus {
    ProvenStronglyFree {
        certificate: AnickCertificate,
    },
    /// The coefficient `witness > 0` of `P(t) − 1` at `at_degree`.
    Refuted {
        at_degree: u32,
        witness: i64,
    },
    /// No contradiction up to this degree. Degree 0 from the Anick engine
    /// means the criterion was inconclusive for the chosen order.
    ConsistentToDegree {
        degree: u32,
    },
}

/// Supporting data for a verdict.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "engine", rename_all = "kebab-case")]
pub enum Evidence {
    Anick {
        order: MonomialOrder,
        high_terms: Vec<Monomial>,
        violation: Option<Violation>,
    },
    Oracle {
        /// Dimensions of `B_n` for `n = 0..=N`.
        quotient: IntSeries,
        /// `1 / (1 − Σt^{τ_i} + Σt^{σ_j})`.
        target: IntSeries,
        /// `B(t)·(1 − Σt^{τ_i} + Σt^{σ_j}) − 1`.
        defect: IntSeries,
    },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FreenessVerdict {
    pub status: FreenessStatus,
    pub engine: Engine,
    pub evidence: Evidence,
}

impl FreenessVerdict {
    pub fn is_proven(&self) -> bool {
        matches!(self.status, FreenessStatus::ProvenStronglyFree { .. })
    }

    pub fn is_refuted(&self) -> bool {
        matches!(self.status, FreenessStatus::Refuted { .. })
    }

    /// `Some(N)` for a consistent-to-degree verdict.
    pub fn consistent_degree(&self) -> Option<u32> {
        match self.status {
            FreenessStatus::ConsistentToDegree { degree } => Some(degree),
            _ => None,
        }
    }
}

/// Checks that every relator is a nonzero homogeneous element of `ctx` and
/// returns the degrees `σ_j`.
fn relator_degrees(ctx: &Arc<Context>, rhos: &[Poly]) -> Result<Vec<u32>, FreenessError> {
    rhos.iter()
        .enumerate()
        .map(|(i, r)| {
            if **r.ctx() != **ctx {
                return Err(FreenessError::ContextMismatch(i));
            }
            if !r.is_homogeneous() {
                return Err(FreenessError::NotHomogeneous(i));
            }
            match r.tau_valuation().finite() {
                None => Err(FreenessError::ZeroRelator(i)),
                Some(0) => Err(FreenessError::NotHomogeneous(i)),
                Some(s) => Ok(s),
            }
        })
        .collect()
}

/// Anick's criterion: proven if the high terms are combinatorially free,
/// otherwise inconclusive (reported as consistent to degree 0).
pub fn anick_check(rhos: &[Poly], order: &MonomialOrder) -> Result<FreenessVerdict, FreenessError> {
    let mut high_terms = Vec::with_capacity(rhos.len());
    for (i, r) in rhos.iter().enumerate() {
        if !r.is_homogeneous() {
            return Err(FreenessError::NotHomogeneous(i));
        }
        if r.weights() != order.weights() {
            return Err(FreenessError::ContextMismatch(i));
        }
        let ht = order
            .high_term(r)
            .map_err(|_| FreenessError::ZeroRelator(i))?;
        if ht.is_one() {
            return Err(FreenessError::EmptyMonomial(i));
        }
        high_terms.push(ht);
    }
    let comb = combinatorially_free(&high_terms)?;
    let (status, violation) = match comb {
        CombinatorialFreeness::Free => (
            FreenessStatus::ProvenStronglyFree {
                certificate: AnickCertificate {
                    order: order.clone(),
                    high_terms: high_terms.clone(),
                },
            },
            None,
        ),
        CombinatorialFreeness::NotFree { violation } => (
            FreenessStatus::ConsistentToDegree { degree: 0 },
            Some(violation),
        ),
    };
    Ok(FreenessVerdict {
        status,
        engine: Engine::Anick,
        evidence: Evidence::Anick {
            order: order.clone(),
            high_terms,
            violation,
        },
    })
}

/// Spanning rows of the degree-`n` part of the two-sided ideal `ℛ`.
#[derive(Clone, Debug)]
pub struct GradedIdealSlice {
    pub degree: u32,
    /// The monomial basis of `A_n`, in length-lex order.
    pub basis: Vec<Monomial>,
    /// Deduplicated coefficient rows of the products `α ρ_j β`, as sparse
    /// (column, value) lists over `basis`.
    pub rows: Vec<Vec<(usize, u32)>>,
}

impl GradedIdealSlice {
    pub fn rank(&self, ctx: &Context, budget: &Budget) -> Result<usize, BudgetExceeded> {
        let mut ech = Echelon::new(ctx.field, self.basis.len(), budget);
        for row in &self.rows {
            ech.insert_sparse(row)?;
            if ech.is_full() {
                break;
            }
        }
        Ok(ech.rank())
    }
}

/// Builds the spanning set `{α ρ_j β}` of `ℛ_n` over the monomial basis of `A_n`.
pub fn ideal_slice(
    ctx: &Arc<Context>,
    rhos: &[Poly],
    n: u32,
    budget: &Budget,
) -> Result<GradedIdealSlice, FreenessError> {
    let sigmas = relator_degrees(ctx, rhos)?;
    let w = &ctx.weights;
    let counts = word_counts(w, n);
    budget.check_entries("monomial basis", counts[n as usize] as usize)?;
    let mut needed = 0usize;
    for (r, &s) in rhos.iter().zip(&sigmas) {
        if s > n {
            continue;
        }
        let pairs: u64 = (0..=(n - s) as usize)
            .map(|a| counts[a] * counts[(n - s) as usize - a])
            .sum();
        needed = needed.saturating_add((pairs as usize).saturating_mul(r.len()));
    }
    budget.check_entries("ideal slice", needed)?;

    let basis = words_of_degree(w, n);
    let index: HashMap<&[u8], usize> = basis
        .iter()
        .enumerate()
        .map(|(i, m)| (m.letters(), i))
        .collect();
    let field = ctx.field;
    let mut seen: HashSet<Vec<(usize, u32)>> = HashSet::new();
    let mut rows = Vec::new();
    for (r, &s) in rhos.iter().zip(&sigmas) {
        if s > n {
            continue;
        }
        for a in 0..=(n - s) {
            let lefts = words_of_degree(w, a);
            let rights = words_of_degree(w, n - s - a);
            for alpha in &lefts {
                for beta in &rights {
                    let mut row: Vec<(usize, u32)> = r
                        .terms()
                        .map(|(m, c)| {
                            let word = alpha.concat(m).concat(beta);
                            (index[word.letters()], c)
                        })
                        .collect();
                    row.sort_unstable();
                    // normalize so scalar multiples dedupe too
                    let inv = field.inv(row[0].1).expect("nonzero coefficient");
                    for e in row.iter_mut() {
                        e.1 = field.mul(e.1, inv);
                    }
                    if seen.insert(row.clone()) {
                        rows.push(row);
                    }
                }
            }
        }
    }
    Ok(GradedIdealSlice {
        degree: n,
        basis,
        rows,
    })
}

/// How [`quotient_dimensions_with`] computes `dim B_n`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum HilbertEngine {
    /// Works in `⊕_i X_i ⊗ B_{n−τ_i}` using normal forms from lower degrees.
    Recursive,
    /// Row-reduces the full ideal slice in `A_n`, degrees in parallel.
    Slice,
}

/// `dim B_n` for `n = 0..=N`, by the recursive engine.
pub fn quotient_dimensions(
    ctx: &Arc<Context>,
    rhos: &[Poly],
    max_degree: u32,
    budget: &Budget,
) -> Result<IntSeries, FreenessError> {
    quotient_dimensions_with(ctx, rhos, max_degree, budget, HilbertEngine::Recursive)
}

pub fn quotient_dimensions_with(
    ctx: &Arc<Context>,
    rhos: &[Poly],
    max_degree: u32,
    budget: &Budget,
    engine: HilbertEngine,
) -> Result<IntSeries, FreenessError> {
    match engine {
        HilbertEngine::Recursive => {
            let mut q = NormalForms::new(ctx, rhos, budget)?;
            for _ in 1..=max_degree {
                q.extend()?;
            }
            Ok(IntSeries::new(q.dims()))
        }
        HilbertEngine::Slice => {
            let dims: Result<Vec<i64>, FreenessError> = (0..=max_degree)
                .into_par_iter()
                .map(|n| {
                    let slice = ideal_slice(ctx, rhos, n, budget)?;
                    let rank = slice.rank(ctx, budget)?;
                    Ok((slice.basis.len() - rank) as i64)
                })
                .collect();
            Ok(IntSeries::new(dims?))
        }
    }
}

/// Incremental computation of `B = A/ℛ` by degree.
///
/// Every monomial of positive degree is `X_i u`, so `A_n = ⊕_i X_i A_{n−τ_i}`
/// and `ℛ_n = Σ_i X_i ℛ_{n−τ_i} + Σ_j ρ_j A_{n−σ_j}`. Hence
/// `B_n = V_n / W_n` with `V_n = ⊕_i X_i ⊗ B_{n−τ_i}` and `W_n` spanned by
/// the images of `ρ_j β` for `β` running over a basis of `B_{n−σ_j}`.
/// Nonzero `(column, coefficient)` pairs.
type SparseVector = Vec<(usize, u32)>;

/// The basis of `B_n` is the set of non-pivot columns of `W_n`, i.e. the
/// normal words `X_i · (normal word of degree n − τ_i)`.
pub struct NormalForms<'a> {
    ctx: &'a Arc<Context>,
    rhos: &'a [Poly],
    sigmas: Vec<u32>,
    budget: Budget,
    degrees: Vec<DegreeData>,
    memo: Vec<HashMap<Vec<u8>, SparseVector>>,
    /// Rows spanning `W_n` (`Σ_j dim B_{n−σ_j}`), per degree.
    row_counts: Vec<i64>,
}

struct DegreeData {
    /// `offsets[i]` is the first column of the block `X_i ⊗ B_{n−τ_i}`.
    offsets: Vec<usize>,
    echelon: Echelon,
    /// For each column of `V_n`, its index in the basis of `B_n`, if free.
    free_index: Vec<Option<usize>>,
    normal_words: Vec<Monomial>,
}

impl<'a> NormalForms<'a> {
    pub fn new(
        ctx: &'a Arc<Context>,
        rhos: &'a [Poly],
        budget: &Budget,
    ) -> Result<Self, FreenessError> {
        let sigmas = relator_degrees(ctx, rhos)?;
        let zero = DegreeData {
            offsets: vec![0; ctx.d()],
            echelon: Echelon::new(ctx.field, 1, budget),
            free_index: vec![Some(0)],
            normal_words: vec![Monomial::one()],
        };
        Ok(Self {
            ctx,
            rhos,
            sigmas,
            budget: *budget,
            degrees: vec![zero],
            memo: vec![HashMap::new()],
            row_counts: vec![0],
        })
    }

    pub fn current_degree(&self) -> u32 {
        (self.degrees.len() - 1) as u32
    }

    pub fn dims(&self) -> Vec<i64> {
        self.degrees
            .iter()
            .map(|d| d.normal_words.len() as i64)
            .collect()
    }

    /// Number of spanning rows used for `W_n`; `rows − rank` is the
    /// coefficient of `t^n` in `B(t)·(1 − Σt^{τ_i} + Σt^{σ_j})`.
    pub fn row_counts(&self) -> &[i64] {
        &self.row_counts
    }

    /// Normal words of degree `n` (a basis of `B_n`).
    pub fn normal_words(&self, n: u32) -> &[Monomial] {
        &self.degrees[n as usize].normal_words
    }

    fn dim(&self, k: i64) -> usize {
        if k < 0 {
            0
        } else {
            self.degrees[k as usize].normal_words.len()
        }
    }

    /// Coordinates of the class of `w` in the basis of `B_{deg w}`.
    /// Requires `deg w` to be already computed.
    pub fn normal_form(&mut self, w: &Monomial) -> Vec<(usize, u32)> {
        let k = w.degree() as usize;
        if k == 0 {
            return vec![(0, 1)];
        }
        if let Some(v) = self.memo[k].get(w.letters()) {
            return v.clone();
        }
        let (b, rest) = w
            .split_first(&self.ctx.weights)
            .expect("positive degree word is nonempty");
        let tail = self.normal_form(&rest);
        let offset = self.degrees[k].offsets[b as usize];
        let entries: Vec<(usize, u32)> = tail.iter().map(|&(t, c)| (offset + t, c)).collect();
        let data = &mut self.degrees[k];
        let reduced = data.echelon.reduce_sparse(&entries);
        let out: Vec<(usize, u32)> = reduced
            .into_iter()
            .map(|(col, c)| {
                (
                    data.free_index[col].expect("reduced vector avoids pivots"),
                    c,
                )
            })
            .collect();
        self.memo[k].insert(w.letters().to_vec(), out.clone());
        out
    }

    /// Computes `B_{n+1}` from the lower degrees.
    pub fn extend(&mut self) -> Result<(), FreenessError> {
        let n = self.degrees.len() as i64;
        let w = self.ctx.weights.clone();
        let d = w.len();
        let mut offsets = Vec::with_capacity(d);
        let mut ncols = 0usize;
        for i in 0..d {
            offsets.push(ncols);
            ncols += self.dim(n - w.weight(i as u8) as i64);
        }
        self.budget.check_entries("quotient block", ncols)?;
        self.degrees.push(DegreeData {
            offsets: offsets.clone(),
            echelon: Echelon::new(self.ctx.field, ncols, &self.budget),
            free_index: Vec::new(),
            normal_words: Vec::new(),
        });
        self.memo.push(HashMap::new());

        let field = self.ctx.field;
        let mut rows = 0i64;
        for j in 0..self.rhos.len() {
            let s = self.sigmas[j] as i64;
            if s > n {
                continue;
            }
            let betas = self.degrees[(n - s) as usize].normal_words.clone();
            let terms: Vec<(Monomial, u32)> =
                self.rhos[j].terms().map(|(m, c)| (m.clone(), c)).collect();
            for beta in &betas {
                rows += 1;
                let mut entries = Vec::new();
                for (m, c) in &terms {
                    let (b, rest) = m.split_first(&w).expect("relators have positive degree");
                    let tail = self.normal_form(&rest.concat(beta));
                    let off = offsets[b as usize];
                    entries.extend(tail.into_iter().map(|(t, a)| (off + t, field.mul(a, *c))));
                }
                let data = self.degrees.last_mut().expect("just pushed");
                if data.echelon.is_full() {
                    continue;
                }
                data.echelon.insert_sparse(&entries)?;
            }
        }

        let data = self.degrees.last_mut().expect("just pushed");
        let mut free_index = vec![None; ncols];
        let mut free_cols = Vec::new();
        for (col, slot) in free_index.iter_mut().enumerate() {
            if !data.echelon.has_pivot(col) {
                *slot = Some(free_cols.len());
                free_cols.push(col);
            }
        }
        data.free_index = free_index;
        let mut normal_words = Vec::with_capacity(free_cols.len());
        for col in free_cols {
            // empty blocks share their offset with the next block
            let i = (0..d)
                .rev()
                .find(|&i| offsets[i] <= col)
                .expect("column lies in some block");
            let t = col - offsets[i];
            let sub = n - w.weight(i as u8) as i64;
            let tail = &self.degrees[sub as usize].normal_words[t];
            let head = Monomial::new(vec![i as u8], &w).expect("letter in range");
            normal_words.push(head.concat(tail));
        }
        self.degrees.last_mut().expect("just pushed").normal_words = normal_words;
        self.row_counts.push(rows);
        Ok(())
    }
}

/// Tests `B(t) = 1/(1 − Σt^{τ_i} + Σt^{σ_j})` up to degree `max_degree`.
pub fn strongly_free_oracle(
    ctx: &Arc<Context>,
    rhos: &[Poly],
    max_degree: u32,
    budget: &Budget,
) -> Result<FreenessVerdict, FreenessError> {
    strongly_free_oracle_with(ctx, rhos, max_degree, budget, HilbertEngine::Recursive)
}

pub fn strongly_free_oracle_with(
    ctx: &Arc<Context>,
    rhos: &[Poly],
    max_degree: u32,
    budget: &Budget,
    engine: HilbertEngine,
) -> Result<FreenessVerdict, FreenessError> {
    let sigmas = relator_degrees(ctx, rhos)?;
    let quotient = quotient_dimensions_with(ctx, rhos, max_degree, budget, engine)?;
    let n = max_degree as usize;
    let rel = IntSeries::relation_polynomial(&ctx.weights, &sigmas, n);
    let product = quotient.mul(&rel);
    let defect = product.sub(&IntSeries::one(n)).expect("equal cutoffs");
    if let Some((degree, coefficient)) = defect.first_negative() {
        return Err(FreenessError::PositivityViolated {
            degree: degree as u32,
            coefficient,
        });
    }
    let target = rel.inverse().expect("constant term is 1");
    let status = match defect.coeffs().iter().position(|&c| c != 0) {
        Some(k) => FreenessStatus::Refuted {
            at_degree: k as u32,
            witness: defect.coeff(k),
        },
        None => FreenessStatus::ConsistentToDegree { degree: max_degree },
    };
    Ok(FreenessVerdict {
        status,
        engine: Engine::Oracle,
        evidence: Evidence::Oracle {
            quotient,
            target,
            defect,
        },
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "status", rename_all = "kebab-case")]
pub enum AdmissibilityStatus {
    AdmissibleTo { degree: u32 },
    Inadmissible { at_degree: u32, coefficient: i64 },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Admissibility {
    pub status: AdmissibilityStatus,
    pub target: IntSeries,
}

/// Expands `1/(1 − Σt^{τ_i} + Σt^{σ_j})` and reports its first negative
/// coefficient; a strongly free sequence of these degrees cannot exist then.
pub fn series_admissibility(weights: &Weights, sigmas: &[u32], max_degree: u32) -> Admissibility {
    let rel = IntSeries::relation_polynomial(weights, sigmas, max_degree as usize);
    let target = rel.inverse().expect("constant term is 1");
    let status = match target.first_negative() {
        Some((k, c)) => AdmissibilityStatus::Inadmissible {
            at_degree: k as u32,
            coefficient: c,
        },
        None => AdmissibilityStatus::AdmissibleTo { degree: max_degree },
    };
    Admissibility { status, target }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::PrimeField;
    use proptest::prelude::*;

    fn ctx(p: u64, tau: Vec<u32>) -> Arc<Context> {
        Context::new(PrimeField::new(p).unwrap(), Weights::new(tau).unwrap())
    }

    fn mono(w: &Weights, idx: &[usize]) -> Monomial {
        Monomial::from_indices(idx, w).unwrap()
    }

    fn commutator(c: &Arc<Context>, i: usize, j: usize) -> Poly {
        Poly::from_index_terms(c, &[(&[i, j], 1), (&[j, i], -1)]).unwrap()
    }

    #[test]
    fn circuit_high_terms_are_free() {
        let w = Weights::uniform(4);
        let rhos = [
            mono(&w, &[2, 1]),
            mono(&w, &[2, 3]),
            mono(&w, &[4, 3]),
            mono(&w, &[4, 1]),
        ];
        assert!(combinatorially_free(&rhos).unwrap().is_free());
    }

    #[test]
    fn duplicates_and_self_overlaps_are_not_free() {
        let w = Weights::uniform(2);
        let dup = [mono(&w, &[1]), mono(&w, &[1])];
        assert!(matches!(
            combinatorially_free(&dup).unwrap(),
            CombinatorialFreeness::NotFree {
                violation: Violation::Submonomial { .. }
            }
        ));
        let selfo = [mono(&w, &[1, 2, 1])];
        assert_eq!(
            combinatorially_free(&selfo).unwrap(),
            CombinatorialFreeness::NotFree {
                violation: Violation::Overlap {
                    prefix_of: 0,
                    suffix_of: 0,
                    length: 1
                }
            }
        );
        assert!(combinatorially_free(&[Monomial::one()]).is_err());
    }

    #[test]
    fn anick_on_circuit_and_single_letter() {
        let c = ctx(3, vec![1, 1, 1, 1]);
        let rhos: Vec<Poly> = [(1, 2), (2, 3), (3, 4), (4, 1)]
            .iter()
            .map(|&(i, j)| commutator(&c, i, j))
            .collect();
        let order = MonomialOrder::deglex(&c.weights, &[1, 3, 2, 4]).unwrap();
        let v = anick_check(&rhos, &order).unwrap();
        assert!(v.is_proven());

        let x1 = Poly::var(&c, 1).unwrap();
        assert!(anick_check(&[x1], &order).unwrap().is_proven());
    }

    #[test]
    fn anick_is_inconclusive_on_weighted_rescue() {
        let c = ctx(2, vec![2, 1]);
        let rho = Poly::from_index_terms(&c, &[(&[1, 1], 1), (&[2, 2, 2, 2], 1)]).unwrap();
        for order in [
            MonomialOrder::natural_deglex(&c.weights),
            MonomialOrder::deglex(&c.weights, &[2, 1]).unwrap(),
        ] {
            let v = anick_check(std::slice::from_ref(&rho), &order).unwrap();
            assert_eq!(v.consistent_degree(), Some(0));
        }
        let mixed = Poly::from_index_terms(&c, &[(&[1], 1), (&[2], 1)]).unwrap();
        let order = MonomialOrder::natural_deglex(&c.weights);
        assert_eq!(
            anick_check(&[mixed], &order).unwrap_err(),
            FreenessError::NotHomogeneous(0)
        );
    }

    #[test]
    fn slice_of_square() {
        let c = ctx(3, vec![1, 1]);
        let rho = Poly::from_index_terms(&c, &[(&[1, 1], 1)]).unwrap();
        let s = ideal_slice(&c, &[rho], 3, &Budget::default()).unwrap();
        // X1^3 arises twice; the duplicate is dropped
        assert_eq!(s.rows.len(), 3);
        assert_eq!(s.rank(&c, &Budget::default()).unwrap(), 3);

        let empty = ideal_slice(&c, &[], 3, &Budget::default()).unwrap();
        assert!(empty.rows.is_empty());

        let lin = Poly::from_index_terms(&c, &[(&[1], 1), (&[2], 1)]).unwrap();
        let s = ideal_slice(&c, &[lin], 1, &Budget::default()).unwrap();
        assert_eq!(s.rank(&c, &Budget::default()).unwrap(), 1);
    }

    #[test]
    fn fibonacci_quotient() {
        let c = ctx(3, vec![1, 1]);
        let rho = Poly::from_index_terms(&c, &[(&[1, 1], 1)]).unwrap();
        for engine in [HilbertEngine::Recursive, HilbertEngine::Slice] {
            let q = quotient_dimensions_with(
                &c,
                std::slice::from_ref(&rho),
                4,
                &Budget::default(),
                engine,
            )
            .unwrap();
            assert_eq!(q.coeffs(), &[1, 2, 3, 5, 8]);
        }
        let v = strongly_free_oracle(&c, &[rho], 5, &Budget::default()).unwrap();
        assert!(v.is_refuted());
    }

    #[test]
    fn free_algebra_quotient() {
        let c = ctx(5, vec![1, 1, 1]);
        let q = quotient_dimensions(&c, &[], 5, &Budget::default()).unwrap();
        assert_eq!(q.coeffs(), &[1, 3, 9, 27, 81, 243]);
        let w = ctx(5, vec![2, 1]);
        let q = quotient_dimensions(&w, &[], 7, &Budget::default()).unwrap();
        let expected: Vec<i64> = word_counts(&w.weights, 7)
            .iter()
            .map(|&x| x as i64)
            .collect();
        assert_eq!(q.coeffs(), expected.as_slice());
    }

    #[test]
    fn circuit_quotient_matches_target() {
        let c = ctx(3, vec![1, 1, 1, 1]);
        let rhos: Vec<Poly> = [(1, 2), (2, 3), (3, 4), (4, 1)]
            .iter()
            .map(|&(i, j)| commutator(&c, i, j))
            .collect();
        let q = quotient_dimensions(&c, &rhos, 8, &Budget::default()).unwrap();
        assert_eq!(q.coeffs(), &[1, 4, 12, 32, 80, 192, 448, 1024, 2304]);
        let direct =
            quotient_dimensions_with(&c, &rhos, 6, &Budget::default(), HilbertEngine::Slice)
                .unwrap();
        assert_eq!(direct, q.truncate(6));
    }

    #[test]
    fn triangle_is_refuted() {
        let c = ctx(3, vec![1, 1, 1]);
        let rhos: Vec<Poly> = [(1, 2), (2, 3), (3, 1)]
            .iter()
            .map(|&(i, j)| commutator(&c, i, j))
            .collect();
        let v = strongly_free_oracle(&c, &rhos, 6, &Budget::default()).unwrap();
        // the quotient is the commutative polynomial ring: 1, 3, 6, 10, …
        match &v.evidence {
            Evidence::Oracle { quotient, .. } => {
                assert_eq!(quotient.coeffs(), &[1, 3, 6, 10, 15, 21, 28])
            }
            other => panic!("{other:?}"),
        }
        assert_eq!(
            v.status,
            FreenessStatus::Refuted {
                at_degree: 3,
                witness: 1
            }
        );
    }

    #[test]
    fn weighted_rescue_oracle() {
        let c = ctx(2, vec![2, 1]);
        let rho = Poly::from_index_terms(&c, &[(&[1, 1], 1), (&[2, 2, 2, 2], 1)]).unwrap();
        let v = strongly_free_oracle(&c, &[rho], 12, &Budget::default()).unwrap();
        assert_eq!(v.consistent_degree(), Some(12));
    }

    #[test]
    fn admissibility() {
        let a = series_admissibility(&Weights::uniform(3), &[2, 2, 2], 6);
        assert_eq!(
            a.status,
            AdmissibilityStatus::Inadmissible {
                at_degree: 6,
                coefficient: -27
            }
        );
        let a = series_admissibility(&Weights::uniform(4), &[2, 2, 2, 2], 10);
        assert_eq!(a.status, AdmissibilityStatus::AdmissibleTo { degree: 10 });
        assert_eq!(a.target.coeff(8), 2304);
        let a = series_admissibility(&Weights::uniform(1), &[], 5);
        assert_eq!(a.target.coeffs(), &[1; 6]);
    }

    #[test]
    fn budget_errors_are_reported() {
        let c = ctx(3, vec![1, 1, 1]);
        let tiny = Budget::default().with_matrix_entries(10);
        let rho = commutator(&c, 1, 2);
        assert!(matches!(
            quotient_dimensions(&c, &[rho], 6, &tiny),
            Err(FreenessError::Budget(_))
        ));
    }

    fn arb_monomials() -> impl Strategy<Value = Vec<Vec<u8>>> {
        prop::collection::vec(prop::collection::vec(0u8..3, 1..4), 1..4)
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn combinatorial_freeness_ignores_sequence_order(ws in arb_monomials(), seed in any::<u64>()) {
            let w = Weights::uniform(3);
            let ms: Vec<Monomial> = ws.into_iter().map(|l| Monomial::new(l, &w).unwrap()).collect();
            let mut shuffled = ms.clone();
            let k = shuffled.len();
            shuffled.rotate_left((seed as usize) % k);
            if seed % 2 == 0 {
                shuffled.reverse();
            }
            prop_assert_eq!(
                combinatorially_free(&ms).unwrap().is_free(),
                combinatorially_free(&shuffled).unwrap().is_free()
            );
        }

        #[test]
        fn engines_agree_and_defect_is_nonnegative(
            terms in prop::collection::vec(prop::collection::vec((prop::collection::vec(0u8..2, 2), 1i64..3), 1..3), 1..3)
        ) {
            let c = ctx(3, vec![1, 1]);
            let rhos: Vec<Poly> = terms
                .into_iter()
                .map(|t| Poly::from_terms(&c, t.into_iter().map(|(l, k)| (Monomial::new(l, &c.weights).unwrap(), k))))
                .filter(|r| !r.is_zero())
                .collect();
            let b = Budget::default();
            let rec = quotient_dimensions(&c, &rhos, 6, &b).unwrap();
            let dir = quotient_dimensions_with(&c, &rhos, 6, &b, HilbertEngine::Slice).unwrap();
            prop_assert_eq!(&rec, &dir);
            prop_assert!(strongly_free_oracle_with(&c, &rhos, 6, &b, HilbertEngine::Slice).is_ok());
        }
    }
}
