//! Hall bases of free and free restricted Lie algebras inside `F_p⟨X⟩`.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::algebra::{Context, Monomial, Poly, Valuation, Weights};
use crate::linalg::{express_in_span, Budget, BudgetExceeded, SpanSolution};

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum LieError {
    #[error("polynomial is not homogeneous")]
    NotHomogeneous,
    #[error("polynomial has τ-degree {found}, expected {expected}")]
    DegreeMismatch { expected: u32, found: u32 },
    #[error("not in the restricted Lie algebra; residual {residual}")]
    NotRestrictedLie { residual: String },
    #[error(transparent)]
    Budget(#[from] BudgetExceeded),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum HallTree {
    /// `X_{i+1}`.
    Leaf(u8),
    Bracket(Arc<HallElement>, Arc<HallElement>),
}

/// A Hall commutator. `rank` is `(weight, position within the weight)`
/// and realizes the Hall order for a fixed generator count.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct HallElement {
    pub tree: HallTree,
    pub weight: u32,
    pub tau_degree: u32,
    rank: (u32, u32),
}

impl HallElement {
    pub fn is_leaf(&self) -> bool {
        matches!(self.tree, HallTree::Leaf(_))
    }

    pub fn children(&self) -> Option<(&HallElement, &HallElement)> {
        match &self.tree {
            HallTree::Leaf(_) => None,
            HallTree::Bracket(a, b) => Some((a, b)),
        }
    }

    /// Leaves from left to right, 0-based.
    pub fn leaves(&self) -> Vec<u8> {
        match &self.tree {
            HallTree::Leaf(i) => vec![*i],
            HallTree::Bracket(a, b) => {
                let mut v = a.leaves();
                v.extend(b.leaves());
                v
            }
        }
    }

    pub fn display_with(&self, names: &[String]) -> String {
        match &self.tree {
            HallTree::Leaf(i) => names
                .get(*i as usize)
                .cloned()
                .unwrap_or_else(|| format!("X{}", i + 1)),
            HallTree::Bracket(a, b) => {
                format!("[{},{}]", a.display_with(names), b.display_with(names))
            }
        }
    }
}

impl PartialOrd for HallElement {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for HallElement {
    fn cmp(&self, other: &Self) -> Ordering {
        self.rank.cmp(&other.rank)
    }
}

impl fmt::Display for HallElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.display_with(&[]))
    }
}

impl Serialize for HallElement {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

/// `(base)^{p^j}`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct RestrictedBasisElement {
    pub base: HallElement,
    pub p_power: u32,
    p: u32,
}

impl RestrictedBasisElement {
    pub fn exponent(&self) -> u64 {
        (self.p as u64).pow(self.p_power)
    }

    pub fn tau_degree(&self) -> u32 {
        self.base.tau_degree * self.exponent() as u32
    }

    pub fn display_with(&self, names: &[String]) -> String {
        let b = self.base.display_with(names);
        if self.p_power == 0 {
            b
        } else {
            format!("{b}^{}", self.exponent())
        }
    }
}

impl fmt::Display for RestrictedBasisElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.display_with(&[]))
    }
}

impl Serialize for RestrictedBasisElement {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

/// Hall commutators on `d` letters, generated weight by weight.
#[derive(Clone, Debug)]
pub struct HallBasis {
    weights: Weights,
    /// `levels[w - 1]` holds weight `w` in ascending Hall order.
    levels: Vec<Vec<Arc<HallElement>>>,
}

impl HallBasis {
    pub fn new(weights: Weights) -> Self {
        let d = weights.len();
        let level1 = (0..d)
            .rev()
            .enumerate()
            .map(|(pos, i)| {
                Arc::new(HallElement {
                    tree: HallTree::Leaf(i as u8),
                    weight: 1,
                    tau_degree: weights.weight(i as u8),
                    rank: (1, pos as u32),
                })
            })
            .collect();
        Self {
            weights,
            levels: vec![level1],
        }
    }

    pub fn d(&self) -> usize {
        self.weights.len()
    }

    fn extend_to(&mut self, n: u32, budget: &Budget) -> Result<(), BudgetExceeded> {
        while (self.levels.len() as u32) < n {
            let w = self.levels.len() as u32 + 1;
            let mut cand: Vec<(Arc<HallElement>, Arc<HallElement>)> = Vec::new();
            for n1 in 1..w {
                let n2 = w - n1;
                for c1 in &self.levels[n1 as usize - 1] {
                    for c2 in &self.levels[n2 as usize - 1] {
                        if c1.rank <= c2.rank {
                            continue;
                        }
                        if let Some((_, c4)) = c1.children() {
                            if c2.rank < c4.rank {
                                continue;
                            }
                        }
                        cand.push((c1.clone(), c2.clone()));
                        budget.check_enumeration("Hall basis", cand.len())?;
                    }
                }
            }
            cand.sort_by_key(|a| (a.0.rank, a.1.rank));
            let level = cand
                .into_iter()
                .enumerate()
                .map(|(pos, (a, b))| {
                    Arc::new(HallElement {
                        weight: w,
                        tau_degree: a.tau_degree + b.tau_degree,
                        rank: (w, pos as u32),
                        tree: HallTree::Bracket(a, b),
                    })
                })
                .collect();
            self.levels.push(level);
        }
        Ok(())
    }

    /// `C_n` (leaf count `n`) in descending Hall order.
    pub fn of_weight(
        &mut self,
        n: u32,
        budget: &Budget,
    ) -> Result<Vec<HallElement>, BudgetExceeded> {
        if n == 0 {
            return Ok(Vec::new());
        }
        self.extend_to(n, budget)?;
        Ok(self.levels[n as usize - 1]
            .iter()
            .rev()
            .map(|e| (**e).clone())
            .collect())
    }

    /// `C^τ_n`: Hall commutators of τ-degree `n`, descending Hall order.
    pub fn of_tau_degree(
        &mut self,
        n: u32,
        budget: &Budget,
    ) -> Result<Vec<HallElement>, BudgetExceeded> {
        if n == 0 {
            return Ok(Vec::new());
        }
        let max_weight = n / self.weights.min_weight();
        self.extend_to(max_weight, budget)?;
        let mut out = Vec::new();
        for level in self.levels[..max_weight as usize].iter().rev() {
            out.extend(
                level
                    .iter()
                    .rev()
                    .filter(|e| e.tau_degree == n)
                    .map(|e| (**e).clone()),
            );
        }
        Ok(out)
    }

    /// `C̄^τ_n`: pure commutators first, then `(c)^{p^j}` for increasing `j`.
    pub fn restricted(
        &mut self,
        n: u32,
        p: u32,
        budget: &Budget,
    ) -> Result<Vec<RestrictedBasisElement>, BudgetExceeded> {
        let mut out = Vec::new();
        let mut q = 1u32;
        let mut j = 0u32;
        while q <= n {
            if n.is_multiple_of(q) {
                for base in self.of_tau_degree(n / q, budget)? {
                    out.push(RestrictedBasisElement {
                        base,
                        p_power: j,
                        p,
                    });
                }
            }
            match q.checked_mul(p) {
                Some(next) => q = next,
                None => break,
            }
            j += 1;
        }
        Ok(out)
    }
}

/// `C_n` under the standard grading, descending Hall order.
pub fn hall_basis(d: usize, n: u32) -> Vec<HallElement> {
    HallBasis::new(Weights::uniform(d))
        .of_weight(
            n,
            &Budget {
                enumeration: usize::MAX,
                ..Budget::default()
            },
        )
        .expect("unbounded enumeration")
}

/// `C̄^τ_n`.
pub fn restricted_basis(
    weights: &Weights,
    n: u32,
    p: u32,
    budget: &Budget,
) -> Result<Vec<RestrictedBasisElement>, LieError> {
    Ok(HallBasis::new(weights.clone()).restricted(n, p, budget)?)
}

/// `[a, b] ↦ ab − ba`.
pub fn expand_hall(ctx: &Arc<Context>, e: &HallElement) -> Poly {
    match &e.tree {
        HallTree::Leaf(i) => Poly::var(ctx, *i as usize + 1).expect("leaf within context"),
        HallTree::Bracket(a, b) => {
            let ea = expand_hall(ctx, a);
            let eb = expand_hall(ctx, b);
            &(&ea * &eb) - &(&eb * &ea)
        }
    }
}

/// The associative image, with the p-power taken in `F_p⟨X⟩`.
pub fn expand_to_assoc(ctx: &Arc<Context>, e: &RestrictedBasisElement) -> Poly {
    let mut out = expand_hall(ctx, &e.base);
    for _ in 0..e.p_power {
        let base = out.clone();
        for _ in 1..e.p {
            out = &out * &base;
        }
    }
    out
}

fn check_homogeneous(f: &Poly, n: u32) -> Result<(), LieError> {
    if !f.is_homogeneous() {
        return Err(LieError::NotHomogeneous);
    }
    match f.tau_valuation() {
        Valuation::Finite(found) if found != n => {
            Err(LieError::DegreeMismatch { expected: n, found })
        }
        _ => Ok(()),
    }
}

/// Outcome of solving `f = Σ a_g · image(g)` over a basis.
struct Solve {
    coords: Option<Vec<u32>>,
    residual: Poly,
}

fn solve_over(
    ctx: &Arc<Context>,
    images: &[Poly],
    f: &Poly,
    budget: &Budget,
) -> Result<Solve, LieError> {
    let mut cols: HashMap<Monomial, usize> = HashMap::new();
    let mut order: Vec<Monomial> = Vec::new();
    for poly in images.iter().chain(std::iter::once(f)) {
        for (m, _) in poly.terms() {
            cols.entry(m.clone()).or_insert_with(|| {
                order.push(m.clone());
                order.len() - 1
            });
        }
    }
    budget.check_entries(
        "Lie membership solve",
        order.len().saturating_mul(images.len() + 1),
    )?;
    let dense = |poly: &Poly| {
        let mut v = vec![0u32; order.len()];
        for (m, c) in poly.terms() {
            v[cols[m]] = c;
        }
        v
    };
    let gens: Vec<Vec<u32>> = images.iter().map(dense).collect();
    match express_in_span(ctx.field, &gens, &dense(f), budget)? {
        SpanSolution::InSpan(coords) => Ok(Solve {
            coords: Some(coords),
            residual: Poly::zero(ctx),
        }),
        SpanSolution::Residual(v) => Ok(Solve {
            coords: None,
            residual: Poly::from_terms(
                ctx,
                v.into_iter()
                    .enumerate()
                    .filter(|(_, c)| *c != 0)
                    .map(|(i, c)| (order[i].clone(), c as i64)),
            ),
        }),
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "member", rename_all = "kebab-case")]
pub enum LieMembership {
    /// Nonzero coordinates over `C^τ_n`.
    Yes {
        coordinates: Vec<(HallElement, u32)>,
    },
    No,
}

impl LieMembership {
    pub fn is_member(&self) -> bool {
        matches!(self, LieMembership::Yes { .. })
    }
}

/// Decides whether a homogeneous `f` of τ-degree `n` lies in `L(X)`.
pub fn lie_membership(f: &Poly, n: u32, budget: &Budget) -> Result<LieMembership, LieError> {
    check_homogeneous(f, n)?;
    let ctx = f.ctx();
    let basis = HallBasis::new(ctx.weights.clone()).of_tau_degree(n, budget)?;
    let images: Vec<Poly> = basis.iter().map(|e| expand_hall(ctx, e)).collect();
    let s = solve_over(ctx, &images, f, budget)?;
    Ok(match s.coords {
        Some(c) => LieMembership::Yes {
            coordinates: basis.into_iter().zip(c).filter(|(_, a)| *a != 0).collect(),
        },
        None => LieMembership::No,
    })
}

/// Coordinates of `f` over `C̄^τ_n`, split into p-power and commutator parts.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PowerCommutatorSplit {
    pub power_part: Vec<(RestrictedBasisElement, u32)>,
    pub lie_part: Vec<(HallElement, u32)>,
}

impl PowerCommutatorSplit {
    pub fn is_lie(&self) -> bool {
        self.power_part.is_empty()
    }
}

pub fn p_power_commutator_split(
    f: &Poly,
    n: u32,
    budget: &Budget,
) -> Result<PowerCommutatorSplit, LieError> {
    check_homogeneous(f, n)?;
    let ctx = f.ctx();
    let basis = restricted_basis(&ctx.weights, n, ctx.p(), budget)?;
    let images: Vec<Poly> = basis.iter().map(|e| expand_to_assoc(ctx, e)).collect();
    let s = solve_over(ctx, &images, f, budget)?;
    let coords = s.coords.ok_or_else(|| LieError::NotRestrictedLie {
        residual: s.residual.to_string(),
    })?;
    let mut split = PowerCommutatorSplit {
        power_part: Vec::new(),
        lie_part: Vec::new(),
    };
    for (e, a) in basis.into_iter().zip(coords) {
        if a == 0 {
            continue;
        }
        if e.p_power == 0 {
            split.lie_part.push((e.base, a));
        } else {
            split.power_part.push((e, a));
        }
    }
    Ok(split)
}
