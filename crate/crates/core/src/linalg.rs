//! Row reduction over F_p.
//!
//! [`Echelon`] keeps an echelon basis with sparse rows and reduces vectors
//! against it; that is all the Hilbert-series code needs. The small dense helpers ([`rref`], [`kernel_basis`]) serve the
//! Massey-side matrices, which have at most a few hundred entries.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use thiserror::Error;

use crate::algebra::PrimeField;

/// Default cap on stored matrix entries.
pub const DEFAULT_MATRIX_ENTRIES: usize = 2_000_000;
/// Default cap on enumerated candidates (characters, decompositions).
pub const DEFAULT_ENUMERATION: usize = 1_000_000;

/// Resource limits shared by every elimination and search.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Budget {
    pub matrix_entries: usize,
    pub enumeration: usize,
}

impl Default for Budget {
    fn default() -> Self {
        Self {
            matrix_entries: DEFAULT_MATRIX_ENTRIES,
            enumeration: DEFAULT_ENUMERATION,
        }
    }
}

impl Budget {
    /// The default budget with `MILDKIT_BUDGET` (if set and numeric) as the
    /// matrix-entry cap.
    pub fn from_env() -> Self {
        let mut b = Self::default();
        if let Some(n) = std::env::var("MILDKIT_BUDGET")
            .ok()
            .and_then(|s| s.trim().parse::<usize>().ok())
        {
            b.matrix_entries = n;
        }
        b
    }

    pub fn with_matrix_entries(mut self, n: usize) -> Self {
        self.matrix_entries = n;
        self
    }

    pub fn check_entries(&self, what: &str, needed: usize) -> Result<(), BudgetExceeded> {
        if needed > self.matrix_entries {
            Err(BudgetExceeded::new(what, needed, self.matrix_entries))
        } else {
            Ok(())
        }
    }

    pub fn check_enumeration(&self, what: &str, needed: usize) -> Result<(), BudgetExceeded> {
        if needed > self.enumeration {
            Err(BudgetExceeded::new(what, needed, self.enumeration))
        } else {
            Ok(())
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("{what} needs {needed} entries but the budget is {budget}; raise budget or lower N")]
pub struct BudgetExceeded {
    pub what: String,
    pub needed: usize,
    pub budget: usize,
}

impl BudgetExceeded {
    pub fn new(what: &str, needed: usize, budget: usize) -> Self {
        Self {
            what: what.to_string(),
            needed,
            budget,
        }
    }
}

#[derive(Clone, Debug)]
struct SparseRow {
    cols: Vec<u32>,
    vals: Vec<u32>,
}

const NO_PIVOT: u32 = u32::MAX;

/// An echelon basis of a subspace of `F_p^ncols`. Every stored row has a
/// leading 1 in a column no other row leads in.
///
/// Reduction walks only the columns that actually become nonzero, so the
/// cost is proportional to fill-in rather than to `ncols`.
#[derive(Clone, Debug)]
pub struct Echelon {
    field: PrimeField,
    ncols: usize,
    rows: Vec<SparseRow>,
    pivot_row: Vec<u32>,
    stored: usize,
    limit: usize,
    scratch: Vec<u32>,
    queued: Vec<bool>,
}

impl Echelon {
    pub fn new(field: PrimeField, ncols: usize, budget: &Budget) -> Self {
        Self {
            field,
            ncols,
            rows: Vec::new(),
            pivot_row: vec![NO_PIVOT; ncols],
            stored: 0,
            limit: budget.matrix_entries,
            scratch: vec![0; ncols],
            queued: vec![false; ncols],
        }
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    pub fn is_full(&self) -> bool {
        self.rows.len() == self.ncols
    }

    /// Number of stored nonzero entries.
    pub fn stored_entries(&self) -> usize {
        self.stored
    }

    pub fn has_pivot(&self, col: usize) -> bool {
        self.pivot_row[col] != NO_PIVOT
    }

    /// Reduces a sparse vector against the basis. The result has no entry in
    /// any pivot column and is sorted by column.
    pub fn reduce_sparse(&mut self, entries: &[(usize, u32)]) -> Vec<(usize, u32)> {
        let f = self.field;
        let mut heap = BinaryHeap::new();
        for &(c, a) in entries {
            let a = a % f.modulus();
            if a == 0 {
                continue;
            }
            self.scratch[c] = f.add(self.scratch[c], a);
            if !self.queued[c] {
                self.queued[c] = true;
                heap.push(Reverse(c as u32));
            }
        }
        let mut out = Vec::new();
        while let Some(Reverse(c)) = heap.pop() {
            let c = c as usize;
            self.queued[c] = false;
            let a = std::mem::take(&mut self.scratch[c]);
            if a == 0 {
                continue;
            }
            let r = self.pivot_row[c];
            if r == NO_PIVOT {
                out.push((c, a));
                continue;
            }
            let neg = f.neg(a);
            let row = &self.rows[r as usize];
            for (&col, &val) in row.cols.iter().zip(&row.vals).skip(1) {
                let col = col as usize;
                self.scratch[col] = f.add(self.scratch[col], f.mul(neg, val));
                if !self.queued[col] {
                    self.queued[col] = true;
                    heap.push(Reverse(col as u32));
                }
            }
        }
        out
    }

    /// Reduces a dense vector in place, returning the first surviving column.
    pub fn reduce(&mut self, v: &mut [u32]) -> Option<usize> {
        debug_assert_eq!(v.len(), self.ncols);
        let entries: Vec<(usize, u32)> = v
            .iter()
            .enumerate()
            .filter(|(_, &a)| a != 0)
            .map(|(c, &a)| (c, a))
            .collect();
        v.iter_mut().for_each(|x| *x = 0);
        let out = self.reduce_sparse(&entries);
        for &(c, a) in &out {
            v[c] = a;
        }
        out.first().map(|&(c, _)| c)
    }

    /// Reduces a sparse vector and, if something survives, adds it to the
    /// basis. Returns the new pivot column, or `None` if it was in the span.
    pub fn insert_sparse(
        &mut self,
        entries: &[(usize, u32)],
    ) -> Result<Option<usize>, BudgetExceeded> {
        let reduced = self.reduce_sparse(entries);
        let Some(&(lead, lead_val)) = reduced.first() else {
            return Ok(None);
        };
        let needed = self.stored + reduced.len();
        if needed > self.limit {
            return Err(BudgetExceeded::new("row reduction", needed, self.limit));
        }
        let f = self.field;
        let inv = f.inv(lead_val).expect("leading entry is nonzero");
        let cols = reduced.iter().map(|&(c, _)| c as u32).collect();
        let vals = reduced.iter().map(|&(_, a)| f.mul(a, inv)).collect();
        self.stored = needed;
        self.pivot_row[lead] = self.rows.len() as u32;
        self.rows.push(SparseRow { cols, vals });
        Ok(Some(lead))
    }

    /// Dense form of [`Echelon::insert_sparse`].
    pub fn insert(&mut self, v: Vec<u32>) -> Result<Option<usize>, BudgetExceeded> {
        let entries: Vec<(usize, u32)> = v
            .iter()
            .enumerate()
            .filter(|(_, &a)| a != 0)
            .map(|(c, &a)| (c, a))
            .collect();
        self.insert_sparse(&entries)
    }
}

/// Outcome of expressing a target vector in the span of given generators.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SpanSolution {
    /// Coordinates `a_g` with `Σ a_g · gen_g = target`.
    InSpan(Vec<u32>),
    /// The target reduced to this nonzero vector modulo the span.
    Residual(Vec<u32>),
}

/// Solves `Σ a_g · generators[g] = target` over F_p.
pub fn express_in_span(
    field: PrimeField,
    generators: &[Vec<u32>],
    target: &[u32],
    budget: &Budget,
) -> Result<SpanSolution, BudgetExceeded> {
    let ncols = target.len();
    let k = generators.len();
    budget.check_entries("span solve", ncols.saturating_mul(k + 1))?;
    // Echelon rows, each with the combination of generators it equals.
    let mut rows: Vec<(Vec<u32>, Vec<u32>)> = Vec::new();
    let mut pivot_of: Vec<Option<usize>> = vec![None; ncols];
    let f = field;
    let reduce = |v: &mut Vec<u32>,
                  combo: &mut Vec<u32>,
                  rows: &[(Vec<u32>, Vec<u32>)],
                  pivot_of: &[Option<usize>]|
     -> Option<usize> {
        let mut first = None;
        for c in 0..ncols {
            if v[c] == 0 {
                continue;
            }
            match pivot_of[c] {
                Some(r) => {
                    let neg = f.neg(v[c]);
                    let (row, rc) = &rows[r];
                    for j in c..ncols {
                        if row[j] != 0 {
                            v[j] = f.add(v[j], f.mul(neg, row[j]));
                        }
                    }
                    for g in 0..k {
                        if rc[g] != 0 {
                            combo[g] = f.add(combo[g], f.mul(neg, rc[g]));
                        }
                    }
                }
                None => {
                    if first.is_none() {
                        first = Some(c);
                    }
                }
            }
        }
        first
    };
    for (g, gen) in generators.iter().enumerate() {
        assert_eq!(gen.len(), ncols, "generator length mismatch");
        let mut v = gen.clone();
        let mut combo = vec![0u32; k];
        combo[g] = 1;
        if let Some(lead) = reduce(&mut v, &mut combo, &rows, &pivot_of) {
            let inv = f.inv(v[lead]).expect("nonzero lead");
            for x in v.iter_mut() {
                *x = f.mul(*x, inv);
            }
            for x in combo.iter_mut() {
                *x = f.mul(*x, inv);
            }
            pivot_of[lead] = Some(rows.len());
            rows.push((v, combo));
        }
    }
    // t − Σ a_r row_r = residual, tracked as combo = −Σ a_r combo_r
    let mut v = target.to_vec();
    let mut combo = vec![0u32; k];
    if reduce(&mut v, &mut combo, &rows, &pivot_of).is_some() {
        return Ok(SpanSolution::Residual(v));
    }
    Ok(SpanSolution::InSpan(
        combo.into_iter().map(|c| f.neg(c)).collect(),
    ))
}

/// Brings a dense matrix to reduced row echelon form in place, dropping zero
/// rows. Returns the pivot column of each remaining row.
pub fn rref(field: PrimeField, m: &mut Vec<Vec<u32>>) -> Vec<usize> {
    let f = field;
    let ncols = m.first().map_or(0, Vec::len);
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..ncols {
        let Some(sel) = (r..m.len()).find(|&i| m[i][c] != 0) else {
            continue;
        };
        m.swap(r, sel);
        let inv = f.inv(m[r][c]).expect("nonzero pivot");
        for x in m[r].iter_mut() {
            *x = f.mul(*x, inv);
        }
        let pivot_row = m[r].clone();
        for (i, row) in m.iter_mut().enumerate() {
            if i == r || row[c] == 0 {
                continue;
            }
            let neg = f.neg(row[c]);
            for (x, &y) in row.iter_mut().zip(&pivot_row) {
                *x = f.add(*x, f.mul(neg, y));
            }
        }
        pivots.push(c);
        r += 1;
        if r == m.len() {
            break;
        }
    }
    m.truncate(r);
    pivots
}

pub fn rank(field: PrimeField, m: &[Vec<u32>]) -> usize {
    let mut copy = m.to_vec();
    rref(field, &mut copy).len()
}

/// A basis of `{x : M x = 0}` for an `rows × ncols` matrix.
pub fn kernel_basis(field: PrimeField, m: &[Vec<u32>], ncols: usize) -> Vec<Vec<u32>> {
    let f = field;
    let mut red = m.to_vec();
    let pivots = rref(f, &mut red);
    let mut out = Vec::new();
    for free in (0..ncols).filter(|c| !pivots.contains(c)) {
        let mut x = vec![0u32; ncols];
        x[free] = 1;
        for (row, &pc) in red.iter().zip(&pivots) {
            x[pc] = f.neg(row[free]);
        }
        out.push(x);
    }
    out
}

/// `M v` for a dense matrix given by rows.
pub fn mat_vec(field: PrimeField, m: &[Vec<u32>], v: &[u32]) -> Vec<u32> {
    m.iter()
        .map(|row| {
            row.iter()
                .zip(v)
                .fold(0, |acc, (&a, &b)| field.add(acc, field.mul(a, b)))
        })
        .collect()
}
