//! Massey products read off Magnus coefficients, and the mildness tests
//! built on them.
//!
//! Tensors store the raw coefficients `ε_{I,p}(r_j)`. The sign
//! `(−1)^{n−1}` relating them to `tr_{r_j} ⟨χ_I⟩_n` is applied only in
//! [`massey_value`].

use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::algebra::{Context, Monomial, Poly, PrimeField, Weights};
use crate::freeness::{
    anick_check, combinatorially_free, CombinatorialFreeness, FreenessError, FreenessVerdict,
};
use crate::lie::{lie_membership, p_power_commutator_split, LieError, PowerCommutatorSplit};
use crate::linalg::{self, Budget, BudgetExceeded};
use crate::magnus::{expand, initial_form, MagnusError, Omega, Presentation};
use crate::orders::MonomialOrder;

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum MasseyError {
    #[error("all relators are trivial up to degree {cutoff}; the Zassenhaus invariant is unknown, increase the cutoff")]
    ZassenhausUnknown { cutoff: u32 },
    #[error("{n}-fold Massey products are not uniquely defined: z(G) = {z}")]
    BeyondZassenhaus { n: u32, z: u32 },
    #[error("cutoff {cutoff} is below the tensor order {n}")]
    CutoffTooSmall { n: u32, cutoff: u32 },
    #[error("expected {expected} entries, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("invalid decomposition: {0}")]
    InvalidDecomposition(String),
    #[error("expected exactly one relator, found {found}")]
    RelatorCount { found: usize },
    #[error("not of Demuškin type: the pairing vanishes at χ = {chi:?}")]
    NotDemuskinType { chi: Vec<u32> },
    #[error("one generator and z(G) = {n}, which is not a power of {p}")]
    InconsistentFinite { n: u32, p: u32 },
    #[error("certificate check failed: {0}")]
    CertificateFailed(String),
    #[error(transparent)]
    Magnus(#[from] MagnusError),
    #[error(transparent)]
    Lie(#[from] LieError),
    #[error(transparent)]
    Freeness(#[from] FreenessError),
    #[error(transparent)]
    Budget(#[from] BudgetExceeded),
}

impl MasseyError {
    /// Budget and precision failures, which a larger limit may fix.
    pub fn is_resource(&self) -> bool {
        matches!(
            self,
            MasseyError::ZassenhausUnknown { .. }
                | MasseyError::Budget(_)
                | MasseyError::Magnus(MagnusError::PrecisionExceeded { .. })
                | MasseyError::Lie(LieError::Budget(_))
                | MasseyError::Freeness(FreenessError::Budget(_))
        )
    }

    /// Failures that indicate a bug rather than bad input.
    pub fn is_internal(&self) -> bool {
        matches!(
            self,
            MasseyError::CertificateFailed(_)
                | MasseyError::Freeness(FreenessError::PositivityViolated { .. })
        )
    }
}

/// `z(G)`, the depth of the relators in the Zassenhaus filtration.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", content = "value", rename_all = "kebab-case")]
pub enum Zassenhaus {
    Exact(u32),
    /// Every relator is trivial up to this degree.
    Unknown(u32),
    /// No relators: the group is free.
    Infinite,
}

impl fmt::Display for Zassenhaus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Zassenhaus::Exact(n) => write!(f, "{n}"),
            Zassenhaus::Unknown(c) => write!(f, ">{c}"),
            Zassenhaus::Infinite => write!(f, "infinite"),
        }
    }
}

pub fn zassenhaus_invariant(p: &Presentation, cutoff: u32) -> Result<Zassenhaus, MasseyError> {
    if p.m() == 0 {
        return Ok(Zassenhaus::Infinite);
    }
    let ctx = p.uniform_context();
    let mut best: Option<u32> = None;
    for r in p.relators() {
        if let Omega::Exact(n) = crate::magnus::omega_tau(&r.word, &ctx, cutoff)? {
            best = Some(best.map_or(n, |b| b.min(n)));
        }
    }
    Ok(best.map_or(Zassenhaus::Unknown(cutoff), Zassenhaus::Exact))
}

fn exact_z(p: &Presentation, cutoff: u32) -> Result<u32, MasseyError> {
    match zassenhaus_invariant(p, cutoff)? {
        Zassenhaus::Exact(n) => Ok(n),
        _ => Err(MasseyError::ZassenhausUnknown { cutoff }),
    }
}

/// `values[j][I] = ε_{I,p}(r_j)` for all `I` of length `n`. Multi-indices
/// are stored big-endian: the first index is the most significant digit.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MasseyTensor {
    field: PrimeField,
    d: usize,
    n: u32,
    values: Vec<Vec<u32>>,
}

/// One nonzero entry, with 1-based indices.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TensorEntry {
    pub relator: usize,
    pub index: Vec<usize>,
    pub value: u32,
}

impl MasseyTensor {
    pub fn from_values(
        field: PrimeField,
        d: usize,
        n: u32,
        values: Vec<Vec<u32>>,
    ) -> Result<Self, MasseyError> {
        let len = d.pow(n);
        for row in &values {
            if row.len() != len {
                return Err(MasseyError::DimensionMismatch {
                    expected: len,
                    got: row.len(),
                });
            }
        }
        Ok(Self {
            field,
            d,
            n,
            values,
        })
    }

    pub fn field(&self) -> PrimeField {
        self.field
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn m(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[Vec<u32>] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.d.pow(self.n)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Flat position of a 0-based multi-index.
    pub fn flat(&self, idx: &[usize]) -> usize {
        idx.iter().fold(0, |acc, &i| acc * self.d + i)
    }

    /// 0-based multi-index at a flat position.
    pub fn tuple(&self, mut flat: usize) -> Vec<usize> {
        let mut out = vec![0; self.n as usize];
        for slot in out.iter_mut().rev() {
            *slot = flat % self.d;
            flat /= self.d;
        }
        out
    }

    /// Raw `ε` at a 0-based multi-index.
    pub fn get(&self, j: usize, idx: &[usize]) -> u32 {
        self.values[j][self.flat(idx)]
    }

    pub fn set(&mut self, j: usize, idx: &[usize], v: u32) {
        let k = self.flat(idx);
        self.values[j][k] = self.field.reduce(v as i64);
    }

    pub fn nonzero_entries(&self) -> Vec<TensorEntry> {
        let mut out = Vec::new();
        for (j, row) in self.values.iter().enumerate() {
            for (k, &v) in row.iter().enumerate() {
                if v != 0 {
                    out.push(TensorEntry {
                        relator: j + 1,
                        index: self.tuple(k).iter().map(|i| i + 1).collect(),
                        value: v,
                    });
                }
            }
        }
        out
    }

    /// Contracts the first slot against `x`.
    fn contract_first(&self, w: &[u32], x: &[u32]) -> Vec<u32> {
        let f = self.field;
        let stride = w.len() / self.d;
        let mut out = vec![0u32; stride];
        for (i, &xi) in x.iter().enumerate() {
            if xi == 0 {
                continue;
            }
            for (o, &v) in out.iter_mut().zip(&w[i * stride..(i + 1) * stride]) {
                if v != 0 {
                    *o = f.add(*o, f.mul(xi, v));
                }
            }
        }
        out
    }

    /// The tensor in a new basis of `H^1`: column `k` of `basis` holds the
    /// new `χ'_k` in old coordinates.
    pub fn transform(&self, basis: &[Vec<u32>]) -> MasseyTensor {
        let f = self.field;
        let d = self.d;
        let n = self.n as usize;
        let values = self
            .values
            .iter()
            .map(|row| {
                // Rotate slot by slot: each pass replaces the leading index
                // and moves it to the back.
                let mut w = row.clone();
                let stride = w.len() / d;
                for _ in 0..n {
                    let mut next = vec![0u32; w.len()];
                    for rest in 0..stride {
                        for k in 0..d {
                            let mut acc = 0u32;
                            for i in 0..d {
                                let a = basis[i][k];
                                let v = w[i * stride + rest];
                                if a != 0 && v != 0 {
                                    acc = f.add(acc, f.mul(a, v));
                                }
                            }
                            next[rest * d + k] = acc;
                        }
                    }
                    w = next;
                }
                w
            })
            .collect();
        MasseyTensor {
            field: f,
            d,
            n: self.n,
            values,
        }
    }

    /// The degree-`n` forms `Σ_I values[j][I] X_I`.
    pub fn forms(&self, ctx: &Arc<Context>) -> Vec<Poly> {
        self.values
            .iter()
            .map(|row| self.form_of(ctx, row))
            .collect()
    }

    fn form_of(&self, ctx: &Arc<Context>, row: &[u32]) -> Poly {
        Poly::from_terms(
            ctx,
            row.iter()
                .enumerate()
                .filter(|(_, v)| **v != 0)
                .map(|(k, &v)| {
                    let letters = self.tuple(k).into_iter().map(|i| i as u8).collect();
                    (
                        Monomial::new(letters, &ctx.weights).expect("index within d"),
                        v as i64,
                    )
                }),
        )
    }
}

impl Serialize for MasseyTensor {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut s = serializer.serialize_struct("MasseyTensor", 5)?;
        s.serialize_field("p", &self.field.modulus())?;
        s.serialize_field("d", &self.d)?;
        s.serialize_field("n", &self.n)?;
        s.serialize_field("m", &self.m())?;
        s.serialize_field("entries", &self.nonzero_entries())?;
        s.end()
    }
}

/// All `ε_{I,p}(r_j)` with `|I| = n`.
pub fn massey_tensor(
    p: &Presentation,
    n: u32,
    cutoff: u32,
    budget: &Budget,
) -> Result<MasseyTensor, MasseyError> {
    if cutoff < n {
        return Err(MasseyError::CutoffTooSmall { n, cutoff });
    }
    if let Zassenhaus::Exact(z) = zassenhaus_invariant(p, cutoff)? {
        if n > z {
            return Err(MasseyError::BeyondZassenhaus { n, z });
        }
    }
    let d = p.d();
    let len = d
        .checked_pow(n)
        .ok_or_else(|| BudgetExceeded::new("Massey tensor", usize::MAX, budget.matrix_entries))?;
    budget.check_entries("Massey tensor", len.saturating_mul(p.m().max(1)))?;
    let ctx = p.uniform_context();
    let mut tensor = MasseyTensor {
        field: p.field(),
        d,
        n,
        values: vec![vec![0; len]; p.m()],
    };
    for (j, r) in p.relators().iter().enumerate() {
        let e = expand(&r.word, &ctx, n)?.poly.homogeneous_component(n);
        for (m, c) in e.terms() {
            let idx: Vec<usize> = m.letters().iter().map(|&l| l as usize).collect();
            let k = tensor.flat(&idx);
            tensor.values[j][k] = c;
        }
    }
    Ok(tensor)
}

/// `(−1)^{n−1} Σ_I ∏_k xs[k][i_k] · T[j][I]` for each relator `j`.
pub fn massey_value(t: &MasseyTensor, xs: &[Vec<u32>]) -> Result<Vec<u32>, MasseyError> {
    if xs.len() != t.n as usize {
        return Err(MasseyError::DimensionMismatch {
            expected: t.n as usize,
            got: xs.len(),
        });
    }
    for x in xs {
        if x.len() != t.d {
            return Err(MasseyError::DimensionMismatch {
                expected: t.d,
                got: x.len(),
            });
        }
    }
    let sign = t.field.sign(t.n as usize - 1);
    Ok(t.values
        .iter()
        .map(|row| {
            let mut w = row.clone();
            for x in xs {
                w = t.contract_first(&w, x);
            }
            t.field.mul(sign, w[0])
        })
        .collect())
}

/// A nonzero shuffle sum, with 1-based indices.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ShuffleViolation {
    pub relator: usize,
    pub index: Vec<usize>,
    pub sum: u32,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ShuffleReport {
    pub a: u32,
    pub b: u32,
    /// Whether every basis tuple was checked, rather than a sample.
    pub exhaustive: bool,
    pub tuples_checked: usize,
    pub violations: Vec<ShuffleViolation>,
}

impl ShuffleReport {
    pub fn holds(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Above this many tuple-shuffle pairs the check samples tuples.
const SHUFFLE_EXHAUSTIVE_LIMIT: usize = 2_000_000;
const SHUFFLE_SAMPLE: usize = 20_000;

/// Position masks of all `(a, b)`-shuffles: bit `k` set when position `k`
/// receives one of the first `a` entries.
fn shuffle_masks(a: u32, b: u32) -> Vec<u64> {
    let n = a + b;
    (0u64..(1 << n)).filter(|m| m.count_ones() == a).collect()
}

/// Checks that `Σ_f ⟨ξ_{f⁻¹(1)}, …, ξ_{f⁻¹(n)}⟩ = 0` over `(a, b)`-shuffles
/// for basis tuples.
pub fn check_shuffles(t: &MasseyTensor, a: u32, b: u32) -> ShuffleReport {
    assert!(
        a >= 1 && b >= 1 && a + b == t.n,
        "need a, b ≥ 1 with a + b = n"
    );
    let f = t.field;
    let n = t.n as usize;
    let masks = shuffle_masks(a, b);
    let exhaustive =
        t.len().saturating_mul(masks.len()).saturating_mul(t.m()) <= SHUFFLE_EXHAUSTIVE_LIMIT;
    let tuples: Vec<usize> = if exhaustive {
        (0..t.len()).collect()
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed ^ t.len() as u64);
        (0..SHUFFLE_SAMPLE)
            .map(|_| rng.gen_range(0..t.len()))
            .collect()
    };
    let mut violations = Vec::new();
    let mut shuffled = vec![0usize; n];
    for &k in &tuples {
        let idx = t.tuple(k);
        for (j, row) in t.values.iter().enumerate() {
            let mut sum = 0u32;
            for &mask in &masks {
                let (mut l, mut r) = (0usize, a as usize);
                for (pos, slot) in shuffled.iter_mut().enumerate() {
                    if mask & (1 << pos) != 0 {
                        *slot = idx[l];
                        l += 1;
                    } else {
                        *slot = idx[r];
                        r += 1;
                    }
                }
                sum = f.add(sum, row[t.flat(&shuffled)]);
            }
            if sum != 0 {
                violations.push(ShuffleViolation {
                    relator: j + 1,
                    index: idx.iter().map(|i| i + 1).collect(),
                    sum,
                });
            }
        }
    }
    ShuffleReport {
        a,
        b,
        exhaustive,
        tuples_checked: tuples.len(),
        violations,
    }
}

/// The matrix of `B_n: χ ↦ ⟨χ, …, χ⟩_n` (`m` rows, `d` columns).
pub fn bn_map(t: &MasseyTensor) -> Vec<Vec<u32>> {
    let sign = t.field.sign(t.n as usize - 1);
    let n = t.n as usize;
    t.values
        .iter()
        .map(|row| {
            (0..t.d)
                .map(|i| t.field.mul(sign, row[t.flat(&vec![i; n])]))
                .collect()
        })
        .collect()
}

/// `H^1 = U ⊕ V` in a chosen basis: the first `c` new basis vectors span
/// `U`, the rest span `V`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Decomposition {
    /// Column `k` is the new `χ'_k` in the original coordinates.
    pub basis_change: Vec<Vec<u32>>,
    pub c: usize,
    pub e: u32,
}

impl Decomposition {
    pub fn new(basis_change: Vec<Vec<u32>>, c: usize, e: u32) -> Self {
        Self { basis_change, c, e }
    }

    pub fn identity(d: usize, c: usize, e: u32) -> Self {
        Self::new(identity_matrix(d), c, e)
    }

    /// `U` spanned by the given 1-based coordinates, `V` by the others.
    pub fn coordinate_split(d: usize, u: &[usize], e: u32) -> Self {
        let mut perm: Vec<usize> = u.iter().map(|i| i - 1).collect();
        perm.extend((0..d).filter(|i| !u.contains(&(i + 1))));
        Self::new(permutation_columns(&identity_matrix(d), &perm), u.len(), e)
    }

    fn validate(&self, d: usize, n: u32, field: PrimeField) -> Result<(), MasseyError> {
        if self.basis_change.len() != d || self.basis_change.iter().any(|r| r.len() != d) {
            return Err(MasseyError::InvalidDecomposition(format!(
                "basis change must be {d}×{d}"
            )));
        }
        if self.c < 1 || self.c >= d {
            return Err(MasseyError::InvalidDecomposition(format!(
                "need 1 ≤ c < d, got c = {}",
                self.c
            )));
        }
        if self.e < 1 || self.e >= n {
            return Err(MasseyError::InvalidDecomposition(format!(
                "need 1 ≤ e ≤ n − 1 = {}, got e = {}",
                n - 1,
                self.e
            )));
        }
        let reduced: Vec<Vec<u32>> = self
            .basis_change
            .iter()
            .map(|r| r.iter().map(|&v| field.reduce(v as i64)).collect())
            .collect();
        if linalg::rank(field, &reduced) != d {
            return Err(MasseyError::InvalidDecomposition(
                "basis change is singular".into(),
            ));
        }
        Ok(())
    }
}

fn identity_matrix(d: usize) -> Vec<Vec<u32>> {
    (0..d)
        .map(|i| (0..d).map(|k| u32::from(i == k)).collect())
        .collect()
}

/// Columns of `m` rearranged: new column `k` is old column `perm[k]`.
fn permutation_columns(m: &[Vec<u32>], perm: &[usize]) -> Vec<Vec<u32>> {
    m.iter()
        .map(|row| perm.iter().map(|&k| row[k]).collect())
        .collect()
}

/// The data that makes a mild verdict checkable: transformed relators
/// whose initial forms have combinatorially free high terms under `<_U`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MildCertificate {
    pub order: MonomialOrder,
    pub initial_forms: Vec<Poly>,
    pub high_terms: Vec<Monomial>,
    pub combinatorial: CombinatorialFreeness,
    pub anick: FreenessVerdict,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "status", rename_all = "kebab-case")]
pub enum MildVerdict {
    Mild {
        decomposition: Decomposition,
        certificate: Box<MildCertificate>,
    },
    CriterionFailed {
        reason: String,
        decomposition: Option<Decomposition>,
    },
    NotApplicable {
        reason: String,
    },
}

impl MildVerdict {
    pub fn is_mild(&self) -> bool {
        matches!(self, MildVerdict::Mild { .. })
    }

    pub fn status_name(&self) -> &'static str {
        match self {
            MildVerdict::Mild { .. } => "mild",
            MildVerdict::CriterionFailed { .. } => "criterion-failed",
            MildVerdict::NotApplicable { .. } => "not-applicable",
        }
    }
}

fn free_group_verdict() -> MildVerdict {
    MildVerdict::NotApplicable {
        reason: "no relators: the group is free, cd ≤ 1".into(),
    }
}

/// Tests both conditions for `D` and, when they hold, builds and checks
/// the certificate.
pub fn check_mild(
    p: &Presentation,
    dec: &Decomposition,
    cutoff: u32,
    budget: &Budget,
) -> Result<MildVerdict, MasseyError> {
    if p.m() == 0 {
        return Ok(free_group_verdict());
    }
    let n = exact_z(p, cutoff)?;
    let t = massey_tensor(p, n, cutoff, budget)?;
    check_mild_with_tensor(&t, dec)
}

fn check_mild_with_tensor(
    t: &MasseyTensor,
    dec: &Decomposition,
) -> Result<MildVerdict, MasseyError> {
    let f = t.field;
    let (d, n, m) = (t.d, t.n, t.m());
    dec.validate(d, n, f)?;
    let (c, e) = (dec.c, dec.e as usize);
    let tt = t.transform(&dec.basis_change);
    let failed = |reason: String| {
        Ok(MildVerdict::CriterionFailed {
            reason,
            decomposition: Some(dec.clone()),
        })
    };

    // Products with at least n − e + 1 entries from V must vanish.
    for (j, row) in tt.values.iter().enumerate() {
        for (k, &v) in row.iter().enumerate() {
            if v == 0 {
                continue;
            }
            let idx = tt.tuple(k);
            let in_v = idx.iter().filter(|&&i| i >= c).count();
            if in_v + e > n as usize {
                let shown: Vec<usize> = idx.iter().map(|i| i + 1).collect();
                return failed(format!(
                    "product {shown:?} has {in_v} entries in V but is nonzero on relator {}",
                    j + 1
                ));
            }
        }
    }

    // U^{⊗e} ⊗ V^{⊗(n−e)} must map onto H^2.
    let ctx = Context::new(f, Weights::uniform(d));
    let order = MonomialOrder::u_order_prefix(&ctx.weights, c);
    let mut block: Vec<Monomial> = tt_tuples_in_b(&tt, c, e)
        .into_iter()
        .map(|idx| {
            Monomial::new(idx.iter().map(|&i| i as u8).collect(), &ctx.weights)
                .expect("index within d")
        })
        .collect();
    block.sort_by(|a, b| order.compare(b, a));
    let cols = block.len();
    let mut aug: Vec<Vec<u32>> = tt
        .values
        .iter()
        .enumerate()
        .map(|(j, row)| {
            let mut r: Vec<u32> = block
                .iter()
                .map(|mono| {
                    let idx: Vec<usize> = mono.letters().iter().map(|&l| l as usize).collect();
                    row[tt.flat(&idx)]
                })
                .collect();
            r.extend((0..m).map(|k| u32::from(j == k)));
            r
        })
        .collect();
    let pivots = linalg::rref(f, &mut aug);
    let rank = pivots.iter().filter(|&&pc| pc < cols).count();
    if rank < m {
        return failed(format!(
            "U^{e}⊗V^{} reaches rank {rank} < m = {m} in H^2; relators dependent or too deep",
            n as usize - e
        ));
    }

    // Recombine the relators along the row operations, then certify.
    let mut initial_forms = Vec::with_capacity(m);
    let mut high_terms = Vec::with_capacity(m);
    for (row, &pc) in aug.iter().zip(&pivots) {
        let ops = &row[cols..];
        let mut combined = vec![0u32; tt.len()];
        for (k, &a) in ops.iter().enumerate() {
            if a == 0 {
                continue;
            }
            for (x, &v) in combined.iter_mut().zip(&tt.values[k]) {
                *x = f.add(*x, f.mul(a, v));
            }
        }
        let rho = tt.form_of(&ctx, &combined);
        let ht = order
            .high_term(&rho)
            .map_err(|_| MasseyError::CertificateFailed("recombined relator vanished".into()))?;
        if ht != block[pc] {
            return Err(MasseyError::CertificateFailed(format!(
                "high term {ht} differs from pivot {}",
                block[pc]
            )));
        }
        initial_forms.push(rho);
        high_terms.push(ht);
    }
    let combinatorial = combinatorially_free(&high_terms)?;
    if !combinatorial.is_free() {
        return Err(MasseyError::CertificateFailed(format!(
            "high terms not combinatorially free: {combinatorial:?}"
        )));
    }
    let anick = anick_check(&initial_forms, &order)?;
    if !anick.is_proven() {
        return Err(MasseyError::CertificateFailed(
            "Anick check did not prove strong freeness".into(),
        ));
    }
    Ok(MildVerdict::Mild {
        decomposition: dec.clone(),
        certificate: Box::new(MildCertificate {
            order,
            initial_forms,
            high_terms,
            combinatorial,
            anick,
        }),
    })
}

/// 0-based tuples with the first `e` entries in `U` and the rest in `V`.
fn tt_tuples_in_b(t: &MasseyTensor, c: usize, e: usize) -> Vec<Vec<usize>> {
    (0..t.len())
        .map(|k| t.tuple(k))
        .filter(|idx| idx[..e].iter().all(|&i| i < c) && idx[e..].iter().all(|&i| i >= c))
        .collect()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SearchOutcome {
    pub verdict: MildVerdict,
    pub decompositions_tried: usize,
}

/// All `c`-subsets of `1..=d` in lexicographic order.
fn subsets(d: usize, c: usize) -> Vec<Vec<usize>> {
    fn go(start: usize, d: usize, c: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == c {
            out.push(cur.clone());
            return;
        }
        for i in start..=d {
            cur.push(i);
            go(i + 1, d, c, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(1, d, c, &mut Vec::new(), &mut out);
    out
}

/// Tries coordinate splits of the identity basis, then of each extra basis,
/// for every `e`, smallest `U` first.
pub fn search_mild(
    p: &Presentation,
    cutoff: u32,
    extra_bases: &[Vec<Vec<u32>>],
    budget: &Budget,
) -> Result<SearchOutcome, MasseyError> {
    if p.m() == 0 {
        return Ok(SearchOutcome {
            verdict: free_group_verdict(),
            decompositions_tried: 0,
        });
    }
    let d = p.d();
    let n = exact_z(p, cutoff)?;
    if d < 2 {
        return Ok(SearchOutcome {
            verdict: MildVerdict::NotApplicable {
                reason: "one generator: no nontrivial decomposition".into(),
            },
            decompositions_tried: 0,
        });
    }
    let per_basis = (1usize << d.min(60))
        .saturating_sub(2)
        .saturating_mul(n as usize - 1);
    budget.check_enumeration(
        "decomposition search",
        per_basis.saturating_mul(extra_bases.len() + 1),
    )?;
    let t = massey_tensor(p, n, cutoff, budget)?;
    let mut bases = vec![identity_matrix(d)];
    bases.extend(extra_bases.iter().cloned());
    let mut tried = 0;
    for basis in &bases {
        for e in 1..n {
            for c in 1..d {
                for u in subsets(d, c) {
                    let mut perm: Vec<usize> = u.iter().map(|i| i - 1).collect();
                    perm.extend((0..d).filter(|i| !u.contains(&(i + 1))));
                    let dec = Decomposition::new(permutation_columns(basis, &perm), c, e);
                    tried += 1;
                    let v = check_mild_with_tensor(&t, &dec)?;
                    if v.is_mild() {
                        return Ok(SearchOutcome {
                            verdict: v,
                            decompositions_tried: tried,
                        });
                    }
                }
            }
        }
    }
    Ok(SearchOutcome {
        verdict: MildVerdict::CriterionFailed {
            reason: format!("none of the {tried} searched decompositions satisfies the criterion"),
            decomposition: None,
        },
        decompositions_tried: tried,
    })
}

/// Lie membership of the initial form at one weight vector.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LieCheck {
    pub weights: Weights,
    pub omega: u32,
    pub initial_form: Poly,
    pub lie: bool,
}

/// `B_p` and its kernel (basis vectors of `H^1`).
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BpDiagnostics {
    pub matrix: Vec<Vec<u32>>,
    pub kernel: Vec<Vec<u32>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "status", rename_all = "kebab-case")]
pub enum OneRelatorStatus {
    Mild {
        reason: String,
    },
    /// One generator: `G ≅ Z/order`.
    FiniteCyclic {
        order: u64,
    },
    Undecided,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct OneRelatorReport {
    pub z: u32,
    pub coprime_to_p: bool,
    pub lie_checks: Vec<LieCheck>,
    pub split: PowerCommutatorSplit,
    pub bp: Option<BpDiagnostics>,
    pub demuskin: Option<DemuskinType>,
    pub status: OneRelatorStatus,
}

fn gcd(a: u32, b: u32) -> u32 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn require_one_relator(p: &Presentation) -> Result<(), MasseyError> {
    if p.m() != 1 {
        return Err(MasseyError::RelatorCount { found: p.m() });
    }
    Ok(())
}

/// Collects the one-relator mildness tests. The standard grading is always
/// checked; `taus` adds weighted gradings.
pub fn one_relator_verdict(
    p: &Presentation,
    cutoff: u32,
    taus: &[Weights],
    with_demuskin: bool,
    budget: &Budget,
) -> Result<OneRelatorReport, MasseyError> {
    require_one_relator(p)?;
    let z = exact_z(p, cutoff)?;
    let prime = p.p();
    let word = &p.relators()[0].word;
    let coprime_to_p = gcd(z, prime) == 1;

    let mut all_taus = vec![Weights::uniform(p.d())];
    for t in taus {
        if t.len() != p.d() {
            return Err(MagnusError::ArityMismatch {
                expected: p.d(),
                got: t.len(),
            }
            .into());
        }
        if !all_taus.contains(t) {
            all_taus.push(t.clone());
        }
    }
    let mut lie_checks = Vec::with_capacity(all_taus.len());
    for tau in all_taus {
        let ctx = Context::new(p.field(), tau.clone());
        let tau_cutoff = cutoff.saturating_mul(tau.as_slice().iter().copied().max().unwrap_or(1));
        let rho = initial_form(word, &ctx, tau_cutoff)?;
        let omega = rho
            .tau_valuation()
            .finite()
            .expect("initial form is nonzero");
        let lie = lie_membership(&rho, omega, budget)?.is_member();
        lie_checks.push(LieCheck {
            weights: tau,
            omega,
            initial_form: rho,
            lie,
        });
    }
    let split = p_power_commutator_split(&lie_checks[0].initial_form, z, budget)?;

    let bp = if z == prime && p.d() >= 2 {
        let t = massey_tensor(p, z, cutoff, budget)?;
        let matrix = bn_map(&t);
        let kernel = linalg::kernel_basis(p.field(), &matrix, p.d());
        Some(BpDiagnostics { matrix, kernel })
    } else {
        None
    };
    let demuskin = if with_demuskin {
        Some(demuskin_type(p, cutoff, budget)?)
    } else {
        None
    };

    let status = if p.d() == 1 {
        OneRelatorStatus::FiniteCyclic { order: z as u64 }
    } else if coprime_to_p {
        OneRelatorStatus::Mild {
            reason: format!("z(G) = {z} is prime to p = {prime}"),
        }
    } else if let Some(c) = lie_checks.iter().find(|c| gcd(c.omega, prime) == 1) {
        OneRelatorStatus::Mild {
            reason: format!(
                "ω at τ = {} is {}, prime to p = {prime}",
                c.weights, c.omega
            ),
        }
    } else if let Some(c) = lie_checks.iter().find(|c| c.lie) {
        OneRelatorStatus::Mild {
            reason: format!("the initial form at τ = {} is a Lie polynomial", c.weights),
        }
    } else {
        OneRelatorStatus::Undecided
    };
    Ok(OneRelatorReport {
        z,
        coprime_to_p,
        lie_checks,
        split,
        bp,
        demuskin,
        status,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "status", rename_all = "kebab-case")]
pub enum DemuskinType {
    IsDemuskinType,
    /// The pairing vanishes identically at this `χ`.
    WitnessFailure {
        chi: Vec<u32>,
    },
}

impl DemuskinType {
    pub fn holds(&self) -> bool {
        matches!(self, DemuskinType::IsDemuskinType)
    }
}

/// `ψ ↦ ⟨χ^{e−1}, ψ, χ^{n−e}⟩` as a vector of values on the standard basis.
fn pairing_form(t: &MasseyTensor, chi: &[u32], e: usize) -> Result<Vec<u32>, MasseyError> {
    let n = t.n as usize;
    let mut out = Vec::with_capacity(t.d);
    for i in 0..t.d {
        let mut psi = vec![0u32; t.d];
        psi[i] = 1;
        let xs: Vec<Vec<u32>> = (0..n)
            .map(|k| {
                if k + 1 == e {
                    psi.clone()
                } else {
                    chi.to_vec()
                }
            })
            .collect();
        out.push(massey_value(t, &xs)?[0]);
    }
    Ok(out)
}

/// Checks that for every `χ ≠ 0` some slot `e` gives a nonzero form in `ψ`.
/// Characters are enumerated little-endian in base `p`, one per line
/// through the origin (first nonzero coordinate equal to 1).
pub fn demuskin_type(
    p: &Presentation,
    cutoff: u32,
    budget: &Budget,
) -> Result<DemuskinType, MasseyError> {
    require_one_relator(p)?;
    let n = exact_z(p, cutoff)?;
    let d = p.d();
    let prime = p.p() as usize;
    let count = prime.checked_pow(d as u32).ok_or_else(|| {
        BudgetExceeded::new("character enumeration", usize::MAX, budget.enumeration)
    })?;
    budget.check_enumeration("character enumeration", count)?;
    let t = massey_tensor(p, n, cutoff, budget)?;
    for v in 1..count {
        let mut chi = vec![0u32; d];
        let mut rest = v;
        for slot in chi.iter_mut() {
            *slot = (rest % prime) as u32;
            rest /= prime;
        }
        if chi.iter().find(|&&x| x != 0) != Some(&1) {
            continue;
        }
        let mut nondegenerate = false;
        for e in 1..=n as usize {
            if pairing_form(&t, &chi, e)?.iter().any(|&x| x != 0) {
                nondegenerate = true;
                break;
            }
        }
        if !nondegenerate {
            return Ok(DemuskinType::WitnessFailure { chi });
        }
    }
    Ok(DemuskinType::IsDemuskinType)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "status", rename_all = "kebab-case")]
pub enum DemuskinMildness {
    /// One generator: `G ≅ Z/p^k`.
    Finite { order: u64 },
    /// `V = span(χ)` with `B_n(χ) = 0` and `⟨ψ, χ^{n−1}⟩ ≠ 0`.
    Infinite {
        chi: Vec<u32>,
        psi: Vec<u32>,
        verdict: MildVerdict,
    },
}

/// Builds the decomposition from `ker B_n` and runs the mildness check.
pub fn demuskin_mildness(
    p: &Presentation,
    cutoff: u32,
    budget: &Budget,
) -> Result<DemuskinMildness, MasseyError> {
    require_one_relator(p)?;
    if let DemuskinType::WitnessFailure { chi } = demuskin_type(p, cutoff, budget)? {
        return Err(MasseyError::NotDemuskinType { chi });
    }
    let n = exact_z(p, cutoff)?;
    let prime = p.p();
    let d = p.d();
    if d == 1 {
        let mut q = 1u64;
        while q < n as u64 {
            q *= prime as u64;
        }
        if q != n as u64 {
            return Err(MasseyError::InconsistentFinite { n, p: prime });
        }
        return Ok(DemuskinMildness::Finite { order: q });
    }
    let f = p.field();
    let t = massey_tensor(p, n, cutoff, budget)?;
    let kernel = linalg::kernel_basis(f, &bn_map(&t), d);
    let chi = kernel.into_iter().next().ok_or_else(|| {
        MasseyError::CertificateFailed("B_n has trivial kernel with d ≥ 2".into())
    })?;
    let mut psi = None;
    for i in 0..d {
        let mut cand = vec![0u32; d];
        cand[i] = 1;
        let xs: Vec<Vec<u32>> = std::iter::once(cand.clone())
            .chain(std::iter::repeat_n(chi.clone(), n as usize - 1))
            .collect();
        if massey_value(&t, &xs)?[0] != 0 {
            psi = Some(cand);
            break;
        }
    }
    let psi =
        psi.ok_or_else(|| MasseyError::CertificateFailed("no ψ with ⟨ψ, χ^{n−1}⟩ ≠ 0".into()))?;

    // Columns ψ, filler standard vectors, χ.
    let mut cols = vec![psi.clone()];
    for i in 0..d {
        if cols.len() == d - 1 {
            break;
        }
        let mut cand = vec![0u32; d];
        cand[i] = 1;
        let mut trial = cols.clone();
        trial.push(cand.clone());
        trial.push(chi.clone());
        if linalg::rank(f, &trial) == trial.len() {
            cols.push(cand);
        }
    }
    cols.push(chi.clone());
    let basis: Vec<Vec<u32>> = (0..d)
        .map(|i| cols.iter().map(|col| col[i]).collect())
        .collect();
    let verdict = check_mild_with_tensor(&t, &Decomposition::new(basis, d - 1, 1))?;
    Ok(DemuskinMildness::Infinite { chi, psi, verdict })
}
