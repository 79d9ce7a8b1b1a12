//! Words over the generator alphabet and their weighted degrees.

use std::fmt;

use serde::{Serialize, Serializer};

use super::AlgebraError;

/// Upper bound on the number of generators; letters are stored as `u8`.
pub const MAX_GENERATORS: usize = 255;

/// Generator weights `(τ_1, …, τ_d)`, all at least 1.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(transparent)]
pub struct Weights(Vec<u32>);

impl Weights {
    pub fn new(tau: Vec<u32>) -> Result<Self, AlgebraError> {
        if tau.is_empty() || tau.len() > MAX_GENERATORS {
            return Err(AlgebraError::InvalidWeights(format!(
                "expected between 1 and {MAX_GENERATORS} weights, got {}",
                tau.len()
            )));
        }
        if let Some(pos) = tau.iter().position(|&t| t == 0) {
            return Err(AlgebraError::InvalidWeights(format!(
                "weight of generator {} must be at least 1",
                pos + 1
            )));
        }
        Ok(Self(tau))
    }

    /// The standard grading τ = (1, …, 1).
    pub fn uniform(d: usize) -> Self {
        assert!(
            (1..=MAX_GENERATORS).contains(&d),
            "generator count out of range"
        );
        Self(vec![1; d])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_uniform(&self) -> bool {
        self.0.iter().all(|&t| t == 1)
    }

    #[inline]
    pub fn weight(&self, letter: u8) -> u32 {
        self.0[letter as usize]
    }

    pub fn as_slice(&self) -> &[u32] {
        &self.0
    }

    pub fn min_weight(&self) -> u32 {
        *self.0.iter().min().expect("weights are nonempty")
    }

    pub fn degree_of(&self, letters: &[u8]) -> u32 {
        letters.iter().map(|&l| self.weight(l)).sum()
    }
}

impl fmt::Display for Weights {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, t) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{t}")?;
        }
        write!(f, ")")
    }
}

/// A word `X_{i_1} ⋯ X_{i_k}` with its cached τ-degree. Letters are 0-based.
///
/// The derived ordering (degree, then letters) is a storage order only; the
/// semantic monomial orders live in [`crate::orders`].
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Monomial {
    degree: u32,
    letters: Vec<u8>,
}

impl Monomial {
    pub fn one() -> Self {
        Self {
            degree: 0,
            letters: Vec::new(),
        }
    }

    pub fn new(letters: Vec<u8>, weights: &Weights) -> Result<Self, AlgebraError> {
        if let Some(&bad) = letters.iter().find(|&&l| l as usize >= weights.len()) {
            return Err(AlgebraError::LetterOutOfRange {
                letter: bad as usize + 1,
                d: weights.len(),
            });
        }
        let degree = weights.degree_of(&letters);
        Ok(Self { degree, letters })
    }

    /// Builds a monomial from 1-based generator indices.
    pub fn from_indices(indices: &[usize], weights: &Weights) -> Result<Self, AlgebraError> {
        let mut letters = Vec::with_capacity(indices.len());
        for &i in indices {
            if i == 0 || i > weights.len() {
                return Err(AlgebraError::LetterOutOfRange {
                    letter: i,
                    d: weights.len(),
                });
            }
            letters.push((i - 1) as u8);
        }
        Self::new(letters, weights)
    }

    pub(crate) fn from_parts(letters: Vec<u8>, degree: u32) -> Self {
        Self { degree, letters }
    }

    #[inline]
    pub fn degree(&self) -> u32 {
        self.degree
    }

    #[inline]
    pub fn letters(&self) -> &[u8] {
        &self.letters
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.letters.is_empty()
    }

    /// 1-based generator indices.
    pub fn indices(&self) -> Vec<usize> {
        self.letters.iter().map(|&l| l as usize + 1).collect()
    }

    pub fn concat(&self, other: &Monomial) -> Monomial {
        let mut letters = Vec::with_capacity(self.letters.len() + other.letters.len());
        letters.extend_from_slice(&self.letters);
        letters.extend_from_slice(&other.letters);
        Monomial {
            degree: self.degree + other.degree,
            letters,
        }
    }

    /// Splits off the first letter: `X_a · tail`.
    pub fn split_first(&self, weights: &Weights) -> Option<(u8, Monomial)> {
        let (&first, rest) = self.letters.split_first()?;
        Some((
            first,
            Monomial {
                degree: self.degree - weights.weight(first),
                letters: rest.to_vec(),
            },
        ))
    }

    /// Whether `needle` occurs as a contiguous subword, returning the first offset.
    pub fn find(&self, needle: &Monomial) -> Option<usize> {
        if needle.len() > self.len() {
            return None;
        }
        if needle.is_one() {
            return Some(0);
        }
        self.letters
            .windows(needle.len())
            .position(|w| w == needle.letters.as_slice())
    }

    /// Renders with caller-supplied generator names, e.g. `a b^2 a`.
    pub fn display_with(&self, names: &[String]) -> String {
        if self.is_one() {
            return "1".to_string();
        }
        let mut out = Vec::new();
        for (letter, run) in runs(&self.letters) {
            let name = &names[letter as usize];
            if run == 1 {
                out.push(name.clone());
            } else {
                out.push(format!("{name}^{run}"));
            }
        }
        out.join(" ")
    }
}

fn runs(letters: &[u8]) -> Vec<(u8, usize)> {
    let mut out: Vec<(u8, usize)> = Vec::new();
    for &l in letters {
        match out.last_mut() {
            Some((last, n)) if *last == l => *n += 1,
            _ => out.push((l, 1)),
        }
    }
    out
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_one() {
            return write!(f, "1");
        }
        for (letter, run) in runs(&self.letters) {
            if run == 1 {
                write!(f, "X{}", letter as usize + 1)?;
            } else {
                write!(f, "X{}^{}", letter as usize + 1, run)?;
            }
        }
        Ok(())
    }
}

impl Serialize for Monomial {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

/// All words of τ-degree exactly `n`, in length-lex order (shorter first,
/// then lexicographic by letter index).
pub fn words_of_degree(weights: &Weights, n: u32) -> Vec<Monomial> {
    fn extend(weights: &Weights, remaining: u32, prefix: &mut Vec<u8>, out: &mut Vec<Vec<u8>>) {
        if remaining == 0 {
            out.push(prefix.clone());
            return;
        }
        for l in 0..weights.len() as u8 {
            let w = weights.weight(l);
            if w <= remaining {
                prefix.push(l);
                extend(weights, remaining - w, prefix, out);
                prefix.pop();
            }
        }
    }
    let mut raw = Vec::new();
    extend(weights, n, &mut Vec::new(), &mut raw);
    raw.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
    raw.into_iter()
        .map(|letters| Monomial::from_parts(letters, n))
        .collect()
}

/// Number of words of each τ-degree `0..=n`, i.e. the Hilbert series of the
/// free algebra.
pub fn word_counts(weights: &Weights, n: u32) -> Vec<u64> {
    let mut counts = vec![0u64; n as usize + 1];
    counts[0] = 1;
    for k in 1..=n as usize {
        counts[k] = weights
            .as_slice()
            .iter()
            .filter(|&&t| t as usize <= k)
            .map(|&t| counts[k - t as usize])
            .sum();
    }
    counts
}
