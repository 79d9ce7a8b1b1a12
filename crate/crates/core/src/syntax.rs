//! Text formats: group words and presentation files.
//!
//! ```text
//! # a Demuškin-type relator
//! p = 3
//! generators = x1, x2, x3
//! weights = 1, 1, 1
//! relators:
//!   r: x1^3 x2^3 [[x1, x3], x3]
//! ```
//!
//! Words follow `word := term+`, `term := atom ('^' signed-int)?`,
//! `atom := name | '(' word ')' | '[' word ',' word ']'`. Terms may be
//! separated by whitespace or `*`, and a lone `1` is the identity.

use std::fmt;

use thiserror::Error;

use crate::algebra::{PrimeField, Weights};
use crate::magnus::{Atom, Factor, GroupWord, MagnusError, NamedRelator, Presentation};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SyntaxErrorKind {
    Expected(String),
    UnknownGenerator(String),
    ZeroExponent,
    ExponentOverflow,
    DuplicateKey(String),
    UnknownKey(String),
    MissingKey(&'static str),
    DuplicateGenerator(String),
    DuplicateRelator(String),
    InvalidName(String),
    InvalidValue(String),
    Presentation(String),
}

impl fmt::Display for SyntaxErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Expected(what) => write!(f, "expected {what}"),
            Self::UnknownGenerator(g) => write!(f, "unknown generator {g:?}"),
            Self::ZeroExponent => write!(f, "exponent must be nonzero"),
            Self::ExponentOverflow => write!(f, "exponent out of range"),
            Self::DuplicateKey(k) => write!(f, "duplicate key {k:?}"),
            Self::UnknownKey(k) => write!(f, "unknown key {k:?}"),
            Self::MissingKey(k) => write!(f, "missing key {k:?}"),
            Self::DuplicateGenerator(g) => write!(f, "duplicate generator {g:?}"),
            Self::DuplicateRelator(r) => write!(f, "duplicate relator {r:?}"),
            Self::InvalidName(n) => write!(f, "invalid name {n:?}"),
            Self::InvalidValue(v) => write!(f, "{v}"),
            Self::Presentation(msg) => write!(f, "{msg}"),
        }
    }
}

/// A parse failure at a 1-based line and column.
#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("line {line}, column {col}: {kind}")]
pub struct SyntaxError {
    pub line: usize,
    pub col: usize,
    pub kind: SyntaxErrorKind,
}

struct WordParser<'a> {
    src: &'a str,
    pos: usize,
    names: &'a [String],
    line: usize,
    col0: usize,
}

impl<'a> WordParser<'a> {
    fn err(&self, at: usize, kind: SyntaxErrorKind) -> SyntaxError {
        SyntaxError {
            line: self.line,
            col: self.col0 + self.src[..at].chars().count(),
            kind,
        }
    }

    fn rest(&self) -> &'a str {
        &self.src[self.pos..]
    }

    fn peek(&self) -> Option<char> {
        self.rest().chars().next()
    }

    fn skip_ws(&mut self) {
        while let Some(c) = self.peek() {
            if c.is_whitespace() || c == '*' {
                self.pos += c.len_utf8();
            } else {
                break;
            }
        }
    }

    fn eat(&mut self, want: char) -> bool {
        self.skip_ws();
        if self.peek() == Some(want) {
            self.pos += want.len_utf8();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, want: char) -> Result<(), SyntaxError> {
        if self.eat(want) {
            Ok(())
        } else {
            Err(self.err(self.pos, SyntaxErrorKind::Expected(format!("'{want}'"))))
        }
    }

    fn at_term_start(&mut self) -> bool {
        self.skip_ws();
        matches!(self.peek(), Some(c) if c == '(' || c == '[' || c == '1' || is_ident_start(c))
    }

    fn word(&mut self) -> Result<GroupWord, SyntaxError> {
        let mut factors = Vec::new();
        if !self.at_term_start() {
            return Err(self.err(
                self.pos,
                SyntaxErrorKind::Expected("a generator, '(' or '['".into()),
            ));
        }
        while self.at_term_start() {
            if let Some(f) = self.term()? {
                factors.push(f);
            }
        }
        Ok(GroupWord { factors })
    }

    /// `None` for a bare `1`.
    fn term(&mut self) -> Result<Option<Factor>, SyntaxError> {
        self.skip_ws();
        let start = self.pos;
        let atom = match self.peek() {
            Some('(') => {
                self.pos += 1;
                let inner = self.word()?;
                self.expect(')')?;
                Some(Atom::Group(Box::new(inner)))
            }
            Some('[') => {
                self.pos += 1;
                let a = self.word()?;
                self.expect(',')?;
                let b = self.word()?;
                self.expect(']')?;
                Some(Atom::Commutator(Box::new(a), Box::new(b)))
            }
            Some('1') => {
                self.pos += 1;
                None
            }
            _ => Some(Atom::Gen(self.generator()?)),
        };
        let exp = self.exponent()?;
        match atom {
            Some(atom) => Ok(Some(Factor { atom, exp })),
            None if exp == 1 => Ok(None),
            None => Err(self.err(
                start,
                SyntaxErrorKind::Expected("a generator before '^'".into()),
            )),
        }
    }

    /// Longest generator name that prefixes the input, so `x1x2` reads as
    /// two letters.
    fn generator(&mut self) -> Result<usize, SyntaxError> {
        let rest = self.rest();
        let best = self
            .names
            .iter()
            .enumerate()
            .filter(|(_, n)| rest.starts_with(n.as_str()))
            .max_by_key(|(_, n)| n.len());
        match best {
            Some((i, n)) => {
                self.pos += n.len();
                Ok(i)
            }
            None => {
                let ident: String = rest.chars().take_while(|&c| is_ident_char(c)).collect();
                Err(self.err(self.pos, SyntaxErrorKind::UnknownGenerator(ident)))
            }
        }
    }

    fn exponent(&mut self) -> Result<i64, SyntaxError> {
        if !self.eat('^') {
            return Ok(1);
        }
        self.skip_ws();
        let start = self.pos;
        let mut end = self.pos;
        let bytes = self.src.as_bytes();
        if end < bytes.len() && (bytes[end] == b'-' || bytes[end] == b'+') {
            end += 1;
        }
        let digits_start = end;
        while end < bytes.len() && bytes[end].is_ascii_digit() {
            end += 1;
        }
        if end == digits_start {
            return Err(self.err(
                start,
                SyntaxErrorKind::Expected("an integer exponent".into()),
            ));
        }
        let e: i64 = self.src[start..end]
            .parse()
            .map_err(|_| self.err(start, SyntaxErrorKind::ExponentOverflow))?;
        if e == 0 {
            return Err(self.err(start, SyntaxErrorKind::ZeroExponent));
        }
        self.pos = end;
        Ok(e)
    }
}

fn is_ident_start(c: char) -> bool {
    c.is_alphabetic() || c == '_'
}

fn is_ident_char(c: char) -> bool {
    c.is_alphanumeric() || c == '_'
}

fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if is_ident_start(c)) && chars.all(is_ident_char)
}

fn parse_word_at(
    input: &str,
    names: &[String],
    line: usize,
    col0: usize,
) -> Result<GroupWord, SyntaxError> {
    let mut p = WordParser {
        src: input,
        pos: 0,
        names,
        line,
        col0,
    };
    let w = if input.trim() == "1" {
        GroupWord::identity()
    } else {
        p.word()?
    };
    p.skip_ws();
    if p.pos < input.len() && input.trim() != "1" {
        return Err(p.err(p.pos, SyntaxErrorKind::Expected("end of word".into())));
    }
    Ok(w)
}

/// Parses a word over the given generator names.
pub fn parse_word(input: &str, names: &[String]) -> Result<GroupWord, SyntaxError> {
    parse_word_at(input, names, 1, 1)
}

/// Strips a trailing `#` comment.
fn strip_comment(line: &str) -> &str {
    match line.find('#') {
        Some(i) => &line[..i],
        None => line,
    }
}

/// Column (1-based) of byte offset `at` in `line`.
fn col_of(line: &str, at: usize) -> usize {
    line[..at].chars().count() + 1
}

/// Splits a comma-separated list, keeping each item's starting column.
fn list_items(line: &str, start: usize) -> Vec<(String, usize)> {
    let mut out = Vec::new();
    let mut offset = start;
    for piece in line[start..].split(',') {
        let lead = piece.len() - piece.trim_start().len();
        out.push((piece.trim().to_string(), col_of(line, offset + lead)));
        offset += piece.len() + 1;
    }
    out
}

/// Parses a presentation file.
pub fn parse_presentation(text: &str) -> Result<Presentation, SyntaxError> {
    let mut p_value: Option<(u64, usize)> = None;
    let mut names: Option<Vec<String>> = None;
    let mut weights: Option<(Vec<u32>, usize)> = None;
    let mut in_relators = false;
    let mut relators: Vec<(NamedRelator, usize)> = Vec::new();
    let err = |line, col, kind| SyntaxError { line, col, kind };

    for (ln, raw) in text.lines().enumerate() {
        let line_no = ln + 1;
        let line = strip_comment(raw);
        if line.trim().is_empty() {
            continue;
        }
        let lead = line.len() - line.trim_start().len();
        if in_relators && !line.contains('=') {
            let colon = line.find(':').ok_or_else(|| {
                err(
                    line_no,
                    col_of(line, lead),
                    SyntaxErrorKind::Expected("'name: word'".into()),
                )
            })?;
            let name = line[..colon].trim();
            if !is_identifier(name) {
                return Err(err(
                    line_no,
                    col_of(line, lead),
                    SyntaxErrorKind::InvalidName(name.into()),
                ));
            }
            if relators.iter().any(|(r, _)| r.name == name) {
                return Err(err(
                    line_no,
                    col_of(line, lead),
                    SyntaxErrorKind::DuplicateRelator(name.into()),
                ));
            }
            let gens = names
                .as_ref()
                .ok_or_else(|| err(line_no, 1, SyntaxErrorKind::MissingKey("generators")))?;
            let body = &line[colon + 1..];
            let word = parse_word_at(body, gens, line_no, col_of(line, colon + 1))?;
            relators.push((
                NamedRelator {
                    name: name.to_string(),
                    word,
                },
                line_no,
            ));
            continue;
        }
        let trimmed = line.trim();
        if trimmed.trim_end_matches(':').trim() == "relators" && trimmed.ends_with(':') {
            if in_relators {
                return Err(err(
                    line_no,
                    col_of(line, lead),
                    SyntaxErrorKind::DuplicateKey("relators".into()),
                ));
            }
            in_relators = true;
            continue;
        }
        let eq = line.find('=').ok_or_else(|| {
            err(
                line_no,
                col_of(line, lead),
                SyntaxErrorKind::Expected("'key = value'".into()),
            )
        })?;
        let key = line[..eq].trim();
        let value_col = col_of(
            line,
            eq + 1 + (line[eq + 1..].len() - line[eq + 1..].trim_start().len()),
        );
        let value = line[eq + 1..].trim();
        match key {
            "p" => {
                if p_value.is_some() {
                    return Err(err(
                        line_no,
                        col_of(line, lead),
                        SyntaxErrorKind::DuplicateKey(key.into()),
                    ));
                }
                let p: u64 = value.parse().map_err(|_| {
                    err(
                        line_no,
                        value_col,
                        SyntaxErrorKind::InvalidValue(format!(
                            "p must be an integer, got {value:?}"
                        )),
                    )
                })?;
                PrimeField::new(p).map_err(|e| {
                    err(
                        line_no,
                        value_col,
                        SyntaxErrorKind::InvalidValue(e.to_string()),
                    )
                })?;
                p_value = Some((p, line_no));
            }
            "generators" => {
                if names.is_some() {
                    return Err(err(
                        line_no,
                        col_of(line, lead),
                        SyntaxErrorKind::DuplicateKey(key.into()),
                    ));
                }
                let mut out: Vec<String> = Vec::new();
                for (item, col) in list_items(line, eq + 1) {
                    if !is_identifier(&item) {
                        return Err(err(line_no, col, SyntaxErrorKind::InvalidName(item)));
                    }
                    if out.contains(&item) {
                        return Err(err(line_no, col, SyntaxErrorKind::DuplicateGenerator(item)));
                    }
                    out.push(item);
                }
                names = Some(out);
            }
            "weights" => {
                if weights.is_some() {
                    return Err(err(
                        line_no,
                        col_of(line, lead),
                        SyntaxErrorKind::DuplicateKey(key.into()),
                    ));
                }
                let mut out = Vec::new();
                for (item, col) in list_items(line, eq + 1) {
                    let w: u32 = item.parse().ok().filter(|&w| w > 0).ok_or_else(|| {
                        err(
                            line_no,
                            col,
                            SyntaxErrorKind::InvalidValue(format!(
                                "weights are positive integers, got {item:?}"
                            )),
                        )
                    })?;
                    out.push(w);
                }
                weights = Some((out, line_no));
            }
            other => {
                return Err(err(
                    line_no,
                    col_of(line, lead),
                    SyntaxErrorKind::UnknownKey(other.into()),
                ));
            }
        }
    }

    let (p, _) = p_value.ok_or_else(|| err(1, 1, SyntaxErrorKind::MissingKey("p")))?;
    let names = names.ok_or_else(|| err(1, 1, SyntaxErrorKind::MissingKey("generators")))?;
    let d = names.len();
    let (tau, tau_line) = weights.unwrap_or((vec![1; d], 1));
    if tau.len() != d {
        return Err(err(
            tau_line,
            1,
            SyntaxErrorKind::InvalidValue(format!("{} weights for {d} generators", tau.len())),
        ));
    }
    let field = PrimeField::new(p).expect("validated above");
    let weights = Weights::new(tau)
        .map_err(|e| err(tau_line, 1, SyntaxErrorKind::InvalidValue(e.to_string())))?;
    let lines: Vec<(String, usize)> = relators.iter().map(|(r, l)| (r.name.clone(), *l)).collect();
    Presentation::new(
        field,
        names,
        weights,
        relators.into_iter().map(|(r, _)| r).collect(),
    )
    .map_err(|e| {
        let line = match &e {
            MagnusError::NonMinimal { relator } => lines
                .iter()
                .find(|(n, _)| n == relator)
                .map_or(1, |(_, l)| *l),
            _ => 1,
        };
        err(line, 1, SyntaxErrorKind::Presentation(e.to_string()))
    })
}

/// Renders a presentation in the file format accepted by
/// [`parse_presentation`].
pub fn print_presentation(p: &Presentation) -> String {
    let mut out = String::new();
    out.push_str(&format!("p = {}\n", p.p()));
    out.push_str(&format!("generators = {}\n", p.names().join(", ")));
    let w: Vec<String> = p
        .weights()
        .as_slice()
        .iter()
        .map(|w| w.to_string())
        .collect();
    out.push_str(&format!("weights = {}\n", w.join(", ")));
    out.push_str("relators:\n");
    for r in p.relators() {
        out.push_str(&format!(
            "  {}: {}\n",
            r.name,
            r.word.display_with(p.names())
        ));
    }
    out
}
