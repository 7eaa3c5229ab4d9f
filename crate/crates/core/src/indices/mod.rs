//! Multi-indices, tail specifications and their canonical text forms.
//!
//! An index serializes as comma-separated exponents (`2,1,3`) or `empty`; a
//! tail spec as `tail:<n>:<index>`, with a bare index meaning offset 0.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::TvError;

/// A finite exponent sequence `(k_1, …, k_d)`, possibly empty.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MultiIndex(Vec<u32>);

impl MultiIndex {
    /// Builds an index, rejecting zero exponents. Admissibility is not checked.
    pub fn new(exponents: Vec<u32>) -> Result<Self, TvError> {
        if let Some(pos) = exponents.iter().position(|&e| e == 0) {
            return Err(TvError::invalid(format!(
                "exponent {} at position {} must be a positive integer",
                exponents[pos],
                pos + 1
            )));
        }
        Ok(Self(exponents))
    }

    /// Builds an admissible index or fails.
    pub fn admissible(exponents: Vec<u32>) -> Result<Self, TvError> {
        let k = Self::new(exponents)?;
        if !k.is_admissible() {
            return Err(TvError::invalid(format!(
                "index ({k}) is not admissible: the first exponent must be at least 2"
            )));
        }
        Ok(k)
    }

    pub fn empty() -> Self {
        Self(Vec::new())
    }

    pub fn exponents(&self) -> &[u32] {
        &self.0
    }

    pub fn depth(&self) -> usize {
        self.0.len()
    }

    pub fn weight(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_admissible(&self) -> bool {
        is_admissible(&self.0)
    }

    /// `(k_1, …, k_d, e)`.
    pub fn push(&self, e: u32) -> Self {
        let mut v = self.0.clone();
        v.push(e);
        Self(v)
    }

    /// `(k_1, …, k_{d−1})`; the empty index stays empty.
    pub fn drop_last(&self) -> Self {
        let mut v = self.0.clone();
        v.pop();
        Self(v)
    }

    pub fn last(&self) -> Option<u32> {
        self.0.last().copied()
    }

    /// Copy with exponent `i` (0-based) increased by one.
    pub fn incremented(&self, i: usize) -> Self {
        let mut v = self.0.clone();
        v[i] += 1;
        Self(v)
    }

    /// `(2, 1, …, 1)` of the given depth.
    pub fn two_ones(depth: usize) -> Self {
        if depth == 0 {
            return Self::empty();
        }
        let mut v = vec![1; depth];
        v[0] = 2;
        Self(v)
    }

    /// `(e, e, …, e)` of the given depth.
    pub fn repeated(e: u32, depth: usize) -> Self {
        Self(vec![e; depth])
    }

    pub fn canonical(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("empty");
        }
        let mut first = true;
        for e in &self.0 {
            if !first {
                f.write_str(",")?;
            }
            write!(f, "{e}")?;
            first = false;
        }
        Ok(())
    }
}

impl FromStr for MultiIndex {
    type Err = TvError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_index(s)
    }
}

impl From<&[u32]> for MultiIndex {
    fn from(v: &[u32]) -> Self {
        Self(v.to_vec())
    }
}

/// True iff the sequence is empty or starts with an exponent of at least 2.
pub fn is_admissible(exponents: &[u32]) -> bool {
    exponents.first().is_none_or(|&k1| k1 >= 2)
}

/// Parses `empty` or comma-separated positive integers into an admissible index.
pub fn parse_index(text: &str) -> Result<MultiIndex, TvError> {
    let text = text.trim();
    if text == "empty" {
        return Ok(MultiIndex::empty());
    }
    if text.is_empty() {
        return Err(TvError::Parse {
            token: String::new(),
            reason: "expected comma-separated positive integers or `empty`".into(),
        });
    }
    let mut v = Vec::new();
    for (pos, tok) in text.split(',').enumerate() {
        let t = tok.trim();
        let e: i64 = t.parse().map_err(|_| TvError::Parse {
            token: t.to_string(),
            reason: "not an integer".into(),
        })?;
        if e < 1 {
            return Err(TvError::Parse {
                token: t.to_string(),
                reason: "exponents must be positive".into(),
            });
        }
        let e = u32::try_from(e).map_err(|_| TvError::Parse {
            token: t.to_string(),
            reason: "exponent too large".into(),
        })?;
        if pos == 0 && e < 2 {
            return Err(TvError::Parse {
                token: t.to_string(),
                reason: "inadmissible index: the first exponent must be at least 2".into(),
            });
        }
        v.push(e);
    }
    Ok(MultiIndex(v))
}

/// All admissible indices of the given weight, by depth then lexicographically.
///
/// There are `2^(weight−2)` of them.
pub fn enumerate_admissible(weight: u32) -> Result<Vec<MultiIndex>, TvError> {
    if weight < 2 {
        return Err(TvError::invalid(format!("weight must be at least 2, got {weight}")));
    }
    let mut out = Vec::with_capacity(1usize << (weight - 2).min(40));
    for k1 in 2..=weight {
        let mut rest = Vec::new();
        compositions(weight - k1, &mut vec![k1], &mut rest);
        out.extend(rest);
    }
    out.sort_by(|a, b| a.depth().cmp(&b.depth()).then_with(|| a.0.cmp(&b.0)));
    Ok(out)
}

fn compositions(remaining: u32, prefix: &mut Vec<u32>, out: &mut Vec<MultiIndex>) {
    if remaining == 0 {
        out.push(MultiIndex(prefix.clone()));
        return;
    }
    for e in 1..=remaining {
        prefix.push(e);
        compositions(remaining - e, prefix, out);
        prefix.pop();
    }
}

/// All admissible indices (including the empty one) of weight at most `w`.
pub fn enumerate_up_to(weight_max: u32) -> Vec<MultiIndex> {
    let mut out = vec![MultiIndex::empty()];
    for w in 2..=weight_max {
        out.extend(enumerate_admissible(w).unwrap_or_default());
    }
    out
}

/// The real number `t(k)_n`; offset 0 is the full value `t(k)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ValueSpec {
    pub index: MultiIndex,
    pub tail_offset: u64,
}

impl ValueSpec {
    pub fn new(index: MultiIndex, tail_offset: u64) -> Result<Self, TvError> {
        if !index.is_admissible() {
            return Err(TvError::invalid(format!(
                "index ({index}) is not admissible: the first exponent must be at least 2"
            )));
        }
        Ok(Self { index, tail_offset })
    }

    pub fn full(index: MultiIndex) -> Result<Self, TvError> {
        Self::new(index, 0)
    }

    pub fn tail(index: MultiIndex) -> Result<Self, TvError> {
        Self::new(index, 1)
    }
}

impl fmt::Display for ValueSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.tail_offset == 0 {
            write!(f, "{}", self.index)
        } else {
            write!(f, "tail:{}:{}", self.tail_offset, self.index)
        }
    }
}

impl FromStr for ValueSpec {
    type Err = TvError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_spec(s)
    }
}

/// Parses `<index>` or `tail:<n>:<index>`.
pub fn parse_spec(text: &str) -> Result<ValueSpec, TvError> {
    let text = text.trim();
    if let Some(rest) = text.strip_prefix("tail:") {
        let (n, idx) = rest.split_once(':').ok_or_else(|| TvError::Parse {
            token: text.to_string(),
            reason: "expected tail:<n>:<index>".into(),
        })?;
        let n: u64 = n.trim().parse().map_err(|_| TvError::Parse {
            token: n.to_string(),
            reason: "tail offset must be a non-negative integer".into(),
        })?;
        return Ok(ValueSpec {
            index: parse_index(idx)?,
            tail_offset: n,
        });
    }
    Ok(ValueSpec {
        index: parse_index(text)?,
        tail_offset: 0,
    })
}
