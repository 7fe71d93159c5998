//! Memory labels: subsets of the encoder memories `{1..m}`.
//!
//! Memory `i` is bit `i - 1` of the mask. A register labelled `L` holds the
//! soft estimate of the XOR of the memories in `L`.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Label(pub u32);

impl Label {
    pub const EMPTY: Label = Label(0);

    pub fn single(i: usize) -> Self {
        Label(1 << (i - 1))
    }

    pub fn from_indices(idx: &[usize]) -> Self {
        Label(idx.iter().fold(0, |acc, &i| acc ^ (1 << (i - 1))))
    }

    pub fn indices(self) -> Vec<usize> {
        (0..32).filter(|b| self.0 >> b & 1 == 1).map(|b| b + 1).collect()
    }

    pub fn mask(self) -> usize {
        self.0 as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn contains(self, i: usize) -> bool {
        i >= 1 && self.0 >> (i - 1) & 1 == 1
    }

    /// Symmetric difference.
    pub fn sdo(self, other: Label) -> Label {
        Label(self.0 ^ other.0)
    }

    /// Memory relabelling `j -> m + 1 - j`.
    pub fn reversed(self, m: usize) -> Label {
        Label(bitrev(self.0 as usize, m) as u32)
    }

    /// Mask over the state index `s = sum_i M_i 2^(m-i)` selecting the same
    /// memories.
    pub fn state_mask(self, m: usize) -> usize {
        bitrev(self.0 as usize, m)
    }
}

/// Reverses the low `m` bits of `x`.
pub fn bitrev(x: usize, m: usize) -> usize {
    if m == 0 {
        return 0;
    }
    x.reverse_bits() >> (usize::BITS as usize - m)
}

/// All nonempty labels over `m` memories, by mask.
pub fn all_labels(m: usize) -> impl Iterator<Item = Label> {
    (1..(1u32 << m)).map(Label)
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.indices().iter().map(|i| i.to_string()).collect();
        write!(f, "{{{}}}", parts.join(","))
    }
}

impl fmt::Debug for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for Label {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let inner = s
            .trim()
            .strip_prefix('{')
            .and_then(|r| r.strip_suffix('}'))
            .ok_or_else(|| Error::InvalidInput(format!("label {s:?} must look like {{1,2}}")))?;
        let mut mask = 0u32;
        for part in inner.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let i: usize = part
                .parse()
                .map_err(|_| Error::InvalidInput(format!("bad memory index {part:?}")))?;
            if !(1..=31).contains(&i) || mask >> (i - 1) & 1 == 1 {
                return Err(Error::InvalidInput(format!("bad memory index {part:?} in {s:?}")));
            }
            mask |= 1 << (i - 1);
        }
        Ok(Label(mask))
    }
}

/// Formats a label sequence as `({2},{1,2},{1})`.
pub fn format_labels(labels: &[Label]) -> String {
    let parts: Vec<String> = labels.iter().map(|l| l.to_string()).collect();
    format!("({})", parts.join(","))
}

pub fn parse_labels(s: &str) -> Result<Vec<Label>> {
    let inner = s
        .trim()
        .strip_prefix('(')
        .and_then(|r| r.strip_suffix(')'))
        .ok_or_else(|| Error::InvalidInput(format!("label list {s:?} must be parenthesised")))?;
    let mut out = Vec::new();
    let mut rest = inner.trim();
    while !rest.is_empty() {
        let end = rest
            .find('}')
            .ok_or_else(|| Error::InvalidInput(format!("unterminated label in {s:?}")))?;
        out.push(rest[..=end].parse()?);
        rest = rest[end + 1..].trim_start_matches([',', ' ']);
    }
    Ok(out)
}
