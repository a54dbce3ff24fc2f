//! Cylinder words: an offset into the generation sequence plus one branch
//! index per subsequent generation.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// A word at offset `p` of length `n` selects branches for generations
/// `p, p+1, ..., p+n-1` (0-based). The empty word at offset `p` denotes the
/// whole limit set of the `p`-shifted system.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Word {
    offset: usize,
    branches: Vec<u32>,
}

impl Word {
    pub fn new(offset: usize, branches: Vec<u32>) -> Self {
        Self { offset, branches }
    }

    pub fn empty(offset: usize) -> Self {
        Self { offset, branches: Vec::new() }
    }

    pub fn offset(&self) -> usize {
        self.offset
    }

    pub fn len(&self) -> usize {
        self.branches.len()
    }

    pub fn is_empty(&self) -> bool {
        self.branches.is_empty()
    }

    pub fn branches(&self) -> &[u32] {
        &self.branches
    }

    /// Word with `ext` appended (same offset).
    pub fn extended(&self, ext: &[u32]) -> Word {
        let mut branches = Vec::with_capacity(self.branches.len() + ext.len());
        branches.extend_from_slice(&self.branches);
        branches.extend_from_slice(ext);
        Word { offset: self.offset, branches }
    }

    /// First `n` letters (same offset).
    pub fn prefix(&self, n: usize) -> Result<Word> {
        if n > self.len() {
            return Err(Error::InvalidWord(format!(
                "prefix of length {n} from word of length {}",
                self.len()
            )));
        }
        Ok(Word { offset: self.offset, branches: self.branches[..n].to_vec() })
    }

    /// Canonical text form: dash-joined branch indices, empty string for the
    /// empty word. Used by every CSV surface.
    pub fn text(&self) -> String {
        self.branches
            .iter()
            .map(|b| b.to_string())
            .collect::<Vec<_>>()
            .join("-")
    }

    /// Parses the canonical text form.
    pub fn from_text(offset: usize, text: &str) -> Result<Word> {
        if text.is_empty() {
            return Ok(Word::empty(offset));
        }
        let branches = text
            .split('-')
            .map(|t| {
                t.parse::<u32>()
                    .map_err(|_| Error::Format(format!("bad branch index {t:?} in word {text:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Word::new(offset, branches))
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}@{}]", self.text(), self.offset)
    }
}

/// Mixed-radix rank of `branches` under per-generation alphabet sizes
/// `degrees` (most significant digit first, so ranks of a common prefix are
/// contiguous).
pub fn word_index(branches: &[u32], degrees: &[usize]) -> usize {
    debug_assert_eq!(branches.len(), degrees.len());
    let mut idx = 0usize;
    for (b, d) in branches.iter().zip(degrees) {
        idx = idx * d + *b as usize;
    }
    idx
}

/// Inverse of [`word_index`].
pub fn word_from_index(mut idx: usize, degrees: &[usize]) -> Vec<u32> {
    let mut out = vec![0u32; degrees.len()];
    for (slot, d) in out.iter_mut().zip(degrees).rev() {
        *slot = (idx % d) as u32;
        idx /= d;
    }
    out
}
