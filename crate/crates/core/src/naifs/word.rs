use alloc::format;
use alloc::vec::Vec;
use core::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::Schedule;
use crate::error::{Error, Result};

/// A finite word `w = w_m ... w_{m+n-1}` in `I^{m,n}`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Word {
    start: usize,
    symbols: Vec<u32>,
}

impl Word {
    pub fn new(schedule: &Schedule, start: usize, symbols: Vec<u32>) -> Result<Self> {
        if start == 0 {
            return Err(Error::Word("words start at generation 1 or later".into()));
        }
        for (t, &s) in symbols.iter().enumerate() {
            let size = schedule.size(start + t);
            if s as usize >= size {
                return Err(Error::Word(format!(
                    "symbol {s} at generation {} is outside I^({}) of size {size}",
                    start + t,
                    start + t
                )));
            }
        }
        Ok(Self { start, symbols })
    }

    pub(crate) fn from_parts(start: usize, symbols: Vec<u32>) -> Self {
        Self { start, symbols }
    }

    pub fn start(&self) -> usize {
        self.start
    }

    pub fn symbols(&self) -> &[u32] {
        &self.symbols
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    /// Symbol used at absolute generation `j`.
    #[inline]
    pub fn symbol_at(&self, j: usize) -> Option<u32> {
        j.checked_sub(self.start).and_then(|t| self.symbols.get(t)).copied()
    }

    /// `w' = w_{m+1} ... w_{m+n-1}`.
    pub fn tail(&self) -> Word {
        Word { start: self.start + 1, symbols: self.symbols.get(1..).unwrap_or(&[]).to_vec() }
    }

    /// The same symbols read from generation `start` onwards.
    pub fn rerooted(&self, start: usize) -> Word {
        Word { start, symbols: self.symbols.clone() }
    }

    /// The first `n` symbols.
    pub fn prefix(&self, n: usize) -> Word {
        Word { start: self.start, symbols: self.symbols[..n.min(self.len())].to_vec() }
    }

    /// Groups the word into consecutive blocks of `n` symbols and returns the
    /// corresponding word of the power system `Phi^n`, whose generations list
    /// the block compositions lexicographically. Requires `start == 1` and
    /// `n | len`.
    pub fn blocked(&self, schedule: &Schedule, n: usize) -> Result<Word> {
        if n == 0 || self.start != 1 || !self.len().is_multiple_of(n) {
            return Err(Error::Word(format!(
                "cannot block a word of length {} starting at {} into blocks of {n}",
                self.len(),
                self.start
            )));
        }
        let mut out = Vec::with_capacity(self.len() / n);
        for (b, chunk) in self.symbols.chunks(n).enumerate() {
            let mut rank: u64 = 0;
            for (t, &s) in chunk.iter().enumerate() {
                rank = rank * schedule.size(b * n + t + 1) as u64 + s as u64;
            }
            out.push(u32::try_from(rank).map_err(|_| Error::Word("block rank overflow".into()))?);
        }
        Ok(Word { start: 1, symbols: out })
    }
}

impl fmt::Debug for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "w@{}[", self.start)?;
        for (k, s) in self.symbols.iter().enumerate() {
            if k > 0 {
                f.write_str(",")?;
            }
            write!(f, "{s}")?;
        }
        f.write_str("]")
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sep = if self.symbols.iter().any(|&s| s > 9) { "." } else { "" };
        for (k, s) in self.symbols.iter().enumerate() {
            if k > 0 {
                f.write_str(sep)?;
            }
            write!(f, "{s}")?;
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize), serde(rename_all = "snake_case"))]
pub enum WordMode {
    Exact,
    Sampled,
}

impl WordMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            WordMode::Exact => "exact",
            WordMode::Sampled => "sampled",
        }
    }
}

/// Words of `I^{m,n}`: all of them, or a seeded uniform sample.
#[derive(Clone, Debug, PartialEq)]
pub struct WordSet {
    /// Lexicographically sorted (duplicates possible when sampled).
    pub words: Vec<Word>,
    pub mode: WordMode,
    /// `log #I^{m,n}`.
    pub log_total: f64,
    /// `#I^{m,n}` when it fits in a `u128`.
    pub total: Option<u128>,
}

/// Lists `I^{m,n}` exactly when `#I^{m,n} <= budget`, otherwise draws `budget`
/// words uniformly (i.i.d.) from the product set with a ChaCha stream seeded by
/// `seed`.
pub fn enumerate_words(schedule: &Schedule, m: usize, n: usize, budget: usize, seed: u64) -> Result<WordSet> {
    if m == 0 {
        return Err(Error::GenerationIndex);
    }
    if budget == 0 {
        return Err(Error::ZeroParameter("word_budget"));
    }
    let sizes: Vec<usize> = (m..m + n).map(|j| schedule.size(j)).collect();
    let log_total = schedule.log_word_count(m, n);
    let total = schedule.word_count(m, n);
    let exact = matches!(total, Some(t) if t <= budget as u128);
    let words = if exact {
        let count = total.unwrap_or(1) as usize;
        let mut out = Vec::with_capacity(count);
        let mut digits = alloc::vec![0u32; n];
        for _ in 0..count {
            out.push(Word::from_parts(m, digits.clone()));
            for t in (0..n).rev() {
                digits[t] += 1;
                if (digits[t] as usize) < sizes[t] {
                    break;
                }
                digits[t] = 0;
            }
        }
        out
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut out: Vec<Word> = (0..budget)
            .map(|_| {
                let symbols = sizes.iter().map(|&s| rng.random_range(0..s as u32)).collect();
                Word::from_parts(m, symbols)
            })
            .collect();
        out.sort();
        out
    };
    Ok(WordSet { words, mode: if exact { WordMode::Exact } else { WordMode::Sampled }, log_total, total })
}
