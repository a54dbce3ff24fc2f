//! Absorption tallies as an estimated measure on cylinders.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use super::walk::WalkerConfig;
use crate::conformal::{word_from_index, word_index, Word};
use crate::error::Error;
use crate::Result;
use crate::symbolic::Functional;

/// Estimated exit distribution: absorption counts over the complete set of
/// cylinders at one depth of one shifted system.
///
/// As a [`Functional`] it exposes `log(count/total)` per word, aggregating
/// exactly (by integer block sums) for words shorter than the assignment
/// depth, so it plugs directly into the symbolic layer's brackets,
/// discrepancies, and dimension formulas.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct MeasureEstimate {
    /// Shift of the system the walkers ran on.
    pub offset: usize,
    /// Cylinder depth the counts are recorded at.
    pub assign_depth: usize,
    /// Branch degrees of levels `offset .. offset + assign_depth`.
    pub degrees: Vec<usize>,
    /// One count per depth-`assign_depth` word, most-significant letter
    /// first.
    pub counts: Vec<u64>,
    /// Number of walkers (every one is absorbed somewhere).
    pub total: u64,
    /// Total jumps taken across all walkers.
    pub total_steps: u64,
    /// Configuration the walkers ran with.
    pub config: WalkerConfig,
}

impl MeasureEstimate {
    /// Contiguous count-slot range covered by `word` (its descendants at
    /// the assignment depth).
    fn block(&self, word: &Word) -> Result<(usize, usize)> {
        if word.offset() != self.offset {
            return Err(Error::OutOfRange(format!(
                "word at offset {} queried against estimate at offset {}",
                word.offset(),
                self.offset
            )));
        }
        let len = word.len();
        if len > self.assign_depth {
            return Err(Error::OutOfRange(format!(
                "word of length {len} exceeds assignment depth {}",
                self.assign_depth
            )));
        }
        for (i, &b) in word.branches().iter().enumerate() {
            if (b as usize) >= self.degrees[i] {
                return Err(Error::OutOfRange(format!(
                    "branch {b} at position {i} exceeds degree {}",
                    self.degrees[i]
                )));
            }
        }
        let width: usize = self.degrees[len..].iter().product();
        let start = word_index(word.branches(), &self.degrees[..len]) * width;
        Ok((start, width))
    }

    /// Absorption count of the cylinder `word` (summed over descendants
    /// when the word is shorter than the assignment depth).
    pub fn count(&self, word: &Word) -> Result<u64> {
        let (start, width) = self.block(word)?;
        Ok(self.counts[start..start + width].iter().sum())
    }

    /// Estimated measure of the cylinder: `count / total`.
    pub fn value(&self, word: &Word) -> Result<f64> {
        Ok(self.count(word)? as f64 / self.total as f64)
    }

    /// Binomial standard error `sqrt(p̂(1 − p̂)/total)` of
    /// [`value`](MeasureEstimate::value).
    pub fn stderr(&self, word: &Word) -> Result<f64> {
        let p = self.value(word)?;
        Ok((p * (1.0 - p) / self.total as f64).sqrt())
    }

    /// Re-labels the same walker set at a coarser depth. Exact: integer
    /// block sums, no re-simulation.
    pub fn aggregate(&self, depth: usize) -> Result<MeasureEstimate> {
        if depth == 0 || depth > self.assign_depth {
            return Err(Error::OutOfRange(format!(
                "aggregation depth {depth} outside 1..={}",
                self.assign_depth
            )));
        }
        let width: usize = self.degrees[depth..].iter().product();
        let counts = self
            .counts
            .chunks(width)
            .map(|chunk| chunk.iter().sum())
            .collect();
        Ok(MeasureEstimate {
            offset: self.offset,
            assign_depth: depth,
            degrees: self.degrees[..depth].to_vec(),
            counts,
            total: self.total,
            total_steps: self.total_steps,
            config: self.config.clone(),
        })
    }

    /// Writes one row per assignment-depth word:
    /// `offset,word,count,value,stderr`.
    pub fn to_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["offset", "word", "count", "value", "stderr"])
            .map_err(|e| Error::Format(e.to_string()))?;
        for (idx, &count) in self.counts.iter().enumerate() {
            let word = Word::new(self.offset, word_from_index(idx, &self.degrees));
            let value = count as f64 / self.total as f64;
            let stderr = (value * (1.0 - value) / self.total as f64).sqrt();
            w.write_record([
                self.offset.to_string(),
                word.text(),
                count.to_string(),
                format!("{value}"),
                format!("{stderr}"),
            ])
            .map_err(|e| Error::Format(e.to_string()))?;
        }
        w.flush()?;
        Ok(())
    }

    /// Reads counts written by [`to_csv`](MeasureEstimate::to_csv). Every
    /// assignment-depth word must appear exactly once; degrees are
    /// inferred from the letters present. The walker configuration is not
    /// part of the tabular format, so the imported estimate carries a
    /// default configuration (with `walkers` set to the recovered total)
    /// and zero recorded steps.
    pub fn from_csv<R: Read>(reader: R) -> Result<Self> {
        let mut r = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
        let mut rows: Vec<(usize, Vec<u32>, u64)> = Vec::new();
        for record in r.records() {
            let record = record.map_err(|e| Error::Format(e.to_string()))?;
            if record.len() != 5 {
                return Err(Error::Format(format!(
                    "expected 5 columns, got {}",
                    record.len()
                )));
            }
            let offset: usize = record[0]
                .parse()
                .map_err(|_| Error::Format(format!("bad offset {:?}", &record[0])))?;
            let word = Word::from_text(offset, &record[1])?;
            let count: u64 = record[2]
                .parse()
                .map_err(|_| Error::Format(format!("bad count {:?}", &record[2])))?;
            rows.push((offset, word.branches().to_vec(), count));
        }
        if rows.is_empty() {
            return Err(Error::Format("empty estimate table".into()));
        }
        let offset = rows[0].0;
        if rows.iter().any(|(o, _, _)| *o != offset) {
            return Err(Error::Format("mixed offsets in one estimate".into()));
        }
        let depth = rows[0].1.len();
        if depth == 0 || rows.iter().any(|(_, b, _)| b.len() != depth) {
            return Err(Error::Format(
                "estimate rows must all sit at one positive depth".into(),
            ));
        }
        let mut degrees = vec![0usize; depth];
        for (_, branches, _) in &rows {
            for (i, &b) in branches.iter().enumerate() {
                degrees[i] = degrees[i].max(b as usize + 1);
            }
        }
        let slots: usize = degrees.iter().product();
        if rows.len() != slots {
            return Err(Error::Format(format!(
                "expected {slots} rows for degrees {degrees:?}, got {}",
                rows.len()
            )));
        }
        let mut counts = vec![u64::MAX; slots];
        for (_, branches, count) in &rows {
            let slot = word_index(branches, &degrees);
            if counts[slot] != u64::MAX {
                return Err(Error::Format(format!(
                    "duplicate word {branches:?} in estimate"
                )));
            }
            counts[slot] = *count;
        }
        let total: u64 = counts.iter().sum();
        if total == 0 {
            return Err(Error::Format("estimate has no absorbed walkers".into()));
        }
        Ok(MeasureEstimate {
            offset,
            assign_depth: depth,
            degrees,
            counts,
            total,
            total_steps: 0,
            config: WalkerConfig {
                walkers: total,
                ..WalkerConfig::default()
            },
        })
    }
}

impl Functional for MeasureEstimate {
    fn offset(&self) -> usize {
        self.offset
    }

    fn max_depth(&self) -> usize {
        self.assign_depth
    }

    fn degree(&self, level: usize) -> usize {
        self.degrees.get(level).copied().unwrap_or(0)
    }

    fn log_value(&self, word: &Word) -> Result<f64> {
        let count = self.count(word)?;
        if count == 0 {
            return Err(Error::NonPositive(format!(
                "no absorptions in cylinder {}; its log-measure is undefined",
                word.text()
            )));
        }
        Ok((count as f64 / self.total as f64).ln())
    }

    fn is_measure(&self) -> bool {
        true
    }

    fn sample_size(&self) -> Option<u64> {
        Some(self.total)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn synthetic() -> MeasureEstimate {
        MeasureEstimate {
            offset: 0,
            assign_depth: 2,
            degrees: vec![2, 2],
            counts: vec![10, 30, 25, 35],
            total: 100,
            total_steps: 4_000,
            config: WalkerConfig {
                walkers: 100,
                ..WalkerConfig::default()
            },
        }
    }

    #[test]
    fn counts_aggregate_by_blocks() {
        let est = synthetic();
        assert_eq!(est.count(&Word::new(0, vec![0])).unwrap(), 40);
        assert_eq!(est.count(&Word::new(0, vec![1])).unwrap(), 60);
        assert_eq!(est.count(&Word::empty(0)).unwrap(), 100);
        assert_eq!(est.value(&Word::new(0, vec![1, 0])).unwrap(), 0.25);
        let coarse = est.aggregate(1).unwrap();
        assert_eq!(coarse.counts, vec![40, 60]);
        assert_eq!(coarse.degrees, vec![2]);
    }

    #[test]
    fn functional_view_logs_counts_and_flags_zeros() {
        let mut est = synthetic();
        assert!(est.is_measure());
        assert_eq!(est.sample_size(), Some(100));
        let lv = est.log_value(&Word::new(0, vec![0, 1])).unwrap();
        assert!((lv - (0.30f64).ln()).abs() < 1e-15);
        est.counts[0] = 0;
        assert!(matches!(
            est.log_value(&Word::new(0, vec![0, 0])),
            Err(Error::NonPositive(_))
        ));
    }

    #[test]
    fn stderr_follows_binomial_formula() {
        let est = synthetic();
        let w = Word::new(0, vec![1]);
        let se = est.stderr(&w).unwrap();
        assert!((se - (0.6f64 * 0.4 / 100.0).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn csv_roundtrip_preserves_counts() {
        let est = synthetic();
        let mut buf = Vec::new();
        est.to_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("offset,word,count,value,stderr"));
        let back = MeasureEstimate::from_csv(buf.as_slice()).unwrap();
        assert_eq!(back.counts, est.counts);
        assert_eq!(back.degrees, est.degrees);
        assert_eq!(back.total, est.total);
    }

    #[test]
    fn mismatched_offset_and_deep_words_are_rejected() {
        let est = synthetic();
        assert!(est.count(&Word::new(1, vec![0])).is_err());
        assert!(est.count(&Word::new(0, vec![0, 0, 0])).is_err());
        assert!(est.count(&Word::new(0, vec![2])).is_err());
    }
}
