//! Concrete `Functional` backings: dense log-value tables (with CSV
//! import/export), uniform and per-generation product measures, and the
//! derivative-modulus diameter proxy that delegates to the conformal layer.

use std::io::{Read, Write};

use num_complex::Complex64;

use crate::conformal::{evaluate_word, word_index, SystemSpec, Word};
use crate::error::Error;
use crate::numeric::KahanSum;
use crate::symbolic::functional::{check_range, Extensions, Functional};
use crate::Result;

/// Relative tolerance for the child-sum = parent check when a table claims
/// to be a probability measure.
pub(crate) const MEASURE_SUM_TOL: f64 = 1e-9;

/// A functional materialized as one log-value per word, level by level.
///
/// Level `l` holds the values of all length-`l` words in mixed-radix order
/// (first letter most significant), so a word's slot is `word_index` of its
/// branches; level 0 is the single root value.
#[derive(Debug, Clone)]
pub struct DenseTable {
    offset: usize,
    degrees: Vec<usize>,
    levels: Vec<Vec<f64>>,
    measure: bool,
}

impl DenseTable {
    /// Builds a table from natural-log values; `levels[l]` must have exactly
    /// `d_0·…·d_{l-1}` finite entries.
    pub fn from_log_levels(
        offset: usize,
        degrees: Vec<usize>,
        levels: Vec<Vec<f64>>,
    ) -> Result<Self> {
        if levels.len() != degrees.len() + 1 {
            return Err(Error::Config(format!(
                "expected {} levels for {} degrees, got {}",
                degrees.len() + 1,
                degrees.len(),
                levels.len()
            )));
        }
        if degrees.iter().any(|&d| d == 0) {
            return Err(Error::Config("zero branching degree".into()));
        }
        let mut expect = 1usize;
        for (l, level) in levels.iter().enumerate() {
            if level.len() != expect {
                return Err(Error::Config(format!(
                    "level {} has {} entries, expected {}",
                    l,
                    level.len(),
                    expect
                )));
            }
            if let Some(bad) = level.iter().find(|v| !v.is_finite()) {
                return Err(Error::NonPositive(format!(
                    "non-finite log value {bad} at level {l}"
                )));
            }
            if l < degrees.len() {
                expect *= degrees[l];
            }
        }
        Ok(DenseTable {
            offset,
            degrees,
            levels,
            measure: false,
        })
    }

    /// Builds a table from raw positive values.
    pub fn from_levels(offset: usize, degrees: Vec<usize>, levels: Vec<Vec<f64>>) -> Result<Self> {
        let logs = levels
            .iter()
            .map(|level| {
                level
                    .iter()
                    .map(|&v| {
                        if v > 0.0 && v.is_finite() {
                            Ok(v.ln())
                        } else {
                            Err(Error::NonPositive(format!("table value {v}")))
                        }
                    })
                    .collect::<Result<Vec<f64>>>()
            })
            .collect::<Result<Vec<Vec<f64>>>>()?;
        Self::from_log_levels(offset, degrees, logs)
    }

    /// Materializes any functional down to `max_depth`, inheriting its
    /// measure flag.
    pub fn from_functional(nu: &dyn Functional, max_depth: usize) -> Result<Self> {
        if max_depth > nu.max_depth() {
            return Err(Error::OutOfRange(format!(
                "materialization depth {} exceeds functional range {}",
                max_depth,
                nu.max_depth()
            )));
        }
        let degrees: Vec<usize> = (0..max_depth).map(|l| nu.degree(l)).collect();
        let mut levels = Vec::with_capacity(max_depth + 1);
        for l in 0..=max_depth {
            let mut level = Vec::with_capacity(Extensions::count(&degrees[..l]));
            for branches in Extensions::new(&degrees[..l]) {
                level.push(nu.log_value(&Word::new(nu.offset(), branches))?);
            }
            levels.push(level);
        }
        Ok(DenseTable {
            offset: nu.offset(),
            degrees,
            levels,
            measure: nu.is_measure(),
        })
    }

    /// Validates the probability-measure structure (root value 1, child sums
    /// reproduce parents within `1e-9` relative) and flags the table as a
    /// measure.
    pub fn into_measure(mut self) -> Result<Self> {
        if self.levels[0][0].abs() > MEASURE_SUM_TOL {
            return Err(Error::NonMeasure(format!(
                "root value {} is not 1",
                self.levels[0][0].exp()
            )));
        }
        for l in 0..self.degrees.len() {
            let d = self.degrees[l];
            for (parent_idx, &parent_log) in self.levels[l].iter().enumerate() {
                let mut sum = KahanSum::new();
                for child in 0..d {
                    sum.add(self.levels[l + 1][parent_idx * d + child].exp());
                }
                let parent = parent_log.exp();
                if (sum.total() - parent).abs() > MEASURE_SUM_TOL * parent.max(1.0) {
                    return Err(Error::NonMeasure(format!(
                        "children of word {} at level {} sum to {}, parent is {}",
                        parent_idx,
                        l,
                        sum.total(),
                        parent
                    )));
                }
            }
        }
        self.measure = true;
        Ok(self)
    }

    /// Writes the table as CSV with columns `offset,word,log_value`
    /// (the empty word string denotes the root).
    pub fn to_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["offset", "word", "log_value"])
            .map_err(|e| Error::Format(e.to_string()))?;
        for (l, level) in self.levels.iter().enumerate() {
            for (idx, &log_value) in level.iter().enumerate() {
                let branches = crate::conformal::word_from_index(idx, &self.degrees[..l]);
                let word = Word::new(self.offset, branches);
                w.write_record([
                    self.offset.to_string(),
                    word.text(),
                    format!("{log_value}"),
                ])
                .map_err(|e| Error::Format(e.to_string()))?;
            }
        }
        w.flush()?;
        Ok(())
    }

    /// Reads a table written by [`to_csv`](DenseTable::to_csv).  Every word
    /// of every level up to the deepest one present must appear exactly
    /// once; degrees are inferred from the per-level word counts.
    pub fn from_csv<R: Read>(reader: R) -> Result<Self> {
        let mut r = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
        let mut rows: Vec<(usize, Vec<u32>, f64)> = Vec::new();
        for record in r.records() {
            let record = record.map_err(|e| Error::Format(e.to_string()))?;
            if record.len() != 3 {
                return Err(Error::Format(format!(
                    "expected 3 columns, got {}",
                    record.len()
                )));
            }
            let offset: usize = record[0]
                .parse()
                .map_err(|_| Error::Format(format!("bad offset {:?}", &record[0])))?;
            let word = Word::from_text(offset, &record[1])?;
            let log_value: f64 = record[2]
                .parse()
                .map_err(|_| Error::Format(format!("bad log value {:?}", &record[2])))?;
            rows.push((offset, word.branches().to_vec(), log_value));
        }
        if rows.is_empty() {
            return Err(Error::Format("empty table".into()));
        }
        let offset = rows[0].0;
        if rows.iter().any(|(o, _, _)| *o != offset) {
            return Err(Error::Format("mixed offsets in one table".into()));
        }
        let max_depth = rows.iter().map(|(_, b, _)| b.len()).max().unwrap_or(0);
        // Infer degrees from the letters present, then check completeness.
        let mut degrees = vec![0usize; max_depth];
        for (_, branches, _) in &rows {
            for (l, &letter) in branches.iter().enumerate() {
                degrees[l] = degrees[l].max(letter as usize + 1);
            }
        }
        if degrees.iter().any(|&d| d == 0) {
            return Err(Error::Format("a level has no words".into()));
        }
        let mut levels: Vec<Vec<Option<f64>>> = (0..=max_depth)
            .map(|l| vec![None; Extensions::count(&degrees[..l])])
            .collect();
        for (_, branches, log_value) in &rows {
            let l = branches.len();
            let idx = word_index(branches, &degrees[..l]);
            if levels[l][idx].replace(*log_value).is_some() {
                return Err(Error::Format(format!(
                    "duplicate word at level {l} index {idx}"
                )));
            }
        }
        let levels = levels
            .into_iter()
            .enumerate()
            .map(|(l, level)| {
                level
                    .into_iter()
                    .enumerate()
                    .map(|(idx, v)| {
                        v.ok_or_else(|| {
                            Error::Format(format!("missing word at level {l} index {idx}"))
                        })
                    })
                    .collect::<Result<Vec<f64>>>()
            })
            .collect::<Result<Vec<Vec<f64>>>>()?;
        Self::from_log_levels(offset, degrees, levels)
    }

    fn slot(&self, word: &Word) -> Result<f64> {
        check_range(self, word, 0)?;
        let idx = word_index(word.branches(), &self.degrees[..word.len()]);
        Ok(self.levels[word.len()][idx])
    }
}

impl Functional for DenseTable {
    fn offset(&self) -> usize {
        self.offset
    }

    fn max_depth(&self) -> usize {
        self.degrees.len()
    }

    fn degree(&self, level: usize) -> usize {
        self.degrees[level]
    }

    fn log_value(&self, word: &Word) -> Result<f64> {
        self.slot(word)
    }

    fn is_measure(&self) -> bool {
        self.measure
    }
}

/// The equal-split measure: every length-`n` word from the offset has value
/// `1/(d_0·…·d_{n-1})`.
#[derive(Debug, Clone)]
pub struct UniformMeasure {
    offset: usize,
    degrees: Vec<usize>,
}

impl UniformMeasure {
    pub fn new(offset: usize, degrees: Vec<usize>) -> Self {
        UniformMeasure { offset, degrees }
    }
}

impl Functional for UniformMeasure {
    fn offset(&self) -> usize {
        self.offset
    }

    fn max_depth(&self) -> usize {
        self.degrees.len()
    }

    fn degree(&self, level: usize) -> usize {
        self.degrees[level]
    }

    fn log_value(&self, word: &Word) -> Result<f64> {
        check_range(self, word, 0)?;
        let mut sum = 0.0;
        for l in 0..word.len() {
            sum -= (self.degrees[l] as f64).ln();
        }
        Ok(sum)
    }

    fn log_relative(&self, base: &Word, ext: &[u32]) -> Result<f64> {
        check_range(self, &base.extended(ext), 0)?;
        let mut sum = 0.0;
        for l in base.len()..base.len() + ext.len() {
            sum -= (self.degrees[l] as f64).ln();
        }
        Ok(sum)
    }

    fn is_measure(&self) -> bool {
        true
    }
}

/// A product measure with one probability vector per generation: the value
/// of a word is the product of its letters' probabilities.
///
/// Conditionals depend only on the extension letters, so
/// [`log_relative`](Functional::log_relative) is prefix-exact.
#[derive(Debug, Clone)]
pub struct BernoulliMeasure {
    offset: usize,
    log_probs: Vec<Vec<f64>>,
}

impl BernoulliMeasure {
    /// `probs[l]` is the probability vector at level `l`; every entry must
    /// be strictly positive and each vector must sum to 1 within `1e-9`.
    pub fn new(offset: usize, probs: Vec<Vec<f64>>) -> Result<Self> {
        let mut log_probs = Vec::with_capacity(probs.len());
        for (l, row) in probs.iter().enumerate() {
            if row.is_empty() {
                return Err(Error::Config(format!("empty probability vector at level {l}")));
            }
            let mut sum = KahanSum::new();
            let mut logs = Vec::with_capacity(row.len());
            for &p in row {
                if !(p > 0.0 && p.is_finite()) {
                    return Err(Error::NonPositive(format!(
                        "probability {p} at level {l}"
                    )));
                }
                sum.add(p);
                logs.push(p.ln());
            }
            if (sum.total() - 1.0).abs() > MEASURE_SUM_TOL {
                return Err(Error::NonMeasure(format!(
                    "level {l} probabilities sum to {}",
                    sum.total()
                )));
            }
            log_probs.push(logs);
        }
        Ok(BernoulliMeasure { offset, log_probs })
    }
}

impl Functional for BernoulliMeasure {
    fn offset(&self) -> usize {
        self.offset
    }

    fn max_depth(&self) -> usize {
        self.log_probs.len()
    }

    fn degree(&self, level: usize) -> usize {
        self.log_probs[level].len()
    }

    fn log_value(&self, word: &Word) -> Result<f64> {
        check_range(self, word, 0)?;
        Ok(word
            .branches()
            .iter()
            .enumerate()
            .map(|(l, &a)| self.log_probs[l][a as usize])
            .sum())
    }

    fn log_relative(&self, base: &Word, ext: &[u32]) -> Result<f64> {
        check_range(self, &base.extended(ext), 0)?;
        Ok(ext
            .iter()
            .enumerate()
            .map(|(i, &a)| self.log_probs[base.len() + i][a as usize])
            .sum())
    }

    fn is_measure(&self) -> bool {
        true
    }
}

/// Cylinder-diameter proxy `|Ψ_X'(0)|`: the modulus of the composed map's
/// derivative at the disk center, the conformal stand-in for the cylinder's
/// diameter up to a bounded distortion factor.
///
/// The conditional `|Ψ_{XY}'(0)| / |Ψ_X'(0)|` is computed by the chain rule
/// as `|Ψ_X'(z_Y)| · |Ψ_Y'(0)| / |Ψ_X'(0)|` with `z_Y = Ψ_Y(0)`; for pure
/// similarity systems the prefix factors cancel bitwise, so conditionals
/// depend on the extension alone.
pub struct DerivProxyDiameter<'a> {
    system: &'a SystemSpec,
    offset: usize,
    max_depth: usize,
}

impl<'a> DerivProxyDiameter<'a> {
    pub fn new(system: &'a SystemSpec, offset: usize, max_depth: usize) -> Result<Self> {
        if offset + max_depth > system.horizon() {
            return Err(Error::HorizonExceeded {
                requested: offset + max_depth,
                horizon: system.horizon(),
            });
        }
        Ok(DerivProxyDiameter {
            system,
            offset,
            max_depth,
        })
    }
}

impl Functional for DerivProxyDiameter<'_> {
    fn offset(&self) -> usize {
        self.offset
    }

    fn max_depth(&self) -> usize {
        self.max_depth
    }

    fn degree(&self, level: usize) -> usize {
        self.system.degree(self.offset + level).unwrap_or(0)
    }

    fn log_value(&self, word: &Word) -> Result<f64> {
        check_range(self, word, 0)?;
        let (_, deriv) = evaluate_word(self.system, word, Complex64::new(0.0, 0.0))?;
        Ok(deriv.norm().ln())
    }

    fn log_relative(&self, base: &Word, ext: &[u32]) -> Result<f64> {
        check_range(self, &base.extended(ext), 0)?;
        let tail = Word::new(base.offset() + base.len(), ext.to_vec());
        let (z_tail, d_tail) = evaluate_word(self.system, &tail, Complex64::new(0.0, 0.0))?;
        let (_, d_base_at_tail) = evaluate_word(self.system, base, z_tail)?;
        let (_, d_base_at_zero) = evaluate_word(self.system, base, Complex64::new(0.0, 0.0))?;
        Ok(d_base_at_tail.norm().ln() + d_tail.norm().ln() - d_base_at_zero.norm().ln())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conformal::{
        autonomous_similarities, ConformalMap, DomainConfig, ModeTag, SystemConfig,
    };
    use approx::assert_relative_eq;
    use num_complex::Complex64;

    fn bernoulli_64(levels: usize) -> BernoulliMeasure {
        BernoulliMeasure::new(0, vec![vec![0.6, 0.4]; levels]).unwrap()
    }

    #[test]
    fn uniform_relative_is_equal_split() {
        let nu = UniformMeasure::new(0, vec![2; 5]);
        let base = Word::empty(0);
        let r = nu.relative(&base, &[0, 1, 0]).unwrap();
        assert_relative_eq!(r, 0.125, max_relative = 1e-15);
        assert!(nu.is_measure());
    }

    #[test]
    fn bernoulli_rejects_bad_vectors() {
        assert!(matches!(
            BernoulliMeasure::new(0, vec![vec![0.5, -0.5]]),
            Err(Error::NonPositive(_))
        ));
        assert!(matches!(
            BernoulliMeasure::new(0, vec![vec![0.5, 0.4]]),
            Err(Error::NonMeasure(_))
        ));
    }

    #[test]
    fn bernoulli_conditionals_ignore_the_prefix_bitwise() {
        let nu = bernoulli_64(6);
        let a = Word::new(0, vec![0, 0]);
        let b = Word::new(0, vec![1, 1]);
        let ext = [0u32, 1, 0];
        let la = nu.log_relative(&a, &ext).unwrap();
        let lb = nu.log_relative(&b, &ext).unwrap();
        assert_eq!(la, lb);
        assert_relative_eq!(la, (0.6f64.ln() + 0.4f64.ln() + 0.6f64.ln()), max_relative = 1e-15);
    }

    #[test]
    fn dense_table_materializes_and_roundtrips_csv() {
        let nu = bernoulli_64(3);
        let table = DenseTable::from_functional(&nu, 3).unwrap();
        assert!(table.is_measure());
        let w = Word::new(0, vec![1, 0, 1]);
        assert_eq!(table.log_value(&w).unwrap(), nu.log_value(&w).unwrap());

        let mut buf = Vec::new();
        table.to_csv(&mut buf).unwrap();
        let back = DenseTable::from_csv(buf.as_slice()).unwrap();
        assert_eq!(back.max_depth(), 3);
        assert_eq!(back.log_value(&w).unwrap(), table.log_value(&w).unwrap());
    }

    #[test]
    fn dense_table_measure_validation() {
        let good = DenseTable::from_levels(
            0,
            vec![2],
            vec![vec![1.0], vec![0.25, 0.75]],
        )
        .unwrap()
        .into_measure()
        .unwrap();
        assert!(good.is_measure());

        let bad = DenseTable::from_levels(0, vec![2], vec![vec![1.0], vec![0.25, 0.5]])
            .unwrap()
            .into_measure();
        assert!(matches!(bad, Err(Error::NonMeasure(_))));
    }

    #[test]
    fn deriv_proxy_matches_similarity_powers_and_cancels_prefixes() {
        let system = autonomous_similarities(0.1, &[(0.3, 0.5), (0.3, -0.5)], 10).unwrap();
        let s = DerivProxyDiameter::new(&system, 0, 10).unwrap();
        let w = Word::new(0, vec![0, 1, 0, 1]);
        assert_relative_eq!(s.value(&w).unwrap(), 0.3f64.powi(4), max_relative = 1e-14);

        let a = Word::new(0, vec![0, 0]);
        let b = Word::new(0, vec![1, 1]);
        let ext = [0u32, 1];
        assert_eq!(
            s.log_relative(&a, &ext).unwrap(),
            s.log_relative(&b, &ext).unwrap()
        );
    }

    #[test]
    fn deriv_proxy_override_agrees_with_default_on_quadratics() {
        let maps = vec![
            ConformalMap::quadratic(
                Complex64::new(0.3, 0.0),
                Complex64::new(0.5, 0.0),
                Complex64::new(0.01, 0.0),
            ),
            ConformalMap::quadratic(
                Complex64::new(0.3, 0.0),
                Complex64::new(-0.5, 0.0),
                Complex64::new(-0.01, 0.0),
            ),
        ];
        let system = SystemSpec::from_config(SystemConfig {
            domain: DomainConfig { eta: 0.1, gamma: None },
            mode: ModeTag::Periodic,
            prefix: Vec::new(),
            period: Some(vec![maps]),
            seed: None,
            seeded: None,
            horizon: 8,
            degree_cap: 8,
        })
        .unwrap();
        let s = DerivProxyDiameter::new(&system, 0, 8).unwrap();
        let base = Word::new(0, vec![0, 1]);
        let ext = [1u32, 0, 1];
        let via_override = s.log_relative(&base, &ext).unwrap();
        let via_default =
            s.log_value(&base.extended(&ext)).unwrap() - s.log_value(&base).unwrap();
        assert_relative_eq!(via_override, via_default, epsilon = 1e-12);
    }
}
