//! The `Functional` trait: positive-valued maps on cylinder words, evaluated
//! in log space, plus the extension-enumeration helpers shared by every
//! aggregate operation in this module.

use crate::conformal::Word;
use crate::error::Error;
use crate::Result;

/// A strictly positive functional on the cylinder tree rooted at a fixed
/// generation offset.
///
/// Values are exposed through natural logarithms so that deep words (where
/// raw values underflow) stay representable.  Implementations cover all
/// words `X` with `X.offset() == offset()` and `X.len() <= max_depth()`.
///
/// The conditional value `relative(X, Y) = value(X·Y) / value(X)` is the
/// quantity every aggregate below is built from.  The default
/// [`log_relative`](Functional::log_relative) subtracts two `log_value`
/// calls; backings whose conditionals depend only on the extension letters
/// (product measures, similarity derivative cocycles) override it so the
/// prefix cancels *exactly*, making sibling-invariance discrepancies come
/// out as floating-point zero rather than rounding noise.
pub trait Functional {
    /// Generation index of the first letter of every covered word.
    fn offset(&self) -> usize;

    /// Largest covered word length.
    fn max_depth(&self) -> usize;

    /// Branching degree at `level` letters below the offset
    /// (i.e. at generation `offset() + level`); `level < max_depth()`.
    fn degree(&self, level: usize) -> usize;

    /// Natural log of the value on `word`.
    fn log_value(&self, word: &Word) -> Result<f64>;

    /// `log(value(base·ext) / value(base))`.
    ///
    /// Override when the conditional is computable from `ext` alone (up to
    /// terms that cancel bitwise); the default subtracts two full
    /// evaluations and is exact only up to rounding.
    fn log_relative(&self, base: &Word, ext: &[u32]) -> Result<f64> {
        Ok(self.log_value(&base.extended(ext))? - self.log_value(base)?)
    }

    /// The conditional value `value(base·ext) / value(base)` itself.
    fn relative(&self, base: &Word, ext: &[u32]) -> Result<f64> {
        Ok(self.log_relative(base, ext)?.exp())
    }

    /// The raw value on `word`.
    fn value(&self, word: &Word) -> Result<f64> {
        Ok(self.log_value(word)?.exp())
    }

    /// Whether the functional is a probability measure on the tree:
    /// `Σ_a value(X·a) = value(X)` for every covered `X`, and `value(∅) = 1`.
    fn is_measure(&self) -> bool {
        false
    }

    /// Number of Monte Carlo samples behind the values, when the functional
    /// is an empirical estimate; `None` for exact backings.  Consumers use
    /// it to attach standard errors to derived statistics.
    fn sample_size(&self) -> Option<u64> {
        None
    }
}

/// Checks that `word` lies in the range of `nu` and leaves `extra` more
/// levels of headroom below it.
pub(crate) fn check_range(nu: &dyn Functional, word: &Word, extra: usize) -> Result<()> {
    if word.offset() != nu.offset() {
        return Err(Error::OutOfRange(format!(
            "word offset {} does not match functional offset {}",
            word.offset(),
            nu.offset()
        )));
    }
    let needed = word.len() + extra;
    if needed > nu.max_depth() {
        return Err(Error::OutOfRange(format!(
            "depth {} exceeds functional range {}",
            needed,
            nu.max_depth()
        )));
    }
    for (level, &letter) in word.branches().iter().enumerate() {
        if letter as usize >= nu.degree(level) {
            return Err(Error::OutOfRange(format!(
                "letter {} at level {} exceeds degree {}",
                letter,
                level,
                nu.degree(level)
            )));
        }
    }
    Ok(())
}

/// Branching degrees of the `n` levels below a length-`base_len` word.
pub(crate) fn level_degrees(nu: &dyn Functional, base_len: usize, n: usize) -> Result<Vec<usize>> {
    if base_len + n > nu.max_depth() {
        return Err(Error::OutOfRange(format!(
            "depth {} exceeds functional range {}",
            base_len + n,
            nu.max_depth()
        )));
    }
    Ok((base_len..base_len + n).map(|l| nu.degree(l)).collect())
}

/// Degrees of the `n` levels below `base_len`, required to agree between
/// two functionals sharing an offset.
pub(crate) fn common_degrees(
    a: &dyn Functional,
    b: &dyn Functional,
    base_len: usize,
    n: usize,
) -> Result<Vec<usize>> {
    if a.offset() != b.offset() {
        return Err(Error::Config(format!(
            "functional offsets differ: {} vs {}",
            a.offset(),
            b.offset()
        )));
    }
    let da = level_degrees(a, base_len, n)?;
    let db = level_degrees(b, base_len, n)?;
    if da != db {
        return Err(Error::Config(format!(
            "functional degrees differ on levels {base_len}..{}",
            base_len + n
        )));
    }
    Ok(da)
}

/// Iterator over all letter tuples of a fixed length, odometer order
/// (first letter most significant).  Yields the empty tuple once when
/// `degrees` is empty.
pub struct Extensions {
    degrees: Vec<usize>,
    current: Vec<u32>,
    exhausted: bool,
}

impl Extensions {
    pub fn new(degrees: &[usize]) -> Self {
        let exhausted = degrees.iter().any(|&d| d == 0);
        Extensions {
            degrees: degrees.to_vec(),
            current: vec![0; degrees.len()],
            exhausted,
        }
    }

    /// Total number of tuples.
    pub fn count(degrees: &[usize]) -> usize {
        degrees.iter().product()
    }
}

impl Iterator for Extensions {
    type Item = Vec<u32>;

    fn next(&mut self) -> Option<Vec<u32>> {
        if self.exhausted {
            return None;
        }
        let item = self.current.clone();
        // Advance the odometer from the least significant (last) position.
        let mut pos = self.degrees.len();
        loop {
            if pos == 0 {
                self.exhausted = true;
                break;
            }
            pos -= 1;
            self.current[pos] += 1;
            if (self.current[pos] as usize) < self.degrees[pos] {
                break;
            }
            self.current[pos] = 0;
        }
        Some(item)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbolic::UniformMeasure;

    #[test]
    fn extensions_enumerate_mixed_radix_in_order() {
        let ext: Vec<Vec<u32>> = Extensions::new(&[2, 3]).collect();
        assert_eq!(
            ext,
            vec![
                vec![0, 0],
                vec![0, 1],
                vec![0, 2],
                vec![1, 0],
                vec![1, 1],
                vec![1, 2]
            ]
        );
        assert_eq!(Extensions::count(&[2, 3]), 6);
    }

    #[test]
    fn empty_extension_yields_single_empty_tuple() {
        let ext: Vec<Vec<u32>> = Extensions::new(&[]).collect();
        assert_eq!(ext, vec![Vec::<u32>::new()]);
    }

    #[test]
    fn range_checks_reject_offset_and_depth_mismatches() {
        let nu = UniformMeasure::new(1, vec![2, 2]);
        let bad_offset = Word::new(0, vec![0]);
        assert!(check_range(&nu, &bad_offset, 0).is_err());
        let deep = Word::new(1, vec![0, 1]);
        assert!(check_range(&nu, &deep, 0).is_ok());
        assert!(check_range(&nu, &deep, 1).is_err());
        let bad_letter = Word::new(1, vec![2]);
        assert!(check_range(&nu, &bad_letter, 0).is_err());
    }
}
