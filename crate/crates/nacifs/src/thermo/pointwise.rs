//! Per-trajectory growth rates, for comparing against cylinder averages.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::conformal::Word;
use crate::error::Error;
use crate::rng;
use crate::symbolic::Functional;
use crate::Result;

/// Growth rates read off a single word.
#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
pub struct PointwiseSample {
    /// `−(1/n) log μ(X)`: information rate along this word.
    pub entropy: f64,
    /// `−(1/n) log diam(X)`: contraction rate along this word.
    pub lyapunov: f64,
    pub ratio: f64,
}

/// Reads the per-word rates off the depth-`n` prefixes of `words`.
///
/// The interesting comparison is distributional: for `words` drawn from
/// `mu` itself, the sampled entropies concentrate around the averaged
/// entropy of [`pressure_record`](crate::thermo::pressure_record) as `n`
/// grows.
pub fn pointwise_samples<M: Functional, D: Functional>(
    mu: &M,
    diam: &D,
    words: &[Word],
    n: usize,
) -> Result<Vec<PointwiseSample>> {
    if n == 0 {
        return Err(Error::OutOfRange("depth must be at least 1".into()));
    }
    let nf = n as f64;
    words
        .iter()
        .map(|word| {
            if word.len() < n {
                return Err(Error::OutOfRange(format!(
                    "sample word of length {} is shorter than depth {n}",
                    word.len()
                )));
            }
            let prefix = word.prefix(n)?;
            let entropy = -mu.log_value(&prefix)? / nf;
            let lyapunov = -diam.log_value(&prefix)? / nf;
            if !(lyapunov > 0.0) {
                return Err(Error::NonPositive(format!(
                    "contraction rate must be positive, got {lyapunov}"
                )));
            }
            Ok(PointwiseSample {
                entropy,
                lyapunov,
                ratio: entropy / lyapunov,
            })
        })
        .collect()
}

/// Draws `count` independent depth-`n` words from the measure `mu`,
/// letter by letter through its conditionals. Children with zero mass are
/// never chosen; a cylinder whose children all vanish is an error.
pub fn sample_words<M: Functional>(
    mu: &M,
    n: usize,
    count: usize,
    seed: u64,
) -> Result<Vec<Word>> {
    if n > mu.max_depth() {
        return Err(Error::OutOfRange(format!(
            "depth {n} exceeds the functional's covered depth {}",
            mu.max_depth()
        )));
    }
    if !mu.is_measure() {
        return Err(Error::NonMeasure(
            "sampling needs a normalized measure".into(),
        ));
    }
    let mut words = Vec::with_capacity(count);
    let mut weights = Vec::new();
    for i in 0..count {
        let mut rng = rng::stream(seed, "pointwise-words", i as u64);
        let mut word = Word::empty(mu.offset());
        for level in 0..n {
            let d = mu.degree(level);
            weights.clear();
            let mut total = 0.0;
            for a in 0..d as u32 {
                let w = match mu.relative(&word, &[a]) {
                    Ok(v) => v,
                    Err(Error::NonPositive(_)) => 0.0,
                    Err(e) => return Err(e),
                };
                total += w;
                weights.push(w);
            }
            if !(total > 0.0) {
                return Err(Error::NonPositive(format!(
                    "cylinder {} has no children with positive mass",
                    word.text()
                )));
            }
            let target = rng.gen::<f64>() * total;
            let mut acc = 0.0;
            let mut chosen = None;
            for (a, &w) in weights.iter().enumerate() {
                if w == 0.0 {
                    continue;
                }
                acc += w;
                chosen = Some(a as u32);
                if target < acc {
                    break;
                }
            }
            let letter = chosen.expect("positive total implies a positive child");
            word = word.extended(&[letter]);
        }
        words.push(word);
    }
    Ok(words)
}
