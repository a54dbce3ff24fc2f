//! Deep-cylinder estimation by telescoping shallow runs.
//!
//! A direct estimate of a depth-`n` cylinder needs `≈ d^n` walkers for a
//! single hit. The exit distribution, however, forgets the far past at a
//! geometric rate, so the conditional `ω(a₁…a_end)/ω(a₁…a_{end−1})` is
//! well approximated by the same conditional computed in the system
//! shifted to keep only a `buffer`-letter history:
//!
//! `ω̂(a₁…a_n) = ω̂₀(a₁…a_b) · Π_{end=b..n−1} ω̂_k(a_{k+1}…a_{end+1}) / ω̂_k(a_{k+1}…a_end)`,
//! `k = end − b`,
//!
//! where each `ω̂_k` is a shallow direct run on the shift-`k` system. The
//! cost is one run per shift — shared across every queried word — plus a
//! bias that decays geometrically in the buffer length.

use std::sync::Arc;

use super::estimate::MeasureEstimate;
use super::walk::{estimate_direct, WalkerConfig};
use crate::conformal::{SystemSpec, Word};
use crate::error::Error;
use crate::rng::derive_seed;
use crate::symbolic::DecayFit;
use crate::Result;

/// Extra approximation depth beyond the assignment depth of each shallow
/// run, so conditional masses at the assignment depth have stabilized.
pub const DEFAULT_APPROX_MARGIN: usize = 4;

/// Minimum hits a factor's denominator (and the base cylinder) must
/// collect; below this the log-space error model is unusable.
pub const FACTOR_HIT_FLOOR: u64 = 100;

/// Shallow runs shared by every factorized query against one system.
///
/// Building the planner runs one direct estimate per shift in
/// `0..=max_len−1−buffer` (the shift-0 run doubles as the base), after
/// which [`estimate`](FactorizedEstimator::estimate) answers any word of
/// length `buffer..=max_len` by pure table lookups.
#[derive(Debug, Clone)]
pub struct FactorizedEstimator {
    offset: usize,
    buffer: usize,
    max_len: usize,
    base: MeasureEstimate,
    factors: Vec<MeasureEstimate>,
    fit: Option<DecayFit>,
}

impl FactorizedEstimator {
    /// Runs the shallow estimates. `offset` is where queried words start;
    /// `cfg.seed` seeds the shift-0 run and derived seeds decouple the
    /// deeper shifts; `fit` (an exponential decay law for the system's
    /// influence discrepancy) enables the bias term of the error model.
    pub fn new(
        system: &Arc<SystemSpec>,
        offset: usize,
        buffer: usize,
        max_len: usize,
        cfg: &WalkerConfig,
        fit: Option<DecayFit>,
    ) -> Result<Self> {
        if buffer == 0 {
            return Err(Error::Config("factorization buffer must be positive".into()));
        }
        if max_len < buffer {
            return Err(Error::Config(format!(
                "maximum word length {max_len} is shorter than the buffer {buffer}"
            )));
        }
        let assign = buffer + 1;
        let approx = assign + DEFAULT_APPROX_MARGIN;
        let shifts = max_len - buffer; // factor shifts are 0..shifts
        let mut factors = Vec::with_capacity(shifts.max(1));
        for k in 0..shifts.max(1) {
            let seed = if k == 0 {
                cfg.seed
            } else {
                derive_seed(cfg.seed, "factor-offset", k as u64)
            };
            let run_cfg = WalkerConfig { seed, ..cfg.clone() };
            factors.push(estimate_direct(system, offset + k, approx, assign, &run_cfg)?);
        }
        let base = factors[0].aggregate(buffer)?;
        Ok(Self {
            offset,
            buffer,
            max_len,
            base,
            factors,
            fit,
        })
    }

    /// The estimated value of the cylinder `word` together with its
    /// log-space error model: per-factor binomial standard errors summed
    /// in quadrature, plus the buffer-truncation bias `n·Ĉ·q̂ᵇ` when a
    /// decay fit was supplied.
    pub fn estimate(&self, word: &Word) -> Result<(f64, f64)> {
        if word.offset() != self.offset {
            return Err(Error::OutOfRange(format!(
                "word at offset {} queried against a planner at offset {}",
                word.offset(),
                self.offset
            )));
        }
        let n = word.len();
        if n < self.buffer {
            return Err(Error::Config(format!(
                "word of length {n} is shorter than the buffer {}",
                self.buffer
            )));
        }
        if n > self.max_len {
            return Err(Error::OutOfRange(format!(
                "word of length {n} exceeds the planned maximum {}",
                self.max_len
            )));
        }
        let letters = word.branches();
        let prefix = Word::new(self.offset, letters[..self.buffer].to_vec());
        let c_base = self.base.count(&prefix)?;
        if c_base < FACTOR_HIT_FLOOR {
            return Err(Error::DegenerateFactor {
                offset: self.offset,
                hits: c_base,
                floor: FACTOR_HIT_FLOOR,
            });
        }
        let mut log_value = (c_base as f64 / self.base.total as f64).ln();
        let mut variance = 1.0 / c_base as f64 - 1.0 / self.base.total as f64;
        for end in self.buffer..n {
            let k = end - self.buffer;
            let factor = &self.factors[k];
            let num = Word::new(self.offset + k, letters[k..=end].to_vec());
            let den = Word::new(self.offset + k, letters[k..end].to_vec());
            let c_den = factor.count(&den)?;
            if c_den < FACTOR_HIT_FLOOR {
                return Err(Error::DegenerateFactor {
                    offset: self.offset + k,
                    hits: c_den,
                    floor: FACTOR_HIT_FLOOR,
                });
            }
            let c_num = factor.count(&num)?;
            if c_num == 0 {
                return Err(Error::DegenerateFactor {
                    offset: self.offset + k,
                    hits: 0,
                    floor: FACTOR_HIT_FLOOR,
                });
            }
            log_value += (c_num as f64 / c_den as f64).ln();
            variance += 1.0 / c_num as f64 - 1.0 / c_den as f64;
        }
        let value = if n == self.buffer {
            // No factors: report the base table entry verbatim.
            c_base as f64 / self.base.total as f64
        } else {
            log_value.exp()
        };
        let bias = match &self.fit {
            Some(DecayFit {
                c: Some(c),
                q: Some(q),
                ..
            }) => n as f64 * c * q.powi(self.buffer as i32),
            _ => 0.0,
        };
        Ok((value, variance.max(0.0).sqrt() + bias))
    }

    /// The shallow runs backing the factors, shift by shift.
    pub fn factor_runs(&self) -> &[MeasureEstimate] {
        &self.factors
    }

    /// The base table (shift-0 run aggregated to the buffer depth).
    pub fn base_run(&self) -> &MeasureEstimate {
        &self.base
    }
}

/// One-shot factorized estimate of a single cylinder.
///
/// With `buffer == word.len()` this is literally a direct run: the same
/// seed, approximation margin, and assignment depth as
/// `estimate_direct(system, offset, n + margin, n, cfg)`, so the value is
/// bit-identical to that call. Otherwise a throwaway
/// [`FactorizedEstimator`] sized to the word answers the query.
pub fn estimate_factorized(
    system: &Arc<SystemSpec>,
    word: &Word,
    buffer: usize,
    per_factor_cfg: &WalkerConfig,
    fit: Option<DecayFit>,
) -> Result<(f64, f64)> {
    let n = word.len();
    if buffer > n {
        return Err(Error::Config(format!(
            "buffer {buffer} exceeds word length {n}"
        )));
    }
    if buffer == n {
        let est = estimate_direct(
            system,
            word.offset(),
            n + DEFAULT_APPROX_MARGIN,
            n,
            per_factor_cfg,
        )?;
        let value = est.value(word)?;
        let count = est.count(word)?;
        if count < FACTOR_HIT_FLOOR {
            return Err(Error::DegenerateFactor {
                offset: word.offset(),
                hits: count,
                floor: FACTOR_HIT_FLOOR,
            });
        }
        let variance = 1.0 / count as f64 - 1.0 / est.total as f64;
        return Ok((value, variance.max(0.0).sqrt()));
    }
    let planner = FactorizedEstimator::new(system, word.offset(), buffer, n, per_factor_cfg, fit)?;
    planner.estimate(word)
}
