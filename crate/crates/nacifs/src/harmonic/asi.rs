//! Sibling-influence decay of the estimated exit distribution.
//!
//! For cylinders `XY` and `X′Y` that share the `k`-letter buffer `Y`, the
//! conditional exit mass of a further letter `Z` should forget the first
//! letter at a geometric rate in `k`. This module measures that decay on
//! a single walker run — and, because the probe is Monte Carlo, reports
//! alongside each discrepancy the level where counting noise drowns the
//! signal, so a fitted decay never chases sampling artifacts.

use std::io::Write;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::estimate::MeasureEstimate;
use super::factorized::DEFAULT_APPROX_MARGIN;
use super::walk::{estimate_direct, WalkerConfig};
use crate::conformal::{SystemSpec, Word};
use crate::error::Error;
use crate::symbolic::{fit_exponential_decay, DecayFit, Extensions};
use crate::Result;

/// One buffer length of the harmonic sibling-influence probe.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct HarmonicAsiRow {
    /// Buffer length `k`.
    pub k: usize,
    /// Largest conditional log-discrepancy over usable quadruples.
    pub beta_hat: f64,
    /// Quadruples with nonzero counts in all four cells.
    pub samples: u64,
    /// Quadruples skipped because some cell collected no walkers.
    pub skipped: u64,
    /// `3σ` propagation of the per-cell counting noise; discrepancies at
    /// or below this are indistinguishable from sampling error.
    pub noise_floor: f64,
    /// Whether `beta_hat` sits at or below the floor (or cells were
    /// skipped), i.e. the row carries no usable decay signal.
    pub noise_limited: bool,
}

/// Decay table of the estimated exit distribution, with its noise-aware
/// exponential fit.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HarmonicAsiReport {
    pub rows: Vec<HarmonicAsiRow>,
    /// Exponential fit over the rows that are not noise-limited.
    pub fit: DecayFit,
    /// Depth the single backing run assigned counts at (`max k + 2`).
    pub assign_depth: usize,
    /// Walkers in the backing run.
    pub walkers: u64,
    pub seed: u64,
}

impl HarmonicAsiReport {
    /// Writes the decay table: `k,beta_hat,samples`.
    pub fn to_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["k", "beta_hat", "samples"])
            .map_err(|e| Error::Format(e.to_string()))?;
        for row in &self.rows {
            w.write_record([
                row.k.to_string(),
                format!("{}", row.beta_hat),
                row.samples.to_string(),
            ])
            .map_err(|e| Error::Format(e.to_string()))?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Measures sibling-influence decay of the exit distribution of `system`
/// at buffer lengths `k_range`, from one direct run assigned at depth
/// `max(k_range) + 2`.
///
/// Quadruples are exhaustive: every pair of distinct first letters
/// `(X, X′)`, every `k`-letter buffer `Y`, every final letter `Z`. The
/// discrepancy of a quadruple is
/// `|log(ω̂(XYZ)/ω̂(XY)) − log(ω̂(X′YZ)/ω̂(X′Y))|`.
pub fn asi_report_harmonic(
    system: &Arc<SystemSpec>,
    k_range: &[usize],
    cfg: &WalkerConfig,
) -> Result<HarmonicAsiReport> {
    let &k_max = k_range
        .iter()
        .max()
        .ok_or_else(|| Error::Config("empty buffer-length range".into()))?;
    let assign = k_max + 2;
    let approx = assign + DEFAULT_APPROX_MARGIN;
    let est = estimate_direct(system, 0, approx, assign, cfg)?;
    let mut rows = Vec::with_capacity(k_range.len());
    for &k in k_range {
        rows.push(probe_level(system, &est, k)?);
    }
    let points: Vec<(usize, f64)> = rows
        .iter()
        .filter(|r| !r.noise_limited)
        .map(|r| (r.k, r.beta_hat))
        .collect();
    let fit = fit_exponential_decay(&points);
    Ok(HarmonicAsiReport {
        rows,
        fit,
        assign_depth: assign,
        walkers: cfg.walkers,
        seed: cfg.seed,
    })
}

fn probe_level(
    system: &Arc<SystemSpec>,
    est: &MeasureEstimate,
    k: usize,
) -> Result<HarmonicAsiRow> {
    let d0 = system.degree(0)?;
    let buffer_degrees = system.degrees(1, k)?;
    let dz = system.degree(k + 1)?;
    let mut beta_hat = 0.0f64;
    let mut noise_floor = 0.0f64;
    let mut samples = 0u64;
    let mut skipped = 0u64;
    for x in 0..d0 as u32 {
        for x_alt in (x + 1)..d0 as u32 {
            for buffer in Extensions::new(&buffer_degrees) {
                let xy = Word::new(0, vec![x]).extended(&buffer);
                let xy_alt = Word::new(0, vec![x_alt]).extended(&buffer);
                for z in 0..dz as u32 {
                    let cells = [
                        est.count(&xy.extended(&[z]))?,
                        est.count(&xy)?,
                        est.count(&xy_alt.extended(&[z]))?,
                        est.count(&xy_alt)?,
                    ];
                    if cells.contains(&0) {
                        skipped += 1;
                        continue;
                    }
                    let [xyz, xy_c, alt_xyz, alt_xy] = cells.map(|c| c as f64);
                    let gap = ((xyz / xy_c).ln() - (alt_xyz / alt_xy).ln()).abs();
                    let var = (1.0 / xyz - 1.0 / xy_c) + (1.0 / alt_xyz - 1.0 / alt_xy);
                    beta_hat = beta_hat.max(gap);
                    noise_floor = noise_floor.max(3.0 * var.max(0.0).sqrt());
                    samples += 1;
                }
            }
        }
    }
    let noise_limited = skipped > 0 || samples == 0 || beta_hat <= noise_floor;
    Ok(HarmonicAsiRow {
        k,
        beta_hat,
        samples,
        skipped,
        noise_floor,
        noise_limited,
    })
}
