//! Sibling-invariance discrepancy estimation: how much the conditional
//! values of a functional on two cylinders that share a long common buffer
//! can differ, as a function of the buffer length, plus the exponential
//! decay fit over buffer lengths.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::conformal::Word;
use crate::error::Error;
use crate::numeric::fit_line;
use crate::rng;
use crate::symbolic::functional::{level_degrees, Extensions, Functional};
use crate::Result;

/// One buffer length's estimated discrepancy.
#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
pub struct AsiRow {
    /// Buffer length.
    pub k: usize,
    /// Max observed `|log(nu_{XY}(Z) / nu_{X'Y}(Z))|` over the sampled
    /// quadruples.
    pub beta_hat: f64,
    /// Number of quadruples behind the estimate.
    pub samples: u64,
}

/// Least-squares fit of `beta_hat ≈ c · q^k` on the log scale.
///
/// Rows with `beta_hat = 0` carry no log-scale information and are skipped;
/// the fit is degenerate when fewer than two usable rows remain or when the
/// fitted `q` falls outside `(0, 1]`.
#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
pub struct DecayFit {
    pub c: Option<f64>,
    pub q: Option<f64>,
    pub residual_rms: Option<f64>,
    /// Rows that entered the fit.
    pub points_used: usize,
    pub degenerate: bool,
}

/// Discrepancy estimates across buffer lengths with their decay fit.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AsiReport {
    pub rows: Vec<AsiRow>,
    pub fit: DecayFit,
    /// Maximum extension length used for the probe words `Z`.
    pub tail: usize,
    pub sample_budget: u64,
    pub seed: u64,
}

impl AsiReport {
    /// Writes the per-buffer-length rows as CSV with columns
    /// `k,beta_hat,samples`.
    pub fn to_csv<W: std::io::Write>(&self, writer: W) -> Result<()> {
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

/// Estimates the buffer-`k` discrepancy by sampling `sample_budget` random
/// quadruples `(X, X', Y, Z)`: `X` and `X'` of a common random length,
/// `Y` a shared buffer of length `k`, `Z` a probe extension of random
/// length in `1..=tail`.  Returns the max of
/// `|log(nu_{XY}(Z) / nu_{X'Y}(Z))|`.
///
/// Deterministic for a fixed seed: draws come from the dedicated stream
/// `(seed, "asi-quadruples", k)` in the fixed order
/// `|X|, X, X', Y, |Z|, Z` per quadruple.
pub fn asi_discrepancy(
    nu: &dyn Functional,
    k: usize,
    tail: usize,
    sample_budget: u64,
    seed: u64,
) -> Result<f64> {
    if tail == 0 {
        return Err(Error::Config("probe tail length must be positive".into()));
    }
    if k + tail > nu.max_depth() {
        return Err(Error::OutOfRange(format!(
            "buffer {} plus tail {} exceeds functional range {}",
            k,
            tail,
            nu.max_depth()
        )));
    }
    let max_x = nu.max_depth() - k - tail;
    let mut rng = rng::stream(seed, "asi-quadruples", k as u64);
    let mut worst: f64 = 0.0;
    for _ in 0..sample_budget {
        let x_len = rng.gen_range(0..=max_x);
        let x: Vec<u32> = (0..x_len)
            .map(|l| rng.gen_range(0..nu.degree(l)) as u32)
            .collect();
        let x_alt: Vec<u32> = (0..x_len)
            .map(|l| rng.gen_range(0..nu.degree(l)) as u32)
            .collect();
        let y: Vec<u32> = (0..k)
            .map(|i| rng.gen_range(0..nu.degree(x_len + i)) as u32)
            .collect();
        let z_len = rng.gen_range(1..=tail);
        let z: Vec<u32> = (0..z_len)
            .map(|i| rng.gen_range(0..nu.degree(x_len + k + i)) as u32)
            .collect();
        let xy = Word::new(nu.offset(), x).extended(&y);
        let xy_alt = Word::new(nu.offset(), x_alt).extended(&y);
        let diff = (nu.log_relative(&xy, &z)? - nu.log_relative(&xy_alt, &z)?).abs();
        worst = worst.max(diff);
    }
    Ok(worst)
}

/// Exact discrepancy over *all* quadruples with fixed shapes
/// `|X| = |X'| = x_len`, `|Y| = k`, `|Z| = z_len`.  Exponential in the
/// depths involved; intended for small shapes and for validating the
/// sampled estimate.
pub fn asi_discrepancy_exhaustive(
    nu: &dyn Functional,
    x_len: usize,
    k: usize,
    z_len: usize,
) -> Result<f64> {
    let degrees = level_degrees(nu, 0, x_len + k + z_len)?;
    let mut worst: f64 = 0.0;
    for x in Extensions::new(&degrees[..x_len]) {
        for x_alt in Extensions::new(&degrees[..x_len]) {
            for y in Extensions::new(&degrees[x_len..x_len + k]) {
                let xy = Word::new(nu.offset(), x.clone()).extended(&y);
                let xy_alt = Word::new(nu.offset(), x_alt.clone()).extended(&y);
                for z in Extensions::new(&degrees[x_len + k..]) {
                    let diff =
                        (nu.log_relative(&xy, &z)? - nu.log_relative(&xy_alt, &z)?).abs();
                    worst = worst.max(diff);
                }
            }
        }
    }
    Ok(worst)
}

/// Fits `beta ≈ c · q^k` by least squares on `(k, ln beta)`.
pub fn fit_exponential_decay(rows: &[(usize, f64)]) -> DecayFit {
    let usable: Vec<(f64, f64)> = rows
        .iter()
        .filter(|(_, beta)| *beta > 0.0 && beta.is_finite())
        .map(|&(k, beta)| (k as f64, beta.ln()))
        .collect();
    let xs: Vec<f64> = usable.iter().map(|p| p.0).collect();
    let ys: Vec<f64> = usable.iter().map(|p| p.1).collect();
    match fit_line(&xs, &ys) {
        Some((slope, intercept, residual_rms)) => {
            let q = slope.exp();
            DecayFit {
                c: Some(intercept.exp()),
                q: Some(q),
                residual_rms: Some(residual_rms),
                points_used: usable.len(),
                degenerate: !(q > 0.0 && q <= 1.0),
            }
        }
        None => DecayFit {
            c: None,
            q: None,
            residual_rms: None,
            points_used: usable.len(),
            degenerate: true,
        },
    }
}

/// Runs [`asi_discrepancy`] for every buffer length in `ks` and fits the
/// decay across them.
pub fn asi_report(
    nu: &dyn Functional,
    ks: &[usize],
    tail: usize,
    sample_budget: u64,
    seed: u64,
) -> Result<AsiReport> {
    let mut rows = Vec::with_capacity(ks.len());
    for &k in ks {
        let beta_hat = asi_discrepancy(nu, k, tail, sample_budget, seed)?;
        rows.push(AsiRow {
            k,
            beta_hat,
            samples: sample_budget,
        });
    }
    let fit = fit_exponential_decay(
        &rows.iter().map(|r| (r.k, r.beta_hat)).collect::<Vec<_>>(),
    );
    Ok(AsiReport {
        rows,
        fit,
        tail,
        sample_budget,
        seed,
    })
}
