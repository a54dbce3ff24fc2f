//! Uniformity and compatibility diagnostics: the spread of depth-`n` log
//! brackets across same-length cylinders, and the growth/decay pairing
//! witness for a rate sequence against a discrepancy sequence.

use serde::Serialize;

use crate::conformal::Word;
use crate::error::Error;
use crate::numeric::fit_line;
use crate::symbolic::functional::{common_degrees, Extensions, Functional};
use crate::symbolic::ops::bracket_log;
use crate::Result;

/// Per-level spread of the depth-`n` log bracket.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct AlphaLevel {
    /// Cylinder length the bracket was relativized at.
    pub k: usize,
    pub g_min: f64,
    pub g_max: f64,
    pub spread: f64,
}

/// Result of [`alpha_diagnostic`]: the worst spread over cylinder lengths
/// `0..=k_max`, with the per-level extremes and the full table of bracket
/// values for inspection.
#[derive(Debug, Clone)]
pub struct AlphaDiagnostic {
    pub alpha: f64,
    pub levels: Vec<AlphaLevel>,
    /// `(X, g_n(X))` for every cylinder X with `|X| ≤ k_max`.
    pub table: Vec<(Word, f64)>,
}

/// Measures how uniformly the depth-`n` average of `log s` behaves across
/// cylinders: for each length `k ≤ k_max` it computes
/// `g_n(X) = Σ_{|Y|=n} nu_X(Y) · log s_X(Y)` on every `|X| = k` and takes
/// the max-minus-min spread; the diagnostic is the worst spread.
///
/// Zero spread means every same-length cylinder sees the same average; for
/// product measures paired with their own information content, and for
/// similarity-system diameter proxies under the uniform measure, the spread
/// vanishes identically.
pub fn alpha_diagnostic(
    nu: &dyn Functional,
    s: &dyn Functional,
    n: usize,
    k_max: usize,
) -> Result<AlphaDiagnostic> {
    if !nu.is_measure() {
        return Err(Error::NonMeasure(
            "alpha diagnostic weights must form a probability measure".into(),
        ));
    }
    let degrees = common_degrees(nu, s, 0, k_max + n)?;
    let mut alpha: f64 = 0.0;
    let mut levels = Vec::with_capacity(k_max + 1);
    let mut table = Vec::new();
    for k in 0..=k_max {
        let mut g_min = f64::INFINITY;
        let mut g_max = f64::NEG_INFINITY;
        for branches in Extensions::new(&degrees[..k]) {
            let x = Word::new(nu.offset(), branches);
            let g = bracket_log(nu, s, n, &x)?;
            g_min = g_min.min(g);
            g_max = g_max.max(g);
            table.push((x, g));
        }
        let spread = g_max - g_min;
        alpha = alpha.max(spread);
        levels.push(AlphaLevel {
            k,
            g_min,
            g_max,
            spread,
        });
    }
    Ok(AlphaDiagnostic {
        alpha,
        levels,
        table,
    })
}

/// How the rate sequence `gamma_n` grows with depth.
#[derive(Debug, Clone, Serialize)]
pub enum GammaRule {
    /// `gamma_n = coefficient · n`.
    Linear { coefficient: f64 },
    /// Explicit table, indexed by `n` (so it must cover `0..=n_max`).
    Table(Vec<f64>),
}

impl GammaRule {
    fn at(&self, n: usize) -> Result<f64> {
        match self {
            GammaRule::Linear { coefficient } => Ok(coefficient * n as f64),
            GammaRule::Table(t) => t.get(n).copied().ok_or_else(|| {
                Error::OutOfRange(format!("gamma table has no entry for n = {n}"))
            }),
        }
    }
}

/// One row of the compatibility witness.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct WitnessRow {
    pub n: usize,
    /// Split point `p = ⌊√n⌋`.
    pub p: usize,
    pub gamma_n: f64,
    pub gamma_p: f64,
    pub beta_p: f64,
    /// `c_n = max(gamma_p, gamma_n · beta_p)`.
    pub c_n: f64,
    /// `c_n / n`, the quantity that must tend to zero.
    pub ratio: f64,
}

/// Materialized check that a rate sequence and a discrepancy sequence pair
/// off: with the split `p_n = ⌊√n⌋`, the combined cost
/// `c_n = max(gamma_{p_n}, gamma_n · beta_{p_n})` must be sublinear.
#[derive(Debug, Clone, Serialize)]
pub struct CompatibilityWitness {
    pub rows: Vec<WitnessRow>,
    /// Fitted slope of `c_n / n` against `n` on the materialized range.
    pub ratio_slope: f64,
    /// Whether the ratio trends down and ends below half its peak.
    pub tends_to_zero: bool,
}

fn isqrt(n: usize) -> usize {
    let mut r = (n as f64).sqrt() as usize;
    while (r + 1) * (r + 1) <= n {
        r += 1;
    }
    while r * r > n {
        r -= 1;
    }
    r
}

/// Builds the witness on `n = 1..=n_max`.  `betas[p]` is the discrepancy at
/// buffer length `p` and must cover `p = ⌊√n_max⌋`.
pub fn compatibility_witness(
    gamma: &GammaRule,
    betas: &[f64],
    n_max: usize,
) -> Result<CompatibilityWitness> {
    if n_max == 0 {
        return Err(Error::Config("witness needs n_max >= 1".into()));
    }
    let p_max = isqrt(n_max);
    if betas.len() <= p_max {
        return Err(Error::OutOfRange(format!(
            "beta table covers lengths < {}, need {}",
            betas.len(),
            p_max
        )));
    }
    let mut rows = Vec::with_capacity(n_max);
    for n in 1..=n_max {
        let p = isqrt(n);
        let gamma_n = gamma.at(n)?;
        let gamma_p = gamma.at(p)?;
        let beta_p = betas[p];
        let c_n = gamma_p.max(gamma_n * beta_p);
        rows.push(WitnessRow {
            n,
            p,
            gamma_n,
            gamma_p,
            beta_p,
            c_n,
            ratio: c_n / n as f64,
        });
    }
    let xs: Vec<f64> = rows.iter().map(|r| r.n as f64).collect();
    let ys: Vec<f64> = rows.iter().map(|r| r.ratio).collect();
    let ratio_slope = fit_line(&xs, &ys).map(|(m, _, _)| m).unwrap_or(0.0);
    let peak = ys.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let tends_to_zero = ratio_slope < 0.0 && rows.last().unwrap().ratio < 0.5 * peak;
    Ok(CompatibilityWitness {
        rows,
        ratio_slope,
        tends_to_zero,
    })
}
