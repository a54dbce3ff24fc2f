//! The continuity experiment: how system, diameter-conditional, and
//! harmonic-conditional distances shrink with the perturbation size, and what
//! happens to the dimension proxies along the way.
//!
//! One base run anchors the table. Each row perturbs the base by one step
//! size (same mode, same direction seed, so the rows walk a single ray in
//! coefficient space), measures the coefficient distance exactly, the
//! diameter-conditional gap exactly, and the harmonic-conditional gap by
//! Monte Carlo with its own derived walker seed, then re-estimates the
//! dimension interval on the perturbed system.

use std::io::Write;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::plan::{alpha_exponent, perturb_system, PerturbMode, PerturbationPlan};
use crate::conformal::{system_distance, SystemSpec, Word};
use crate::harmonic::{estimate_direct, MeasureEstimate, WalkerConfig, DEFAULT_APPROX_MARGIN};
use crate::numeric::fit_line;
use crate::rng::derive_seed;
use crate::symbolic::{dcal_distance, DerivProxyDiameter, Extensions};
use crate::thermo::{dimension_report, DimensionReport};
use crate::{Error, Result};

/// Everything a continuity run needs besides the base system and the step
/// sizes.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ContinuityConfig {
    pub mode: PerturbMode,
    /// Direction seed shared by every row: all steps point the same way.
    pub directions_seed: u64,
    /// Walker budget per run. `seed` is the master seed; row `k` runs with
    /// the seed derived for `("continuity-row", k)`.
    pub walkers: WalkerConfig,
    /// Depth of the harmonic count tables; conditional gaps compare parents
    /// one level shallower.
    pub assign_depth: usize,
    /// Longest parent word entering the diameter-conditional sup.
    pub diam_depth: usize,
    /// Depths of the entropy/contraction records behind the dimension
    /// columns; all must be at most `assign_depth`.
    pub dim_depths: Vec<usize>,
    /// Trailing window for the dimension extremes.
    pub dim_window: usize,
}

/// One measured step size.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContinuityRow {
    pub epsilon: f64,
    /// Sup-norm coefficient distance between base and perturbed system.
    pub d_hat: f64,
    /// Sup log-conditional gap between the diameter functionals (exact).
    pub dcal_diam: f64,
    /// Sup log-conditional gap between the harmonic estimates (Monte Carlo).
    pub dcal_omega: f64,
    /// One-sigma sampling scale for `dcal_omega`, combined across both runs.
    pub dcal_omega_floor: f64,
    /// Conditionals skipped because a count vanished in either run.
    pub dcal_omega_skipped: u64,
    /// Dimension interval of the perturbed harmonic estimate.
    pub hd_omega: f64,
    pub hd_err: f64,
    pub pd_omega: f64,
    pub pd_err: f64,
}

/// The experiment's result: the base anchor row, one row per step size, and
/// the diameter-bound bookkeeping.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ContinuityTable {
    /// Zero-step anchor: distances identically zero, dimensions of the base.
    pub base: ContinuityRow,
    pub rows: Vec<ContinuityRow>,
    /// Hölder exponent of the domain's band, `alpha_exponent(eta)`.
    pub alpha: f64,
    /// Log-log slope of `dcal_diam` against `d_hat` over rows where both are
    /// positive; compare against `alpha` (the exponent is one-sided, so the
    /// slope may exceed it).
    pub diam_slope: Option<f64>,
    /// `dcal_diam / d_hat^alpha` at the largest-distance row: the smallest
    /// constant making the Hölder bound hold there.
    pub c_hat: Option<f64>,
    /// Whether `dcal_diam ≤ c_hat · d_hat^alpha` holds on every row — i.e.
    /// the one constant works across the whole sweep.
    pub diam_bound_consistent: bool,
    pub plans: Vec<PerturbationPlan>,
    pub config: ContinuityConfig,
}

impl ContinuityTable {
    /// Writes the base anchor and then one row per step:
    /// `epsilon,d_hat,dcal_diam,dcal_omega,dcal_omega_floor,hd_omega,hd_err,pd_omega,pd_err`.
    pub fn to_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record([
            "epsilon",
            "d_hat",
            "dcal_diam",
            "dcal_omega",
            "dcal_omega_floor",
            "hd_omega",
            "hd_err",
            "pd_omega",
            "pd_err",
        ])
        .map_err(|e| Error::Format(e.to_string()))?;
        for row in std::iter::once(&self.base).chain(self.rows.iter()) {
            w.write_record([
                format!("{}", row.epsilon),
                format!("{}", row.d_hat),
                format!("{}", row.dcal_diam),
                format!("{}", row.dcal_omega),
                format!("{}", row.dcal_omega_floor),
                format!("{}", row.hd_omega),
                format!("{}", row.hd_err),
                format!("{}", row.pd_omega),
                format!("{}", row.pd_err),
            ])
            .map_err(|e| Error::Format(e.to_string()))?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Largest per-record ratio error over the trailing window the extremes were
/// taken from — one conservative bar for both ends of the interval.
fn window_error(report: &DimensionReport) -> f64 {
    let len = report.records.len();
    report.records[len - report.window.min(len)..]
        .iter()
        .filter_map(|r| r.ratio_stderr)
        .fold(0.0, f64::max)
}

/// Sup over cylinder conditionals of the absolute log-ratio gap between two
/// count tables, with a one-sigma combined sampling floor and the number of
/// conditionals skipped for vanishing counts.
fn measure_log_gap(
    a: &MeasureEstimate,
    b: &MeasureEstimate,
    max_parent_len: usize,
) -> Result<(f64, f64, u64)> {
    if a.degrees != b.degrees || a.offset != b.offset {
        return Err(Error::IncompatibleSystems(
            "harmonic estimates index different trees".into(),
        ));
    }
    let mut sup: f64 = 0.0;
    let mut floor: f64 = 0.0;
    let mut skipped = 0u64;
    for len in 0..=max_parent_len {
        for branches in Extensions::new(&a.degrees[..len]) {
            let parent = Word::new(a.offset, branches);
            for letter in 0..a.degrees[len] as u32 {
                let child = parent.extended(&[letter]);
                let (pa, ca) = (a.count(&parent)?, a.count(&child)?);
                let (pb, cb) = (b.count(&parent)?, b.count(&child)?);
                if pa == 0 || ca == 0 || pb == 0 || cb == 0 {
                    skipped += 1;
                    continue;
                }
                let gap = ((ca as f64 / pa as f64).ln() - (cb as f64 / pb as f64).ln()).abs();
                // Binomial-within-parent variance of each log conditional.
                let var = (1.0 / ca as f64 - 1.0 / pa as f64)
                    + (1.0 / cb as f64 - 1.0 / pb as f64);
                sup = sup.max(gap);
                floor = floor.max(var.max(0.0).sqrt());
            }
        }
    }
    Ok((sup, floor, skipped))
}

/// Runs the experiment: a base estimate, then one perturbed run per step in
/// `epsilons` (rows computed in parallel, each on its own derived seed).
///
/// A zero step reproduces the base system exactly, so its row reuses the
/// base run and reports identically zero distances.
pub fn continuity_experiment(
    base: &Arc<SystemSpec>,
    epsilons: &[f64],
    config: &ContinuityConfig,
) -> Result<ContinuityTable> {
    if epsilons.is_empty() {
        return Err(Error::Config("at least one step size is required".into()));
    }
    if config.assign_depth == 0 {
        return Err(Error::Config("assign_depth must be at least 1".into()));
    }
    let dim_max = config.dim_depths.iter().copied().max().unwrap_or(0);
    if config.dim_depths.is_empty() || dim_max == 0 {
        return Err(Error::Config(
            "dim_depths must name at least one positive depth".into(),
        ));
    }
    if dim_max > config.assign_depth {
        return Err(Error::Config(format!(
            "dimension depth {dim_max} exceeds the table depth {}",
            config.assign_depth
        )));
    }
    // One diameter functional per system serves both the conditional sup
    // (parents of length diam_depth need children one deeper) and the
    // dimension records.
    let diam_depth_needed = (config.diam_depth + 1).max(dim_max);
    let approx_depth = config.assign_depth + DEFAULT_APPROX_MARGIN;

    let base_est = estimate_direct(base, 0, approx_depth, config.assign_depth, &config.walkers)?;
    let base_diam = DerivProxyDiameter::new(base, 0, diam_depth_needed)?;
    let base_dim = dimension_report(&base_est, &base_diam, &config.dim_depths, config.dim_window)?;
    let base_err = window_error(&base_dim);
    let base_row = ContinuityRow {
        epsilon: 0.0,
        d_hat: 0.0,
        dcal_diam: 0.0,
        dcal_omega: 0.0,
        dcal_omega_floor: 0.0,
        dcal_omega_skipped: 0,
        hd_omega: base_dim.hd_estimate,
        hd_err: base_err,
        pd_omega: base_dim.pd_estimate,
        pd_err: base_err,
    };

    let outcomes: Vec<(ContinuityRow, PerturbationPlan)> = epsilons
        .par_iter()
        .enumerate()
        .map(|(idx, &epsilon)| -> Result<(ContinuityRow, PerturbationPlan)> {
            let plan = PerturbationPlan {
                epsilon,
                mode: config.mode,
                directions_seed: config.directions_seed,
            };
            let perturbed = perturb_system(base, &plan)?;
            let d_hat = system_distance(base, &perturbed, base.horizon())?.distance;
            let diam = DerivProxyDiameter::new(&perturbed, 0, diam_depth_needed)?;
            let dcal_diam = dcal_distance(&base_diam, &diam, config.diam_depth)?;

            let (est, dcal_omega, dcal_omega_floor, dcal_omega_skipped);
            if Arc::ptr_eq(&perturbed, base) {
                est = base_est.clone();
                (dcal_omega, dcal_omega_floor, dcal_omega_skipped) = (0.0, 0.0, 0);
            } else {
                let mut walkers = config.walkers.clone();
                walkers.seed = derive_seed(config.walkers.seed, "continuity-row", idx as u64);
                est = estimate_direct(
                    &perturbed,
                    0,
                    approx_depth,
                    config.assign_depth,
                    &walkers,
                )?;
                (dcal_omega, dcal_omega_floor, dcal_omega_skipped) =
                    measure_log_gap(&base_est, &est, config.assign_depth - 1)?;
            }
            let dim = dimension_report(&est, &diam, &config.dim_depths, config.dim_window)?;
            let err = window_error(&dim);
            Ok((
                ContinuityRow {
                    epsilon,
                    d_hat,
                    dcal_diam,
                    dcal_omega,
                    dcal_omega_floor,
                    dcal_omega_skipped,
                    hd_omega: dim.hd_estimate,
                    hd_err: err,
                    pd_omega: dim.pd_estimate,
                    pd_err: err,
                },
                plan,
            ))
        })
        .collect::<Result<Vec<_>>>()?;
    let (rows, plans): (Vec<ContinuityRow>, Vec<PerturbationPlan>) = outcomes.into_iter().unzip();

    let alpha = alpha_exponent(base.domain().eta)?;
    let positive: Vec<&ContinuityRow> = rows
        .iter()
        .filter(|r| r.d_hat > 0.0 && r.dcal_diam > 0.0)
        .collect();
    let xs: Vec<f64> = positive.iter().map(|r| r.d_hat.ln()).collect();
    let ys: Vec<f64> = positive.iter().map(|r| r.dcal_diam.ln()).collect();
    let diam_slope = fit_line(&xs, &ys).map(|(slope, _, _)| slope);
    let c_hat = positive
        .iter()
        .max_by(|x, y| x.d_hat.total_cmp(&y.d_hat))
        .map(|r| r.dcal_diam / r.d_hat.powf(alpha));
    let diam_bound_consistent = match c_hat {
        Some(c) => positive
            .iter()
            .all(|r| r.dcal_diam <= c * r.d_hat.powf(alpha) * (1.0 + 1e-9)),
        None => true,
    };

    Ok(ContinuityTable {
        base: base_row,
        rows,
        alpha,
        diam_slope,
        c_hat,
        diam_bound_consistent,
        plans,
        config: config.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conformal::autonomous_similarities;

    fn symmetric_pair(a: f64, horizon: usize) -> Arc<SystemSpec> {
        autonomous_similarities(0.1, &[(a, -0.5), (a, 0.5)], horizon).unwrap()
    }

    fn config(mode: PerturbMode, walkers: u64, seed: u64) -> ContinuityConfig {
        ContinuityConfig {
            mode,
            directions_seed: 31,
            walkers: WalkerConfig {
                walkers,
                seed,
                ..WalkerConfig::default()
            },
            assign_depth: 3,
            diam_depth: 3,
            dim_depths: vec![1, 2, 3],
            dim_window: 2,
        }
    }

    #[test]
    fn zero_step_row_reproduces_the_base_exactly() {
        let base = symmetric_pair(0.3, 8);
        let cfg = config(PerturbMode::TranslateB, 4_000, 11);
        let table = continuity_experiment(&base, &[0.0], &cfg).unwrap();
        let row = &table.rows[0];
        assert_eq!(row.d_hat, 0.0);
        assert_eq!(row.dcal_diam, 0.0);
        assert_eq!(row.dcal_omega, 0.0);
        assert_eq!(row.dcal_omega_floor, 0.0);
        assert_eq!(row.hd_omega, table.base.hd_omega);
        assert_eq!(row.pd_omega, table.base.pd_omega);
        assert!(table.c_hat.is_none() && table.diam_slope.is_none());
        assert!(table.diam_bound_consistent);
    }

    #[test]
    fn translations_keep_diameters_fixed_and_omega_gaps_noise_monotone() {
        let base = symmetric_pair(0.3, 8);
        let cfg = config(PerturbMode::TranslateB, 30_000, 13);
        let table = continuity_experiment(&base, &[0.05, 0.0125], &cfg).unwrap();
        let [big, small] = &table.rows[..] else {
            panic!("expected two rows")
        };
        // Translation distance is the step itself, measured exactly.
        assert!((big.d_hat - 0.05).abs() < 1e-12);
        assert!((small.d_hat - 0.0125).abs() < 1e-12);
        // Translations do not touch derivative moduli, so the diameter
        // conditionals of a similarity system are untouched.
        assert_eq!(big.dcal_diam, 0.0);
        assert_eq!(small.dcal_diam, 0.0);
        // Harmonic gaps decay along the shrinking ray, up to sampling noise.
        assert!(big.dcal_omega > 0.0 && small.dcal_omega > 0.0);
        assert!(
            small.dcal_omega
                <= big.dcal_omega + 3.0 * (big.dcal_omega_floor + small.dcal_omega_floor),
            "gap did not shrink: {} -> {}",
            big.dcal_omega,
            small.dcal_omega
        );
        assert_eq!(big.dcal_omega_skipped, 0);
        // Dimensions stay near the base values.
        for row in [big, small] {
            assert!(
                (row.hd_omega - table.base.hd_omega).abs()
                    <= 5.0 * (row.hd_err + table.base.hd_err),
                "hd {} vs base {}",
                row.hd_omega,
                table.base.hd_omega
            );
        }
        assert_eq!(table.plans.len(), 2);
        assert_eq!(table.plans[0].directions_seed, table.plans[1].directions_seed);
    }

    #[test]
    fn scaling_similarities_pins_the_diameter_columns_exactly() {
        let base = symmetric_pair(0.25, 8);
        let cfg = config(PerturbMode::ScaleA, 2_000, 17);
        let steps = [0.1, 0.03, 0.01];
        let table = continuity_experiment(&base, &steps, &cfg).unwrap();
        let gamma = base.domain().gamma;
        for (row, &eps) in table.rows.iter().zip(&steps) {
            // Uniform rescaling shifts every log-derivative conditional by
            // the same amount, so the sup is the shift itself.
            assert!(
                (row.dcal_diam - (1.0 + eps).ln()).abs() < 1e-12,
                "step {eps}: dcal {}",
                row.dcal_diam
            );
            assert!((row.d_hat - eps * 0.25 * gamma).abs() < 1e-12);
        }
        // One constant certifies the Hölder bound across the whole sweep…
        assert!(table.diam_bound_consistent);
        let c = table.c_hat.unwrap();
        assert!(c > 0.0 && c.is_finite());
        // …and the observed exponent is essentially linear, far above the
        // one-sided floor.
        let slope = table.diam_slope.unwrap();
        assert!((0.9..=1.0).contains(&slope), "slope {slope}");
        assert!(slope > table.alpha);
        assert!((table.alpha - alpha_exponent(0.1).unwrap()).abs() == 0.0);
    }

    #[test]
    fn csv_starts_from_the_anchor_row_with_the_pinned_header() {
        let base = symmetric_pair(0.3, 8);
        let cfg = ContinuityConfig {
            dim_depths: vec![1, 2],
            ..config(PerturbMode::JiggleC, 1_500, 19)
        };
        let table = continuity_experiment(&base, &[0.05], &cfg).unwrap();
        let mut buf = Vec::new();
        table.to_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(
            lines.next().unwrap(),
            "epsilon,d_hat,dcal_diam,dcal_omega,dcal_omega_floor,hd_omega,hd_err,pd_omega,pd_err"
        );
        assert!(lines.next().unwrap().starts_with("0,0,0,0,0,"));
        assert_eq!(lines.count(), 1);
        let json = serde_json::to_string(&table).unwrap();
        assert!(json.contains("\"plans\""));
        assert!(json.contains("\"directions_seed\""));
        assert!(json.contains("\"alpha\""));
    }

    #[test]
    fn bad_depth_configurations_are_refused() {
        let base = symmetric_pair(0.3, 8);
        let mut cfg = config(PerturbMode::TranslateB, 1_000, 23);
        cfg.dim_depths = vec![4];
        assert!(matches!(
            continuity_experiment(&base, &[0.01], &cfg),
            Err(Error::Config(_))
        ));
        cfg.dim_depths = vec![];
        assert!(matches!(
            continuity_experiment(&base, &[0.01], &cfg),
            Err(Error::Config(_))
        ));
        let cfg = config(PerturbMode::TranslateB, 1_000, 23);
        assert!(matches!(
            continuity_experiment(&base, &[], &cfg),
            Err(Error::Config(_))
        ));
    }
}
