//! Cylinder-averaged growth rates and the dimension ratio.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::conformal::Word;
use crate::error::Error;
use crate::numeric::{fit_line, KahanSum};
use crate::symbolic::{common_degrees, Extensions, Functional, MEASURE_SUM_TOL};
use crate::Result;

/// Entropy, contraction rate, and their ratio at one depth.
///
/// The pressure `P(t) = entropy − t·lyapunov` is affine in `t`, so its
/// root — the finite-depth dimension proxy — is exactly
/// `ratio = entropy / lyapunov`.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct PressureRecord {
    /// Cylinder depth.
    pub n: usize,
    /// Per-letter information rate `−(1/n) Σ μ(X) log μ(X)`, in nats.
    pub entropy: f64,
    /// Per-letter contraction rate `−(1/n) Σ μ(X) log diam(X)`, in nats.
    pub lyapunov: f64,
    /// `entropy / lyapunov`: the root of the affine pressure line.
    pub ratio: f64,
    /// Delta-method standard errors, present when the measure reports a
    /// Monte-Carlo sample size.
    pub entropy_stderr: Option<f64>,
    pub lyapunov_stderr: Option<f64>,
    pub ratio_stderr: Option<f64>,
    /// Cylinders with zero measure at this depth (they contribute
    /// `0·log 0 = 0` to the sums but flag coverage gaps of an estimate).
    pub zero_cells: u64,
}

impl PressureRecord {
    /// The affine pressure line evaluated at `t`.
    pub fn pressure_at(&self, t: f64) -> f64 {
        self.entropy - t * self.lyapunov
    }
}

/// Pressure records over a depth range, with window extremes of the ratio
/// standing in for its lower and upper limits.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DimensionReport {
    pub records: Vec<PressureRecord>,
    /// Minimum ratio over the trailing window (lower-limit proxy).
    pub hd_estimate: f64,
    /// Maximum ratio over the trailing window (upper-limit proxy).
    pub pd_estimate: f64,
    /// Number of trailing records the extremes were taken over.
    pub window: usize,
    /// Slope of `ratio` against `1/n` over all records — a vanishing
    /// slope suggests the ratio has stabilized.
    pub trend_slope: Option<f64>,
    pub trend_intercept: Option<f64>,
}

impl DimensionReport {
    /// Writes one row per depth:
    /// `n,entropy,lyapunov,ratio,entropy_stderr,lyapunov_stderr,ratio_stderr`.
    pub fn to_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record([
            "n",
            "entropy",
            "lyapunov",
            "ratio",
            "entropy_stderr",
            "lyapunov_stderr",
            "ratio_stderr",
        ])
        .map_err(|e| Error::Format(e.to_string()))?;
        let opt = |v: Option<f64>| v.map(|x| format!("{x}")).unwrap_or_default();
        for r in &self.records {
            w.write_record([
                r.n.to_string(),
                format!("{}", r.entropy),
                format!("{}", r.lyapunov),
                format!("{}", r.ratio),
                opt(r.entropy_stderr),
                opt(r.lyapunov_stderr),
                opt(r.ratio_stderr),
            ])
            .map_err(|e| Error::Format(e.to_string()))?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Entropy, contraction, and ratio of `mu` at depth `n`, with diameters
/// taken from `diam` (any functional whose values shrink geometrically,
/// e.g. a derivative-at-origin proxy).
///
/// Cylinders where `mu` vanishes contribute zero to every sum and are
/// counted in `zero_cells`. When `mu` carries a sample size, delta-method
/// standard errors for all three statistics are filled in, treating the
/// counts as one multinomial draw.
pub fn pressure_record<M: Functional, D: Functional>(
    mu: &M,
    diam: &D,
    n: usize,
) -> Result<PressureRecord> {
    if n == 0 {
        return Err(Error::OutOfRange("depth must be at least 1".into()));
    }
    if !mu.is_measure() {
        return Err(Error::NonMeasure(
            "pressure statistics need a normalized measure".into(),
        ));
    }
    let degrees = common_degrees(mu, diam, 0, n)?;
    let offset = mu.offset();
    let mut mass = KahanSum::new();
    let mut p_logp = KahanSum::new();
    let mut p_logd = KahanSum::new();
    let mut p_logp2 = KahanSum::new();
    let mut p_logd2 = KahanSum::new();
    let mut p_logp_logd = KahanSum::new();
    let mut zero_cells = 0u64;
    for branches in Extensions::new(&degrees) {
        let word = Word::new(offset, branches);
        let log_p = match mu.log_value(&word) {
            Ok(v) => v,
            Err(Error::NonPositive(_)) => {
                zero_cells += 1;
                continue;
            }
            Err(e) => return Err(e),
        };
        let p = log_p.exp();
        let log_d = diam.log_value(&word)?;
        mass.add(p);
        p_logp.add(p * log_p);
        p_logd.add(p * log_d);
        p_logp2.add(p * log_p * log_p);
        p_logd2.add(p * log_d * log_d);
        p_logp_logd.add(p * log_p * log_d);
    }
    if (mass.total() - 1.0).abs() > MEASURE_SUM_TOL {
        return Err(Error::NonMeasure(format!(
            "depth-{n} masses sum to {} (off by more than {MEASURE_SUM_TOL})",
            mass.total()
        )));
    }
    let nf = n as f64;
    let entropy = -p_logp.total() / nf;
    let lyapunov = -p_logd.total() / nf;
    if !(lyapunov > 0.0) {
        return Err(Error::NonPositive(format!(
            "contraction rate must be positive, got {lyapunov}"
        )));
    }
    let ratio = entropy / lyapunov;
    let (entropy_stderr, lyapunov_stderr, ratio_stderr) = match mu.sample_size() {
        Some(samples) if samples > 0 => {
            let var_logp = p_logp2.total() - p_logp.total() * p_logp.total();
            let var_logd = p_logd2.total() - p_logd.total() * p_logd.total();
            let cov = p_logp_logd.total() - p_logp.total() * p_logd.total();
            let scale = 1.0 / (samples as f64 * nf * nf);
            let var_h = var_logp.max(0.0) * scale;
            let var_x = var_logd.max(0.0) * scale;
            let cov_hx = cov * scale;
            let var_t =
                (var_h - 2.0 * ratio * cov_hx + ratio * ratio * var_x) / (lyapunov * lyapunov);
            (
                Some(var_h.sqrt()),
                Some(var_x.sqrt()),
                Some(var_t.max(0.0).sqrt()),
            )
        }
        _ => (None, None, None),
    };
    Ok(PressureRecord {
        n,
        entropy,
        lyapunov,
        ratio,
        entropy_stderr,
        lyapunov_stderr,
        ratio_stderr,
        zero_cells,
    })
}

/// Pressure records over `depths`, with the ratio's extremes over the
/// trailing `window` records and a trend line of ratio against `1/n`.
pub fn dimension_report<M: Functional, D: Functional>(
    mu: &M,
    diam: &D,
    depths: &[usize],
    window: usize,
) -> Result<DimensionReport> {
    if depths.is_empty() {
        return Err(Error::Config("empty depth range".into()));
    }
    if window == 0 {
        return Err(Error::Config("window must cover at least one record".into()));
    }
    let records: Vec<PressureRecord> = depths
        .iter()
        .map(|&n| pressure_record(mu, diam, n))
        .collect::<Result<_>>()?;
    let window = window.min(records.len());
    let tail = &records[records.len() - window..];
    let hd_estimate = tail.iter().map(|r| r.ratio).fold(f64::INFINITY, f64::min);
    let pd_estimate = tail
        .iter()
        .map(|r| r.ratio)
        .fold(f64::NEG_INFINITY, f64::max);
    let xs: Vec<f64> = records.iter().map(|r| 1.0 / r.n as f64).collect();
    let ys: Vec<f64> = records.iter().map(|r| r.ratio).collect();
    let (trend_slope, trend_intercept) = match fit_line(&xs, &ys) {
        Some((slope, intercept, _)) => (Some(slope), Some(intercept)),
        None => (None, None),
    };
    Ok(DimensionReport {
        records,
        hd_estimate,
        pd_estimate,
        window,
        trend_slope,
        trend_intercept,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conformal::{
        autonomous_similarities, ConformalMap, DomainConfig, ModeTag, SystemConfig, SystemSpec,
    };
    use crate::harmonic::{MeasureEstimate, WalkerConfig};
    use crate::symbolic::{mass, BernoulliMeasure, DerivProxyDiameter, UniformMeasure};
    use std::sync::Arc;

    fn quarter_pair(horizon: usize) -> Arc<SystemSpec> {
        autonomous_similarities(0.1, &[(0.25, -0.5), (0.25, 0.5)], horizon).unwrap()
    }

    fn sim(a: f64, b: f64) -> ConformalMap {
        ConformalMap::similarity(a.into(), b.into())
    }

    #[test]
    fn uniform_quarter_ratio_is_exactly_half() {
        let system = quarter_pair(13);
        let mu = UniformMeasure::new(0, vec![2; 12]);
        let diam = DerivProxyDiameter::new(&system, 0, 12).unwrap();
        for n in 1..=12 {
            let rec = pressure_record(&mu, &diam, n).unwrap();
            assert!((rec.entropy - (2.0f64).ln()).abs() < 1e-12, "H at {n}");
            assert!((rec.lyapunov - (4.0f64).ln()).abs() < 1e-12, "chi at {n}");
            assert!((rec.ratio - 0.5).abs() < 1e-12, "t at {n}");
            assert_eq!(rec.zero_cells, 0);
            assert!(rec.entropy_stderr.is_none());
            // Affine pressure: the root is the ratio, exactly.
            assert!(rec.pressure_at(rec.ratio).abs() < 1e-12);
            assert!(rec.pressure_at(0.0) > 0.0);
            assert!(rec.pressure_at(1.0) < 0.0);
        }
    }

    #[test]
    fn skewed_bernoulli_matches_closed_forms() {
        let system = quarter_pair(9);
        let mu = BernoulliMeasure::new(0, vec![vec![0.6, 0.4]; 8]).unwrap();
        let diam = DerivProxyDiameter::new(&system, 0, 8).unwrap();
        let h = -(0.6f64 * 0.6f64.ln() + 0.4 * 0.4f64.ln());
        for n in [1usize, 5, 8] {
            let rec = pressure_record(&mu, &diam, n).unwrap();
            assert!((rec.entropy - h).abs() < 1e-12);
            assert!((rec.lyapunov - (4.0f64).ln()).abs() < 1e-12);
            assert!((rec.ratio - h / (4.0f64).ln()).abs() < 1e-12);
        }
        // Contraction rate sits inside the band-derived bracket.
        let rec = pressure_record(&mu, &diam, 6).unwrap();
        assert!(rec.lyapunov >= -(0.9f64).ln() - 1e-12);
        assert!(rec.lyapunov <= -(0.1f64).ln() + 1e-12);
        // Entropy cap and the mass inequality for exact inputs.
        assert!(rec.entropy <= (2.0f64).ln() + 1e-12 && rec.entropy >= 0.0);
        let m6 = mass(&diam, 6).unwrap();
        assert!(rec.entropy - rec.lyapunov <= m6.ln() / 6.0 + 1e-12);
    }

    #[test]
    fn concentrated_estimate_has_zero_entropy_and_coverage_deficit() {
        let est = MeasureEstimate {
            offset: 0,
            assign_depth: 2,
            degrees: vec![2, 2],
            counts: vec![500, 0, 0, 0],
            total: 500,
            total_steps: 0,
            config: WalkerConfig::default(),
        };
        let system = quarter_pair(4);
        let diam = DerivProxyDiameter::new(&system, 0, 2).unwrap();
        let rec = pressure_record(&est, &diam, 2).unwrap();
        assert_eq!(rec.entropy, 0.0);
        assert_eq!(rec.ratio, 0.0);
        assert_eq!(rec.zero_cells, 3);
        // Point mass: zero variance in the plug-in statistics.
        assert_eq!(rec.entropy_stderr, Some(0.0));
    }

    #[test]
    fn unnormalized_tables_are_rejected() {
        let est = MeasureEstimate {
            offset: 0,
            assign_depth: 1,
            degrees: vec![2],
            counts: vec![300, 100],
            total: 500, // 100 walkers unaccounted: masses sum to 0.8
            total_steps: 0,
            config: WalkerConfig::default(),
        };
        let system = quarter_pair(3);
        let diam = DerivProxyDiameter::new(&system, 0, 1).unwrap();
        assert!(matches!(
            pressure_record(&est, &diam, 1),
            Err(Error::NonMeasure(_))
        ));
    }

    #[test]
    fn alternating_ratios_average_in_the_contraction_rate() {
        let quarter = vec![
            sim(0.25, -0.5),
            sim(0.25, 0.5),
        ];
        let ninth = vec![
            sim(1.0 / 9.0, -0.5),
            sim(1.0 / 9.0, 0.5),
        ];
        let system = SystemSpec::from_config(SystemConfig {
            domain: DomainConfig {
                eta: 0.05,
                gamma: None,
            },
            mode: ModeTag::Periodic,
            prefix: Vec::new(),
            period: Some(vec![quarter, ninth]),
            seed: None,
            seeded: None,
            horizon: 13,
            degree_cap: 8,
        })
        .unwrap();
        let mu = UniformMeasure::new(0, vec![2; 12]);
        let diam = DerivProxyDiameter::new(&system, 0, 12).unwrap();
        let target = (2.0f64).ln() / (6.0f64).ln();
        let report = dimension_report(&mu, &diam, &[2, 4, 6, 8, 10, 12], 3).unwrap();
        // At even depths the two ratios balance exactly: every record sits
        // on the closed-form value, so the window collapses.
        assert!((report.hd_estimate - target).abs() < 1e-12);
        assert!((report.pd_estimate - target).abs() < 1e-12);
        assert!(report.hd_estimate <= report.pd_estimate);
        // Odd depths overweight the first ratio, so a mixed window splits.
        let mixed = dimension_report(&mu, &diam, &[10, 11, 12], 3).unwrap();
        assert!(mixed.hd_estimate < mixed.pd_estimate - 1e-4);
    }

    #[test]
    fn doubling_blocks_keep_the_window_split_open() {
        // Ratio blocks of lengths 1, 2, 4, 8: the running average of
        // log-contractions keeps swinging, so the lower and upper window
        // extremes stay apart at every reachable depth.
        let mut prefix = Vec::new();
        let ninth_block = |out: &mut Vec<Vec<ConformalMap>>, len: usize| {
            for _ in 0..len {
                out.push(vec![
                    sim(1.0 / 9.0, -0.5),
                    sim(1.0 / 9.0, 0.5),
                ]);
            }
        };
        let quarter_block = |out: &mut Vec<Vec<ConformalMap>>, len: usize| {
            for _ in 0..len {
                out.push(vec![
                    sim(0.25, -0.5),
                    sim(0.25, 0.5),
                ]);
            }
        };
        quarter_block(&mut prefix, 1);
        ninth_block(&mut prefix, 2);
        quarter_block(&mut prefix, 4);
        ninth_block(&mut prefix, 8);
        let horizon = prefix.len();
        let system = SystemSpec::from_config(SystemConfig {
            domain: DomainConfig {
                eta: 0.05,
                gamma: None,
            },
            mode: ModeTag::Explicit,
            prefix,
            period: None,
            seed: None,
            seeded: None,
            horizon,
            degree_cap: 8,
        })
        .unwrap();
        let depths: Vec<usize> = (1..=14).collect();
        let mu = UniformMeasure::new(0, vec![2; 14]);
        let diam = DerivProxyDiameter::new(&system, 0, 14).unwrap();
        let report = dimension_report(&mu, &diam, &depths, depths.len()).unwrap();
        assert!(
            report.pd_estimate - report.hd_estimate > 0.05,
            "window should stay split: {} vs {}",
            report.hd_estimate,
            report.pd_estimate
        );
        assert!(report.hd_estimate > 0.0 && report.pd_estimate < 2.0);
    }

    #[test]
    fn report_serializes_with_pinned_csv_header() {
        let system = quarter_pair(5);
        let mu = UniformMeasure::new(0, vec![2; 4]);
        let diam = DerivProxyDiameter::new(&system, 0, 4).unwrap();
        let report = dimension_report(&mu, &diam, &[2, 3, 4], 2).unwrap();
        let mut buf = Vec::new();
        report.to_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("n,entropy,lyapunov,ratio,entropy_stderr,lyapunov_stderr,ratio_stderr"));
        assert_eq!(text.lines().count(), 4);
        let json = serde_json::to_string(&report).unwrap();
        assert!(json.contains("hd_estimate"));
    }
}
