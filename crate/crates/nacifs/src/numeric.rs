//! Small numerical utilities shared across modules: compensated summation,
//! least-squares lines, and the fixed chi-square threshold used by the
//! re-entry kernel test.

/// Neumaier-compensated accumulator. Sums of many near-equal terms (entropy,
/// brackets over thousands of cylinders) must not lose more than a few ulps,
/// since downstream tolerances go down to 1e-12.
#[derive(Clone, Copy, Debug, Default)]
pub struct KahanSum {
    sum: f64,
    comp: f64,
}

impl KahanSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn total(&self) -> f64 {
        self.sum + self.comp
    }
}

/// Least-squares line fit `y = slope * x + intercept`.
///
/// Returns `(slope, intercept, residual_rms)`. At least two distinct x values
/// are required; otherwise `None`.
pub fn fit_line(xs: &[f64], ys: &[f64]) -> Option<(f64, f64, f64)> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return None;
    }
    let n = xs.len() as f64;
    let mean_x = xs.iter().sum::<f64>() / n;
    let mean_y = ys.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for (&x, &y) in xs.iter().zip(ys) {
        sxx += (x - mean_x) * (x - mean_x);
        sxy += (x - mean_x) * (y - mean_y);
    }
    if sxx == 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    let intercept = mean_y - slope * mean_x;
    let mut ss = 0.0;
    for (&x, &y) in xs.iter().zip(ys) {
        let r = y - slope * x - intercept;
        ss += r * r;
    }
    Some((slope, intercept, (ss / n).sqrt()))
}

/// 99th percentile of the chi-square distribution with 63 degrees of freedom
/// (64 angular bins). Fixed quantile of the test design, computed once
/// offline; keeping it as a constant avoids a statistics dependency.
pub const CHI2_CRIT_99_DF63: f64 = 92.010_023_614_132_14;

/// Two-sample chi-square statistic over equal-width histograms.
///
/// For two samples of equal size the statistic `sum (a-b)^2/(a+b)` is
/// asymptotically chi-square with `bins - 1` degrees of freedom. Empty bins
/// contribute nothing (their expected counts also vanish).
pub fn two_sample_chi_square(h1: &[u64], h2: &[u64]) -> (f64, usize) {
    assert_eq!(h1.len(), h2.len());
    let mut stat = 0.0;
    for (&a, &b) in h1.iter().zip(h2) {
        let s = (a + b) as f64;
        if s > 0.0 {
            let d = a as f64 - b as f64;
            stat += d * d / s;
        }
    }
    (stat, h1.len().saturating_sub(1))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kahan_recovers_small_terms() {
        let mut acc = KahanSum::new();
        acc.add(1.0);
        for _ in 0..10_000 {
            acc.add(1e-16);
        }
        let naive = {
            let mut s = 1.0;
            for _ in 0..10_000 {
                s += 1e-16;
            }
            s
        };
        assert!((acc.total() - (1.0 + 1e-12)).abs() < 1e-15);
        // the naive accumulation loses every small term
        assert_eq!(naive, 1.0);
    }

    #[test]
    fn line_fit_exact_on_linear_data() {
        let xs = [1.0, 2.0, 3.0, 4.0];
        let ys: Vec<f64> = xs.iter().map(|x| 2.5 * x - 1.0).collect();
        let (slope, intercept, rms) = fit_line(&xs, &ys).unwrap();
        assert!((slope - 2.5).abs() < 1e-12);
        assert!((intercept + 1.0).abs() < 1e-12);
        assert!(rms < 1e-12);
    }

    #[test]
    fn chi_square_zero_on_identical_histograms() {
        let h = [10u64, 20, 30, 40];
        let (stat, dof) = two_sample_chi_square(&h, &h);
        assert_eq!(stat, 0.0);
        assert_eq!(dof, 3);
    }
}
