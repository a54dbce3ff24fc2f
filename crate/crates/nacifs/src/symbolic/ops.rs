//! Aggregate operations over functionals: brackets, total mass, the
//! convexity (Jensen) check, and the conditional-ratio distance between two
//! functionals on a common tree.

use crate::conformal::Word;
use crate::numeric::KahanSum;
use crate::symbolic::functional::{common_degrees, level_degrees, Extensions, Functional};
use crate::Result;

/// Conditional value `nu(base·ext) / nu(base)`.
pub fn relative(nu: &dyn Functional, base: &Word, ext: &[u32]) -> Result<f64> {
    nu.relative(base, ext)
}

/// Bracket of two functionals relativized at `base`:
/// `Σ_{|Y|=n} nu_base(Y) · nu_p_base(Y)`.
pub fn bracket(nu: &dyn Functional, nu_p: &dyn Functional, n: usize, base: &Word) -> Result<f64> {
    let degrees = common_degrees(nu, nu_p, base.len(), n)?;
    let mut sum = KahanSum::new();
    for ext in Extensions::new(&degrees) {
        sum.add(nu.relative(base, &ext)? * nu_p.relative(base, &ext)?);
    }
    Ok(sum.total())
}

/// Log-weighted bracket `Σ_{|Y|=n} nu_base(Y) · log s_base(Y)` — the
/// depth-`n` average of `log s` under `nu`, relativized at `base`.
pub fn bracket_log(nu: &dyn Functional, s: &dyn Functional, n: usize, base: &Word) -> Result<f64> {
    let degrees = common_degrees(nu, s, base.len(), n)?;
    let mut sum = KahanSum::new();
    for ext in Extensions::new(&degrees) {
        sum.add(nu.relative(base, &ext)? * s.log_relative(base, &ext)?);
    }
    Ok(sum.total())
}

/// Log-ratio bracket `Σ_{|Y|=n} nu_base(Y) · log(num_base(Y) / den_base(Y))`.
pub fn bracket_log_ratio(
    nu: &dyn Functional,
    num: &dyn Functional,
    den: &dyn Functional,
    n: usize,
    base: &Word,
) -> Result<f64> {
    let degrees = common_degrees(nu, num, base.len(), n)?;
    let _ = common_degrees(nu, den, base.len(), n)?;
    let mut sum = KahanSum::new();
    for ext in Extensions::new(&degrees) {
        sum.add(
            nu.relative(base, &ext)?
                * (num.log_relative(base, &ext)? - den.log_relative(base, &ext)?),
        );
    }
    Ok(sum.total())
}

/// Total mass at depth `n`: the raw sum `Σ_{|X|=n} nu(X)` over all length-`n`
/// words from the functional's offset.  Equals 1 for probability measures.
pub fn mass(nu: &dyn Functional, n: usize) -> Result<f64> {
    let degrees = level_degrees(nu, 0, n)?;
    let mut sum = KahanSum::new();
    for branches in Extensions::new(&degrees) {
        sum.add(nu.value(&Word::new(nu.offset(), branches))?);
    }
    Ok(sum.total())
}

/// Result of [`jensen_check`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JensenCheck {
    /// `Σ_{|X|=n} nu(X) · log(nu_p(X) / nu(X))`.
    pub lhs: f64,
    /// `m_n(nu) · log(m_n(nu_p) / m_n(nu))` with `m_n` the depth-`n` mass.
    pub rhs: f64,
    /// Whether `lhs ≤ rhs + 1e-12`.
    pub holds: bool,
    /// Whether `|lhs − rhs| ≤ 1e-9 · max(1, |rhs|)` — fires exactly when the
    /// two functionals are proportional on the depth-`n` slice.
    pub equality: bool,
}

/// Tolerance slack on the inequality side of the convexity check.
pub const JENSEN_HOLDS_TOL: f64 = 1e-12;
/// Relative tolerance for flagging the equality case.
pub const JENSEN_EQUALITY_TOL: f64 = 1e-9;

/// The convexity inequality on the depth-`n` slice: the value-weighted
/// log-ratio sum never exceeds the mass-weighted log-ratio of totals, with
/// equality exactly when `nu_p` is a constant multiple of `nu` there.
pub fn jensen_check(nu: &dyn Functional, nu_p: &dyn Functional, n: usize) -> Result<JensenCheck> {
    let degrees = common_degrees(nu, nu_p, 0, n)?;
    let mut lhs = KahanSum::new();
    let mut mass_nu = KahanSum::new();
    let mut mass_np = KahanSum::new();
    for branches in Extensions::new(&degrees) {
        let word = Word::new(nu.offset(), branches);
        let log_v = nu.log_value(&word)?;
        let log_vp = nu_p.log_value(&word)?;
        let v = log_v.exp();
        lhs.add(v * (log_vp - log_v));
        mass_nu.add(v);
        mass_np.add(log_vp.exp());
    }
    let m = mass_nu.total();
    let mp = mass_np.total();
    let lhs = lhs.total();
    let rhs = m * (mp.ln() - m.ln());
    Ok(JensenCheck {
        lhs,
        rhs,
        holds: lhs <= rhs + JENSEN_HOLDS_TOL,
        equality: (lhs - rhs).abs() <= JENSEN_EQUALITY_TOL * rhs.abs().max(1.0),
    })
}

/// Truncated conditional-ratio distance: the sup over all words `X` with
/// `|X| ≤ horizon` and single letters `a` of
/// `|log(nu_X(a) / nu_p_X(a))|`.
///
/// This lower-bounds the untruncated distance (a sup over all depths), so
/// callers should report it together with `horizon`.  It is zero iff the two
/// functionals have identical conditionals on the covered range — in
/// particular it is blind to global scaling.
pub fn dcal_distance(nu: &dyn Functional, nu_p: &dyn Functional, horizon: usize) -> Result<f64> {
    let degrees = common_degrees(nu, nu_p, 0, horizon + 1)?;
    let mut sup: f64 = 0.0;
    for len in 0..=horizon {
        for branches in Extensions::new(&degrees[..len]) {
            let base = Word::new(nu.offset(), branches);
            for a in 0..degrees[len] {
                let ext = [a as u32];
                let diff =
                    (nu.log_relative(&base, &ext)? - nu_p.log_relative(&base, &ext)?).abs();
                sup = sup.max(diff);
            }
        }
    }
    Ok(sup)
}
