//! Structured coefficient perturbations with per-map backoff.
//!
//! A plan displaces one coefficient of every map of every generation up to
//! the materialization horizon. Each generation is re-validated after the
//! displacement; any map implicated in a defect — band escape, containment
//! or separation failure, or a broken matched-branch certificate against the
//! base — has its own step halved and the generation is retried, so a valid
//! nearby system is produced whenever one exists within the backoff budget.

use std::sync::Arc;

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::conformal::{
    validate_generation, ConformalMap, DomainConfig, DomainSpec, GenerationSpec, MapKind, ModeTag,
    SystemConfig, SystemSpec,
};
use crate::rng::stream;
use crate::{Error, Result};

/// Hölder exponent `log(1 − eta) / log(eta (1 − eta))` governing how
/// cylinder-diameter conditionals respond to a coefficient perturbation
/// within the contraction band `eta`.
pub fn alpha_exponent(eta: f64) -> Result<f64> {
    if !(eta > 0.0 && eta < 1.0) {
        return Err(Error::Config(format!(
            "eta must lie in (0, 1), got {eta}"
        )));
    }
    Ok((1.0 - eta).ln() / (eta * (1.0 - eta)).ln())
}

/// Which coefficient of every map is displaced, and how.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PerturbMode {
    /// `b += epsilon · u` with `u` a per-(generation, branch) unit direction:
    /// rigid translation of each branch image.
    TranslateB,
    /// `a *= 1 + epsilon`: uniform rescaling of each derivative.
    ScaleA,
    /// `c += JIGGLE_SCALE · epsilon · u`: bends each map; similarities
    /// become genuine quadratics.
    JiggleC,
}

/// Step factor for [`PerturbMode::JiggleC`]. The quadratic coefficient lives
/// under the injectivity constraint `2|c|(1 + eta) < |a|`, so the jiggle is
/// an order of magnitude gentler than the other modes.
pub const JIGGLE_SCALE: f64 = 0.1;

/// Halving factor for the per-map backoff.
pub const SHRINK_FACTOR: f64 = 0.5;

/// Backoff rounds before a generation is declared infeasible.
pub const MAX_SHRINKS: u32 = 10;

/// A reproducible perturbation: size, mode, and the seed the per-branch
/// directions are drawn from.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PerturbationPlan {
    pub epsilon: f64,
    pub mode: PerturbMode,
    /// Seed for the unit-direction draws; one stream per (generation,
    /// branch), so deeper generations never shift shallower directions.
    pub directions_seed: u64,
}

impl PerturbationPlan {
    /// Sup-norm bound on the coefficient displacement measured on the circle
    /// of radius `gamma`: translations move by `epsilon`, rescalings by
    /// `epsilon |a| gamma < epsilon gamma`, jiggles by
    /// `JIGGLE_SCALE · epsilon · gamma²`.
    pub fn distance_bound(&self, gamma: f64) -> f64 {
        self.epsilon * gamma.powi(2).max(1.0)
    }
}

/// Displaces every generation of `base` up to its horizon by `plan`,
/// halving the step of any map implicated in a validation or compatibility
/// defect (at most [`MAX_SHRINKS`] times per generation) until the
/// generation passes. The result is an explicit system over the same
/// domain; its distance from the base never exceeds
/// [`PerturbationPlan::distance_bound`] because steps only shrink.
///
/// A zero step returns the base spec itself: nothing is displaced.
pub fn perturb_system(base: &Arc<SystemSpec>, plan: &PerturbationPlan) -> Result<Arc<SystemSpec>> {
    if !(plan.epsilon >= 0.0) || !plan.epsilon.is_finite() {
        return Err(Error::Config(format!(
            "perturbation size must be finite and nonnegative, got {}",
            plan.epsilon
        )));
    }
    if plan.epsilon == 0.0 {
        return Ok(Arc::clone(base));
    }
    let domain = *base.domain();
    let mut prefix = Vec::with_capacity(base.horizon());
    for k in 0..base.horizon() {
        let gen = base.generation(k)?;
        prefix.push(perturb_generation(&gen, &domain, k, base.degree_cap(), plan)?);
    }
    SystemSpec::from_config(SystemConfig {
        domain: DomainConfig {
            eta: domain.eta,
            gamma: Some(domain.gamma),
        },
        mode: ModeTag::Explicit,
        prefix,
        period: None,
        seed: None,
        seeded: None,
        horizon: base.horizon(),
        degree_cap: base.degree_cap(),
    })
}

fn displaced(m: &ConformalMap, mode: PerturbMode, eps: f64, dir: Complex64) -> ConformalMap {
    match mode {
        PerturbMode::TranslateB => ConformalMap {
            b: m.b + eps * dir,
            ..*m
        },
        PerturbMode::ScaleA => ConformalMap {
            a: m.a * (1.0 + eps),
            ..*m
        },
        PerturbMode::JiggleC => ConformalMap {
            kind: MapKind::Quadratic,
            c: m.c + JIGGLE_SCALE * eps * dir,
            ..*m
        },
    }
}

/// One generation of the backoff loop. `bad[i]` collects every certificate
/// map `i` fails this round; all flagged maps shrink together before the
/// retry.
fn perturb_generation(
    gen: &GenerationSpec,
    domain: &DomainSpec,
    k: usize,
    degree_cap: usize,
    plan: &PerturbationPlan,
) -> Result<Vec<ConformalMap>> {
    let d = gen.degree();
    let eta = domain.eta;
    let dirs: Vec<Complex64> = (0..d)
        .map(|i| {
            let idx = ((k as u64) << 32) | i as u64;
            let mut rng = stream(plan.directions_seed, "perturb-direction", idx);
            Complex64::from_polar(1.0, rng.gen_range(0.0..std::f64::consts::TAU))
        })
        .collect();
    let mut eps = vec![plan.epsilon; d];
    let mut shrinks = 0u32;
    loop {
        let cand = GenerationSpec::new(
            (0..d)
                .map(|i| displaced(&gen.maps[i], plan.mode, eps[i], dirs[i]))
                .collect(),
        );
        let mut bad = vec![false; d];
        for (i, m) in cand.maps.iter().enumerate() {
            let (lo, hi) = m.deriv_bounds(1.0 + eta);
            bad[i] = m.check_kind(eta).is_err()
                || !(lo > eta && hi < 1.0 - eta)
                || cand
                    .image_enclosure(i, eta)
                    .containment_margin(domain.core_radius())
                    < 0.0;
        }
        if !bad.iter().any(|&b| b) {
            for i in 0..d {
                // Separation within the candidate, and the matched-branch
                // certificate against the base: branch i must still provably
                // meet base branch i and provably miss every other branch.
                if cand.inner_disk(i, eta).gap(&gen.inner_disk(i, eta)) >= 0.0 {
                    bad[i] = true;
                }
                for j in 0..d {
                    if i == j {
                        continue;
                    }
                    let sep = cand.image_enclosure(i, eta).gap(&gen.image_enclosure(j, eta));
                    let own = cand.image_enclosure(i, eta).gap(&cand.image_enclosure(j, eta));
                    if sep <= 0.0 || own <= 0.0 {
                        bad[i] = true;
                    }
                }
            }
        }
        if !bad.iter().any(|&b| b) {
            // The full validator repeats these checks from scratch; it stays
            // the final word so nothing ships that it would reject.
            let rep = validate_generation(&cand, domain, k, degree_cap)?;
            if rep.ok {
                return Ok(cand.maps);
            }
            bad = vec![true; d];
        }
        if shrinks == MAX_SHRINKS {
            return Err(Error::PerturbationInfeasible(format!(
                "generation {k}: a valid displacement was not reached after {MAX_SHRINKS} \
                 halvings of step {}",
                plan.epsilon
            )));
        }
        shrinks += 1;
        for (e, &flag) in eps.iter_mut().zip(&bad) {
            if flag {
                *e *= SHRINK_FACTOR;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conformal::{autonomous_similarities, system_distance};

    fn pair(a: f64, horizon: usize) -> Arc<SystemSpec> {
        autonomous_similarities(0.1, &[(a, -0.5), (a, 0.5)], horizon).unwrap()
    }

    #[test]
    fn exponent_matches_the_closed_form() {
        let alpha = alpha_exponent(0.1).unwrap();
        assert!((alpha - 0.043755).abs() < 1e-6, "got {alpha}");
        // log(x) / log(x²) = 1/2, and the f64 halving is exact.
        assert_eq!(alpha_exponent(0.5).unwrap(), 0.5);
        for bad in [0.0, 1.0, -0.3, 1.7, f64::NAN] {
            assert!(matches!(alpha_exponent(bad), Err(Error::Config(_))));
        }
    }

    #[test]
    fn zero_step_returns_the_base_spec_itself() {
        let base = pair(0.3, 6);
        let plan = PerturbationPlan {
            epsilon: 0.0,
            mode: PerturbMode::TranslateB,
            directions_seed: 5,
        };
        let out = perturb_system(&base, &plan).unwrap();
        assert!(Arc::ptr_eq(&base, &out));
        assert_eq!(system_distance(&base, &out, 6).unwrap().distance, 0.0);
    }

    #[test]
    fn translation_distance_is_exactly_the_step() {
        let base = pair(0.3, 6);
        for (epsilon, seed) in [(0.05, 5), (0.0125, 5), (0.03, 99)] {
            let plan = PerturbationPlan {
                epsilon,
                mode: PerturbMode::TranslateB,
                directions_seed: seed,
            };
            let out = perturb_system(&base, &plan).unwrap();
            let d = system_distance(&base, &out, 6).unwrap().distance;
            assert!(
                (d - epsilon).abs() < 1e-12 * epsilon.max(1.0),
                "step {epsilon}: distance {d}"
            );
        }
    }

    #[test]
    fn same_plan_reproduces_the_same_system() {
        let base = pair(0.3, 5);
        let plan = PerturbationPlan {
            epsilon: 0.04,
            mode: PerturbMode::TranslateB,
            directions_seed: 21,
        };
        let one = perturb_system(&base, &plan).unwrap();
        let two = perturb_system(&base, &plan).unwrap();
        assert_eq!(one.config().prefix, two.config().prefix);
        let other = perturb_system(
            &base,
            &PerturbationPlan {
                directions_seed: 22,
                ..plan
            },
        )
        .unwrap();
        assert_ne!(one.config().prefix, other.config().prefix);
    }

    #[test]
    fn oversized_scaling_shrinks_to_a_valid_system_below_the_bound() {
        // a = 0.35 leaves containment room 0.9 − (0.5 + 1.1·0.35) = 0.015,
        // so scaling by 20% must back off yet still land on a valid system.
        let base = pair(0.35, 6);
        let plan = PerturbationPlan {
            epsilon: 0.2,
            mode: PerturbMode::ScaleA,
            directions_seed: 3,
        };
        let out = perturb_system(&base, &plan).unwrap();
        assert!(!Arc::ptr_eq(&base, &out));
        let d = system_distance(&base, &out, 6).unwrap().distance;
        let gamma = base.domain().gamma;
        assert!(d > 0.0);
        assert!(d <= plan.distance_bound(gamma));
        // The shrunken step keeps the displacement strictly below the
        // unattainable request: 0.2 · |a| · gamma.
        assert!(d < 0.2 * 0.35 * gamma);
        out.validate(6).unwrap().iter().for_each(|rep| assert!(rep.ok));
    }

    #[test]
    fn jiggle_bends_similarities_into_valid_quadratics() {
        let base = pair(0.3, 4);
        let plan = PerturbationPlan {
            epsilon: 0.1,
            mode: PerturbMode::JiggleC,
            directions_seed: 8,
        };
        let out = perturb_system(&base, &plan).unwrap();
        for gen in &out.config().prefix {
            for m in gen {
                assert_eq!(m.kind, MapKind::Quadratic);
                assert!((m.c.norm() - JIGGLE_SCALE * 0.1).abs() < 1e-15);
            }
        }
        let d = system_distance(&base, &out, 4).unwrap().distance;
        let gamma = base.domain().gamma;
        assert!((d - JIGGLE_SCALE * 0.1 * gamma * gamma).abs() < 1e-12);
        assert!(d <= plan.distance_bound(gamma));
    }

    #[test]
    fn hopeless_steps_are_rejected_after_the_backoff_budget() {
        let base = pair(0.3, 4);
        let plan = PerturbationPlan {
            epsilon: 1e4,
            mode: PerturbMode::TranslateB,
            directions_seed: 2,
        };
        assert!(matches!(
            perturb_system(&base, &plan),
            Err(Error::PerturbationInfeasible(_))
        ));
        assert!(matches!(
            perturb_system(
                &base,
                &PerturbationPlan {
                    epsilon: f64::NAN,
                    ..plan
                }
            ),
            Err(Error::Config(_))
        ));
    }
}
