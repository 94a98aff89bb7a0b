//! The ratio-certification pipeline.
//!
//! For a rational target ratio r, grow θ from 1 toward r − 2 by repeated
//! gap-reducing steps. Each step needs a stop certificate from `find_stop`;
//! when an attempt diverges the step size is halved and retried, down to a
//! floor. The recipe (θ, δ, N per step) is the desk-size certificate; on
//! request it is executed through the geometric construction to an actual
//! verified cap.

use serde::{Deserialize, Serialize};

use crate::boxcap::{verify_box_cap, BoxCap};
use crate::error::{Error, Result};
use crate::quasicap::{gap_step_with, initial_quasicap};
use crate::rational::Rational;
use crate::strand::{find_stop_with, StopResult, StrandParams, DEFAULT_MAX_BITS};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RecipeStep {
    pub theta: Rational,
    pub delta: Rational,
    #[serde(rename = "N")]
    pub n: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Recipe {
    pub r: Rational,
    pub steps: Vec<RecipeStep>,
}

#[derive(Clone, Debug)]
pub struct CertifyParams {
    /// First step size attempted at every θ level.
    pub delta0: Rational,
    /// Index cutoff for each strand scan.
    pub cutoff: usize,
    /// Halving floor; a level that cannot stop above this stalls.
    pub delta_min: Rational,
    /// Bit budget per scaled strand term.
    pub max_bits: u64,
    /// Hard bound on recipe length.
    pub max_steps: usize,
}

impl Default for CertifyParams {
    fn default() -> Self {
        CertifyParams {
            delta0: Rational::new(1, 2),
            cutoff: 10_000,
            delta_min: Rational::new(1, 1 << 20),
            max_bits: DEFAULT_MAX_BITS,
            max_steps: 10_000,
        }
    }
}

/// Builds a step schedule closing the gap for ratio r. θ starts at 1; each
/// level tries δ = min(delta0, r−2−θ), halving on failure. The final step
/// is clamped so θ+δ = r−2 exactly.
pub fn certify_r(r: &Rational, params: &CertifyParams) -> Result<Recipe> {
    if r <= &Rational::from_int(4) {
        return Err(Error::InvalidParam(format!(
            "certification targets ratios above 4, got {r}"
        )));
    }
    let goal = r - &Rational::from_int(2);
    let mut theta = Rational::one();
    let mut steps = Vec::new();
    while theta < goal {
        let remaining = &goal - &theta;
        let mut delta = params.delta0.clone().min(remaining);
        let stop = loop {
            match find_stop_with(
                &StrandParams::new(r.clone(), theta.clone(), delta.clone()),
                params.cutoff,
                params.max_bits,
            ) {
                StopResult::Stopped(n) => break n,
                _ => {
                    delta = delta / Rational::from_int(2);
                    if delta < params.delta_min {
                        return Err(Error::Stalled(format!(
                            "no stop above δ = {} at θ = {theta} (r = {r})",
                            params.delta_min
                        )));
                    }
                }
            }
        };
        steps.push(RecipeStep { theta: theta.clone(), delta: delta.clone(), n: stop });
        theta = &theta + &delta;
        if steps.len() > params.max_steps {
            return Err(Error::Stalled(format!(
                "recipe exceeded {} steps at θ = {theta}",
                params.max_steps
            )));
        }
    }
    Ok(Recipe { r: r.clone(), steps })
}

/// Runs a recipe through the geometric construction, re-certifying every
/// stop, and returns the final cap after strict verification.
pub fn execute_recipe(recipe: &Recipe, cutoff: usize, budget: usize) -> Result<BoxCap> {
    let mut qc = initial_quasicap(&recipe.r)?;
    for (i, step) in recipe.steps.iter().enumerate() {
        if step.theta != qc.theta {
            return Err(Error::InvalidParam(format!(
                "step {i} expects θ = {}, cap is at θ = {}",
                step.theta, qc.theta
            )));
        }
        qc = gap_step_with(&qc, &step.delta, cutoff, DEFAULT_MAX_BITS, budget)?;
    }
    if !qc.gap_is_closed() {
        return Err(Error::InvalidParam(format!(
            "recipe leaves the gap open at θ = {}, need {}",
            qc.theta,
            &recipe.r - &Rational::from_int(2)
        )));
    }
    let report = verify_box_cap(&qc.cap);
    if !report.ok {
        return Err(Error::InvalidCap(format!(
            "executed cap failed strict verification: {:?}",
            report.violations[0]
        )));
    }
    Ok(qc.cap)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::rat;

    #[test]
    fn nine_halves_recipe_is_the_two_step_schedule() {
        let params = CertifyParams { delta0: rat(4, 5), ..CertifyParams::default() };
        let recipe = certify_r(&rat(9, 2), &params).unwrap();
        assert_eq!(recipe.steps.len(), 2);
        assert_eq!(
            (recipe.steps[0].theta.clone(), recipe.steps[0].delta.clone(), recipe.steps[0].n),
            (rat(1, 1), rat(4, 5), 7)
        );
        assert_eq!(
            (recipe.steps[1].theta.clone(), recipe.steps[1].delta.clone(), recipe.steps[1].n),
            (rat(9, 5), rat(7, 10), 7)
        );
    }

    #[test]
    fn executing_the_recipe_builds_a_cap() {
        let params = CertifyParams { delta0: rat(4, 5), ..CertifyParams::default() };
        let recipe = certify_r(&rat(9, 2), &params).unwrap();
        let cap = execute_recipe(&recipe, 100, 100_000).unwrap();
        assert_eq!(cap.r, rat(9, 2));
        // Key box height r − 2 = 5/2 appears on both sides.
        let key = cap.box_by_id(2).unwrap();
        assert_eq!(key.height, rat(5, 2));
        assert!(verify_box_cap(&cap).ok);
    }

    #[test]
    fn just_above_four_certifies_in_a_few_steps() {
        // Barely past the classical ratio the discriminant is already
        // negative, so stops come fast and the schedule stays short.
        let r = rat(4, 1) + rat(1, 1 << 20);
        let recipe = certify_r(&r, &CertifyParams::default()).unwrap();
        assert!(recipe.steps.len() < 10, "{} steps", recipe.steps.len());
        for step in &recipe.steps {
            assert!(step.n <= 100, "step at θ = {} stopped late (N = {})", step.theta, step.n);
        }
        let total: Rational = recipe
            .steps
            .iter()
            .fold(Rational::one(), |acc, s| acc + s.delta.clone());
        assert_eq!(total, &r - &rat(2, 1));
    }

    #[test]
    fn recipe_json_round_trip() {
        let recipe = Recipe {
            r: rat(9, 2),
            steps: vec![RecipeStep { theta: rat(1, 1), delta: rat(4, 5), n: 7 }],
        };
        let s = serde_json::to_string(&recipe).unwrap();
        assert!(s.contains("\"N\":7"));
        let back: Recipe = serde_json::from_str(&s).unwrap();
        assert_eq!(back, recipe);
    }

    #[test]
    fn ratio_four_is_out_of_scope() {
        assert!(matches!(
            certify_r(&rat(4, 1), &CertifyParams::default()),
            Err(Error::InvalidParam(_))
        ));
    }
}
