//! Prior-inherited Bayesian-UCB candidate selection, plus Uniform and UCB1
//! baselines for budget-efficiency comparisons.
//!
//! Each candidate's expected score is modelled as Beta(alpha, beta). A child
//! inherits its prior from the parent's posterior mean scaled by the prior
//! strength S, then selection rounds pull the child with the highest upper
//! posterior quantile, evaluate one minibatch, and update the posterior.

mod beta;
mod select;

pub use beta::{beta_quantile, ln_gamma, regularized_incomplete_beta};
pub use select::{
    baseline_ucb1, baseline_uniform, select, Evaluator, PullRecord, SelectionOutcome,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Beta posterior state of one candidate: fractional pseudo-counts plus the
/// number of evaluated examples behind them.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BetaPosterior {
    pub alpha: f64,
    pub beta: f64,
    pub observations: u64,
}

impl BetaPosterior {
    /// Uninformative Beta(1, 1) prior.
    pub fn uniform() -> Self {
        BetaPosterior {
            alpha: 1.0,
            beta: 1.0,
            observations: 0,
        }
    }

    /// Prior inherited from a parent posterior mean, scaled by strength S.
    pub fn from_prior(parent_mean: f64, strength: f64) -> Result<Self> {
        let (alpha, beta) = inherit_prior(parent_mean, strength)?;
        Ok(BetaPosterior {
            alpha,
            beta,
            observations: 0,
        })
    }

    pub fn mean(&self) -> f64 {
        self.alpha / (self.alpha + self.beta)
    }

    /// Posterior update from one evaluated batch with mean score `s`:
    /// alpha += s*B, beta += (1-s)*B.
    pub fn update(&mut self, batch_mean: f64, batch_size: u64) {
        let b = batch_size as f64;
        let da = batch_mean * b;
        self.alpha += da;
        self.beta += b - da;
        self.observations += batch_size;
    }

    pub fn quantile(&self, q: f64) -> Result<f64> {
        beta_quantile(q, self.alpha, self.beta)
    }
}

/// Eq-style prior inheritance: alpha0 = mu*S + 1, beta0 = (1-mu)*S + 1.
/// beta0 is formed as (S+2) - alpha0 so that alpha0 + beta0 is exactly S+2.
pub fn inherit_prior(parent_mean: f64, strength: f64) -> Result<(f64, f64)> {
    if !(0.0..=1.0).contains(&parent_mean) || !parent_mean.is_finite() {
        return Err(Error::InvalidPrior(format!(
            "parent mean must lie in [0, 1], got {parent_mean}"
        )));
    }
    if strength < 0.0 || !strength.is_finite() || strength > 1e12 {
        return Err(Error::InvalidPrior(format!(
            "prior strength must lie in [0, 1e12], got {strength}"
        )));
    }
    let alpha0 = parent_mean * strength + 1.0;
    let total = strength + 2.0;
    let mut beta0 = total - alpha0;
    // Two-sum correction: nudge beta0 so alpha0 + beta0 rounds to exactly
    // S + 2, preserving the invariant in floating point.
    if alpha0 + beta0 != total {
        for candidate in [beta0.next_down(), beta0.next_up()] {
            if alpha0 + candidate == total {
                beta0 = candidate;
                break;
            }
        }
    }
    Ok((alpha0, beta0))
}

/// Quantile schedule q_t = 1 - 1/(t * (ln N)^c), clamped into
/// [quantile_floor, 1 - 1e-9]. Natural log.
pub fn quantile_level(round: u64, total_budget: u64, exploration_c: f64, floor: f64) -> Result<f64> {
    if round < 1 {
        return Err(Error::InvalidConfig("selection rounds are 1-based".into()));
    }
    if total_budget < 2 {
        return Err(Error::InvalidConfig(format!(
            "quantile schedule requires a budget of at least 2, got {total_budget}"
        )));
    }
    let raw = 1.0 - 1.0 / (round as f64 * (total_budget as f64).ln().powf(exploration_c));
    Ok(raw.clamp(floor, 1.0 - 1e-9))
}

/// Budget and schedule knobs for one selection phase.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionConfig {
    /// Total evaluation budget N (in examples).
    pub total_budget: u64,
    /// Minibatch size B per pull.
    pub batch_size: u64,
    /// Prior strength S for inherited child priors.
    pub prior_strength: f64,
    /// Exponent c in the quantile schedule.
    pub exploration_c: f64,
    /// Number of prompts carried to the next iteration.
    pub beam_size: usize,
    /// Lower clamp for the quantile schedule.
    pub quantile_floor: f64,
}

impl SelectionConfig {
    pub fn new(total_budget: u64, beam_size: usize) -> Self {
        SelectionConfig {
            total_budget,
            batch_size: 5,
            prior_strength: 10.0,
            exploration_c: 1.0,
            beam_size,
            quantile_floor: 0.5,
        }
    }

    pub fn rounds(&self) -> u64 {
        self.total_budget / self.batch_size
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn prior_inheritance_matches_direct_substitution() {
        assert_eq!(inherit_prior(0.5, 10.0).unwrap(), (6.0, 6.0));
        assert_eq!(inherit_prior(0.7, 10.0).unwrap(), (8.0, 4.0));
        // S = 0 recovers the uniform prior for any mean.
        for mean in [0.0, 0.3, 0.99, 1.0] {
            assert_eq!(inherit_prior(mean, 0.0).unwrap(), (1.0, 1.0));
        }
    }

    #[test]
    fn prior_inheritance_rejects_out_of_range_inputs() {
        assert!(matches!(inherit_prior(-0.1, 10.0), Err(Error::InvalidPrior(_))));
        assert!(matches!(inherit_prior(1.1, 10.0), Err(Error::InvalidPrior(_))));
        assert!(matches!(inherit_prior(0.5, -1.0), Err(Error::InvalidPrior(_))));
    }

    #[test]
    fn inherited_mean_identity_holds_to_the_ulp() {
        // Bitwise equality of the two expressions is unsatisfiable in
        // IEEE-754 for some (mu, S) (half-ulp tie against an odd-mantissa
        // total), so the identity is pinned at ulp scale.
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..1000 {
            let mu: f64 = rng.gen_range(0.0..=1.0);
            let s: f64 = rng.gen_range(0.0..1000.0);
            let posterior = BetaPosterior::from_prior(mu, s).unwrap();
            let expected = (mu * s + 1.0) / (s + 2.0);
            assert!(
                (posterior.mean() - expected).abs() <= 1e-15,
                "mu={mu}, s={s}: {} vs {expected}",
                posterior.mean()
            );
        }
    }

    #[test]
    fn posterior_mean_arithmetic() {
        assert_eq!(BetaPosterior::uniform().mean(), 0.5);
        let p = BetaPosterior {
            alpha: 8.0,
            beta: 4.0,
            observations: 0,
        };
        assert!((p.mean() - 2.0 / 3.0).abs() < 1e-15);
        // After one (6,6) prior plus 4 successes / 1 failure: 10/17.
        let mut q = BetaPosterior::from_prior(0.5, 10.0).unwrap();
        q.update(0.8, 5);
        assert!((q.mean() - 10.0 / 17.0).abs() < 1e-12);
    }

    #[test]
    fn update_arithmetic_matches_the_rule() {
        let mut p = BetaPosterior::from_prior(0.5, 10.0).unwrap();
        p.update(0.8, 5);
        assert_eq!((p.alpha, p.beta, p.observations), (10.0, 7.0, 5));

        let mut all_fail = BetaPosterior {
            alpha: 3.0,
            beta: 2.0,
            observations: 0,
        };
        all_fail.update(0.0, 7);
        assert_eq!((all_fail.alpha, all_fail.beta), (3.0, 9.0));

        let mut all_pass = BetaPosterior::uniform();
        all_pass.update(1.0, 10);
        assert_eq!((all_pass.alpha, all_pass.beta), (11.0, 1.0));
    }

    #[test]
    fn quantile_schedule_values() {
        // c = 0 makes (ln N)^c = 1, so q_2 = 1 - 1/2.
        assert_eq!(quantile_level(2, 100, 0.0, 0.5).unwrap(), 0.5);
        // High-precision reference: 1 - 1/ln(100).
        let q = quantile_level(1, 100, 1.0, 0.5).unwrap();
        assert!((q - 0.782_852_759_048_374_1).abs() < 1e-12);
        // Raw value is negative here and must clamp to the floor.
        assert_eq!(quantile_level(1, 2, 3.0, 0.5).unwrap(), 0.5);
        assert!(matches!(quantile_level(1, 1, 1.0, 0.5), Err(Error::InvalidConfig(_))));
    }

    #[test]
    fn quantile_schedule_is_monotone_after_clamping() {
        let mut prev = 0.0;
        for t in 1..200 {
            let q = quantile_level(t, 450, 1.0, 0.5).unwrap();
            assert!(q >= prev);
            prev = q;
        }
        assert!(prev < 1.0);
    }

    proptest! {
        #[test]
        fn conservation_under_arbitrary_update_sequences(
            seed in 0u64..1000,
            mu in 0.0f64..=1.0,
            s in 0.0f64..500.0,
            steps in 1usize..60,
        ) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let (a0, b0) = inherit_prior(mu, s).unwrap();
            let mut p = BetaPosterior::from_prior(mu, s).unwrap();
            for _ in 0..steps {
                let batch: u64 = rng.gen_range(1..=20);
                let score: f64 = rng.gen_range(0.0..=1.0);
                p.update(score, batch);
            }
            let drift = (p.alpha + p.beta) - (a0 + b0) - p.observations as f64;
            prop_assert!(drift.abs() <= 1e-9, "drift = {drift}");
        }

        #[test]
        fn inherited_prior_total_is_s_plus_two(
            mu in 0.0f64..=1.0,
            s in 0.0f64..1000.0,
        ) {
            let (a0, b0) = inherit_prior(mu, s).unwrap();
            let total = s + 2.0;
            prop_assert!(((a0 + b0) - total).abs() <= total * 1e-15);
            prop_assert!(a0 >= 1.0 - 1e-12 && b0 >= 1.0 - 1e-12);
        }
    }
}
