//! Deterministic Bernoulli-world simulator.
//!
//! Verifies the selection-strategy claims at desk scale: prior-inherited
//! Bayes-UCB needs fewer suboptimal pulls than its prior-free ablation when
//! parent priors are informative on average (the KL-closeness condition),
//! budget-to-target comparisons against Uniform and UCB1, the
//! prior-strength sweep, and the parent-child correlation the lineage model
//! is calibrated against.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use std::fmt;
use std::io::Write;

use crate::bandit::{
    baseline_ucb1, baseline_uniform, select, BetaPosterior, SelectionConfig, SelectionOutcome,
};
use crate::error::{Error, Result};
use crate::prompt::{MultimodalPrompt, NodeId, OperatorKind, PromptNode};

const MEAN_LO: f64 = 0.01;
const MEAN_HI: f64 = 0.99;

/// Lineage noise calibrated so parent-child Pearson correlation lands at
/// 0.88 when parents are drawn from the paper-like mean range (see the
/// calibrate_lineage example for the sweep).
pub const CALIBRATED_LINEAGE_SIGMA: f64 = 0.11;

// Separate ChaCha streams so that consuming draws for one purpose (e.g.
// prior estimates) never shifts another purpose's stream.
const STREAM_WORLD: u64 = 1;
const STREAM_PRIOR: u64 = 2;
const STREAM_EVAL: u64 = 3;

fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// A k-armed Bernoulli world with a unique best arm.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimWorld {
    pub means: Vec<f64>,
    pub best: usize,
    pub seed: u64,
}

impl SimWorld {
    pub fn gaps(&self) -> Vec<f64> {
        let top = self.means[self.best];
        self.means.iter().map(|&m| top - m).collect()
    }
}

/// How latent arm means are drawn.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum GapProfile {
    /// Best arm at `best`, every other arm exactly `gap` below.
    FixedGap { best: f64, gap: f64 },
    /// Means uniform over (0.01, 0.99).
    UniformRandom,
    /// Means uniform over [0.2, 0.9], the shape used for the paper-like
    /// nine-child worlds.
    PaperLike,
}

pub fn make_world(k: usize, profile: &GapProfile, seed: u64) -> Result<SimWorld> {
    if k < 2 {
        return Err(Error::InvalidConfig(format!(
            "a bandit world needs at least 2 arms, got {k}"
        )));
    }
    let mut rng = stream_rng(seed, STREAM_WORLD);
    match profile {
        GapProfile::FixedGap { best, gap } => {
            let mut means = vec![*best];
            means.extend(std::iter::repeat(best - gap).take(k - 1));
            if means.iter().any(|&m| !(MEAN_LO..=MEAN_HI).contains(&m)) {
                return Err(Error::InvalidConfig(format!(
                    "fixed-gap profile leaves means outside ({MEAN_LO}, {MEAN_HI})"
                )));
            }
            Ok(SimWorld { means, best: 0, seed })
        }
        GapProfile::UniformRandom | GapProfile::PaperLike => {
            let (lo, hi) = match profile {
                GapProfile::PaperLike => (0.2, 0.9),
                _ => (MEAN_LO, MEAN_HI),
            };
            // Regenerate on exact ties so the best arm is unique.
            loop {
                let means: Vec<f64> = (0..k).map(|_| rng.gen_range(lo..hi)).collect();
                let best = argmax(&means);
                let unique = means
                    .iter()
                    .enumerate()
                    .all(|(i, &m)| i == best || m < means[best]);
                if unique {
                    return Ok(SimWorld { means, best, seed });
                }
            }
        }
    }
}

fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate() {
        if v > values[best] {
            best = i;
        }
    }
    best
}

/// Parent-to-child spawning rule:
/// child = clip(parent + operator_shift + Normal(0, sigma)), and the prior
/// the child would inherit is clip(parent + Normal(0, eta)).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LineageModel {
    pub noise_sigma: f64,
    #[serde(default)]
    pub generation_shift: f64,
    #[serde(default)]
    pub edit_shift: f64,
    #[serde(default)]
    pub mix_shift: f64,
    pub prior_noise_eta: f64,
}

impl Default for LineageModel {
    fn default() -> Self {
        LineageModel {
            noise_sigma: CALIBRATED_LINEAGE_SIGMA,
            generation_shift: 0.0,
            edit_shift: 0.0,
            mix_shift: 0.0,
            prior_noise_eta: 0.05,
        }
    }
}

impl LineageModel {
    fn shift(&self, op: OperatorKind) -> f64 {
        match op {
            OperatorKind::Root => 0.0,
            OperatorKind::Generation => self.generation_shift,
            OperatorKind::Edit => self.edit_shift,
            OperatorKind::Mix => self.mix_shift,
        }
    }

    pub fn spawn_children<R: Rng>(
        &self,
        parent_mean: f64,
        operators: &[OperatorKind],
        rng: &mut R,
    ) -> Vec<f64> {
        operators
            .iter()
            .map(|&op| {
                let sampled = if self.noise_sigma > 0.0 {
                    Normal::new(0.0, self.noise_sigma)
                        .expect("finite sigma")
                        .sample(rng)
                } else {
                    0.0
                };
                (parent_mean + self.shift(op) + sampled).clamp(MEAN_LO, MEAN_HI)
            })
            .collect()
    }

    pub fn estimate_parent<R: Rng>(&self, parent_mean: f64, rng: &mut R) -> f64 {
        noisy_estimate(parent_mean, self.prior_noise_eta, rng)
    }
}

fn noisy_estimate<R: Rng>(mean: f64, eta: f64, rng: &mut R) -> f64 {
    if eta == 0.0 {
        return mean.clamp(MEAN_LO, MEAN_HI);
    }
    let noise = Normal::new(0.0, eta).expect("finite eta");
    (mean + noise.sample(rng)).clamp(MEAN_LO, MEAN_HI)
}

/// How each arm's inherited prior mean is derived from its latent mean.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum PriorModel {
    /// Parent estimated the child's mean up to Gaussian noise eta.
    Noisy { eta: f64 },
    /// No information: every prior mean is 1/2.
    Uninformative,
    /// Worst case: the prior mean mirrors the truth around 1/2.
    Adversarial,
}

impl PriorModel {
    pub fn estimate<R: Rng>(&self, mean: f64, rng: &mut R) -> f64 {
        match self {
            PriorModel::Noisy { eta } => noisy_estimate(mean, *eta, rng),
            PriorModel::Uninformative => 0.5,
            PriorModel::Adversarial => (1.0 - mean).clamp(MEAN_LO, MEAN_HI),
        }
    }
}

/// Bernoulli KL divergence d(p, q) with the 0 log 0 = 0 convention.
pub fn bernoulli_kl(p: f64, q: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::Domain(format!("p must lie in [0, 1], got {p}")));
    }
    if q <= 0.0 || q >= 1.0 {
        return Err(Error::Domain(format!("q must lie in (0, 1), got {q}")));
    }
    let mut kl = 0.0;
    if p > 0.0 {
        kl += p * (p / q).ln();
    }
    if p < 1.0 {
        kl += (1.0 - p) * ((1.0 - p) / (1.0 - q)).ln();
    }
    Ok(kl)
}

/// Empirical check of the average KL-closeness condition over (child mean,
/// prior estimate) pairs: mean of d(mu, mu_hat) - d(mu, 1/2). Negative
/// certifies the priors are informative on average.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KlCheck {
    pub mean: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub samples: usize,
}

pub fn check_kl_assumption(
    pairs: &[(f64, f64)],
    bootstrap_resamples: usize,
    seed: u64,
) -> Result<KlCheck> {
    if pairs.len() < 100 {
        return Err(Error::InvalidConfig(format!(
            "the KL check needs at least 100 sampled child arms, got {}",
            pairs.len()
        )));
    }
    let diffs: Vec<f64> = pairs
        .iter()
        .map(|&(mu, mu_hat)| Ok(bernoulli_kl(mu, mu_hat)? - bernoulli_kl(mu, 0.5)?))
        .collect::<Result<_>>()?;
    let mean = diffs.iter().sum::<f64>() / diffs.len() as f64;
    let (ci_low, ci_high) = bootstrap_mean_ci(&diffs, bootstrap_resamples, seed);
    Ok(KlCheck {
        mean,
        ci_low,
        ci_high,
        samples: pairs.len(),
    })
}

/// (child mean, prior estimate) pairs drawn through the full lineage model:
/// parent from the profile, child spawned, parent estimated.
pub fn lineage_kl_pairs(
    n: usize,
    profile: &GapProfile,
    lineage: &LineageModel,
    seed: u64,
) -> Result<Vec<(f64, f64)>> {
    let (lo, hi) = match profile {
        GapProfile::PaperLike => (0.2, 0.9),
        GapProfile::UniformRandom => (MEAN_LO, MEAN_HI),
        GapProfile::FixedGap { .. } => {
            return Err(Error::InvalidConfig(
                "lineage sampling needs a stochastic mean profile".into(),
            ))
        }
    };
    let mut rng = stream_rng(seed, STREAM_WORLD);
    let mut prior_rng = stream_rng(seed, STREAM_PRIOR);
    let mut pairs = Vec::with_capacity(n);
    for _ in 0..n {
        let parent = rng.gen_range(lo..hi);
        let child = lineage.spawn_children(parent, &[OperatorKind::Generation], &mut rng)[0];
        let estimate = lineage.estimate_parent(parent, &mut prior_rng);
        pairs.push((child, estimate));
    }
    Ok(pairs)
}

/// (arm mean, prior estimate) pairs over whole worlds under a prior model.
pub fn world_prior_kl_pairs(worlds: &[SimWorld], prior: &PriorModel, seed: u64) -> Vec<(f64, f64)> {
    let mut rng = stream_rng(seed, STREAM_PRIOR);
    let mut pairs = Vec::new();
    for world in worlds {
        for &mu in &world.means {
            pairs.push((mu, prior.estimate(mu, &mut rng)));
        }
    }
    pairs
}

/// Parent-child Pearson correlation of the lineage model over `n` pairs.
pub fn parent_child_correlation(
    n: usize,
    profile: &GapProfile,
    lineage: &LineageModel,
    seed: u64,
) -> Result<f64> {
    let (lo, hi) = match profile {
        GapProfile::PaperLike => (0.2, 0.9),
        _ => (MEAN_LO, MEAN_HI),
    };
    let mut rng = stream_rng(seed, STREAM_WORLD);
    let mut xs = Vec::with_capacity(n);
    let mut ys = Vec::with_capacity(n);
    for _ in 0..n {
        let parent = rng.gen_range(lo..hi);
        let child = lineage.spawn_children(parent, &[OperatorKind::Generation], &mut rng)[0];
        xs.push(parent);
        ys.push(child);
    }
    Ok(pearson(&xs, &ys))
}

fn pearson(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let mut cov = 0.0;
    let mut vx = 0.0;
    let mut vy = 0.0;
    for (&x, &y) in xs.iter().zip(ys) {
        cov += (x - mx) * (y - my);
        vx += (x - mx) * (x - mx);
        vy += (y - my) * (y - my);
    }
    cov / (vx.sqrt() * vy.sqrt())
}

/// Percentile bootstrap CI for the mean (2.5% / 97.5%).
pub fn bootstrap_mean_ci(values: &[f64], resamples: usize, seed: u64) -> (f64, f64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = values.len();
    let mut means: Vec<f64> = (0..resamples)
        .map(|_| {
            let mut total = 0.0;
            for _ in 0..n {
                total += values[rng.gen_range(0..n)];
            }
            total / n as f64
        })
        .collect();
    means.sort_by(f64::total_cmp);
    let lo = means[(resamples as f64 * 0.025) as usize];
    let hi = means[((resamples as f64 * 0.975) as usize).min(resamples - 1)];
    (lo, hi)
}

/// The four selection strategies under comparison.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Strategy {
    /// Bayes-UCB with parent-inherited priors.
    BayesUcbInherited,
    /// Bayes-UCB from the uniform prior (the "w/o prior" ablation).
    BayesUcbUniform,
    /// Even budget split.
    Uniform,
    /// Classic UCB1.
    Ucb1,
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Strategy::BayesUcbInherited => "bayes-inherited",
            Strategy::BayesUcbUniform => "bayes-uniform",
            Strategy::Uniform => "uniform",
            Strategy::Ucb1 => "ucb1",
        };
        f.write_str(s)
    }
}

/// Outcome of one simulated selection run.
#[derive(Debug, Clone)]
pub struct RunStats {
    pub identified: bool,
    /// Examples spent on arms other than the best one.
    pub suboptimal_examples: u64,
    /// Examples allocated per arm; sums to B * floor(N/B) for index-based
    /// strategies.
    pub examples_per_arm: Vec<u64>,
    /// Pulled arm indices in order.
    pub pull_sequence: Vec<usize>,
}

fn synthetic_arm(index: usize, posterior: BetaPosterior) -> PromptNode {
    PromptNode {
        id: NodeId(format!("arm-{index:04}")),
        prompt: MultimodalPrompt::text_only(format!("candidate {index}")),
        parent_ids: vec![NodeId("sim-root".into())],
        operator: OperatorKind::Generation,
        condition: None,
        feedback_used: None,
        posterior,
        created_at_iteration: 1,
    }
}

fn arm_index(node: &PromptNode) -> usize {
    node.id
        .0
        .strip_prefix("arm-")
        .and_then(|s| s.parse().ok())
        .expect("synthetic arm id")
}

/// Runs one strategy on one world. `prior_means` are the inherited prior
/// estimates (ignored by the prior-free strategies).
pub fn run_strategy_once(
    strategy: Strategy,
    world: &SimWorld,
    prior_means: &[f64],
    budget: u64,
    cfg: &SelectionConfig,
    eval_seed: u64,
) -> Result<RunStats> {
    let k = world.means.len();
    let children: Vec<PromptNode> = (0..k)
        .map(|i| {
            let posterior = match strategy {
                Strategy::BayesUcbInherited => {
                    BetaPosterior::from_prior(prior_means[i], cfg.prior_strength)?
                }
                _ => BetaPosterior::uniform(),
            };
            Ok(synthetic_arm(i, posterior))
        })
        .collect::<Result<_>>()?;

    let mut eval_rng = stream_rng(eval_seed, STREAM_EVAL);
    let means = world.means.clone();
    let mut evaluator = move |node: &PromptNode, batch: u64| -> Result<f64> {
        let mu = means[arm_index(node)];
        let wins = (0..batch).filter(|_| eval_rng.gen_bool(mu)).count();
        Ok(wins as f64 / batch as f64)
    };

    let run_cfg = SelectionConfig {
        total_budget: budget,
        beam_size: 1,
        ..cfg.clone()
    };
    let outcome: SelectionOutcome = match strategy {
        Strategy::BayesUcbInherited | Strategy::BayesUcbUniform => {
            select(&[], children, &run_cfg, &mut evaluator)?
        }
        Strategy::Uniform => baseline_uniform(&[], children, &run_cfg, &mut evaluator)?,
        Strategy::Ucb1 => baseline_ucb1(&[], children, &run_cfg, &mut evaluator)?,
    };

    let mut examples_per_arm = vec![0u64; k];
    let mut pull_sequence = Vec::with_capacity(outcome.pulls.len());
    for pull in &outcome.pulls {
        let idx: usize = pull.node.0.strip_prefix("arm-").unwrap().parse().unwrap();
        examples_per_arm[idx] += run_cfg.batch_size;
        pull_sequence.push(idx);
    }
    let suboptimal_examples = examples_per_arm
        .iter()
        .enumerate()
        .filter(|(i, _)| *i != world.best)
        .map(|(_, &n)| n)
        .sum();
    let identified = arm_index(&outcome.beam[0]) == world.best;
    Ok(RunStats {
        identified,
        suboptimal_examples,
        examples_per_arm,
        pull_sequence,
    })
}

/// Configuration for the strategy-efficiency experiment grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub arms: usize,
    pub profile: GapProfile,
    pub prior: PriorModel,
    /// Budget grid, in examples. Multiples of batch_size * arms keep the
    /// uniform baseline's spend equal to the index strategies'.
    pub budgets: Vec<u64>,
    pub batch_size: u64,
    pub prior_strength: f64,
    pub exploration_c: f64,
    pub quantile_floor: f64,
    pub seeds: u64,
    pub base_seed: u64,
    pub bootstrap_resamples: usize,
}

impl ExperimentConfig {
    pub fn paper_like(seeds: u64) -> Self {
        ExperimentConfig {
            arms: 9,
            profile: GapProfile::PaperLike,
            prior: PriorModel::Noisy { eta: 0.05 },
            budgets: vec![45, 90, 135, 180, 270, 360, 450, 540, 630, 720, 810, 900],
            batch_size: 5,
            prior_strength: 10.0,
            exploration_c: 1.0,
            quantile_floor: 0.5,
            seeds,
            base_seed: 1717,
            bootstrap_resamples: 1000,
        }
    }

    pub fn selection_config(&self, budget: u64) -> SelectionConfig {
        SelectionConfig {
            total_budget: budget,
            batch_size: self.batch_size,
            prior_strength: self.prior_strength,
            exploration_c: self.exploration_c,
            beam_size: 1,
            quantile_floor: self.quantile_floor,
        }
    }

    /// World and prior estimates for the i-th seed. Estimates are drawn on
    /// their own stream so prior-free strategies see identical eval draws.
    pub fn world_for_seed(&self, index: u64) -> Result<(SimWorld, Vec<f64>)> {
        let seed = self.base_seed.wrapping_add(index);
        let world = make_world(self.arms, &self.profile, seed)?;
        let mut prior_rng = stream_rng(seed, STREAM_PRIOR);
        let estimates = world
            .means
            .iter()
            .map(|&mu| self.prior.estimate(mu, &mut prior_rng))
            .collect();
        Ok((world, estimates))
    }
}

/// One (strategy, budget) cell of the report.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CellReport {
    pub strategy: Strategy,
    pub budget: u64,
    pub identification_rate: f64,
    pub rate_ci_low: f64,
    pub rate_ci_high: f64,
    pub mean_suboptimal_examples: f64,
    pub suboptimal_ci_low: f64,
    pub suboptimal_ci_high: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ExperimentReport {
    pub cells: Vec<CellReport>,
    pub seeds: u64,
}

impl ExperimentReport {
    pub fn cell(&self, strategy: Strategy, budget: u64) -> Option<&CellReport> {
        self.cells
            .iter()
            .find(|c| c.strategy == strategy && c.budget == budget)
    }

    pub fn terminal_rate(&self, strategy: Strategy) -> Option<f64> {
        self.cells
            .iter()
            .filter(|c| c.strategy == strategy)
            .max_by_key(|c| c.budget)
            .map(|c| c.identification_rate)
    }

    /// Smallest grid budget at which `strategy` reaches `target_rate`.
    pub fn budget_to_target(&self, strategy: Strategy, target_rate: f64) -> Option<u64> {
        let mut cells: Vec<&CellReport> =
            self.cells.iter().filter(|c| c.strategy == strategy).collect();
        cells.sort_by_key(|c| c.budget);
        cells
            .iter()
            .find(|c| c.identification_rate >= target_rate)
            .map(|c| c.budget)
    }

    /// CSV rows: strategy, budget, identification_rate, suboptimal_pulls,
    /// ci_low, ci_high.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(
            w,
            "strategy,budget,identification_rate,suboptimal_pulls,ci_low,ci_high"
        )?;
        for cell in &self.cells {
            writeln!(
                w,
                "{},{},{},{},{},{}",
                cell.strategy,
                cell.budget,
                cell.identification_rate,
                cell.mean_suboptimal_examples,
                cell.rate_ci_low,
                cell.rate_ci_high
            )?;
        }
        Ok(())
    }
}

/// Per-seed outcomes for one (strategy, budget) cell; used for paired
/// comparisons.
pub fn run_cell(strategy: Strategy, budget: u64, cfg: &ExperimentConfig) -> Result<Vec<RunStats>> {
    let sel = cfg.selection_config(budget);
    (0..cfg.seeds)
        .map(|i| {
            let (world, estimates) = cfg.world_for_seed(i)?;
            run_strategy_once(
                strategy,
                &world,
                &estimates,
                budget,
                &sel,
                cfg.base_seed.wrapping_add(i),
            )
        })
        .collect()
}

pub fn run_strategy_experiment(
    strategies: &[Strategy],
    cfg: &ExperimentConfig,
) -> Result<ExperimentReport> {
    if strategies.len() < 2 {
        return Err(Error::InvalidConfig(
            "the experiment compares at least two strategies".into(),
        ));
    }
    if cfg.seeds < 100 {
        return Err(Error::InvalidConfig(
            "the experiment needs at least 100 seeds".into(),
        ));
    }
    let mut cells = Vec::new();
    for &strategy in strategies {
        for &budget in &cfg.budgets {
            let stats = run_cell(strategy, budget, cfg)?;
            let hits: Vec<f64> = stats.iter().map(|s| s.identified as u8 as f64).collect();
            let subopt: Vec<f64> = stats.iter().map(|s| s.suboptimal_examples as f64).collect();
            let rate = hits.iter().sum::<f64>() / hits.len() as f64;
            let mean_sub = subopt.iter().sum::<f64>() / subopt.len() as f64;
            let ci_seed = cfg.base_seed ^ budget ^ ((strategy as u64) << 32);
            let (rlo, rhi) = bootstrap_mean_ci(&hits, cfg.bootstrap_resamples, ci_seed);
            let (slo, shi) = bootstrap_mean_ci(&subopt, cfg.bootstrap_resamples, ci_seed ^ 1);
            cells.push(CellReport {
                strategy,
                budget,
                identification_rate: rate,
                rate_ci_low: rlo,
                rate_ci_high: rhi,
                mean_suboptimal_examples: mean_sub,
                suboptimal_ci_low: slo,
                suboptimal_ci_high: shi,
            });
        }
    }
    Ok(ExperimentReport {
        cells,
        seeds: cfg.seeds,
    })
}

/// One point of the prior-strength sweep.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepPoint {
    pub prior_strength: f64,
    pub identification_rate: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

/// Identification rate of prior-inherited Bayes-UCB at one budget across a
/// grid of prior strengths.
pub fn sweep_prior_strength(
    s_values: &[f64],
    budget: u64,
    cfg: &ExperimentConfig,
) -> Result<Vec<SweepPoint>> {
    if s_values.len() < 3 {
        return Err(Error::InvalidConfig(
            "the sweep needs at least 3 prior-strength values".into(),
        ));
    }
    s_values
        .iter()
        .map(|&s| {
            let sweep_cfg = ExperimentConfig {
                prior_strength: s,
                ..cfg.clone()
            };
            let stats = run_cell(Strategy::BayesUcbInherited, budget, &sweep_cfg)?;
            let hits: Vec<f64> = stats.iter().map(|st| st.identified as u8 as f64).collect();
            let rate = hits.iter().sum::<f64>() / hits.len() as f64;
            let (lo, hi) =
                bootstrap_mean_ci(&hits, cfg.bootstrap_resamples, cfg.base_seed ^ s.to_bits());
            Ok(SweepPoint {
                prior_strength: s,
                identification_rate: rate,
                ci_low: lo,
                ci_high: hi,
            })
        })
        .collect()
}
