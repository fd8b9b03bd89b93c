//! The selection loop: prior-inherited Bayesian UCB plus the Uniform and
//! UCB1 baselines. All three share the same return contract: the top-b
//! nodes from parents ∪ children ranked by posterior mean.

use serde::{Deserialize, Serialize};
use std::collections::HashSet;

use super::{beta_quantile, quantile_level, SelectionConfig};
use crate::error::{Error, Result};
use crate::prompt::{NodeId, PromptNode};

/// Maps (candidate, batch size) to the mean score of one freshly sampled
/// minibatch.
pub trait Evaluator {
    fn evaluate_batch(&mut self, node: &PromptNode, batch_size: u64) -> Result<f64>;
}

impl<F> Evaluator for F
where
    F: FnMut(&PromptNode, u64) -> Result<f64>,
{
    fn evaluate_batch(&mut self, node: &PromptNode, batch_size: u64) -> Result<f64> {
        self(node, batch_size)
    }
}

/// One pull of the selection loop, recorded for the event log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PullRecord {
    pub round: u64,
    /// Quantile level q_t; absent for strategies without a quantile index.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub quantile_level: Option<f64>,
    pub node: NodeId,
    pub batch_score: f64,
    /// Posterior pseudo-counts after the update.
    pub alpha: f64,
    pub beta: f64,
}

#[derive(Debug, Clone)]
pub struct SelectionOutcome {
    /// Top-b nodes from parents ∪ children by posterior mean.
    pub beam: Vec<PromptNode>,
    /// All children with their final posteriors, in input order.
    pub children: Vec<PromptNode>,
    pub pulls: Vec<PullRecord>,
}

fn check_children(children: &[PromptNode]) -> Result<()> {
    if children.is_empty() {
        return Err(Error::InvalidConfig(
            "selection requires at least one child candidate".into(),
        ));
    }
    Ok(())
}

/// Ranking order: posterior mean descending, then older nodes first, then
/// node id. Ties are resolved deterministically everywhere.
fn rank_key(node: &PromptNode) -> (f64, u32, NodeId) {
    (node.posterior.mean(), node.created_at_iteration, node.id.clone())
}

fn top_b(parents: &[PromptNode], children: &[PromptNode], beam_size: usize) -> Vec<PromptNode> {
    // Children are canonical for duplicated ids: a no-op clone carries the
    // same id as its parent but holds the up-to-date posterior.
    let mut pool: Vec<&PromptNode> = children.iter().collect();
    let child_ids: HashSet<&NodeId> = children.iter().map(|c| &c.id).collect();
    pool.extend(parents.iter().filter(|p| !child_ids.contains(&p.id)));
    pool.sort_by(|a, b| {
        let (ma, ia, ka) = rank_key(a);
        let (mb, ib, kb) = rank_key(b);
        mb.total_cmp(&ma).then(ia.cmp(&ib)).then(ka.cmp(&kb))
    });
    pool.into_iter().take(beam_size).cloned().collect()
}

fn eval_with_round(
    evaluator: &mut dyn Evaluator,
    node: &PromptNode,
    batch_size: u64,
    round: u64,
) -> Result<f64> {
    evaluator
        .evaluate_batch(node, batch_size)
        .map_err(|e| Error::Backend(format!("evaluation failed at selection round {round}: {e}")))
}

/// Prior-inherited Bayesian-UCB selection. Runs floor(N/B) rounds; each
/// round pulls the child with the highest Beta quantile at level q_t
/// (ties to the lowest node id), evaluates one batch, and updates that
/// child's posterior. Only children are pulled; parents enter the final
/// ranking with their carried posteriors.
pub fn select(
    parents: &[PromptNode],
    mut children: Vec<PromptNode>,
    cfg: &SelectionConfig,
    evaluator: &mut dyn Evaluator,
) -> Result<SelectionOutcome> {
    check_children(&children)?;
    let mut pulls = Vec::new();
    for round in 1..=cfg.rounds() {
        let q = quantile_level(round, cfg.total_budget, cfg.exploration_c, cfg.quantile_floor)?;
        let mut best: Option<(f64, usize)> = None;
        for (idx, child) in children.iter().enumerate() {
            let index = beta_quantile(q, child.posterior.alpha, child.posterior.beta)?;
            let better = match best {
                None => true,
                Some((val, at)) => {
                    index > val || (index == val && child.id < children[at].id)
                }
            };
            if better {
                best = Some((index, idx));
            }
        }
        let (_, chosen) = best.expect("children is non-empty");
        let score = eval_with_round(evaluator, &children[chosen], cfg.batch_size, round)?;
        children[chosen].posterior.update(score, cfg.batch_size);
        pulls.push(PullRecord {
            round,
            quantile_level: Some(q),
            node: children[chosen].id.clone(),
            batch_score: score,
            alpha: children[chosen].posterior.alpha,
            beta: children[chosen].posterior.beta,
        });
    }
    let beam = top_b(parents, &children, cfg.beam_size);
    Ok(SelectionOutcome {
        beam,
        children,
        pulls,
    })
}

/// Uniform baseline: the budget is split evenly, floor(N/(B*k)) batches per
/// child, evaluated round-robin in node-id order.
pub fn baseline_uniform(
    parents: &[PromptNode],
    mut children: Vec<PromptNode>,
    cfg: &SelectionConfig,
    evaluator: &mut dyn Evaluator,
) -> Result<SelectionOutcome> {
    check_children(&children)?;
    let k = children.len() as u64;
    let per_child = cfg.total_budget / (cfg.batch_size * k);

    let mut order: Vec<usize> = (0..children.len()).collect();
    order.sort_by(|&a, &b| children[a].id.cmp(&children[b].id));

    let mut pulls = Vec::new();
    let mut round = 0;
    for _ in 0..per_child {
        for &idx in &order {
            round += 1;
            let score = eval_with_round(evaluator, &children[idx], cfg.batch_size, round)?;
            children[idx].posterior.update(score, cfg.batch_size);
            pulls.push(PullRecord {
                round,
                quantile_level: None,
                node: children[idx].id.clone(),
                batch_score: score,
                alpha: children[idx].posterior.alpha,
                beta: children[idx].posterior.beta,
            });
        }
    }
    let beam = top_b(parents, &children, cfg.beam_size);
    Ok(SelectionOutcome {
        beam,
        children,
        pulls,
    })
}

/// UCB1 baseline: index = empirical mean + sqrt(2 ln(t) / n_i) over batch
/// counts, unplayed arms first (lowest id). Posterior bookkeeping is kept
/// so the return contract matches `select`.
pub fn baseline_ucb1(
    parents: &[PromptNode],
    mut children: Vec<PromptNode>,
    cfg: &SelectionConfig,
    evaluator: &mut dyn Evaluator,
) -> Result<SelectionOutcome> {
    check_children(&children)?;
    let n = children.len();
    let mut batches = vec![0u64; n];
    let mut score_sums = vec![0.0f64; n];
    let mut pulls = Vec::new();

    for round in 1..=cfg.rounds() {
        let chosen = if let Some(idx) = unplayed_lowest_id(&children, &batches) {
            idx
        } else {
            let total = (round - 1).max(1) as f64;
            let mut best: Option<(f64, usize)> = None;
            for idx in 0..n {
                let mean = score_sums[idx] / batches[idx] as f64;
                let index = mean + (2.0 * total.ln() / batches[idx] as f64).sqrt();
                let better = match best {
                    None => true,
                    Some((val, at)) => {
                        index > val || (index == val && children[idx].id < children[at].id)
                    }
                };
                if better {
                    best = Some((index, idx));
                }
            }
            best.expect("children is non-empty").1
        };
        let score = eval_with_round(evaluator, &children[chosen], cfg.batch_size, round)?;
        batches[chosen] += 1;
        score_sums[chosen] += score;
        children[chosen].posterior.update(score, cfg.batch_size);
        pulls.push(PullRecord {
            round,
            quantile_level: None,
            node: children[chosen].id.clone(),
            batch_score: score,
            alpha: children[chosen].posterior.alpha,
            beta: children[chosen].posterior.beta,
        });
    }
    let beam = top_b(parents, &children, cfg.beam_size);
    Ok(SelectionOutcome {
        beam,
        children,
        pulls,
    })
}

fn unplayed_lowest_id(children: &[PromptNode], batches: &[u64]) -> Option<usize> {
    children
        .iter()
        .enumerate()
        .filter(|(idx, _)| batches[*idx] == 0)
        .min_by(|(_, a), (_, b)| a.id.cmp(&b.id))
        .map(|(idx, _)| idx)
}
