//! Simulated answer model for full engine runs: every candidate gets a
//! latent success probability and answers queries correctly at that rate.
//!
//! The latent mean is a pure function of (node id, operator, creation
//! iteration, salt): a per-iteration operator drift plus hash noise around
//! the root mean. Purity keeps runs bit-reproducible and resume-safe, since
//! no cross-call state is needed. Correctness of an individual answer is a
//! pure function of (node id, example id, salt), which keeps the simulated
//! model consistent with temperature-0 caching.

use serde::{Deserialize, Serialize};

use super::{wrong_answer, AnswerModel};
use crate::error::Result;
use crate::prompt::{OperatorKind, PromptNode};
use crate::task::TaskExample;
use crate::util::{hash_u64, unit_gaussian, unit_uniform};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimAnswerConfig {
    /// Latent success probability of the root prompt.
    pub root_mean: f64,
    /// Std-dev of per-node hash noise around the drifted mean.
    #[serde(default = "default_noise")]
    pub noise_sigma: f64,
    /// Per-iteration drift added for children, by operator.
    #[serde(default = "default_shift")]
    pub generation_shift: f64,
    #[serde(default = "default_shift")]
    pub edit_shift: f64,
    #[serde(default = "default_shift")]
    pub mix_shift: f64,
    #[serde(default)]
    pub salt: u64,
}

fn default_noise() -> f64 {
    0.05
}
fn default_shift() -> f64 {
    0.03
}

impl Default for SimAnswerConfig {
    fn default() -> Self {
        SimAnswerConfig {
            root_mean: 0.4,
            noise_sigma: default_noise(),
            generation_shift: default_shift(),
            edit_shift: default_shift(),
            mix_shift: default_shift(),
            salt: 0,
        }
    }
}

pub struct SimAnswerModel {
    cfg: SimAnswerConfig,
}

impl SimAnswerModel {
    pub fn new(cfg: SimAnswerConfig) -> Self {
        SimAnswerModel { cfg }
    }

    fn shift(&self, op: OperatorKind) -> f64 {
        match op {
            OperatorKind::Root => 0.0,
            OperatorKind::Generation => self.cfg.generation_shift,
            OperatorKind::Edit => self.cfg.edit_shift,
            OperatorKind::Mix => self.cfg.mix_shift,
        }
    }

    /// Latent success probability of a candidate.
    pub fn node_mean(&self, node: &PromptNode) -> f64 {
        if node.operator == OperatorKind::Root {
            return self.cfg.root_mean.clamp(0.01, 0.99);
        }
        let drift = node.created_at_iteration as f64 * self.shift(node.operator);
        let noise = self.cfg.noise_sigma
            * unit_gaussian(hash_u64(&[
                &self.cfg.salt.to_le_bytes(),
                b"node-mean",
                node.id.0.as_bytes(),
            ]));
        (self.cfg.root_mean + drift + noise).clamp(0.01, 0.99)
    }
}

impl AnswerModel for SimAnswerModel {
    fn answer(&self, node: &PromptNode, query: &TaskExample) -> Result<String> {
        let mean = self.node_mean(node);
        let coin = unit_uniform(hash_u64(&[
            &self.cfg.salt.to_le_bytes(),
            b"answer",
            node.id.0.as_bytes(),
            query.id.as_bytes(),
        ]));
        if coin < mean {
            Ok(query.answer.clone())
        } else {
            Ok(wrong_answer(query))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bandit::BetaPosterior;
    use crate::prompt::{new_root, MultimodalPrompt, NodeId};

    fn query(i: usize) -> TaskExample {
        TaskExample {
            id: format!("q{i}"),
            query_text: "?".into(),
            query_assets: vec![],
            answer: "yes".into(),
            choices: Some(vec!["yes".into(), "no".into()]),
        }
    }

    #[test]
    fn answers_are_pure_functions_of_node_and_example() {
        let model = SimAnswerModel::new(SimAnswerConfig::default());
        let node = new_root("seed").unwrap();
        let a = model.answer(&node, &query(1)).unwrap();
        let b = model.answer(&node, &query(1)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn empirical_rate_tracks_the_latent_mean() {
        let model = SimAnswerModel::new(SimAnswerConfig {
            root_mean: 0.7,
            ..Default::default()
        });
        let node = new_root("seed").unwrap();
        let correct = (0..2000)
            .filter(|&i| model.answer(&node, &query(i)).unwrap() == "yes")
            .count();
        let rate = correct as f64 / 2000.0;
        assert!((rate - 0.7).abs() < 0.04, "rate {rate}");
    }

    #[test]
    fn children_drift_upward_on_average() {
        let model = SimAnswerModel::new(SimAnswerConfig {
            root_mean: 0.4,
            generation_shift: 0.05,
            noise_sigma: 0.02,
            ..Default::default()
        });
        let mut total = 0.0;
        let n = 200;
        for i in 0..n {
            let node = PromptNode {
                id: NodeId(format!("child-{i}")),
                prompt: MultimodalPrompt::text_only("c"),
                parent_ids: vec![NodeId("p".into())],
                operator: OperatorKind::Generation,
                condition: None,
                feedback_used: None,
                posterior: BetaPosterior::uniform(),
                created_at_iteration: 4,
            };
            total += model.node_mean(&node);
        }
        let mean = total / n as f64;
        assert!((mean - 0.6).abs() < 0.02, "mean {mean}");
    }
}
