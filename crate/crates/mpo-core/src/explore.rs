//! Alignment-preserving exploration: failure-set collection, cohesive
//! feedback, and the generation/edit/mix operators.
//!
//! One textual feedback signal, distilled from a prompt's failure set,
//! steers both the revised textual prompt and the condition handed to the
//! modality generator, so the two components of a child stay aligned.

use rand::Rng;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::sync::Arc;

use crate::backend::{AnswerModel, AssetGenerator, ChatMessage, MessagePart, OptimizerModel};
use crate::bandit::BetaPosterior;
use crate::error::{Error, Result};
use crate::prompt::{new_child, Modality, MultimodalPrompt, NodeId, OperatorKind, PromptNode};
use crate::task::{extract_answer, sample_minibatch, score_example, MetricSpec, TaskDataset, TaskExample};
use crate::template::{
    default_tags, identity_bindings, parse_tagged_output, render_template, OperatorTags,
    TemplateKind, TemplateSet,
};

/// One wrong example: the query, the gold answer, and what the model said.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FailureCase {
    pub example: TaskExample,
    pub model_output: String,
}

/// The failure set of one candidate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FailureSet {
    pub node: NodeId,
    pub cases: Vec<FailureCase>,
    /// How many examples were evaluated to collect the cases.
    pub attempts: usize,
}

/// Textual gradient: the unified cross-modal critique for one candidate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Feedback {
    pub text: String,
    pub source_node: NodeId,
}

/// Per-operator output tag names, overridable from the task config.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TagPair {
    pub condition: String,
    pub text: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TagConfig {
    pub generation: Option<TagPair>,
    pub edit: Option<TagPair>,
    pub mix: Option<TagPair>,
}

/// Shared context for one iteration's operator calls.
pub struct ExploreEnv<'a> {
    pub templates: &'a TemplateSet,
    pub modality: Modality,
    pub prior_strength: f64,
    /// Iteration the children will be created at.
    pub iteration: u32,
    pub tag_config: &'a TagConfig,
}

impl ExploreEnv<'_> {
    fn tags(&self, op: OperatorKind) -> OperatorTags {
        let overridden = match op {
            OperatorKind::Generation => self.tag_config.generation.as_ref(),
            OperatorKind::Edit => self.tag_config.edit.as_ref(),
            OperatorKind::Mix => self.tag_config.mix.as_ref(),
            OperatorKind::Root => None,
        };
        match overridden {
            Some(pair) => OperatorTags {
                condition: pair.condition.clone(),
                text: pair.text.clone(),
            },
            None => default_tags(self.modality, op),
        }
    }
}

/// Evaluates sampled examples until `max_failures` wrong answers are found
/// or `attempt_cap` examples have been tried.
pub fn collect_failures<R: Rng>(
    node: &PromptNode,
    dataset: &TaskDataset,
    answer_model: &dyn AnswerModel,
    metric: &MetricSpec,
    max_failures: usize,
    attempt_cap: usize,
    rng: &mut R,
) -> Result<FailureSet> {
    if max_failures < 1 {
        return Err(Error::InvalidConfig("max_failures must be >= 1".into()));
    }
    if attempt_cap < max_failures {
        return Err(Error::InvalidConfig(
            "attempt_cap must be >= max_failures".into(),
        ));
    }
    let candidates = sample_minibatch(dataset, attempt_cap, rng)?;
    let mut cases = Vec::new();
    let mut attempts = 0;
    for example in candidates {
        attempts += 1;
        let output = answer_model.answer(node, example)?;
        let extracted = extract_answer(&output, &metric.extraction).ok();
        if score_example(extracted.as_deref(), &example.answer) == 0.0 {
            cases.push(FailureCase {
                example: example.clone(),
                model_output: output,
            });
            if cases.len() == max_failures {
                break;
            }
        }
    }
    if cases.is_empty() {
        return Err(Error::NoFailures);
    }
    Ok(FailureSet {
        node: node.id.clone(),
        cases,
        attempts,
    })
}

/// Renders a failure set into the `wrong_examples` template block.
pub fn format_failures(failures: &FailureSet) -> String {
    let mut out = String::new();
    for (i, case) in failures.cases.iter().enumerate() {
        if i > 0 {
            out.push('\n');
        }
        out.push_str(&format!(
            "Example {}:\n- Input: {}\n- Model Output: {}\n- Ground Truth: {}\n",
            i + 1,
            case.example.query_text,
            case.model_output,
            case.example.answer
        ));
    }
    out
}

fn modality_binding(node: &PromptNode) -> String {
    if node.prompt.assets.is_empty() {
        "(none)".to_string()
    } else {
        node.prompt
            .assets
            .iter()
            .map(|a| a.describe())
            .collect::<Vec<_>>()
            .join(", ")
    }
}

fn optimizer_message(text: String, nodes: &[&PromptNode]) -> ChatMessage {
    let mut parts = vec![MessagePart::Text(text)];
    for node in nodes {
        parts.extend(node.prompt.assets.iter().cloned().map(MessagePart::Blob));
    }
    ChatMessage::user_parts(parts)
}

/// Cohesive backpropagation: render the failure-analysis template and ask
/// the optimizer for one unified critique of both prompt components.
pub fn make_feedback(
    node: &PromptNode,
    failures: &FailureSet,
    optimizer: &dyn OptimizerModel,
    env: &ExploreEnv<'_>,
) -> Result<Feedback> {
    if failures.cases.is_empty() {
        return Err(Error::InvalidConfig("feedback needs a non-empty failure set".into()));
    }
    let template = env.templates.get(env.modality, TemplateKind::Backprop)?;
    let mut bindings = BTreeMap::new();
    bindings.insert("text_prompt".to_string(), node.prompt.text.clone());
    bindings.insert("modality_prompt".to_string(), modality_binding(node));
    bindings.insert("wrong_examples".to_string(), format_failures(failures));
    let rendered = render_template(template, &bindings)?;
    let text = optimizer.complete(&[optimizer_message(rendered, &[node])])?;
    if text.trim().is_empty() {
        return Err(Error::EmptyFeedback);
    }
    Ok(Feedback {
        text,
        source_node: node.id.clone(),
    })
}

/// Calls the optimizer and parses the operator tags, retrying once on a
/// parse failure before giving up on this child.
fn call_and_parse(
    optimizer: &dyn OptimizerModel,
    message: &ChatMessage,
    tags: &OperatorTags,
) -> Result<(String, String)> {
    let wanted = [tags.condition.as_str(), tags.text.as_str()];
    let mut last_err = None;
    for _attempt in 0..2 {
        let response = optimizer.complete(std::slice::from_ref(message))?;
        match parse_tagged_output(&response, &wanted) {
            Ok(parsed) => {
                let condition = parsed[&tags.condition].clone();
                let text = parsed[&tags.text].clone();
                let mut empty: Vec<String> = Vec::new();
                if condition.is_empty() {
                    empty.push(tags.condition.clone());
                }
                if text.is_empty() {
                    empty.push(tags.text.clone());
                }
                if empty.is_empty() {
                    return Ok((condition, text));
                }
                last_err = Some(Error::Parse { missing: empty });
            }
            Err(e @ Error::Parse { .. }) => last_err = Some(e),
            Err(e) => return Err(e),
        }
    }
    Err(last_err.expect("loop ran at least once"))
}

/// Generation operator: a child asset created from scratch, conditioned
/// only on the generation signal. Applicable even when the parent has no
/// assets yet.
pub fn op_generation(
    parent: &PromptNode,
    feedback: &Feedback,
    failures: &FailureSet,
    optimizer: &dyn OptimizerModel,
    generator: &dyn AssetGenerator,
    env: &ExploreEnv<'_>,
) -> Result<PromptNode> {
    let tags = env.tags(OperatorKind::Generation);
    let template = env.templates.get(env.modality, TemplateKind::Generation)?;
    let mut bindings = BTreeMap::new();
    bindings.insert("text_prompt".to_string(), parent.prompt.text.clone());
    bindings.insert("modality_prompt".to_string(), modality_binding(parent));
    bindings.insert("wrong_examples".to_string(), format_failures(failures));
    bindings.insert("analysis".to_string(), feedback.text.clone());
    identity_bindings(&mut bindings, &[&tags.condition, &tags.text]);
    let rendered = render_template(template, &bindings)?;
    let (condition, new_text) =
        call_and_parse(optimizer, &optimizer_message(rendered, &[parent]), &tags)?;
    let asset = generator.generate(&condition, &[], env.modality)?;
    let posterior = BetaPosterior::from_prior(parent.posterior.mean(), env.prior_strength)?;
    new_child(
        OperatorKind::Generation,
        &[parent],
        MultimodalPrompt {
            text: new_text,
            assets: vec![asset],
        },
        condition,
        feedback.text.clone(),
        posterior,
        env.iteration,
    )
}

/// Edit operator: refine the parent's non-textual prompt in place.
pub fn op_edit(
    parent: &PromptNode,
    feedback: &Feedback,
    failures: &FailureSet,
    optimizer: &dyn OptimizerModel,
    generator: &dyn AssetGenerator,
    env: &ExploreEnv<'_>,
) -> Result<PromptNode> {
    if !parent.has_assets() {
        return Err(Error::OperatorInapplicable(
            "edit requires a parent with at least one asset".into(),
        ));
    }
    let tags = env.tags(OperatorKind::Edit);
    let template = env.templates.get(env.modality, TemplateKind::Edit)?;
    let mut bindings = BTreeMap::new();
    bindings.insert("text_prompt".to_string(), parent.prompt.text.clone());
    bindings.insert("modality_prompt".to_string(), modality_binding(parent));
    bindings.insert("wrong_examples".to_string(), format_failures(failures));
    bindings.insert("analysis".to_string(), feedback.text.clone());
    identity_bindings(&mut bindings, &[&tags.condition, &tags.text]);
    let rendered = render_template(template, &bindings)?;
    let (condition, new_text) =
        call_and_parse(optimizer, &optimizer_message(rendered, &[parent]), &tags)?;
    let asset = generator.generate(&condition, &parent.prompt.assets, env.modality)?;
    let posterior = BetaPosterior::from_prior(parent.posterior.mean(), env.prior_strength)?;
    new_child(
        OperatorKind::Edit,
        &[parent],
        MultimodalPrompt {
            text: new_text,
            assets: vec![asset],
        },
        condition,
        feedback.text.clone(),
        posterior,
        env.iteration,
    )
}

/// Mix operator: blend two parents' non-textual prompts. The child's prior
/// inherits the arithmetic mean of both parents' posterior means.
#[allow(clippy::too_many_arguments)]
pub fn op_mix(
    parent_a: &PromptNode,
    parent_b: &PromptNode,
    feedback_a: &Feedback,
    feedback_b: &Feedback,
    failures_a: &FailureSet,
    failures_b: &FailureSet,
    optimizer: &dyn OptimizerModel,
    generator: &dyn AssetGenerator,
    env: &ExploreEnv<'_>,
) -> Result<PromptNode> {
    if parent_a.id == parent_b.id {
        return Err(Error::InvalidPartner);
    }
    if !parent_a.has_assets() || !parent_b.has_assets() {
        return Err(Error::OperatorInapplicable(
            "mix requires both parents to carry assets".into(),
        ));
    }
    let tags = env.tags(OperatorKind::Mix);
    let template = env.templates.get(env.modality, TemplateKind::Mix)?;
    let mut bindings = BTreeMap::new();
    bindings.insert("text_prompt_A".to_string(), parent_a.prompt.text.clone());
    bindings.insert("modality_prompt_A".to_string(), modality_binding(parent_a));
    bindings.insert("wrong_examples_A".to_string(), format_failures(failures_a));
    bindings.insert("analysis_A".to_string(), feedback_a.text.clone());
    bindings.insert("text_prompt_B".to_string(), parent_b.prompt.text.clone());
    bindings.insert("modality_prompt_B".to_string(), modality_binding(parent_b));
    bindings.insert("wrong_examples_B".to_string(), format_failures(failures_b));
    bindings.insert("analysis_B".to_string(), feedback_b.text.clone());
    identity_bindings(&mut bindings, &[&tags.condition, &tags.text]);
    let rendered = render_template(template, &bindings)?;
    let message = optimizer_message(rendered, &[parent_a, parent_b]);
    let (condition, new_text) = call_and_parse(optimizer, &message, &tags)?;
    let mut refs = parent_a.prompt.assets.clone();
    refs.extend(parent_b.prompt.assets.iter().cloned());
    let asset = generator.generate(&condition, &refs, env.modality)?;
    let parent_mean = 0.5 * (parent_a.posterior.mean() + parent_b.posterior.mean());
    let posterior = BetaPosterior::from_prior(parent_mean, env.prior_strength)?;
    new_child(
        OperatorKind::Mix,
        &[parent_a, parent_b],
        MultimodalPrompt {
            text: new_text,
            assets: vec![asset],
        },
        condition,
        format!("A: {}\nB: {}", feedback_a.text, feedback_b.text),
        posterior,
        env.iteration,
    )
}

/// Convenience wrapper for dispatching a single-parent operator.
pub fn apply_operator(
    op: OperatorKind,
    parent: &PromptNode,
    partner: Option<(&PromptNode, &Feedback, &FailureSet)>,
    feedback: &Feedback,
    failures: &FailureSet,
    optimizer: &Arc<dyn OptimizerModel>,
    generator: &Arc<dyn AssetGenerator>,
    env: &ExploreEnv<'_>,
) -> Result<PromptNode> {
    match op {
        OperatorKind::Generation => {
            op_generation(parent, feedback, failures, optimizer.as_ref(), generator.as_ref(), env)
        }
        OperatorKind::Edit => {
            op_edit(parent, feedback, failures, optimizer.as_ref(), generator.as_ref(), env)
        }
        OperatorKind::Mix => {
            let (partner, partner_feedback, partner_failures) = partner.ok_or_else(|| {
                Error::InvalidConfig("mix dispatch requires a partner".into())
            })?;
            op_mix(
                parent,
                partner,
                feedback,
                partner_feedback,
                failures,
                partner_failures,
                optimizer.as_ref(),
                generator.as_ref(),
                env,
            )
        }
        OperatorKind::Root => Err(Error::InvalidConfig("root is not an exploration operator".into())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::backend::{EchoChatModel, MockChatModel, MockGenerator, RuleAnswerModel};
    use crate::store::AssetStore;
    use crate::task::{ExtractionRule, MetricKind};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::sync::atomic::{AtomicUsize, Ordering};

    fn metric() -> MetricSpec {
        MetricSpec {
            kind: MetricKind::Accuracy,
            extraction: ExtractionRule::Verbatim,
            positive_label: None,
        }
    }

    fn dataset(n: usize) -> TaskDataset {
        TaskDataset::new(
            (0..n)
                .map(|i| TaskExample {
                    id: format!("ex-{i:02}"),
                    query_text: format!("query {i}"),
                    query_assets: vec![],
                    answer: "yes".into(),
                    choices: Some(vec!["yes".into(), "no".into()]),
                })
                .collect(),
        )
    }

    fn env<'a>(templates: &'a TemplateSet, tags: &'a TagConfig) -> ExploreEnv<'a> {
        ExploreEnv {
            templates,
            modality: Modality::Image,
            prior_strength: 10.0,
            iteration: 1,
            tag_config: tags,
        }
    }

    fn mock_world() -> (tempfile::TempDir, AssetStore) {
        let dir = tempfile::tempdir().unwrap();
        let store = AssetStore::open(dir.path().join("assets")).unwrap();
        (dir, store)
    }

    fn failures_for(node: &PromptNode, n: usize) -> FailureSet {
        let ds = dataset(n);
        FailureSet {
            node: node.id.clone(),
            cases: ds
                .examples()
                .iter()
                .map(|e| FailureCase {
                    example: e.clone(),
                    model_output: "no".into(),
                })
                .collect(),
            attempts: n,
        }
    }

    fn feedback_for(node: &PromptNode) -> Feedback {
        Feedback {
            text: "the prompt lacks decisive features".into(),
            source_node: node.id.clone(),
        }
    }

    #[test]
    fn always_wrong_model_saturates_immediately() {
        let root = crate::prompt::new_root("seed").unwrap();
        let calls = std::sync::Arc::new(AtomicUsize::new(0));
        let calls_in = calls.clone();
        let model = RuleAnswerModel::new(move |_, q| {
            calls_in.fetch_add(1, Ordering::SeqCst);
            crate::backend::wrong_answer(q)
        });
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let failures =
            collect_failures(&root, &dataset(20), &model, &metric(), 3, 30, &mut rng).unwrap();
        assert_eq!(failures.cases.len(), 3);
        assert_eq!(failures.attempts, 3);
        assert_eq!(calls.load(Ordering::SeqCst), 3);
    }

    #[test]
    fn always_correct_model_yields_no_failures() {
        let root = crate::prompt::new_root("seed").unwrap();
        let model = RuleAnswerModel::always_correct();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let err = collect_failures(&root, &dataset(20), &model, &metric(), 3, 12, &mut rng);
        assert!(matches!(err, Err(Error::NoFailures)));
    }

    #[test]
    fn failures_come_only_from_wrong_examples() {
        // Model is wrong exactly on even-indexed examples.
        let root = crate::prompt::new_root("seed").unwrap();
        let model = RuleAnswerModel::new(|_, q| {
            let idx: usize = q.id.strip_prefix("ex-").unwrap().parse().unwrap();
            if idx % 2 == 0 {
                "no".to_string()
            } else {
                q.answer.clone()
            }
        });
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let failures =
            collect_failures(&root, &dataset(20), &model, &metric(), 3, 10, &mut rng).unwrap();
        for case in &failures.cases {
            let idx: usize = case.example.id.strip_prefix("ex-").unwrap().parse().unwrap();
            assert_eq!(idx % 2, 0, "failure drawn from a correct example");
        }
    }

    #[test]
    fn feedback_embeds_the_rendered_failures_verbatim() {
        let root = crate::prompt::new_root("seed").unwrap();
        let failures = failures_for(&root, 2);
        let templates = TemplateSet::builtin();
        let tags = TagConfig::default();
        let env = env(&templates, &tags);
        let feedback = make_feedback(&root, &failures, &EchoChatModel, &env).unwrap();
        assert!(feedback.text.contains(&format_failures(&failures)));
        // A prompt with no assets renders the "(none)" placeholder.
        assert!(feedback.text.contains("- Image Prompt : (none)"));
    }

    #[test]
    fn generation_operator_happy_path_on_the_root() {
        let (_dir, store) = mock_world();
        let root = crate::prompt::new_root("seed").unwrap();
        let templates = TemplateSet::builtin();
        let tags = TagConfig::default();
        let env = env(&templates, &tags);
        let optimizer = MockChatModel::new(3);
        let generator = MockGenerator::new(store, 3);
        let child = op_generation(
            &root,
            &feedback_for(&root),
            &failures_for(&root, 3),
            &optimizer,
            &generator,
            &env,
        )
        .unwrap();
        assert_eq!(child.operator, OperatorKind::Generation);
        assert_eq!(child.parent_ids, vec![root.id.clone()]);
        assert_eq!(child.prompt.assets.len(), 1);
        assert!(!child.prompt.text.is_empty());
        assert!(!child.condition.as_deref().unwrap().is_empty());
        // Inherited prior: root mean is 1/2, S=10 -> (6, 6).
        assert_eq!((child.posterior.alpha, child.posterior.beta), (6.0, 6.0));
    }

    #[test]
    fn missing_tag_is_a_parse_error_after_one_retry() {
        let (_dir, store) = mock_world();
        let root = crate::prompt::new_root("seed").unwrap();
        let templates = TemplateSet::builtin();
        let tags = TagConfig::default();
        let env = env(&templates, &tags);
        struct TextOnly(AtomicUsize);
        impl OptimizerModel for TextOnly {
            fn complete(&self, _: &[ChatMessage]) -> Result<String> {
                self.0.fetch_add(1, Ordering::SeqCst);
                Ok("<improved_text_prompt>better</improved_text_prompt>".into())
            }
        }
        let optimizer = TextOnly(AtomicUsize::new(0));
        let generator = MockGenerator::new(store, 3);
        let err = op_generation(
            &root,
            &feedback_for(&root),
            &failures_for(&root, 3),
            &optimizer,
            &generator,
            &env,
        )
        .unwrap_err();
        match err {
            Error::Parse { missing } => {
                assert_eq!(missing, vec!["image_generation_prompt".to_string()])
            }
            other => panic!("expected parse error, got {other:?}"),
        }
        assert_eq!(optimizer.0.load(Ordering::SeqCst), 2, "exactly one retry");
    }

    #[test]
    fn edit_requires_assets() {
        let (_dir, store) = mock_world();
        let root = crate::prompt::new_root("seed").unwrap();
        let templates = TemplateSet::builtin();
        let tags = TagConfig::default();
        let env = env(&templates, &tags);
        let err = op_edit(
            &root,
            &feedback_for(&root),
            &failures_for(&root, 3),
            &MockChatModel::new(3),
            &MockGenerator::new(store, 3),
            &env,
        );
        assert!(matches!(err, Err(Error::OperatorInapplicable(_))));
    }

    #[test]
    fn edit_replaces_the_asset_with_the_same_modality() {
        let (_dir, store) = mock_world();
        let root = crate::prompt::new_root("seed").unwrap();
        let templates = TemplateSet::builtin();
        let tags = TagConfig::default();
        let env = env(&templates, &tags);
        let optimizer = MockChatModel::new(3);
        let generator = MockGenerator::new(store, 3);
        let parent = op_generation(
            &root,
            &feedback_for(&root),
            &failures_for(&root, 3),
            &optimizer,
            &generator,
            &env,
        )
        .unwrap();
        let env2 = ExploreEnv {
            iteration: 2,
            ..env
        };
        let child = op_edit(
            &parent,
            &feedback_for(&parent),
            &failures_for(&parent, 2),
            &optimizer,
            &generator,
            &env2,
        )
        .unwrap();
        assert_eq!(child.operator, OperatorKind::Edit);
        assert_eq!(child.prompt.assets[0].modality, Modality::Image);
        assert_ne!(child.prompt.assets[0], parent.prompt.assets[0]);
    }

    #[test]
    fn mix_contract_and_inherited_prior() {
        let (_dir, store) = mock_world();
        let root = crate::prompt::new_root("seed").unwrap();
        let templates = TemplateSet::builtin();
        let tags = TagConfig::default();
        let env1 = env(&templates, &tags);
        let optimizer = MockChatModel::new(3);
        let generator = MockGenerator::new(store, 3);
        let mut a = op_generation(
            &root,
            &feedback_for(&root),
            &failures_for(&root, 3),
            &optimizer,
            &generator,
            &env1,
        )
        .unwrap();
        let mut b = op_generation(
            &root,
            &feedback_for(&root),
            &failures_for(&root, 2),
            &optimizer,
            &generator,
            &env1,
        )
        .unwrap();
        // Parents with posterior means 0.8 and 0.4 -> child prior (7, 5).
        a.posterior = BetaPosterior {
            alpha: 8.0,
            beta: 2.0,
            observations: 8,
        };
        b.posterior = BetaPosterior {
            alpha: 4.0,
            beta: 6.0,
            observations: 8,
        };
        let env2 = ExploreEnv {
            iteration: 2,
            ..env1
        };
        let child = op_mix(
            &a,
            &b,
            &feedback_for(&a),
            &feedback_for(&b),
            &failures_for(&a, 2),
            &failures_for(&b, 2),
            &optimizer,
            &generator,
            &env2,
        )
        .unwrap();
        assert_eq!(child.operator, OperatorKind::Mix);
        assert_eq!(child.parent_ids, vec![a.id.clone(), b.id.clone()]);
        assert!((child.posterior.alpha - 7.0).abs() < 1e-9);
        assert!((child.posterior.beta - 5.0).abs() < 1e-9);

        let self_mix = op_mix(
            &a,
            &a,
            &feedback_for(&a),
            &feedback_for(&a),
            &failures_for(&a, 2),
            &failures_for(&a, 2),
            &optimizer,
            &generator,
            &env2,
        );
        assert!(matches!(self_mix, Err(Error::InvalidPartner)));

        let assetless = op_mix(
            &a,
            &root,
            &feedback_for(&a),
            &feedback_for(&root),
            &failures_for(&a, 2),
            &failures_for(&root, 2),
            &optimizer,
            &generator,
            &env2,
        );
        assert!(matches!(assetless, Err(Error::OperatorInapplicable(_))));
    }

    #[test]
    fn operators_do_not_mutate_parents() {
        let (_dir, store) = mock_world();
        let root = crate::prompt::new_root("seed").unwrap();
        let before = serde_json::to_string(&root).unwrap();
        let templates = TemplateSet::builtin();
        let tags = TagConfig::default();
        let env = env(&templates, &tags);
        let _ = op_generation(
            &root,
            &feedback_for(&root),
            &failures_for(&root, 3),
            &MockChatModel::new(3),
            &MockGenerator::new(store, 3),
            &env,
        )
        .unwrap();
        assert_eq!(serde_json::to_string(&root).unwrap(), before);
    }

    #[test]
    fn child_production_is_reproducible_with_mocks() {
        let (_dir, store) = mock_world();
        let root = crate::prompt::new_root("seed").unwrap();
        let templates = TemplateSet::builtin();
        let tags = TagConfig::default();
        let env = env(&templates, &tags);
        let optimizer = MockChatModel::new(9);
        let generator = MockGenerator::new(store, 9);
        let make = || {
            op_generation(
                &root,
                &feedback_for(&root),
                &failures_for(&root, 3),
                &optimizer,
                &generator,
                &env,
            )
            .unwrap()
        };
        let a = make();
        let b = make();
        assert_eq!(a, b);
    }
}
