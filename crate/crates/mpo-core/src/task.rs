//! Task datasets, minibatch sampling, answer extraction, and the metric
//! function (accuracy, binary F1, exact match).
//!
//! Manifests are JSONL: one example per line with `id`, `query_text`,
//! `query_assets`, `answer`, and optional `choices`.

use rand::seq::index::sample as index_sample;
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::collections::HashSet;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::prompt::{AssetContent, AssetRef};
use crate::store::AssetStore;

/// One query-answer pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskExample {
    pub id: String,
    pub query_text: String,
    #[serde(default)]
    pub query_assets: Vec<AssetRef>,
    pub answer: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub choices: Option<Vec<String>>,
}

/// How the final answer is pulled out of raw model output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ExtractionRule {
    /// Return the last label from `labels` that occurs in the output.
    LabelSetMatch { labels: Vec<String> },
    /// Return the text following the last occurrence of `pattern`
    /// (e.g. "The answer is").
    AnswerTagPattern { pattern: String },
    /// Return the trimmed raw output.
    Verbatim,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MetricKind {
    Accuracy,
    BinaryF1,
    ExactMatch,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricSpec {
    pub kind: MetricKind,
    pub extraction: ExtractionRule,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub positive_label: Option<String>,
}

impl MetricSpec {
    pub fn validate(&self) -> Result<()> {
        if self.kind == MetricKind::BinaryF1 && self.positive_label.is_none() {
            return Err(Error::InvalidConfig(
                "binary_f1 requires `positive_label`".into(),
            ));
        }
        if let ExtractionRule::LabelSetMatch { labels } = &self.extraction {
            if labels.is_empty() {
                return Err(Error::InvalidConfig(
                    "label_set_match requires a non-empty label set".into(),
                ));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct TaskDataset {
    examples: Vec<TaskExample>,
}

impl TaskDataset {
    pub fn new(examples: Vec<TaskExample>) -> Self {
        TaskDataset { examples }
    }

    pub fn len(&self) -> usize {
        self.examples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.examples.is_empty()
    }

    pub fn examples(&self) -> &[TaskExample] {
        &self.examples
    }

    pub fn get(&self, index: usize) -> &TaskExample {
        &self.examples[index]
    }
}

/// Loads a JSONL manifest, keeping examples in file order. Blob assets are
/// checked against `assets_dir` (default: an `assets/` directory next to
/// the manifest).
pub fn load_task(manifest_path: &Path, assets_dir: Option<&Path>) -> Result<TaskDataset> {
    let raw = fs::read_to_string(manifest_path)
        .map_err(|e| Error::Storage(format!("cannot read manifest {}: {e}", manifest_path.display())))?;
    let default_assets = manifest_path
        .parent()
        .unwrap_or_else(|| Path::new("."))
        .join("assets");
    let assets_root = assets_dir.map(Path::to_path_buf).unwrap_or(default_assets);
    let mut store: Option<AssetStore> = None;

    let mut examples = Vec::new();
    let mut seen = HashSet::new();
    for (idx, line) in raw.lines().enumerate() {
        let line_no = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        let example: TaskExample = serde_json::from_str(line).map_err(|e| Error::Manifest {
            line: line_no,
            message: e.to_string(),
        })?;
        if example.answer.trim().is_empty() {
            return Err(Error::Manifest {
                line: line_no,
                message: format!("example `{}` has an empty answer", example.id),
            });
        }
        if !seen.insert(example.id.clone()) {
            return Err(Error::Manifest {
                line: line_no,
                message: format!("duplicate example id `{}`", example.id),
            });
        }
        for asset in &example.query_assets {
            if let AssetContent::Blob(_) = asset.content {
                let store = match &store {
                    Some(s) => s,
                    None => {
                        store = Some(AssetStore::open(&assets_root)?);
                        store.as_ref().unwrap()
                    }
                };
                store.verify(asset).map_err(|e| Error::Manifest {
                    line: line_no,
                    message: e.to_string(),
                })?;
            }
        }
        examples.push(example);
    }
    Ok(TaskDataset::new(examples))
}

/// Uniform minibatch of `batch` examples: without replacement when the
/// dataset is large enough, with replacement otherwise. Deterministic for a
/// fixed rng state.
pub fn sample_minibatch<'a, R: Rng>(
    dataset: &'a TaskDataset,
    batch: usize,
    rng: &mut R,
) -> Result<Vec<&'a TaskExample>> {
    if dataset.is_empty() {
        return Err(Error::EmptyDataset);
    }
    if batch == 0 {
        return Err(Error::InvalidConfig("minibatch size must be >= 1".into()));
    }
    let n = dataset.len();
    let picks: Vec<usize> = if batch <= n {
        index_sample(rng, n, batch).into_iter().collect()
    } else {
        (0..batch).map(|_| rng.gen_range(0..n)).collect()
    };
    Ok(picks.into_iter().map(|i| dataset.get(i)).collect())
}

/// Trim and case-fold.
pub fn normalize(answer: &str) -> String {
    answer.trim().to_lowercase()
}

/// Extracts a normalized label from raw model output.
pub fn extract_answer(raw_output: &str, rule: &ExtractionRule) -> Result<String> {
    match rule {
        ExtractionRule::LabelSetMatch { labels } => {
            let haystack = raw_output.to_lowercase();
            // Last occurrence wins so final answers beat chain-of-thought
            // mentions; ties at the same position prefer the longer label.
            let mut best: Option<(usize, usize, &str)> = None;
            for label in labels {
                let needle = normalize(label);
                if needle.is_empty() {
                    continue;
                }
                if let Some(pos) = haystack.rfind(&needle) {
                    let key = (pos, needle.len());
                    if best.map_or(true, |(p, l, _)| key > (p, l)) {
                        best = Some((pos, needle.len(), label));
                    }
                }
            }
            best.map(|(_, _, label)| normalize(label)).ok_or(Error::NoAnswer)
        }
        ExtractionRule::AnswerTagPattern { pattern } => {
            let haystack = raw_output.to_lowercase();
            let needle = pattern.to_lowercase();
            if needle.is_empty() {
                return Err(Error::NoAnswer);
            }
            let start = haystack.rfind(&needle).ok_or(Error::NoAnswer)? + needle.len();
            let rest = &raw_output[start..];
            let line = rest.lines().next().unwrap_or("");
            let mut capture = line.trim().trim_start_matches(':').trim();
            capture = capture.trim_end_matches(['.', '!']).trim();
            if capture.starts_with('[') && capture.ends_with(']') && capture.len() >= 2 {
                capture = capture[1..capture.len() - 1].trim();
            }
            let capture = capture.trim_matches(['"', '\'', '*']).trim();
            if capture.is_empty() {
                return Err(Error::NoAnswer);
            }
            Ok(normalize(capture))
        }
        ExtractionRule::Verbatim => {
            let trimmed = normalize(raw_output);
            if trimmed.is_empty() {
                return Err(Error::NoAnswer);
            }
            Ok(trimmed)
        }
    }
}

/// Per-example 0/1 score: 1 iff the normalized prediction equals the
/// normalized gold answer. A missing prediction scores 0.
pub fn score_example(prediction: Option<&str>, gold: &str) -> f64 {
    debug_assert!(!gold.trim().is_empty(), "gold answers must be non-empty");
    match prediction {
        Some(p) if normalize(p) == normalize(gold) => 1.0,
        _ => 0.0,
    }
}

/// Aggregates per-example outcomes into the task metric.
pub fn aggregate(results: &[(Option<String>, String)], spec: &MetricSpec) -> Result<f64> {
    if results.is_empty() {
        return Err(Error::EmptyResults);
    }
    match spec.kind {
        MetricKind::Accuracy | MetricKind::ExactMatch => {
            let total: f64 = results
                .iter()
                .map(|(pred, gold)| score_example(pred.as_deref(), gold))
                .sum();
            Ok(total / results.len() as f64)
        }
        MetricKind::BinaryF1 => {
            let positive = normalize(spec.positive_label.as_deref().ok_or_else(|| {
                Error::InvalidConfig("binary_f1 requires `positive_label`".into())
            })?);
            let mut tp = 0.0;
            let mut fp = 0.0;
            let mut fn_ = 0.0;
            for (pred, gold) in results {
                let pred_pos = pred.as_deref().map(normalize) == Some(positive.clone());
                let gold_pos = normalize(gold) == positive;
                match (pred_pos, gold_pos) {
                    (true, true) => tp += 1.0,
                    (true, false) => fp += 1.0,
                    (false, true) => fn_ += 1.0,
                    (false, false) => {}
                }
            }
            let precision = if tp + fp > 0.0 { tp / (tp + fp) } else { 0.0 };
            let recall = if tp + fn_ > 0.0 { tp / (tp + fn_) } else { 0.0 };
            if precision + recall == 0.0 {
                Ok(0.0)
            } else {
                Ok(2.0 * precision * recall / (precision + recall))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::io::Write;

    fn labels() -> ExtractionRule {
        ExtractionRule::LabelSetMatch {
            labels: vec!["Healthy".into(), "Black Rot".into()],
        }
    }

    fn dataset(n: usize) -> TaskDataset {
        TaskDataset::new(
            (0..n)
                .map(|i| TaskExample {
                    id: format!("ex-{i}"),
                    query_text: format!("query {i}"),
                    query_assets: vec![],
                    answer: "yes".into(),
                    choices: None,
                })
                .collect(),
        )
    }

    #[test]
    fn manifest_preserves_file_order() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("task.jsonl");
        let mut f = fs::File::create(&path).unwrap();
        for id in ["a", "b", "c"] {
            writeln!(
                f,
                r#"{{"id":"{id}","query_text":"q-{id}","query_assets":[],"answer":"yes"}}"#
            )
            .unwrap();
        }
        let ds = load_task(&path, None).unwrap();
        assert_eq!(ds.len(), 3);
        let ids: Vec<_> = ds.examples().iter().map(|e| e.id.as_str()).collect();
        assert_eq!(ids, ["a", "b", "c"]);
    }

    #[test]
    fn manifest_missing_answer_is_rejected_with_line_number() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("task.jsonl");
        fs::write(
            &path,
            concat!(
                r#"{"id":"a","query_text":"q","query_assets":[],"answer":"yes"}"#,
                "\n",
                r#"{"id":"b","query_text":"q","query_assets":[]}"#,
                "\n"
            ),
        )
        .unwrap();
        match load_task(&path, None) {
            Err(Error::Manifest { line, .. }) => assert_eq!(line, 2),
            other => panic!("expected manifest error, got {other:?}"),
        }
    }

    #[test]
    fn manifest_duplicate_ids_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("task.jsonl");
        let line = r#"{"id":"a","query_text":"q","query_assets":[],"answer":"yes"}"#;
        fs::write(&path, format!("{line}\n{line}\n")).unwrap();
        assert!(matches!(load_task(&path, None), Err(Error::Manifest { line: 2, .. })));
    }

    #[test]
    fn manifest_blob_assets_must_resolve() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("task.jsonl");
        fs::write(
            &path,
            format!(
                r#"{{"id":"a","query_text":"q","query_assets":[{{"modality":"image","blob":"{}"}}],"answer":"yes"}}"#,
                "0".repeat(64)
            ) + "\n",
        )
        .unwrap();
        assert!(matches!(load_task(&path, None), Err(Error::Manifest { line: 1, .. })));
    }

    #[test]
    fn exhaustive_sample_is_a_permutation() {
        let ds = dataset(7);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let batch = sample_minibatch(&ds, 7, &mut rng).unwrap();
        let mut ids: Vec<_> = batch.iter().map(|e| e.id.clone()).collect();
        ids.sort();
        let mut expected: Vec<_> = ds.examples().iter().map(|e| e.id.clone()).collect();
        expected.sort();
        assert_eq!(ids, expected);
    }

    #[test]
    fn sampling_is_deterministic_under_reseeding() {
        let ds = dataset(10);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let first: Vec<_> = sample_minibatch(&ds, 4, &mut rng)
            .unwrap()
            .iter()
            .map(|e| e.id.clone())
            .collect();
        let second: Vec<_> = sample_minibatch(&ds, 4, &mut rng)
            .unwrap()
            .iter()
            .map(|e| e.id.clone())
            .collect();
        assert_ne!(first, second, "successive draws from one stream should differ");

        let mut reseeded = ChaCha8Rng::seed_from_u64(9);
        let again: Vec<_> = sample_minibatch(&ds, 4, &mut reseeded)
            .unwrap()
            .iter()
            .map(|e| e.id.clone())
            .collect();
        assert_eq!(first, again);
    }

    #[test]
    fn singleton_draws_are_uniform() {
        // Frequency oracle: 10,000 draws of B=1 from 4 examples should give
        // each example 2500 +/- 150 hits.
        let ds = dataset(4);
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let mut counts = [0u32; 4];
        for _ in 0..10_000 {
            let batch = sample_minibatch(&ds, 1, &mut rng).unwrap();
            let idx: usize = batch[0].id.strip_prefix("ex-").unwrap().parse().unwrap();
            counts[idx] += 1;
        }
        for &c in &counts {
            assert!((2350..=2650).contains(&c), "counts {counts:?} not uniform");
        }
    }

    #[test]
    fn empty_dataset_cannot_be_sampled() {
        let ds = dataset(0);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(matches!(
            sample_minibatch(&ds, 1, &mut rng),
            Err(Error::EmptyDataset)
        ));
    }

    #[test]
    fn answer_tag_extraction() {
        let rule = ExtractionRule::AnswerTagPattern {
            pattern: "The answer is".into(),
        };
        let got = extract_answer("Let me think. The answer is B.", &rule).unwrap();
        assert_eq!(got, "b");
        assert_eq!(score_example(Some(&got), "B"), 1.0);
        // Bracketed answers lose their brackets.
        assert_eq!(extract_answer("The answer is [A]", &rule).unwrap(), "a");
    }

    #[test]
    fn label_set_extraction_takes_last_occurrence() {
        assert_eq!(
            extract_answer("healthy leaf shown", &labels()).unwrap(),
            "healthy"
        );
        assert_eq!(
            extract_answer("looks healthy at first but it is Black Rot", &labels()).unwrap(),
            "black rot"
        );
    }

    #[test]
    fn extraction_absence_is_no_answer() {
        assert!(matches!(
            extract_answer("no label here", &labels()),
            Err(Error::NoAnswer)
        ));
        let rule = ExtractionRule::AnswerTagPattern {
            pattern: "The answer is".into(),
        };
        assert!(matches!(extract_answer("no tag", &rule), Err(Error::NoAnswer)));
    }

    #[test]
    fn extraction_is_idempotent() {
        for raw in ["The leaf is Healthy.", "black rot everywhere"] {
            let once = extract_answer(raw, &labels()).unwrap();
            let twice = extract_answer(&once, &labels()).unwrap();
            assert_eq!(once, twice);
        }
    }

    #[test]
    fn scoring_normalizes_and_penalizes_absence() {
        assert_eq!(score_example(Some("B"), "B"), 1.0);
        assert_eq!(score_example(Some("b "), "B"), 1.0);
        assert_eq!(score_example(None, "B"), 0.0);
    }

    #[test]
    fn accuracy_is_the_mean_of_example_scores() {
        let spec = MetricSpec {
            kind: MetricKind::Accuracy,
            extraction: ExtractionRule::Verbatim,
            positive_label: None,
        };
        let results = vec![
            (Some("yes".to_string()), "yes".to_string()),
            (Some("no".to_string()), "yes".to_string()),
            (None, "yes".to_string()),
            (Some("YES".to_string()), "yes".to_string()),
        ];
        let agg = aggregate(&results, &spec).unwrap();
        let mean: f64 = results
            .iter()
            .map(|(p, g)| score_example(p.as_deref(), g))
            .sum::<f64>()
            / results.len() as f64;
        assert_eq!(agg, mean);
        assert_eq!(agg, 0.5);
    }

    #[test]
    fn binary_f1_matches_hand_confusion_matrix() {
        // TP=2, FP=1, FN=1 -> P = R = 2/3 -> F1 = 2*(2/3)*(2/3)/(4/3) = 2/3.
        let spec = MetricSpec {
            kind: MetricKind::BinaryF1,
            extraction: ExtractionRule::Verbatim,
            positive_label: Some("yes".into()),
        };
        let results = vec![
            (Some("yes".to_string()), "yes".to_string()),
            (Some("yes".to_string()), "yes".to_string()),
            (Some("yes".to_string()), "no".to_string()),
            (Some("no".to_string()), "yes".to_string()),
            (Some("no".to_string()), "no".to_string()),
        ];
        let f1 = aggregate(&results, &spec).unwrap();
        assert!((f1 - 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn binary_f1_degenerate_case_is_zero() {
        let spec = MetricSpec {
            kind: MetricKind::BinaryF1,
            extraction: ExtractionRule::Verbatim,
            positive_label: Some("yes".into()),
        };
        let results = vec![
            (Some("no".to_string()), "no".to_string()),
            (None, "no".to_string()),
        ];
        assert_eq!(aggregate(&results, &spec).unwrap(), 0.0);
    }

    #[test]
    fn all_correct_aggregates_to_one() {
        let spec = MetricSpec {
            kind: MetricKind::ExactMatch,
            extraction: ExtractionRule::Verbatim,
            positive_label: None,
        };
        let results = vec![
            (Some("a".to_string()), "a".to_string()),
            (Some("b".to_string()), "b".to_string()),
        ];
        assert_eq!(aggregate(&results, &spec).unwrap(), 1.0);
        assert!(matches!(aggregate(&[], &spec), Err(Error::EmptyResults)));
    }
}
