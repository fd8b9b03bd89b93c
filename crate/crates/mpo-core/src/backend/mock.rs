//! Deterministic mock backends. All of them are pure functions of their
//! inputs and a salt, so full engine runs on mocks are reproducible.

use std::sync::atomic::{AtomicU32, Ordering};
use std::sync::Arc;

use super::{
    AnswerModel, AssetGenerator, ChatMessage, ChatRequest, ChatTransport, OptimizerModel,
    TransportError,
};
use crate::error::{Error, Result};
use crate::prompt::{AssetRef, Modality, PromptNode};
use crate::store::AssetStore;
use crate::task::TaskExample;
use crate::util::{digest_hex, hash_u64};

/// Finds `<name>{name}</name>` output-format patterns in a rendered meta
/// prompt. This is how the mock optimizer knows which tags a caller expects.
fn find_format_tags(text: &str) -> Vec<String> {
    let mut tags = Vec::new();
    let bytes = text.as_bytes();
    let mut i = 0;
    while i < bytes.len() {
        if bytes[i] == b'<' {
            let rest = &text[i + 1..];
            if let Some(end) = rest.find('>') {
                let name = &rest[..end];
                if !name.is_empty()
                    && name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_')
                {
                    let expected = format!("{{{name}}}</{name}>");
                    if rest[end + 1..].starts_with(&expected) {
                        if !tags.contains(&name.to_string()) {
                            tags.push(name.to_string());
                        }
                        i += 1 + end + 1 + expected.len();
                        continue;
                    }
                }
            }
        }
        i += 1;
    }
    tags
}

/// Mock chat model for the optimizer role. If the request contains an
/// output-format block, it answers with those tags filled by deterministic
/// pseudo-content; otherwise it produces a short analysis paragraph.
pub struct MockChatModel {
    salt: u64,
}

impl MockChatModel {
    pub fn new(salt: u64) -> Self {
        MockChatModel { salt }
    }

    fn respond(&self, text: &str) -> String {
        let tags = find_format_tags(text);
        let digest = digest_hex(&[&self.salt.to_le_bytes(), text.as_bytes()]);
        if tags.is_empty() {
            return format!(
                "Failure analysis ({}): the instruction and the reference material \
                 underspecify the decisive features; sharpen both.",
                &digest[..8]
            );
        }
        let mut out = String::new();
        for tag in tags {
            let content_digest =
                digest_hex(&[&self.salt.to_le_bytes(), text.as_bytes(), tag.as_bytes()]);
            let payload = if tag.contains("text") {
                format!(
                    "Answer using the decisive features only (variant {}).",
                    &content_digest[..8]
                )
            } else {
                format!(
                    "Produce reference material emphasizing the decisive features (variant {}).",
                    &content_digest[..8]
                )
            };
            out.push_str(&format!("<{tag}>{payload}</{tag}>\n"));
        }
        out
    }
}

impl OptimizerModel for MockChatModel {
    fn complete(&self, messages: &[ChatMessage]) -> Result<String> {
        let text: String = messages.iter().map(|m| m.text()).collect::<Vec<_>>().join("\n");
        Ok(self.respond(&text))
    }
}

impl ChatTransport for MockChatModel {
    fn send(&self, request: &ChatRequest) -> std::result::Result<String, TransportError> {
        Ok(self.respond(&request.text()))
    }
}

/// Echoes the concatenated text parts back. Useful for asserting exactly
/// what a caller rendered into its meta prompt.
pub struct EchoChatModel;

impl OptimizerModel for EchoChatModel {
    fn complete(&self, messages: &[ChatMessage]) -> Result<String> {
        Ok(messages.iter().map(|m| m.text()).collect::<Vec<_>>().join("\n"))
    }
}

/// Answer model driven by a closure over (node, query).
pub struct RuleAnswerModel {
    rule: Box<dyn Fn(&PromptNode, &TaskExample) -> String + Send + Sync>,
}

impl RuleAnswerModel {
    pub fn new(rule: impl Fn(&PromptNode, &TaskExample) -> String + Send + Sync + 'static) -> Self {
        RuleAnswerModel { rule: Box::new(rule) }
    }

    pub fn always_correct() -> Self {
        Self::new(|_, query| query.answer.clone())
    }

    pub fn always_wrong() -> Self {
        Self::new(|_, query| wrong_answer(query))
    }
}

impl AnswerModel for RuleAnswerModel {
    fn answer(&self, node: &PromptNode, query: &TaskExample) -> Result<String> {
        Ok((self.rule)(node, query))
    }
}

/// A wrong-but-well-formed answer: another choice when the example lists
/// choices, otherwise a string that extracts to nothing.
pub fn wrong_answer(query: &TaskExample) -> String {
    if let Some(choices) = &query.choices {
        let gold = crate::task::normalize(&query.answer);
        let pick = hash_u64(&[query.id.as_bytes(), b"wrong"]) as usize;
        let alternates: Vec<&String> = choices
            .iter()
            .filter(|c| crate::task::normalize(c) != gold)
            .collect();
        if !alternates.is_empty() {
            return alternates[pick % alternates.len()].clone();
        }
    }
    "unanswerable".into()
}

/// Transport that fails with transient errors a configured number of times
/// before succeeding, counting every attempt.
pub struct FaultInjectionTransport {
    failures: u32,
    attempts: AtomicU32,
}

impl FaultInjectionTransport {
    pub fn new(failures: u32) -> Self {
        FaultInjectionTransport {
            failures,
            attempts: AtomicU32::new(0),
        }
    }

    pub fn attempts(&self) -> u32 {
        self.attempts.load(Ordering::SeqCst)
    }
}

impl ChatTransport for FaultInjectionTransport {
    fn send(&self, request: &ChatRequest) -> std::result::Result<String, TransportError> {
        let attempt = self.attempts.fetch_add(1, Ordering::SeqCst);
        if attempt < self.failures {
            Err(TransportError::Transient(format!(
                "injected fault on attempt {}",
                attempt + 1
            )))
        } else {
            Ok(format!("ok after {} attempts: {}", attempt + 1, request.text().trim().len()))
        }
    }
}

const MOCK_SMILES: [&str; 6] = ["CCO", "CCN", "CC(=O)O", "c1ccccc1", "C1CCCCC1", "CC(C)O"];

/// Deterministic stand-in for the modality generators: visual modalities
/// get a stored blob derived from the condition, molecules get an inline
/// SMILES picked by hash.
pub struct MockGenerator {
    store: AssetStore,
    salt: u64,
}

impl MockGenerator {
    pub fn new(store: AssetStore, salt: u64) -> Self {
        MockGenerator { store, salt }
    }
}

impl AssetGenerator for MockGenerator {
    fn generate(
        &self,
        condition: &str,
        refs: &[AssetRef],
        modality: Modality,
    ) -> Result<AssetRef> {
        match modality {
            Modality::Molecule => {
                let pick = hash_u64(&[&self.salt.to_le_bytes(), condition.as_bytes()]) as usize;
                AssetRef::inline(Modality::Molecule, MOCK_SMILES[pick % MOCK_SMILES.len()])
            }
            Modality::Image | Modality::Video => {
                let ref_ids: Vec<String> = refs.iter().map(|r| r.describe()).collect();
                let body = format!(
                    "mock {modality} asset\ncondition: {condition}\nrefs: {}\nsalt: {}",
                    ref_ids.join(", "),
                    self.salt
                );
                let hint = if modality == Modality::Image { "png" } else { "mp4" };
                self.store.store(body.as_bytes(), modality, Some(hint.into()))
            }
            Modality::None => Err(Error::Config(
                "mock generator needs a concrete modality".into(),
            )),
        }
    }
}

/// Molecule generation routed through the optimizer backend: the optimizer
/// is asked for a single SMILES string in a tagged block.
pub struct OptimizerMoleculeGenerator {
    optimizer: Arc<dyn OptimizerModel>,
}

impl OptimizerMoleculeGenerator {
    pub fn new(optimizer: Arc<dyn OptimizerModel>) -> Self {
        OptimizerMoleculeGenerator { optimizer }
    }
}

impl AssetGenerator for OptimizerMoleculeGenerator {
    fn generate(
        &self,
        condition: &str,
        refs: &[AssetRef],
        modality: Modality,
    ) -> Result<AssetRef> {
        if modality != Modality::Molecule {
            return Err(Error::Config(format!(
                "optimizer-backed generation only supports molecules, got `{modality}`"
            )));
        }
        let references = if refs.is_empty() {
            "(none)".to_string()
        } else {
            refs.iter().map(|r| r.describe()).collect::<Vec<_>>().join(", ")
        };
        let prompt = format!(
            "You are a molecule designer. Produce one molecule, as a SMILES string, \
             that satisfies the condition below.\n\n\
             Condition: {condition}\n\
             Reference molecules: {references}\n\n\
             ### Output Format\n<smiles>{{smiles}}</smiles>"
        );
        let response = self.optimizer.complete(&[ChatMessage::user_text(prompt)])?;
        let parsed = crate::template::parse_tagged_output(&response, &["smiles"])?;
        let smiles = &parsed["smiles"];
        if smiles.is_empty() {
            return Err(Error::Backend("generator returned an empty SMILES".into()));
        }
        AssetRef::inline(Modality::Molecule, smiles.clone())
    }
}
