//! Multimodal prompt representation: the `(text, assets)` pair, candidate
//! lineage, and operator provenance shared by the rest of the engine.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::fmt;

use crate::bandit::BetaPosterior;
use crate::error::{Error, Result};

/// Modality of a non-textual asset (or of a task as a whole).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Modality {
    Image,
    Video,
    Molecule,
    None,
}

impl Modality {
    /// Inline text content is only meaningful for molecules (SMILES) and
    /// the degenerate `none` modality; images and videos are opaque blobs.
    pub fn allows_inline(self) -> bool {
        matches!(self, Modality::Molecule | Modality::None)
    }
}

impl fmt::Display for Modality {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Modality::Image => "image",
            Modality::Video => "video",
            Modality::Molecule => "molecule",
            Modality::None => "none",
        };
        f.write_str(s)
    }
}

/// Asset payload: either inline text (e.g. a SMILES string) or a
/// content-addressed blob id referring to bytes in the run's asset store.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum AssetContent {
    #[serde(rename = "inline")]
    Inline(String),
    #[serde(rename = "blob")]
    Blob(String),
}

/// Reference to one non-textual prompt component.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct AssetRef {
    pub modality: Modality,
    #[serde(flatten)]
    pub content: AssetContent,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub media_hint: Option<String>,
}

impl AssetRef {
    pub fn inline(modality: Modality, text: impl Into<String>) -> Result<Self> {
        if !modality.allows_inline() {
            return Err(Error::InvalidPrompt(format!(
                "inline content is not permitted for modality `{modality}`"
            )));
        }
        Ok(AssetRef {
            modality,
            content: AssetContent::Inline(text.into()),
            media_hint: None,
        })
    }

    pub fn blob(modality: Modality, id: impl Into<String>, media_hint: Option<String>) -> Self {
        AssetRef {
            modality,
            content: AssetContent::Blob(id.into()),
            media_hint,
        }
    }

    /// Short textual stand-in used when a template needs to describe the
    /// asset in prose (the raw bytes travel as message parts instead).
    pub fn describe(&self) -> String {
        match &self.content {
            AssetContent::Inline(text) => text.clone(),
            AssetContent::Blob(id) => {
                let short = &id[..id.len().min(12)];
                match &self.media_hint {
                    Some(hint) => format!("[{} asset {short} ({hint})]", self.modality),
                    None => format!("[{} asset {short}]", self.modality),
                }
            }
        }
    }
}

/// A multimodal prompt: textual instruction plus zero or more assets.
/// An empty asset list encodes "no non-textual prompt".
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MultimodalPrompt {
    pub text: String,
    pub assets: Vec<AssetRef>,
}

impl MultimodalPrompt {
    pub fn text_only(text: impl Into<String>) -> Self {
        MultimodalPrompt {
            text: text.into(),
            assets: Vec::new(),
        }
    }

    /// Stable digest over text and asset identities, used for cache keys.
    pub fn content_hash(&self) -> String {
        let mut hasher = Sha256::new();
        hasher.update(b"prompt\x00");
        hasher.update(self.text.as_bytes());
        for asset in &self.assets {
            hasher.update(b"\x00asset\x00");
            hasher.update(asset.modality.to_string().as_bytes());
            match &asset.content {
                AssetContent::Inline(t) => {
                    hasher.update(b"i\x00");
                    hasher.update(t.as_bytes());
                }
                AssetContent::Blob(id) => {
                    hasher.update(b"b\x00");
                    hasher.update(id.as_bytes());
                }
            }
        }
        hex::encode(hasher.finalize())
    }
}

/// Search operator that produced a candidate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OperatorKind {
    Root,
    Generation,
    Edit,
    Mix,
}

impl OperatorKind {
    pub fn parent_arity(self) -> usize {
        match self {
            OperatorKind::Root => 0,
            OperatorKind::Generation | OperatorKind::Edit => 1,
            OperatorKind::Mix => 2,
        }
    }
}

impl fmt::Display for OperatorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            OperatorKind::Root => "root",
            OperatorKind::Generation => "generation",
            OperatorKind::Edit => "edit",
            OperatorKind::Mix => "mix",
        };
        f.write_str(s)
    }
}

/// Deterministic candidate identifier.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeId(pub String);

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl NodeId {
    /// Ids are a hash of (parent ids, operator, condition, text, iteration),
    /// so reruns under a fixed seed reproduce the same ids. The creation
    /// iteration is included so that identical content produced in different
    /// iterations yields distinct candidates.
    fn derive(
        operator: OperatorKind,
        parent_ids: &[NodeId],
        condition: Option<&str>,
        text: &str,
        iteration: u32,
    ) -> NodeId {
        let mut hasher = Sha256::new();
        hasher.update(b"mpo-node\x00");
        hasher.update(operator.to_string().as_bytes());
        for parent in parent_ids {
            hasher.update(b"\x00p\x00");
            hasher.update(parent.0.as_bytes());
        }
        hasher.update(b"\x00c\x00");
        hasher.update(condition.unwrap_or("").as_bytes());
        hasher.update(b"\x00t\x00");
        hasher.update(text.as_bytes());
        hasher.update(b"\x00i\x00");
        hasher.update(iteration.to_le_bytes());
        NodeId(hex::encode(&hasher.finalize()[..16]))
    }
}

/// One candidate in the search: prompt, lineage, provenance, and the
/// Beta posterior the selector maintains for it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PromptNode {
    pub id: NodeId,
    pub prompt: MultimodalPrompt,
    pub parent_ids: Vec<NodeId>,
    pub operator: OperatorKind,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub condition: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub feedback_used: Option<String>,
    pub posterior: BetaPosterior,
    pub created_at_iteration: u32,
}

impl PromptNode {
    pub fn has_assets(&self) -> bool {
        !self.prompt.assets.is_empty()
    }
}

/// Root candidate from the initial textual prompt. The uniform Beta(1,1)
/// posterior is a placeholder until root seeding replaces it.
pub fn new_root(text: impl Into<String>) -> Result<PromptNode> {
    let text = text.into();
    if text.trim().is_empty() {
        return Err(Error::InvalidPrompt("root prompt text is empty".into()));
    }
    let id = NodeId::derive(OperatorKind::Root, &[], None, &text, 0);
    Ok(PromptNode {
        id,
        prompt: MultimodalPrompt::text_only(text),
        parent_ids: Vec::new(),
        operator: OperatorKind::Root,
        condition: None,
        feedback_used: None,
        posterior: BetaPosterior::uniform(),
        created_at_iteration: 0,
    })
}

/// Child candidate produced by an exploration operator. Enforces the
/// operator/arity correspondence and rejects empty prompt text.
pub fn new_child(
    operator: OperatorKind,
    parents: &[&PromptNode],
    prompt: MultimodalPrompt,
    condition: String,
    feedback: String,
    posterior: BetaPosterior,
    iteration: u32,
) -> Result<PromptNode> {
    if operator == OperatorKind::Root {
        return Err(Error::InvalidPrompt("children cannot use the root operator".into()));
    }
    if parents.len() != operator.parent_arity() {
        return Err(Error::InvalidPrompt(format!(
            "operator `{operator}` requires {} parent(s), got {}",
            operator.parent_arity(),
            parents.len()
        )));
    }
    if prompt.text.trim().is_empty() {
        return Err(Error::InvalidPrompt("child prompt text is empty".into()));
    }
    for parent in parents {
        if parent.created_at_iteration >= iteration {
            return Err(Error::InvalidPrompt(format!(
                "parent {} was not created at an earlier iteration",
                parent.id
            )));
        }
    }
    let parent_ids: Vec<NodeId> = parents.iter().map(|p| p.id.clone()).collect();
    let id = NodeId::derive(operator, &parent_ids, Some(&condition), &prompt.text, iteration);
    Ok(PromptNode {
        id,
        prompt,
        parent_ids,
        operator,
        condition: Some(condition),
        feedback_used: Some(feedback),
        posterior,
        created_at_iteration: iteration,
    })
}
