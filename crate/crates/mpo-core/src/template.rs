//! Meta-prompt templates: loading, `{placeholder}` substitution, and
//! parsing of `<tag>...</tag>` model output.
//!
//! The template texts are checked-in assets under `templates/<modality>/
//! <operator>.txt` and embedded as built-in defaults. A task config can
//! point at an alternative directory with the same layout.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::prompt::{Modality, OperatorKind};

/// Which meta-prompt a call needs: failure analysis or one of the three
/// exploration operators.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum TemplateKind {
    Backprop,
    Generation,
    Edit,
    Mix,
}

impl TemplateKind {
    pub fn file_stem(self) -> &'static str {
        match self {
            TemplateKind::Backprop => "backprop",
            TemplateKind::Generation => "generation",
            TemplateKind::Edit => "edit",
            TemplateKind::Mix => "mix",
        }
    }

    pub fn for_operator(op: OperatorKind) -> Option<TemplateKind> {
        match op {
            OperatorKind::Generation => Some(TemplateKind::Generation),
            OperatorKind::Edit => Some(TemplateKind::Edit),
            OperatorKind::Mix => Some(TemplateKind::Mix),
            OperatorKind::Root => None,
        }
    }
}

/// Output tags each operator template asks the optimizer to emit: the
/// modality-specific condition plus the improved textual prompt.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OperatorTags {
    pub condition: String,
    pub text: String,
}

/// Default tag names, matching the templates' Output Format blocks.
pub fn default_tags(modality: Modality, op: OperatorKind) -> OperatorTags {
    let prefix = match modality {
        Modality::Image | Modality::None => "image",
        Modality::Video => "video",
        Modality::Molecule => "molecule",
    };
    match op {
        OperatorKind::Generation | OperatorKind::Root => OperatorTags {
            condition: format!("{prefix}_generation_prompt"),
            text: "improved_text_prompt".into(),
        },
        OperatorKind::Edit => OperatorTags {
            condition: format!("{prefix}_edit_prompt"),
            text: "improved_text_prompt".into(),
        },
        OperatorKind::Mix => OperatorTags {
            condition: format!("{prefix}_mixing_prompt"),
            text: "mixed_text_prompt".into(),
        },
    }
}

macro_rules! builtin {
    ($modality:literal) => {
        [
            (TemplateKind::Backprop, include_str!(concat!("../templates/", $modality, "/backprop.txt"))),
            (TemplateKind::Generation, include_str!(concat!("../templates/", $modality, "/generation.txt"))),
            (TemplateKind::Edit, include_str!(concat!("../templates/", $modality, "/edit.txt"))),
            (TemplateKind::Mix, include_str!(concat!("../templates/", $modality, "/mix.txt"))),
        ]
    };
}

/// A full set of templates for the three modalities.
#[derive(Debug, Clone)]
pub struct TemplateSet {
    map: BTreeMap<(Modality, TemplateKind), String>,
}

impl TemplateSet {
    /// The embedded templates shipped with the crate.
    pub fn builtin() -> Self {
        let mut map = BTreeMap::new();
        for (kind, text) in builtin!("image") {
            map.insert((Modality::Image, kind), text.to_string());
        }
        for (kind, text) in builtin!("video") {
            map.insert((Modality::Video, kind), text.to_string());
        }
        for (kind, text) in builtin!("molecule") {
            map.insert((Modality::Molecule, kind), text.to_string());
        }
        TemplateSet { map }
    }

    /// Loads `<dir>/<modality>/<operator>.txt`, falling back to the
    /// built-in text for any file that is absent.
    pub fn from_dir(dir: &Path) -> Result<Self> {
        let mut set = TemplateSet::builtin();
        for modality in [Modality::Image, Modality::Video, Modality::Molecule] {
            for kind in [
                TemplateKind::Backprop,
                TemplateKind::Generation,
                TemplateKind::Edit,
                TemplateKind::Mix,
            ] {
                let path = dir
                    .join(modality.to_string())
                    .join(format!("{}.txt", kind.file_stem()));
                if path.exists() {
                    let text = fs::read_to_string(&path).map_err(Error::storage)?;
                    set.map.insert((modality, kind), text);
                }
            }
        }
        Ok(set)
    }

    pub fn get(&self, modality: Modality, kind: TemplateKind) -> Result<&str> {
        // Tasks without a non-textual modality reuse the image wording.
        let modality = if modality == Modality::None {
            Modality::Image
        } else {
            modality
        };
        self.map
            .get(&(modality, kind))
            .map(String::as_str)
            .ok_or_else(|| {
                Error::InvalidConfig(format!(
                    "no template for modality `{modality}` / `{}`",
                    kind.file_stem()
                ))
            })
    }
}

fn is_placeholder_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_'
}

/// Byte-exact substitution of `{placeholder}` occurrences. Every
/// placeholder must have a binding; nothing else is touched. Substituted
/// values are not re-scanned.
pub fn render_template(template: &str, bindings: &BTreeMap<String, String>) -> Result<String> {
    let mut out = String::with_capacity(template.len());
    let bytes = template.as_bytes();
    let mut i = 0;
    while i < bytes.len() {
        if bytes[i] == b'{' {
            let rest = &template[i + 1..];
            if let Some(end) = rest.find('}') {
                let name = &rest[..end];
                if !name.is_empty() && name.chars().all(is_placeholder_char) {
                    match bindings.get(name) {
                        Some(value) => {
                            out.push_str(value);
                            i += 1 + end + 1;
                            continue;
                        }
                        None => return Err(Error::Template(name.to_string())),
                    }
                }
            }
        }
        let ch = template[i..].chars().next().expect("in-bounds char");
        out.push(ch);
        i += ch.len_utf8();
    }
    Ok(out)
}

/// Identity bindings that keep Output Format placeholders literal in the
/// rendered prompt, e.g. `improved_text_prompt` -> `{improved_text_prompt}`.
pub fn identity_bindings(bindings: &mut BTreeMap<String, String>, tags: &[&str]) {
    for tag in tags {
        bindings.insert((*tag).to_string(), format!("{{{tag}}}"));
    }
}

/// Extracts the first well-formed `<tag>...</tag>` span for each requested
/// tag, trimming the payload. Any tag that is absent or unclosed makes the
/// whole parse fail, listing every missing tag.
pub fn parse_tagged_output(raw: &str, tags: &[&str]) -> Result<BTreeMap<String, String>> {
    let mut found = BTreeMap::new();
    let mut missing = Vec::new();
    for &tag in tags {
        let open = format!("<{tag}>");
        let close = format!("</{tag}>");
        let payload = raw.find(&open).and_then(|start| {
            let body_start = start + open.len();
            raw[body_start..]
                .find(&close)
                .map(|end| raw[body_start..body_start + end].trim().to_string())
        });
        match payload {
            Some(p) => {
                found.insert(tag.to_string(), p);
            }
            None => missing.push(tag.to_string()),
        }
    }
    if missing.is_empty() {
        Ok(found)
    } else {
        Err(Error::Parse { missing })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bind(pairs: &[(&str, &str)]) -> BTreeMap<String, String> {
        pairs
            .iter()
            .map(|(k, v)| (k.to_string(), v.to_string()))
            .collect()
    }

    #[test]
    fn substitution_is_byte_exact() {
        let out = render_template("A {x} B", &bind(&[("x", "1")])).unwrap();
        assert_eq!(out, "A 1 B");
    }

    #[test]
    fn unbound_placeholder_is_named() {
        match render_template("A {x} B", &bind(&[])) {
            Err(Error::Template(name)) => assert_eq!(name, "x"),
            other => panic!("expected template error, got {other:?}"),
        }
    }

    #[test]
    fn non_placeholder_braces_pass_through() {
        let out = render_template("json {{ not a placeholder } {x}", &bind(&[("x", "v")]));
        // `{{ ` is not an identifier span, `{ not...}` has spaces.
        assert_eq!(out.unwrap(), "json {{ not a placeholder } v");
    }

    #[test]
    fn substituted_values_are_not_rescanned() {
        let out = render_template("{a}", &bind(&[("a", "{b}")])).unwrap();
        assert_eq!(out, "{b}");
    }

    #[test]
    fn generation_template_renders_with_sample_bindings() {
        let set = TemplateSet::builtin();
        let template = set.get(Modality::Image, TemplateKind::Generation).unwrap();
        let mut bindings = bind(&[
            ("text_prompt", "Classify the leaf."),
            ("modality_prompt", "(none)"),
            ("wrong_examples", "Example 1: ..."),
            ("analysis", "The instruction is vague."),
        ]);
        identity_bindings(&mut bindings, &["image_generation_prompt", "improved_text_prompt"]);
        let rendered = render_template(template, &bindings).unwrap();
        assert!(rendered.contains("### Provided Material"));
        assert!(rendered.contains("- Text Prompt: Classify the leaf."));
        assert!(rendered.contains("<image_generation_prompt>{image_generation_prompt}</image_generation_prompt>"));
    }

    #[test]
    fn every_builtin_template_renders() {
        let set = TemplateSet::builtin();
        for modality in [Modality::Image, Modality::Video, Modality::Molecule] {
            for kind in [
                TemplateKind::Backprop,
                TemplateKind::Generation,
                TemplateKind::Edit,
                TemplateKind::Mix,
            ] {
                let template = set.get(modality, kind).unwrap();
                let mut bindings = bind(&[
                    ("text_prompt", "t"),
                    ("modality_prompt", "m"),
                    ("wrong_examples", "w"),
                    ("analysis", "a"),
                    ("text_prompt_A", "ta"),
                    ("modality_prompt_A", "ma"),
                    ("wrong_examples_A", "wa"),
                    ("analysis_A", "aa"),
                    ("text_prompt_B", "tb"),
                    ("modality_prompt_B", "mb"),
                    ("wrong_examples_B", "wb"),
                    ("analysis_B", "ab"),
                ]);
                for op in [OperatorKind::Generation, OperatorKind::Edit, OperatorKind::Mix] {
                    let tags = default_tags(modality, op);
                    identity_bindings(&mut bindings, &[&tags.condition, &tags.text]);
                }
                render_template(template, &bindings)
                    .unwrap_or_else(|e| panic!("{modality}/{}: {e}", kind.file_stem()));
            }
        }
    }

    #[test]
    fn tag_parsing_happy_path() {
        let parsed = parse_tagged_output("<a>x</a><b>y</b>", &["a", "b"]).unwrap();
        assert_eq!(parsed["a"], "x");
        assert_eq!(parsed["b"], "y");
    }

    #[test]
    fn unclosed_tag_is_a_parse_error() {
        match parse_tagged_output("<a>x", &["a"]) {
            Err(Error::Parse { missing }) => assert_eq!(missing, vec!["a".to_string()]),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn stray_text_around_tags_is_ignored() {
        let raw = "Sure! Here you go:\n<a>\n  payload A\n</a>\ntrailing <b>B</b> done";
        let parsed = parse_tagged_output(raw, &["a", "b"]).unwrap();
        assert_eq!(parsed["a"], "payload A");
        assert_eq!(parsed["b"], "B");
    }

    #[test]
    fn rendered_output_format_round_trips() {
        // Rendering with identity bindings keeps the Output Format block's
        // placeholders; parsing it back yields those placeholder names.
        let set = TemplateSet::builtin();
        for (modality, op) in [
            (Modality::Image, OperatorKind::Generation),
            (Modality::Image, OperatorKind::Edit),
            (Modality::Image, OperatorKind::Mix),
            (Modality::Video, OperatorKind::Generation),
            (Modality::Molecule, OperatorKind::Mix),
        ] {
            let kind = TemplateKind::for_operator(op).unwrap();
            let template = set.get(modality, kind).unwrap();
            let tags = default_tags(modality, op);
            let mut bindings = bind(&[
                ("text_prompt", "t"),
                ("modality_prompt", "m"),
                ("wrong_examples", "w"),
                ("analysis", "a"),
                ("text_prompt_A", "ta"),
                ("modality_prompt_A", "ma"),
                ("wrong_examples_A", "wa"),
                ("analysis_A", "aa"),
                ("text_prompt_B", "tb"),
                ("modality_prompt_B", "mb"),
                ("wrong_examples_B", "wb"),
                ("analysis_B", "ab"),
            ]);
            identity_bindings(&mut bindings, &[&tags.condition, &tags.text]);
            let rendered = render_template(template, &bindings).unwrap();
            let parsed = parse_tagged_output(&rendered, &[&tags.condition, &tags.text]).unwrap();
            assert_eq!(parsed[&tags.condition], format!("{{{}}}", tags.condition));
            assert_eq!(parsed[&tags.text], format!("{{{}}}", tags.text));
        }
    }
}
