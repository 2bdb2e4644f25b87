//! On-disk record kinds: one JSON object per line with a `kind` tag.

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use super::model::{AlphaStructure, CompetencyDescriptor, ExecutionStrategy, Frame, OLNode, Sense};
use crate::ids::{FrameId, FrameSetId, SenseId};
use crate::language::LanguageId;

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    pub format_version: u32,
    pub languages: Vec<LanguageId>,
    #[serde(default)]
    pub files: Vec<String>,
}

impl Manifest {
    pub fn new(languages: Vec<LanguageId>) -> Self {
        Self {
            format_version: FORMAT_VERSION,
            languages,
            files: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FrameSetRecord {
    pub id: FrameSetId,
    pub verb_lemma: String,
    pub language: LanguageId,
    pub frames: Vec<FrameId>,
    pub verb_senses: Vec<SenseId>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Record {
    Sense(Sense),
    Concept(OLNode),
    Frame(Frame),
    FrameSet(FrameSetRecord),
    Alpha(AlphaStructure),
    Strategy(ExecutionStrategy),
    Competency(CompetencyDescriptor),
}

impl Record {
    pub fn kind(&self) -> &'static str {
        match self {
            Record::Sense(_) => "sense",
            Record::Concept(_) => "concept",
            Record::Frame(_) => "frame",
            Record::FrameSet(_) => "frameset",
            Record::Alpha(_) => "alpha",
            Record::Strategy(_) => "strategy",
            Record::Competency(_) => "competency",
        }
    }

    pub fn id(&self) -> &str {
        match self {
            Record::Sense(r) => r.id.as_str(),
            Record::Concept(r) => r.id.as_str(),
            Record::Frame(r) => r.id.as_str(),
            Record::FrameSet(r) => r.id.as_str(),
            Record::Alpha(r) => r.id.as_str(),
            Record::Strategy(r) => r.id.as_str(),
            Record::Competency(r) => r.id.as_str(),
        }
    }

    /// Serialize as a single JSONL line (no trailing newline).
    pub fn to_line(&self) -> String {
        serde_json::to_string(self).expect("records serialize")
    }
}

fn known_fields(kind: &str) -> Option<&'static [&'static str]> {
    Some(match kind {
        "sense" => &["id", "language", "lemma", "part_of_speech", "gloss", "relations"],
        "concept" => &["id", "o_layer", "l_layer", "compound_of"],
        "frame" => &["id", "structural_pattern", "semantic_roles"],
        "frameset" => &["id", "verb_lemma", "language", "frames", "verb_senses"],
        "alpha" => &["id", "verb_sense", "strategies"],
        "strategy" => &["id", "name", "restrictions", "required_competencies", "plan_template"],
        "competency" => &["id", "name", "actions", "results", "available"],
        _ => return None,
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) enum LineError {
    Syntax(String),
    UnknownKind(String),
    UnknownField(String),
    Shape(String),
}

impl std::fmt::Display for LineError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            LineError::Syntax(e) => write!(f, "invalid JSON: {e}"),
            LineError::UnknownKind(k) => write!(f, "unknown record kind `{k}`"),
            LineError::UnknownField(name) => write!(f, "unknown field `{name}`"),
            LineError::Shape(e) => write!(f, "{e}"),
        }
    }
}

/// Parse one record line. In lenient mode unknown top-level fields are
/// dropped and reported through `warnings`.
pub(crate) fn parse_line(
    line: &str,
    lenient: bool,
    warnings: &mut Vec<String>,
) -> Result<Record, LineError> {
    let value: Value = serde_json::from_str(line).map_err(|e| LineError::Syntax(e.to_string()))?;
    let Value::Object(mut obj) = value else {
        return Err(LineError::Shape("record must be a JSON object".into()));
    };
    let kind = match obj.get("kind") {
        Some(Value::String(k)) => k.clone(),
        _ => return Err(LineError::Shape("missing string field `kind`".into())),
    };
    let fields = known_fields(&kind).ok_or_else(|| LineError::UnknownKind(kind.clone()))?;
    let unknown: Vec<String> = obj
        .keys()
        .filter(|k| k.as_str() != "kind" && !fields.contains(&k.as_str()))
        .cloned()
        .collect();
    if let Some(first) = unknown.first() {
        if !lenient {
            return Err(LineError::UnknownField(first.clone()));
        }
        for name in &unknown {
            warnings.push(format!("ignored unknown field `{name}` on {kind} record"));
            obj.remove(name);
        }
    }
    serde_json::from_value(Value::Object(obj)).map_err(|e| LineError::Shape(e.to_string()))
}

pub(crate) fn parse_manifest(text: &str) -> Result<Manifest, String> {
    let value: Value = serde_json::from_str(text).map_err(|e| e.to_string())?;
    let obj: Map<String, Value> = match value {
        Value::Object(o) => o,
        _ => return Err("manifest must be a JSON object".into()),
    };
    let manifest: Manifest = serde_json::from_value(Value::Object(obj)).map_err(|e| e.to_string())?;
    if manifest.format_version != FORMAT_VERSION {
        return Err(format!(
            "unsupported format version {} (expected {FORMAT_VERSION})",
            manifest.format_version
        ));
    }
    Ok(manifest)
}
