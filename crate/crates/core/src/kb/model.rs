use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::ids::{AlphaId, CompetencyId, FrameId, FrameSetId, NodeId, Role, SenseId, StrategyId};
use crate::language::LanguageId;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PartOfSpeech {
    Noun,
    Verb,
    Adjective,
    Adverb,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SenseRelationKind {
    Synonym,
    Hypernym,
    Hyponym,
}

/// A word sense in one language (an L-layer entry).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sense {
    pub id: SenseId,
    pub language: LanguageId,
    pub lemma: String,
    pub part_of_speech: PartOfSpeech,
    pub gloss: String,
    #[serde(default)]
    pub relations: Vec<(SenseRelationKind, SenseId)>,
}

/// An O-layer relation: `(kind, target, optional value)`. On disk it is a
/// two- or three-element array.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(from = "RelationRepr", into = "RelationRepr")]
pub struct ConceptRelation {
    pub kind: String,
    pub target: NodeId,
    pub value: Option<String>,
}

impl ConceptRelation {
    pub fn new(kind: impl Into<String>, target: impl Into<NodeId>) -> Self {
        Self {
            kind: kind.into(),
            target: target.into(),
            value: None,
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum RelationRepr {
    Pair(String, NodeId),
    Triple(String, NodeId, Option<String>),
}

impl From<RelationRepr> for ConceptRelation {
    fn from(r: RelationRepr) -> Self {
        match r {
            RelationRepr::Pair(kind, target) => Self { kind, target, value: None },
            RelationRepr::Triple(kind, target, value) => Self { kind, target, value },
        }
    }
}

impl From<ConceptRelation> for RelationRepr {
    fn from(r: ConceptRelation) -> Self {
        match r.value {
            None => RelationRepr::Pair(r.kind, r.target),
            Some(v) => RelationRepr::Triple(r.kind, r.target, Some(v)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OLayer {
    /// Typification link; `None` marks a root concept.
    #[serde(default)]
    pub concept_type: Option<NodeId>,
    #[serde(default)]
    pub relations: Vec<ConceptRelation>,
}

/// A concept: the O layer (typification and relations) bridged to the
/// L layer (senses per language).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OLNode {
    pub id: NodeId,
    #[serde(default)]
    pub o_layer: OLayer,
    #[serde(default)]
    pub l_layer: BTreeMap<LanguageId, Vec<SenseId>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub compound_of: Vec<NodeId>,
}

impl OLNode {
    pub fn is_compound(&self) -> bool {
        !self.compound_of.is_empty()
    }

    pub fn senses_in(&self, language: &LanguageId) -> &[SenseId] {
        self.l_layer.get(language).map(Vec::as_slice).unwrap_or(&[])
    }
}

/// Phrase category of a constituent and of a frame slot.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Category {
    NP,
    PP,
    V,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Frame {
    pub id: FrameId,
    pub structural_pattern: Vec<Category>,
    pub semantic_roles: Vec<Role>,
}

impl Frame {
    pub fn verb_position(&self) -> Option<usize> {
        self.structural_pattern.iter().position(|c| *c == Category::V)
    }

    pub fn has_role(&self, role: &Role) -> bool {
        self.semantic_roles.contains(role)
    }
}

/// A verb's frames together with the senses they serve. Frames are held
/// resolved; on disk the record lists frame ids.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FrameSet {
    pub id: FrameSetId,
    pub verb_lemma: String,
    pub language: LanguageId,
    pub frames: Vec<Frame>,
    pub verb_senses: Vec<SenseId>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlphaStructure {
    pub id: AlphaId,
    pub verb_sense: SenseId,
    pub strategies: Vec<StrategyId>,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Predicate {
    IsA(NodeId),
    HasRelation(String, NodeId),
    CompetencyAvailable(CompetencyId),
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Restriction {
    pub role: Role,
    pub predicate: Predicate,
}

impl std::fmt::Display for Restriction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match &self.predicate {
            Predicate::IsA(t) => write!(f, "{}: IsA {}", self.role, t),
            Predicate::HasRelation(k, t) => write!(f, "{}: HasRelation {} {}", self.role, k, t),
            Predicate::CompetencyAvailable(c) => write!(f, "{}: CompetencyAvailable {}", self.role, c),
        }
    }
}

/// One step of an abstract plan: call `action` on `competency`, passing the
/// concepts bound to `bindings`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TemplateStep {
    pub competency: CompetencyId,
    pub action: String,
    #[serde(default)]
    pub bindings: Vec<Role>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExecutionStrategy {
    pub id: StrategyId,
    pub name: String,
    #[serde(default)]
    pub restrictions: Vec<Restriction>,
    #[serde(default)]
    pub required_competencies: Vec<CompetencyId>,
    #[serde(default)]
    pub plan_template: Vec<TemplateStep>,
}

impl ExecutionStrategy {
    /// Every role the plan template references, in first-use order.
    pub fn template_roles(&self) -> Vec<&Role> {
        let mut roles: Vec<&Role> = Vec::new();
        for step in &self.plan_template {
            for r in &step.bindings {
                if !roles.contains(&r) {
                    roles.push(r);
                }
            }
        }
        roles
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CompetencyAction {
    pub name: String,
    #[serde(default)]
    pub parameters: Vec<Role>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CompetencyDescriptor {
    pub id: CompetencyId,
    pub name: String,
    #[serde(default)]
    pub actions: Vec<CompetencyAction>,
    #[serde(default)]
    pub results: Vec<String>,
    #[serde(default = "default_available")]
    pub available: bool,
}

fn default_available() -> bool {
    true
}

impl CompetencyDescriptor {
    pub fn action(&self, name: &str) -> Option<&CompetencyAction> {
        self.actions.iter().find(|a| a.name == name)
    }
}
