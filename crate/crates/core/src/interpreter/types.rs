use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::ids::{AlphaId, FrameId, NodeId, Role, SenseId};
use crate::parser::UtteranceTree;

/// An utterance tree with one sense chosen per argument position.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnnotatedTree {
    pub base: UtteranceTree,
    pub arg_senses: BTreeMap<usize, SenseId>,
}

impl AnnotatedTree {
    pub fn bare(tree: &UtteranceTree) -> Self {
        Self {
            base: tree.clone(),
            arg_senses: BTreeMap::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct RoleBinding {
    pub position: usize,
    pub node: NodeId,
}

/// An annotated tree bound to a verb sense's alpha-structure and to the
/// frame that licensed it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MeaningTree {
    pub annotated: AnnotatedTree,
    pub verb_sense: SenseId,
    pub verb_alpha: AlphaId,
    pub frame: FrameId,
    pub role_bindings: BTreeMap<Role, RoleBinding>,
}

impl MeaningTree {
    pub fn bound_node(&self, role: &Role) -> Option<&NodeId> {
        self.role_bindings.get(role).map(|b| &b.node)
    }
}
