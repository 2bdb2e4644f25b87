use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::types::AnnotatedTree;
use crate::ids::{NodeId, SenseId};
use crate::kb::{Category, ConceptDefinition, MemoryStore};
use crate::language::LanguageId;
use crate::parser::UtteranceTree;

/// A suggestion offered alongside an inquiry.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SenseSuggestion {
    pub sense: SenseId,
    pub lemma: String,
    pub gloss: String,
    pub concept: NodeId,
}

/// A request for the sense of an argument memory could not ground.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PendingInquiry {
    pub argument_text: String,
    pub position: usize,
    pub language: LanguageId,
    pub candidate_definitions: Vec<SenseSuggestion>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InquiryAnswer {
    /// An existing sense attached to a concept.
    Sense(SenseId),
    /// A new concept, added to memory before the argument is re-asked.
    Definition(ConceptDefinition),
}

pub(crate) enum Advance {
    Done(Vec<AnnotatedTree>),
    Blocked,
}

/// Enumeration state of the sense cross-product over the NP arguments.
/// `partial` is the tree list after the first `next` arguments.
#[derive(Debug, Clone)]
pub(crate) struct CombinationRun {
    tree: UtteranceTree,
    args: Vec<usize>,
    next: usize,
    partial: Vec<AnnotatedTree>,
    known: Vec<Vec<SenseId>>,
    overrides: BTreeMap<usize, Vec<SenseId>>,
    inquired: BTreeSet<usize>,
}

impl CombinationRun {
    pub(crate) fn new(tree: &UtteranceTree) -> Self {
        let args = tree
            .constituents
            .iter()
            .enumerate()
            .filter(|(_, c)| c.category == Category::NP)
            .map(|(i, _)| i)
            .collect();
        Self {
            tree: tree.clone(),
            args,
            next: 0,
            partial: vec![AnnotatedTree::bare(tree)],
            known: Vec::new(),
            overrides: BTreeMap::new(),
            inquired: BTreeSet::new(),
        }
    }

    fn known_for(&self, k: usize, store: &MemoryStore, language: &LanguageId) -> Vec<SenseId> {
        match self.overrides.get(&k) {
            Some(s) => s.clone(),
            None => store.ask(&self.tree.constituents[self.args[k]].tokens, language),
        }
    }

    pub(crate) fn advance(&mut self, store: &MemoryStore, language: &LanguageId) -> Advance {
        while self.next < self.args.len() {
            let k = self.next;
            let known = self.known_for(k, store, language);
            if known.is_empty() {
                self.inquired.insert(k);
                return Advance::Blocked;
            }
            let position = self.args[k];
            let mut temp = Vec::with_capacity(self.partial.len() * known.len());
            for ti in &self.partial {
                for s in &known {
                    let mut copy = ti.clone();
                    copy.arg_senses.insert(position, s.clone());
                    temp.push(copy);
                }
            }
            self.partial = temp;
            self.known.push(known);
            self.next += 1;
        }
        Advance::Done(self.partial.clone())
    }

    pub(crate) fn blocked_position(&self) -> usize {
        self.args[self.next]
    }

    pub(crate) fn inquiry(&self, store: &MemoryStore, language: &LanguageId) -> PendingInquiry {
        let constituent = &self.tree.constituents[self.blocked_position()];
        let memory = store.read();
        let candidate_definitions = memory
            .grounded_senses(&constituent.head, language)
            .into_iter()
            .filter_map(|sid| {
                let sense = memory.sense(&sid)?;
                Some(SenseSuggestion {
                    concept: memory.owner_of(&sid)?.clone(),
                    lemma: sense.lemma.clone(),
                    gloss: sense.gloss.clone(),
                    sense: sid,
                })
            })
            .collect();
        PendingInquiry {
            argument_text: constituent.text(),
            position: self.blocked_position(),
            language: language.clone(),
            candidate_definitions,
        }
    }

    /// Apply an answer for the blocked argument. On error nothing changed.
    pub(crate) fn answer(
        &mut self,
        store: &MemoryStore,
        language: &LanguageId,
        answer: &InquiryAnswer,
    ) -> Result<(), String> {
        let k = self.next;
        match answer {
            InquiryAnswer::Sense(sid) => {
                let memory = store.read();
                let sense = memory.sense(sid).ok_or_else(|| format!("unknown sense `{sid}`"))?;
                if &sense.language != language {
                    return Err(format!(
                        "sense `{sid}` is in language `{}`, expected `{language}`",
                        sense.language
                    ));
                }
                if memory.owner_of(sid).is_none() {
                    return Err(format!("sense `{sid}` is not attached to any concept"));
                }
                drop(memory);
                self.overrides.insert(k, vec![sid.clone()]);
            }
            InquiryAnswer::Definition(def) => {
                if &def.language != language {
                    return Err(format!(
                        "definition is in language `{}`, expected `{language}`",
                        def.language
                    ));
                }
                store.mutate().add_concept_definition(def).map_err(|e| e.to_string())?;
                // Earlier arguments must still see what a fresh run would.
                let stale = (0..k).any(|i| !self.overrides.contains_key(&i) && self.known_for(i, store, language) != self.known[i]);
                if stale {
                    self.next = 0;
                    self.partial = vec![AnnotatedTree::bare(&self.tree)];
                    self.known.clear();
                }
            }
        }
        Ok(())
    }

    /// Arguments grounded so far plus the one currently blocked, if any.
    pub(crate) fn arguments(&self) -> impl Iterator<Item = (usize, usize, &[SenseId], bool)> + '_ {
        let seen = (self.next + 1).min(self.args.len());
        self.args.iter().enumerate().take(seen).map(|(k, pos)| {
            let known = self.known.get(k).map(Vec::as_slice).unwrap_or(&[]);
            (k, *pos, known, self.inquired.contains(&k))
        })
    }

    pub(crate) fn tree(&self) -> &UtteranceTree {
        &self.tree
    }
}
