use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::error::{CycleKind, KbError, MutationError};
use super::model::*;
use super::records::{FrameSetRecord, Record};
use crate::ids::*;
use crate::language::{content_tokens, head_index, normalize_lemma, LanguageId};

/// File that runtime-created concepts are written back to.
pub const LEARNED_FILE: &str = "learned.jsonl";

/// Result of a pure lexical lookup of a phrase.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Lookup {
    /// Grounded senses whose lemma is the whole phrase.
    Exact(Vec<SenseId>),
    /// No exact match; every content token grounds. `tuples` is the
    /// cross-product of grounded constituent senses, in token order.
    Compound { head: usize, tuples: Vec<Vec<SenseId>> },
    Unknown,
}

/// A user-provided description of a concept missing from memory.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConceptDefinition {
    pub lemma: String,
    pub language: LanguageId,
    pub concept_type: NodeId,
    #[serde(default)]
    pub relations: Vec<ConceptRelation>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gloss: Option<String>,
}

/// The agent's memory: O-layer concepts, L-layer senses, frames and the
/// strategies that make verb senses actionable.
#[derive(Debug, Clone, Default)]
pub struct Memory {
    languages: BTreeSet<LanguageId>,
    senses: BTreeMap<SenseId, Sense>,
    concepts: BTreeMap<NodeId, OLNode>,
    frames: BTreeMap<FrameId, Frame>,
    framesets: BTreeMap<FrameSetId, FrameSet>,
    alphas: BTreeMap<AlphaId, AlphaStructure>,
    strategies: BTreeMap<StrategyId, ExecutionStrategy>,
    competencies: BTreeMap<CompetencyId, CompetencyDescriptor>,

    lemma_index: BTreeMap<(LanguageId, String), BTreeSet<SenseId>>,
    sense_owner: BTreeMap<SenseId, NodeId>,
    alpha_by_sense: BTreeMap<SenseId, AlphaId>,
    compound_index: BTreeMap<BTreeSet<NodeId>, NodeId>,
    learned_nodes: Vec<NodeId>,
    learned_senses: Vec<SenseId>,
    dangling_frames: Vec<(FrameSetId, FrameId)>,
}

impl Memory {
    pub fn empty(languages: impl IntoIterator<Item = LanguageId>) -> Self {
        Self {
            languages: languages.into_iter().collect(),
            ..Self::default()
        }
    }

    /// Build a memory from parsed records, failing with every integrity
    /// problem found.
    pub fn from_records(
        languages: impl IntoIterator<Item = LanguageId>,
        records: impl IntoIterator<Item = Record>,
    ) -> Result<Self, Vec<KbError>> {
        let (memory, errors) = Self::assemble(languages, records.into_iter().map(|r| (r, false)));
        if errors.is_empty() {
            Ok(memory)
        } else {
            Err(errors)
        }
    }

    /// Like [`from_records`](Self::from_records) but always returns the
    /// (possibly inconsistent) memory together with the findings. The flag
    /// on each record marks it as previously learned.
    pub(crate) fn assemble(
        languages: impl IntoIterator<Item = LanguageId>,
        records: impl IntoIterator<Item = (Record, bool)>,
    ) -> (Self, Vec<KbError>) {
        let mut m = Memory::empty(languages);
        let mut errors = Vec::new();
        let mut pending_framesets = Vec::new();

        for (record, learned) in records {
            let kind = record.kind();
            let id = record.id().to_owned();
            let duplicate = match record {
                Record::Sense(s) => {
                    if learned {
                        m.learned_senses.push(s.id.clone());
                    }
                    insert_unique(&mut m.senses, s.id.clone(), s)
                }
                Record::Concept(c) => {
                    if learned {
                        m.learned_nodes.push(c.id.clone());
                    }
                    insert_unique(&mut m.concepts, c.id.clone(), c)
                }
                Record::Frame(f) => insert_unique(&mut m.frames, f.id.clone(), f),
                Record::FrameSet(fs) => {
                    let dup = pending_framesets.iter().any(|p: &FrameSetRecord| p.id == fs.id);
                    if !dup {
                        pending_framesets.push(fs);
                    }
                    dup
                }
                Record::Alpha(a) => insert_unique(&mut m.alphas, a.id.clone(), a),
                Record::Strategy(s) => insert_unique(&mut m.strategies, s.id.clone(), s),
                Record::Competency(c) => insert_unique(&mut m.competencies, c.id.clone(), c),
            };
            if duplicate {
                errors.push(KbError::DuplicateId { kind, id });
            }
        }

        for fs in pending_framesets {
            let mut frames = Vec::with_capacity(fs.frames.len());
            for fid in &fs.frames {
                match m.frames.get(fid) {
                    Some(f) => frames.push(f.clone()),
                    None => m.dangling_frames.push((fs.id.clone(), fid.clone())),
                }
            }
            let verb_lemma = normalize_lemma(&fs.verb_lemma);
            m.framesets.insert(
                fs.id.clone(),
                FrameSet {
                    id: fs.id,
                    verb_lemma,
                    language: fs.language,
                    frames,
                    verb_senses: fs.verb_senses,
                },
            );
        }

        m.rebuild_indexes();
        errors.extend(m.integrity_findings());
        (m, errors)
    }

    fn rebuild_indexes(&mut self) {
        self.lemma_index.clear();
        self.sense_owner.clear();
        self.alpha_by_sense.clear();
        self.compound_index.clear();
        for s in self.senses.values() {
            self.lemma_index
                .entry((s.language.clone(), normalize_lemma(&s.lemma)))
                .or_default()
                .insert(s.id.clone());
        }
        for node in self.concepts.values() {
            for (lang, ids) in &node.l_layer {
                for sid in ids {
                    let attachable = self.senses.get(sid).is_some_and(|s| &s.language == lang);
                    if attachable {
                        self.sense_owner.entry(sid.clone()).or_insert_with(|| node.id.clone());
                    }
                }
            }
            if node.is_compound() {
                self.compound_index
                    .entry(node.compound_of.iter().cloned().collect())
                    .or_insert_with(|| node.id.clone());
            }
        }
        for a in self.alphas.values() {
            self.alpha_by_sense
                .entry(a.verb_sense.clone())
                .or_insert_with(|| a.id.clone());
        }
    }

    // ----- queries ------------------------------------------------------

    pub fn languages(&self) -> impl Iterator<Item = &LanguageId> {
        self.languages.iter()
    }

    pub fn has_language(&self, language: &LanguageId) -> bool {
        self.languages.contains(language)
    }

    pub fn sense(&self, id: &SenseId) -> Option<&Sense> {
        self.senses.get(id)
    }

    pub fn senses(&self) -> impl Iterator<Item = &Sense> {
        self.senses.values()
    }

    pub fn concept(&self, id: &NodeId) -> Option<&OLNode> {
        self.concepts.get(id)
    }

    pub fn concepts(&self) -> impl Iterator<Item = &OLNode> {
        self.concepts.values()
    }

    pub fn concept_count(&self) -> usize {
        self.concepts.len()
    }

    pub fn frame(&self, id: &FrameId) -> Option<&Frame> {
        self.frames.get(id)
    }

    pub fn frameset(&self, id: &FrameSetId) -> Option<&FrameSet> {
        self.framesets.get(id)
    }

    pub fn alpha(&self, id: &AlphaId) -> Option<&AlphaStructure> {
        self.alphas.get(id)
    }

    pub fn strategy(&self, id: &StrategyId) -> Option<&ExecutionStrategy> {
        self.strategies.get(id)
    }

    pub fn competencies(&self) -> impl Iterator<Item = &CompetencyDescriptor> {
        self.competencies.values()
    }

    /// The concept whose L layer holds `sense`, if any.
    pub fn owner_of(&self, sense: &SenseId) -> Option<&NodeId> {
        self.sense_owner.get(sense)
    }

    /// Every lexicon sense with this lemma, attached to a concept or not.
    pub fn senses_with_lemma(&self, lemma: &str, language: &LanguageId) -> Vec<&Sense> {
        self.lemma_index
            .get(&(language.clone(), normalize_lemma(lemma)))
            .into_iter()
            .flatten()
            .filter_map(|id| self.senses.get(id))
            .collect()
    }

    /// Senses with this lemma that are attached to a known concept.
    pub fn grounded_senses(&self, lemma: &str, language: &LanguageId) -> Vec<SenseId> {
        self.senses_with_lemma(lemma, language)
            .into_iter()
            .filter(|s| self.sense_owner.contains_key(&s.id))
            .map(|s| s.id.clone())
            .collect()
    }

    /// Pure lexical lookup; never mutates memory.
    pub fn lookup<S: AsRef<str>>(&self, phrase: &[S], language: &LanguageId) -> Lookup {
        let content: Vec<String> = content_tokens(phrase, language)
            .iter()
            .map(|t| t.to_lowercase())
            .collect();
        if content.is_empty() {
            return Lookup::Unknown;
        }
        let exact = self.grounded_senses(&content.join(" "), language);
        if !exact.is_empty() {
            return Lookup::Exact(exact);
        }
        if content.len() == 1 {
            return Lookup::Unknown;
        }
        let per_token: Vec<Vec<SenseId>> = content
            .iter()
            .map(|t| self.grounded_senses(t, language))
            .collect();
        if per_token.iter().any(Vec::is_empty) {
            return Lookup::Unknown;
        }
        let head = head_index(&content, language).unwrap_or(content.len() - 1);
        Lookup::Compound {
            head,
            tuples: cartesian(&per_token),
        }
    }

    /// Number of raw (lexicon-level) sense readings of a phrase: the exact
    /// lemma count for single words, the product of per-word counts for
    /// multiword phrases.
    pub fn raw_sense_readings<S: AsRef<str>>(&self, phrase: &[S], language: &LanguageId) -> u64 {
        let content = content_tokens(phrase, language);
        match content.len() {
            0 => 0,
            1 => self.senses_with_lemma(&content[0], language).len() as u64,
            _ => content
                .iter()
                .map(|t| self.senses_with_lemma(t, language).len() as u64)
                .product(),
        }
    }

    /// FrameSets of a verb lemma in a language, ordered by id.
    pub fn framesets_of_verb(&self, verb: &str, language: &LanguageId) -> Vec<&FrameSet> {
        let verb = normalize_lemma(verb);
        self.framesets
            .values()
            .filter(|fs| fs.verb_lemma == verb && &fs.language == language)
            .collect()
    }

    /// Lemmas that have at least one FrameSet in `language`.
    pub fn verb_lemmas(&self, language: &LanguageId) -> BTreeSet<String> {
        self.framesets
            .values()
            .filter(|fs| &fs.language == language)
            .map(|fs| fs.verb_lemma.clone())
            .collect()
    }

    pub fn find_alpha(&self, sense: &SenseId) -> Option<&AlphaStructure> {
        self.alpha_by_sense.get(sense).and_then(|id| self.alphas.get(id))
    }

    /// Typification chain starting at `node` (inclusive).
    pub fn typification_chain(&self, node: &NodeId) -> Vec<&NodeId> {
        let mut chain = Vec::new();
        let mut seen = BTreeSet::new();
        let mut current = self.concepts.get(node).map(|n| &n.id);
        while let Some(id) = current {
            if !seen.insert(id) {
                break;
            }
            chain.push(id);
            current = self
                .concepts
                .get(id)
                .and_then(|n| n.o_layer.concept_type.as_ref())
                .and_then(|t| self.concepts.get(t).map(|n| &n.id));
        }
        chain
    }

    /// Whether `ancestor` lies on `node`'s typification chain (reflexive).
    pub fn isa_descendant(&self, node: &NodeId, ancestor: &NodeId) -> bool {
        self.typification_chain(node).into_iter().any(|n| n == ancestor)
    }

    /// Whether `node`, or any concept it is typified by, carries a relation
    /// of `kind` whose target is a descendant of `target`.
    pub fn has_relation(&self, node: &NodeId, kind: &str, target: &NodeId) -> bool {
        self.typification_chain(node).into_iter().any(|n| {
            self.concepts[n]
                .o_layer
                .relations
                .iter()
                .any(|r| r.kind == kind && self.isa_descendant(&r.target, target))
        })
    }

    // ----- mutations ----------------------------------------------------

    /// Create (or find) the concept combining the concepts behind
    /// `constituents`. `head` indexes the constituent that types the
    /// compound. Compounds are identified by their constituent node set.
    pub fn create_compound_concept(
        &mut self,
        constituents: &[SenseId],
        head: usize,
    ) -> Result<NodeId, MutationError> {
        if constituents.len() < 2 {
            return Err(MutationError::TooFewConstituents(constituents.len()));
        }
        let mut nodes = Vec::with_capacity(constituents.len());
        let mut lemmas = Vec::with_capacity(constituents.len());
        let mut language: Option<LanguageId> = None;
        for sid in constituents {
            let sense = self
                .senses
                .get(sid)
                .ok_or_else(|| MutationError::UnknownSense(sid.clone()))?;
            let owner = self
                .sense_owner
                .get(sid)
                .ok_or_else(|| MutationError::ConstituentUnknown(sid.clone()))?;
            match &language {
                None => language = Some(sense.language.clone()),
                Some(l) if *l != sense.language => return Err(MutationError::MixedLanguages),
                Some(_) => {}
            }
            nodes.push(owner.clone());
            lemmas.push(normalize_lemma(&sense.lemma));
        }
        let language = language.expect("at least two constituents");
        let lemma = lemmas.join(" ");
        let head = head.min(nodes.len() - 1);
        let key: BTreeSet<NodeId> = nodes.iter().cloned().collect();

        let node_id = match self.compound_index.get(&key) {
            Some(existing) => existing.clone(),
            None => {
                let base = nodes.iter().map(NodeId::as_str).collect::<Vec<_>>().join("+");
                let id = self.fresh_node_id(&base);
                let relations = nodes
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| *i != head)
                    .map(|(_, n)| {
                        let kind = self.concepts[n]
                            .o_layer
                            .concept_type
                            .as_ref()
                            .map(|t| t.as_str().to_owned())
                            .unwrap_or_else(|| "modifier".to_owned());
                        ConceptRelation::new(kind, n.clone())
                    })
                    .collect();
                let node = OLNode {
                    id: id.clone(),
                    o_layer: OLayer {
                        concept_type: Some(nodes[head].clone()),
                        relations,
                    },
                    l_layer: BTreeMap::new(),
                    compound_of: nodes.clone(),
                };
                self.concepts.insert(id.clone(), node);
                self.compound_index.insert(key, id.clone());
                self.learned_nodes.push(id.clone());
                id
            }
        };

        let has_sense = self.concepts[&node_id].senses_in(&language).iter().any(|s| {
            self.senses
                .get(s)
                .is_some_and(|s| normalize_lemma(&s.lemma) == lemma)
        });
        if !has_sense {
            let gloss = format!(
                "combination of {}",
                nodes.iter().map(NodeId::as_str).collect::<Vec<_>>().join(" and ")
            );
            self.attach_new_sense(&node_id, &language, &lemma, gloss);
        }
        Ok(node_id)
    }

    /// Add an atomic concept described by the user, with a fresh sense.
    /// Redefining an existing lemma creates a homonym.
    pub fn add_concept_definition(
        &mut self,
        definition: &ConceptDefinition,
    ) -> Result<NodeId, MutationError> {
        let lemma = normalize_lemma(&definition.lemma);
        if lemma.is_empty() {
            return Err(MutationError::EmptyLemma);
        }
        if !self.languages.contains(&definition.language) {
            return Err(MutationError::UnregisteredLanguage(definition.language.to_string()));
        }
        if !self.concepts.contains_key(&definition.concept_type) {
            return Err(MutationError::UnknownType(definition.concept_type.clone()));
        }
        if let Some(bad) = definition
            .relations
            .iter()
            .find(|r| !self.concepts.contains_key(&r.target))
        {
            return Err(MutationError::UnknownRelationTarget(bad.target.clone()));
        }
        let id = self.fresh_node_id(&lemma.replace(' ', "_"));
        let node = OLNode {
            id: id.clone(),
            o_layer: OLayer {
                concept_type: Some(definition.concept_type.clone()),
                relations: definition.relations.clone(),
            },
            l_layer: BTreeMap::new(),
            compound_of: Vec::new(),
        };
        self.concepts.insert(id.clone(), node);
        self.learned_nodes.push(id.clone());
        let gloss = definition
            .gloss
            .clone()
            .unwrap_or_else(|| format!("user-defined {}", definition.concept_type));
        self.attach_new_sense(&id, &definition.language, &lemma, gloss);
        Ok(id)
    }

    fn attach_new_sense(&mut self, node: &NodeId, language: &LanguageId, lemma: &str, gloss: String) {
        let base = format!("{node}@{language}");
        let mut sid = SenseId::new(base.clone());
        let mut n = 2;
        while self.senses.contains_key(&sid) {
            sid = SenseId::new(format!("{base}#{n}"));
            n += 1;
        }
        let sense = Sense {
            id: sid.clone(),
            language: language.clone(),
            lemma: lemma.to_owned(),
            part_of_speech: PartOfSpeech::Noun,
            gloss,
            relations: Vec::new(),
        };
        self.lemma_index
            .entry((language.clone(), lemma.to_owned()))
            .or_default()
            .insert(sid.clone());
        self.senses.insert(sid.clone(), sense);
        self.sense_owner.insert(sid.clone(), node.clone());
        self.concepts
            .get_mut(node)
            .expect("node exists")
            .l_layer
            .entry(language.clone())
            .or_default()
            .push(sid.clone());
        self.learned_senses.push(sid);
    }

    fn fresh_node_id(&self, base: &str) -> NodeId {
        let mut id = NodeId::new(base);
        let mut n = 2;
        while self.concepts.contains_key(&id) {
            id = NodeId::new(format!("{base}#{n}"));
            n += 1;
        }
        id
    }

    /// Records for every concept and sense created at runtime (or loaded
    /// from a previous save), senses first. Senses added to authored nodes
    /// are in-memory only.
    pub fn learned_records(&self) -> Vec<Record> {
        let senses = self
            .learned_senses
            .iter()
            .filter_map(|id| self.senses.get(id))
            .map(|s| Record::Sense(s.clone()));
        let nodes = self
            .learned_nodes
            .iter()
            .filter_map(|id| self.concepts.get(id))
            .map(|n| Record::Concept(n.clone()));
        senses.chain(nodes).collect()
    }

    pub fn has_learned(&self) -> bool {
        !self.learned_nodes.is_empty() || !self.learned_senses.is_empty()
    }

    // ----- integrity ------------------------------------------------------

    /// Full referential-integrity sweep over every record.
    pub fn integrity_findings(&self) -> Vec<KbError> {
        let mut out = Vec::new();
        self.check_senses(&mut out);
        self.check_concepts(&mut out);
        self.check_frames(&mut out);
        self.check_framesets(&mut out);
        self.check_alphas(&mut out);
        self.check_strategies(&mut out);
        self.check_competencies(&mut out);
        out
    }

    fn check_language(&self, lang: &LanguageId, out: &mut Vec<KbError>) {
        if !self.languages.contains(lang) {
            out.push(KbError::UnregisteredLanguage(lang.to_string()));
        }
    }

    fn check_senses(&self, out: &mut Vec<KbError>) {
        for s in self.senses.values() {
            self.check_language(&s.language, out);
            for (_, target) in &s.relations {
                if !self.senses.contains_key(target) {
                    out.push(unresolved("sense", &s.id, "relations", target));
                }
            }
        }
        // Hypernym edges point child -> parent; hyponym edges are reversed.
        let mut parents: BTreeMap<&SenseId, Vec<&SenseId>> = BTreeMap::new();
        for s in self.senses.values() {
            for (kind, target) in &s.relations {
                if !self.senses.contains_key(target) {
                    continue;
                }
                match kind {
                    SenseRelationKind::Hypernym => parents.entry(&s.id).or_default().push(target),
                    SenseRelationKind::Hyponym => parents.entry(target).or_default().push(&s.id),
                    SenseRelationKind::Synonym => {}
                }
            }
        }
        for cycle in find_cycles(&parents) {
            out.push(KbError::CycleDetected {
                kind: CycleKind::Hypernym,
                path: cycle,
            });
        }
    }

    fn check_concepts(&self, out: &mut Vec<KbError>) {
        let mut owners: BTreeMap<&SenseId, &NodeId> = BTreeMap::new();
        for node in self.concepts.values() {
            for (lang, ids) in &node.l_layer {
                self.check_language(lang, out);
                let mut lemmas = BTreeSet::new();
                for sid in ids {
                    let Some(sense) = self.senses.get(sid) else {
                        out.push(unresolved("concept", &node.id, "l_layer", sid));
                        continue;
                    };
                    if &sense.language != lang {
                        out.push(invalid(
                            "concept",
                            &node.id,
                            format!("sense `{sid}` is in language `{}`, listed under `{lang}`", sense.language),
                        ));
                    }
                    if !lemmas.insert(normalize_lemma(&sense.lemma)) {
                        out.push(invalid(
                            "concept",
                            &node.id,
                            format!("two senses with lemma `{}` in `{lang}`", sense.lemma),
                        ));
                    }
                    if let Some(prev) = owners.insert(sid, &node.id) {
                        out.push(invalid(
                            "concept",
                            &node.id,
                            format!("sense `{sid}` already attached to `{prev}`"),
                        ));
                    }
                }
            }
            if let Some(t) = &node.o_layer.concept_type {
                if !self.concepts.contains_key(t) {
                    out.push(unresolved("concept", &node.id, "o_layer.concept_type", t));
                }
            }
            for r in &node.o_layer.relations {
                if !self.concepts.contains_key(&r.target) {
                    out.push(unresolved("concept", &node.id, "o_layer.relations", &r.target));
                }
            }
            if node.is_compound() {
                if node.compound_of.len() < 2 {
                    out.push(invalid("concept", &node.id, "compound_of needs at least two nodes".into()));
                }
                for c in &node.compound_of {
                    if !self.concepts.contains_key(c) {
                        out.push(unresolved("concept", &node.id, "compound_of", c));
                    }
                }
            }
        }
        let parents: BTreeMap<&NodeId, Vec<&NodeId>> = self
            .concepts
            .values()
            .filter_map(|n| {
                let t = n.o_layer.concept_type.as_ref()?;
                self.concepts.contains_key(t).then(|| (&n.id, vec![t]))
            })
            .collect();
        for cycle in find_cycles(&parents) {
            out.push(KbError::CycleDetected {
                kind: CycleKind::Typification,
                path: cycle,
            });
        }
    }

    fn check_frames(&self, out: &mut Vec<KbError>) {
        for f in self.frames.values() {
            if f.structural_pattern.len() != f.semantic_roles.len() {
                out.push(invalid(
                    "frame",
                    &f.id,
                    "structural_pattern and semantic_roles differ in length".into(),
                ));
                continue;
            }
            let verbs: Vec<usize> = f
                .structural_pattern
                .iter()
                .enumerate()
                .filter(|(_, c)| **c == Category::V)
                .map(|(i, _)| i)
                .collect();
            match verbs.as_slice() {
                [v] if f.semantic_roles[*v].is_verb() => {}
                [_] => out.push(invalid("frame", &f.id, "verb role must sit at the V position".into())),
                _ => out.push(invalid("frame", &f.id, "exactly one V position required".into())),
            }
        }
    }

    fn check_framesets(&self, out: &mut Vec<KbError>) {
        for fs in self.framesets.values() {
            self.check_language(&fs.language, out);
            if fs.frames.is_empty() {
                out.push(invalid("frameset", &fs.id, "at least one frame required".into()));
            }
            for sid in &fs.verb_senses {
                match self.senses.get(sid) {
                    None => out.push(unresolved("frameset", &fs.id, "verb_senses", sid)),
                    Some(s) => {
                        if s.part_of_speech != PartOfSpeech::Verb
                            || normalize_lemma(&s.lemma) != fs.verb_lemma
                            || s.language != fs.language
                        {
                            out.push(invalid(
                                "frameset",
                                &fs.id,
                                format!("`{sid}` is not a `{}` verb sense in `{}`", fs.verb_lemma, fs.language),
                            ));
                        }
                    }
                }
            }
        }
        for (fsid, missing) in &self.dangling_frames {
            out.push(unresolved("frameset", fsid, "frames", missing));
        }
    }

    fn check_alphas(&self, out: &mut Vec<KbError>) {
        let mut by_sense: BTreeMap<&SenseId, &AlphaId> = BTreeMap::new();
        for a in self.alphas.values() {
            match self.senses.get(&a.verb_sense) {
                None => out.push(unresolved("alpha", &a.id, "verb_sense", &a.verb_sense)),
                Some(s) if s.part_of_speech != PartOfSpeech::Verb => out.push(invalid(
                    "alpha",
                    &a.id,
                    format!("`{}` is not a verb sense", a.verb_sense),
                )),
                Some(_) => {}
            }
            if let Some(prev) = by_sense.insert(&a.verb_sense, &a.id) {
                out.push(invalid(
                    "alpha",
                    &a.id,
                    format!("sense `{}` already has alpha-structure `{prev}`", a.verb_sense),
                ));
            }
            if a.strategies.is_empty() {
                out.push(invalid("alpha", &a.id, "at least one strategy required".into()));
            }
            for s in &a.strategies {
                if !self.strategies.contains_key(s) {
                    out.push(unresolved("alpha", &a.id, "strategies", s));
                }
            }
        }
    }

    fn check_strategies(&self, out: &mut Vec<KbError>) {
        let frame_roles: BTreeSet<&Role> = self.frames.values().flat_map(|f| &f.semantic_roles).collect();
        for es in self.strategies.values() {
            let mut seen = BTreeSet::new();
            for c in &es.required_competencies {
                if !seen.insert(c) {
                    out.push(invalid("strategy", &es.id, format!("competency `{c}` required twice")));
                }
                if !self.competencies.contains_key(c) {
                    out.push(unresolved("strategy", &es.id, "required_competencies", c));
                }
            }
            for step in &es.plan_template {
                match self.competencies.get(&step.competency) {
                    None => out.push(unresolved("strategy", &es.id, "plan_template.competency", &step.competency)),
                    Some(c) if c.action(&step.action).is_none() => out.push(invalid(
                        "strategy",
                        &es.id,
                        format!("competency `{}` has no action `{}`", c.id, step.action),
                    )),
                    Some(_) => {}
                }
                for role in &step.bindings {
                    if !frame_roles.contains(role) {
                        out.push(invalid("strategy", &es.id, format!("role `{role}` appears in no frame")));
                    }
                }
            }
            for r in &es.restrictions {
                if !frame_roles.contains(&r.role) {
                    out.push(invalid("strategy", &es.id, format!("restriction role `{}` appears in no frame", r.role)));
                }
                match &r.predicate {
                    Predicate::IsA(t) | Predicate::HasRelation(_, t) => {
                        if !self.concepts.contains_key(t) {
                            out.push(unresolved("strategy", &es.id, "restrictions", t));
                        }
                    }
                    Predicate::CompetencyAvailable(c) => {
                        if !self.competencies.contains_key(c) {
                            out.push(unresolved("strategy", &es.id, "restrictions", c));
                        }
                    }
                }
            }
        }
    }

    fn check_competencies(&self, out: &mut Vec<KbError>) {
        for c in self.competencies.values() {
            let mut names = BTreeSet::new();
            for a in &c.actions {
                if !names.insert(&a.name) {
                    out.push(invalid("competency", &c.id, format!("action `{}` declared twice", a.name)));
                }
            }
        }
    }
}

fn insert_unique<K: Ord, V>(map: &mut BTreeMap<K, V>, key: K, value: V) -> bool {
    if map.contains_key(&key) {
        return true;
    }
    map.insert(key, value);
    false
}

fn unresolved(kind: &str, id: impl std::fmt::Display, field: &'static str, target: impl std::fmt::Display) -> KbError {
    KbError::UnresolvedReference {
        record: format!("{kind} `{id}`"),
        field,
        target: target.to_string(),
    }
}

fn invalid(kind: &str, id: impl std::fmt::Display, reason: String) -> KbError {
    KbError::InvalidRecord {
        record: format!("{kind} `{id}`"),
        reason,
    }
}

pub(crate) fn cartesian(lists: &[Vec<SenseId>]) -> Vec<Vec<SenseId>> {
    let mut out: Vec<Vec<SenseId>> = vec![Vec::new()];
    for list in lists {
        let mut next = Vec::with_capacity(out.len() * list.len());
        for prefix in &out {
            for item in list {
                let mut t = prefix.clone();
                t.push(item.clone());
                next.push(t);
            }
        }
        out = next;
    }
    out
}

/// Cycles in a parent graph, each reported once, rotated to start at its
/// smallest member.
fn find_cycles<K: Ord + std::fmt::Display>(parents: &BTreeMap<&K, Vec<&K>>) -> Vec<Vec<String>> {
    #[derive(Clone, Copy, PartialEq)]
    enum Mark {
        Active,
        Done,
    }
    fn visit<'a, K: Ord + std::fmt::Display>(
        node: &'a K,
        parents: &BTreeMap<&'a K, Vec<&'a K>>,
        marks: &mut BTreeMap<&'a K, Mark>,
        stack: &mut Vec<&'a K>,
        found: &mut BTreeSet<Vec<String>>,
    ) {
        marks.insert(node, Mark::Active);
        stack.push(node);
        for &p in parents.get(node).into_iter().flatten() {
            match marks.get(p) {
                Some(Mark::Active) => {
                    let start = stack.iter().position(|n| *n == p).expect("active node on stack");
                    let mut cycle: Vec<String> = stack[start..].iter().map(|n| n.to_string()).collect();
                    let min = cycle
                        .iter()
                        .enumerate()
                        .min_by(|a, b| a.1.cmp(b.1))
                        .map(|(i, _)| i)
                        .unwrap_or(0);
                    cycle.rotate_left(min);
                    let first = cycle[0].clone();
                    cycle.push(first);
                    found.insert(cycle);
                }
                Some(Mark::Done) => {}
                None => visit(p, parents, marks, stack, found),
            }
        }
        stack.pop();
        marks.insert(node, Mark::Done);
    }

    let mut marks = BTreeMap::new();
    let mut found = BTreeSet::new();
    for &node in parents.keys() {
        if !marks.contains_key(node) {
            visit(node, parents, &mut marks, &mut Vec::new(), &mut found);
        }
    }
    found.into_iter().collect()
}
