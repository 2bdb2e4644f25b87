//! Seeded random knowledge bases with an independent model of what the
//! interpreter should produce for them.
#![allow(dead_code)]

use std::collections::BTreeMap;

use olframe_core::kb::{
    AlphaStructure, CompetencyAction, CompetencyDescriptor, ConceptRelation, ExecutionStrategy, Frame,
    FrameSetRecord, OLNode, OLayer, PartOfSpeech, Predicate, Record, Restriction, Sense, TemplateStep,
};
use olframe_core::kb::Category;
use olframe_core::{LanguageId, NodeId, Role, SenseId};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const WORDS: &[&str] = &["zib", "quax", "mol", "trell", "vask", "nurp", "glim", "dorp"];
pub const VERB: &str = "act";

#[derive(Debug, Clone)]
pub struct RandomKb {
    pub records: Vec<Record>,
    pub utterance: String,
    /// Content words of each noun phrase, in utterance order.
    pub nps: Vec<Vec<String>>,
    /// Grounded nodes per word, in sense-id order.
    pub grounded: BTreeMap<String, Vec<NodeId>>,
    /// Type parent of every authored node.
    pub parent: BTreeMap<NodeId, NodeId>,
    pub types: Vec<NodeId>,
    /// Verb senses with an alpha, in id order, with their strategies.
    pub alphas: Vec<Vec<ExecutionStrategy>>,
    pub available: BTreeMap<String, bool>,
}

fn en() -> LanguageId {
    LanguageId::en()
}

fn sense(id: &str, lemma: &str, pos: PartOfSpeech) -> Sense {
    Sense {
        id: SenseId::from(id),
        language: en(),
        lemma: lemma.to_owned(),
        part_of_speech: pos,
        gloss: format!("reading {id}"),
        relations: Vec::new(),
    }
}

fn node(id: &str, typ: Option<&NodeId>, senses: Vec<SenseId>, relations: Vec<ConceptRelation>) -> OLNode {
    let mut l_layer = BTreeMap::new();
    if !senses.is_empty() {
        l_layer.insert(en(), senses);
    }
    OLNode {
        id: NodeId::from(id),
        o_layer: OLayer {
            concept_type: typ.cloned(),
            relations,
        },
        l_layer,
        compound_of: Vec::new(),
    }
}

/// `unknown_rate` is the chance (in percent) that a word has no grounded
/// sense at all.
pub fn random_kb(seed: u64, unknown_rate: u32) -> RandomKb {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut records = Vec::new();
    let mut parent = BTreeMap::new();

    let n_types = rng.gen_range(2..=4);
    let mut types: Vec<NodeId> = Vec::new();
    for t in 0..n_types {
        let id = NodeId::from(format!("type{t}"));
        let p = if t > 0 && rng.gen_bool(0.6) {
            Some(types[rng.gen_range(0..t)].clone())
        } else {
            None
        };
        if let Some(p) = &p {
            parent.insert(id.clone(), p.clone());
        }
        records.push(Record::Concept(node(id.as_str(), p.as_ref(), Vec::new(), Vec::new())));
        types.push(id);
    }

    let n_words = rng.gen_range(2..=WORDS.len());
    let mut words: Vec<&str> = WORDS.to_vec();
    words.shuffle(&mut rng);
    words.truncate(n_words);
    let mut grounded = BTreeMap::new();
    for w in &words {
        let readings = rng.gen_range(1..=4);
        let known = if rng.gen_range(0..100) < unknown_rate {
            0
        } else {
            rng.gen_range(1..=readings.min(3))
        };
        let mut nodes = Vec::new();
        for r in 0..readings {
            let sid = format!("{w}.n.{:02}", r + 1);
            records.push(Record::Sense(sense(&sid, w, PartOfSpeech::Noun)));
            if r < known {
                let nid = NodeId::from(format!("{w}_{r}"));
                let typ = types[rng.gen_range(0..types.len())].clone();
                parent.insert(nid.clone(), typ.clone());
                records.push(Record::Concept(node(nid.as_str(), Some(&typ), vec![SenseId::from(sid)], Vec::new())));
                nodes.push(nid);
            }
        }
        grounded.insert((*w).to_owned(), nodes);
    }

    let mut available = BTreeMap::new();
    for c in 0..2 {
        let id = format!("comp{c}");
        let on = rng.gen_bool(0.75);
        available.insert(id.clone(), on);
        records.push(Record::Competency(CompetencyDescriptor {
            id: id.as_str().into(),
            name: id.clone(),
            actions: vec![CompetencyAction {
                name: "run".into(),
                parameters: vec![Role::from("Theme")],
            }],
            results: vec!["ok".into()],
            available: on,
        }));
    }

    // Agent plus one to three objects: up to four arguments.
    let extra_roles = ["Recipient", "Instrument"];
    let mut frame_ids = Vec::new();
    for extra in 0..=extra_roles.len() {
        let id = format!("np_v{}", "_np".repeat(extra + 1));
        let mut roles = vec![Role::from("Agent"), Role::verb(), Role::from("Theme")];
        roles.extend(extra_roles[..extra].iter().map(|r| Role::from(*r)));
        let mut pattern = vec![Category::NP, Category::V];
        pattern.extend(std::iter::repeat(Category::NP).take(extra + 1));
        records.push(Record::Frame(Frame {
            id: id.as_str().into(),
            structural_pattern: pattern,
            semantic_roles: roles,
        }));
        frame_ids.push(id.as_str().into());
    }
    let n_verb = rng.gen_range(1..=3);
    let mut verb_senses = Vec::new();
    let mut alphas = Vec::new();
    let mut strategy_no = 0;
    for v in 0..n_verb {
        let sid = format!("{VERB}.v.{:02}", v + 1);
        records.push(Record::Sense(sense(&sid, VERB, PartOfSpeech::Verb)));
        verb_senses.push(SenseId::from(sid.as_str()));
        if !rng.gen_bool(0.8) {
            continue;
        }
        let mut strategies = Vec::new();
        for _ in 0..rng.gen_range(1..=2) {
            let comp = format!("comp{}", rng.gen_range(0..2));
            let mut restrictions = vec![Restriction {
                role: Role::from("Theme"),
                predicate: Predicate::IsA(types[rng.gen_range(0..types.len())].clone()),
            }];
            if rng.gen_bool(0.4) {
                restrictions.push(Restriction {
                    role: Role::from("Agent"),
                    predicate: Predicate::IsA(types[rng.gen_range(0..types.len())].clone()),
                });
            }
            restrictions.push(Restriction {
                role: Role::from("Agent"),
                predicate: Predicate::CompetencyAvailable(comp.as_str().into()),
            });
            let s = ExecutionStrategy {
                id: format!("strategy{strategy_no}").into(),
                name: format!("strategy {strategy_no}"),
                restrictions,
                required_competencies: vec![comp.as_str().into()],
                plan_template: vec![TemplateStep {
                    competency: comp.as_str().into(),
                    action: "run".into(),
                    bindings: vec![Role::from("Theme")],
                }],
            };
            strategy_no += 1;
            records.push(Record::Strategy(s.clone()));
            strategies.push(s);
        }
        records.push(Record::Alpha(AlphaStructure {
            id: format!("alpha{v}").into(),
            verb_sense: sid.as_str().into(),
            strategies: strategies.iter().map(|s| s.id.clone()).collect(),
        }));
        alphas.push(strategies);
    }
    records.push(Record::FrameSet(FrameSetRecord {
        id: "act_fs".into(),
        verb_lemma: VERB.into(),
        language: en(),
        frames: frame_ids,
        verb_senses,
    }));

    let agent = vec![words[rng.gen_range(0..words.len())].to_owned()];
    let mut theme_words = words.clone();
    theme_words.shuffle(&mut rng);
    let theme: Vec<String> = theme_words[..rng.gen_range(1..=2)].iter().map(|w| (*w).to_owned()).collect();
    let mut utterance = format!("{} {VERB} the {}", agent[0], theme.join(" "));
    let mut nps = vec![agent, theme];
    for _ in 0..rng.gen_range(0..=2) {
        let object = vec![words[rng.gen_range(0..words.len())].to_owned()];
        utterance.push_str(&format!(" the {}", object[0]));
        nps.push(object);
    }

    RandomKb {
        records,
        utterance,
        nps,
        grounded,
        parent,
        types,
        alphas,
        available,
    }
}

impl RandomKb {
    /// Nodes each noun phrase can denote, following the single-word and
    /// compound rules, without consulting the memory implementation.
    pub fn denotations(&self) -> Vec<Vec<Denotation>> {
        self.nps
            .iter()
            .map(|words| {
                let mut out = vec![Vec::new()];
                for w in words {
                    let mut next = Vec::new();
                    for prefix in &out {
                        for n in &self.grounded[w] {
                            let mut p: Vec<NodeId> = prefix.clone();
                            p.push(n.clone());
                            next.push(p);
                        }
                    }
                    out = next;
                }
                out.into_iter().map(|nodes| Denotation { nodes }).collect()
            })
            .collect()
    }

    pub fn expected_combinations(&self) -> usize {
        self.denotations().iter().map(Vec::len).product()
    }

    pub fn expected_meanings(&self) -> usize {
        self.alphas.len() * self.expected_combinations()
    }

    fn is_a(&self, node: &NodeId, target: &NodeId) -> bool {
        let mut cur = Some(node);
        while let Some(n) = cur {
            if n == target {
                return true;
            }
            cur = self.parent.get(n);
        }
        false
    }

    /// Plans in meaning-major, strategy-minor order, as (strategy, theme
    /// head node, theme node set).
    pub fn expected_plans(&self) -> Vec<(String, Vec<NodeId>)> {
        let dens = self.denotations();
        let mut combos: Vec<Vec<&Denotation>> = vec![Vec::new()];
        for d in &dens {
            let mut next = Vec::new();
            for prefix in &combos {
                for x in d {
                    let mut p = prefix.clone();
                    p.push(x);
                    next.push(p);
                }
            }
            combos = next;
        }
        let mut out = Vec::new();
        for strategies in &self.alphas {
            for combo in &combos {
                let (agent, theme) = (combo[0], combo[1]);
                for s in strategies {
                    let ok = s.restrictions.iter().all(|r| match &r.predicate {
                        Predicate::IsA(t) => {
                            let d = if r.role.as_str() == "Agent" { agent } else { theme };
                            self.is_a(d.head(), t)
                        }
                        Predicate::CompetencyAvailable(c) => self.available[c.as_str()],
                        Predicate::HasRelation(..) => unreachable!("not generated"),
                    });
                    if ok {
                        out.push((s.id.to_string(), theme.nodes.clone()));
                    }
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Denotation {
    pub nodes: Vec<NodeId>,
}

impl Denotation {
    /// A compound is typed by its head, whose own type chain applies.
    pub fn head(&self) -> &NodeId {
        self.nodes.last().expect("non-empty")
    }
}
