//! Frame interpretation: FrameSet selection, sense combinations, meanings,
//! strategy validation and plan instantiation, with suspension whenever an
//! argument cannot be grounded.

mod combinations;
mod trace;
mod types;

use std::fmt;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex};

use thiserror::Error;

pub use combinations::{InquiryAnswer, PendingInquiry, SenseSuggestion};
pub use trace::{ArgumentTrace, FrameSetTrace, PipelineTrace, ValidationTrace};
pub use types::{AnnotatedTree, MeaningTree, RoleBinding};

use combinations::{Advance, CombinationRun};

use crate::competency::{instantiate, strategies_for, valid, CompetencyEnvironment, Plan};
use crate::ids::{FrameSetId, SenseId};
use crate::kb::{AlphaStructure, Category, Frame, FrameSet, Memory, MemoryStore};
use crate::language::LanguageId;
use crate::parser::{verb_of, UtteranceTree};

/// Whether the tree's category sequence equals some frame's pattern.
pub fn sound(frameset: &FrameSet, tree: &UtteranceTree) -> bool {
    select_frame(frameset, tree).is_some()
}

/// The first declared frame whose pattern matches the tree.
pub fn select_frame<'f>(frameset: &'f FrameSet, tree: &UtteranceTree) -> Option<&'f Frame> {
    let categories = tree.categories();
    frameset.frames.iter().find(|f| f.structural_pattern == categories)
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum InterpretError {
    #[error("inquiry channel closed without an answer")]
    InquiryAborted,
    #[error("frameset `{0}` does not match the utterance")]
    NotSound(FrameSetId),
}

/// Synchronous source of answers for [`combinations`] and [`meanings`].
pub trait InquiryChannel {
    /// `None` closes the channel. `diagnostic` explains why the previous
    /// answer for the same inquiry was rejected.
    fn inquire(&mut self, inquiry: &PendingInquiry, diagnostic: Option<&str>) -> Option<InquiryAnswer>;
}

impl<F> InquiryChannel for F
where
    F: FnMut(&PendingInquiry, Option<&str>) -> Option<InquiryAnswer>,
{
    fn inquire(&mut self, inquiry: &PendingInquiry, diagnostic: Option<&str>) -> Option<InquiryAnswer> {
        self(inquiry, diagnostic)
    }
}

/// A channel that never answers.
pub struct ClosedChannel;

impl InquiryChannel for ClosedChannel {
    fn inquire(&mut self, _: &PendingInquiry, _: Option<&str>) -> Option<InquiryAnswer> {
        None
    }
}

fn run_to_completion(
    run: &mut CombinationRun,
    language: &LanguageId,
    store: &MemoryStore,
    channel: &mut dyn InquiryChannel,
) -> Result<Vec<AnnotatedTree>, InterpretError> {
    loop {
        match run.advance(store, language) {
            Advance::Done(trees) => return Ok(trees),
            Advance::Blocked => {
                let inquiry = run.inquiry(store, language);
                let mut diagnostic: Option<String> = None;
                loop {
                    let answer = channel
                        .inquire(&inquiry, diagnostic.as_deref())
                        .ok_or(InterpretError::InquiryAborted)?;
                    match run.answer(store, language, &answer) {
                        Ok(()) => break,
                        Err(reason) => diagnostic = Some(reason),
                    }
                }
            }
        }
    }
}

/// Every combination of argument senses, as sense-annotated tree copies in
/// argument-major, sense-id order. Blocks on `channel` for arguments memory
/// cannot ground.
pub fn combinations(
    tree: &UtteranceTree,
    language: &LanguageId,
    store: &MemoryStore,
    channel: &mut dyn InquiryChannel,
) -> Result<Vec<AnnotatedTree>, InterpretError> {
    run_to_completion(&mut CombinationRun::new(tree), language, store, channel)
}

/// Verb senses of `frameset` that have an alpha-structure, in id order.
fn meaningful_senses(frameset: &FrameSet, memory: &Memory) -> Vec<(SenseId, AlphaStructure)> {
    let mut senses = frameset.verb_senses.clone();
    senses.sort();
    senses
        .into_iter()
        .filter_map(|s| memory.find_alpha(&s).map(|a| (s, a.clone())))
        .collect()
}

fn build_meanings(
    frame: &Frame,
    senses: &[(SenseId, AlphaStructure)],
    combos: &[AnnotatedTree],
    memory: &Memory,
) -> Vec<MeaningTree> {
    let mut out = Vec::with_capacity(senses.len() * combos.len());
    for (sense, alpha) in senses {
        for ti in combos {
            let role_bindings = ti
                .base
                .constituents
                .iter()
                .enumerate()
                .filter(|(_, c)| c.category == Category::NP)
                .filter_map(|(pos, _)| {
                    let node = memory.owner_of(ti.arg_senses.get(&pos)?)?;
                    Some((frame.semantic_roles[pos].clone(), RoleBinding { position: pos, node: node.clone() }))
                })
                .collect();
            out.push(MeaningTree {
                annotated: ti.clone(),
                verb_sense: sense.clone(),
                verb_alpha: alpha.id.clone(),
                frame: frame.id.clone(),
                role_bindings,
            });
        }
    }
    out
}

/// Meanings of a sound FrameSet: each alpha-bearing verb sense crossed with
/// every argument combination.
pub fn meanings(
    frameset: &FrameSet,
    tree: &UtteranceTree,
    language: &LanguageId,
    store: &MemoryStore,
    channel: &mut dyn InquiryChannel,
) -> Result<Vec<MeaningTree>, InterpretError> {
    let frame = select_frame(frameset, tree)
        .ok_or_else(|| InterpretError::NotSound(frameset.id.clone()))?
        .clone();
    let senses = meaningful_senses(frameset, &store.read());
    if senses.is_empty() {
        return Ok(Vec::new());
    }
    let combos = combinations(tree, language, store, channel)?;
    Ok(build_meanings(&frame, &senses, &combos, &store.read()))
}

pub enum InterpretOutcome {
    Complete { plans: Vec<Plan>, trace: PipelineTrace },
    Suspended {
        inquiry: PendingInquiry,
        handle: ResumptionHandle,
        trace: PipelineTrace,
    },
}

impl InterpretOutcome {
    pub fn trace(&self) -> &PipelineTrace {
        match self {
            InterpretOutcome::Complete { trace, .. } | InterpretOutcome::Suspended { trace, .. } => trace,
        }
    }

    pub fn plans(&self) -> Option<&[Plan]> {
        match self {
            InterpretOutcome::Complete { plans, .. } => Some(plans),
            InterpretOutcome::Suspended { .. } => None,
        }
    }

    pub fn is_suspended(&self) -> bool {
        matches!(self, InterpretOutcome::Suspended { .. })
    }
}

impl fmt::Debug for InterpretOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InterpretOutcome::Complete { plans, .. } => f.debug_struct("Complete").field("plans", plans).finish(),
            InterpretOutcome::Suspended { inquiry, handle, .. } => f
                .debug_struct("Suspended")
                .field("inquiry", inquiry)
                .field("handle", handle)
                .finish(),
        }
    }
}

/// Saved state of a suspended interpretation.
struct Continuation {
    store: MemoryStore,
    env: CompetencyEnvironment,
    tree: UtteranceTree,
    language: LanguageId,
    framesets: Vec<FrameSetId>,
    next_frameset: usize,
    plans: Vec<Plan>,
    combos: Option<Vec<AnnotatedTree>>,
    run: Option<CombinationRun>,
    trace: PipelineTrace,
}

static NEXT_HANDLE: AtomicU64 = AtomicU64::new(1);

/// Single-shot token for continuing a suspended interpretation. Clones
/// share the same slot, so only one of them can resume.
#[derive(Clone)]
pub struct ResumptionHandle {
    id: u64,
    slot: Arc<Mutex<Option<Continuation>>>,
}

impl ResumptionHandle {
    fn new(c: Continuation) -> Self {
        Self {
            id: NEXT_HANDLE.fetch_add(1, Ordering::Relaxed),
            slot: Arc::new(Mutex::new(Some(c))),
        }
    }

    pub fn id(&self) -> u64 {
        self.id
    }

    pub fn is_used(&self) -> bool {
        self.slot.lock().unwrap_or_else(|e| e.into_inner()).is_none()
    }
}

impl fmt::Debug for ResumptionHandle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ResumptionHandle")
            .field("id", &self.id)
            .field("used", &self.is_used())
            .finish()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ResumeError {
    #[error("resumption handle already used")]
    HandleAlreadyUsed,
    /// The handle stays usable.
    #[error("answer cannot be used: {0}")]
    AnswerUnresolvable(String),
}

/// Match the tree against the verb's FrameSets, enumerate meanings and
/// collect a plan for every valid (meaning, strategy) pair.
pub fn interpret(
    tree: &UtteranceTree,
    language: &LanguageId,
    store: &MemoryStore,
    env: &CompetencyEnvironment,
) -> InterpretOutcome {
    let verb = verb_of(tree).to_owned();
    let framesets = store
        .read()
        .framesets_of_verb(&verb, language)
        .into_iter()
        .map(|fs| fs.id.clone())
        .collect();
    let trace = PipelineTrace {
        utterance: tree.source_text.clone(),
        verb,
        ..PipelineTrace::default()
    };
    drive(Continuation {
        store: store.clone(),
        env: env.clone(),
        tree: tree.clone(),
        language: language.clone(),
        framesets,
        next_frameset: 0,
        plans: Vec::new(),
        combos: None,
        run: None,
        trace,
    })
}

/// Continue a suspended interpretation with an answer for its inquiry.
pub fn resume(handle: &ResumptionHandle, answer: InquiryAnswer) -> Result<InterpretOutcome, ResumeError> {
    let mut slot = handle.slot.lock().unwrap_or_else(|e| e.into_inner());
    let mut c = slot.take().ok_or(ResumeError::HandleAlreadyUsed)?;
    let run = c.run.as_mut().expect("suspended continuations hold a combination run");
    if let Err(reason) = run.answer(&c.store, &c.language, &answer) {
        *slot = Some(c);
        return Err(ResumeError::AnswerUnresolvable(reason));
    }
    drop(slot);
    Ok(drive(c))
}

fn drive(mut c: Continuation) -> InterpretOutcome {
    while c.next_frameset < c.framesets.len() {
        let fs = c
            .store
            .read()
            .frameset(&c.framesets[c.next_frameset])
            .cloned()
            .expect("framesets are never removed");
        let Some(frame) = select_frame(&fs, &c.tree).cloned() else {
            c.trace.framesets.push(FrameSetTrace {
                frameset: fs.id.clone(),
                sound: false,
                frame: None,
                meaningful_senses: Vec::new(),
                meanings: 0,
            });
            c.next_frameset += 1;
            continue;
        };
        let senses = meaningful_senses(&fs, &c.store.read());
        let mut fs_trace = FrameSetTrace {
            frameset: fs.id.clone(),
            sound: true,
            frame: Some(frame.id.clone()),
            meaningful_senses: senses.iter().map(|(s, _)| s.clone()).collect(),
            meanings: 0,
        };
        if senses.is_empty() {
            c.trace.framesets.push(fs_trace);
            c.next_frameset += 1;
            continue;
        }

        let combos = match &c.combos {
            Some(v) => v.clone(),
            None => {
                let run = c.run.get_or_insert_with(|| CombinationRun::new(&c.tree));
                match run.advance(&c.store, &c.language) {
                    Advance::Done(v) => {
                        record_arguments(&mut c.trace, run, &c.store, &c.language, v.len());
                        c.run = None;
                        c.combos = Some(v.clone());
                        v
                    }
                    Advance::Blocked => {
                        let inquiry = run.inquiry(&c.store, &c.language);
                        c.trace.inquiries.push(inquiry.argument_text.clone());
                        let mut trace = c.trace.clone();
                        record_arguments(&mut trace, run, &c.store, &c.language, 0);
                        return InterpretOutcome::Suspended {
                            inquiry,
                            handle: ResumptionHandle::new(c),
                            trace,
                        };
                    }
                }
            }
        };

        let memory = c.store.read();
        let meanings = build_meanings(&frame, &senses, &combos, &memory);
        fs_trace.meanings = meanings.len();
        for m in &meanings {
            let meaning_index = c.trace.meanings;
            c.trace.meanings += 1;
            let alpha = &senses
                .iter()
                .find(|(_, a)| a.id == m.verb_alpha)
                .expect("meaning built from these senses")
                .1;
            for es in strategies_for(alpha, &frame, &memory) {
                let verdict = valid(es, m, &c.env, &memory);
                let mut entry = ValidationTrace {
                    frameset: fs.id.clone(),
                    meaning: meaning_index,
                    strategy: es.id.clone(),
                    strategy_name: es.name.clone(),
                    valid: verdict.valid,
                    failed_restriction: verdict.failed_restriction,
                    error: None,
                    plan: None,
                };
                if entry.valid {
                    match instantiate(es, m) {
                        Ok(plan) => {
                            entry.plan = Some(plan.id.clone());
                            c.plans.push(plan);
                        }
                        Err(e) => {
                            entry.valid = false;
                            entry.error = Some(e.to_string());
                        }
                    }
                }
                c.trace.validations.push(entry);
            }
        }
        drop(memory);
        c.trace.framesets.push(fs_trace);
        c.next_frameset += 1;
    }
    c.trace.plans = c.plans.len();
    InterpretOutcome::Complete {
        plans: c.plans,
        trace: c.trace,
    }
}

fn record_arguments(
    trace: &mut PipelineTrace,
    run: &CombinationRun,
    store: &MemoryStore,
    language: &LanguageId,
    combinations: usize,
) {
    let memory = store.read();
    trace.arguments = run
        .arguments()
        .map(|(_, position, known, inquired)| {
            let constituent = &run.tree().constituents[position];
            ArgumentTrace {
                position,
                text: constituent.text(),
                raw_sense_readings: memory.raw_sense_readings(&constituent.tokens, language),
                known_senses: known.to_vec(),
                inquired,
            }
        })
        .collect();
    trace.raw_combinations = trace.arguments.iter().map(|a| a.raw_sense_readings).product();
    trace.combinations = combinations;
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kb::{Category, ConceptDefinition};
    use crate::parser::parse_utterance;
    use crate::testkit;
    use crate::Role;

    fn en() -> LanguageId {
        LanguageId::en()
    }

    fn tree(text: &str) -> UtteranceTree {
        parse_utterance(text, &en(), ["find", "start"]).unwrap()
    }

    fn frame(id: &str, pattern: &[Category]) -> Frame {
        let semantic_roles = pattern
            .iter()
            .enumerate()
            .map(|(i, c)| if *c == Category::V { Role::verb() } else { Role::new(format!("R{i}")) })
            .collect();
        Frame {
            id: id.into(),
            structural_pattern: pattern.to_vec(),
            semantic_roles,
        }
    }

    fn frameset(frames: Vec<Frame>) -> FrameSet {
        FrameSet {
            id: "fs".into(),
            verb_lemma: "find".into(),
            language: en(),
            frames,
            verb_senses: vec!["find.v.01".into()],
        }
    }

    use Category::{NP, PP, V};

    #[test]
    fn soundness_compares_patterns() {
        let t = tree("Jacob find the blue ball");
        assert!(sound(&frameset(vec![frame("a", &[NP, V, NP])]), &t));
        assert!(!sound(&frameset(vec![frame("a", &[NP, V, NP, PP, NP])]), &t));
        let fs = frameset(vec![frame("a", &[NP, V]), frame("b", &[NP, V, NP])]);
        assert!(sound(&fs, &t));
        assert_eq!(select_frame(&fs, &t).unwrap().id.as_str(), "b");
        let twice = frameset(vec![frame("a", &[NP, V, NP]), frame("b", &[NP, V, NP])]);
        assert_eq!(select_frame(&twice, &t).unwrap().id.as_str(), "a");
    }

    #[test]
    fn prepositional_phrases_are_not_arguments() {
        let store = testkit::jacob_store();
        let t = tree("Jacob find the ball near Jacob");
        assert_eq!(
            t.categories(),
            [NP, V, NP, PP, NP]
        );
        let combos = combinations(&t, &en(), &store, &mut ClosedChannel).unwrap();
        assert_eq!(combos.len(), 1);
        assert_eq!(combos[0].arg_senses.keys().copied().collect::<Vec<_>>(), [0, 2, 4]);
    }

    #[test]
    fn channel_answers_fill_unknown_arguments() {
        let store = testkit::jacob_store();
        let t = tree("Jacob find the red ball");
        let mut asked = Vec::new();
        let mut channel = |inq: &PendingInquiry, diag: Option<&str>| {
            asked.push((inq.argument_text.clone(), diag.map(str::to_owned)));
            let sense = if diag.is_none() { "red.a.01" } else { "ball.n.01" };
            Some(InquiryAnswer::Sense(sense.into()))
        };
        let combos = combinations(&t, &en(), &store, &mut channel).unwrap();
        assert_eq!(combos.len(), 1);
        assert_eq!(combos[0].arg_senses[&2].as_str(), "ball.n.01");
        assert_eq!(asked.len(), 2);
        assert_eq!(asked[0], ("the red ball".to_owned(), None));
        assert!(asked[1].1.as_deref().unwrap().contains("not attached"));
    }

    #[test]
    fn closed_channel_aborts() {
        let store = testkit::jacob_store();
        assert_eq!(
            combinations(&tree("Jacob find the red cube"), &en(), &store, &mut ClosedChannel),
            Err(InterpretError::InquiryAborted)
        );
    }

    #[test]
    fn meanings_cross_alpha_senses_with_combinations() {
        let store = testkit::motors_store();
        let fs = store.read().frameset(&"start_fs".into()).unwrap().clone();
        let ms = meanings(&fs, &tree("Jacob start motor nine"), &en(), &store, &mut ClosedChannel).unwrap();
        assert_eq!(ms.len(), 2);
        assert!(ms.iter().all(|m| m.verb_sense.as_str() == "start.v.01"));
        let themes: Vec<&str> = ms.iter().map(|m| m.bound_node(&"Theme".into()).unwrap().as_str()).collect();
        assert_eq!(themes, ["motor_nine_internal", "motor_nine_external"]);
        let unsound = frameset(vec![frame("a", &[V])]);
        assert!(matches!(
            meanings(&unsound, &tree("Jacob start motor nine"), &en(), &store, &mut ClosedChannel),
            Err(InterpretError::NotSound(_))
        ));
    }

    #[test]
    fn verbs_without_alpha_never_ask() {
        // No alpha on find.v.02 only: drop the alpha-bearing sense.
        let store = testkit::jacob_store();
        let mut fs = store.read().frameset(&"find_fs".into()).unwrap().clone();
        fs.verb_senses.retain(|s| s.as_str() == "find.v.02");
        let ms = meanings(&fs, &tree("Jacob find the red cube"), &en(), &store, &mut ClosedChannel).unwrap();
        assert!(ms.is_empty());
    }

    #[test]
    fn suspension_records_partial_trace_and_handles_are_single_shot() {
        let store = testkit::jacob_store();
        let env = CompetencyEnvironment::from_memory(&store.read());
        let outcome = interpret(&tree("Jacob find the red cube"), &en(), &store, &env);
        let InterpretOutcome::Suspended { handle, trace, inquiry } = outcome else {
            panic!("expected suspension");
        };
        assert!(inquiry.candidate_definitions.is_empty());
        assert_eq!(trace.arguments.len(), 2);
        assert!(trace.arguments[1].inquired);
        let other = handle.clone();
        assert_eq!(other.id(), handle.id());
        let cube = ConceptDefinition {
            lemma: "red cube".into(),
            language: en(),
            concept_type: "physical_object".into(),
            relations: Vec::new(),
            gloss: None,
        };
        let done = resume(&handle, InquiryAnswer::Definition(cube.clone())).unwrap();
        // The cube is not a ball, so no strategy applies.
        assert_eq!(done.plans().unwrap().len(), 0);
        assert_eq!(done.trace().combinations, 1);
        assert!(other.is_used());
        assert!(matches!(
            resume(&other, InquiryAnswer::Definition(cube)),
            Err(ResumeError::HandleAlreadyUsed)
        ));
    }

    #[test]
    fn traces_count_every_stage() {
        let store = testkit::jacob_store();
        let env = CompetencyEnvironment::from_memory(&store.read());
        let outcome = interpret(&tree("Jacob find the blue ball"), &en(), &store, &env);
        let t = outcome.trace();
        assert_eq!(t.verb, "find");
        assert_eq!(t.raw_combinations, 96);
        assert_eq!(t.framesets.len(), 1);
        assert!(t.framesets[0].sound);
        assert_eq!(t.framesets[0].frame.as_ref().unwrap().as_str(), "np_v_np");
        assert_eq!(t.framesets[0].meaningful_senses, vec![SenseId::from("find.v.01")]);
        assert_eq!(t.validations.len(), 2);
        assert_eq!(t.plans, 1);
        assert!(t.validations[1].plan.is_some());
    }
}
