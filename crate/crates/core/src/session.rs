//! Dialogue loop around the interpreter: surfaces inquiries and
//! ambiguities as events and applies the ambiguity policy.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::competency::{execute_plan, CompetencyEnvironment, ExecutionTrace, Plan};
use crate::ids::{NodeId, PlanId, Role, StrategyId};
use crate::interpreter::{interpret, resume, InquiryAnswer, InterpretOutcome, PendingInquiry, PipelineTrace, ResumeError, ResumptionHandle};
use crate::kb::{load_knowledge_base_with, save_learned, KbError, LoadOptions, MemoryStore};
use crate::language::LanguageId;
use crate::parser::Parser;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AmbiguityPolicy {
    #[default]
    AskUser,
    AutoFirst,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SessionConfig {
    pub policy: AmbiguityPolicy,
    /// Execute a plan as soon as interpretation settles on one.
    pub execute: bool,
    /// Write runtime-created concepts back to the KB directory on close.
    pub persist_kb: bool,
    pub load: LoadOptions,
}

impl Default for SessionConfig {
    fn default() -> Self {
        Self {
            policy: AmbiguityPolicy::AskUser,
            execute: true,
            persist_kb: false,
            load: LoadOptions::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SessionState {
    Idle,
    AwaitingInquiry,
    AwaitingChoice,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlanSummary {
    pub index: usize,
    pub plan: PlanId,
    pub strategy: StrategyId,
    pub strategy_name: String,
    pub bindings: BTreeMap<Role, NodeId>,
}

impl PlanSummary {
    fn of(index: usize, plan: &Plan, strategy_name: String) -> Self {
        Self {
            index,
            plan: plan.id.clone(),
            strategy: plan.strategy.clone(),
            strategy_name,
            bindings: plan
                .meaning
                .role_bindings
                .iter()
                .map(|(r, b)| (r.clone(), b.node.clone()))
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum SessionEvent {
    PlansReady {
        plans: Vec<Plan>,
    },
    InquiryRequested {
        inquiry: PendingInquiry,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        diagnostic: Option<String>,
    },
    AmbiguityDetected {
        plans: Vec<PlanSummary>,
    },
    /// Everything grounded but no strategy validated.
    NoActionPossible,
    ParseFailed {
        reason: String,
    },
    PlanExecuted {
        trace: ExecutionTrace,
    },
    ExecutionFailed {
        plan: PlanId,
        reason: String,
    },
}

impl SessionEvent {
    pub fn name(&self) -> &'static str {
        match self {
            SessionEvent::PlansReady { .. } => "plans_ready",
            SessionEvent::InquiryRequested { .. } => "inquiry",
            SessionEvent::AmbiguityDetected { .. } => "ambiguity",
            SessionEvent::NoActionPossible => "no_action",
            SessionEvent::ParseFailed { .. } => "parse_failed",
            SessionEvent::PlanExecuted { .. } => "plan_executed",
            SessionEvent::ExecutionFailed { .. } => "execution_failed",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SessionError {
    #[error(transparent)]
    Kb(#[from] KbError),
    #[error("session is busy ({0:?})")]
    SessionBusy(SessionState),
    #[error("no inquiry is pending")]
    NoPendingInquiry,
    #[error("no plan choice is pending")]
    NoPendingChoice,
    #[error("plan index {index} out of range (0..{len})")]
    IndexOutOfRange { index: usize, len: usize },
}

enum Pending {
    None,
    Inquiry {
        handle: ResumptionHandle,
        inquiry: PendingInquiry,
    },
    Choice(Vec<Plan>),
}

pub struct Session {
    id: String,
    language: LanguageId,
    store: MemoryStore,
    env: CompetencyEnvironment,
    config: SessionConfig,
    pending: Pending,
    last_trace: Option<PipelineTrace>,
    kb_path: Option<PathBuf>,
}

impl Session {
    /// Load a KB and start an idle session with its competencies registered.
    pub fn open(kb_path: impl AsRef<Path>, language: LanguageId, config: SessionConfig) -> Result<Self, SessionError> {
        let store = load_knowledge_base_with(kb_path.as_ref(), config.load)?;
        let mut session = Self::from_store(store, language, config)?;
        session.kb_path = Some(kb_path.as_ref().to_path_buf());
        Ok(session)
    }

    pub fn from_store(store: MemoryStore, language: LanguageId, config: SessionConfig) -> Result<Self, SessionError> {
        let env = {
            let memory = store.read();
            if !memory.has_language(&language) {
                return Err(KbError::UnregisteredLanguage(language.to_string()).into());
            }
            CompetencyEnvironment::from_memory(&memory)
        };
        Ok(Self {
            id: "local".to_owned(),
            language,
            store,
            env,
            config,
            pending: Pending::None,
            last_trace: None,
            kb_path: None,
        })
    }

    pub fn with_id(mut self, id: impl Into<String>) -> Self {
        self.id = id.into();
        self
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn language(&self) -> &LanguageId {
        &self.language
    }

    pub fn store(&self) -> &MemoryStore {
        &self.store
    }

    pub fn env(&self) -> &CompetencyEnvironment {
        &self.env
    }

    pub fn env_mut(&mut self) -> &mut CompetencyEnvironment {
        &mut self.env
    }

    pub fn config(&self) -> &SessionConfig {
        &self.config
    }

    pub fn state(&self) -> SessionState {
        match self.pending {
            Pending::None => SessionState::Idle,
            Pending::Inquiry { .. } => SessionState::AwaitingInquiry,
            Pending::Choice(_) => SessionState::AwaitingChoice,
        }
    }

    pub fn pending_inquiry(&self) -> Option<&PendingInquiry> {
        match &self.pending {
            Pending::Inquiry { inquiry, .. } => Some(inquiry),
            _ => None,
        }
    }

    pub fn pending_plans(&self) -> Option<&[Plan]> {
        match &self.pending {
            Pending::Choice(plans) => Some(plans),
            _ => None,
        }
    }

    /// Trace of the most recent interpretation.
    pub fn last_trace(&self) -> Option<&PipelineTrace> {
        self.last_trace.as_ref()
    }

    pub fn submit_utterance(&mut self, text: &str) -> Result<Vec<SessionEvent>, SessionError> {
        if self.state() != SessionState::Idle {
            return Err(SessionError::SessionBusy(self.state()));
        }
        let parser = Parser::new(self.store.read().verb_lemmas(&self.language));
        let tree = match parser.parse(text, &self.language) {
            Ok(t) => t,
            Err(e) => return Ok(vec![SessionEvent::ParseFailed { reason: e.to_string() }]),
        };
        let outcome = interpret(&tree, &self.language, &self.store, &self.env);
        Ok(self.settle(outcome))
    }

    pub fn answer_inquiry(&mut self, answer: InquiryAnswer) -> Result<Vec<SessionEvent>, SessionError> {
        let Pending::Inquiry { handle, inquiry } = &self.pending else {
            return Err(SessionError::NoPendingInquiry);
        };
        match resume(handle, answer) {
            Ok(outcome) => {
                self.pending = Pending::None;
                Ok(self.settle(outcome))
            }
            Err(ResumeError::AnswerUnresolvable(reason)) => Ok(vec![SessionEvent::InquiryRequested {
                inquiry: inquiry.clone(),
                diagnostic: Some(reason),
            }]),
            Err(ResumeError::HandleAlreadyUsed) => {
                self.pending = Pending::None;
                Err(SessionError::NoPendingInquiry)
            }
        }
    }

    pub fn choose_plan(&mut self, index: usize) -> Result<Vec<SessionEvent>, SessionError> {
        let Pending::Choice(plans) = &self.pending else {
            return Err(SessionError::NoPendingChoice);
        };
        if index >= plans.len() {
            return Err(SessionError::IndexOutOfRange {
                index,
                len: plans.len(),
            });
        }
        let plan = plans[index].clone();
        self.pending = Pending::None;
        Ok(vec![self.execute(&plan)])
    }

    /// Persist learned concepts when configured. Returns the written file.
    pub fn close(self) -> Result<Option<PathBuf>, SessionError> {
        match (&self.kb_path, self.config.persist_kb) {
            (Some(dir), true) if self.store.read().has_learned() => Ok(Some(save_learned(&self.store, dir)?)),
            _ => Ok(None),
        }
    }

    fn settle(&mut self, outcome: InterpretOutcome) -> Vec<SessionEvent> {
        self.last_trace = Some(outcome.trace().clone());
        match outcome {
            InterpretOutcome::Suspended { inquiry, handle, .. } => {
                self.pending = Pending::Inquiry {
                    handle,
                    inquiry: inquiry.clone(),
                };
                vec![SessionEvent::InquiryRequested {
                    inquiry,
                    diagnostic: None,
                }]
            }
            InterpretOutcome::Complete { plans, .. } => match plans.len() {
                0 => vec![SessionEvent::NoActionPossible],
                1 => self.ready(plans),
                _ if self.config.policy == AmbiguityPolicy::AskUser => {
                    let plans_summary = self.summaries(&plans);
                    self.pending = Pending::Choice(plans);
                    vec![SessionEvent::AmbiguityDetected { plans: plans_summary }]
                }
                _ => self.ready(plans),
            },
        }
    }

    /// Announce plans and, when execution is on, run the first.
    fn ready(&mut self, plans: Vec<Plan>) -> Vec<SessionEvent> {
        let first = plans[0].clone();
        let mut events = vec![SessionEvent::PlansReady { plans }];
        if self.config.execute {
            events.push(self.execute(&first));
        }
        events
    }

    fn summaries(&self, plans: &[Plan]) -> Vec<PlanSummary> {
        let memory = self.store.read();
        plans
            .iter()
            .enumerate()
            .map(|(i, p)| {
                let name = memory.strategy(&p.strategy).map(|s| s.name.clone()).unwrap_or_default();
                PlanSummary::of(i, p, name)
            })
            .collect()
    }

    fn execute(&self, plan: &Plan) -> SessionEvent {
        match execute_plan(plan, &self.env) {
            Ok(trace) => SessionEvent::PlanExecuted { trace },
            Err(e) => SessionEvent::ExecutionFailed {
                plan: plan.id.clone(),
                reason: e.to_string(),
            },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testkit;

    fn session(name: &str) -> Session {
        let store = if name == "motors" { testkit::motors_store() } else { testkit::jacob_store() };
        Session::from_store(store, LanguageId::en(), SessionConfig::default()).unwrap()
    }

    #[test]
    fn policies_use_snake_case() {
        assert_eq!(serde_json::to_string(&AmbiguityPolicy::AutoFirst).unwrap(), "\"auto_first\"");
        assert_eq!(AmbiguityPolicy::default(), AmbiguityPolicy::AskUser);
    }

    #[test]
    fn fresh_sessions_are_idle() {
        let s = session("jacob");
        assert_eq!(s.state(), SessionState::Idle);
        assert_eq!(s.id(), "local");
        assert!(s.pending_inquiry().is_none());
        assert!(s.pending_plans().is_none());
        assert!(s.last_trace().is_none());
        assert_eq!(s.with_id("abc").id(), "abc");
    }

    #[test]
    fn ambiguity_summaries_expose_bindings() {
        let mut s = session("motors");
        let events = s.submit_utterance("Jacob, start motor nine!").unwrap();
        let SessionEvent::AmbiguityDetected { plans } = &events[0] else {
            panic!("{events:?}")
        };
        assert_eq!(plans[1].index, 1);
        assert_eq!(plans[1].strategy_name, "start an external motor");
        assert_eq!(plans[1].bindings[&Role::from("Theme")].as_str(), "motor_nine_external");
        assert_eq!(plans[1].bindings[&Role::from("Agent")].as_str(), "jacob");
        assert_eq!(s.pending_plans().unwrap().len(), 2);
    }

    #[test]
    fn inquiries_block_new_utterances() {
        let mut s = session("jacob");
        s.submit_utterance("Jacob find the red cube").unwrap();
        assert_eq!(
            s.submit_utterance("Jacob find the blue ball"),
            Err(SessionError::SessionBusy(SessionState::AwaitingInquiry))
        );
        assert_eq!(s.pending_inquiry().unwrap().position, 2);
    }
}
