//! Applies directives to a session and records a JSONL event log. The
//! REPL and the transcript runner both go through [`Driver`], so equal
//! inputs give equal logs.

use std::io::Write;

use olframe_core::interpreter::{InquiryAnswer, PendingInquiry};
use olframe_core::kb::ConceptDefinition;
use olframe_core::language::{content_tokens, head_index};
use olframe_core::session::{Session, SessionError, SessionEvent, SessionState};
use serde_json::{json, Value};

use crate::transcript::{AnswerSpec, Directive, Expectation};

/// Why a directive was not applied.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rejection {
    pub code: &'static str,
    pub message: String,
}

impl Rejection {
    fn session(e: SessionError) -> Self {
        let code = match &e {
            SessionError::Kb(_) => "kb_error",
            SessionError::SessionBusy(_) => "session_busy",
            SessionError::NoPendingInquiry => "no_pending_inquiry",
            SessionError::NoPendingChoice => "no_pending_choice",
            SessionError::IndexOutOfRange { .. } => "index_out_of_range",
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StepResult {
    Events(Vec<SessionEvent>),
    Rejected(Rejection),
}

/// One-line summary of an event, in `expect` syntax.
pub fn describe(event: &SessionEvent) -> String {
    match event {
        SessionEvent::PlansReady { plans } => format!("plans_ready {}", plans.len()),
        SessionEvent::InquiryRequested { inquiry, .. } => format!("inquiry \"{}\"", inquiry.argument_text),
        SessionEvent::AmbiguityDetected { plans } => format!("ambiguity {}", plans.len()),
        SessionEvent::NoActionPossible => "no_action".into(),
        SessionEvent::ParseFailed { .. } => "parse_failed".into(),
        SessionEvent::PlanExecuted { trace } => format!("plan_executed {}", trace.strategy),
        SessionEvent::ExecutionFailed { .. } => "execution_failed".into(),
    }
}

pub fn describe_result(result: &StepResult) -> String {
    match result {
        StepResult::Events(events) if events.is_empty() => "(no events)".into(),
        StepResult::Events(events) => events.iter().map(describe).collect::<Vec<_>>().join(", "),
        StepResult::Rejected(r) => format!("error {}", r.code),
    }
}

fn matches(exp: &Expectation, event: &SessionEvent) -> bool {
    if event.name() != exp.event {
        return false;
    }
    let Some(arg) = &exp.arg else {
        return true;
    };
    match event {
        SessionEvent::PlansReady { plans } => arg.parse() == Ok(plans.len()),
        SessionEvent::AmbiguityDetected { plans } => arg.parse() == Ok(plans.len()),
        SessionEvent::InquiryRequested { inquiry, .. } => &inquiry.argument_text == arg,
        SessionEvent::PlanExecuted { trace } => trace.strategy.as_str() == arg,
        SessionEvent::ParseFailed { reason } => reason.contains(arg.as_str()),
        SessionEvent::ExecutionFailed { reason, .. } => reason.contains(arg.as_str()),
        SessionEvent::NoActionPossible => false,
    }
}

/// Whether `exp` is met by some outcome of the preceding directive.
pub fn expectation_met(exp: &Expectation, result: &StepResult) -> bool {
    match result {
        StepResult::Rejected(r) => exp.event == "error" && exp.arg.as_deref().is_none_or(|a| a == r.code),
        StepResult::Events(events) => events.iter().any(|e| matches(exp, e)),
    }
}

/// Lemma a definition gets when it names none: the argument's head word.
pub fn default_lemma(inquiry: &PendingInquiry) -> String {
    let words: Vec<&str> = inquiry.argument_text.split_whitespace().collect();
    let content = content_tokens(&words, &inquiry.language);
    match head_index(&content, &inquiry.language) {
        Some(i) => content[i].clone(),
        None => inquiry.argument_text.clone(),
    }
}

pub struct Driver {
    session: Session,
    step: usize,
    trace: bool,
    log: Box<dyn Write>,
}

impl Driver {
    /// `log` receives one JSON object per line.
    pub fn new(session: Session, trace: bool, log: Box<dyn Write>) -> Self {
        Self {
            session,
            step: 0,
            trace,
            log,
        }
    }

    pub fn session(&self) -> &Session {
        &self.session
    }

    pub fn into_session(self) -> Session {
        self.session
    }

    fn write(&mut self, record: Value) {
        // Log failures must not change the dialogue.
        let _ = writeln!(self.log, "{record}");
    }

    pub fn flush(&mut self) {
        let _ = self.log.flush();
    }

    fn resolve(&self, spec: &AnswerSpec) -> Result<InquiryAnswer, Rejection> {
        let inquiry = self
            .session
            .pending_inquiry()
            .ok_or_else(|| Rejection::session(SessionError::NoPendingInquiry))?;
        Ok(match spec {
            AnswerSpec::Sense(s) => InquiryAnswer::Sense(s.clone()),
            AnswerSpec::Json(a) => a.clone(),
            AnswerSpec::Candidate(n) => {
                let c = inquiry.candidate_definitions.get(*n).ok_or_else(|| Rejection {
                    code: "bad_answer",
                    message: format!(
                        "no candidate {n}; the inquiry offers {}",
                        inquiry.candidate_definitions.len()
                    ),
                })?;
                InquiryAnswer::Sense(c.sense.clone())
            }
            AnswerSpec::Define {
                lemma,
                concept_type,
                relations,
                gloss,
            } => InquiryAnswer::Definition(ConceptDefinition {
                lemma: lemma.clone().unwrap_or_else(|| default_lemma(inquiry)),
                language: self.session.language().clone(),
                concept_type: concept_type.clone(),
                relations: relations.clone(),
                gloss: gloss.clone(),
            }),
        })
    }

    /// Apply a non-`expect` directive and log its input and outcome.
    pub fn apply(&mut self, directive: &Directive) -> StepResult {
        self.step += 1;
        let step = self.step;
        let (input, result) = match directive {
            Directive::Say(text) => (json!({ "say": text }), self.session.submit_utterance(text)),
            Directive::Choose(i) => (json!({ "choose": i }), self.session.choose_plan(*i)),
            Directive::Answer(spec) => match self.resolve(spec) {
                Ok(answer) => (json!({ "answer": answer }), self.session.answer_inquiry(answer)),
                Err(r) => {
                    self.write(json!({ "step": step, "input": { "answer": null } }));
                    return self.finish(step, StepResult::Rejected(r), false);
                }
            },
            Directive::Expect(_) => panic!("expectations are checked, not applied"),
        };
        self.write(json!({ "step": step, "input": input }));
        let said = matches!(directive, Directive::Say(_));
        let result = match result {
            Ok(events) => StepResult::Events(events),
            Err(e) => StepResult::Rejected(Rejection::session(e)),
        };
        self.finish(step, result, said)
    }

    fn finish(&mut self, step: usize, result: StepResult, said: bool) -> StepResult {
        match &result {
            StepResult::Events(events) => {
                for e in events {
                    self.write(json!({ "step": step, "event": e }));
                }
            }
            StepResult::Rejected(r) => {
                self.write(json!({ "step": step, "error": { "code": r.code, "message": r.message } }));
            }
        }
        let interpreted = matches!(&result, StepResult::Events(e) if !e.iter().any(|e| e.name() == "parse_failed"));
        if self.trace && (said || interpreted) {
            if let Some(t) = self.session.last_trace() {
                let t = serde_json::to_value(t).expect("traces serialize");
                self.write(json!({ "step": step, "trace": t }));
            }
        }
        result
    }
}

/// Outcome of a transcript run.
#[derive(Debug, Default, Clone, PartialEq, Eq)]
pub struct RunReport {
    /// Unmet expectations and unanswered inquiries, as printable diffs.
    pub mismatches: Vec<String>,
    /// Directives the session rejected without a matching `expect error`.
    pub protocol_errors: Vec<String>,
}

impl RunReport {
    pub fn exit_code(&self) -> i32 {
        if !self.protocol_errors.is_empty() {
            4
        } else if !self.mismatches.is_empty() {
            3
        } else {
            0
        }
    }
}

fn unanswered(line: usize, inquiry: Option<&PendingInquiry>) -> String {
    let text = inquiry.map(|i| i.argument_text.as_str()).unwrap_or("?");
    format!("line {line}: inquiry \"{text}\" was never answered\n- expected: answer\n+ actual:   no answer")
}

/// Run a parsed transcript. Never blocks: an inquiry without a scripted
/// answer is reported as a mismatch.
pub fn run_transcript(driver: &mut Driver, directives: &[(usize, Directive)]) -> RunReport {
    let mut report = RunReport::default();
    let mut last: Option<(usize, StepResult, bool)> = None;
    let settle = |last: &mut Option<(usize, StepResult, bool)>, report: &mut RunReport| {
        if let Some((line, StepResult::Rejected(r), false)) = last.take() {
            report.protocol_errors.push(format!("line {line}: {} ({})", r.message, r.code));
        }
    };
    let mut final_line = 0;
    for (line, d) in directives {
        final_line = *line;
        match d {
            Directive::Expect(exp) => {
                let (_, result, excused) = last.as_mut().expect("parser rejects a leading expect");
                if expectation_met(exp, result) {
                    if matches!(result, StepResult::Rejected(_)) {
                        *excused = true;
                    }
                } else {
                    report.mismatches.push(format!(
                        "line {line}: expectation not met\n- expected: {exp}\n+ actual:   {}",
                        describe_result(result)
                    ));
                }
            }
            other => {
                settle(&mut last, &mut report);
                if matches!(other, Directive::Say(_)) && driver.session().state() == SessionState::AwaitingInquiry {
                    report.mismatches.push(unanswered(*line, driver.session().pending_inquiry()));
                    last = Some((*line, StepResult::Events(Vec::new()), true));
                    continue;
                }
                let result = driver.apply(other);
                last = Some((*line, result, false));
            }
        }
    }
    settle(&mut last, &mut report);
    if driver.session().state() == SessionState::AwaitingInquiry {
        report.mismatches.push(unanswered(final_line, driver.session().pending_inquiry()));
    }
    driver.flush();
    report
}
