//! Human-readable text for the REPL.

use std::collections::BTreeMap;
use std::fmt::Write;

use olframe_core::interpreter::PipelineTrace;
use olframe_core::session::SessionEvent;
use olframe_core::{NodeId, Role};

fn bindings(b: &BTreeMap<Role, NodeId>) -> String {
    b.iter().map(|(r, n)| format!("{r}={n}")).collect::<Vec<_>>().join(", ")
}

pub fn event(e: &SessionEvent) -> String {
    let mut out = String::new();
    match e {
        SessionEvent::PlansReady { plans } => {
            let _ = writeln!(out, "plans ready: {}", plans.len());
            for (i, p) in plans.iter().enumerate() {
                let steps: Vec<String> = p
                    .steps
                    .iter()
                    .map(|s| format!("{}.{}({})", s.competency, s.action, bindings(&s.bindings)))
                    .collect();
                let _ = writeln!(out, "  [{i}] {} -> {}", p.strategy, steps.join("; "));
            }
        }
        SessionEvent::InquiryRequested { inquiry, diagnostic } => {
            if let Some(d) = diagnostic {
                let _ = writeln!(out, "answer rejected: {d}");
            }
            let _ = writeln!(out, "what is \"{}\"?", inquiry.argument_text);
            for (i, c) in inquiry.candidate_definitions.iter().enumerate() {
                let _ = writeln!(out, "  [{i}] {} ({}): {}", c.sense, c.concept, c.gloss);
            }
            let _ = writeln!(
                out,
                "  reply with <n>, `sense <id>`, or `define type=<concept> [lemma=<word>] [<relation>=<concept> ...]`"
            );
        }
        SessionEvent::AmbiguityDetected { plans } => {
            let _ = writeln!(out, "{} plans fit; which one?", plans.len());
            for p in plans {
                let _ = writeln!(out, "  [{}] {} ({})", p.index, p.strategy_name, bindings(&p.bindings));
            }
        }
        SessionEvent::NoActionPossible => out.push_str("no action could be taken\n"),
        SessionEvent::ParseFailed { reason } => {
            let _ = writeln!(out, "could not parse: {reason}");
        }
        SessionEvent::PlanExecuted { trace } => {
            for t in &trace.entries {
                let _ = writeln!(
                    out,
                    "executed {}.{}({}) -> {}",
                    t.competency,
                    t.action,
                    bindings(&t.bindings),
                    t.result
                );
            }
        }
        SessionEvent::ExecutionFailed { plan, reason } => {
            let _ = writeln!(out, "plan {plan} failed: {reason}");
        }
    }
    out
}

pub fn trace(t: &PipelineTrace) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "trace for \"{}\" (verb {})", t.utterance, t.verb);
    for fs in &t.framesets {
        let frame = fs.frame.as_ref().map(|f| f.as_str()).unwrap_or("-");
        let _ = writeln!(
            out,
            "  frameset {}: sound={} frame={} meanings={}",
            fs.frameset, fs.sound, frame, fs.meanings
        );
    }
    for a in &t.arguments {
        let _ = writeln!(
            out,
            "  argument \"{}\": {} raw readings, {} known",
            a.text,
            a.raw_sense_readings,
            a.known_senses.len()
        );
    }
    let _ = writeln!(
        out,
        "  {} raw -> {} combinations -> {} meanings -> {} plans",
        t.raw_combinations, t.combinations, t.meanings, t.plans
    );
    for v in &t.validations {
        match &v.failed_restriction {
            Some(f) => {
                let _ = writeln!(out, "  x {} [{}]: {}", v.strategy, f.restriction, f.reason);
            }
            None if v.valid => {
                let _ = writeln!(out, "  ok {}", v.strategy);
            }
            None => {
                let _ = writeln!(out, "  x {}: {}", v.strategy, v.error.as_deref().unwrap_or("invalid"));
            }
        }
    }
    out
}
