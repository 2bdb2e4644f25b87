use std::io::{BufRead, Write};

use olframe_core::session::SessionState;

use crate::driver::{Driver, StepResult};
use crate::render;
use crate::transcript::{parse_answer, parse_directive, Directive};

const HELP: &str = "\
type an utterance, or:
  :trace            show the last interpretation trace
  :concepts [pfx]   list concepts, optionally by id prefix
  :quit             leave (persists learned concepts with --persist-kb)
while an inquiry is open, reply with <n>, `sense <id>` or `define type=<concept> ...`;
while plans are offered, reply with their index.
";

/// Turn a REPL line into a directive according to the session state.
pub fn interpret_line(line: &str, state: SessionState) -> Result<Directive, String> {
    let first = line.split_whitespace().next().unwrap_or("");
    if matches!(first, "say" | "answer" | "choose") {
        return parse_directive(line);
    }
    match state {
        SessionState::AwaitingInquiry => parse_answer(line).map(Directive::Answer),
        SessionState::AwaitingChoice => line
            .trim()
            .parse()
            .map(Directive::Choose)
            .map_err(|_| "reply with a plan index".to_owned()),
        SessionState::Idle => Ok(Directive::Say(line.trim().to_owned())),
    }
}

fn prompt(state: SessionState) -> &'static str {
    match state {
        SessionState::Idle => "olframe> ",
        SessionState::AwaitingInquiry => "answer> ",
        SessionState::AwaitingChoice => "choose> ",
    }
}

/// Read lines until EOF or `:quit`.
pub fn repl(driver: &mut Driver, input: impl BufRead, mut out: impl Write, show_trace: bool) -> std::io::Result<()> {
    write!(out, "{}", prompt(driver.session().state()))?;
    out.flush()?;
    for line in input.lines() {
        let line = line?;
        let t = line.trim();
        if t.is_empty() {
        } else if let Some(cmd) = t.strip_prefix(':') {
            let mut words = cmd.split_whitespace();
            match words.next() {
                Some("quit" | "q") => break,
                Some("help" | "h") => write!(out, "{HELP}")?,
                Some("trace") => match driver.session().last_trace() {
                    Some(tr) => write!(out, "{}", render::trace(tr))?,
                    None => writeln!(out, "nothing interpreted yet")?,
                },
                Some("concepts") => {
                    let pfx = words.next().unwrap_or("");
                    let memory = driver.session().store().read();
                    for c in memory.concepts().filter(|c| c.id.as_str().starts_with(pfx)) {
                        let typ = c.o_layer.concept_type.as_ref().map(|t| t.as_str()).unwrap_or("-");
                        writeln!(out, "  {} : {}", c.id, typ)?;
                    }
                }
                _ => writeln!(out, "unknown command; :help lists them")?,
            }
        } else {
            match interpret_line(t, driver.session().state()) {
                Err(e) => writeln!(out, "{e}")?,
                Ok(Directive::Expect(_)) => writeln!(out, "expect only works in transcripts")?,
                Ok(d) => {
                    match driver.apply(&d) {
                        StepResult::Events(events) => {
                            for e in &events {
                                write!(out, "{}", render::event(e))?;
                            }
                        }
                        StepResult::Rejected(r) => writeln!(out, "{}", r.message)?,
                    }
                    if show_trace && matches!(d, Directive::Say(_)) {
                        if let Some(tr) = driver.session().last_trace() {
                            write!(out, "{}", render::trace(tr))?;
                        }
                    }
                }
            }
        }
        write!(out, "{}", prompt(driver.session().state()))?;
        out.flush()?;
    }
    writeln!(out)?;
    driver.flush();
    Ok(())
}
