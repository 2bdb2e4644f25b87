//! Transcript directives: `say`, `answer`, `choose`, `expect`, one per
//! line, `#` starts a comment line.

use std::fmt;

use olframe_core::interpreter::InquiryAnswer;
use olframe_core::kb::ConceptRelation;
use olframe_core::{NodeId, SenseId};
use thiserror::Error;

/// How to answer a pending inquiry, before it is resolved against it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AnswerSpec {
    Sense(SenseId),
    /// Index into the inquiry's candidate list.
    Candidate(usize),
    Define {
        lemma: Option<String>,
        concept_type: NodeId,
        relations: Vec<ConceptRelation>,
        gloss: Option<String>,
    },
    Json(InquiryAnswer),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Directive {
    Say(String),
    Answer(AnswerSpec),
    Choose(usize),
    Expect(Expectation),
}

/// Event names accepted by `expect`, plus `error` for rejected directives.
pub const EXPECTABLE: &[&str] = &[
    "plans_ready",
    "inquiry",
    "ambiguity",
    "no_action",
    "parse_failed",
    "plan_executed",
    "execution_failed",
    "error",
];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Expectation {
    pub event: String,
    pub arg: Option<String>,
}

impl fmt::Display for Expectation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.arg {
            Some(a) => write!(f, "{} {a}", self.event),
            None => f.write_str(&self.event),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}: {reason}")]
pub struct TranscriptError {
    pub line: usize,
    pub reason: String,
}

/// Parse `define` arguments: `type=<node>` is required, `lemma=` and
/// `gloss=` are optional, every other `key=value` is a relation.
pub fn parse_define(words: &[String]) -> Result<AnswerSpec, String> {
    let (mut lemma, mut concept_type, mut gloss, mut relations) = (None, None, None, Vec::new());
    for w in words {
        let (k, v) = w
            .split_once('=')
            .ok_or_else(|| format!("expected key=value, got `{w}`"))?;
        if v.is_empty() {
            return Err(format!("empty value for `{k}`"));
        }
        match k {
            "lemma" => lemma = Some(v.to_owned()),
            "type" => concept_type = Some(NodeId::from(v)),
            "gloss" => gloss = Some(v.to_owned()),
            kind => relations.push(ConceptRelation {
                kind: kind.to_owned(),
                target: NodeId::from(v),
                value: None,
            }),
        }
    }
    Ok(AnswerSpec::Define {
        lemma,
        concept_type: concept_type.ok_or("define needs type=<concept>")?,
        relations,
        gloss,
    })
}

/// Parse the text after `answer`.
pub fn parse_answer(rest: &str) -> Result<AnswerSpec, String> {
    let rest = rest.trim();
    if rest.starts_with('{') {
        return serde_json::from_str(rest)
            .map(AnswerSpec::Json)
            .map_err(|e| format!("bad answer JSON: {e}"));
    }
    let words = shlex::split(rest).ok_or("unbalanced quotes")?;
    match words.split_first() {
        Some((kind, args)) if kind == "sense" => match args {
            [id] => Ok(AnswerSpec::Sense(SenseId::from(id.as_str()))),
            _ => Err("usage: answer sense <sense-id>".into()),
        },
        Some((kind, args)) if kind == "define" => parse_define(args),
        Some((n, [])) => n
            .parse()
            .map(AnswerSpec::Candidate)
            .map_err(|_| format!("unknown answer form `{n}`")),
        _ => Err("usage: answer sense <id> | answer define type=<concept> [lemma=..] [kind=target ..] | answer <n>".into()),
    }
}

fn parse_expect(rest: &str) -> Result<Expectation, String> {
    let (event, arg) = match rest.trim().split_once(char::is_whitespace) {
        Some((e, a)) => (e, Some(a.trim())),
        None => (rest.trim(), None),
    };
    if !EXPECTABLE.contains(&event) {
        return Err(format!("unknown event `{event}` (one of {})", EXPECTABLE.join(", ")));
    }
    let arg = arg
        .filter(|a| !a.is_empty())
        .map(|a| match shlex::split(a).as_deref() {
            Some([single]) => single.clone(),
            _ => a.to_owned(),
        });
    if matches!(event, "plans_ready" | "ambiguity") {
        if let Some(a) = &arg {
            a.parse::<usize>().map_err(|_| format!("`{event}` takes a plan count, got `{a}`"))?;
        }
    }
    Ok(Expectation {
        event: event.to_owned(),
        arg,
    })
}

/// Parse one non-comment line.
pub fn parse_directive(line: &str) -> Result<Directive, String> {
    let line = line.trim();
    let (word, rest) = line.split_once(char::is_whitespace).unwrap_or((line, ""));
    match word {
        "say" if !rest.trim().is_empty() => Ok(Directive::Say(rest.trim().to_owned())),
        "say" => Err("say needs an utterance".into()),
        "answer" => parse_answer(rest).map(Directive::Answer),
        "choose" => rest
            .trim()
            .parse()
            .map(Directive::Choose)
            .map_err(|_| format!("choose needs a plan index, got `{}`", rest.trim())),
        "expect" => parse_expect(rest).map(Directive::Expect),
        other => Err(format!("unknown directive `{other}`")),
    }
}

/// Parse a whole transcript into (line number, directive) pairs.
pub fn parse_transcript(text: &str) -> Result<Vec<(usize, Directive)>, TranscriptError> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let t = line.trim();
        if t.is_empty() || t.starts_with('#') {
            continue;
        }
        let d = parse_directive(t).map_err(|reason| TranscriptError { line: i + 1, reason })?;
        if matches!(d, Directive::Expect(_)) && out.is_empty() {
            return Err(TranscriptError {
                line: i + 1,
                reason: "expect has no preceding directive".into(),
            });
        }
        out.push((i + 1, d));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_every_directive() {
        let text = "# comment\nsay Jacob find the blue ball\nexpect plans_ready 1\nanswer sense cube.n.01\nanswer 0\nchoose 1\nexpect inquiry \"the red cube\"\n";
        let ds = parse_transcript(text).unwrap();
        assert_eq!(ds.len(), 6);
        assert_eq!(ds[0], (2, Directive::Say("Jacob find the blue ball".into())));
        assert_eq!(ds[3].1, Directive::Answer(AnswerSpec::Candidate(0)));
        assert_eq!(ds[4].1, Directive::Choose(1));
        assert_eq!(
            ds[5].1,
            Directive::Expect(Expectation {
                event: "inquiry".into(),
                arg: Some("the red cube".into())
            })
        );
    }

    #[test]
    fn define_splits_relations_from_fields() {
        let spec = parse_answer("define lemma=\"red cube\" type=physical_object color=red").unwrap();
        let AnswerSpec::Define { lemma, concept_type, relations, gloss } = spec else {
            panic!()
        };
        assert_eq!(lemma.as_deref(), Some("red cube"));
        assert_eq!(concept_type.as_str(), "physical_object");
        assert_eq!(relations.len(), 1);
        assert_eq!(relations[0].kind, "color");
        assert!(gloss.is_none());
        assert!(parse_answer("define lemma=cube").is_err());
    }

    #[test]
    fn json_answers_are_accepted() {
        assert_eq!(
            parse_answer(r#"{"sense": "ball.n.01"}"#).unwrap(),
            AnswerSpec::Json(InquiryAnswer::Sense("ball.n.01".into()))
        );
    }

    #[test]
    fn errors_carry_line_numbers() {
        let e = parse_transcript("say hi\n\nfrobnicate\n").unwrap_err();
        assert_eq!(e.line, 3);
        assert!(parse_transcript("expect no_action\n").is_err());
        assert!(parse_directive("expect ambiguity two").is_err());
        assert!(parse_directive("expect teleported").is_err());
        assert!(parse_directive("choose x").is_err());
        assert!(parse_directive("say").is_err());
    }

    proptest::proptest! {
        #[test]
        fn quoted_define_values_round_trip(lemma in "[a-z]{1,6}( [a-z]{1,6}){0,2}", gloss in "[ -~]{1,24}") {
            let line = format!(
                "answer define lemma={} type=physical_object gloss={}",
                shlex::try_quote(&lemma).unwrap(),
                shlex::try_quote(&gloss).unwrap()
            );
            let (_, d) = parse_transcript(&line).unwrap().remove(0);
            let Directive::Answer(AnswerSpec::Define { lemma: l, gloss: g, relations, .. }) = d else {
                panic!("not a definition: {d:?}");
            };
            proptest::prop_assert_eq!(l, Some(lemma));
            proptest::prop_assert_eq!(g, Some(gloss));
            proptest::prop_assert!(relations.is_empty());
        }
    }
}
