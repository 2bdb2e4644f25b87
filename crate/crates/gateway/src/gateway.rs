use std::collections::BTreeMap;
use std::path::{Component, Path, PathBuf};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex};

use olframe_core::interpreter::InquiryAnswer;
use olframe_core::kb::OLNode;
use olframe_core::session::{AmbiguityPolicy, Session, SessionConfig, SessionError, SessionEvent};
use olframe_core::LanguageId;
use serde::Deserialize;
use serde_json::{json, Value};

use crate::wire::{client, server, ErrorCode, ErrorPayload, WireMessage};

#[derive(Debug, Clone)]
pub struct GatewayConfig {
    /// Directory holding one KB directory per name.
    pub kb_root: PathBuf,
    /// KB used when `session.open` names none.
    pub default_kb: Option<String>,
    pub language: LanguageId,
    pub session: SessionConfig,
}

struct SessionSlot {
    id: String,
    /// Taken on close.
    session: Option<Session>,
    kb: String,
    last_client_seq: u64,
    out_seq: u64,
}

impl SessionSlot {
    fn reply(&mut self, kind: &str, payload: Value) -> WireMessage {
        self.out_seq += 1;
        WireMessage::new(kind, self.id.as_str(), self.out_seq, payload)
    }

    fn events(&mut self, events: Vec<SessionEvent>) -> Vec<WireMessage> {
        events
            .into_iter()
            .map(|e| {
                let kind = event_type(&e);
                self.reply(&kind, event_payload(&e))
            })
            .collect()
    }
}

/// Wire type of a session event.
pub fn event_type(event: &SessionEvent) -> String {
    format!("{}{}", server::EVENT_PREFIX, event.name())
}

/// Event fields without the internal tag.
pub fn event_payload(event: &SessionEvent) -> Value {
    let mut v = serde_json::to_value(event).expect("events serialize");
    if let Value::Object(map) = &mut v {
        map.remove("event");
    }
    v
}

/// Session registry shared by all connections.
pub struct Gateway {
    config: GatewayConfig,
    sessions: Mutex<BTreeMap<String, Arc<Mutex<SessionSlot>>>>,
    next_session: AtomicU64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct OpenRequest {
    kb: Option<String>,
    language: Option<LanguageId>,
    policy: Option<AmbiguityPolicy>,
    execute: Option<bool>,
    persist_kb: Option<bool>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SubmitRequest {
    text: String,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ChooseRequest {
    index: usize,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConceptsRequest {
    #[serde(default)]
    prefix: Option<String>,
}

struct Failure {
    code: ErrorCode,
    message: String,
}

impl Failure {
    fn new(code: ErrorCode, message: impl Into<String>) -> Self {
        Self {
            code,
            message: message.into(),
        }
    }
}

impl From<SessionError> for Failure {
    fn from(e: SessionError) -> Self {
        let code = match &e {
            SessionError::Kb(_) => ErrorCode::KbError,
            SessionError::SessionBusy(_) => ErrorCode::SessionBusy,
            SessionError::NoPendingInquiry => ErrorCode::NoPendingInquiry,
            SessionError::NoPendingChoice => ErrorCode::NoPendingChoice,
            SessionError::IndexOutOfRange { .. } => ErrorCode::IndexOutOfRange,
        };
        Failure::new(code, e.to_string())
    }
}

fn payload<T: for<'de> Deserialize<'de>>(msg: &WireMessage) -> Result<T, Failure> {
    serde_json::from_value(msg.payload.clone())
        .map_err(|e| Failure::new(ErrorCode::BadPayload, format!("{}: {e}", msg.kind)))
}

fn concept_json(node: &OLNode) -> Value {
    json!({
        "id": node.id,
        "concept_type": node.o_layer.concept_type,
        "relations": node.o_layer.relations,
        "senses": node.l_layer,
        "compound_of": node.compound_of,
    })
}

impl Gateway {
    pub fn new(config: GatewayConfig) -> Self {
        Self {
            config,
            sessions: Mutex::new(BTreeMap::new()),
            next_session: AtomicU64::new(1),
        }
    }

    pub fn config(&self) -> &GatewayConfig {
        &self.config
    }

    pub fn session_count(&self) -> usize {
        self.sessions.lock().unwrap_or_else(|e| e.into_inner()).len()
    }

    pub fn connect(self: &Arc<Self>) -> Connection {
        Connection {
            gateway: Arc::clone(self),
            seq: 0,
        }
    }

    fn resolve_kb(&self, name: Option<&str>) -> Result<(String, PathBuf), Failure> {
        let name = name
            .map(str::to_owned)
            .or_else(|| self.config.default_kb.clone())
            .ok_or_else(|| Failure::new(ErrorCode::BadPayload, "session.open needs a kb name"))?;
        let mut parts = Path::new(&name).components();
        match (parts.next(), parts.next()) {
            (Some(Component::Normal(_)), None) => Ok((name.clone(), self.config.kb_root.join(&name))),
            _ => Err(Failure::new(ErrorCode::BadPayload, format!("kb `{name}` must be a plain name"))),
        }
    }

    fn open(&self, msg: &WireMessage) -> Result<Vec<WireMessage>, Failure> {
        let req: OpenRequest = payload(msg)?;
        let (kb, path) = self.resolve_kb(req.kb.as_deref())?;
        let mut config = self.config.session;
        if let Some(p) = req.policy {
            config.policy = p;
        }
        if let Some(x) = req.execute {
            config.execute = x;
        }
        if let Some(p) = req.persist_kb {
            config.persist_kb = p;
        }
        let language = req.language.unwrap_or_else(|| self.config.language.clone());
        let id = format!("s{}", self.next_session.fetch_add(1, Ordering::Relaxed));
        let session = Session::open(&path, language, config)?.with_id(id.clone());
        let language = session.language().clone();
        let mut slot = SessionSlot {
            id: id.clone(),
            session: Some(session),
            kb: kb.clone(),
            last_client_seq: msg.seq,
            out_seq: 0,
        };
        let reply = slot.reply(
            server::SESSION_OPENED,
            json!({
                "id": id,
                "kb": kb,
                "language": language,
                "policy": config.policy,
                "execute": config.execute,
            }),
        );
        self.sessions
            .lock()
            .unwrap_or_else(|e| e.into_inner())
            .insert(id, Arc::new(Mutex::new(slot)));
        Ok(vec![reply])
    }

    fn slot(&self, id: &str) -> Result<Arc<Mutex<SessionSlot>>, Failure> {
        self.sessions
            .lock()
            .unwrap_or_else(|e| e.into_inner())
            .get(id)
            .cloned()
            .ok_or_else(|| Failure::new(ErrorCode::UnknownSession, format!("no session `{id}`")))
    }

    fn in_session(&self, msg: &WireMessage) -> Result<Vec<WireMessage>, Failure> {
        let slot = self.slot(&msg.session)?;
        let mut slot = slot.lock().unwrap_or_else(|e| e.into_inner());
        if msg.seq <= slot.last_client_seq {
            return Err(Failure::new(
                ErrorCode::OutOfOrder,
                format!("seq {} is not above {}", msg.seq, slot.last_client_seq),
            ));
        }
        let result = self.dispatch(&mut slot, msg);
        // A request that failed validation still consumes its seq.
        slot.last_client_seq = msg.seq;
        match result {
            Ok(Dispatched::Replies(r)) => Ok(r),
            Ok(Dispatched::Closed(r)) => {
                drop(slot);
                self.sessions
                    .lock()
                    .unwrap_or_else(|e| e.into_inner())
                    .remove(&msg.session);
                Ok(r)
            }
            Err(f) => {
                let e = error_payload(&f, Some(msg.seq));
                Ok(vec![slot.reply(server::ERROR, e)])
            }
        }
    }

    fn dispatch(&self, slot: &mut SessionSlot, msg: &WireMessage) -> Result<Dispatched, Failure> {
        let session = slot
            .session
            .as_mut()
            .ok_or_else(|| Failure::new(ErrorCode::UnknownSession, format!("session `{}` is closed", msg.session)))?;
        let replies = match msg.kind.as_str() {
            client::UTTERANCE_SUBMIT => {
                let req: SubmitRequest = payload(msg)?;
                let events = session.submit_utterance(&req.text)?;
                slot.events(events)
            }
            client::INQUIRY_ANSWER => {
                let answer: InquiryAnswer = payload(msg)?;
                let events = session.answer_inquiry(answer)?;
                slot.events(events)
            }
            client::AMBIGUITY_CHOOSE => {
                let req: ChooseRequest = payload(msg)?;
                let events = session.choose_plan(req.index)?;
                slot.events(events)
            }
            client::KB_CONCEPTS => {
                let req: ConceptsRequest = payload(msg)?;
                let concepts: Vec<Value> = {
                    let memory = session.store().read();
                    memory
                        .concepts()
                        .filter(|c| req.prefix.as_deref().is_none_or(|p| c.id.as_str().starts_with(p)))
                        .map(concept_json)
                        .collect()
                };
                vec![slot.reply(server::KB_CONCEPTS, json!({ "concepts": concepts }))]
            }
            client::PIPELINE_TRACE => {
                let trace = serde_json::to_value(session.last_trace()).expect("traces serialize");
                vec![slot.reply(server::PIPELINE_TRACE, json!({ "trace": trace }))]
            }
            client::SESSION_CLOSE => {
                let kb = slot.kb.clone();
                let persisted = slot.session.take().expect("checked above").close()?;
                let reply = slot.reply(server::SESSION_CLOSED, json!({ "kb": kb, "persisted": persisted }));
                return Ok(Dispatched::Closed(vec![reply]));
            }
            client::PING => vec![slot.reply(server::PONG, json!({}))],
            client::PONG => Vec::new(),
            other => {
                return Err(Failure::new(ErrorCode::UnknownType, format!("unknown message type `{other}`")));
            }
        };
        Ok(Dispatched::Replies(replies))
    }
}

enum Dispatched {
    Replies(Vec<WireMessage>),
    Closed(Vec<WireMessage>),
}

fn error_payload(f: &Failure, request_seq: Option<u64>) -> Value {
    serde_json::to_value(ErrorPayload {
        code: f.code,
        message: f.message.clone(),
        request_seq,
    })
    .expect("errors serialize")
}

/// Per-connection view of the gateway. Connection-level replies (errors
/// outside any session, pongs to sessionless pings) carry this
/// connection's own seq.
pub struct Connection {
    gateway: Arc<Gateway>,
    seq: u64,
}

impl Connection {
    fn own(&mut self, kind: &str, session: &str, payload: Value) -> WireMessage {
        self.seq += 1;
        WireMessage::new(kind, session, self.seq, payload)
    }

    /// Handle one raw line; malformed input yields an error reply.
    pub fn handle_line(&mut self, line: &str) -> Vec<WireMessage> {
        match WireMessage::parse(line) {
            Ok(msg) => self.handle(msg),
            Err(e) => {
                let f = Failure::new(ErrorCode::MalformedMessage, e.to_string());
                vec![self.own(server::ERROR, "", error_payload(&f, None))]
            }
        }
    }

    pub fn handle(&mut self, msg: WireMessage) -> Vec<WireMessage> {
        let result = match (msg.kind.as_str(), msg.session.is_empty()) {
            (client::SESSION_OPEN, _) => self.gateway.open(&msg),
            (client::PING, true) => return vec![self.own(server::PONG, "", json!({}))],
            (client::PONG, true) => return Vec::new(),
            (_, true) => Err(if is_known_type(&msg.kind) {
                Failure::new(ErrorCode::UnknownSession, format!("{} needs a session", msg.kind))
            } else {
                Failure::new(ErrorCode::UnknownType, format!("unknown message type `{}`", msg.kind))
            }),
            (_, false) => self.gateway.in_session(&msg),
        };
        match result {
            Ok(replies) => replies,
            Err(f) => vec![self.own(server::ERROR, &msg.session, error_payload(&f, Some(msg.seq)))],
        }
    }

    /// Server-initiated heartbeat.
    pub fn heartbeat(&mut self) -> WireMessage {
        self.own(server::PING, "", json!({}))
    }
}

fn is_known_type(kind: &str) -> bool {
    [
        client::SESSION_OPEN,
        client::SESSION_CLOSE,
        client::UTTERANCE_SUBMIT,
        client::INQUIRY_ANSWER,
        client::AMBIGUITY_CHOOSE,
        client::KB_CONCEPTS,
        client::PIPELINE_TRACE,
        client::PING,
        client::PONG,
    ]
    .contains(&kind)
}
