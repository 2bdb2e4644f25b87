use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

/// One line of the protocol.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WireMessage {
    #[serde(rename = "type")]
    pub kind: String,
    /// Session id; empty for connection-level messages.
    #[serde(default)]
    pub session: String,
    pub seq: u64,
    #[serde(default = "empty_object")]
    pub payload: Value,
}

fn empty_object() -> Value {
    Value::Object(Map::new())
}

impl WireMessage {
    pub fn new(kind: impl Into<String>, session: impl Into<String>, seq: u64, payload: Value) -> Self {
        Self {
            kind: kind.into(),
            session: session.into(),
            seq,
            payload,
        }
    }

    /// Parse one line.
    pub fn parse(line: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(line)
    }

    /// Serialize to one line, without the trailing newline.
    pub fn to_line(&self) -> String {
        serde_json::to_string(self).expect("wire messages serialize")
    }
}

/// Message types sent by clients.
pub mod client {
    pub const SESSION_OPEN: &str = "session.open";
    pub const SESSION_CLOSE: &str = "session.close";
    pub const UTTERANCE_SUBMIT: &str = "utterance.submit";
    pub const INQUIRY_ANSWER: &str = "inquiry.answer";
    pub const AMBIGUITY_CHOOSE: &str = "ambiguity.choose";
    pub const KB_CONCEPTS: &str = "kb.concepts";
    pub const PIPELINE_TRACE: &str = "pipeline.trace";
    pub const PING: &str = "ping";
    pub const PONG: &str = "pong";
}

/// Message types sent by the server, besides `event.*`.
pub mod server {
    pub const SESSION_OPENED: &str = "session.opened";
    pub const SESSION_CLOSED: &str = "session.closed";
    pub const KB_CONCEPTS: &str = "kb.concepts";
    pub const PIPELINE_TRACE: &str = "pipeline.trace";
    pub const PING: &str = "ping";
    pub const PONG: &str = "pong";
    pub const ERROR: &str = "error";
    pub const EVENT_PREFIX: &str = "event.";
}

/// Machine-readable codes carried by `error` messages.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorCode {
    MalformedMessage,
    UnknownType,
    BadPayload,
    UnknownSession,
    OutOfOrder,
    KbError,
    SessionBusy,
    NoPendingInquiry,
    NoPendingChoice,
    IndexOutOfRange,
}

impl ErrorCode {
    pub fn as_str(self) -> &'static str {
        match self {
            ErrorCode::MalformedMessage => "malformed_message",
            ErrorCode::UnknownType => "unknown_type",
            ErrorCode::BadPayload => "bad_payload",
            ErrorCode::UnknownSession => "unknown_session",
            ErrorCode::OutOfOrder => "out_of_order",
            ErrorCode::KbError => "kb_error",
            ErrorCode::SessionBusy => "session_busy",
            ErrorCode::NoPendingInquiry => "no_pending_inquiry",
            ErrorCode::NoPendingChoice => "no_pending_choice",
            ErrorCode::IndexOutOfRange => "index_out_of_range",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ErrorPayload {
    pub code: ErrorCode,
    pub message: String,
    /// Seq of the request that failed, when it could be read.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub request_seq: Option<u64>,
}
