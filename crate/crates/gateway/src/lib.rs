//! Newline-delimited JSON protocol over interpretation sessions.
//!
//! [`Connection::handle`] is the whole protocol as a synchronous function;
//! [`serve`] drives it over TCP.

mod gateway;
mod server;
pub mod wire;

pub use gateway::{event_payload, event_type, Connection, Gateway, GatewayConfig};
pub use server::{handle_connection, serve, ServerOptions, DEFAULT_HEARTBEAT};
pub use wire::{ErrorCode, ErrorPayload, WireMessage};
