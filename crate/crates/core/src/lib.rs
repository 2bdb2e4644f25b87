//! Frame interpretation and validation for an open-domain dialogue agent.
//!
//! Utterances are parsed into a small syntactic tree, grounded against a
//! memory that bridges concepts and word senses, validated against the
//! restrictions of execution strategies, and turned into plans. When an
//! argument cannot be grounded the interpretation suspends and resumes
//! once the user supplies a sense.

pub mod competency;
pub mod ids;
pub mod interpreter;
pub mod kb;
pub mod language;
pub mod parser;
pub mod session;

#[cfg(test)]
mod testkit;

pub use ids::*;
pub use language::LanguageId;
