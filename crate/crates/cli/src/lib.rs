//! Front ends for the interpretation engine: transcript runner, REPL and
//! the shared directive driver.

pub mod driver;
pub mod render;
pub mod repl;
pub mod transcript;

pub use driver::{run_transcript, Driver, RunReport, StepResult};
pub use transcript::{parse_transcript, Directive};
