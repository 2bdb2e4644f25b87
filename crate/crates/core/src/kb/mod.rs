//! The agent's memory: concepts (O layer), senses (L layer), frames,
//! alpha-structures, execution strategies and competency descriptors.

mod error;
mod memory;
mod model;
mod records;
mod store;

pub use error::{CycleKind, KbError, MutationError};
pub use memory::{ConceptDefinition, Lookup, Memory, LEARNED_FILE};
pub use model::*;
pub use records::{FrameSetRecord, Manifest, Record, FORMAT_VERSION};
#[cfg(test)]
pub(crate) use records::parse_line;
pub use store::{
    load_knowledge_base, load_knowledge_base_with, save_learned, validate_knowledge_base, LoadOptions,
    MemoryStore, MutationHandle, ValidationReport, MANIFEST_FILE,
};
