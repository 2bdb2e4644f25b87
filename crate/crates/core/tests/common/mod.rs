#![allow(dead_code)]

pub mod gen;

use std::path::PathBuf;

use olframe_core::kb::{load_knowledge_base, MemoryStore};
use olframe_core::parser::{parse_utterance, UtteranceTree};
use olframe_core::LanguageId;

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name)
}

pub fn load(name: &str) -> MemoryStore {
    load_knowledge_base(fixture(name)).unwrap_or_else(|e| panic!("fixture {name}: {e}"))
}

pub fn en() -> LanguageId {
    LanguageId::en()
}

pub fn parse(store: &MemoryStore, text: &str) -> UtteranceTree {
    let verbs = store.read().verb_lemmas(&en());
    parse_utterance(text, &en(), verbs).expect("utterance parses")
}
