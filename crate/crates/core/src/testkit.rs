//! Fixture-backed memories for unit tests.

use crate::kb::{parse_line, Memory, MemoryStore};
use crate::language::LanguageId;

macro_rules! fixture_files {
    ($name:literal) => {
        [
            include_str!(concat!("../../../fixtures/", $name, "/lexicon.jsonl")),
            include_str!(concat!("../../../fixtures/", $name, "/concepts.jsonl")),
            include_str!(concat!("../../../fixtures/", $name, "/frames.jsonl")),
            include_str!(concat!("../../../fixtures/", $name, "/strategies.jsonl")),
            include_str!(concat!("../../../fixtures/", $name, "/competencies.jsonl")),
        ]
    };
}

fn build(files: [&str; 5]) -> Memory {
    let mut warnings = Vec::new();
    let records = files
        .iter()
        .flat_map(|f| f.lines())
        .filter(|l| !l.trim().is_empty())
        .map(|l| parse_line(l, false, &mut warnings).expect("fixture line parses"))
        .collect::<Vec<_>>();
    Memory::from_records([LanguageId::en()], records).expect("fixture is consistent")
}

pub(crate) fn jacob() -> Memory {
    build(fixture_files!("jacob"))
}

pub(crate) fn motors() -> Memory {
    build(fixture_files!("motors"))
}

pub(crate) fn jacob_store() -> MemoryStore {
    MemoryStore::new(jacob())
}

pub(crate) fn motors_store() -> MemoryStore {
    MemoryStore::new(motors())
}
