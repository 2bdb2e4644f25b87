use std::fs;
use std::path::{Path, PathBuf};
use std::sync::{Arc, RwLock, RwLockReadGuard, RwLockWriteGuard};

use super::error::KbError;
use super::memory::{Lookup, Memory, LEARNED_FILE};
use super::records::{parse_line, parse_manifest, Manifest, Record};
use crate::ids::SenseId;
use crate::language::{normalize_lemma, LanguageId};

pub const MANIFEST_FILE: &str = "manifest";

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct LoadOptions {
    /// Drop unknown record fields with a warning instead of failing.
    pub lenient: bool,
}

/// Everything found while reading a KB directory.
#[derive(Debug, Default)]
pub struct ValidationReport {
    pub errors: Vec<KbError>,
    pub warnings: Vec<String>,
    pub record_count: usize,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.errors.is_empty()
    }
}

/// Shared handle to a [`Memory`]. Readers take [`read`](Self::read);
/// mutations go through [`mutate`](Self::mutate), which holds the write
/// lock for the whole mutation.
#[derive(Debug, Clone)]
pub struct MemoryStore {
    inner: Arc<RwLock<Memory>>,
}

/// Exclusive access for mutating memory.
pub type MutationHandle<'a> = RwLockWriteGuard<'a, Memory>;

impl MemoryStore {
    pub fn new(memory: Memory) -> Self {
        Self {
            inner: Arc::new(RwLock::new(memory)),
        }
    }

    pub fn read(&self) -> RwLockReadGuard<'_, Memory> {
        self.inner.read().unwrap_or_else(|e| e.into_inner())
    }

    pub fn mutate(&self) -> MutationHandle<'_> {
        self.inner.write().unwrap_or_else(|e| e.into_inner())
    }

    /// All grounded senses for a phrase, sorted by id. A multiword phrase
    /// without an exact lexical match materializes one compound concept per
    /// grounded constituent combination.
    pub fn ask<S: AsRef<str>>(&self, phrase: &[S], language: &LanguageId) -> Vec<SenseId> {
        let lookup = self.read().lookup(phrase, language);
        let mut senses = match lookup {
            Lookup::Exact(senses) => senses,
            Lookup::Unknown => Vec::new(),
            Lookup::Compound { .. } => {
                let mut memory = self.mutate();
                let Lookup::Compound { head, tuples } = memory.lookup(phrase, language) else {
                    // Another writer changed memory between the two locks.
                    drop(memory);
                    return self.ask(phrase, language);
                };
                let mut out = Vec::new();
                for tuple in &tuples {
                    let Ok(node) = memory.create_compound_concept(tuple, head) else {
                        continue;
                    };
                    let lemma = tuple
                        .iter()
                        .map(|s| normalize_lemma(&memory.sense(s).expect("grounded").lemma))
                        .collect::<Vec<_>>()
                        .join(" ");
                    let node = memory.concept(&node).expect("just created");
                    out.extend(
                        node.senses_in(language)
                            .iter()
                            .filter(|s| memory.sense(s).is_some_and(|s| normalize_lemma(&s.lemma) == lemma))
                            .cloned(),
                    );
                }
                out
            }
        };
        senses.sort();
        senses.dedup();
        senses
    }
}

/// Load a KB directory, failing on the first integrity problem.
pub fn load_knowledge_base(path: impl AsRef<Path>) -> Result<MemoryStore, KbError> {
    load_knowledge_base_with(path, LoadOptions::default())
}

pub fn load_knowledge_base_with(path: impl AsRef<Path>, options: LoadOptions) -> Result<MemoryStore, KbError> {
    let (memory, report) = read_directory(path.as_ref(), options);
    match report.errors.into_iter().next() {
        Some(e) => Err(e),
        None => Ok(MemoryStore::new(memory.expect("memory present when error-free"))),
    }
}

/// Read a KB directory and report every problem instead of stopping.
pub fn validate_knowledge_base(path: impl AsRef<Path>, options: LoadOptions) -> ValidationReport {
    read_directory(path.as_ref(), options).1
}

fn read_directory(dir: &Path, options: LoadOptions) -> (Option<Memory>, ValidationReport) {
    let mut report = ValidationReport::default();
    let manifest_path = dir.join(MANIFEST_FILE);
    let manifest = match fs::read_to_string(&manifest_path) {
        Ok(text) => match parse_manifest(&text) {
            Ok(m) => m,
            Err(e) => {
                report.errors.push(KbError::Manifest(e));
                return (None, report);
            }
        },
        Err(e) => {
            report.errors.push(io_error(&manifest_path, e));
            return (None, report);
        }
    };

    let mut records = Vec::new();
    for file in &manifest.files {
        if Path::new(file).components().any(|c| !matches!(c, std::path::Component::Normal(_))) {
            report
                .errors
                .push(KbError::Manifest(format!("file entry `{file}` must be a plain relative path")));
            continue;
        }
        let path = dir.join(file);
        let text = match fs::read_to_string(&path) {
            Ok(t) => t,
            Err(e) => {
                report.errors.push(io_error(&path, e));
                continue;
            }
        };
        let learned = file == LEARNED_FILE;
        for (n, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            match parse_line(line, options.lenient, &mut report.warnings) {
                Ok(r) => records.push((r, learned)),
                Err(e) => report.errors.push(KbError::MalformedRecord {
                    file: file.clone(),
                    line: n + 1,
                    reason: e.to_string(),
                }),
            }
        }
    }
    report.record_count = records.len();
    let (memory, errors) = Memory::assemble(manifest.languages.clone(), records);
    report.errors.extend(errors);
    (Some(memory), report)
}

fn io_error(path: &Path, e: std::io::Error) -> KbError {
    KbError::Io {
        path: path.to_path_buf(),
        message: e.to_string(),
    }
}

/// Write runtime-created concepts to `learned.jsonl` in `dir` and list the
/// file in the manifest.
pub fn save_learned(store: &MemoryStore, dir: impl AsRef<Path>) -> Result<PathBuf, KbError> {
    let dir = dir.as_ref();
    let manifest_path = dir.join(MANIFEST_FILE);
    let text = fs::read_to_string(&manifest_path).map_err(|e| io_error(&manifest_path, e))?;
    let mut manifest: Manifest = parse_manifest(&text).map_err(KbError::Manifest)?;

    let records: Vec<Record> = store.read().learned_records();
    let mut body = String::new();
    for r in &records {
        body.push_str(&r.to_line());
        body.push('\n');
    }
    let learned_path = dir.join(LEARNED_FILE);
    fs::write(&learned_path, body).map_err(|e| io_error(&learned_path, e))?;

    if !manifest.files.iter().any(|f| f == LEARNED_FILE) {
        manifest.files.push(LEARNED_FILE.to_owned());
        let json = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
        fs::write(&manifest_path, json + "\n").map_err(|e| io_error(&manifest_path, e))?;
    }
    Ok(learned_path)
}
