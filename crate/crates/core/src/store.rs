//! Versioned document store with optimistic batches and an append-only log.
//!
//! Every document lives under `(collection, key)` with a version that starts
//! at 1. Writers submit a [`Batch`] of puts, each carrying the version it
//! expects to replace (0 for "must not exist"). A batch commits atomically or
//! not at all; the first stale expectation aborts it with
//! [`StoreError::VersionConflict`].
//!
//! When opened on a directory the store appends one JSON line per committed
//! batch to `store.log` and syncs it before acknowledging. Opening replays
//! the log; a torn final line (crash mid-append) is dropped.

use std::collections::BTreeMap;
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use parking_lot::{Mutex, RwLock};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;

/// A type stored in its own collection.
pub trait Document: Serialize + DeserializeOwned {
    const COLLECTION: &'static str;
    fn key(&self) -> String;
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum StoreError {
    #[error("version conflict on {collection}/{key}: expected {expected}, found {found}")]
    VersionConflict { collection: String, key: String, expected: u64, found: u64 },
    #[error("store i/o failed: {0}")]
    Io(String),
    #[error("corrupt document in {0}: {1}")]
    Corrupt(String, String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Versioned<T> {
    pub version: u64,
    pub value: T,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct Put {
    #[serde(rename = "c")]
    collection: String,
    #[serde(rename = "k")]
    key: String,
    #[serde(rename = "e")]
    expected: u64,
    #[serde(rename = "d")]
    doc: Value,
}

#[derive(Debug, Default, Clone)]
pub struct Batch {
    puts: Vec<Put>,
}

impl Batch {
    pub fn new() -> Self {
        Self::default()
    }

    /// Write `doc`, replacing exactly version `expected` (0 = insert).
    pub fn put<T: Document>(&mut self, doc: &T, expected: u64) -> &mut Self {
        self.puts.push(Put {
            collection: T::COLLECTION.to_owned(),
            key: doc.key(),
            expected,
            doc: serde_json::to_value(doc).expect("documents serialize"),
        });
        self
    }

    pub fn insert<T: Document>(&mut self, doc: &T) -> &mut Self {
        self.put(doc, 0)
    }

    pub fn is_empty(&self) -> bool {
        self.puts.is_empty()
    }

    pub fn len(&self) -> usize {
        self.puts.len()
    }
}

#[derive(Debug, Clone)]
struct Record {
    version: u64,
    doc: Value,
}

type Collections = BTreeMap<String, BTreeMap<String, Record>>;

#[derive(Debug)]
pub struct DocStore {
    data: RwLock<Collections>,
    log: Option<Mutex<File>>,
    path: Option<PathBuf>,
}

impl DocStore {
    pub fn in_memory() -> Self {
        DocStore { data: RwLock::new(BTreeMap::new()), log: None, path: None }
    }

    pub fn open(dir: impl AsRef<Path>) -> Result<Self, StoreError> {
        let dir = dir.as_ref();
        std::fs::create_dir_all(dir).map_err(io)?;
        let path = dir.join("store.log");
        let mut data = Collections::new();
        let mut valid_len = 0u64;
        if path.exists() {
            let reader = BufReader::new(File::open(&path).map_err(io)?);
            for line in reader.split(b'\n') {
                let line = line.map_err(io)?;
                let Ok(puts) = serde_json::from_slice::<Vec<Put>>(&line) else {
                    break;
                };
                for put in puts {
                    let slot = data.entry(put.collection).or_default();
                    let version = put.expected + 1;
                    slot.insert(put.key, Record { version, doc: put.doc });
                }
                valid_len += line.len() as u64 + 1;
            }
        }
        let file = OpenOptions::new().create(true).append(true).open(&path).map_err(io)?;
        // drop a torn tail so later appends start on a clean line
        if file.metadata().map_err(io)?.len() > valid_len {
            file.set_len(valid_len).map_err(io)?;
        }
        Ok(DocStore { data: RwLock::new(data), log: Some(Mutex::new(file)), path: Some(path) })
    }

    pub fn path(&self) -> Option<&Path> {
        self.path.as_deref()
    }

    pub fn get<T: Document>(&self, key: &str) -> Result<Option<Versioned<T>>, StoreError> {
        let data = self.data.read();
        match data.get(T::COLLECTION).and_then(|c| c.get(key)) {
            None => Ok(None),
            Some(record) => Ok(Some(Versioned { version: record.version, value: decode(T::COLLECTION, &record.doc)? })),
        }
    }

    /// All documents of a collection in key order.
    pub fn scan<T: Document>(&self) -> Result<Vec<Versioned<T>>, StoreError> {
        let data = self.data.read();
        let Some(coll) = data.get(T::COLLECTION) else {
            return Ok(Vec::new());
        };
        coll.values()
            .map(|r| Ok(Versioned { version: r.version, value: decode(T::COLLECTION, &r.doc)? }))
            .collect()
    }

    pub fn count<T: Document>(&self) -> usize {
        self.data.read().get(T::COLLECTION).map_or(0, BTreeMap::len)
    }

    /// Every key across all collections; used to seed the id generator.
    pub fn keys(&self) -> Vec<String> {
        self.data.read().values().flat_map(|c| c.keys().cloned()).collect()
    }

    pub fn commit(&self, batch: Batch) -> Result<(), StoreError> {
        if batch.puts.is_empty() {
            return Ok(());
        }
        let mut data = self.data.write();
        for put in &batch.puts {
            let found = data
                .get(&put.collection)
                .and_then(|c| c.get(&put.key))
                .map_or(0, |r| r.version);
            if found != put.expected {
                return Err(StoreError::VersionConflict {
                    collection: put.collection.clone(),
                    key: put.key.clone(),
                    expected: put.expected,
                    found,
                });
            }
        }
        if let Some(log) = &self.log {
            let mut line = serde_json::to_vec(&batch.puts).map_err(|e| StoreError::Io(e.to_string()))?;
            line.push(b'\n');
            let mut file = log.lock();
            file.write_all(&line).map_err(io)?;
            file.sync_data().map_err(io)?;
        }
        for put in batch.puts {
            let slot = data.entry(put.collection).or_default();
            slot.insert(put.key, Record { version: put.expected + 1, doc: put.doc });
        }
        Ok(())
    }
}

fn decode<T: DeserializeOwned>(collection: &str, doc: &Value) -> Result<T, StoreError> {
    T::deserialize(doc).map_err(|e| StoreError::Corrupt(collection.to_owned(), e.to_string()))
}

fn io(e: std::io::Error) -> StoreError {
    StoreError::Io(e.to_string())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
    struct Note {
        id: String,
        text: String,
    }

    impl Document for Note {
        const COLLECTION: &'static str = "notes";
        fn key(&self) -> String {
            self.id.clone()
        }
    }

    fn note(id: &str, text: &str) -> Note {
        Note { id: id.into(), text: text.into() }
    }

    #[test]
    fn insert_then_update_bumps_version() {
        let store = DocStore::in_memory();
        let mut b = Batch::new();
        b.insert(&note("a", "one"));
        store.commit(b).unwrap();
        let mut b = Batch::new();
        b.put(&note("a", "two"), 1);
        store.commit(b).unwrap();
        let got = store.get::<Note>("a").unwrap().unwrap();
        assert_eq!(got.version, 2);
        assert_eq!(got.value.text, "two");
    }

    #[test]
    fn stale_write_conflicts_and_leaves_batch_unapplied() {
        let store = DocStore::in_memory();
        let mut b = Batch::new();
        b.insert(&note("a", "one"));
        store.commit(b).unwrap();

        let mut b = Batch::new();
        b.insert(&note("b", "new"));
        b.put(&note("a", "stale"), 0);
        assert!(matches!(store.commit(b), Err(StoreError::VersionConflict { found: 1, .. })));
        assert!(store.get::<Note>("b").unwrap().is_none());
    }

    #[test]
    fn concurrent_cas_has_exactly_one_winner() {
        let store = std::sync::Arc::new(DocStore::in_memory());
        let mut b = Batch::new();
        b.insert(&note("a", "base"));
        store.commit(b).unwrap();
        let results: Vec<_> = (0..8)
            .map(|i| {
                let store = store.clone();
                std::thread::spawn(move || {
                    let mut b = Batch::new();
                    b.put(&note("a", &format!("writer {i}")), 1);
                    store.commit(b)
                })
            })
            .map(|h| h.join().unwrap())
            .collect();
        assert_eq!(results.iter().filter(|r| r.is_ok()).count(), 1);
        assert_eq!(store.get::<Note>("a").unwrap().unwrap().version, 2);
    }

    #[test]
    fn reopen_replays_log_and_ignores_torn_tail() {
        let dir = tempfile::tempdir().unwrap();
        {
            let store = DocStore::open(dir.path()).unwrap();
            let mut b = Batch::new();
            b.insert(&note("a", "one")).insert(&note("b", "two"));
            store.commit(b).unwrap();
            let mut b = Batch::new();
            b.put(&note("a", "uno"), 1);
            store.commit(b).unwrap();
        }
        {
            let mut f = OpenOptions::new().append(true).open(dir.path().join("store.log")).unwrap();
            f.write_all(br#"[{"c":"notes","k":"z","e":0,"d":{"id":"#).unwrap();
        }
        let store = DocStore::open(dir.path()).unwrap();
        assert_eq!(store.get::<Note>("a").unwrap().unwrap(), Versioned { version: 2, value: note("a", "uno") });
        assert!(store.get::<Note>("z").unwrap().is_none());
        let mut b = Batch::new();
        b.insert(&note("c", "three"));
        store.commit(b).unwrap();
        drop(store);
        let store = DocStore::open(dir.path()).unwrap();
        assert_eq!(store.count::<Note>(), 3);
    }
}
