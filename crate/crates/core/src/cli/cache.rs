//! Append-only JSONL cache of enclosures.
//!
//! One record per line. Readers take a shared advisory lock, writers an
//! exclusive one, and every record goes out in a single `write_all`.

use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::mpsc;
use std::thread;

use serde::{Deserialize, Serialize};

use crate::error::TvError;
use crate::indices::{MultiIndex, ValueSpec};
use crate::numerics::Enclosure;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CacheRecord {
    pub index: Vec<u32>,
    pub tail_offset: u64,
    pub precision_bits: u32,
    pub lo: String,
    pub hi: String,
    pub method: String,
    pub created_at: String,
}

impl CacheRecord {
    pub fn new(spec: &ValueSpec, e: &Enclosure, method: &str) -> Self {
        let (lo, hi) = e.to_decimal_default();
        Self {
            index: spec.index.exponents().to_vec(),
            tail_offset: spec.tail_offset,
            precision_bits: e.prec(),
            lo,
            hi,
            method: method.to_string(),
            created_at: chrono::Utc::now().to_rfc3339(),
        }
    }

    pub fn spec(&self) -> ValueSpec {
        ValueSpec {
            index: MultiIndex::from(&self.index[..]),
            tail_offset: self.tail_offset,
        }
    }

    /// The stored bounds re-read at the recorded precision, rounded outward.
    pub fn enclosure(&self) -> Result<Enclosure, TvError> {
        Enclosure::from_decimal_bounds(&self.lo, &self.hi, self.precision_bits)
    }

    fn matches(&self, spec: &ValueSpec) -> bool {
        self.tail_offset == spec.tail_offset && self.index == spec.index.exponents()
    }
}

fn io_err(path: &Path, e: std::io::Error) -> TvError {
    TvError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    }
}

#[derive(Clone, Debug)]
pub struct Cache {
    path: PathBuf,
}

impl Cache {
    pub fn new(path: impl Into<PathBuf>) -> Self {
        Self { path: path.into() }
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    /// All well-formed records in file order; a missing file is empty.
    pub fn records(&self) -> Result<Vec<CacheRecord>, TvError> {
        let file = match File::open(&self.path) {
            Ok(f) => f,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(Vec::new()),
            Err(e) => return Err(io_err(&self.path, e)),
        };
        file.lock_shared().map_err(|e| io_err(&self.path, e))?;
        let mut out = Vec::new();
        for (n, line) in BufReader::new(&file).lines().enumerate() {
            let line = match line {
                Ok(l) => l,
                Err(e) => {
                    log::warn!("{}:{}: unreadable line skipped: {e}", self.path.display(), n + 1);
                    continue;
                }
            };
            if line.trim().is_empty() {
                continue;
            }
            match serde_json::from_str::<CacheRecord>(&line) {
                Ok(r) if r.enclosure().is_ok() => out.push(r),
                Ok(_) => log::warn!("{}:{}: malformed bounds skipped", self.path.display(), n + 1),
                Err(e) => log::warn!("{}:{}: corrupted record skipped: {e}", self.path.display(), n + 1),
            }
        }
        file.unlock().map_err(|e| io_err(&self.path, e))?;
        Ok(out)
    }

    /// Highest-precision record for `spec` with at least `min_precision` bits.
    pub fn lookup(&self, spec: &ValueSpec, min_precision: u32) -> Result<Option<CacheRecord>, TvError> {
        Ok(self
            .records()?
            .into_iter()
            .filter(|r| r.matches(spec) && r.precision_bits >= min_precision)
            .max_by_key(|r| r.precision_bits))
    }

    pub fn store(&self, record: &CacheRecord) -> Result<(), TvError> {
        let mut line = serde_json::to_string(record).map_err(|e| TvError::Io {
            path: self.path.display().to_string(),
            message: e.to_string(),
        })?;
        line.push('\n');
        let mut file = OpenOptions::new()
            .create(true)
            .append(true)
            .open(&self.path)
            .map_err(|e| io_err(&self.path, e))?;
        file.lock().map_err(|e| io_err(&self.path, e))?;
        let written = file.write_all(line.as_bytes()).and_then(|_| file.flush());
        file.unlock().map_err(|e| io_err(&self.path, e))?;
        written.map_err(|e| io_err(&self.path, e))
    }
}

/// A writer thread owning the cache; producers queue records through it.
pub struct CacheWriter {
    tx: Option<mpsc::Sender<CacheRecord>>,
    handle: Option<thread::JoinHandle<Result<(), TvError>>>,
}

impl CacheWriter {
    pub fn spawn(cache: Cache) -> Self {
        let (tx, rx) = mpsc::channel::<CacheRecord>();
        let handle = thread::spawn(move || {
            let mut first_err = None;
            for r in rx {
                if let Err(e) = cache.store(&r) {
                    log::warn!("cache store failed: {e}");
                    first_err.get_or_insert(e);
                }
            }
            first_err.map_or(Ok(()), Err)
        });
        Self {
            tx: Some(tx),
            handle: Some(handle),
        }
    }

    pub fn queue(&self, record: CacheRecord) {
        if let Some(tx) = &self.tx {
            // the receiver lives until finish(), so this cannot fail
            let _ = tx.send(record);
        }
    }

    /// Drains the queue and reports the first store failure.
    pub fn finish(mut self) -> Result<(), TvError> {
        self.tx.take();
        match self.handle.take() {
            Some(h) => h.join().unwrap_or(Ok(())),
            None => Ok(()),
        }
    }
}

impl Drop for CacheWriter {
    fn drop(&mut self) {
        self.tx.take();
        if let Some(h) = self.handle.take() {
            let _ = h.join();
        }
    }
}
