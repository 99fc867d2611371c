//! Append-only verdict store.
//!
//! Each accepted verdict becomes one `{"seq": n, "verdict": {...}}` line in
//! `reviews.jsonl`; `reviews.json` is rewritten after every append as a
//! snapshot in the review-log document format.

use std::fs::{self, File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use tcsdet_core::io::{write_reviews, ReviewLog, Verdict, VerdictKind};

use crate::report::ReviewSet;
use crate::ReviewError;

pub const JOURNAL_FILE: &str = "reviews.jsonl";
pub const SNAPSHOT_FILE: &str = "reviews.json";
pub const DEFAULT_REVIEWER: &str = "reviewer";

/// Body of `POST /api/review`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerdictRequest {
    pub detection_id: String,
    pub verdict: VerdictKind,
    /// Time spent on the item, measured by the client.
    pub review_ms: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reviewer: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Receipt {
    pub seq: u64,
    pub verdict: Verdict,
}

pub struct ReviewStore {
    set: ReviewSet,
    log: ReviewLog,
    seqs: Vec<u64>,
    dir: Option<PathBuf>,
    journal: Option<File>,
}

impl ReviewStore {
    /// Store without persistence.
    pub fn in_memory(set: ReviewSet) -> Self {
        Self {
            set,
            log: ReviewLog::default(),
            seqs: Vec::new(),
            dir: None,
            journal: None,
        }
    }

    /// Opens (or creates) the journal in `dir` and replays it.
    pub fn open(set: ReviewSet, dir: &Path) -> Result<Self, ReviewError> {
        fs::create_dir_all(dir).map_err(|e| ReviewError::fs(dir, e))?;
        let path = dir.join(JOURNAL_FILE);
        let mut store = Self::in_memory(set);
        if path.exists() {
            let file = File::open(&path).map_err(|e| ReviewError::fs(&path, e))?;
            for (n, line) in BufReader::new(file).lines().enumerate() {
                let line = line.map_err(|e| ReviewError::fs(&path, e))?;
                if line.trim().is_empty() {
                    continue;
                }
                let corrupt = |reason: String| ReviewError::Corrupt {
                    path: path.display().to_string(),
                    reason: format!("line {}: {reason}", n + 1),
                };
                let entry: Receipt = serde_json::from_str(&line).map_err(|e| corrupt(e.to_string()))?;
                if store.seqs.last().is_some_and(|&s| entry.seq <= s) {
                    return Err(corrupt(format!("sequence {} is not increasing", entry.seq)));
                }
                store.check(&entry.verdict.detection_id).map_err(|e| corrupt(e.to_string()))?;
                store.log.push(entry.verdict)?;
                store.seqs.push(entry.seq);
            }
        }
        let journal = OpenOptions::new()
            .create(true)
            .append(true)
            .open(&path)
            .map_err(|e| ReviewError::fs(&path, e))?;
        store.dir = Some(dir.to_path_buf());
        store.journal = Some(journal);
        Ok(store)
    }

    pub fn set(&self) -> &ReviewSet {
        &self.set
    }

    pub fn log(&self) -> &ReviewLog {
        &self.log
    }

    /// Sequence number of each verdict, in log order.
    pub fn seqs(&self) -> &[u64] {
        &self.seqs
    }

    pub fn last_seq(&self) -> u64 {
        self.seqs.last().copied().unwrap_or(0)
    }

    fn check(&self, detection_id: &str) -> Result<(), ReviewError> {
        if !self.set.contains(detection_id) {
            return Err(ReviewError::UnknownDetection(detection_id.into()));
        }
        if self.log.verdicts().iter().any(|v| v.detection_id == detection_id) {
            return Err(ReviewError::Duplicate(detection_id.into()));
        }
        Ok(())
    }

    /// Validates, persists, then records one verdict.
    pub fn append(&mut self, req: VerdictRequest, decided_at: DateTime<Utc>) -> Result<Receipt, ReviewError> {
        self.check(&req.detection_id)?;
        let receipt = Receipt {
            seq: self.last_seq() + 1,
            verdict: Verdict {
                detection_id: req.detection_id,
                verdict: req.verdict,
                reviewer: req.reviewer.unwrap_or_else(|| DEFAULT_REVIEWER.into()),
                decided_at,
                review_ms: req.review_ms,
            },
        };
        if let (Some(journal), Some(dir)) = (self.journal.as_mut(), self.dir.as_ref()) {
            let path = dir.join(JOURNAL_FILE);
            let mut line = serde_json::to_string(&receipt).expect("receipts serialize");
            line.push('\n');
            journal
                .write_all(line.as_bytes())
                .and_then(|_| journal.sync_data())
                .map_err(|e| ReviewError::fs(&path, e))?;
        }
        self.log.push(receipt.verdict.clone())?;
        self.seqs.push(receipt.seq);
        if let Some(dir) = &self.dir {
            write_reviews(&self.log, &dir.join(SNAPSHOT_FILE))?;
        }
        Ok(receipt)
    }
}
