//! Append-only JSONL response log.

use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::model::CreateSession;
use crate::ServiceError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LogRecord {
    SessionCreated {
        session_id: String,
        request: CreateSession,
        at_ms: u64,
    },
    Served {
        session_id: String,
        item_id: String,
        at_ms: u64,
    },
    Answered {
        session_id: String,
        item_id: String,
        choice: usize,
        at_ms: u64,
    },
}

pub struct LogWriter {
    path: PathBuf,
    file: File,
}

impl LogWriter {
    pub fn open(path: &Path) -> Result<Self, ServiceError> {
        let file = OpenOptions::new()
            .create(true)
            .append(true)
            .open(path)
            .map_err(|e| ServiceError::Io(format!("{}: {e}", path.display())))?;
        Ok(Self {
            path: path.to_path_buf(),
            file,
        })
    }

    pub fn append(&mut self, record: &LogRecord) -> Result<(), ServiceError> {
        let mut line = serde_json::to_vec(record).map_err(|e| ServiceError::Io(e.to_string()))?;
        line.push(b'\n');
        self.file
            .write_all(&line)
            .and_then(|_| self.file.flush())
            .map_err(|e| ServiceError::Io(format!("{}: {e}", self.path.display())))
    }
}

/// All records of a log file; a missing file is an empty log.
pub fn read_log(path: &Path) -> Result<Vec<LogRecord>, ServiceError> {
    let file = match File::open(path) {
        Ok(f) => f,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(Vec::new()),
        Err(e) => return Err(ServiceError::Io(format!("{}: {e}", path.display()))),
    };
    let mut out = Vec::new();
    for (n, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| ServiceError::Io(e.to_string()))?;
        if line.trim().is_empty() {
            continue;
        }
        let record = serde_json::from_str(&line).map_err(|e| {
            ServiceError::Io(format!("{}:{}: {e}", path.display(), n + 1))
        })?;
        out.push(record);
    }
    Ok(out)
}

pub fn now_ms() -> u64 {
    std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_millis() as u64)
        .unwrap_or(0)
}
