//! Append-only JSONL log of finished sessions. All writes go through one
//! writer thread; a record is acknowledged only after it reached the disk.

use std::fs::{self, File, OpenOptions};
use std::io::{BufRead, BufReader, Seek, SeekFrom, Write};
use std::path::{Path, PathBuf};
use std::sync::mpsc;
use std::thread;

use chrono::{DateTime, Utc};
use contourbench::game::SessionStatus;
use contourbench::stroke::Drawing;
use serde::{Deserialize, Serialize};
use tokio::sync::oneshot;

pub const LOG_FILE: &str = "submissions.jsonl";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubmissionRecord {
    pub timestamp: DateTime<Utc>,
    pub image_id: String,
    pub session_id: String,
    pub drawing: Drawing,
    pub score_fraction: f64,
    pub status: SessionStatus,
}

#[derive(Debug, thiserror::Error)]
pub enum LogError {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("corrupt record on line {line} of {path}: {source}")]
    Corrupt {
        path: PathBuf,
        line: usize,
        #[source]
        source: serde_json::Error,
    },
    #[error("submission writer has stopped")]
    WriterGone,
}

fn io(path: &Path) -> impl FnOnce(std::io::Error) -> LogError + '_ {
    move |source| LogError::Io {
        path: path.to_owned(),
        source,
    }
}

#[derive(Debug, Default)]
pub struct Loaded {
    pub records: Vec<SubmissionRecord>,
    /// Bytes of an unterminated final line that were ignored.
    pub truncated_tail: usize,
}

/// Reads every complete record. An unterminated last line is a write cut
/// short by a crash and is skipped; any other unparsable line is an error.
pub fn load(path: &Path) -> Result<Loaded, LogError> {
    let mut out = Loaded::default();
    let file = match File::open(path) {
        Ok(f) => f,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(out),
        Err(e) => return Err(io(path)(e)),
    };
    let mut reader = BufReader::new(file);
    let mut buf = String::new();
    let mut line_no = 0;
    loop {
        buf.clear();
        let n = reader.read_line(&mut buf).map_err(io(path))?;
        if n == 0 {
            break;
        }
        line_no += 1;
        if !buf.ends_with('\n') {
            out.truncated_tail = n;
            break;
        }
        if buf.trim().is_empty() {
            continue;
        }
        let rec = serde_json::from_str(&buf).map_err(|source| LogError::Corrupt {
            path: path.to_owned(),
            line: line_no,
            source,
        })?;
        out.records.push(rec);
    }
    Ok(out)
}

/// Cuts an unterminated tail so the next append starts on a fresh line.
fn drop_partial_tail(path: &Path) -> Result<(), LogError> {
    let bytes = match fs::read(path) {
        Ok(b) => b,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(()),
        Err(e) => return Err(io(path)(e)),
    };
    if bytes.is_empty() || bytes.ends_with(b"\n") {
        return Ok(());
    }
    let keep = bytes.iter().rposition(|&b| b == b'\n').map_or(0, |i| i + 1);
    tracing::warn!(path = %path.display(), dropped = bytes.len() - keep, "dropping truncated log tail");
    let f = OpenOptions::new().write(true).open(path).map_err(io(path))?;
    f.set_len(keep as u64).map_err(io(path))?;
    Ok(())
}

type Job = (SubmissionRecord, oneshot::Sender<Result<(), String>>);

#[derive(Debug, Clone)]
pub struct SubmissionLog {
    path: PathBuf,
    tx: mpsc::Sender<Job>,
}

impl SubmissionLog {
    /// Opens (creating if needed) `<dir>/submissions.jsonl` and starts the
    /// writer thread.
    pub fn open(dir: &Path) -> Result<Self, LogError> {
        fs::create_dir_all(dir).map_err(io(dir))?;
        let path = dir.join(LOG_FILE);
        drop_partial_tail(&path)?;
        let mut file = OpenOptions::new().create(true).append(true).open(&path).map_err(io(&path))?;
        file.seek(SeekFrom::End(0)).map_err(io(&path))?;
        let (tx, rx) = mpsc::channel::<Job>();
        let thread_path = path.clone();
        thread::Builder::new()
            .name("submission-writer".into())
            .spawn(move || {
                for (rec, ack) in rx {
                    let res = write_record(&mut file, &rec).map_err(|e| format!("{}: {e}", thread_path.display()));
                    if let Err(e) = &res {
                        tracing::error!(error = %e, "failed to persist submission");
                    }
                    let _ = ack.send(res);
                }
            })
            .map_err(io(&path))?;
        Ok(Self { path, tx })
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub async fn append(&self, rec: SubmissionRecord) -> Result<(), LogError> {
        let (ack_tx, ack_rx) = oneshot::channel();
        self.tx.send((rec, ack_tx)).map_err(|_| LogError::WriterGone)?;
        match ack_rx.await {
            Ok(Ok(())) => Ok(()),
            Ok(Err(msg)) => Err(LogError::Io {
                path: self.path.clone(),
                source: std::io::Error::other(msg),
            }),
            Err(_) => Err(LogError::WriterGone),
        }
    }
}

fn write_record(file: &mut File, rec: &SubmissionRecord) -> std::io::Result<()> {
    let mut line = serde_json::to_vec(rec).map_err(std::io::Error::other)?;
    line.push(b'\n');
    file.write_all(&line)?;
    file.sync_data()
}
