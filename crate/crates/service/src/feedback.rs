//! Append-only JSON-lines feedback log with a single writer thread.

use std::fs::{File, OpenOptions};
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::thread;

use serde::{Deserialize, Serialize};
use thiserror::Error;
use tokio::sync::{mpsc, oneshot};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeedbackRecord {
    /// UTC, RFC 3339.
    pub timestamp: String,
    pub text: String,
    pub comment: String,
    pub score_0_100: f64,
}

#[derive(Debug, Error)]
pub enum FeedbackError {
    #[error("feedback queue is full")]
    Busy,
    #[error("feedback writer has stopped")]
    Closed,
    #[error("failed to write feedback log: {0}")]
    Io(#[from] io::Error),
    #[error(transparent)]
    Encode(#[from] serde_json::Error),
}

struct Job {
    line: String,
    reply: oneshot::Sender<io::Result<()>>,
}

/// Handle to the writer. Records are queued on a bounded channel and written
/// one at a time; a record is synced to disk before its submitter is told it
/// was accepted.
#[derive(Clone)]
pub struct FeedbackLog {
    tx: mpsc::Sender<Job>,
}

fn append(path: &Path, file: &mut Option<File>, line: &str) -> io::Result<()> {
    if file.is_none() {
        *file = Some(OpenOptions::new().create(true).append(true).open(path)?);
    }
    let f = file.as_mut().expect("opened above");
    f.write_all(line.as_bytes())?;
    f.sync_data()
}

impl FeedbackLog {
    pub fn spawn(path: PathBuf, capacity: usize) -> io::Result<Self> {
        let (tx, mut rx) = mpsc::channel::<Job>(capacity);
        thread::Builder::new()
            .name("feedback-writer".into())
            .spawn(move || {
                let mut file = None;
                while let Some(job) = rx.blocking_recv() {
                    let result = append(&path, &mut file, &job.line);
                    if result.is_err() {
                        // reopen on the next record
                        file = None;
                    }
                    let _ = job.reply.send(result);
                }
            })?;
        Ok(FeedbackLog { tx })
    }

    pub async fn submit(&self, record: &FeedbackRecord) -> Result<(), FeedbackError> {
        // serde_json escapes embedded newlines, so one record is one line.
        let mut line = serde_json::to_string(record)?;
        line.push('\n');
        let (reply, done) = oneshot::channel();
        self.tx.try_send(Job { line, reply }).map_err(|e| match e {
            mpsc::error::TrySendError::Full(_) => FeedbackError::Busy,
            mpsc::error::TrySendError::Closed(_) => FeedbackError::Closed,
        })?;
        done.await.map_err(|_| FeedbackError::Closed)??;
        Ok(())
    }
}
