//! Model served by a long-lived child process over line-delimited JSON on stdio.

use std::io::{BufRead, BufReader, Write};
use std::process::{Child, ChildStdin, Command, Stdio};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::mpsc::{self, Receiver, RecvTimeoutError};
use std::sync::Mutex;
use std::thread;
use std::time::Duration;

use super::wire::{decode_response, encode_request};
use super::{batch_shape, ModelAdapter, ModelError, DEFAULT_TIMEOUT};
use crate::types::Sample;

struct Worker {
    child: Child,
    stdin: ChildStdin,
    lines: Receiver<std::io::Result<String>>,
}

impl Worker {
    fn spawn(command: &str) -> Result<Self, ModelError> {
        let mut child = shell(command)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::inherit())
            .spawn()
            .map_err(|e| ModelError::PredictionFailure(format!("failed to spawn `{command}`: {e}")))?;
        let stdin = child.stdin.take().expect("piped stdin");
        let stdout = child.stdout.take().expect("piped stdout");
        let (tx, lines) = mpsc::channel();
        thread::spawn(move || {
            for line in BufReader::new(stdout).lines() {
                let stop = line.is_err();
                if tx.send(line).is_err() || stop {
                    break;
                }
            }
        });
        Ok(Worker { child, stdin, lines })
    }

    fn kill(mut self) {
        let _ = self.child.kill();
        let _ = self.child.wait();
    }
}

#[cfg(unix)]
fn shell(command: &str) -> Command {
    let mut c = Command::new("sh");
    c.arg("-c").arg(command);
    c
}

#[cfg(not(unix))]
fn shell(command: &str) -> Command {
    let mut c = Command::new("cmd");
    c.arg("/C").arg(command);
    c
}

enum Failure {
    /// Pipe closed or child exited; worth one restart.
    Transport(String),
    /// Model answered in step with our ids but reported an error; stream is fine.
    Reported(ModelError),
    /// Malformed or out-of-step answer, or a timeout.
    Fatal(ModelError),
}

/// Spawned once and kept alive across batches. A transport failure triggers one
/// respawn and retry of the batch; a second failure is reported.
pub struct ProcessModel {
    command: String,
    timeout: Duration,
    worker: Mutex<Option<Worker>>,
    next_id: AtomicU64,
}

impl ProcessModel {
    pub fn new(command: impl Into<String>) -> Self {
        ProcessModel {
            command: command.into(),
            timeout: DEFAULT_TIMEOUT,
            worker: Mutex::new(None),
            next_id: AtomicU64::new(1),
        }
    }

    pub fn with_timeout(mut self, timeout: Duration) -> Self {
        self.timeout = timeout;
        self
    }

    fn exchange(&self, worker: &mut Worker, id: u64, line: &str, batch_len: usize) -> Result<Vec<f64>, Failure> {
        worker
            .stdin
            .write_all(line.as_bytes())
            .and_then(|_| worker.stdin.write_all(b"\n"))
            .and_then(|_| worker.stdin.flush())
            .map_err(|e| Failure::Transport(format!("write to model process failed: {e}")))?;
        match worker.lines.recv_timeout(self.timeout) {
            Ok(Ok(reply)) => {
                let response = decode_response(&reply).map_err(Failure::Fatal)?;
                let in_step = response.id == Some(id);
                response.into_predictions(id, batch_len).map_err(|e| {
                    if in_step {
                        Failure::Reported(e)
                    } else {
                        Failure::Fatal(e)
                    }
                })
            }
            Ok(Err(e)) => Err(Failure::Transport(format!("read from model process failed: {e}"))),
            Err(RecvTimeoutError::Disconnected) => Err(Failure::Transport("model process closed its stdout".into())),
            Err(RecvTimeoutError::Timeout) => Err(Failure::Fatal(ModelError::PredictionFailure(format!(
                "model process did not answer within {:?}",
                self.timeout
            )))),
        }
    }
}

impl ModelAdapter for ProcessModel {
    fn predict_batch(&self, batch: &[Sample]) -> Result<Vec<f64>, ModelError> {
        if batch_shape(batch)?.is_none() {
            return Ok(Vec::new());
        }
        let mut slot = self.worker.lock().unwrap_or_else(|p| p.into_inner());
        let mut restarted = false;
        loop {
            if slot.is_none() {
                *slot = Some(Worker::spawn(&self.command)?);
            }
            let id = self.next_id.fetch_add(1, Ordering::Relaxed);
            let line = encode_request(id, batch);
            let worker = slot.as_mut().expect("worker present");
            match self.exchange(worker, id, &line, batch.len()) {
                Ok(p) => return Ok(p),
                Err(Failure::Transport(msg)) => {
                    if let Some(w) = slot.take() {
                        w.kill();
                    }
                    if restarted {
                        return Err(ModelError::PredictionFailure(format!("{msg} (after restart)")));
                    }
                    restarted = true;
                }
                Err(Failure::Reported(e)) => return Err(e),
                Err(Failure::Fatal(e)) => {
                    // the stream may now be out of step with our ids
                    if let Some(w) = slot.take() {
                        w.kill();
                    }
                    return Err(e);
                }
            }
        }
    }

    fn max_in_flight(&self) -> usize {
        1
    }

    fn describe(&self) -> String {
        format!("process:{}", self.command)
    }
}

impl Drop for ProcessModel {
    fn drop(&mut self) {
        if let Some(w) = self.worker.get_mut().ok().and_then(Option::take) {
            w.kill();
        }
    }
}
