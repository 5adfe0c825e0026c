//! Adapter for an out-of-process checker driven by a shell command template.

use std::fs;
use std::io::Read;
use std::path::{Path, PathBuf};
use std::process::{Command, Stdio};
use std::sync::{Condvar, Mutex};
use std::thread;
use std::time::Duration;

use regex::Regex;
use serde::{Deserialize, Serialize};
use wait_timeout::ChildExt;

use super::{CheckerError, CheckerVerdict, VerdictStatus};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExternalConfig {
    /// Run through `sh -c`; `{file}` becomes the quoted theory path.
    pub command_template: String,
    pub timeout_seconds: u64,
    pub error_pattern: String,
    pub success_pattern: String,
    pub workspace_dir: PathBuf,
    #[serde(default = "default_sessions")]
    pub sessions: usize,
}

fn default_sessions() -> usize {
    1
}

#[derive(Debug)]
pub struct ExternalChecker {
    config: ExternalConfig,
    error_re: Regex,
    success_re: Regex,
    free: Mutex<Vec<usize>>,
    available: Condvar,
}

static GOALS_RE: std::sync::LazyLock<Regex> =
    std::sync::LazyLock::new(|| Regex::new(r"goal \((\d+) subgoals?\)").unwrap());

impl ExternalChecker {
    pub fn new(config: ExternalConfig) -> Result<Self, CheckerError> {
        let compile = |p: &str| Regex::new(p).map_err(|e| CheckerError::Config(e.to_string()));
        if !config.command_template.contains("{file}") {
            return Err(CheckerError::Config("command_template lacks {file}".into()));
        }
        if config.timeout_seconds == 0 || config.sessions == 0 {
            return Err(CheckerError::Config("timeout_seconds and sessions must be positive".into()));
        }
        Ok(ExternalChecker {
            error_re: compile(&config.error_pattern)?,
            success_re: compile(&config.success_pattern)?,
            free: Mutex::new((0..config.sessions).rev().collect()),
            available: Condvar::new(),
            config,
        })
    }

    pub fn config(&self) -> &ExternalConfig {
        &self.config
    }

    /// Blocks until a session workspace is free, runs the checker on
    /// `<theory_name>.thy` inside it, and maps the output to a verdict.
    pub fn run(&self, theory_name: &str, source: &str) -> Result<CheckerVerdict, CheckerError> {
        let session = self.acquire();
        let result = self.run_in(session, theory_name, source);
        self.release(session);
        result
    }

    fn acquire(&self) -> usize {
        let mut free = self.free.lock().unwrap_or_else(|e| e.into_inner());
        loop {
            if let Some(s) = free.pop() {
                return s;
            }
            free = self.available.wait(free).unwrap_or_else(|e| e.into_inner());
        }
    }

    fn release(&self, session: usize) {
        self.free.lock().unwrap_or_else(|e| e.into_inner()).push(session);
        self.available.notify_one();
    }

    fn run_in(&self, session: usize, theory_name: &str, source: &str) -> Result<CheckerVerdict, CheckerError> {
        let dir = self.config.workspace_dir.join(format!("session-{session}"));
        fs::create_dir_all(&dir).map_err(io_err)?;
        let stem = if theory_name.is_empty() { "Scratch" } else { theory_name };
        let file = dir.join(format!("{stem}.thy"));
        fs::write(&file, source).map_err(io_err)?;

        let command = self.config.command_template.replace("{file}", &shell_quote(&file));
        let mut child = Command::new("sh")
            .arg("-c")
            .arg(&command)
            .current_dir(&dir)
            .stdin(Stdio::null())
            .stdout(Stdio::piped())
            .stderr(Stdio::piped())
            .spawn()
            .map_err(|e| CheckerError::Process(format!("cannot start checker: {e}")))?;

        let out = drain(child.stdout.take());
        let err = drain(child.stderr.take());
        let timeout = Duration::from_secs(self.config.timeout_seconds);
        let status = match child.wait_timeout(timeout).map_err(io_err)? {
            Some(status) => status,
            None => {
                let _ = child.kill();
                let _ = child.wait();
                return Err(CheckerError::Timeout { seconds: self.config.timeout_seconds });
            }
        };
        let output = format!("{}{}", join(out), join(err));
        Ok(self.interpret(&output, status.success()).map_err(|msg| {
            CheckerError::Process(format!("checker exited with {status}: {msg}"))
        })?)
    }

    fn interpret(&self, output: &str, exit_ok: bool) -> Result<CheckerVerdict, String> {
        let errors: Vec<String> = output
            .lines()
            .filter(|l| self.error_re.is_match(l))
            .map(|l| l.trim().to_string())
            .collect();
        let remaining = GOALS_RE
            .captures_iter(output)
            .filter_map(|c| c[1].parse::<u32>().ok())
            .last()
            .unwrap_or(0);
        if !errors.is_empty() {
            return Ok(CheckerVerdict {
                status: VerdictStatus::Rejected,
                remaining_subgoals: remaining,
                messages: errors,
                placeholders_found: Vec::new(),
                reason: None,
            });
        }
        if !exit_ok {
            return Err(output.lines().last().unwrap_or_default().to_string());
        }
        if output.lines().any(|l| self.success_re.is_match(l)) {
            return Ok(CheckerVerdict::accepted());
        }
        Ok(CheckerVerdict {
            status: VerdictStatus::Rejected,
            remaining_subgoals: remaining,
            messages: Vec::new(),
            placeholders_found: Vec::new(),
            reason: None,
        })
    }
}

fn io_err(e: std::io::Error) -> CheckerError {
    CheckerError::Process(e.to_string())
}

fn drain<R: Read + Send + 'static>(pipe: Option<R>) -> thread::JoinHandle<String> {
    thread::spawn(move || {
        let mut buf = Vec::new();
        if let Some(mut p) = pipe {
            let _ = p.read_to_end(&mut buf);
        }
        String::from_utf8_lossy(&buf).into_owned()
    })
}

fn join(handle: thread::JoinHandle<String>) -> String {
    handle.join().unwrap_or_default()
}

fn shell_quote(path: &Path) -> String {
    format!("'{}'", path.display().to_string().replace('\'', r"'\''"))
}
