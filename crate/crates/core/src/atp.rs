//! Running an external THF prover and reading its SZS verdict.
//!
//! The prover is described only by a command template. `{file}` is replaced
//! by the shell-quoted problem path and `{timeout}` by whole seconds. The
//! command runs under `sh -c` in its own process group, so the whole group
//! can be killed when the deadline passes.

use std::fmt;
use std::io::Read;
use std::os::unix::process::CommandExt;
use std::path::{Path, PathBuf};
use std::process::{Command, Stdio};
use std::thread;
use std::time::{Duration, Instant};

use serde::Serialize;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "status", content = "message")]
pub enum ProverStatus {
    Theorem,
    CounterSatisfiable,
    GaveUp,
    Timeout,
    ProcessError(String),
}

impl fmt::Display for ProverStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ProverStatus::Theorem => write!(f, "Theorem"),
            ProverStatus::CounterSatisfiable => write!(f, "CounterSatisfiable"),
            ProverStatus::GaveUp => write!(f, "GaveUp"),
            ProverStatus::Timeout => write!(f, "Timeout"),
            ProverStatus::ProcessError(m) => write!(f, "ProcessError({m})"),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ProverVerdict {
    pub status: ProverStatus,
    pub seconds: f64,
    #[serde(skip)]
    pub transcript: String,
}

#[derive(Clone, Debug)]
pub struct Prover {
    pub template: String,
    pub timeout: Duration,
    /// Extra time granted after `timeout` before the process group is killed.
    pub grace: Duration,
}

/// Maps an SZS status word onto a verdict.
pub fn classify(word: &str) -> ProverStatus {
    match word {
        "Theorem" | "Unsatisfiable" => ProverStatus::Theorem,
        "CounterSatisfiable" | "Satisfiable" => ProverStatus::CounterSatisfiable,
        "Timeout" | "ResourceOut" => ProverStatus::Timeout,
        _ => ProverStatus::GaveUp,
    }
}

/// Finds the first `SZS status <S>` line in a transcript.
pub fn parse_szs(transcript: &str) -> Option<ProverStatus> {
    transcript.lines().find_map(|line| {
        let rest = &line[line.find("SZS status")? + "SZS status".len()..];
        let word: String = rest.trim_start().chars().take_while(|c| c.is_ascii_alphanumeric()).collect();
        (!word.is_empty()).then(|| classify(&word))
    })
}

fn shell_quote(s: &str) -> String {
    format!("'{}'", s.replace('\'', r"'\''"))
}

impl Prover {
    pub fn new(template: impl Into<String>, timeout: Duration) -> Self {
        Prover { template: template.into(), timeout, grace: Duration::from_secs(2) }
    }

    pub fn command_line(&self, file: &Path) -> String {
        self.template
            .replace("{file}", &shell_quote(&file.to_string_lossy()))
            .replace("{timeout}", &self.timeout.as_secs().max(1).to_string())
    }

    /// Runs the prover on `file` and classifies its output.
    pub fn prove(&self, file: &Path) -> ProverVerdict {
        let start = Instant::now();
        let verdict = |status, transcript| ProverVerdict { status, seconds: start.elapsed().as_secs_f64(), transcript };
        if !file.exists() {
            return verdict(ProverStatus::ProcessError(format!("no such file {}", file.display())), String::new());
        }
        let mut child = match Command::new("sh")
            .arg("-c")
            .arg(self.command_line(file))
            .stdin(Stdio::null())
            .stdout(Stdio::piped())
            .stderr(Stdio::piped())
            .process_group(0)
            .spawn()
        {
            Ok(c) => c,
            Err(e) => return verdict(ProverStatus::ProcessError(format!("spawn failed: {e}")), String::new()),
        };
        let drain = |mut r: Box<dyn Read + Send>| {
            thread::spawn(move || {
                let mut buf = Vec::new();
                let _ = r.read_to_end(&mut buf);
                String::from_utf8_lossy(&buf).into_owned()
            })
        };
        let out = drain(Box::new(child.stdout.take().expect("piped stdout")));
        let err = drain(Box::new(child.stderr.take().expect("piped stderr")));
        let pgid = child.id() as libc::pid_t;
        let deadline = start + self.timeout + self.grace;
        let mut killed = false;
        let status = loop {
            match child.try_wait() {
                Ok(Some(s)) => break Some(s),
                Ok(None) if Instant::now() >= deadline => {
                    killed = true;
                    break None;
                }
                Ok(None) => thread::sleep(Duration::from_millis(10)),
                Err(_) => break None,
            }
        };
        // Take down anything the prover left behind, then reap it.
        // SAFETY: kill(2) on our own process group has no memory effects.
        unsafe {
            libc::kill(-pgid, libc::SIGKILL);
        }
        if status.is_none() {
            let _ = child.wait();
        }
        let transcript = out.join().unwrap_or_default();
        let stderr = err.join().unwrap_or_default();
        if killed {
            return verdict(ProverStatus::Timeout, transcript);
        }
        match parse_szs(&transcript) {
            Some(s) => verdict(s, transcript),
            None => {
                let code = status.and_then(|s| s.code()).map_or("signal".to_string(), |c| c.to_string());
                let tail: String = stderr.lines().last().unwrap_or("").chars().take(200).collect();
                verdict(ProverStatus::ProcessError(format!("no SZS status line (exit {code}) {tail}").trim().into()), transcript)
            }
        }
    }

    /// Like [`Prover::prove`], also writing the transcript next to `file`
    /// with extension `.out`.
    pub fn prove_and_save(&self, file: &Path) -> std::io::Result<(ProverVerdict, PathBuf)> {
        let v = self.prove(file);
        let out = file.with_extension("out");
        std::fs::write(&out, &v.transcript)?;
        Ok((v, out))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn szs_words() {
        assert_eq!(parse_szs("% SZS status Theorem for p"), Some(ProverStatus::Theorem));
        assert_eq!(parse_szs("# SZS status Unsatisfiable"), Some(ProverStatus::Theorem));
        assert_eq!(parse_szs("SZS status CounterSatisfiable"), Some(ProverStatus::CounterSatisfiable));
        assert_eq!(parse_szs("% SZS status Satisfiable"), Some(ProverStatus::CounterSatisfiable));
        assert_eq!(parse_szs("% SZS status ResourceOut"), Some(ProverStatus::Timeout));
        assert_eq!(parse_szs("% SZS status Timeout"), Some(ProverStatus::Timeout));
        assert_eq!(parse_szs("% SZS status Unknown"), Some(ProverStatus::GaveUp));
        assert_eq!(parse_szs("% SZS status GaveUp"), Some(ProverStatus::GaveUp));
        assert_eq!(parse_szs("nothing here"), None);
    }

    #[test]
    fn first_status_line_wins() {
        let t = "% SZS status Theorem\n% SZS status CounterSatisfiable\n";
        assert_eq!(parse_szs(t), Some(ProverStatus::Theorem));
    }

    #[test]
    fn template_quotes_paths() {
        let p = Prover::new("prover --t {timeout} {file}", Duration::from_secs(7));
        assert_eq!(p.command_line(Path::new("/tmp/it's.p")), r"prover --t 7 '/tmp/it'\''s.p'");
    }
}
