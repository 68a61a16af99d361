use std::fs;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use dhol::atp::{parse_szs, Prover, ProverStatus};

fn transcript(name: &str) -> String {
    let p = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/transcripts").join(name);
    fs::read_to_string(p).unwrap()
}

#[test]
fn canned_transcripts() {
    let cases = [
        ("eprover.txt", ProverStatus::Theorem),
        ("vampire.txt", ProverStatus::Theorem),
        ("leo3.txt", ProverStatus::CounterSatisfiable),
        ("zipper.txt", ProverStatus::Timeout),
        ("noisy_gaveup.txt", ProverStatus::GaveUp),
    ];
    for (file, want) in cases {
        assert_eq!(parse_szs(&transcript(file)), Some(want), "{file}");
    }
}

fn stub(dir: &Path, body: &str) -> PathBuf {
    let p = dir.join("stub.sh");
    fs::write(&p, format!("#!/bin/sh\n{body}\n")).unwrap();
    p
}

fn problem(dir: &Path) -> PathBuf {
    let p = dir.join("goal.p");
    fs::write(&p, "thf(c, conjecture, $true).\n").unwrap();
    p
}

/// A process counts as gone once it is absent or a zombie.
fn alive(pid: u32) -> bool {
    match fs::read_to_string(format!("/proc/{pid}/stat")) {
        Ok(stat) => {
            let state = stat.rsplit(')').next().unwrap_or("").split_whitespace().next().unwrap_or("");
            state != "Z" && state != "X"
        }
        Err(_) => false,
    }
}

#[test]
fn stub_prover_reports_theorem_and_saves_transcript() {
    let dir = tempfile::tempdir().unwrap();
    let s = stub(dir.path(), r#"echo "reading $1"; echo "% SZS status Theorem for $1""#);
    let p = problem(dir.path());
    let prover = Prover::new(format!("sh {} {{file}}", s.display()), Duration::from_secs(5));
    let (v, out) = prover.prove_and_save(&p).unwrap();
    assert_eq!(v.status, ProverStatus::Theorem);
    assert_eq!(out, dir.path().join("goal.out"));
    assert!(fs::read_to_string(out).unwrap().contains("reading"));
}

#[test]
fn timeout_placeholder_is_substituted() {
    let dir = tempfile::tempdir().unwrap();
    let s = stub(dir.path(), r#"[ "$1" = 3 ] && echo "% SZS status Theorem" || echo "% SZS status GaveUp""#);
    let prover = Prover::new(format!("sh {} {{timeout}} {{file}}", s.display()), Duration::from_secs(3));
    assert_eq!(prover.prove(&problem(dir.path())).status, ProverStatus::Theorem);
}

#[test]
fn missing_status_line_is_a_process_error() {
    let dir = tempfile::tempdir().unwrap();
    let s = stub(dir.path(), "echo thinking; exit 3");
    let prover = Prover::new(format!("sh {} {{file}}", s.display()), Duration::from_secs(5));
    assert!(matches!(prover.prove(&problem(dir.path())).status, ProverStatus::ProcessError(_)));
}

#[test]
fn unknown_command_is_a_process_error() {
    let dir = tempfile::tempdir().unwrap();
    let prover = Prover::new("/nonexistent/prover {file}", Duration::from_secs(5));
    assert!(matches!(prover.prove(&problem(dir.path())).status, ProverStatus::ProcessError(_)));
    let missing = dir.path().join("absent.p");
    assert!(matches!(prover.prove(&missing).status, ProverStatus::ProcessError(_)));
}

#[test]
fn slow_prover_times_out_and_leaves_no_processes() {
    let dir = tempfile::tempdir().unwrap();
    let pids = dir.path().join("pids");
    // The stub forks a grandchild, records both pids and then hangs.
    let s = stub(
        dir.path(),
        &format!("sleep 300 &\necho $! > {0}\necho $$ >> {0}\nwait", pids.display()),
    );
    let mut prover = Prover::new(format!("sh {} {{file}}", s.display()), Duration::from_secs(1));
    prover.grace = Duration::from_millis(200);
    let start = Instant::now();
    let v = prover.prove(&problem(dir.path()));
    assert_eq!(v.status, ProverStatus::Timeout);
    assert!(start.elapsed() < Duration::from_secs(10));
    let recorded: Vec<u32> = fs::read_to_string(&pids).unwrap().split_whitespace().map(|s| s.parse().unwrap()).collect();
    assert_eq!(recorded.len(), 2);
    // Reparented zombies may take a moment to be reaped by init.
    let deadline = Instant::now() + Duration::from_secs(5);
    while recorded.iter().any(|&p| alive(p)) && Instant::now() < deadline {
        std::thread::sleep(Duration::from_millis(20));
    }
    for p in recorded {
        assert!(!alive(p), "process {p} survived");
    }
}

#[test]
fn status_is_read_even_with_stderr_chatter() {
    let dir = tempfile::tempdir().unwrap();
    let s = stub(dir.path(), "echo 'noise' 1>&2; echo '% SZS status Satisfiable'");
    let prover = Prover::new(format!("sh {} {{file}}", s.display()), Duration::from_secs(5));
    assert_eq!(prover.prove(&problem(dir.path())).status, ProverStatus::CounterSatisfiable);
}
