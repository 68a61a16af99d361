//! From a parsed theory to a report: checking, translation, THF emission
//! and discharge of every obligation.
//!
//! Each obligation goes through the local simplifier, then the finite-model
//! oracle, then the external prover. The first success wins. An oracle
//! countermodel for a goal the prover claims as a theorem means the
//! translation is unsound, so the run is aborted.

use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Instant;

use serde::Serialize;

use crate::atp::{Prover, ProverStatus};
use crate::holcore::{check_hol_theory, emit_tptp, HolConjecture, HolTheory};
use crate::kernel::{check_theory, simplify_obligation, CheckResult, KernelOptions, Obligation, Simplified, Status};
use crate::oracle::{check_valid_finite, OracleConfig, OracleVerdict};
use crate::parser::print_term;
use crate::syntax::{resugar, Theory};
use crate::translate::{TranslateOptions, Translator};

#[derive(Clone, Debug)]
pub struct PipelineOptions {
    pub kernel: KernelOptions,
    pub translate: TranslateOptions,
    /// Largest carrier size for the oracle; 0 disables it.
    pub oracle_size: u64,
    pub oracle_budget: u64,
    pub prover: Option<Prover>,
    pub jobs: usize,
    pub emit_dir: Option<PathBuf>,
}

impl Default for PipelineOptions {
    fn default() -> Self {
        PipelineOptions {
            kernel: KernelOptions::default(),
            translate: TranslateOptions::default(),
            oracle_size: 0,
            oracle_budget: OracleConfig::new(1).budget,
            prover: None,
            jobs: 1,
            emit_dir: None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Outcome {
    Discharged,
    Remaining,
    Refuted,
}

#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ReportEntry {
    pub id: String,
    pub rule: String,
    pub span: String,
    pub dhol_goal: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tptp_file: Option<PathBuf>,
    pub verdict: String,
    pub outcome: Outcome,
    pub time: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub counterexample: Option<String>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Summary {
    pub total: usize,
    pub discharged: usize,
    pub remaining: usize,
    pub refuted: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub theory: String,
    pub obligations: Vec<ReportEntry>,
    pub summary: Summary,
    pub warnings: Vec<String>,
}

impl Report {
    pub fn new(theory: &str, obligations: Vec<ReportEntry>, warnings: Vec<String>) -> Self {
        let mut summary = Summary { total: obligations.len(), ..Summary::default() };
        for e in &obligations {
            match e.outcome {
                Outcome::Discharged => summary.discharged += 1,
                Outcome::Remaining => summary.remaining += 1,
                Outcome::Refuted => summary.refuted += 1,
            }
        }
        Report { theory: theory.to_string(), obligations, summary, warnings }
    }

    /// 0 when everything is discharged, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        i32::from(self.summary.discharged != self.summary.total)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum PipelineError {
    #[error("{0}")]
    Rejected(String),
    #[error("translation failed: {0}")]
    Translation(String),
    #[error("cannot write {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("oracle and prover disagree on {id}: the prover proved a goal with a finite countermodel\n{model}")]
    Disagreement { id: String, model: String },
}

/// A checked and translated theory, ready for discharge.
pub struct Compiled {
    pub name: String,
    pub check: CheckResult,
    pub hol: HolTheory,
    /// Kernel obligations followed by the conjectures themselves.
    pub obligations: Vec<Obligation>,
    pub problems: Vec<HolConjecture>,
}

/// Type-checks and translates `theory`.
pub fn compile(theory: &Theory, opts: &PipelineOptions) -> Result<Compiled, PipelineError> {
    let check = check_theory(theory, opts.kernel);
    if let Status::Rejected { reason, span } = &check.status {
        return Err(PipelineError::Rejected(format!("{span}: {reason}")));
    }
    let tr = Translator::new(&check.signature, opts.translate);
    let hol = tr.translate_theory().map_err(|e| PipelineError::Translation(e.0))?;
    check_hol_theory(&hol).map_err(|e| PipelineError::Translation(e.to_string()))?;
    let mut obligations = check.obligations.clone();
    obligations.extend(check.conjectures.iter().map(|c| c.as_obligation()));
    let problems = obligations
        .iter()
        .map(|ob| tr.translate_obligation(ob))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| PipelineError::Translation(e.0))?;
    Ok(Compiled { name: theory.name.clone(), check, hol, obligations, problems })
}

pub fn problem_file_name(theory: &str, id: &str) -> String {
    let clean = |s: &str| s.chars().map(|c| if c.is_ascii_alphanumeric() || c == '_' || c == '.' || c == '-' { c } else { '_' }).collect::<String>();
    format!("{}__{}.p", clean(theory), clean(id))
}

impl Compiled {
    /// Writes one THF problem per obligation into `dir`.
    pub fn emit(&self, dir: &Path) -> Result<Vec<PathBuf>, PipelineError> {
        let io = |path: &Path| {
            let path = path.to_path_buf();
            move |source| PipelineError::Io { path, source }
        };
        std::fs::create_dir_all(dir).map_err(io(dir))?;
        let mut files = Vec::new();
        for (ob, p) in self.obligations.iter().zip(&self.problems) {
            let path = dir.join(problem_file_name(&self.name, &ob.id));
            std::fs::write(&path, emit_tptp(&self.hol, p)).map_err(io(&path))?;
            files.push(path);
        }
        Ok(files)
    }

    /// Runs the discharge policy on every obligation.
    pub fn discharge(&self, opts: &PipelineOptions) -> Result<Report, PipelineError> {
        let files = match (&opts.emit_dir, &opts.prover) {
            (Some(d), _) => Some(self.emit(d)?),
            (None, Some(_)) => {
                let d = std::env::temp_dir().join(format!("dholc-{}", std::process::id()));
                Some(self.emit(&d)?)
            }
            (None, None) => None,
        };
        let mut entries = Vec::new();
        let mut pending = Vec::new();
        for (i, (ob, p)) in self.obligations.iter().zip(&self.problems).enumerate() {
            let start = Instant::now();
            let mut entry = ReportEntry {
                id: ob.id.clone(),
                rule: ob.rule.clone(),
                span: ob.span.to_string(),
                dhol_goal: print_term(&resugar(&ob.closed())),
                tptp_file: files.as_ref().map(|f| f[i].clone()),
                verdict: "unproved".into(),
                outcome: Outcome::Remaining,
                time: 0.0,
                counterexample: None,
            };
            if let Simplified::Discharged(how) = simplify_obligation(ob, &self.check.signature) {
                entry.verdict = format!("simplified({how})");
                entry.outcome = Outcome::Discharged;
            } else if opts.oracle_size > 0 {
                let cfg = OracleConfig { bound: opts.oracle_size, budget: opts.oracle_budget };
                match check_valid_finite(&self.hol, &p.formula, cfg) {
                    OracleVerdict::Valid { bound } => {
                        entry.verdict = format!("finite-valid({bound})");
                        entry.outcome = Outcome::Discharged;
                    }
                    OracleVerdict::Counterexample(m) => {
                        entry.verdict = "counterexample".into();
                        entry.outcome = Outcome::Refuted;
                        entry.counterexample = Some(m.to_string());
                    }
                    OracleVerdict::Inconclusive(why) => entry.verdict = format!("oracle-inconclusive({why})"),
                }
            }
            entry.time = start.elapsed().as_secs_f64();
            if entry.outcome != Outcome::Discharged && opts.prover.is_some() {
                pending.push(i);
            }
            entries.push(entry);
        }
        if let (Some(prover), Some(files)) = (&opts.prover, &files) {
            run_prover(prover, opts.jobs.max(1), files, &pending, &mut entries)?;
        }
        Ok(Report::new(&self.name, entries, self.check.warnings.clone()))
    }
}

fn run_prover(
    prover: &Prover,
    jobs: usize,
    files: &[PathBuf],
    pending: &[usize],
    entries: &mut [ReportEntry],
) -> Result<(), PipelineError> {
    let next = AtomicUsize::new(0);
    let results = Mutex::new(Vec::new());
    std::thread::scope(|s| {
        for _ in 0..jobs.min(pending.len()) {
            s.spawn(|| loop {
                let k = next.fetch_add(1, Ordering::SeqCst);
                let Some(&i) = pending.get(k) else { break };
                let r = prover.prove_and_save(&files[i]);
                results.lock().expect("prover results").push((i, r));
            });
        }
    });
    let mut results = results.into_inner().expect("prover results");
    results.sort_by_key(|(i, _)| *i);
    for (i, r) in results {
        let (v, _) = r.map_err(|source| PipelineError::Io { path: files[i].with_extension("out"), source })?;
        let e = &mut entries[i];
        e.time += v.seconds;
        match v.status {
            ProverStatus::Theorem if e.outcome == Outcome::Refuted => {
                return Err(PipelineError::Disagreement {
                    id: e.id.clone(),
                    model: e.counterexample.clone().unwrap_or_default(),
                });
            }
            ProverStatus::Theorem => {
                e.verdict = "theorem".into();
                e.outcome = Outcome::Discharged;
            }
            ProverStatus::CounterSatisfiable => {
                e.verdict = if e.outcome == Outcome::Refuted { "counterexample".into() } else { "countersatisfiable".into() };
                e.outcome = Outcome::Refuted;
            }
            _ if e.outcome == Outcome::Refuted => {}
            other => e.verdict = format!("prover:{other}"),
        }
    }
    Ok(())
}

/// Convenience wrapper: compile and discharge.
pub fn run(theory: &Theory, opts: &PipelineOptions) -> Result<Report, PipelineError> {
    compile(theory, opts)?.discharge(opts)
}
