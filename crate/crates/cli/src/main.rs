use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use anyhow::{bail, Context as _};
use clap::{Args, Parser, Subcommand};

use dhol::atp::Prover;
use dhol::kernel::{checker_for, KernelOptions};
use dhol::parser::{parse_theory_named, parse_type, print_type};
use dhol::pipeline::{compile, Outcome, PipelineOptions, Report};
use dhol::subtype::normalize;
use dhol::syntax::{resugar_type, Context, Theory};
use dhol::translate::TranslateOptions;

/// Type checker and proof-obligation compiler for dependent HOL with
/// refinement and quotient types.
#[derive(Parser)]
#[command(name = "dholc", version)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Check a theory and discharge its obligations locally (simplifier and
    /// optional finite-model oracle).
    Check {
        file: PathBuf,
        #[command(flatten)]
        flags: DischargeFlags,
    },
    /// Like `check`, but also sends remaining obligations to an external prover.
    Prove {
        file: PathBuf,
        #[command(flatten)]
        flags: DischargeFlags,
    },
    /// Write one THF problem per obligation and conjecture.
    Translate {
        file: PathBuf,
        /// Output directory.
        #[arg(short, long, default_value = ".")]
        out: PathBuf,
        #[command(flatten)]
        logic: LogicFlags,
    },
    /// Print the normal form of a type.
    Normalize {
        /// Type expression, e.g. "(A | p) | q".
        ty: String,
        /// Theory providing the symbols and definitions the type uses.
        #[arg(long)]
        theory: Option<PathBuf>,
        #[command(flatten)]
        logic: LogicFlags,
    },
}

#[derive(Args, Clone)]
struct LogicFlags {
    /// Do not use the quotiented-codomain law during normalization.
    #[arg(long)]
    no_quot_cod_axiom: bool,
    /// Emit pure equality encodings instead of native connectives.
    #[arg(long)]
    raw_core: bool,
}

#[derive(Args, Clone)]
struct DischargeFlags {
    /// Prover command template with `{file}` and optional `{timeout}`.
    #[arg(long, env = "DHOLC_PROVER")]
    prover: Option<String>,
    /// Prover timeout in seconds.
    #[arg(long, default_value_t = 30)]
    timeout: u64,
    /// Largest carrier size for the finite-model oracle (0 = off).
    #[arg(long, default_value_t = 0)]
    oracle_size: u64,
    /// Concurrent prover processes.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    /// Directory receiving the THF problems (and prover transcripts).
    #[arg(long)]
    emit_tptp: Option<PathBuf>,
    /// Write the JSON report here.
    #[arg(long)]
    report: Option<PathBuf>,
    #[command(flatten)]
    logic: LogicFlags,
}

impl LogicFlags {
    fn kernel(&self) -> KernelOptions {
        KernelOptions { quot_cod_axiom: !self.no_quot_cod_axiom }
    }

    fn options(&self) -> PipelineOptions {
        PipelineOptions {
            kernel: self.kernel(),
            translate: TranslateOptions { raw_core: self.raw_core },
            ..PipelineOptions::default()
        }
    }
}

fn load(file: &Path) -> anyhow::Result<Theory> {
    let text = std::fs::read_to_string(file).with_context(|| format!("cannot read {}", file.display()))?;
    let name = file.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "theory".into());
    Ok(parse_theory_named(&text, &file.to_string_lossy(), &name)?)
}

fn discharge(file: &Path, flags: &DischargeFlags, use_prover: bool) -> anyhow::Result<i32> {
    let theory = load(file)?;
    let mut opts = flags.logic.options();
    opts.oracle_size = flags.oracle_size;
    opts.jobs = flags.jobs;
    opts.emit_dir = flags.emit_tptp.clone();
    if use_prover {
        let Some(template) = &flags.prover else {
            bail!("no prover configured: pass --prover or set DHOLC_PROVER");
        };
        opts.prover = Some(Prover::new(template.clone(), Duration::from_secs(flags.timeout)));
    }
    let report = compile(&theory, &opts)?.discharge(&opts)?;
    print_report(&report);
    if let Some(path) = &flags.report {
        let json = serde_json::to_string_pretty(&report)?;
        std::fs::write(path, json + "\n").with_context(|| format!("cannot write {}", path.display()))?;
    }
    Ok(report.exit_code())
}

fn print_report(r: &Report) {
    for w in &r.warnings {
        eprintln!("warning: {w}");
    }
    for e in &r.obligations {
        println!("{:<28} {:<16} {}", e.id, e.rule, e.verdict);
        if e.outcome != Outcome::Discharged {
            println!("    {}", e.dhol_goal);
        }
        if let Some(m) = &e.counterexample {
            print!("{m}");
        }
    }
    let s = r.summary;
    println!(
        "{}: {} obligations, {} discharged, {} remaining, {} refuted",
        r.theory, s.total, s.discharged, s.remaining, s.refuted
    );
}

fn translate(file: &Path, out: &Path, logic: &LogicFlags) -> anyhow::Result<i32> {
    let theory = load(file)?;
    let compiled = compile(&theory, &logic.options())?;
    if compiled.obligations.is_empty() {
        println!("{}: nothing to emit", compiled.name);
        return Ok(0);
    }
    for f in compiled.emit(out)? {
        println!("{}", f.display());
    }
    Ok(0)
}

fn normalize_cmd(text: &str, theory: Option<&Path>, logic: &LogicFlags) -> anyhow::Result<i32> {
    let a = parse_type(text, &[])?;
    let nf = match theory {
        Some(file) => {
            let th = load(file)?;
            let mut ck = checker_for(&th, logic.kernel())?;
            let a = ck.prepare_type(&a)?;
            ck.check_type(&Context::new(), &a)?;
            normalize(&a, logic.kernel())
        }
        None => normalize(&a, logic.kernel()),
    };
    println!("{}", print_type(&resugar_type(&nf.to_type())));
    Ok(0)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.cmd {
        Cmd::Check { file, flags } => discharge(file, flags, false),
        Cmd::Prove { file, flags } => discharge(file, flags, true),
        Cmd::Translate { file, out, logic } => translate(file, out, logic),
        Cmd::Normalize { ty, theory, logic } => normalize_cmd(ty, theory.as_deref(), logic),
    };
    match result {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
