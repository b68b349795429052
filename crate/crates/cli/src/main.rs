use std::fs;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::Parser;
use dreg_cli::job::{check_requirements, parse_space};
use dreg_cli::{batch_status, parse_document, run_batch, Command, ExitStatus, JobError, JobSpec};
use serde_json::Value;

/// Regularity of isogeometric functions on degenerate geometry maps.
///
/// Reads a JSON job document (an object, or an array for a batch), writes a JSON
/// report and prints one summary line per job to stderr.
/// Exit codes: 0 success, 1 numerical failure, 2 geometry rejected,
/// 3 internal inconsistency, 4 I/O or parse error.
#[derive(Parser, Debug)]
#[command(name = "dreg", version)]
struct Args {
    /// Overrides the command of every job; `demo` needs no input.
    #[arg(value_parser = parse_command)]
    command: Option<Command>,
    /// Job document; read from stdin when omitted.
    #[arg(long)]
    input: Option<PathBuf>,
    /// Report destination; stdout when omitted.
    #[arg(long)]
    output: Option<PathBuf>,
    /// Attach oracle diagnostics to classifications.
    #[arg(long)]
    verify: bool,
    /// Skip the certification tier of the Jacobian positivity check.
    #[arg(long)]
    trust_jacobian: bool,
    /// Truncation depth for the oracle (default 20).
    #[arg(long)]
    j_max: Option<u32>,
    /// Coefficient box for constraint systems, as JxK.
    #[arg(long)]
    space: Option<String>,
}

fn parse_command(s: &str) -> Result<Command, String> {
    serde_json::from_value(Value::String(s.to_string())).map_err(|_| {
        format!("unknown command {s:?}; expected validate, standardize, classify, constrain, verify or demo")
    })
}

fn read_input(path: Option<&Path>) -> Result<String> {
    match path {
        Some(p) => fs::read_to_string(p).with_context(|| format!("reading {}", p.display())),
        None => {
            let mut s = String::new();
            io::stdin()
                .read_to_string(&mut s)
                .context("reading stdin")?;
            Ok(s)
        }
    }
}

fn write_output(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            let mut out = io::stdout().lock();
            out.write_all(text.as_bytes()).context("writing stdout")?;
            out.flush().context("writing stdout")
        }
    }
}

fn render(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("reports serialize");
    s.push('\n');
    s
}

/// Applies command-line overrides and rechecks what the command needs.
fn apply_overrides(args: &Args, job: &mut JobSpec) -> Result<(), JobError> {
    if let Some(c) = args.command {
        job.command = c;
    }
    job.flags.verify |= args.verify;
    job.flags.trust_jacobian |= args.trust_jacobian;
    if args.j_max.is_some() {
        job.flags.j_max = args.j_max;
    }
    if let Some(s) = &args.space {
        job.space = Some(parse_space(s)?);
    }
    check_requirements(job)
}

fn main() -> ExitCode {
    let args = Args::parse();
    match real_main(&args) {
        Ok(status) => ExitCode::from(status.code()),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(ExitStatus::InputError.code())
        }
    }
}

fn real_main(args: &Args) -> Result<ExitStatus> {
    let (batch, mut jobs) = if args.command == Some(Command::Demo) && args.input.is_none() {
        (false, vec![Ok(JobSpec::new(Command::Demo))])
    } else {
        match parse_document(&read_input(args.input.as_deref())?) {
            Ok(parsed) => parsed,
            Err(e) => {
                let report = serde_json::json!({"error": e.to_string(), "exit_code": ExitStatus::InputError.code()});
                write_output(args.output.as_deref(), &render(&report))?;
                eprintln!("error: {e}");
                return Ok(ExitStatus::InputError);
            }
        }
    };
    for job in jobs.iter_mut() {
        if let Ok(j) = job {
            if let Err(e) = apply_overrides(args, j) {
                *job = Err(e);
            }
        }
    }

    let outcomes = run_batch(&jobs);
    for (i, (job, out)) in jobs.iter().zip(&outcomes).enumerate() {
        let line = out
            .report
            .get("summary")
            .or_else(|| out.report.get("error"))
            .and_then(Value::as_str)
            .unwrap_or("");
        eprintln!("job {i}: exit {}: {line}", out.status.code());
        if let Ok(JobSpec { flags, .. }) = job {
            if let Some(p) = &flags.output {
                write_output(Some(p), &render(&out.report))?;
            }
        }
    }
    let doc = if batch {
        Value::Array(outcomes.iter().map(|o| o.report.clone()).collect())
    } else {
        outcomes[0].report.clone()
    };
    write_output(args.output.as_deref(), &render(&doc))?;
    Ok(batch_status(&outcomes))
}
