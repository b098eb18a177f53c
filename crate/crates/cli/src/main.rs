//! `padic-harmonic <verb> --spec job.json [--out report.json]`

mod error;
mod jobs;
mod spec;
mod transfer;

use std::path::PathBuf;

use clap::Parser;
use padic_harmonic::localfield::FieldSpec;
use rayon::prelude::*;
use serde_json::{json, Value as Json};

use error::{core_exit_code, kind, CliError};
use jobs::{check_fields, typed, Job};
use spec::{JobSpec, Verb};

/// Worker count for the parallel parts; defaults to the number of cores.
const THREADS_ENV: &str = "PADIC_HARMONIC_THREADS";

#[derive(Parser)]
#[command(name = "padic-harmonic", version, about = "Exact harmonic analysis on sl2 over local fields")]
struct Cli {
    verb: Verb,
    /// Job file (JSON).
    #[arg(long)]
    spec: PathBuf,
    /// Report path; overrides the job's `output`. Defaults to stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() {
    let code = match run() {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    };
    std::process::exit(code);
}

fn run() -> Result<i32, CliError> {
    let cli = Cli::parse();
    if let Some(n) = std::env::var(THREADS_ENV).ok().and_then(|s| s.parse::<usize>().ok()) {
        // fails only if a pool already exists
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    let path = cli.spec.display().to_string();
    let text = std::fs::read_to_string(&cli.spec).map_err(|source| CliError::Io { path: path.clone(), source })?;
    let raw: Json = serde_json::from_str(&text)
        .map_err(|e| CliError::Schema { pointer: String::new(), message: e.to_string() })?;
    let spec: JobSpec = typed(&raw, "")?;
    if spec.computation != cli.verb {
        return Err(CliError::Schema {
            pointer: "/computation".into(),
            message: format!("job is `{}` but the verb is `{}`", spec.computation.name(), cli.verb.name()),
        });
    }
    check_fields(spec.computation, &spec.fields)?;

    let (report, code) = if spec.computation == Verb::TransferCheck {
        transfer::run(&spec)?
    } else {
        let job = Job::parse(spec.computation, &spec.inputs, &spec.params, "")?;
        let runs = execute(&job, spec.computation, &spec.fields);
        let code = exit_code(&runs);
        let report = json!({
            "computation": spec.computation.name(),
            "runs": runs.into_iter().map(|r| r.json).collect::<Vec<_>>(),
        });
        (report, code)
    };

    let mut out = serde_json::to_string_pretty(&report).expect("reports serialize");
    out.push('\n');
    match cli.out.or(spec.output.map(PathBuf::from)) {
        Some(p) => std::fs::write(&p, out).map_err(|source| CliError::Io { path: p.display().to_string(), source })?,
        None => print!("{out}"),
    }
    Ok(code)
}

/// One field's outcome.
pub struct RunOutcome {
    pub json: Json,
    pub result: Option<Json>,
    pub code: i32,
}

/// Runs the job once per field, in parallel; the output order follows `fields`.
pub fn execute(job: &Job, verb: Verb, fields: &[FieldSpec]) -> Vec<RunOutcome> {
    let cells: Vec<Option<FieldSpec>> = if verb.field_free() { vec![None] } else { fields.iter().copied().map(Some).collect() };
    cells
        .par_iter()
        .map(|&field| match job.run(field) {
            Ok((result, verified)) => RunOutcome {
                json: json!({ "field": field, "verified": verified, "result": result }),
                result: Some(result),
                code: if verified { 0 } else { 2 },
            },
            Err(e) => {
                let code = core_exit_code(&e);
                RunOutcome {
                    json: json!({
                        "field": field,
                        "error": { "kind": kind(&e), "message": e.to_string(), "exit_code": code },
                    }),
                    result: None,
                    code,
                }
            }
        })
        .collect()
}

/// The first nonzero code in field order.
pub fn exit_code(runs: &[RunOutcome]) -> i32 {
    runs.iter().map(|r| r.code).find(|&c| c != 0).unwrap_or(0)
}
