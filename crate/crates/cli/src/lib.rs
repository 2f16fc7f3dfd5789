//! Batch front-end for the laboratory. Every subcommand reads JSON inputs,
//! writes one JSON or CSV report, and reports its verdict through the exit
//! code: 0 for success, 2 for a verdict failure, 1 for usage or input errors.

mod commands;
mod error;
mod manifest;

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

pub use error::{CliError, Result};
pub use manifest::{num, sha256_hex, InputFile, RunManifest, Table};

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_FAIL: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "gslab", version, about = "Picone identities, null sequences and ground-state classification for radial p-Laplacian functionals")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

/// Flags shared by every subcommand.
#[derive(Debug, Clone, Args, Serialize)]
pub struct Common {
    /// Output file; stdout when absent.
    #[arg(long)]
    #[serde(skip)]
    pub out: Option<PathBuf>,
    /// Seed for randomized sweeps.
    #[arg(long, default_value_t = 0)]
    #[serde(skip)]
    pub seed: u64,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Equivalence constants of the scalar kernel, one CSV row per p.
    VerifyInequality(commands::VerifyInequality),
    /// Random pointwise check of the Picone identity and its split.
    PiconeCheck(commands::PiconeCheck),
    /// Ratios Q(vw)/S(v,w) along a test family (JSON).
    Energy(commands::EnergyCmd),
    /// Strong or weak residuals of a named family (CSV).
    Residual(commands::ResidualCmd),
    /// Tail-integral classification of a positive solution (JSON).
    Classify(commands::ClassifyCmd),
    /// Candidate null sequence of logarithmic cutoffs (CSV).
    Nullseq(commands::NullseqCmd),
    /// Comparison transfer of a null sequence from Q1 to Q0 (JSON).
    Transfer(commands::TransferCmd),
    /// Transfer between Q and its linearization (CSV).
    Linearize(commands::LinearizeCmd),
    /// Aggregate earlier JSON reports into one document.
    Report(commands::ReportCmd),
}

/// What a subcommand produced.
pub(crate) struct Outcome {
    pub pass: bool,
    pub verdict: String,
    pub body: Body,
}

pub(crate) enum Body {
    /// Fields merged into the JSON report.
    Json(serde_json::Map<String, serde_json::Value>),
    /// CSV table plus the fields of its JSON summary.
    Csv(Table, serde_json::Map<String, serde_json::Value>),
}

fn configure_threads() -> Result<()> {
    let Ok(raw) = std::env::var("GSLAB_THREADS") else { return Ok(()) };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Usage(format!("GSLAB_THREADS must be a positive integer, got `{raw}`")))?;
    // a second call in the same process keeps the first pool
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

fn finish(mut manifest: RunManifest, common: &Common, outcome: Outcome) -> Result<i32> {
    let status = if outcome.pass { "pass" } else { "fail" };
    let document = |manifest: &RunManifest, fields: serde_json::Map<String, serde_json::Value>| {
        let mut doc = serde_json::Map::new();
        doc.insert("status".into(), status.into());
        doc.insert("verdict".into(), outcome.verdict.clone().into());
        doc.extend(fields);
        doc.insert("manifest_sha256".into(), manifest.hash().into());
        doc.insert("manifest".into(), serde_json::to_value(manifest).expect("manifest serializes"));
        let mut text = serde_json::to_string_pretty(&serde_json::Value::Object(doc)).expect("report serializes");
        text.push('\n');
        text
    };
    let out = common.out.as_deref();
    match outcome.body {
        Body::Json(fields) => {
            manifest.outputs = vec![display(out)];
            let text = document(&manifest, fields);
            manifest::write_bytes(out, text.as_bytes())?;
        }
        Body::Csv(table, fields) => {
            let summary = out.map(manifest::sidecar);
            manifest.outputs = std::iter::once(display(out)).chain(summary.as_deref().map(|p| display(Some(p)))).collect();
            let bytes = table.render(&manifest.hash())?;
            manifest::write_bytes(out, &bytes)?;
            if let Some(path) = summary {
                manifest::write_bytes(Some(&path), document(&manifest, fields).as_bytes())?;
            }
        }
    }
    Ok(if outcome.pass { EXIT_OK } else { EXIT_FAIL })
}

fn display(path: Option<&Path>) -> String {
    path.map_or_else(|| "-".to_string(), |p| p.display().to_string())
}

type Runner = Box<dyn FnOnce(&mut RunManifest) -> Result<Outcome>>;

fn dispatch(cli: Cli) -> Result<i32> {
    configure_threads()?;
    let (name, common, params, run): (&str, Common, serde_json::Value, Runner) =
        match cli.command {
            Command::VerifyInequality(c) => ("verify-inequality", c.common.clone(), serde_json::to_value(&c)?, Box::new(move |m| c.run(m))),
            Command::PiconeCheck(c) => ("picone-check", c.common.clone(), serde_json::to_value(&c)?, Box::new(move |m| c.run(m))),
            Command::Energy(c) => ("energy", c.common.clone(), serde_json::to_value(&c)?, Box::new(move |m| c.run(m))),
            Command::Residual(c) => ("residual", c.common.clone(), serde_json::to_value(&c)?, Box::new(move |m| c.run(m))),
            Command::Classify(c) => ("classify", c.common.clone(), serde_json::to_value(&c)?, Box::new(move |m| c.run(m))),
            Command::Nullseq(c) => ("nullseq", c.common.clone(), serde_json::to_value(&c)?, Box::new(move |m| c.run(m))),
            Command::Transfer(c) => ("transfer", c.common.clone(), serde_json::to_value(&c)?, Box::new(move |m| c.run(m))),
            Command::Linearize(c) => ("linearize", c.common.clone(), serde_json::to_value(&c)?, Box::new(move |m| c.run(m))),
            Command::Report(c) => ("report", c.common.clone(), serde_json::to_value(&c)?, Box::new(move |m| c.run(m))),
        };
    let mut manifest = RunManifest::new(name, params, common.seed);
    let outcome = run(&mut manifest)?;
    finish(manifest, &common, outcome)
}

/// Parses `argv` (program name first) and runs the subcommand.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_ERROR } else { EXIT_OK };
        }
    };
    match dispatch(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_ERROR
        }
    }
}
