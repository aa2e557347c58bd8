//! `svtensor`: centroids, direct-sum splittings, nilpotent normal forms and
//! degeneration certificates for tensors given as JSON.

mod commands;
mod input;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context, Result};
use clap::{Parser, Subcommand};
use serde::{Deserialize, Serialize};
use serde_json::Value;
use svtensor::centroid::EndoTuple;
use svtensor::poly::DEFAULT_SEED;
use svtensor::{Field, SVTensor};

use commands::{Kind, Request};

#[derive(Parser)]
#[command(name = "svtensor", version, about = "Exact structure analysis of Segre-Veronese tensors")]
struct Cli {
    /// Working field: Q or Fp:<p>. Input is reduced into it.
    #[arg(long, global = true)]
    field: Option<String>,

    /// Seed for the factorization PRNG over prime fields
    #[arg(long, global = true, default_value_t = DEFAULT_SEED)]
    seed: u64,

    /// Print the JSON artifact instead of the readable report
    #[arg(long, global = true)]
    json: bool,

    /// Write the JSON artifact to this file
    #[arg(short, long, global = true)]
    output: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Full pipeline: conciseness, centroid, splitting, normal forms, degenerations
    Analyze { input: PathBuf },
    /// Centroid algebra, cross-checked by both algorithms
    Centroid { input: PathBuf },
    /// Finest direct-sum decomposition
    Split { input: PathBuf },
    /// Normal form with respect to a nilpotent centroid element
    NormalForm {
        input: PathBuf,
        /// Element file; defaults to the deepest nilpotent of a local centroid
        #[arg(long)]
        element: Option<PathBuf>,
    },
    /// Degeneration from direct sums to the tensor
    Degenerate {
        input: PathBuf,
        #[arg(long)]
        element: Option<PathBuf>,
        /// Pairwise distinct nodes, e.g. "1,0,-1"
        #[arg(long)]
        omega: Option<String>,
        /// Split the fiber at this parameter value
        #[arg(long)]
        evaluate: Option<String>,
    },
    /// Recompute and re-verify a saved artifact
    Check { artifact: PathBuf },
}

/// A saved command result together with the inputs that produced it.
#[derive(Serialize, Deserialize)]
struct Artifact {
    kind: Kind,
    seed: u64,
    tensor: SVTensor,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    element: Option<Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    omega: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    evaluate: Option<String>,
    result: Value,
}

impl Artifact {
    fn new(kind: Kind, req: &Request, result: Value) -> Result<Artifact> {
        Ok(Artifact {
            kind,
            seed: req.seed,
            tensor: req.tensor.clone(),
            element: req.element.as_ref().map(serde_json::to_value).transpose()?,
            omega: req.omega.as_ref().map(|w| w.iter().map(|s| s.to_string()).collect()),
            evaluate: req.evaluate.as_ref().map(|s| s.to_string()),
            result,
        })
    }

    fn request(&self) -> Result<Request> {
        let field = self.tensor.field();
        Ok(Request {
            tensor: self.tensor.clone(),
            element: self.element.clone().map(|v| input::element_from_value(v, field)).transpose()?,
            omega: self.omega.as_ref().map(|w| input::parse_scalars(&w.join(","), field)).transpose()?,
            evaluate: self.evaluate.as_ref().map(|s| field.parse_scalar(s)).transpose()?,
            seed: self.seed,
        })
    }
}

fn element_arg(path: Option<&Path>, tensor: &SVTensor) -> Result<Option<EndoTuple>> {
    path.map(|p| input::read_element(p, tensor.field())).transpose()
}

fn emit(cli: &Cli, kind: Kind, req: &Request) -> Result<()> {
    let outcome = commands::run(kind, req)?;
    let artifact = Artifact::new(kind, req, outcome.result)?;
    let text = serde_json::to_string_pretty(&artifact)?;
    if let Some(path) = &cli.output {
        fs::write(path, &text).with_context(|| format!("writing {}", path.display()))?;
    }
    if cli.json {
        println!("{text}");
    } else {
        print!("{}", outcome.pretty);
    }
    Ok(())
}

fn check(cli: &Cli, path: &Path) -> Result<()> {
    let artifact: Artifact = serde_json::from_value(input::read_json(path)?)
        .with_context(|| format!("artifact in {}", path.display()))?;
    let req = artifact.request()?;
    let fresh = commands::run(artifact.kind, &req)?;
    if fresh.result != artifact.result {
        return Err(anyhow!(CheckFailed("recomputed result differs from the stored one".into())));
    }
    let passed = commands::semantic_checks(artifact.kind, &req, &artifact.result)
        .map_err(|e| anyhow!(CheckFailed(e.to_string())))?;
    if cli.json {
        println!("{}", serde_json::json!({ "kind": artifact.kind, "ok": true, "checks": passed }));
    } else {
        println!("ok: recomputed result matches");
        for p in passed {
            println!("ok: {p}");
        }
    }
    Ok(())
}

#[derive(Debug)]
struct CheckFailed(String);

impl std::fmt::Display for CheckFailed {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "check failed: {}", self.0)
    }
}

impl std::error::Error for CheckFailed {}

fn run(cli: &Cli) -> Result<()> {
    let field: Option<Field> = cli.field.as_deref().map(str::parse).transpose()?;
    let request = |input: &Path, element: Option<&Path>| -> Result<Request> {
        let tensor = input::read_tensor(input, field)?;
        Ok(Request { element: element_arg(element, &tensor)?, tensor, omega: None, evaluate: None, seed: cli.seed })
    };
    match &cli.command {
        Command::Analyze { input } => emit(cli, Kind::Analysis, &request(input, None)?),
        Command::Centroid { input } => emit(cli, Kind::Centroid, &request(input, None)?),
        Command::Split { input } => emit(cli, Kind::Split, &request(input, None)?),
        Command::NormalForm { input, element } => {
            emit(cli, Kind::NormalForm, &request(input, element.as_deref())?)
        }
        Command::Degenerate { input, element, omega, evaluate } => {
            let mut req = request(input, element.as_deref())?;
            let f = req.tensor.field();
            req.omega = omega.as_deref().map(|s| input::parse_scalars(s, f)).transpose()?;
            req.evaluate = evaluate.as_deref().map(|s| f.parse_scalar(s)).transpose()?;
            emit(cli, Kind::Degeneration, &req)
        }
        Command::Check { artifact } => check(cli, artifact),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            let refusal = e.chain().any(|c| c.downcast_ref::<svtensor::Error>().is_some_and(|s| s.is_refusal()));
            ExitCode::from(if refusal { 2 } else { 1 })
        }
    }
}
