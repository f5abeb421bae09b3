use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;

use alglab_core::pipeline::{run, InstanceSource, RunConfig};
use clap::{ArgGroup, Parser};

/// Check a quadratic Lie algebroid and build its compatible metrics.
///
/// Exit status: 0 when every enabled check passes, 1 when a check fails,
/// 2 on invalid input. `ALGLAB_THREADS` caps the number of worker threads.
#[derive(Debug, Parser)]
#[command(name = "alglab", version)]
#[command(group(ArgGroup::new("instance").required(true).args(["input", "builtin"])))]
struct Cli {
    /// TOML instance file.
    #[arg(long, value_name = "FILE")]
    input: Option<PathBuf>,
    /// Built-in instance: zero_anchor_bundle, scaled_translations,
    /// identity_anchor, so2_linear, so3_euclidean.
    #[arg(long, value_name = "NAME")]
    builtin: Option<String>,
    /// Builtin parameter, repeatable.
    #[arg(long = "param", value_name = "K=V", value_parser = parse_param, requires = "builtin")]
    params: Vec<(String, String)>,
    /// Random samples added to the box corners and center.
    #[arg(long, value_name = "N")]
    samples: Option<usize>,
    #[arg(long, value_name = "S")]
    seed: Option<u64>,
    /// Residual tolerance.
    #[arg(long, value_name = "T")]
    tol: Option<f64>,
    /// Comma-separated stages to run.
    #[arg(long, value_name = "LIST", value_delimiter = ',')]
    stages: Option<Vec<String>>,
    /// Write the JSON report here.
    #[arg(long, value_name = "PATH")]
    json: Option<PathBuf>,
    /// No summary on stdout.
    #[arg(long)]
    quiet: bool,
    /// Run metric stages even if the axioms fail.
    #[arg(long)]
    force: bool,
}

fn parse_param(s: &str) -> Result<(String, String), String> {
    match s.split_once('=') {
        Some((k, v)) if !k.trim().is_empty() => Ok((k.trim().to_string(), v.trim().to_string())),
        _ => Err(format!("expected K=V, got `{s}`")),
    }
}

fn threads_from_env() -> Result<Option<usize>, String> {
    match std::env::var("ALGLAB_THREADS") {
        Err(_) => Ok(None),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(t) if t > 0 => Ok(Some(t)),
            _ => Err(format!(
                "ALGLAB_THREADS must be a positive integer, got `{v}`"
            )),
        },
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let fail = |msg: String| {
        eprintln!("alglab: error: {msg}");
        ExitCode::from(2)
    };
    let threads = match threads_from_env() {
        Ok(t) => t,
        Err(e) => return fail(e),
    };
    let source = match (cli.input, cli.builtin) {
        (Some(path), _) => InstanceSource::File(path),
        (None, Some(name)) => {
            let mut params = BTreeMap::new();
            for (k, v) in cli.params {
                if params.insert(k.clone(), v).is_some() {
                    return fail(format!("parameter `{k}` given twice"));
                }
            }
            InstanceSource::Builtin { name, params }
        }
        (None, None) => unreachable!("clap requires an instance"),
    };
    let config = RunConfig {
        source,
        samples: cli.samples,
        seed: cli.seed,
        tol: cli.tol,
        stages: cli.stages,
        force: cli.force,
        threads,
    };
    let report = match run(&config) {
        Ok(r) => r,
        Err(e) => return fail(e.to_string()),
    };
    if let Some(path) = &cli.json {
        if let Err(e) = std::fs::write(path, report.to_json()) {
            return fail(format!("cannot write {}: {e}", path.display()));
        }
    }
    if !cli.quiet {
        print!("{}", report.to_text());
    }
    ExitCode::from(report.exit_code as u8)
}
