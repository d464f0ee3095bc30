use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;

use pncodes::report::{self, emit, emit_csv, Check, Emit, ExperimentConfig, StageError};
use pncodes::theory::{rouayheb_check, sphere_packing_check};
use pncodes::{Error, Family};

/// Subfield codes of perfect nonlinear functions: enumerate, predict, compare.
#[derive(Parser)]
#[command(name = "pncodes", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment.
    Run(ExperimentArgs),
    /// Run every `*.toml` experiment in a directory, in parallel.
    Batch {
        dir: PathBuf,
        #[arg(long)]
        emit: Option<Emit>,
        #[arg(long, env = "PNCODES_BUDGET")]
        budget: Option<u64>,
    },
    /// Closed-form predictions only, no enumeration.
    PredictOnly(ExperimentArgs),
    /// Evaluate both distance bounds for `[n, k, d]_q`.
    Bounds {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        k: u32,
        #[arg(long)]
        d: usize,
        #[arg(long)]
        q: u32,
        #[arg(long, default_value = "text")]
        emit: Emit,
    },
}

#[derive(Args)]
struct ExperimentArgs {
    /// TOML experiment file; flags below override its values.
    config: Option<PathBuf>,
    #[arg(long)]
    p: Option<u32>,
    #[arg(long)]
    m: Option<u32>,
    #[arg(long)]
    family: Option<Family>,
    /// Family parameter as `key=value`; repeatable.
    #[arg(long = "param", value_name = "KEY=VALUE")]
    params: Vec<String>,
    /// Check to run (`all` for every applicable one); repeatable.
    #[arg(long = "check", value_name = "CHECK")]
    checks: Vec<String>,
    #[arg(long)]
    emit: Option<Emit>,
    /// Enumeration budget in work units.
    #[arg(long, env = "PNCODES_BUDGET")]
    budget: Option<u64>,
    /// Append wall-clock time to text output.
    #[arg(long)]
    timing: bool,
}

fn read_config(path: &Path) -> Result<ExperimentConfig, Error> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::InvalidParameter(format!("{}: {e}", path.display())))?;
    ExperimentConfig::from_toml(&text).map_err(|e| match e {
        Error::InvalidParameter(m) => Error::InvalidParameter(format!("{}: {m}", path.display())),
        other => other,
    })
}

fn build_config(args: &ExperimentArgs) -> Result<ExperimentConfig, Error> {
    let mut cfg = match &args.config {
        Some(path) => read_config(path)?,
        None => match (args.p, args.m, args.family) {
            (Some(p), Some(m), Some(f)) => ExperimentConfig::new(p, m, f),
            _ => {
                return Err(Error::InvalidParameter(
                    "give a config file or all of --p, --m, --family".into(),
                ))
            }
        },
    };
    if let Some(p) = args.p {
        cfg.p = p;
    }
    if let Some(m) = args.m {
        cfg.m = m;
    }
    if let Some(f) = args.family {
        cfg.family = f;
    }
    for kv in &args.params {
        cfg.set_param(kv)?;
    }
    if !args.checks.is_empty() {
        let mut checks = Vec::new();
        for c in &args.checks {
            if c == "all" {
                checks.extend(Check::ALL);
            } else {
                checks.push(c.parse::<Check>().map_err(Error::InvalidParameter)?);
            }
        }
        cfg = cfg.with_checks(checks);
    }
    if let Some(e) = args.emit {
        cfg.emit = e;
    }
    if args.budget.is_some() {
        cfg.budget = args.budget;
    }
    Ok(cfg)
}

fn fail(code: u8, msg: impl std::fmt::Display) -> ExitCode {
    eprintln!("error: {msg}");
    ExitCode::from(code)
}

fn run_one(args: ExperimentArgs, predict_only: bool) -> ExitCode {
    let cfg = match build_config(&args) {
        Ok(c) => c,
        Err(e) => return fail(2, e),
    };
    let start = Instant::now();
    let result = if predict_only { report::predict_only(&cfg) } else { report::run_experiment(&cfg) };
    match result {
        Ok(mut r) => {
            if args.timing {
                r.timing = Some(start.elapsed().as_secs_f64());
            }
            print!("{}", emit(&r, cfg.emit));
            if let Some(msg) = &r.incomplete {
                eprintln!("incomplete: {msg}");
            }
            ExitCode::from(r.exit_code() as u8)
        }
        Err(e) => fail(e.exit_code() as u8, e),
    }
}

fn run_batch(dir: &Path, emit_override: Option<Emit>, budget: Option<u64>) -> ExitCode {
    let mut files: Vec<PathBuf> = match std::fs::read_dir(dir) {
        Ok(rd) => rd
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x == "toml"))
            .collect(),
        Err(e) => return fail(2, format!("{}: {e}", dir.display())),
    };
    files.sort();
    if files.is_empty() {
        return fail(2, format!("no .toml experiments in {}", dir.display()));
    }
    let results: Vec<(String, Result<report::Report, StageError>)> = files
        .par_iter()
        .map(|path| {
            let name = path.file_stem().unwrap().to_string_lossy().into_owned();
            match read_config(path) {
                Ok(mut cfg) => {
                    if budget.is_some() {
                        cfg.budget = budget;
                    }
                    (name, report::run_experiment(&cfg))
                }
                Err(source) => (name, Err(StageError { stage: report::Stage::Config, source })),
            }
        })
        .collect();

    let fmt = emit_override.unwrap_or(Emit::Text);
    let mut code = 0;
    let mut json = Vec::new();
    if fmt == Emit::Csv {
        println!("experiment,code,weight,enumerated,predicted,flag");
    }
    for (name, res) in &results {
        let c = match res {
            Ok(r) => r.exit_code(),
            Err(e) => e.exit_code(),
        };
        code = code.max(c);
        match (fmt, res) {
            (Emit::Json, Ok(r)) => json.push(serde_json::json!({ "experiment": name, "report": r })),
            (Emit::Json, Err(e)) => json.push(serde_json::json!({
                "experiment": name,
                "error": { "stage": e.stage, "message": e.source.to_string() },
            })),
            (Emit::Csv, Ok(r)) => print!("{}", emit_csv(r, Some(name))),
            (Emit::Text, Ok(r)) => print!("== {name} ==\n{}", emit(r, Emit::Text)),
            (_, Err(e)) => eprintln!("{name}: {e}"),
        }
    }
    if fmt == Emit::Json {
        println!("{}", serde_json::to_string_pretty(&json).unwrap());
    }
    ExitCode::from(code as u8)
}

fn run_bounds(n: usize, k: u32, d: usize, q: u32, fmt: Emit) -> ExitCode {
    let verdicts = match (sphere_packing_check(n, k, d, q), rouayheb_check(n, k, d, q)) {
        (Ok(a), Ok(b)) => vec![a, b],
        (Err(e), _) | (_, Err(e)) => return fail(2, e),
    };
    match fmt {
        Emit::Json => println!("{}", serde_json::to_string_pretty(&verdicts).unwrap()),
        Emit::Csv => {
            println!("bound,n,k,d,q,verdict,max_d,lhs,rhs");
            for v in &verdicts {
                let b = serde_json::to_value(v.bound).unwrap();
                let t = serde_json::to_value(v.verdict).unwrap();
                println!(
                    "{},{},{},{},{},{},{},{},{}",
                    b.as_str().unwrap(),
                    v.n,
                    v.k,
                    v.d,
                    v.q,
                    t.as_str().unwrap(),
                    v.max_d,
                    v.lhs,
                    v.rhs
                );
            }
        }
        Emit::Text => {
            for v in &verdicts {
                let b = serde_json::to_value(v.bound).unwrap();
                let t = serde_json::to_value(v.verdict).unwrap();
                println!(
                    "{} [{},{},{}]_{}: {} (largest admissible d = {}; {} vs {})",
                    b.as_str().unwrap(),
                    v.n,
                    v.k,
                    v.d,
                    v.q,
                    t.as_str().unwrap(),
                    v.max_d,
                    v.lhs,
                    v.rhs
                );
            }
        }
    }
    ExitCode::SUCCESS
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match cli.command {
        Command::Run(args) => run_one(args, false),
        Command::PredictOnly(args) => run_one(args, true),
        Command::Batch { dir, emit, budget } => run_batch(&dir, emit, budget),
        Command::Bounds { n, k, d, q, emit } => run_bounds(n, k, d, q, emit),
    }
}
