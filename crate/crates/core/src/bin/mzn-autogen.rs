use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};

use mzn_autogen::analysis::{check_conformance, validate};
use mzn_autogen::backend::{Backend, GenerationParams, HttpBackend, ScriptedBackend};
use mzn_autogen::catalog::builtin_instances;
use mzn_autogen::config::{resolve_spec, BackendConfig};
use mzn_autogen::diagnostic::{has_errors, render_lines};
use mzn_autogen::orchestrator::{replay_record, run_instance, run_suite_parallel, RunConfig, RunRecord, SolverMode};
use mzn_autogen::report::{export_results, render_table, ExportFormat};
use mzn_autogen::solving::{run_external, solve_builtin, ExternalConfig, ExternalError, SolveLimits};
use mzn_autogen::syntax::parse_model;

const EXIT_OK: u8 = 0;
const EXIT_REJECTED: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_BACKEND: u8 = 3;
const EXIT_INTERNAL: u8 = 4;

/// Generate, check and repair MiniZinc-subset models.
#[derive(Parser)]
#[command(name = "mzn-autogen", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the generate / repair loop for one spec.
    Generate {
        /// Spec file or `builtin:N`.
        #[arg(long)]
        spec: String,
        #[command(flatten)]
        source: BackendSource,
        #[arg(long, default_value_t = 10)]
        max_steps: u32,
        #[command(flatten)]
        solver: SolverArgs,
        /// Write the run record (with trace) to this file.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print diagnostics and the conformance report for a model.
    Check {
        model: PathBuf,
        /// Spec file or `builtin:N`.
        #[arg(long)]
        spec: String,
    },
    /// Solve a model and print the outcome.
    Solve {
        model: PathBuf,
        #[command(flatten)]
        solver: SolverArgs,
    },
    /// Run the ten built-in instances and print the results table.
    Bench {
        #[command(flatten)]
        source: BackendSource,
        #[arg(long, default_value_t = 10)]
        max_steps: u32,
        #[command(flatten)]
        solver: SolverArgs,
        /// Directory for results.json, results.csv and per-run records.
        #[arg(long, default_value = "bench-out")]
        out_dir: PathBuf,
        /// Instances in flight at once (live backends only).
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },
    /// Re-run a recorded run from its trace; exit 0 iff the result is identical.
    Replay { record: PathBuf },
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct BackendSource {
    /// JSON replay script of canned backend responses.
    #[arg(long)]
    script: Option<PathBuf>,
    /// key=value backend config for a live endpoint.
    #[arg(long)]
    backend: Option<PathBuf>,
}

#[derive(Args)]
struct SolverArgs {
    /// Use an external MiniZinc toolchain instead of the built-in solver.
    #[arg(long)]
    external: bool,
    #[arg(long, default_value = "minizinc")]
    binary: PathBuf,
    #[arg(long, default_value = "gecode")]
    solver: String,
    /// Solver time limit in milliseconds.
    #[arg(long, default_value_t = 10_000)]
    time_limit: u64,
    #[arg(long)]
    keep_artifacts: bool,
}

impl SolverArgs {
    fn mode(&self) -> SolverMode {
        if self.external {
            SolverMode::External(ExternalConfig {
                binary_path: self.binary.clone(),
                solver_name: self.solver.clone(),
                time_limit_ms: self.time_limit,
                keep_artifacts: self.keep_artifacts,
            })
        } else {
            SolverMode::Builtin
        }
    }

    fn limits(&self) -> SolveLimits {
        SolveLimits {
            max_time_ms: self.time_limit.max(1),
            ..SolveLimits::default()
        }
    }
}

/// A failure with its exit code.
struct Failure(u8, anyhow::Error);

fn usage(e: impl Into<anyhow::Error>) -> Failure {
    Failure(EXIT_USAGE, e.into())
}

fn internal(e: impl Into<anyhow::Error>) -> Failure {
    Failure(EXIT_INTERNAL, e.into())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(Failure(code, e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(code)
        }
    }
}

fn run(command: Command) -> Result<u8, Failure> {
    match command {
        Command::Generate { spec, source, max_steps, solver, out } => {
            let spec = resolve_spec(&spec).map_err(usage)?;
            let (backend, config) = build_backend(&source, max_steps, &solver)?;
            let record = run_instance(&spec, backend.as_ref(), &config).map_err(usage)?;
            println!("{}", record.final_model);
            println!("% valid: {}  correct: {}  steps: {}  tokens: {}", record.valid, record.correct, record.steps, record.tokens);
            for m in &record.mismatches {
                println!("% mismatch: {m}");
            }
            if let Some(path) = out {
                write_json(&path, &record)?;
            }
            if let Some(reason) = &record.aborted {
                eprintln!("error: run aborted: {reason}");
                return Ok(EXIT_BACKEND);
            }
            Ok(if record.valid && record.correct { EXIT_OK } else { EXIT_REJECTED })
        }
        Command::Check { model, spec } => {
            let spec = resolve_spec(&spec).map_err(usage)?;
            let text = read_text(&model)?;
            let ast = match parse_model(&text) {
                Ok(ast) => ast,
                Err(diagnostics) => {
                    print!("{}", render_lines(&diagnostics));
                    println!("valid: no\ncorrect: no");
                    return Ok(EXIT_REJECTED);
                }
            };
            let diagnostics = validate(&ast);
            print!("{}", render_lines(&diagnostics));
            let valid = !has_errors(&diagnostics)
                && solve_builtin(&ast, &SolveLimits::default()).executed();
            let report = check_conformance(&ast, &spec);
            println!("valid: {}", if valid { "yes" } else { "no" });
            println!("correct: {}", if valid && report.correct { "yes" } else { "no" });
            for m in &report.mismatches {
                println!("mismatch: {m}");
            }
            Ok(if valid && report.correct { EXIT_OK } else { EXIT_REJECTED })
        }
        Command::Solve { model, solver } => {
            let text = read_text(&model)?;
            let outcome = match solver.mode() {
                SolverMode::External(ext) => {
                    let run = run_external(&text, &ext).map_err(|e| match e {
                        ExternalError::EmptyModel => Failure(EXIT_REJECTED, e.into()),
                        _ => internal(e),
                    })?;
                    for w in &run.warnings {
                        eprintln!("warning: {w}");
                    }
                    if let Some(path) = &run.artifact {
                        eprintln!("model kept at {}", path.display());
                    }
                    run.outcome
                }
                SolverMode::Builtin => match parse_model(&text) {
                    Ok(ast) => solve_builtin(&ast, &solver.limits()),
                    Err(diagnostics) => {
                        print!("{}", render_lines(&diagnostics));
                        return Ok(EXIT_REJECTED);
                    }
                },
            };
            print!("{outcome}");
            Ok(if outcome.executed() { EXIT_OK } else { EXIT_REJECTED })
        }
        Command::Bench { source, max_steps, solver, out_dir, jobs } => {
            let (backend, config) = build_backend(&source, max_steps, &solver)?;
            let jobs = if source.script.is_some() { 1 } else { jobs };
            let records = run_suite_parallel(&builtin_instances(), backend.as_ref(), &config, jobs).map_err(usage)?;
            print!("{}", render_table(&records));
            std::fs::create_dir_all(out_dir.join("runs"))
                .with_context(|| format!("cannot create {}", out_dir.display()))
                .map_err(internal)?;
            export_results(&records, ExportFormat::Json, &out_dir.join("results.json")).map_err(internal)?;
            export_results(&records, ExportFormat::Csv, &out_dir.join("results.csv")).map_err(internal)?;
            for r in &records {
                write_json(&out_dir.join("runs").join(format!("run-{:02}.json", r.spec.id)), r)?;
            }
            Ok(if records.iter().any(|r| r.aborted.is_some()) { EXIT_BACKEND } else { EXIT_OK })
        }
        Command::Replay { record } => {
            let text = read_text(&record)?;
            let records: Vec<RunRecord> = match serde_json::from_str::<RunRecord>(&text) {
                Ok(r) => vec![r],
                Err(_) => serde_json::from_str(&text)
                    .with_context(|| format!("{} holds no run record", record.display()))
                    .map_err(usage)?,
            };
            let mut identical = true;
            for original in &records {
                let again = replay_record(original).map_err(usage)?;
                let same = &again == original;
                println!("#{}: {}", original.spec.id, if same { "identical" } else { "DIFFERS" });
                identical &= same;
            }
            Ok(if identical { EXIT_OK } else { EXIT_REJECTED })
        }
    }
}

fn build_backend(
    source: &BackendSource,
    max_steps: u32,
    solver: &SolverArgs,
) -> Result<(Box<dyn Backend>, RunConfig), Failure> {
    let mut config = RunConfig {
        max_steps,
        solver_mode: solver.mode(),
        limits: solver.limits(),
        ..RunConfig::default()
    };
    let backend: Box<dyn Backend> = match (&source.script, &source.backend) {
        (Some(path), _) => Box::new(ScriptedBackend::from_file(path).map_err(usage)?),
        (None, Some(path)) => {
            let cfg = BackendConfig::load(path).map_err(usage)?;
            config.generation_params = GenerationParams::generation_defaults(cfg.generate_model.clone());
            config.edit_params = GenerationParams::edit_defaults(cfg.edit_model.clone());
            Box::new(HttpBackend::new(cfg.http_config()).map_err(|e| Failure(EXIT_BACKEND, e.into()))?)
        }
        (None, None) => return Err(usage(anyhow::anyhow!("one of --script or --backend is required"))),
    };
    Ok((backend, config))
}

fn read_text(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path)
        .with_context(|| format!("cannot read {}", path.display()))
        .map_err(usage)
}

fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> Result<(), Failure> {
    let text = serde_json::to_string_pretty(value).map_err(internal)?;
    std::fs::write(path, text + "\n")
        .with_context(|| format!("cannot write {}", path.display()))
        .map_err(internal)
}
