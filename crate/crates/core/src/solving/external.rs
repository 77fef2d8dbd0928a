//! Runs a real MiniZinc toolchain as a child process.

use std::io::{Read, Write};
use std::path::PathBuf;
use std::process::{Command, Stdio};
use std::thread;
use std::time::Duration;

use thiserror::Error;
use wait_timeout::ChildExt;

use super::{AssignedValue, Assignment, LimitKind, SolveOutcome};

/// Extra wall-clock time granted beyond the solver's own limit before the
/// child is killed.
const KILL_GRACE: Duration = Duration::from_secs(5);

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExternalConfig {
    pub binary_path: PathBuf,
    pub solver_name: String,
    pub time_limit_ms: u64,
    /// Keep the temporary `.mzn` file instead of deleting it.
    pub keep_artifacts: bool,
}

impl Default for ExternalConfig {
    fn default() -> Self {
        ExternalConfig {
            binary_path: PathBuf::from("minizinc"),
            solver_name: "gecode".into(),
            time_limit_ms: 10_000,
            keep_artifacts: false,
        }
    }
}

#[derive(Debug, Error)]
pub enum ExternalError {
    #[error("solver binary `{0}` not found")]
    ToolNotFound(String),
    #[error("empty model text")]
    EmptyModel,
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExternalRun {
    pub outcome: SolveOutcome,
    /// Problems reading the solver output that did not change the verdict.
    pub warnings: Vec<String>,
    /// Path of the model file when artifacts are kept.
    pub artifact: Option<PathBuf>,
}

/// Writes the model to a temporary file and runs
/// `<binary> --solver <name> --time-limit <ms> <file.mzn>`.
pub fn run_external(model_text: &str, config: &ExternalConfig) -> Result<ExternalRun, ExternalError> {
    if model_text.trim().is_empty() {
        return Err(ExternalError::EmptyModel);
    }
    let mut file = tempfile::Builder::new()
        .prefix("model-")
        .suffix(".mzn")
        .tempfile()?;
    file.write_all(model_text.as_bytes())?;
    file.flush()?;
    let path = file.into_temp_path();

    let spawned = Command::new(&config.binary_path)
        .arg("--solver")
        .arg(&config.solver_name)
        .arg("--time-limit")
        .arg(config.time_limit_ms.to_string())
        .arg(&*path)
        .stdin(Stdio::null())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn();
    let mut child = match spawned {
        Ok(child) => child,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => {
            return Err(ExternalError::ToolNotFound(
                config.binary_path.display().to_string(),
            ))
        }
        Err(e) => return Err(e.into()),
    };

    let stdout = drain(child.stdout.take());
    let stderr = drain(child.stderr.take());
    let limit = Duration::from_millis(config.time_limit_ms) + KILL_GRACE;
    let status = match child.wait_timeout(limit)? {
        Some(status) => Some(status),
        None => {
            child.kill()?;
            child.wait()?;
            None
        }
    };
    let stdout = stdout.join().unwrap_or_default();
    let stderr = stderr.join().unwrap_or_default();

    let artifact = if config.keep_artifacts {
        Some(path.keep().map_err(|e| e.error)?)
    } else {
        path.close()?;
        None
    };

    let (outcome, warnings) = match status {
        None => (SolveOutcome::LimitReached { kind: LimitKind::Time }, Vec::new()),
        Some(status) if !status.success() => {
            let message = if stderr.trim().is_empty() { &stdout } else { &stderr };
            (
                SolveOutcome::CompileError {
                    message: message.trim_end().to_string(),
                },
                Vec::new(),
            )
        }
        Some(_) => parse_solver_output(&stdout),
    };
    Ok(ExternalRun {
        outcome,
        warnings,
        artifact,
    })
}

fn drain<R: Read + Send + 'static>(stream: Option<R>) -> thread::JoinHandle<String> {
    thread::spawn(move || {
        let mut buf = Vec::new();
        if let Some(mut s) = stream {
            let _ = s.read_to_end(&mut buf);
        }
        String::from_utf8_lossy(&buf).into_owned()
    })
}

/// Interprets MiniZinc's standard output conventions. The last solution
/// block wins; unparseable assignments yield an empty assignment and a
/// warning.
pub fn parse_solver_output(stdout: &str) -> (SolveOutcome, Vec<String>) {
    let lines: Vec<&str> = stdout.lines().map(str::trim).collect();
    if lines.contains(&"=====UNSATISFIABLE=====") {
        return (SolveOutcome::Unsatisfiable, Vec::new());
    }
    if lines.contains(&"=====ERROR=====") {
        return (
            SolveOutcome::CompileError {
                message: stdout.trim_end().to_string(),
            },
            Vec::new(),
        );
    }
    let separators: Vec<usize> = lines
        .iter()
        .enumerate()
        .filter(|(_, l)| **l == "----------")
        .map(|(i, _)| i)
        .collect();
    let Some(&last) = separators.last() else {
        if lines.contains(&"=====UNKNOWN=====") || lines.contains(&"=====UNBOUNDED=====") {
            return (SolveOutcome::LimitReached { kind: LimitKind::Time }, Vec::new());
        }
        return (
            SolveOutcome::CompileError {
                message: format!("unrecognised solver output: {}", stdout.trim()),
            },
            Vec::new(),
        );
    };
    let first = separators
        .iter()
        .rev()
        .nth(1)
        .map_or(0, |prev| prev + 1);
    let mut assignment = Assignment::new();
    let mut objective = None;
    let mut warnings = Vec::new();
    for line in &lines[first..last] {
        if line.is_empty() || line.starts_with('%') {
            continue;
        }
        match parse_assignment_line(line) {
            Some((name, AssignedValue::Int(v))) if name == "_objective" => objective = Some(v),
            Some((name, value)) => {
                assignment.insert(name, value);
            }
            None => {
                warnings.push(format!("could not read solver output line `{line}`"));
                assignment.clear();
                break;
            }
        }
    }
    (
        SolveOutcome::Satisfied {
            assignment,
            objective,
        },
        warnings,
    )
}

fn parse_assignment_line(line: &str) -> Option<(String, AssignedValue)> {
    let (name, value) = line.strip_suffix(';')?.split_once('=')?;
    let name = name.trim();
    if name.is_empty() || !name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
        return None;
    }
    Some((name.to_string(), parse_value(value.trim())?))
}

fn parse_value(text: &str) -> Option<AssignedValue> {
    match text {
        "true" => return Some(AssignedValue::Bool(true)),
        "false" => return Some(AssignedValue::Bool(false)),
        _ => {}
    }
    if let Ok(v) = text.parse::<i64>() {
        return Some(AssignedValue::Int(v));
    }
    // array1d(1..n, [...]) or a bare list
    let list = match text.strip_prefix("array1d(") {
        Some(rest) => {
            let rest = rest.strip_suffix(')')?;
            let (_, list) = rest.split_once(',')?;
            list.trim()
        }
        None => text,
    };
    let inner = list.strip_prefix('[')?.strip_suffix(']')?;
    let parts: Vec<&str> = inner.split(',').map(str::trim).filter(|p| !p.is_empty()).collect();
    if parts.iter().all(|p| *p == "true" || *p == "false") && !parts.is_empty() {
        return Some(AssignedValue::BoolArray(parts.iter().map(|p| *p == "true").collect()));
    }
    parts
        .iter()
        .map(|p| p.parse::<i64>().ok())
        .collect::<Option<Vec<_>>>()
        .map(AssignedValue::IntArray)
}
