//! Satisfiability checking: a built-in finite-domain solver, an exhaustive
//! oracle for testing it, and a runner for an external MiniZinc toolchain.

mod builtin;
mod external;
mod oracle;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

pub use builtin::solve_builtin;
pub use external::{parse_solver_output, run_external, ExternalConfig, ExternalError, ExternalRun};
pub use oracle::{brute_force_oracle, OracleError};

/// Final values of one solution, keyed by declared name.
pub type Assignment = BTreeMap<String, AssignedValue>;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(untagged)]
pub enum AssignedValue {
    Int(i64),
    Bool(bool),
    IntArray(Vec<i64>),
    BoolArray(Vec<bool>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum LimitKind {
    Time,
    Nodes,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum SolveOutcome {
    Satisfied {
        assignment: Assignment,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        objective: Option<i64>,
    },
    Unsatisfiable,
    CompileError {
        message: String,
    },
    LimitReached {
        kind: LimitKind,
    },
}

impl SolveOutcome {
    /// The model ran to a verdict: a solution or a proof of unsatisfiability.
    pub fn executed(&self) -> bool {
        matches!(self, SolveOutcome::Satisfied { .. } | SolveOutcome::Unsatisfiable)
    }

    /// Text to hand to the repair loop when the model did not execute.
    pub fn failure_text(&self) -> Option<String> {
        match self {
            SolveOutcome::CompileError { message } => Some(message.clone()),
            SolveOutcome::LimitReached { kind: LimitKind::Time } => {
                Some("solver time limit reached before a solution was found".into())
            }
            SolveOutcome::LimitReached { kind: LimitKind::Nodes } => {
                Some("solver node limit reached before a solution was found".into())
            }
            _ => None,
        }
    }
}

impl std::fmt::Display for SolveOutcome {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SolveOutcome::Satisfied {
                assignment,
                objective,
            } => {
                writeln!(f, "SATISFIED")?;
                for (name, value) in assignment {
                    match value {
                        AssignedValue::Int(v) => writeln!(f, "{name} = {v};")?,
                        AssignedValue::Bool(v) => writeln!(f, "{name} = {v};")?,
                        AssignedValue::IntArray(vs) => writeln!(f, "{name} = {vs:?};")?,
                        AssignedValue::BoolArray(vs) => writeln!(f, "{name} = {vs:?};")?,
                    }
                }
                if let Some(obj) = objective {
                    writeln!(f, "_objective = {obj};")?;
                }
                Ok(())
            }
            SolveOutcome::Unsatisfiable => writeln!(f, "UNSATISFIABLE"),
            SolveOutcome::CompileError { message } => writeln!(f, "COMPILE ERROR: {message}"),
            SolveOutcome::LimitReached { kind } => writeln!(f, "LIMIT REACHED ({kind:?})"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SolveLimits {
    pub max_nodes: u64,
    pub max_time_ms: u64,
    /// Finite box substituted for `var int` domains.
    pub open_domain_bounds: (i64, i64),
}

impl Default for SolveLimits {
    fn default() -> Self {
        SolveLimits {
            max_nodes: 1_000_000,
            max_time_ms: 10_000,
            open_domain_bounds: (-1000, 1000),
        }
    }
}

impl SolveLimits {
    pub fn check(&self) -> Result<(), String> {
        if self.max_nodes == 0 || self.max_time_ms == 0 {
            return Err("solver limits must be positive".into());
        }
        let (lo, hi) = self.open_domain_bounds;
        if lo >= hi {
            return Err(format!("open domain bounds {lo}..{hi} must satisfy lo < hi"));
        }
        Ok(())
    }
}
