//! Generate constraint models in a MiniZinc subset from declarative feature
//! specifications, check them by parsing, static analysis and solving, and
//! repair broken ones by feeding the error output back to an edit backend.
//!
//! The pipeline is split into:
//!
//! * [`catalog`]: feature specifications and the ten benchmark instances.
//! * [`prompting`]: generation prompt, repair instruction, response cleanup.
//! * [`backend`]: completion/edit backends (HTTP and scripted replay).
//! * [`syntax`]: lexer, parser and canonical printer for the subset.
//! * [`analysis`]: validity diagnostics and spec conformance.
//! * [`solving`]: built-in finite-domain solver, brute-force oracle and an
//!   external MiniZinc runner.
//! * [`orchestrator`]: the bounded generate / test / repair loop.
//! * [`report`]: result tables and exports.
//! * [`config`]: key=value configuration files.

pub mod analysis;
pub mod backend;
pub mod catalog;
pub mod config;
pub mod diagnostic;
pub mod orchestrator;
pub mod prompting;
pub mod report;
pub mod solving;
pub mod syntax;

pub use analysis::{check_conformance, validate, ConformanceReport};
pub use backend::{
    approx_token_count, Backend, BackendError, BackendResult, GenerationParams, HttpBackend,
    ScriptEntry, ScriptKind, ScriptedBackend,
};
pub use catalog::{builtin_instances, ConstraintKind, DomainKind, ModelSpec, VariableKind};
pub use diagnostic::{Diagnostic, Severity, SourceSpan};
pub use orchestrator::{run_instance, run_suite, RunConfig, RunRecord, SolverMode, StepTrace};
pub use prompting::{
    build_generation_prompt, build_repair_instruction, extract_model_text, PromptText,
    RepairInstruction,
};
pub use solving::{solve_builtin, SolveLimits, SolveOutcome};
pub use syntax::{parse_model, print_model, tokenize, ModelAst};
