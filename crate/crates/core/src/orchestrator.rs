//! The bounded generate / test / repair loop.
//!
//! Step 1 asks the completion backend for a model. Every step then parses,
//! validates and solves the current model. A model that runs to a verdict
//! ends the run and is checked for conformance; otherwise the error text is
//! wrapped in a repair instruction and the edit backend rewrites the model,
//! until `max_steps` backend calls have been made.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::analysis::{check_conformance, validate};
use crate::backend::{Backend, BackendResult, GenerationParams, ScriptEntry, ScriptKind, ScriptedBackend};
use crate::catalog::{ModelSpec, SpecError};
use crate::diagnostic::{codes, Diagnostic};
use crate::prompting::{build_generation_prompt, build_repair_instruction, extract_model_text};
use crate::solving::{run_external, solve_builtin, ExternalConfig, SolveLimits, SolveOutcome};
use crate::syntax::{parse_model, ModelAst};

pub const DEFAULT_MAX_STEPS: u32 = 10;
pub const DEFAULT_GENERATE_MODEL: &str = "gpt-3.5-turbo-instruct";
pub const DEFAULT_EDIT_MODEL: &str = "gpt-3.5-turbo-instruct";

#[derive(Debug, Clone, PartialEq)]
pub enum SolverMode {
    Builtin,
    External(ExternalConfig),
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub max_steps: u32,
    pub generation_params: GenerationParams,
    pub edit_params: GenerationParams,
    pub solver_mode: SolverMode,
    pub limits: SolveLimits,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            max_steps: DEFAULT_MAX_STEPS,
            generation_params: GenerationParams::generation_defaults(DEFAULT_GENERATE_MODEL),
            edit_params: GenerationParams::edit_defaults(DEFAULT_EDIT_MODEL),
            solver_mode: SolverMode::Builtin,
            limits: SolveLimits::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StepTrace {
    pub index: u32,
    pub kind: ScriptKind,
    pub prompt_or_instruction: String,
    pub backend_text: String,
    pub extracted_model: String,
    pub diagnostics: Vec<Diagnostic>,
    pub solve_outcome: Option<SolveOutcome>,
    pub prompt_tokens: u64,
    pub completion_tokens: u64,
}

/// Settings that influence a run's verdicts, stored with the record.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunMetadata {
    pub max_steps: u32,
    /// `builtin` or `external:<solver>`.
    pub solver: String,
    pub open_domain_bounds: (i64, i64),
    /// How the `correct` verdict was reached.
    pub conformance: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunRecord {
    pub spec: ModelSpec,
    pub valid: bool,
    pub correct: bool,
    pub steps: u32,
    pub tokens: u64,
    pub final_model: String,
    #[serde(default)]
    pub mismatches: Vec<String>,
    /// Set when a backend or tool failure cut the run short.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub aborted: Option<String>,
    pub metadata: RunMetadata,
    pub trace: Vec<StepTrace>,
}

#[derive(Debug, Error)]
pub enum RunError {
    #[error("invalid spec #{id}: {source}")]
    InvalidSpec { id: u32, source: SpecError },
    #[error("max_steps must be at least 1")]
    ZeroBudget,
    #[error("invalid solver limits: {0}")]
    InvalidLimits(String),
    #[error("the suite has no instances")]
    EmptySuite,
}

/// Verdict on one model text.
struct Assessment {
    diagnostics: Vec<Diagnostic>,
    solve_outcome: Option<SolveOutcome>,
    ast: Option<ModelAst>,
    /// Present iff the model did not execute.
    error_text: Option<String>,
}

fn join_errors(diagnostics: &[Diagnostic]) -> String {
    diagnostics
        .iter()
        .filter(|d| d.is_error())
        .map(|d| d.message.as_str())
        .collect::<Vec<_>>()
        .join("; ")
}

fn assess(model: Option<&str>, config: &RunConfig) -> Result<Assessment, String> {
    let Some(model) = model else {
        let d = Diagnostic::error(codes::EMPTY_MODEL, "the model is empty", None);
        return Ok(Assessment {
            error_text: Some(d.message.clone()),
            diagnostics: vec![d],
            solve_outcome: None,
            ast: None,
        });
    };
    let (ast, diagnostics) = match parse_model(model) {
        Ok(ast) => {
            let diagnostics = validate(&ast);
            (Some(ast), diagnostics)
        }
        Err(diagnostics) => (None, diagnostics),
    };
    let static_errors = diagnostics.iter().any(Diagnostic::is_error);

    let solve_outcome = match &config.solver_mode {
        SolverMode::Builtin => match (&ast, static_errors) {
            (Some(ast), false) => Some(solve_builtin(ast, &config.limits)),
            _ => None,
        },
        // The real toolchain is the authority on validity here, even for
        // models outside the subset this crate parses.
        SolverMode::External(ext) => Some(
            run_external(model, ext)
                .map_err(|e| format!("external solver failed: {e}"))?
                .outcome,
        ),
    };

    let error_text = match &solve_outcome {
        Some(outcome) => outcome.failure_text(),
        None => Some(join_errors(&diagnostics)),
    };
    Ok(Assessment {
        diagnostics,
        solve_outcome,
        ast,
        error_text,
    })
}

/// Runs one instance. Backend failures end the run early with `aborted`
/// set and the trace recorded so far.
pub fn run_instance(
    spec: &ModelSpec,
    backend: &dyn Backend,
    config: &RunConfig,
) -> Result<RunRecord, RunError> {
    spec.validate().map_err(|source| RunError::InvalidSpec { id: spec.id, source })?;
    if config.max_steps == 0 {
        return Err(RunError::ZeroBudget);
    }
    config.limits.check().map_err(RunError::InvalidLimits)?;

    let mut record = RunRecord {
        spec: spec.clone(),
        valid: false,
        correct: false,
        steps: 0,
        tokens: 0,
        final_model: String::new(),
        mismatches: Vec::new(),
        aborted: None,
        metadata: RunMetadata {
            max_steps: config.max_steps,
            solver: match &config.solver_mode {
                SolverMode::Builtin => "builtin".into(),
                SolverMode::External(ext) => format!("external:{}", ext.solver_name),
            },
            open_domain_bounds: config.limits.open_domain_bounds,
            conformance: "automated structural check".into(),
        },
        trace: Vec::new(),
    };

    let prompt = build_generation_prompt(spec);
    let mut call_kind = ScriptKind::Generate;
    let mut request_text = prompt.content.clone();
    let mut response = match backend.complete(&prompt, &config.generation_params) {
        Ok(r) => r,
        Err(e) => {
            record.aborted = Some(e.to_string());
            return Ok(record);
        }
    };

    loop {
        let BackendResult {
            text,
            prompt_tokens,
            completion_tokens,
        } = response;
        let extracted = extract_model_text(&text).ok();
        let assessment = match assess(extracted.as_deref(), config) {
            Ok(a) => a,
            Err(message) => {
                record.aborted = Some(message);
                return Ok(record);
            }
        };
        let model_text = extracted.clone().unwrap_or_default();
        record.steps += 1;
        record.tokens += prompt_tokens + completion_tokens;
        record.final_model = model_text.clone();
        record.trace.push(StepTrace {
            index: record.steps,
            kind: call_kind,
            prompt_or_instruction: request_text,
            backend_text: text.clone(),
            extracted_model: model_text.clone(),
            diagnostics: assessment.diagnostics,
            solve_outcome: assessment.solve_outcome,
            prompt_tokens,
            completion_tokens,
        });

        let Some(error_text) = assessment.error_text else {
            record.valid = true;
            let report = match &assessment.ast {
                Some(ast) => check_conformance(ast, spec),
                None => crate::analysis::ConformanceReport {
                    correct: false,
                    mismatches: vec!["model is outside the supported MiniZinc subset".into()],
                },
            };
            record.correct = report.correct;
            record.mismatches = report.mismatches;
            return Ok(record);
        };
        if record.steps >= config.max_steps {
            return Ok(record);
        }

        let error_text = if error_text.trim().is_empty() {
            "the model failed without error output".to_string()
        } else {
            error_text
        };
        let instruction = build_repair_instruction(&error_text)
            .expect("error text is non-blank");
        // A blank extraction leaves nothing to edit but the raw response.
        let input = if extracted.is_some() { model_text } else { text };
        response = match backend.edit(&input, &instruction, &config.edit_params) {
            Ok(r) => r,
            Err(e) => {
                record.aborted = Some(e.to_string());
                return Ok(record);
            }
        };
        call_kind = ScriptKind::Edit;
        request_text = instruction.content;
    }
}

/// Runs each spec in order. One instance's failure never stops the others.
pub fn run_suite(
    specs: &[ModelSpec],
    backend: &dyn Backend,
    config: &RunConfig,
) -> Result<Vec<RunRecord>, RunError> {
    run_suite_parallel(specs, backend, config, 1)
}

/// Like [`run_suite`] with up to `jobs` instances in flight. Records come
/// back in input order. Scripted backends must use `jobs = 1` so entries
/// are consumed in a fixed order.
pub fn run_suite_parallel(
    specs: &[ModelSpec],
    backend: &dyn Backend,
    config: &RunConfig,
    jobs: usize,
) -> Result<Vec<RunRecord>, RunError> {
    if specs.is_empty() {
        return Err(RunError::EmptySuite);
    }
    for spec in specs {
        spec.validate().map_err(|source| RunError::InvalidSpec { id: spec.id, source })?;
    }
    let jobs = jobs.clamp(1, specs.len());
    if jobs == 1 {
        return specs.iter().map(|s| run_instance(s, backend, config)).collect();
    }
    let next = AtomicUsize::new(0);
    let slots: Mutex<Vec<Option<Result<RunRecord, RunError>>>> =
        Mutex::new((0..specs.len()).map(|_| None).collect());
    std::thread::scope(|scope| {
        for _ in 0..jobs {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::SeqCst);
                if i >= specs.len() {
                    break;
                }
                let result = run_instance(&specs[i], backend, config);
                slots.lock().unwrap()[i] = Some(result);
            });
        }
    });
    slots
        .into_inner()
        .unwrap()
        .into_iter()
        .map(|r| r.expect("every slot is filled"))
        .collect()
}

/// The backend responses a recorded run consumed, in order.
pub fn script_from_trace(record: &RunRecord) -> Vec<ScriptEntry> {
    record
        .trace
        .iter()
        .map(|step| ScriptEntry {
            kind: step.kind,
            response_text: step.backend_text.clone(),
            prompt_tokens: step.prompt_tokens,
            completion_tokens: step.completion_tokens,
        })
        .collect()
}

/// Re-runs a recorded instance against a scripted backend built from its
/// trace, with the built-in solver and the recorded budget and domain box.
pub fn replay_record(record: &RunRecord) -> Result<RunRecord, RunError> {
    let backend = ScriptedBackend::new(script_from_trace(record));
    let config = RunConfig {
        max_steps: record.metadata.max_steps,
        limits: SolveLimits {
            open_domain_bounds: record.metadata.open_domain_bounds,
            ..SolveLimits::default()
        },
        ..RunConfig::default()
    };
    run_instance(&record.spec, &backend, &config)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::backend::ScriptedBackend;
    use crate::catalog::builtin_instances;

    fn gen(text: &str) -> ScriptEntry {
        ScriptEntry { kind: ScriptKind::Generate, response_text: text.into(), prompt_tokens: 100, completion_tokens: 20 }
    }

    fn edit(text: &str) -> ScriptEntry {
        ScriptEntry { kind: ScriptKind::Edit, response_text: text.into(), prompt_tokens: 30, completion_tokens: 20 }
    }

    fn scalars(domain: &str) -> String {
        (1..=10).map(|i| format!("var {domain}: x{i};\n")).collect()
    }

    #[test]
    fn single_shot_success() {
        let spec = &builtin_instances()[2];
        let backend = ScriptedBackend::new(vec![gen(&format!("{}solve satisfy;", scalars("1..10")))]);
        let r = run_instance(spec, &backend, &RunConfig::default()).unwrap();
        assert_eq!((r.valid, r.correct, r.steps, r.tokens), (true, true, 1, 120));
        assert_eq!(r.trace[0].kind, ScriptKind::Generate);
        assert!(r.trace[0].prompt_or_instruction.ends_with("Bot:"));
    }

    #[test]
    fn one_repair() {
        let spec = &builtin_instances()[0];
        let broken = format!("{}constraint y > 0;\nsolve satisfy;", scalars("int"));
        let fixed = format!("{}solve satisfy;", scalars("int"));
        let backend = ScriptedBackend::new(vec![gen(&broken), edit(&fixed)]);
        let r = run_instance(spec, &backend, &RunConfig::default()).unwrap();
        assert_eq!((r.valid, r.correct, r.steps, r.tokens), (true, true, 2, 170));
        let errors: Vec<_> = r.trace[0].diagnostics.iter().filter(|d| d.is_error()).collect();
        assert_eq!(errors.len(), 1);
        assert_eq!(errors[0].code, "E002");
        assert_eq!(
            r.trace[1].prompt_or_instruction,
            "Me: Fix the minizinc code. The Error code is undefined identifier `y` Bot:"
        );
    }

    #[test]
    fn budget_exhaustion_with_missing_include() {
        let spec = &builtin_instances()[9];
        let broken = "array[1..10] of var 1..10: q;\nconstraint all_different(q);\nsolve satisfy;";
        let mut script = vec![gen(broken)];
        script.extend((0..9).map(|_| edit(broken)));
        let backend = ScriptedBackend::new(script);
        let r = run_instance(spec, &backend, &RunConfig::default()).unwrap();
        assert_eq!((r.valid, r.correct, r.steps), (false, false, 10));
        assert_eq!(backend.remaining(), 0);
        for step in &r.trace {
            assert!(step.diagnostics.iter().any(|d| d.code == "E001"));
            assert!(step.solve_outcome.is_none());
        }
    }

    #[test]
    fn error_text_flows_into_next_instruction() {
        let spec = &builtin_instances()[0];
        let broken = "var int: x;\nconstraint y > z;";
        let backend = ScriptedBackend::new(vec![gen(broken), edit(broken), edit(broken)]);
        let config = RunConfig { max_steps: 3, ..RunConfig::default() };
        let r = run_instance(spec, &backend, &config).unwrap();
        let expected = "model does not have a solve item; undefined identifier `y`; undefined identifier `z`";
        assert_eq!(
            r.trace[1].prompt_or_instruction,
            format!("Me: Fix the minizinc code. The Error code is {expected} Bot:")
        );
    }

    #[test]
    fn unsatisfiable_counts_as_valid() {
        let spec = &builtin_instances()[3];
        let src = format!("{}constraint x1 > x1;\nsolve satisfy;", scalars("1..10"));
        let backend = ScriptedBackend::new(vec![gen(&src)]);
        let r = run_instance(spec, &backend, &RunConfig::default()).unwrap();
        assert!(r.valid && r.correct);
        assert_eq!(r.trace[0].solve_outcome, Some(SolveOutcome::Unsatisfiable));
    }

    #[test]
    fn backend_failure_aborts_with_partial_trace() {
        let spec = &builtin_instances()[0];
        let backend = ScriptedBackend::new(vec![gen("var int: x;")]);
        let r = run_instance(spec, &backend, &RunConfig::default()).unwrap();
        assert_eq!(r.steps, 1);
        assert!(!r.valid);
        assert!(r.aborted.as_deref().unwrap().contains("script exhausted"));
    }

    #[test]
    fn blank_response_is_an_invalid_step() {
        let spec = &builtin_instances()[0];
        let fixed = format!("{}solve satisfy;", scalars("int"));
        let backend = ScriptedBackend::new(vec![gen("   \n"), edit(&fixed)]);
        let r = run_instance(spec, &backend, &RunConfig::default()).unwrap();
        assert_eq!(r.trace[0].diagnostics[0].code, codes::EMPTY_MODEL);
        assert_eq!((r.valid, r.steps), (true, 2));
    }

    #[test]
    fn suite_isolates_failures() {
        let specs = &builtin_instances()[..2];
        let backend = ScriptedBackend::new(vec![gen(&format!("{}solve satisfy;", scalars("int")))]);
        let records = run_suite(specs, &backend, &RunConfig::default()).unwrap();
        assert_eq!(records.len(), 2);
        assert!(records[0].aborted.is_none() && records[0].valid);
        assert!(records[1].aborted.is_some());
        assert!(matches!(run_suite(&[], &backend, &RunConfig::default()), Err(RunError::EmptySuite)));
    }

    #[test]
    fn zero_budget_is_rejected() {
        let backend = ScriptedBackend::new(vec![]);
        let config = RunConfig { max_steps: 0, ..RunConfig::default() };
        assert!(matches!(
            run_instance(&builtin_instances()[0], &backend, &config),
            Err(RunError::ZeroBudget)
        ));
    }

    #[test]
    fn replay_reproduces_the_record() {
        let spec = &builtin_instances()[0];
        let broken = format!("{}constraint y > 0;\nsolve satisfy;", scalars("int"));
        let backend = ScriptedBackend::new(vec![gen(&broken), edit(&format!("{}solve satisfy;", scalars("int")))]);
        let r = run_instance(spec, &backend, &RunConfig::default()).unwrap();
        assert_eq!(replay_record(&r).unwrap(), r);
    }
}
