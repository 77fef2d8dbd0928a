mod common;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use mzn_autogen::backend::{Backend, BackendError, BackendResult, GenerationParams, ScriptEntry, ScriptKind, ScriptedBackend};
use mzn_autogen::catalog::builtin_instances;
use mzn_autogen::orchestrator::{run_suite, run_suite_parallel, run_instance, RunConfig};
use mzn_autogen::prompting::{PromptText, RepairInstruction};
use mzn_autogen::solving::{brute_force_oracle, solve_builtin, AssignedValue, Assignment, SolveLimits, SolveOutcome};
use mzn_autogen::syntax::{BinOp, Expr, Item, ModelAst, SolveKind};

/// Grounded values in declaration order, bools as 0/1.
fn search_key(ast: &ModelAst, a: &Assignment) -> Vec<i64> {
    ast.var_decls()
        .flat_map(|d| match &a[d.name] {
            AssignedValue::Int(v) => vec![*v],
            AssignedValue::Bool(b) => vec![i64::from(*b)],
            AssignedValue::IntArray(vs) => vs.clone(),
            AssignedValue::BoolArray(bs) => bs.iter().map(|b| i64::from(*b)).collect(),
        })
        .collect()
}

#[test]
fn first_solution_is_smallest_in_search_order() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let limits = SolveLimits::default();
    for i in 0..300 {
        let ast = common::random_small_model(&mut rng, 4, 6);
        let solutions = brute_force_oracle(&ast, &limits).unwrap();
        let outcome = solve_builtin(&ast, &limits);
        assert_eq!(outcome, solve_builtin(&ast, &limits), "case {i} not deterministic");
        if let SolveOutcome::Satisfied { assignment, .. } = outcome {
            let smallest = solutions.iter().map(|s| search_key(&ast, s)).min().unwrap();
            assert_eq!(search_key(&ast, &assignment), smallest, "case {i}");
        }
    }
}

#[test]
fn branch_and_bound_finds_the_optimum() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let limits = SolveLimits::default();
    let mut checked = 0;
    for i in 0..300 {
        let mut ast = common::random_small_model(&mut rng, 4, 6);
        let scalars: Vec<String> = ast
            .var_decls()
            .filter(|d| d.base == mzn_autogen::syntax::BaseType::Int && d.array_len.is_none())
            .map(|d| d.name.to_string())
            .collect();
        if scalars.is_empty() {
            continue;
        }
        let weights: Vec<i64> = scalars.iter().map(|_| rng.gen_range(-3..=3)).collect();
        let objective = scalars
            .iter()
            .zip(&weights)
            .map(|(n, w)| Expr::binary(BinOp::Mul, Expr::IntLit(*w), Expr::ident(n)))
            .reduce(|a, b| Expr::binary(BinOp::Add, a, b))
            .unwrap();
        let minimize = rng.gen_bool(0.5);
        let kind = if minimize { SolveKind::Minimize } else { SolveKind::Maximize };
        *ast.items.last_mut().unwrap() = Item::Solve { kind, objective: Some(objective) };

        let value = |a: &Assignment| -> i64 {
            scalars
                .iter()
                .zip(&weights)
                .map(|(n, w)| match a[n] {
                    AssignedValue::Int(v) => w * v,
                    _ => unreachable!(),
                })
                .sum()
        };
        let solutions = brute_force_oracle(&ast, &limits).unwrap();
        let best = if minimize {
            solutions.iter().map(value).min()
        } else {
            solutions.iter().map(value).max()
        };
        match solve_builtin(&ast, &limits) {
            SolveOutcome::Satisfied { assignment, objective } => {
                assert!(solutions.contains(&assignment), "case {i}");
                assert_eq!(objective, Some(value(&assignment)), "case {i}");
                assert_eq!(objective, best, "case {i}");
                checked += 1;
            }
            SolveOutcome::Unsatisfiable => assert!(best.is_none(), "case {i}"),
            other => panic!("case {i}: {other:?}"),
        }
    }
    assert!(checked > 50);
}

/// Answers every call with a fixed model chosen by the requested spec.
struct EchoBackend;

impl Backend for EchoBackend {
    fn complete(&self, prompt: &PromptText, _: &GenerationParams) -> Result<BackendResult, BackendError> {
        let array = prompt.content.contains("an array of");
        let text = if array {
            "array[1..10] of var 1..10: q;\nsolve satisfy;".to_string()
        } else {
            "var 1..10: x;\nconstraint x > y;\nsolve satisfy;".to_string()
        };
        Ok(BackendResult { text, prompt_tokens: 7, completion_tokens: 3 })
    }

    fn edit(&self, input: &str, _: &RepairInstruction, _: &GenerationParams) -> Result<BackendResult, BackendError> {
        Ok(BackendResult { text: input.to_string(), prompt_tokens: 2, completion_tokens: 1 })
    }
}

#[test]
fn parallel_suite_matches_sequential() {
    let specs = builtin_instances();
    let config = RunConfig { max_steps: 4, ..RunConfig::default() };
    let sequential = run_suite(&specs, &EchoBackend, &config).unwrap();
    let parallel = run_suite_parallel(&specs, &EchoBackend, &config, 4).unwrap();
    assert_eq!(sequential, parallel);
    for (spec, r) in specs.iter().zip(&sequential) {
        assert_eq!(&r.spec, spec);
        assert_eq!(r.steps as usize, r.trace.len());
        assert!(r.steps <= config.max_steps);
        let sum: u64 = r.trace.iter().map(|s| s.prompt_tokens + s.completion_tokens).sum();
        assert_eq!(r.tokens, sum);
        assert!(r.valid || !r.correct);
        assert_eq!(r.trace[0].kind, ScriptKind::Generate);
        assert!(r.trace[1..].iter().all(|s| s.kind == ScriptKind::Edit));
    }
}

#[test]
fn instruction_embeds_previous_error_text() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let broken = [
        "var 1..3: x;\nconstraint x > y;",
        "var 1..3 x;\nsolve satisfy;",
        "array[1..3] of var 1..3: q;\nconstraint q[4] = 1;\nsolve satisfy;",
        "var 1..3: x;\nvar 1..3: x;\nsolve satisfy;\nsolve satisfy;",
        "var 1..3: x;\nconstraint x + true;\nsolve satisfy;",
        "var 1..3: x;\nconstraint x > 4;\nconstraint all_different([x]);\nsolve satisfy;",
    ];
    for _ in 0..20 {
        let mut script = vec![ScriptEntry {
            kind: ScriptKind::Generate,
            response_text: broken[rng.gen_range(0..broken.len())].into(),
            prompt_tokens: 1,
            completion_tokens: 1,
        }];
        script.extend((0..5).map(|_| ScriptEntry {
            kind: ScriptKind::Edit,
            response_text: broken[rng.gen_range(0..broken.len())].into(),
            prompt_tokens: 1,
            completion_tokens: 1,
        }));
        let r = run_instance(&builtin_instances()[0], &ScriptedBackend::new(script), &RunConfig { max_steps: 6, ..RunConfig::default() }).unwrap();
        assert_eq!(r.steps, 6);
        for pair in r.trace.windows(2) {
            let errors: Vec<&str> = pair[0]
                .diagnostics
                .iter()
                .filter(|d| d.is_error())
                .map(|d| d.message.as_str())
                .collect();
            assert!(!errors.is_empty());
            assert!(pair[1].prompt_or_instruction.contains(&errors.join("; ")));
        }
    }
}
