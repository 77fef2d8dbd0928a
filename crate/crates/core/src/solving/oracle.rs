//! Exhaustive enumeration with no pruning, used to cross-check the solver.
//!
//! This interpreter works directly on the syntax tree with a name-keyed
//! environment and shares no evaluation code with the search.

use std::collections::{BTreeSet, HashMap};

use thiserror::Error;

use crate::analysis::validate;
use crate::syntax::{BaseType, BinOp, Domain, Expr, Item, ModelAst, UnOp};

use super::{AssignedValue, Assignment, SolveLimits};

const MAX_SPACE: u128 = 1_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("search space of {0} assignments exceeds the oracle's limit of 1000000")]
    SpaceTooLarge(u128),
    #[error("model is invalid: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone)]
enum Val {
    Int(i64),
    Bool(bool),
    Ints(Vec<i64>),
    Bools(Vec<bool>),
}

/// Every assignment that satisfies all constraints, ignoring any objective.
pub fn brute_force_oracle(
    ast: &ModelAst,
    limits: &SolveLimits,
) -> Result<BTreeSet<Assignment>, OracleError> {
    if let Some(d) = validate(ast).into_iter().find(|d| d.is_error()) {
        return Err(OracleError::Invalid(d.message));
    }

    // One slot per grounded variable: (decl index, element index, values).
    let decls: Vec<_> = ast.var_decls().collect();
    let mut slots: Vec<Vec<i64>> = Vec::new();
    let mut space: u128 = 1;
    for d in &decls {
        let values: Vec<i64> = match (d.base, d.domain) {
            (BaseType::Bool, _) => vec![0, 1],
            (BaseType::Int, Domain::Open) => {
                let (lo, hi) = limits.open_domain_bounds;
                checked_range(lo, hi)?
            }
            (BaseType::Int, Domain::Range { lo, hi }) => checked_range(*lo, *hi)?,
            (BaseType::Int, Domain::SetLit { values }) => values.clone(),
        };
        for _ in 0..d.array_len.unwrap_or(1) {
            space = space.saturating_mul(values.len() as u128);
            if space > MAX_SPACE {
                return Err(OracleError::SpaceTooLarge(space));
            }
            slots.push(values.clone());
        }
    }

    let constraints: Vec<&Expr> = ast
        .items
        .iter()
        .filter_map(|i| match i {
            Item::Constraint { expr } => Some(expr),
            _ => None,
        })
        .collect();

    let mut solutions = BTreeSet::new();
    if space == 0 {
        return Ok(solutions);
    }
    let mut odometer = vec![0usize; slots.len()];
    loop {
        let mut env: HashMap<&str, Val> = HashMap::new();
        let mut slot = 0;
        for d in &decls {
            let take = d.array_len.unwrap_or(1) as usize;
            let picked: Vec<i64> = (slot..slot + take).map(|s| slots[s][odometer[s]]).collect();
            slot += take;
            let val = match (d.base, d.array_len) {
                (BaseType::Int, None) => Val::Int(picked[0]),
                (BaseType::Bool, None) => Val::Bool(picked[0] == 1),
                (BaseType::Int, Some(_)) => Val::Ints(picked),
                (BaseType::Bool, Some(_)) => Val::Bools(picked.into_iter().map(|v| v == 1).collect()),
            };
            env.insert(d.name, val);
        }
        if constraints.iter().all(|c| holds(c, &env)) {
            solutions.insert(
                env.iter()
                    .map(|(name, v)| {
                        let value = match v {
                            Val::Int(x) => AssignedValue::Int(*x),
                            Val::Bool(b) => AssignedValue::Bool(*b),
                            Val::Ints(xs) => AssignedValue::IntArray(xs.clone()),
                            Val::Bools(bs) => AssignedValue::BoolArray(bs.clone()),
                        };
                        (name.to_string(), value)
                    })
                    .collect(),
            );
        }

        // advance the odometer, last slot fastest
        let mut i = slots.len();
        loop {
            if i == 0 {
                return Ok(solutions);
            }
            i -= 1;
            odometer[i] += 1;
            if odometer[i] < slots[i].len() {
                break;
            }
            odometer[i] = 0;
        }
    }
}

fn checked_range(lo: i64, hi: i64) -> Result<Vec<i64>, OracleError> {
    if lo > hi {
        return Ok(Vec::new());
    }
    let size = (i128::from(hi) - i128::from(lo) + 1) as u128;
    if size > MAX_SPACE {
        return Err(OracleError::SpaceTooLarge(size));
    }
    Ok((lo..=hi).collect())
}

/// Boolean context: anything undefined inside makes this expression false.
fn holds(e: &Expr, env: &HashMap<&str, Val>) -> bool {
    match e {
        Expr::BoolLit(b) => *b,
        Expr::Ident(name) => matches!(env.get(name.as_str()), Some(Val::Bool(true))),
        Expr::ArrayAccess { array, index } => {
            let Some(Val::Bools(bs)) = env.get(array.as_str()) else {
                return false;
            };
            match int(index, env) {
                Some(k) if k >= 1 && (k as u128) <= bs.len() as u128 => bs[(k - 1) as usize],
                _ => false,
            }
        }
        Expr::Unary { op: UnOp::Not, arg } => !holds(arg, env),
        Expr::Binary { op: BinOp::And, lhs, rhs } => holds(lhs, env) && holds(rhs, env),
        Expr::Binary { op: BinOp::Or, lhs, rhs } => holds(lhs, env) || holds(rhs, env),
        Expr::Binary { op, lhs, rhs } if matches!(op, BinOp::Eq | BinOp::Ne) && is_boolish(lhs, env) => {
            let same = holds(lhs, env) == holds(rhs, env);
            if *op == BinOp::Eq {
                same
            } else {
                !same
            }
        }
        Expr::Binary { op, lhs, rhs } => {
            let (Some(l), Some(r)) = (int(lhs, env), int(rhs, env)) else {
                return false;
            };
            match op {
                BinOp::Eq => l == r,
                BinOp::Ne => l != r,
                BinOp::Lt => l < r,
                BinOp::Le => l <= r,
                BinOp::Gt => l > r,
                BinOp::Ge => l >= r,
                _ => false,
            }
        }
        Expr::Call { args, .. } => {
            let elems: Option<Vec<i64>> = match &args[0] {
                Expr::Ident(name) => match env.get(name.as_str()) {
                    Some(Val::Ints(xs)) => Some(xs.clone()),
                    _ => None,
                },
                Expr::ArrayLit(items) => items.iter().map(|x| int(x, env)).collect(),
                _ => None,
            };
            match elems {
                Some(xs) => {
                    let distinct: BTreeSet<i64> = xs.iter().copied().collect();
                    distinct.len() == xs.len()
                }
                None => false,
            }
        }
        _ => false,
    }
}

/// Whether an operand of `=`/`!=` is boolean (the checker forbids mixing).
fn is_boolish(e: &Expr, env: &HashMap<&str, Val>) -> bool {
    match e {
        Expr::BoolLit(_) | Expr::Call { .. } => true,
        Expr::Ident(name) => matches!(env.get(name.as_str()), Some(Val::Bool(_))),
        Expr::ArrayAccess { array, .. } => matches!(env.get(array.as_str()), Some(Val::Bools(_))),
        Expr::Unary { op, .. } => *op == UnOp::Not,
        Expr::Binary { op, .. } => !op.is_arithmetic(),
        _ => false,
    }
}

/// Integer context; `None` is undefined.
fn int(e: &Expr, env: &HashMap<&str, Val>) -> Option<i64> {
    match e {
        Expr::IntLit(v) => Some(*v),
        Expr::Ident(name) => match env.get(name.as_str())? {
            Val::Int(v) => Some(*v),
            _ => None,
        },
        Expr::ArrayAccess { array, index } => {
            let k = int(index, env)?;
            match env.get(array.as_str())? {
                Val::Ints(xs) if k >= 1 => xs.get(usize::try_from(k - 1).ok()?).copied(),
                _ => None,
            }
        }
        Expr::Unary { op: UnOp::Neg, arg } => int(arg, env)?.checked_neg(),
        Expr::Binary { op, lhs, rhs } if op.is_arithmetic() => {
            let (l, r) = (int(lhs, env)?, int(rhs, env)?);
            match op {
                BinOp::Add => l.checked_add(r),
                BinOp::Sub => l.checked_sub(r),
                BinOp::Mul => l.checked_mul(r),
                BinOp::Div => l.checked_div(r),
                _ => l.checked_rem(r),
            }
        }
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse_model;

    fn oracle(src: &str) -> Result<BTreeSet<Assignment>, OracleError> {
        brute_force_oracle(&parse_model(src).unwrap(), &SolveLimits::default())
    }

    #[test]
    fn two_variables_not_equal() {
        let sols = oracle("var 1..2: a; var 1..2: b; constraint a != b; solve satisfy;").unwrap();
        let pairs: Vec<(AssignedValue, AssignedValue)> =
            sols.iter().map(|s| (s["a"].clone(), s["b"].clone())).collect();
        assert_eq!(
            pairs,
            vec![
                (AssignedValue::Int(1), AssignedValue::Int(2)),
                (AssignedValue::Int(2), AssignedValue::Int(1))
            ]
        );
    }

    #[test]
    fn unconstrained_variable() {
        assert_eq!(oracle("var 1..3: x; solve satisfy;").unwrap().len(), 3);
    }

    #[test]
    fn space_guard() {
        let src = "array[1..12] of var 1..10: q; solve satisfy;";
        assert!(matches!(oracle(src), Err(OracleError::SpaceTooLarge(_))));
        assert!(matches!(
            oracle("var int: x; var int: y; solve satisfy;"),
            Err(OracleError::SpaceTooLarge(_))
        ));
    }

    #[test]
    fn pigeonhole() {
        let src = "include \"alldifferent.mzn\"; array[1..3] of var 1..2: q; constraint all_different(q); solve satisfy;";
        assert!(oracle(src).unwrap().is_empty());
    }

    #[test]
    fn invalid_models_are_refused() {
        assert!(matches!(oracle("constraint y > 1; solve satisfy;"), Err(OracleError::Invalid(_))));
    }

    #[test]
    fn bool_equality() {
        let sols = oracle("var bool: a; var bool: b; constraint a = not b; solve satisfy;").unwrap();
        assert_eq!(sols.len(), 2);
    }
}
