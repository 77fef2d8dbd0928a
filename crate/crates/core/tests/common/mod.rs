//! Random model generators shared by the integration tests.
#![allow(dead_code)]

use rand::seq::SliceRandom;
use rand::Rng;

use mzn_autogen::syntax::{BaseType, BinOp, Domain, Expr, Item, ModelAst, SolveKind, UnOp};

const KEYWORDS: &[&str] = &[
    "var", "int", "bool", "array", "of", "constraint", "solve", "satisfy", "minimize", "maximize",
    "include", "output", "div", "mod", "not", "true", "false",
];

const BIN_OPS: &[BinOp] = &[
    BinOp::Add,
    BinOp::Sub,
    BinOp::Mul,
    BinOp::Div,
    BinOp::Mod,
    BinOp::Eq,
    BinOp::Ne,
    BinOp::Lt,
    BinOp::Le,
    BinOp::Gt,
    BinOp::Ge,
    BinOp::And,
    BinOp::Or,
];

pub fn ident<R: Rng>(rng: &mut R) -> String {
    loop {
        let len = rng.gen_range(1..=6);
        let mut s = String::new();
        s.push(*b"abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ".choose(rng).unwrap() as char);
        for _ in 1..len {
            s.push(*b"abcdefghijklmnopqrstuvwxyz0123456789_".choose(rng).unwrap() as char);
        }
        if !KEYWORDS.contains(&s.as_str()) {
            return s;
        }
    }
}

fn int_lit<R: Rng>(rng: &mut R) -> i64 {
    match rng.gen_range(0..10) {
        0 => i64::MIN,
        1 => i64::MAX,
        2 => rng.gen(),
        _ => rng.gen_range(-50..=50),
    }
}

/// A syntactically arbitrary expression; types are not respected.
pub fn random_expr<R: Rng>(rng: &mut R, depth: u32) -> Expr {
    let leaf = depth == 0 || rng.gen_bool(0.3);
    if leaf {
        return match rng.gen_range(0..3) {
            0 => Expr::IntLit(int_lit(rng)),
            1 => Expr::BoolLit(rng.gen()),
            _ => Expr::Ident(ident(rng)),
        };
    }
    match rng.gen_range(0..10) {
        0 => Expr::access(&ident(rng), random_expr(rng, depth - 1)),
        1 => Expr::ArrayLit((0..rng.gen_range(0..4)).map(|_| random_expr(rng, depth - 1)).collect()),
        2 => {
            let callee = if rng.gen_bool(0.5) { "all_different".to_string() } else { ident(rng) };
            Expr::call(&callee, (0..rng.gen_range(0..3)).map(|_| random_expr(rng, depth - 1)).collect())
        }
        3 | 4 => Expr::Unary {
            op: if rng.gen() { UnOp::Neg } else { UnOp::Not },
            arg: Box::new(random_expr(rng, depth - 1)),
        },
        _ => Expr::binary(
            *BIN_OPS.choose(rng).unwrap(),
            random_expr(rng, depth - 1),
            random_expr(rng, depth - 1),
        ),
    }
}

fn random_domain<R: Rng>(rng: &mut R) -> Domain {
    match rng.gen_range(0..3) {
        0 => Domain::Open,
        1 => {
            let lo = rng.gen_range(-20..=20);
            Domain::Range { lo, hi: lo + rng.gen_range(-2..=20) }
        }
        _ => {
            let mut values: Vec<i64> = (0..rng.gen_range(1..5)).map(|_| rng.gen_range(-9..=9)).collect();
            values.sort_unstable();
            values.dedup();
            Domain::SetLit { values }
        }
    }
}

/// A syntactically arbitrary model over the supported grammar.
pub fn random_ast<R: Rng>(rng: &mut R) -> ModelAst {
    let n = rng.gen_range(0..8);
    let items = (0..n)
        .map(|_| match rng.gen_range(0..6) {
            0 => Item::Include { path: format!("{}.mzn", ident(rng)) },
            1 | 2 => {
                let base = if rng.gen_bool(0.2) { BaseType::Bool } else { BaseType::Int };
                Item::VarDecl {
                    name: ident(rng),
                    base,
                    domain: if base == BaseType::Bool { Domain::Open } else { random_domain(rng) },
                    array_len: rng.gen_bool(0.3).then(|| rng.gen_range(1..=12)),
                }
            }
            3 => Item::Constraint { expr: random_expr(rng, 4) },
            4 => match rng.gen_range(0..3) {
                0 => Item::Solve { kind: SolveKind::Satisfy, objective: None },
                1 => Item::Solve { kind: SolveKind::Minimize, objective: Some(random_expr(rng, 3)) },
                _ => Item::Solve { kind: SolveKind::Maximize, objective: Some(random_expr(rng, 3)) },
            },
            _ => Item::Output { raw: format!("[show({})]", ident(rng)) },
        })
        .collect();
    ModelAst::new(items)
}

/// Declared decision variables of a small, well-typed model.
struct Scope {
    ints: Vec<String>,
    bools: Vec<String>,
    /// (name, length)
    int_arrays: Vec<(String, u32)>,
}

fn int_term<R: Rng>(rng: &mut R, s: &Scope, depth: u32) -> Expr {
    if depth == 0 || rng.gen_bool(0.4) {
        return match rng.gen_range(0..4) {
            0 => Expr::IntLit(rng.gen_range(-3..=6)),
            1 if !s.int_arrays.is_empty() => {
                let (name, len) = s.int_arrays.choose(rng).unwrap();
                Expr::access(name, Expr::IntLit(rng.gen_range(1..=i64::from(*len))))
            }
            _ if !s.ints.is_empty() => Expr::ident(s.ints.choose(rng).unwrap()),
            _ => Expr::IntLit(rng.gen_range(0..=3)),
        };
    }
    match rng.gen_range(0..8) {
        0 => Expr::Unary { op: UnOp::Neg, arg: Box::new(int_term(rng, s, depth - 1)) },
        1 if !s.int_arrays.is_empty() => {
            // variable index, possibly out of range
            let (name, len) = s.int_arrays.choose(rng).unwrap();
            let var = match s.ints.choose(rng) {
                Some(v) => Expr::ident(v),
                None => Expr::access(name, Expr::IntLit(rng.gen_range(1..=i64::from(*len)))),
            };
            Expr::access(name, Expr::binary(BinOp::Sub, var, int_term(rng, s, depth - 1)))
        }
        _ => {
            let op = *[BinOp::Add, BinOp::Sub, BinOp::Mul, BinOp::Div, BinOp::Mod].choose(rng).unwrap();
            Expr::binary(op, int_term(rng, s, depth - 1), int_term(rng, s, depth - 1))
        }
    }
}

fn bool_term<R: Rng>(rng: &mut R, s: &Scope, depth: u32) -> Expr {
    if depth == 0 || rng.gen_bool(0.2) {
        return match rng.gen_range(0..3) {
            0 if !s.bools.is_empty() => Expr::ident(s.bools.choose(rng).unwrap()),
            1 => Expr::BoolLit(rng.gen_bool(0.8)),
            _ => {
                let op = *[BinOp::Eq, BinOp::Ne, BinOp::Lt, BinOp::Le, BinOp::Gt, BinOp::Ge].choose(rng).unwrap();
                Expr::binary(op, int_term(rng, s, 1), int_term(rng, s, 1))
            }
        };
    }
    match rng.gen_range(0..9) {
        0 => Expr::Unary { op: UnOp::Not, arg: Box::new(bool_term(rng, s, depth - 1)) },
        1 => Expr::binary(BinOp::And, bool_term(rng, s, depth - 1), bool_term(rng, s, depth - 1)),
        2 => Expr::binary(BinOp::Or, bool_term(rng, s, depth - 1), bool_term(rng, s, depth - 1)),
        3 => Expr::binary(
            *[BinOp::Eq, BinOp::Ne].choose(rng).unwrap(),
            bool_term(rng, s, depth - 1),
            bool_term(rng, s, depth - 1),
        ),
        4 => {
            let arg = match s.int_arrays.choose(rng) {
                Some((name, _)) if rng.gen() => Expr::ident(name),
                _ => Expr::ArrayLit((0..rng.gen_range(0..4)).map(|_| int_term(rng, s, 1)).collect()),
            };
            Expr::call("all_different", vec![arg])
        }
        _ => {
            let op = *[BinOp::Eq, BinOp::Ne, BinOp::Lt, BinOp::Le, BinOp::Gt, BinOp::Ge].choose(rng).unwrap();
            Expr::binary(op, int_term(rng, s, depth - 1), int_term(rng, s, depth - 1))
        }
    }
}

/// A valid satisfaction model with at most `max_vars` grounded variables,
/// each with at most `max_domain` values.
pub fn random_small_model<R: Rng>(rng: &mut R, max_vars: u32, max_domain: i64) -> ModelAst {
    let mut items = vec![Item::Include { path: "alldifferent.mzn".into() }];
    let mut scope = Scope { ints: vec![], bools: vec![], int_arrays: vec![] };
    let mut grounded = 0;
    let mut k = 0;
    while grounded < max_vars {
        k += 1;
        let name = format!("v{k}");
        let remaining = max_vars - grounded;
        let kind = rng.gen_range(0..6);
        if grounded > 0 && rng.gen_bool(0.15) {
            break;
        }
        if kind == 0 {
            items.push(Item::VarDecl { name: name.clone(), base: BaseType::Bool, domain: Domain::Open, array_len: None });
            scope.bools.push(name);
            grounded += 1;
            continue;
        }
        let domain = if rng.gen_bool(0.3) {
            let mut values: Vec<i64> = (0..rng.gen_range(1..=max_domain)).map(|_| rng.gen_range(-2..=6)).collect();
            values.sort_unstable();
            values.dedup();
            Domain::SetLit { values }
        } else {
            let lo = rng.gen_range(-2..=3);
            Domain::Range { lo, hi: lo + rng.gen_range(0..max_domain) }
        };
        if kind == 1 && remaining >= 2 {
            let len = rng.gen_range(2..=remaining.min(3));
            items.push(Item::VarDecl { name: name.clone(), base: BaseType::Int, domain, array_len: Some(len) });
            scope.int_arrays.push((name, len));
            grounded += len;
        } else {
            items.push(Item::VarDecl { name: name.clone(), base: BaseType::Int, domain, array_len: None });
            scope.ints.push(name);
            grounded += 1;
        }
    }
    for _ in 0..rng.gen_range(0..=3) {
        items.push(Item::Constraint { expr: bool_term(rng, &scope, 3) });
    }
    items.push(Item::Solve { kind: SolveKind::Satisfy, objective: None });
    ModelAst::new(items)
}
