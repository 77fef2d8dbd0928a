//! Static validity checks and spec conformance.
//!
//! [`validate`] produces the error text the repair loop feeds back to the
//! edit backend, so messages follow the MiniZinc compiler's phrasing.
//! [`check_conformance`] is an automated stand-in for inspecting a generated
//! model by hand against the requested features.

use std::collections::{BTreeSet, HashMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::catalog::{ConstraintKind, DomainKind, ModelSpec, VariableKind};
use crate::diagnostic::{codes, has_errors, Diagnostic, SourceSpan};
use crate::syntax::{is_all_different, BaseType, BinOp, Domain, Expr, Item, ModelAst, SolveKind, UnOp};

/// Include files that make `all_different` available.
const ALL_DIFFERENT_INCLUDES: [&str; 3] = ["alldifferent.mzn", "all_different.mzn", "globals.mzn"];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Ty {
    Int,
    Bool,
    IntArray,
    BoolArray,
    /// Already reported; suppresses follow-on errors.
    Unknown,
}

impl Ty {
    fn name(self) -> &'static str {
        match self {
            Ty::Int => "int",
            Ty::Bool => "bool",
            Ty::IntArray => "array of int",
            Ty::BoolArray => "array of bool",
            Ty::Unknown => "unknown",
        }
    }
}

struct Decl {
    base: BaseType,
    array_len: Option<u32>,
}

struct Checker<'a> {
    decls: HashMap<&'a str, Decl>,
    has_all_different_include: bool,
    used: HashSet<&'a str>,
    diagnostics: Vec<Diagnostic>,
    span: Option<SourceSpan>,
}

/// Returns diagnostics sorted by span, then code. Any Error-severity
/// diagnostic makes the model invalid.
pub fn validate(ast: &ModelAst) -> Vec<Diagnostic> {
    let mut checker = Checker {
        decls: HashMap::new(),
        has_all_different_include: ast
            .includes()
            .any(|p| ALL_DIFFERENT_INCLUDES.contains(&p)),
        used: HashSet::new(),
        diagnostics: Vec::new(),
        span: None,
    };

    for (i, item) in ast.items.iter().enumerate() {
        if let Item::VarDecl {
            name,
            base,
            domain,
            array_len,
        } = item
        {
            let span = ast.span_of(i);
            if checker.decls.contains_key(name.as_str()) {
                checker.diagnostics.push(Diagnostic::error(
                    codes::DUPLICATE_DECLARATION,
                    format!("multiple declarations of `{name}`"),
                    span,
                ));
            } else {
                checker.decls.insert(
                    name,
                    Decl {
                        base: *base,
                        array_len: *array_len,
                    },
                );
            }
            if let Domain::Range { lo, hi } = domain {
                if lo > hi {
                    checker.diagnostics.push(Diagnostic::error(
                        codes::BAD_RANGE,
                        format!("invalid domain for `{name}`: range {lo}..{hi} is empty"),
                        span,
                    ));
                }
            }
        }
    }

    let mut solve_items = 0;
    for (i, item) in ast.items.iter().enumerate() {
        checker.span = ast.span_of(i);
        match item {
            Item::Constraint { expr } => {
                let ty = checker.check(expr);
                checker.expect(ty, Ty::Bool, "constraint");
            }
            Item::Solve { kind, objective } => {
                solve_items += 1;
                if solve_items > 1 {
                    checker.diagnostics.push(Diagnostic::error(
                        codes::MULTIPLE_SOLVE_ITEMS,
                        "multiple solve items",
                        checker.span,
                    ));
                }
                if let Some(obj) = objective {
                    let ty = checker.check(obj);
                    let what = if *kind == SolveKind::Minimize { "minimize" } else { "maximize" };
                    checker.expect(ty, Ty::Int, what);
                }
            }
            Item::Output { raw } => {
                for word in raw.split(|c: char| !(c.is_ascii_alphanumeric() || c == '_')) {
                    if let Some((name, _)) = checker.decls.get_key_value(word) {
                        checker.used.insert(name);
                    }
                }
            }
            Item::Include { .. } | Item::VarDecl { .. } => {}
        }
    }
    if solve_items == 0 {
        checker.diagnostics.push(Diagnostic::error(
            codes::MISSING_SOLVE_ITEM,
            "model does not have a solve item",
            None,
        ));
    }

    for (i, item) in ast.items.iter().enumerate() {
        if let Item::VarDecl { name, .. } = item {
            if !checker.used.contains(name.as_str()) {
                checker.diagnostics.push(Diagnostic::warning(
                    codes::UNUSED_VARIABLE,
                    format!("variable `{name}` is never used"),
                    ast.span_of(i),
                ));
            }
        }
    }

    let mut diagnostics = checker.diagnostics;
    diagnostics.sort_by(|a, b| (a.span, &a.code).cmp(&(b.span, &b.code)));
    diagnostics
}

impl<'a> Checker<'a> {
    fn error(&mut self, code: &str, message: String) {
        self.diagnostics
            .push(Diagnostic::error(code, message, self.span));
    }

    fn expect(&mut self, found: Ty, want: Ty, context: &str) {
        if found != want && found != Ty::Unknown {
            self.error(
                codes::TYPE_MISMATCH,
                format!(
                    "type error: {context} expects {}, found {}",
                    want.name(),
                    found.name()
                ),
            );
        }
    }

    fn lookup(&mut self, name: &'a str) -> Option<(BaseType, Option<u32>)> {
        match self.decls.get_key_value(name) {
            Some((key, decl)) => {
                let found = (decl.base, decl.array_len);
                self.used.insert(key);
                Some(found)
            }
            None => {
                self.error(
                    codes::UNDECLARED_IDENTIFIER,
                    format!("undefined identifier `{name}`"),
                );
                None
            }
        }
    }

    fn check(&mut self, expr: &'a Expr) -> Ty {
        match expr {
            Expr::IntLit(_) => Ty::Int,
            Expr::BoolLit(_) => Ty::Bool,
            Expr::Ident(name) => match self.lookup(name) {
                Some((BaseType::Int, None)) => Ty::Int,
                Some((BaseType::Bool, None)) => Ty::Bool,
                Some((BaseType::Int, Some(_))) => Ty::IntArray,
                Some((BaseType::Bool, Some(_))) => Ty::BoolArray,
                None => Ty::Unknown,
            },
            Expr::ArrayAccess { array, index } => {
                let index_ty = self.check(index);
                self.expect(index_ty, Ty::Int, "array index");
                match self.lookup(array) {
                    None => Ty::Unknown,
                    Some((_, None)) => {
                        self.error(
                            codes::TYPE_MISMATCH,
                            format!("type error: `{array}` is not an array and cannot be indexed"),
                        );
                        Ty::Unknown
                    }
                    Some((base, Some(len))) => {
                        if let Some(k) = constant_int(index) {
                            if k < 1 || k > i64::from(len) {
                                self.error(
                                    codes::INDEX_OUT_OF_BOUNDS,
                                    format!(
                                        "array index out of bounds: index {k} of `{array}` is outside 1..{len}"
                                    ),
                                );
                            }
                        }
                        match base {
                            BaseType::Int => Ty::Int,
                            BaseType::Bool => Ty::Bool,
                        }
                    }
                }
            }
            Expr::ArrayLit(elems) => {
                let tys: Vec<Ty> = elems.iter().map(|e| self.check(e)).collect();
                if tys.contains(&Ty::Unknown) {
                    Ty::Unknown
                } else if tys.iter().all(|t| *t == Ty::Int) {
                    Ty::IntArray
                } else if tys.iter().all(|t| *t == Ty::Bool) {
                    Ty::BoolArray
                } else {
                    self.error(
                        codes::TYPE_MISMATCH,
                        "type error: array literal elements must all be int or all be bool".into(),
                    );
                    Ty::Unknown
                }
            }
            Expr::Unary { op, arg } => {
                let ty = self.check(arg);
                match op {
                    UnOp::Neg => {
                        self.expect(ty, Ty::Int, "unary `-`");
                        Ty::Int
                    }
                    UnOp::Not => {
                        self.expect(ty, Ty::Bool, "`not`");
                        Ty::Bool
                    }
                }
            }
            Expr::Binary { op, lhs, rhs } => {
                let l = self.check(lhs);
                let r = self.check(rhs);
                let context = format!("operator `{}`", op.symbol());
                if op.is_arithmetic() {
                    self.expect(l, Ty::Int, &context);
                    self.expect(r, Ty::Int, &context);
                    Ty::Int
                } else if op.is_logical() {
                    self.expect(l, Ty::Bool, &context);
                    self.expect(r, Ty::Bool, &context);
                    Ty::Bool
                } else if matches!(op, BinOp::Eq | BinOp::Ne) {
                    match (l, r) {
                        (Ty::Unknown, _) | (_, Ty::Unknown) => {}
                        (Ty::Int, Ty::Int) | (Ty::Bool, Ty::Bool) => {}
                        _ => self.error(
                            codes::TYPE_MISMATCH,
                            format!(
                                "type error: {context} cannot compare {} with {}",
                                l.name(),
                                r.name()
                            ),
                        ),
                    }
                    Ty::Bool
                } else {
                    self.expect(l, Ty::Int, &context);
                    self.expect(r, Ty::Int, &context);
                    Ty::Bool
                }
            }
            Expr::Call { callee, args } => {
                let arg_tys: Vec<Ty> = args.iter().map(|a| self.check(a)).collect();
                if !is_all_different(callee) {
                    self.error(
                        codes::UNDECLARED_IDENTIFIER,
                        format!("undefined identifier `{callee}`"),
                    );
                    return Ty::Unknown;
                }
                if !self.has_all_different_include {
                    self.error(
                        codes::MISSING_INCLUDE,
                        format!("undefined identifier `{callee}`"),
                    );
                }
                match arg_tys.as_slice() {
                    [Ty::IntArray] | [Ty::Unknown] => {}
                    [Ty::BoolArray] => self.error(
                        codes::TYPE_MISMATCH,
                        format!("type error: `{callee}` expects an array of int, found array of bool"),
                    ),
                    [other] => self.error(
                        codes::ARITY_MISMATCH,
                        format!("`{callee}` expects an array argument, found {}", other.name()),
                    ),
                    _ => self.error(
                        codes::ARITY_MISMATCH,
                        format!("`{callee}` expects exactly 1 argument, found {}", args.len()),
                    ),
                }
                Ty::Bool
            }
        }
    }
}

fn constant_int(expr: &Expr) -> Option<i64> {
    match expr {
        Expr::IntLit(v) => Some(*v),
        Expr::Unary { op: UnOp::Neg, arg } => constant_int(arg)?.checked_neg(),
        _ => None,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConformanceReport {
    pub correct: bool,
    pub mismatches: Vec<String>,
}

impl ConformanceReport {
    fn from_mismatches(mismatches: Vec<String>) -> Self {
        ConformanceReport {
            correct: mismatches.is_empty(),
            mismatches,
        }
    }
}

/// Compares a model's structure with the requested features.
///
/// * Scalars: exactly `variable_count` scalar int declarations and no arrays.
/// * Array: at least one int array of length `variable_count`; scalar
///   declarations are ignored.
/// * Open domains must be `int`; defined domains a range or set literal.
/// * `None`: no constraint items. `Simple`: at least one. `AllDifferent`: a
///   top-level conjunct of some constraint is an all_different call whose
///   argument covers every counted variable.
pub fn check_conformance(ast: &ModelAst, spec: &ModelSpec) -> ConformanceReport {
    if has_errors(&validate(ast)) {
        return ConformanceReport::from_mismatches(vec!["model invalid".to_string()]);
    }
    let mut mismatches = Vec::new();
    let n = spec.variable_count;

    // Counted variables as (name, domain, array_len).
    let counted: Vec<(&str, &Domain, Option<u32>)> = match spec.variable_kind {
        VariableKind::DiscreteScalars => {
            let scalars: Vec<_> = ast
                .var_decls()
                .filter(|d| d.base == BaseType::Int && d.array_len.is_none())
                .map(|d| (d.name, d.domain, None))
                .collect();
            for d in ast.var_decls().filter(|d| d.array_len.is_some()) {
                mismatches.push(format!("unexpected array declaration `{}`", d.name));
            }
            if scalars.len() != n as usize {
                mismatches.push(format!(
                    "expected {n} discrete variables, found {}",
                    scalars.len()
                ));
            }
            scalars
        }
        VariableKind::DiscreteArray => {
            let arrays: Vec<_> = ast
                .var_decls()
                .filter(|d| d.base == BaseType::Int && d.array_len.is_some())
                .collect();
            let matching: Vec<_> = arrays
                .iter()
                .filter(|d| d.array_len == Some(n))
                .map(|d| (d.name, d.domain, d.array_len))
                .collect();
            if matching.is_empty() {
                match arrays.first() {
                    Some(d) => mismatches.push(format!(
                        "expected an array of {n} discrete variables, found array `{}` of length {}",
                        d.name,
                        d.array_len.unwrap_or(0)
                    )),
                    None => mismatches.push(format!(
                        "expected an array of {n} discrete variables, found no array"
                    )),
                }
            }
            matching
        }
    };

    for (name, domain, _) in &counted {
        match (spec.domain_kind, domain.is_open()) {
            (DomainKind::Open, false) => {
                mismatches.push(format!("expected an open domain for `{name}`, found a defined domain"))
            }
            (DomainKind::Defined, true) => {
                mismatches.push(format!("expected a defined domain for `{name}`, found an open domain"))
            }
            _ => {}
        }
    }

    let constraints: Vec<&Expr> = ast.constraints().collect();
    match spec.constraint_kind {
        ConstraintKind::None => {
            if !constraints.is_empty() {
                mismatches.push(format!("expected no constraints, found {}", constraints.len()));
            }
        }
        ConstraintKind::Simple => {
            if constraints.is_empty() {
                mismatches.push("expected at least one constraint, found none".to_string());
            }
        }
        ConstraintKind::AllDifferent => {
            let wanted: BTreeSet<String> = counted
                .iter()
                .flat_map(|(name, _, len)| grounded_names(name, *len))
                .collect();
            let covered = constraints
                .iter()
                .flat_map(|c| c.conjuncts())
                .any(|e| all_different_covers(e, &wanted, ast));
            if !covered {
                mismatches.push(
                    "expected an all_different constraint over all requested variables".to_string(),
                );
            }
        }
    }

    ConformanceReport::from_mismatches(mismatches)
}

fn grounded_names(name: &str, array_len: Option<u32>) -> Vec<String> {
    match array_len {
        None => vec![name.to_string()],
        Some(len) => (1..=len).map(|i| format!("{name}[{i}]")).collect(),
    }
}

fn all_different_covers(expr: &Expr, wanted: &BTreeSet<String>, ast: &ModelAst) -> bool {
    let Expr::Call { callee, args } = expr else {
        return false;
    };
    if !is_all_different(callee) || args.len() != 1 {
        return false;
    }
    let mut covered = BTreeSet::new();
    let mut add = |e: &Expr| match e {
        Expr::Ident(name) => {
            let len = ast.var_decls().find(|d| d.name == name).and_then(|d| d.array_len);
            covered.extend(grounded_names(name, len));
        }
        Expr::ArrayAccess { array, index } => {
            if let Some(k) = constant_int(index) {
                covered.insert(format!("{array}[{k}]"));
            }
        }
        _ => {}
    };
    match &args[0] {
        Expr::ArrayLit(elems) => elems.iter().for_each(&mut add),
        other => add(other),
    }
    !wanted.is_empty() && wanted.is_subset(&covered)
}
