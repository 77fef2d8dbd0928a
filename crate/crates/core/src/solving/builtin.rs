//! Chronological backtracking over grounded variables.
//!
//! Arrays are expanded into one variable per element. Variables are assigned
//! in declaration order with values tried in ascending order, and every
//! constraint is checked at the first point where all of its variables are
//! assigned. `all_different` and top-level `/\` are split into separate
//! constraints so they can fail early. Optimisation is branch-and-bound on
//! the objective.
//!
//! Undefined results (division by zero, overflow, out-of-range index) make
//! the nearest enclosing boolean expression false.

use std::collections::HashMap;
use std::time::{Duration, Instant};

use crate::analysis::validate;
use crate::syntax::{is_all_different, BaseType, BinOp, Domain, Expr, Item, ModelAst, SolveKind, UnOp};

use super::{AssignedValue, Assignment, LimitKind, SolveLimits, SolveOutcome};

/// Solves `ast` with the built-in search. Returns `CompileError` carrying the
/// first error message when [`validate`] reports errors.
pub fn solve_builtin(ast: &ModelAst, limits: &SolveLimits) -> SolveOutcome {
    if let Some(first) = validate(ast).into_iter().find(|d| d.is_error()) {
        return SolveOutcome::CompileError {
            message: first.message,
        };
    }
    if let Err(message) = limits.check() {
        return SolveOutcome::CompileError {
            message: format!("invalid solver limits: {message}"),
        };
    }
    // Every grounded variable costs at least one node.
    let grounded: u64 = ast
        .var_decls()
        .map(|d| u64::from(d.array_len.unwrap_or(1)))
        .sum();
    if grounded > limits.max_nodes {
        return SolveOutcome::LimitReached {
            kind: LimitKind::Nodes,
        };
    }
    let problem = Problem::compile(ast, limits);
    problem.search(limits)
}

/// Larger all_different calls are checked as one constraint.
const PAIRWISE_LIMIT: usize = 256;

#[derive(Debug, Clone)]
enum ValueSet {
    Range(i64, i64),
    List(Vec<i64>),
}

impl ValueSet {
    fn first(&self) -> Option<i64> {
        match self {
            ValueSet::Range(lo, hi) => (lo <= hi).then_some(*lo),
            ValueSet::List(vs) => vs.first().copied(),
        }
    }

    fn after(&self, current: i64) -> Option<i64> {
        match self {
            ValueSet::Range(_, hi) => (current < *hi).then(|| current + 1),
            ValueSet::List(vs) => {
                let pos = vs.partition_point(|v| *v <= current);
                vs.get(pos).copied()
            }
        }
    }
}

#[derive(Debug, Clone)]
enum Node {
    Const(i64),
    Var(usize),
    /// `vars[index - 1]`; `is_bool` selects relational failure semantics.
    Element {
        vars: Vec<usize>,
        index: Box<Node>,
        is_bool: bool,
    },
    Neg(Box<Node>),
    Not(Box<Node>),
    Bin(BinOp, Box<Node>, Box<Node>),
    AllDifferent(Vec<Node>),
}

impl Node {
    fn deps(&self, out: &mut Vec<usize>) {
        match self {
            Node::Const(_) => {}
            Node::Var(i) => out.push(*i),
            Node::Element { vars, index, .. } => {
                out.extend(vars);
                index.deps(out);
            }
            Node::Neg(a) | Node::Not(a) => a.deps(out),
            Node::Bin(_, a, b) => {
                a.deps(out);
                b.deps(out);
            }
            Node::AllDifferent(items) => items.iter().for_each(|n| n.deps(out)),
        }
    }

    /// `None` means undefined. Boolean-valued nodes are never undefined.
    fn eval(&self, values: &[i64]) -> Option<i64> {
        match self {
            Node::Const(v) => Some(*v),
            Node::Var(i) => Some(values[*i]),
            Node::Element {
                vars,
                index,
                is_bool,
            } => {
                let picked = index
                    .eval(values)
                    .and_then(|k| usize::try_from(k.checked_sub(1)?).ok())
                    .and_then(|k| vars.get(k))
                    .map(|&v| values[v]);
                if *is_bool {
                    Some(picked.unwrap_or(0))
                } else {
                    picked
                }
            }
            Node::Neg(a) => a.eval(values)?.checked_neg(),
            Node::Not(a) => Some(i64::from(a.eval(values) != Some(1))),
            Node::Bin(op, a, b) => {
                if op.is_logical() {
                    let l = a.eval(values) == Some(1);
                    let r = b.eval(values) == Some(1);
                    return Some(i64::from(match op {
                        BinOp::And => l && r,
                        _ => l || r,
                    }));
                }
                let (l, r) = (a.eval(values), b.eval(values));
                if op.is_comparison() {
                    let (Some(l), Some(r)) = (l, r) else {
                        return Some(0);
                    };
                    return Some(i64::from(match op {
                        BinOp::Eq => l == r,
                        BinOp::Ne => l != r,
                        BinOp::Lt => l < r,
                        BinOp::Le => l <= r,
                        BinOp::Gt => l > r,
                        _ => l >= r,
                    }));
                }
                let (l, r) = (l?, r?);
                match op {
                    BinOp::Add => l.checked_add(r),
                    BinOp::Sub => l.checked_sub(r),
                    BinOp::Mul => l.checked_mul(r),
                    // MiniZinc's div/mod truncate toward zero, like Rust's.
                    BinOp::Div => l.checked_div(r),
                    _ => l.checked_rem(r),
                }
            }
            Node::AllDifferent(items) => {
                let mut seen = Vec::with_capacity(items.len());
                for item in items {
                    match item.eval(values) {
                        Some(v) if !seen.contains(&v) => seen.push(v),
                        _ => return Some(0),
                    }
                }
                Some(1)
            }
        }
    }
}

enum Binding {
    Scalar(usize, BaseType),
    Array(Vec<usize>, BaseType),
}

struct Check {
    node: Node,
    /// Deepest variable position the check depends on; `None` for constants.
    trigger: Option<usize>,
}

struct Problem {
    domains: Vec<ValueSet>,
    bindings: Vec<(String, Binding)>,
    checks_at: Vec<Vec<Check>>,
    root_checks: Vec<Check>,
    objective: Option<(SolveKind, Check)>,
}

impl Problem {
    fn compile(ast: &ModelAst, limits: &SolveLimits) -> Problem {
        let mut domains = Vec::new();
        let mut bindings = Vec::new();
        let mut by_name = HashMap::new();
        for d in ast.var_decls() {
            let values = match (d.base, d.domain) {
                (BaseType::Bool, _) => ValueSet::Range(0, 1),
                (BaseType::Int, Domain::Open) => {
                    ValueSet::Range(limits.open_domain_bounds.0, limits.open_domain_bounds.1)
                }
                (BaseType::Int, Domain::Range { lo, hi }) => ValueSet::Range(*lo, *hi),
                (BaseType::Int, Domain::SetLit { values }) => ValueSet::List(values.clone()),
            };
            let binding = match d.array_len {
                None => {
                    domains.push(values);
                    Binding::Scalar(domains.len() - 1, d.base)
                }
                Some(len) => {
                    let start = domains.len();
                    domains.extend(std::iter::repeat_n(values, len as usize));
                    Binding::Array((start..domains.len()).collect(), d.base)
                }
            };
            by_name.insert(d.name.to_string(), bindings.len());
            bindings.push((d.name.to_string(), binding));
        }

        let compiler = Compiler {
            bindings: &bindings,
            by_name: &by_name,
        };
        let mut checks = Vec::new();
        let mut objective = None;
        for item in &ast.items {
            match item {
                Item::Constraint { expr } => {
                    for conjunct in expr.conjuncts() {
                        match conjunct {
                            Expr::Call { callee, args }
                                if is_all_different(callee)
                                    && compiler.elements(&args[0]).len() <= PAIRWISE_LIMIT =>
                            {
                                let elems = compiler.elements(&args[0]);
                                for i in 0..elems.len() {
                                    for j in i + 1..elems.len() {
                                        checks.push(Node::Bin(
                                            BinOp::Ne,
                                            Box::new(elems[i].clone()),
                                            Box::new(elems[j].clone()),
                                        ));
                                    }
                                }
                            }
                            other => checks.push(compiler.node(other)),
                        }
                    }
                }
                Item::Solve {
                    kind,
                    objective: Some(obj),
                } => {
                    objective = Some((*kind, make_check(compiler.node(obj))));
                }
                _ => {}
            }
        }

        let mut checks_at: Vec<Vec<Check>> = (0..domains.len()).map(|_| Vec::new()).collect();
        let mut root_checks = Vec::new();
        for node in checks {
            let check = make_check(node);
            match check.trigger {
                Some(level) => checks_at[level].push(check),
                None => root_checks.push(check),
            }
        }
        Problem {
            domains,
            bindings,
            checks_at,
            root_checks,
            objective,
        }
    }

    fn assignment(&self, values: &[i64]) -> Assignment {
        self.bindings
            .iter()
            .map(|(name, binding)| {
                let value = match binding {
                    Binding::Scalar(i, BaseType::Int) => AssignedValue::Int(values[*i]),
                    Binding::Scalar(i, BaseType::Bool) => AssignedValue::Bool(values[*i] == 1),
                    Binding::Array(ix, BaseType::Int) => {
                        AssignedValue::IntArray(ix.iter().map(|&i| values[i]).collect())
                    }
                    Binding::Array(ix, BaseType::Bool) => {
                        AssignedValue::BoolArray(ix.iter().map(|&i| values[i] == 1).collect())
                    }
                };
                (name.clone(), value)
            })
            .collect()
    }

    /// Whether the objective value admits this partial assignment under the
    /// current bound. Undefined objectives are rejected.
    fn objective_ok(&self, values: &[i64], best: Option<i64>) -> bool {
        let Some((kind, check)) = &self.objective else {
            return true;
        };
        match (check.node.eval(values), best) {
            (None, _) => false,
            (Some(_), None) => true,
            (Some(v), Some(b)) => match kind {
                SolveKind::Minimize => v < b,
                SolveKind::Maximize => v > b,
                SolveKind::Satisfy => true,
            },
        }
    }

    fn search(&self, limits: &SolveLimits) -> SolveOutcome {
        let n = self.domains.len();
        let mut values = vec![0i64; n];
        let objective_trigger = self.objective.as_ref().map(|(_, c)| c.trigger);
        let mut best: Option<(i64, Assignment)> = None;

        if !self.root_checks.iter().all(|c| c.node.eval(&values) == Some(1)) {
            return SolveOutcome::Unsatisfiable;
        }

        let start = Instant::now();
        let deadline = Duration::from_millis(limits.max_time_ms);
        let mut nodes: u64 = 0;
        // assigned[level] is false until the level holds a value
        let mut assigned = vec![false; n];
        let mut level = 0usize;

        loop {
            if level == n {
                let bound = best.as_ref().map(|(b, _)| *b);
                if self.objective_ok(&values, bound) {
                    let assignment = self.assignment(&values);
                    match &self.objective {
                        None => {
                            return SolveOutcome::Satisfied {
                                assignment,
                                objective: None,
                            }
                        }
                        Some((_, check)) => {
                            let v = check.node.eval(&values).expect("objective checked");
                            best = Some((v, assignment));
                        }
                    }
                }
                if n == 0 {
                    break;
                }
                level -= 1;
                continue;
            }

            let next = if assigned[level] {
                self.domains[level].after(values[level])
            } else {
                self.domains[level].first()
            };
            let Some(value) = next else {
                assigned[level] = false;
                if level == 0 {
                    break;
                }
                level -= 1;
                continue;
            };
            values[level] = value;
            assigned[level] = true;

            nodes += 1;
            if nodes > limits.max_nodes {
                return SolveOutcome::LimitReached {
                    kind: LimitKind::Nodes,
                };
            }
            if nodes.is_multiple_of(4096) && start.elapsed() > deadline {
                return SolveOutcome::LimitReached {
                    kind: LimitKind::Time,
                };
            }

            let mut ok = self.checks_at[level]
                .iter()
                .all(|c| c.node.eval(&values) == Some(1));
            if ok && objective_trigger == Some(Some(level)) {
                ok = self.objective_ok(&values, best.as_ref().map(|(b, _)| *b));
            }
            if ok {
                level += 1;
                if level < n {
                    assigned[level] = false;
                }
            }
        }

        match best {
            Some((objective, assignment)) => SolveOutcome::Satisfied {
                assignment,
                objective: Some(objective),
            },
            None => SolveOutcome::Unsatisfiable,
        }
    }
}

fn make_check(node: Node) -> Check {
    let mut deps = Vec::new();
    node.deps(&mut deps);
    Check {
        trigger: deps.into_iter().max(),
        node,
    }
}

struct Compiler<'a> {
    bindings: &'a [(String, Binding)],
    by_name: &'a HashMap<String, usize>,
}

impl Compiler<'_> {
    fn binding(&self, name: &str) -> &Binding {
        &self.bindings[self.by_name[name]].1
    }

    /// Element expressions of an array-valued argument.
    fn elements(&self, expr: &Expr) -> Vec<Node> {
        match expr {
            Expr::ArrayLit(elems) => elems.iter().map(|e| self.node(e)).collect(),
            Expr::Ident(name) => match self.binding(name) {
                Binding::Array(ix, _) => ix.iter().map(|&i| Node::Var(i)).collect(),
                Binding::Scalar(i, _) => vec![Node::Var(*i)],
            },
            other => vec![self.node(other)],
        }
    }

    fn node(&self, expr: &Expr) -> Node {
        match expr {
            Expr::IntLit(v) => Node::Const(*v),
            Expr::BoolLit(b) => Node::Const(i64::from(*b)),
            Expr::Ident(name) => match self.binding(name) {
                Binding::Scalar(i, _) => Node::Var(*i),
                Binding::Array(..) => unreachable!("validated: arrays only appear as call arguments"),
            },
            Expr::ArrayAccess { array, index } => {
                let Binding::Array(ix, base) = self.binding(array) else {
                    unreachable!("validated: only arrays are indexed")
                };
                let index = self.node(index);
                if let Node::Const(k) = index {
                    if let Some(&var) = usize::try_from(k - 1).ok().and_then(|k| ix.get(k)) {
                        return Node::Var(var);
                    }
                }
                Node::Element {
                    vars: ix.clone(),
                    index: Box::new(index),
                    is_bool: *base == BaseType::Bool,
                }
            }
            Expr::ArrayLit(_) => unreachable!("validated: array literals only appear as call arguments"),
            Expr::Unary { op: UnOp::Neg, arg } => match self.node(arg) {
                Node::Const(v) if v != i64::MIN => Node::Const(-v),
                other => Node::Neg(Box::new(other)),
            },
            Expr::Unary { op: UnOp::Not, arg } => Node::Not(Box::new(self.node(arg))),
            Expr::Binary { op, lhs, rhs } => {
                Node::Bin(*op, Box::new(self.node(lhs)), Box::new(self.node(rhs)))
            }
            Expr::Call { args, .. } => Node::AllDifferent(self.elements(&args[0])),
        }
    }
}
