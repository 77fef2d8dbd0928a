use std::fmt::Write as _;

use super::ast::{BaseType, Domain, Expr, Item, ModelAst, SolveKind, UnOp};

/// Canonical text: one item per line, each terminated by `;`.
pub fn print_model(ast: &ModelAst) -> String {
    let mut out = String::new();
    for item in &ast.items {
        print_item(&mut out, item);
        out.push_str(";\n");
    }
    out
}

fn print_item(out: &mut String, item: &Item) {
    match item {
        Item::Include { path } => {
            let _ = write!(out, "include \"{path}\"");
        }
        Item::VarDecl {
            name,
            base,
            domain,
            array_len,
        } => {
            if let Some(n) = array_len {
                let _ = write!(out, "array[1..{n}] of ");
            }
            out.push_str("var ");
            match (base, domain) {
                (BaseType::Bool, _) => out.push_str("bool"),
                (BaseType::Int, Domain::Open) => out.push_str("int"),
                (BaseType::Int, Domain::Range { lo, hi }) => {
                    let _ = write!(out, "{lo}..{hi}");
                }
                (BaseType::Int, Domain::SetLit { values }) => {
                    out.push('{');
                    for (i, v) in values.iter().enumerate() {
                        if i > 0 {
                            out.push_str(", ");
                        }
                        let _ = write!(out, "{v}");
                    }
                    out.push('}');
                }
            }
            let _ = write!(out, ": {name}");
        }
        Item::Constraint { expr } => {
            out.push_str("constraint ");
            out.push_str(&print_expr(expr));
        }
        Item::Solve { kind, objective } => {
            out.push_str(match kind {
                SolveKind::Satisfy => "solve satisfy",
                SolveKind::Minimize => "solve minimize ",
                SolveKind::Maximize => "solve maximize ",
            });
            if let Some(obj) = objective {
                out.push_str(&print_expr(obj));
            }
        }
        Item::Output { raw } => {
            out.push_str("output ");
            out.push_str(raw);
        }
    }
}

/// Prints with the fewest parentheses the parser needs to rebuild the same tree.
pub fn print_expr(expr: &Expr) -> String {
    let mut out = String::new();
    write_expr(&mut out, expr, 0);
    out
}

/// `min_prec` is the weakest binary operator that may appear unparenthesised.
fn write_expr(out: &mut String, expr: &Expr, min_prec: u8) {
    match expr {
        Expr::IntLit(v) => {
            let _ = write!(out, "{v}");
        }
        Expr::BoolLit(b) => {
            let _ = write!(out, "{b}");
        }
        Expr::Ident(name) => out.push_str(name),
        Expr::ArrayAccess { array, index } => {
            out.push_str(array);
            out.push('[');
            write_expr(out, index, 0);
            out.push(']');
        }
        Expr::ArrayLit(elems) => {
            out.push('[');
            write_list(out, elems);
            out.push(']');
        }
        Expr::Call { callee, args } => {
            out.push_str(callee);
            out.push('(');
            write_list(out, args);
            out.push(')');
        }
        Expr::Unary { op, arg } => {
            out.push_str(match op {
                UnOp::Neg => "-",
                UnOp::Not => "not ",
            });
            // `-3` would read back as a literal, so a negated literal keeps its parens.
            let wrap = matches!(**arg, Expr::Binary { .. })
                || (*op == UnOp::Neg && matches!(**arg, Expr::IntLit(_)));
            if wrap {
                out.push('(');
                write_expr(out, arg, 0);
                out.push(')');
            } else {
                write_expr(out, arg, u8::MAX);
            }
        }
        Expr::Binary { op, lhs, rhs } => {
            let prec = op.precedence();
            let wrap = prec < min_prec;
            if wrap {
                out.push('(');
            }
            write_expr(out, lhs, prec);
            let _ = write!(out, " {} ", op.symbol());
            // all operators are left-associative
            write_expr(out, rhs, prec + 1);
            if wrap {
                out.push(')');
            }
        }
    }
}

fn write_list(out: &mut String, elems: &[Expr]) {
    for (i, e) in elems.iter().enumerate() {
        if i > 0 {
            out.push_str(", ");
        }
        write_expr(out, e, 0);
    }
}
