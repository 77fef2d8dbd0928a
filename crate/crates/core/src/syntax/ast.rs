use serde::{Deserialize, Serialize};

use crate::diagnostic::SourceSpan;

/// A parsed model. Item order follows the source.
///
/// `spans` holds one span per item when the model came from the parser and
/// is empty for hand-built trees. Equality ignores spans.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct ModelAst {
    pub items: Vec<Item>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub spans: Vec<SourceSpan>,
}

impl PartialEq for ModelAst {
    fn eq(&self, other: &Self) -> bool {
        self.items == other.items
    }
}

impl Eq for ModelAst {}

impl ModelAst {
    pub fn new(items: Vec<Item>) -> Self {
        ModelAst {
            items,
            spans: Vec::new(),
        }
    }

    pub fn span_of(&self, item_index: usize) -> Option<SourceSpan> {
        self.spans.get(item_index).copied()
    }

    pub fn var_decls(&self) -> impl Iterator<Item = VarDeclRef<'_>> {
        self.items.iter().filter_map(|item| match item {
            Item::VarDecl {
                name,
                base,
                domain,
                array_len,
            } => Some(VarDeclRef {
                name,
                base: *base,
                domain,
                array_len: *array_len,
            }),
            _ => None,
        })
    }

    pub fn constraints(&self) -> impl Iterator<Item = &Expr> {
        self.items.iter().filter_map(|item| match item {
            Item::Constraint { expr } => Some(expr),
            _ => None,
        })
    }

    pub fn includes(&self) -> impl Iterator<Item = &str> {
        self.items.iter().filter_map(|item| match item {
            Item::Include { path } => Some(path.as_str()),
            _ => None,
        })
    }
}

#[derive(Debug, Clone, Copy)]
pub struct VarDeclRef<'a> {
    pub name: &'a str,
    pub base: BaseType,
    pub domain: &'a Domain,
    pub array_len: Option<u32>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Item {
    Include {
        path: String,
    },
    /// `array_len` present means `array[1..n] of var ...`.
    VarDecl {
        name: String,
        base: BaseType,
        domain: Domain,
        array_len: Option<u32>,
    },
    Constraint {
        expr: Expr,
    },
    Solve {
        kind: SolveKind,
        objective: Option<Expr>,
    },
    /// Payload text only; checked for balanced brackets, otherwise ignored.
    Output {
        raw: String,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BaseType {
    Int,
    Bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Domain {
    Open,
    Range { lo: i64, hi: i64 },
    /// Strictly ascending after parsing.
    SetLit { values: Vec<i64> },
}

impl Domain {
    pub fn is_open(&self) -> bool {
        matches!(self, Domain::Open)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SolveKind {
    Satisfy,
    Minimize,
    Maximize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum UnOp {
    Neg,
    Not,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Mod,
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
    And,
    Or,
}

impl BinOp {
    /// Binding strength; larger binds tighter.
    pub fn precedence(self) -> u8 {
        match self {
            BinOp::Or => 1,
            BinOp::And => 2,
            BinOp::Eq | BinOp::Ne | BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge => 3,
            BinOp::Add | BinOp::Sub => 4,
            BinOp::Mul | BinOp::Div | BinOp::Mod => 5,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "div",
            BinOp::Mod => "mod",
            BinOp::Eq => "=",
            BinOp::Ne => "!=",
            BinOp::Lt => "<",
            BinOp::Le => "<=",
            BinOp::Gt => ">",
            BinOp::Ge => ">=",
            BinOp::And => "/\\",
            BinOp::Or => "\\/",
        }
    }

    pub fn is_arithmetic(self) -> bool {
        matches!(self, BinOp::Add | BinOp::Sub | BinOp::Mul | BinOp::Div | BinOp::Mod)
    }

    pub fn is_comparison(self) -> bool {
        self.precedence() == 3
    }

    pub fn is_logical(self) -> bool {
        matches!(self, BinOp::And | BinOp::Or)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Expr {
    IntLit(i64),
    BoolLit(bool),
    Ident(String),
    ArrayAccess { array: String, index: Box<Expr> },
    ArrayLit(Vec<Expr>),
    Unary { op: UnOp, arg: Box<Expr> },
    Binary { op: BinOp, lhs: Box<Expr>, rhs: Box<Expr> },
    Call { callee: String, args: Vec<Expr> },
}

impl Expr {
    pub fn ident(name: &str) -> Expr {
        Expr::Ident(name.to_string())
    }

    pub fn binary(op: BinOp, lhs: Expr, rhs: Expr) -> Expr {
        Expr::Binary {
            op,
            lhs: Box::new(lhs),
            rhs: Box::new(rhs),
        }
    }

    pub fn access(array: &str, index: Expr) -> Expr {
        Expr::ArrayAccess {
            array: array.to_string(),
            index: Box::new(index),
        }
    }

    pub fn call(callee: &str, args: Vec<Expr>) -> Expr {
        Expr::Call {
            callee: callee.to_string(),
            args,
        }
    }

    /// Pre-order walk over this expression and all sub-expressions.
    pub fn visit<'a>(&'a self, f: &mut impl FnMut(&'a Expr)) {
        f(self);
        match self {
            Expr::IntLit(_) | Expr::BoolLit(_) | Expr::Ident(_) => {}
            Expr::ArrayAccess { index, .. } => index.visit(f),
            Expr::ArrayLit(elems) => elems.iter().for_each(|e| e.visit(f)),
            Expr::Unary { arg, .. } => arg.visit(f),
            Expr::Binary { lhs, rhs, .. } => {
                lhs.visit(f);
                rhs.visit(f);
            }
            Expr::Call { args, .. } => args.iter().for_each(|e| e.visit(f)),
        }
    }

    /// Top-level conjuncts of `a /\ b /\ ...`.
    pub fn conjuncts(&self) -> Vec<&Expr> {
        let mut out = Vec::new();
        fn go<'a>(e: &'a Expr, out: &mut Vec<&'a Expr>) {
            match e {
                Expr::Binary {
                    op: BinOp::And,
                    lhs,
                    rhs,
                } => {
                    go(lhs, out);
                    go(rhs, out);
                }
                other => out.push(other),
            }
        }
        go(self, &mut out);
        out
    }
}

/// Names that refer to the all-different global constraint.
pub fn is_all_different(callee: &str) -> bool {
    matches!(callee, "all_different" | "alldifferent")
}
