//! Lexer, parser and canonical printer for the MiniZinc subset.
//!
//! The accepted grammar:
//!
//! ```text
//! model      := { item ";" }
//! item       := include | vardecl | constraint | solve | output
//! include    := "include" STRING
//! vardecl    := ["array" "[" INT ".." INT "]" "of"] "var" domain ":" IDENT
//! domain     := "int" | "bool" | INT ".." INT | "{" INT {"," INT} "}"
//! constraint := "constraint" expr
//! solve      := "solve" ("satisfy" | ("minimize" | "maximize") expr)
//! output     := "output" balanced-bracket-payload
//! ```
//!
//! Expression precedence from loosest to tightest: `\/`, `/\`, comparisons,
//! additive, multiplicative, unary, postfix/atoms. Array index sets must
//! start at 1.

mod ast;
mod lexer;
mod parser;
mod printer;

pub use ast::{
    is_all_different, BaseType, BinOp, Domain, Expr, Item, ModelAst, SolveKind, UnOp, VarDeclRef,
};
pub use lexer::{tokenize, LexError, Token, TokenKind};
pub use parser::parse_model;
pub use printer::{print_expr, print_model};
