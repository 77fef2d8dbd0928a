use crate::diagnostic::{codes, Diagnostic, SourceSpan};

use super::ast::{BaseType, BinOp, Domain, Expr, Item, ModelAst, SolveKind, UnOp};
use super::lexer::{lex, Token, TokenKind};

/// Parses a model. Syntax errors are collected item by item, resuming after
/// the next `;`, and returned together.
pub fn parse_model(source: &str) -> Result<ModelAst, Vec<Diagnostic>> {
    let (tokens, lex_errors) = lex(source);
    let mut diagnostics: Vec<Diagnostic> = lex_errors
        .into_iter()
        .map(|e| Diagnostic::error(codes::LEX_ERROR, e.message, Some(e.span)))
        .collect();
    let mut parser = Parser {
        source,
        tokens: &tokens,
        pos: 0,
    };
    let mut ast = ModelAst::default();
    while !parser.at_end() {
        let first = parser.pos;
        match parser.item() {
            Ok(item) => match parser.expect(&TokenKind::Semi, "`;`") {
                Ok(semi) => {
                    ast.spans.push(tokens[first].span.join(semi.span));
                    ast.items.push(item);
                }
                Err(d) => {
                    diagnostics.push(d);
                    parser.recover();
                }
            },
            Err(d) => {
                diagnostics.push(d);
                parser.recover();
            }
        }
    }
    if diagnostics.is_empty() {
        Ok(ast)
    } else {
        diagnostics.sort_by_key(|d| d.span);
        Err(diagnostics)
    }
}

type PResult<T> = Result<T, Diagnostic>;

struct Parser<'a> {
    source: &'a str,
    tokens: &'a [Token],
    pos: usize,
}

impl<'a> Parser<'a> {
    fn at_end(&self) -> bool {
        self.pos >= self.tokens.len()
    }

    fn peek(&self) -> Option<&'a TokenKind> {
        self.tokens.get(self.pos).map(|t| &t.kind)
    }

    fn peek_at(&self, offset: usize) -> Option<&'a TokenKind> {
        self.tokens.get(self.pos + offset).map(|t| &t.kind)
    }

    fn bump(&mut self) -> &'a Token {
        let t = &self.tokens[self.pos];
        self.pos += 1;
        t
    }

    fn eat(&mut self, kind: &TokenKind) -> bool {
        if self.peek() == Some(kind) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn unexpected(&self, expecting: &str) -> Diagnostic {
        match self.tokens.get(self.pos) {
            Some(t) => Diagnostic::error(
                codes::SYNTAX_ERROR,
                format!("syntax error, unexpected {}, expecting {expecting}", t.kind),
                Some(t.span),
            ),
            None => Diagnostic::error(
                codes::SYNTAX_ERROR,
                format!("syntax error, unexpected end of file, expecting {expecting}"),
                self.tokens.last().map(|t| t.span),
            ),
        }
    }

    fn expect(&mut self, kind: &TokenKind, what: &str) -> PResult<&'a Token> {
        if self.peek() == Some(kind) {
            Ok(self.bump())
        } else {
            Err(self.unexpected(what))
        }
    }

    fn ident(&mut self) -> PResult<String> {
        match self.peek() {
            Some(TokenKind::Ident(name)) => {
                self.pos += 1;
                Ok(name.clone())
            }
            _ => Err(self.unexpected("identifier")),
        }
    }

    /// Skips past the next `;`, always consuming at least one token.
    fn recover(&mut self) {
        if self.at_end() {
            return;
        }
        let start = self.pos;
        while let Some(kind) = self.peek() {
            self.pos += 1;
            if *kind == TokenKind::Semi {
                return;
            }
        }
        if self.pos == start {
            self.pos += 1;
        }
    }

    fn item(&mut self) -> PResult<Item> {
        match self.peek() {
            Some(TokenKind::Include) => {
                self.bump();
                match self.peek() {
                    Some(TokenKind::Str(path)) => {
                        self.bump();
                        Ok(Item::Include { path: path.clone() })
                    }
                    _ => Err(self.unexpected("string literal")),
                }
            }
            Some(TokenKind::Var) | Some(TokenKind::Array) => self.var_decl(),
            Some(TokenKind::Constraint) => {
                self.bump();
                Ok(Item::Constraint { expr: self.expr()? })
            }
            Some(TokenKind::Solve) => {
                self.bump();
                match self.peek() {
                    Some(TokenKind::Satisfy) => {
                        self.bump();
                        Ok(Item::Solve {
                            kind: SolveKind::Satisfy,
                            objective: None,
                        })
                    }
                    Some(TokenKind::Minimize) | Some(TokenKind::Maximize) => {
                        let kind = if self.bump().kind == TokenKind::Minimize {
                            SolveKind::Minimize
                        } else {
                            SolveKind::Maximize
                        };
                        Ok(Item::Solve {
                            kind,
                            objective: Some(self.expr()?),
                        })
                    }
                    _ => Err(self.unexpected("`satisfy`, `minimize` or `maximize`")),
                }
            }
            Some(TokenKind::Output) => {
                self.bump();
                self.output_payload()
            }
            _ => Err(self.unexpected("an item (include, var, array, constraint, solve or output)")),
        }
    }

    fn var_decl(&mut self) -> PResult<Item> {
        let mut array_len = None;
        if self.eat(&TokenKind::Array) {
            self.expect(&TokenKind::LBracket, "`[`")?;
            let lo_tok = self.tokens.get(self.pos);
            let lo = self.signed_int()?;
            self.expect(&TokenKind::DotDot, "`..`")?;
            let hi_tok = self.tokens.get(self.pos);
            let hi = self.signed_int()?;
            self.expect(&TokenKind::RBracket, "`]`")?;
            if lo != 1 {
                return Err(Diagnostic::error(
                    codes::SYNTAX_ERROR,
                    format!("array index set must start at 1, found {lo}..{hi}"),
                    lo_tok.map(|t| t.span),
                ));
            }
            if !(1..=i64::from(u32::MAX)).contains(&hi) {
                return Err(Diagnostic::error(
                    codes::SYNTAX_ERROR,
                    format!("array index set 1..{hi} must contain at least one element"),
                    hi_tok.map(|t| t.span),
                ));
            }
            array_len = Some(hi as u32);
            self.expect(&TokenKind::Of, "`of`")?;
        }
        self.expect(&TokenKind::Var, "`var`")?;
        let (base, domain) = self.domain()?;
        self.expect(&TokenKind::Colon, "`:`")?;
        let name = self.ident()?;
        Ok(Item::VarDecl {
            name,
            base,
            domain,
            array_len,
        })
    }

    fn domain(&mut self) -> PResult<(BaseType, Domain)> {
        match self.peek() {
            Some(TokenKind::Int_) => {
                self.bump();
                Ok((BaseType::Int, Domain::Open))
            }
            Some(TokenKind::Bool) => {
                self.bump();
                Ok((BaseType::Bool, Domain::Open))
            }
            Some(TokenKind::Int(_)) | Some(TokenKind::Minus) => {
                let lo = self.signed_int()?;
                self.expect(&TokenKind::DotDot, "`..`")?;
                let hi = self.signed_int()?;
                Ok((BaseType::Int, Domain::Range { lo, hi }))
            }
            Some(TokenKind::LBrace) => {
                self.bump();
                let mut values = vec![self.signed_int()?];
                while self.eat(&TokenKind::Comma) {
                    values.push(self.signed_int()?);
                }
                self.expect(&TokenKind::RBrace, "`}`")?;
                values.sort_unstable();
                values.dedup();
                Ok((BaseType::Int, Domain::SetLit { values }))
            }
            _ => Err(self.unexpected("`int`, `bool`, a range or a set literal")),
        }
    }

    fn signed_int(&mut self) -> PResult<i64> {
        let negative = self.eat(&TokenKind::Minus);
        match self.peek() {
            Some(TokenKind::Int(v)) => {
                let span = self.bump().span;
                int_value(*v, negative).ok_or_else(|| out_of_range(*v, negative, span))
            }
            _ => Err(self.unexpected("integer literal")),
        }
    }

    fn output_payload(&mut self) -> PResult<Item> {
        let first = self.pos;
        let mut stack: Vec<&TokenKind> = Vec::new();
        while let Some(kind) = self.peek() {
            match kind {
                TokenKind::Semi if stack.is_empty() => break,
                TokenKind::LParen | TokenKind::LBracket | TokenKind::LBrace => stack.push(kind),
                TokenKind::RParen | TokenKind::RBracket | TokenKind::RBrace => {
                    let expected = match kind {
                        TokenKind::RParen => TokenKind::LParen,
                        TokenKind::RBracket => TokenKind::LBracket,
                        _ => TokenKind::LBrace,
                    };
                    if stack.pop() != Some(&expected) {
                        return Err(Diagnostic::error(
                            codes::SYNTAX_ERROR,
                            format!("unbalanced {kind} in output item"),
                            Some(self.tokens[self.pos].span),
                        ));
                    }
                }
                _ => {}
            }
            self.pos += 1;
        }
        if !stack.is_empty() {
            return Err(self.unexpected("a closing bracket in output item"));
        }
        if self.pos == first {
            return Err(self.unexpected("output expression"));
        }
        let raw = &self.source[self.tokens[first].start..self.tokens[self.pos - 1].end];
        Ok(Item::Output {
            raw: raw.to_string(),
        })
    }

    fn expr(&mut self) -> PResult<Expr> {
        self.binary_level(1)
    }

    fn binop(&self) -> Option<BinOp> {
        Some(match self.peek()? {
            TokenKind::Or => BinOp::Or,
            TokenKind::And => BinOp::And,
            TokenKind::Eq => BinOp::Eq,
            TokenKind::Ne => BinOp::Ne,
            TokenKind::Lt => BinOp::Lt,
            TokenKind::Le => BinOp::Le,
            TokenKind::Gt => BinOp::Gt,
            TokenKind::Ge => BinOp::Ge,
            TokenKind::Plus => BinOp::Add,
            TokenKind::Minus => BinOp::Sub,
            TokenKind::Star => BinOp::Mul,
            TokenKind::Div => BinOp::Div,
            TokenKind::Mod => BinOp::Mod,
            _ => return None,
        })
    }

    /// Left-associative precedence climbing over levels 1 (`\/`) to 5.
    fn binary_level(&mut self, level: u8) -> PResult<Expr> {
        if level > 5 {
            return self.unary();
        }
        let mut lhs = self.binary_level(level + 1)?;
        while let Some(op) = self.binop().filter(|op| op.precedence() == level) {
            self.bump();
            let rhs = self.binary_level(level + 1)?;
            lhs = Expr::binary(op, lhs, rhs);
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> PResult<Expr> {
        match self.peek() {
            Some(TokenKind::Minus) => {
                if let Some(TokenKind::Int(v)) = self.peek_at(1) {
                    self.bump();
                    let span = self.bump().span;
                    return int_value(*v, true)
                        .map(Expr::IntLit)
                        .ok_or_else(|| out_of_range(*v, true, span));
                }
                self.bump();
                Ok(Expr::Unary {
                    op: UnOp::Neg,
                    arg: Box::new(self.unary()?),
                })
            }
            Some(TokenKind::Not) => {
                self.bump();
                Ok(Expr::Unary {
                    op: UnOp::Not,
                    arg: Box::new(self.unary()?),
                })
            }
            _ => self.atom(),
        }
    }

    fn atom(&mut self) -> PResult<Expr> {
        match self.peek() {
            Some(TokenKind::Int(v)) => {
                let span = self.bump().span;
                int_value(*v, false)
                    .map(Expr::IntLit)
                    .ok_or_else(|| out_of_range(*v, false, span))
            }
            Some(TokenKind::True) => {
                self.bump();
                Ok(Expr::BoolLit(true))
            }
            Some(TokenKind::False) => {
                self.bump();
                Ok(Expr::BoolLit(false))
            }
            Some(TokenKind::Ident(name)) => {
                self.bump();
                match self.peek() {
                    Some(TokenKind::LParen) => {
                        self.bump();
                        let args = self.expr_list(&TokenKind::RParen, "`)`")?;
                        Ok(Expr::Call {
                            callee: name.clone(),
                            args,
                        })
                    }
                    Some(TokenKind::LBracket) => {
                        self.bump();
                        let index = self.expr()?;
                        self.expect(&TokenKind::RBracket, "`]`")?;
                        Ok(Expr::ArrayAccess {
                            array: name.clone(),
                            index: Box::new(index),
                        })
                    }
                    _ => Ok(Expr::Ident(name.clone())),
                }
            }
            Some(TokenKind::LParen) => {
                self.bump();
                let e = self.expr()?;
                self.expect(&TokenKind::RParen, "`)`")?;
                Ok(e)
            }
            Some(TokenKind::LBracket) => {
                self.bump();
                Ok(Expr::ArrayLit(self.expr_list(&TokenKind::RBracket, "`]`")?))
            }
            _ => Err(self.unexpected("expression")),
        }
    }

    /// Comma-separated expressions up to and including `close`.
    fn expr_list(&mut self, close: &TokenKind, what: &str) -> PResult<Vec<Expr>> {
        let mut out = Vec::new();
        if self.eat(close) {
            return Ok(out);
        }
        loop {
            out.push(self.expr()?);
            if self.eat(close) {
                return Ok(out);
            }
            self.expect(&TokenKind::Comma, &format!("`,` or {what}"))?;
        }
    }
}

fn int_value(magnitude: u64, negative: bool) -> Option<i64> {
    if negative {
        0i64.checked_sub_unsigned(magnitude)
    } else {
        i64::try_from(magnitude).ok()
    }
}

fn out_of_range(magnitude: u64, negative: bool, span: SourceSpan) -> Diagnostic {
    let sign = if negative { "-" } else { "" };
    Diagnostic::error(
        codes::SYNTAX_ERROR,
        format!("integer literal `{sign}{magnitude}` is out of range"),
        Some(span),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diagnostic::SourceSpan;

    #[test]
    fn minimal_model() {
        let ast = parse_model("var int: x;\nsolve satisfy;").unwrap();
        assert_eq!(
            ast.items,
            vec![
                Item::VarDecl {
                    name: "x".into(),
                    base: BaseType::Int,
                    domain: Domain::Open,
                    array_len: None
                },
                Item::Solve {
                    kind: SolveKind::Satisfy,
                    objective: None
                }
            ]
        );
        assert_eq!(ast.spans, vec![SourceSpan::new(1, 1, 1, 11), SourceSpan::new(2, 1, 2, 14)]);
    }

    #[test]
    fn all_different_instance_shape() {
        let src = "include \"alldifferent.mzn\";\narray[1..10] of var 1..10: q;\nconstraint all_different(q);\nsolve satisfy;";
        let ast = parse_model(src).unwrap();
        assert_eq!(ast.items.len(), 4);
        assert_eq!(ast.items[0], Item::Include { path: "alldifferent.mzn".into() });
        assert_eq!(
            ast.items[1],
            Item::VarDecl {
                name: "q".into(),
                base: BaseType::Int,
                domain: Domain::Range { lo: 1, hi: 10 },
                array_len: Some(10)
            }
        );
        assert_eq!(
            ast.items[2],
            Item::Constraint { expr: Expr::call("all_different", vec![Expr::ident("q")]) }
        );
    }

    #[test]
    fn missing_colon() {
        let diags = parse_model("var int x;").unwrap_err();
        assert_eq!(diags.len(), 1);
        assert_eq!(diags[0].code, codes::SYNTAX_ERROR);
        assert_eq!(diags[0].span, Some(SourceSpan::new(1, 9, 1, 9)));
        assert!(diags[0].message.contains("identifier `x`"), "{}", diags[0].message);
    }

    #[test]
    fn recovery_reports_every_bad_item() {
        let diags = parse_model("var int x;\nvar 1..3: ok;\nconstraint x > ;\nsolve satisfy;").unwrap_err();
        assert_eq!(diags.len(), 2);
        assert_eq!(diags[0].span.unwrap().start_line, 1);
        assert_eq!(diags[1].span.unwrap().start_line, 3);
    }

    #[test]
    fn lex_errors_become_diagnostics() {
        let diags = parse_model("var int: x @;\nsolve satisfy;").unwrap_err();
        assert!(diags.iter().any(|d| d.code == codes::LEX_ERROR));
    }

    #[test]
    fn precedence() {
        let ast = parse_model("constraint a + b * c < 3 /\\ b = 1 \\/ c != 2;").unwrap();
        let Item::Constraint { expr } = &ast.items[0] else { panic!() };
        let a_plus = Expr::binary(
            BinOp::Add,
            Expr::ident("a"),
            Expr::binary(BinOp::Mul, Expr::ident("b"), Expr::ident("c")),
        );
        let expected = Expr::binary(
            BinOp::Or,
            Expr::binary(
                BinOp::And,
                Expr::binary(BinOp::Lt, a_plus, Expr::IntLit(3)),
                Expr::binary(BinOp::Eq, Expr::ident("b"), Expr::IntLit(1)),
            ),
            Expr::binary(BinOp::Ne, Expr::ident("c"), Expr::IntLit(2)),
        );
        assert_eq!(*expr, expected);
    }

    #[test]
    fn negative_literals_fold() {
        let ast = parse_model("var -5..-1: x;\nconstraint x - -3 > -(4);").unwrap();
        assert_eq!(
            ast.items[0],
            Item::VarDecl { name: "x".into(), base: BaseType::Int, domain: Domain::Range { lo: -5, hi: -1 }, array_len: None }
        );
        let Item::Constraint { expr } = &ast.items[1] else { panic!() };
        let expected = Expr::binary(
            BinOp::Gt,
            Expr::binary(BinOp::Sub, Expr::ident("x"), Expr::IntLit(-3)),
            Expr::Unary { op: UnOp::Neg, arg: Box::new(Expr::IntLit(4)) },
        );
        assert_eq!(*expr, expected);
        assert!(parse_model("constraint x = -9223372036854775808;").is_ok());
        assert!(parse_model("constraint x = 9223372036854775808;").is_err());
    }

    #[test]
    fn array_index_set_must_start_at_one() {
        let diags = parse_model("array[0..9] of var int: q;").unwrap_err();
        assert!(diags[0].message.contains("must start at 1"));
        assert!(parse_model("array[1..0] of var int: q;").is_err());
    }

    #[test]
    fn set_literal_is_normalized() {
        let ast = parse_model("var {5, 1, 3, 1}: x;").unwrap();
        assert_eq!(
            ast.items[0],
            Item::VarDecl { name: "x".into(), base: BaseType::Int, domain: Domain::SetLit { values: vec![1, 3, 5] }, array_len: None }
        );
    }

    #[test]
    fn output_payload_is_opaque() {
        let ast = parse_model("var 1..3: x;\noutput [\"x = \\(x)\\n\"] ++ [show(x)];\nsolve satisfy;").unwrap();
        assert_eq!(ast.items[1], Item::Output { raw: "[\"x = \\(x)\\n\"] ++ [show(x)]".into() });
        assert!(parse_model("output [\"a\";").is_err());
        assert!(parse_model("output ];").is_err());
    }

    #[test]
    fn unsupported_constructs_are_rejected() {
        for src in [
            "int: n = 10;",
            "var int: x = 3;",
            "constraint forall(i in 1..3)(q[i] > 0);",
            "solve :: int_search(q, input_order, indomain_min) satisfy;",
            "var float: f;",
        ] {
            assert!(parse_model(src).is_err(), "{src}");
        }
    }

    #[test]
    fn empty_source_parses_to_empty_model() {
        assert!(parse_model("% only a comment\n").unwrap().items.is_empty());
    }
}
