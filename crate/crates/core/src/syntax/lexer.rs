use std::fmt;

use thiserror::Error;

use crate::diagnostic::SourceSpan;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TokenKind {
    Ident(String),
    Int(u64),
    /// Raw string contents between the quotes, escapes left as written.
    Str(String),
    // keywords
    Var,
    Int_,
    Bool,
    Array,
    Of,
    Constraint,
    Solve,
    Satisfy,
    Minimize,
    Maximize,
    Include,
    Output,
    Div,
    Mod,
    Not,
    True,
    False,
    // punctuation
    DotDot,
    Colon,
    Semi,
    Comma,
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
    Plus,
    Minus,
    Star,
    And,
    Or,
    LParen,
    RParen,
    LBracket,
    RBracket,
    LBrace,
    RBrace,
}

impl fmt::Display for TokenKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            TokenKind::Ident(name) => return write!(f, "identifier `{name}`"),
            TokenKind::Int(v) => return write!(f, "integer literal `{v}`"),
            TokenKind::Str(s) => return write!(f, "string literal \"{s}\""),
            TokenKind::Var => "var",
            TokenKind::Int_ => "int",
            TokenKind::Bool => "bool",
            TokenKind::Array => "array",
            TokenKind::Of => "of",
            TokenKind::Constraint => "constraint",
            TokenKind::Solve => "solve",
            TokenKind::Satisfy => "satisfy",
            TokenKind::Minimize => "minimize",
            TokenKind::Maximize => "maximize",
            TokenKind::Include => "include",
            TokenKind::Output => "output",
            TokenKind::Div => "div",
            TokenKind::Mod => "mod",
            TokenKind::Not => "not",
            TokenKind::True => "true",
            TokenKind::False => "false",
            TokenKind::DotDot => "..",
            TokenKind::Colon => ":",
            TokenKind::Semi => ";",
            TokenKind::Comma => ",",
            TokenKind::Eq => "=",
            TokenKind::Ne => "!=",
            TokenKind::Lt => "<",
            TokenKind::Le => "<=",
            TokenKind::Gt => ">",
            TokenKind::Ge => ">=",
            TokenKind::Plus => "+",
            TokenKind::Minus => "-",
            TokenKind::Star => "*",
            TokenKind::And => "/\\",
            TokenKind::Or => "\\/",
            TokenKind::LParen => "(",
            TokenKind::RParen => ")",
            TokenKind::LBracket => "[",
            TokenKind::RBracket => "]",
            TokenKind::LBrace => "{",
            TokenKind::RBrace => "}",
        };
        write!(f, "`{s}`")
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub kind: TokenKind,
    pub span: SourceSpan,
    /// Byte range in the source.
    pub start: usize,
    pub end: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{message}")]
pub struct LexError {
    pub message: String,
    pub span: SourceSpan,
}

/// Splits `source` into tokens. `%` line comments and `/* */` block comments
/// are dropped. Fails on the first illegal character.
pub fn tokenize(source: &str) -> Result<Vec<Token>, LexError> {
    let (tokens, mut errors) = lex(source);
    if errors.is_empty() {
        Ok(tokens)
    } else {
        Err(errors.swap_remove(0))
    }
}

/// Like [`tokenize`] but keeps going past bad characters so the parser can
/// report everything at once.
pub(crate) fn lex(source: &str) -> (Vec<Token>, Vec<LexError>) {
    let mut lexer = Lexer {
        src: source,
        chars: source.char_indices().peekable(),
        line: 1,
        col: 1,
        last: (1, 1),
        tokens: Vec::new(),
        errors: Vec::new(),
    };
    lexer.run();
    (lexer.tokens, lexer.errors)
}

struct Lexer<'a> {
    src: &'a str,
    chars: std::iter::Peekable<std::str::CharIndices<'a>>,
    line: u32,
    col: u32,
    last: (u32, u32),
    tokens: Vec<Token>,
    errors: Vec<LexError>,
}

#[derive(Clone, Copy)]
struct Pos {
    offset: usize,
    line: u32,
    col: u32,
}

impl<'a> Lexer<'a> {
    fn pos(&mut self) -> Pos {
        let offset = self.chars.peek().map_or(self.src.len(), |&(i, _)| i);
        Pos {
            offset,
            line: self.line,
            col: self.col,
        }
    }

    fn peek(&mut self) -> Option<char> {
        self.chars.peek().map(|&(_, c)| c)
    }

    fn peek2(&self) -> Option<char> {
        let mut it = self.chars.clone();
        it.next();
        it.next().map(|(_, c)| c)
    }

    fn bump(&mut self) -> Option<char> {
        let (_, c) = self.chars.next()?;
        self.last = (self.line, self.col);
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    /// Span from `start` to the last consumed character.
    fn span_from(&self, start: Pos) -> SourceSpan {
        SourceSpan::new(start.line, start.col, self.last.0, self.last.1)
    }

    fn push(&mut self, kind: TokenKind, start: Pos) {
        let span = self.span_from(start);
        let end = self.pos().offset;
        self.tokens.push(Token {
            kind,
            span,
            start: start.offset,
            end,
        });
    }

    fn error(&mut self, message: String, start: Pos) {
        let span = self.span_from(start);
        self.errors.push(LexError { message, span });
    }

    fn run(&mut self) {
        while let Some(c) = self.peek() {
            let start = self.pos();
            match c {
                c if c.is_whitespace() => {
                    self.bump();
                }
                '%' => {
                    while let Some(c) = self.peek() {
                        if c == '\n' {
                            break;
                        }
                        self.bump();
                    }
                }
                '/' if self.peek2() == Some('*') => {
                    self.bump();
                    self.bump();
                    let mut closed = false;
                    while let Some(c) = self.bump() {
                        if c == '*' && self.peek() == Some('/') {
                            self.bump();
                            closed = true;
                            break;
                        }
                    }
                    if !closed {
                        self.error("unterminated block comment".into(), start);
                    }
                }
                '"' => self.string(start),
                c if c.is_ascii_digit() => self.number(start),
                c if c.is_ascii_alphabetic() || c == '_' => self.word(start),
                _ => self.punct(c, start),
            }
        }
    }

    fn string(&mut self, start: Pos) {
        self.bump();
        let body_start = self.pos().offset;
        loop {
            match self.peek() {
                None | Some('\n') => {
                    self.error("unterminated string literal".into(), start);
                    return;
                }
                Some('"') => {
                    let body_end = self.pos().offset;
                    self.bump();
                    let body = self.src[body_start..body_end].to_string();
                    self.push(TokenKind::Str(body), start);
                    return;
                }
                Some('\\') => {
                    self.bump();
                    if matches!(self.peek(), Some(c) if c != '\n') {
                        self.bump();
                    }
                }
                Some(_) => {
                    self.bump();
                }
            }
        }
    }

    fn number(&mut self, start: Pos) {
        while matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
            self.bump();
        }
        let text = &self.src[start.offset..self.pos().offset];
        match text.parse::<u64>() {
            Ok(v) => self.push(TokenKind::Int(v), start),
            Err(_) => self.error(format!("integer literal `{text}` is too large"), start),
        }
    }

    fn word(&mut self, start: Pos) {
        while matches!(self.peek(), Some(c) if c.is_ascii_alphanumeric() || c == '_') {
            self.bump();
        }
        let text = &self.src[start.offset..self.pos().offset];
        let kind = match text {
            "var" => TokenKind::Var,
            "int" => TokenKind::Int_,
            "bool" => TokenKind::Bool,
            "array" => TokenKind::Array,
            "of" => TokenKind::Of,
            "constraint" => TokenKind::Constraint,
            "solve" => TokenKind::Solve,
            "satisfy" => TokenKind::Satisfy,
            "minimize" => TokenKind::Minimize,
            "maximize" => TokenKind::Maximize,
            "include" => TokenKind::Include,
            "output" => TokenKind::Output,
            "div" => TokenKind::Div,
            "mod" => TokenKind::Mod,
            "not" => TokenKind::Not,
            "true" => TokenKind::True,
            "false" => TokenKind::False,
            _ => TokenKind::Ident(text.to_string()),
        };
        self.push(kind, start);
    }

    fn punct(&mut self, c: char, start: Pos) {
        self.bump();
        let next = self.peek();
        let two = |lexer: &mut Self, kind: TokenKind| {
            lexer.bump();
            kind
        };
        let kind = match (c, next) {
            ('.', Some('.')) => two(self, TokenKind::DotDot),
            (':', _) => TokenKind::Colon,
            (';', _) => TokenKind::Semi,
            (',', _) => TokenKind::Comma,
            ('=', Some('=')) => two(self, TokenKind::Eq),
            ('=', _) => TokenKind::Eq,
            ('!', Some('=')) => two(self, TokenKind::Ne),
            ('<', Some('=')) => two(self, TokenKind::Le),
            ('<', _) => TokenKind::Lt,
            ('>', Some('=')) => two(self, TokenKind::Ge),
            ('>', _) => TokenKind::Gt,
            ('+', _) => TokenKind::Plus,
            ('-', _) => TokenKind::Minus,
            ('*', _) => TokenKind::Star,
            ('/', Some('\\')) => two(self, TokenKind::And),
            ('\\', Some('/')) => two(self, TokenKind::Or),
            ('(', _) => TokenKind::LParen,
            (')', _) => TokenKind::RParen,
            ('[', _) => TokenKind::LBracket,
            (']', _) => TokenKind::RBracket,
            ('{', _) => TokenKind::LBrace,
            ('}', _) => TokenKind::RBrace,
            _ => {
                self.error(format!("illegal character `{}`", c.escape_debug()), start);
                return;
            }
        };
        self.push(kind, start);
    }
}
