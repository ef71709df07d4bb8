//! Recursive-descent frontend for the analyzed C subset.
//!
//! The concrete grammar is deliberately small: `int`/`void` function
//! definitions whose bodies use the statement forms the analyses know
//! about, plus the empty statement and declarations (which are lowered at
//! parse time). `//` and `/* */` comments are skipped. Parse errors never
//! abort a translation unit: recovery skips to the next top-level function.

use std::fmt;

use num_bigint::BigInt;
use thiserror::Error;

use crate::ast::{seq, Expr, FunctionBody, Ident, Label, Pos, Stmt, StmtKind};
use crate::cfg::eval_ice;

/// A source file to analyze.
#[derive(Debug, Clone)]
pub struct SourceFile {
    pub path: String,
    pub text: String,
}

impl SourceFile {
    pub fn new(path: &str, text: &str) -> SourceFile {
        SourceFile {
            path: path.to_string(),
            text: text.to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{pos}: expected {expected}, found {found}")]
pub struct ParseError {
    pub pos: Pos,
    pub expected: String,
    pub found: String,
}

// ---------------------------------------------------------------------------
// Lexer
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Int(BigInt),
    Punct(&'static str),
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "`{s}`"),
            Tok::Int(v) => write!(f, "`{v}`"),
            Tok::Punct(p) => write!(f, "`{p}`"),
            Tok::Eof => write!(f, "end of input"),
        }
    }
}

const PUNCTS: &[&str] = &[
    "<<=", ">>=", "...", "->", "++", "--", "<<", ">>", "<=", ">=", "==", "!=", "&&", "||", "+=",
    "-=", "*=", "/=", "%=", "&=", "|=", "^=", "?", ":", ";", ",", "(", ")", "{", "}", "[", "]",
    "<", ">", "+", "-", "*", "/", "%", "!", "~", "&", "|", "^", "=", ".",
];

struct Lexer<'a> {
    src: &'a [u8],
    i: usize,
    line: u32,
    col: u32,
}

impl<'a> Lexer<'a> {
    fn new(src: &'a str) -> Lexer<'a> {
        Lexer {
            src: src.as_bytes(),
            i: 0,
            line: 1,
            col: 1,
        }
    }

    fn bump(&mut self) -> u8 {
        let c = self.src[self.i];
        self.i += 1;
        if c == b'\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        c
    }

    fn peek(&self) -> Option<u8> {
        self.src.get(self.i).copied()
    }

    fn skip_trivia(&mut self) -> Result<(), ParseError> {
        loop {
            match self.peek() {
                Some(c) if c.is_ascii_whitespace() => {
                    self.bump();
                }
                Some(b'/') if self.src.get(self.i + 1) == Some(&b'/') => {
                    while let Some(c) = self.peek() {
                        if c == b'\n' {
                            break;
                        }
                        self.bump();
                    }
                }
                Some(b'/') if self.src.get(self.i + 1) == Some(&b'*') => {
                    let start = Pos {
                        line: self.line,
                        col: self.col,
                    };
                    self.bump();
                    self.bump();
                    loop {
                        match self.peek() {
                            Some(b'*') if self.src.get(self.i + 1) == Some(&b'/') => {
                                self.bump();
                                self.bump();
                                break;
                            }
                            Some(_) => {
                                self.bump();
                            }
                            None => {
                                return Err(ParseError {
                                    pos: start,
                                    expected: "`*/` closing the comment".into(),
                                    found: "end of input".into(),
                                })
                            }
                        }
                    }
                }
                _ => return Ok(()),
            }
        }
    }

    fn next_token(&mut self) -> Result<(Tok, Pos), ParseError> {
        self.skip_trivia()?;
        let pos = Pos {
            line: self.line,
            col: self.col,
        };
        let c = match self.peek() {
            None => return Ok((Tok::Eof, pos)),
            Some(c) => c,
        };
        if c.is_ascii_alphabetic() || c == b'_' {
            let start = self.i;
            while self
                .peek()
                .map(|c| c.is_ascii_alphanumeric() || c == b'_')
                .unwrap_or(false)
            {
                self.bump();
            }
            let s = std::str::from_utf8(&self.src[start..self.i]).unwrap().to_string();
            return Ok((Tok::Ident(s), pos));
        }
        if c.is_ascii_digit() {
            let start = self.i;
            let radix = if c == b'0' && matches!(self.src.get(self.i + 1), Some(b'x') | Some(b'X'))
            {
                self.bump();
                self.bump();
                16
            } else if c == b'0' {
                8
            } else {
                10
            };
            while self
                .peek()
                .map(|c| c.is_ascii_alphanumeric())
                .unwrap_or(false)
            {
                self.bump();
            }
            let text = std::str::from_utf8(&self.src[start..self.i]).unwrap();
            let digits = match radix {
                16 => &text[2..],
                _ => text,
            };
            let digits = digits.trim_end_matches(|c: char| "uUlL".contains(c));
            let digits = if radix == 8 && digits.len() > 1 {
                &digits[1..]
            } else {
                digits
            };
            let value = if digits.is_empty() {
                Some(BigInt::from(0))
            } else {
                BigInt::parse_bytes(digits.as_bytes(), radix)
            };
            return match value {
                Some(v) => Ok((Tok::Int(v), pos)),
                None => Err(ParseError {
                    pos,
                    expected: "an integer literal".into(),
                    found: format!("`{text}`"),
                }),
            };
        }
        for p in PUNCTS {
            if self.src[self.i..].starts_with(p.as_bytes()) {
                for _ in 0..p.len() {
                    self.bump();
                }
                return Ok((Tok::Punct(p), pos));
            }
        }
        Err(ParseError {
            pos,
            expected: "a token".into(),
            found: format!("`{}`", self.bump() as char),
        })
    }
}

fn lex(src: &str) -> Result<Vec<(Tok, Pos)>, ParseError> {
    let mut lx = Lexer::new(src);
    let mut out = Vec::new();
    loop {
        let (tok, pos) = lx.next_token()?;
        let done = tok == Tok::Eof;
        out.push((tok, pos));
        if done {
            return Ok(out);
        }
    }
}

// ---------------------------------------------------------------------------
// Parser
// ---------------------------------------------------------------------------

struct Parser {
    toks: Vec<(Tok, Pos)>,
    i: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.i].0
    }

    fn peek2(&self) -> &Tok {
        &self.toks[(self.i + 1).min(self.toks.len() - 1)].0
    }

    fn pos(&self) -> Pos {
        self.toks[self.i].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.i].0.clone();
        if self.i + 1 < self.toks.len() {
            self.i += 1;
        }
        t
    }

    fn err(&self, expected: &str) -> ParseError {
        ParseError {
            pos: self.pos(),
            expected: expected.to_string(),
            found: self.peek().to_string(),
        }
    }

    fn eat_punct(&mut self, p: &str) -> Result<(), ParseError> {
        if self.at_punct(p) {
            self.bump();
            Ok(())
        } else {
            Err(self.err(&format!("`{p}`")))
        }
    }

    fn at_punct(&self, p: &str) -> bool {
        matches!(self.peek(), Tok::Punct(q) if *q == p)
    }

    fn at_kw(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == kw)
    }

    fn eat_kw(&mut self, kw: &str) -> Result<(), ParseError> {
        if self.at_kw(kw) {
            self.bump();
            Ok(())
        } else {
            Err(self.err(&format!("`{kw}`")))
        }
    }

    fn eat_ident(&mut self) -> Result<Ident, ParseError> {
        match self.peek().clone() {
            Tok::Ident(s) if !is_keyword(&s) => {
                self.bump();
                Ok(s)
            }
            _ => Err(self.err("an identifier")),
        }
    }

    fn at_type(&self) -> bool {
        self.at_kw("int") || self.at_kw("void")
    }

    // -- expressions --------------------------------------------------------

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut e = self.assignment()?;
        while self.at_punct(",") {
            self.bump();
            let rhs = self.assignment()?;
            e = Expr::Comma(Box::new(e), Box::new(rhs));
        }
        Ok(e)
    }

    fn assignment(&mut self) -> Result<Expr, ParseError> {
        let lhs = self.conditional()?;
        for op in ["=", "+=", "-=", "*=", "/=", "%=", "<<=", ">>=", "&=", "|=", "^="] {
            if self.at_punct(op) {
                self.bump();
                let rhs = self.assignment()?;
                return Ok(Expr::OtherBinary(op.to_string(), Box::new(lhs), Box::new(rhs)));
            }
        }
        Ok(lhs)
    }

    fn conditional(&mut self) -> Result<Expr, ParseError> {
        let guard = self.logical_or()?;
        if !self.at_punct("?") {
            return Ok(guard);
        }
        self.bump();
        if self.at_punct(":") {
            self.bump();
            let alt = self.conditional()?;
            return Ok(Expr::BinCond(Box::new(guard), Box::new(alt)));
        }
        let then = self.expr()?;
        self.eat_punct(":")?;
        let alt = self.conditional()?;
        Ok(Expr::Cond(Box::new(guard), Box::new(then), Box::new(alt)))
    }

    fn binary_level(&mut self, level: usize) -> Result<Expr, ParseError> {
        const LEVELS: &[&[&str]] = &[
            &["|"],
            &["^"],
            &["&"],
            &["==", "!="],
            &["<=", ">=", "<", ">"],
            &["<<", ">>"],
            &["+", "-"],
            &["*", "/", "%"],
        ];
        if level == LEVELS.len() {
            return self.unary();
        }
        let mut e = self.binary_level(level + 1)?;
        'outer: loop {
            for op in LEVELS[level] {
                if self.at_punct(op) {
                    self.bump();
                    let rhs = self.binary_level(level + 1)?;
                    e = Expr::OtherBinary(op.to_string(), Box::new(e), Box::new(rhs));
                    continue 'outer;
                }
            }
            return Ok(e);
        }
    }

    fn logical_or(&mut self) -> Result<Expr, ParseError> {
        let mut e = self.logical_and()?;
        while self.at_punct("||") {
            self.bump();
            let rhs = self.logical_and()?;
            e = Expr::Or(Box::new(e), Box::new(rhs));
        }
        Ok(e)
    }

    fn logical_and(&mut self) -> Result<Expr, ParseError> {
        let mut e = self.binary_level(0)?;
        while self.at_punct("&&") {
            self.bump();
            let rhs = self.binary_level(0)?;
            e = Expr::And(Box::new(e), Box::new(rhs));
        }
        Ok(e)
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if self.at_punct("!") {
            self.bump();
            return Ok(Expr::Not(Box::new(self.unary()?)));
        }
        if self.at_punct("+") {
            self.bump();
            return Ok(Expr::UnaryPlus(Box::new(self.unary()?)));
        }
        if self.at_punct("-") {
            self.bump();
            return Ok(Expr::UnaryMinus(Box::new(self.unary()?)));
        }
        for op in ["~", "*", "&", "++", "--"] {
            if self.at_punct(op) {
                self.bump();
                return Ok(Expr::OtherUnary(op.to_string(), Box::new(self.unary()?)));
            }
        }
        // Cast: '(' type ')' unary.
        if self.at_punct("(") {
            let save = self.i;
            self.bump();
            if self.at_type() {
                let ty = match self.bump() {
                    Tok::Ident(s) => s,
                    _ => unreachable!(),
                };
                if self.at_punct(")") {
                    self.bump();
                    return Ok(Expr::Cast(ty, Box::new(self.unary()?)));
                }
            }
            self.i = save;
        }
        self.postfix()
    }

    fn postfix(&mut self) -> Result<Expr, ParseError> {
        let mut e = self.primary()?;
        loop {
            if self.at_punct("(") {
                let callee = match &e {
                    Expr::Var(name) => name.clone(),
                    _ => return Err(self.err("a call on a plain function name")),
                };
                self.bump();
                let mut args = Vec::new();
                if !self.at_punct(")") {
                    loop {
                        args.push(self.assignment()?);
                        if self.at_punct(",") {
                            self.bump();
                        } else {
                            break;
                        }
                    }
                }
                self.eat_punct(")")?;
                e = Expr::Call(callee, args);
            } else if self.at_punct("[") {
                self.bump();
                let idx = self.expr()?;
                self.eat_punct("]")?;
                e = Expr::OtherBinary("[]".to_string(), Box::new(e), Box::new(idx));
            } else if self.at_punct("++") {
                self.bump();
                e = Expr::OtherUnary("post++".to_string(), Box::new(e));
            } else if self.at_punct("--") {
                self.bump();
                e = Expr::OtherUnary("post--".to_string(), Box::new(e));
            } else {
                return Ok(e);
            }
        }
    }

    fn primary(&mut self) -> Result<Expr, ParseError> {
        match self.peek().clone() {
            Tok::Ident(s) if !is_keyword(&s) => {
                self.bump();
                Ok(Expr::Var(s))
            }
            Tok::Int(v) => {
                self.bump();
                Ok(Expr::IntLit(v))
            }
            Tok::Punct("(") => {
                self.bump();
                let e = self.expr()?;
                self.eat_punct(")")?;
                Ok(Expr::Paren(Box::new(e)))
            }
            _ => Err(self.err("an expression")),
        }
    }

    // -- statements ---------------------------------------------------------

    fn compound(&mut self) -> Result<Stmt, ParseError> {
        let pos = self.pos();
        self.eat_punct("{")?;
        let mut stmts = Vec::new();
        while !self.at_punct("}") {
            if *self.peek() == Tok::Eof {
                return Err(self.err("`}`"));
            }
            stmts.push(self.stmt()?);
        }
        self.bump();
        Ok(Stmt::at(StmtKind::Compound(Box::new(seq(stmts))), pos))
    }

    fn stmt(&mut self) -> Result<Stmt, ParseError> {
        let pos = self.pos();
        if self.at_punct("{") {
            return self.compound();
        }
        if self.at_punct(";") {
            self.bump();
            return Ok(Stmt::at(StmtKind::Empty, pos));
        }
        if self.at_kw("return") {
            self.bump();
            if self.at_punct(";") {
                self.bump();
                return Ok(Stmt::at(StmtKind::Return, pos));
            }
            let e = self.expr()?;
            self.eat_punct(";")?;
            return Ok(Stmt::at(StmtKind::ReturnExpr(e), pos));
        }
        if self.at_kw("if") {
            self.bump();
            self.eat_punct("(")?;
            let guard = self.expr()?;
            self.eat_punct(")")?;
            let then = self.stmt()?;
            if self.at_kw("else") {
                self.bump();
                let alt = self.stmt()?;
                return Ok(Stmt::at(
                    StmtKind::IfElse(guard, Box::new(then), Box::new(alt)),
                    pos,
                ));
            }
            return Ok(Stmt::at(StmtKind::If(guard, Box::new(then)), pos));
        }
        if self.at_kw("switch") {
            self.bump();
            self.eat_punct("(")?;
            let sel = self.expr()?;
            self.eat_punct(")")?;
            let body = self.stmt()?;
            return Ok(Stmt::at(StmtKind::Switch(sel, Box::new(body)), pos));
        }
        if self.at_kw("while") {
            self.bump();
            self.eat_punct("(")?;
            let guard = self.expr()?;
            self.eat_punct(")")?;
            let body = self.stmt()?;
            return Ok(Stmt::at(StmtKind::While(guard, Box::new(body)), pos));
        }
        if self.at_kw("do") {
            self.bump();
            let body = self.stmt()?;
            self.eat_kw("while")?;
            self.eat_punct("(")?;
            let guard = self.expr()?;
            self.eat_punct(")")?;
            self.eat_punct(";")?;
            return Ok(Stmt::at(StmtKind::DoWhile(Box::new(body), guard), pos));
        }
        if self.at_kw("for") {
            self.bump();
            self.eat_punct("(")?;
            let init = if self.at_punct(";") {
                Expr::lit(1)
            } else if self.at_type() {
                self.declaration_exprs()?
            } else {
                self.expr()?
            };
            self.eat_punct(";")?;
            let guard = if self.at_punct(";") {
                Expr::lit(1)
            } else {
                self.expr()?
            };
            self.eat_punct(";")?;
            let step = if self.at_punct(")") {
                Expr::lit(1)
            } else {
                self.expr()?
            };
            self.eat_punct(")")?;
            let body = self.stmt()?;
            return Ok(Stmt::at(
                StmtKind::For(init, guard, step, Box::new(body)),
                pos,
            ));
        }
        if self.at_kw("break") {
            self.bump();
            self.eat_punct(";")?;
            return Ok(Stmt::at(StmtKind::Break, pos));
        }
        if self.at_kw("continue") {
            self.bump();
            self.eat_punct(";")?;
            return Ok(Stmt::at(StmtKind::Continue, pos));
        }
        if self.at_kw("goto") {
            self.bump();
            let id = self.eat_ident()?;
            self.eat_punct(";")?;
            return Ok(Stmt::at(StmtKind::Goto(id), pos));
        }
        if self.at_kw("case") {
            self.bump();
            let epos = self.pos();
            let e = self.conditional()?;
            let value = eval_ice(&e).ok_or_else(|| ParseError {
                pos: epos,
                expected: "an integer constant expression after `case`".into(),
                found: "a non-constant expression".into(),
            })?;
            self.eat_punct(":")?;
            let s = self.stmt()?;
            return Ok(Stmt::at(
                StmtKind::Labeled(Label::Case(value), Box::new(s)),
                pos,
            ));
        }
        if self.at_kw("default") {
            self.bump();
            self.eat_punct(":")?;
            let s = self.stmt()?;
            return Ok(Stmt::at(StmtKind::Labeled(Label::Default, Box::new(s)), pos));
        }
        if self.at_type() {
            let e = self.declaration_exprs()?;
            self.eat_punct(";")?;
            return Ok(match e {
                Expr::IntLit(ref v) if *v == BigInt::from(1) => Stmt::at(StmtKind::Empty, pos),
                e => Stmt::at(StmtKind::Expr(e), pos),
            });
        }
        // Identifier label.
        if let Tok::Ident(name) = self.peek().clone() {
            if !is_keyword(&name) && *self.peek2() == Tok::Punct(":") {
                self.bump();
                self.bump();
                let s = self.stmt()?;
                return Ok(Stmt::at(
                    StmtKind::Labeled(Label::Id(name), Box::new(s)),
                    pos,
                ));
            }
        }
        let e = self.expr()?;
        self.eat_punct(";")?;
        Ok(Stmt::at(StmtKind::Expr(e), pos))
    }

    /// Parse the declarators of `int x = e, y = f` and lower them to the
    /// comma-combination of the initializers. A declaration with no
    /// initializers lowers to the no-op literal `1`.
    fn declaration_exprs(&mut self) -> Result<Expr, ParseError> {
        self.bump(); // the type keyword
        let mut inits: Vec<Expr> = Vec::new();
        loop {
            self.eat_ident()?;
            if self.at_punct("=") {
                self.bump();
                inits.push(self.assignment()?);
            }
            if self.at_punct(",") {
                self.bump();
            } else {
                break;
            }
        }
        let mut it = inits.into_iter();
        let first = match it.next() {
            Some(e) => e,
            None => return Ok(Expr::lit(1)),
        };
        Ok(it.fold(first, |acc, e| Expr::Comma(Box::new(acc), Box::new(e))))
    }

    // -- functions ----------------------------------------------------------

    fn function(&mut self) -> Result<FunctionBody, ParseError> {
        let pos = self.pos();
        if !self.at_type() {
            return Err(self.err("`int` or `void`"));
        }
        self.bump();
        let name = self.eat_ident()?;
        self.eat_punct("(")?;
        let mut params = Vec::new();
        if !self.at_punct(")") {
            if self.at_kw("void") && *self.peek2() == Tok::Punct(")") {
                self.bump();
            } else {
                loop {
                    if !self.at_type() {
                        return Err(self.err("a parameter type"));
                    }
                    self.bump();
                    params.push(self.eat_ident()?);
                    if self.at_punct(",") {
                        self.bump();
                    } else {
                        break;
                    }
                }
            }
        }
        self.eat_punct(")")?;
        let body = self.compound()?;
        let mut f = FunctionBody::new(&name, params, body);
        f.pos = pos;
        Ok(f)
    }

    /// Skip forward to something that looks like the start of a top-level
    /// function definition.
    fn recover(&mut self) {
        let mut depth = 0usize;
        while *self.peek() != Tok::Eof {
            if self.at_punct("{") {
                depth += 1;
            } else if self.at_punct("}") {
                depth = depth.saturating_sub(1);
                self.bump();
                if depth == 0 {
                    return;
                }
                continue;
            } else if depth == 0 && self.at_type() {
                if let Tok::Ident(s) = self.peek2() {
                    if !is_keyword(s) {
                        return;
                    }
                }
            }
            self.bump();
        }
    }
}

fn is_keyword(s: &str) -> bool {
    matches!(
        s,
        "int"
            | "void"
            | "if"
            | "else"
            | "switch"
            | "case"
            | "default"
            | "while"
            | "do"
            | "for"
            | "break"
            | "continue"
            | "goto"
            | "return"
    )
}

/// Parse every function definition in `file`. Malformed functions produce a
/// [`ParseError`] each and are skipped; the remaining functions are still
/// returned.
pub fn parse_translation_unit(file: &SourceFile) -> (Vec<FunctionBody>, Vec<ParseError>) {
    let toks = match lex(&file.text) {
        Ok(t) => t,
        Err(e) => return (Vec::new(), vec![e]),
    };
    let mut p = Parser { toks, i: 0 };
    let mut functions = Vec::new();
    let mut errors = Vec::new();
    while *p.peek() != Tok::Eof {
        let before = p.i;
        match p.function() {
            Ok(f) => functions.push(f),
            Err(e) => {
                errors.push(e);
                if p.i == before {
                    p.bump();
                }
                p.recover();
            }
        }
    }
    (functions, errors)
}

/// Parse a single expression; trailing input is an error.
pub fn parse_expression(text: &str) -> Result<Expr, ParseError> {
    let toks = lex(text)?;
    let mut p = Parser { toks, i: 0 };
    let e = p.expr()?;
    if *p.peek() != Tok::Eof {
        return Err(p.err("end of input"));
    }
    Ok(e)
}

// ---------------------------------------------------------------------------
// Pretty-printing
// ---------------------------------------------------------------------------

/// Render an expression back to source. Parentheses are emitted exactly for
/// [`Expr::Paren`] nodes, so printing a parse result reproduces the shape
/// the grammar forced on the input.
pub fn expr_to_source(e: &Expr) -> String {
    fn unary(op: &str, sub: &Expr) -> String {
        let s = expr_to_source(sub);
        // A space keeps `- -x` and `+ +x` from fusing into `--x` / `++x`.
        let sep = if s.starts_with(op.chars().next().unwrap()) {
            " "
        } else {
            ""
        };
        format!("{op}{sep}{s}")
    }
    match e {
        Expr::Var(x) => x.clone(),
        Expr::IntLit(v) => v.to_string(),
        Expr::Ice(s) => expr_to_source(s),
        Expr::Not(s) => unary("!", s),
        Expr::UnaryPlus(s) => unary("+", s),
        Expr::UnaryMinus(s) => unary("-", s),
        Expr::Paren(s) => format!("({})", expr_to_source(s)),
        Expr::Cast(ty, s) => format!("({ty}){}", expr_to_source(s)),
        Expr::OtherUnary(op, s) => match op.as_str() {
            "post++" => format!("{}++", expr_to_source(s)),
            "post--" => format!("{}--", expr_to_source(s)),
            _ => unary(op, s),
        },
        Expr::And(a, b) => format!("{} && {}", expr_to_source(a), expr_to_source(b)),
        Expr::Or(a, b) => format!("{} || {}", expr_to_source(a), expr_to_source(b)),
        Expr::Comma(a, b) => format!("{}, {}", expr_to_source(a), expr_to_source(b)),
        Expr::BinCond(a, b) => format!("{} ?: {}", expr_to_source(a), expr_to_source(b)),
        Expr::OtherBinary(op, a, b) => match op.as_str() {
            "[]" => format!("{}[{}]", expr_to_source(a), expr_to_source(b)),
            _ => format!("{} {op} {}", expr_to_source(a), expr_to_source(b)),
        },
        Expr::Cond(g, t, f) => format!(
            "{} ? {} : {}",
            expr_to_source(g),
            expr_to_source(t),
            expr_to_source(f)
        ),
        Expr::Call(name, args) => {
            let args: Vec<_> = args.iter().map(expr_to_source).collect();
            format!("{name}({})", args.join(", "))
        }
    }
}

/// Render a statement back to source, one statement per line.
pub fn stmt_to_source(s: &Stmt, indent: usize) -> String {
    let pad = "    ".repeat(indent);
    match &s.kind {
        StmtKind::Expr(e) => format!("{pad}{};\n", expr_to_source(e)),
        StmtKind::Seq(a, b) => format!("{}{}", stmt_to_source(a, indent), stmt_to_source(b, indent)),
        StmtKind::Return => format!("{pad}return;\n"),
        StmtKind::ReturnExpr(e) => format!("{pad}return {};\n", expr_to_source(e)),
        StmtKind::IfElse(g, a, b) => format!(
            "{pad}if ({})\n{}{pad}else\n{}",
            expr_to_source(g),
            stmt_to_source(a, indent + 1),
            stmt_to_source(b, indent + 1)
        ),
        StmtKind::If(g, a) => format!(
            "{pad}if ({})\n{}",
            expr_to_source(g),
            stmt_to_source(a, indent + 1)
        ),
        StmtKind::Switch(e, a) => format!(
            "{pad}switch ({})\n{}",
            expr_to_source(e),
            stmt_to_source(a, indent + 1)
        ),
        StmtKind::While(g, a) => format!(
            "{pad}while ({})\n{}",
            expr_to_source(g),
            stmt_to_source(a, indent + 1)
        ),
        StmtKind::DoWhile(a, g) => format!(
            "{pad}do\n{}{pad}while ({});\n",
            stmt_to_source(a, indent + 1),
            expr_to_source(g)
        ),
        StmtKind::For(i, g, u, a) => format!(
            "{pad}for ({}; {}; {})\n{}",
            expr_to_source(i),
            expr_to_source(g),
            expr_to_source(u),
            stmt_to_source(a, indent + 1)
        ),
        StmtKind::Break => format!("{pad}break;\n"),
        StmtKind::Continue => format!("{pad}continue;\n"),
        StmtKind::Goto(id) => format!("{pad}goto {id};\n"),
        StmtKind::Labeled(Label::Case(v), a) => {
            format!("{pad}case {v}:\n{}", stmt_to_source(a, indent))
        }
        StmtKind::Labeled(Label::Default, a) => {
            format!("{pad}default:\n{}", stmt_to_source(a, indent))
        }
        StmtKind::Labeled(Label::Id(id), a) => {
            format!("{pad}{id}:\n{}", stmt_to_source(a, indent))
        }
        StmtKind::Compound(a) => format!("{pad}{{\n{}{pad}}}\n", stmt_to_source(a, indent + 1)),
        StmtKind::Other => format!("{pad};\n"),
        StmtKind::Empty => format!("{pad};\n"),
    }
}

/// Render a whole function back to source.
pub fn function_to_source(f: &FunctionBody) -> String {
    let params: Vec<_> = f.params.iter().map(|p| format!("int {p}")).collect();
    format!(
        "int {}({})\n{}",
        f.name,
        params.join(", "),
        stmt_to_source(&f.body, 0)
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn expr(text: &str) -> Expr {
        parse_expression(text).unwrap()
    }

    #[test]
    fn conjunction_left_associates() {
        assert_eq!(
            expr("a && b && c"),
            Expr::And(
                Box::new(Expr::And(
                    Box::new(Expr::var("a")),
                    Box::new(Expr::var("b"))
                )),
                Box::new(Expr::var("c"))
            )
        );
    }

    #[test]
    fn disjunction_binds_looser_than_conjunction() {
        assert_eq!(
            expr("a || b && c"),
            Expr::Or(
                Box::new(Expr::var("a")),
                Box::new(Expr::And(
                    Box::new(Expr::var("b")),
                    Box::new(Expr::var("c"))
                ))
            )
        );
    }

    #[test]
    fn conditional_forms() {
        assert_eq!(
            expr("a ? 0 : 1"),
            Expr::Cond(
                Box::new(Expr::var("a")),
                Box::new(Expr::lit(0)),
                Box::new(Expr::lit(1))
            )
        );
        assert_eq!(
            expr("a ?: b"),
            Expr::BinCond(Box::new(Expr::var("a")), Box::new(Expr::var("b")))
        );
        // Right associativity.
        assert_eq!(
            expr("a ? b : c ? d : e"),
            Expr::Cond(
                Box::new(Expr::var("a")),
                Box::new(Expr::var("b")),
                Box::new(Expr::Cond(
                    Box::new(Expr::var("c")),
                    Box::new(Expr::var("d")),
                    Box::new(Expr::var("e"))
                ))
            )
        );
    }

    #[test]
    fn parens_comma_cast() {
        assert_eq!(expr("(x)"), Expr::Paren(Box::new(Expr::var("x"))));
        assert_eq!(
            expr("a, b"),
            Expr::Comma(Box::new(Expr::var("a")), Box::new(Expr::var("b")))
        );
        assert_eq!(
            expr("(int)x"),
            Expr::Cast("int".into(), Box::new(Expr::var("x")))
        );
    }

    #[test]
    fn assignment_is_an_other_binary() {
        assert_eq!(
            expr("x = y"),
            Expr::OtherBinary("=".into(), Box::new(Expr::var("x")), Box::new(Expr::var("y")))
        );
    }

    #[test]
    fn comma_is_lowest() {
        assert_eq!(
            expr("a = b, c"),
            Expr::Comma(
                Box::new(Expr::OtherBinary(
                    "=".into(),
                    Box::new(Expr::var("a")),
                    Box::new(Expr::var("b"))
                )),
                Box::new(Expr::var("c"))
            )
        );
    }

    #[test]
    fn translation_unit_basics() {
        let src = "int f(int a, int b, int c, int d, int e) {
            if (a && b && c)
                return d ? 0 : 1;
            else
                return e ? 0 : 1;
        }";
        let (fs, errs) = parse_translation_unit(&SourceFile::new("t.c", src));
        assert!(errs.is_empty());
        assert_eq!(fs.len(), 1);
        assert_eq!(fs[0].name, "f");
        assert_eq!(fs[0].params.len(), 5);
    }

    #[test]
    fn empty_function_body() {
        let (fs, errs) = parse_translation_unit(&SourceFile::new("t.c", "int f(){}"));
        assert!(errs.is_empty());
        assert_eq!(fs.len(), 1);
        match &fs[0].body.kind {
            StmtKind::Compound(inner) => assert!(matches!(inner.kind, StmtKind::Empty)),
            k => panic!("expected compound body, got {k:?}"),
        }
    }

    #[test]
    fn malformed_function_is_skipped_with_error() {
        let (fs, errs) = parse_translation_unit(&SourceFile::new("t.c", "int f(){ if }"));
        assert_eq!(fs.len(), 0);
        assert_eq!(errs.len(), 1);
    }

    #[test]
    fn recovery_reaches_later_functions() {
        let src = "int bad(){ if } int good(){ return; }";
        let (fs, errs) = parse_translation_unit(&SourceFile::new("t.c", src));
        assert_eq!(errs.len(), 1);
        assert_eq!(fs.len(), 1);
        assert_eq!(fs[0].name, "good");
    }

    #[test]
    fn declarations_lower_to_initializer_commas() {
        let src = "int f() { int x = g(), y = h(); int z; }";
        let (fs, errs) = parse_translation_unit(&SourceFile::new("t.c", src));
        assert!(errs.is_empty());
        let flat = format!("{:?}", fs[0].body);
        assert!(flat.contains("Comma"), "{flat}");
        assert!(flat.contains("Empty"), "{flat}");
    }

    #[test]
    fn labels_and_gotos_parse() {
        let src = "void f(int x) { goto l1; while (x) { break; l1: ; } }";
        let (fs, errs) = parse_translation_unit(&SourceFile::new("t.c", src));
        assert!(errs.is_empty(), "{errs:?}");
        assert!(fs[0].labels.contains("l1"));
    }

    #[test]
    fn comments_are_skipped() {
        let src = "int f() { // line\n /* block\n comment */ return; }";
        let (fs, errs) = parse_translation_unit(&SourceFile::new("t.c", src));
        assert!(errs.is_empty());
        assert_eq!(fs.len(), 1);
    }

    #[test]
    fn print_parse_round_trip_is_stable() {
        for src in [
            "a && (b || c) && !d",
            "x = y + z * 3, f(a, b[i]), (int)(-w)",
            "a ? b ?: c : (d, e)",
            "- -x + ~y",
        ] {
            let a = expr(src);
            let printed = expr_to_source(&a);
            let b = parse_expression(&printed).unwrap();
            assert_eq!(a, b, "{src} -> {printed}");
        }
    }
}
