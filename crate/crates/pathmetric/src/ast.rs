//! Abstract syntax for the analyzed C subset.
//!
//! Expressions carry no positions (they are compared structurally in
//! tests); statements carry a source position and a pre-order index
//! (`order`) that the semantic passes use as program order.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_bigint::BigInt;
use thiserror::Error;

pub type Ident = String;

/// Source position, 1-based line and column.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Default)]
pub struct Pos {
    pub line: u32,
    pub col: u32,
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

/// Expressions. Everything that is not one of the control-flow-relevant
/// operators (`!`, unary `+`/`-`, parentheses, casts, `&&`, `||`, comma,
/// `?:` in both forms) is folded into `OtherUnary`/`OtherBinary`; calls are
/// treated as an "other" operator family over their arguments.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Expr {
    Var(Ident),
    IntLit(BigInt),
    /// Marks a non-literal subtree known to evaluate to a compile-time
    /// constant. Attached by [`crate::cfg::attach_ice_markers`], never by
    /// the parser.
    Ice(Box<Expr>),
    Not(Box<Expr>),
    UnaryPlus(Box<Expr>),
    UnaryMinus(Box<Expr>),
    Paren(Box<Expr>),
    Cast(Ident, Box<Expr>),
    OtherUnary(Ident, Box<Expr>),
    And(Box<Expr>, Box<Expr>),
    Or(Box<Expr>, Box<Expr>),
    Comma(Box<Expr>, Box<Expr>),
    /// GNU binary conditional `a ?: b`.
    BinCond(Box<Expr>, Box<Expr>),
    OtherBinary(Ident, Box<Expr>, Box<Expr>),
    Cond(Box<Expr>, Box<Expr>, Box<Expr>),
    Call(Ident, Vec<Expr>),
}

impl Expr {
    pub fn var(name: &str) -> Expr {
        Expr::Var(name.to_string())
    }

    pub fn lit(v: i64) -> Expr {
        Expr::IntLit(BigInt::from(v))
    }
}

/// Statement labels. Case values are concrete integers: the parser
/// evaluates the constant expression behind `case`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Label {
    Case(BigInt),
    Default,
    Id(Ident),
}

/// A statement node: kind plus program-order index and source position.
///
/// `order` is the node's position in a pre-order walk of the function body
/// and is what "occurs before" means everywhere in the analyses. Bodies
/// built programmatically must call [`FunctionBody::renumber`] (or
/// [`number_statements`]) before analysis.
#[derive(Debug, Clone)]
pub struct Stmt {
    pub kind: StmtKind,
    pub order: usize,
    pub pos: Pos,
}

#[derive(Debug, Clone)]
pub enum StmtKind {
    Expr(Expr),
    Seq(Box<Stmt>, Box<Stmt>),
    Return,
    ReturnExpr(Expr),
    IfElse(Expr, Box<Stmt>, Box<Stmt>),
    If(Expr, Box<Stmt>),
    Switch(Expr, Box<Stmt>),
    While(Expr, Box<Stmt>),
    DoWhile(Box<Stmt>, Expr),
    For(Expr, Expr, Expr, Box<Stmt>),
    Break,
    Continue,
    Goto(Ident),
    Labeled(Label, Box<Stmt>),
    Compound(Box<Stmt>),
    /// A statement with trivial control flow (a basic block).
    Other,
    /// The empty statement `;`. Behaves exactly like [`StmtKind::Other`]
    /// in every calculus.
    Empty,
}

impl Stmt {
    pub fn new(kind: StmtKind) -> Stmt {
        Stmt {
            kind,
            order: 0,
            pos: Pos::default(),
        }
    }

    pub fn at(kind: StmtKind, pos: Pos) -> Stmt {
        Stmt {
            kind,
            order: 0,
            pos,
        }
    }

    /// Children in textual order.
    pub fn children(&self) -> Vec<&Stmt> {
        match &self.kind {
            StmtKind::Seq(a, b) => vec![a, b],
            StmtKind::IfElse(_, a, b) => vec![a, b],
            StmtKind::If(_, a)
            | StmtKind::Switch(_, a)
            | StmtKind::While(_, a)
            | StmtKind::For(_, _, _, a)
            | StmtKind::Labeled(_, a)
            | StmtKind::Compound(a) => vec![a],
            StmtKind::DoWhile(a, _) => vec![a],
            _ => vec![],
        }
    }

    /// Pre-order traversal of this subtree.
    pub fn walk<'a>(&'a self, f: &mut impl FnMut(&'a Stmt)) {
        f(self);
        for c in self.children() {
            c.walk(f);
        }
    }

    /// Largest `order` value in this subtree. With pre-order numbering the
    /// subtree occupies exactly `self.order..=self.max_order()`.
    pub fn max_order(&self) -> usize {
        let mut max = self.order;
        self.walk(&mut |s| max = max.max(s.order));
        max
    }

    /// Number of statement nodes in this subtree.
    pub fn count_nodes(&self) -> usize {
        let mut n = 0;
        self.walk(&mut |_| n += 1);
        n
    }
}

/// Assign pre-order indices starting at `next`; returns the next free index.
pub fn number_statements(stmt: &mut Stmt, mut next: usize) -> usize {
    stmt.order = next;
    next += 1;
    match &mut stmt.kind {
        StmtKind::Seq(a, b) | StmtKind::IfElse(_, a, b) => {
            next = number_statements(a, next);
            number_statements(b, next)
        }
        StmtKind::If(_, a)
        | StmtKind::Switch(_, a)
        | StmtKind::While(_, a)
        | StmtKind::For(_, _, _, a)
        | StmtKind::Labeled(_, a)
        | StmtKind::Compound(a)
        | StmtKind::DoWhile(a, _) => number_statements(a, next),
        _ => next,
    }
}

/// A parsed function definition.
#[derive(Debug, Clone)]
pub struct FunctionBody {
    pub name: Ident,
    pub params: Vec<Ident>,
    pub body: Stmt,
    /// Identifier labels occurring anywhere in the body (`case`/`default`
    /// excluded).
    pub labels: BTreeSet<Ident>,
    pub pos: Pos,
}

impl FunctionBody {
    /// Wrap a statement as a function body, numbering statements and
    /// collecting labels.
    pub fn new(name: &str, params: Vec<Ident>, mut body: Stmt) -> FunctionBody {
        number_statements(&mut body, 0);
        let labels = collect_labels_of(&body);
        FunctionBody {
            name: name.to_string(),
            params,
            body,
            labels,
            pos: Pos::default(),
        }
    }

    /// Re-establish the `order` indices and label set after mutating the
    /// body.
    pub fn renumber(&mut self) {
        number_statements(&mut self.body, 0);
        self.labels = collect_labels_of(&self.body);
    }
}

/// The identifier labels occurring anywhere in a statement.
pub fn collect_labels_of(stmt: &Stmt) -> BTreeSet<Ident> {
    let mut out = BTreeSet::new();
    stmt.walk(&mut |s| {
        if let StmtKind::Labeled(Label::Id(id), _) = &s.kind {
            out.insert(id.clone());
        }
    });
    out
}

/// [`collect_labels_of`] applied to a whole function body.
pub fn collect_labels(body: &FunctionBody) -> BTreeSet<Ident> {
    collect_labels_of(&body.body)
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SemanticErrorKind {
    #[error("goto targets undefined label `{0}`")]
    UndefinedLabel(Ident),
    #[error("duplicate label `{0}`")]
    DuplicateLabel(Ident),
    #[error("multiple `default` labels in the same switch")]
    MultipleDefaults,
    #[error("`break` outside of a loop or switch")]
    StrayBreak,
    #[error("`continue` outside of a loop")]
    StrayContinue,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{pos}: {kind}")]
pub struct SemanticError {
    pub kind: SemanticErrorKind,
    pub pos: Pos,
}

/// Check the body invariants: goto targets defined, labels unique, at most
/// one `default` per switch scope, and no stray `break`/`continue`.
///
/// Returns one error per violation; an empty list means the body is legal
/// input for the CFG construction and the metric calculi.
pub fn validate_body(body: &FunctionBody) -> Vec<SemanticError> {
    let mut errors = Vec::new();
    let labels = collect_labels(body);

    // Duplicate identifier labels.
    let mut seen: BTreeMap<&Ident, usize> = BTreeMap::new();
    body.body.walk(&mut |s| {
        if let StmtKind::Labeled(Label::Id(id), _) = &s.kind {
            *seen.entry(id).or_insert(0) += 1;
            if seen[id] == 2 {
                errors.push(SemanticError {
                    kind: SemanticErrorKind::DuplicateLabel(id.clone()),
                    pos: s.pos,
                });
            }
        }
    });

    // Undefined goto targets.
    body.body.walk(&mut |s| {
        if let StmtKind::Goto(id) = &s.kind {
            if !labels.contains(id) {
                errors.push(SemanticError {
                    kind: SemanticErrorKind::UndefinedLabel(id.clone()),
                    pos: s.pos,
                });
            }
        }
    });

    check_scopes(&body.body, false, false, &mut errors);

    // One default per switch scope (the body itself is the outermost scope).
    check_defaults(&body.body, &mut errors);

    errors.sort_by_key(|e| e.pos);
    errors
}

fn check_scopes(stmt: &Stmt, in_breakable: bool, in_loop: bool, errors: &mut Vec<SemanticError>) {
    match &stmt.kind {
        StmtKind::Break => {
            if !in_breakable {
                errors.push(SemanticError {
                    kind: SemanticErrorKind::StrayBreak,
                    pos: stmt.pos,
                });
            }
        }
        StmtKind::Continue => {
            if !in_loop {
                errors.push(SemanticError {
                    kind: SemanticErrorKind::StrayContinue,
                    pos: stmt.pos,
                });
            }
        }
        StmtKind::While(_, s) | StmtKind::For(_, _, _, s) => {
            check_scopes(s, true, true, errors);
        }
        StmtKind::DoWhile(s, _) => check_scopes(s, true, true, errors),
        StmtKind::Switch(_, s) => check_scopes(s, true, in_loop, errors),
        _ => {
            for c in stmt.children() {
                check_scopes(c, in_breakable, in_loop, errors);
            }
        }
    }
}

fn check_defaults(stmt: &Stmt, errors: &mut Vec<SemanticError>) {
    // Count defaults belonging to this scope; recursion into a Switch opens
    // a fresh scope.
    fn scan(stmt: &Stmt, count: &mut usize, errors: &mut Vec<SemanticError>) {
        match &stmt.kind {
            StmtKind::Labeled(Label::Default, s) => {
                *count += 1;
                if *count == 2 {
                    errors.push(SemanticError {
                        kind: SemanticErrorKind::MultipleDefaults,
                        pos: stmt.pos,
                    });
                }
                scan(s, count, errors);
            }
            StmtKind::Switch(_, s) => check_defaults_inner(s, errors),
            _ => {
                for c in stmt.children() {
                    scan(c, count, errors);
                }
            }
        }
    }
    fn check_defaults_inner(stmt: &Stmt, errors: &mut Vec<SemanticError>) {
        let mut count = 0;
        scan(stmt, &mut count, errors);
    }
    check_defaults_inner(stmt, errors);
}

/// Left-nested sequence of statements; a single statement passes through
/// and an empty list becomes [`StmtKind::Empty`].
pub fn seq(stmts: Vec<Stmt>) -> Stmt {
    let mut it = stmts.into_iter();
    let first = match it.next() {
        Some(s) => s,
        None => return Stmt::new(StmtKind::Empty),
    };
    it.fold(first, |acc, s| {
        Stmt::new(StmtKind::Seq(Box::new(acc), Box::new(s)))
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn body_of(stmt: Stmt) -> FunctionBody {
        FunctionBody::new("f", vec![], Stmt::new(StmtKind::Compound(Box::new(stmt))))
    }

    #[test]
    fn goto_without_label_is_reported() {
        let b = body_of(Stmt::new(StmtKind::Goto("l1".into())));
        let errs = validate_body(&b);
        assert_eq!(errs.len(), 1);
        assert_eq!(
            errs[0].kind,
            SemanticErrorKind::UndefinedLabel("l1".into())
        );
    }

    #[test]
    fn stray_break_is_reported() {
        let b = body_of(Stmt::new(StmtKind::Break));
        let errs = validate_body(&b);
        assert_eq!(errs.len(), 1);
        assert_eq!(errs[0].kind, SemanticErrorKind::StrayBreak);
    }

    #[test]
    fn break_in_switch_continue_in_loop_are_fine() {
        let sw = Stmt::new(StmtKind::Switch(
            Expr::var("x"),
            Box::new(Stmt::new(StmtKind::Break)),
        ));
        let lp = Stmt::new(StmtKind::While(
            Expr::var("x"),
            Box::new(Stmt::new(StmtKind::Continue)),
        ));
        assert!(validate_body(&body_of(seq(vec![sw, lp]))).is_empty());
    }

    #[test]
    fn continue_in_switch_inside_loop_is_fine_but_not_in_bare_switch() {
        let inner = Stmt::new(StmtKind::Switch(
            Expr::var("x"),
            Box::new(Stmt::new(StmtKind::Continue)),
        ));
        let errs = validate_body(&body_of(inner.clone()));
        assert_eq!(errs.len(), 1);
        assert_eq!(errs[0].kind, SemanticErrorKind::StrayContinue);

        let looped = Stmt::new(StmtKind::While(Expr::var("y"), Box::new(inner)));
        assert!(validate_body(&body_of(looped)).is_empty());
    }

    #[test]
    fn nested_switch_defaults_are_separate_scopes() {
        let inner = Stmt::new(StmtKind::Switch(
            Expr::var("y"),
            Box::new(Stmt::new(StmtKind::Labeled(
                Label::Default,
                Box::new(Stmt::new(StmtKind::Empty)),
            ))),
        ));
        let outer = Stmt::new(StmtKind::Switch(
            Expr::var("x"),
            Box::new(seq(vec![
                Stmt::new(StmtKind::Labeled(
                    Label::Default,
                    Box::new(Stmt::new(StmtKind::Empty)),
                )),
                inner,
            ])),
        ));
        assert!(validate_body(&body_of(outer)).is_empty());

        let two_defaults = Stmt::new(StmtKind::Switch(
            Expr::var("x"),
            Box::new(seq(vec![
                Stmt::new(StmtKind::Labeled(
                    Label::Default,
                    Box::new(Stmt::new(StmtKind::Empty)),
                )),
                Stmt::new(StmtKind::Labeled(
                    Label::Default,
                    Box::new(Stmt::new(StmtKind::Empty)),
                )),
            ])),
        ));
        let errs = validate_body(&body_of(two_defaults));
        assert_eq!(errs.len(), 1);
        assert_eq!(errs[0].kind, SemanticErrorKind::MultipleDefaults);
    }

    #[test]
    fn preorder_indices_are_a_bijection() {
        let b = body_of(seq(vec![
            Stmt::new(StmtKind::If(
                Expr::var("a"),
                Box::new(Stmt::new(StmtKind::Return)),
            )),
            Stmt::new(StmtKind::Expr(Expr::var("x"))),
        ]));
        let mut orders = Vec::new();
        b.body.walk(&mut |s| orders.push(s.order));
        let n = orders.len();
        orders.sort_unstable();
        assert_eq!(orders, (0..n).collect::<Vec<_>>());
    }

    #[test]
    fn collect_labels_sees_only_identifier_labels() {
        let s = seq(vec![
            Stmt::new(StmtKind::Labeled(
                Label::Id("l1".into()),
                Box::new(Stmt::new(StmtKind::Expr(Expr::var("x")))),
            )),
            Stmt::new(StmtKind::Labeled(
                Label::Case(BigInt::from(1)),
                Box::new(Stmt::new(StmtKind::Labeled(
                    Label::Id("l2".into()),
                    Box::new(Stmt::new(StmtKind::Expr(Expr::var("y")))),
                ))),
            )),
        ]);
        let b = body_of(s);
        let labels: Vec<_> = collect_labels(&b).into_iter().collect();
        assert_eq!(labels, vec!["l1".to_string(), "l2".to_string()]);
        assert!(collect_labels(&body_of(Stmt::new(StmtKind::Empty))).is_empty());
    }
}
