//! The NPATH metric.
//!
//! NPATH is a purely syntactic estimate: expression complexity counts
//! branching operators, statement complexity multiplies along sequences and
//! adds across constructs. It takes no optimization level. The metric is
//! neither a lower nor an upper bound of the real acyclic path count; it is
//! computed here as the baseline ACPATH is compared against.

use num_bigint::BigUint;
use num_traits::{One, Zero};

use crate::ast::{Expr, FunctionBody, Label, Stmt, StmtKind};
use crate::oracle::PathCount;

/// Knobs for NPATH.
///
/// With `clamp_expr_statements` off (default), `E;` contributes
/// `NP_E(E)`, which is zero for branch-free expressions and therefore
/// zeroes whole sequence products. The clamp substitutes `max(1, NP_E(E))`
/// like the `return E` rule does.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct NpathConfig {
    pub clamp_expr_statements: bool,
}

/// Expression complexity: `&&`/`||` add one, the ternary adds two, the
/// comma, binary-conditional and opaque operators just combine their
/// operands, leaves contribute nothing.
pub fn np_expr(e: &Expr) -> PathCount {
    match e {
        Expr::Var(_) | Expr::IntLit(_) | Expr::Ice(_) => BigUint::zero(),
        Expr::Not(s)
        | Expr::UnaryPlus(s)
        | Expr::UnaryMinus(s)
        | Expr::Paren(s)
        | Expr::Cast(_, s)
        | Expr::OtherUnary(_, s) => np_expr(s),
        Expr::And(a, b) | Expr::Or(a, b) => np_expr(a) + np_expr(b) + BigUint::one(),
        Expr::Comma(a, b) | Expr::BinCond(a, b) | Expr::OtherBinary(_, a, b) => {
            np_expr(a) + np_expr(b)
        }
        Expr::Cond(g, t, f) => np_expr(g) + np_expr(t) + np_expr(f) + BigUint::from(2u32),
        Expr::Call(_, args) => args.iter().map(np_expr).sum(),
    }
}

fn max1(v: PathCount) -> PathCount {
    if v.is_zero() {
        BigUint::one()
    } else {
        v
    }
}

/// Statement complexity.
pub fn np_stmt(s: &Stmt, config: &NpathConfig) -> PathCount {
    match &s.kind {
        StmtKind::Expr(e) => {
            let v = np_expr(e);
            if config.clamp_expr_statements {
                max1(v)
            } else {
                v
            }
        }
        StmtKind::Seq(a, b) => np_stmt(a, config) * np_stmt(b, config),
        StmtKind::Return => BigUint::one(),
        StmtKind::ReturnExpr(e) => max1(np_expr(e)),
        StmtKind::IfElse(e, a, b) => np_expr(e) + np_stmt(a, config) + np_stmt(b, config),
        StmtKind::If(e, a) => np_expr(e) + np_stmt(a, config) + BigUint::one(),
        StmtKind::Switch(e, body) => np_switch(e, body, config),
        StmtKind::While(e, a) | StmtKind::DoWhile(a, e) => {
            np_expr(e) + np_stmt(a, config) + BigUint::one()
        }
        StmtKind::For(i, g, u, a) => {
            np_expr(i) + np_expr(g) + np_expr(u) + np_stmt(a, config) + BigUint::one()
        }
        StmtKind::Break | StmtKind::Continue | StmtKind::Goto(_) => BigUint::one(),
        StmtKind::Labeled(_, a) | StmtKind::Compound(a) => np_stmt(a, config),
        StmtKind::Other | StmtKind::Empty => BigUint::one(),
    }
}

/// Switch complexity: one term per maximal `case`/`default`-labeled
/// statement group, plus the selector. A group whose head labels include
/// `default` is the default group; a missing default group contributes one.
/// Statements before the first label belong to no group.
fn np_switch(selector: &Expr, body: &Stmt, config: &NpathConfig) -> PathCount {
    fn flatten<'a>(s: &'a Stmt, out: &mut Vec<&'a Stmt>) {
        match &s.kind {
            StmtKind::Seq(a, b) => {
                flatten(a, out);
                flatten(b, out);
            }
            StmtKind::Compound(inner) => flatten(inner, out),
            _ => out.push(s),
        }
    }
    fn head_has_case_or_default(mut s: &Stmt) -> (bool, bool) {
        let mut has_label = false;
        let mut has_default = false;
        while let StmtKind::Labeled(l, inner) = &s.kind {
            match l {
                Label::Case(_) => has_label = true,
                Label::Default => {
                    has_label = true;
                    has_default = true;
                }
                Label::Id(_) => {}
            }
            s = inner;
        }
        (has_label, has_default)
    }

    let mut items = Vec::new();
    flatten(body, &mut items);

    let mut total = np_expr(selector);
    let mut default_seen = false;
    let mut group: Option<(bool, PathCount)> = None;
    let close = |group: &mut Option<(bool, PathCount)>,
                 total: &mut PathCount,
                 default_seen: &mut bool| {
        if let Some((is_default, v)) = group.take() {
            if is_default {
                *default_seen = true;
            }
            *total += v;
        }
    };
    for item in items {
        let (starts_group, is_default) = head_has_case_or_default(item);
        if starts_group {
            close(&mut group, &mut total, &mut default_seen);
            group = Some((is_default, np_stmt(item, config)));
        } else if let Some((_, v)) = group.as_mut() {
            *v *= np_stmt(item, config);
        }
    }
    close(&mut group, &mut total, &mut default_seen);
    if !default_seen {
        total += BigUint::one();
    }
    total
}

/// NPATH of a whole function body.
pub fn npath_body(body: &FunctionBody, config: &NpathConfig) -> PathCount {
    np_stmt(&body.body, config)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::{parse_expression, parse_translation_unit, SourceFile};

    fn np(e: &str) -> u64 {
        use num_traits::ToPrimitive;
        np_expr(&parse_expression(e).unwrap()).to_u64().unwrap()
    }

    fn np_body(src: &str) -> u64 {
        use num_traits::ToPrimitive;
        let (fs, errs) = parse_translation_unit(&SourceFile::new("t.c", src));
        assert!(errs.is_empty(), "{errs:?}");
        npath_body(&fs[0], &NpathConfig::default())
            .to_u64()
            .unwrap()
    }

    #[test]
    fn expression_rows() {
        assert_eq!(np("x"), 0);
        assert_eq!(np("a && b && c"), 2);
        assert_eq!(np("d ? 0 : 1"), 2);
        assert_eq!(np("a, b ?: c"), 0);
        assert_eq!(np("!(a || b)"), 1);
        assert_eq!(np("f(a && b, c)"), 1);
    }

    #[test]
    fn negation_is_transparent() {
        assert_eq!(np("!x"), np("x"));
        assert_eq!(np("!(a && b)"), np("a && b"));
    }

    #[test]
    fn if_chain_function() {
        let src = "int f(int a, int b, int c, int d, int e) {
            if (a && b && c) return d ? 0 : 1; else return e ? 0 : 1;
        }";
        assert_eq!(np_body(src), 6);
    }

    #[test]
    fn do_while_with_early_exits() {
        let src = "void f(int a, int b, int c) {
            do { if (a) break; if (b) ; else ; } while (c);
        }";
        assert_eq!(np_body(src), 5);
    }

    #[test]
    fn do_while_idiom() {
        assert_eq!(np_body("void f() { do ; while (0); }"), 2);
    }

    #[test]
    fn switch_groups_reproduce_fallthrough_structure() {
        let src = "int f(int a, int b, int c) {
            switch (a) { case 1: b ? 0 : 1; default: return c ? 0 : 1; }
        }";
        assert_eq!(np_body(src), 4);
    }

    #[test]
    fn switch_without_default_adds_one() {
        let src = "int f(int a, int b) { switch (a) { case 1: b ? 0 : 1; } }";
        // selector 0 + case group 2 + missing default 1
        assert_eq!(np_body(src), 3);
    }

    #[test]
    fn sequence_multiplies() {
        let src = "void f(int a, int b) { if (a) ; if (b) ; }";
        assert_eq!(np_body(src), 4);
    }

    #[test]
    fn clamp_rescues_zero_factors() {
        let src = "void f(int a, int x) { x; if (a) ; }";
        assert_eq!(np_body(src), 0);
        let (fs, _) = parse_translation_unit(&SourceFile::new("t.c", src));
        use num_traits::ToPrimitive;
        let clamped = npath_body(
            &fs[0],
            &NpathConfig {
                clamp_expr_statements: true,
            },
        );
        assert_eq!(clamped.to_u64().unwrap(), 2);
    }

    #[test]
    fn twenty_six_do_while_blocks() {
        let one = "do ; while (0); ";
        let src = format!("void f() {{ {} }}", one.repeat(26));
        assert_eq!(np_body(&src), 1 << 26);
    }
}
