//! The ACPATH metric.
//!
//! ACPATH counts the acyclic (arc-simple) paths through a function body in
//! one traversal of the syntax tree. Expressions contribute path-count
//! triples (true/false/total) and, for loop guards that can be crossed
//! twice on one acyclic path, arc-disjoint pair counts. Statements thread a
//! five-part accumulator: fall-through, break, continue and return path
//! counts plus a per-label map of pending goto paths.
//!
//! On *controlled* bodies — no backward gotos, and no jumps or switch
//! dispatches into a loop that can also escape early — the result equals
//! the exact acyclic path count of the reference CFG. The
//! [`is_controlled`] checker classifies bodies; the differential harness
//! measures the agreement.

use std::collections::BTreeMap;

use num_bigint::BigUint;
use num_traits::{One, Zero};

use crate::ast::{Expr, FunctionBody, Ident, Label, Pos, Stmt, StmtKind};
use crate::cfg::{desugar_for, is_constant_leaf, tv, OptLevel, TriBool};
use crate::oracle::PathCount;

/// Single-traversal path counts of an expression: paths that may evaluate
/// to true, to false, and all paths.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExprPaths {
    pub tp: PathCount,
    pub fp: PathCount,
    pub pp: PathCount,
}

/// Arc-disjoint double-traversal counts of an expression, by outcome pair:
/// true-then-true, true-then-false, false-then-false, and all pairs
/// (`pp2`).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExprPairPaths {
    pub tt: PathCount,
    pub tf: PathCount,
    pub ff: PathCount,
    pub pp2: PathCount,
}

/// Per-label accumulator of paths reaching the gotos seen so far. The
/// domain is fixed to the body's label set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GotoCounts(BTreeMap<Ident, PathCount>);

impl GotoCounts {
    /// Zero counts over the given label domain.
    pub fn zeros(labels: &std::collections::BTreeSet<Ident>) -> GotoCounts {
        GotoCounts(
            labels
                .iter()
                .map(|l| (l.clone(), BigUint::zero()))
                .collect(),
        )
    }

    pub fn get(&self, id: &str) -> &PathCount {
        self.0
            .get(id)
            .unwrap_or_else(|| panic!("label `{id}` outside the goto-count domain"))
    }

    /// Single-key update `gt[v/id]`.
    pub fn set(mut self, id: &str, v: PathCount) -> GotoCounts {
        match self.0.get_mut(id) {
            Some(slot) => *slot = v,
            None => panic!("label `{id}` outside the goto-count domain"),
        }
        self
    }

    /// Pointwise sum.
    pub fn add(mut self, other: &GotoCounts) -> GotoCounts {
        for (k, v) in &other.0 {
            *self.0.get_mut(k).expect("mismatched domains") += v;
        }
        self
    }

    /// Pointwise scalar multiple.
    pub fn scale(mut self, k: &PathCount) -> GotoCounts {
        for v in self.0.values_mut() {
            *v *= k;
        }
        self
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Ident, &PathCount)> {
        self.0.iter()
    }
}

/// The five-part statement accumulator: paths falling through to the next
/// statement, paths consumed by `break`, `continue` and `return`, and the
/// goto map after this statement.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ApcResult {
    pub ft: PathCount,
    pub bp: PathCount,
    pub cp: PathCount,
    pub rp: PathCount,
    pub gt: GotoCounts,
}

/// Knobs for ACPATH.
///
/// `while_return_scaling` multiplies the return-path count of a while body
/// by the guard's true-path count. The unscaled rule is the reference
/// behavior; the scaled variant exists so the differential harness can
/// report which one tracks the oracle on guards with more than one
/// true-path.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct AcpathConfig {
    pub while_return_scaling: bool,
}

// ---------------------------------------------------------------------------
// Expression path counts
// ---------------------------------------------------------------------------

/// Single-traversal counts. Constants fold according to the level: a guard
/// known true has no false-paths and vice versa; an unknown constant
/// behaves like a variable.
pub fn expr_paths(e: &Expr, i: OptLevel) -> ExprPaths {
    let one = BigUint::one;
    let zero = BigUint::zero;
    if is_constant_leaf(e) {
        return match tv(e, i) {
            TriBool::Unknown => ExprPaths {
                tp: one(),
                fp: one(),
                pp: one(),
            },
            TriBool::True => ExprPaths {
                tp: one(),
                fp: zero(),
                pp: one(),
            },
            TriBool::False => ExprPaths {
                tp: zero(),
                fp: one(),
                pp: one(),
            },
        };
    }
    match e {
        Expr::Var(_) => ExprPaths {
            tp: one(),
            fp: one(),
            pp: one(),
        },
        Expr::Not(s) => {
            let p = expr_paths(s, i);
            ExprPaths {
                tp: p.fp,
                fp: p.tp,
                pp: p.pp,
            }
        }
        Expr::UnaryPlus(s) | Expr::UnaryMinus(s) | Expr::Paren(s) | Expr::Cast(_, s)
        | Expr::Ice(s) => expr_paths(s, i),
        Expr::OtherUnary(_, s) => {
            let p = expr_paths(s, i);
            ExprPaths {
                tp: p.pp.clone(),
                fp: p.pp.clone(),
                pp: p.pp,
            }
        }
        Expr::And(a, b) => {
            let p1 = expr_paths(a, i);
            let p2 = expr_paths(b, i);
            ExprPaths {
                tp: &p1.tp * &p2.tp,
                fp: &p1.fp + &p1.tp * &p2.fp,
                pp: &p1.fp + &p1.tp * &p2.pp,
            }
        }
        Expr::Or(a, b) | Expr::BinCond(a, b) => {
            let p1 = expr_paths(a, i);
            let p2 = expr_paths(b, i);
            ExprPaths {
                tp: &p1.tp + &p1.fp * &p2.tp,
                fp: &p1.fp * &p2.fp,
                pp: &p1.tp + &p1.fp * &p2.pp,
            }
        }
        Expr::Comma(a, b) => {
            let p1 = expr_paths(a, i);
            let p2 = expr_paths(b, i);
            ExprPaths {
                tp: &p1.pp * &p2.tp,
                fp: &p1.pp * &p2.fp,
                pp: &p1.pp * &p2.pp,
            }
        }
        Expr::OtherBinary(_, a, b) => {
            let p = &expr_paths(a, i).pp * &expr_paths(b, i).pp;
            ExprPaths {
                tp: p.clone(),
                fp: p.clone(),
                pp: p,
            }
        }
        Expr::Cond(g, t, f) => {
            let pg = expr_paths(g, i);
            let pt = expr_paths(t, i);
            let pf = expr_paths(f, i);
            ExprPaths {
                tp: &pg.tp * &pt.tp + &pg.fp * &pf.tp,
                fp: &pg.tp * &pt.fp + &pg.fp * &pf.fp,
                pp: &pg.tp * &pt.pp + &pg.fp * &pf.pp,
            }
        }
        Expr::Call(_, args) => {
            let p = args
                .iter()
                .fold(one(), |acc, a| acc * expr_paths(a, i).pp);
            ExprPaths {
                tp: p.clone(),
                fp: p.clone(),
                pp: p,
            }
        }
        Expr::IntLit(_) => unreachable!("literals are constant leaves"),
    }
}

/// Arc-disjoint double-traversal counts, used for loop guards.
pub fn expr_pair_paths(e: &Expr, i: OptLevel) -> ExprPairPaths {
    let one = BigUint::one;
    let zero = BigUint::zero;
    let two = || BigUint::from(2u32);
    if is_constant_leaf(e) {
        return match tv(e, i) {
            TriBool::Unknown => ExprPairPaths {
                tt: zero(),
                tf: one(),
                ff: zero(),
                pp2: zero(),
            },
            TriBool::True => ExprPairPaths {
                tt: one(),
                tf: zero(),
                ff: zero(),
                pp2: one(),
            },
            TriBool::False => ExprPairPaths {
                tt: zero(),
                tf: zero(),
                ff: one(),
                pp2: one(),
            },
        };
    }
    match e {
        Expr::Var(_) => ExprPairPaths {
            tt: zero(),
            tf: one(),
            ff: zero(),
            pp2: zero(),
        },
        Expr::Not(s) => {
            let q = expr_pair_paths(s, i);
            ExprPairPaths {
                tt: q.ff,
                tf: q.tf,
                ff: q.tt,
                pp2: q.pp2,
            }
        }
        Expr::UnaryPlus(s) | Expr::UnaryMinus(s) | Expr::Paren(s) | Expr::Cast(_, s)
        | Expr::Ice(s) => expr_pair_paths(s, i),
        Expr::OtherUnary(_, s) => ExprPairPaths {
            tt: zero(),
            tf: expr_pair_paths(s, i).pp2,
            ff: zero(),
            pp2: zero(),
        },
        Expr::And(a, b) => {
            let p2 = expr_paths(b, i);
            let q1 = expr_pair_paths(a, i);
            let q2 = expr_pair_paths(b, i);
            ExprPairPaths {
                tt: &q1.tt * &q2.tt,
                tf: &q1.tf * &p2.tp + &q1.tt * &q2.tf,
                ff: &q1.ff + two() * &q1.tf * &p2.fp + &q1.tt * &q2.ff,
                pp2: &q1.ff + two() * &q1.tf * &p2.pp + &q1.tt * &q2.pp2,
            }
        }
        Expr::Or(a, b) | Expr::BinCond(a, b) => {
            let p2 = expr_paths(b, i);
            let q1 = expr_pair_paths(a, i);
            let q2 = expr_pair_paths(b, i);
            ExprPairPaths {
                tt: &q1.tt + two() * &q1.tf * &p2.tp + &q1.ff * &q2.tt,
                tf: &q1.tf * &p2.fp + &q1.ff * &q2.tf,
                ff: &q1.ff * &q2.ff,
                pp2: &q1.tt + two() * &q1.tf * &p2.pp + &q1.ff * &q2.pp2,
            }
        }
        Expr::Comma(a, b) => {
            let q1 = expr_pair_paths(a, i);
            let q2 = expr_pair_paths(b, i);
            ExprPairPaths {
                tt: &q1.pp2 * &q2.tt,
                tf: &q1.pp2 * &q2.tf,
                ff: &q1.pp2 * &q2.ff,
                pp2: &q1.pp2 * &q2.pp2,
            }
        }
        Expr::OtherBinary(_, a, b) => ExprPairPaths {
            tt: zero(),
            tf: expr_pair_paths(a, i).pp2 * expr_pair_paths(b, i).pp2,
            ff: zero(),
            pp2: zero(),
        },
        Expr::Cond(g, t, f) => {
            let pt = expr_paths(t, i);
            let pf = expr_paths(f, i);
            let qg = expr_pair_paths(g, i);
            let qt = expr_pair_paths(t, i);
            let qf = expr_pair_paths(f, i);
            ExprPairPaths {
                tt: &qg.tt * &qt.tt + two() * &qg.tf * &pt.tp * &pf.tp + &qg.ff * &qf.tt,
                tf: &qg.tt * &qt.tf
                    + &qg.ff * &qf.tf
                    + &qg.tf * (&pt.tp * &pf.fp + &pt.fp * &pf.tp),
                ff: &qg.tt * &qt.ff + two() * &qg.tf * &pt.fp * &pf.fp + &qg.ff * &qf.ff,
                pp2: &qg.tt * &qt.pp2 + two() * &qg.tf * &pt.pp * &pf.pp + &qg.ff * &qf.pp2,
            }
        }
        Expr::Call(_, args) => ExprPairPaths {
            tt: zero(),
            tf: args
                .iter()
                .fold(one(), |acc, a| acc * expr_pair_paths(a, i).pp2),
            ff: zero(),
            pp2: zero(),
        },
        Expr::IntLit(_) => unreachable!("literals are constant leaves"),
    }
}

// ---------------------------------------------------------------------------
// Statement calculus
// ---------------------------------------------------------------------------

/// Paths reaching the statement under a label: fall-through plus the
/// switch-dispatch count for `case`/`default`, or plus the accumulated
/// goto count for an identifier label.
pub fn apc_label(l: &Label, ft: &PathCount, st: &PathCount, gt: &GotoCounts) -> PathCount {
    match l {
        Label::Case(_) | Label::Default => ft + st,
        Label::Id(id) => ft + gt.get(id),
    }
}

/// One step of the statement calculus. `ft` is the count of paths falling
/// into `s` from above, `st` the switch-dispatch count distributed to every
/// `case`/`default` label in scope, `gt` the goto accumulator.
pub fn apc_stmt(
    s: &Stmt,
    ft: &PathCount,
    st: &PathCount,
    gt: GotoCounts,
    i: OptLevel,
    config: &AcpathConfig,
) -> ApcResult {
    let zero = BigUint::zero;
    match &s.kind {
        StmtKind::Expr(e) => ApcResult {
            ft: expr_paths(e, i).pp * ft,
            bp: zero(),
            cp: zero(),
            rp: zero(),
            gt,
        },
        StmtKind::Seq(s1, s2) => {
            let r1 = apc_stmt(s1, ft, st, gt, i, config);
            let r2 = apc_stmt(s2, &r1.ft, st, r1.gt, i, config);
            ApcResult {
                ft: r2.ft,
                bp: r1.bp + r2.bp,
                cp: r1.cp + r2.cp,
                rp: r1.rp + r2.rp,
                gt: r2.gt,
            }
        }
        StmtKind::Return => ApcResult {
            ft: zero(),
            bp: zero(),
            cp: zero(),
            rp: ft.clone(),
            gt,
        },
        StmtKind::ReturnExpr(e) => ApcResult {
            ft: zero(),
            bp: zero(),
            cp: zero(),
            rp: expr_paths(e, i).pp * ft,
            gt,
        },
        StmtKind::IfElse(e, s1, s2) => {
            let p = expr_paths(e, i);
            let r1 = apc_stmt(s1, &(&p.tp * ft), st, gt, i, config);
            let r2 = apc_stmt(s2, &(&p.fp * ft), st, r1.gt, i, config);
            ApcResult {
                ft: r1.ft + r2.ft,
                bp: r1.bp + r2.bp,
                cp: r1.cp + r2.cp,
                rp: r1.rp + r2.rp,
                gt: r2.gt,
            }
        }
        StmtKind::If(e, s1) => {
            let p = expr_paths(e, i);
            let r1 = apc_stmt(s1, &(&p.tp * ft), st, gt, i, config);
            ApcResult {
                ft: r1.ft + &p.fp * ft,
                bp: r1.bp,
                cp: r1.cp,
                rp: r1.rp,
                gt: r1.gt,
            }
        }
        StmtKind::Switch(e, body) => {
            let pp = expr_paths(e, i).pp;
            let dispatch = &pp * ft;
            let rs = apc_stmt(body, &zero(), &dispatch, gt, i, config);
            let ft_out = if has_default_outside_inner_switches(body) {
                rs.ft + rs.bp
            } else {
                rs.ft + rs.bp + dispatch
            };
            ApcResult {
                ft: ft_out,
                bp: zero(),
                cp: rs.cp,
                rp: rs.rp,
                gt: rs.gt,
            }
        }
        StmtKind::While(e, body) => {
            let p = expr_paths(e, i);
            let q = expr_pair_paths(e, i);
            let rs = apc_stmt(body, ft, st, gt, i, config);
            let ft_out = &p.fp * ft + &rs.bp * &p.tp + (&rs.ft + &rs.cp) * &q.tf;
            let rp = if config.while_return_scaling {
                &p.tp * &rs.rp
            } else {
                rs.rp.clone()
            };
            ApcResult {
                ft: ft_out,
                bp: zero(),
                cp: zero(),
                rp,
                gt: rs.gt,
            }
        }
        StmtKind::DoWhile(body, e) => {
            let p = expr_paths(e, i);
            let rs = apc_stmt(body, ft, st, gt, i, config);
            ApcResult {
                ft: &p.fp * &rs.ft + &rs.bp,
                bp: zero(),
                cp: zero(),
                rp: rs.rp,
                gt: rs.gt,
            }
        }
        StmtKind::For(init, guard, step, body) => {
            let desugared = desugar_for(init, guard, step, body, s.order, s.pos);
            apc_stmt(&desugared, ft, st, gt, i, config)
        }
        StmtKind::Break => ApcResult {
            ft: zero(),
            bp: ft.clone(),
            cp: zero(),
            rp: zero(),
            gt,
        },
        StmtKind::Continue => ApcResult {
            ft: zero(),
            bp: zero(),
            cp: ft.clone(),
            rp: zero(),
            gt,
        },
        StmtKind::Goto(id) => {
            let bumped = gt.get(id) + ft;
            ApcResult {
                ft: zero(),
                bp: zero(),
                cp: zero(),
                rp: zero(),
                gt: gt.set(id, bumped),
            }
        }
        StmtKind::Labeled(l, inner) => {
            let ft_l = apc_label(l, ft, st, &gt);
            apc_stmt(inner, &ft_l, st, gt, i, config)
        }
        StmtKind::Compound(inner) => apc_stmt(inner, ft, st, gt, i, config),
        StmtKind::Other | StmtKind::Empty => ApcResult {
            ft: ft.clone(),
            bp: zero(),
            cp: zero(),
            rp: zero(),
            gt,
        },
    }
}

/// True when `s` contains a `default` label not captured by a switch
/// nested inside `s`.
pub fn has_default_outside_inner_switches(s: &Stmt) -> bool {
    match &s.kind {
        StmtKind::Labeled(Label::Default, _) => true,
        StmtKind::Labeled(_, inner) => has_default_outside_inner_switches(inner),
        StmtKind::Switch(_, _) => false,
        _ => s
            .children()
            .iter()
            .any(|c| has_default_outside_inner_switches(c)),
    }
}

/// ACPATH of a function body at level `i`, with the default configuration.
pub fn acpath_body(body: &FunctionBody, i: OptLevel) -> PathCount {
    acpath_body_with(body, i, &AcpathConfig::default())
}

/// ACPATH of a function body: one fall-through unit enters the body; the
/// result is what falls off the end plus what returns.
pub fn acpath_body_with(body: &FunctionBody, i: OptLevel, config: &AcpathConfig) -> PathCount {
    let gt = GotoCounts::zeros(&body.labels);
    let r = apc_stmt(&body.body, &BigUint::one(), &BigUint::zero(), gt, i, config);
    r.ft + r.rp
}

// ---------------------------------------------------------------------------
// Controlled-body checker
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ViolationKind {
    /// A goto whose target label does not come strictly later in program
    /// order.
    Backjump,
    /// A goto from before a loop into a loop that can escape early.
    GotoIntoEscapingLoop,
    /// A `case`/`default` inside a loop that can escape early, owned by a
    /// switch outside the loop.
    SwitchIntoEscapingLoop,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ControlledViolation {
    pub kind: ViolationKind,
    pub pos: Pos,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ControlledReport {
    pub controlled: bool,
    pub violations: Vec<ControlledViolation>,
}

struct LoopInfo {
    start: usize,
    end: usize,
    escapes: bool,
}

struct BodyScan {
    gotos: Vec<(Ident, usize, Pos)>,
    id_labels: BTreeMap<Ident, (usize, Pos)>,
    case_labels: Vec<(usize, Pos, Option<usize>)>,
}

fn scan_body(body: &Stmt) -> BodyScan {
    let mut scan = BodyScan {
        gotos: Vec::new(),
        id_labels: BTreeMap::new(),
        case_labels: Vec::new(),
    };
    fn walk(s: &Stmt, switch_stack: &mut Vec<usize>, scan: &mut BodyScan) {
        match &s.kind {
            StmtKind::Goto(id) => scan.gotos.push((id.clone(), s.order, s.pos)),
            StmtKind::Labeled(Label::Id(id), inner) => {
                scan.id_labels.insert(id.clone(), (s.order, s.pos));
                walk(inner, switch_stack, scan);
            }
            StmtKind::Labeled(_, inner) => {
                scan.case_labels
                    .push((s.order, s.pos, switch_stack.last().copied()));
                walk(inner, switch_stack, scan);
            }
            StmtKind::Switch(_, inner) => {
                switch_stack.push(s.order);
                walk(inner, switch_stack, scan);
                switch_stack.pop();
            }
            _ => {
                for c in s.children() {
                    walk(c, switch_stack, scan);
                }
            }
        }
    }
    walk(body, &mut Vec::new(), &mut scan);
    scan
}

/// Breaks in `s` that would terminate the construct enclosing `s` (the
/// scan does not descend into constructs that capture `break`).
fn has_escaping_break(s: &Stmt) -> bool {
    match &s.kind {
        StmtKind::Break => true,
        StmtKind::Switch(_, _)
        | StmtKind::While(_, _)
        | StmtKind::DoWhile(_, _)
        | StmtKind::For(_, _, _, _) => false,
        _ => s.children().iter().any(|c| has_escaping_break(c)),
    }
}

fn contains_return(s: &Stmt) -> bool {
    let mut found = false;
    s.walk(&mut |n| {
        if matches!(n.kind, StmtKind::Return | StmtKind::ReturnExpr(_)) {
            found = true;
        }
    });
    found
}

/// Decide whether a body is controlled: every goto jumps strictly forward,
/// and loops that can terminate early (break out of the loop, return, or
/// goto past the loop) are entered only through their guard.
pub fn is_controlled(body: &FunctionBody) -> ControlledReport {
    let scan = scan_body(&body.body);
    let mut violations = Vec::new();

    for (id, order, pos) in &scan.gotos {
        if let Some((label_order, _)) = scan.id_labels.get(id) {
            if label_order <= order {
                violations.push(ControlledViolation {
                    kind: ViolationKind::Backjump,
                    pos: *pos,
                });
            }
        }
    }

    let loops = collect_escaping_loops(&body.body, &scan);
    for l in &loops {
        if !l.escapes {
            continue;
        }
        // Gotos from before the loop into it.
        for (id, (label_order, _)) in &scan.id_labels {
            if !(l.start..=l.end).contains(label_order) {
                continue;
            }
            for (gid, gorder, gpos) in &scan.gotos {
                if gid == id && *gorder < l.start {
                    violations.push(ControlledViolation {
                        kind: ViolationKind::GotoIntoEscapingLoop,
                        pos: *gpos,
                    });
                }
            }
        }
        // Case/default labels inside the loop owned by a switch outside.
        for (order, pos, owner) in &scan.case_labels {
            if (l.start..=l.end).contains(order) {
                match owner {
                    Some(sw) if (l.start..=l.end).contains(sw) => {}
                    Some(_) => violations.push(ControlledViolation {
                        kind: ViolationKind::SwitchIntoEscapingLoop,
                        pos: *pos,
                    }),
                    None => {}
                }
            }
        }
    }

    violations.sort_by_key(|v| v.pos);
    violations.dedup();
    ControlledReport {
        controlled: violations.is_empty(),
        violations,
    }
}

fn collect_escaping_loops(body: &Stmt, scan: &BodyScan) -> Vec<LoopInfo> {
    let mut loops = Vec::new();
    body.walk(&mut |s| {
        let inner = match &s.kind {
            StmtKind::While(_, inner) | StmtKind::For(_, _, _, inner) => inner,
            StmtKind::DoWhile(inner, _) => inner,
            _ => return,
        };
        let start = s.order;
        let end = s.max_order();
        let mut escapes = has_escaping_break(inner) || contains_return(inner);
        if !escapes {
            // A goto from inside the loop to a label past it.
            for (id, gorder, _) in &scan.gotos {
                if (start..=end).contains(gorder) {
                    if let Some((label_order, _)) = scan.id_labels.get(id) {
                        if *label_order > end {
                            escapes = true;
                            break;
                        }
                    }
                }
            }
        }
        loops.push(LoopInfo {
            start,
            end,
            escapes,
        });
    });
    loops
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::{parse_expression, parse_translation_unit, SourceFile};
    use num_traits::ToPrimitive;

    fn body(src: &str) -> FunctionBody {
        let (fs, errs) = parse_translation_unit(&SourceFile::new("t.c", src));
        assert!(errs.is_empty(), "{errs:?}");
        fs.into_iter().next().unwrap()
    }

    fn paths(e: &str, i: OptLevel) -> (u64, u64, u64) {
        let p = expr_paths(&parse_expression(e).unwrap(), i);
        (
            p.tp.to_u64().unwrap(),
            p.fp.to_u64().unwrap(),
            p.pp.to_u64().unwrap(),
        )
    }

    fn pairs(e: &str, i: OptLevel) -> (u64, u64, u64, u64) {
        let q = expr_pair_paths(&parse_expression(e).unwrap(), i);
        (
            q.tt.to_u64().unwrap(),
            q.tf.to_u64().unwrap(),
            q.ff.to_u64().unwrap(),
            q.pp2.to_u64().unwrap(),
        )
    }

    fn acp(src: &str, i: OptLevel) -> u64 {
        acpath_body(&body(src), i).to_u64().unwrap()
    }

    #[test]
    fn single_traversal_rows() {
        assert_eq!(paths("x", OptLevel::O0), (1, 1, 1));
        assert_eq!(paths("a && b", OptLevel::O0), (1, 2, 2));
        assert_eq!(paths("0", OptLevel::O1), (0, 1, 1));
        assert_eq!(paths("0", OptLevel::O0), (1, 1, 1));
        assert_eq!(paths("a || b", OptLevel::O0), (2, 1, 2));
        assert_eq!(paths("a ? b : c", OptLevel::O0), (2, 2, 2));
        assert_eq!(paths("f(a, b)", OptLevel::O0), (1, 1, 1));
        assert_eq!(paths("a && b && c", OptLevel::O0), (1, 3, 3));
    }

    #[test]
    fn pair_traversal_rows() {
        assert_eq!(pairs("x", OptLevel::O0), (0, 1, 0, 0));
        assert_eq!(pairs("1", OptLevel::O1), (1, 0, 0, 1));
        assert_eq!(pairs("0", OptLevel::O1), (0, 0, 1, 1));
        // One disjoint true/true pair per disjoint (true, true) split.
        assert_eq!(pairs("a || b", OptLevel::O0), (2, 1, 0, 2));
        assert_eq!(pairs("a && b", OptLevel::O0), (0, 1, 2, 2));
        assert_eq!(pairs("!x", OptLevel::O0), (0, 1, 0, 0));
    }

    #[test]
    fn negation_involution_at_the_counting_level() {
        for e in ["a && b", "a || (b && c)", "a ? b : c"] {
            let parsed = parse_expression(e).unwrap();
            let double = Expr::Not(Box::new(Expr::Not(Box::new(parsed.clone()))));
            for i in OptLevel::ALL {
                assert_eq!(expr_paths(&parsed, i), expr_paths(&double, i));
            }
        }
    }

    #[test]
    fn label_paths() {
        use num_bigint::BigInt;
        use std::collections::BTreeSet;
        let gt = GotoCounts::zeros(&BTreeSet::from(["l1".to_string()])).set("l1", 1u32.into());
        assert_eq!(
            apc_label(
                &Label::Case(BigInt::from(1)),
                &0u32.into(),
                &3u32.into(),
                &gt
            ),
            3u32.into()
        );
        assert_eq!(
            apc_label(&Label::Id("l1".into()), &2u32.into(), &0u32.into(), &gt),
            3u32.into()
        );
        assert_eq!(
            apc_label(&Label::Default, &1u32.into(), &0u32.into(), &gt),
            1u32.into()
        );
    }

    #[test]
    fn break_moves_fall_through_paths() {
        let s = Stmt::new(StmtKind::Break);
        let r = apc_stmt(
            &s,
            &5u32.into(),
            &0u32.into(),
            GotoCounts::zeros(&Default::default()),
            OptLevel::O0,
            &AcpathConfig::default(),
        );
        assert_eq!(r.bp, 5u32.into());
        assert!(r.ft.is_zero() && r.cp.is_zero() && r.rp.is_zero());
    }

    #[test]
    fn guarded_loop_body() {
        let src = "int f(int a, int b, int c, int d) { while (a || (b && c && d)) { ; } }";
        for i in OptLevel::ALL {
            assert_eq!(acp(src, i), 6);
        }
    }

    #[test]
    fn do_while_false_guard_is_single_path() {
        let src = "void f() { do { ; } while (0); }";
        for i in OptLevel::ALL {
            assert_eq!(acp(src, i), 1);
        }
    }

    #[test]
    fn if_chain_with_returns() {
        let src = "int f(int a, int b, int c, int d, int e) {
            if (a && b && c) return d ? 0 : 1; else return e ? 0 : 1;
        }";
        for i in OptLevel::ALL {
            assert_eq!(acp(src, i), 8);
        }
    }

    #[test]
    fn switch_fallthrough() {
        let src = "int f(int a, int b, int c) {
            switch (a) { case 1: b ? 0 : 1; default: return c ? 0 : 1; }
        }";
        for i in OptLevel::ALL {
            assert_eq!(acp(src, i), 6);
        }
    }

    #[test]
    fn early_exit_variants_in_do_while() {
        let break_v = "void f(int a, int b, int c) {
            do { if (a) break; if (b) ; else ; } while (c);
        }";
        let return_v = "void f(int a, int b, int c) {
            do { if (a) return; if (b) ; else ; } while (c);
        }";
        let continue_v = "void f(int a, int b, int c) {
            do { if (a) continue; if (b) ; else ; } while (c);
        }";
        for i in OptLevel::ALL {
            assert_eq!(acp(break_v, i), 3);
            assert_eq!(acp(return_v, i), 3);
            assert_eq!(acp(continue_v, i), 2);
        }
    }

    #[test]
    fn controlled_checker_on_jump_into_loop() {
        let f = body("void f(int x) { goto l1; while (x) { break; l1: ; } }");
        let r = is_controlled(&f);
        assert!(!r.controlled);
        assert!(r
            .violations
            .iter()
            .any(|v| v.kind == ViolationKind::GotoIntoEscapingLoop));
        assert_eq!(acpath_body(&f, OptLevel::O0).to_u64().unwrap(), 1);
    }

    #[test]
    fn controlled_checker_on_switch_into_loop() {
        let g = body("void g(int x, int y) { switch (x) { do { return; case 0: ; } while (y); } }");
        let r = is_controlled(&g);
        assert!(!r.controlled);
        assert!(r
            .violations
            .iter()
            .any(|v| v.kind == ViolationKind::SwitchIntoEscapingLoop));
        assert_eq!(acpath_body(&g, OptLevel::O0).to_u64().unwrap(), 2);
    }

    #[test]
    fn backjump_is_flagged() {
        let f = body("void f(int x) { l1: x; goto l1; }");
        let r = is_controlled(&f);
        assert!(!r.controlled);
        assert_eq!(r.violations[0].kind, ViolationKind::Backjump);
    }

    #[test]
    fn plain_bodies_are_controlled() {
        for src in [
            "int f(int a, int b, int c, int d, int e) {
                if (a && b && c) return d ? 0 : 1; else return e ? 0 : 1;
            }",
            "void f(int x) { goto l1; x; l1: ; }",
            "void f(int x) { while (x) { if (x) break; } }",
            "void f(int x) { switch (x) { while (x) { case 1: ; } } }",
        ] {
            let r = is_controlled(&body(src));
            assert!(r.controlled, "{src}: {:?}", r.violations);
        }
    }

    #[test]
    fn jump_into_nonescaping_loop_is_allowed() {
        // The loop only exits through its guard, so dispatching into it is
        // harmless.
        let src = "void f(int a, int b) { switch (a) case 0: do { ; case 1: ; } while (b); }";
        assert!(is_controlled(&body(src)).controlled);
    }

    #[test]
    fn while_return_scaling_switch() {
        let src = "void f(int a, int z) { while (a || z) { return; } }";
        let b = body(src);
        let plain = acpath_body(&b, OptLevel::O0);
        let scaled = acpath_body_with(
            &b,
            OptLevel::O0,
            &AcpathConfig {
                while_return_scaling: true,
            },
        );
        assert_eq!(plain.to_u64().unwrap(), 2);
        assert_eq!(scaled.to_u64().unwrap(), 3);
    }

    #[test]
    fn forty_guarded_skips_double_per_statement() {
        let src = format!("void f(int x) {{ {} }}", "if (x) ;".repeat(40));
        let v = acpath_body(&body(&src), OptLevel::O0);
        assert_eq!(v, BigUint::from(1u64) << 40);
    }
}
