//! Randomized and constructive test generation: digraph embedding into
//! function bodies, seed-deterministic generators for expressions and
//! controlled bodies, and the differential checker that compares ACPATH
//! against the exhaustive oracle.

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigUint;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::acpath::{
    acpath_body_with, expr_paths, is_controlled, AcpathConfig, ApcResult, GotoCounts,
};
use crate::ast::{seq, validate_body, Expr, FunctionBody, Ident, Label, Stmt, StmtKind};
use crate::cfg::{build_body_cfg, Cfg, NodeId, OptLevel};
use crate::npath::{npath_body, NpathConfig};
use crate::oracle::{count_acyclic_paths, OracleBudget, OracleError, PathCount};

/// A plain directed graph with an entry node; exits are the nodes without
/// outgoing arcs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Digraph {
    pub n: usize,
    pub arcs: BTreeSet<(usize, usize)>,
    pub entry: usize,
}

impl Digraph {
    pub fn exits(&self) -> BTreeSet<usize> {
        (0..self.n)
            .filter(|&v| !self.arcs.iter().any(|&(a, _)| a == v))
            .collect()
    }

    pub fn reachable(&self) -> BTreeSet<usize> {
        let mut seen = BTreeSet::from([self.entry]);
        let mut stack = vec![self.entry];
        while let Some(v) = stack.pop() {
            for &(a, b) in &self.arcs {
                if a == v && seen.insert(b) {
                    stack.push(b);
                }
            }
        }
        seen
    }

    pub fn has_reachable_exit(&self) -> bool {
        let exits = self.exits();
        self.reachable().iter().any(|v| exits.contains(v))
    }

    /// View the digraph as a CFG so the oracle can walk it.
    pub fn to_cfg(&self) -> Cfg {
        Cfg {
            nodes: (0..self.n as NodeId).collect(),
            arcs: self
                .arcs
                .iter()
                .map(|&(a, b)| (a as NodeId, b as NodeId))
                .collect(),
            entry: self.entry as NodeId,
            origin: BTreeMap::new(),
            markers: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EmbedError {
    #[error("the digraph has no exit reachable from its entry")]
    NoReachableExit,
}

/// Encode a digraph as a function body with the same acyclic path count at
/// every optimization level: each non-exit node becomes a labeled `switch`
/// over a fresh selector variable whose arms `goto` the successor labels
/// (the last arm through `default`), and each exit node becomes a labeled
/// `return`.
pub fn embed_graph(g: &Digraph) -> Result<FunctionBody, EmbedError> {
    if !g.has_reachable_exit() {
        return Err(EmbedError::NoReachableExit);
    }
    let exits = g.exits();
    let label = |v: usize| format!("n{v}");

    let mut order: Vec<usize> = vec![g.entry];
    order.extend((0..g.n).filter(|v| *v != g.entry && !exits.contains(v)));
    order.extend(exits.iter().filter(|v| **v != g.entry));

    let mut stmts = Vec::new();
    for &v in &order {
        let stmt = if exits.contains(&v) {
            Stmt::new(StmtKind::Return)
        } else {
            let targets: Vec<usize> = g
                .arcs
                .iter()
                .filter(|&&(a, _)| a == v)
                .map(|&(_, b)| b)
                .collect();
            let mut arms = Vec::new();
            for (k, &tgt) in targets.iter().enumerate() {
                let jump = Stmt::new(StmtKind::Goto(label(tgt)));
                let arm = if k + 1 == targets.len() {
                    Stmt::new(StmtKind::Labeled(Label::Default, Box::new(jump)))
                } else {
                    Stmt::new(StmtKind::Labeled(
                        Label::Case((k as i64 + 1).into()),
                        Box::new(jump),
                    ))
                };
                arms.push(arm);
            }
            Stmt::new(StmtKind::Switch(
                Expr::var(&format!("x{v}")),
                Box::new(Stmt::new(StmtKind::Compound(Box::new(seq(arms))))),
            ))
        };
        stmts.push(Stmt::new(StmtKind::Labeled(
            Label::Id(label(v)),
            Box::new(stmt),
        )));
    }
    let params = order
        .iter()
        .filter(|v| !exits.contains(v))
        .map(|v| format!("x{v}"))
        .collect();
    Ok(FunctionBody::new(
        "embedded",
        params,
        Stmt::new(StmtKind::Compound(Box::new(seq(stmts)))),
    ))
}

/// Seed-deterministic generator configuration.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GenConfig {
    pub seed: u64,
    pub max_depth: usize,
    pub max_stmts: usize,
    pub loops: bool,
    pub switches: bool,
    pub gotos: bool,
    pub constants: bool,
}

impl Default for GenConfig {
    fn default() -> GenConfig {
        GenConfig {
            seed: 0,
            max_depth: 3,
            max_stmts: 8,
            loops: true,
            switches: true,
            gotos: true,
            constants: true,
        }
    }
}

const VARS: [&str; 6] = ["a", "b", "c", "d", "e", "w"];

/// A random expression drawn from the full grammar.
pub fn gen_expr(rng: &mut ChaCha8Rng, depth: usize, constants: bool) -> Expr {
    let leaf = |rng: &mut ChaCha8Rng| {
        if constants && rng.gen_bool(0.3) {
            Expr::lit(rng.gen_range(-2..=3))
        } else {
            Expr::var(VARS[rng.gen_range(0..VARS.len())])
        }
    };
    if depth == 0 {
        return leaf(rng);
    }
    let sub = |rng: &mut ChaCha8Rng| gen_expr(rng, depth - 1, constants);
    match rng.gen_range(0..14u32) {
        0 => leaf(rng),
        1 => Expr::Not(Box::new(sub(rng))),
        2 => Expr::UnaryMinus(Box::new(sub(rng))),
        3 => Expr::Paren(Box::new(sub(rng))),
        4 => Expr::Cast("int".into(), Box::new(sub(rng))),
        5 => Expr::OtherUnary("~".into(), Box::new(sub(rng))),
        6 => Expr::And(Box::new(sub(rng)), Box::new(sub(rng))),
        7 => Expr::Or(Box::new(sub(rng)), Box::new(sub(rng))),
        8 => Expr::Comma(Box::new(sub(rng)), Box::new(sub(rng))),
        9 => Expr::BinCond(Box::new(sub(rng)), Box::new(sub(rng))),
        10 => Expr::OtherBinary(
            ["+", "<", "=="][rng.gen_range(0..3)].into(),
            Box::new(sub(rng)),
            Box::new(sub(rng)),
        ),
        11 => Expr::Cond(Box::new(sub(rng)), Box::new(sub(rng)), Box::new(sub(rng))),
        12 => {
            let argc = rng.gen_range(0..=2);
            Expr::Call("g".into(), (0..argc).map(|_| sub(rng)).collect())
        }
        _ => Expr::UnaryPlus(Box::new(sub(rng))),
    }
}

struct StmtGen<'a> {
    rng: &'a mut ChaCha8Rng,
    cfg: &'a GenConfig,
    budget: usize,
    next_label: usize,
}

impl<'a> StmtGen<'a> {
    fn guard(&mut self) -> Expr {
        gen_expr(self.rng, self.cfg.max_depth.min(2), self.cfg.constants)
    }

    fn spend(&mut self) -> bool {
        if self.budget == 0 {
            return false;
        }
        self.budget -= 1;
        true
    }

    fn gen_list(&mut self, depth: usize, in_loop: bool, in_switch: bool) -> Vec<Stmt> {
        let n = self.rng.gen_range(1..=3usize);
        let mut out = Vec::new();
        for _ in 0..n {
            if self.budget == 0 {
                break;
            }
            out.push(self.gen_stmt(depth, in_loop, in_switch));
        }
        if out.is_empty() {
            out.push(Stmt::new(StmtKind::Empty));
        }
        // Optionally thread a forward goto/label pair through this level;
        // same-level forward jumps never enter a loop or switch region.
        if self.cfg.gotos && out.len() >= 2 && self.rng.gen_bool(0.25) {
            let j = self.rng.gen_range(1..out.len());
            let i = self.rng.gen_range(0..j);
            let name = format!("L{}", self.next_label);
            self.next_label += 1;
            let target = out.remove(j);
            out.insert(
                j,
                Stmt::new(StmtKind::Labeled(Label::Id(name.clone()), Box::new(target))),
            );
            out.insert(i, Stmt::new(StmtKind::Goto(name)));
        }
        out
    }

    fn gen_stmt(&mut self, depth: usize, in_loop: bool, in_switch: bool) -> Stmt {
        if !self.spend() || depth == 0 {
            return self.simple(in_loop, in_switch);
        }
        let choice = self.rng.gen_range(0..100u32);
        match choice {
            0..=29 => self.simple(in_loop, in_switch),
            30..=44 => Stmt::new(StmtKind::If(
                self.guard(),
                Box::new(self.gen_stmt(depth - 1, in_loop, in_switch)),
            )),
            45..=59 => Stmt::new(StmtKind::IfElse(
                self.guard(),
                Box::new(self.gen_stmt(depth - 1, in_loop, in_switch)),
                Box::new(self.gen_stmt(depth - 1, in_loop, in_switch)),
            )),
            60..=74 if self.cfg.loops => {
                let body = Stmt::new(StmtKind::Compound(Box::new(seq(
                    self.gen_list(depth - 1, true, false),
                ))));
                match self.rng.gen_range(0..3u32) {
                    0 => Stmt::new(StmtKind::While(self.guard(), Box::new(body))),
                    1 => Stmt::new(StmtKind::DoWhile(Box::new(body), self.guard())),
                    _ => Stmt::new(StmtKind::For(
                        gen_expr(self.rng, 1, self.cfg.constants),
                        self.guard(),
                        gen_expr(self.rng, 1, self.cfg.constants),
                        Box::new(body),
                    )),
                }
            }
            75..=84 if self.cfg.switches => self.gen_switch(depth, in_loop),
            85..=92 => Stmt::new(StmtKind::Compound(Box::new(seq(
                self.gen_list(depth - 1, in_loop, in_switch),
            )))),
            _ => self.simple(in_loop, in_switch),
        }
    }

    fn gen_switch(&mut self, depth: usize, in_loop: bool) -> Stmt {
        let groups = self.rng.gen_range(1..=3usize);
        let with_default = self.rng.gen_bool(0.5);
        let mut items = Vec::new();
        for k in 0..groups {
            let mut group = vec![self.gen_stmt(depth - 1, in_loop, true)];
            if self.rng.gen_bool(0.6) {
                group.push(Stmt::new(StmtKind::Break));
            }
            let is_default = with_default && k + 1 == groups;
            let labeled = if is_default {
                Stmt::new(StmtKind::Labeled(Label::Default, Box::new(seq(group))))
            } else {
                Stmt::new(StmtKind::Labeled(
                    Label::Case((k as i64).into()),
                    Box::new(seq(group)),
                ))
            };
            items.push(labeled);
        }
        Stmt::new(StmtKind::Switch(
            self.guard(),
            Box::new(Stmt::new(StmtKind::Compound(Box::new(seq(items))))),
        ))
    }

    fn simple(&mut self, in_loop: bool, in_switch: bool) -> Stmt {
        let choice = self.rng.gen_range(0..100u32);
        match choice {
            0..=39 => Stmt::new(StmtKind::Expr(gen_expr(
                self.rng,
                self.cfg.max_depth.min(2),
                self.cfg.constants,
            ))),
            40..=54 => Stmt::new(StmtKind::Empty),
            55..=64 => Stmt::new(StmtKind::Return),
            65..=74 => Stmt::new(StmtKind::ReturnExpr(gen_expr(
                self.rng,
                1,
                self.cfg.constants,
            ))),
            75..=84 if in_loop => Stmt::new(StmtKind::Continue),
            85..=94 if in_loop || in_switch => Stmt::new(StmtKind::Break),
            _ => Stmt::new(StmtKind::Expr(Expr::var("w"))),
        }
    }
}

/// A random statement tree (used standalone by the algebraic property
/// suites). Break/continue are generated as if a loop enclosed the
/// statement.
pub fn gen_statement(config: &GenConfig) -> Stmt {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut g = StmtGen {
        rng: &mut rng,
        cfg: config,
        budget: config.max_stmts,
        next_label: 0,
    };
    let list = g.gen_list(config.max_depth, true, true);
    let mut s = Stmt::new(StmtKind::Compound(Box::new(seq(list))));
    crate::ast::number_statements(&mut s, 0);
    s
}

/// Upper bound on the reference-CFG size accepted from the body generator;
/// keeps every generated instance well inside the oracle budget.
pub const GEN_CFG_NODE_LIMIT: usize = 25;

/// A random function body that validates and is controlled. The generator
/// retries (deterministically) until the reference CFG fits
/// [`GEN_CFG_NODE_LIMIT`] at every level.
pub fn gen_controlled_body(config: &GenConfig) -> FunctionBody {
    for attempt in 0u64.. {
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed.wrapping_add(attempt * 0x9e3779b9));
        let mut g = StmtGen {
            rng: &mut rng,
            cfg: config,
            budget: config.max_stmts,
            next_label: 0,
        };
        let list = g.gen_list(config.max_depth, false, false);
        let body = FunctionBody::new(
            "gen",
            VARS.iter().map(|v| v.to_string()).collect(),
            Stmt::new(StmtKind::Compound(Box::new(seq(list)))),
        );
        if !validate_body(&body).is_empty() {
            continue;
        }
        if !is_controlled(&body).controlled {
            continue;
        }
        let fits = OptLevel::ALL.iter().all(|&lvl| {
            build_body_cfg(&body, lvl).reachable_nodes().len() <= GEN_CFG_NODE_LIMIT
        });
        if fits {
            return body;
        }
    }
    unreachable!("the retry loop always terminates by producing a tiny body")
}

// ---------------------------------------------------------------------------
// Differential checking
// ---------------------------------------------------------------------------

/// Outcome of one ACPATH-versus-oracle comparison.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Verdict {
    pub acpath: PathCount,
    /// ACPATH with `while_return_scaling` on, for mode comparison.
    pub acpath_scaled: PathCount,
    pub npath: PathCount,
    /// Exact acyclic path count, absent when the oracle budget was
    /// exceeded.
    pub alpha: Option<PathCount>,
    pub controlled: bool,
    /// `acpath == alpha` when `alpha` was computed.
    pub matched: Option<bool>,
    /// `acpath_scaled == alpha` when `alpha` was computed.
    pub matched_scaled: Option<bool>,
    /// When set, the body belongs to the documented class where the
    /// single-pass count is known to diverge from the arc-simple oracle.
    pub known_discrepancy: Option<String>,
}

/// Compare ACPATH against the oracle on one body at one level.
pub fn differential_check(body: &FunctionBody, i: OptLevel, budget: &OracleBudget) -> Verdict {
    let acpath = acpath_body_with(body, i, &AcpathConfig::default());
    let acpath_scaled = acpath_body_with(
        body,
        i,
        &AcpathConfig {
            while_return_scaling: true,
        },
    );
    let npath = npath_body(body, &NpathConfig::default());
    let cfg = build_body_cfg(body, i);
    let alpha = match count_acyclic_paths(&cfg, budget) {
        Ok(v) => Some(v),
        Err(OracleError::BudgetExceeded(_)) => None,
    };
    let controlled = is_controlled(body).controlled;
    let matched = alpha.as_ref().map(|a| *a == acpath);
    let matched_scaled = alpha.as_ref().map(|a| *a == acpath_scaled);
    Verdict {
        acpath,
        acpath_scaled,
        npath,
        alpha,
        controlled,
        matched,
        matched_scaled,
        known_discrepancy: known_discrepancy(body, i),
    }
}

/// The documented divergence classes of the single-pass count on
/// *controlled* bodies:
///
/// - a `while`/`for` guard with a true-path count other than one combined
///   with a return or outward goto in the loop body (those paths are not
///   rescaled by the guard), and
/// - a `do`-`while` whose body can leave the loop early (break, continue,
///   return, outward goto): re-entering the body over the back edge can
///   reach the early exit on arcs the first pass left unused, which the
///   single pass does not model.
pub fn known_discrepancy(body: &FunctionBody, i: OptLevel) -> Option<String> {
    let scan = LoopScan::of(&body.body);
    for lp in &scan.loops {
        match lp.kind {
            LoopKind::While => {
                let tp = expr_paths(&lp.guard, i).tp;
                if tp != BigUint::from(1u32) && (lp.has_return || lp.has_outward_goto) {
                    return Some(format!(
                        "while guard with {tp} true-paths over a body with early returns or outward gotos"
                    ));
                }
            }
            LoopKind::DoWhile => {
                if lp.has_return
                    || lp.has_outward_goto
                    || lp.has_own_break
                    || lp.has_own_continue
                {
                    return Some(
                        "do-while body with an early exit reachable over the back edge"
                            .to_string(),
                    );
                }
            }
        }
    }
    None
}

enum LoopKind {
    While,
    DoWhile,
}

struct LoopFacts {
    kind: LoopKind,
    guard: Expr,
    has_return: bool,
    has_outward_goto: bool,
    has_own_break: bool,
    has_own_continue: bool,
}

struct LoopScan {
    loops: Vec<LoopFacts>,
}

impl LoopScan {
    fn of(body: &Stmt) -> LoopScan {
        let mut labels: BTreeMap<Ident, usize> = BTreeMap::new();
        body.walk(&mut |s| {
            if let StmtKind::Labeled(Label::Id(id), _) = &s.kind {
                labels.insert(id.clone(), s.order);
            }
        });
        let mut loops = Vec::new();
        body.walk(&mut |s| {
            let (kind, guard, inner) = match &s.kind {
                StmtKind::While(g, inner) => (LoopKind::While, g.clone(), inner),
                StmtKind::For(_, g, _, inner) => (LoopKind::While, g.clone(), inner),
                StmtKind::DoWhile(inner, g) => (LoopKind::DoWhile, g.clone(), inner),
                _ => return,
            };
            let start = s.order;
            let end = s.max_order();
            let mut has_return = false;
            let mut has_outward_goto = false;
            inner.walk(&mut |n| match &n.kind {
                StmtKind::Return | StmtKind::ReturnExpr(_) => has_return = true,
                StmtKind::Goto(id) => {
                    if let Some(&target) = labels.get(id) {
                        if !(start..=end).contains(&target) {
                            has_outward_goto = true;
                        }
                    }
                }
                _ => {}
            });
            loops.push(LoopFacts {
                kind,
                guard,
                has_return,
                has_outward_goto,
                has_own_break: binds_break(inner),
                has_own_continue: binds_continue(inner),
            });
        });
        LoopScan { loops }
    }
}

fn binds_break(s: &Stmt) -> bool {
    match &s.kind {
        StmtKind::Break => true,
        StmtKind::Switch(_, _)
        | StmtKind::While(_, _)
        | StmtKind::DoWhile(_, _)
        | StmtKind::For(_, _, _, _) => false,
        _ => s.children().iter().any(|c| binds_break(c)),
    }
}

fn binds_continue(s: &Stmt) -> bool {
    match &s.kind {
        StmtKind::Continue => true,
        StmtKind::While(_, _) | StmtKind::DoWhile(_, _) | StmtKind::For(_, _, _, _) => false,
        _ => s.children().iter().any(|c| binds_continue(c)),
    }
}

/// Regenerate with shrinking statement budgets and return the smallest
/// configuration (and body) that still fails the differential check.
pub fn shrink_mismatch(
    config: &GenConfig,
    i: OptLevel,
    budget: &OracleBudget,
) -> Option<(GenConfig, FunctionBody)> {
    let mut found = None;
    for max_stmts in 1..=config.max_stmts {
        let candidate_cfg = GenConfig {
            max_stmts,
            ..config.clone()
        };
        let body = gen_controlled_body(&candidate_cfg);
        let v = differential_check(&body, i, budget);
        if v.matched == Some(false) && v.known_discrepancy.is_none() {
            found = Some((candidate_cfg, body));
            break;
        }
    }
    found
}

/// Linearity helper: scale an [`ApcResult`] componentwise.
pub fn scale_result(r: &ApcResult, k: &PathCount) -> ApcResult {
    ApcResult {
        ft: &r.ft * k,
        bp: &r.bp * k,
        cp: &r.cp * k,
        rp: &r.rp * k,
        gt: r.gt.clone().scale(k),
    }
}

/// The goto-count domain a standalone statement needs: its own labels.
pub fn stmt_label_domain(s: &Stmt) -> BTreeSet<Ident> {
    crate::ast::collect_labels_of(s)
}

/// Build a [`GotoCounts`] with the given value on every label of `s`.
pub fn uniform_gotos(s: &Stmt, v: &PathCount) -> GotoCounts {
    let mut gt = GotoCounts::zeros(&stmt_label_domain(s));
    for id in stmt_label_domain(s) {
        gt = gt.set(&id, v.clone());
    }
    gt
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::ToPrimitive;

    fn diamond() -> Digraph {
        Digraph {
            n: 4,
            arcs: [(0, 1), (0, 2), (1, 3), (2, 3)].into(),
            entry: 0,
        }
    }

    #[test]
    fn single_node_embedding() {
        let g = Digraph {
            n: 1,
            arcs: BTreeSet::new(),
            entry: 0,
        };
        let b = embed_graph(&g).unwrap();
        assert!(validate_body(&b).is_empty());
        let budget = OracleBudget::default();
        let alpha = count_acyclic_paths(&build_body_cfg(&b, OptLevel::O0), &budget).unwrap();
        assert_eq!(alpha.to_u64().unwrap(), 1);
    }

    #[test]
    fn diamond_embedding_preserves_alpha() {
        let g = diamond();
        let budget = OracleBudget::default();
        let want = count_acyclic_paths(&g.to_cfg(), &budget).unwrap();
        assert_eq!(want.to_u64().unwrap(), 2);
        let b = embed_graph(&g).unwrap();
        for lvl in OptLevel::ALL {
            let have = count_acyclic_paths(&build_body_cfg(&b, lvl), &budget).unwrap();
            assert_eq!(have, want, "level {lvl}");
        }
    }

    #[test]
    fn no_exit_graphs_are_rejected() {
        let g = Digraph {
            n: 2,
            arcs: [(0, 1), (1, 0)].into(),
            entry: 0,
        };
        assert!(matches!(
            embed_graph(&g),
            Err(EmbedError::NoReachableExit)
        ));
    }

    #[test]
    fn generator_is_deterministic_and_controlled() {
        let cfg = GenConfig {
            seed: 1,
            ..GenConfig::default()
        };
        let a = gen_controlled_body(&cfg);
        let b = gen_controlled_body(&cfg);
        assert_eq!(format!("{a:?}"), format!("{b:?}"));
        assert!(validate_body(&a).is_empty());
        assert!(is_controlled(&a).controlled);
    }

    #[test]
    fn goto_toggle_is_respected() {
        for seed in 0..40 {
            let cfg = GenConfig {
                seed,
                gotos: false,
                ..GenConfig::default()
            };
            let b = gen_controlled_body(&cfg);
            let mut has_goto = false;
            b.body.walk(&mut |s| {
                if matches!(s.kind, StmtKind::Goto(_)) {
                    has_goto = true;
                }
            });
            assert!(!has_goto, "seed {seed} produced a goto");
        }
    }

    #[test]
    fn differential_on_known_bodies() {
        use crate::parser::{parse_translation_unit, SourceFile};
        let src = "void f(int a, int b, int c, int d) { while (a || (b && c && d)) { ; } }";
        let (fs, _) = parse_translation_unit(&SourceFile::new("t.c", src));
        let v = differential_check(&fs[0], OptLevel::O0, &OracleBudget::default());
        assert_eq!(v.acpath.to_u64().unwrap(), 6);
        assert_eq!(v.alpha.as_ref().unwrap().to_u64().unwrap(), 6);
        assert_eq!(v.matched, Some(true));
        assert!(v.controlled);
        assert!(v.known_discrepancy.is_none());
    }

    #[test]
    fn known_discrepancy_classes_are_flagged() {
        use crate::parser::{parse_translation_unit, SourceFile};
        let src = "void f(int a, int z) { while (a || z) { return; } }";
        let (fs, _) = parse_translation_unit(&SourceFile::new("t.c", src));
        let v = differential_check(&fs[0], OptLevel::O0, &OracleBudget::default());
        assert!(v.controlled);
        assert_eq!(v.matched, Some(false));
        assert!(v.known_discrepancy.is_some());
        // The rescaled variant tracks the oracle here.
        assert_eq!(v.matched_scaled, Some(true));

        let src = "void f(int a, int c) { do { if (a) break; } while (c); }";
        let (fs, _) = parse_translation_unit(&SourceFile::new("t.c", src));
        let v = differential_check(&fs[0], OptLevel::O0, &OracleBudget::default());
        assert!(v.controlled);
        assert_eq!(v.matched, Some(false));
        assert!(v.known_discrepancy.is_some());
    }
}
