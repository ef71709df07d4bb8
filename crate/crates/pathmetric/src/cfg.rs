//! Reference control-flow-graph construction.
//!
//! The construction is syntax-directed and parameterized by an
//! [`OptLevel`] that decides how much constant folding the guards see:
//! level 0 folds nothing, level 1 folds integer literals, level 2 folds any
//! integer constant expression. Node ids are allocated counting upward
//! while the builder walks the program back-to-front, so a *larger* id
//! means a *textually earlier* origin. That property is load-bearing for
//! the controlled-body checker and is covered by tests.
//!
//! Nodes reached only through folded-away branches are kept in the node
//! set; the oracle and the DOT renderer operate on the reachable subgraph.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::ast::{Expr, FunctionBody, Ident, Label, Stmt, StmtKind};

/// Guard-folding level: 0 = none, 1 = integer literals, 2 = integer
/// constant expressions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum OptLevel {
    O0,
    O1,
    O2,
}

impl OptLevel {
    pub const ALL: [OptLevel; 3] = [OptLevel::O0, OptLevel::O1, OptLevel::O2];

    pub fn from_u8(v: u8) -> Option<OptLevel> {
        match v {
            0 => Some(OptLevel::O0),
            1 => Some(OptLevel::O1),
            2 => Some(OptLevel::O2),
            _ => None,
        }
    }

    pub fn as_u8(self) -> u8 {
        match self {
            OptLevel::O0 => 0,
            OptLevel::O1 => 1,
            OptLevel::O2 => 2,
        }
    }
}

impl fmt::Display for OptLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.as_u8())
    }
}

/// Three-valued compile-time truth of a guard.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TriBool {
    False,
    True,
    Unknown,
}

pub type NodeId = u64;

/// What generated a node; `stmt` is the program-order index of the
/// generating statement.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Origin {
    Expr { stmt: usize },
    Return { stmt: usize },
    Break { stmt: usize },
    Continue { stmt: usize },
    Goto { stmt: usize, target: Ident },
    Label { stmt: usize, text: String },
    Join { stmt: usize },
    SwitchDispatch { stmt: usize },
    SwitchExit { stmt: usize },
    WhileEnter { stmt: usize },
    WhileExit { stmt: usize },
    DoWhileEnter { stmt: usize },
    DoWhileExit { stmt: usize },
}

impl Origin {
    pub fn stmt_order(&self) -> usize {
        match self {
            Origin::Expr { stmt }
            | Origin::Return { stmt }
            | Origin::Break { stmt }
            | Origin::Continue { stmt }
            | Origin::Goto { stmt, .. }
            | Origin::Label { stmt, .. }
            | Origin::Join { stmt }
            | Origin::SwitchDispatch { stmt }
            | Origin::SwitchExit { stmt }
            | Origin::WhileEnter { stmt }
            | Origin::WhileExit { stmt }
            | Origin::DoWhileEnter { stmt }
            | Origin::DoWhileExit { stmt } => *stmt,
        }
    }
}

/// Region boundary markers. Markers are metadata on existing nodes; they
/// never add arcs and never affect path counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MarkerKind {
    SwitchEnter,
    SwitchExit,
    WhileEnter,
    WhileExit,
    DoWhileEnter,
    DoWhileExit,
}

/// A control flow graph: node set, arc set, entry node, plus per-node
/// origin metadata and region markers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cfg {
    pub nodes: BTreeSet<NodeId>,
    pub arcs: BTreeSet<(NodeId, NodeId)>,
    pub entry: NodeId,
    pub origin: BTreeMap<NodeId, Origin>,
    pub markers: Vec<(NodeId, MarkerKind)>,
}

impl Cfg {
    pub fn successors(&self, n: NodeId) -> impl Iterator<Item = NodeId> + '_ {
        self.arcs
            .range((n, NodeId::MIN)..=(n, NodeId::MAX))
            .map(|&(_, m)| m)
    }

    pub fn has_successor(&self, n: NodeId) -> bool {
        self.successors(n).next().is_some()
    }

    /// Nodes reachable from the entry.
    pub fn reachable_nodes(&self) -> BTreeSet<NodeId> {
        let mut seen = BTreeSet::new();
        let mut queue = VecDeque::new();
        if self.nodes.contains(&self.entry) {
            seen.insert(self.entry);
            queue.push_back(self.entry);
        }
        while let Some(n) = queue.pop_front() {
            for m in self.successors(n) {
                if seen.insert(m) {
                    queue.push_back(m);
                }
            }
        }
        seen
    }

    /// The reachable subgraph, with origins and markers restricted to it.
    pub fn reachable_subgraph(&self) -> Cfg {
        let keep = self.reachable_nodes();
        Cfg {
            nodes: keep.clone(),
            arcs: self
                .arcs
                .iter()
                .filter(|(a, b)| keep.contains(a) && keep.contains(b))
                .copied()
                .collect(),
            entry: self.entry,
            origin: self
                .origin
                .iter()
                .filter(|(n, _)| keep.contains(n))
                .map(|(n, o)| (*n, o.clone()))
                .collect(),
            markers: self
                .markers
                .iter()
                .filter(|(n, _)| keep.contains(n))
                .cloned()
                .collect(),
        }
    }

    /// Successor-free nodes reachable from the entry.
    pub fn exit_nodes(&self) -> BTreeSet<NodeId> {
        self.reachable_nodes()
            .into_iter()
            .filter(|&n| !self.has_successor(n))
            .collect()
    }

    /// Graphviz rendering of the reachable subgraph: entry drawn as a
    /// diamond, exits double-circled, nodes and arcs in ascending order.
    pub fn to_dot(&self, name: &str) -> String {
        let g = self.reachable_subgraph();
        let exits = g.exit_nodes();
        let mut out = String::new();
        out.push_str(&format!("digraph \"{name}\" {{\n"));
        for &n in &g.nodes {
            let shape = if n == g.entry {
                "diamond"
            } else if exits.contains(&n) {
                "doublecircle"
            } else {
                "ellipse"
            };
            out.push_str(&format!("  {n} [shape={shape}];\n"));
        }
        for &(a, b) in &g.arcs {
            out.push_str(&format!("  {a} -> {b};\n"));
        }
        out.push_str("}\n");
        out
    }
}

// ---------------------------------------------------------------------------
// Integer constant expressions
// ---------------------------------------------------------------------------

const MAX_SHIFT: u64 = 4096;

/// Evaluate `e` as an integer constant expression. `Some(v)` exactly when
/// the expression is built from literals with pure integer operators
/// (arithmetic, relational, bitwise, the logical and conditional forms,
/// comma, parentheses, unary `!`/`+`/`-`, casts to `int`) and evaluation
/// does not divide by zero. Logical and conditional operators
/// short-circuit, with C truthiness.
pub fn eval_ice(e: &Expr) -> Option<BigInt> {
    fn truth(v: &BigInt) -> bool {
        !v.is_zero()
    }
    match e {
        Expr::IntLit(v) => Some(v.clone()),
        Expr::Ice(s) | Expr::Paren(s) | Expr::UnaryPlus(s) => eval_ice(s),
        Expr::Not(s) => Some(if truth(&eval_ice(s)?) {
            BigInt::zero()
        } else {
            BigInt::one()
        }),
        Expr::UnaryMinus(s) => Some(-eval_ice(s)?),
        Expr::Cast(ty, s) if ty == "int" => eval_ice(s),
        Expr::And(a, b) => {
            let a = eval_ice(a)?;
            if !truth(&a) {
                return Some(BigInt::zero());
            }
            Some(BigInt::from(truth(&eval_ice(b)?) as u8))
        }
        Expr::Or(a, b) => {
            let a = eval_ice(a)?;
            if truth(&a) {
                return Some(BigInt::one());
            }
            Some(BigInt::from(truth(&eval_ice(b)?) as u8))
        }
        Expr::Comma(a, b) => {
            eval_ice(a)?;
            eval_ice(b)
        }
        Expr::BinCond(a, b) => {
            let a = eval_ice(a)?;
            if truth(&a) {
                Some(a)
            } else {
                eval_ice(b)
            }
        }
        Expr::Cond(g, t, f) => {
            if truth(&eval_ice(g)?) {
                eval_ice(t)
            } else {
                eval_ice(f)
            }
        }
        Expr::OtherBinary(op, a, b) => {
            let a = eval_ice(a)?;
            let b = eval_ice(b)?;
            let bool_int = |p: bool| Some(BigInt::from(p as u8));
            match op.as_str() {
                "+" => Some(a + b),
                "-" => Some(a - b),
                "*" => Some(a * b),
                "/" if !b.is_zero() => Some(a / b),
                "%" if !b.is_zero() => Some(a % b),
                "<<" | ">>" => {
                    if b.is_negative() {
                        return None;
                    }
                    let k = b.to_u64().filter(|&k| k <= MAX_SHIFT)?;
                    Some(if op == "<<" { a << k } else { a >> k })
                }
                "<" => bool_int(a < b),
                ">" => bool_int(a > b),
                "<=" => bool_int(a <= b),
                ">=" => bool_int(a >= b),
                "==" => bool_int(a == b),
                "!=" => bool_int(a != b),
                "&" => Some(a & b),
                "|" => Some(a | b),
                "^" => Some(a ^ b),
                _ => None,
            }
        }
        _ => None,
    }
}

/// Wrap every maximal non-literal constant subtree in [`Expr::Ice`]. The
/// analyses detect constants with [`eval_ice`] either way; the marker makes
/// the classification explicit in the tree.
pub fn attach_ice_markers(e: Expr) -> Expr {
    if !matches!(e, Expr::IntLit(_) | Expr::Ice(_)) && eval_ice(&e).is_some() {
        return Expr::Ice(Box::new(e));
    }
    let wrap = |b: Box<Expr>| Box::new(attach_ice_markers(*b));
    match e {
        Expr::Not(s) => Expr::Not(wrap(s)),
        Expr::UnaryPlus(s) => Expr::UnaryPlus(wrap(s)),
        Expr::UnaryMinus(s) => Expr::UnaryMinus(wrap(s)),
        Expr::Paren(s) => Expr::Paren(wrap(s)),
        Expr::Cast(ty, s) => Expr::Cast(ty, wrap(s)),
        Expr::OtherUnary(op, s) => Expr::OtherUnary(op, wrap(s)),
        Expr::And(a, b) => Expr::And(wrap(a), wrap(b)),
        Expr::Or(a, b) => Expr::Or(wrap(a), wrap(b)),
        Expr::Comma(a, b) => Expr::Comma(wrap(a), wrap(b)),
        Expr::BinCond(a, b) => Expr::BinCond(wrap(a), wrap(b)),
        Expr::OtherBinary(op, a, b) => Expr::OtherBinary(op, wrap(a), wrap(b)),
        Expr::Cond(g, t, f) => Expr::Cond(wrap(g), wrap(t), wrap(f)),
        Expr::Call(name, args) => {
            Expr::Call(name, args.into_iter().map(attach_ice_markers).collect())
        }
        other => other,
    }
}

/// Apply [`attach_ice_markers`] to every expression in a statement tree.
pub fn attach_ice_markers_stmt(s: Stmt) -> Stmt {
    let Stmt { kind, order, pos } = s;
    let kind = match kind {
        StmtKind::Expr(e) => StmtKind::Expr(attach_ice_markers(e)),
        StmtKind::Seq(a, b) => StmtKind::Seq(
            Box::new(attach_ice_markers_stmt(*a)),
            Box::new(attach_ice_markers_stmt(*b)),
        ),
        StmtKind::ReturnExpr(e) => StmtKind::ReturnExpr(attach_ice_markers(e)),
        StmtKind::IfElse(e, a, b) => StmtKind::IfElse(
            attach_ice_markers(e),
            Box::new(attach_ice_markers_stmt(*a)),
            Box::new(attach_ice_markers_stmt(*b)),
        ),
        StmtKind::If(e, a) => {
            StmtKind::If(attach_ice_markers(e), Box::new(attach_ice_markers_stmt(*a)))
        }
        StmtKind::Switch(e, a) => StmtKind::Switch(
            attach_ice_markers(e),
            Box::new(attach_ice_markers_stmt(*a)),
        ),
        StmtKind::While(e, a) => StmtKind::While(
            attach_ice_markers(e),
            Box::new(attach_ice_markers_stmt(*a)),
        ),
        StmtKind::DoWhile(a, e) => StmtKind::DoWhile(
            Box::new(attach_ice_markers_stmt(*a)),
            attach_ice_markers(e),
        ),
        StmtKind::For(i, g, u, a) => StmtKind::For(
            attach_ice_markers(i),
            attach_ice_markers(g),
            attach_ice_markers(u),
            Box::new(attach_ice_markers_stmt(*a)),
        ),
        StmtKind::Labeled(l, a) => StmtKind::Labeled(l, Box::new(attach_ice_markers_stmt(*a))),
        StmtKind::Compound(a) => StmtKind::Compound(Box::new(attach_ice_markers_stmt(*a))),
        other => other,
    };
    Stmt { kind, order, pos }
}

/// Compile-time truth of a guard at level `i`: literal truth at level 1,
/// constant-expression truth at level 2, unknown otherwise.
pub fn tv(e: &Expr, i: OptLevel) -> TriBool {
    let known = |v: BigInt| {
        if v.is_zero() {
            TriBool::False
        } else {
            TriBool::True
        }
    };
    match i {
        OptLevel::O0 => TriBool::Unknown,
        OptLevel::O1 => match e {
            Expr::IntLit(v) => known(v.clone()),
            _ => TriBool::Unknown,
        },
        OptLevel::O2 => match eval_ice(e) {
            Some(v) => known(v),
            None => TriBool::Unknown,
        },
    }
}

/// Whether the constant-leaf construction applies to `e`: an integer
/// literal or a (possibly marked) integer constant expression.
pub fn is_constant_leaf(e: &Expr) -> bool {
    eval_ice(e).is_some()
}

// ---------------------------------------------------------------------------
// Construction
// ---------------------------------------------------------------------------

/// Label keys: all `case` labels collapse onto one key, `default` onto
/// another, identifier labels keep their name.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LabelKey {
    Case,
    Default,
    Id(Ident),
}

/// Multimap from label keys to the nodes carrying those labels.
pub type LabelMultimap = Vec<(LabelKey, NodeId)>;

/// One entry per `goto` statement node, keyed by the target identifier.
pub type GotoMap = Vec<(Ident, NodeId)>;

/// Placeholder ids live far above every real node id; they are substituted
/// with the real target before a loop's subgraph is handed upward.
const PLACEHOLDER_BASE: NodeId = 1 << 62;

#[derive(Debug, Default, Clone)]
struct Sub {
    nodes: BTreeSet<NodeId>,
    arcs: BTreeSet<(NodeId, NodeId)>,
    entry: NodeId,
    origin: BTreeMap<NodeId, Origin>,
    markers: Vec<(NodeId, MarkerKind)>,
    labels: LabelMultimap,
    gotos: GotoMap,
}

impl Sub {
    fn leaf(entry: NodeId) -> Sub {
        Sub {
            nodes: [entry].into(),
            entry,
            ..Sub::default()
        }
    }

    fn absorb(&mut self, other: Sub) {
        self.nodes.extend(other.nodes);
        self.arcs.extend(other.arcs);
        self.origin.extend(other.origin);
        self.markers.extend(other.markers);
        self.labels.extend(other.labels);
        self.gotos.extend(other.gotos);
    }

    fn substitute(&mut self, placeholder: NodeId, actual: NodeId) {
        if self.nodes.remove(&placeholder) {
            self.nodes.insert(actual);
        }
        let hits: Vec<_> = self
            .arcs
            .iter()
            .filter(|&&(a, b)| a == placeholder || b == placeholder)
            .copied()
            .collect();
        for (a, b) in hits {
            self.arcs.remove(&(a, b));
            let a = if a == placeholder { actual } else { a };
            let b = if b == placeholder { actual } else { b };
            self.arcs.insert((a, b));
        }
        if self.entry == placeholder {
            self.entry = actual;
        }
    }
}

struct Builder {
    level: OptLevel,
    next_placeholder: NodeId,
}

impl Builder {
    fn new(level: OptLevel) -> Builder {
        Builder {
            level,
            next_placeholder: PLACEHOLDER_BASE,
        }
    }

    fn placeholder(&mut self) -> NodeId {
        let p = self.next_placeholder;
        self.next_placeholder += 1;
        p
    }

    /// CFG of an expression with true-target `t` and false-target `f`,
    /// allocating fresh ids from `m`. Returns the subgraph and the next
    /// free id.
    fn expr(&mut self, e: &Expr, t: NodeId, f: NodeId, m: NodeId, stmt: usize) -> (Sub, NodeId) {
        if is_constant_leaf(e) {
            return match tv(e, self.level) {
                TriBool::True => (Sub::leaf(t), m),
                TriBool::False => (Sub::leaf(f), m),
                TriBool::Unknown => (self.branch_node(t, f, m, stmt), m + 1),
            };
        }
        match e {
            Expr::Var(_) => (self.branch_node(t, f, m, stmt), m + 1),
            Expr::Not(s) => self.expr(s, f, t, m, stmt),
            Expr::UnaryPlus(s) | Expr::UnaryMinus(s) | Expr::Paren(s) | Expr::Cast(_, s) => {
                self.expr(s, t, f, m, stmt)
            }
            Expr::Ice(s) => self.expr(s, t, f, m, stmt),
            Expr::OtherUnary(_, s) => {
                let mut sub = self.branch_node(t, f, m, stmt);
                let (inner, next) = self.expr(s, m, m, m + 1, stmt);
                let entry = inner.entry;
                sub.absorb(inner);
                sub.entry = entry;
                (sub, next)
            }
            Expr::And(a, b) => match tv(a, self.level) {
                TriBool::False => (Sub::leaf(f), m),
                TriBool::True => self.expr(b, t, f, m, stmt),
                TriBool::Unknown => {
                    let (sub2, m1) = self.expr(b, t, f, m, stmt);
                    let (mut sub1, m2) = self.expr(a, sub2.entry, f, m1, stmt);
                    let entry = sub1.entry;
                    sub1.absorb(sub2);
                    sub1.entry = entry;
                    (sub1, m2)
                }
            },
            Expr::Or(a, b) | Expr::BinCond(a, b) => match tv(a, self.level) {
                TriBool::True => (Sub::leaf(t), m),
                TriBool::False => self.expr(b, t, f, m, stmt),
                TriBool::Unknown => {
                    let (sub2, m1) = self.expr(b, t, f, m, stmt);
                    let (mut sub1, m2) = self.expr(a, t, sub2.entry, m1, stmt);
                    let entry = sub1.entry;
                    sub1.absorb(sub2);
                    sub1.entry = entry;
                    (sub1, m2)
                }
            },
            Expr::Comma(a, b) => {
                let (sub2, m1) = self.expr(b, t, f, m, stmt);
                let (mut sub1, m2) = self.expr(a, sub2.entry, sub2.entry, m1, stmt);
                let entry = sub1.entry;
                sub1.absorb(sub2);
                sub1.entry = entry;
                (sub1, m2)
            }
            Expr::OtherBinary(_, a, b) => {
                let mut sub = self.branch_node(t, f, m, stmt);
                let (sub2, m1) = self.expr(b, m, m, m + 1, stmt);
                let (sub1, m2) = self.expr(a, sub2.entry, sub2.entry, m1, stmt);
                let entry = sub1.entry;
                sub.absorb(sub2);
                sub.absorb(sub1);
                sub.entry = entry;
                (sub, m2)
            }
            Expr::Cond(g, a, b) => match tv(g, self.level) {
                TriBool::True => self.expr(a, t, f, m, stmt),
                TriBool::False => self.expr(b, t, f, m, stmt),
                TriBool::Unknown => {
                    let (sub2, m1) = self.expr(a, t, f, m, stmt);
                    let (sub3, m2) = self.expr(b, t, f, m1, stmt);
                    let (mut sub1, m3) = self.expr(g, sub2.entry, sub3.entry, m2, stmt);
                    let entry = sub1.entry;
                    sub1.absorb(sub2);
                    sub1.absorb(sub3);
                    sub1.entry = entry;
                    (sub1, m3)
                }
            },
            Expr::Call(_, args) => {
                // Flow passes through each argument in turn, then through a
                // fresh branch node, exactly like a chain of opaque
                // operators.
                let mut sub = self.branch_node(t, f, m, stmt);
                let mut target = m;
                let mut base = m + 1;
                for arg in args.iter().rev() {
                    let (asub, next) = self.expr(arg, target, target, base, stmt);
                    target = asub.entry;
                    base = next;
                    sub.absorb(asub);
                }
                sub.entry = target;
                (sub, base)
            }
            Expr::IntLit(_) => unreachable!("literals are constant leaves"),
        }
    }

    fn branch_node(&mut self, t: NodeId, f: NodeId, m: NodeId, stmt: usize) -> Sub {
        let mut sub = Sub::leaf(m);
        sub.nodes.insert(t);
        sub.nodes.insert(f);
        sub.arcs.insert((m, t));
        sub.arcs.insert((m, f));
        sub.origin.insert(m, Origin::Expr { stmt });
        sub
    }

    fn label(&mut self, l: &Label, t: NodeId, m: NodeId, stmt: usize) -> (Sub, NodeId) {
        let mut sub = Sub::leaf(m);
        sub.nodes.insert(t);
        sub.arcs.insert((m, t));
        let (key, text) = match l {
            Label::Case(v) => (LabelKey::Case, format!("case {v}")),
            Label::Default => (LabelKey::Default, "default".to_string()),
            Label::Id(id) => (LabelKey::Id(id.clone()), format!("{id}:")),
        };
        sub.origin.insert(m, Origin::Label { stmt, text });
        sub.labels.push((key, m));
        (sub, m + 1)
    }

    fn stmt(
        &mut self,
        s: &Stmt,
        t: NodeId,
        tb: Option<NodeId>,
        tc: Option<NodeId>,
        m: NodeId,
    ) -> (Sub, NodeId) {
        let order = s.order;
        match &s.kind {
            StmtKind::Expr(e) => self.expr(e, t, t, m, order),
            StmtKind::Seq(s1, s2) => {
                let (sub2, m1) = self.stmt(s2, t, tb, tc, m);
                let (mut sub1, m2) = self.stmt(s1, sub2.entry, tb, tc, m1);
                let entry = sub1.entry;
                sub1.absorb(sub2);
                sub1.entry = entry;
                (sub1, m2)
            }
            StmtKind::Return => {
                let mut sub = Sub::leaf(m);
                sub.origin.insert(m, Origin::Return { stmt: order });
                (sub, m + 1)
            }
            StmtKind::ReturnExpr(e) => {
                let mut ret = Sub::leaf(m);
                ret.origin.insert(m, Origin::Return { stmt: order });
                let (esub, m1) = self.expr(e, m, m, m + 1, order);
                let entry = esub.entry;
                ret.absorb(esub);
                ret.entry = entry;
                (ret, m1)
            }
            StmtKind::IfElse(e, s1, s2) => {
                match tv(e, self.level) {
                    TriBool::True if !has_open_labels(s2) => return self.stmt(s1, t, tb, tc, m),
                    TriBool::False if !has_open_labels(s1) => return self.stmt(s2, t, tb, tc, m),
                    _ => {}
                }
                let mut join2 = Sub::leaf(m);
                join2.nodes.insert(t);
                join2.arcs.insert((m, t));
                join2.origin.insert(m, Origin::Join { stmt: order });
                let (sub2, m1) = self.stmt(s2, m, tb, tc, m + 1);
                let mut join1 = Sub::leaf(m1);
                join1.nodes.insert(t);
                join1.arcs.insert((m1, t));
                join1.origin.insert(m1, Origin::Join { stmt: order });
                let (sub1, m2) = self.stmt(s1, m1, tb, tc, m1 + 1);
                let (esub, m3) = self.expr(e, sub1.entry, sub2.entry, m2, order);
                let mut sub = esub;
                let entry = sub.entry;
                sub.absorb(join2);
                sub.absorb(join1);
                sub.absorb(sub1);
                sub.absorb(sub2);
                sub.entry = entry;
                (sub, m3)
            }
            StmtKind::If(e, s1) => match tv(e, self.level) {
                TriBool::True => self.stmt(s1, t, tb, tc, m),
                TriBool::False if !has_open_labels(s1) => (Sub::leaf(t), m),
                _ => {
                    let mut join = Sub::leaf(m);
                    join.nodes.insert(t);
                    join.arcs.insert((m, t));
                    join.origin.insert(m, Origin::Join { stmt: order });
                    let (sub1, m1) = self.stmt(s1, m, tb, tc, m + 1);
                    let (esub, m2) = self.expr(e, sub1.entry, t, m1, order);
                    let mut sub = esub;
                    let entry = sub.entry;
                    sub.absorb(join);
                    sub.absorb(sub1);
                    sub.entry = entry;
                    (sub, m2)
                }
            },
            StmtKind::Switch(e, body) => {
                let mut exit = Sub::leaf(m);
                exit.nodes.insert(t);
                exit.arcs.insert((m, t));
                exit.origin.insert(m, Origin::SwitchExit { stmt: order });
                exit.markers.push((m, MarkerKind::SwitchExit));
                let (bsub, m1) = self.stmt(body, m, Some(m), tc, m + 1);
                let mut dispatch = Sub::leaf(m1);
                dispatch
                    .origin
                    .insert(m1, Origin::SwitchDispatch { stmt: order });
                dispatch.markers.push((m1, MarkerKind::SwitchEnter));
                let mut has_default = false;
                for (key, n) in &bsub.labels {
                    match key {
                        LabelKey::Case => {
                            dispatch.arcs.insert((m1, *n));
                        }
                        LabelKey::Default => {
                            has_default = true;
                            dispatch.arcs.insert((m1, *n));
                        }
                        LabelKey::Id(_) => {}
                    }
                }
                if !has_default {
                    dispatch.arcs.insert((m1, m));
                }
                let (esub, m2) = self.expr(e, m1, m1, m1 + 1, order);
                let mut sub = esub;
                let entry = sub.entry;
                sub.absorb(exit);
                sub.absorb(dispatch);
                let kept_labels: LabelMultimap = bsub
                    .labels
                    .iter()
                    .filter(|(k, _)| matches!(k, LabelKey::Id(_)))
                    .cloned()
                    .collect();
                let mut bsub = bsub;
                bsub.labels = kept_labels;
                sub.absorb(bsub);
                sub.entry = entry;
                (sub, m2)
            }
            StmtKind::While(e, body) => {
                let guard_entry = self.placeholder();
                let mut back = Sub::leaf(m);
                back.origin.insert(m, Origin::WhileExit { stmt: order });
                back.markers.push((m, MarkerKind::WhileExit));
                let (bsub, m1) = self.stmt(body, m, Some(t), Some(guard_entry), m + 1);
                let mut enter = Sub::leaf(m1);
                enter.origin.insert(m1, Origin::WhileEnter { stmt: order });
                enter.markers.push((m1, MarkerKind::WhileEnter));
                enter.arcs.insert((m1, bsub.entry));
                let (esub, m2) = self.expr(e, m1, t, m1 + 1, order);
                let s_e = esub.entry;
                back.arcs.insert((m, s_e));
                let mut sub = esub;
                sub.absorb(back);
                sub.absorb(enter);
                sub.absorb(bsub);
                sub.entry = s_e;
                sub.substitute(guard_entry, s_e);
                (sub, m2)
            }
            StmtKind::DoWhile(body, e) => {
                let back_edge = self.placeholder();
                let (esub, m1) = self.expr(e, back_edge, t, m, order);
                let s_e = esub.entry;
                let mut join = Sub::leaf(m1);
                join.origin.insert(m1, Origin::DoWhileExit { stmt: order });
                join.markers.push((m1, MarkerKind::DoWhileExit));
                join.arcs.insert((m1, s_e));
                let (bsub, m2) = self.stmt(body, m1, Some(t), Some(s_e), m1 + 1);
                let mut back = Sub::leaf(m2);
                back.origin.insert(m2, Origin::DoWhileEnter { stmt: order });
                back.markers.push((m2, MarkerKind::DoWhileEnter));
                back.arcs.insert((m2, bsub.entry));
                let entry = bsub.entry;
                let mut sub = esub;
                sub.absorb(join);
                sub.absorb(bsub);
                sub.absorb(back);
                sub.entry = entry;
                sub.substitute(back_edge, m2);
                (sub, m2 + 1)
            }
            StmtKind::For(init, guard, step, body) => {
                let desugared = desugar_for(init, guard, step, body, order, s.pos);
                self.stmt(&desugared, t, tb, tc, m)
            }
            StmtKind::Break => {
                let target = tb.expect("break outside loop/switch; validate_body first");
                let mut sub = Sub::leaf(m);
                sub.nodes.insert(target);
                sub.arcs.insert((m, target));
                sub.origin.insert(m, Origin::Break { stmt: order });
                (sub, m + 1)
            }
            StmtKind::Continue => {
                let target = tc.expect("continue outside loop; validate_body first");
                let mut sub = Sub::leaf(m);
                sub.nodes.insert(target);
                sub.arcs.insert((m, target));
                sub.origin.insert(m, Origin::Continue { stmt: order });
                (sub, m + 1)
            }
            StmtKind::Goto(id) => {
                // The jump arc is added once the whole body is assembled;
                // a goto node never falls through.
                let mut sub = Sub::leaf(m);
                sub.origin.insert(
                    m,
                    Origin::Goto {
                        stmt: order,
                        target: id.clone(),
                    },
                );
                sub.gotos.push((id.clone(), m));
                (sub, m + 1)
            }
            StmtKind::Labeled(l, inner) => {
                let (isub, m1) = self.stmt(inner, t, tb, tc, m);
                let (mut lsub, m2) = self.label(l, isub.entry, m1, order);
                let entry = lsub.entry;
                lsub.absorb(isub);
                lsub.entry = entry;
                (lsub, m2)
            }
            StmtKind::Compound(inner) => self.stmt(inner, t, tb, tc, m),
            StmtKind::Other | StmtKind::Empty => (Sub::leaf(t), m),
        }
    }
}

/// `for (init; guard; step) body` rewritten as
/// `init; while (guard) { body step; }`. Synthesized statements inherit the
/// `for` node's order and position.
pub(crate) fn desugar_for(
    init: &Expr,
    guard: &Expr,
    step: &Expr,
    body: &Stmt,
    order: usize,
    pos: crate::ast::Pos,
) -> Stmt {
    let mk = |kind| Stmt {
        kind,
        order,
        pos,
    };
    let step_stmt = mk(StmtKind::Expr(step.clone()));
    let inner = mk(StmtKind::Seq(Box::new(body.clone()), Box::new(step_stmt)));
    let loop_body = mk(StmtKind::Compound(Box::new(inner)));
    let while_stmt = mk(StmtKind::While(guard.clone(), Box::new(loop_body)));
    mk(StmtKind::Seq(
        Box::new(mk(StmtKind::Expr(init.clone()))),
        Box::new(while_stmt),
    ))
}

/// True when the statement contains a label that an enclosing construct
/// could dispatch or jump to: any identifier label, or a `case`/`default`
/// not captured by a switch inside `s`.
pub fn has_open_labels(s: &Stmt) -> bool {
    match &s.kind {
        StmtKind::Labeled(_, _) => true,
        StmtKind::Switch(_, inner) => contains_id_label(inner),
        _ => s.children().iter().any(|c| has_open_labels(c)),
    }
}

fn contains_id_label(s: &Stmt) -> bool {
    let mut found = false;
    s.walk(&mut |n| {
        if let StmtKind::Labeled(Label::Id(_), _) = &n.kind {
            found = true;
        }
    });
    found
}

fn finish(sub: Sub) -> Cfg {
    Cfg {
        nodes: sub.nodes,
        arcs: sub.arcs,
        entry: sub.entry,
        origin: sub.origin,
        markers: sub.markers,
    }
}

/// CFG of a bare expression with explicit true/false targets.
/// Requires `m > max(t, f)`.
pub fn build_expr_cfg(
    e: &Expr,
    t: NodeId,
    f: NodeId,
    m: NodeId,
    level: OptLevel,
) -> (Cfg, NodeId) {
    assert!(m > t.max(f), "fresh ids must start above the targets");
    let mut b = Builder::new(level);
    let (sub, next) = b.expr(e, t, f, m, 0);
    (finish(sub), next)
}

/// CFG of a single label with fall-through target `t`. Requires `m > t`.
pub fn build_label_cfg(l: &Label, t: NodeId, m: NodeId) -> (Cfg, LabelMultimap, NodeId) {
    assert!(m > t, "fresh ids must start above the target");
    let mut b = Builder::new(OptLevel::O0);
    let (mut sub, next) = b.label(l, t, m, 0);
    let labels = std::mem::take(&mut sub.labels);
    (finish(sub), labels, next)
}

/// CFG of a statement with fall-through target `t`, break target `tb` and
/// continue target `tc`. Pending goto arcs are reported through the
/// returned [`GotoMap`]; [`build_body_cfg`] resolves them.
pub fn build_stmt_cfg(
    s: &Stmt,
    t: NodeId,
    tb: Option<NodeId>,
    tc: Option<NodeId>,
    m: NodeId,
    level: OptLevel,
) -> (Cfg, LabelMultimap, GotoMap, NodeId) {
    let mut b = Builder::new(level);
    let (mut sub, next) = b.stmt(s, t, tb, tc, m);
    let labels = std::mem::take(&mut sub.labels);
    let gotos = std::mem::take(&mut sub.gotos);
    (finish(sub), labels, gotos, next)
}

/// Reference CFG of a whole function body: the statement CFG rooted at the
/// normal-completion exit node 0, plus one arc per goto/label pair.
pub fn build_body_cfg(body: &FunctionBody, level: OptLevel) -> Cfg {
    let mut b = Builder::new(level);
    let (mut sub, _next) = b.stmt(&body.body, 0, None, None, 1);
    for (id, gnode) in sub.gotos.clone() {
        for (key, lnode) in sub.labels.clone() {
            if key == LabelKey::Id(id.clone()) {
                sub.arcs.insert((gnode, lnode));
            }
        }
    }
    finish(sub)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ast::{seq, FunctionBody, Pos};
    use crate::parser::{parse_expression, parse_translation_unit, SourceFile};

    fn body(src: &str) -> FunctionBody {
        let (fs, errs) = parse_translation_unit(&SourceFile::new("t.c", src));
        assert!(errs.is_empty(), "{errs:?}");
        fs.into_iter().next().unwrap()
    }

    #[test]
    fn ice_evaluation() {
        assert_eq!(eval_ice(&parse_expression("3+4").unwrap()), Some(7.into()));
        assert_eq!(eval_ice(&parse_expression("0").unwrap()), Some(0.into()));
        assert_eq!(eval_ice(&parse_expression("x+1").unwrap()), None);
        assert_eq!(eval_ice(&parse_expression("7/0").unwrap()), None);
        assert_eq!(eval_ice(&parse_expression("1 ? 2 : x").unwrap()), Some(2.into()));
        assert_eq!(eval_ice(&parse_expression("-(2*3) < 0").unwrap()), Some(1.into()));
        assert_eq!(eval_ice(&parse_expression("(int)5").unwrap()), Some(5.into()));
        assert_eq!(eval_ice(&parse_expression("(void)5").unwrap()), None);
        assert_eq!(eval_ice(&parse_expression("f(1)").unwrap()), None);
    }

    #[test]
    fn tv_levels() {
        let zero = parse_expression("0").unwrap();
        let sum = parse_expression("3+4").unwrap();
        assert_eq!(tv(&zero, OptLevel::O0), TriBool::Unknown);
        assert_eq!(tv(&zero, OptLevel::O1), TriBool::False);
        assert_eq!(tv(&sum, OptLevel::O1), TriBool::Unknown);
        assert_eq!(tv(&sum, OptLevel::O2), TriBool::True);
    }

    #[test]
    fn variable_expr_cfg() {
        let (cfg, next) = build_expr_cfg(&Expr::var("x"), 0, 1, 2, OptLevel::O0);
        assert_eq!(cfg.entry, 2);
        assert_eq!(cfg.nodes, [0, 1, 2].into());
        assert_eq!(cfg.arcs, [(2, 0), (2, 1)].into());
        assert_eq!(next, 3);
    }

    #[test]
    fn constant_expr_cfg_folds_at_level_one() {
        let (cfg, next) = build_expr_cfg(&Expr::lit(1), 0, 1, 2, OptLevel::O1);
        assert_eq!(cfg.entry, 0);
        assert_eq!(cfg.nodes, [0].into());
        assert!(cfg.arcs.is_empty());
        assert_eq!(next, 2);
    }

    #[test]
    fn label_cfg_records_multimap_entries() {
        use num_bigint::BigInt;
        let (cfg, labels, next) = build_label_cfg(&Label::Case(BigInt::from(1)), 3, 9);
        assert_eq!(cfg.arcs, [(9, 3)].into());
        assert_eq!(labels, vec![(LabelKey::Case, 9)]);
        assert_eq!(next, 10);

        let (_, labels, _) = build_label_cfg(&Label::Default, 3, 9);
        assert_eq!(labels, vec![(LabelKey::Default, 9)]);
        let (_, labels, _) = build_label_cfg(&Label::Id("l1".into()), 3, 9);
        assert_eq!(labels, vec![(LabelKey::Id("l1".into()), 9)]);
    }

    #[test]
    fn break_stmt_cfg() {
        let s = {
            let mut s = Stmt::new(StmtKind::Break);
            s.order = 0;
            s
        };
        let (cfg, labels, gotos, next) =
            build_stmt_cfg(&s, 3, Some(7), None, 9, OptLevel::O0);
        assert_eq!(cfg.nodes, [7, 9].into());
        assert_eq!(cfg.arcs, [(9, 7)].into());
        assert_eq!(cfg.entry, 9);
        assert!(labels.is_empty() && gotos.is_empty());
        assert_eq!(next, 10);
    }

    #[test]
    fn goto_has_no_fallthrough_arc() {
        let s = Stmt::new(StmtKind::Goto("l1".into()));
        let (cfg, _, gotos, _) = build_stmt_cfg(&s, 3, None, None, 9, OptLevel::O0);
        assert!(cfg.arcs.is_empty());
        assert_eq!(gotos, vec![("l1".to_string(), 9)]);
    }

    #[test]
    fn empty_body_cfg_is_a_single_exit() {
        let b = body("void f() {}");
        let cfg = build_body_cfg(&b, OptLevel::O0);
        assert_eq!(cfg.nodes, [0].into());
        assert!(cfg.arcs.is_empty());
        assert_eq!(cfg.entry, 0);
    }

    /// The nested-conditional body with returns: node ids and arcs of the
    /// reachable subgraph pinned exactly.
    #[test]
    fn if_chain_cfg_matches_reference_layout() {
        let b = body(
            "int f(int a, int b, int c, int d, int e) {
                if (a && b && c) return d ? 0 : 1; else return e ? 0 : 1;
            }",
        );
        let cfg = build_body_cfg(&b, OptLevel::O0).reachable_subgraph();
        assert_eq!(cfg.entry, 13);
        assert_eq!(
            cfg.nodes,
            [13, 12, 11, 10, 9, 8, 7, 5, 4, 3, 2].into()
        );
        assert_eq!(
            cfg.arcs,
            [
                (13, 12),
                (13, 5),
                (12, 11),
                (12, 5),
                (11, 10),
                (11, 5),
                (10, 9),
                (10, 8),
                (9, 7),
                (8, 7),
                (5, 4),
                (5, 3),
                (4, 2),
                (3, 2)
            ]
            .into()
        );
        assert_eq!(cfg.exit_nodes(), [7, 2].into());
    }

    /// Cross-branch gotos: reachable subgraph pinned exactly, including the
    /// jump arcs and the absence of goto fall-through.
    #[test]
    fn cross_branch_goto_cfg_matches_reference_layout() {
        let b = body(
            "void f(int a, int c, int x) {
                if (a) goto l1; else l1: goto l2;
                while (c) x;
                l2: ;
            }",
        );
        let cfg = build_body_cfg(&b, OptLevel::O0).reachable_subgraph();
        assert_eq!(cfg.entry, 11);
        assert_eq!(cfg.nodes, [11, 10, 8, 7, 1, 0].into());
        assert_eq!(
            cfg.arcs,
            [(11, 10), (11, 8), (10, 8), (8, 7), (7, 1), (1, 0)].into()
        );
    }

    #[test]
    fn while_loop_shape() {
        let b = body("void f(int c, int x) { while (c) x; }");
        let cfg = build_body_cfg(&b, OptLevel::O0);
        // Guard 4 branches to loop-enter 3 and exit 0; enter goes to the
        // body 2; the body falls to 1 which loops back to the guard.
        assert_eq!(cfg.entry, 4);
        assert_eq!(
            cfg.arcs,
            [(4, 3), (4, 0), (3, 2), (2, 1), (1, 4)].into()
        );
        let kinds: Vec<_> = cfg.markers.iter().map(|(n, k)| (*n, *k)).collect();
        assert!(kinds.contains(&(3, MarkerKind::WhileEnter)));
        assert!(kinds.contains(&(1, MarkerKind::WhileExit)));
    }

    #[test]
    fn do_while_back_edge_resolves() {
        let b = body("void f(int c, int x) { do x; while (c); }");
        let cfg = build_body_cfg(&b, OptLevel::O0);
        // Body 3 falls to 2, 2 enters the guard 1; guard-true goes to the
        // back-edge node 4 which re-enters the body.
        assert_eq!(cfg.entry, 3);
        assert_eq!(
            cfg.arcs,
            [(3, 2), (2, 1), (1, 4), (1, 0), (4, 3)].into()
        );
        assert!(cfg.nodes.iter().all(|&n| n < PLACEHOLDER_BASE));
    }

    #[test]
    fn dead_guard_branches_fold_per_level() {
        let b = body("void f(int x) { while (0) x; }");
        let l0 = build_body_cfg(&b, OptLevel::O0);
        let l1 = build_body_cfg(&b, OptLevel::O1);
        let l2 = build_body_cfg(&b, OptLevel::O2);
        assert!(l0.reachable_nodes().len() > l1.reachable_nodes().len());
        assert_eq!(l1.reachable_subgraph().nodes, [0].into());
        assert_eq!(l1.nodes.len(), l2.nodes.len());
        assert!(l1.nodes.len() <= l0.nodes.len());
    }

    #[test]
    fn if_folding_respects_labels_in_dead_branch() {
        // The dead else-branch holds a goto target, so it must be kept.
        let b = body(
            "void f(int x) { if (1) goto l2; else { l2: ; } }",
        );
        let with_label = build_body_cfg(&b, OptLevel::O1);
        let reach = with_label.reachable_subgraph();
        assert!(reach.nodes.len() > 1, "dead branch with label was dropped");

        let b2 = body("void f(int x) { if (1) x; else y; }");
        let folded = build_body_cfg(&b2, OptLevel::O1);
        // Fully folded: just the then-branch node and the exit.
        assert_eq!(folded.reachable_subgraph().nodes.len(), 2);
    }

    #[test]
    fn construction_is_deterministic() {
        let b = body("int f(int a, int b) { while (a) if (b) break; else continue; }");
        let c1 = build_body_cfg(&b, OptLevel::O0);
        let c2 = build_body_cfg(&b, OptLevel::O0);
        assert_eq!(c1, c2);
    }

    #[test]
    fn arcs_respect_program_order_except_loop_backs() {
        let b = body(
            "int f(int a, int b, int c) {
                while (a) { if (b) continue; c; }
                switch (c) { case 1: a; default: b; }
            }",
        );
        // For nodes generated by concrete statements (not joins or loop
        // machinery), a forward arc in id space means the source statement
        // does not come after the target statement.
        fn concrete(o: &Origin) -> bool {
            matches!(
                o,
                Origin::Expr { .. }
                    | Origin::Return { .. }
                    | Origin::Break { .. }
                    | Origin::Continue { .. }
                    | Origin::Goto { .. }
                    | Origin::Label { .. }
            )
        }
        for level in OptLevel::ALL {
            let cfg = build_body_cfg(&b, level);
            for &(a, b) in &cfg.arcs {
                if a > b {
                    let (Some(oa), Some(ob)) = (cfg.origin.get(&a), cfg.origin.get(&b)) else {
                        continue;
                    };
                    if concrete(oa) && concrete(ob) {
                        assert!(
                            oa.stmt_order() <= ob.stmt_order(),
                            "arc ({a},{b}) goes backward in program order"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn dot_output_is_stable_and_marked() {
        let b = body("int f(int a) { if (a) return 1; return 0; }");
        let cfg = build_body_cfg(&b, OptLevel::O2);
        let dot = cfg.to_dot("f");
        assert!(dot.contains("shape=diamond"));
        assert!(dot.contains("shape=doublecircle"));
        assert_eq!(dot, cfg.to_dot("f"));
    }

    #[test]
    fn node_range_containment() {
        let b = body("int f(int a, int b) { if (a) b; else { while (b) a; } }");
        let s = match &b.body.kind {
            StmtKind::Compound(inner) => inner.as_ref().clone(),
            _ => unreachable!(),
        };
        let (cfg, _, _, next) = build_stmt_cfg(&s, 0, None, None, 1, OptLevel::O0);
        for &n in &cfg.nodes {
            assert!(n == 0 || (1..next).contains(&n), "node {n} out of range");
        }
    }

    #[test]
    fn ice_markers_wrap_maximal_constant_subtrees() {
        let e = parse_expression("x + (3 + 4 * 2)").unwrap();
        let marked = attach_ice_markers(e);
        match marked {
            Expr::OtherBinary(_, lhs, rhs) => {
                assert_eq!(*lhs, Expr::var("x"));
                assert!(matches!(*rhs, Expr::Ice(_)));
            }
            other => panic!("unexpected shape {other:?}"),
        }
        // Bare literals stay bare.
        let lit = attach_ice_markers(Expr::lit(5));
        assert_eq!(lit, Expr::lit(5));
    }

    #[test]
    fn seq_builder_keeps_statement_order() {
        let stmts = vec![
            Stmt::at(StmtKind::Other, Pos { line: 1, col: 1 }),
            Stmt::at(StmtKind::Return, Pos { line: 2, col: 1 }),
        ];
        let s = seq(stmts);
        assert!(matches!(s.kind, StmtKind::Seq(_, _)));
    }
}
