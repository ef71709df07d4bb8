//! Path-complexity analysis for a C-like language.
//!
//! The crate computes two per-function path metrics and the machinery to
//! check them against ground truth:
//!
//! - **ACPATH** — a single-pass, syntax-directed count of the acyclic
//!   (arc-simple) execution paths through a function body. On *controlled*
//!   bodies (no backward gotos, no jumps into loops that can escape) the
//!   count is exact.
//! - **NPATH** — the classic syntactic path-complexity estimate, kept as a
//!   baseline for comparison.
//! - **Reference CFGs** — a deterministic control-flow-graph construction
//!   for the supported C subset, parameterized by an optimization level
//!   that controls constant folding in guards.
//! - **Oracle** — exhaustive, budget-capped counting and enumeration of
//!   arc-simple paths, used to verify ACPATH differentially.
//!
//! The pipeline is `parser` → [`ast::FunctionBody`] → (`cfg`, `npath`,
//! `acpath`), with `oracle` and `harness` providing ground truth and
//! randomized test generation, and `cli` the reporting layer used by the
//! `pathmetric` binary.
//!
//! See the `examples/` directory for one runnable example per capability.

pub mod acpath;
pub mod ast;
pub mod cfg;
pub mod cli;
pub mod harness;
pub mod npath;
pub mod oracle;
pub mod parser;

pub use acpath::{acpath_body, is_controlled, AcpathConfig};
pub use ast::{Expr, FunctionBody, Label, Stmt, StmtKind};
pub use cfg::{build_body_cfg, Cfg, OptLevel};
pub use npath::{npath_body, NpathConfig};
pub use oracle::{count_acyclic_paths, OracleBudget, PathCount};
