//! Exhaustive ground truth for path counting.
//!
//! All four operations walk arc-simple paths explicitly (an arc may appear
//! at most once per path; nodes may repeat), so their cost is the number of
//! such paths. [`OracleBudget`] caps the instance size and the walk length;
//! exceeding a cap reports [`OracleError::BudgetExceeded`] rather than an
//! answer. Everything operates on the subgraph reachable from the entry.

use std::collections::BTreeMap;

use num_bigint::BigUint;
use num_traits::{One, Zero};
use thiserror::Error;

use crate::cfg::{Cfg, NodeId};

/// Exact, unbounded path count.
pub type PathCount = BigUint;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OracleBudget {
    pub max_nodes: usize,
    pub max_paths: u64,
    pub max_steps: u64,
}

impl Default for OracleBudget {
    fn default() -> OracleBudget {
        OracleBudget {
            max_nodes: 64,
            max_paths: 10_000_000,
            max_steps: 100_000_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("oracle budget exceeded ({0})")]
    BudgetExceeded(&'static str),
}

/// Dense adjacency view of the reachable subgraph, with one mark bit per
/// arc for the walks.
struct Walker {
    adj: Vec<Vec<(usize, usize)>>,
    used: Vec<bool>,
    entry: usize,
    ids: Vec<NodeId>,
    steps: u64,
    path_cap: BigUint,
}

impl Walker {
    fn new(g: &Cfg, budget: &OracleBudget) -> Result<Walker, OracleError> {
        let g = g.reachable_subgraph();
        if g.nodes.len() > budget.max_nodes {
            return Err(OracleError::BudgetExceeded("node limit"));
        }
        let ids: Vec<NodeId> = g.nodes.iter().copied().collect();
        let index: BTreeMap<NodeId, usize> =
            ids.iter().enumerate().map(|(i, &n)| (n, i)).collect();
        let mut adj = vec![Vec::new(); ids.len()];
        for (k, &(a, b)) in g.arcs.iter().enumerate() {
            adj[index[&a]].push((index[&b], k));
        }
        Ok(Walker {
            used: vec![false; g.arcs.len()],
            entry: index[&g.entry],
            ids,
            adj,
            steps: budget.max_steps,
            path_cap: BigUint::from(budget.max_paths),
        })
    }

    fn lookup(&self, n: NodeId) -> Option<usize> {
        self.ids.binary_search(&n).ok()
    }

    fn step(&mut self) -> Result<(), OracleError> {
        if self.steps == 0 {
            return Err(OracleError::BudgetExceeded("step limit"));
        }
        self.steps -= 1;
        Ok(())
    }

    /// Arc-simple paths from `n` to `target` over the unused arcs. The walk
    /// stops the moment it reaches `target`.
    fn tau(&mut self, n: usize, target: usize) -> Result<BigUint, OracleError> {
        self.step()?;
        if n == target {
            return Ok(BigUint::one());
        }
        let mut total = BigUint::zero();
        for k in 0..self.adj[n].len() {
            let (succ, arc) = self.adj[n][k];
            if self.used[arc] {
                continue;
            }
            self.used[arc] = true;
            let r = self.tau(succ, target);
            self.used[arc] = false;
            total += r?;
            if total > self.path_cap {
                return Err(OracleError::BudgetExceeded("path limit"));
            }
        }
        Ok(total)
    }

    /// Pairs of arc-disjoint paths: one from the entry to `s1`, then one
    /// from the entry to `s2` over the arcs the first leg left unused.
    fn delta(&mut self, n: usize, s1: usize, s2: usize) -> Result<BigUint, OracleError> {
        self.step()?;
        if n == s1 {
            return self.tau(self.entry, s2);
        }
        let mut total = BigUint::zero();
        for k in 0..self.adj[n].len() {
            let (succ, arc) = self.adj[n][k];
            if self.used[arc] {
                continue;
            }
            self.used[arc] = true;
            let r = self.delta(succ, s1, s2);
            self.used[arc] = false;
            total += r?;
            if total > self.path_cap {
                return Err(OracleError::BudgetExceeded("path limit"));
            }
        }
        Ok(total)
    }

    fn enumerate(
        &mut self,
        n: usize,
        prefix: &mut Vec<NodeId>,
        out: &mut Vec<Vec<NodeId>>,
    ) -> Result<(), OracleError> {
        self.step()?;
        prefix.push(self.ids[n]);
        if self.adj[n].is_empty() {
            if out.len() as u64 >= self.path_cap.clone().try_into().unwrap_or(u64::MAX) {
                return Err(OracleError::BudgetExceeded("path limit"));
            }
            out.push(prefix.clone());
        } else {
            // Successors were inserted in ascending arc order, which makes
            // the output lexicographic.
            for k in 0..self.adj[n].len() {
                let (succ, arc) = self.adj[n][k];
                if self.used[arc] {
                    continue;
                }
                self.used[arc] = true;
                let r = self.enumerate(succ, prefix, out);
                self.used[arc] = false;
                r?;
            }
        }
        prefix.pop();
        Ok(())
    }
}

/// The number of acyclic paths from the entry of `g` to `target`
/// (τ). A target outside the reachable subgraph counts zero paths.
pub fn count_paths_to(
    g: &Cfg,
    target: NodeId,
    budget: &OracleBudget,
) -> Result<PathCount, OracleError> {
    let mut w = Walker::new(g, budget)?;
    match w.lookup(target) {
        Some(t) => w.tau(w.entry, t),
        None => Ok(BigUint::zero()),
    }
}

/// The number of acyclic paths from the entry to any exit node (α).
pub fn count_acyclic_paths(g: &Cfg, budget: &OracleBudget) -> Result<PathCount, OracleError> {
    let mut w = Walker::new(g, budget)?;
    let exits: Vec<usize> = (0..w.adj.len()).filter(|&n| w.adj[n].is_empty()).collect();
    let mut total = BigUint::zero();
    for t in exits {
        total += w.tau(w.entry, t)?;
        if total > w.path_cap {
            return Err(OracleError::BudgetExceeded("path limit"));
        }
    }
    Ok(total)
}

/// The number of pairs of acyclic paths to `s2` passing by `s1` (δ): the
/// first leg runs from the entry to `s1`, the second from the entry to
/// `s2`, and the two legs share no arc.
pub fn count_path_pairs(
    g: &Cfg,
    s1: NodeId,
    s2: NodeId,
    budget: &OracleBudget,
) -> Result<PathCount, OracleError> {
    let mut w = Walker::new(g, budget)?;
    match (w.lookup(s1), w.lookup(s2)) {
        (Some(a), Some(b)) => w.delta(w.entry, a, b),
        _ => Ok(BigUint::zero()),
    }
}

/// All arc-simple entry-to-exit paths, lexicographically ordered as node
/// sequences.
pub fn enumerate_acyclic_paths(
    g: &Cfg,
    budget: &OracleBudget,
) -> Result<Vec<Vec<NodeId>>, OracleError> {
    let mut w = Walker::new(g, budget)?;
    let mut out = Vec::new();
    let mut prefix = Vec::new();
    w.enumerate(w.entry, &mut prefix, &mut out)?;
    Ok(out)
}
