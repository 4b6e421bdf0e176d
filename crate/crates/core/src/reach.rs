//! Reach sets, reaching nodes, exclusive and common sets.
//!
//! With the sensing convention a path `(i_1, ..., i_r)` follows stored
//! edges `(i_k, i_{k+1})`, so `j ⤳ i` holds when `i` influences `j`
//! directly or through intermediaries. The reachable set `R(i)` is `i`
//! together with every node that `i` influences. It is computed by a
//! depth-first search against the stored orientation: from `x` we step to
//! every `y` with `a_yx != 0`.

use std::collections::BTreeSet;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{induced_subgraph, SignedDigraph};

pub type NodeSet = BTreeSet<usize>;

/// Which edges count when tracing reachability.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ReachMode {
    /// Every nonzero weight is an edge.
    #[default]
    AllEdges,
    /// Only positive weights are edges.
    PositiveOnly,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReachDecomposition {
    pub d: usize,
    pub reaches: Vec<NodeSet>,
    pub reaching: Vec<NodeSet>,
    pub exclusive: Vec<NodeSet>,
    pub common: Vec<NodeSet>,
    /// `permutation[p]` is the node placed at position `p` (1-based ids).
    pub permutation: Vec<usize>,
}

/// JSON view of a decomposition; node ids are 1-based.
#[derive(Debug, Serialize)]
pub struct ReachDecompositionReport {
    pub d: usize,
    pub reaches: Vec<Vec<usize>>,
    pub reaching: Vec<Vec<usize>>,
    pub exclusive: Vec<Vec<usize>>,
    pub common: Vec<Vec<usize>>,
}

/// For every node `x`, the nodes it influences directly (0-based).
fn influence_lists(g: &SignedDigraph, mode: ReachMode) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new(); g.n()];
    for (i, j, w) in g.edges() {
        if mode == ReachMode::PositiveOnly && w <= 0.0 {
            continue;
        }
        // a_ij != 0: j influences i
        out[j - 1].push(i - 1);
    }
    out
}

fn closure(start: usize, influence: &[Vec<usize>]) -> Vec<bool> {
    let mut seen = vec![false; influence.len()];
    let mut stack = vec![start];
    seen[start] = true;
    while let Some(x) = stack.pop() {
        for &y in &influence[x] {
            if !seen[y] {
                seen[y] = true;
                stack.push(y);
            }
        }
    }
    seen
}

fn to_set(mask: &[bool]) -> NodeSet {
    mask.iter()
        .enumerate()
        .filter(|(_, &m)| m)
        .map(|(k, _)| k + 1)
        .collect()
}

/// `R(i)`: node `i` and every node it influences (1-based ids).
pub fn reachable_set(g: &SignedDigraph, i: usize) -> Result<NodeSet> {
    reachable_set_with(g, i, ReachMode::AllEdges)
}

pub fn reachable_set_with(g: &SignedDigraph, i: usize, mode: ReachMode) -> Result<NodeSet> {
    g.check_node(i)?;
    Ok(to_set(&closure(i - 1, &influence_lists(g, mode))))
}

pub fn reach_decomposition(g: &SignedDigraph) -> ReachDecomposition {
    reach_decomposition_with(g, ReachMode::AllEdges)
}

pub fn reach_decomposition_with(g: &SignedDigraph, mode: ReachMode) -> ReachDecomposition {
    let n = g.n();
    let influence = influence_lists(g, mode);
    let reachable: Vec<NodeSet> = (0..n).map(|i| to_set(&closure(i, &influence))).collect();

    let mut distinct: Vec<&NodeSet> = reachable.iter().collect();
    distinct.sort();
    distinct.dedup();
    let mut reaches: Vec<NodeSet> = distinct
        .iter()
        .filter(|r| {
            !distinct
                .iter()
                .any(|other| other.len() > r.len() && r.is_subset(other))
        })
        .map(|r| (*r).clone())
        .collect();
    reaches.sort_by(|a, b| {
        a.first()
            .cmp(&b.first())
            .then_with(|| a.iter().cmp(b.iter()))
    });

    let d = reaches.len();
    let reaching: Vec<NodeSet> = reaches
        .iter()
        .map(|rk| {
            (1..=n)
                .filter(|&i| &reachable[i - 1] == rk)
                .collect()
        })
        .collect();
    let exclusive: Vec<NodeSet> = (0..d)
        .map(|k| {
            reaches[k]
                .iter()
                .copied()
                .filter(|node| (0..d).all(|m| m == k || !reaches[m].contains(node)))
                .collect()
        })
        .collect();
    let common: Vec<NodeSet> = (0..d)
        .map(|k| reaches[k].difference(&exclusive[k]).copied().collect())
        .collect();

    let mut decomp = ReachDecomposition {
        d,
        reaches,
        reaching,
        exclusive,
        common,
        permutation: Vec::new(),
    };
    decomp.permutation = canonical_permutation(&decomp);
    decomp
}

/// Block order `X_1, ..., X_d, C` with each `X_k` listing `U_k` first,
/// ascending ids within every block.
pub fn canonical_permutation(decomp: &ReachDecomposition) -> Vec<usize> {
    let mut order = Vec::new();
    for k in 0..decomp.d {
        order.extend(decomp.reaching[k].iter().copied());
        order.extend(decomp.exclusive[k].difference(&decomp.reaching[k]).copied());
    }
    order.extend(decomp.common_union());
    order
}

impl ReachDecomposition {
    /// `C`, the union of all common sets.
    pub fn common_union(&self) -> NodeSet {
        self.common.iter().flatten().copied().collect()
    }

    /// Index `k` (0-based) with `node ∈ U_k`.
    pub fn reaching_index(&self, node: usize) -> Option<usize> {
        self.reaching.iter().position(|u| u.contains(&node))
    }

    pub fn exclusive_index(&self, node: usize) -> Option<usize> {
        self.exclusive.iter().position(|x| x.contains(&node))
    }

    pub fn report(&self) -> ReachDecompositionReport {
        let v = |sets: &[NodeSet]| sets.iter().map(|s| s.iter().copied().collect()).collect();
        ReachDecompositionReport {
            d: self.d,
            reaches: v(&self.reaches),
            reaching: v(&self.reaching),
            exclusive: v(&self.exclusive),
            common: v(&self.common),
        }
    }

    /// Checks the structural properties every decomposition must have
    /// against the graph it was computed from.
    pub fn check_invariants(&self, g: &SignedDigraph, mode: ReachMode) -> Result<()> {
        let fail = |msg: String| Err(Error::Invariant(msg));
        let counts = |w: f64| mode == ReachMode::AllEdges || w > 0.0;
        let edge = |i: usize, j: usize| {
            let w = g.weight(i, j);
            w != 0.0 && counts(w)
        };
        let n = g.n();

        let mut covered = NodeSet::new();
        for k in 0..self.d {
            let (r, u, x, c) = (
                &self.reaches[k],
                &self.reaching[k],
                &self.exclusive[k],
                &self.common[k],
            );
            if !u.is_subset(x) {
                return fail(format!("U_{} not contained in X_{}", k + 1, k + 1));
            }
            if !x.is_disjoint(c) {
                return fail(format!("X_{0} and C_{0} intersect", k + 1));
            }
            let union: NodeSet = x.union(c).copied().collect();
            if &union != r {
                return fail(format!("X_{0} ∪ C_{0} != R_{0}", k + 1));
            }
            for m in 0..self.d {
                if m != k && !x.is_disjoint(&self.exclusive[m]) {
                    return fail(format!("X_{} and X_{} intersect", k + 1, m + 1));
                }
            }
            covered.extend(x.iter().copied());
            covered.extend(c.iter().copied());

            for &i in u {
                for &j in x.difference(u) {
                    if edge(i, j) {
                        return fail(format!("edge ({i},{j}) from U_{0} into X_{0}\\U_{0}", k + 1));
                    }
                }
            }
            for &p in x {
                for &m in c {
                    if edge(p, m) {
                        return fail(format!("edge ({p},{m}) from X_{0} into C_{0}", k + 1));
                    }
                }
            }
            let u_nodes: Vec<usize> = u.iter().copied().collect();
            let sub = induced_subgraph(g, &u_nodes)?;
            if !is_strongly_connected(&sub, mode) {
                return fail(format!("U_{} does not induce a strongly connected subgraph", k + 1));
            }
            if c.is_empty() {
                for &a in r {
                    for b in (1..=n).filter(|b| !r.contains(b)) {
                        if edge(a, b) || edge(b, a) {
                            return fail(format!(
                                "C_{} empty but R_{} touches node {b}",
                                k + 1,
                                k + 1
                            ));
                        }
                    }
                }
            }
        }
        if covered.len() != n {
            return fail("X_k and C do not cover the node set".into());
        }
        let mut perm = self.permutation.clone();
        perm.sort_unstable();
        if perm != (1..=n).collect::<Vec<_>>() {
            return fail("permutation is not a bijection".into());
        }
        Ok(())
    }
}

/// Every node reaches every other node.
pub fn is_strongly_connected(g: &SignedDigraph, mode: ReachMode) -> bool {
    let n = g.n();
    if n <= 1 {
        return true;
    }
    let influence = influence_lists(g, mode);
    if !closure(0, &influence).iter().all(|&s| s) {
        return false;
    }
    let mut reversed = vec![Vec::new(); n];
    for (x, ys) in influence.iter().enumerate() {
        for &y in ys {
            reversed[y].push(x);
        }
    }
    closure(0, &reversed).iter().all(|&s| s)
}
