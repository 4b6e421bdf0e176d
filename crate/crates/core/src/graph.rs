//! Directed signed weighted graphs and their Laplacians.
//!
//! Edges follow the sensing convention: a stored edge `(i, j)` with weight
//! `a_ij` means node `j` influences node `i`. Node ids are 1-based at every
//! public entry point; storage is 0-based.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Weights with magnitude below this are treated as absent edges.
pub const ZERO_WEIGHT_TOL: f64 = 1e-12;

/// Dense real matrix used for every Laplacian-like object.
pub type DenseMatrix = DMatrix<f64>;

#[derive(Debug, Clone, PartialEq)]
pub struct SignedDigraph {
    n: usize,
    // 0-based (row, col) -> weight
    edges: BTreeMap<(usize, usize), f64>,
}

impl SignedDigraph {
    /// Edgeless graph on nodes `1..=n`.
    pub fn new(n: usize) -> Self {
        Self {
            n,
            edges: BTreeMap::new(),
        }
    }

    /// Builds a graph from 1-based `(i, j, w)` triples, rejecting self-loops,
    /// zero weights, duplicates and out-of-range ids.
    pub fn from_edges<I>(n: usize, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize, f64)>,
    {
        let mut g = Self::new(n);
        for (i, j, w) in edges {
            g.insert_checked(i, j, w).map_err(|reason| match reason {
                InsertError::Range(node) => Error::NodeOutOfRange { node, n },
                other => Error::InvalidArgument(format!("edge ({i},{j}): {other}")),
            })?;
        }
        Ok(g)
    }

    fn insert_checked(&mut self, i: usize, j: usize, w: f64) -> std::result::Result<(), InsertError> {
        for node in [i, j] {
            if node == 0 || node > self.n {
                return Err(InsertError::Range(node));
            }
        }
        if i == j {
            return Err(InsertError::SelfLoop);
        }
        if !w.is_finite() {
            return Err(InsertError::NonFinite);
        }
        if w.abs() < ZERO_WEIGHT_TOL {
            return Err(InsertError::ZeroWeight);
        }
        if self.edges.insert((i - 1, j - 1), w).is_some() {
            return Err(InsertError::Duplicate);
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Weight `a_ij` (1-based), zero when the edge is absent.
    pub fn weight(&self, i: usize, j: usize) -> f64 {
        if i == 0 || j == 0 {
            return 0.0;
        }
        self.edges.get(&(i - 1, j - 1)).copied().unwrap_or(0.0)
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.weight(i, j) != 0.0
    }

    /// Edges as 1-based `(i, j, w)` in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.edges.iter().map(|(&(i, j), &w)| (i + 1, j + 1, w))
    }

    pub fn is_nonnegative(&self) -> bool {
        self.edges.values().all(|&w| w > 0.0)
    }

    /// True when `a_ij == a_ji` for every pair, up to `tol`.
    pub fn is_symmetric(&self, tol: f64) -> bool {
        self.edges.iter().all(|(&(i, j), &w)| {
            let back = self.edges.get(&(j, i)).copied().unwrap_or(0.0);
            (w - back).abs() <= tol
        })
    }

    pub fn check_node(&self, node: usize) -> Result<()> {
        if node == 0 || node > self.n {
            Err(Error::NodeOutOfRange { node, n: self.n })
        } else {
            Ok(())
        }
    }

    /// Adjacency matrix with `A[i][j] = a_ij` (0-based indices).
    pub fn adjacency(&self) -> DenseMatrix {
        let mut a = DenseMatrix::zeros(self.n, self.n);
        for (&(i, j), &w) in &self.edges {
            a[(i, j)] = w;
        }
        a
    }

    /// Serializes in the edge-list format accepted by [`parse_edge_list`].
    pub fn to_edge_list(&self) -> String {
        let mut out = format!("{}\n", self.n);
        for (i, j, w) in self.edges() {
            let _ = writeln!(out, "{i} {j} {w}");
        }
        out
    }
}

#[derive(Debug)]
enum InsertError {
    Range(usize),
    SelfLoop,
    ZeroWeight,
    NonFinite,
    Duplicate,
}

impl std::fmt::Display for InsertError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            InsertError::Range(node) => write!(f, "node {node} out of range"),
            InsertError::SelfLoop => f.write_str("self-loop"),
            InsertError::ZeroWeight => f.write_str("zero weight"),
            InsertError::NonFinite => f.write_str("non-finite weight"),
            InsertError::Duplicate => f.write_str("duplicate edge"),
        }
    }
}

/// Parses the edge-list text format.
///
/// The first non-comment line holds the node count; every following
/// non-empty line is `i j w` with 1-based ids. `#` starts a comment.
pub fn parse_edge_list(text: &str) -> Result<SignedDigraph> {
    let mut graph: Option<SignedDigraph> = None;
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let fields: Vec<&str> = content.split_whitespace().collect();
        let parse_err = |reason: String| Error::Parse {
            line: line_no,
            reason,
        };
        match graph.as_mut() {
            None => {
                if fields.len() != 1 {
                    return Err(parse_err(format!(
                        "expected node count, found {content:?}"
                    )));
                }
                let n: usize = fields[0]
                    .parse()
                    .map_err(|_| parse_err(format!("invalid node count {:?}", fields[0])))?;
                if n == 0 {
                    return Err(parse_err("node count must be positive".into()));
                }
                graph = Some(SignedDigraph::new(n));
            }
            Some(g) => {
                if fields.len() != 3 {
                    return Err(parse_err(format!("expected `i j w`, found {content:?}")));
                }
                let i: usize = fields[0]
                    .parse()
                    .map_err(|_| parse_err(format!("invalid node id {:?}", fields[0])))?;
                let j: usize = fields[1]
                    .parse()
                    .map_err(|_| parse_err(format!("invalid node id {:?}", fields[1])))?;
                let w: f64 = fields[2]
                    .parse()
                    .map_err(|_| parse_err(format!("invalid weight {:?}", fields[2])))?;
                g.insert_checked(i, j, w)
                    .map_err(|e| parse_err(e.to_string()))?;
            }
        }
    }
    graph.ok_or(Error::Parse {
        line: 0,
        reason: "missing node count".into(),
    })
}

/// `L = D - A` with `D` the out-degree diagonal `d_i = sum_j a_ij`.
pub fn laplacian(g: &SignedDigraph) -> DenseMatrix {
    let mut l = DenseMatrix::zeros(g.n, g.n);
    for (&(i, j), &w) in &g.edges {
        l[(i, j)] -= w;
    }
    for i in 0..g.n {
        let off: f64 = (0..g.n).filter(|&j| j != i).map(|j| l[(i, j)]).sum();
        l[(i, i)] = -off;
    }
    l
}

/// Edge-wise sum of two graphs on the same node set. Sums below
/// [`ZERO_WEIGHT_TOL`] drop the edge.
pub fn superpose(g1: &SignedDigraph, g2: &SignedDigraph) -> Result<SignedDigraph> {
    if g1.n != g2.n {
        return Err(Error::NodeCountMismatch(g1.n, g2.n));
    }
    let mut edges = g1.edges.clone();
    for (&key, &w) in &g2.edges {
        *edges.entry(key).or_insert(0.0) += w;
    }
    edges.retain(|_, w| w.abs() >= ZERO_WEIGHT_TOL);
    Ok(SignedDigraph { n: g1.n, edges })
}

/// Splits into the positive-edge and negative-edge subgraphs.
pub fn split_signs(g: &SignedDigraph) -> (SignedDigraph, SignedDigraph) {
    let (pos, neg): (BTreeMap<_, _>, BTreeMap<_, _>) =
        g.edges.iter().partition(|(_, &w)| w > 0.0);
    (
        SignedDigraph { n: g.n, edges: pos },
        SignedDigraph { n: g.n, edges: neg },
    )
}

/// Subgraph induced by `nodes` (1-based), relabelled by position in `nodes`.
pub fn induced_subgraph(g: &SignedDigraph, nodes: &[usize]) -> Result<SignedDigraph> {
    let mut position = vec![None; g.n];
    for (pos, &node) in nodes.iter().enumerate() {
        g.check_node(node)?;
        position[node - 1] = Some(pos);
    }
    let edges = g
        .edges
        .iter()
        .filter_map(|(&(i, j), &w)| Some(((position[i]?, position[j]?), w)))
        .collect();
    Ok(SignedDigraph {
        n: nodes.len(),
        edges,
    })
}

/// A negative perturbation of the pair `(u, v)`:
/// `a_uv = -delta * q_uv` and `a_vu = -delta * q_vu`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct EdgePerturbation {
    pub u: usize,
    pub v: usize,
    pub q_uv: f64,
    pub q_vu: f64,
    pub delta: f64,
}

impl EdgePerturbation {
    pub fn new(u: usize, v: usize, q_uv: f64, q_vu: f64, delta: f64) -> Result<Self> {
        if u == v {
            return Err(Error::InvalidArgument("perturbed pair needs u != v".into()));
        }
        if !(q_uv >= 0.0 && q_vu >= 0.0) {
            return Err(Error::InvalidArgument("gains must be nonnegative".into()));
        }
        if q_uv + q_vu <= 0.0 {
            return Err(Error::InvalidArgument(
                "at least one direction gain must be positive".into(),
            ));
        }
        if !delta.is_finite() || delta < 0.0 {
            return Err(Error::InvalidArgument("delta must be finite and >= 0".into()));
        }
        Ok(Self {
            u,
            v,
            q_uv,
            q_vu,
            delta,
        })
    }

    pub fn with_delta(self, delta: f64) -> Result<Self> {
        Self::new(self.u, self.v, self.q_uv, self.q_vu, delta)
    }

    /// The perturbation as a standalone graph on `n` nodes.
    pub fn as_graph(&self, n: usize) -> Result<SignedDigraph> {
        let mut edges = Vec::with_capacity(2);
        let w_uv = -self.delta * self.q_uv;
        let w_vu = -self.delta * self.q_vu;
        if w_uv.abs() >= ZERO_WEIGHT_TOL {
            edges.push((self.u, self.v, w_uv));
        }
        if w_vu.abs() >= ZERO_WEIGHT_TOL {
            edges.push((self.v, self.u, w_vu));
        }
        SignedDigraph::from_edges(n, edges)
    }

    /// `g1` superposed with this perturbation.
    pub fn apply(&self, g1: &SignedDigraph) -> Result<SignedDigraph> {
        superpose(g1, &self.as_graph(g1.n())?)
    }
}
