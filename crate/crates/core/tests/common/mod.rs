#![allow(dead_code)]

use std::collections::BTreeSet;
use std::path::PathBuf;

use rand::seq::{IndexedRandom, SliceRandom};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use siglap::{parse_edge_list, Complex64, DenseMatrix, EdgePerturbation, SignedDigraph};

pub fn fixture(name: &str) -> SignedDigraph {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/data")
        .join(name);
    let text = std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    parse_edge_list(&text).unwrap()
}

pub fn set(xs: &[usize]) -> BTreeSet<usize> {
    xs.iter().copied().collect()
}

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Nonnegative digraph in which one root influences every node through a
/// random spanning tree, plus extra edges with probability `p`.
pub fn random_rooted(rng: &mut ChaCha8Rng, n: usize, p: f64) -> SignedDigraph {
    let mut order: Vec<usize> = (1..=n).collect();
    order.shuffle(rng);
    let mut edges = std::collections::BTreeMap::new();
    for k in 1..n {
        let parent = order[rng.random_range(0..k)];
        // a_{child,parent}: the parent influences the child
        edges.insert((order[k], parent), rng.random_range(0.5..2.0));
    }
    for i in 1..=n {
        for j in 1..=n {
            if i != j && rng.random_bool(p) {
                edges.entry((i, j)).or_insert_with(|| rng.random_range(0.5..2.0));
            }
        }
    }
    SignedDigraph::from_edges(n, edges.into_iter().map(|((i, j), w)| (i, j, w))).unwrap()
}

/// Nonnegative digraph with `cores` strongly connected source groups
/// (cycles) and `rest` further nodes, each influenced by one to three
/// earlier nodes. Produces several reach sets and usually nonempty common
/// sets.
pub fn random_multi_reach(rng: &mut ChaCha8Rng, cores: usize, rest: usize) -> SignedDigraph {
    let mut edges = std::collections::BTreeMap::new();
    let mut next = 1;
    let mut placed = Vec::new();
    for _ in 0..cores {
        let size = rng.random_range(1..=3usize);
        let nodes: Vec<usize> = (next..next + size).collect();
        next += size;
        if size > 1 {
            for t in 0..size {
                edges.insert((nodes[(t + 1) % size], nodes[t]), rng.random_range(0.5..2.0));
            }
            if size == 3 && rng.random_bool(0.5) {
                edges.insert((nodes[0], nodes[1]), rng.random_range(0.5..2.0));
            }
        }
        placed.extend(nodes);
    }
    for _ in 0..rest {
        let node = next;
        next += 1;
        let parents = rng.random_range(1..=3usize).min(placed.len());
        for &p in placed.choose_multiple(rng, parents) {
            edges.insert((node, p), rng.random_range(0.5..2.0));
        }
        placed.push(node);
    }
    let n = next - 1;
    SignedDigraph::from_edges(n, edges.into_iter().map(|((i, j), w)| (i, j, w))).unwrap()
}

/// Random signed digraph with edge probability `p`.
pub fn random_signed(rng: &mut ChaCha8Rng, n: usize, p: f64) -> SignedDigraph {
    let mut edges = Vec::new();
    for i in 1..=n {
        for j in 1..=n {
            if i != j && rng.random_bool(p) {
                let mag = rng.random_range(0.2..2.0);
                let w = if rng.random_bool(0.3) { -mag } else { mag };
                edges.push((i, j, w));
            }
        }
    }
    SignedDigraph::from_edges(n, edges).unwrap()
}

/// Random connected undirected graph with positive weights.
pub fn random_undirected(rng: &mut ChaCha8Rng, n: usize, p: f64) -> SignedDigraph {
    let mut w = std::collections::BTreeMap::new();
    for k in 2..=n {
        let other = rng.random_range(1..k);
        w.insert((other, k), rng.random_range(0.5..2.0));
    }
    for i in 1..=n {
        for j in i + 1..=n {
            if rng.random_bool(p) {
                w.entry((i, j)).or_insert_with(|| rng.random_range(0.5..2.0));
            }
        }
    }
    let edges = w
        .into_iter()
        .flat_map(|((i, j), x)| [(i, j, x), (j, i, x)]);
    SignedDigraph::from_edges(n, edges).unwrap()
}

/// Transitive closure by repeated boolean matrix squaring: `reach[x][y]`
/// is true when `x` influences `y` along some path.
pub fn influence_closure(g: &SignedDigraph) -> Vec<Vec<bool>> {
    let n = g.n();
    let mut m = vec![vec![false; n]; n];
    for (x, row) in m.iter_mut().enumerate() {
        row[x] = true;
    }
    for (i, j, _) in g.edges() {
        m[j - 1][i - 1] = true;
    }
    loop {
        let mut next = m.clone();
        for x in 0..n {
            for y in 0..n {
                if !next[x][y] {
                    next[x][y] = (0..n).any(|z| m[x][z] && m[z][y]);
                }
            }
        }
        if next == m {
            return m;
        }
        m = next;
    }
}

/// Eigenvalues from nalgebra's own real Schur decomposition, used as an
/// independent reference for the crate's QR iteration.
pub fn reference_eigenvalues(m: &DenseMatrix) -> Vec<Complex64> {
    let schur = nalgebra::linalg::Schur::try_new(m.clone(), f64::EPSILON, 10_000)
        .expect("reference Schur converged");
    schur.complex_eigenvalues().iter().copied().collect()
}

/// Greedy-free matching distance between two eigenvalue multisets by
/// brute force over permutations (small sizes only).
pub fn brute_force_match(a: &[Complex64], b: &[Complex64]) -> f64 {
    assert_eq!(a.len(), b.len());
    assert!(a.len() <= 8);
    let mut idx: Vec<usize> = (0..b.len()).collect();
    let mut best_sum = f64::INFINITY;
    let mut best_max = f64::INFINITY;
    permute(&mut idx, 0, &mut |perm| {
        let d: Vec<f64> = perm.iter().enumerate().map(|(i, &j)| (a[i] - b[j]).norm()).collect();
        let s: f64 = d.iter().sum();
        if s < best_sum {
            best_sum = s;
            best_max = d.iter().copied().fold(0.0, f64::max);
        }
    });
    best_max
}

fn permute(v: &mut Vec<usize>, k: usize, f: &mut impl FnMut(&[usize])) {
    if k == v.len() {
        f(v);
        return;
    }
    for i in k..v.len() {
        v.swap(k, i);
        permute(v, k + 1, f);
        v.swap(k, i);
    }
}

/// Sorted-by-modulus-free comparison of spectra through the crate's
/// minimum-cost matching.
pub fn spectra_distance(a: &[Complex64], b: &[Complex64]) -> f64 {
    siglap::linalg::multiset_distance(a, b).unwrap()
}

/// Random ordered pair with gains of one of three shapes: one-sided either
/// way or two-sided.
pub fn random_pair(rng: &mut ChaCha8Rng, n: usize) -> EdgePerturbation {
    let u = rng.random_range(1..=n);
    let mut v = rng.random_range(1..=n);
    while v == u {
        v = rng.random_range(1..=n);
    }
    let (q_uv, q_vu) = match rng.random_range(0..3) {
        0 => (rng.random_range(0.1..1.5), 0.0),
        1 => (0.0, rng.random_range(0.1..1.5)),
        _ => (rng.random_range(0.1..1.5), rng.random_range(0.1..1.5)),
    };
    EdgePerturbation::new(u, v, q_uv, q_vu, 0.0).unwrap()
}
