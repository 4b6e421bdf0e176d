use nalgebra::DMatrix;
use num_complex::Complex64;
use serde_json::{json, Value};

use super::pair_vectors;
use crate::error::{Error, Result};
use crate::graph::{laplacian, DenseMatrix, SignedDigraph};
use crate::linalg::{complex_schur, lu_solve, to_complex};
use crate::report;
use crate::spectral::{inf_norm, projection_basis, reduced_laplacian};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ResistanceMethod {
    /// `cᵀ L̄⁻¹ c` on an undirected graph.
    UndirectedClosedForm,
    /// `2 cᵀ Σ c` with `L̄Σ + ΣL̄ᵀ = I`.
    DirectedLyapunov,
}

impl ResistanceMethod {
    pub fn as_str(self) -> &'static str {
        match self {
            ResistanceMethod::UndirectedClosedForm => "UndirectedClosedForm",
            ResistanceMethod::DirectedLyapunov => "DirectedLyapunov",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EffectiveResistance {
    pub r_uv: f64,
    pub method: ResistanceMethod,
}

impl EffectiveResistance {
    pub fn to_json(&self) -> Value {
        json!({ "r_uv": report::real(self.r_uv), "method": self.method.as_str() })
    }
}

/// Resistance between `u` and `v` of a connected undirected graph with
/// nonnegative weights.
pub fn effective_resistance_undirected(
    g: &SignedDigraph,
    u: usize,
    v: usize,
) -> Result<EffectiveResistance> {
    if !g.is_nonnegative() {
        return Err(Error::Premise("undirected resistance needs nonnegative weights".into()));
    }
    if !g.is_symmetric(0.0) {
        return Err(Error::Premise("undirected resistance needs symmetric weights".into()));
    }
    let q = projection_basis(g.n())?;
    let lbar = reduced_laplacian(&laplacian(g), &q)?;
    let (_, c) = pair_vectors(&q, u, v, 0.0, 0.0)?;
    let x = lu_solve(lbar, c.clone(), "reduced Laplacian").map_err(|e| match e {
        Error::Singular(_) => Error::Premise("graph is disconnected".into()),
        other => other,
    })?;
    Ok(EffectiveResistance {
        r_uv: c.dot(&x),
        method: ResistanceMethod::UndirectedClosedForm,
    })
}

/// Resistance `2 (e_u - e_v)ᵀ Qᵀ Σ Q (e_u - e_v)` from the Lyapunov
/// solution of the reduced Laplacian; defined for directed graphs.
pub fn effective_resistance_directed(
    g: &SignedDigraph,
    u: usize,
    v: usize,
) -> Result<EffectiveResistance> {
    let q = projection_basis(g.n())?;
    let lbar = reduced_laplacian(&laplacian(g), &q)?;
    let (_, c) = pair_vectors(&q, u, v, 0.0, 0.0)?;
    let sigma = solve_lyapunov(&lbar)?;
    Ok(EffectiveResistance {
        r_uv: 2.0 * c.dot(&(&sigma * &c)),
        method: ResistanceMethod::DirectedLyapunov,
    })
}

/// Solves `A Σ + Σ Aᵀ = I` by a complex Bartels–Stewart scheme.
///
/// With `A = U T U^*`, substituting `Σ = U Y Uᵀ` gives the triangular
/// equation `T Y + Y Tᵀ = U^* conj(U)`, solved column by column from the
/// last one.
pub fn solve_lyapunov(a: &DenseMatrix) -> Result<DenseMatrix> {
    let n = a.nrows();
    if n != a.ncols() {
        return Err(Error::Dimension(format!("Lyapunov equation for a {}x{} matrix", n, a.ncols())));
    }
    let schur = complex_schur(&to_complex(a))?;
    let (u, t) = (&schur.unitary, &schur.triangular);
    let scale = inf_norm(a).max(f64::MIN_POSITIVE);
    for i in 0..n {
        for k in 0..n {
            if (t[(i, i)] + t[(k, k)]).norm() <= 1e-12 * scale {
                return Err(Error::Premise(format!(
                    "eigenvalues {} and {} sum to zero; Lyapunov equation is not uniquely solvable",
                    t[(i, i)],
                    t[(k, k)]
                )));
            }
        }
    }
    let f = u.adjoint() * u.map(|z| z.conj());
    let mut y = DMatrix::<Complex64>::zeros(n, n);
    for k in (0..n).rev() {
        let mut rhs = f.column(k).into_owned();
        for j in k + 1..n {
            let tkj = t[(k, j)];
            if tkj != Complex64::new(0.0, 0.0) {
                rhs -= y.column(j) * tkj;
            }
        }
        // back substitution with T + t_kk I
        let shift = t[(k, k)];
        for i in (0..n).rev() {
            let mut s = rhs[i];
            for j in i + 1..n {
                s -= t[(i, j)] * y[(j, k)];
            }
            y[(i, k)] = s / (t[(i, i)] + shift);
        }
    }
    let sigma = (u * y * u.transpose()).map(|z| z.re);
    let residual = (a * &sigma + &sigma * a.transpose() - DenseMatrix::identity(n, n)).amax();
    let bound = 1e-8 * (inf_norm(a) * inf_norm(&sigma)).max(1.0);
    if residual.is_nan() || residual >= bound {
        return Err(Error::Invariant(format!("Lyapunov residual {residual:e}")));
    }
    Ok(sigma)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scalar_lyapunov() {
        let s = solve_lyapunov(&DenseMatrix::from_element(1, 1, 2.0)).unwrap();
        assert!((s[(0, 0)] - 0.25).abs() < 1e-15);
    }

    #[test]
    fn unit_edge_resistance() {
        let g = SignedDigraph::from_edges(2, [(1, 2, 1.0), (2, 1, 1.0)]).unwrap();
        let r = effective_resistance_undirected(&g, 1, 2).unwrap();
        assert!((r.r_uv - 1.0).abs() < 1e-14);
        let d = effective_resistance_directed(&g, 1, 2).unwrap();
        assert!((d.r_uv - 1.0).abs() < 1e-12);
    }

    #[test]
    fn one_directed_edge() {
        // L̄ = [1], Σ = [1/2], c = √2 → r = 2 · 2 · 1/2
        let g = SignedDigraph::from_edges(2, [(1, 2, 1.0)]).unwrap();
        let d = effective_resistance_directed(&g, 1, 2).unwrap();
        assert!((d.r_uv - 2.0).abs() < 1e-12);
        assert!(matches!(
            effective_resistance_undirected(&g, 1, 2),
            Err(Error::Premise(_))
        ));
    }

    #[test]
    fn disconnected_is_a_premise_error() {
        let g = SignedDigraph::from_edges(3, [(1, 2, 1.0), (2, 1, 1.0)]).unwrap();
        assert!(matches!(
            effective_resistance_undirected(&g, 1, 3),
            Err(Error::Premise(_))
        ));
        assert!(matches!(solve_lyapunov(&DenseMatrix::zeros(2, 2)), Err(Error::Premise(_))));
    }
}
