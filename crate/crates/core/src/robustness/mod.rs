//! How much negative weight a node pair tolerates before the Laplacian
//! loses its positive-real-part nontrivial spectrum, and effective
//! resistance.
//!
//! Perturbing the pair `(u, v)` by `a_uv = -δ q_uv`, `a_vu = -δ q_vu` adds
//! the rank-one term `-δ b cᵀ` to `L₁`, with `b = q_uv e_u - q_vu e_v` and
//! `c = e_u - e_v`. In reduced coordinates the loop gain is
//! `δ G(jω)` with `G(jω) = cᵀQᵀ(L̄₁ - jωI)⁻¹Qb`, and the spectrum first
//! touches the imaginary axis at `δ* = 1 / max Re G(jω_i)` over the
//! frequencies where `G` is real.

mod nyquist;
mod resistance;

pub use nyquist::{
    delta_star, delta_star_bisection, delta_star_with_grid, nyquist_sweep, r_value, sweep_csv,
    Crossing, DeltaStarResult, FrequencyGrid, Regime, Sweep, TransferSample,
};
pub use resistance::{
    effective_resistance_directed, effective_resistance_undirected, solve_lyapunov,
    EffectiveResistance, ResistanceMethod,
};

use nalgebra::DVector;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::graph::{laplacian, DenseMatrix, EdgePerturbation, SignedDigraph};
use crate::linalg::lu_solve;
use crate::spectral::{eigenvalues, inf_norm, zero_threshold, ProjectionBasis, Spectrum};

/// Exactly one eigenvalue of `L` is zero (within the zero threshold) and
/// every other one has real part above the threshold.
pub fn check_spectrum_condition(g: &SignedDigraph) -> bool {
    let l = laplacian(g);
    match eigenvalues(&l) {
        Ok(spec) => spectrum_condition_holds(&spec, inf_norm(&l)),
        Err(_) => false,
    }
}

pub(crate) fn spectrum_condition_holds(spec: &Spectrum, scale: f64) -> bool {
    let tol = zero_threshold(scale);
    let zeros = spec.values.iter().filter(|z| z.norm() < tol).count();
    zeros == 1
        && spec
            .values
            .iter()
            .filter(|z| z.norm() >= tol)
            .all(|z| z.re > tol)
}

/// Errors unless `L` has a simple zero eigenvalue and the rest of its
/// spectrum in the open right half-plane.
pub(crate) fn require_spectrum_condition(l: &DenseMatrix) -> Result<Spectrum> {
    let spec = eigenvalues(l)?;
    if !spectrum_condition_holds(&spec, inf_norm(l)) {
        return Err(Error::Premise(
            "Laplacian must have exactly one zero eigenvalue and all others with positive real part"
                .into(),
        ));
    }
    Ok(spec)
}

/// `Q b` and `Q c` for the pair; `u`, `v` are 1-based.
pub(crate) fn pair_vectors(
    q: &ProjectionBasis,
    u: usize,
    v: usize,
    q_uv: f64,
    q_vu: f64,
) -> Result<(DVector<f64>, DVector<f64>)> {
    let n = q.n();
    for node in [u, v] {
        if node == 0 || node > n {
            return Err(Error::NodeOutOfRange { node, n });
        }
    }
    if u == v {
        return Err(Error::InvalidArgument("pair needs u != v".into()));
    }
    let qm = q.matrix();
    let b = qm.column(u - 1) * q_uv - qm.column(v - 1) * q_vu;
    let c = qm.column(u - 1) - qm.column(v - 1);
    Ok((b, c))
}

/// Checks that `L̄₁⁻¹ L̄` has spectrum `{1 (N-2 times), 1 - r}` with
/// `r = δ cᵀQᵀL̄₁⁻¹Qb`, and that `det L̄ = det L̄₁ (1 - r)`. Returns `1 - r`.
///
/// The spectrum is certified through `M = L̄₁⁻¹ L̄ - I`: a matrix of rank at
/// most one has eigenvalues `{0 (N-2 times), tr M}`, so it suffices that the
/// second singular value of `M` vanishes and `tr M = -r`. Comparing computed
/// eigenvalues instead is ill-conditioned when `r ≈ 0`, where the eigenvalue
/// 1 is defective.
pub fn rank_one_spectrum_check(
    lbar1: &DenseMatrix,
    q: &ProjectionBasis,
    pert: &EdgePerturbation,
) -> Result<Complex64> {
    const TOL: f64 = 1e-8;
    let (b, c) = pair_vectors(q, pert.u, pert.v, pert.q_uv, pert.q_vu)?;
    let m = lbar1.nrows();
    let lbar = lbar1 - (&b * c.transpose()) * pert.delta;

    let x = lu_solve(lbar1.clone(), b.clone(), "reduced base Laplacian")?;
    let r = pert.delta * c.dot(&x);
    let one_minus_r = Complex64::new(1.0 - r, 0.0);

    let lu = lbar1.clone().lu();
    let ratio = lu
        .solve(&lbar)
        .ok_or_else(|| Error::Singular("reduced base Laplacian".into()))?;
    let shifted = &ratio - DenseMatrix::identity(m, m);
    let mut sv: Vec<f64> = shifted.singular_values().iter().copied().collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    let second = sv.get(1).copied().unwrap_or(0.0);
    if second > TOL * sv.first().copied().unwrap_or(0.0).max(1.0) {
        return Err(Error::Invariant(format!(
            "L̄₁⁻¹L̄ - I has second singular value {second:e}; not a rank-one update"
        )));
    }
    let trace_dev = (shifted.trace() + r).abs();
    if trace_dev > TOL * (1.0 + r.abs()) {
        return Err(Error::Invariant(format!(
            "trace of L̄₁⁻¹L̄ - I deviates from -r by {trace_dev:e}"
        )));
    }

    let det1 = lu.determinant();
    let det = lbar.determinant();
    let expect = det1 * (1.0 - r);
    if (det - expect).abs() > TOL * det1.abs() * (1.0 + r.abs()) {
        return Err(Error::Invariant(format!(
            "determinant identity fails: {det} vs {expect}"
        )));
    }
    Ok(one_minus_r)
}
