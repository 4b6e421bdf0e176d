use std::fmt::Write as _;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde_json::{json, Value};

use super::{pair_vectors, require_spectrum_condition};
use crate::error::{Error, Result};
use crate::graph::{laplacian, DenseMatrix, EdgePerturbation, SignedDigraph};
use crate::linalg::lu_solve;
use crate::report;
use crate::spectral::{eigenvalues, projection_basis, reduced_laplacian, ProjectionBasis};

const GRID_POINTS: usize = 2000;
const GRID_LO: f64 = 1e-6;
const GRID_HI: f64 = 1e4;
const WIDEN_FACTOR: f64 = 100.0;
const IM_TOL: f64 = 1e-12;
const POSITIVE_RE_TOL: f64 = 1e-12;
const ZERO_OMEGA_RTOL: f64 = 1e-8;
const TIE_RTOL: f64 = 1e-9;

/// `G(jω) = cᵀQᵀ(L̄₁ - jωI)⁻¹Q(q_uv e_u - q_vu e_v)`, by one complex solve.
/// Multiplying by `δ` gives the r-value of a perturbation of size `δ`.
pub fn r_value(
    lbar1: &DenseMatrix,
    q: &ProjectionBasis,
    u: usize,
    v: usize,
    q_uv: f64,
    q_vu: f64,
    omega: f64,
) -> Result<Complex64> {
    if lbar1.nrows() != lbar1.ncols() || lbar1.nrows() + 1 != q.n() {
        return Err(Error::Dimension(format!(
            "{}x{} reduced Laplacian with a basis for n = {}",
            lbar1.nrows(),
            lbar1.ncols(),
            q.n()
        )));
    }
    let (b, c) = pair_vectors(q, u, v, q_uv, q_vu)?;
    transfer(lbar1, &b, &c, omega)
}

fn transfer(
    lbar1: &DenseMatrix,
    b: &nalgebra::DVector<f64>,
    c: &nalgebra::DVector<f64>,
    omega: f64,
) -> Result<Complex64> {
    let m = lbar1.nrows();
    let a = DMatrix::from_fn(m, m, |i, j| {
        Complex64::new(lbar1[(i, j)], if i == j { -omega } else { 0.0 })
    });
    let rhs = b.map(|x| Complex64::new(x, 0.0));
    let x = lu_solve(a, rhs, &format!("jω = {omega}j is an eigenvalue"))?;
    Ok(c.iter().zip(x.iter()).map(|(ci, xi)| xi * *ci).sum())
}

/// Nonnegative sample frequencies in ascending order.
#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyGrid {
    omegas: Vec<f64>,
}

impl FrequencyGrid {
    /// `points` logarithmically spaced frequencies in `[lo, hi]`, optionally
    /// preceded by `ω = 0`.
    pub fn log_spaced(lo: f64, hi: f64, points: usize, include_zero: bool) -> Result<Self> {
        if !(lo > 0.0 && hi > lo && hi.is_finite()) || points < 2 {
            return Err(Error::InvalidArgument(format!(
                "frequency grid needs 0 < lo < hi < inf and at least 2 points, got [{lo}, {hi}] x {points}"
            )));
        }
        let (l0, l1) = (lo.log10(), hi.log10());
        let mut omegas = Vec::with_capacity(points + 1);
        if include_zero {
            omegas.push(0.0);
        }
        omegas.extend(
            (0..points).map(|k| 10f64.powf(l0 + (l1 - l0) * k as f64 / (points - 1) as f64)),
        );
        Ok(Self { omegas })
    }

    /// The default sweep for a system whose largest eigenvalue modulus is `scale`.
    pub fn for_scale(scale: f64) -> Result<Self> {
        let s = if scale > 0.0 { scale } else { 1.0 };
        Self::log_spaced(GRID_LO * s, GRID_HI * s, GRID_POINTS, true)
    }

    pub fn omegas(&self) -> &[f64] {
        &self.omegas
    }

    fn widened(&self, factor: f64) -> Result<Self> {
        let positive: Vec<f64> = self.omegas.iter().copied().filter(|&w| w > 0.0).collect();
        let lo = positive.first().copied().unwrap_or(GRID_LO);
        let hi = positive.last().copied().unwrap_or(GRID_HI) * factor;
        Self::log_spaced(lo, hi, positive.len().max(2), self.omegas.first() == Some(&0.0))
    }
}

/// One point of the frequency response; `omega` is `+inf` for the asymptote.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransferSample {
    pub omega: f64,
    pub value: Complex64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sweep {
    pub samples: Vec<TransferSample>,
    /// Frequencies at which `L̄₁ - jωI` was singular; not sampled.
    pub skipped: Vec<f64>,
}

/// Samples `G(jω)` over `grid`, then appends the `ω → ∞` limit `0`.
pub fn nyquist_sweep(
    lbar1: &DenseMatrix,
    q: &ProjectionBasis,
    u: usize,
    v: usize,
    q_uv: f64,
    q_vu: f64,
    grid: &FrequencyGrid,
) -> Result<Sweep> {
    let (b, c) = pair_vectors(q, u, v, q_uv, q_vu)?;
    let mut samples = Vec::with_capacity(grid.omegas.len() + 1);
    let mut skipped = Vec::new();
    for &omega in &grid.omegas {
        match transfer(lbar1, &b, &c, omega) {
            Ok(value) => samples.push(TransferSample { omega, value }),
            Err(Error::Singular(_)) => skipped.push(omega),
            Err(e) => return Err(e),
        }
    }
    samples.push(TransferSample {
        omega: f64::INFINITY,
        value: Complex64::new(0.0, 0.0),
    });
    Ok(Sweep { samples, skipped })
}

/// CSV with header `omega,re,im`; the asymptote row has `omega = inf`.
pub fn sweep_csv(sweep: &Sweep) -> String {
    let mut out = String::from("omega,re,im\n");
    for s in &sweep.samples {
        let omega = if s.omega.is_infinite() {
            "inf".to_string()
        } else {
            format!("{:e}", report::round_sig(s.omega))
        };
        let _ = writeln!(
            out,
            "{omega},{:e},{:e}",
            report::round_sig(s.value.re),
            report::round_sig(s.value.im)
        );
    }
    for w in &sweep.skipped {
        let _ = writeln!(out, "# skipped singular frequency {w:e}");
    }
    out
}

/// A frequency where `G(jω)` is real.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Crossing {
    pub omega: f64,
    pub re: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    /// The bound is attained at `ω = 0`: it is exact.
    NecessaryAndSufficient,
    /// The bound is attained at a nonzero frequency: it only guarantees
    /// the spectrum condition below it.
    SufficientOnly,
}

impl Regime {
    pub fn as_str(self) -> &'static str {
        match self {
            Regime::NecessaryAndSufficient => "NecessaryAndSufficient",
            Regime::SufficientOnly => "SufficientOnly",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DeltaStarResult {
    /// `+inf` when no positive real crossing exists.
    pub delta_star: f64,
    pub crossings: Vec<Crossing>,
    /// `None` when `delta_star` is infinite.
    pub omega_star: Option<f64>,
    /// `None` when `delta_star` is infinite.
    pub regime: Option<Regime>,
    /// `1 / Re G(0)` when `Re G(0) > 0`, else `+inf`.
    pub necessary_bound: f64,
    pub diagnostic: Option<String>,
}

impl DeltaStarResult {
    pub fn to_json(&self) -> Value {
        json!({
            "delta_star": report::real(self.delta_star),
            "crossings": self.crossings.iter().map(|c| json!({
                "omega": report::real(c.omega),
                "re": report::real(c.re),
            })).collect::<Vec<_>>(),
            "omega_star": self.omega_star.map_or(Value::Null, report::real),
            "regime": self.regime.map_or(Value::Null, |r| json!(r.as_str())),
            "necessary_bound": report::real(self.necessary_bound),
            "diagnostic": self.diagnostic,
        })
    }
}

/// δ* for perturbing `g1` along `pert` (its `delta` is ignored), using the
/// default frequency grid.
pub fn delta_star(g1: &SignedDigraph, pert: &EdgePerturbation) -> Result<DeltaStarResult> {
    delta_star_with_grid(g1, pert, None).map(|(r, _)| r)
}

/// Like [`delta_star`], optionally on a caller-supplied grid. Also returns
/// the sweep that produced the result.
pub fn delta_star_with_grid(
    g1: &SignedDigraph,
    pert: &EdgePerturbation,
    grid: Option<FrequencyGrid>,
) -> Result<(DeltaStarResult, Sweep)> {
    let l1 = laplacian(g1);
    require_spectrum_condition(&l1)?;
    let q = projection_basis(g1.n())?;
    let lbar1 = reduced_laplacian(&l1, &q)?;
    let scale = eigenvalues(&lbar1)?.max_modulus();
    let (b, c) = pair_vectors(&q, pert.u, pert.v, pert.q_uv, pert.q_vu)?;

    let mut grid = match grid {
        Some(g) => g,
        None => FrequencyGrid::for_scale(scale)?,
    };
    let g0 = transfer(&lbar1, &b, &c, 0.0)?.re;
    let necessary_bound = if g0 > POSITIVE_RE_TOL {
        1.0 / g0
    } else {
        f64::INFINITY
    };
    let zero_omega = ZERO_OMEGA_RTOL * scale.max(1.0);

    let mut widened = false;
    loop {
        let sweep = nyquist_sweep(&lbar1, &q, pert.u, pert.v, pert.q_uv, pert.q_vu, &grid)?;
        let crossings = find_crossings(&lbar1, &b, &c, g0, &sweep)?;
        let best = crossings
            .iter()
            .filter(|x| x.re > POSITIVE_RE_TOL)
            .map(|x| x.re)
            .fold(f64::NEG_INFINITY, f64::max);
        if best.is_finite() {
            let achieving: Vec<&Crossing> = crossings
                .iter()
                .filter(|x| x.re >= best * (1.0 - TIE_RTOL))
                .collect();
            let at_zero = achieving.iter().find(|x| x.omega.abs() <= zero_omega);
            let (omega_star, regime) = match at_zero {
                Some(x) => (x.omega, Regime::NecessaryAndSufficient),
                None => (achieving[0].omega, Regime::SufficientOnly),
            };
            let result = DeltaStarResult {
                delta_star: 1.0 / best,
                crossings,
                omega_star: Some(omega_star),
                regime: Some(regime),
                necessary_bound,
                diagnostic: None,
            };
            return Ok((result, sweep));
        }
        if widened {
            let result = DeltaStarResult {
                delta_star: f64::INFINITY,
                crossings,
                omega_star: None,
                regime: None,
                necessary_bound,
                diagnostic: Some(
                    "no real-axis crossing with positive real part found on the widened grid; \
                     with q_uv + q_vu > 0 a large enough perturbation drives the trace of L \
                     negative, so a finite bound exists and this indicates numerical escape"
                        .into(),
                ),
            };
            return Ok((result, sweep));
        }
        grid = grid.widened(WIDEN_FACTOR)?;
        widened = true;
    }
}

/// `ω = 0` plus every sign change of `Im G` between adjacent finite
/// samples, refined by bisection.
fn find_crossings(
    lbar1: &DenseMatrix,
    b: &nalgebra::DVector<f64>,
    c: &nalgebra::DVector<f64>,
    g0: f64,
    sweep: &Sweep,
) -> Result<Vec<Crossing>> {
    let mut out = vec![Crossing { omega: 0.0, re: g0 }];
    let finite: Vec<&TransferSample> = sweep
        .samples
        .iter()
        .filter(|s| s.omega.is_finite() && s.omega > 0.0)
        .collect();
    for pair in finite.windows(2) {
        let (a, z) = (pair[0], pair[1]);
        let (ia, iz) = (a.value.im, z.value.im);
        if ia == 0.0 {
            out.push(Crossing {
                omega: a.omega,
                re: a.value.re,
            });
            continue;
        }
        if ia * iz >= 0.0 {
            continue;
        }
        let (mut lo, mut hi, mut flo) = (a.omega, z.omega, ia);
        let mut mid_val = a.value;
        let mut mid = lo;
        for _ in 0..200 {
            mid = 0.5 * (lo + hi);
            mid_val = transfer(lbar1, b, c, mid)?;
            if mid_val.im.abs() < IM_TOL || hi - lo <= f64::EPSILON * hi {
                break;
            }
            if (mid_val.im < 0.0) == (flo < 0.0) {
                lo = mid;
                flo = mid_val.im;
            } else {
                hi = mid;
            }
        }
        out.push(Crossing {
            omega: mid,
            re: mid_val.re,
        });
    }
    Ok(out)
}

/// Reference δ*: bisection on the spectrum condition of the perturbed
/// graph over `[0, (Σ L₁[i][i] + 1) / min(1, q_uv + q_vu)]`, 60 halvings.
/// Returns `+inf` when the condition still holds at the upper end.
pub fn delta_star_bisection(g1: &SignedDigraph, pert: &EdgePerturbation) -> Result<f64> {
    let l1 = laplacian(g1);
    require_spectrum_condition(&l1)?;
    let trace: f64 = (0..g1.n()).map(|i| l1[(i, i)]).sum();
    let gain = (pert.q_uv + pert.q_vu).min(1.0);
    let stable = |delta: f64| -> Result<bool> {
        Ok(super::check_spectrum_condition(&pert.with_delta(delta)?.apply(g1)?))
    };
    let mut lo = 0.0;
    let mut hi = (trace + 1.0) / gain;
    if stable(hi)? {
        return Ok(f64::INFINITY);
    }
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if stable(mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_pair_r_value_is_one() {
        let g = SignedDigraph::from_edges(2, [(1, 2, 1.0), (2, 1, 1.0)]).unwrap();
        let q = projection_basis(2).unwrap();
        let lbar = reduced_laplacian(&laplacian(&g), &q).unwrap();
        let r = r_value(&lbar, &q, 1, 2, 1.0, 1.0, 0.0).unwrap();
        assert!((r - Complex64::new(1.0, 0.0)).norm() < 1e-14);
        let r = r_value(&lbar, &q, 1, 2, 0.0, 0.0, 3.0).unwrap();
        assert_eq!(r, Complex64::new(0.0, 0.0));
    }

    #[test]
    fn singular_frequency_is_reported() {
        let g = SignedDigraph::from_edges(2, [(1, 2, 1.0), (2, 1, 1.0)]).unwrap();
        let q = projection_basis(2).unwrap();
        // L̄ = [2]; shifting by jω never hits 2, but an edgeless graph's L̄ = 0 does at ω = 0
        let zero = DenseMatrix::zeros(1, 1);
        assert!(matches!(
            r_value(&zero, &q, 1, 2, 1.0, 1.0, 0.0),
            Err(Error::Singular(_))
        ));
        let lbar = reduced_laplacian(&laplacian(&g), &q).unwrap();
        let grid = FrequencyGrid::log_spaced(0.1, 10.0, 5, true).unwrap();
        let sweep = nyquist_sweep(&lbar, &q, 1, 2, 1.0, 1.0, &grid).unwrap();
        assert_eq!(sweep.samples.len(), 7);
        assert!(sweep.samples.last().unwrap().omega.is_infinite());
        assert!(sweep_csv(&sweep).starts_with("omega,re,im\n"));
    }

    #[test]
    fn grid_validation() {
        assert!(FrequencyGrid::log_spaced(0.0, 1.0, 10, true).is_err());
        assert!(FrequencyGrid::log_spaced(1.0, 1.0, 10, true).is_err());
        let g = FrequencyGrid::log_spaced(1.0, 100.0, 3, true).unwrap();
        assert_eq!(g.omegas().len(), 4);
        assert!((g.omegas()[2] - 10.0).abs() < 1e-12);
    }

    #[test]
    fn two_node_bound_is_exact() {
        // L̄₁ = [2], G(jω) = 2 / (2 - jω): one positive crossing at ω = 0
        let g = SignedDigraph::from_edges(2, [(1, 2, 1.0), (2, 1, 1.0)]).unwrap();
        let pert = EdgePerturbation::new(1, 2, 1.0, 1.0, 0.0).unwrap();
        let res = delta_star(&g, &pert).unwrap();
        assert!((res.delta_star - 1.0).abs() < 1e-12);
        assert_eq!(res.regime, Some(Regime::NecessaryAndSufficient));
        assert!((res.necessary_bound - 1.0).abs() < 1e-12);
        let oracle = delta_star_bisection(&g, &pert).unwrap();
        assert!((oracle - 1.0).abs() < 1e-6);
    }

    #[test]
    fn premise_is_enforced() {
        let g = SignedDigraph::new(3);
        let pert = EdgePerturbation::new(1, 2, 1.0, 0.0, 0.0).unwrap();
        assert!(matches!(delta_star(&g, &pert), Err(Error::Premise(_))));
    }
}
