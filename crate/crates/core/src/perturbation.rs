//! First-order behaviour of the semisimple zero eigenvalue under small
//! negative edges, and the node pairs that are sensitive to them.
//!
//! For `L = L₁ + ε L₂` with `L₁` nonnegative and `d` reach sets, the `d`
//! eigenvalues that start at zero move as `ε ξ_i + O(ε²)` with `ξ_i` the
//! eigenvalues of `Θ = Υ L₂ Γ`, where the rows of `Υ` are the left null
//! vectors `μ_k` and the columns of `Γ` the right null vectors `γ_k`.

use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::graph::{laplacian, superpose, DenseMatrix, SignedDigraph};
use crate::linalg::{multiset_distance, real_eigenvalues};
use crate::reach::{reach_decomposition, ReachDecomposition};
use crate::report;
use crate::spectral::{eigenvalues, inf_norm, null_basis, sort_eigenvalues, zero_threshold, NullBasis, Spectrum};
use crate::Complex64;

#[derive(Debug, Clone, PartialEq)]
pub struct ThetaMatrix {
    pub d: usize,
    pub theta: DenseMatrix,
    /// `d x n`, rows `μ_kᵀ`.
    pub upsilon: DenseMatrix,
    /// `n x d`, columns `γ_k`.
    pub gamma: DenseMatrix,
}

/// `Θ = Υ L₂ Γ` for the negative graph `g2` added to `g1`.
pub fn theta_matrix(
    g1: &SignedDigraph,
    decomp: &ReachDecomposition,
    basis: &NullBasis,
    g2: &SignedDigraph,
) -> Result<ThetaMatrix> {
    if g1.n() != g2.n() {
        return Err(Error::NodeCountMismatch(g1.n(), g2.n()));
    }
    if !g1.is_nonnegative() {
        return Err(Error::Premise("base graph must have nonnegative weights".into()));
    }
    if decomp.d < 2 || basis.d != decomp.d {
        return Err(Error::Premise(format!(
            "first-order analysis needs at least two reach sets, got {}",
            decomp.d
        )));
    }
    for (i, j, w) in g2.edges() {
        if w >= 0.0 {
            return Err(Error::Premise(format!("perturbing edge ({i},{j}) is not negative")));
        }
        if g1.has_edge(i, j) {
            return Err(Error::Premise(format!("perturbing edge ({i},{j}) already exists")));
        }
    }
    let upsilon = basis.upsilon();
    let gamma = basis.gamma();
    let theta = &upsilon * laplacian(g2) * &gamma;
    Ok(ThetaMatrix {
        d: decomp.d,
        theta,
        upsilon,
        gamma,
    })
}

impl ThetaMatrix {
    /// Largest entry of `ΥΓ - I`.
    pub fn biorthogonality_error(&self) -> f64 {
        (&self.upsilon * &self.gamma - DenseMatrix::identity(self.d, self.d)).amax()
    }

    pub fn trace(&self) -> f64 {
        self.theta.trace()
    }
}

/// Predicted zero-group eigenvalues `ε ξ_i`, sorted.
pub fn first_order_zero_eigenvalues(theta: &ThetaMatrix, eps: f64) -> Result<Vec<Complex64>> {
    let mut xi = real_eigenvalues(&theta.theta)?;
    for z in &mut xi {
        *z *= eps;
    }
    sort_eigenvalues(&mut xi);
    Ok(xi)
}

/// The `d` eigenvalues of `L₁ + ε L₂` with smallest modulus, sorted.
pub fn exact_zero_group(
    l1: &DenseMatrix,
    l2: &DenseMatrix,
    eps: f64,
    d: usize,
) -> Result<Vec<Complex64>> {
    let spec = eigenvalues(&(l1 + l2 * eps))?;
    let mut values = spec.values;
    values.sort_by(|a, b| a.norm().total_cmp(&b.norm()));
    values.truncate(d);
    sort_eigenvalues(&mut values);
    Ok(values)
}

/// Largest deviation between predicted and exact zero-group eigenvalues
/// after minimum-weight matching.
pub fn first_order_error(
    l1: &DenseMatrix,
    l2: &DenseMatrix,
    theta: &ThetaMatrix,
    eps: f64,
) -> Result<f64> {
    let predicted = first_order_zero_eigenvalues(theta, eps)?;
    let exact = exact_zero_group(l1, l2, eps, theta.d)?;
    multiset_distance(&predicted, &exact)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum PairClass {
    /// `u ∈ U_i`, `v ∈ X_j` with `j != i`.
    Cond1,
    /// `u ∈ U_i`, `v` in some common set.
    Cond2,
    /// `u ∈ U_i`, `v ∈ X_i`.
    Remark4a,
    /// `u ∈ R_i \ U_i`, `v ∈ R_j` with `j != i`.
    Remark4b,
    Other,
}

impl PairClass {
    pub fn as_str(self) -> &'static str {
        match self {
            PairClass::Cond1 => "Cond1",
            PairClass::Cond2 => "Cond2",
            PairClass::Remark4a => "Remark4a",
            PairClass::Remark4b => "Remark4b",
            PairClass::Other => "Other",
        }
    }

    pub fn is_sensitive(self) -> bool {
        matches!(self, PairClass::Cond1 | PairClass::Cond2)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ThetaSign {
    Negative,
    Zero,
}

impl ThetaSign {
    pub fn as_str(self) -> &'static str {
        match self {
            ThetaSign::Negative => "Negative",
            ThetaSign::Zero => "Zero",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PairClassification {
    pub u: usize,
    pub v: usize,
    pub class: PairClass,
    /// Sign of the diagonal of `Θ` for a single negative edge `(u, v)`.
    pub theta_sign: ThetaSign,
}

/// Classifies the ordered pair `(u, v)`: a negative weight `a_uv` makes
/// `v` influence `u` antagonistically.
pub fn classify_pair(decomp: &ReachDecomposition, u: usize, v: usize) -> PairClassification {
    let d = decomp.d;
    let u_in = |k: usize| decomp.reaching[k].contains(&u);
    let class = if (0..d).any(|i| u_in(i) && (0..d).any(|j| j != i && decomp.exclusive[j].contains(&v))) {
        PairClass::Cond1
    } else if (0..d).any(u_in) && decomp.common.iter().any(|c| c.contains(&v)) {
        PairClass::Cond2
    } else if (0..d).any(|i| u_in(i) && decomp.exclusive[i].contains(&v)) {
        PairClass::Remark4a
    } else if (0..d).any(|i| {
        decomp.reaches[i].contains(&u)
            && !u_in(i)
            && (0..d).any(|j| j != i && decomp.reaches[j].contains(&v))
    }) {
        PairClass::Remark4b
    } else {
        PairClass::Other
    };
    let theta_sign = if class.is_sensitive() {
        ThetaSign::Negative
    } else {
        ThetaSign::Zero
    };
    PairClassification {
        u,
        v,
        class,
        theta_sign,
    }
}

/// All ordered non-edges `(u, v)` of `g1` in class `Cond1` or `Cond2`.
pub fn sensitive_pairs(g1: &SignedDigraph) -> Result<Vec<PairClassification>> {
    if !g1.is_nonnegative() {
        return Err(Error::Premise("base graph must have nonnegative weights".into()));
    }
    let decomp = reach_decomposition(g1);
    if decomp.d < 2 {
        return Err(Error::Premise(
            "sensitive pairs need at least two reach sets; the graph has one".into(),
        ));
    }
    let n = g1.n();
    Ok((1..=n)
        .flat_map(|u| (1..=n).map(move |v| (u, v)))
        .filter(|&(u, v)| u != v && !g1.has_edge(u, v))
        .map(|(u, v)| classify_pair(&decomp, u, v))
        .filter(|p| p.class.is_sensitive())
        .collect())
}

/// Outcome of eigensolving a perturbed Laplacian.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SensitivityVerdict {
    /// Some eigenvalue has real part below `-threshold`.
    Negative,
    /// None is clearly negative, but more than one eigenvalue sits within
    /// the zero threshold of the imaginary axis.
    Inconclusive,
    /// One zero eigenvalue; all others have real part above the threshold.
    Positive,
}

impl SensitivityVerdict {
    pub fn as_str(self) -> &'static str {
        match self {
            SensitivityVerdict::Negative => "Negative",
            SensitivityVerdict::Inconclusive => "Inconclusive",
            SensitivityVerdict::Positive => "Positive",
        }
    }
}

/// Verdict for `g1 ⊕ g2` with its spectrum.
pub fn perturbation_verdict(
    g1: &SignedDigraph,
    g2: &SignedDigraph,
) -> Result<(SensitivityVerdict, Spectrum)> {
    let l = laplacian(&superpose(g1, g2)?);
    let spec = eigenvalues(&l)?;
    let tol = zero_threshold(inf_norm(&l));
    let verdict = if spec.values.iter().any(|z| z.re < -tol) {
        SensitivityVerdict::Negative
    } else if spec.values.iter().filter(|z| z.re.abs() <= tol).count() > 1 {
        SensitivityVerdict::Inconclusive
    } else {
        SensitivityVerdict::Positive
    };
    Ok((verdict, spec))
}

/// Adds the edges `(u, v)` with weight `-eps` and eigensolves.
pub fn verify_edges(
    g1: &SignedDigraph,
    pairs: &[(usize, usize)],
    eps: f64,
) -> Result<SensitivityVerdict> {
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::InvalidArgument(format!("epsilon must be positive, got {eps}")));
    }
    let g2 = SignedDigraph::from_edges(g1.n(), pairs.iter().map(|&(u, v)| (u, v, -eps)))?;
    perturbation_verdict(g1, &g2).map(|(v, _)| v)
}

/// True iff a single negative edge `(u, v)` of weight `-eps` produces an
/// eigenvalue with real part below `-threshold`.
pub fn verify_sensitivity(g1: &SignedDigraph, u: usize, v: usize, eps: f64) -> Result<bool> {
    Ok(verify_edges(g1, &[(u, v)], eps)? == SensitivityVerdict::Negative)
}

/// One row of the sensitive-pair report.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SensitivePairReport {
    pub pair: PairClassification,
    pub verdict: SensitivityVerdict,
}

impl SensitivePairReport {
    pub fn to_json(&self) -> Value {
        json!({
            "u": self.pair.u,
            "v": self.pair.v,
            "class": self.pair.class.as_str(),
            "theta_diag_sign": self.pair.theta_sign.as_str(),
            "verified": self.verdict == SensitivityVerdict::Negative,
            "verdict": self.verdict.as_str(),
        })
    }
}

/// Sensitive pairs of `g1`, each checked by eigensolve at `eps`.
pub fn sensitive_pair_report(g1: &SignedDigraph, eps: f64) -> Result<Vec<SensitivePairReport>> {
    sensitive_pairs(g1)?
        .into_iter()
        .map(|pair| {
            Ok(SensitivePairReport {
                pair,
                verdict: verify_edges(g1, &[(pair.u, pair.v)], eps)?,
            })
        })
        .collect()
}

/// Θ for a single negative unit edge `(u, v)` on `g1`.
pub fn single_edge_theta(g1: &SignedDigraph, u: usize, v: usize) -> Result<ThetaMatrix> {
    let decomp = reach_decomposition(g1);
    let basis = null_basis(g1, &decomp)?;
    let g2 = SignedDigraph::from_edges(g1.n(), [(u, v, -1.0)])?;
    theta_matrix(g1, &decomp, &basis, &g2)
}

/// JSON rendering of Θ.
pub fn theta_json(theta: &ThetaMatrix) -> Value {
    let rows: Vec<Value> = theta
        .theta
        .row_iter()
        .map(|r| report::reals(r.iter()))
        .collect();
    json!({ "d": theta.d, "theta": rows })
}
