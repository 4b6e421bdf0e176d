//! Projection basis, reduced Laplacian, spectra and zero-eigenvalue bases.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::graph::{laplacian, DenseMatrix, SignedDigraph};
use crate::linalg::{lu_solve, real_eigenvalues};
use crate::reach::ReachDecomposition;

/// `(n-1) x n` matrix with orthonormal rows spanning the complement of `1_n`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectionBasis {
    q: DenseMatrix,
}

impl ProjectionBasis {
    /// Helmert rows: row `i` is `(e_1 + ... + e_i - i e_{i+1}) / sqrt(i (i+1))`.
    pub fn helmert(n: usize) -> Result<Self> {
        check_size(n)?;
        let mut q = DenseMatrix::zeros(n - 1, n);
        for r in 0..n - 1 {
            let i = (r + 1) as f64;
            let scale = 1.0 / (i * (i + 1.0)).sqrt();
            for c in 0..=r {
                q[(r, c)] = scale;
            }
            q[(r, r + 1)] = -i * scale;
        }
        Ok(Self { q })
    }

    /// Rows 2..n of the Householder reflector sending `e_1` to `1_n / sqrt(n)`.
    /// A second, differently oriented basis for invariance checks.
    pub fn householder(n: usize) -> Result<Self> {
        check_size(n)?;
        let mut v = DVector::from_element(n, 1.0 / (n as f64).sqrt());
        v[0] -= 1.0;
        let norm2 = v.norm_squared();
        let h = DenseMatrix::identity(n, n) - (&v * v.transpose()) * (2.0 / norm2);
        Ok(Self {
            q: h.rows(1, n - 1).into_owned(),
        })
    }

    pub fn n(&self) -> usize {
        self.q.ncols()
    }

    pub fn matrix(&self) -> &DenseMatrix {
        &self.q
    }
}

fn check_size(n: usize) -> Result<()> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!(
            "projection basis needs n >= 2, got {n}"
        )));
    }
    Ok(())
}

pub fn projection_basis(n: usize) -> Result<ProjectionBasis> {
    ProjectionBasis::helmert(n)
}

/// `L̄ = Q L Qᵀ`.
pub fn reduced_laplacian(l: &DenseMatrix, q: &ProjectionBasis) -> Result<DenseMatrix> {
    if l.nrows() != l.ncols() || l.nrows() != q.n() {
        return Err(Error::Dimension(format!(
            "{}x{} Laplacian with a basis for n = {}",
            l.nrows(),
            l.ncols(),
            q.n()
        )));
    }
    let qm = q.matrix();
    Ok(qm * l * qm.transpose())
}

/// Eigenvalues sorted by real part, then imaginary part.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    pub values: Vec<Complex64>,
}

impl Spectrum {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Smallest positive real part, if any eigenvalue lies strictly right of `tol`.
    pub fn min_positive_real(&self, tol: f64) -> Option<f64> {
        self.values
            .iter()
            .map(|z| z.re)
            .filter(|&re| re > tol)
            .fold(None, |acc, re| Some(acc.map_or(re, |a: f64| a.min(re))))
    }

    pub fn max_modulus(&self) -> f64 {
        self.values.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }
}

pub fn sort_eigenvalues(values: &mut [Complex64]) {
    values.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
}

pub fn eigenvalues(m: &DenseMatrix) -> Result<Spectrum> {
    let mut values = real_eigenvalues(m)?;
    sort_eigenvalues(&mut values);
    Ok(Spectrum { values })
}

/// Maximum absolute row sum.
pub fn inf_norm(m: &DenseMatrix) -> f64 {
    m.row_iter()
        .map(|r| r.iter().map(|x| x.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Modulus below which an eigenvalue counts as zero for a matrix of norm `scale`.
pub fn zero_threshold(scale: f64) -> f64 {
    1e-9 * scale.max(1.0)
}

pub fn zero_multiplicity(spec: &Spectrum, scale: f64) -> usize {
    let tol = zero_threshold(scale);
    spec.values.iter().filter(|z| z.norm() < tol).count()
}

/// Right and left null vectors of `L` indexed by reach set.
#[derive(Debug, Clone, PartialEq)]
pub struct NullBasis {
    pub d: usize,
    pub gammas: Vec<DVector<f64>>,
    pub mus: Vec<DVector<f64>>,
}

fn require_nonnegative(g: &SignedDigraph) -> Result<()> {
    if !g.is_nonnegative() {
        return Err(Error::Premise(
            "null-space bases require nonnegative weights".into(),
        ));
    }
    Ok(())
}

fn submatrix(l: &DenseMatrix, rows: &[usize], cols: &[usize]) -> DenseMatrix {
    DenseMatrix::from_fn(rows.len(), cols.len(), |r, c| l[(rows[r], cols[c])])
}

/// `γ_k`: ones on `X_k`, zeros off `R_k`, and on `C_k` the solution of
/// `L_CC γ_C = -L_{C,X_k} 1`.
pub fn null_right_vectors(
    g: &SignedDigraph,
    decomp: &ReachDecomposition,
) -> Result<Vec<DVector<f64>>> {
    require_nonnegative(g)?;
    let l = laplacian(g);
    let n = g.n();
    let mut out = Vec::with_capacity(decomp.d);
    for k in 0..decomp.d {
        let mut gamma = DVector::zeros(n);
        let x: Vec<usize> = decomp.exclusive[k].iter().map(|i| i - 1).collect();
        let c: Vec<usize> = decomp.common[k].iter().map(|i| i - 1).collect();
        for &i in &x {
            gamma[i] = 1.0;
        }
        if !c.is_empty() {
            let lcc = submatrix(&l, &c, &c);
            let rhs = -(submatrix(&l, &c, &x) * DVector::from_element(x.len(), 1.0));
            let sol = lu_solve(lcc, rhs, &format!("common block of reach set {}", k + 1))?;
            for (t, &i) in c.iter().enumerate() {
                gamma[i] = sol[t];
            }
        }
        out.push(gamma);
    }
    Ok(out)
}

/// `μ_k`: left null vector of the `U_k` block, summing to one, zero elsewhere.
pub fn null_left_vectors(
    g: &SignedDigraph,
    decomp: &ReachDecomposition,
) -> Result<Vec<DVector<f64>>> {
    require_nonnegative(g)?;
    let l = laplacian(g);
    let n = g.n();
    let mut out = Vec::with_capacity(decomp.d);
    for k in 0..decomp.d {
        let u: Vec<usize> = decomp.reaching[k].iter().map(|i| i - 1).collect();
        let m = u.len();
        let block_t = submatrix(&l, &u, &u).transpose();
        let mut sys = block_t.clone();
        for c in 0..m {
            sys[(m - 1, c)] = 1.0;
        }
        let mut rhs = DVector::zeros(m);
        rhs[m - 1] = 1.0;
        let what = format!("reaching block {} has kernel dimension != 1", k + 1);
        let nu = lu_solve(sys, rhs, &what)?;
        let scale = inf_norm(&block_t).max(1.0);
        if (&block_t * &nu).amax() > 1e-9 * scale {
            return Err(Error::Singular(what));
        }
        let mut mu = DVector::zeros(n);
        for (t, &i) in u.iter().enumerate() {
            mu[i] = nu[t];
        }
        out.push(mu);
    }
    Ok(out)
}

pub fn null_basis(g: &SignedDigraph, decomp: &ReachDecomposition) -> Result<NullBasis> {
    Ok(NullBasis {
        d: decomp.d,
        gammas: null_right_vectors(g, decomp)?,
        mus: null_left_vectors(g, decomp)?,
    })
}

/// Outcome of [`NullBasis::check`]: hard violations fail the check,
/// common-set entries that land on an endpoint of `(0, 1)` within slack
/// are only flagged.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct NullBasisCheck {
    pub violations: Vec<String>,
    pub flags: Vec<String>,
}

impl NullBasisCheck {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

impl NullBasis {
    pub fn check(&self, l: &DenseMatrix, decomp: &ReachDecomposition) -> NullBasisCheck {
        const TOL: f64 = 1e-9;
        let n = l.nrows();
        let mut report = NullBasisCheck::default();
        let scale = inf_norm(l).max(1.0);
        let mut sum = DVector::<f64>::zeros(n);
        for k in 0..self.d {
            let (gamma, mu) = (&self.gammas[k], &self.mus[k]);
            let tag = k + 1;
            if (l * gamma).amax() >= TOL * scale {
                report.violations.push(format!("L γ_{tag} != 0"));
            }
            if (mu.transpose() * l).amax() >= TOL * scale {
                report.violations.push(format!("μ_{tag}ᵀ L != 0"));
            }
            for i in 1..=n {
                let gi = gamma[i - 1];
                if decomp.exclusive[k].contains(&i) {
                    if (gi - 1.0).abs() > TOL {
                        report.violations.push(format!("γ_{tag}[{i}] != 1"));
                    }
                } else if !decomp.reaches[k].contains(&i) {
                    if gi.abs() > TOL {
                        report.violations.push(format!("γ_{tag}[{i}] != 0"));
                    }
                } else if !(-TOL..=1.0 + TOL).contains(&gi) {
                    report.violations.push(format!("γ_{tag}[{i}] = {gi} outside (0, 1)"));
                } else if gi <= TOL || gi >= 1.0 - TOL {
                    report.flags.push(format!("γ_{tag}[{i}] = {gi} at an endpoint of (0, 1)"));
                }
                let mi = mu[i - 1];
                if decomp.reaching[k].contains(&i) {
                    let single = decomp.reaching[k].len() == 1;
                    let inside = if single {
                        (mi - 1.0).abs() <= TOL
                    } else {
                        mi > 0.0 && mi < 1.0
                    };
                    if !inside {
                        report.violations.push(format!("μ_{tag}[{i}] = {mi} outside (0, 1]"));
                    }
                } else if mi.abs() > TOL {
                    report.violations.push(format!("μ_{tag}[{i}] != 0 off U_{tag}"));
                }
            }
            if (mu.sum() - 1.0).abs() > TOL {
                report.violations.push(format!("μ_{tag} does not sum to 1"));
            }
            for j in 0..self.d {
                let want = if j == k { 1.0 } else { 0.0 };
                if (mu.dot(&self.gammas[j]) - want).abs() > TOL {
                    report
                        .violations
                        .push(format!("μ_{tag}ᵀ γ_{} != {want}", j + 1));
                }
            }
            sum += gamma;
        }
        if self.d > 0 && sum.iter().any(|s| (s - 1.0).abs() > TOL) {
            report.violations.push("Σ γ_k != 1".into());
        }
        report
    }

    /// `Υ`: rows `μ_kᵀ`.
    pub fn upsilon(&self) -> DenseMatrix {
        let n = self.mus.first().map_or(0, |m| m.len());
        DMatrix::from_fn(self.d, n, |k, i| self.mus[k][i])
    }

    /// `Γ`: columns `γ_k`.
    pub fn gamma(&self) -> DenseMatrix {
        let n = self.gammas.first().map_or(0, |g| g.len());
        DMatrix::from_fn(n, self.d, |i, k| self.gammas[k][i])
    }
}
