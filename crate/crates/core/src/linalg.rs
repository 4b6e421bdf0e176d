//! Dense kernels: LU solves with singularity detection, real eigenvalues
//! by balanced Hessenberg QR, complex Schur form, and min-cost assignment.

// Index loops mirror the textbook formulations of these kernels.
#![allow(clippy::needless_range_loop)]

use nalgebra::{ComplexField, DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Relative pivot size below which an LU factorization is called singular.
pub const SINGULAR_PIVOT_RTOL: f64 = 1e-13;

const MAX_QR_ITERS_PER_EIGENVALUE: usize = 60;

/// Solves `a x = b` by LU with partial pivoting. Reports `what` when the
/// smallest pivot is negligible relative to the largest.
pub fn lu_solve<T>(a: DMatrix<T>, b: DVector<T>, what: &str) -> Result<DVector<T>>
where
    T: ComplexField<RealField = f64>,
{
    if a.nrows() != a.ncols() || a.nrows() != b.len() {
        return Err(Error::Dimension(format!(
            "{what}: {}x{} system with rhs of length {}",
            a.nrows(),
            a.ncols(),
            b.len()
        )));
    }
    if a.nrows() == 0 {
        return Ok(b);
    }
    let lu = a.lu();
    let u = lu.u();
    let pivots = u.diagonal();
    let (min, max) = pivots.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), p| {
        let m = p.clone().modulus();
        (lo.min(m), hi.max(m))
    });
    if max == 0.0 || min <= SINGULAR_PIVOT_RTOL * max {
        return Err(Error::Singular(what.to_string()));
    }
    lu.solve(&b)
        .ok_or_else(|| Error::Singular(what.to_string()))
}

pub fn to_complex(m: &DMatrix<f64>) -> DMatrix<Complex64> {
    m.map(|x| Complex64::new(x, 0.0))
}

/// Eigenvalues of a real square matrix, unordered. Complex eigenvalues come
/// in exact conjugate pairs.
pub fn real_eigenvalues(m: &DMatrix<f64>) -> Result<Vec<Complex64>> {
    let n = m.nrows();
    if n != m.ncols() {
        return Err(Error::Dimension(format!("eigenvalues of a {}x{} matrix", n, m.ncols())));
    }
    if m.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidArgument("matrix has non-finite entries".into()));
    }
    let mut a: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| m[(i, j)]).collect()).collect();
    balance(&mut a);
    hessenberg_in_place(&mut a);
    hqr(&mut a).ok_or(Error::NoConvergence(n))
}

/// Diagonal similarity scaling by powers of two so row and column norms
/// are comparable. Leaves eigenvalues unchanged.
fn balance(a: &mut [Vec<f64>]) {
    const RADIX: f64 = 2.0;
    let n = a.len();
    let sqrdx = RADIX * RADIX;
    let mut done = false;
    while !done {
        done = true;
        for i in 0..n {
            let mut c = 0.0;
            let mut r = 0.0;
            for j in (0..n).filter(|&j| j != i) {
                c += a[j][i].abs();
                r += a[i][j].abs();
            }
            if c == 0.0 || r == 0.0 {
                continue;
            }
            let s = c + r;
            let mut f = 1.0;
            let mut g = r / RADIX;
            while c < g {
                f *= RADIX;
                c *= sqrdx;
            }
            g = r * RADIX;
            while c > g {
                f /= RADIX;
                c /= sqrdx;
            }
            if (c + r) / f < 0.95 * s {
                done = false;
                let ginv = 1.0 / f;
                for j in 0..n {
                    a[i][j] *= ginv;
                }
                for row in a.iter_mut() {
                    row[i] *= f;
                }
            }
        }
    }
}

/// Householder reduction to upper Hessenberg form.
fn hessenberg_in_place(a: &mut [Vec<f64>]) {
    let n = a.len();
    for k in 0..n.saturating_sub(2) {
        let norm: f64 = (k + 1..n).map(|i| a[i][k] * a[i][k]).sum::<f64>().sqrt();
        if norm == 0.0 {
            continue;
        }
        let alpha = if a[k + 1][k] > 0.0 { -norm } else { norm };
        let mut v: Vec<f64> = (k + 1..n).map(|i| a[i][k]).collect();
        v[0] -= alpha;
        let vnorm2: f64 = v.iter().map(|x| x * x).sum();
        if vnorm2 == 0.0 {
            continue;
        }
        // left: rows k+1.., all columns k..
        for j in k..n {
            let dot: f64 = (0..v.len()).map(|t| v[t] * a[k + 1 + t][j]).sum();
            let f = 2.0 * dot / vnorm2;
            for t in 0..v.len() {
                a[k + 1 + t][j] -= f * v[t];
            }
        }
        // right: columns k+1.., all rows
        for row in a.iter_mut() {
            let dot: f64 = (0..v.len()).map(|t| v[t] * row[k + 1 + t]).sum();
            let f = 2.0 * dot / vnorm2;
            for t in 0..v.len() {
                row[k + 1 + t] -= f * v[t];
            }
        }
        a[k + 1][k] = alpha;
        for row in a.iter_mut().skip(k + 2) {
            row[k] = 0.0;
        }
    }
}

fn sign(a: f64, b: f64) -> f64 {
    if b >= 0.0 {
        a.abs()
    } else {
        -a.abs()
    }
}

/// Francis double-shift QR on an upper Hessenberg matrix with exceptional
/// shifts after 10 and 20 stalled iterations. Destroys `a`.
fn hqr(a: &mut [Vec<f64>]) -> Option<Vec<Complex64>> {
    let n = a.len();
    let mut wr = vec![0.0; n];
    let mut wi = vec![0.0; n];
    let mut anorm = 0.0;
    for i in 0..n {
        for j in i.saturating_sub(1)..n {
            anorm += a[i][j].abs();
        }
    }
    let mut nn = n as isize - 1;
    let mut t = 0.0;
    let mut its = 0usize;
    while nn >= 0 {
        let nu = nn as usize;
        let mut l = nu;
        while l >= 1 {
            let mut s = a[l - 1][l - 1].abs() + a[l][l].abs();
            if s == 0.0 {
                s = anorm;
            }
            if a[l][l - 1].abs() + s == s {
                a[l][l - 1] = 0.0;
                break;
            }
            l -= 1;
        }
        let mut x = a[nu][nu];
        if l == nu {
            wr[nu] = x + t;
            wi[nu] = 0.0;
            nn -= 1;
            its = 0;
            continue;
        }
        let mut y = a[nu - 1][nu - 1];
        let mut w = a[nu][nu - 1] * a[nu - 1][nu];
        if l == nu - 1 {
            let p = 0.5 * (y - x);
            let q = p * p + w;
            let mut z = q.abs().sqrt();
            x += t;
            if q >= 0.0 {
                z = p + sign(z, p);
                wr[nu - 1] = x + z;
                wr[nu] = if z != 0.0 { x - w / z } else { x + z };
                wi[nu - 1] = 0.0;
                wi[nu] = 0.0;
            } else {
                wr[nu - 1] = x + p;
                wr[nu] = x + p;
                wi[nu - 1] = -z;
                wi[nu] = z;
            }
            nn -= 2;
            its = 0;
            continue;
        }
        if its >= MAX_QR_ITERS_PER_EIGENVALUE {
            return None;
        }
        if its == 10 || its == 20 || its == 40 {
            t += x;
            for (i, row) in a.iter_mut().enumerate().take(nu + 1) {
                row[i] -= x;
            }
            let s = a[nu][nu - 1].abs() + a[nu - 1][nu - 2].abs();
            x = 0.75 * s;
            y = x;
            w = -0.4375 * s * s;
        }
        its += 1;

        let mut m = nu - 2;
        let (mut p, mut q, mut r);
        loop {
            let z = a[m][m];
            let rr = x - z;
            let ss = y - z;
            p = (rr * ss - w) / a[m + 1][m] + a[m][m + 1];
            q = a[m + 1][m + 1] - z - rr - ss;
            r = a[m + 2][m + 1];
            let s = p.abs() + q.abs() + r.abs();
            p /= s;
            q /= s;
            r /= s;
            if m == l {
                break;
            }
            let u = a[m][m - 1].abs() * (q.abs() + r.abs());
            let v = p.abs() * (a[m - 1][m - 1].abs() + z.abs() + a[m + 1][m + 1].abs());
            if u + v == v {
                break;
            }
            m -= 1;
        }
        for i in m + 2..=nu {
            a[i][i - 2] = 0.0;
            if i != m + 2 {
                a[i][i - 3] = 0.0;
            }
        }
        let mut k = m;
        while k < nu {
            if k != m {
                p = a[k][k - 1];
                q = a[k + 1][k - 1];
                r = if k != nu - 1 { a[k + 2][k - 1] } else { 0.0 };
                x = p.abs() + q.abs() + r.abs();
                if x != 0.0 {
                    p /= x;
                    q /= x;
                    r /= x;
                }
            }
            let s = sign((p * p + q * q + r * r).sqrt(), p);
            if s != 0.0 {
                if k == m {
                    if l != m {
                        a[k][k - 1] = -a[k][k - 1];
                    }
                } else {
                    a[k][k - 1] = -s * x;
                }
                p += s;
                x = p / s;
                y = q / s;
                let z = r / s;
                q /= p;
                r /= p;
                for j in k..=nu {
                    let mut pp = a[k][j] + q * a[k + 1][j];
                    if k != nu - 1 {
                        pp += r * a[k + 2][j];
                        a[k + 2][j] -= pp * z;
                    }
                    a[k + 1][j] -= pp * y;
                    a[k][j] -= pp * x;
                }
                let mmin = if nu < k + 3 { nu } else { k + 3 };
                for row in a.iter_mut().take(mmin + 1).skip(l) {
                    let mut pp = x * row[k] + y * row[k + 1];
                    if k != nu - 1 {
                        pp += z * row[k + 2];
                        row[k + 2] -= pp * r;
                    }
                    row[k + 1] -= pp * q;
                    row[k] -= pp;
                }
            }
            k += 1;
        }
    }
    Some(
        wr.into_iter()
            .zip(wi)
            .map(|(re, im)| Complex64::new(re, im))
            .collect(),
    )
}

/// Complex Schur form `m = U T U^*` with `T` upper triangular.
pub struct ComplexSchur {
    pub unitary: DMatrix<Complex64>,
    pub triangular: DMatrix<Complex64>,
}

pub fn complex_schur(m: &DMatrix<Complex64>) -> Result<ComplexSchur> {
    let n = m.nrows();
    if n != m.ncols() {
        return Err(Error::Dimension(format!("Schur form of a {}x{} matrix", n, m.ncols())));
    }
    let mut t = m.clone();
    let mut u = DMatrix::<Complex64>::identity(n, n);
    complex_hessenberg(&mut t, &mut u);

    let norm: f64 = t.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if n <= 1 || norm == 0.0 {
        return Ok(ComplexSchur {
            unitary: u,
            triangular: t,
        });
    }
    let eps = f64::EPSILON;
    let mut hi = n - 1;
    let mut iter = 0usize;
    while hi > 0 {
        let mut l = hi;
        while l > 0 {
            let mut s = t[(l - 1, l - 1)].norm() + t[(l, l)].norm();
            if s == 0.0 {
                s = norm;
            }
            if t[(l, l - 1)].norm() <= eps * s {
                t[(l, l - 1)] = Complex64::new(0.0, 0.0);
                break;
            }
            l -= 1;
        }
        if l == hi {
            hi -= 1;
            iter = 0;
            continue;
        }
        if iter >= MAX_QR_ITERS_PER_EIGENVALUE {
            return Err(Error::NoConvergence(n));
        }
        iter += 1;

        let shift = if iter.is_multiple_of(10) {
            t[(hi, hi)] + 0.75 * t[(hi, hi - 1)].re.abs()
        } else {
            wilkinson_shift(
                t[(hi - 1, hi - 1)],
                t[(hi - 1, hi)],
                t[(hi, hi - 1)],
                t[(hi, hi)],
            )
        };

        for k in l..hi {
            let (x, y) = if k == l {
                (t[(l, l)] - shift, t[(l + 1, l)])
            } else {
                (t[(k, k - 1)], t[(k + 1, k - 1)])
            };
            let (c, s) = givens(x, y);
            let col_start = if k == l { l } else { k - 1 };
            for j in col_start..n {
                let t1 = t[(k, j)];
                let t2 = t[(k + 1, j)];
                t[(k, j)] = c * t1 + s * t2;
                t[(k + 1, j)] = -s.conj() * t1 + c * t2;
            }
            let row_end = (k + 2).min(hi);
            for i in 0..=row_end {
                let t1 = t[(i, k)];
                let t2 = t[(i, k + 1)];
                t[(i, k)] = t1 * c + t2 * s.conj();
                t[(i, k + 1)] = -t1 * s + t2 * c;
            }
            for i in 0..n {
                let u1 = u[(i, k)];
                let u2 = u[(i, k + 1)];
                u[(i, k)] = u1 * c + u2 * s.conj();
                u[(i, k + 1)] = -u1 * s + u2 * c;
            }
            if k > l {
                t[(k + 1, k - 1)] = Complex64::new(0.0, 0.0);
            }
        }
    }
    for j in 0..n {
        for i in j + 1..n {
            t[(i, j)] = Complex64::new(0.0, 0.0);
        }
    }
    Ok(ComplexSchur {
        unitary: u,
        triangular: t,
    })
}

/// Eigenvalue of the trailing 2x2 block closest to its last diagonal entry.
fn wilkinson_shift(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Complex64 {
    let half = (a - d) * 0.5;
    let disc = (half * half + b * c).sqrt();
    let mu1 = (a + d) * 0.5 + disc;
    let mu2 = (a + d) * 0.5 - disc;
    if (mu1 - d).norm() <= (mu2 - d).norm() {
        mu1
    } else {
        mu2
    }
}

/// Rotation `[[c, s], [-conj(s), c]]` with real `c` mapping `(x, y)` to `(r, 0)`.
fn givens(x: Complex64, y: Complex64) -> (f64, Complex64) {
    let ax = x.norm();
    let norm = ax.hypot(y.norm());
    if norm == 0.0 {
        return (1.0, Complex64::new(0.0, 0.0));
    }
    if ax == 0.0 {
        return (0.0, Complex64::new(1.0, 0.0));
    }
    let c = ax / norm;
    let s = (x / ax) * y.conj() / norm;
    (c, s)
}

/// Householder reduction of `t` to upper Hessenberg form, accumulating
/// the transformations into `u` so that `t_in = u t u^*`.
fn complex_hessenberg(t: &mut DMatrix<Complex64>, u: &mut DMatrix<Complex64>) {
    let n = t.nrows();
    for k in 0..n.saturating_sub(2) {
        let norm: f64 = (k + 1..n).map(|i| t[(i, k)].norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 {
            continue;
        }
        let x0 = t[(k + 1, k)];
        let phase = if x0.norm() == 0.0 {
            Complex64::new(1.0, 0.0)
        } else {
            x0 / x0.norm()
        };
        let alpha = -phase * norm;
        let mut v: Vec<Complex64> = (k + 1..n).map(|i| t[(i, k)]).collect();
        v[0] -= alpha;
        let vnorm2: f64 = v.iter().map(|z| z.norm_sqr()).sum();
        if vnorm2 == 0.0 {
            continue;
        }
        // H = I - 2 v v^* / (v^* v); t <- H t H, u <- u H
        for j in 0..n {
            let dot: Complex64 = (0..v.len()).map(|s| v[s].conj() * t[(k + 1 + s, j)]).sum();
            let f = dot * (2.0 / vnorm2);
            for s in 0..v.len() {
                t[(k + 1 + s, j)] -= v[s] * f;
            }
        }
        for i in 0..n {
            let dot: Complex64 = (0..v.len()).map(|s| t[(i, k + 1 + s)] * v[s]).sum();
            let f = dot * (2.0 / vnorm2);
            for s in 0..v.len() {
                t[(i, k + 1 + s)] -= f * v[s].conj();
            }
            let dot: Complex64 = (0..v.len()).map(|s| u[(i, k + 1 + s)] * v[s]).sum();
            let f = dot * (2.0 / vnorm2);
            for s in 0..v.len() {
                u[(i, k + 1 + s)] -= f * v[s].conj();
            }
        }
        for i in k + 2..n {
            t[(i, k)] = Complex64::new(0.0, 0.0);
        }
    }
}

/// Minimum-cost perfect assignment on a square cost matrix (Hungarian
/// method). Returns `assign[row] = col`.
pub fn min_cost_assignment(cost: &[Vec<f64>]) -> Vec<usize> {
    let n = cost.len();
    let inf = f64::INFINITY;
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; n + 1];
    let mut p = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0;
        let mut minv = vec![inf; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = inf;
            let mut j1 = 0;
            for j in 1..=n {
                if used[j] {
                    continue;
                }
                let cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
                if cur < minv[j] {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut assign = vec![0; n];
    for j in 1..=n {
        if p[j] != 0 {
            assign[p[j] - 1] = j - 1;
        }
    }
    assign
}

/// Largest pairwise distance after optimally matching two equal-size
/// multisets of complex numbers (minimum total distance matching).
pub fn multiset_distance(a: &[Complex64], b: &[Complex64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::Dimension(format!(
            "multisets of size {} and {}",
            a.len(),
            b.len()
        )));
    }
    let cost: Vec<Vec<f64>> = a
        .iter()
        .map(|x| b.iter().map(|y| (x - y).norm()).collect())
        .collect();
    let assign = min_cost_assignment(&cost);
    Ok(assign
        .iter()
        .enumerate()
        .map(|(i, &j)| cost[i][j])
        .fold(0.0, f64::max))
}
