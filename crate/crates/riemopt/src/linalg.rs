//! Dense real linear-algebra kernel backing the matrix manifolds.
//!
//! Self-contained: symmetric eigensolver (cyclic Jacobi), Cholesky, QR with a
//! positive-diagonal sign convention, triangular and general solves, matrix
//! exponential/logarithm/square root for symmetric and rotation inputs, and
//! Daleckii-Krein Frechet derivatives of the symmetric log/exp.

use crate::error::{Error, Result};

/// Relative symmetry tolerance: inputs with larger asymmetry are rejected
/// where the contract requires a symmetric argument.
pub const SYM_TOL: f64 = 1e-8;
/// Pivot/rank threshold for triangular and QR factorizations.
pub const RANK_TOL: f64 = 1e-12;
const JACOBI_SWEEPS: usize = 100;
/// Divided-difference branch switch for near-equal eigenvalue pairs.
const EIG_PAIR_TOL: f64 = 1e-10;

/// Dense row-major real matrix. Double precision throughout; the single
/// precision configuration is realized upstream by quantizing trace state.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::Shape("matrix dimensions must be >= 1".into()));
        }
        if data.len() != rows * cols {
            return Err(Error::Shape(format!(
                "{}x{} matrix requires {} entries, got {}",
                rows,
                cols,
                rows * cols,
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = Self::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    pub fn diag(entries: &[f64]) -> Self {
        let n = entries.len();
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = entries[i];
        }
        m
    }

    pub fn from_slice(rows: usize, cols: usize, data: &[f64]) -> Result<Self> {
        Self::new(rows, cols, data.to_vec())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    pub fn transpose(&self) -> Matrix {
        Matrix::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn matmul(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.cols, other.rows, "matmul dimension mismatch");
        let mut out = Matrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == 0.0 {
                    continue;
                }
                for j in 0..other.cols {
                    out[(i, j)] += a * other[(k, j)];
                }
            }
        }
        out
    }

    pub fn add(&self, other: &Matrix) -> Matrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Matrix::from_fn(self.rows, self.cols, |i, j| self[(i, j)] + other[(i, j)])
    }

    pub fn sub(&self, other: &Matrix) -> Matrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Matrix::from_fn(self.rows, self.cols, |i, j| self[(i, j)] - other[(i, j)])
    }

    pub fn scale(&self, s: f64) -> Matrix {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&v| v * s).collect(),
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, &v| m.max(v.abs()))
    }

    pub fn fro_norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    /// (A + A^T)/2
    pub fn symmetrized(&self) -> Matrix {
        assert!(self.is_square());
        Matrix::from_fn(self.rows, self.cols, |i, j| {
            0.5 * (self[(i, j)] + self[(j, i)])
        })
    }

    /// (A - A^T)/2
    pub fn skew_part(&self) -> Matrix {
        assert!(self.is_square());
        Matrix::from_fn(self.rows, self.cols, |i, j| {
            0.5 * (self[(i, j)] - self[(j, i)])
        })
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }
}

impl std::ops::Index<(usize, usize)> for Matrix {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.cols + j]
    }
}

fn require_square(a: &Matrix) -> Result<usize> {
    if !a.is_square() {
        return Err(Error::Shape(format!(
            "expected square matrix, got {}x{}",
            a.rows, a.cols
        )));
    }
    Ok(a.rows)
}

fn require_symmetric(a: &Matrix) -> Result<()> {
    require_square(a)?;
    let scale = a.max_abs().max(1.0);
    let asym = a.sub(&a.transpose()).max_abs();
    if asym > SYM_TOL * scale {
        return Err(Error::Shape(format!(
            "matrix is not symmetric: max|A - A^T| = {asym:.3e}"
        )));
    }
    Ok(())
}

/// Symmetric eigendecomposition A = Q diag(lambda) Q^T via cyclic Jacobi,
/// eigenvalues ascending, eigenvectors as columns of Q.
pub fn sym_eig(a: &Matrix) -> Result<(Vec<f64>, Matrix)> {
    let n = require_square(a)?;
    require_symmetric(a)?;
    let mut m = a.symmetrized();
    let mut q = Matrix::identity(n);
    if n == 1 {
        return Ok((vec![m[(0, 0)]], q));
    }
    let tol = 1e-14 * m.fro_norm().max(f64::MIN_POSITIVE);
    let mut converged = false;
    for _sweep in 0..JACOBI_SWEEPS {
        let mut off = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                off += m[(i, j)] * m[(i, j)];
            }
        }
        if (2.0 * off).sqrt() <= tol {
            converged = true;
            break;
        }
        for p in 0..n - 1 {
            for r in (p + 1)..n {
                let apq = m[(p, r)];
                if apq.abs() <= tol / (n * n) as f64 {
                    continue;
                }
                let theta = (m[(r, r)] - m[(p, p)]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                // A <- G^T A G
                for k in 0..n {
                    let akp = m[(k, p)];
                    let akq = m[(k, r)];
                    m[(k, p)] = c * akp - s * akq;
                    m[(k, r)] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = m[(p, k)];
                    let aqk = m[(r, k)];
                    m[(p, k)] = c * apk - s * aqk;
                    m[(r, k)] = s * apk + c * aqk;
                }
                // Q <- Q G
                for k in 0..n {
                    let qkp = q[(k, p)];
                    let qkq = q[(k, r)];
                    q[(k, p)] = c * qkp - s * qkq;
                    q[(k, r)] = s * qkp + c * qkq;
                }
            }
        }
    }
    if !converged {
        // final check after the last sweep
        let mut off = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                off += m[(i, j)] * m[(i, j)];
            }
        }
        if (2.0 * off).sqrt() > tol {
            return Err(Error::NoConvergence {
                sweeps: JACOBI_SWEEPS,
            });
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[(i, i)].partial_cmp(&m[(j, j)]).unwrap());
    let eigs: Vec<f64> = order.iter().map(|&i| m[(i, i)]).collect();
    let qs = Matrix::from_fn(n, n, |i, j| q[(i, order[j])]);
    Ok((eigs, qs))
}

/// Cholesky factorization A = L L^T, L lower triangular with positive diagonal.
pub fn cholesky(a: &Matrix) -> Result<Matrix> {
    let n = require_square(a)?;
    require_symmetric(a)?;
    let a = a.symmetrized();
    let mut l = Matrix::zeros(n, n);
    for j in 0..n {
        let mut d = a[(j, j)];
        for k in 0..j {
            d -= l[(j, k)] * l[(j, k)];
        }
        if d <= 0.0 || !d.is_finite() {
            return Err(Error::NotPositiveDefinite { pivot: j });
        }
        let dj = d.sqrt();
        l[(j, j)] = dj;
        for i in (j + 1)..n {
            let mut v = a[(i, j)];
            for k in 0..j {
                v -= l[(i, k)] * l[(j, k)];
            }
            l[(i, j)] = v / dj;
        }
    }
    Ok(l)
}

/// Thin Householder QR with the sign convention diag(R) > 0.
pub fn qr_signfix(a: &Matrix) -> Result<(Matrix, Matrix)> {
    let (n, p) = (a.rows, a.cols);
    if n < p {
        return Err(Error::Shape(format!("qr_signfix requires rows >= cols, got {n}x{p}")));
    }
    let scale = a.max_abs().max(1.0);
    let mut r = a.clone();
    // Accumulate Householder vectors; build thin Q by applying reflectors to I.
    let mut vs: Vec<Vec<f64>> = Vec::with_capacity(p);
    for k in 0..p {
        let mut v: Vec<f64> = (k..n).map(|i| r[(i, k)]).collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm < RANK_TOL * scale {
            return Err(Error::RankDeficient { col: k });
        }
        let alpha = if v[0] >= 0.0 { -norm } else { norm };
        v[0] -= alpha;
        let vnorm2: f64 = v.iter().map(|x| x * x).sum();
        if vnorm2 > 0.0 {
            // apply I - 2vv^T/v^Tv to the trailing block of R
            for j in k..p {
                let mut dot = 0.0;
                for (idx, i) in (k..n).enumerate() {
                    dot += v[idx] * r[(i, j)];
                }
                let f = 2.0 * dot / vnorm2;
                for (idx, i) in (k..n).enumerate() {
                    r[(i, j)] -= f * v[idx];
                }
            }
        }
        vs.push(v);
    }
    // rank check on the triangular factor
    for k in 0..p {
        if r[(k, k)].abs() < RANK_TOL * scale {
            return Err(Error::RankDeficient { col: k });
        }
    }
    // thin Q: apply reflectors in reverse to the first p columns of I
    let mut q = Matrix::zeros(n, p);
    for j in 0..p {
        q[(j, j)] = 1.0;
    }
    for k in (0..p).rev() {
        let v = &vs[k];
        let vnorm2: f64 = v.iter().map(|x| x * x).sum();
        if vnorm2 == 0.0 {
            continue;
        }
        for j in 0..p {
            let mut dot = 0.0;
            for (idx, i) in (k..n).enumerate() {
                dot += v[idx] * q[(i, j)];
            }
            let f = 2.0 * dot / vnorm2;
            for (idx, i) in (k..n).enumerate() {
                q[(i, j)] -= f * v[idx];
            }
        }
    }
    // sign fix: make diag(R) positive
    let mut rt = Matrix::zeros(p, p);
    for i in 0..p {
        for j in i..p {
            rt[(i, j)] = r[(i, j)];
        }
    }
    for i in 0..p {
        if rt[(i, i)] < 0.0 {
            for j in i..p {
                rt[(i, j)] = -rt[(i, j)];
            }
            for k in 0..n {
                q[(k, i)] = -q[(k, i)];
            }
        }
    }
    Ok((q, rt))
}

/// Solve L X = B (or the flagged variants) for triangular L.
pub fn solve_triangular(l: &Matrix, b: &Matrix, lower: bool, transpose: bool) -> Result<Matrix> {
    let n = require_square(l)?;
    if b.rows != n {
        return Err(Error::Shape(format!(
            "solve_triangular: rhs has {} rows, expected {n}",
            b.rows
        )));
    }
    let scale = l.max_abs().max(1.0);
    for i in 0..n {
        if l[(i, i)].abs() <= RANK_TOL * scale {
            return Err(Error::Singular { row: i });
        }
    }
    // effective lower-triangular flag after transposition
    let eff_lower = lower != transpose;
    let get = |i: usize, j: usize| if transpose { l[(j, i)] } else { l[(i, j)] };
    let mut x = b.clone();
    for col in 0..b.cols {
        if eff_lower {
            for i in 0..n {
                let mut v = x[(i, col)];
                for k in 0..i {
                    v -= get(i, k) * x[(k, col)];
                }
                x[(i, col)] = v / get(i, i);
            }
        } else {
            for i in (0..n).rev() {
                let mut v = x[(i, col)];
                for k in (i + 1)..n {
                    v -= get(i, k) * x[(k, col)];
                }
                x[(i, col)] = v / get(i, i);
            }
        }
    }
    Ok(x)
}

/// Solve A X = B by Gaussian elimination with partial pivoting.
pub fn solve(a: &Matrix, b: &Matrix) -> Result<Matrix> {
    let n = require_square(a)?;
    if b.rows != n {
        return Err(Error::Shape(format!(
            "solve: rhs has {} rows, expected {n}",
            b.rows
        )));
    }
    let mut m = a.clone();
    let mut x = b.clone();
    let scale = a.max_abs().max(1.0);
    for k in 0..n {
        let mut piv = k;
        for i in (k + 1)..n {
            if m[(i, k)].abs() > m[(piv, k)].abs() {
                piv = i;
            }
        }
        if m[(piv, k)].abs() <= RANK_TOL * scale {
            return Err(Error::Singular { row: k });
        }
        if piv != k {
            for j in 0..n {
                let t = m[(k, j)];
                m[(k, j)] = m[(piv, j)];
                m[(piv, j)] = t;
            }
            for j in 0..x.cols {
                let t = x[(k, j)];
                x[(k, j)] = x[(piv, j)];
                x[(piv, j)] = t;
            }
        }
        for i in (k + 1)..n {
            let f = m[(i, k)] / m[(k, k)];
            if f == 0.0 {
                continue;
            }
            for j in k..n {
                m[(i, j)] -= f * m[(k, j)];
            }
            for j in 0..x.cols {
                x[(i, j)] -= f * x[(k, j)];
            }
        }
    }
    for i in (0..n).rev() {
        for j in 0..x.cols {
            let mut v = x[(i, j)];
            for k in (i + 1)..n {
                v -= m[(i, k)] * x[(k, j)];
            }
            x[(i, j)] = v / m[(i, i)];
        }
    }
    Ok(x)
}

pub fn inverse(a: &Matrix) -> Result<Matrix> {
    solve(a, &Matrix::identity(a.rows))
}

fn sym_fn(a: &Matrix, f: impl Fn(f64) -> Result<f64>) -> Result<Matrix> {
    let (eigs, q) = sym_eig(a)?;
    let n = eigs.len();
    let mut fe = Vec::with_capacity(n);
    for &l in &eigs {
        fe.push(f(l)?);
    }
    // Q f(Lambda) Q^T
    let mut out = Matrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            let mut s = 0.0;
            for k in 0..n {
                s += q[(i, k)] * fe[k] * q[(j, k)];
            }
            out[(i, j)] = s;
        }
    }
    Ok(out.symmetrized())
}

/// Matrix exponential of a symmetric matrix.
pub fn expm_sym(a: &Matrix) -> Result<Matrix> {
    sym_fn(a, |l| Ok(l.exp()))
}

/// Principal matrix logarithm of an SPD matrix.
pub fn logm_spd(a: &Matrix) -> Result<Matrix> {
    sym_fn(a, |l| {
        if l <= 0.0 {
            Err(Error::NotPositiveDefinite { pivot: 0 })
        } else {
            Ok(l.ln())
        }
    })
}

/// Principal square root of an SPD matrix.
pub fn sqrtm_spd(a: &Matrix) -> Result<Matrix> {
    sym_fn(a, |l| {
        if l <= 0.0 {
            Err(Error::NotPositiveDefinite { pivot: 0 })
        } else {
            Ok(l.sqrt())
        }
    })
}

/// Inverse square root of an SPD matrix.
pub fn invsqrtm_spd(a: &Matrix) -> Result<Matrix> {
    sym_fn(a, |l| {
        if l <= 0.0 {
            Err(Error::NotPositiveDefinite { pivot: 0 })
        } else {
            Ok(1.0 / l.sqrt())
        }
    })
}

fn frechet_sym(a: &Matrix, u: &Matrix, f: impl Fn(f64) -> f64, df: impl Fn(f64) -> f64, require_pd: bool) -> Result<Matrix> {
    let n = require_square(a)?;
    require_symmetric(u)?;
    let (eigs, q) = sym_eig(a)?;
    if require_pd {
        if let Some((i, _)) = eigs.iter().enumerate().find(|(_, &l)| l <= 0.0) {
            return Err(Error::NotPositiveDefinite { pivot: i });
        }
    }
    let us = u.symmetrized();
    let w = q.transpose().matmul(&us).matmul(&q);
    let mut h = Matrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            let (li, lj) = (eigs[i], eigs[j]);
            let coeff = if (li - lj).abs() < EIG_PAIR_TOL * li.abs().max(lj.abs()).max(1e-300) {
                df(0.5 * (li + lj))
            } else {
                (f(li) - f(lj)) / (li - lj)
            };
            h[(i, j)] = coeff * w[(i, j)];
        }
    }
    Ok(q.matmul(&h).matmul(&q.transpose()).symmetrized())
}

/// Frechet derivative of the matrix logarithm at SPD A in direction U
/// (Daleckii-Krein divided differences).
pub fn dlogm_spd(a: &Matrix, u: &Matrix) -> Result<Matrix> {
    frechet_sym(a, u, |l| l.ln(), |l| 1.0 / l, true)
}

/// Frechet derivative of the matrix exponential at symmetric A in direction U.
pub fn dexpm_sym(a: &Matrix, u: &Matrix) -> Result<Matrix> {
    frechet_sym(a, u, |l| l.exp(), |l| l.exp(), false)
}

/// General matrix exponential via scaling-and-squaring with a [6/6] Pade
/// approximant. Used for the exponential of skew matrices on SO(n).
pub fn expm(a: &Matrix) -> Result<Matrix> {
    let n = require_square(a)?;
    let norm = a.max_abs() * n as f64; // cheap inf-norm bound
    let s = if norm > 0.5 {
        (norm / 0.5).log2().ceil() as u32
    } else {
        0
    };
    let x = a.scale(0.5_f64.powi(s as i32));
    const C: [f64; 7] = [
        1.0,
        0.5,
        5.0 / 44.0,
        1.0 / 66.0,
        1.0 / 792.0,
        1.0 / 15840.0,
        1.0 / 665280.0,
    ];
    let mut pows = vec![Matrix::identity(n)];
    for k in 1..=6 {
        let next = pows[k - 1].matmul(&x);
        pows.push(next);
    }
    let mut num = Matrix::zeros(n, n);
    let mut den = Matrix::zeros(n, n);
    for k in 0..=6 {
        let term = pows[k].scale(C[k]);
        num = num.add(&term);
        if k % 2 == 0 {
            den = den.add(&term);
        } else {
            den = den.sub(&term);
        }
    }
    let mut e = solve(&den, &num)?;
    for _ in 0..s {
        e = e.matmul(&e);
    }
    Ok(e)
}

/// Principal square root by the Denman-Beavers iteration.
fn sqrtm_db(a: &Matrix) -> Result<Matrix> {
    let n = a.rows;
    let mut y = a.clone();
    let mut z = Matrix::identity(n);
    for _ in 0..60 {
        let yi = inverse(&y)?;
        let zi = inverse(&z)?;
        let yn = y.add(&zi).scale(0.5);
        let zn = z.add(&yi).scale(0.5);
        let delta = yn.sub(&y).max_abs();
        y = yn;
        z = zn;
        if delta < 1e-14 * y.max_abs().max(1.0) {
            return Ok(y);
        }
    }
    Err(Error::NoConvergence { sweeps: 60 })
}

/// log(I + E) by the alternating series, valid for small ||E||.
fn logm_near_identity(x: &Matrix) -> Matrix {
    let n = x.rows;
    let e = x.sub(&Matrix::identity(n));
    let mut term = e.clone();
    let mut sum = e.clone();
    for j in 2..=60 {
        term = term.matmul(&e);
        let contrib = term.scale(if j % 2 == 0 { -1.0 / j as f64 } else { 1.0 / j as f64 });
        sum = sum.add(&contrib);
        if term.max_abs() / j as f64 <= 1e-18 {
            break;
        }
    }
    sum
}

/// Principal logarithm of a rotation matrix; result is skew-symmetric.
/// Rodrigues formulas for n <= 3, inverse scaling-and-squaring otherwise.
pub fn logm_so(r: &Matrix) -> Result<Matrix> {
    let n = require_square(r)?;
    match n {
        1 => Ok(Matrix::zeros(1, 1)),
        2 => {
            let theta = r[(1, 0)].atan2(r[(0, 0)]);
            let mut m = Matrix::zeros(2, 2);
            m[(0, 1)] = -theta;
            m[(1, 0)] = theta;
            Ok(m)
        }
        3 => {
            let tr = r[(0, 0)] + r[(1, 1)] + r[(2, 2)];
            let cos_t = ((tr - 1.0) / 2.0).clamp(-1.0, 1.0);
            let theta = cos_t.acos();
            if std::f64::consts::PI - theta < 1e-6 {
                return Err(Error::CutLocus("rotation angle at pi".into()));
            }
            let skew = r.skew_part();
            if theta < 1e-8 {
                // log R ~ skew(R) for small angles
                return Ok(skew);
            }
            Ok(skew.scale(theta / theta.sin()))
        }
        _ => {
            let mut x = r.clone();
            let mut k = 0u32;
            while x.sub(&Matrix::identity(n)).fro_norm() > 0.25 {
                if k > 40 {
                    return Err(Error::CutLocus(
                        "rotation log did not contract (eigenvalue near -1)".into(),
                    ));
                }
                x = sqrtm_db(&x)?;
                k += 1;
            }
            let l = logm_near_identity(&x).scale(2f64.powi(k as i32));
            Ok(l.skew_part())
        }
    }
}

/// Thin SVD A = U diag(s) V^T via the eigendecomposition of A^T A.
/// Singular values descending; columns of U with s_i below tol are zero.
pub fn svd_thin(a: &Matrix) -> Result<(Matrix, Vec<f64>, Matrix)> {
    let (n, p) = (a.rows, a.cols);
    let b = a.transpose().matmul(a);
    let (eigs, v) = sym_eig(&b)?;
    // ascending -> descending
    let mut s = Vec::with_capacity(p);
    let mut vd = Matrix::zeros(p, p);
    for j in 0..p {
        let src = p - 1 - j;
        s.push(eigs[src].max(0.0).sqrt());
        for i in 0..p {
            vd[(i, j)] = v[(i, src)];
        }
    }
    let tol = 1e-13 * s.first().copied().unwrap_or(0.0).max(1.0);
    let mut u = Matrix::zeros(n, p);
    for j in 0..p {
        if s[j] > tol {
            for i in 0..n {
                let mut acc = 0.0;
                for k in 0..p {
                    acc += a[(i, k)] * vd[(k, j)];
                }
                u[(i, j)] = acc / s[j];
            }
        }
    }
    Ok((u, s, vd))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn assert_close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() <= tol, "{a} vs {b} (tol {tol})");
    }

    #[test]
    fn sym_eig_diagonal() {
        let a = Matrix::diag(&[3.0, 1.0]);
        let (e, q) = sym_eig(&a).unwrap();
        assert_close(e[0], 1.0, 1e-12);
        assert_close(e[1], 3.0, 1e-12);
        let qtq = q.transpose().matmul(&q);
        assert!(qtq.sub(&Matrix::identity(2)).max_abs() <= 1e-10);
    }

    #[test]
    fn sym_eig_identity() {
        let (e, q) = sym_eig(&Matrix::identity(3)).unwrap();
        for v in e {
            assert_close(v, 1.0, 1e-14);
        }
        assert!(q.transpose().matmul(&q).sub(&Matrix::identity(3)).max_abs() <= 1e-10);
    }

    #[test]
    fn sym_eig_2x2_hand_roots() {
        // characteristic polynomial of [[2,1],[1,2]]: (2-l)^2 - 1 -> l = 1, 3
        let a = Matrix::from_slice(2, 2, &[2.0, 1.0, 1.0, 2.0]).unwrap();
        let (e, _) = sym_eig(&a).unwrap();
        assert_close(e[0], 1.0, 1e-12);
        assert_close(e[1], 3.0, 1e-12);
    }

    #[test]
    fn sym_eig_random_reconstruction() {
        let mut rng = StdRng::seed_from_u64(42);
        for _ in 0..1000 {
            let n = rng.gen_range(1..=8);
            let raw = Matrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
            let a = raw.symmetrized();
            let (e, q) = sym_eig(&a).unwrap();
            for w in e.windows(2) {
                assert!(w[0] <= w[1] + 1e-14);
            }
            let recon = Matrix::from_fn(n, n, |i, j| {
                (0..n).map(|k| q[(i, k)] * e[k] * q[(j, k)]).sum()
            });
            let scale = a.max_abs().max(1e-12);
            assert!(recon.sub(&a).max_abs() <= 1e-9 * scale);
        }
    }

    #[test]
    fn sym_eig_rejects_asymmetric() {
        let a = Matrix::from_slice(2, 2, &[1.0, 5.0, 0.0, 1.0]).unwrap();
        assert!(sym_eig(&a).is_err());
    }

    #[test]
    fn cholesky_identity_and_hand() {
        let l = cholesky(&Matrix::identity(3)).unwrap();
        assert!(l.sub(&Matrix::identity(3)).max_abs() <= 1e-14);
        let a = Matrix::from_slice(2, 2, &[4.0, 2.0, 2.0, 5.0]).unwrap();
        let l = cholesky(&a).unwrap();
        let expected = Matrix::from_slice(2, 2, &[2.0, 0.0, 1.0, 2.0]).unwrap();
        assert!(l.sub(&expected).max_abs() <= 1e-12);
        let recon = l.matmul(&l.transpose());
        assert!(recon.sub(&a).max_abs() <= 1e-10 * a.max_abs());
    }

    #[test]
    fn cholesky_indefinite_rejected() {
        let a = Matrix::from_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]).unwrap();
        match cholesky(&a) {
            Err(Error::NotPositiveDefinite { pivot }) => assert_eq!(pivot, 1),
            other => panic!("expected NotPositiveDefinite, got {other:?}"),
        }
    }

    #[test]
    fn qr_trivial_cases() {
        let (q, r) = qr_signfix(&Matrix::identity(2)).unwrap();
        assert!(q.sub(&Matrix::identity(2)).max_abs() <= 1e-14);
        assert!(r.sub(&Matrix::identity(2)).max_abs() <= 1e-14);

        let (q, r) = qr_signfix(&Matrix::identity(2).scale(2.0)).unwrap();
        assert!(q.sub(&Matrix::identity(2)).max_abs() <= 1e-14);
        assert!(r.sub(&Matrix::identity(2).scale(2.0)).max_abs() <= 1e-14);

        let a = Matrix::from_slice(2, 1, &[0.0, 1.0]).unwrap();
        let (q, r) = qr_signfix(&a).unwrap();
        assert_close(q[(0, 0)], 0.0, 1e-14);
        assert_close(q[(1, 0)], 1.0, 1e-14);
        assert_close(r[(0, 0)], 1.0, 1e-14);
    }

    #[test]
    fn qr_random_properties() {
        let mut rng = StdRng::seed_from_u64(7);
        for _ in 0..200 {
            let n = rng.gen_range(2..=8);
            let p = rng.gen_range(1..=n);
            let a = Matrix::from_fn(n, p, |_, _| rng.gen_range(-1.0..1.0));
            let (q, r) = match qr_signfix(&a) {
                Ok(v) => v,
                Err(Error::RankDeficient { .. }) => continue,
                Err(e) => panic!("{e}"),
            };
            let qtq = q.transpose().matmul(&q);
            assert!(qtq.sub(&Matrix::identity(p)).max_abs() <= 1e-10);
            for i in 0..p {
                assert!(r[(i, i)] > 0.0);
            }
            let recon = q.matmul(&r);
            assert!(recon.sub(&a).max_abs() <= 1e-10 * a.max_abs().max(1.0));
        }
    }

    #[test]
    fn qr_rank_deficient_detected() {
        let a = Matrix::from_slice(3, 2, &[1.0, 2.0, 2.0, 4.0, 3.0, 6.0]).unwrap();
        assert!(matches!(qr_signfix(&a), Err(Error::RankDeficient { .. })));
    }

    #[test]
    fn triangular_solves() {
        let b = Matrix::from_slice(2, 2, &[1.0, 0.0, 0.0, 2.0]).unwrap();
        let x = solve_triangular(&Matrix::identity(2), &b, true, false).unwrap();
        assert!(x.sub(&b).max_abs() <= 1e-14);

        let l = Matrix::diag(&[2.0, 4.0]);
        let x = solve_triangular(&l, &Matrix::diag(&[2.0, 4.0]), true, false).unwrap();
        assert!(x.sub(&Matrix::identity(2)).max_abs() <= 1e-14);

        // forward substitution by hand: L=[[1,0],[1,1]], b=[1,2] -> x=[1,1]
        let l = Matrix::from_slice(2, 2, &[1.0, 0.0, 1.0, 1.0]).unwrap();
        let b = Matrix::from_slice(2, 1, &[1.0, 2.0]).unwrap();
        let x = solve_triangular(&l, &b, true, false).unwrap();
        assert_close(x[(0, 0)], 1.0, 1e-14);
        assert_close(x[(1, 0)], 1.0, 1e-14);

        let l0 = Matrix::from_slice(2, 2, &[0.0, 0.0, 1.0, 1.0]).unwrap();
        assert!(matches!(
            solve_triangular(&l0, &b, true, false),
            Err(Error::Singular { row: 0 })
        ));
    }

    #[test]
    fn triangular_transpose_flag() {
        let l = Matrix::from_slice(2, 2, &[2.0, 0.0, 1.0, 3.0]).unwrap();
        let b = Matrix::from_slice(2, 1, &[4.0, 6.0]).unwrap();
        // solves L^T x = b
        let x = solve_triangular(&l, &b, true, true).unwrap();
        let resid = l.transpose().matmul(&x).sub(&b).max_abs();
        assert!(resid <= 1e-12);
    }

    #[test]
    fn matrix_functions_diagonal() {
        let e = expm_sym(&Matrix::zeros(2, 2)).unwrap();
        assert!(e.sub(&Matrix::identity(2)).max_abs() <= 1e-14);

        let a = Matrix::diag(&[(2.0_f64).exp().powi(1), 1.0]);
        let a = Matrix::diag(&[a[(0, 0)], 1.0]);
        let l = logm_spd(&a).unwrap();
        assert_close(l[(0, 0)], 2.0, 1e-12);
        assert_close(l[(1, 1)], 0.0, 1e-12);

        let s = sqrtm_spd(&Matrix::diag(&[4.0, 9.0])).unwrap();
        assert!(s.sub(&Matrix::diag(&[2.0, 3.0])).max_abs() <= 1e-12);
    }

    #[test]
    fn exp_log_roundtrip_random_spd() {
        let mut rng = StdRng::seed_from_u64(11);
        for _ in 0..200 {
            let n = rng.gen_range(1..=6);
            let raw = Matrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
            // eigenvalues within a few orders of magnitude; condition <= 1e6
            let s = raw.symmetrized().scale(3.0);
            let a = expm_sym(&s).unwrap();
            let back = expm_sym(&logm_spd(&a).unwrap()).unwrap();
            assert!(back.sub(&a).max_abs() <= 1e-8 * a.max_abs());
        }
    }

    #[test]
    fn logm_spd_rejects_nonpd() {
        assert!(matches!(
            logm_spd(&Matrix::diag(&[1.0, -0.5])),
            Err(Error::NotPositiveDefinite { .. })
        ));
    }

    #[test]
    fn dlogm_trivial_cases() {
        let u = Matrix::from_slice(2, 2, &[0.3, 0.1, 0.1, -0.2]).unwrap();
        let d = dlogm_spd(&Matrix::identity(2), &u).unwrap();
        assert!(d.sub(&u).max_abs() <= 1e-12);

        let a = Matrix::diag(&[2.5, 2.5]);
        let d = dlogm_spd(&a, &u).unwrap();
        assert!(d.sub(&u.scale(1.0 / 2.5)).max_abs() <= 1e-12);

        // dlogm(diag(1, e), diag(0, 1)) = diag(0, 1/e); cross-checked by the
        // central-difference oracle below
        let a = Matrix::diag(&[1.0, std::f64::consts::E]);
        let u = Matrix::diag(&[0.0, 1.0]);
        let d = dlogm_spd(&a, &u).unwrap();
        assert_close(d[(1, 1)], (-1.0_f64).exp(), 1e-10);
        assert_close(d[(0, 0)], 0.0, 1e-12);
    }

    #[test]
    fn dlogm_matches_central_differences() {
        let mut rng = StdRng::seed_from_u64(3);
        let h = 1e-5;
        for _ in 0..50 {
            let n = rng.gen_range(1..=5);
            let raw = Matrix::from_fn(n, n, |_, _| rng.gen_range(-0.6..0.6));
            let a = expm_sym(&raw.symmetrized()).unwrap();
            let u = Matrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0)).symmetrized();
            let d = dlogm_spd(&a, &u).unwrap();
            let plus = logm_spd(&a.add(&u.scale(h))).unwrap();
            let minus = logm_spd(&a.sub(&u.scale(h))).unwrap();
            let fd = plus.sub(&minus).scale(1.0 / (2.0 * h));
            let denom = fd.max_abs().max(1.0);
            assert!(
                d.sub(&fd).max_abs() / denom <= 1e-5,
                "dlogm mismatch: {:.3e}",
                d.sub(&fd).max_abs() / denom
            );
        }
    }

    #[test]
    fn dexpm_inverts_dlogm() {
        let mut rng = StdRng::seed_from_u64(9);
        for _ in 0..50 {
            let n = rng.gen_range(1..=5);
            let raw = Matrix::from_fn(n, n, |_, _| rng.gen_range(-0.6..0.6));
            let a = expm_sym(&raw.symmetrized()).unwrap();
            let u = Matrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0)).symmetrized();
            let la = logm_spd(&a).unwrap();
            let back = dexpm_sym(&la, &dlogm_spd(&a, &u).unwrap()).unwrap();
            assert!(back.sub(&u).max_abs() <= 1e-8 * u.max_abs().max(1.0));
        }
    }

    #[test]
    fn expm_skew_is_rotation() {
        let mut rng = StdRng::seed_from_u64(21);
        for _ in 0..100 {
            let n = rng.gen_range(2..=6);
            let a = Matrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0)).skew_part();
            let r = expm(&a).unwrap();
            let rtr = r.transpose().matmul(&r);
            assert!(rtr.sub(&Matrix::identity(n)).max_abs() <= 1e-12);
            let l = logm_so(&r).unwrap();
            assert!(l.sub(&a).max_abs() <= 1e-9 * a.max_abs().max(1.0));
        }
    }

    #[test]
    fn logm_so_small_dims() {
        // 2D rotation by 0.7
        let (c, s) = (0.7_f64.cos(), 0.7_f64.sin());
        let r = Matrix::from_slice(2, 2, &[c, -s, s, c]).unwrap();
        let l = logm_so(&r).unwrap();
        assert_close(l[(1, 0)], 0.7, 1e-12);
        // identity
        let l = logm_so(&Matrix::identity(3)).unwrap();
        assert!(l.max_abs() <= 1e-14);
    }

    #[test]
    fn svd_reconstruction() {
        let mut rng = StdRng::seed_from_u64(5);
        for _ in 0..100 {
            let n = rng.gen_range(2..=7);
            let p = rng.gen_range(1..=n);
            let a = Matrix::from_fn(n, p, |_, _| rng.gen_range(-1.0..1.0));
            let (u, s, v) = svd_thin(&a).unwrap();
            let recon = Matrix::from_fn(n, p, |i, j| {
                (0..p).map(|k| u[(i, k)] * s[k] * v[(j, k)]).sum()
            });
            assert!(recon.sub(&a).max_abs() <= 1e-8 * a.max_abs().max(1.0));
        }
    }

    #[test]
    fn general_solve() {
        let a = Matrix::from_slice(2, 2, &[0.0, 1.0, 2.0, 0.0]).unwrap();
        let b = Matrix::from_slice(2, 1, &[3.0, 4.0]).unwrap();
        let x = solve(&a, &b).unwrap();
        assert!(a.matmul(&x).sub(&b).max_abs() <= 1e-12);
        assert!(inverse(&a).unwrap().matmul(&a).sub(&Matrix::identity(2)).max_abs() <= 1e-12);
    }
}
