//! Symmetric positive definite matrices under three metrics: affine-invariant,
//! Log-Euclidean, and Log-Cholesky (conjugation through the Cholesky factor).

use super::cholesky::CholeskyManifold;
use super::{normal, Rng, RowOps, EIG_FLOOR};
use crate::error::{Error, Result};
use crate::linalg::{
    cholesky, dexpm_sym, dlogm_spd, expm_sym, invsqrtm_spd, logm_spd, solve, solve_triangular,
    sqrtm_spd, sym_eig, Matrix,
};

fn mat(n: usize, x: &[f64]) -> Matrix {
    Matrix::from_slice(n, n, x).expect("row length fixed by descriptor")
}

fn spd_projx(n: usize, x: &[f64], out: &mut [f64]) -> Result<()> {
    let s = mat(n, x).symmetrized();
    let (eigs, q) = sym_eig(&s)?;
    let clipped: Vec<f64> = eigs.iter().map(|&l| l.max(EIG_FLOOR)).collect();
    let r = Matrix::from_fn(n, n, |i, j| {
        (0..n).map(|k| q[(i, k)] * clipped[k] * q[(j, k)]).sum()
    })
    .symmetrized();
    out.copy_from_slice(r.data());
    Ok(())
}

fn spd_random(n: usize, rng: &mut Rng, out: &mut [f64]) {
    let a = Matrix::from_fn(n, n, |_, _| 0.5 * normal(rng)).symmetrized();
    let e = expm_sym(&a).expect("exp of symmetric matrix");
    out.copy_from_slice(e.data());
}

fn spd_check_point(n: usize, x: &[f64], tol: f64) -> bool {
    let m = mat(n, x);
    let scale = m.max_abs().max(1.0);
    if m.sub(&m.transpose()).max_abs() > tol * scale {
        return false;
    }
    match sym_eig(&m.symmetrized()) {
        Ok((eigs, _)) => eigs[0] > 0.0,
        Err(_) => false,
    }
}

fn sym_slice(n: usize, u: &[f64], out: &mut [f64]) {
    let s = mat(n, u).symmetrized();
    out.copy_from_slice(s.data());
}

/// Affine-invariant metric: inner(X; U, V) = tr(X^{-1} U X^{-1} V).
#[derive(Debug, Clone, PartialEq)]
pub struct SpdAffineInvariant {
    pub n: usize,
}

impl SpdAffineInvariant {
    pub fn new(n: usize) -> Result<Self> {
        if n < 1 {
            return Err(Error::Shape("SPD manifold requires n >= 1".into()));
        }
        Ok(Self { n })
    }
}

impl RowOps for SpdAffineInvariant {
    fn point_len(&self) -> usize {
        self.n * self.n
    }

    fn inner(&self, x: &[f64], u: &[f64], v: &[f64]) -> Result<f64> {
        let xm = mat(self.n, x);
        let s = solve(&xm, &mat(self.n, u))?;
        let t = solve(&xm, &mat(self.n, v))?;
        let mut tr = 0.0;
        for i in 0..self.n {
            for k in 0..self.n {
                tr += s[(i, k)] * t[(k, i)];
            }
        }
        Ok(tr)
    }

    fn proju(&self, _x: &[f64], u: &[f64], out: &mut [f64]) -> Result<()> {
        sym_slice(self.n, u, out);
        Ok(())
    }

    fn projx(&self, x: &[f64], out: &mut [f64]) -> Result<()> {
        spd_projx(self.n, x, out)
    }

    fn egrad2rgrad(&self, x: &[f64], g: &[f64], out: &mut [f64]) -> Result<()> {
        let xm = mat(self.n, x);
        let s = mat(self.n, g).symmetrized();
        out.copy_from_slice(xm.matmul(&s).matmul(&xm).symmetrized().data());
        Ok(())
    }

    fn exp(&self, x: &[f64], u: &[f64], out: &mut [f64]) -> Result<()> {
        let xm = mat(self.n, x);
        let s = sqrtm_spd(&xm)?;
        let si = invsqrtm_spd(&xm)?;
        let w = si.matmul(&mat(self.n, u).symmetrized()).matmul(&si).symmetrized();
        let r = s.matmul(&expm_sym(&w)?).matmul(&s).symmetrized();
        out.copy_from_slice(r.data());
        Ok(())
    }

    fn log(&self, x: &[f64], y: &[f64], out: &mut [f64]) -> Result<()> {
        let xm = mat(self.n, x);
        let s = sqrtm_spd(&xm)?;
        let si = invsqrtm_spd(&xm)?;
        let w = si.matmul(&mat(self.n, y)).matmul(&si).symmetrized();
        let r = s.matmul(&logm_spd(&w)?).matmul(&s).symmetrized();
        out.copy_from_slice(r.data());
        Ok(())
    }

    fn retr(&self, x: &[f64], u: &[f64], out: &mut [f64]) -> Result<()> {
        // X + U + (1/2) U X^{-1} U, SPD for every symmetric U
        let xm = mat(self.n, x);
        let um = mat(self.n, u).symmetrized();
        let xinv_u = solve(&xm, &um)?;
        let r = xm.add(&um).add(&um.matmul(&xinv_u).scale(0.5)).symmetrized();
        out.copy_from_slice(r.data());
        Ok(())
    }

    fn transp(&self, _x: &[f64], _y: &[f64], v: &[f64], out: &mut [f64]) -> Result<()> {
        sym_slice(self.n, v, out);
        Ok(())
    }

    fn ptransp(&self, x: &[f64], y: &[f64], v: &[f64], out: &mut [f64]) -> Result<()> {
        // E = X^{1/2} (X^{-1/2} Y X^{-1/2})^{1/2} X^{-1/2};  v -> E v E^T
        let xm = mat(self.n, x);
        let s = sqrtm_spd(&xm)?;
        let si = invsqrtm_spd(&xm)?;
        let m = si.matmul(&mat(self.n, y)).matmul(&si).symmetrized();
        let e = s.matmul(&sqrtm_spd(&m)?).matmul(&si);
        let r = e
            .matmul(&mat(self.n, v).symmetrized())
            .matmul(&e.transpose())
            .symmetrized();
        out.copy_from_slice(r.data());
        Ok(())
    }

    fn dist(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        let si = invsqrtm_spd(&mat(self.n, x))?;
        let w = si.matmul(&mat(self.n, y)).matmul(&si).symmetrized();
        Ok(logm_spd(&w)?.fro_norm())
    }

    fn random_row(&self, rng: &mut Rng, out: &mut [f64]) {
        spd_random(self.n, rng, out)
    }

    fn check_point_row(&self, x: &[f64], tol: f64) -> bool {
        spd_check_point(self.n, x, tol)
    }
}

/// Log-Euclidean metric: the flat metric pulled back through the matrix log.
#[derive(Debug, Clone, PartialEq)]
pub struct SpdLogEuclidean {
    pub n: usize,
}

impl SpdLogEuclidean {
    pub fn new(n: usize) -> Result<Self> {
        if n < 1 {
            return Err(Error::Shape("SPD manifold requires n >= 1".into()));
        }
        Ok(Self { n })
    }
}

impl RowOps for SpdLogEuclidean {
    fn point_len(&self) -> usize {
        self.n * self.n
    }

    fn inner(&self, x: &[f64], u: &[f64], v: &[f64]) -> Result<f64> {
        let xm = mat(self.n, x);
        let du = dlogm_spd(&xm, &mat(self.n, u).symmetrized())?;
        let dv = dlogm_spd(&xm, &mat(self.n, v).symmetrized())?;
        let mut s = 0.0;
        for i in 0..du.data().len() {
            s += du.data()[i] * dv.data()[i];
        }
        Ok(s)
    }

    fn proju(&self, _x: &[f64], u: &[f64], out: &mut [f64]) -> Result<()> {
        sym_slice(self.n, u, out);
        Ok(())
    }

    fn projx(&self, x: &[f64], out: &mut [f64]) -> Result<()> {
        spd_projx(self.n, x, out)
    }

    fn egrad2rgrad(&self, x: &[f64], g: &[f64], out: &mut [f64]) -> Result<()> {
        // the metric operator is dlogm^2; its inverse is dexpm at log X, twice
        let xm = mat(self.n, x);
        let lx = logm_spd(&xm)?;
        let once = dexpm_sym(&lx, &mat(self.n, g).symmetrized())?;
        let twice = dexpm_sym(&lx, &once)?;
        out.copy_from_slice(twice.data());
        Ok(())
    }

    fn exp(&self, x: &[f64], u: &[f64], out: &mut [f64]) -> Result<()> {
        let xm = mat(self.n, x);
        let l = logm_spd(&xm)?;
        let d = dlogm_spd(&xm, &mat(self.n, u).symmetrized())?;
        let r = expm_sym(&l.add(&d))?;
        out.copy_from_slice(r.data());
        Ok(())
    }

    fn log(&self, x: &[f64], y: &[f64], out: &mut [f64]) -> Result<()> {
        let lx = logm_spd(&mat(self.n, x))?;
        let ly = logm_spd(&mat(self.n, y))?;
        let r = dexpm_sym(&lx, &ly.sub(&lx))?;
        out.copy_from_slice(r.data());
        Ok(())
    }

    fn retr(&self, x: &[f64], u: &[f64], out: &mut [f64]) -> Result<()> {
        self.exp(x, u, out)
    }

    fn transp(&self, x: &[f64], y: &[f64], v: &[f64], out: &mut [f64]) -> Result<()> {
        self.ptransp(x, y, v, out)
    }

    fn ptransp(&self, x: &[f64], y: &[f64], v: &[f64], out: &mut [f64]) -> Result<()> {
        // flat in log coordinates: dexpm at log(Y) of dlogm at X
        let xm = mat(self.n, x);
        let d = dlogm_spd(&xm, &mat(self.n, v).symmetrized())?;
        let ly = logm_spd(&mat(self.n, y))?;
        let r = dexpm_sym(&ly, &d)?;
        out.copy_from_slice(r.data());
        Ok(())
    }

    fn dist(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        let lx = logm_spd(&mat(self.n, x))?;
        let ly = logm_spd(&mat(self.n, y))?;
        Ok(lx.sub(&ly).fro_norm())
    }

    fn random_row(&self, rng: &mut Rng, out: &mut [f64]) {
        spd_random(self.n, rng, out)
    }

    fn check_point_row(&self, x: &[f64], tol: f64) -> bool {
        spd_check_point(self.n, x, tol)
    }
}

/// Log-Cholesky metric: the Cholesky-manifold geometry conjugated through the
/// diffeomorphism X = L L^T.
#[derive(Debug, Clone, PartialEq)]
pub struct SpdLogCholesky {
    pub n: usize,
    chol: CholeskyManifold,
}

impl SpdLogCholesky {
    pub fn new(n: usize) -> Result<Self> {
        Ok(Self {
            n,
            chol: CholeskyManifold::new(n)?,
        })
    }

    /// Differential of the Cholesky map: dphi(X)[U] = L Phi(L^{-1} U L^{-T}),
    /// where Phi keeps the lower triangle and halves the diagonal.
    fn dphi(&self, l: &Matrix, u: &Matrix) -> Result<Matrix> {
        let n = self.n;
        let t = solve_triangular(l, u, true, false)?; // L^{-1} U
        let w = solve_triangular(l, &t.transpose(), true, false)?.transpose(); // (L^{-1} U) L^{-T}
        let phi = Matrix::from_fn(n, n, |i, j| {
            if i > j {
                w[(i, j)]
            } else if i == j {
                0.5 * w[(i, i)]
            } else {
                0.0
            }
        });
        Ok(l.matmul(&phi))
    }

    /// Inverse differential: dphi^{-1}(L)[W] = W L^T + L W^T.
    fn dphi_inv(l: &Matrix, w: &Matrix) -> Matrix {
        w.matmul(&l.transpose()).add(&l.matmul(&w.transpose()))
    }

    fn chol_of(&self, x: &[f64]) -> Result<Matrix> {
        cholesky(&mat(self.n, x))
    }
}

impl RowOps for SpdLogCholesky {
    fn point_len(&self) -> usize {
        self.n * self.n
    }

    fn inner(&self, x: &[f64], u: &[f64], v: &[f64]) -> Result<f64> {
        let l = self.chol_of(x)?;
        let wu = self.dphi(&l, &mat(self.n, u).symmetrized())?;
        let wv = self.dphi(&l, &mat(self.n, v).symmetrized())?;
        self.chol.inner(l.data(), wu.data(), wv.data())
    }

    fn proju(&self, _x: &[f64], u: &[f64], out: &mut [f64]) -> Result<()> {
        sym_slice(self.n, u, out);
        Ok(())
    }

    fn projx(&self, x: &[f64], out: &mut [f64]) -> Result<()> {
        spd_projx(self.n, x, out)
    }

    fn egrad2rgrad(&self, x: &[f64], g: &[f64], out: &mut [f64]) -> Result<()> {
        // adjoint of dphi applied to sym(g), rescaled by the Cholesky metric
        let l = self.chol_of(x)?;
        let p = mat(self.n, g).symmetrized().matmul(&l);
        let m = Matrix::from_fn(self.n, self.n, |i, j| {
            if i > j {
                2.0 * p[(i, j)]
            } else if i == j {
                2.0 * p[(i, i)] * l[(i, i)] * l[(i, i)]
            } else {
                0.0
            }
        });
        out.copy_from_slice(Self::dphi_inv(&l, &m).symmetrized().data());
        Ok(())
    }

    fn exp(&self, x: &[f64], u: &[f64], out: &mut [f64]) -> Result<()> {
        let l = self.chol_of(x)?;
        let w = self.dphi(&l, &mat(self.n, u).symmetrized())?;
        let mut k = vec![0.0; self.n * self.n];
        self.chol.exp(l.data(), w.data(), &mut k)?;
        let km = mat(self.n, &k);
        out.copy_from_slice(km.matmul(&km.transpose()).symmetrized().data());
        Ok(())
    }

    fn log(&self, x: &[f64], y: &[f64], out: &mut [f64]) -> Result<()> {
        let l = self.chol_of(x)?;
        let k = self.chol_of(y)?;
        let mut w = vec![0.0; self.n * self.n];
        self.chol.log(l.data(), k.data(), &mut w)?;
        out.copy_from_slice(Self::dphi_inv(&l, &mat(self.n, &w)).symmetrized().data());
        Ok(())
    }

    fn retr(&self, x: &[f64], u: &[f64], out: &mut [f64]) -> Result<()> {
        self.exp(x, u, out)
    }

    fn transp(&self, x: &[f64], y: &[f64], v: &[f64], out: &mut [f64]) -> Result<()> {
        self.ptransp(x, y, v, out)
    }

    fn ptransp(&self, x: &[f64], y: &[f64], v: &[f64], out: &mut [f64]) -> Result<()> {
        let l = self.chol_of(x)?;
        let k = self.chol_of(y)?;
        let w = self.dphi(&l, &mat(self.n, v).symmetrized())?;
        let mut wt = vec![0.0; self.n * self.n];
        self.chol.ptransp(l.data(), k.data(), w.data(), &mut wt)?;
        out.copy_from_slice(Self::dphi_inv(&k, &mat(self.n, &wt)).symmetrized().data());
        Ok(())
    }

    fn dist(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        let l = self.chol_of(x)?;
        let k = self.chol_of(y)?;
        self.chol.dist(l.data(), k.data())
    }

    fn random_row(&self, rng: &mut Rng, out: &mut [f64]) {
        spd_random(self.n, rng, out)
    }

    fn check_point_row(&self, x: &[f64], tol: f64) -> bool {
        spd_check_point(self.n, x, tol)
    }
}
