//! Grassmannian of p-dimensional subspaces of R^n, represented by orthonormal
//! bases. Geodesics via the thin SVD of the horizontal direction.

use super::{dot, normal, Rng, RowOps};
use crate::error::{Error, Result};
use crate::linalg::{qr_signfix, solve, svd_thin, Matrix};

#[derive(Debug, Clone, PartialEq)]
pub struct Grassmannian {
    pub n: usize,
    pub p: usize,
}

impl Grassmannian {
    pub fn new(n: usize, p: usize) -> Result<Self> {
        if p < 1 || n < p {
            return Err(Error::Shape(format!(
                "grassmannian requires n >= p >= 1, got ({n}, {p})"
            )));
        }
        Ok(Self { n, p })
    }

    fn mat(&self, x: &[f64]) -> Matrix {
        Matrix::from_slice(self.n, self.p, x).expect("row length fixed by descriptor")
    }

    /// Horizontal direction (I - xx^T) y (x^T y)^{-1} = y (x^T y)^{-1} - x.
    fn horizontal(&self, x: &Matrix, y: &Matrix) -> Result<Matrix> {
        let b = x.transpose().matmul(y);
        let binv_t = solve(&b.transpose(), &Matrix::identity(self.p)).map_err(|_| {
            Error::CutLocus("subspaces contain orthogonal directions (x^T y singular)".into())
        })?;
        // y * b^{-1} = (b^{-T} y^T)^T computed column-wise
        let yb = y.matmul(&binv_t.transpose());
        Ok(yb.sub(x))
    }
}

impl RowOps for Grassmannian {
    fn point_len(&self) -> usize {
        self.n * self.p
    }

    fn inner(&self, _x: &[f64], u: &[f64], v: &[f64]) -> Result<f64> {
        Ok(dot(u, v))
    }

    fn proju(&self, x: &[f64], u: &[f64], out: &mut [f64]) -> Result<()> {
        let xm = self.mat(x);
        let um = self.mat(u);
        let r = um.sub(&xm.matmul(&xm.transpose().matmul(&um)));
        out.copy_from_slice(r.data());
        Ok(())
    }

    fn projx(&self, x: &[f64], out: &mut [f64]) -> Result<()> {
        let (q, _) = qr_signfix(&self.mat(x))?;
        out.copy_from_slice(q.data());
        Ok(())
    }

    fn exp(&self, x: &[f64], u: &[f64], out: &mut [f64]) -> Result<()> {
        let xm = self.mat(x);
        let um = self.mat(u);
        let (_, s, v) = svd_thin(&um)?;
        // y = x V cos(S) V^T + u V sinc(S) V^T, then re-orthonormalize
        let p = self.p;
        let cosm = Matrix::from_fn(p, p, |i, j| {
            (0..p).map(|k| v[(i, k)] * s[k].cos() * v[(j, k)]).sum()
        });
        let sincm = Matrix::from_fn(p, p, |i, j| {
            (0..p)
                .map(|k| {
                    let f = if s[k].abs() > 1e-300 { s[k].sin() / s[k] } else { 1.0 };
                    v[(i, k)] * f * v[(j, k)]
                })
                .sum()
        });
        let y = xm.matmul(&cosm).add(&um.matmul(&sincm));
        let (q, _) = qr_signfix(&y)?;
        out.copy_from_slice(q.data());
        Ok(())
    }

    fn log(&self, x: &[f64], y: &[f64], out: &mut [f64]) -> Result<()> {
        let xm = self.mat(x);
        let ym = self.mat(y);
        let m = self.horizontal(&xm, &ym)?;
        let (_, s, v) = svd_thin(&m)?;
        let p = self.p;
        // U atan(S) V^T = M V diag(atan s / s) V^T
        let f = Matrix::from_fn(p, p, |i, j| {
            (0..p)
                .map(|k| {
                    let g = if s[k] > 1e-300 { s[k].atan() / s[k] } else { 1.0 };
                    v[(i, k)] * g * v[(j, k)]
                })
                .sum()
        });
        let l = m.matmul(&f);
        out.copy_from_slice(l.data());
        Ok(())
    }

    fn retr(&self, x: &[f64], u: &[f64], out: &mut [f64]) -> Result<()> {
        let sum = self.mat(x).add(&self.mat(u));
        let (q, _) = qr_signfix(&sum)?;
        out.copy_from_slice(q.data());
        Ok(())
    }

    fn transp(&self, _x: &[f64], y: &[f64], v: &[f64], out: &mut [f64]) -> Result<()> {
        self.proju(y, v, out)
    }

    fn ptransp(&self, x: &[f64], y: &[f64], v: &[f64], out: &mut [f64]) -> Result<()> {
        let mut dir = vec![0.0; x.len()];
        self.log(x, y, &mut dir)?;
        let xm = self.mat(x);
        let dm = self.mat(&dir);
        let (u, s, vt) = svd_thin(&dm)?;
        let wm = self.mat(v);
        // transported = w + sum over principal directions with angle theta_k:
        //   ((cos th - 1) u_k - sin th * (x vte_k)) (u_k . w-column-block)
        let mut res = wm.clone();
        let tol = 1e-13 * s.first().copied().unwrap_or(0.0).max(1.0);
        for k in 0..self.p {
            if s[k] <= tol {
                continue;
            }
            let theta = s[k];
            let uk = u.column(k);
            let vk = vt.column(k);
            // x * v_k
            let xv: Vec<f64> = (0..self.n)
                .map(|i| (0..self.p).map(|j| xm[(i, j)] * vk[j]).sum())
                .collect();
            // coefficient row: u_k^T w  (length p)
            let coef_orig: Vec<f64> = (0..self.p)
                .map(|j| (0..self.n).map(|i| uk[i] * wm[(i, j)]).sum())
                .collect();
            for i in 0..self.n {
                let dir_i = (theta.cos() - 1.0) * uk[i] - theta.sin() * xv[i];
                for j in 0..self.p {
                    res[(i, j)] += dir_i * coef_orig[j];
                }
            }
        }
        out.copy_from_slice(res.data());
        Ok(())
    }

    fn dist(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        let xm = self.mat(x);
        let ym = self.mat(y);
        let m = self.horizontal(&xm, &ym)?;
        let (_, s, _) = svd_thin(&m)?;
        Ok(s.iter().map(|v| v.atan().powi(2)).sum::<f64>().sqrt())
    }

    fn random_row(&self, rng: &mut Rng, out: &mut [f64]) {
        loop {
            let a = Matrix::from_fn(self.n, self.p, |_, _| normal(rng));
            if let Ok((q, _)) = qr_signfix(&a) {
                out.copy_from_slice(q.data());
                return;
            }
        }
    }

    fn check_point_row(&self, x: &[f64], tol: f64) -> bool {
        super::stiefel::orthonormality_defect(&self.mat(x)) <= tol
    }
}
