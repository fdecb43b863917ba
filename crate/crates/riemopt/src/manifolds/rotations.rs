//! Special orthogonal group SO(n) with the bi-invariant Frobenius metric.
//! Tangent vectors at x have the form x A with A skew-symmetric.

use super::{dot, normal, Rng, RowOps};
use crate::error::{Error, Result};
use crate::linalg::{expm, logm_so, qr_signfix, Matrix};

#[derive(Debug, Clone, PartialEq)]
pub struct SpecialOrthogonal {
    pub n: usize,
}

impl SpecialOrthogonal {
    pub fn new(n: usize) -> Result<Self> {
        if n < 1 {
            return Err(Error::Shape("SO(n) requires n >= 1".into()));
        }
        Ok(Self { n })
    }

    fn mat(&self, x: &[f64]) -> Matrix {
        Matrix::from_slice(self.n, self.n, x).expect("row length fixed by descriptor")
    }

    fn det(m: &Matrix) -> f64 {
        // LU with partial pivoting
        let n = m.rows();
        let mut a = m.clone();
        let mut sign = 1.0;
        let mut det = 1.0;
        for k in 0..n {
            let mut piv = k;
            for i in (k + 1)..n {
                if a[(i, k)].abs() > a[(piv, k)].abs() {
                    piv = i;
                }
            }
            if a[(piv, k)] == 0.0 {
                return 0.0;
            }
            if piv != k {
                sign = -sign;
                for j in 0..n {
                    let t = a[(k, j)];
                    a[(k, j)] = a[(piv, j)];
                    a[(piv, j)] = t;
                }
            }
            det *= a[(k, k)];
            for i in (k + 1)..n {
                let f = a[(i, k)] / a[(k, k)];
                for j in k..n {
                    a[(i, j)] -= f * a[(k, j)];
                }
            }
        }
        sign * det
    }
}

impl RowOps for SpecialOrthogonal {
    fn point_len(&self) -> usize {
        self.n * self.n
    }

    fn inner(&self, _x: &[f64], u: &[f64], v: &[f64]) -> Result<f64> {
        Ok(dot(u, v))
    }

    fn proju(&self, x: &[f64], u: &[f64], out: &mut [f64]) -> Result<()> {
        let xm = self.mat(x);
        let a = xm.transpose().matmul(&self.mat(u)).skew_part();
        out.copy_from_slice(xm.matmul(&a).data());
        Ok(())
    }

    fn projx(&self, x: &[f64], out: &mut [f64]) -> Result<()> {
        let (mut q, _) = qr_signfix(&self.mat(x))?;
        if Self::det(&q) < 0.0 {
            let last = self.n - 1;
            for i in 0..self.n {
                q[(i, last)] = -q[(i, last)];
            }
        }
        out.copy_from_slice(q.data());
        Ok(())
    }

    fn exp(&self, x: &[f64], u: &[f64], out: &mut [f64]) -> Result<()> {
        let xm = self.mat(x);
        let a = xm.transpose().matmul(&self.mat(u)).skew_part();
        let e = expm(&a)?;
        out.copy_from_slice(xm.matmul(&e).data());
        Ok(())
    }

    fn log(&self, x: &[f64], y: &[f64], out: &mut [f64]) -> Result<()> {
        let xm = self.mat(x);
        let a = logm_so(&xm.transpose().matmul(&self.mat(y)))?;
        out.copy_from_slice(xm.matmul(&a).data());
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
        // along the one-parameter subgroup: x B -> x e^{A/2} B e^{A/2}
        let xm = self.mat(x);
        let a = logm_so(&xm.transpose().matmul(&self.mat(y)))?;
        let h = expm(&a.scale(0.5))?;
        let b = xm.transpose().matmul(&self.mat(v));
        let t = h.matmul(&b).matmul(&h);
        out.copy_from_slice(xm.matmul(&t).data());
        Ok(())
    }

    fn dist(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        let a = logm_so(&self.mat(x).transpose().matmul(&self.mat(y)))?;
        Ok(a.fro_norm())
    }

    fn random_row(&self, rng: &mut Rng, out: &mut [f64]) {
        loop {
            let a = Matrix::from_fn(self.n, self.n, |_, _| normal(rng));
            if qr_signfix(&a).is_ok() {
                if self.projx(a.data(), out).is_ok() {
                    return;
                }
            }
        }
    }

    fn check_point_row(&self, x: &[f64], tol: f64) -> bool {
        let xm = self.mat(x);
        super::stiefel::orthonormality_defect(&xm) <= tol && (Self::det(&xm) - 1.0).abs() <= tol
    }
}
