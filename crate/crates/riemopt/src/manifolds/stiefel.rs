//! Stiefel manifold of orthonormal p-frames in R^n with the metric inherited
//! from the ambient Euclidean space. No closed-form exponential is
//! implemented; optimizers fall back to the QR retraction.

use super::{dot, normal, Rng, RowOps};
use crate::error::{Error, Result};
use crate::linalg::{qr_signfix, Matrix};

#[derive(Debug, Clone, PartialEq)]
pub struct Stiefel {
    pub n: usize,
    pub p: usize,
}

impl Stiefel {
    pub fn new(n: usize, p: usize) -> Result<Self> {
        if p < 1 || n < p {
            return Err(Error::Shape(format!("stiefel requires n >= p >= 1, got ({n}, {p})")));
        }
        Ok(Self { n, p })
    }

    fn mat(&self, x: &[f64]) -> Matrix {
        Matrix::from_slice(self.n, self.p, x).expect("row length fixed by descriptor")
    }
}

pub(super) fn orthonormality_defect(x: &Matrix) -> f64 {
    let g = x.transpose().matmul(x);
    g.sub(&Matrix::identity(x.cols())).max_abs()
}

impl RowOps for Stiefel {
    fn point_len(&self) -> usize {
        self.n * self.p
    }

    fn inner(&self, _x: &[f64], u: &[f64], v: &[f64]) -> Result<f64> {
        Ok(dot(u, v))
    }

    fn proju(&self, x: &[f64], u: &[f64], out: &mut [f64]) -> Result<()> {
        let xm = self.mat(x);
        let um = self.mat(u);
        let s = xm.transpose().matmul(&um).symmetrized();
        let r = um.sub(&xm.matmul(&s));
        out.copy_from_slice(r.data());
        Ok(())
    }

    fn projx(&self, x: &[f64], out: &mut [f64]) -> Result<()> {
        let (q, _) = qr_signfix(&self.mat(x))?;
        out.copy_from_slice(q.data());
        Ok(())
    }

    fn exp(&self, _x: &[f64], _u: &[f64], _out: &mut [f64]) -> Result<()> {
        Err(Error::Unsupported("StiefelEuclidean has no closed-form exp; use retr".into()))
    }

    fn log(&self, _x: &[f64], _y: &[f64], _out: &mut [f64]) -> Result<()> {
        Err(Error::Unsupported("StiefelEuclidean has no closed-form log".into()))
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

    fn ptransp(&self, _x: &[f64], _y: &[f64], _v: &[f64], _out: &mut [f64]) -> Result<()> {
        Err(Error::Unsupported("StiefelEuclidean has no closed-form parallel transport; use transp".into()))
    }

    fn dist(&self, _x: &[f64], _y: &[f64]) -> Result<f64> {
        Err(Error::Unsupported("StiefelEuclidean has no closed-form geodesic distance".into()))
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
        orthonormality_defect(&self.mat(x)) <= tol
    }
}
