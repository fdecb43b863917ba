//! Unconstrained flat space; every operator is the identity-flavored one.

use super::{dot, normal, norm2, Rng, RowOps};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Euclidean {
    pub shape: Vec<usize>,
}

impl Euclidean {
    pub fn new(shape: Vec<usize>) -> Result<Self> {
        if shape.iter().any(|&d| d == 0) {
            return Err(Error::Shape("euclidean shape dimensions must be >= 1".into()));
        }
        Ok(Self { shape })
    }
}

impl RowOps for Euclidean {
    fn point_len(&self) -> usize {
        self.shape.iter().product()
    }

    fn inner(&self, _x: &[f64], u: &[f64], v: &[f64]) -> Result<f64> {
        Ok(dot(u, v))
    }

    fn proju(&self, _x: &[f64], u: &[f64], out: &mut [f64]) -> Result<()> {
        out.copy_from_slice(u);
        Ok(())
    }

    fn projx(&self, x: &[f64], out: &mut [f64]) -> Result<()> {
        out.copy_from_slice(x);
        Ok(())
    }

    fn exp(&self, x: &[f64], u: &[f64], out: &mut [f64]) -> Result<()> {
        for i in 0..x.len() {
            out[i] = x[i] + u[i];
        }
        Ok(())
    }

    fn log(&self, x: &[f64], y: &[f64], out: &mut [f64]) -> Result<()> {
        for i in 0..x.len() {
            out[i] = y[i] - x[i];
        }
        Ok(())
    }

    fn retr(&self, x: &[f64], u: &[f64], out: &mut [f64]) -> Result<()> {
        self.exp(x, u, out)
    }

    fn transp(&self, _x: &[f64], _y: &[f64], v: &[f64], out: &mut [f64]) -> Result<()> {
        out.copy_from_slice(v);
        Ok(())
    }

    fn ptransp(&self, _x: &[f64], _y: &[f64], v: &[f64], out: &mut [f64]) -> Result<()> {
        out.copy_from_slice(v);
        Ok(())
    }

    fn dist(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        let diff: Vec<f64> = x.iter().zip(y).map(|(a, b)| a - b).collect();
        Ok(norm2(&diff))
    }

    fn random_row(&self, rng: &mut Rng, out: &mut [f64]) {
        for v in out {
            *v = normal(rng);
        }
    }

    fn check_point_row(&self, x: &[f64], _tol: f64) -> bool {
        x.iter().all(|v| v.is_finite())
    }
}
