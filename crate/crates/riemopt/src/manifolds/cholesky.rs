//! Manifold of lower-triangular matrices with positive diagonal, with the
//! metric that is Euclidean on the strict lower part and diagonally rescaled
//! (u_ii v_ii / L_ii^2) on the diagonal.

use super::{normal, Rng, RowOps, EIG_FLOOR};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct CholeskyManifold {
    pub n: usize,
}

impl CholeskyManifold {
    pub fn new(n: usize) -> Result<Self> {
        if n < 1 {
            return Err(Error::Shape("cholesky manifold requires n >= 1".into()));
        }
        Ok(Self { n })
    }

    fn idx(&self, i: usize, j: usize) -> usize {
        i * self.n + j
    }
}

impl RowOps for CholeskyManifold {
    fn point_len(&self) -> usize {
        self.n * self.n
    }

    fn inner(&self, x: &[f64], u: &[f64], v: &[f64]) -> Result<f64> {
        let n = self.n;
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..i {
                s += u[self.idx(i, j)] * v[self.idx(i, j)];
            }
            let d = x[self.idx(i, i)];
            s += u[self.idx(i, i)] * v[self.idx(i, i)] / (d * d);
        }
        Ok(s)
    }

    fn proju(&self, _x: &[f64], u: &[f64], out: &mut [f64]) -> Result<()> {
        out.fill(0.0);
        for i in 0..self.n {
            for j in 0..=i {
                out[self.idx(i, j)] = u[self.idx(i, j)];
            }
        }
        Ok(())
    }

    fn projx(&self, x: &[f64], out: &mut [f64]) -> Result<()> {
        out.fill(0.0);
        for i in 0..self.n {
            for j in 0..i {
                out[self.idx(i, j)] = x[self.idx(i, j)];
            }
            out[self.idx(i, i)] = x[self.idx(i, i)].max(EIG_FLOOR);
        }
        Ok(())
    }

    fn egrad2rgrad(&self, x: &[f64], g: &[f64], out: &mut [f64]) -> Result<()> {
        out.fill(0.0);
        for i in 0..self.n {
            for j in 0..i {
                out[self.idx(i, j)] = g[self.idx(i, j)];
            }
            let d = x[self.idx(i, i)];
            out[self.idx(i, i)] = g[self.idx(i, i)] * d * d;
        }
        Ok(())
    }

    fn exp(&self, x: &[f64], u: &[f64], out: &mut [f64]) -> Result<()> {
        out.fill(0.0);
        for i in 0..self.n {
            for j in 0..i {
                out[self.idx(i, j)] = x[self.idx(i, j)] + u[self.idx(i, j)];
            }
            let d = x[self.idx(i, i)];
            out[self.idx(i, i)] = d * (u[self.idx(i, i)] / d).exp();
        }
        Ok(())
    }

    fn log(&self, x: &[f64], y: &[f64], out: &mut [f64]) -> Result<()> {
        out.fill(0.0);
        for i in 0..self.n {
            for j in 0..i {
                out[self.idx(i, j)] = y[self.idx(i, j)] - x[self.idx(i, j)];
            }
            let (dx, dy) = (x[self.idx(i, i)], y[self.idx(i, i)]);
            if dy <= 0.0 {
                return Err(Error::NotPositiveDefinite { pivot: i });
            }
            out[self.idx(i, i)] = dx * (dy / dx).ln();
        }
        Ok(())
    }

    fn retr(&self, x: &[f64], u: &[f64], out: &mut [f64]) -> Result<()> {
        self.exp(x, u, out)
    }

    fn transp(&self, x: &[f64], y: &[f64], v: &[f64], out: &mut [f64]) -> Result<()> {
        self.ptransp(x, y, v, out)
    }

    fn ptransp(&self, x: &[f64], y: &[f64], v: &[f64], out: &mut [f64]) -> Result<()> {
        out.fill(0.0);
        for i in 0..self.n {
            for j in 0..i {
                out[self.idx(i, j)] = v[self.idx(i, j)];
            }
            out[self.idx(i, i)] = v[self.idx(i, i)] * y[self.idx(i, i)] / x[self.idx(i, i)];
        }
        Ok(())
    }

    fn dist(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        let mut sq = 0.0;
        for i in 0..self.n {
            for j in 0..i {
                let d = y[self.idx(i, j)] - x[self.idx(i, j)];
                sq += d * d;
            }
            let r = (y[self.idx(i, i)] / x[self.idx(i, i)]).ln();
            sq += r * r;
        }
        Ok(sq.sqrt())
    }

    fn random_row(&self, rng: &mut Rng, out: &mut [f64]) {
        out.fill(0.0);
        for i in 0..self.n {
            for j in 0..i {
                out[self.idx(i, j)] = 0.5 * normal(rng);
            }
            out[self.idx(i, i)] = (0.5 * normal(rng)).exp();
        }
    }

    fn check_point_row(&self, x: &[f64], tol: f64) -> bool {
        for i in 0..self.n {
            if x[self.idx(i, i)] <= 0.0 {
                return false;
            }
            for j in (i + 1)..self.n {
                if x[self.idx(i, j)].abs() > tol {
                    return false;
                }
            }
        }
        true
    }
}
