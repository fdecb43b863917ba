//! Unit sphere S^{n-1} with the induced round metric.

use super::{dot, normal, norm2, Rng, RowOps, EPS_DIV};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Sphere {
    pub ambient: usize,
}

impl Sphere {
    pub fn new(ambient: usize) -> Result<Self> {
        if ambient < 1 {
            return Err(Error::Shape("sphere ambient dimension must be >= 1".into()));
        }
        Ok(Self { ambient })
    }
}

impl RowOps for Sphere {
    fn point_len(&self) -> usize {
        self.ambient
    }

    fn inner(&self, _x: &[f64], u: &[f64], v: &[f64]) -> Result<f64> {
        Ok(dot(u, v))
    }

    fn proju(&self, x: &[f64], u: &[f64], out: &mut [f64]) -> Result<()> {
        let xu = dot(x, u);
        for i in 0..x.len() {
            out[i] = u[i] - xu * x[i];
        }
        Ok(())
    }

    fn projx(&self, x: &[f64], out: &mut [f64]) -> Result<()> {
        let n = norm2(x);
        if n <= EPS_DIV {
            return Err(Error::DegenerateInput("cannot normalize the zero vector".into()));
        }
        for i in 0..x.len() {
            out[i] = x[i] / n;
        }
        Ok(())
    }

    fn exp(&self, x: &[f64], u: &[f64], out: &mut [f64]) -> Result<()> {
        let n = norm2(u);
        if n <= EPS_DIV {
            out.copy_from_slice(x);
            return Ok(());
        }
        let (c, s) = (n.cos(), n.sin());
        for i in 0..x.len() {
            out[i] = c * x[i] + s * u[i] / n;
        }
        Ok(())
    }

    fn log(&self, x: &[f64], y: &[f64], out: &mut [f64]) -> Result<()> {
        let c = dot(x, y).clamp(-1.0, 1.0);
        if c <= -1.0 + 1e-12 {
            return Err(Error::CutLocus("antipodal points on the sphere".into()));
        }
        let theta = c.acos();
        if theta <= EPS_DIV {
            // first-order: project the chord
            return self.proju(x, &y.iter().zip(x).map(|(a, b)| a - b).collect::<Vec<_>>(), out);
        }
        let s = theta.sin();
        for i in 0..x.len() {
            out[i] = (y[i] - c * x[i]) * theta / s;
        }
        Ok(())
    }

    fn retr(&self, x: &[f64], u: &[f64], out: &mut [f64]) -> Result<()> {
        let sum: Vec<f64> = x.iter().zip(u).map(|(a, b)| a + b).collect();
        self.projx(&sum, out)
    }

    fn transp(&self, _x: &[f64], y: &[f64], v: &[f64], out: &mut [f64]) -> Result<()> {
        self.proju(y, v, out)
    }

    fn ptransp(&self, x: &[f64], y: &[f64], v: &[f64], out: &mut [f64]) -> Result<()> {
        let mut u = vec![0.0; x.len()];
        self.log(x, y, &mut u)?;
        let theta = norm2(&u);
        if theta <= EPS_DIV {
            out.copy_from_slice(v);
            return Ok(());
        }
        let e: Vec<f64> = u.iter().map(|a| a / theta).collect();
        let a = dot(v, &e);
        let (c, s) = (theta.cos(), theta.sin());
        // the geodesic direction rotates to cos(theta) e - sin(theta) x;
        // the orthogonal complement is untouched
        for i in 0..x.len() {
            out[i] = v[i] - a * e[i] + a * (c * e[i] - s * x[i]);
        }
        Ok(())
    }

    fn dist(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        Ok(dot(x, y).clamp(-1.0, 1.0).acos())
    }

    fn random_row(&self, rng: &mut Rng, out: &mut [f64]) {
        loop {
            for v in out.iter_mut() {
                *v = normal(rng);
            }
            let n = norm2(out);
            if n > 1e-6 {
                for v in out.iter_mut() {
                    *v /= n;
                }
                return;
            }
        }
    }

    fn check_point_row(&self, x: &[f64], tol: f64) -> bool {
        (norm2(x) - 1.0).abs() <= tol
    }
}
