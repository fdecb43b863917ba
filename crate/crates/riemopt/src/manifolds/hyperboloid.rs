//! Hyperbolic space in the Minkowski (hyperboloid) model: points with
//! <x, x>_M = -1 and x0 > 0, metric induced by the Minkowski form.

use super::{normal, Rng, RowOps, EPS_DIV};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Hyperboloid {
    /// Number of ambient coordinates (hyperbolic dimension + 1).
    pub ambient: usize,
}

impl Hyperboloid {
    pub fn new(ambient: usize) -> Result<Self> {
        if ambient < 2 {
            return Err(Error::Shape("hyperboloid needs >= 2 ambient coordinates".into()));
        }
        Ok(Self { ambient })
    }
}

/// Minkowski bilinear form -x0 y0 + sum_i xi yi.
pub fn mdot(x: &[f64], y: &[f64]) -> f64 {
    let mut s = -x[0] * y[0];
    for i in 1..x.len() {
        s += x[i] * y[i];
    }
    s
}

impl RowOps for Hyperboloid {
    fn point_len(&self) -> usize {
        self.ambient
    }

    fn inner(&self, _x: &[f64], u: &[f64], v: &[f64]) -> Result<f64> {
        Ok(mdot(u, v))
    }

    fn proju(&self, x: &[f64], u: &[f64], out: &mut [f64]) -> Result<()> {
        let c = mdot(x, u);
        for i in 0..x.len() {
            out[i] = u[i] + c * x[i];
        }
        Ok(())
    }

    fn projx(&self, x: &[f64], out: &mut [f64]) -> Result<()> {
        if x.iter().all(|&v| v == 0.0) {
            return Err(Error::DegenerateInput("zero vector has no hyperboloid projection".into()));
        }
        let m = mdot(x, x);
        if m < -EPS_DIV {
            let s = 1.0 / (-m).sqrt() * if x[0] < 0.0 { -1.0 } else { 1.0 };
            for i in 0..x.len() {
                out[i] = x[i] * s;
            }
        } else {
            // not timelike: keep the spatial part, lift the time coordinate
            let spatial_sq: f64 = x[1..].iter().map(|v| v * v).sum();
            out[0] = (1.0 + spatial_sq).sqrt();
            out[1..].copy_from_slice(&x[1..]);
        }
        Ok(())
    }

    fn egrad2rgrad(&self, x: &[f64], g: &[f64], out: &mut [f64]) -> Result<()> {
        // flip the metric sign on the time coordinate, then project
        let mut j = g.to_vec();
        j[0] = -j[0];
        self.proju(x, &j, out)
    }

    fn exp(&self, x: &[f64], u: &[f64], out: &mut [f64]) -> Result<()> {
        let nsq = mdot(u, u).max(0.0);
        let n = nsq.sqrt();
        if n <= EPS_DIV {
            out.copy_from_slice(x);
            return Ok(());
        }
        let (c, s) = (n.cosh(), n.sinh());
        for i in 0..x.len() {
            out[i] = c * x[i] + s * u[i] / n;
        }
        Ok(())
    }

    fn log(&self, x: &[f64], y: &[f64], out: &mut [f64]) -> Result<()> {
        let b = (-mdot(x, y)).max(1.0);
        let d = b.acosh();
        // tangential component of y at x
        let mut w = vec![0.0; x.len()];
        for i in 0..x.len() {
            w[i] = y[i] - b * x[i];
        }
        let wn = mdot(&w, &w).max(0.0).sqrt();
        if wn <= EPS_DIV {
            out.fill(0.0);
            return Ok(());
        }
        for i in 0..x.len() {
            out[i] = w[i] * d / wn;
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
        let xy = mdot(x, y);
        let yv = mdot(y, v);
        let f = yv / (1.0 - xy);
        for i in 0..x.len() {
            out[i] = v[i] + f * (x[i] + y[i]);
        }
        Ok(())
    }

    fn dist(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        Ok((-mdot(x, y)).max(1.0).acosh())
    }

    fn random_row(&self, rng: &mut Rng, out: &mut [f64]) {
        let mut sq = 0.0;
        for v in out[1..].iter_mut() {
            *v = 0.5 * normal(rng);
            sq += *v * *v;
        }
        out[0] = (1.0 + sq).sqrt();
    }

    fn check_point_row(&self, x: &[f64], tol: f64) -> bool {
        (mdot(x, x) + 1.0).abs() <= tol && x[0] > 0.0
    }
}
