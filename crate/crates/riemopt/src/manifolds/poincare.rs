//! Poincare ball model of hyperbolic space with curvature parameter c > 0,
//! using the gyrovector (Mobius) closed forms.

use super::{dot, normal, norm2, Rng, RowOps, BALL_MARGIN, EPS_DIV};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Poincare {
    pub dim: usize,
    pub curvature: f64,
}

impl Poincare {
    pub fn new(dim: usize, curvature: f64) -> Result<Self> {
        if dim < 1 {
            return Err(Error::Shape("poincare ball dimension must be >= 1".into()));
        }
        if !(curvature > 0.0) {
            return Err(Error::Config(format!("curvature must be > 0, got {curvature}")));
        }
        Ok(Self { dim, curvature })
    }

    /// Conformal factor lambda_x = 2 / (1 - c ||x||^2).
    pub fn lambda(&self, x: &[f64]) -> f64 {
        2.0 / (1.0 - self.curvature * dot(x, x))
    }

    /// Mobius addition a (+)_c b.
    pub fn mobius_add(&self, a: &[f64], b: &[f64]) -> Vec<f64> {
        let c = self.curvature;
        let ab = dot(a, b);
        let na = dot(a, a);
        let nb = dot(b, b);
        let denom = 1.0 + 2.0 * c * ab + c * c * na * nb;
        let fa = (1.0 + 2.0 * c * ab + c * nb) / denom;
        let fb = (1.0 - c * na) / denom;
        a.iter().zip(b).map(|(&x, &y)| fa * x + fb * y).collect()
    }

    /// Gyration gyr[a, b] w = -(a + b) (+) (a (+) (b (+) w)).
    fn gyration(&self, a: &[f64], b: &[f64], w: &[f64]) -> Vec<f64> {
        let bw = self.mobius_add(b, w);
        let abw = self.mobius_add(a, &bw);
        let ab = self.mobius_add(a, b);
        let neg: Vec<f64> = ab.iter().map(|v| -v).collect();
        self.mobius_add(&neg, &abw)
    }
}

impl RowOps for Poincare {
    fn point_len(&self) -> usize {
        self.dim
    }

    fn inner(&self, x: &[f64], u: &[f64], v: &[f64]) -> Result<f64> {
        let l = self.lambda(x);
        Ok(l * l * dot(u, v))
    }

    fn proju(&self, _x: &[f64], u: &[f64], out: &mut [f64]) -> Result<()> {
        out.copy_from_slice(u);
        Ok(())
    }

    fn projx(&self, x: &[f64], out: &mut [f64]) -> Result<()> {
        let max_norm = (1.0 - BALL_MARGIN) / self.curvature.sqrt();
        let n = norm2(x);
        if n > max_norm {
            let s = max_norm / n;
            for i in 0..x.len() {
                out[i] = x[i] * s;
            }
        } else {
            out.copy_from_slice(x);
        }
        Ok(())
    }

    fn egrad2rgrad(&self, x: &[f64], g: &[f64], out: &mut [f64]) -> Result<()> {
        let l = self.lambda(x);
        for i in 0..g.len() {
            out[i] = g[i] / (l * l);
        }
        Ok(())
    }

    fn exp(&self, x: &[f64], u: &[f64], out: &mut [f64]) -> Result<()> {
        let sc = self.curvature.sqrt();
        let nu = norm2(u);
        if nu <= EPS_DIV {
            out.copy_from_slice(x);
            return Ok(());
        }
        let t = (sc * self.lambda(x) * nu / 2.0).tanh();
        let w: Vec<f64> = u.iter().map(|&v| v * t / (sc * nu)).collect();
        let y = self.mobius_add(x, &w);
        self.projx(&y, out)
    }

    fn log(&self, x: &[f64], y: &[f64], out: &mut [f64]) -> Result<()> {
        let sc = self.curvature.sqrt();
        let neg_x: Vec<f64> = x.iter().map(|v| -v).collect();
        let w = self.mobius_add(&neg_x, y);
        let nw = norm2(&w);
        if nw <= EPS_DIV {
            out.fill(0.0);
            return Ok(());
        }
        let arg = (sc * nw).min(1.0 - 1e-15);
        let f = (2.0 / (sc * self.lambda(x))) * arg.atanh() / nw;
        for i in 0..w.len() {
            out[i] = w[i] * f;
        }
        Ok(())
    }

    fn retr(&self, x: &[f64], u: &[f64], out: &mut [f64]) -> Result<()> {
        let sum: Vec<f64> = x.iter().zip(u).map(|(a, b)| a + b).collect();
        self.projx(&sum, out)
    }

    fn transp(&self, x: &[f64], y: &[f64], v: &[f64], out: &mut [f64]) -> Result<()> {
        // the tangent bundle is trivial in chart coordinates; identity is a
        // valid first-order transport
        let _ = (x, y);
        out.copy_from_slice(v);
        Ok(())
    }

    fn ptransp(&self, x: &[f64], y: &[f64], v: &[f64], out: &mut [f64]) -> Result<()> {
        let neg_x: Vec<f64> = x.iter().map(|a| -a).collect();
        let g = self.gyration(y, &neg_x, v);
        let f = self.lambda(x) / self.lambda(y);
        for i in 0..g.len() {
            out[i] = f * g[i];
        }
        Ok(())
    }

    fn dist(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        let sc = self.curvature.sqrt();
        let neg_x: Vec<f64> = x.iter().map(|v| -v).collect();
        let w = self.mobius_add(&neg_x, y);
        let arg = (sc * norm2(&w)).min(1.0 - 1e-15);
        Ok(2.0 / sc * arg.atanh())
    }

    fn random_row(&self, rng: &mut Rng, out: &mut [f64]) {
        // squash the radius so draws stay clear of the boundary, where the
        // conformal factor destroys precision
        let z: Vec<f64> = (0..out.len()).map(|_| normal(rng)).collect();
        let n = norm2(&z);
        let r = 0.7 * (0.3 * n).tanh() / self.curvature.sqrt();
        let f = if n > 0.0 { r / n } else { 0.0 };
        for (o, zi) in out.iter_mut().zip(&z) {
            *o = f * zi;
        }
    }

    fn check_point_row(&self, x: &[f64], _tol: f64) -> bool {
        self.curvature * dot(x, x) < 1.0
    }
}
