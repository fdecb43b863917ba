//! The geometry catalog: every supported manifold with its metric,
//! exponential/logarithmic maps, retraction and transports.
//!
//! All operations are batched: trailing axes of an [`Array`] are the manifold
//! coordinates, leading axes an independent batch of points. Operands
//! broadcast when one side carries no batch axes.

use crate::array::{batch_layout, broadcast_batches, Array, BatchLayout};
use crate::error::{Error, Result};
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

mod cholesky;
mod euclidean;
mod grassmann;
mod hyperboloid;
mod poincare;
mod rotations;
mod spd;
mod sphere;
mod stiefel;

pub use cholesky::CholeskyManifold;
pub use euclidean::Euclidean;
pub use grassmann::Grassmannian;
pub use hyperboloid::Hyperboloid;
pub use poincare::Poincare;
pub use rotations::SpecialOrthogonal;
pub use spd::{SpdAffineInvariant, SpdLogCholesky, SpdLogEuclidean};
pub use sphere::Sphere;
pub use stiefel::Stiefel;

/// Default membership tolerance (double precision).
pub const MEMBERSHIP_TOL: f64 = 1e-8;
/// Division guard where a vector norm appears in a denominator.
pub const EPS_DIV: f64 = 1e-15;
/// Eigenvalue floor used when projecting onto the SPD cone.
pub const EIG_FLOOR: f64 = 1e-5;
/// Boundary margin for the open Poincare ball.
pub const BALL_MARGIN: f64 = 1e-5;

pub(crate) type Rng = ChaCha8Rng;

/// Standard normal sample (Box-Muller); kept local so seeded streams are
/// stable across dependency upgrades.
pub(crate) fn normal(rng: &mut Rng) -> f64 {
    use rand_chacha::rand_core::RngCore;
    loop {
        let u1 = (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64;
        let u2 = (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64;
        if u1 > 0.0 {
            return (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos();
        }
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Per-row manifold kernel. Implementations operate on flattened points of a
/// fixed length; batching lives in the dispatch layer.
pub(crate) trait RowOps {
    #[allow(dead_code)]
    fn point_len(&self) -> usize;

    fn inner(&self, x: &[f64], u: &[f64], v: &[f64]) -> Result<f64>;
    fn proju(&self, x: &[f64], u: &[f64], out: &mut [f64]) -> Result<()>;
    fn projx(&self, x: &[f64], out: &mut [f64]) -> Result<()>;
    fn exp(&self, x: &[f64], u: &[f64], out: &mut [f64]) -> Result<()>;
    fn log(&self, x: &[f64], y: &[f64], out: &mut [f64]) -> Result<()>;
    fn retr(&self, x: &[f64], u: &[f64], out: &mut [f64]) -> Result<()>;
    fn transp(&self, x: &[f64], y: &[f64], v: &[f64], out: &mut [f64]) -> Result<()>;
    fn ptransp(&self, x: &[f64], y: &[f64], v: &[f64], out: &mut [f64]) -> Result<()>;
    fn dist(&self, x: &[f64], y: &[f64]) -> Result<f64>;
    fn random_row(&self, rng: &mut Rng, out: &mut [f64]);
    fn check_point_row(&self, x: &[f64], tol: f64) -> bool;

    /// Euclidean-to-Riemannian gradient conversion; projection for manifolds
    /// with the induced metric.
    fn egrad2rgrad(&self, x: &[f64], g: &[f64], out: &mut [f64]) -> Result<()> {
        self.proju(x, g, out)
    }

    fn check_vector_row(&self, x: &[f64], v: &[f64], tol: f64) -> Result<bool> {
        let mut p = vec![0.0; v.len()];
        self.proju(x, v, &mut p)?;
        let scale = v.iter().fold(1.0_f64, |m, &a| m.max(a.abs()));
        Ok(p
            .iter()
            .zip(v)
            .all(|(a, b)| (a - b).abs() <= tol * scale))
    }
}

/// A manifold descriptor: geometry kind plus shape and metric parameters.
/// Dispatches every operator; immutable and cheap to clone.
#[derive(Debug, Clone, PartialEq)]
pub enum Manifold {
    Euclidean(Euclidean),
    Sphere(Sphere),
    Hyperboloid(Hyperboloid),
    Poincare(Poincare),
    StiefelEuclidean(Stiefel),
    Grassmannian(Grassmannian),
    SpecialOrthogonal(SpecialOrthogonal),
    SpdAffineInvariant(SpdAffineInvariant),
    SpdLogEuclidean(SpdLogEuclidean),
    SpdLogCholesky(SpdLogCholesky),
    Cholesky(CholeskyManifold),
    Product(Product),
}

impl Manifold {
    pub fn euclidean(shape: Vec<usize>) -> Result<Self> {
        Ok(Manifold::Euclidean(Euclidean::new(shape)?))
    }
    pub fn sphere(ambient: usize) -> Result<Self> {
        Ok(Manifold::Sphere(Sphere::new(ambient)?))
    }
    pub fn hyperboloid(ambient: usize) -> Result<Self> {
        Ok(Manifold::Hyperboloid(Hyperboloid::new(ambient)?))
    }
    pub fn poincare(dim: usize, curvature: f64) -> Result<Self> {
        Ok(Manifold::Poincare(Poincare::new(dim, curvature)?))
    }
    pub fn stiefel(n: usize, p: usize) -> Result<Self> {
        Ok(Manifold::StiefelEuclidean(Stiefel::new(n, p)?))
    }
    pub fn grassmannian(n: usize, p: usize) -> Result<Self> {
        Ok(Manifold::Grassmannian(Grassmannian::new(n, p)?))
    }
    pub fn special_orthogonal(n: usize) -> Result<Self> {
        Ok(Manifold::SpecialOrthogonal(SpecialOrthogonal::new(n)?))
    }
    pub fn spd_affine_invariant(n: usize) -> Result<Self> {
        Ok(Manifold::SpdAffineInvariant(SpdAffineInvariant::new(n)?))
    }
    pub fn spd_log_euclidean(n: usize) -> Result<Self> {
        Ok(Manifold::SpdLogEuclidean(SpdLogEuclidean::new(n)?))
    }
    pub fn spd_log_cholesky(n: usize) -> Result<Self> {
        Ok(Manifold::SpdLogCholesky(SpdLogCholesky::new(n)?))
    }
    pub fn cholesky(n: usize) -> Result<Self> {
        Ok(Manifold::Cholesky(CholeskyManifold::new(n)?))
    }
    pub fn product(components: Vec<Manifold>) -> Result<Self> {
        Ok(Manifold::Product(Product::new(components)?))
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            Manifold::Euclidean(_) => "euclidean",
            Manifold::Sphere(_) => "sphere",
            Manifold::Hyperboloid(_) => "hyperboloid",
            Manifold::Poincare(_) => "poincare",
            Manifold::StiefelEuclidean(_) => "stiefel",
            Manifold::Grassmannian(_) => "grassmannian",
            Manifold::SpecialOrthogonal(_) => "special_orthogonal",
            Manifold::SpdAffineInvariant(_) => "spd_affine_invariant",
            Manifold::SpdLogEuclidean(_) => "spd_log_euclidean",
            Manifold::SpdLogCholesky(_) => "spd_log_cholesky",
            Manifold::Cholesky(_) => "cholesky",
            Manifold::Product(_) => "product",
        }
    }

    /// Trailing-axis shape of a single point.
    pub fn point_shape(&self) -> Vec<usize> {
        match self {
            Manifold::Euclidean(m) => m.shape.clone(),
            Manifold::Sphere(m) => vec![m.ambient],
            Manifold::Hyperboloid(m) => vec![m.ambient],
            Manifold::Poincare(m) => vec![m.dim],
            Manifold::StiefelEuclidean(m) => vec![m.n, m.p],
            Manifold::Grassmannian(m) => vec![m.n, m.p],
            Manifold::SpecialOrthogonal(m) => vec![m.n, m.n],
            Manifold::SpdAffineInvariant(m) => vec![m.n, m.n],
            Manifold::SpdLogEuclidean(m) => vec![m.n, m.n],
            Manifold::SpdLogCholesky(m) => vec![m.n, m.n],
            Manifold::Cholesky(m) => vec![m.n, m.n],
            Manifold::Product(m) => vec![m.point_len],
        }
    }

    pub fn point_len(&self) -> usize {
        self.point_shape().iter().product()
    }

    /// Whether exp/log/ptransp/dist have closed forms here (the fallback for
    /// the others is retr/transp).
    pub fn has_exact_ops(&self) -> bool {
        match self {
            Manifold::StiefelEuclidean(_) => false,
            Manifold::Product(p) => p.components.iter().all(|c| c.has_exact_ops()),
            _ => true,
        }
    }

    pub(crate) fn ops(&self) -> &dyn RowOps {
        match self {
            Manifold::Euclidean(m) => m,
            Manifold::Sphere(m) => m,
            Manifold::Hyperboloid(m) => m,
            Manifold::Poincare(m) => m,
            Manifold::StiefelEuclidean(m) => m,
            Manifold::Grassmannian(m) => m,
            Manifold::SpecialOrthogonal(m) => m,
            Manifold::SpdAffineInvariant(m) => m,
            Manifold::SpdLogEuclidean(m) => m,
            Manifold::SpdLogCholesky(m) => m,
            Manifold::Cholesky(m) => m,
            Manifold::Product(m) => m,
        }
    }

    fn layout(&self, a: &Array) -> Result<BatchLayout> {
        batch_layout(a.shape(), &self.point_shape())
    }

    fn row<'a>(data: &'a [f64], layout: &BatchLayout, row: usize) -> &'a [f64] {
        let i = if layout.rows == 1 { 0 } else { row };
        &data[i * layout.point_len..(i + 1) * layout.point_len]
    }

    /// inner(x, u, v): the Riemannian metric, one scalar per batch row.
    pub fn inner(&self, x: &Array, u: &Array, v: &Array) -> Result<Array> {
        let (lx, lu, lv) = (self.layout(x)?, self.layout(u)?, self.layout(v)?);
        let (bs, rows) = broadcast_batches(&lx, &lu)?;
        let (bs, rows) = broadcast_batches(&BatchLayout { batch_shape: bs, rows, point_len: lx.point_len }, &lv)?;
        let mut out = Vec::with_capacity(rows);
        for r in 0..rows {
            out.push(self.ops().inner(
                Self::row(x.data(), &lx, r),
                Self::row(u.data(), &lu, r),
                Self::row(v.data(), &lv, r),
            )?);
        }
        Array::new(bs, out)
    }

    /// norm(x, u) = sqrt(inner(x, u, u)) per batch row.
    pub fn norm(&self, x: &Array, u: &Array) -> Result<Array> {
        Ok(self.inner(x, u, u)?.map(|v| v.max(0.0).sqrt()))
    }

    fn map2(
        &self,
        a: &Array,
        b: &Array,
        f: impl Fn(&dyn RowOps, &[f64], &[f64], &mut [f64]) -> Result<()>,
    ) -> Result<Array> {
        let (la, lb) = (self.layout(a)?, self.layout(b)?);
        let (bs, rows) = broadcast_batches(&la, &lb)?;
        let plen = la.point_len;
        let mut out = vec![0.0; rows * plen];
        for r in 0..rows {
            f(
                self.ops(),
                Self::row(a.data(), &la, r),
                Self::row(b.data(), &lb, r),
                &mut out[r * plen..(r + 1) * plen],
            )?;
        }
        let mut shape = bs;
        shape.extend(self.point_shape());
        Array::new(shape, out)
    }

    fn map3(
        &self,
        a: &Array,
        b: &Array,
        c: &Array,
        f: impl Fn(&dyn RowOps, &[f64], &[f64], &[f64], &mut [f64]) -> Result<()>,
    ) -> Result<Array> {
        let (la, lb, lc) = (self.layout(a)?, self.layout(b)?, self.layout(c)?);
        let (bs, rows) = broadcast_batches(&la, &lb)?;
        let (bs, rows) = broadcast_batches(&BatchLayout { batch_shape: bs, rows, point_len: la.point_len }, &lc)?;
        let plen = la.point_len;
        let mut out = vec![0.0; rows * plen];
        for r in 0..rows {
            f(
                self.ops(),
                Self::row(a.data(), &la, r),
                Self::row(b.data(), &lb, r),
                Self::row(c.data(), &lc, r),
                &mut out[r * plen..(r + 1) * plen],
            )?;
        }
        let mut shape = bs;
        shape.extend(self.point_shape());
        Array::new(shape, out)
    }

    /// Projection of an ambient vector onto the tangent space at x.
    pub fn proju(&self, x: &Array, u: &Array) -> Result<Array> {
        self.map2(x, u, |ops, x, u, out| ops.proju(x, u, out))
    }

    /// Projection of an ambient point onto the manifold.
    pub fn projx(&self, x: &Array) -> Result<Array> {
        let lx = self.layout(x)?;
        let plen = lx.point_len;
        let mut out = vec![0.0; lx.rows * plen];
        for r in 0..lx.rows {
            self.ops()
                .projx(Self::row(x.data(), &lx, r), &mut out[r * plen..(r + 1) * plen])?;
        }
        Array::new(x.shape().to_vec(), out)
    }

    /// Euclidean-to-Riemannian gradient conversion.
    pub fn egrad2rgrad(&self, x: &Array, g: &Array) -> Result<Array> {
        self.map2(x, g, |ops, x, g, out| ops.egrad2rgrad(x, g, out))
    }

    /// Exponential map; exp(x, 0) returns x bitwise.
    pub fn exp(&self, x: &Array, u: &Array) -> Result<Array> {
        self.map2(x, u, |ops, x, u, out| {
            if u.iter().all(|&v| v == 0.0) {
                out.copy_from_slice(x);
                Ok(())
            } else {
                ops.exp(x, u, out)
            }
        })
    }

    /// Logarithmic map; log(x, x) returns exact zeros.
    pub fn log(&self, x: &Array, y: &Array) -> Result<Array> {
        self.map2(x, y, |ops, x, y, out| {
            if x == y {
                out.fill(0.0);
                Ok(())
            } else {
                ops.log(x, y, out)
            }
        })
    }

    /// Retraction; retr(x, 0) returns x bitwise.
    pub fn retr(&self, x: &Array, u: &Array) -> Result<Array> {
        self.map2(x, u, |ops, x, u, out| {
            if u.iter().all(|&v| v == 0.0) {
                out.copy_from_slice(x);
                Ok(())
            } else {
                ops.retr(x, u, out)
            }
        })
    }

    /// First-order vector transport; identity when x == y.
    pub fn transp(&self, x: &Array, y: &Array, v: &Array) -> Result<Array> {
        self.map3(x, y, v, |ops, x, y, v, out| {
            if x == y {
                out.copy_from_slice(v);
                Ok(())
            } else {
                ops.transp(x, y, v, out)
            }
        })
    }

    /// Parallel transport along the connecting geodesic; identity when x == y.
    pub fn ptransp(&self, x: &Array, y: &Array, v: &Array) -> Result<Array> {
        self.map3(x, y, v, |ops, x, y, v, out| {
            if x == y {
                out.copy_from_slice(v);
                Ok(())
            } else {
                ops.ptransp(x, y, v, out)
            }
        })
    }

    /// Geodesic distance, one scalar per batch row.
    pub fn dist(&self, x: &Array, y: &Array) -> Result<Array> {
        let (lx, ly) = (self.layout(x)?, self.layout(y)?);
        let (bs, rows) = broadcast_batches(&lx, &ly)?;
        let mut out = Vec::with_capacity(rows);
        for r in 0..rows {
            let (xr, yr) = (Self::row(x.data(), &lx, r), Self::row(y.data(), &ly, r));
            out.push(if xr == yr { 0.0 } else { self.ops().dist(xr, yr)? });
        }
        Array::new(bs, out)
    }

    /// Seeded random points; identical seeds produce identical output.
    pub fn random(&self, batch_shape: &[usize], seed: u64) -> Array {
        let mut rng = Rng::seed_from_u64(seed);
        self.random_with(batch_shape, &mut rng)
    }

    pub(crate) fn random_with(&self, batch_shape: &[usize], rng: &mut Rng) -> Array {
        let rows: usize = batch_shape.iter().product();
        let plen = self.point_len();
        let mut data = vec![0.0; rows * plen];
        for r in 0..rows {
            self.ops().random_row(rng, &mut data[r * plen..(r + 1) * plen]);
        }
        let mut shape = batch_shape.to_vec();
        shape.extend(self.point_shape());
        Array::new(shape, data).expect("internal shape construction")
    }

    /// A random tangent vector at x with Riemannian norm at most `max_norm`.
    pub fn random_tangent(&self, x: &Array, max_norm: f64, seed: u64) -> Result<Array> {
        let mut rng = Rng::seed_from_u64(seed);
        self.random_tangent_with(x, max_norm, &mut rng)
    }

    pub(crate) fn random_tangent_with(
        &self,
        x: &Array,
        max_norm: f64,
        rng: &mut Rng,
    ) -> Result<Array> {
        let ambient = Array::new(
            x.shape().to_vec(),
            (0..x.len()).map(|_| normal(rng)).collect(),
        )?;
        let mut v = self.proju(x, &ambient)?;
        let norms = self.norm(x, &v)?;
        // scale each row so its Riemannian norm is at most max_norm
        let lv = self.layout(&v)?;
        let plen = lv.point_len;
        let data = v.data_mut();
        for (r, &n) in norms.data().iter().enumerate() {
            if n > max_norm {
                let s = max_norm / n;
                for val in &mut data[r * plen..(r + 1) * plen] {
                    *val *= s;
                }
            }
        }
        Ok(v)
    }

    /// True iff every batch row satisfies the membership conditions within tol.
    pub fn check_point(&self, x: &Array, tol: f64) -> Result<bool> {
        let lx = self.layout(x)?;
        for r in 0..lx.rows {
            if !self.ops().check_point_row(Self::row(x.data(), &lx, r), tol) {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// True iff every batch row of v lies in the tangent space at x within tol.
    pub fn check_vector(&self, x: &Array, v: &Array, tol: f64) -> Result<bool> {
        let (lx, lv) = (self.layout(x)?, self.layout(v)?);
        let (_, rows) = broadcast_batches(&lx, &lv)?;
        for r in 0..rows {
            if !self
                .ops()
                .check_vector_row(Self::row(x.data(), &lx, r), Self::row(v.data(), &lv, r), tol)?
            {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

/// Cartesian product of manifolds; points are concatenations along the
/// trailing axis, operators apply componentwise, inner products sum.
#[derive(Debug, Clone, PartialEq)]
pub struct Product {
    pub components: Vec<Manifold>,
    offsets: Vec<usize>,
    point_len: usize,
}

impl Product {
    pub fn new(components: Vec<Manifold>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::Shape("product manifold needs >= 1 component".into()));
        }
        let mut offsets = Vec::with_capacity(components.len() + 1);
        let mut total = 0;
        for c in &components {
            offsets.push(total);
            total += c.point_len();
        }
        offsets.push(total);
        Ok(Self {
            components,
            offsets,
            point_len: total,
        })
    }

    fn slices<'a>(&self, x: &'a [f64]) -> impl Iterator<Item = (&Manifold, &'a [f64])> {
        self.components
            .iter()
            .enumerate()
            .map(move |(i, c)| (c, &x[self.offsets[i]..self.offsets[i + 1]]))
    }
}

macro_rules! product_map2 {
    ($self:ident, $a:ident, $b:ident, $out:ident, $method:ident) => {{
        for (i, c) in $self.components.iter().enumerate() {
            let (s, e) = ($self.offsets[i], $self.offsets[i + 1]);
            c.ops().$method(&$a[s..e], &$b[s..e], &mut $out[s..e])?;
        }
        Ok(())
    }};
}

macro_rules! product_map3 {
    ($self:ident, $a:ident, $b:ident, $c3:ident, $out:ident, $method:ident) => {{
        for (i, c) in $self.components.iter().enumerate() {
            let (s, e) = ($self.offsets[i], $self.offsets[i + 1]);
            c.ops().$method(&$a[s..e], &$b[s..e], &$c3[s..e], &mut $out[s..e])?;
        }
        Ok(())
    }};
}

impl RowOps for Product {
    fn point_len(&self) -> usize {
        self.point_len
    }

    fn inner(&self, x: &[f64], u: &[f64], v: &[f64]) -> Result<f64> {
        let mut total = 0.0;
        for (i, c) in self.components.iter().enumerate() {
            let (s, e) = (self.offsets[i], self.offsets[i + 1]);
            total += c.ops().inner(&x[s..e], &u[s..e], &v[s..e])?;
        }
        Ok(total)
    }

    fn proju(&self, x: &[f64], u: &[f64], out: &mut [f64]) -> Result<()> {
        product_map2!(self, x, u, out, proju)
    }

    fn projx(&self, x: &[f64], out: &mut [f64]) -> Result<()> {
        for (i, c) in self.components.iter().enumerate() {
            let (s, e) = (self.offsets[i], self.offsets[i + 1]);
            c.ops().projx(&x[s..e], &mut out[s..e])?;
        }
        Ok(())
    }

    fn egrad2rgrad(&self, x: &[f64], g: &[f64], out: &mut [f64]) -> Result<()> {
        product_map2!(self, x, g, out, egrad2rgrad)
    }

    fn exp(&self, x: &[f64], u: &[f64], out: &mut [f64]) -> Result<()> {
        product_map2!(self, x, u, out, exp)
    }

    fn log(&self, x: &[f64], y: &[f64], out: &mut [f64]) -> Result<()> {
        product_map2!(self, x, y, out, log)
    }

    fn retr(&self, x: &[f64], u: &[f64], out: &mut [f64]) -> Result<()> {
        product_map2!(self, x, u, out, retr)
    }

    fn transp(&self, x: &[f64], y: &[f64], v: &[f64], out: &mut [f64]) -> Result<()> {
        product_map3!(self, x, y, v, out, transp)
    }

    fn ptransp(&self, x: &[f64], y: &[f64], v: &[f64], out: &mut [f64]) -> Result<()> {
        product_map3!(self, x, y, v, out, ptransp)
    }

    fn dist(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        let mut sq = 0.0;
        for (i, c) in self.components.iter().enumerate() {
            let (s, e) = (self.offsets[i], self.offsets[i + 1]);
            let d = c.ops().dist(&x[s..e], &y[s..e])?;
            sq += d * d;
        }
        Ok(sq.sqrt())
    }

    fn random_row(&self, rng: &mut Rng, out: &mut [f64]) {
        for (i, c) in self.components.iter().enumerate() {
            let (s, e) = (self.offsets[i], self.offsets[i + 1]);
            c.ops().random_row(rng, &mut out[s..e]);
        }
    }

    fn check_point_row(&self, x: &[f64], tol: f64) -> bool {
        self.slices(x).all(|(c, xs)| c.ops().check_point_row(xs, tol))
    }

    fn check_vector_row(&self, x: &[f64], v: &[f64], tol: f64) -> Result<bool> {
        for (i, c) in self.components.iter().enumerate() {
            let (s, e) = (self.offsets[i], self.offsets[i + 1]);
            if !c.ops().check_vector_row(&x[s..e], &v[s..e], tol)? {
                return Ok(false);
            }
        }
        Ok(true)
    }
}
