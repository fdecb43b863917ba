//! Riemannian optimization at desk scale: a catalog of matrix and vector
//! manifolds with exponential/logarithmic maps, retractions and transports,
//! stochastic first-order optimizers operating on Euclidean gradients, a
//! numerical verification suite, and benchmark problems.

pub mod array;
pub mod bench;
pub mod checks;
pub mod error;
pub mod linalg;
pub mod manifolds;
pub mod optim;

pub use array::Array;
pub use error::{Error, Result};
pub use manifolds::Manifold;
