//! Numerical semi-Riemannian geometry on a single coordinate chart.
//!
//! A chart is described by a [`MetricSpec`]: coordinate names, an open
//! coordinate box and the metric components `g_ij` as expressions. From it
//! the crate computes Christoffel symbols, covariant derivatives, parallel
//! transport, geodesics and the Riemann, Ricci and scalar curvatures, using
//! forward-mode dual numbers for exact metric derivatives.

pub mod error;
pub mod connection;
pub mod curvature;
pub mod expr;
pub mod linalg;
pub mod manifold;
pub mod rng;
pub mod tensor;
pub mod transport;
pub mod verify;

pub use error::{GeomError, Result};
pub use expr::{parse, Dual1, Dual2, Expr};
pub use linalg::SymMatrix;
pub use manifold::{preset, Covector, Domain, MetricSpec, Point, TangentVector};
pub use tensor::Tensor;
