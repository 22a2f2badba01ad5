//! Numerical support: special functions, quadrature, interpolation,
//! small dense linear algebra, optimizers and summary statistics.

pub mod interp;
pub mod linalg;
pub mod normal;
pub mod optim;
pub mod poly;
pub mod quad;
pub mod stats;
