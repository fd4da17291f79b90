//! Numerics for the qKZ equation with `|q| = 1`.
//!
//! * [`double_sine`]: the double sine function `S2(x | w1, w2)`.
//! * [`quantum_algebra`]: `U_q(sl2)` Verma modules, R-matrices and the qKZ shift operators.
//! * [`hypergeometric`]: weight functions, kernels and the pairing integrals.
//! * [`determinant_formula`]: closed forms for the determinant of the fundamental matrix.

pub mod determinant_formula;
pub mod double_sine;
pub mod error;
pub mod hypergeometric;
pub mod multi_index;
pub mod params;
pub mod quadrature;
pub mod quantum_algebra;

pub use error::{Error, Result};
