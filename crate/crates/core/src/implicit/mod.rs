//! Implicit Euler for stiff problems and the dense LU solver behind it.

mod euler;
mod lu;

pub use euler::{ImplicitEuler, JacobianSystem, NewtonParams, WithJacobian};
pub use lu::{lu_solve, DenseMatrix, LuDecomposition, SINGULAR_PIVOT};
