//! Steppers and drivers for initial value problems `dx/dt = f(x, t)`.
//!
//! Steppers are generic over the state container through an [`Algebra`]
//! that performs every element-wise operation. Anything that is
//! `AsRef<[f64]> + AsMut<[f64]> + Clone` (`Vec<f64>`, `[f64; N]`,
//! `Box<[f64]>`) works with the default [`SliceAlgebra`]; other containers
//! plug in their own algebra.
//!
//! ```
//! use odestep::{integrate_const, Rk4, Lorenz, NullObserver};
//!
//! let mut x = [10.0, 10.0, 10.0];
//! let report = integrate_const(&mut Rk4::new(), &mut Lorenz::default(), &mut x, 0.0, 1.0, 0.01, NullObserver)
//!     .unwrap();
//! assert_eq!(report.system_evaluations, 400);
//! ```

// NaN-rejecting comparisons such as `!(err <= 1.0)` are deliberate.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
#![cfg_attr(test, allow(clippy::ptr_arg, clippy::field_reassign_with_default))]

pub mod algebra;
pub mod control;
pub mod dense;
pub mod error;
pub mod explicit;
pub mod implicit;
pub mod integrate;
pub mod stepper;
pub mod symplectic;
pub mod system;
pub mod systems;

pub use algebra::{Algebra, SliceAlgebra, MAX_TERMS};
pub use control::{ControlledStepper, ControllerParams, StepOutcome, TrialCounters};
pub use dense::DenseOutputDopri5;
pub use error::{Error, Result};
pub use explicit::{Dopri5, ExplicitEuler, ExplicitRk, Rk4, Rk54CashKarp};
pub use implicit::{DenseMatrix, ImplicitEuler, JacobianSystem, NewtonParams, WithJacobian};
pub use integrate::{
    integrate_adaptive, integrate_const, integrate_const_dense, IntegrateConst, IntegrationFailure,
    IntegrationReport,
};
pub use stepper::{ErrorStep, ErrorStepper, OrderInfo, Step, Stepper};
pub use symplectic::{PairAlgebra, PairState, Separable, SeparableHamiltonian, SymplecticEuler};
pub use system::{Counted, NullObserver, Observer, System};
pub use systems::{HarmonicOscillator, Lorenz};
