//! Stepper concepts.
//!
//! * [`Stepper`]: common metadata: algebra, order, evaluation counter.
//! * [`Step`]: advance one step of width `dt` (in place or out of place).
//! * [`ErrorStep`]: additionally return an embedded error estimate.
//!
//! The system type is a parameter of [`Step`] rather than of the method so
//! that implicit and symplectic steppers can demand richer system contracts
//! (Jacobians, split Hamiltonians) than the explicit ones.

use crate::algebra::Algebra;
use crate::error::Result;

/// Order metadata of a method.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OrderInfo {
    /// Global order of the propagated solution.
    pub order: u32,
    /// Order of the embedded solution used for error estimation, if any.
    pub error_order: Option<u32>,
    /// System evaluations per step (without FSAL reuse).
    pub stage_count: u32,
}

pub trait Stepper<S> {
    type Algebra: Algebra<S>;

    fn order_info(&self) -> OrderInfo;

    /// Cumulative number of system evaluations performed by this instance.
    fn evaluations(&self) -> u64;
}

pub trait Step<S, Sys: ?Sized>: Stepper<S> {
    /// Advance `x` from `t` to `t + dt`, overwriting it.
    fn do_step(&mut self, sys: &mut Sys, x: &mut S, t: f64, dt: f64) -> Result<()>;

    /// Advance `x` from `t` to `t + dt`, writing the result into `out`.
    fn do_step_out(&mut self, sys: &mut Sys, x: &S, t: f64, out: &mut S, dt: f64) -> Result<()>;
}

/// Steppers with an embedded error estimate.
pub trait ErrorStepper<S>: Stepper<S> {
    /// Derivative at the end of the last step when the method is FSAL, i.e.
    /// `f(x_new, t + dt)` as already computed by the step.
    fn fsal_derivative(&self) -> Option<&S> {
        None
    }
}

pub trait ErrorStep<S, Sys: ?Sized>: ErrorStepper<S> + Step<S, Sys> {
    /// One step with error estimate.
    ///
    /// `dxdt`, when given, must equal `f(x, t)`; the stepper then uses it
    /// as its first stage instead of evaluating the system.
    #[allow(clippy::too_many_arguments)]
    fn do_step_err(
        &mut self,
        sys: &mut Sys,
        x: &S,
        dxdt: Option<&S>,
        t: f64,
        out: &mut S,
        dt: f64,
        xerr: &mut S,
    ) -> Result<()>;
}
