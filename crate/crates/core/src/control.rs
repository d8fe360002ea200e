//! Step-size control for error steppers.
//!
//! A [`ControlledStepper`] wraps any [`ErrorStep`] and performs trial steps
//! with [`try_step`](ControlledStepper::try_step): the embedded error is
//! measured with [`error_ratio`], the step is accepted when the ratio is at
//! most one, and the next step size comes from [`next_step_size`], an
//! integral controller with exponent `1/(q+1)` where `q` is the order of
//! the embedded estimate.
//!
//! For first-same-as-last steppers the derivative at the start of the next
//! step is taken from the accepted step instead of being re-evaluated.

use crate::algebra::Algebra;
use crate::error::{Error, Result};
use crate::stepper::{ErrorStep, ErrorStepper, OrderInfo, Stepper};
use crate::system::System;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ControllerParams {
    pub atol: f64,
    pub rtol: f64,
    pub safety: f64,
    pub fac_min: f64,
    pub fac_max: f64,
    /// Smallest admissible step size magnitude.
    pub dt_min: f64,
    /// Consecutive rejections tolerated before giving up.
    pub max_rejections: usize,
}

impl Default for ControllerParams {
    fn default() -> Self {
        ControllerParams {
            atol: 1e-6,
            rtol: 1e-6,
            safety: 0.9,
            fac_min: 0.2,
            fac_max: 5.0,
            dt_min: 1e-14,
            max_rejections: 100,
        }
    }
}

impl ControllerParams {
    /// Default constants with the given tolerances.
    pub fn with_tolerances(atol: f64, rtol: f64) -> Result<Self> {
        let p = ControllerParams {
            atol,
            rtol,
            ..Default::default()
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |m: &str| Err(Error::invalid(m));
        if !(self.atol >= 0.0 && self.rtol >= 0.0) || !(self.atol + self.rtol > 0.0) {
            return fail("tolerances must be non-negative with atol + rtol > 0");
        }
        if !(self.atol + self.rtol).is_finite() {
            return fail("tolerances must be finite");
        }
        if !(self.safety > 0.0 && self.safety <= 1.0) {
            return fail("safety factor must lie in (0, 1]");
        }
        if !(0.0 < self.fac_min
            && self.fac_min < 1.0
            && 1.0 < self.fac_max
            && self.fac_max.is_finite())
        {
            return fail("need 0 < fac_min < 1 < fac_max");
        }
        if !(self.dt_min > 0.0) {
            return fail("dt_min must be positive");
        }
        if self.max_rejections == 0 {
            return fail("max_rejections must be at least 1");
        }
        Ok(())
    }
}

/// Result of a controlled trial step.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepOutcome {
    /// Step accepted; the proposed next step is not larger than this one.
    Accepted,
    /// Step accepted and the proposed next step is larger.
    AcceptedIncreased,
    /// Step rejected; state and time untouched, step size reduced.
    Rejected,
}

impl StepOutcome {
    pub fn is_accepted(self) -> bool {
        !matches!(self, StepOutcome::Rejected)
    }
}

/// `max_i |xerr_i| / (atol + rtol (|x_i| + |dt| |dxdt_i|))`.
pub fn error_ratio<S, A: Algebra<S>>(
    xerr: &S,
    x_old: &S,
    dxdt_old: &S,
    dt: f64,
    p: &ControllerParams,
) -> Result<f64> {
    A::weighted_error_max(xerr, x_old, dxdt_old, p.atol, p.rtol, dt)
}

/// Proposed step size after a trial with error ratio `err`.
///
/// The growth factor `safety * err^(-1/(q+1))` is clamped to
/// `[fac_min, fac_max]`, and additionally to at most one when
/// `was_rejected` (the previous trial of the same step failed). A NaN ratio
/// shrinks by `fac_min`. Underflow below `dt_min` is an error; its `t` field
/// is NaN here and filled in by the controlled stepper.
pub fn next_step_size(
    dt: f64,
    err: f64,
    order: OrderInfo,
    p: &ControllerParams,
    was_rejected: bool,
) -> Result<f64> {
    let q = order.error_order.unwrap_or(order.order) as f64;
    let mut factor = if err.is_nan() {
        p.fac_min
    } else if err == 0.0 {
        p.fac_max
    } else {
        (p.safety * err.powf(-1.0 / (q + 1.0))).clamp(p.fac_min, p.fac_max)
    };
    if was_rejected {
        factor = factor.min(1.0);
    }
    let dt_new = dt * factor;
    if !(dt_new.abs() >= p.dt_min) {
        return Err(Error::StepSizeUnderflow {
            t: f64::NAN,
            dt: dt_new,
        });
    }
    Ok(dt_new)
}

/// Cumulative trial statistics of a controlled stepper.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct TrialCounters {
    pub attempted: u64,
    pub accepted: u64,
    pub rejected: u64,
}

/// Generic controller around an error stepper.
#[derive(Debug, Clone)]
pub struct ControlledStepper<E, S> {
    stepper: E,
    params: ControllerParams,
    dxdt: Option<S>,
    // State and time at which `dxdt` was evaluated.
    dxdt_at: Option<(S, f64)>,
    x_new: Option<S>,
    xerr: Option<S>,
    own_evaluations: u64,
    was_rejected: bool,
    consecutive_rejections: usize,
    last_error: Option<f64>,
    counters: TrialCounters,
}

impl<E, S> ControlledStepper<E, S>
where
    E: ErrorStepper<S>,
    S: Clone + PartialEq,
{
    pub fn new(stepper: E, params: ControllerParams) -> Result<Self> {
        params.validate()?;
        Ok(ControlledStepper {
            stepper,
            params,
            dxdt: None,
            dxdt_at: None,
            x_new: None,
            xerr: None,
            own_evaluations: 0,
            was_rejected: false,
            consecutive_rejections: 0,
            last_error: None,
            counters: TrialCounters::default(),
        })
    }

    pub fn params(&self) -> &ControllerParams {
        &self.params
    }

    pub fn stepper(&self) -> &E {
        &self.stepper
    }

    /// Error ratio of the most recent trial.
    pub fn last_error_ratio(&self) -> Option<f64> {
        self.last_error
    }

    pub fn counters(&self) -> TrialCounters {
        self.counters
    }

    /// Forget the cached derivative and the rejection history.
    pub fn reset(&mut self) {
        self.dxdt_at = None;
        self.was_rejected = false;
        self.consecutive_rejections = 0;
        self.last_error = None;
    }

    fn ensure_buffers(&mut self, x: &S) {
        let n = E::Algebra::dim(x);
        if self.x_new.as_ref().is_none_or(|b| E::Algebra::dim(b) != n) {
            self.dxdt = Some(E::Algebra::clone_shape(x));
            self.x_new = Some(E::Algebra::clone_shape(x));
            self.xerr = Some(E::Algebra::clone_shape(x));
            self.dxdt_at = None;
        }
    }

    /// Attempt one step from `(x, t)` with width `dt`.
    ///
    /// On acceptance `x` and `t` advance and `dt` holds the proposal for the
    /// next step. On rejection `x` and `t` are untouched and `dt` shrinks.
    pub fn try_step<Sys>(
        &mut self,
        sys: &mut Sys,
        x: &mut S,
        t: &mut f64,
        dt: &mut f64,
    ) -> Result<StepOutcome>
    where
        E: ErrorStep<S, Sys>,
        Sys: System<S> + ?Sized,
    {
        let (t0, h) = (*t, *dt);
        if !(h != 0.0 && h.is_finite()) {
            return Err(Error::invalid(format!("invalid step size {h}")));
        }
        self.ensure_buffers(x);
        let cached = matches!(&self.dxdt_at, Some((cx, ct)) if *ct == t0 && cx == x);
        let dxdt = self.dxdt.as_mut().expect("buffers");
        if !cached {
            sys.rhs(x, dxdt, t0);
            self.own_evaluations += 1;
            match &mut self.dxdt_at {
                Some((cx, ct)) => {
                    cx.clone_from(x);
                    *ct = t0;
                }
                None => self.dxdt_at = Some((x.clone(), t0)),
            }
        }
        let x_new = self.x_new.as_mut().expect("buffers");
        let xerr = self.xerr.as_mut().expect("buffers");
        self.stepper
            .do_step_err(sys, x, Some(&*dxdt), t0, x_new, h, xerr)?;
        let err = error_ratio::<S, E::Algebra>(xerr, x, dxdt, h, &self.params)?;
        self.last_error = Some(err);
        self.counters.attempted += 1;
        let order = self.stepper.order_info();
        let with_t = |e: Error| match e {
            Error::StepSizeUnderflow { dt, .. } => Error::StepSizeUnderflow { t: t0, dt },
            e => e,
        };

        if !(err <= 1.0) {
            self.counters.rejected += 1;
            self.consecutive_rejections += 1;
            self.was_rejected = true;
            let dt_new = next_step_size(h, err, order, &self.params, true).map_err(with_t)?;
            *dt = dt_new;
            if self.consecutive_rejections >= self.params.max_rejections {
                return Err(Error::TooManyRejections {
                    t: t0,
                    dt: dt_new,
                    rejections: self.consecutive_rejections,
                });
            }
            return Ok(StepOutcome::Rejected);
        }

        let dt_new =
            next_step_size(h, err, order, &self.params, self.was_rejected).map_err(with_t)?;
        std::mem::swap(x, x_new);
        *t = t0 + h;
        *dt = dt_new;
        match self.stepper.fsal_derivative() {
            Some(d) => {
                dxdt.clone_from(d);
                if let Some((cx, ct)) = &mut self.dxdt_at {
                    cx.clone_from(x);
                    *ct = *t;
                }
            }
            None => self.dxdt_at = None,
        }
        self.counters.accepted += 1;
        self.was_rejected = false;
        self.consecutive_rejections = 0;
        Ok(if dt_new.abs() > h.abs() {
            StepOutcome::AcceptedIncreased
        } else {
            StepOutcome::Accepted
        })
    }
}

impl<E, S> Stepper<S> for ControlledStepper<E, S>
where
    E: ErrorStepper<S>,
{
    type Algebra = E::Algebra;

    fn order_info(&self) -> OrderInfo {
        self.stepper.order_info()
    }

    fn evaluations(&self) -> u64 {
        self.own_evaluations + self.stepper.evaluations()
    }
}
