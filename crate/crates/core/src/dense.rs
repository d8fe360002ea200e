//! Dense output for Dormand-Prince 5(4).
//!
//! [`DenseOutputDopri5`] owns its state and step size: each
//! [`do_step`](DenseOutputDopri5::do_step) performs one accepted adaptive
//! step (retrying internally on rejection) and keeps enough data to
//! evaluate the fourth-order continuous extension anywhere inside the step
//! without calling the system again.

use crate::algebra::{Algebra, SliceAlgebra};
use crate::control::{ControlledStepper, ControllerParams, StepOutcome, TrialCounters};
use crate::error::{Error, Result};
use crate::explicit::tableau::DOPRI5_DENSE;
use crate::explicit::Dopri5;
use crate::stepper::Stepper;
use crate::system::System;

#[derive(Debug, Clone)]
struct Interval<S> {
    t_prev: f64,
    t_cur: f64,
    x_prev: S,
    // x_cur - x_prev, and three higher interpolation vectors
    ydiff: S,
    bspl: S,
    r4: S,
    r5: S,
    valid: bool,
}

#[derive(Debug, Clone)]
pub struct DenseOutputDopri5<S, A = SliceAlgebra> {
    ctrl: ControlledStepper<Dopri5<S, A>, S>,
    x: Option<S>,
    t: f64,
    dt: f64,
    interval: Option<Interval<S>>,
}

impl<S> DenseOutputDopri5<S, SliceAlgebra>
where
    S: AsRef<[f64]> + AsMut<[f64]> + Clone + PartialEq,
{
    pub fn new(params: ControllerParams) -> Result<Self> {
        Self::with_algebra(params)
    }
}

impl<S, A> DenseOutputDopri5<S, A>
where
    S: Clone + PartialEq,
    A: Algebra<S>,
{
    pub fn with_algebra(params: ControllerParams) -> Result<Self> {
        Ok(DenseOutputDopri5 {
            ctrl: ControlledStepper::new(Dopri5::with_algebra(), params)?,
            x: None,
            t: 0.0,
            dt: 0.0,
            interval: None,
        })
    }

    /// Set the state to `(x0, t0)` with first trial step `dt0`, discarding
    /// any previous interval.
    pub fn initialize(&mut self, x0: S, t0: f64, dt0: f64) -> Result<()> {
        if !(dt0 > 0.0 && dt0.is_finite()) {
            return Err(Error::invalid(format!(
                "initial step must be positive, got {dt0}"
            )));
        }
        if !t0.is_finite() {
            return Err(Error::invalid("initial time must be finite"));
        }
        self.ctrl.reset();
        self.x = Some(x0);
        self.t = t0;
        self.dt = dt0;
        if let Some(iv) = &mut self.interval {
            iv.valid = false;
        }
        Ok(())
    }

    pub fn current_time(&self) -> f64 {
        self.t
    }

    pub fn current_state(&self) -> Option<&S> {
        self.x.as_ref()
    }

    /// Step size that the next internal trial will use.
    pub fn proposed_dt(&self) -> f64 {
        self.dt
    }

    /// `(t_prev, t_cur)` of the last completed step.
    pub fn interval(&self) -> Option<(f64, f64)> {
        self.interval
            .as_ref()
            .filter(|iv| iv.valid)
            .map(|iv| (iv.t_prev, iv.t_cur))
    }

    pub fn previous_state(&self) -> Option<&S> {
        self.interval
            .as_ref()
            .filter(|iv| iv.valid)
            .map(|iv| &iv.x_prev)
    }

    pub fn controller(&self) -> &ControlledStepper<Dopri5<S, A>, S> {
        &self.ctrl
    }

    pub fn counters(&self) -> TrialCounters {
        self.ctrl.counters()
    }

    /// One accepted step; returns the covered interval `(t_prev, t_cur)`.
    pub fn do_step<Sys: System<S> + ?Sized>(&mut self, sys: &mut Sys) -> Result<(f64, f64)> {
        let x = self.x.as_mut().ok_or(Error::NotInitialized)?;
        let iv = self.interval.get_or_insert_with(|| Interval {
            t_prev: 0.0,
            t_cur: 0.0,
            x_prev: A::clone_shape(x),
            ydiff: A::clone_shape(x),
            bspl: A::clone_shape(x),
            r4: A::clone_shape(x),
            r5: A::clone_shape(x),
            valid: false,
        });
        iv.valid = false;
        if A::dim(&iv.x_prev) != A::dim(x) {
            for buf in [
                &mut iv.x_prev,
                &mut iv.ydiff,
                &mut iv.bspl,
                &mut iv.r4,
                &mut iv.r5,
            ] {
                *buf = A::clone_shape(x);
            }
        }
        iv.x_prev.clone_from(x);
        let t_prev = self.t;
        let h = loop {
            let h = self.dt;
            let mut t = self.t;
            match self.ctrl.try_step(sys, x, &mut t, &mut self.dt)? {
                StepOutcome::Rejected => continue,
                StepOutcome::Accepted | StepOutcome::AcceptedIncreased => {
                    self.t = t;
                    break h;
                }
            }
        };

        let k = self.ctrl.stepper().stages();
        A::scale_sum(&mut iv.ydiff, &[1.0, -1.0], &[x, &iv.x_prev])?;
        A::scale_sum(&mut iv.bspl, &[h, -1.0], &[&k[0], &iv.ydiff])?;
        A::scale_sum(&mut iv.r4, &[1.0, -h, -1.0], &[&iv.ydiff, &k[6], &iv.bspl])?;
        let d = DOPRI5_DENSE;
        A::scale_sum(
            &mut iv.r5,
            &[h * d[0], h * d[2], h * d[3], h * d[4], h * d[5], h * d[6]],
            &[&k[0], &k[2], &k[3], &k[4], &k[5], &k[6]],
        )?;
        iv.t_prev = t_prev;
        iv.t_cur = self.t;
        iv.valid = true;
        Ok((t_prev, self.t))
    }

    /// Evaluate the continuous extension at `t` inside the last interval.
    pub fn calc_state(&self, t: f64, out: &mut S) -> Result<()> {
        let iv = self
            .interval
            .as_ref()
            .filter(|iv| iv.valid)
            .ok_or(Error::NotInitialized)?;
        if !(iv.t_prev <= t && t <= iv.t_cur) {
            return Err(Error::OutOfRange {
                t,
                t_prev: iv.t_prev,
                t_cur: iv.t_cur,
            });
        }
        if t == iv.t_cur {
            out.clone_from(self.x.as_ref().expect("initialized"));
            return Ok(());
        }
        let theta = (t - iv.t_prev) / (iv.t_cur - iv.t_prev);
        let theta1 = 1.0 - theta;
        A::scale_sum(
            out,
            &[
                1.0,
                theta,
                theta * theta1,
                theta * theta * theta1,
                theta * theta * theta1 * theta1,
            ],
            &[&iv.x_prev, &iv.ydiff, &iv.bspl, &iv.r4, &iv.r5],
        )
    }
}

impl<S, A> Stepper<S> for DenseOutputDopri5<S, A>
where
    S: Clone + PartialEq,
    A: Algebra<S>,
{
    type Algebra = A;

    fn order_info(&self) -> crate::stepper::OrderInfo {
        self.ctrl.order_info()
    }

    fn evaluations(&self) -> u64 {
        self.ctrl.evaluations()
    }
}
