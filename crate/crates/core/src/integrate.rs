//! Integrate drivers.
//!
//! * [`integrate_const`]: observations on the grid `t0 + k dt`. The strategy
//!   depends on the stepper: plain steppers take exactly those steps,
//!   controlled steppers take adaptive steps that land on every grid point,
//!   and the dense-output stepper takes the largest steps it can and
//!   interpolates (see [`IntegrateConst`]).
//! * [`integrate_adaptive`]: adaptive steps, observed after every
//!   accepted step.
//! * [`integrate_const_dense`]: adaptive steps, observed on a uniform grid
//!   through dense output.
//!
//! The state is advanced in place; the observer is called once at `t0`
//! before any step and never sees a rejected trial.

use std::fmt;

use crate::algebra::Algebra;
use crate::control::{ControlledStepper, StepOutcome};
use crate::dense::DenseOutputDopri5;
use crate::error::{Error, Result};
use crate::explicit::{ExplicitRk, Method};
use crate::implicit::{ImplicitEuler, JacobianSystem};
use crate::stepper::{ErrorStep, ErrorStepper, Step, Stepper};
use crate::symplectic::{PairState, SeparableHamiltonian, SymplecticEuler};
use crate::system::{Observer, System};

/// Grid points within this fraction of `dt` of `t1` are snapped to `t1`.
pub const GRID_SNAP: f64 = 1e-10;

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct IntegrationReport {
    pub final_time: f64,
    pub steps_attempted: u64,
    pub steps_accepted: u64,
    pub steps_rejected: u64,
    pub system_evaluations: u64,
    pub observer_calls: u64,
}

/// An integration that stopped early. `report` describes the work done up
/// to the failure; the state holds the last accepted value.
#[derive(Debug, Clone, PartialEq)]
pub struct IntegrationFailure {
    pub error: Error,
    pub report: IntegrationReport,
}

impl fmt::Display for IntegrationFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "integration stopped at t = {}: {}",
            self.report.final_time, self.error
        )
    }
}

impl std::error::Error for IntegrationFailure {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        Some(&self.error)
    }
}

impl From<Error> for IntegrationFailure {
    fn from(error: Error) -> Self {
        IntegrationFailure {
            error,
            report: IntegrationReport::default(),
        }
    }
}

pub type IntegrationResult = std::result::Result<IntegrationReport, IntegrationFailure>;

fn check_span(t0: f64, t1: f64, dt: f64) -> Result<()> {
    if !(t0.is_finite() && t1.is_finite()) {
        return Err(Error::invalid("integration bounds must be finite"));
    }
    if !(t1 > t0) {
        return Err(Error::invalid(format!("need t1 > t0, got [{t0}, {t1}]")));
    }
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::invalid(format!(
            "step size must be positive, got {dt}"
        )));
    }
    Ok(())
}

/// Number of whole steps of `dt` in `[t0, t1]`, counting a remainder within
/// [`GRID_SNAP`]` * dt` of a full step as full.
fn grid_steps(t0: f64, t1: f64, dt: f64) -> u64 {
    let r = (t1 - t0) / dt;
    let n = r.floor();
    if r - n >= 1.0 - GRID_SNAP {
        n as u64 + 1
    } else {
        n as u64
    }
}

fn grid_time(t0: f64, t1: f64, dt: f64, k: u64) -> f64 {
    let t = t0 + k as f64 * dt;
    if (t - t1).abs() <= GRID_SNAP * dt {
        t1
    } else {
        t
    }
}

/// Tracks counters relative to the state of a stepper at the start of a run.
struct Tally {
    report: IntegrationReport,
    evals0: u64,
}

impl Tally {
    fn start(evals0: u64, t0: f64) -> Self {
        Tally {
            report: IntegrationReport {
                final_time: t0,
                ..Default::default()
            },
            evals0,
        }
    }

    fn observe<S: ?Sized, O: Observer<S>>(&mut self, obs: &mut O, x: &S, t: f64) {
        obs.observe(x, t);
        self.report.observer_calls += 1;
        self.report.final_time = t;
    }

    fn finish(mut self, evals: u64) -> IntegrationReport {
        self.report.system_evaluations = evals - self.evals0;
        self.report
    }

    fn fail(self, evals: u64, error: Error) -> IntegrationFailure {
        IntegrationFailure {
            error,
            report: self.finish(evals),
        }
    }
}

/// Fixed steps on the grid; the observer sees the last grid point `<= t1`.
pub fn integrate_fixed<S, Sys, St, O>(
    stepper: &mut St,
    sys: &mut Sys,
    x: &mut S,
    t0: f64,
    t1: f64,
    dt: f64,
    mut obs: O,
) -> IntegrationResult
where
    St: Step<S, Sys>,
    Sys: ?Sized,
    O: Observer<S>,
{
    check_span(t0, t1, dt)?;
    let n = grid_steps(t0, t1, dt);
    let mut tally = Tally::start(stepper.evaluations(), t0);
    tally.observe(&mut obs, x, t0);
    let mut t = t0;
    for k in 1..=n {
        let t_next = grid_time(t0, t1, dt, k);
        let h = if t_next == t1 { t1 - t } else { dt };
        tally.report.steps_attempted += 1;
        if let Err(e) = stepper.do_step(sys, x, t, h) {
            return Err(tally.fail(stepper.evaluations(), e));
        }
        tally.report.steps_accepted += 1;
        t = t_next;
        tally.observe(&mut obs, x, t);
    }
    Ok(tally.finish(stepper.evaluations()))
}

/// Adaptive steps from `t` to exactly `t_end`; observes accepted steps
/// when `observe_steps` is set. Returns the proposed step size.
#[allow(clippy::too_many_arguments)]
fn adaptive_segment<E, S, Sys, O>(
    ctrl: &mut ControlledStepper<E, S>,
    sys: &mut Sys,
    x: &mut S,
    t: &mut f64,
    t_end: f64,
    mut dt: f64,
    tally: &mut Tally,
    obs: &mut O,
    observe_steps: bool,
) -> Result<f64>
where
    E: ErrorStep<S, Sys>,
    S: Clone + PartialEq,
    Sys: System<S> + ?Sized,
    O: Observer<S>,
{
    while *t < t_end {
        // Land exactly on t_end, and never leave a sliver behind.
        let last = t_end - (*t + dt) <= GRID_SNAP * dt;
        let h = if last { t_end - *t } else { dt };
        let mut t_try = *t;
        let mut h_try = h;
        tally.report.steps_attempted += 1;
        let outcome = ctrl.try_step(sys, x, &mut t_try, &mut h_try)?;
        if outcome == StepOutcome::Rejected {
            tally.report.steps_rejected += 1;
            dt = h_try;
            continue;
        }
        tally.report.steps_accepted += 1;
        *t = if last { t_end } else { t_try };
        // A clamped final step says little about the natural step size.
        dt = if last { h_try.max(dt) } else { h_try };
        if observe_steps {
            tally.observe(obs, x, *t);
        } else {
            tally.report.final_time = *t;
        }
    }
    Ok(dt)
}

/// Adaptive integration observed after every accepted step.
pub fn integrate_adaptive<E, S, Sys, O>(
    ctrl: &mut ControlledStepper<E, S>,
    sys: &mut Sys,
    x: &mut S,
    t0: f64,
    t1: f64,
    dt0: f64,
    mut obs: O,
) -> IntegrationResult
where
    E: ErrorStep<S, Sys>,
    S: Clone + PartialEq,
    Sys: System<S> + ?Sized,
    O: Observer<S>,
{
    check_span(t0, t1, dt0)?;
    ctrl.reset();
    let mut tally = Tally::start(ctrl.evaluations(), t0);
    tally.observe(&mut obs, x, t0);
    let mut t = t0;
    match adaptive_segment(ctrl, sys, x, &mut t, t1, dt0, &mut tally, &mut obs, true) {
        Ok(_) => Ok(tally.finish(ctrl.evaluations())),
        Err(e) => Err(tally.fail(ctrl.evaluations(), e)),
    }
}

/// Adaptive steps that land on every grid point `t0 + k dt <= t1`.
pub fn integrate_const_controlled<E, S, Sys, O>(
    ctrl: &mut ControlledStepper<E, S>,
    sys: &mut Sys,
    x: &mut S,
    t0: f64,
    t1: f64,
    dt: f64,
    mut obs: O,
) -> IntegrationResult
where
    E: ErrorStep<S, Sys>,
    S: Clone + PartialEq,
    Sys: System<S> + ?Sized,
    O: Observer<S>,
{
    check_span(t0, t1, dt)?;
    ctrl.reset();
    let n = grid_steps(t0, t1, dt);
    let mut tally = Tally::start(ctrl.evaluations(), t0);
    tally.observe(&mut obs, x, t0);
    let (mut t, mut h) = (t0, dt);
    for k in 1..=n {
        let t_next = grid_time(t0, t1, dt, k);
        match adaptive_segment(ctrl, sys, x, &mut t, t_next, h, &mut tally, &mut obs, false) {
            Ok(proposal) => h = proposal,
            Err(e) => return Err(tally.fail(ctrl.evaluations(), e)),
        }
        tally.observe(&mut obs, x, t);
    }
    Ok(tally.finish(ctrl.evaluations()))
}

/// Adaptive dense-output integration observed at `t0 + k observe_dt` and
/// finally at `t1`.
///
/// The stepper is initialized with `observe_dt` as its first trial step.
/// Internal steps may overshoot `t1`; the observations are interpolated.
pub fn integrate_const_dense<S, A, Sys, O>(
    dense: &mut DenseOutputDopri5<S, A>,
    sys: &mut Sys,
    x: &mut S,
    t0: f64,
    t1: f64,
    observe_dt: f64,
    mut obs: O,
) -> IntegrationResult
where
    S: Clone + PartialEq,
    A: Algebra<S>,
    Sys: System<S> + ?Sized,
    O: Observer<S>,
{
    check_span(t0, t1, observe_dt)?;
    dense.initialize(x.clone(), t0, observe_dt)?;
    let before = dense.counters();
    let mut tally = Tally::start(dense.evaluations(), t0);
    tally.observe(&mut obs, x, t0);
    let mut k = 1;
    loop {
        let mut t_obs = grid_time(t0, t1, observe_dt, k);
        if t_obs > t1 {
            t_obs = t1;
        }
        while dense.current_time() < t_obs {
            if let Err(e) = dense.do_step(sys) {
                let c = dense.counters();
                tally.report.steps_attempted = c.attempted - before.attempted;
                tally.report.steps_accepted = c.accepted - before.accepted;
                tally.report.steps_rejected = c.rejected - before.rejected;
                return Err(tally.fail(dense.evaluations(), e));
            }
        }
        dense.calc_state(t_obs, x)?;
        tally.observe(&mut obs, x, t_obs);
        if t_obs == t1 {
            break;
        }
        k += 1;
    }
    let c = dense.counters();
    tally.report.steps_attempted = c.attempted - before.attempted;
    tally.report.steps_accepted = c.accepted - before.accepted;
    tally.report.steps_rejected = c.rejected - before.rejected;
    Ok(tally.finish(dense.evaluations()))
}

/// Constant-interval integration, dispatched on the stepper's capability.
pub trait IntegrateConst<S, Sys: ?Sized> {
    fn integrate_const<O: Observer<S>>(
        &mut self,
        sys: &mut Sys,
        x: &mut S,
        t0: f64,
        t1: f64,
        dt: f64,
        obs: O,
    ) -> IntegrationResult;
}

impl<S, M, A, Sys> IntegrateConst<S, Sys> for ExplicitRk<S, M, A>
where
    S: Clone,
    M: Method,
    A: Algebra<S>,
    Sys: System<S> + ?Sized,
{
    fn integrate_const<O: Observer<S>>(
        &mut self,
        sys: &mut Sys,
        x: &mut S,
        t0: f64,
        t1: f64,
        dt: f64,
        obs: O,
    ) -> IntegrationResult {
        integrate_fixed(self, sys, x, t0, t1, dt, obs)
    }
}

impl<S, A, J> IntegrateConst<S, J> for ImplicitEuler<S, A>
where
    S: AsRef<[f64]> + AsMut<[f64]> + Clone,
    A: Algebra<S>,
    J: JacobianSystem<S> + ?Sized,
{
    fn integrate_const<O: Observer<S>>(
        &mut self,
        sys: &mut J,
        x: &mut S,
        t0: f64,
        t1: f64,
        dt: f64,
        obs: O,
    ) -> IntegrationResult {
        integrate_fixed(self, sys, x, t0, t1, dt, obs)
    }
}

impl<S, A, H> IntegrateConst<PairState<S>, H> for SymplecticEuler<S, A>
where
    S: Clone,
    A: Algebra<S>,
    H: SeparableHamiltonian<S> + ?Sized,
{
    fn integrate_const<O: Observer<PairState<S>>>(
        &mut self,
        sys: &mut H,
        x: &mut PairState<S>,
        t0: f64,
        t1: f64,
        dt: f64,
        obs: O,
    ) -> IntegrationResult {
        integrate_fixed(self, sys, x, t0, t1, dt, obs)
    }
}

impl<E, S, Sys> IntegrateConst<S, Sys> for ControlledStepper<E, S>
where
    E: ErrorStepper<S> + ErrorStep<S, Sys>,
    S: Clone + PartialEq,
    Sys: System<S> + ?Sized,
{
    fn integrate_const<O: Observer<S>>(
        &mut self,
        sys: &mut Sys,
        x: &mut S,
        t0: f64,
        t1: f64,
        dt: f64,
        obs: O,
    ) -> IntegrationResult {
        integrate_const_controlled(self, sys, x, t0, t1, dt, obs)
    }
}

impl<S, A, Sys> IntegrateConst<S, Sys> for DenseOutputDopri5<S, A>
where
    S: Clone + PartialEq,
    A: Algebra<S>,
    Sys: System<S> + ?Sized,
{
    fn integrate_const<O: Observer<S>>(
        &mut self,
        sys: &mut Sys,
        x: &mut S,
        t0: f64,
        t1: f64,
        dt: f64,
        obs: O,
    ) -> IntegrationResult {
        integrate_const_dense(self, sys, x, t0, t1, dt, obs)
    }
}

/// Integrate with observations at constant intervals `dt`.
pub fn integrate_const<St, S, Sys, O>(
    stepper: &mut St,
    sys: &mut Sys,
    x: &mut S,
    t0: f64,
    t1: f64,
    dt: f64,
    obs: O,
) -> IntegrationResult
where
    St: IntegrateConst<S, Sys>,
    Sys: ?Sized,
    O: Observer<S>,
{
    stepper.integrate_const(sys, x, t0, t1, dt, obs)
}
