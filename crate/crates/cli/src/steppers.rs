use clap::ValueEnum;
use odestep::integrate::IntegrationResult;
use odestep::systems::NamedSystem;
use odestep::{
    integrate_adaptive, integrate_const, ControlledStepper, ControllerParams, DenseOutputDopri5,
    Dopri5, Error, ExplicitEuler, ImplicitEuler, IntegrationFailure, PairState, Rk4, Rk54CashKarp,
    SymplecticEuler,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum StepperKind {
    #[value(name = "euler")]
    Euler,
    #[value(name = "rk4")]
    Rk4,
    #[value(name = "rk54_ck")]
    Rk54Ck,
    #[value(name = "dopri5")]
    Dopri5,
    #[value(name = "rk54_ck_controlled")]
    Rk54CkControlled,
    #[value(name = "dopri5_controlled")]
    Dopri5Controlled,
    #[value(name = "dopri5_dense")]
    Dopri5Dense,
    #[value(name = "implicit_euler")]
    ImplicitEuler,
    #[value(name = "symplectic_euler")]
    SymplecticEuler,
}

impl StepperKind {
    pub fn name(self) -> &'static str {
        match self {
            StepperKind::Euler => "euler",
            StepperKind::Rk4 => "rk4",
            StepperKind::Rk54Ck => "rk54_ck",
            StepperKind::Dopri5 => "dopri5",
            StepperKind::Rk54CkControlled => "rk54_ck_controlled",
            StepperKind::Dopri5Controlled => "dopri5_controlled",
            StepperKind::Dopri5Dense => "dopri5_dense",
            StepperKind::ImplicitEuler => "implicit_euler",
            StepperKind::SymplecticEuler => "symplectic_euler",
        }
    }

    /// Takes exactly the requested steps, without step-size control.
    pub fn is_fixed_step(self) -> bool {
        !matches!(
            self,
            StepperKind::Rk54CkControlled
                | StepperKind::Dopri5Controlled
                | StepperKind::Dopri5Dense
        )
    }

    pub fn supports(self, sys: &NamedSystem) -> bool {
        self != StepperKind::SymplecticEuler || sys.split.is_some()
    }
}

/// How the run samples the trajectory.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Schedule {
    pub t0: f64,
    pub t1: f64,
    pub dt: f64,
    /// Observe every accepted step instead of the constant grid.
    pub adaptive: bool,
    pub params: ControllerParams,
}

fn split_pair(x: &[f64]) -> PairState<Vec<f64>> {
    let h = x.len() / 2;
    PairState::new(x[..h].to_vec(), x[h..].to_vec())
}

/// Integrate `sys` from `x` with the chosen stepper, reporting every
/// observation as a flat state. `x` holds the final state afterwards.
pub fn integrate(
    kind: StepperKind,
    sys: &NamedSystem,
    x: &mut Vec<f64>,
    s: &Schedule,
    obs: &mut dyn FnMut(&[f64], f64),
) -> IntegrationResult {
    let mut sys = *sys;
    let observe = |x: &Vec<f64>, t: f64| obs(x, t);
    let (t0, t1, dt) = (s.t0, s.t1, s.dt);
    if s.adaptive && kind.is_fixed_step() {
        return Err(IntegrationFailure::from(Error::InvalidParameter(format!(
            "adaptive observation needs a controlled stepper, not {}",
            kind.name()
        ))));
    }
    match kind {
        StepperKind::Euler => {
            integrate_const(&mut ExplicitEuler::new(), &mut sys, x, t0, t1, dt, observe)
        }
        StepperKind::Rk4 => integrate_const(&mut Rk4::new(), &mut sys, x, t0, t1, dt, observe),
        StepperKind::Rk54Ck => {
            integrate_const(&mut Rk54CashKarp::new(), &mut sys, x, t0, t1, dt, observe)
        }
        StepperKind::Dopri5 => {
            integrate_const(&mut Dopri5::new(), &mut sys, x, t0, t1, dt, observe)
        }
        StepperKind::ImplicitEuler => integrate_const(
            &mut ImplicitEuler::default(),
            &mut sys,
            x,
            t0,
            t1,
            dt,
            observe,
        ),
        StepperKind::Rk54CkControlled => {
            let mut c = ControlledStepper::new(Rk54CashKarp::new(), s.params)?;
            if s.adaptive {
                integrate_adaptive(&mut c, &mut sys, x, t0, t1, dt, observe)
            } else {
                integrate_const(&mut c, &mut sys, x, t0, t1, dt, observe)
            }
        }
        StepperKind::Dopri5Controlled => {
            let mut c = ControlledStepper::new(Dopri5::new(), s.params)?;
            if s.adaptive {
                integrate_adaptive(&mut c, &mut sys, x, t0, t1, dt, observe)
            } else {
                integrate_const(&mut c, &mut sys, x, t0, t1, dt, observe)
            }
        }
        StepperKind::Dopri5Dense => {
            if s.adaptive {
                // The dense stepper's internal steps are controlled DP5 steps.
                let mut c = ControlledStepper::new(Dopri5::new(), s.params)?;
                integrate_adaptive(&mut c, &mut sys, x, t0, t1, dt, observe)
            } else {
                let mut d = DenseOutputDopri5::new(s.params)?;
                integrate_const(&mut d, &mut sys, x, t0, t1, dt, observe)
            }
        }
        StepperKind::SymplecticEuler => {
            let split = sys.split.ok_or_else(|| {
                IntegrationFailure::from(Error::InvalidParameter(format!(
                    "system {} is not a separable Hamiltonian",
                    sys.name
                )))
            })?;
            let mut pair = split_pair(x);
            let mut flat = Vec::with_capacity(x.len());
            let mut h = split;
            let res = integrate_const(
                &mut SymplecticEuler::new(),
                &mut h,
                &mut pair,
                t0,
                t1,
                dt,
                |p: &PairState<Vec<f64>>, t: f64| {
                    flat.clear();
                    flat.extend_from_slice(&p.q);
                    flat.extend_from_slice(&p.p);
                    obs(&flat, t);
                },
            );
            let h = pair.q.len();
            x[..h].copy_from_slice(&pair.q);
            x[h..].copy_from_slice(&pair.p);
            res
        }
    }
}
