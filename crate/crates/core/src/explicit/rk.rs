use std::marker::PhantomData;

use super::tableau::{ButcherTableau, CASH_KARP, DORMAND_PRINCE, EULER, RK4};
use crate::algebra::{Algebra, SliceAlgebra, MAX_TERMS};
use crate::error::{Error, Result};
use crate::stepper::{ErrorStep, ErrorStepper, OrderInfo, Step, Stepper};
use crate::system::System;

/// Selects the coefficient set of an [`ExplicitRk`] stepper at compile time.
pub trait Method {
    const TABLEAU: &'static ButcherTableau;
}

/// Methods carrying embedded weights.
pub trait EmbeddedMethod: Method {}

#[derive(Debug, Clone, Copy, Default)]
pub struct EulerMethod;
#[derive(Debug, Clone, Copy, Default)]
pub struct Rk4Method;
#[derive(Debug, Clone, Copy, Default)]
pub struct CashKarp54;
#[derive(Debug, Clone, Copy, Default)]
pub struct DormandPrince54;

impl Method for EulerMethod {
    const TABLEAU: &'static ButcherTableau = &EULER;
}
impl Method for Rk4Method {
    const TABLEAU: &'static ButcherTableau = &RK4;
}
impl Method for CashKarp54 {
    const TABLEAU: &'static ButcherTableau = &CASH_KARP;
}
impl Method for DormandPrince54 {
    const TABLEAU: &'static ButcherTableau = &DORMAND_PRINCE;
}
impl EmbeddedMethod for CashKarp54 {}
impl EmbeddedMethod for DormandPrince54 {}

pub type ExplicitEuler<S, A = SliceAlgebra> = ExplicitRk<S, EulerMethod, A>;
pub type Rk4<S, A = SliceAlgebra> = ExplicitRk<S, Rk4Method, A>;
pub type Rk54CashKarp<S, A = SliceAlgebra> = ExplicitRk<S, CashKarp54, A>;
pub type Dopri5<S, A = SliceAlgebra> = ExplicitRk<S, DormandPrince54, A>;

/// Tableau-driven explicit Runge-Kutta stepper.
///
/// Stage buffers are allocated on the first step and reused afterwards;
/// they are reallocated only if the state dimension changes.
#[derive(Debug)]
pub struct ExplicitRk<S, M, A = SliceAlgebra> {
    stages: Vec<S>,
    arg: Option<S>,
    swap: Option<S>,
    evaluations: u64,
    fsal_ready: bool,
    _marker: PhantomData<(M, A)>,
}

impl<S, M: Method> ExplicitRk<S, M, SliceAlgebra> {
    pub fn new() -> Self {
        Self::with_algebra()
    }
}

impl<S, M: Method> Default for ExplicitRk<S, M, SliceAlgebra> {
    fn default() -> Self {
        Self::new()
    }
}

impl<S: Clone, M: Method, A> Clone for ExplicitRk<S, M, A> {
    fn clone(&self) -> Self {
        ExplicitRk {
            stages: self.stages.clone(),
            arg: self.arg.clone(),
            swap: self.swap.clone(),
            evaluations: self.evaluations,
            fsal_ready: self.fsal_ready,
            _marker: PhantomData,
        }
    }
}

impl<S, M: Method, A> ExplicitRk<S, M, A> {
    pub fn with_algebra() -> Self {
        debug_assert!(M::TABLEAU.validate().is_ok());
        ExplicitRk {
            stages: Vec::new(),
            arg: None,
            swap: None,
            evaluations: 0,
            fsal_ready: false,
            _marker: PhantomData,
        }
    }

    pub fn tableau(&self) -> &'static ButcherTableau {
        M::TABLEAU
    }

    /// Stage derivatives `k_1..k_s` of the most recent step; empty before
    /// the first step.
    pub fn stages(&self) -> &[S] {
        &self.stages
    }
}

impl<S, M, A> ExplicitRk<S, M, A>
where
    S: Clone,
    M: Method,
    A: Algebra<S>,
{
    fn ensure_buffers(&mut self, x: &S) {
        let n = A::dim(x);
        let s = M::TABLEAU.stages();
        let stale = self.stages.len() != s || self.stages.first().is_some_and(|k| A::dim(k) != n);
        if stale {
            self.stages = (0..s).map(|_| A::clone_shape(x)).collect();
            self.arg = Some(A::clone_shape(x));
            self.swap = Some(A::clone_shape(x));
            self.fsal_ready = false;
        }
    }

    /// Fills stages `0..upto` and writes the propagated solution into `out`.
    #[allow(clippy::too_many_arguments)]
    fn run_stages<Sys: System<S> + ?Sized>(
        &mut self,
        sys: &mut Sys,
        x: &S,
        dxdt: Option<&S>,
        t: f64,
        out: &mut S,
        dt: f64,
        upto: usize,
    ) -> Result<()> {
        if A::dim(x) != A::dim(out) {
            return Err(Error::Dimension {
                expected: A::dim(x),
                found: A::dim(out),
            });
        }
        self.ensure_buffers(x);
        let tab = M::TABLEAU;
        match dxdt {
            Some(d) => {
                if A::dim(d) != A::dim(x) {
                    return Err(Error::Dimension {
                        expected: A::dim(x),
                        found: A::dim(d),
                    });
                }
                self.stages[0].clone_from(d);
            }
            None => {
                sys.rhs(x, &mut self.stages[0], t);
                self.evaluations += 1;
            }
        }
        let arg = self.arg.as_mut().expect("buffers allocated");
        for j in 1..upto {
            let (done, rest) = self.stages.split_at_mut(j);
            combine::<S, A>(arg, x, dt, tab.a[j], done)?;
            sys.rhs(arg, &mut rest[0], t + tab.c[j] * dt);
            self.evaluations += 1;
        }
        combine::<S, A>(out, x, dt, tab.b, &self.stages)
    }
}

/// `out = x + dt * Σ w_i k_i`, skipping zero weights.
fn combine<S, A: Algebra<S>>(out: &mut S, x: &S, dt: f64, w: &[f64], k: &[S]) -> Result<()>
where
    S: Clone,
{
    let mut coeffs = [0.0; MAX_TERMS];
    let mut terms: [&S; MAX_TERMS] = [x; MAX_TERMS];
    coeffs[0] = 1.0;
    let mut n = 1;
    for (wi, ki) in w.iter().zip(k) {
        if *wi != 0.0 {
            coeffs[n] = dt * wi;
            terms[n] = ki;
            n += 1;
        }
    }
    A::scale_sum(out, &coeffs[..n], &terms[..n])
}

/// `out = dt * Σ w_i k_i`, skipping zero weights.
fn weighted<S, A: Algebra<S>>(out: &mut S, dt: f64, w: &[f64], k: &[S]) -> Result<()> {
    let mut coeffs = [0.0; MAX_TERMS];
    let mut terms: [&S; MAX_TERMS] = [&k[0]; MAX_TERMS];
    let mut n = 0;
    for (wi, ki) in w.iter().zip(k) {
        if *wi != 0.0 {
            coeffs[n] = dt * wi;
            terms[n] = ki;
            n += 1;
        }
    }
    A::scale_sum(out, &coeffs[..n], &terms[..n])
}

impl<S, M, A> Stepper<S> for ExplicitRk<S, M, A>
where
    S: Clone,
    M: Method,
    A: Algebra<S>,
{
    type Algebra = A;

    fn order_info(&self) -> OrderInfo {
        let tab = M::TABLEAU;
        OrderInfo {
            order: tab.order,
            error_order: tab.error_order,
            stage_count: tab.stages() as u32,
        }
    }

    fn evaluations(&self) -> u64 {
        self.evaluations
    }
}

impl<S, M, A, Sys> Step<S, Sys> for ExplicitRk<S, M, A>
where
    S: Clone,
    M: Method,
    A: Algebra<S>,
    Sys: System<S> + ?Sized,
{
    fn do_step(&mut self, sys: &mut Sys, x: &mut S, t: f64, dt: f64) -> Result<()> {
        self.ensure_buffers(x);
        let mut out = self.swap.take().expect("buffers allocated");
        let res = self.do_step_out(sys, x, t, &mut out, dt);
        if res.is_ok() {
            std::mem::swap(x, &mut out);
        }
        self.swap = Some(out);
        res
    }

    fn do_step_out(&mut self, sys: &mut Sys, x: &S, t: f64, out: &mut S, dt: f64) -> Result<()> {
        let tab = M::TABLEAU;
        // The FSAL stage only matters for the error estimate and the next step.
        let upto = if tab.fsal {
            tab.stages() - 1
        } else {
            tab.stages()
        };
        self.fsal_ready = false;
        self.run_stages(sys, x, None, t, out, dt, upto)
    }
}

impl<S, M, A> ErrorStepper<S> for ExplicitRk<S, M, A>
where
    S: Clone,
    M: EmbeddedMethod,
    A: Algebra<S>,
{
    fn fsal_derivative(&self) -> Option<&S> {
        if self.fsal_ready {
            self.stages.last()
        } else {
            None
        }
    }
}

impl<S, M, A, Sys> ErrorStep<S, Sys> for ExplicitRk<S, M, A>
where
    S: Clone,
    M: EmbeddedMethod,
    A: Algebra<S>,
    Sys: System<S> + ?Sized,
{
    fn do_step_err(
        &mut self,
        sys: &mut Sys,
        x: &S,
        dxdt: Option<&S>,
        t: f64,
        out: &mut S,
        dt: f64,
        xerr: &mut S,
    ) -> Result<()> {
        let tab = M::TABLEAU;
        let s = tab.stages();
        self.fsal_ready = false;
        if tab.fsal {
            self.run_stages(sys, x, dxdt, t, out, dt, s - 1)?;
            // Last stage: f at the propagated solution.
            sys.rhs(out, &mut self.stages[s - 1], t + dt);
            self.evaluations += 1;
            self.fsal_ready = true;
        } else {
            self.run_stages(sys, x, dxdt, t, out, dt, s)?;
        }
        let emb = tab.b_embedded.expect("embedded method");
        let mut diff = [0.0; MAX_TERMS];
        for i in 0..s {
            diff[i] = tab.b[i] - emb[i];
        }
        weighted::<S, A>(xerr, dt, &diff[..s], &self.stages)
    }
}
