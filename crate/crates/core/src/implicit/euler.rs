use std::marker::PhantomData;

use super::lu::{DenseMatrix, LuDecomposition};
use crate::algebra::{Algebra, SliceAlgebra};
use crate::error::{Error, Result};
use crate::stepper::{OrderInfo, Step, Stepper};
use crate::system::System;

/// A system that can also provide its Jacobian `J_ij = ∂f_i/∂x_j`.
pub trait JacobianSystem<S: ?Sized>: System<S> {
    /// Fill `jac` (already sized `n × n`).
    fn jacobian(&mut self, x: &S, jac: &mut DenseMatrix, t: f64);
}

/// Pairs a right-hand side with a Jacobian callable.
#[derive(Debug, Clone, Copy)]
pub struct WithJacobian<F, J> {
    pub rhs: F,
    pub jacobian: J,
}

impl<S: ?Sized, F, J> System<S> for WithJacobian<F, J>
where
    F: FnMut(&S, &mut S, f64),
{
    fn rhs(&mut self, x: &S, dxdt: &mut S, t: f64) {
        (self.rhs)(x, dxdt, t)
    }
}

impl<S: ?Sized, F, J> JacobianSystem<S> for WithJacobian<F, J>
where
    F: FnMut(&S, &mut S, f64),
    J: FnMut(&S, &mut DenseMatrix, f64),
{
    fn jacobian(&mut self, x: &S, jac: &mut DenseMatrix, t: f64) {
        (self.jacobian)(x, jac, t)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NewtonParams {
    /// Convergence threshold on the max-norm of the Newton update.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for NewtonParams {
    fn default() -> Self {
        NewtonParams {
            tol: 1e-12,
            max_iter: 50,
        }
    }
}

impl NewtonParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0) {
            return Err(Error::invalid("Newton tolerance must be positive"));
        }
        if self.max_iter == 0 {
            return Err(Error::invalid("Newton needs at least one iteration"));
        }
        Ok(())
    }
}

/// Backward Euler: solves `u = x + dt f(u, t + dt)` by Newton's method with
/// iteration matrix `I - dt J(u)`, starting from `u = x`.
///
/// Each iteration evaluates and factors the Jacobian once. After applying
/// the update the residual is evaluated at the new iterate and its
/// correction computed with the same factorization; the iteration has
/// converged when that correction is at most `tol` in max-norm (the
/// correction is then applied). A linear system therefore converges in one
/// iteration.
#[derive(Debug, Clone)]
pub struct ImplicitEuler<S, A = SliceAlgebra> {
    params: NewtonParams,
    f: Option<S>,
    g: Option<S>,
    swap: Option<S>,
    delta: Vec<f64>,
    jac: DenseMatrix,
    lu: Option<LuDecomposition>,
    evaluations: u64,
    jacobian_evaluations: u64,
    last_iterations: usize,
    _algebra: PhantomData<A>,
}

impl<S> ImplicitEuler<S, SliceAlgebra> {
    pub fn new(params: NewtonParams) -> Result<Self> {
        Self::with_algebra(params)
    }
}

impl<S> Default for ImplicitEuler<S, SliceAlgebra> {
    fn default() -> Self {
        Self::with_algebra(NewtonParams::default()).expect("default parameters are valid")
    }
}

impl<S, A> ImplicitEuler<S, A> {
    pub fn with_algebra(params: NewtonParams) -> Result<Self> {
        params.validate()?;
        Ok(ImplicitEuler {
            params,
            f: None,
            g: None,
            swap: None,
            delta: Vec::new(),
            jac: DenseMatrix::zeros(0),
            lu: None,
            evaluations: 0,
            jacobian_evaluations: 0,
            last_iterations: 0,
            _algebra: PhantomData,
        })
    }

    pub fn params(&self) -> NewtonParams {
        self.params
    }

    /// Newton iterations used by the most recent step.
    pub fn last_iterations(&self) -> usize {
        self.last_iterations
    }

    pub fn jacobian_evaluations(&self) -> u64 {
        self.jacobian_evaluations
    }
}

impl<S, A> Stepper<S> for ImplicitEuler<S, A>
where
    S: AsRef<[f64]> + AsMut<[f64]> + Clone,
    A: Algebra<S>,
{
    type Algebra = A;

    fn order_info(&self) -> OrderInfo {
        OrderInfo {
            order: 1,
            error_order: None,
            stage_count: 1,
        }
    }

    fn evaluations(&self) -> u64 {
        self.evaluations
    }
}

impl<S, A> ImplicitEuler<S, A>
where
    S: AsRef<[f64]> + AsMut<[f64]> + Clone,
    A: Algebra<S>,
{
    fn ensure_buffers(&mut self, x: &S) {
        let n = A::dim(x);
        if self.delta.len() != n || self.f.is_none() {
            self.f = Some(A::clone_shape(x));
            self.g = Some(A::clone_shape(x));
            self.swap = Some(A::clone_shape(x));
            self.delta = vec![0.0; n];
            self.jac.reset(n);
        }
    }

    /// `g = u - x - dt f`, then `delta = -M^{-1} g`; returns `|delta|_inf`.
    fn correction(&mut self, u: &S, x: &S, dt: f64) -> Result<f64> {
        let f = self.f.as_ref().expect("buffers");
        let g = self.g.as_mut().expect("buffers");
        A::scale_sum(g, &[1.0, -1.0, -dt], &[u, x, f])?;
        let lu = self.lu.as_ref().expect("factored");
        lu.solve_into(g.as_ref(), &mut self.delta)?;
        let mut norm: f64 = 0.0;
        for d in &mut self.delta {
            *d = -*d;
            norm = if d.is_nan() || norm.is_nan() {
                f64::NAN
            } else {
                norm.max(d.abs())
            };
        }
        Ok(norm)
    }

    fn apply_correction(&self, u: &mut S) {
        for (ui, d) in u.as_mut().iter_mut().zip(&self.delta) {
            *ui += d;
        }
    }

    fn newton_matrix(&mut self, dt: f64) -> Result<()> {
        let n = self.jac.dim();
        let m = &mut self.jac;
        for i in 0..n {
            for j in 0..n {
                let v = -dt * m[(i, j)];
                m[(i, j)] = if i == j { 1.0 + v } else { v };
            }
        }
        match self.lu.as_mut() {
            Some(lu) => lu.refactor(&self.jac),
            None => {
                self.lu = Some(LuDecomposition::new(self.jac.clone())?);
                Ok(())
            }
        }
    }

    fn solve<J: JacobianSystem<S> + ?Sized>(
        &mut self,
        sys: &mut J,
        x: &S,
        t: f64,
        out: &mut S,
        dt: f64,
    ) -> Result<()> {
        if A::dim(out) != A::dim(x) {
            return Err(Error::Dimension {
                expected: A::dim(x),
                found: A::dim(out),
            });
        }
        if !(dt > 0.0) {
            return Err(Error::invalid("implicit Euler needs dt > 0"));
        }
        self.ensure_buffers(x);
        let t_new = t + dt;
        out.clone_from(x);
        sys.rhs(out, self.f.as_mut().expect("buffers"), t_new);
        self.evaluations += 1;
        for iter in 1..=self.params.max_iter {
            self.jac.fill(0.0);
            sys.jacobian(out, &mut self.jac, t_new);
            self.jacobian_evaluations += 1;
            self.newton_matrix(dt)?;

            self.correction(out, x, dt)?;
            self.apply_correction(out);
            sys.rhs(out, self.f.as_mut().expect("buffers"), t_new);
            self.evaluations += 1;

            let next = self.correction(out, x, dt)?;
            if next <= self.params.tol {
                self.apply_correction(out);
                self.last_iterations = iter;
                return Ok(());
            }
        }
        self.last_iterations = self.params.max_iter;
        Err(Error::NewtonDivergence {
            iterations: self.params.max_iter,
        })
    }
}

impl<S, A, J> Step<S, J> for ImplicitEuler<S, A>
where
    S: AsRef<[f64]> + AsMut<[f64]> + Clone,
    A: Algebra<S>,
    J: JacobianSystem<S> + ?Sized,
{
    fn do_step(&mut self, sys: &mut J, x: &mut S, t: f64, dt: f64) -> Result<()> {
        self.ensure_buffers(x);
        let mut out = self.swap.take().expect("buffers");
        let res = self.solve(sys, x, t, &mut out, dt);
        if res.is_ok() {
            std::mem::swap(x, &mut out);
        }
        self.swap = Some(out);
        res
    }

    fn do_step_out(&mut self, sys: &mut J, x: &S, t: f64, out: &mut S, dt: f64) -> Result<()> {
        self.solve(sys, x, t, out, dt)
    }
}
