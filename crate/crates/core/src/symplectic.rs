//! Symplectic Euler for separable Hamiltonians `H(q, p) = T(p) + V(q)`.
//!
//! The update kicks first, then drifts:
//!
//! ```text
//! p' = p + dt * g(q)      g = -∂H/∂q
//! q' = q + dt * f(p')     f =  ∂H/∂p
//! ```

use std::marker::PhantomData;

use crate::algebra::{Algebra, SliceAlgebra, MAX_TERMS};
use crate::error::{Error, Result};
use crate::stepper::{OrderInfo, Step, Stepper};
use crate::system::System;

/// Coordinates and momenta of a Hamiltonian system.
#[derive(Debug, Clone, PartialEq)]
pub struct PairState<S> {
    pub q: S,
    pub p: S,
}

impl<S> PairState<S> {
    pub fn new(q: S, p: S) -> Self {
        PairState { q, p }
    }
}

/// Algebra over [`PairState`] built from an algebra over its halves.
#[derive(Debug, Clone, Copy, Default)]
pub struct PairAlgebra<A = SliceAlgebra>(PhantomData<A>);

impl<S, A: Algebra<S>> Algebra<PairState<S>> for PairAlgebra<A> {
    fn dim(s: &PairState<S>) -> usize {
        A::dim(&s.q) + A::dim(&s.p)
    }

    fn clone_shape(src: &PairState<S>) -> PairState<S> {
        PairState {
            q: A::clone_shape(&src.q),
            p: A::clone_shape(&src.p),
        }
    }

    fn scale_sum(out: &mut PairState<S>, coeffs: &[f64], terms: &[&PairState<S>]) -> Result<()> {
        crate::algebra::check_term_count(coeffs.len(), terms.len())?;
        let mut half: [&S; MAX_TERMS] = [&terms[0].q; MAX_TERMS];
        for (h, t) in half.iter_mut().zip(terms) {
            *h = &t.q;
        }
        A::scale_sum(&mut out.q, coeffs, &half[..terms.len()])?;
        for (h, t) in half.iter_mut().zip(terms) {
            *h = &t.p;
        }
        A::scale_sum(&mut out.p, coeffs, &half[..terms.len()])
    }

    fn norm_inf(s: &PairState<S>) -> Result<f64> {
        let (q, p) = (A::norm_inf(&s.q)?, A::norm_inf(&s.p)?);
        Ok(if q.is_nan() || p.is_nan() {
            f64::NAN
        } else {
            q.max(p)
        })
    }

    fn weighted_error_max(
        err: &PairState<S>,
        x: &PairState<S>,
        dxdt: &PairState<S>,
        atol: f64,
        rtol: f64,
        dt: f64,
    ) -> Result<f64> {
        let q = A::weighted_error_max(&err.q, &x.q, &dxdt.q, atol, rtol, dt)?;
        let p = A::weighted_error_max(&err.p, &x.p, &dxdt.p, atol, rtol, dt)?;
        Ok(if q.is_nan() || p.is_nan() {
            f64::NAN
        } else {
            q.max(p)
        })
    }
}

/// Separable Hamiltonian given by its two partial derivatives.
pub trait SeparableHamiltonian<S: ?Sized> {
    /// `dq/dt = ∂H/∂p`, a function of the momenta only.
    fn dqdt(&mut self, p: &S, out: &mut S);
    /// `dp/dt = -∂H/∂q`, a function of the coordinates only.
    fn dpdt(&mut self, q: &S, out: &mut S);
}

/// Separable Hamiltonian from two callables.
#[derive(Debug, Clone, Copy)]
pub struct Separable<F, G> {
    pub dqdt: F,
    pub dpdt: G,
}

impl<S: ?Sized, F, G> SeparableHamiltonian<S> for Separable<F, G>
where
    F: FnMut(&S, &mut S),
    G: FnMut(&S, &mut S),
{
    fn dqdt(&mut self, p: &S, out: &mut S) {
        (self.dqdt)(p, out)
    }
    fn dpdt(&mut self, q: &S, out: &mut S) {
        (self.dpdt)(q, out)
    }
}

/// Views a separable Hamiltonian as an ordinary [`System`] on
/// [`PairState`], so non-symplectic steppers can integrate it too.
#[derive(Debug, Clone, Copy)]
pub struct HamiltonianFlow<H>(pub H);

impl<S, H: SeparableHamiltonian<S>> System<PairState<S>> for HamiltonianFlow<H> {
    fn rhs(&mut self, x: &PairState<S>, dxdt: &mut PairState<S>, _t: f64) {
        self.0.dqdt(&x.p, &mut dxdt.q);
        self.0.dpdt(&x.q, &mut dxdt.p);
    }
}

#[derive(Debug, Clone)]
pub struct SymplecticEuler<S, A = SliceAlgebra> {
    force: Option<S>,
    swap: Option<PairState<S>>,
    evaluations: u64,
    _algebra: PhantomData<A>,
}

impl<S> SymplecticEuler<S, SliceAlgebra> {
    pub fn new() -> Self {
        Self::with_algebra()
    }
}

impl<S> Default for SymplecticEuler<S, SliceAlgebra> {
    fn default() -> Self {
        Self::new()
    }
}

impl<S, A> SymplecticEuler<S, A> {
    pub fn with_algebra() -> Self {
        SymplecticEuler {
            force: None,
            swap: None,
            evaluations: 0,
            _algebra: PhantomData,
        }
    }
}

impl<S: Clone, A: Algebra<S>> SymplecticEuler<S, A> {
    fn ensure_buffers(&mut self, x: &PairState<S>) -> Result<()> {
        let (nq, np) = (A::dim(&x.q), A::dim(&x.p));
        if nq != np {
            return Err(Error::Dimension {
                expected: nq,
                found: np,
            });
        }
        if self.force.as_ref().is_none_or(|f| A::dim(f) != nq) {
            self.force = Some(A::clone_shape(&x.q));
            self.swap = Some(PairAlgebra::<A>::clone_shape(x));
        }
        Ok(())
    }
}

impl<S: Clone, A: Algebra<S>> Stepper<PairState<S>> for SymplecticEuler<S, A> {
    type Algebra = PairAlgebra<A>;

    fn order_info(&self) -> OrderInfo {
        OrderInfo {
            order: 1,
            error_order: None,
            stage_count: 2,
        }
    }

    fn evaluations(&self) -> u64 {
        self.evaluations
    }
}

impl<S, A, H> Step<PairState<S>, H> for SymplecticEuler<S, A>
where
    S: Clone,
    A: Algebra<S>,
    H: SeparableHamiltonian<S> + ?Sized,
{
    fn do_step(&mut self, sys: &mut H, x: &mut PairState<S>, t: f64, dt: f64) -> Result<()> {
        self.ensure_buffers(x)?;
        let mut out = self.swap.take().expect("buffers");
        let res = self.do_step_out(sys, x, t, &mut out, dt);
        if res.is_ok() {
            std::mem::swap(x, &mut out);
        }
        self.swap = Some(out);
        res
    }

    fn do_step_out(
        &mut self,
        sys: &mut H,
        x: &PairState<S>,
        _t: f64,
        out: &mut PairState<S>,
        dt: f64,
    ) -> Result<()> {
        self.ensure_buffers(x)?;
        let force = self.force.as_mut().expect("buffers");
        sys.dpdt(&x.q, force);
        A::scale_sum(&mut out.p, &[1.0, dt], &[&x.p, force])?;
        sys.dqdt(&out.p, force);
        A::scale_sum(&mut out.q, &[1.0, dt], &[&x.q, force])?;
        self.evaluations += 2;
        Ok(())
    }
}
