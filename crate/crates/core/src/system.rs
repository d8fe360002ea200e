//! The callable contracts: right-hand sides and observers.

/// Right-hand side of `dx/dt = f(x, t)`.
///
/// Implementations must fill every component of `dxdt` and leave `x`
/// alone. Any `FnMut(&S, &mut S, f64)` qualifies, so plain functions and
/// capturing closures work as systems directly; structs with parameters or
/// internal counters implement the trait themselves.
pub trait System<S: ?Sized> {
    fn rhs(&mut self, x: &S, dxdt: &mut S, t: f64);
}

impl<S: ?Sized, F> System<S> for F
where
    F: FnMut(&S, &mut S, f64),
{
    #[inline]
    fn rhs(&mut self, x: &S, dxdt: &mut S, t: f64) {
        self(x, dxdt, t)
    }
}

/// Receives the trajectory from the integrate drivers.
pub trait Observer<S: ?Sized> {
    fn observe(&mut self, x: &S, t: f64);
}

impl<S: ?Sized, F> Observer<S> for F
where
    F: FnMut(&S, f64),
{
    #[inline]
    fn observe(&mut self, x: &S, t: f64) {
        self(x, t)
    }
}

/// Observer that discards everything.
#[derive(Debug, Clone, Copy, Default)]
pub struct NullObserver;

impl<S: ?Sized> Observer<S> for NullObserver {
    #[inline]
    fn observe(&mut self, _x: &S, _t: f64) {}
}

/// Wraps a system and counts right-hand-side evaluations.
///
/// Steppers keep their own counters; this wrapper is the independent check
/// used in tests and benchmarks.
#[derive(Debug, Clone, Default)]
pub struct Counted<T> {
    pub inner: T,
    pub calls: u64,
}

impl<T> Counted<T> {
    pub fn new(inner: T) -> Self {
        Counted { inner, calls: 0 }
    }
}

impl<S: ?Sized, T: System<S>> System<S> for Counted<T> {
    #[inline]
    fn rhs(&mut self, x: &S, dxdt: &mut S, t: f64) {
        self.calls += 1;
        self.inner.rhs(x, dxdt, t);
    }
}
