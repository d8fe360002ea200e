//! Fixtures shared by the criterion benchmarks.

use odestep::{
    integrate_const, ControllerParams, DenseOutputDopri5, Lorenz, NullObserver, Rk4, Step,
};

pub const LORENZ_X0: [f64; 3] = [10.0, 10.0, 10.0];

/// `steps` RK4 steps of width 0.01 on Lorenz from the classic start point.
pub fn rk4_lorenz<S>(mut x: S, steps: usize) -> S
where
    Rk4<S>: Step<S, Lorenz>,
{
    let mut st = Rk4::<S>::new();
    let mut sys = Lorenz::default();
    for k in 0..steps {
        st.do_step(&mut sys, &mut x, k as f64 * 0.01, 0.01)
            .expect("rk4 step");
    }
    x
}

/// Dense-output Lorenz run over `[0, t1]` observed at unit intervals;
/// returns the number of internal steps.
pub fn dense_lorenz(t1: f64, tol: f64) -> u64 {
    let params = ControllerParams::with_tolerances(tol, tol).expect("tolerances");
    let mut d = DenseOutputDopri5::new(params).expect("params");
    let mut x = LORENZ_X0.to_vec();
    integrate_const(
        &mut d,
        &mut Lorenz::default(),
        &mut x,
        0.0,
        t1,
        1.0,
        NullObserver,
    )
    .expect("dense run")
    .steps_accepted
}
