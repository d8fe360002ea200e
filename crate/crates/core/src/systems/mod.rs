//! Built-in test problems with closed-form oracles, a by-name registry for
//! the command line, and an empirical convergence-order estimator.

mod named;
mod order;

pub use named::{find_system, system_names, NamedSystem, SplitHamiltonian, SYSTEMS};
pub use order::{fit_order, observed_order, OrderEstimate, OrderPoint, ORDER_UNDERFLOW};

use crate::error::{Error, Result};
use crate::implicit::{DenseMatrix, JacobianSystem};
use crate::symplectic::SeparableHamiltonian;
use crate::system::System;

/// Lorenz system. The defaults are the classic chaotic parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Lorenz {
    pub sigma: f64,
    pub rho: f64,
    pub beta: f64,
}

impl Default for Lorenz {
    fn default() -> Self {
        Lorenz {
            sigma: 10.0,
            rho: 28.0,
            beta: 8.0 / 3.0,
        }
    }
}

impl Lorenz {
    #[inline]
    pub fn eval(&self, x: &[f64], d: &mut [f64]) {
        d[0] = self.sigma * (x[1] - x[0]);
        d[1] = self.rho * x[0] - x[1] - x[0] * x[2];
        d[2] = -self.beta * x[2] + x[0] * x[1];
    }

    /// The two nontrivial fixed points `(±c, ±c, rho - 1)`.
    pub fn fixed_points(&self) -> [[f64; 3]; 2] {
        let c = (self.beta * (self.rho - 1.0)).sqrt();
        [[c, c, self.rho - 1.0], [-c, -c, self.rho - 1.0]]
    }

    pub fn jacobian_into(&self, x: &[f64], j: &mut DenseMatrix) {
        let rows = [
            [-self.sigma, self.sigma, 0.0],
            [self.rho - x[2], -1.0, -x[0]],
            [x[1], x[0], -self.beta],
        ];
        for (r, row) in rows.iter().enumerate() {
            for (c, v) in row.iter().enumerate() {
                j[(r, c)] = *v;
            }
        }
    }
}

impl<S: AsRef<[f64]> + AsMut<[f64]>> System<S> for Lorenz {
    #[inline]
    fn rhs(&mut self, x: &S, dxdt: &mut S, _t: f64) {
        self.eval(x.as_ref(), dxdt.as_mut());
    }
}

impl<S: AsRef<[f64]> + AsMut<[f64]>> JacobianSystem<S> for Lorenz {
    fn jacobian(&mut self, x: &S, jac: &mut DenseMatrix, _t: f64) {
        self.jacobian_into(x.as_ref(), jac);
    }
}

/// Lorenz right-hand side with the default parameters.
pub fn lorenz_rhs(x: &[f64]) -> Result<[f64; 3]> {
    if x.len() != 3 {
        return Err(Error::Dimension {
            expected: 3,
            found: x.len(),
        });
    }
    let mut d = [0.0; 3];
    Lorenz::default().eval(x, &mut d);
    Ok(d)
}

/// Unit-frequency oscillator `q' = p, p' = -q` with `H = (q² + p²) / 2`.
///
/// As a [`System`] the state is `[q, p]`; as a [`SeparableHamiltonian`] the
/// halves are one-element vectors.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct HarmonicOscillator;

impl HarmonicOscillator {
    pub fn energy(q: f64, p: f64) -> f64 {
        0.5 * (q * q + p * p)
    }

    /// `(q(t), p(t))` from `(q0, p0)` at `t0`.
    pub fn exact(q0: f64, p0: f64, t0: f64, t: f64) -> (f64, f64) {
        let (s, c) = (t - t0).sin_cos();
        (q0 * c + p0 * s, p0 * c - q0 * s)
    }
}

impl<S: AsRef<[f64]> + AsMut<[f64]>> System<S> for HarmonicOscillator {
    #[inline]
    fn rhs(&mut self, x: &S, dxdt: &mut S, _t: f64) {
        let (x, d) = (x.as_ref(), dxdt.as_mut());
        d[0] = x[1];
        d[1] = -x[0];
    }
}

impl<S: AsRef<[f64]> + AsMut<[f64]>> JacobianSystem<S> for HarmonicOscillator {
    fn jacobian(&mut self, _x: &S, jac: &mut DenseMatrix, _t: f64) {
        jac.fill(0.0);
        jac[(0, 1)] = 1.0;
        jac[(1, 0)] = -1.0;
    }
}

impl<S: AsRef<[f64]> + AsMut<[f64]>> SeparableHamiltonian<S> for HarmonicOscillator {
    #[inline]
    fn dqdt(&mut self, p: &S, out: &mut S) {
        out.as_mut().copy_from_slice(p.as_ref());
    }

    #[inline]
    fn dpdt(&mut self, q: &S, out: &mut S) {
        for (o, v) in out.as_mut().iter_mut().zip(q.as_ref()) {
            *o = -v;
        }
    }
}

/// Component-wise `x' = rate * x`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Exponential {
    pub rate: f64,
}

impl Exponential {
    pub fn growth() -> Self {
        Exponential { rate: 1.0 }
    }

    /// `x' = -lambda x`.
    pub fn decay(lambda: f64) -> Self {
        Exponential { rate: -lambda }
    }

    pub fn exact(&self, x0: f64, t0: f64, t: f64) -> f64 {
        x0 * (self.rate * (t - t0)).exp()
    }
}

impl<S: AsRef<[f64]> + AsMut<[f64]>> System<S> for Exponential {
    #[inline]
    fn rhs(&mut self, x: &S, dxdt: &mut S, _t: f64) {
        for (d, v) in dxdt.as_mut().iter_mut().zip(x.as_ref()) {
            *d = self.rate * v;
        }
    }
}

impl<S: AsRef<[f64]> + AsMut<[f64]>> JacobianSystem<S> for Exponential {
    fn jacobian(&mut self, _x: &S, jac: &mut DenseMatrix, _t: f64) {
        jac.fill(0.0);
        for i in 0..jac.dim() {
            jac[(i, i)] = self.rate;
        }
    }
}

/// Symmetric linear system `x' = A x` with eigenvalues `-1` and `-stiffness`
/// along `(1, 1)` and `(1, -1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Stiff2 {
    pub stiffness: f64,
}

impl Default for Stiff2 {
    fn default() -> Self {
        Stiff2 { stiffness: 1e6 }
    }
}

impl Stiff2 {
    pub fn matrix(&self) -> [[f64; 2]; 2] {
        let a = -0.5 * (1.0 + self.stiffness);
        let b = 0.5 * (self.stiffness - 1.0);
        [[a, b], [b, a]]
    }

    pub fn exact(&self, x0: [f64; 2], t0: f64, t: f64) -> [f64; 2] {
        let u = 0.5 * (x0[0] + x0[1]) * (-(t - t0)).exp();
        let v = 0.5 * (x0[0] - x0[1]) * (-self.stiffness * (t - t0)).exp();
        [u + v, u - v]
    }
}

impl<S: AsRef<[f64]> + AsMut<[f64]>> System<S> for Stiff2 {
    #[inline]
    fn rhs(&mut self, x: &S, dxdt: &mut S, _t: f64) {
        let [[a, b], _] = self.matrix();
        let (x, d) = (x.as_ref(), dxdt.as_mut());
        d[0] = a * x[0] + b * x[1];
        d[1] = b * x[0] + a * x[1];
    }
}

impl<S: AsRef<[f64]> + AsMut<[f64]>> JacobianSystem<S> for Stiff2 {
    fn jacobian(&mut self, _x: &S, jac: &mut DenseMatrix, _t: f64) {
        let m = self.matrix();
        for (r, row) in m.iter().enumerate() {
            for (c, v) in row.iter().enumerate() {
                jac[(r, c)] = *v;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::explicit::Rk4;
    use crate::stepper::Step;

    #[test]
    fn lorenz_examples() {
        let d = lorenz_rhs(&[10.0, 10.0, 10.0]).unwrap();
        assert_eq!(d[0], 0.0);
        assert_eq!(d[1], 170.0);
        assert!((d[2] - (80.0 - 20.0 / 3.0)).abs() < 1e-12);
        assert_eq!(lorenz_rhs(&[0.0; 3]).unwrap(), [0.0; 3]);
        let d = lorenz_rhs(&[1.0, 1.0, 1.0]).unwrap();
        assert_eq!(d[..2], [0.0, 26.0]);
        assert!((d[2] - (1.0 - 8.0 / 3.0)).abs() < 1e-15);
        assert_eq!(
            lorenz_rhs(&[1.0, 2.0]),
            Err(Error::Dimension {
                expected: 3,
                found: 2
            })
        );
    }

    #[test]
    fn lorenz_fixed_points() {
        let l = Lorenz::default();
        for p in l.fixed_points() {
            let mut d = [1.0; 3];
            l.eval(&p, &mut d);
            assert!(d.iter().all(|v| v.abs() < 1e-12), "{d:?}");
        }
    }

    #[test]
    fn lorenz_jacobian_matches_differences() {
        let mut l = Lorenz::default();
        let x = [1.5, -2.0, 20.0];
        let mut j = DenseMatrix::zeros(3);
        JacobianSystem::<[f64; 3]>::jacobian(&mut l, &x, &mut j, 0.0);
        let h = 1e-6;
        for c in 0..3 {
            let (mut xp, mut xm) = (x, x);
            xp[c] += h;
            xm[c] -= h;
            let (mut dp, mut dm) = ([0.0; 3], [0.0; 3]);
            l.eval(&xp, &mut dp);
            l.eval(&xm, &mut dm);
            for r in 0..3 {
                assert!(((dp[r] - dm[r]) / (2.0 * h) - j[(r, c)]).abs() < 1e-6);
            }
        }
    }

    /// Fourth-order central difference of an exact solution against the
    /// right-hand side.
    fn check_exact<Sys: System<Vec<f64>>>(sys: &mut Sys, exact: impl Fn(f64) -> Vec<f64>) {
        let h = 1e-3;
        for t in [0.0, 0.3, 1.0, 2.5] {
            let x = exact(t);
            let mut d = vec![0.0; x.len()];
            sys.rhs(&x, &mut d, t);
            let (p1, p2, m1, m2) = (
                exact(t + h),
                exact(t + 2.0 * h),
                exact(t - h),
                exact(t - 2.0 * h),
            );
            for i in 0..x.len() {
                let fd = (8.0 * (p1[i] - m1[i]) - (p2[i] - m2[i])) / (12.0 * h);
                assert!(
                    (fd - d[i]).abs() <= 1e-10 * (1.0 + d[i].abs()),
                    "t={t} i={i}: {fd} vs {}",
                    d[i]
                );
            }
        }
    }

    #[test]
    fn exact_solutions_satisfy_their_equations() {
        check_exact(&mut HarmonicOscillator, |t| {
            let (q, p) = HarmonicOscillator::exact(1.0, 0.0, 0.0, t);
            vec![q, p]
        });
        assert_eq!(
            HarmonicOscillator::exact(1.0, 0.0, 0.0, 0.5),
            (0.5f64.cos(), -0.5f64.sin())
        );
        let e = Exponential::decay(1.0);
        check_exact(&mut Exponential::decay(1.0), |t| vec![e.exact(2.0, 0.0, t)]);
        let s = Stiff2 { stiffness: 4.0 };
        check_exact(&mut Stiff2 { stiffness: 4.0 }, |t| {
            s.exact([1.0, 0.0], 0.0, t).to_vec()
        });
    }

    #[test]
    fn stiff2_eigenstructure() {
        let s = Stiff2::default();
        let [[a, b], [c, d]] = s.matrix();
        assert_eq!(b, c);
        assert_eq!(a, d);
        assert!((a + b + 1.0).abs() < 1e-9);
        assert!((a - b + 1e6).abs() < 1e-9);
    }

    #[test]
    fn oscillator_views_agree() {
        let mut h = HarmonicOscillator;
        let mut d = [0.0; 2];
        h.rhs(&[0.3, 0.7], &mut d, 0.0);
        let (mut dq, mut dp) = ([0.0], [0.0]);
        h.dqdt(&[0.7], &mut dq);
        h.dpdt(&[0.3], &mut dp);
        assert_eq!(d, [dq[0], dp[0]]);
    }

    /// The driver loop of the original Lorenz example passes `t = 0.0` to
    /// every step. The system is autonomous, so this matches the
    /// time-advancing loop bit for bit.
    #[test]
    fn lorenz_fixed_time_loop_matches_advancing_loop() {
        let mut st = Rk4::new();
        let mut faithful = vec![10.0, 10.0, 10.0];
        for _ in 0..1000 {
            st.do_step(&mut Lorenz::default(), &mut faithful, 0.0, 0.01)
                .unwrap();
        }
        let mut advancing = vec![10.0, 10.0, 10.0];
        for k in 0..1000 {
            st.do_step(
                &mut Lorenz::default(),
                &mut advancing,
                k as f64 * 0.01,
                0.01,
            )
            .unwrap();
        }
        assert_eq!(faithful, advancing);
        assert!(faithful.iter().all(|v| v.is_finite() && v.abs() < 100.0));
    }
}
