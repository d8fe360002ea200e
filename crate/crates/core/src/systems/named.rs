use super::{Exponential, HarmonicOscillator, Lorenz, Stiff2};
use crate::implicit::{DenseMatrix, JacobianSystem};
use crate::symplectic::SeparableHamiltonian;
use crate::system::System;

type Rhs = fn(&[f64], &mut [f64], f64);
type Jacobian = fn(&[f64], &mut DenseMatrix, f64);
type Exact = fn(f64, &[f64], f64, &mut [f64]);
type HalfFlow = fn(&[f64], &mut [f64]);

/// Split of a `[q.., p..]` state into the two halves of a separable
/// Hamiltonian.
#[derive(Debug, Clone, Copy)]
pub struct SplitHamiltonian {
    pub dqdt: HalfFlow,
    pub dpdt: HalfFlow,
}

impl<S: AsRef<[f64]> + AsMut<[f64]>> SeparableHamiltonian<S> for SplitHamiltonian {
    fn dqdt(&mut self, p: &S, out: &mut S) {
        (self.dqdt)(p.as_ref(), out.as_mut())
    }
    fn dpdt(&mut self, q: &S, out: &mut S) {
        (self.dpdt)(q.as_ref(), out.as_mut())
    }
}

/// A system addressable by name.
///
/// Without an explicit Jacobian, [`JacobianSystem`] falls back to forward
/// differences.
#[derive(Debug, Clone, Copy)]
pub struct NamedSystem {
    pub name: &'static str,
    pub description: &'static str,
    pub dimension: usize,
    pub default_x0: &'static [f64],
    pub rhs: Rhs,
    pub jacobian: Option<Jacobian>,
    /// `exact(t0, x0, t, out)`.
    pub exact: Option<Exact>,
    pub split: Option<SplitHamiltonian>,
}

impl<S: AsRef<[f64]> + AsMut<[f64]>> System<S> for NamedSystem {
    #[inline]
    fn rhs(&mut self, x: &S, dxdt: &mut S, t: f64) {
        (self.rhs)(x.as_ref(), dxdt.as_mut(), t)
    }
}

impl<S: AsRef<[f64]> + AsMut<[f64]>> JacobianSystem<S> for NamedSystem {
    fn jacobian(&mut self, x: &S, jac: &mut DenseMatrix, t: f64) {
        let x = x.as_ref();
        if let Some(j) = self.jacobian {
            return j(x, jac, t);
        }
        let n = x.len();
        let mut f0 = vec![0.0; n];
        let mut f1 = vec![0.0; n];
        let mut xp = x.to_vec();
        (self.rhs)(x, &mut f0, t);
        for c in 0..n {
            let h = f64::EPSILON.sqrt() * x[c].abs().max(1.0);
            xp[c] = x[c] + h;
            (self.rhs)(&xp, &mut f1, t);
            xp[c] = x[c];
            for r in 0..n {
                jac[(r, c)] = (f1[r] - f0[r]) / h;
            }
        }
    }
}

fn lorenz(x: &[f64], d: &mut [f64], _t: f64) {
    Lorenz::default().eval(x, d)
}

fn lorenz_jac(x: &[f64], j: &mut DenseMatrix, _t: f64) {
    Lorenz::default().jacobian_into(x, j)
}

fn harmonic(x: &[f64], d: &mut [f64], _t: f64) {
    d[0] = x[1];
    d[1] = -x[0];
}

fn harmonic_jac(_x: &[f64], j: &mut DenseMatrix, _t: f64) {
    j.fill(0.0);
    j[(0, 1)] = 1.0;
    j[(1, 0)] = -1.0;
}

fn harmonic_exact(t0: f64, x0: &[f64], t: f64, out: &mut [f64]) {
    let (q, p) = HarmonicOscillator::exact(x0[0], x0[1], t0, t);
    out[0] = q;
    out[1] = p;
}

fn harmonic_dqdt(p: &[f64], out: &mut [f64]) {
    out.copy_from_slice(p)
}

fn harmonic_dpdt(q: &[f64], out: &mut [f64]) {
    for (o, v) in out.iter_mut().zip(q) {
        *o = -v;
    }
}

fn expdecay(x: &[f64], d: &mut [f64], _t: f64) {
    d[0] = -x[0];
}

fn expdecay_jac(_x: &[f64], j: &mut DenseMatrix, _t: f64) {
    j[(0, 0)] = -1.0;
}

fn expdecay_exact(t0: f64, x0: &[f64], t: f64, out: &mut [f64]) {
    out[0] = Exponential::decay(1.0).exact(x0[0], t0, t);
}

fn stiff2(x: &[f64], d: &mut [f64], _t: f64) {
    let [[a, b], _] = Stiff2::default().matrix();
    d[0] = a * x[0] + b * x[1];
    d[1] = b * x[0] + a * x[1];
}

fn stiff2_jac(_x: &[f64], j: &mut DenseMatrix, _t: f64) {
    let m = Stiff2::default().matrix();
    for (r, row) in m.iter().enumerate() {
        for (c, v) in row.iter().enumerate() {
            j[(r, c)] = *v;
        }
    }
}

fn stiff2_exact(t0: f64, x0: &[f64], t: f64, out: &mut [f64]) {
    out.copy_from_slice(&Stiff2::default().exact([x0[0], x0[1]], t0, t));
}

pub static SYSTEMS: [NamedSystem; 4] = [
    NamedSystem {
        name: "lorenz",
        description: "Lorenz attractor, sigma=10 rho=28 beta=8/3",
        dimension: 3,
        default_x0: &[10.0, 10.0, 10.0],
        rhs: lorenz,
        jacobian: Some(lorenz_jac),
        exact: None,
        split: None,
    },
    NamedSystem {
        name: "harmonic",
        description: "harmonic oscillator q' = p, p' = -q, state [q, p]",
        dimension: 2,
        default_x0: &[1.0, 0.0],
        rhs: harmonic,
        jacobian: Some(harmonic_jac),
        exact: Some(harmonic_exact),
        split: Some(SplitHamiltonian {
            dqdt: harmonic_dqdt,
            dpdt: harmonic_dpdt,
        }),
    },
    NamedSystem {
        name: "expdecay",
        description: "exponential decay x' = -x",
        dimension: 1,
        default_x0: &[1.0],
        rhs: expdecay,
        jacobian: Some(expdecay_jac),
        exact: Some(expdecay_exact),
        split: None,
    },
    NamedSystem {
        name: "stiff2",
        description: "stiff linear 2x2 system with eigenvalues -1 and -1e6",
        dimension: 2,
        default_x0: &[1.0, 0.0],
        rhs: stiff2,
        jacobian: Some(stiff2_jac),
        exact: Some(stiff2_exact),
        split: None,
    },
];

pub fn find_system(name: &str) -> Option<&'static NamedSystem> {
    SYSTEMS.iter().find(|s| s.name == name)
}

pub fn system_names() -> Vec<&'static str> {
    SYSTEMS.iter().map(|s| s.name).collect()
}
