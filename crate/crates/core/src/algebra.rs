//! Element-wise operations on states.
//!
//! Steppers never index into a state directly. Everything they need is
//! expressed through an [`Algebra`], so the same stepper code runs on
//! `Vec<f64>`, `[f64; N]`, boxed slices, or any container a user writes an
//! algebra for (see [`PairAlgebra`](crate::symplectic::PairAlgebra) for a
//! composite example).
//!
//! The operation set is deliberately small: a fused linear combination of up
//! to [`MAX_TERMS`] states, the max-norm, the tolerance-weighted error norm
//! used by step-size control, and shape cloning.

use crate::error::{Error, Result};

/// Largest number of terms accepted by [`Algebra::scale_sum`]. Seven covers
/// every stage of the Dormand-Prince pair.
pub const MAX_TERMS: usize = 7;

/// Numeric operations a stepper may perform on states of type `S`.
///
/// All functions are associated (no receiver): an algebra is a strategy
/// chosen at compile time, not an object carried around.
pub trait Algebra<S> {
    /// Number of scalar components in `s`.
    fn dim(s: &S) -> usize;

    /// A new state with the same shape as `src`, zero-filled.
    fn clone_shape(src: &S) -> S;

    /// `out[i] = Σ_j coeffs[j] * terms[j][i]`, summed in term order.
    fn scale_sum(out: &mut S, coeffs: &[f64], terms: &[&S]) -> Result<()>;

    /// `max_i |s[i]|`. NaN components propagate.
    fn norm_inf(s: &S) -> Result<f64>;

    /// `max_i |err[i]| / (atol + rtol * (|x[i]| + |dt| * |dxdt[i]|))`.
    fn weighted_error_max(err: &S, x: &S, dxdt: &S, atol: f64, rtol: f64, dt: f64) -> Result<f64>;
}

/// Algebra for any contiguous `f64` container: `Vec<f64>`, `[f64; N]`,
/// `Box<[f64]>`, ...
#[derive(Debug, Clone, Copy, Default)]
pub struct SliceAlgebra;

fn check_len(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::Dimension { expected, found })
    }
}

pub(crate) fn check_term_count(coeffs: usize, terms: usize) -> Result<()> {
    if coeffs != terms {
        return Err(Error::invalid(format!(
            "{coeffs} coefficients for {terms} terms"
        )));
    }
    if terms == 0 || terms > MAX_TERMS {
        return Err(Error::TermCount {
            found: terms,
            max: MAX_TERMS,
        });
    }
    Ok(())
}

// Sticky NaN max: once a NaN is seen it is the result.
#[inline]
fn nan_max(acc: f64, v: f64) -> f64 {
    if acc.is_nan() || v.is_nan() {
        f64::NAN
    } else if v > acc {
        v
    } else {
        acc
    }
}

impl<S> Algebra<S> for SliceAlgebra
where
    S: AsRef<[f64]> + AsMut<[f64]> + Clone,
{
    #[inline]
    fn dim(s: &S) -> usize {
        s.as_ref().len()
    }

    fn clone_shape(src: &S) -> S {
        let mut s = src.clone();
        s.as_mut().fill(0.0);
        s
    }

    fn scale_sum(out: &mut S, coeffs: &[f64], terms: &[&S]) -> Result<()> {
        check_term_count(coeffs.len(), terms.len())?;
        let out = out.as_mut();
        let n = out.len();
        for t in terms {
            check_len(n, t.as_ref().len())?;
        }
        let first = terms[0].as_ref();
        let c0 = coeffs[0];
        match terms.len() {
            1 => {
                for (o, a) in out.iter_mut().zip(first) {
                    *o = c0 * a;
                }
            }
            2 => {
                let (c1, b) = (coeffs[1], terms[1].as_ref());
                for i in 0..n {
                    out[i] = c0 * first[i] + c1 * b[i];
                }
            }
            _ => {
                for i in 0..n {
                    let mut acc = c0 * first[i];
                    for (c, t) in coeffs[1..].iter().zip(&terms[1..]) {
                        acc += c * t.as_ref()[i];
                    }
                    out[i] = acc;
                }
            }
        }
        Ok(())
    }

    fn norm_inf(s: &S) -> Result<f64> {
        let s = s.as_ref();
        if s.is_empty() {
            return Err(Error::EmptyState);
        }
        Ok(s.iter().fold(0.0, |acc, v| nan_max(acc, v.abs())))
    }

    fn weighted_error_max(err: &S, x: &S, dxdt: &S, atol: f64, rtol: f64, dt: f64) -> Result<f64> {
        let (err, x, dxdt) = (err.as_ref(), x.as_ref(), dxdt.as_ref());
        check_len(err.len(), x.len())?;
        check_len(err.len(), dxdt.len())?;
        if err.is_empty() {
            return Err(Error::EmptyState);
        }
        let adt = dt.abs();
        Ok(err.iter().zip(x).zip(dxdt).fold(0.0, |acc, ((e, x), d)| {
            nan_max(acc, e.abs() / (atol + rtol * (x.abs() + adt * d.abs())))
        }))
    }
}
