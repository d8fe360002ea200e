use crate::error::{Error, Result};
use crate::integrate::integrate_fixed;
use crate::stepper::Step;
use crate::system::NullObserver;

/// Global errors below this are treated as round-off and left out of the
/// fit.
pub const ORDER_UNDERFLOW: f64 = 1e-13;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrderPoint {
    pub dt: f64,
    pub error: f64,
    pub excluded: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OrderEstimate {
    /// Least-squares slope of `ln(error)` against `ln(dt)`; NaN when fewer
    /// than two points survive.
    pub slope: f64,
    pub points: Vec<OrderPoint>,
    /// Some points were excluded because their error underflowed.
    pub underflow: bool,
}

impl OrderEstimate {
    pub fn excluded(&self) -> usize {
        self.points.iter().filter(|p| p.excluded).count()
    }
}

/// Fit the convergence order to `(dt, error)` pairs.
///
/// Needs at least three step sizes in geometric progression.
pub fn fit_order(data: &[(f64, f64)]) -> Result<OrderEstimate> {
    if data.len() < 3 {
        return Err(Error::invalid(
            "order estimation needs at least three step sizes",
        ));
    }
    if data
        .iter()
        .any(|&(dt, e)| !(dt > 0.0 && dt.is_finite()) || e.is_nan() || e < 0.0)
    {
        return Err(Error::invalid(
            "step sizes must be positive and errors non-negative",
        ));
    }
    let ratio = data[1].0 / data[0].0;
    if (ratio - 1.0).abs() < 1e-12
        || data
            .windows(2)
            .any(|w| ((w[1].0 / w[0].0) / ratio - 1.0).abs() > 1e-9)
    {
        return Err(Error::invalid(
            "step sizes must form a geometric progression",
        ));
    }

    let points: Vec<OrderPoint> = data
        .iter()
        .map(|&(dt, error)| OrderPoint {
            dt,
            error,
            excluded: !(error >= ORDER_UNDERFLOW) || error.is_infinite(),
        })
        .collect();
    let used: Vec<(f64, f64)> = points
        .iter()
        .filter(|p| !p.excluded)
        .map(|p| (p.dt.ln(), p.error.ln()))
        .collect();
    let slope = if used.len() < 2 {
        f64::NAN
    } else {
        let n = used.len() as f64;
        let mx = used.iter().map(|p| p.0).sum::<f64>() / n;
        let my = used.iter().map(|p| p.1).sum::<f64>() / n;
        let sxy: f64 = used.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        let sxx: f64 = used.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
        sxy / sxx
    };
    let underflow = points.iter().any(|p| p.excluded);
    Ok(OrderEstimate {
        slope,
        points,
        underflow,
    })
}

/// Estimate the order of `stepper` by fixed-step integration over
/// `[t0, t1]` for every `dt`, measuring the global error at `t1` with
/// `error(x_final, t1)`.
///
/// Every `dt` must divide the span into whole steps.
pub fn observed_order<S, Sys, St, E>(
    stepper: &mut St,
    sys: &mut Sys,
    x0: &S,
    (t0, t1): (f64, f64),
    dts: &[f64],
    mut error: E,
) -> Result<OrderEstimate>
where
    S: Clone,
    Sys: ?Sized,
    St: Step<S, Sys>,
    E: FnMut(&S, f64) -> f64,
{
    let mut data = Vec::with_capacity(dts.len());
    for &dt in dts {
        let mut x = x0.clone();
        let report =
            integrate_fixed(stepper, sys, &mut x, t0, t1, dt, NullObserver).map_err(|f| f.error)?;
        if report.final_time != t1 {
            return Err(Error::invalid(format!(
                "step size {dt} does not divide [{t0}, {t1}]"
            )));
        }
        data.push((dt, error(&x, t1)));
    }
    fit_order(&data)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::explicit::{ExplicitEuler, Rk4};
    use crate::systems::Exponential;

    fn growth_error(x: &Vec<f64>, t: f64) -> f64 {
        (x[0] - t.exp()).abs()
    }

    #[test]
    fn rk4_is_fourth_order() {
        let est = observed_order(
            &mut Rk4::new(),
            &mut Exponential::growth(),
            &vec![1.0],
            (0.0, 1.0),
            &[0.1, 0.05, 0.025],
            growth_error,
        )
        .unwrap();
        assert!((est.slope - 4.0).abs() < 0.2, "{est:?}");
        assert!(!est.underflow);
    }

    #[test]
    fn euler_is_first_order() {
        let est = observed_order(
            &mut ExplicitEuler::new(),
            &mut Exponential::growth(),
            &vec![1.0],
            (0.0, 1.0),
            &[0.1, 0.05, 0.025],
            growth_error,
        )
        .unwrap();
        assert!((est.slope - 1.0).abs() < 0.1, "{est:?}");
    }

    #[test]
    fn exact_method_flags_underflow() {
        let mut cubic = |_: &Vec<f64>, d: &mut Vec<f64>, t: f64| d[0] = 3.0 * t * t;
        let est = observed_order(
            &mut Rk4::new(),
            &mut cubic,
            &vec![0.0],
            (0.0, 1.0),
            &[0.1, 0.05, 0.025],
            |x, t| (x[0] - t * t * t).abs(),
        )
        .unwrap();
        assert!(est.underflow);
        assert!(est.slope.is_nan());
        assert_eq!(est.excluded(), 3);
    }

    #[test]
    fn fit_recovers_exact_power_law() {
        let data: Vec<_> = [0.1, 0.05, 0.025, 0.0125]
            .iter()
            .map(|&h: &f64| (h, 3.0 * h.powi(5)))
            .collect();
        assert!((fit_order(&data).unwrap().slope - 5.0).abs() < 1e-12);
    }

    #[test]
    fn fit_rejects_bad_ladders() {
        assert!(fit_order(&[(0.1, 1.0), (0.05, 0.5)]).is_err());
        assert!(fit_order(&[(0.1, 1.0), (0.05, 0.5), (0.02, 0.2)]).is_err());
        assert!(fit_order(&[(0.1, 1.0), (0.1, 0.5), (0.1, 0.2)]).is_err());
        assert!(fit_order(&[(0.1, 1.0), (0.05, f64::NAN), (0.025, 0.2)]).is_err());
    }

    #[test]
    fn indivisible_span_is_rejected() {
        let r = observed_order(
            &mut Rk4::new(),
            &mut Exponential::growth(),
            &vec![1.0],
            (0.0, 1.0),
            &[0.3, 0.15, 0.075],
            growth_error,
        );
        assert!(r.is_err());
    }
}
