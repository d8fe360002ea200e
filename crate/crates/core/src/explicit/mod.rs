//! Explicit Runge-Kutta steppers: Euler, classical RK4, Cash-Karp 5(4) and
//! Dormand-Prince 5(4).

mod rk;
pub mod tableau;

pub use rk::{
    CashKarp54, Dopri5, DormandPrince54, EmbeddedMethod, EulerMethod, ExplicitEuler, ExplicitRk,
    Method, Rk4, Rk4Method, Rk54CashKarp,
};
pub use tableau::ButcherTableau;

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stepper::{ErrorStep, ErrorStepper, Step, Stepper};
    use crate::system::{Counted, System};
    use crate::systems::Lorenz;
    use proptest::prelude::*;

    fn growth(x: &Vec<f64>, d: &mut Vec<f64>, _t: f64) {
        d[0] = x[0];
    }

    fn still(_x: &Vec<f64>, d: &mut Vec<f64>, _t: f64) {
        d.fill(0.0);
    }

    /// e^h by its power series, summed until terms vanish.
    fn exp_series(h: f64) -> f64 {
        let (mut sum, mut term, mut k) = (1.0f64, 1.0f64, 1.0f64);
        while term.abs() > 1e-20 {
            term *= h / k;
            sum += term;
            k += 1.0;
        }
        sum
    }

    #[test]
    fn euler_examples() {
        let mut st = ExplicitEuler::<Vec<f64>>::new();
        let mut x = vec![1.0];
        st.do_step(&mut growth, &mut x, 0.0, 0.1).unwrap();
        assert_eq!(x, [1.1]);

        let mut x = vec![5.0, 7.0];
        st.do_step(&mut still, &mut x, 0.0, 1.0).unwrap();
        assert_eq!(x, [5.0, 7.0]);

        let mut st = ExplicitEuler::<[f64; 3]>::new();
        let mut x = [10.0; 3];
        st.do_step(&mut Lorenz::default(), &mut x, 0.0, 0.01)
            .unwrap();
        assert_eq!(x[0], 10.0);
        assert!((x[1] - 11.7).abs() < 1e-12);
        assert!((x[2] - (10.0 + 0.01 * (220.0 / 3.0))).abs() < 1e-12);
    }

    #[test]
    fn euler_propagates_nan() {
        let mut st = ExplicitEuler::<Vec<f64>>::new();
        let mut x = vec![1.0];
        let mut bad = |_: &Vec<f64>, d: &mut Vec<f64>, _t: f64| d[0] = f64::NAN;
        st.do_step(&mut bad, &mut x, 0.0, 0.1).unwrap();
        assert!(x[0].is_nan());
    }

    #[test]
    fn rk4_examples() {
        let mut st = Rk4::<Vec<f64>>::new();
        let mut x = vec![3.0, -1.0];
        st.do_step(&mut still, &mut x, 0.0, 0.3).unwrap();
        assert_eq!(x, [3.0, -1.0]);

        let mut x = vec![0.0];
        let mut one = |_: &Vec<f64>, d: &mut Vec<f64>, _t: f64| d[0] = 1.0;
        st.do_step(&mut one, &mut x, 0.0, 0.5).unwrap();
        assert!((x[0] - 0.5).abs() < 1e-16);

        let mut x = vec![1.0];
        st.do_step(&mut growth, &mut x, 0.0, 0.1).unwrap();
        let h: f64 = 0.1;
        let taylor4 = 1.0 + h + h * h / 2.0 + h.powi(3) / 6.0 + h.powi(4) / 24.0;
        assert!((x[0] - taylor4).abs() < 1e-15);
        assert!((x[0] - 1.105_170_833_333_333).abs() < 1e-15);
    }

    #[test]
    fn rk4_is_exact_for_cubic_time_dependence() {
        let mut st = Rk4::<Vec<f64>>::new();
        let mut cube = |_: &Vec<f64>, d: &mut Vec<f64>, t: f64| d[0] = t * t * t;
        let mut x = vec![0.0];
        let n = 7;
        let dt = 1.0 / n as f64;
        for i in 0..n {
            st.do_step(&mut cube, &mut x, i as f64 * dt, dt).unwrap();
        }
        assert!((x[0] - 0.25).abs() < 1e-13);
    }

    #[test]
    fn cash_karp_examples() {
        let mut st = Rk54CashKarp::<Vec<f64>>::new();
        let (mut out, mut err) = (vec![0.0; 2], vec![1.0; 2]);
        st.do_step_err(
            &mut still,
            &vec![2.0, 3.0],
            None,
            0.0,
            &mut out,
            0.4,
            &mut err,
        )
        .unwrap();
        assert_eq!(out, [2.0, 3.0]);
        assert_eq!(err, [0.0, 0.0]);

        let mut quartic = |_: &Vec<f64>, d: &mut Vec<f64>, t: f64| d[0] = t.powi(4);
        let (mut out, mut err) = (vec![0.0], vec![0.0]);
        st.do_step_err(&mut quartic, &vec![0.0], None, 0.0, &mut out, 1.0, &mut err)
            .unwrap();
        assert!((out[0] - 0.2).abs() < 1e-12);

        st.do_step_err(&mut growth, &vec![1.0], None, 0.0, &mut out, 0.1, &mut err)
            .unwrap();
        assert!(err[0].abs() < 1e-7);
        assert!((out[0] - exp_series(0.1)).abs() < 1e-9);
        assert_eq!(st.evaluations(), 18);
    }

    #[test]
    fn dopri5_examples() {
        let mut st = Dopri5::<Vec<f64>>::new();
        let (mut out, mut err) = (vec![0.0; 2], vec![1.0; 2]);
        st.do_step_err(
            &mut still,
            &vec![2.0, 3.0],
            None,
            0.0,
            &mut out,
            0.4,
            &mut err,
        )
        .unwrap();
        assert_eq!(out, [2.0, 3.0]);
        assert_eq!(err, [0.0, 0.0]);
        assert!(st.stages().iter().all(|k| k.iter().all(|v| *v == 0.0)));

        let (mut out, mut err) = (vec![0.0], vec![0.0]);
        st.do_step_err(&mut growth, &vec![1.0], None, 0.0, &mut out, 0.1, &mut err)
            .unwrap();
        assert!((out[0] - exp_series(0.1)).abs() < 1e-9);
        assert!(err[0].abs() < 1e-7);
        // FSAL stage is f at the new point.
        assert_eq!(st.fsal_derivative().unwrap()[0], out[0]);
    }

    #[test]
    fn dopri5_fsal_chain_evaluation_count() {
        let mut sys = Counted::new(growth);
        let mut st = Dopri5::<Vec<f64>>::new();
        let mut x = vec![1.0];
        let mut dxdt = vec![0.0];
        sys.rhs(&x, &mut dxdt, 0.0);
        let (mut out, mut err) = (vec![0.0], vec![0.0]);
        for i in 0..10 {
            let t = i as f64 * 0.1;
            st.do_step_err(&mut sys, &x, Some(&dxdt), t, &mut out, 0.1, &mut err)
                .unwrap();
            x.clone_from(&out);
            dxdt.clone_from(st.fsal_derivative().unwrap());
        }
        assert_eq!(sys.calls, 61);
        assert_eq!(st.evaluations(), 60);
    }

    #[test]
    fn plain_dopri5_step_skips_fsal_stage() {
        let mut st = Dopri5::<Vec<f64>>::new();
        let mut x = vec![1.0];
        st.do_step(&mut growth, &mut x, 0.0, 0.1).unwrap();
        assert_eq!(st.evaluations(), 6);
        assert!(st.fsal_derivative().is_none());
        let (mut out, mut err) = (vec![0.0], vec![0.0]);
        st.do_step_err(&mut growth, &vec![1.0], None, 0.0, &mut out, 0.1, &mut err)
            .unwrap();
        assert_eq!(out, x);
    }

    #[test]
    fn mismatched_output_shape_is_an_error() {
        let mut st = Rk4::<Vec<f64>>::new();
        let mut out = vec![0.0; 2];
        assert!(st
            .do_step_out(&mut growth, &vec![1.0], 0.0, &mut out, 0.1)
            .is_err());
    }

    #[test]
    fn order_metadata() {
        assert_eq!(ExplicitEuler::<Vec<f64>>::new().order_info().order, 1);
        assert_eq!(Rk4::<Vec<f64>>::new().order_info().stage_count, 4);
        let ck = Rk54CashKarp::<Vec<f64>>::new().order_info();
        assert_eq!((ck.order, ck.error_order), (5, Some(4)));
        let dp = Dopri5::<Vec<f64>>::new().order_info();
        assert_eq!((dp.order, dp.error_order, dp.stage_count), (5, Some(4), 7));
    }

    fn in_place_matches_out_of_place<St>(mut a: St, mut b: St, x0: [f64; 3], dt: f64)
    where
        St: Step<[f64; 3], Lorenz>,
    {
        let mut sys = Lorenz::default();
        let mut x = x0;
        let mut out = [0.0; 3];
        a.do_step(&mut sys, &mut x, 0.3, dt).unwrap();
        b.do_step_out(&mut sys, &x0, 0.3, &mut out, dt).unwrap();
        assert_eq!(x.map(f64::to_bits), out.map(f64::to_bits));
    }

    proptest! {
        #[test]
        fn in_place_and_out_of_place_agree_bitwise(
            x0 in prop::array::uniform3(-20.0..20.0f64),
            dt in 1e-4..0.05f64,
        ) {
            in_place_matches_out_of_place(ExplicitEuler::new(), ExplicitEuler::new(), x0, dt);
            in_place_matches_out_of_place(Rk4::new(), Rk4::new(), x0, dt);
            in_place_matches_out_of_place(Rk54CashKarp::new(), Rk54CashKarp::new(), x0, dt);
            in_place_matches_out_of_place(Dopri5::new(), Dopri5::new(), x0, dt);
        }
    }
}
