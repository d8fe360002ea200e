use odestep::systems::find_system;
use odestep::{
    integrate_const, ControllerParams, DenseOutputDopri5, HarmonicOscillator, ImplicitEuler,
    Lorenz, PairState, Rk4, SymplecticEuler,
};
use odestep_cli::{csv_header, csv_row, run, EXIT_NUMERICAL, EXIT_OK, EXIT_USAGE};

fn cli(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("odestep").chain(args.iter().copied());
    let code = run(argv, &mut out, &mut err);
    (
        code,
        String::from_utf8(out).unwrap(),
        String::from_utf8(err).unwrap(),
    )
}

fn csv<F: FnOnce(&mut dyn FnMut(&[f64], f64))>(dim: usize, drive: F) -> String {
    let mut s = csv_header(dim) + "\n";
    drive(&mut |x, t| {
        s.push_str(&csv_row(t, x));
        s.push('\n');
    });
    s
}

#[test]
fn listing_command_matches_library_dense_run() {
    let (code, out, err) = cli(&[
        "integrate",
        "--system",
        "lorenz",
        "--stepper",
        "dopri5_dense",
        "--t0",
        "0",
        "--t1",
        "1000",
        "--dt",
        "1.0",
        "--x0",
        "10,10,10",
    ]);
    assert_eq!(code, EXIT_OK, "{err}");
    let expected = csv(3, |obs| {
        let mut d = DenseOutputDopri5::new(ControllerParams::default()).unwrap();
        let mut x = vec![10.0, 10.0, 10.0];
        integrate_const(
            &mut d,
            &mut Lorenz::default(),
            &mut x,
            0.0,
            1000.0,
            1.0,
            |x: &Vec<f64>, t| obs(x, t),
        )
        .unwrap();
    });
    assert_eq!(out, expected);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines.len(), 1002);
    assert_eq!(lines[0], "t,x0,x1,x2");
    assert!(!out.contains('\r'));
}

#[test]
fn fixed_step_runs_match_library() {
    let (code, out, _) = cli(&[
        "integrate",
        "--system",
        "harmonic",
        "--stepper",
        "rk4",
        "--t1",
        "2",
        "--dt",
        "0.1",
    ]);
    assert_eq!(code, EXIT_OK);
    let expected = csv(2, |obs| {
        let mut x = vec![1.0, 0.0];
        integrate_const(
            &mut Rk4::new(),
            &mut HarmonicOscillator,
            &mut x,
            0.0,
            2.0,
            0.1,
            |x: &Vec<f64>, t| obs(x, t),
        )
        .unwrap();
    });
    assert_eq!(out, expected);

    let (_, out, _) = cli(&[
        "integrate",
        "--system",
        "stiff2",
        "--stepper",
        "implicit_euler",
        "--t1",
        "1",
        "--dt",
        "0.1",
    ]);
    let expected = csv(2, |obs| {
        let mut x = vec![1.0, 0.0];
        let mut sys = *find_system("stiff2").unwrap();
        integrate_const(
            &mut ImplicitEuler::default(),
            &mut sys,
            &mut x,
            0.0,
            1.0,
            0.1,
            |x: &Vec<f64>, t| obs(x, t),
        )
        .unwrap();
    });
    assert_eq!(out, expected);

    let (_, out, _) = cli(&[
        "integrate",
        "--system",
        "harmonic",
        "--stepper",
        "symplectic_euler",
        "--t1",
        "1",
        "--dt",
        "0.1",
        "--x0",
        "-0.5,2",
    ]);
    let expected = csv(2, |obs| {
        let mut x = PairState::new(vec![-0.5], vec![2.0]);
        integrate_const(
            &mut SymplecticEuler::new(),
            &mut HarmonicOscillator,
            &mut x,
            0.0,
            1.0,
            0.1,
            |x: &PairState<Vec<f64>>, t| obs(&[x.q[0], x.p[0]], t),
        )
        .unwrap();
    });
    assert_eq!(out, expected);
}

#[test]
fn output_is_byte_stable() {
    let args = [
        "integrate",
        "--system",
        "lorenz",
        "--stepper",
        "dopri5_controlled",
        "--t1",
        "5",
        "--dt",
        "0.1",
        "--atol",
        "1e-9",
        "--rtol",
        "1e-9",
    ];
    let (_, a, _) = cli(&args);
    let (_, b, _) = cli(&args);
    assert_eq!(a, b);
    assert_eq!(a.lines().count(), 52);
}

#[test]
fn out_flag_writes_file() {
    let path = std::env::temp_dir().join(format!("odestep-cli-test-{}.csv", std::process::id()));
    let p = path.to_str().unwrap();
    let (code, out, _) = cli(&[
        "integrate",
        "--system",
        "expdecay",
        "--stepper",
        "euler",
        "--t1",
        "1",
        "--dt",
        "0.5",
        "--out",
        p,
    ]);
    assert_eq!(code, EXIT_OK);
    assert!(out.is_empty());
    let text = std::fs::read_to_string(&path).unwrap();
    std::fs::remove_file(&path).unwrap();
    assert_eq!(
        text,
        "t,x0\n\
         0.0000000000000000e0,1.0000000000000000e0\n\
         5.0000000000000000e-1,5.0000000000000000e-1\n\
         1.0000000000000000e0,2.5000000000000000e-1\n"
    );
}

#[test]
fn rows_round_trip_losslessly() {
    let (_, out, _) = cli(&[
        "integrate",
        "--system",
        "lorenz",
        "--stepper",
        "rk4",
        "--t1",
        "0.5",
    ]);
    let mut x = vec![10.0, 10.0, 10.0];
    let mut parsed = Vec::new();
    integrate_const(
        &mut Rk4::new(),
        &mut Lorenz::default(),
        &mut x,
        0.0,
        0.5,
        0.01,
        |x: &Vec<f64>, _t| parsed.push(x.clone()),
    )
    .unwrap();
    for (line, want) in out.lines().skip(1).zip(&parsed) {
        let vals: Vec<f64> = line
            .split(',')
            .skip(1)
            .map(|v| v.parse().unwrap())
            .collect();
        assert_eq!(&vals, want);
    }
}

#[test]
fn order_study_for_rk4() {
    let (code, out, _) = cli(&["order", "--system", "expdecay", "--stepper", "rk4"]);
    assert_eq!(code, EXIT_OK);
    let slope: f64 = out
        .lines()
        .find_map(|l| l.strip_prefix("slope,"))
        .unwrap()
        .parse()
        .unwrap();
    assert!((3.8..=4.2).contains(&slope), "{slope}");
    assert_eq!(out.lines().next(), Some("dt,error,used"));
}

#[test]
fn order_study_flags_underflow() {
    // dopri5 reaches round-off on the decay problem at tiny steps.
    let (code, out, err) = cli(&[
        "order",
        "--system",
        "expdecay",
        "--stepper",
        "dopri5",
        "--dt",
        "0.01",
        "--levels",
        "4",
    ]);
    assert_eq!(code, EXIT_OK);
    assert!(err.contains("excluded"), "{out}{err}");
}

#[test]
fn order_rejects_controlled_steppers_and_unknown_solutions() {
    let (code, _, err) = cli(&["order", "--stepper", "dopri5_dense"]);
    assert_eq!(code, EXIT_USAGE);
    assert!(err.contains("fixed-step"));
    let (code, _, err) = cli(&["order", "--system", "lorenz"]);
    assert_eq!(code, EXIT_USAGE);
    assert!(err.contains("exact"));
}

#[test]
fn bench_lists_counters() {
    let (code, out, _) = cli(&[
        "bench",
        "--system",
        "harmonic",
        "--stepper",
        "rk4",
        "--stepper",
        "dopri5_controlled",
        "--t1",
        "1",
        "--dt",
        "0.1",
    ]);
    assert_eq!(code, EXIT_OK);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines.len(), 3);
    assert!(lines[0].starts_with("stepper,steps_attempted"));
    assert!(lines[1].starts_with("rk4,10,10,0,40,11,1,"));
    assert!(lines[2].starts_with("dopri5_controlled,"));

    let (_, out, _) = cli(&["bench", "--system", "lorenz", "--t1", "0.1"]);
    assert_eq!(
        out.lines().count(),
        1 + 8,
        "symplectic_euler is skipped for lorenz"
    );
}

#[test]
fn unknown_system_lists_valid_ones() {
    let (code, out, err) = cli(&["integrate", "--system", "nosuch", "--stepper", "rk4"]);
    assert_eq!(code, EXIT_USAGE);
    assert!(out.is_empty());
    for name in ["lorenz", "harmonic", "expdecay", "stiff2"] {
        assert!(err.contains(name), "{err}");
    }
}

#[test]
fn usage_errors() {
    for args in [
        vec!["integrate", "--system", "lorenz", "--stepper", "nosuch"],
        vec![
            "integrate",
            "--system",
            "lorenz",
            "--stepper",
            "rk4",
            "--x0",
            "1,2",
        ],
        vec![
            "integrate",
            "--system",
            "lorenz",
            "--stepper",
            "rk4",
            "--dt",
            "0",
        ],
        vec![
            "integrate",
            "--system",
            "lorenz",
            "--stepper",
            "rk4",
            "--t1",
            "-1",
        ],
        vec![
            "integrate",
            "--system",
            "lorenz",
            "--stepper",
            "rk4",
            "--adaptive",
        ],
        vec![
            "integrate",
            "--system",
            "lorenz",
            "--stepper",
            "symplectic_euler",
        ],
        vec![
            "integrate",
            "--system",
            "lorenz",
            "--stepper",
            "dopri5_controlled",
            "--atol",
            "-1",
        ],
        vec!["frobnicate"],
        vec![],
    ] {
        let (code, _, err) = cli(&args);
        assert_eq!(code, EXIT_USAGE, "{args:?}");
        assert!(!err.is_empty(), "{args:?}");
    }
}

#[test]
fn help_exits_zero() {
    let (code, out, _) = cli(&["--help"]);
    assert_eq!(code, EXIT_OK);
    assert!(out.contains("integrate"));
}

#[test]
fn numerical_failures_exit_2() {
    let (code, _, err) = cli(&[
        "integrate",
        "--system",
        "stiff2",
        "--stepper",
        "euler",
        "--dt",
        "0.1",
        "--t1",
        "100",
    ]);
    assert_eq!(code, EXIT_NUMERICAL);
    assert!(err.contains("finite"));
}

#[test]
fn adaptive_observation_is_every_accepted_step() {
    let (code, out, _) = cli(&[
        "integrate",
        "--system",
        "harmonic",
        "--stepper",
        "dopri5_controlled",
        "--adaptive",
        "--t1",
        "10",
        "--dt",
        "0.1",
    ]);
    assert_eq!(code, EXIT_OK);
    let times: Vec<f64> = out
        .lines()
        .skip(1)
        .map(|l| l.split(',').next().unwrap().parse().unwrap())
        .collect();
    assert_eq!(times[0], 0.0);
    assert_eq!(*times.last().unwrap(), 10.0);
    assert!(times.windows(2).all(|w| w[1] > w[0]));
    assert!(times.len() < 100);
}
