//! Command-line harness: trajectories as CSV, convergence-order studies and
//! work counters.
//!
//! [`run`] is the whole program; `main` only wires it to the process.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::time::Instant;

use clap::builder::PossibleValuesParser;
use clap::{Args, Parser, Subcommand};
use odestep::systems::{find_system, observed_order, system_names, NamedSystem, OrderEstimate};
use odestep::{
    ControllerParams, Dopri5, Error, ExplicitEuler, ImplicitEuler, IntegrationFailure, PairState,
    Rk4, Rk54CashKarp, SymplecticEuler,
};

pub mod steppers;

pub use steppers::{integrate, Schedule, StepperKind};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_NUMERICAL: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "odestep",
    version,
    about = "Integrate ordinary differential equations"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a trajectory as CSV rows `t,x0,...,x{n-1}`.
    Integrate(IntegrateArgs),
    /// Global error against the exact solution for halving step sizes, and
    /// the fitted order.
    Order(OrderArgs),
    /// Work counters and wall time for one or more steppers.
    Bench(BenchArgs),
}

#[derive(Debug, Clone, Args)]
pub struct ProblemArgs {
    #[arg(long, value_parser = PossibleValuesParser::new(system_names()))]
    pub system: String,
    #[arg(long, allow_hyphen_values = true)]
    pub t0: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub t1: Option<f64>,
    /// Initial condition, comma separated; defaults to the system's own.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub x0: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Args)]
pub struct ToleranceArgs {
    #[arg(long, default_value_t = 1e-6)]
    pub atol: f64,
    #[arg(long, default_value_t = 1e-6)]
    pub rtol: f64,
}

#[derive(Debug, Clone, Args)]
pub struct IntegrateArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,
    #[arg(long, value_enum)]
    pub stepper: StepperKind,
    /// Step size, or observation interval for controlled and dense steppers.
    #[arg(long, default_value_t = 0.01)]
    pub dt: f64,
    #[command(flatten)]
    pub tol: ToleranceArgs,
    /// Observe every accepted step (controlled and dense steppers only).
    #[arg(long)]
    pub adaptive: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct OrderArgs {
    #[arg(long, value_parser = PossibleValuesParser::new(system_names()), default_value = "expdecay")]
    pub system: String,
    #[arg(long, value_enum, default_value = "rk4")]
    pub stepper: StepperKind,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub t0: f64,
    #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
    pub t1: f64,
    /// Largest step size; each further level halves it.
    #[arg(long, default_value_t = 0.1)]
    pub dt: f64,
    #[arg(long, default_value_t = 4)]
    pub levels: usize,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub x0: Option<Vec<f64>>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct BenchArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,
    /// Steppers to run; all applicable ones when omitted.
    #[arg(long = "stepper", value_enum)]
    pub steppers: Vec<StepperKind>,
    #[arg(long, default_value_t = 0.01)]
    pub dt: f64,
    #[command(flatten)]
    pub tol: ToleranceArgs,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// A failed run and its exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
    broken_pipe: bool,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Failure {
            code: EXIT_USAGE,
            message: message.into(),
            broken_pipe: false,
        }
    }

    fn io(e: io::Error) -> Self {
        Failure {
            broken_pipe: e.kind() == io::ErrorKind::BrokenPipe,
            ..Failure::usage(format!("i/o error: {e}"))
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure {
            code: if e.is_numerical() {
                EXIT_NUMERICAL
            } else {
                EXIT_USAGE
            },
            message: e.to_string(),
            broken_pipe: false,
        }
    }
}

impl From<IntegrationFailure> for Failure {
    fn from(f: IntegrationFailure) -> Self {
        let code = Failure::from(f.error.clone()).code;
        Failure {
            code,
            message: f.to_string(),
            broken_pipe: false,
        }
    }
}

/// Parse `args` (program name first) and execute. Output goes to `out`
/// unless `--out` names a file; diagnostics go to `err`.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() {
                err.write_all(text.as_bytes())
            } else {
                out.write_all(text.as_bytes())
            };
            return code;
        }
    };
    let result = match &cli.command {
        Command::Integrate(a) => with_output(a.out.as_ref(), out, |w| run_integrate(a, w)),
        Command::Order(a) => with_output(a.out.as_ref(), out, |w| run_order(a, w, err)),
        Command::Bench(a) => with_output(a.out.as_ref(), out, |w| run_bench(a, w)),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(f) if f.broken_pipe => EXIT_OK,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message);
            f.code
        }
    }
}

fn with_output(
    path: Option<&PathBuf>,
    out: &mut dyn Write,
    body: impl FnOnce(&mut dyn Write) -> Result<(), Failure>,
) -> Result<(), Failure> {
    match path {
        Some(p) => {
            let file = File::create(p)
                .map_err(|e| Failure::usage(format!("cannot create {}: {e}", p.display())))?;
            let mut w = BufWriter::new(file);
            body(&mut w)?;
            w.flush().map_err(Failure::io)
        }
        None => {
            let mut w = BufWriter::new(out);
            body(&mut w)?;
            w.flush().map_err(Failure::io)
        }
    }
}

fn resolve_system(name: &str) -> Result<&'static NamedSystem, Failure> {
    find_system(name).ok_or_else(|| {
        Failure::usage(format!(
            "unknown system '{name}'; valid systems: {}",
            system_names().join(", ")
        ))
    })
}

fn initial_state(sys: &NamedSystem, x0: Option<&Vec<f64>>) -> Result<Vec<f64>, Failure> {
    let x = x0.cloned().unwrap_or_else(|| sys.default_x0.to_vec());
    if x.len() != sys.dimension {
        return Err(Failure::usage(format!(
            "system {} has dimension {}, got {} initial values",
            sys.name,
            sys.dimension,
            x.len()
        )));
    }
    Ok(x)
}

fn check_stepper(kind: StepperKind, sys: &NamedSystem) -> Result<(), Failure> {
    if kind.supports(sys) {
        Ok(())
    } else {
        Err(Failure::usage(format!(
            "stepper {} does not apply to system {}",
            kind.name(),
            sys.name
        )))
    }
}

/// CSV header `t,x0,...,x{n-1}`.
pub fn csv_header(dim: usize) -> String {
    let mut s = String::from("t");
    for i in 0..dim {
        s.push_str(&format!(",x{i}"));
    }
    s
}

/// One CSV row with 17 significant digits per value.
pub fn csv_row(t: f64, x: &[f64]) -> String {
    let mut s = format!("{t:.16e}");
    for v in x {
        s.push_str(&format!(",{v:.16e}"));
    }
    s
}

fn run_integrate(a: &IntegrateArgs, w: &mut dyn Write) -> Result<(), Failure> {
    let sys = resolve_system(&a.problem.system)?;
    check_stepper(a.stepper, sys)?;
    let mut x = initial_state(sys, a.problem.x0.as_ref())?;
    let schedule = Schedule {
        t0: a.problem.t0.unwrap_or(0.0),
        t1: a.problem.t1.unwrap_or(10.0),
        dt: a.dt,
        adaptive: a.adaptive,
        params: controller_params(&a.tol)?,
    };
    writeln!(w, "{}", csv_header(sys.dimension)).map_err(Failure::io)?;
    let mut io_err = None;
    let res = integrate(a.stepper, sys, &mut x, &schedule, &mut |x, t| {
        if io_err.is_none() {
            if let Err(e) = writeln!(w, "{}", csv_row(t, x)) {
                io_err = Some(e);
            }
        }
    });
    if let Some(e) = io_err {
        return Err(Failure::io(e));
    }
    let rep = res?;
    check_finite(&x, rep.final_time)
}

/// Explicit fixed-step methods run on through overflow; report it.
fn check_finite(x: &[f64], t: f64) -> Result<(), Failure> {
    if x.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Failure {
            code: EXIT_NUMERICAL,
            message: format!("solution is no longer finite at t = {t}"),
            broken_pipe: false,
        })
    }
}

fn controller_params(t: &ToleranceArgs) -> Result<ControllerParams, Failure> {
    Ok(ControllerParams::with_tolerances(t.atol, t.rtol)?)
}

/// Global-error study for a fixed-step stepper on a system with a known
/// solution.
pub fn order_study(
    kind: StepperKind,
    sys: &NamedSystem,
    x0: &[f64],
    (t0, t1): (f64, f64),
    dts: &[f64],
) -> Result<OrderEstimate, Failure> {
    let exact = sys
        .exact
        .ok_or_else(|| Failure::usage(format!("system {} has no exact solution", sys.name)))?;
    let mut reference = vec![0.0; x0.len()];
    let mut err_flat = |x: &[f64], t: f64| {
        exact(t0, x0, t, &mut reference);
        x.iter()
            .zip(&reference)
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()))
    };
    let mut s = *sys;
    let x = x0.to_vec();
    let span = (t0, t1);
    let est = match kind {
        StepperKind::Euler => observed_order(
            &mut ExplicitEuler::new(),
            &mut s,
            &x,
            span,
            dts,
            |x: &Vec<f64>, t| err_flat(x, t),
        ),
        StepperKind::Rk4 => {
            observed_order(&mut Rk4::new(), &mut s, &x, span, dts, |x: &Vec<f64>, t| {
                err_flat(x, t)
            })
        }
        StepperKind::Rk54Ck => observed_order(
            &mut Rk54CashKarp::new(),
            &mut s,
            &x,
            span,
            dts,
            |x: &Vec<f64>, t| err_flat(x, t),
        ),
        StepperKind::Dopri5 => observed_order(
            &mut Dopri5::new(),
            &mut s,
            &x,
            span,
            dts,
            |x: &Vec<f64>, t| err_flat(x, t),
        ),
        StepperKind::ImplicitEuler => observed_order(
            &mut ImplicitEuler::default(),
            &mut s,
            &x,
            span,
            dts,
            |x: &Vec<f64>, t| err_flat(x, t),
        ),
        StepperKind::SymplecticEuler => {
            let mut split = sys.split.ok_or_else(|| {
                Failure::usage(format!(
                    "system {} is not a separable Hamiltonian",
                    sys.name
                ))
            })?;
            let h = x.len() / 2;
            let pair = PairState::new(x[..h].to_vec(), x[h..].to_vec());
            let mut flat = Vec::with_capacity(x.len());
            observed_order(
                &mut SymplecticEuler::new(),
                &mut split,
                &pair,
                span,
                dts,
                |p: &PairState<Vec<f64>>, t| {
                    flat.clear();
                    flat.extend_from_slice(&p.q);
                    flat.extend_from_slice(&p.p);
                    err_flat(&flat, t)
                },
            )
        }
        other => {
            return Err(Failure::usage(format!(
                "order studies need a fixed-step stepper, not {}",
                other.name()
            )))
        }
    };
    Ok(est?)
}

fn run_order(a: &OrderArgs, w: &mut dyn Write, err: &mut dyn Write) -> Result<(), Failure> {
    let sys = resolve_system(&a.system)?;
    check_stepper(a.stepper, sys)?;
    let x0 = initial_state(sys, a.x0.as_ref())?;
    if a.levels < 3 {
        return Err(Failure::usage("order studies need at least 3 levels"));
    }
    let dts: Vec<f64> = (0..a.levels).map(|k| a.dt / 2f64.powi(k as i32)).collect();
    let est = order_study(a.stepper, sys, &x0, (a.t0, a.t1), &dts)?;
    let io = |r: io::Result<()>| r.map_err(Failure::io);
    io(writeln!(w, "dt,error,used"))?;
    for p in &est.points {
        io(writeln!(
            w,
            "{:.16e},{:.16e},{}",
            p.dt,
            p.error,
            u8::from(!p.excluded)
        ))?;
    }
    io(writeln!(w, "slope,{:.6}", est.slope))?;
    if est.underflow {
        let _ = writeln!(
            err,
            "note: {} point(s) below the round-off floor were excluded from the fit",
            est.excluded()
        );
    }
    Ok(())
}

fn run_bench(a: &BenchArgs, w: &mut dyn Write) -> Result<(), Failure> {
    let sys = resolve_system(&a.problem.system)?;
    let x0 = initial_state(sys, a.problem.x0.as_ref())?;
    let kinds: Vec<StepperKind> = if a.steppers.is_empty() {
        use clap::ValueEnum;
        StepperKind::value_variants()
            .iter()
            .copied()
            .filter(|k| k.supports(sys))
            .collect()
    } else {
        for k in &a.steppers {
            check_stepper(*k, sys)?;
        }
        a.steppers.clone()
    };
    let schedule = Schedule {
        t0: a.problem.t0.unwrap_or(0.0),
        t1: a.problem.t1.unwrap_or(10.0),
        dt: a.dt,
        adaptive: false,
        params: controller_params(&a.tol)?,
    };
    let io = |r: io::Result<()>| r.map_err(Failure::io);
    io(writeln!(
        w,
        "stepper,steps_attempted,steps_accepted,steps_rejected,system_evaluations,observer_calls,final_time,wall_ms"
    ))?;
    for kind in kinds {
        let mut x = x0.clone();
        let start = Instant::now();
        let rep = integrate(kind, sys, &mut x, &schedule, &mut |_, _| {})?;
        check_finite(&x, rep.final_time)?;
        let ms = start.elapsed().as_secs_f64() * 1e3;
        io(writeln!(
            w,
            "{},{},{},{},{},{},{},{:.3}",
            kind.name(),
            rep.steps_attempted,
            rep.steps_accepted,
            rep.steps_rejected,
            rep.system_evaluations,
            rep.observer_calls,
            rep.final_time,
            ms
        ))?;
    }
    Ok(())
}
