//! `geomint` command-line front end.
//!
//! Exit codes: 0 success, 2 usage or configuration error, 3 numerical failure.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Map, Value};

use crate::error::Error;
use crate::integrators::{self, ExtState, LinearSystem, Method, Trajectory};
use crate::lie::{self, MatrixAlgebra};
use crate::rotor::{self, RotorParams};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

/// Number of random partners used for closure checks.
const CLOSURE_PAIRS: usize = 20;
/// Number of random triples used for the Jacobi check.
const JACOBI_TRIPLES: usize = 20;

#[derive(Debug, Parser)]
#[command(name = "geomint", version, about = "Geometric integration of periodic linear systems")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Integrate one method and write the trajectory as CSV.
    Simulate(SimulateArgs),
    /// Run several methods on one grid; wide q1 CSV plus a JSON summary.
    Compare(CompareArgs),
    /// Measure observed global order against the exact flow.
    Convergence(ConvergenceArgs),
    /// Check Lie sub-algebra properties of a system.
    AlgebraCheck(AlgebraArgs),
}

#[derive(Debug, Clone, Args)]
pub struct SystemArgs {
    /// JSON system file {"algebra", "A", "f"}.
    #[arg(long, conflicts_with_all = ["rotor", "m", "k", "omega", "eps"])]
    pub system: Option<PathBuf>,
    /// Use the built-in rotor (the default when no --system is given).
    #[arg(long)]
    pub rotor: bool,
    /// Rotor parameters as JSON {"m","k","omega","eps","x0"}.
    #[arg(long, conflicts_with = "system")]
    pub params: Option<PathBuf>,
    /// Rotor mass.
    #[arg(long)]
    pub m: Option<f64>,
    /// Shaft stiffness.
    #[arg(long)]
    pub k: Option<f64>,
    /// Spin (forcing) frequency Ω.
    #[arg(long)]
    pub omega: Option<f64>,
    /// Unbalance eccentricity.
    #[arg(long)]
    pub eps: Option<f64>,
    /// Initial state, comma separated.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub x0: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Args)]
pub struct GridArgs {
    /// Step size.
    #[arg(long, default_value_t = 0.05)]
    pub h: f64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub t0: f64,
    #[arg(long = "t-end", default_value_t = 100.0, allow_hyphen_values = true)]
    pub t_end: f64,
}

#[derive(Debug, Clone, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub system: SystemArgs,
    #[command(flatten)]
    pub grid: GridArgs,
    #[arg(long, default_value = "strang")]
    pub method: String,
    /// Output CSV path; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct CompareArgs {
    #[command(flatten)]
    pub system: SystemArgs,
    #[command(flatten)]
    pub grid: GridArgs,
    #[arg(long, value_delimiter = ',', default_value = "exact,strang,midpoint,heun,sdirk2")]
    pub method: Vec<String>,
    /// Output CSV path; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Summary JSON path; printed to stdout when omitted (or to stderr when
    /// the CSV goes to stdout).
    #[arg(long)]
    pub summary: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct ConvergenceArgs {
    #[command(flatten)]
    pub system: SystemArgs,
    #[arg(long, value_delimiter = ',', default_value = "strang,midpoint,heun,sdirk2")]
    pub method: Vec<String>,
    #[arg(long = "h-list", value_delimiter = ',', default_value = "0.1,0.05,0.025,0.0125")]
    pub h_list: Vec<f64>,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub t0: f64,
    #[arg(long = "t-end", default_value_t = 10.0, allow_hyphen_values = true)]
    pub t_end: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct AlgebraArgs {
    #[command(flatten)]
    pub system: SystemArgs,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Step size at which the BCH modified field is summarised.
    #[arg(long, default_value_t = 0.1)]
    pub h: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    fn usage(msg: impl Into<String>) -> Self {
        Self {
            code: EXIT_USAGE,
            message: msg.into(),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::StepFailed { .. }
            | Error::Singular { .. }
            | Error::NoConvergence
            | Error::NonFinite("state") => EXIT_NUMERICAL,
            _ => EXIT_USAGE,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

/// A resolved system: either the rotor (with its parameters) or a file.
pub struct Problem {
    pub system: LinearSystem,
    pub x0: Vec<f64>,
    pub rotor: Option<RotorParams>,
}

impl SystemArgs {
    pub fn resolve(&self) -> CliResult<Problem> {
        if let Some(path) = &self.system {
            let text = read(path)?;
            let system: LinearSystem = serde_json::from_str(&text).map_err(|e| {
                CliError::usage(format!("{}: malformed system file: {e}", path.display()))
            })?;
            let x0 = match &self.x0 {
                Some(x) if x.len() != system.dim() => {
                    return Err(CliError::usage(format!(
                        "--x0 has {} entries, system has dimension {}",
                        x.len(),
                        system.dim()
                    )))
                }
                Some(x) => x.clone(),
                None => vec![0.0; system.dim()],
            };
            return Ok(Problem {
                system,
                x0,
                rotor: None,
            });
        }
        let mut p = match &self.params {
            Some(path) => serde_json::from_str::<RotorParams>(&read(path)?).map_err(|e| {
                CliError::usage(format!("{}: malformed rotor parameters: {e}", path.display()))
            })?,
            None => RotorParams::default(),
        };
        if let Some(v) = self.m {
            p.m = v;
        }
        if let Some(v) = self.k {
            p.k_stiff = v;
        }
        if let Some(v) = self.omega {
            p.omega = v;
        }
        if let Some(v) = self.eps {
            p.eps = v;
        }
        if let Some(x) = &self.x0 {
            p.x0 = x.as_slice().try_into().map_err(|_| {
                CliError::usage(format!("--x0 needs 4 entries for the rotor, got {}", x.len()))
            })?;
        }
        let system = rotor::build_rotor(&p)?;
        Ok(Problem {
            system,
            x0: p.x0.to_vec(),
            rotor: Some(p),
        })
    }
}

fn read(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| CliError::usage(format!("{}: {e}", path.display())))
}

fn parse_method(name: &str) -> CliResult<Method> {
    name.parse::<Method>().map_err(CliError::from)
}

fn check_grid(g: &GridArgs) -> CliResult<()> {
    if !(g.h.is_finite() && g.h > 0.0) {
        return Err(CliError::usage(format!("--h must be positive, got {}", g.h)));
    }
    if !(g.t_end >= g.t0) {
        return Err(CliError::usage(format!(
            "--t-end ({}) must not precede --t0 ({})",
            g.t_end, g.t0
        )));
    }
    Ok(())
}

fn state_names(n: usize) -> Vec<String> {
    if n == 4 {
        ["q1", "q2", "p1", "p2"].map(String::from).to_vec()
    } else {
        (1..=n).map(|i| format!("x{i}")).collect()
    }
}

/// Trajectory CSV: header then one row per grid point, shortest
/// round-trip decimal formatting.
pub fn trajectory_csv(traj: &Trajectory) -> String {
    let mut out = String::new();
    out.push('t');
    for name in state_names(traj.n) {
        out.push(',');
        out.push_str(&name);
    }
    out.push('\n');
    for (t, x) in traj.times.iter().zip(&traj.states) {
        out.push_str(&t.to_string());
        for v in x {
            out.push(',');
            out.push_str(&v.to_string());
        }
        out.push('\n');
    }
    out
}

fn write_output(path: Option<&Path>, contents: &str) -> CliResult<()> {
    match path {
        Some(p) => fs::write(p, contents).map_err(|e| {
            let _ = fs::remove_file(p);
            CliError::usage(format!("{}: {e}", p.display()))
        }),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(contents.as_bytes())
                .map_err(|e| CliError::usage(format!("stdout: {e}")))
        }
    }
}

fn to_json(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serialisable JSON value");
    s.push('\n');
    s
}

pub fn simulate(args: &SimulateArgs) -> CliResult<String> {
    check_grid(&args.grid)?;
    let method = parse_method(&args.method)?;
    let prob = args.system.resolve()?;
    let g = &args.grid;
    let traj = integrators::integrate(method, &prob.system, &prob.x0, g.t0, g.t_end, g.h)?;
    Ok(trajectory_csv(&traj))
}

fn run_parallel<T: Send>(
    methods: &[Method],
    f: impl Fn(Method) -> Result<T, Error> + Sync,
) -> Vec<Result<T, Error>> {
    std::thread::scope(|s| {
        let f = &f;
        let handles: Vec<_> = methods.iter().map(|&m| s.spawn(move || f(m))).collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("integration thread panicked"))
            .collect()
    })
}

fn envelope(prob: &Problem, traj: &Trajectory) -> Option<f64> {
    match &prob.rotor {
        Some(p) => rotor::envelope_amplitude(traj, 0, p.beat_period()).ok(),
        None => rotor::envelope_amplitude(traj, 0, 0.0).ok(),
    }
}

/// Largest symplectic defect and spectral radius of the transfer matrix over
/// sample times in one forcing period.
fn transfer_diagnostics(
    method: Method,
    sys: &LinearSystem,
    h: f64,
) -> Result<(Option<f64>, f64), Error> {
    let mut defect: Option<f64> = None;
    let mut radius: f64 = 0.0;
    for t in lie::membership_times(sys.omega()) {
        let r = integrators::step_report(method, sys, t, h)?;
        if let Some(d) = r.symplectic_defect {
            defect = Some(defect.map_or(d, |w| w.max(d)));
        }
        radius = radius.max(r.spectral_radius);
    }
    Ok((defect, radius))
}

/// Returns the wide CSV and the summary JSON.
pub fn compare(args: &CompareArgs) -> CliResult<(String, Value)> {
    check_grid(&args.grid)?;
    if args.method.len() < 2 {
        return Err(CliError::usage("compare needs at least two methods"));
    }
    let methods = args
        .method
        .iter()
        .map(|m| parse_method(m))
        .collect::<CliResult<Vec<_>>>()?;
    let prob = args.system.resolve()?;
    let g = &args.grid;
    let sys = &prob.system;
    let runs = run_parallel(&methods, |m| {
        integrators::integrate(m, sys, &prob.x0, g.t0, g.t_end, g.h)
    });
    let trajs = runs.into_iter().collect::<Result<Vec<_>, _>>()?;

    let reference = if sys.has_constant_matrix() {
        Some(integrators::exact_reference(
            sys,
            &ExtState::new(prob.x0.clone(), g.t0),
            g.t_end - g.t0,
        )?)
    } else {
        None
    };
    let exact_envelope = prob.rotor.as_ref().and_then(|p| p.exact_envelope().ok());

    let mut csv = String::from("t");
    for m in &methods {
        csv.push_str(&format!(",q1_{m}"));
    }
    csv.push('\n');
    for (i, t) in trajs[0].times.iter().enumerate() {
        csv.push_str(&t.to_string());
        for tr in &trajs {
            csv.push(',');
            csv.push_str(&tr.states[i][0].to_string());
        }
        csv.push('\n');
    }

    let mut per_method = Map::new();
    for (m, traj) in methods.iter().zip(&trajs) {
        let env = envelope(&prob, traj);
        let final_error = reference.as_ref().map(|r| {
            let fin = traj.final_state();
            crate::dense::vec_norm(
                &fin.x.iter().zip(&r.x).map(|(a, b)| a - b).collect::<Vec<_>>(),
            )
        });
        let (defect, radius) = transfer_diagnostics(*m, sys, g.h)?;
        per_method.insert(
            m.name().to_string(),
            json!({
                "geometric": m.is_geometric(),
                "envelope": env,
                "envelope_error": env.zip(exact_envelope).map(|(e, x)| (e - x).abs()),
                "final_time_error": final_error,
                "max_symplectic_defect": defect,
                "transfer_spectral_radius": radius,
            }),
        );
    }
    let summary = json!({
        "h": g.h,
        "t0": g.t0,
        "t_end": g.t_end,
        "exact_envelope": exact_envelope,
        "methods": Value::Object(per_method),
    });
    Ok((csv, summary))
}

pub fn convergence(args: &ConvergenceArgs) -> CliResult<Value> {
    let methods = args
        .method
        .iter()
        .map(|m| parse_method(m))
        .collect::<CliResult<Vec<_>>>()?;
    if methods.contains(&Method::Exact) {
        return Err(CliError::usage(
            "the exact method has no order to measure; choose from strang, midpoint, heun, sdirk2",
        ));
    }
    if methods.is_empty() {
        return Err(CliError::usage("no methods given"));
    }
    integrators::validate_halving(&args.h_list)?;
    if !(args.t_end > args.t0) {
        return Err(CliError::usage("--t-end must exceed --t0"));
    }
    let prob = args.system.resolve()?;
    let sys = &prob.system;
    let reports = run_parallel(&methods, |m| {
        integrators::convergence_order(m, sys, &prob.x0, args.t0, args.t_end, &args.h_list)
    });
    let mut out = Map::new();
    for (m, r) in methods.iter().zip(reports) {
        let r = r?;
        let mut entry = Map::new();
        for p in &r.points {
            entry.insert(p.h.to_string(), json!(p.error));
        }
        entry.insert("slope".into(), json!(r.slope));
        out.insert(m.name().into(), Value::Object(entry));
    }
    Ok(Value::Object(out))
}

pub fn algebra_check(args: &AlgebraArgs) -> CliResult<Value> {
    let prob = args.system.resolve()?;
    let sys = &prob.system;
    let spec = match &prob.rotor {
        Some(p) => p.algebra_spec(),
        None => sys.algebra_spec(),
    };
    let el = sys.element();

    let (dimension, dimension_note) = match lie::dimension(&spec) {
        Ok(d) => (Some(d), None),
        Err(e) => (None, Some(e.to_string())),
    };

    let (ham_defect, ham_note) = match sys.algebra() {
        MatrixAlgebra::Symplectic => (lie::sampled_algebra_defect(sys.matrix(), spec.algebra)?, None),
        MatrixAlgebra::GeneralLinear => (
            None,
            Some("skipped: matrix algebra is gl(n), every matrix qualifies"),
        ),
        MatrixAlgebra::Trivial => (
            None,
            Some("skipped: matrix algebra is {0}; see membership.algebra_defect"),
        ),
    };

    let membership = lie::membership(&el, &spec)?;
    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    let mut pairs_passed = 0;
    let mut worst_defect: Option<f64> = None;
    let mut worst_order = (0usize, 0usize);
    let mut pairs = 0;
    let mut partners = vec![el.clone()];
    partners.extend((0..CLOSURE_PAIRS).map(|_| lie::random_element(&mut rng, &spec, 2)));
    for y in &partners {
        let r = lie::closure_check(&el, y, &spec)?;
        pairs += 1;
        if r.passed() {
            pairs_passed += 1;
        }
        if let Some(d) = r.algebra_defect {
            worst_defect = Some(worst_defect.map_or(d, |w| w.max(d)));
        }
        worst_order.0 = worst_order.0.max(r.matrix_order);
        worst_order.1 = worst_order.1.max(r.vector_order);
    }
    let closure_ok = membership.passed() && pairs_passed == pairs;

    let mut jacobi_max: f64 = 0.0;
    for _ in 0..JACOBI_TRIPLES {
        let x = lie::random_element(&mut rng, &spec, 2);
        let y = lie::random_element(&mut rng, &spec, 2);
        let z = lie::random_element(&mut rng, &spec, 2);
        jacobi_max = jacobi_max.max(lie::jacobi_defect(&x, &y, &z)?);
    }

    let (y, z) = sys.splitting();
    let terms = lie::bch_modified_element(&y, &z, args.h)?;
    let second = &terms[1].1;

    Ok(json!({
        "algebra": spec.algebra,
        "spec": {
            "n": spec.n,
            "omega": spec.omega,
            "vector_order": spec.vector_order,
            "matrix_order": spec.matrix_order,
        },
        "dimension": dimension,
        "dimension_note": dimension_note,
        "hamiltonian_defect": ham_defect,
        "hamiltonian_note": ham_note,
        "membership": membership,
        "closure": if closure_ok { "pass" } else { "fail" },
        "closure_details": {
            "pairs": pairs,
            "pairs_passed": pairs_passed,
            "max_algebra_defect": worst_defect,
            "max_matrix_order": worst_order.0,
            "max_vector_order": worst_order.1,
        },
        "jacobi_max": jacobi_max,
        "jacobi_triples": JACOBI_TRIPLES,
        "bch": {
            "h": args.h,
            "order0_norm": terms[0].1.norm(),
            "order2_norm": second.norm(),
            "order2_matrix_norm": second.matrix_part().coeff_norm(),
            "order2_vector_norm": second.vector_part().coeff_norm(),
            "order2_vector_order": second.vector_part().canonical().order(),
            "order2_element": second,
        },
        "seed": args.seed,
    }))
}

fn dispatch(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Simulate(a) => {
            let csv = simulate(&a)?;
            write_output(a.out.as_deref(), &csv)
        }
        Command::Compare(a) => {
            let (csv, summary) = compare(&a)?;
            write_output(a.out.as_deref(), &csv)?;
            let text = to_json(&summary);
            match (&a.summary, &a.out) {
                (Some(p), _) => write_output(Some(p), &text),
                (None, Some(_)) => write_output(None, &text),
                (None, None) => {
                    eprint!("{text}");
                    Ok(())
                }
            }
        }
        Command::Convergence(a) => {
            let v = convergence(&a)?;
            write_output(a.out.as_deref(), &to_json(&v))
        }
        Command::AlgebraCheck(a) => {
            let v = algebra_check(&a)?;
            write_output(a.out.as_deref(), &to_json(&v))
        }
    }
}

/// Parses `args` (including the program name) and runs; returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match dispatch(cli) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {}", e.message);
            e.code
        }
    }
}
