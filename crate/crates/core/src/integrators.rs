//! One-step methods for `ẋ = A(t)x + f(t)` on the extended phase space
//! `(x, t)`.
//!
//! Geometric: Strang splitting of `Y = (Ax, 0)` and `Z = (f(t), 1)`, and the
//! implicit midpoint rule. Non-geometric: Heun (explicit trapezoidal RK2) and
//! a two-stage L-stable SDIRK of order 2. The exact reference flow propagates
//! an augmented autonomous system with `expm`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::dense::{self, lin_solve_vec, Matrix, SymplecticForm};
use crate::error::{Error, Result};
use crate::lie::{AlgebraSpec, LieElement, MatrixAlgebra, MatrixOrder};
use crate::trig::{Coefficient, MatTrigPoly, VecTrigPoly};

/// Diagonal coefficient of the L-stable SDIRK2 scheme, `1 − 1/√2`.
pub const SDIRK2_GAMMA: f64 = 1.0 - std::f64::consts::FRAC_1_SQRT_2;

/// Upper bound on the number of steps a single integration may take.
pub const MAX_STEPS: f64 = 1e8;

/// Errors at or below this level are left out of slope fits.
pub const ERROR_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SystemRepr", into = "SystemRepr")]
pub struct LinearSystem {
    a: MatTrigPoly,
    f: VecTrigPoly,
    algebra: MatrixAlgebra,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SystemRepr {
    algebra: MatrixAlgebra,
    #[serde(rename = "A")]
    a: MatTrigPoly,
    f: VecTrigPoly,
}

impl TryFrom<SystemRepr> for LinearSystem {
    type Error = Error;
    fn try_from(r: SystemRepr) -> Result<Self> {
        LinearSystem::new(r.a, r.f, r.algebra)
    }
}

impl From<LinearSystem> for SystemRepr {
    fn from(s: LinearSystem) -> Self {
        Self {
            algebra: s.algebra,
            a: s.a,
            f: s.f,
        }
    }
}

impl LinearSystem {
    /// The algebra tag is declarative; use [`crate::lie::membership`] to verify it.
    pub fn new(a: MatTrigPoly, f: VecTrigPoly, algebra: MatrixAlgebra) -> Result<Self> {
        // LieElement::new performs the frequency and shape checks.
        LieElement::new(a.clone(), f.clone(), 1.0)?;
        if algebra == MatrixAlgebra::Symplectic && !f.dim().is_multiple_of(2) {
            return Err(Error::invalid("symplectic tag on an odd-dimensional system"));
        }
        Ok(Self { a, f, algebra })
    }

    pub fn matrix(&self) -> &MatTrigPoly {
        &self.a
    }

    pub fn forcing(&self) -> &VecTrigPoly {
        &self.f
    }

    pub fn algebra(&self) -> MatrixAlgebra {
        self.algebra
    }

    pub fn omega(&self) -> f64 {
        self.a.omega()
    }

    pub fn dim(&self) -> usize {
        self.f.dim()
    }

    pub fn has_constant_matrix(&self) -> bool {
        self.a.is_constant()
    }

    /// `A` when it does not depend on time.
    pub fn constant_matrix(&self, what: &'static str) -> Result<&Matrix> {
        if self.has_constant_matrix() {
            Ok(self.a.a0())
        } else {
            Err(Error::NonConstantMatrix(what))
        }
    }

    /// The same system with `f ≡ 0`.
    pub fn homogeneous(&self) -> Self {
        Self {
            a: self.a.clone(),
            f: self.f.zero_like(),
            algebra: self.algebra,
        }
    }

    /// The extended field `(A(t)x + f(t), 1)`.
    pub fn element(&self) -> LieElement {
        LieElement::new(self.a.clone(), self.f.clone(), 1.0).expect("validated on construction")
    }

    /// Splitting fields `Y = (A, 0, 0)` and `Z = (0, f, 1)`.
    pub fn splitting(&self) -> (LieElement, LieElement) {
        let n = self.dim();
        let y = LieElement::new(self.a.clone(), self.f.zero_like(), 0.0)
            .expect("validated on construction");
        let z = LieElement::new(
            MatTrigPoly::constant(self.omega(), Matrix::zeros(n, n)).expect("positive omega"),
            self.f.clone(),
            1.0,
        )
        .expect("validated on construction");
        (y, z)
    }

    /// Smallest sub-space spec containing this system's element.
    pub fn algebra_spec(&self) -> AlgebraSpec {
        AlgebraSpec {
            algebra: self.algebra,
            n: self.dim(),
            omega: self.omega(),
            vector_order: self.f.canonical().order(),
            matrix_order: MatrixOrder::Bounded(self.a.canonical().order()),
        }
    }

    fn field(&self, x: &[f64], t: f64) -> Vec<f64> {
        let mut v = self.a.eval(t).mul_vec(x);
        v.add_scaled(1.0, &self.f.eval(t));
        v
    }
}

/// A point `(x, t)` of the extended phase space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtState {
    pub x: Vec<f64>,
    pub t: f64,
}

impl ExtState {
    pub fn new(x: Vec<f64>, t: f64) -> Self {
        Self { x, t }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Exact,
    Strang,
    Midpoint,
    Heun,
    Sdirk2,
}

impl Method {
    pub const ALL: [Method; 5] = [
        Method::Exact,
        Method::Strang,
        Method::Midpoint,
        Method::Heun,
        Method::Sdirk2,
    ];

    /// The four approximate one-step methods.
    pub const STEPPERS: [Method; 4] = [
        Method::Strang,
        Method::Midpoint,
        Method::Heun,
        Method::Sdirk2,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::Exact => "exact",
            Method::Strang => "strang",
            Method::Midpoint => "midpoint",
            Method::Heun => "heun",
            Method::Sdirk2 => "sdirk2",
        }
    }

    /// Whether the one-step map stays in the structure group of the flow.
    pub fn is_geometric(self) -> bool {
        matches!(self, Method::Exact | Method::Strang | Method::Midpoint)
    }

    pub fn registry() -> String {
        Method::ALL.map(Method::name).join(", ")
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| {
                Error::invalid(format!(
                    "unknown method '{s}' (expected one of: {})",
                    Method::registry()
                ))
            })
    }
}

/// Exact flow of an element with constant matrix part, via the augmented
/// generator acting on `z = (x, cos Ωt, sin Ωt, …, cos kΩt, sin kΩt, 1)`.
#[derive(Debug, Clone)]
pub struct AugmentedFlow {
    generator: Matrix,
    n: usize,
    order: usize,
    omega: f64,
    alpha: f64,
}

impl AugmentedFlow {
    pub fn new(el: &LieElement) -> Result<Self> {
        let a = el.matrix_part();
        if !a.is_constant() {
            return Err(Error::NonConstantMatrix("the exact reference flow"));
        }
        let f = el.vector_part().canonical();
        let (n, k, omega, alpha) = (el.dim(), f.order(), el.omega(), el.alpha());
        let size = n + 2 * k + 1;
        let one = size - 1;
        let mut g = Matrix::zeros(size, size);
        for i in 0..n {
            for j in 0..n {
                g[(i, j)] = a.a0()[(i, j)];
            }
            g[(i, one)] = f.a0()[i];
        }
        for h in 0..k {
            let (c, s) = (n + 2 * h, n + 2 * h + 1);
            for i in 0..n {
                g[(i, c)] = f.cos_coeffs()[h][i];
                g[(i, s)] = f.sin_coeffs()[h][i];
            }
            let w = (h + 1) as f64 * omega * alpha;
            g[(c, s)] = -w;
            g[(s, c)] = w;
        }
        Ok(Self {
            generator: g,
            n,
            order: k,
            omega,
            alpha,
        })
    }

    pub fn generator(&self) -> &Matrix {
        &self.generator
    }

    pub fn propagator(&self, s: f64) -> Result<Matrix> {
        dense::expm(&self.generator.scaled(s))
    }

    /// Applies a propagator from [`propagator`](Self::propagator) for duration `s`.
    pub fn apply(&self, propagator: &Matrix, st: &ExtState, s: f64) -> ExtState {
        let mut z = Vec::with_capacity(self.generator.rows());
        z.extend_from_slice(&st.x);
        for h in 1..=self.order {
            let phase = h as f64 * self.omega * st.t;
            z.push(phase.cos());
            z.push(phase.sin());
        }
        z.push(1.0);
        let mut out = propagator.mul_vec(&z);
        out.truncate(self.n);
        ExtState::new(out, st.t + self.alpha * s)
    }

    pub fn flow(&self, st: &ExtState, s: f64) -> Result<ExtState> {
        Ok(self.apply(&self.propagator(s)?, st, s))
    }
}

fn check_state(sys: &LinearSystem, st: &ExtState) -> Result<()> {
    if st.x.len() != sys.dim() {
        return Err(Error::dims(format!(
            "state of dimension {} for a system of dimension {}",
            st.x.len(),
            sys.dim()
        )));
    }
    Ok(())
}

/// Exact flow of `Y = (Ax, 0)` for duration `s`; `t` is unchanged.
pub fn flow_a_exact(sys: &LinearSystem, s: f64, st: &ExtState) -> Result<ExtState> {
    check_state(sys, st)?;
    let a = sys.constant_matrix("the exact matrix flow")?;
    let e = dense::expm(&a.scaled(s))?;
    Ok(ExtState::new(e.mul_vec(&st.x), st.t))
}

/// Exact flow of `Z = (f(t), 1)` for duration `s`.
pub fn flow_f_exact(sys: &LinearSystem, s: f64, st: &ExtState) -> Result<ExtState> {
    check_state(sys, st)?;
    let mut x = st.x.clone();
    x.add_scaled(1.0, &sys.f.integral_over_step(st.t, s));
    Ok(ExtState::new(x, st.t + s))
}

/// `φ_Y^{h/2} ∘ φ_Z^h ∘ φ_Y^{h/2}`.
pub fn strang_step(sys: &LinearSystem, h: f64, st: &ExtState) -> Result<ExtState> {
    let half = flow_a_exact(sys, 0.5 * h, st)?;
    let mid = flow_f_exact(sys, h, &half)?;
    flow_a_exact(sys, 0.5 * h, &mid)
}

pub fn implicit_midpoint_step(sys: &LinearSystem, h: f64, st: &ExtState) -> Result<ExtState> {
    check_state(sys, st)?;
    let n = sys.dim();
    let tm = st.t + 0.5 * h;
    let a = sys.a.eval(tm);
    let id = Matrix::identity(n);
    let lhs = &id - &a.scaled(0.5 * h);
    let mut rhs = (&id + &a.scaled(0.5 * h)).mul_vec(&st.x);
    rhs.add_scaled(h, &sys.f.eval(tm));
    Ok(ExtState::new(lin_solve_vec(&lhs, &rhs)?, st.t + h))
}

pub fn heun_step(sys: &LinearSystem, h: f64, st: &ExtState) -> Result<ExtState> {
    check_state(sys, st)?;
    let k1 = sys.field(&st.x, st.t);
    let mut pred = st.x.clone();
    pred.add_scaled(h, &k1);
    let k2 = sys.field(&pred, st.t + h);
    let mut x = st.x.clone();
    x.add_scaled(0.5 * h, &k1);
    x.add_scaled(0.5 * h, &k2);
    Ok(ExtState::new(x, st.t + h))
}

/// Two-stage SDIRK with tableau `[[γ, 0], [1−γ, γ]]`, `b = (1−γ, γ)`,
/// `c = (γ, 1)`.
pub fn sdirk2_step(sys: &LinearSystem, h: f64, st: &ExtState) -> Result<ExtState> {
    check_state(sys, st)?;
    let g = SDIRK2_GAMMA;
    let id = Matrix::identity(sys.dim());
    let stage = |t: f64, base: &[f64]| -> Result<Vec<f64>> {
        let a = sys.a.eval(t);
        let lhs = &id - &a.scaled(g * h);
        let mut rhs = a.mul_vec(base);
        rhs.add_scaled(1.0, &sys.f.eval(t));
        lin_solve_vec(&lhs, &rhs)
    };
    let k1 = stage(st.t + g * h, &st.x)?;
    let mut base = st.x.clone();
    base.add_scaled((1.0 - g) * h, &k1);
    let k2 = stage(st.t + h, &base)?;
    let mut x = st.x.clone();
    x.add_scaled((1.0 - g) * h, &k1);
    x.add_scaled(g * h, &k2);
    Ok(ExtState::new(x, st.t + h))
}

/// The exact solution after time `s`, to `expm` accuracy.
pub fn exact_reference(sys: &LinearSystem, st: &ExtState, s: f64) -> Result<ExtState> {
    check_state(sys, st)?;
    AugmentedFlow::new(&sys.element())?.flow(st, s)
}

pub fn step(method: Method, sys: &LinearSystem, h: f64, st: &ExtState) -> Result<ExtState> {
    match method {
        Method::Exact => exact_reference(sys, st, h),
        Method::Strang => strang_step(sys, h, st),
        Method::Midpoint => implicit_midpoint_step(sys, h, st),
        Method::Heun => heun_step(sys, h, st),
        Method::Sdirk2 => sdirk2_step(sys, h, st),
    }
}

// Per-step work that only depends on (system, h) is done once.
enum Prepared {
    Exact { flow: AugmentedFlow, propagator: Matrix },
    Strang { half: Matrix },
    Direct,
}

struct Stepper<'a> {
    method: Method,
    sys: &'a LinearSystem,
    h: f64,
    prepared: Prepared,
}

impl<'a> Stepper<'a> {
    fn new(method: Method, sys: &'a LinearSystem, h: f64) -> Result<Self> {
        let prepared = match method {
            Method::Exact => {
                let flow = AugmentedFlow::new(&sys.element())?;
                let propagator = flow.propagator(h)?;
                Prepared::Exact { flow, propagator }
            }
            Method::Strang => Prepared::Strang {
                half: dense::expm(&sys.constant_matrix("Strang splitting")?.scaled(0.5 * h))?,
            },
            _ => Prepared::Direct,
        };
        Ok(Self {
            method,
            sys,
            h,
            prepared,
        })
    }

    fn advance(&self, st: &ExtState) -> Result<ExtState> {
        match &self.prepared {
            Prepared::Exact { flow, propagator } => Ok(flow.apply(propagator, st, self.h)),
            Prepared::Strang { half } => {
                let mut x = half.mul_vec(&st.x);
                x.add_scaled(1.0, &self.sys.f.integral_over_step(st.t, self.h));
                Ok(ExtState::new(half.mul_vec(&x), st.t + self.h))
            }
            Prepared::Direct => step(self.method, self.sys, self.h, st),
        }
    }
}

/// Time-indexed samples produced by [`integrate`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Trajectory {
    pub method: Method,
    pub h: f64,
    pub n: usize,
    pub omega: f64,
    pub times: Vec<f64>,
    pub states: Vec<Vec<f64>>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn component(&self, i: usize) -> Vec<f64> {
        self.states.iter().map(|x| x[i]).collect()
    }

    pub fn final_state(&self) -> ExtState {
        ExtState::new(
            self.states.last().expect("non-empty trajectory").clone(),
            *self.times.last().expect("non-empty trajectory"),
        )
    }

    pub fn span(&self) -> f64 {
        match (self.times.first(), self.times.last()) {
            (Some(a), Some(b)) => b - a,
            _ => 0.0,
        }
    }
}

/// Number of full steps and the length of a trailing partial step.
fn grid(t0: f64, t_end: f64, h: f64) -> Result<(usize, f64)> {
    if !(h.is_finite() && h > 0.0) {
        return Err(Error::invalid(format!("step size must be positive, got {h}")));
    }
    if !(t0.is_finite() && t_end.is_finite()) || t_end < t0 {
        return Err(Error::invalid(format!(
            "invalid time interval [{t0}, {t_end}]"
        )));
    }
    let ratio = (t_end - t0) / h;
    if ratio > MAX_STEPS {
        return Err(Error::invalid(format!(
            "{ratio:.3e} steps exceed the budget of {MAX_STEPS:e}"
        )));
    }
    let nearest = ratio.round();
    if (ratio - nearest).abs() <= 1e-9 * ratio.max(1.0) {
        return Ok((nearest as usize, 0.0));
    }
    let full = ratio.floor() as usize;
    Ok((full, t_end - (t0 + full as f64 * h)))
}

/// Steps from `t0` to `t_end` with step `h`; a final partial step lands
/// exactly on `t_end`.
pub fn integrate(
    method: Method,
    sys: &LinearSystem,
    x0: &[f64],
    t0: f64,
    t_end: f64,
    h: f64,
) -> Result<Trajectory> {
    let (full, tail) = grid(t0, t_end, h)?;
    let mut st = ExtState::new(x0.to_vec(), t0);
    check_state(sys, &st)?;
    let stepper = Stepper::new(method, sys, h)?;

    let total = full + usize::from(tail > 0.0);
    let mut times = Vec::with_capacity(total + 1);
    let mut states = Vec::with_capacity(total + 1);
    times.push(t0);
    states.push(st.x.clone());
    let fail = |index: usize, t: f64, e: Error| Error::StepFailed {
        index,
        t,
        source: Box::new(e),
    };
    for i in 0..full {
        st = stepper.advance(&st).map_err(|e| fail(i, st.t, e))?;
        st.t = if i + 1 == full && tail == 0.0 {
            t_end
        } else {
            t0 + (i + 1) as f64 * h
        };
        times.push(st.t);
        states.push(st.x.clone());
    }
    if tail > 0.0 {
        st = step(method, sys, tail, &st).map_err(|e| fail(full, st.t, e))?;
        st.t = t_end;
        times.push(st.t);
        states.push(st.x.clone());
    }
    if let Some(bad) = states.iter().position(|x| x.iter().any(|v| !v.is_finite())) {
        return Err(fail(bad.saturating_sub(1), times[bad], Error::NonFinite("state")));
    }
    Ok(Trajectory {
        method,
        h,
        n: sys.dim(),
        omega: sys.omega(),
        times,
        states,
    })
}

/// Linear part `M` of one step at time `t`, from stepping the basis vectors
/// with the forcing removed.
pub fn transfer_matrix(method: Method, sys: &LinearSystem, t: f64, h: f64) -> Result<Matrix> {
    let hom = sys.homogeneous();
    let n = sys.dim();
    let mut m = Matrix::zeros(n, n);
    for j in 0..n {
        let mut e = vec![0.0; n];
        e[j] = 1.0;
        let out = step(method, &hom, h, &ExtState::new(e, t))?;
        for i in 0..n {
            m[(i, j)] = out.x[i];
        }
    }
    Ok(m)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StepReport {
    pub transfer: Matrix,
    /// `‖MᵀJM − J‖`, only for symplectic-tagged systems.
    pub symplectic_defect: Option<f64>,
    pub spectral_radius: f64,
}

pub fn step_report(method: Method, sys: &LinearSystem, t: f64, h: f64) -> Result<StepReport> {
    let transfer = transfer_matrix(method, sys, t, h)?;
    let symplectic_defect = match sys.algebra {
        MatrixAlgebra::Symplectic => {
            let j = SymplecticForm::canonical(sys.dim())?;
            Some(dense::symplectic_defect(&transfer, &j)?)
        }
        _ => None,
    };
    let spectral_radius = dense::spectral_radius(&transfer)?;
    Ok(StepReport {
        transfer,
        symplectic_defect,
        spectral_radius,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergencePoint {
    pub h: f64,
    pub error: f64,
    /// False when the error is at the round-off floor and left out of the fit.
    pub used: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceReport {
    pub method: Method,
    pub points: Vec<ConvergencePoint>,
    /// Least-squares slope of `log error` against `log h`; `None` with fewer
    /// than two usable points.
    pub slope: Option<f64>,
}

/// Checks that `h_list` has at least three entries, each half the previous.
pub fn validate_halving(h_list: &[f64]) -> Result<()> {
    if h_list.len() < 3 {
        return Err(Error::invalid(format!(
            "need at least 3 step sizes, got {}",
            h_list.len()
        )));
    }
    if h_list.iter().any(|h| !(h.is_finite() && *h > 0.0)) {
        return Err(Error::invalid("step sizes must be positive"));
    }
    for w in h_list.windows(2) {
        if (w[0] / w[1] - 2.0).abs() > 1e-9 {
            return Err(Error::invalid(format!(
                "step sizes must halve: {} is not half of {}",
                w[1], w[0]
            )));
        }
    }
    Ok(())
}

pub fn least_squares_slope(xs: &[f64], ys: &[f64]) -> Option<f64> {
    let n = xs.len();
    if n < 2 {
        return None;
    }
    let mx = xs.iter().sum::<f64>() / n as f64;
    let my = ys.iter().sum::<f64>() / n as f64;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

/// Observed global order of `method` against the exact reference at `t_end`,
/// measured in the Euclidean norm.
pub fn convergence_order(
    method: Method,
    sys: &LinearSystem,
    x0: &[f64],
    t0: f64,
    t_end: f64,
    h_list: &[f64],
) -> Result<ConvergenceReport> {
    validate_halving(h_list)?;
    let reference = exact_reference(sys, &ExtState::new(x0.to_vec(), t0), t_end - t0)?;
    let mut points = Vec::with_capacity(h_list.len());
    for &h in h_list {
        let traj = integrate(method, sys, x0, t0, t_end, h)?;
        let fin = traj.final_state();
        let diff: Vec<f64> = fin.x.iter().zip(&reference.x).map(|(a, b)| a - b).collect();
        let error = dense::vec_norm(&diff);
        points.push(ConvergencePoint {
            h,
            error,
            used: error > ERROR_FLOOR,
        });
    }
    let (xs, ys): (Vec<f64>, Vec<f64>) = points
        .iter()
        .filter(|p| p.used)
        .map(|p| (p.h.ln(), p.error.ln()))
        .unzip();
    Ok(ConvergenceReport {
        method,
        slope: least_squares_slope(&xs, &ys),
        points,
    })
}

/// Exact one-step flow of the truncated modified field of Strang splitting.
pub fn strang_modified_flow(sys: &LinearSystem, h: f64, st: &ExtState) -> Result<ExtState> {
    let (y, z) = sys.splitting();
    let modified = crate::lie::bch_modified_field(&y, &z, h)?;
    AugmentedFlow::new(&modified)?.flow(st, h)
}
