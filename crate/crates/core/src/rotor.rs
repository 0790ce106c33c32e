//! Unbalanced rotor on a linear bearing: a disc on a shaft spinning at Ω,
//! state `(q1, q2, p1, p2)`, forced by the centrifugal load of an unbalance ε.

use serde::{Deserialize, Serialize};

use crate::dense::Matrix;
use crate::error::{Error, Result};
use crate::integrators::{self, LinearSystem, Method, Trajectory};
use crate::lie::{AlgebraSpec, MatrixAlgebra, MatrixOrder};
use crate::trig::{MatTrigPoly, VecTrigPoly};

/// Relative distance of Ω from ω below which the closed form is refused.
pub const RESONANCE_GUARD: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RotorParams {
    /// Total mass [kg].
    pub m: f64,
    /// Bearing stiffness [N/m].
    #[serde(rename = "k")]
    pub k_stiff: f64,
    /// Shaft angular velocity [rad/s].
    pub omega: f64,
    /// Unbalance magnitude [m·kg].
    pub eps: f64,
    /// Initial state `(q1, q2, p1, p2)`.
    pub x0: [f64; 4],
}

impl Default for RotorParams {
    fn default() -> Self {
        Self {
            m: 1.0,
            k_stiff: 1.0,
            omega: 1.02,
            eps: 0.1,
            x0: [0.0; 4],
        }
    }
}

impl RotorParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.m.is_finite() && self.m > 0.0) {
            return Err(Error::invalid(format!("mass must be positive, got {}", self.m)));
        }
        if !(self.k_stiff.is_finite() && self.k_stiff > 0.0) {
            return Err(Error::invalid(format!(
                "stiffness must be positive, got {}",
                self.k_stiff
            )));
        }
        if !(self.omega.is_finite() && self.omega > 0.0) {
            return Err(Error::invalid(format!(
                "shaft speed must be positive, got {}",
                self.omega
            )));
        }
        if !(self.eps.is_finite() && self.eps >= 0.0) {
            return Err(Error::invalid(format!(
                "unbalance must be non-negative, got {}",
                self.eps
            )));
        }
        if self.x0.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("initial state"));
        }
        Ok(())
    }

    /// `ω = √(k/m)`.
    pub fn natural_frequency(&self) -> f64 {
        (self.k_stiff / self.m).sqrt()
    }

    fn check_resonance(&self) -> Result<()> {
        let w = self.natural_frequency();
        if (self.omega - w).abs() < RESONANCE_GUARD * w {
            return Err(Error::NearResonance {
                omega: self.omega,
                natural: w,
            });
        }
        Ok(())
    }

    /// Forced-response coefficient `C = (ε/m)Ω²/(Ω² − ω²)`.
    pub fn response_coefficient(&self) -> Result<f64> {
        self.validate()?;
        self.check_resonance()?;
        let w2 = self.k_stiff / self.m;
        let o2 = self.omega * self.omega;
        Ok(self.eps / self.m * o2 / (o2 - w2))
    }

    /// Peak of the beat envelope, `2|C|`.
    pub fn exact_envelope(&self) -> Result<f64> {
        Ok(2.0 * self.response_coefficient()?.abs())
    }

    /// `2π/|Ω − ω|`.
    pub fn beat_period(&self) -> f64 {
        2.0 * std::f64::consts::PI / (self.omega - self.natural_frequency()).abs()
    }

    /// The sub-algebra the rotor's extended field lives in.
    pub fn algebra_spec(&self) -> AlgebraSpec {
        AlgebraSpec {
            algebra: MatrixAlgebra::Symplectic,
            n: 4,
            omega: self.omega,
            vector_order: 1,
            matrix_order: MatrixOrder::Bounded(0),
        }
    }
}

/// Constant Hamiltonian `A` and single-harmonic forcing
/// `f(t) = εΩ²(0, 0, −cos Ωt, sin Ωt)`.
pub fn build_rotor(p: &RotorParams) -> Result<LinearSystem> {
    p.validate()?;
    let inv_m = 1.0 / p.m;
    let k = p.k_stiff;
    let a = Matrix::from_rows(&[
        [0.0, 0.0, inv_m, 0.0],
        [0.0, 0.0, 0.0, inv_m],
        [-k, 0.0, 0.0, 0.0],
        [0.0, -k, 0.0, 0.0],
    ])?;
    let amp = p.eps * p.omega * p.omega;
    let f = VecTrigPoly::new(
        p.omega,
        vec![0.0; 4],
        vec![vec![0.0, 0.0, -amp, 0.0]],
        vec![vec![0.0, 0.0, 0.0, amp]],
    )?;
    LinearSystem::new(MatTrigPoly::constant(p.omega, a)?, f, MatrixAlgebra::Symplectic)
}

/// Closed-form state at time `t` (free oscillation from `x0` plus the
/// forced response from rest).
pub fn closed_form_solution(p: &RotorParams, t: f64) -> Result<[f64; 4]> {
    let c = p.response_coefficient()?;
    let (m, big, w) = (p.m, p.omega, p.natural_frequency());
    let (cw, sw) = ((w * t).cos(), (w * t).sin());
    let (cb, sb) = ((big * t).cos(), (big * t).sin());

    let [q1_0, q2_0, p1_0, p2_0] = p.x0;
    let free_q = |q0: f64, p0: f64| q0 * cw + p0 / (m * w) * sw;
    let free_p = |q0: f64, p0: f64| -q0 * m * w * sw + p0 * cw;

    let q1 = c * (cb - cw);
    let p1 = m * c * (-big * sb + w * sw);
    let q2 = -c * (sb - big / w * sw);
    let p2 = -m * c * big * (cb - cw);
    Ok([
        q1 + free_q(q1_0, p1_0),
        q2 + free_q(q2_0, p2_0),
        p1 + free_p(q1_0, p1_0),
        p2 + free_p(q2_0, p2_0),
    ])
}

/// Max `|x_component|` over a trajectory spanning at least `beat_period`.
pub fn envelope_amplitude(traj: &Trajectory, component: usize, beat_period: f64) -> Result<f64> {
    if component >= traj.n {
        return Err(Error::dims(format!(
            "component {component} of a {}-dimensional trajectory",
            traj.n
        )));
    }
    let span = traj.span();
    if !(span >= beat_period) {
        return Err(Error::SpanTooShort {
            span,
            required: beat_period,
        });
    }
    Ok(traj.states.iter().map(|x| x[component].abs()).fold(0.0, f64::max))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepEntry {
    pub method: Method,
    pub envelope: Option<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub omega: f64,
    /// `2(ε/m)Ω²/|Ω² − ω²|`; `None` inside the resonance guard.
    pub exact_envelope: Option<f64>,
    pub entries: Vec<SweepEntry>,
}

/// Integrates the rotor from `t = 0` to `t_end` for every shaft speed in
/// `omega_grid` and records the `q1` envelope per method. Failures are
/// recorded per point; the sweep always completes.
pub fn resonance_sweep(
    base: &RotorParams,
    omega_grid: &[f64],
    methods: &[Method],
    h: f64,
    t_end: f64,
) -> Vec<SweepRow> {
    omega_grid
        .iter()
        .map(|&omega| {
            let p = RotorParams {
                omega,
                ..base.clone()
            };
            let entries = methods
                .iter()
                .map(|&method| {
                    let run = build_rotor(&p).and_then(|sys| {
                        let traj = integrators::integrate(method, &sys, &p.x0, 0.0, t_end, h)?;
                        envelope_amplitude(&traj, 0, p.beat_period())
                    });
                    match run {
                        Ok(e) => SweepEntry {
                            method,
                            envelope: Some(e),
                            error: None,
                        },
                        Err(e) => SweepEntry {
                            method,
                            envelope: None,
                            error: Some(e.to_string()),
                        },
                    }
                })
                .collect();
            SweepRow {
                omega,
                exact_envelope: p.exact_envelope().ok(),
                entries,
            }
        })
        .collect()
}
