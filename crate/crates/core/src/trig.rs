//! Vector- and matrix-valued trigonometric polynomials
//!
//! `p(t) = a0 + Σ_{i=1..k} a_i cos(iΩt) + b_i sin(iΩt)`
//!
//! Polynomials are stored by coefficient, so derivatives, products and
//! integrals over a step are exact. Products grow the order (no truncation);
//! callers that want a bounded order trim explicitly.

use std::fmt::Debug;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::dense::{Matrix, SymplecticForm};
use crate::error::{Error, Result};

/// Relative tolerance under which two base frequencies are considered equal.
pub const FREQUENCY_RTOL: f64 = 1e-12;

/// A coefficient space for [`TrigPoly`]: vectors or square matrices.
pub trait Coefficient: Clone + Debug + PartialEq {
    fn zeros_like(&self) -> Self;
    /// `self += s * other`
    fn add_scaled(&mut self, s: f64, other: &Self);
    /// Euclidean norm for vectors, Frobenius for matrices.
    fn norm(&self) -> f64;
    /// Leading dimension `n`.
    fn dim(&self) -> usize;
    fn same_shape(&self, other: &Self) -> bool;
    fn all_finite(&self) -> bool;

    fn scaled(&self, s: f64) -> Self {
        let mut out = self.zeros_like();
        out.add_scaled(s, self);
        out
    }
}

impl Coefficient for Vec<f64> {
    fn zeros_like(&self) -> Self {
        vec![0.0; self.len()]
    }
    fn add_scaled(&mut self, s: f64, other: &Self) {
        assert_eq!(self.len(), other.len(), "vector length mismatch");
        for (a, b) in self.iter_mut().zip(other) {
            *a += s * b;
        }
    }
    fn norm(&self) -> f64 {
        crate::dense::vec_norm(self)
    }
    fn dim(&self) -> usize {
        self.len()
    }
    fn same_shape(&self, other: &Self) -> bool {
        self.len() == other.len()
    }
    fn all_finite(&self) -> bool {
        self.iter().all(|v| v.is_finite())
    }
}

impl Coefficient for Matrix {
    fn zeros_like(&self) -> Self {
        Matrix::zeros(self.rows(), self.cols())
    }
    fn add_scaled(&mut self, s: f64, other: &Self) {
        self.add_scaled_in_place(s, other);
    }
    fn norm(&self) -> f64 {
        self.frobenius_norm()
    }
    fn dim(&self) -> usize {
        self.rows()
    }
    fn same_shape(&self, other: &Self) -> bool {
        self.shape() == other.shape()
    }
    fn all_finite(&self) -> bool {
        // Matrix construction already rejects non-finite entries.
        true
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrigPoly<C> {
    omega: f64,
    a0: C,
    cos: Vec<C>,
    sin: Vec<C>,
}

pub type VecTrigPoly = TrigPoly<Vec<f64>>;
pub type MatTrigPoly = TrigPoly<Matrix>;

pub(crate) fn frequencies_match(a: f64, b: f64) -> bool {
    (a - b).abs() <= FREQUENCY_RTOL * a.abs().max(b.abs())
}

fn check_frequency(a: f64, b: f64) -> Result<()> {
    if frequencies_match(a, b) {
        Ok(())
    } else {
        Err(Error::FrequencyMismatch(a, b))
    }
}

impl<C: Coefficient> TrigPoly<C> {
    pub fn new(omega: f64, a0: C, cos: Vec<C>, sin: Vec<C>) -> Result<Self> {
        if !(omega.is_finite() && omega > 0.0) {
            return Err(Error::invalid(format!(
                "base frequency must be positive and finite, got {omega}"
            )));
        }
        if cos.len() != sin.len() {
            return Err(Error::dims(format!(
                "{} cosine vs {} sine coefficients",
                cos.len(),
                sin.len()
            )));
        }
        if cos.iter().chain(&sin).any(|c| !c.same_shape(&a0)) {
            return Err(Error::dims("coefficients do not share one shape"));
        }
        if cos.iter().chain(&sin).chain(Some(&a0)).any(|c| !c.all_finite()) {
            return Err(Error::NonFinite("trigonometric coefficients"));
        }
        Ok(Self { omega, a0, cos, sin })
    }

    pub fn constant(omega: f64, a0: C) -> Result<Self> {
        Self::new(omega, a0, Vec::new(), Vec::new())
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    /// Highest harmonic index `k`.
    pub fn order(&self) -> usize {
        self.cos.len()
    }

    pub fn dim(&self) -> usize {
        self.a0.dim()
    }

    pub fn a0(&self) -> &C {
        &self.a0
    }

    pub fn cos_coeffs(&self) -> &[C] {
        &self.cos
    }

    pub fn sin_coeffs(&self) -> &[C] {
        &self.sin
    }

    /// Number of coefficient slots, `2k + 1`.
    pub fn slot_count(&self) -> usize {
        1 + self.cos.len() + self.sin.len()
    }

    pub fn coefficients(&self) -> impl Iterator<Item = &C> {
        std::iter::once(&self.a0).chain(&self.cos).chain(&self.sin)
    }

    pub fn is_constant(&self) -> bool {
        self.cos.iter().chain(&self.sin).all(|c| c.norm() == 0.0)
    }

    pub fn is_zero(&self) -> bool {
        self.coefficients().all(|c| c.norm() == 0.0)
    }

    /// Supremum of the coefficient norms.
    pub fn coeff_norm(&self) -> f64 {
        self.coefficients().map(Coefficient::norm).fold(0.0, f64::max)
    }

    pub fn zero_like(&self) -> Self {
        Self {
            omega: self.omega,
            a0: self.a0.zeros_like(),
            cos: Vec::new(),
            sin: Vec::new(),
        }
    }

    pub fn eval(&self, t: f64) -> C {
        let mut out = self.a0.clone();
        for (i, (a, b)) in self.cos.iter().zip(&self.sin).enumerate() {
            let phase = (i + 1) as f64 * self.omega * t;
            out.add_scaled(phase.cos(), a);
            out.add_scaled(phase.sin(), b);
        }
        out
    }

    /// Pads with zero harmonics up to `order`; never truncates.
    pub fn padded(&self, order: usize) -> Self {
        let mut out = self.clone();
        let z = self.a0.zeros_like();
        while out.cos.len() < order {
            out.cos.push(z.clone());
            out.sin.push(z.clone());
        }
        out
    }

    /// Largest harmonic whose cosine or sine coefficient exceeds `tol`.
    pub fn effective_order(&self, tol: f64) -> usize {
        (1..=self.order())
            .rev()
            .find(|&i| self.cos[i - 1].norm() > tol || self.sin[i - 1].norm() > tol)
            .unwrap_or(0)
    }

    /// Drops trailing harmonics whose coefficients are exactly zero.
    pub fn canonical(&self) -> Self {
        let keep = self.effective_order(0.0);
        let mut out = self.clone();
        out.cos.truncate(keep);
        out.sin.truncate(keep);
        out
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self {
            omega: self.omega,
            a0: self.a0.scaled(s),
            cos: self.cos.iter().map(|c| c.scaled(s)).collect(),
            sin: self.sin.iter().map(|c| c.scaled(s)).collect(),
        }
    }

    /// Exact time derivative; the order is preserved.
    pub fn derivative(&self) -> Self {
        let mut cos = Vec::with_capacity(self.order());
        let mut sin = Vec::with_capacity(self.order());
        for (i, (a, b)) in self.cos.iter().zip(&self.sin).enumerate() {
            let w = (i + 1) as f64 * self.omega;
            cos.push(b.scaled(w));
            sin.push(a.scaled(-w));
        }
        Self {
            omega: self.omega,
            a0: self.a0.zeros_like(),
            cos,
            sin,
        }
    }

    /// `alpha * p + beta * q`, of order `max(p.order, q.order)`.
    pub fn linear_combo(alpha: f64, p: &Self, beta: f64, q: &Self) -> Result<Self> {
        check_frequency(p.omega, q.omega)?;
        if !p.a0.same_shape(&q.a0) {
            return Err(Error::dims("linear combination of differently shaped polynomials"));
        }
        let order = p.order().max(q.order());
        let mut out = p.padded(order).scaled(alpha);
        let q = q.padded(order);
        out.a0.add_scaled(beta, &q.a0);
        for (o, c) in out.cos.iter_mut().zip(&q.cos) {
            o.add_scaled(beta, c);
        }
        for (o, c) in out.sin.iter_mut().zip(&q.sin) {
            o.add_scaled(beta, c);
        }
        Ok(out)
    }

    /// Exact `∫_{t0}^{t0+h} p(u) du`.
    pub fn integral_over_step(&self, t0: f64, h: f64) -> C {
        let mut out = self.a0.scaled(h);
        for (i, (a, b)) in self.cos.iter().zip(&self.sin).enumerate() {
            let w = (i + 1) as f64 * self.omega;
            // sin/cos differences in product form to avoid cancellation for small h
            let mid = w * (t0 + 0.5 * h);
            let half = (0.5 * w * h).sin();
            let dsin = 2.0 * mid.cos() * half;
            let dcos = -2.0 * mid.sin() * half;
            out.add_scaled(dsin / w, a);
            out.add_scaled(-dcos / w, b);
        }
        out
    }
}

#[derive(Clone, Copy)]
enum Wave {
    Cos,
    Sin,
}

struct Accumulator<O> {
    a0: O,
    cos: Vec<O>,
    sin: Vec<O>,
}

impl<O: Coefficient> Accumulator<O> {
    fn new(zero: O, order: usize) -> Self {
        Self {
            cos: vec![zero.clone(); order],
            sin: vec![zero.clone(); order],
            a0: zero,
        }
    }

    fn add_cos(&mut self, index: i64, s: f64, c: &O) {
        match index.unsigned_abs() as usize {
            0 => self.a0.add_scaled(s, c),
            i => self.cos[i - 1].add_scaled(s, c),
        }
    }

    fn add_sin(&mut self, index: i64, s: f64, c: &O) {
        match index {
            0 => {}
            i if i > 0 => self.sin[i as usize - 1].add_scaled(s, c),
            i => self.sin[(-i) as usize - 1].add_scaled(-s, c),
        }
    }
}

fn waves<C>(p: &TrigPoly<C>) -> Vec<(Wave, i64, &C)> {
    let mut out = vec![(Wave::Cos, 0, &p.a0)];
    for (i, (a, b)) in p.cos.iter().zip(&p.sin).enumerate() {
        out.push((Wave::Cos, i as i64 + 1, a));
        out.push((Wave::Sin, i as i64 + 1, b));
    }
    out
}

/// Exact product of two trigonometric polynomials via product-to-sum
/// identities. The result has order `p.order + q.order`.
pub fn product<L, R, O>(
    p: &TrigPoly<L>,
    q: &TrigPoly<R>,
    mul: impl Fn(&L, &R) -> O,
) -> Result<TrigPoly<O>>
where
    L: Coefficient,
    R: Coefficient,
    O: Coefficient,
{
    check_frequency(p.omega, q.omega)?;
    let zero = mul(&p.a0, &q.a0).zeros_like();
    let order = p.order() + q.order();
    let mut acc = Accumulator::new(zero, order);
    let wq = waves(q);
    for (kp, i, cp) in waves(p) {
        for &(kq, j, cq) in &wq {
            let c = mul(cp, cq);
            match (kp, kq) {
                (Wave::Cos, Wave::Cos) => {
                    acc.add_cos(i + j, 0.5, &c);
                    acc.add_cos(i - j, 0.5, &c);
                }
                (Wave::Sin, Wave::Sin) => {
                    acc.add_cos(i - j, 0.5, &c);
                    acc.add_cos(i + j, -0.5, &c);
                }
                (Wave::Cos, Wave::Sin) => {
                    acc.add_sin(i + j, 0.5, &c);
                    acc.add_sin(i - j, -0.5, &c);
                }
                (Wave::Sin, Wave::Cos) => {
                    acc.add_sin(i + j, 0.5, &c);
                    acc.add_sin(i - j, 0.5, &c);
                }
            }
        }
    }
    Ok(TrigPoly {
        omega: p.omega,
        a0: acc.a0,
        cos: acc.cos,
        sin: acc.sin,
    })
}

/// `t ↦ A(t) f(t)`, exact, of order `A.order + f.order`.
pub fn trig_apply(a: &MatTrigPoly, f: &VecTrigPoly) -> Result<VecTrigPoly> {
    if a.a0.cols() != f.dim() {
        return Err(Error::dims(format!(
            "matrix polynomial with {} columns applied to {}-vector polynomial",
            a.a0.cols(),
            f.dim()
        )));
    }
    product(a, f, |m, v| m.mul_vec(v))
}

/// `t ↦ A(t) B(t)`, exact, of order `A.order + B.order`.
pub fn trig_mat_product(a: &MatTrigPoly, b: &MatTrigPoly) -> Result<MatTrigPoly> {
    if a.a0.cols() != b.a0.rows() {
        return Err(Error::dims("matrix polynomial product shape mismatch"));
    }
    product(a, b, |x, y| x * y)
}

impl MatTrigPoly {
    pub fn identity(omega: f64, n: usize) -> Result<Self> {
        Self::constant(omega, Matrix::identity(n))
    }

    /// Largest `‖CᵀJ + JC‖` over all coefficients `C`. Zero exactly when
    /// `A(t)` is Hamiltonian for every `t`.
    pub fn hamiltonian_defect(&self, j: &SymplecticForm) -> Result<f64> {
        self.coefficients()
            .map(|c| crate::dense::hamiltonian_defect(c, j))
            .try_fold(0.0, |m, d| Ok(f64::max(m, d?)))
    }
}

impl VecTrigPoly {
    pub fn zero(omega: f64, n: usize) -> Result<Self> {
        Self::constant(omega, vec![0.0; n])
    }
}

#[derive(Serialize)]
struct TrigPolyRef<'a, C> {
    omega: f64,
    order: usize,
    n: usize,
    a0: &'a C,
    cos: &'a [C],
    sin: &'a [C],
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct TrigPolyRepr<C> {
    omega: f64,
    order: usize,
    n: usize,
    a0: C,
    #[serde(default = "Vec::new")]
    cos: Vec<C>,
    #[serde(default = "Vec::new")]
    sin: Vec<C>,
}

impl<C: Coefficient + Serialize> Serialize for TrigPoly<C> {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        TrigPolyRef {
            omega: self.omega,
            order: self.order(),
            n: self.dim(),
            a0: &self.a0,
            cos: &self.cos,
            sin: &self.sin,
        }
        .serialize(s)
    }
}

impl<'de, C: Coefficient + DeserializeOwned> Deserialize<'de> for TrigPoly<C> {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let r = TrigPolyRepr::<C>::deserialize(d)?;
        if r.cos.len() != r.order || r.sin.len() != r.order {
            return Err(D::Error::custom(format!(
                "order {} but {} cos / {} sin coefficients",
                r.order,
                r.cos.len(),
                r.sin.len()
            )));
        }
        if r.a0.dim() != r.n {
            return Err(D::Error::custom(format!(
                "declared n = {} but a0 has dimension {}",
                r.n,
                r.a0.dim()
            )));
        }
        TrigPoly::new(r.omega, r.a0, r.cos, r.sin).map_err(D::Error::custom)
    }
}
