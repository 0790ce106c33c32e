//! The Lie algebra of affine, Ω-periodic vector fields on the extended
//! phase space.
//!
//! An element `(A, f, α)` stands for the field `X(x, t) = (A(t)x + f(t), α)`.
//! The bracket is the one induced by `[X, Y] = DX·Y − DY·X`, which for
//! constant linear fields reduces to the matrix commutator `AB − BA`:
//!
//! ```text
//! [(A, f, α), (B, g, β)] = (AB − BA + βA′ − αB′,  Ag − Bf + βf′ − αg′,  0)
//! ```

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::dense::{Matrix, SymplecticForm};
use crate::error::{Error, Result};
use crate::trig::{self, Coefficient, MatTrigPoly, TrigPoly, VecTrigPoly};

/// Number of equispaced samples per period used for matrix-algebra membership.
pub const MEMBERSHIP_SAMPLES: usize = 16;
/// Tolerance for the Hamiltonian defect of bracket matrix parts.
pub const MEMBERSHIP_TOL: f64 = 1e-11;

/// Coefficient of `[Z, [Z, Y]]` in the `h²` term of the symmetric BCH
/// expansion of `φ_Y^{h/2} ∘ φ_Z^h ∘ φ_Y^{h/2}`.
pub const BCH_ZZY: f64 = 1.0 / 12.0;
/// Coefficient of `[Y, [Y, Z]]` in the same expansion.
pub const BCH_YYZ: f64 = -1.0 / 24.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "LieElementRepr", into = "LieElementRepr")]
pub struct LieElement {
    a: MatTrigPoly,
    f: VecTrigPoly,
    alpha: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct LieElementRepr {
    #[serde(rename = "A")]
    a: MatTrigPoly,
    f: VecTrigPoly,
    alpha: f64,
}

impl TryFrom<LieElementRepr> for LieElement {
    type Error = Error;
    fn try_from(r: LieElementRepr) -> Result<Self> {
        LieElement::new(r.a, r.f, r.alpha)
    }
}

impl From<LieElement> for LieElementRepr {
    fn from(e: LieElement) -> Self {
        Self {
            a: e.a,
            f: e.f,
            alpha: e.alpha,
        }
    }
}

impl LieElement {
    pub fn new(a: MatTrigPoly, f: VecTrigPoly, alpha: f64) -> Result<Self> {
        if !trig::frequencies_match(a.omega(), f.omega()) {
            return Err(Error::FrequencyMismatch(a.omega(), f.omega()));
        }
        let (rows, cols) = a.a0().shape();
        if rows != cols || cols != f.dim() {
            return Err(Error::dims(format!(
                "matrix part is {rows}x{cols} but vector part has dimension {}",
                f.dim()
            )));
        }
        if !alpha.is_finite() {
            return Err(Error::NonFinite("alpha"));
        }
        Ok(Self { a, f, alpha })
    }

    pub fn zero(omega: f64, n: usize) -> Result<Self> {
        Self::new(
            MatTrigPoly::constant(omega, Matrix::zeros(n, n))?,
            VecTrigPoly::zero(omega, n)?,
            0.0,
        )
    }

    pub fn matrix_part(&self) -> &MatTrigPoly {
        &self.a
    }

    pub fn vector_part(&self) -> &VecTrigPoly {
        &self.f
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn omega(&self) -> f64 {
        self.a.omega()
    }

    pub fn dim(&self) -> usize {
        self.f.dim()
    }

    /// `X(x, t) = (A(t)x + f(t), α)`.
    pub fn eval_field(&self, x: &[f64], t: f64) -> Result<(Vec<f64>, f64)> {
        let mut v = self.a.eval(t).try_mul_vec(x)?;
        v.add_scaled(1.0, &self.f.eval(t));
        Ok((v, self.alpha))
    }

    /// `a·X + b·Y`.
    pub fn combine(a: f64, x: &Self, b: f64, y: &Self) -> Result<Self> {
        x.check_compatible(y)?;
        Self::new(
            TrigPoly::linear_combo(a, &x.a, b, &y.a)?,
            TrigPoly::linear_combo(a, &x.f, b, &y.f)?,
            a * x.alpha + b * y.alpha,
        )
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self {
            a: self.a.scaled(s),
            f: self.f.scaled(s),
            alpha: s * self.alpha,
        }
    }

    /// Sup of the coefficient norms of both parts, plus `|α|`.
    pub fn norm(&self) -> f64 {
        self.a.coeff_norm().max(self.f.coeff_norm()) + self.alpha.abs()
    }

    pub fn is_zero(&self) -> bool {
        self.a.is_zero() && self.f.is_zero() && self.alpha == 0.0
    }

    fn check_compatible(&self, other: &Self) -> Result<()> {
        if !trig::frequencies_match(self.omega(), other.omega()) {
            return Err(Error::FrequencyMismatch(self.omega(), other.omega()));
        }
        if self.dim() != other.dim() {
            return Err(Error::dims(format!(
                "elements on spaces of dimension {} and {}",
                self.dim(),
                other.dim()
            )));
        }
        Ok(())
    }
}

// Half of the bracket: (AB + βA′, Ag + βf′). The bracket is
// `half(X, Y) − half(Y, X)`, which makes it antisymmetric bit for bit.
fn half_bracket(x: &LieElement, y: &LieElement) -> Result<(MatTrigPoly, VecTrigPoly)> {
    let beta = y.alpha;
    let ab = trig::trig_mat_product(&x.a, &y.a)?;
    let m = TrigPoly::linear_combo(1.0, &ab, beta, &x.a.derivative())?;
    let ag = trig::trig_apply(&x.a, &y.f)?;
    let v = TrigPoly::linear_combo(1.0, &ag, beta, &x.f.derivative())?;
    Ok((m, v))
}

/// `[X, Y]`, computed exactly in trigonometric-polynomial arithmetic.
pub fn bracket(x: &LieElement, y: &LieElement) -> Result<LieElement> {
    x.check_compatible(y)?;
    let (mxy, vxy) = half_bracket(x, y)?;
    let (myx, vyx) = half_bracket(y, x)?;
    LieElement::new(
        TrigPoly::linear_combo(1.0, &mxy, -1.0, &myx)?,
        TrigPoly::linear_combo(1.0, &vxy, -1.0, &vyx)?,
        0.0,
    )
}

/// Norm of `[X,[Y,Z]] + [Y,[Z,X]] + [Z,[X,Y]]`.
pub fn jacobi_defect(x: &LieElement, y: &LieElement, z: &LieElement) -> Result<f64> {
    let t1 = bracket(x, &bracket(y, z)?)?;
    let t2 = bracket(y, &bracket(z, x)?)?;
    let t3 = bracket(z, &bracket(x, y)?)?;
    let s = LieElement::combine(1.0, &t1, 1.0, &t2)?;
    Ok(LieElement::combine(1.0, &s, 1.0, &t3)?.norm())
}

/// The matrix Lie algebra the `A`-part lives in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MatrixAlgebra {
    GeneralLinear,
    /// Hamiltonian matrices for the canonical form on an even-dimensional space.
    Symplectic,
    /// The zero algebra `{0}`.
    Trivial,
}

impl MatrixAlgebra {
    pub fn dimension(self, n: usize) -> usize {
        match self {
            MatrixAlgebra::GeneralLinear => n * n,
            MatrixAlgebra::Symplectic => {
                let d = n / 2;
                d * (2 * d + 1)
            }
            MatrixAlgebra::Trivial => 0,
        }
    }

    /// Defect of a single matrix from the algebra; `None` for `gl(n)`, where
    /// every matrix qualifies.
    pub fn defect(self, m: &Matrix) -> Result<Option<f64>> {
        match self {
            MatrixAlgebra::GeneralLinear => Ok(None),
            MatrixAlgebra::Symplectic => {
                let j = SymplecticForm::canonical(m.rows())?;
                crate::dense::hamiltonian_defect(m, &j).map(Some)
            }
            MatrixAlgebra::Trivial => Ok(Some(m.frobenius_norm())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MatrixOrder {
    Bounded(usize),
    Unbounded,
}

/// Identifies a sub-space `C_{Ω,l}(𝔤) × C_{Ω,k}(ℝⁿ) × ℝ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AlgebraSpec {
    pub algebra: MatrixAlgebra,
    pub n: usize,
    pub omega: f64,
    pub vector_order: usize,
    pub matrix_order: MatrixOrder,
}

/// `dim 𝔤 + (2k + 1)n + 1` for a constant-matrix sub-algebra.
pub fn dimension(spec: &AlgebraSpec) -> Result<usize> {
    match spec.matrix_order {
        MatrixOrder::Unbounded => Err(Error::InfiniteDimension),
        MatrixOrder::Bounded(0) => Ok(spec.algebra.dimension(spec.n)
            + (2 * spec.vector_order + 1) * spec.n
            + 1),
        MatrixOrder::Bounded(l) => Err(Error::invalid(format!(
            "matrix order {l} does not give a sub-algebra; only l = 0 has a finite dimension formula"
        ))),
    }
}

/// Outcome of [`closure_check`] (also used for plain membership).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClosureReport {
    /// Largest defect of sampled `A(t)` from 𝔤; `None` when 𝔤 = 𝔤𝔩(n).
    pub algebra_defect: Option<f64>,
    pub in_algebra: bool,
    pub matrix_order: usize,
    pub matrix_order_ok: bool,
    pub vector_order: usize,
    pub vector_order_ok: bool,
    pub alpha: f64,
    pub alpha_ok: bool,
}

impl ClosureReport {
    pub fn passed(&self) -> bool {
        self.in_algebra && self.matrix_order_ok && self.vector_order_ok && self.alpha_ok
    }
}

fn order_tol<C: Coefficient>(p: &TrigPoly<C>) -> f64 {
    1e-12 * p.coeff_norm().max(1.0)
}

/// Sample times `iT/16`, `i = 0..16`, over one period `T = 2π/Ω`.
pub fn membership_times(omega: f64) -> Vec<f64> {
    let period = 2.0 * std::f64::consts::PI / omega;
    (0..MEMBERSHIP_SAMPLES)
        .map(|i| i as f64 * period / MEMBERSHIP_SAMPLES as f64)
        .collect()
}

/// Largest defect of `A(t)` from the matrix algebra over [`membership_times`].
pub fn sampled_algebra_defect(a: &MatTrigPoly, algebra: MatrixAlgebra) -> Result<Option<f64>> {
    let mut worst: Option<f64> = None;
    for t in membership_times(a.omega()) {
        if let Some(d) = algebra.defect(&a.eval(t))? {
            worst = Some(worst.map_or(d, |w| w.max(d)));
        }
    }
    Ok(worst)
}

fn report(el: &LieElement, spec: &AlgebraSpec, require_zero_alpha: bool) -> Result<ClosureReport> {
    if el.dim() != spec.n {
        return Err(Error::dims(format!(
            "element on ℝ^{} checked against a spec on ℝ^{}",
            el.dim(),
            spec.n
        )));
    }
    if !trig::frequencies_match(el.omega(), spec.omega) {
        return Err(Error::FrequencyMismatch(el.omega(), spec.omega));
    }
    let algebra_defect = sampled_algebra_defect(&el.a, spec.algebra)?;
    let matrix_order = el.a.effective_order(order_tol(&el.a));
    let vector_order = el.f.effective_order(order_tol(&el.f));
    Ok(ClosureReport {
        algebra_defect,
        in_algebra: algebra_defect.is_none_or(|d| d <= MEMBERSHIP_TOL),
        matrix_order,
        matrix_order_ok: match spec.matrix_order {
            MatrixOrder::Bounded(l) => matrix_order <= l,
            MatrixOrder::Unbounded => true,
        },
        vector_order,
        vector_order_ok: vector_order <= spec.vector_order,
        alpha: el.alpha,
        alpha_ok: !require_zero_alpha || el.alpha == 0.0,
    })
}

/// Checks that `el` lies in the sub-space described by `spec`.
pub fn membership(el: &LieElement, spec: &AlgebraSpec) -> Result<ClosureReport> {
    report(el, spec, false)
}

/// Computes `[X, Y]` and checks that it stays in the sub-space `spec`.
pub fn closure_check(x: &LieElement, y: &LieElement, spec: &AlgebraSpec) -> Result<ClosureReport> {
    report(&bracket(x, y)?, spec, true)
}

/// Terms `(order, element)` of the modified field of the Strang composition
/// `φ_Y^{h/2} ∘ φ_Z^h ∘ φ_Y^{h/2}`, truncated after `h²`.
///
/// The modified field is `Σ h^order · element`.
pub fn bch_modified_element(
    y: &LieElement,
    z: &LieElement,
    _h: f64,
) -> Result<Vec<(u32, LieElement)>> {
    let leading = LieElement::combine(1.0, y, 1.0, z)?;
    let zzy = bracket(z, &bracket(z, y)?)?;
    let yyz = bracket(y, &bracket(y, z)?)?;
    let second = LieElement::combine(BCH_ZZY, &zzy, BCH_YYZ, &yyz)?;
    Ok(vec![(0, leading), (2, second)])
}

/// Sums the truncated BCH series at step size `h`.
pub fn bch_modified_field(y: &LieElement, z: &LieElement, h: f64) -> Result<LieElement> {
    let terms = bch_modified_element(y, z, h)?;
    let mut acc = LieElement::zero(y.omega(), y.dim())?;
    for (order, term) in &terms {
        acc = LieElement::combine(1.0, &acc, h.powi(*order as i32), term)?;
    }
    Ok(acc)
}

fn random_coefficient<R: Rng + ?Sized>(rng: &mut R, algebra: MatrixAlgebra, n: usize) -> Matrix {
    match algebra {
        MatrixAlgebra::GeneralLinear => Matrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0)),
        MatrixAlgebra::Symplectic => {
            let j = SymplecticForm::canonical(n).expect("symplectic spec on odd dimension");
            let s = Matrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
            j.matrix() * &(&s + &s.transpose()).scaled(0.5)
        }
        MatrixAlgebra::Trivial => Matrix::zeros(n, n),
    }
}

/// Draws an element of `spec` with coefficients uniform in `[-1, 1]`.
///
/// For an unbounded matrix order, matrix parts of order `fallback_order` are drawn.
pub fn random_element<R: Rng + ?Sized>(
    rng: &mut R,
    spec: &AlgebraSpec,
    fallback_order: usize,
) -> LieElement {
    let l = match spec.matrix_order {
        MatrixOrder::Bounded(l) => l,
        MatrixOrder::Unbounded => fallback_order,
    };
    let n = spec.n;
    let a0 = random_coefficient(rng, spec.algebra, n);
    let a_cos = (0..l).map(|_| random_coefficient(rng, spec.algebra, n)).collect();
    let a_sin = (0..l).map(|_| random_coefficient(rng, spec.algebra, n)).collect();
    let vec = |rng: &mut R| (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect::<Vec<f64>>();
    let f0 = vec(rng);
    let f_cos = (0..spec.vector_order).map(|_| vec(rng)).collect();
    let f_sin = (0..spec.vector_order).map(|_| vec(rng)).collect();
    let alpha = rng.gen_range(-1.0..1.0);
    LieElement::new(
        MatTrigPoly::new(spec.omega, a0, a_cos, a_sin).expect("valid random matrix part"),
        VecTrigPoly::new(spec.omega, f0, f_cos, f_sin).expect("valid random vector part"),
        alpha,
    )
    .expect("consistent random element")
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    const OMEGA: f64 = 1.02;

    fn sp4(k: usize, l: MatrixOrder) -> AlgebraSpec {
        AlgebraSpec {
            algebra: MatrixAlgebra::Symplectic,
            n: 4,
            omega: OMEGA,
            vector_order: k,
            matrix_order: l,
        }
    }

    fn gl(n: usize, k: usize, l: usize) -> AlgebraSpec {
        AlgebraSpec {
            algebra: MatrixAlgebra::GeneralLinear,
            n,
            omega: OMEGA,
            vector_order: k,
            matrix_order: MatrixOrder::Bounded(l),
        }
    }

    fn const_el(a: Matrix, f: Vec<f64>, alpha: f64) -> LieElement {
        LieElement::new(
            MatTrigPoly::constant(OMEGA, a).unwrap(),
            VecTrigPoly::constant(OMEGA, f).unwrap(),
            alpha,
        )
        .unwrap()
    }

    fn rotor_element() -> LieElement {
        let a = Matrix::from_rows(&[
            [0.0, 0.0, 1.0, 0.0],
            [0.0, 0.0, 0.0, 1.0],
            [-1.0, 0.0, 0.0, 0.0],
            [0.0, -1.0, 0.0, 0.0],
        ])
        .unwrap();
        let amp = 0.1 * OMEGA * OMEGA;
        let f = VecTrigPoly::new(
            OMEGA,
            vec![0.0; 4],
            vec![vec![0.0, 0.0, -amp, 0.0]],
            vec![vec![0.0, 0.0, 0.0, amp]],
        )
        .unwrap();
        LieElement::new(MatTrigPoly::constant(OMEGA, a).unwrap(), f, 1.0).unwrap()
    }

    #[test]
    fn new_rejects_inconsistent_parts() {
        let a = MatTrigPoly::constant(OMEGA, Matrix::zeros(3, 3)).unwrap();
        assert!(LieElement::new(a.clone(), VecTrigPoly::zero(OMEGA, 2).unwrap(), 0.0).is_err());
        assert!(LieElement::new(a, VecTrigPoly::zero(2.0, 3).unwrap(), 0.0).is_err());
    }

    #[test]
    fn eval_field_cases() {
        let time_flow = const_el(Matrix::zeros(2, 2), vec![0.0; 2], 1.0);
        assert_eq!(time_flow.eval_field(&[3.0, 4.0], 1.5).unwrap(), (vec![0.0, 0.0], 1.0));

        let (v, a) = rotor_element().eval_field(&[0.0; 4], 0.0).unwrap();
        assert_eq!(a, 1.0);
        assert!((v[2] + 0.104040).abs() < 1e-15);
        assert_eq!([v[0], v[1], v[3]], [0.0, 0.0, 0.0]);

        let mut rng = ChaCha8Rng::seed_from_u64(20);
        let el = random_element(&mut rng, &gl(3, 2, 1), 0);
        let x = [0.3, -1.0, 2.0];
        let t = 0.77;
        let (v, _) = el.eval_field(&x, t).unwrap();
        let a = el.matrix_part().eval(t);
        let f = el.vector_part().eval(t);
        for i in 0..3 {
            let want = (0..3).map(|j| a[(i, j)] * x[j]).sum::<f64>() + f[i];
            assert!((v[i] - want).abs() < 1e-15);
        }
        assert!(el.eval_field(&[1.0], 0.0).is_err());
    }

    #[test]
    fn bracket_basic_cases() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let x = random_element(&mut rng, &gl(3, 2, 2), 0);
        assert!(bracket(&x, &x).unwrap().is_zero());

        let a = Matrix::from_fn(3, 3, |i, j| (i * 3 + j) as f64 * 0.1);
        let b = Matrix::from_fn(3, 3, |i, j| if i == j { 0.0 } else { (i + 2 * j) as f64 });
        let br = bracket(&const_el(a.clone(), vec![0.0; 3], 0.0), &const_el(b.clone(), vec![0.0; 3], 0.0))
            .unwrap();
        let comm = crate::dense::mat_commutator(&a, &b).unwrap();
        assert_eq!(br.matrix_part().a0(), &comm);
        assert!(br.vector_part().is_zero());
        assert_eq!(br.alpha(), 0.0);
    }

    #[test]
    fn bracket_of_forcing_with_time_flow() {
        // X = (0, cos(Ωt) e1, 0), Y = (0, 0, 1)  =>  [X, Y] = (0, f′, 0)
        let n = 2;
        let zero_a = MatTrigPoly::constant(OMEGA, Matrix::zeros(n, n)).unwrap();
        let f = VecTrigPoly::new(OMEGA, vec![0.0; n], vec![vec![1.0, 0.0]], vec![vec![0.0; n]])
            .unwrap();
        let x = LieElement::new(zero_a.clone(), f, 0.0).unwrap();
        let y = LieElement::new(zero_a, VecTrigPoly::zero(OMEGA, n).unwrap(), 1.0).unwrap();
        let br = bracket(&x, &y).unwrap();
        assert!(br.matrix_part().is_zero());
        assert_eq!(br.vector_part().cos_coeffs()[0], vec![0.0, 0.0]);
        assert_eq!(br.vector_part().sin_coeffs()[0], vec![-OMEGA, 0.0]);
    }

    #[test]
    fn bracket_antisymmetric_and_alpha_free() {
        let mut rng = ChaCha8Rng::seed_from_u64(22);
        for _ in 0..10 {
            let x = random_element(&mut rng, &gl(3, 2, 2), 0);
            let y = random_element(&mut rng, &gl(3, 1, 1), 0);
            let xy = bracket(&x, &y).unwrap();
            let yx = bracket(&y, &x).unwrap();
            assert!(LieElement::combine(1.0, &xy, 1.0, &yx).unwrap().is_zero());
            assert_eq!(xy.alpha(), 0.0);
        }
    }

    #[test]
    fn jacobi_cases() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let x = random_element(&mut rng, &gl(3, 2, 2), 0);
        let y = random_element(&mut rng, &gl(3, 2, 2), 0);
        assert!(jacobi_defect(&x, &x, &y).unwrap() <= 1e-12);

        let c = gl(4, 0, 0);
        let (a, b, d) = (
            random_element(&mut rng, &c, 0),
            random_element(&mut rng, &c, 0),
            random_element(&mut rng, &c, 0),
        );
        assert!(jacobi_defect(&a, &b, &d).unwrap() <= 1e-12);

        let z = random_element(&mut rng, &gl(3, 2, 2), 0);
        assert!(jacobi_defect(&x, &y, &z).unwrap() <= 1e-11);
    }

    #[test]
    fn flipped_alpha_sign_breaks_antisymmetry() {
        // The bracket variant with `+αB′` violates the Jacobi identity.
        fn plus_variant(x: &LieElement, y: &LieElement) -> LieElement {
            let (a, f, al) = (x.matrix_part(), x.vector_part(), x.alpha());
            let (b, g, be) = (y.matrix_part(), y.vector_part(), y.alpha());
            let ab = trig::trig_mat_product(a, b).unwrap();
            let ba = trig::trig_mat_product(b, a).unwrap();
            let mut m = TrigPoly::linear_combo(1.0, &ab, -1.0, &ba).unwrap();
            m = TrigPoly::linear_combo(1.0, &m, be, &a.derivative()).unwrap();
            m = TrigPoly::linear_combo(1.0, &m, al, &b.derivative()).unwrap();
            let mut v = TrigPoly::linear_combo(
                1.0,
                &trig::trig_apply(a, g).unwrap(),
                -1.0,
                &trig::trig_apply(b, f).unwrap(),
            )
            .unwrap();
            v = TrigPoly::linear_combo(1.0, &v, be, &f.derivative()).unwrap();
            v = TrigPoly::linear_combo(1.0, &v, -al, &g.derivative()).unwrap();
            LieElement::new(m, v, 0.0).unwrap()
        }
        let mut rng = ChaCha8Rng::seed_from_u64(24);
        let s = gl(2, 1, 1);
        let x = random_element(&mut rng, &s, 0);
        let y = random_element(&mut rng, &s, 0);
        assert!(!LieElement::combine(1.0, &plus_variant(&x, &y), 1.0, &plus_variant(&y, &x))
            .unwrap()
            .is_zero());
    }

    #[test]
    fn dimension_formula() {
        let rotor = sp4(1, MatrixOrder::Bounded(0));
        assert_eq!(dimension(&rotor).unwrap(), 23);
        assert_eq!(dimension(&gl(5, 0, 0)).unwrap(), 25 + 5 + 1);
        let trivial = AlgebraSpec {
            algebra: MatrixAlgebra::Trivial,
            ..gl(3, 0, 0)
        };
        assert_eq!(dimension(&trivial).unwrap(), 3 + 1);
        assert_eq!(
            dimension(&sp4(1, MatrixOrder::Unbounded)),
            Err(Error::InfiniteDimension)
        );
        assert!(dimension(&gl(3, 1, 2)).is_err());
        assert_eq!(MatrixAlgebra::Symplectic.dimension(6), 21);
    }

    #[test]
    fn closure_in_constant_symplectic_subalgebra() {
        let spec = sp4(1, MatrixOrder::Bounded(0));
        let mut rng = ChaCha8Rng::seed_from_u64(25);
        let rotor = rotor_element();
        assert!(membership(&rotor, &spec).unwrap().passed());
        for _ in 0..10 {
            let x = random_element(&mut rng, &spec, 0);
            let y = random_element(&mut rng, &spec, 0);
            assert!(membership(&x, &spec).unwrap().passed());
            let r = closure_check(&x, &y, &spec).unwrap();
            assert!(r.passed(), "{r:?}");
            assert!(closure_check(&rotor, &x, &spec).unwrap().passed());
        }
        let same = closure_check(&rotor, &rotor, &spec).unwrap();
        assert!(same.passed());
        assert_eq!(same.matrix_order, 0);
    }

    #[test]
    fn time_varying_matrix_part_escapes_order_bound() {
        let spec = gl(2, 1, 1);
        let c = Matrix::from_rows(&[[0.0, 1.0], [0.0, 0.0]]).unwrap();
        let d = Matrix::from_rows(&[[0.0, 0.0], [1.0, 0.0]]).unwrap();
        let z = Matrix::zeros(2, 2);
        let a = MatTrigPoly::new(OMEGA, z.clone(), vec![c], vec![z.clone()]).unwrap();
        let b = MatTrigPoly::new(OMEGA, z.clone(), vec![z], vec![d]).unwrap();
        let x = LieElement::new(a, VecTrigPoly::zero(OMEGA, 2).unwrap(), 0.0).unwrap();
        let y = LieElement::new(b, VecTrigPoly::zero(OMEGA, 2).unwrap(), 0.0).unwrap();
        let r = closure_check(&x, &y, &spec).unwrap();
        assert_eq!(r.matrix_order, 2);
        assert!(!r.matrix_order_ok);
        assert!(!r.passed());
    }

    #[test]
    fn closure_detects_non_hamiltonian_matrix() {
        let spec = sp4(0, MatrixOrder::Bounded(0));
        let bad = const_el(Matrix::identity(4), vec![0.0; 4], 0.0);
        let m = membership(&bad, &spec).unwrap();
        assert!(!m.in_algebra);
        assert!(m.algebra_defect.unwrap() > 1.0);
        let x = const_el(
            Matrix::from_fn(4, 4, |i, j| if i == 0 && j == 0 { 1.0 } else { 0.0 }),
            vec![0.0; 4],
            0.0,
        );
        let y = const_el(
            Matrix::from_fn(4, 4, |i, j| if i == 0 && j == 1 { 1.0 } else { 0.0 }),
            vec![0.0; 4],
            0.0,
        );
        let r = closure_check(&x, &y, &spec).unwrap();
        assert!(!r.in_algebra);
    }

    #[test]
    fn bch_leading_term_and_commuting_case() {
        let rotor = rotor_element();
        let (y, z) = split(&rotor);
        let terms = bch_modified_element(&y, &z, 0.1).unwrap();
        assert_eq!(terms[0].0, 0);
        assert_eq!(terms[0].1, LieElement::combine(1.0, &y, 1.0, &z).unwrap());
        assert_eq!(terms[1].0, 2);
        assert!(!terms[1].1.is_zero());

        let y2 = y.scaled(2.5);
        let terms = bch_modified_element(&y, &y2, 0.1).unwrap();
        assert!(terms[1].1.is_zero());
    }

    fn split(el: &LieElement) -> (LieElement, LieElement) {
        let n = el.dim();
        let y = LieElement::new(
            el.matrix_part().clone(),
            VecTrigPoly::zero(el.omega(), n).unwrap(),
            0.0,
        )
        .unwrap();
        let z = LieElement::new(
            MatTrigPoly::constant(el.omega(), Matrix::zeros(n, n)).unwrap(),
            el.vector_part().clone(),
            1.0,
        )
        .unwrap();
        (y, z)
    }

    #[test]
    fn json_roundtrip_and_validation() {
        let el = rotor_element();
        let s = serde_json::to_string(&el).unwrap();
        assert!(s.starts_with(r#"{"A":{"omega":1.02"#));
        assert!(s.ends_with(r#""alpha":1.0}"#));
        let back: LieElement = serde_json::from_str(&s).unwrap();
        assert_eq!(back, el);
        let bad = s.replace(r#""n":4,"a0":[0.0,0.0,0.0,0.0]"#, r#""n":3,"a0":[0.0,0.0,0.0]"#);
        assert!(serde_json::from_str::<LieElement>(&bad).is_err());
    }
}
