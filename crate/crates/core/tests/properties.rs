use geomint::dense::{self, expm, lin_solve, mat_mul, Matrix, SymplecticForm};
use geomint::lie::{self, bracket, AlgebraSpec, LieElement, MatrixAlgebra, MatrixOrder};
use geomint::trig::{self, MatTrigPoly, VecTrigPoly};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn matrix(n: usize) -> impl Strategy<Value = Matrix> {
    prop::collection::vec(-2.0..2.0f64, n * n).prop_map(move |d| Matrix::from_vec(n, n, d).unwrap())
}

fn spec(algebra: MatrixAlgebra, k: usize, l: usize) -> AlgebraSpec {
    AlgebraSpec {
        algebra,
        n: 4,
        omega: 1.3,
        vector_order: k,
        matrix_order: MatrixOrder::Bounded(l),
    }
}

fn triple(seed: u64, s: &AlgebraSpec) -> (LieElement, LieElement, LieElement) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (
        lie::random_element(&mut rng, s, 2),
        lie::random_element(&mut rng, s, 2),
        lie::random_element(&mut rng, s, 2),
    )
}

fn hamiltonian(s: &Matrix) -> Matrix {
    let sym = (s + &s.transpose()).scaled(0.5);
    let j = SymplecticForm::canonical(s.rows()).unwrap();
    j.matrix() * &sym
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn bracket_is_bilinear(seed in any::<u64>(), a in -2.0..2.0f64, b in -2.0..2.0f64) {
        let (x, y, z) = triple(seed, &spec(MatrixAlgebra::GeneralLinear, 2, 2));
        let lhs = bracket(&LieElement::combine(a, &x, b, &y).unwrap(), &z).unwrap();
        let rhs = LieElement::combine(a, &bracket(&x, &z).unwrap(), b, &bracket(&y, &z).unwrap()).unwrap();
        prop_assert!(LieElement::combine(1.0, &lhs, -1.0, &rhs).unwrap().norm() <= 1e-11);
    }

    #[test]
    fn bracket_antisymmetric_and_jacobi(seed in any::<u64>()) {
        let (x, y, z) = triple(seed, &spec(MatrixAlgebra::Symplectic, 2, 2));
        prop_assert_eq!(bracket(&x, &y).unwrap(), bracket(&y, &x).unwrap().scaled(-1.0));
        prop_assert!(lie::jacobi_defect(&x, &y, &z).unwrap() <= 1e-11);
    }

    #[test]
    fn constant_matrix_subalgebras_close(seed in any::<u64>(), k in 0usize..4) {
        for algebra in [MatrixAlgebra::Symplectic, MatrixAlgebra::GeneralLinear, MatrixAlgebra::Trivial] {
            let s = spec(algebra, k, 0);
            let (x, y, _) = triple(seed, &s);
            let r = lie::closure_check(&x, &y, &s).unwrap();
            prop_assert!(r.passed(), "{:?}", r);
            prop_assert_eq!(r.alpha, 0.0);
        }
    }

    #[test]
    fn trig_product_matches_pointwise(seed in any::<u64>(), t in -20.0..20.0f64) {
        let s = spec(MatrixAlgebra::GeneralLinear, 3, 2);
        let (x, y, _) = triple(seed, &s);
        let prod = trig::trig_mat_product(x.matrix_part(), y.matrix_part()).unwrap();
        let direct = &x.matrix_part().eval(t) * &y.matrix_part().eval(t);
        prop_assert!((&prod.eval(t) - &direct).max_abs() <= 1e-12 * (1.0 + direct.max_abs()));

        let applied: VecTrigPoly = trig::trig_apply(x.matrix_part(), y.vector_part()).unwrap();
        let want = x.matrix_part().eval(t).mul_vec(&y.vector_part().eval(t));
        let got = applied.eval(t);
        for (g, w) in got.iter().zip(&want) {
            prop_assert!((g - w).abs() <= 1e-12 * (1.0 + w.abs()));
        }
    }

    #[test]
    fn derivative_is_linear_and_order_preserving(seed in any::<u64>()) {
        let s = spec(MatrixAlgebra::GeneralLinear, 2, 2);
        let (x, y, _) = triple(seed, &s);
        let p: &MatTrigPoly = x.matrix_part();
        let q = y.matrix_part();
        let lhs = MatTrigPoly::linear_combo(2.0, p, -1.0, q).unwrap().derivative();
        let rhs = MatTrigPoly::linear_combo(2.0, &p.derivative(), -1.0, &q.derivative()).unwrap();
        prop_assert!((&lhs.eval(0.37) - &rhs.eval(0.37)).max_abs() <= 1e-12);
        prop_assert_eq!(p.derivative().order(), p.order());
    }

    #[test]
    fn matmul_associative(a in matrix(4), b in matrix(4), c in matrix(4)) {
        let l = mat_mul(&mat_mul(&a, &b).unwrap(), &c).unwrap();
        let r = mat_mul(&a, &mat_mul(&b, &c).unwrap()).unwrap();
        prop_assert!((&l - &r).max_abs() <= 1e-12 * (1.0 + l.max_abs()));
    }

    #[test]
    fn expm_of_commuting_sum(a in matrix(4), s in -1.5..1.5f64, t in -1.5..1.5f64) {
        let lhs = expm(&a.scaled(s + t)).unwrap();
        let rhs = &expm(&a.scaled(s)).unwrap() * &expm(&a.scaled(t)).unwrap();
        prop_assert!((&lhs - &rhs).max_abs() <= 1e-10 * (1.0 + lhs.max_abs()));
    }

    #[test]
    fn expm_of_hamiltonian_is_symplectic(s in matrix(4)) {
        let a = hamiltonian(&s).scaled(0.25);
        let j = SymplecticForm::canonical(4).unwrap();
        prop_assert!(dense::hamiltonian_defect(&a, &j).unwrap() <= 1e-14);
        for t in [0.1, 1.0, 10.0] {
            let m = expm(&a.scaled(t)).unwrap();
            let scale = m.frobenius_norm().powi(2).max(1.0);
            prop_assert!(dense::symplectic_defect(&m, &j).unwrap() <= 1e-11 * scale, "t={}", t);
        }
    }

    #[test]
    fn lin_solve_residual(a in matrix(5), b in matrix(5)) {
        let shifted = &a + &Matrix::identity(5).scaled(12.0);
        let x = lin_solve(&shifted, &b).unwrap();
        let r = &(&shifted * &x) - &b;
        prop_assert!(r.max_abs() <= 1e-12 * (1.0 + b.max_abs()));
    }
}
