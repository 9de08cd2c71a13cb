use std::f64::consts::PI;

use nalgebra::DMatrix;
use pg_core::classes::*;
use pg_core::connection::{canonical_poisson_connection, curvature_operator, levi_civita_contra, ConnectionKind, ConnectionSymbols, Metric};
use pg_core::fixtures;
use pg_core::matrix::SquareMatrix;
use pg_core::multivec::{MultiVectorField, PoissonStructure};
use pg_core::sampling::{random_polynomial, rng, sample_points, Region};
use pg_core::{Error, Expr};
use proptest::prelude::*;
use rand::Rng;

/// Measured ratio between the direct secondary class and the closed Lie-Poisson form at k = 2.
const RHO_2: f64 = 1.0 / 6.0;

#[test]
fn pinned_ratios() {
    assert_eq!(lie_poisson_ratio(1), Some(1.0));
    assert_eq!(lie_poisson_ratio(2), Some(RHO_2));
    assert_eq!(lie_poisson_ratio(3), None);
}

fn from_dmatrix(m: &DMatrix<f64>) -> SquareMatrix<f64> {
    SquareMatrix::from_fn(m.nrows(), |i, j| m[(i, j)])
}

fn random_matrix(n: usize, r: &mut impl Rng) -> DMatrix<f64> {
    DMatrix::from_fn(n, n, |_, _| r.gen_range(-1.0..1.0))
}

/// `e_k` of the eigenvalues, by expanding `Π (1 + λ_i s)`.
fn elementary_symmetric(eigs: &[f64], k: usize) -> f64 {
    let mut e = vec![0.0; eigs.len() + 1];
    e[0] = 1.0;
    for &l in eigs {
        for j in (1..e.len()).rev() {
            e[j] += l * e[j - 1];
        }
    }
    e[k]
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

fn lie_fixtures() -> Vec<(&'static str, LieAlgebra)> {
    vec![
        ("aff1", LieAlgebra::aff1()),
        ("so3", LieAlgebra::so3()),
        ("sl2", LieAlgebra::sl2()),
        ("solvable3", LieAlgebra::solvable3()),
        ("so3+aff1", LieAlgebra::so3().direct_sum(&LieAlgebra::aff1())),
    ]
}

fn residual(a: &MultiVectorField, b: &MultiVectorField, pts: &[Vec<f64>]) -> f64 {
    a.minus(b).max_abs_over(pts).unwrap()
}

#[test]
fn sigma_examples() {
    let two_pi = 2.0 * PI;
    let a = from_dmatrix(&DMatrix::from_row_slice(2, 2, &[1.0, 2.0, -0.5, 3.0]));
    assert!((sigma_polarized(&[a.clone()]).unwrap() - 4.0 / two_pi).abs() < 1e-15);

    for m in 1..=4 {
        let id = SquareMatrix::<f64>::identity(m);
        for k in 1..=m {
            let v = sigma_polarized(&vec![id.clone(); k]).unwrap();
            assert!((v - binomial(m, k) / two_pi.powi(k as i32)).abs() < 1e-14);
        }
    }

    let d = from_dmatrix(&DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![1.0, 2.0, 3.0])));
    assert!((sigma_polarized(&[d.clone(), d.clone(), d.clone()]).unwrap() - 6.0 / two_pi.powi(3)).abs() < 1e-15);
    assert!((sigma_polarized(&[d.clone(), d.clone()]).unwrap() - 11.0 / two_pi.powi(2)).abs() < 1e-15);
    assert_eq!(sigma_polarized::<f64>(&[]).unwrap(), 1.0);
    assert!(matches!(sigma_polarized(&[d, a]), Err(Error::DimensionMismatch { .. })));
}

#[test]
fn p3_closed_form_of_identity() {
    let id = SquareMatrix::<f64>::identity(3);
    let v = p3_closed_form(&id, &id, &id);
    assert!((v - 1.0 / (8.0 * PI.powi(3))).abs() < 1e-15);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn sigma_diagonal_matches_eigenvalues(seed in any::<u64>(), n in 1usize..6) {
        let mut r = rng(seed);
        let b = random_matrix(n, &mut r);
        let sym = &b + b.transpose();
        let eigs: Vec<f64> = sym.clone().symmetric_eigen().eigenvalues.iter().map(|l| l / (2.0 * PI)).collect();
        let a = from_dmatrix(&sym);
        for k in 1..=n {
            let v = sigma_polarized(&vec![a.clone(); k]).unwrap();
            let e = elementary_symmetric(&eigs, k);
            prop_assert!((v - e).abs() <= 1e-12 * e.abs().max(1.0), "k={k}: {v} vs {e}");
        }
    }

    #[test]
    fn p3_matches_polarization(seed in any::<u64>(), n in 2usize..6) {
        let mut r = rng(seed);
        let m: Vec<_> = (0..3).map(|_| from_dmatrix(&random_matrix(n, &mut r))).collect();
        let a = sigma_polarized(&m).unwrap();
        let b = p3_closed_form(&m[0], &m[1], &m[2]);
        prop_assert!((a - b).abs() <= 1e-12, "{a} vs {b}");
    }

    #[test]
    fn polarization_is_symmetric_and_multilinear(seed in any::<u64>()) {
        let mut r = rng(seed);
        let m: Vec<_> = (0..4).map(|_| from_dmatrix(&random_matrix(4, &mut r))).collect();
        let base = sigma_polarized(&m[..3]).unwrap();
        let swapped = sigma_polarized(&[m[2].clone(), m[0].clone(), m[1].clone()]).unwrap();
        prop_assert!((base - swapped).abs() <= 1e-14);
        let c = r.gen_range(-2.0..2.0);
        let mixed = m[0].scale(&c).plus(&m[3]);
        let lhs = sigma_polarized(&[mixed, m[1].clone(), m[2].clone()]).unwrap();
        let rhs = c * base + sigma_polarized(&[m[3].clone(), m[1].clone(), m[2].clone()]).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-13);
    }

    #[test]
    fn k2_is_symmetric_and_linear(seed in any::<u64>()) {
        let mut r = rng(seed);
        for (_, g) in lie_fixtures() {
            let n = g.dim();
            let v: Vec<Vec<f64>> = (0..3).map(|_| (0..n).map(|_| r.gen_range(-1.0..1.0)).collect()).collect();
            let k = |a: &[f64], b: &[f64]| k_form(&g, &[a.to_vec(), b.to_vec()]);
            prop_assert!((k(&v[0], &v[1]) - k(&v[1], &v[0])).abs() <= 1e-12);
            let sum: Vec<f64> = (0..n).map(|i| 2.0 * v[0][i] - v[2][i]).collect();
            prop_assert!((k(&sum, &v[1]) - 2.0 * k(&v[0], &v[1]) + k(&v[2], &v[1])).abs() <= 1e-12);
        }
    }
}

#[test]
fn killing_form_of_so3() {
    let g = LieAlgebra::so3();
    for i in 0..3 {
        for j in 0..3 {
            let ei: Vec<f64> = (0..3).map(|a| if a == i { 1.0 } else { 0.0 }).collect();
            let ej: Vec<f64> = (0..3).map(|a| if a == j { 1.0 } else { 0.0 }).collect();
            let expect = if i == j { -2.0 } else { 0.0 };
            assert!((k_form(&g, &[ei, ej]) - expect).abs() < 1e-15);
        }
    }
}

#[test]
fn gauss_legendre_integrates_polynomials_exactly() {
    for n in 1..=6 {
        let rule = gauss_legendre(n);
        assert!((rule.iter().map(|(_, w)| w).sum::<f64>() - 1.0).abs() < 1e-14);
        for p in 0..2 * n {
            let q: f64 = rule.iter().map(|(x, w)| w * x.powi(p as i32)).sum();
            assert!((q - 1.0 / (p + 1) as f64).abs() < 1e-14, "n={n} p={p}");
        }
    }
}

#[test]
fn first_class_examples() {
    let pts = sample_points(&Region::cube(3), 20, 0);
    assert!(m1_euclidean(&fixtures::so3()).max_abs_over(&pts).unwrap() == 0.0);
    assert!(m1_euclidean(&fixtures::symplectic_r2()).is_zero());

    let aff = m1_euclidean(&fixtures::aff1()).eval(&[0.4, -0.7]).unwrap();
    assert!((aff[&vec![1]] + 1.0 / (2.0 * PI)).abs() < 1e-15);
    assert!(aff.get(&vec![0]).map_or(true, |v| *v == 0.0));

    let closed = lie_poisson_mk(&LieAlgebra::aff1(), 1).eval(&[0.0, 0.0]).unwrap();
    assert!((closed[&vec![1]] + 1.0 / (2.0 * PI)).abs() < 1e-15);
}

#[test]
fn lie_poisson_m2_on_so3() {
    let m2 = lie_poisson_mk(&LieAlgebra::so3(), 2).eval(&[0.0; 3]).unwrap();
    assert!((m2[&vec![0, 1, 2]] + 3.0 / (PI * PI)).abs() < 1e-14);
    assert!(lie_poisson_mk(&LieAlgebra::so3(), 1).eval(&[0.0; 3]).unwrap().values().all(|v| *v == 0.0));
    assert!(lie_poisson_mk(&LieAlgebra::aff1(), 2).is_zero());
}

#[test]
fn secondary_first_class_matches_euclidean_formula() {
    for (name, pi) in fixtures::poisson_fixtures() {
        let m = pi.dim();
        let pts = sample_points(&Region::cube(m), 20, 1);
        let sec = secondary_class(&pi, &canonical_poisson_connection(&pi), &ConnectionSymbols::flat(m), 1).unwrap();
        assert!(residual(&sec, &m1_euclidean(&pi), &pts) <= 1e-10, "{name}");
    }
}

#[test]
fn secondary_class_of_equal_connections_vanishes() {
    let pi = fixtures::so3();
    let conn = canonical_poisson_connection(&pi);
    for k in 1..=2 {
        assert!(secondary_class(&pi, &conn, &conn, k).unwrap().is_zero());
    }
    let q = fixtures::quadratic_r2();
    let lc = levi_civita_contra(&q, &fixtures::curved_metric_r2()).unwrap();
    assert!(secondary_class(&q, &lc, &lc, 1).unwrap().max_abs_over(&sample_points(&Region::cube(2), 10, 0)).unwrap() == 0.0);
}

#[test]
fn lie_poisson_cross_validation() {
    for (name, g) in lie_fixtures() {
        let pi = g.lie_poisson();
        let m = pi.dim();
        let pts = sample_points(&Region::cube(m), 8, 2);
        let d1 = canonical_poisson_connection(&pi);
        let d0 = ConnectionSymbols::flat(m);
        for k in 1..=2 {
            if 2 * k - 1 > m {
                continue;
            }
            let rho = if k == 1 { 1.0 } else { RHO_2 };
            let sec = secondary_class(&pi, &d1, &d0, k).unwrap();
            let closed = lie_poisson_mk(&g, k).scale(&Expr::constant(rho));
            assert!(residual(&sec, &closed, &pts) <= 1e-8, "{name} k={k}");
        }
    }
    // ρ₂ is pinned against a nonzero value
    let so3 = fixtures::so3();
    let sec = secondary_class(&so3, &canonical_poisson_connection(&so3), &ConnectionSymbols::flat(3), 2).unwrap();
    let v = sec.eval(&[0.2, 0.1, -0.4]).unwrap()[&vec![0, 1, 2]];
    assert!((v / (-3.0 / (PI * PI)) - RHO_2).abs() < 1e-12);
}

#[test]
fn third_class_vanishes_on_so3_aff1() {
    let g = LieAlgebra::so3().direct_sum(&LieAlgebra::aff1());
    let pi = g.lie_poisson();
    let sec = secondary_class(&pi, &canonical_poisson_connection(&pi), &ConnectionSymbols::flat(5), 3).unwrap();
    let pts = sample_points(&Region::cube(5), 4, 3);
    assert!(sec.max_abs_over(&pts).unwrap() <= 1e-8);
    assert!(lie_poisson_mk(&g, 3).max_abs_over(&pts).unwrap() <= 1e-12);
}

#[test]
fn even_classes_require_flat_connections() {
    let pi = fixtures::so3();
    let mut r = rng(5);
    let bent = ConnectionSymbols::from_fn(3, ConnectionKind::Explicit, |_, _, _| random_polynomial(3, 1, 2, &mut r));
    assert!(matches!(secondary_class(&pi, &bent, &ConnectionSymbols::flat(3), 2), Err(Error::NotFlat(_))));
    assert!(secondary_class(&pi, &bent, &ConnectionSymbols::flat(3), 1).is_ok());
    assert!(matches!(secondary_class(&pi, &bent, &ConnectionSymbols::flat(2), 1), Err(Error::DimensionMismatch { .. })));
}

#[test]
fn chern_weil_on_flat_and_curved_connections() {
    for (_, g) in lie_fixtures() {
        let pi = g.lie_poisson();
        assert!(chern_weil(&pi, &canonical_poisson_connection(&pi), 1).unwrap().max_abs_over(&[vec![0.3; pi.dim()]]).unwrap() <= 1e-12);
    }

    // λ(R)(P_1)(dx1, dx2) = 2 tr R(dx1, dx2) / 2π, from the operator form of R
    let q = fixtures::quadratic_r2();
    let conn = fixtures::aff1_example_corrected();
    let pi = fixtures::aff1();
    for (pi, conn) in [(q.clone(), canonical_poisson_connection(&q)), (pi.clone(), conn)] {
        let cw = chern_weil(&pi, &conn, 1).unwrap();
        let e = |i: usize| -> Vec<Expr> { (0..2).map(|j| if i == j { Expr::one() } else { Expr::zero() }).collect() };
        let trace = Expr::add_all((0..2).map(|l| curvature_operator(&pi, &conn, &e(0), &e(1), &e(l)).unwrap()[l].clone()));
        let oracle = Expr::constant(1.0 / PI) * trace;
        for p in sample_points(&Region::cube(2), 10, 4) {
            let got = cw.get(&[0, 1]).eval_at(&p).unwrap();
            assert!((got - oracle.eval_at(&p).unwrap()).abs() <= 1e-12);
        }
    }
}

fn random_connection(m: usize, r: &mut impl Rng) -> ConnectionSymbols {
    ConnectionSymbols::from_fn(m, ConnectionKind::Explicit, |_, _, _| random_polynomial(m, 1, 2, r))
}

#[test]
fn chern_weil_fields_are_closed() {
    let mut r = rng(6);
    let q = fixtures::quadratic_r2();
    let lc = levi_civita_contra(&q, &fixtures::curved_metric_r2()).unwrap();
    let pts = sample_points(&Region::cube(2), 20, 6);
    for conn in [canonical_poisson_connection(&q), lc, random_connection(2, &mut r)] {
        let cw = chern_weil(&q, &conn, 1).unwrap();
        assert!(q.delta(&cw).unwrap().max_abs_over(&pts).unwrap() <= 1e-8);
    }
    let so3 = fixtures::so3();
    let cw = chern_weil(&so3, &random_connection(3, &mut r), 1).unwrap();
    assert!(so3.delta(&cw).unwrap().max_abs_over(&sample_points(&Region::cube(3), 20, 6)).unwrap() <= 1e-8);
}

#[test]
fn transgression() {
    let q = fixtures::quadratic_r2();
    let pts = sample_points(&Region::cube(2), 20, 7);
    let check = |pi: &PoissonStructure, c1: &ConnectionSymbols, c0: &ConnectionSymbols, pts: &[Vec<f64>]| {
        let ds = pi.delta(&secondary_class(pi, c1, c0, 1).unwrap()).unwrap();
        let diff = chern_weil(pi, c1, 1).unwrap().minus(&chern_weil(pi, c0, 1).unwrap());
        // δλ(Γ¹, Γ⁰) = ½ (λ(Γ¹) − λ(Γ⁰)) with the unnormalized sum over S_{2k}
        residual(&ds, &diff.scale(&Expr::constant(0.5)), pts)
    };
    let c1 = canonical_poisson_connection(&q);
    let c0 = levi_civita_contra(&q, &fixtures::curved_metric_r2()).unwrap();
    assert!(check(&q, &c1, &c0, &pts) <= 1e-8);

    let mut r = rng(8);
    for _ in 0..3 {
        let (a, b) = (random_connection(2, &mut r), random_connection(2, &mut r));
        let diff = chern_weil(&q, &a, 1).unwrap().minus(&chern_weil(&q, &b, 1).unwrap());
        assert!(diff.max_abs_over(&pts).unwrap() > 1e-3, "pair must be non-trivial");
        assert!(check(&q, &a, &b, &pts) <= 1e-8);
    }
    let so3 = fixtures::so3();
    let (a, b) = (random_connection(3, &mut r), random_connection(3, &mut r));
    assert!(check(&so3, &a, &b, &sample_points(&Region::cube(3), 10, 9)) <= 1e-8);
}

#[test]
fn lie_poisson_classes_are_ad_invariant() {
    for (name, g) in lie_fixtures() {
        let pi = g.lie_poisson();
        let m = pi.dim();
        let pts = sample_points(&Region::cube(m), 8, 10);
        for k in 1..=2 {
            let mk = lie_poisson_mk(&g, k);
            for i in 0..m {
                let x = pi.hamiltonian_field(&Expr::coord(i));
                let l = mk.lie_derivative_along(&x).unwrap();
                assert!(l.max_abs_over(&pts).unwrap() <= 1e-10, "{name} k={k} i={i}");
            }
        }
    }
}

#[test]
fn modular_comparison_examples() {
    let pts2 = sample_points(&Region::cube(2), 30, 11);
    let pts3 = sample_points(&Region::cube(3), 30, 11);
    assert!(modular_comparison(&fixtures::aff1(), &Metric::euclidean(2), &pts2).unwrap() <= 1e-10);
    assert!(modular_comparison(&fixtures::so3(), &Metric::euclidean(3), &pts3).unwrap() <= 1e-12);
    assert!(modular_comparison(&fixtures::quadratic_r2(), &fixtures::curved_metric_r2(), &pts2).unwrap() <= 1e-8);
    let bad = Metric::diagonal(vec![Expr::one(), Expr::coord(0)]);
    assert!(matches!(modular_comparison(&fixtures::aff1(), &bad, &pts2), Err(Error::IndefiniteMetric { .. })));
}
