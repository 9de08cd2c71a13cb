//! Poisson structures and the contravariant Cartan calculus.
//!
//! Sign conventions, fixed once:
//!
//! * `Π(α, β) = π^{kl} α_k β_l` and `β(#α) = Π(α, β)`, so `(#α)^l = π^{kl} α_k`;
//! * `{f, g} = Π(df, dg)` and `X_f = #df`;
//! * `δ` is the unnormalized Chevalley–Eilenberg differential of the Koszul
//!   bracket (no `1/(r+1)` prefactor); wedge products use the determinant
//!   convention. With these choices `δ² = 0`, the graded Leibniz rule and the
//!   Cartan identities hold exactly;
//! * `#λ(α_1..α_r) = (−1)^r λ(#α_1..#α_r)` on forms, which gives
//!   `δ(#λ) = −#(dλ)`;
//! * the modular vector field is `v_μ(f) = div_μ(X_f)`, i.e.
//!   `v_μ^i = ∂_j π^{ij} + π^{ij} ∂_j log w` for `μ = w dx^1∧…∧dx^m`.

mod field;

pub use field::{Alternating, Co, Contra, DifferentialForm, MultiVectorField};
pub(crate) use field::{check_one_form, symbolic_det};

use std::collections::BTreeMap;

use crate::combinatorics::increasing_tuples;
use crate::expr::{EvalError, Expr};
use crate::{Error, Result};

/// Bivector field `Π` on an `m`-dimensional chart, stored as `π^{ij}` for `i < j`.
#[derive(Clone, Debug)]
pub struct PoissonStructure {
    dim: usize,
    upper: BTreeMap<(usize, usize), Expr>,
}

impl PoissonStructure {
    /// Components are `(i, j, π^{ij})` with 0-based `i < j`.
    pub fn new<I>(dim: usize, comps: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize, Expr)>,
    {
        let mut upper = BTreeMap::new();
        for (i, j, e) in comps {
            if i >= j {
                return Err(Error::Index(format!("indices must satisfy i<j (got {}, {})", i + 1, j + 1)));
            }
            if j >= dim {
                return Err(Error::Index(format!("index {} out of range for dimension {dim}", j + 1)));
            }
            if let Some(c) = e.max_coord() {
                if c >= dim {
                    return Err(Error::Index(format!("x{} used in a {dim}-dimensional chart", c + 1)));
                }
            }
            if upper.insert((i, j), e).is_some() {
                return Err(Error::Index(format!("duplicate component ({}, {})", i + 1, j + 1)));
            }
        }
        Ok(PoissonStructure { dim, upper })
    }

    /// Parse `(i, j, source)` triples with 1-based indices.
    pub fn parse(dim: usize, comps: &[(usize, usize, &str)]) -> Result<Self> {
        let parsed = comps
            .iter()
            .map(|&(i, j, src)| {
                if i == 0 || j == 0 {
                    return Err(Error::Index("indices are 1-based".into()));
                }
                Ok((i - 1, j - 1, crate::parse_expr(src, dim, false)?))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(dim, parsed)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// `π^{ij}` for arbitrary `i, j`.
    pub fn pi(&self, i: usize, j: usize) -> Expr {
        use std::cmp::Ordering::*;
        match i.cmp(&j) {
            Equal => Expr::zero(),
            Less => self.upper.get(&(i, j)).cloned().unwrap_or_default(),
            Greater => self.upper.get(&(j, i)).map(Expr::neg_expr).unwrap_or_default(),
        }
    }

    /// Numeric matrix `π^{ij}(x)`.
    pub fn eval(&self, point: &[f64]) -> Result<Vec<Vec<f64>>, EvalError> {
        let m = self.dim;
        let mut out = vec![vec![0.0; m]; m];
        for (&(i, j), e) in &self.upper {
            let v = e.eval_at(point)?;
            out[i][j] = v;
            out[j][i] = -v;
        }
        Ok(out)
    }

    /// Upper-triangular components `(i, j, π^{ij})`, 0-based.
    pub fn components(&self) -> impl Iterator<Item = (usize, usize, &Expr)> {
        self.upper.iter().map(|(&(i, j), e)| (i, j, e))
    }

    pub fn bivector(&self) -> MultiVectorField {
        MultiVectorField::from_components(self.dim, 2, self.upper.iter().map(|(&(i, j), e)| (vec![i, j], e.clone())))
            .expect("validated at construction")
    }

    /// `(#α)^l = Σ_k π^{kl} α_k` on raw components.
    pub fn sharp_components(&self, alpha: &[Expr]) -> Vec<Expr> {
        (0..self.dim)
            .map(|l| Expr::add_all((0..self.dim).filter(|&k| !alpha[k].is_zero()).map(|k| self.pi(k, l) * &alpha[k])))
            .collect()
    }

    /// Anchor map `#`, with `β(#α) = Π(α, β)`.
    pub fn sharp(&self, alpha: &DifferentialForm) -> Result<MultiVectorField> {
        check_one_form(alpha, self.dim)?;
        Ok(MultiVectorField::vector(self.sharp_components(&alpha.to_vec())))
    }

    /// `#α(f) = π^{kl} α_k ∂_l f`.
    pub fn anchor_derivative(&self, alpha: &[Expr], f: &Expr) -> Expr {
        let v = self.sharp_components(alpha);
        Expr::add_all(v.iter().enumerate().filter(|(_, c)| !c.is_zero()).map(|(l, c)| c * f.d(l)))
    }

    /// `#dx^a(f) = π^{al} ∂_l f`.
    fn basis_anchor(&self, a: usize, f: &Expr) -> Expr {
        Expr::add_all((0..self.dim).map(|l| self.pi(a, l) * f.d(l)))
    }

    /// `Π(α, β) = π^{kl} α_k β_l`.
    pub fn pair(&self, alpha: &[Expr], beta: &[Expr]) -> Expr {
        let mut terms = Vec::new();
        for k in 0..self.dim {
            for l in 0..self.dim {
                if k != l && !alpha[k].is_zero() && !beta[l].is_zero() {
                    terms.push(Expr::mul_all([self.pi(k, l), alpha[k].clone(), beta[l].clone()]));
                }
            }
        }
        Expr::add_all(terms)
    }

    /// Cyclic Jacobi residual
    /// `J^{ijk} = Σ_l (π^{li} ∂_l π^{jk} + π^{lj} ∂_l π^{ki} + π^{lk} ∂_l π^{ij})`.
    pub fn jacobiator(&self) -> MultiVectorField {
        let m = self.dim;
        let comps = increasing_tuples(m, 3).into_iter().map(|idx| {
            let (i, j, k) = (idx[0], idx[1], idx[2]);
            let terms = (0..m).flat_map(|l| {
                [
                    self.pi(l, i) * self.pi(j, k).d(l),
                    self.pi(l, j) * self.pi(k, i).d(l),
                    self.pi(l, k) * self.pi(i, j).d(l),
                ]
            });
            (idx, Expr::add_all(terms))
        });
        MultiVectorField::from_components(m, 3, comps).expect("valid tuples")
    }

    /// Poisson bracket `{f, g} = Π(df, dg)`.
    pub fn bracket(&self, f: &Expr, g: &Expr) -> Expr {
        let df: Vec<Expr> = (0..self.dim).map(|i| f.d(i)).collect();
        let dg: Vec<Expr> = (0..self.dim).map(|i| g.d(i)).collect();
        self.pair(&df, &dg)
    }

    /// Hamiltonian vector field `X_f = #df`.
    pub fn hamiltonian_field(&self, f: &Expr) -> MultiVectorField {
        let df: Vec<Expr> = (0..self.dim).map(|i| f.d(i)).collect();
        MultiVectorField::vector(self.sharp_components(&df))
    }

    /// Koszul bracket on raw 1-form components:
    /// `[α, β] = L_{#α} β − L_{#β} α − d(Π(α, β))`.
    pub fn koszul_components(&self, alpha: &[Expr], beta: &[Expr]) -> Vec<Expr> {
        let m = self.dim;
        let sa = self.sharp_components(alpha);
        let sb = self.sharp_components(beta);
        let p = self.pair(alpha, beta);
        (0..m)
            .map(|k| {
                let mut terms = Vec::new();
                for l in 0..m {
                    // (L_X β)_k = X^l ∂_l β_k + β_l ∂_k X^l
                    terms.push(&sa[l] * beta[k].d(l));
                    terms.push(&beta[l] * sa[l].d(k));
                    terms.push(-(&sb[l] * alpha[k].d(l)));
                    terms.push(-(&alpha[l] * sb[l].d(k)));
                }
                terms.push(-p.d(k));
                Expr::add_all(terms)
            })
            .collect()
    }

    pub fn koszul_bracket(&self, alpha: &DifferentialForm, beta: &DifferentialForm) -> Result<DifferentialForm> {
        check_one_form(alpha, self.dim)?;
        check_one_form(beta, self.dim)?;
        Ok(DifferentialForm::one_form(self.koszul_components(&alpha.to_vec(), &beta.to_vec())))
    }

    /// Contravariant differential `δ: X^r → X^{r+1}` (unnormalized).
    ///
    /// On basis covectors, with `[dx^a, dx^b] = dπ^{ab}`:
    /// `δQ^{I} = Σ_k (−1)^k #dx^{i_k}(Q^{I∖i_k})
    ///         + Σ_{k<l} (−1)^{k+l} ∂_c π^{i_k i_l} Q^{c, I∖{i_k, i_l}}`.
    pub fn delta(&self, q: &MultiVectorField) -> Result<MultiVectorField> {
        if q.dim() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: q.dim() });
        }
        let m = self.dim;
        let r = q.degree();
        let comps = increasing_tuples(m, r + 1).into_iter().map(|idx| {
            let mut terms = Vec::new();
            for k in 0..=r {
                let rest = without(&idx, &[k]);
                let val = self.basis_anchor(idx[k], &q.get(&rest));
                terms.push(if k % 2 == 0 { val } else { -val });
            }
            for k in 0..=r {
                for l in k + 1..=r {
                    let rest = without(&idx, &[k, l]);
                    let bracket = self.pi(idx[k], idx[l]);
                    for c in 0..m {
                        let coeff = bracket.d(c);
                        if coeff.is_zero() {
                            continue;
                        }
                        let mut full = Vec::with_capacity(r);
                        full.push(c);
                        full.extend_from_slice(&rest);
                        let val = coeff * q.get(&full);
                        terms.push(if (k + l) % 2 == 0 { val } else { -val });
                    }
                }
            }
            (idx, Expr::add_all(terms))
        });
        MultiVectorField::from_components(m, r + 1, comps)
    }

    /// Contravariant Lie derivative
    /// `(L_α Q)(α_1..α_r) = #α(Q(α_1..α_r)) − Σ_k Q(α_1, .., [α, α_k], .., α_r)`.
    pub fn lie_derivative(&self, alpha: &DifferentialForm, q: &MultiVectorField) -> Result<MultiVectorField> {
        check_one_form(alpha, self.dim)?;
        let m = self.dim;
        let r = q.degree();
        let a = alpha.to_vec();
        // [α, dx^i] for every basis covector
        let brackets: Vec<Vec<Expr>> = (0..m)
            .map(|i| self.koszul_components(&a, &DifferentialForm::basis(m, i).to_vec()))
            .collect();
        let comps = increasing_tuples(m, r).into_iter().map(|idx| {
            let mut terms = vec![self.anchor_derivative(&a, &q.get(&idx))];
            for k in 0..r {
                for c in 0..m {
                    let coeff = &brackets[idx[k]][c];
                    if coeff.is_zero() {
                        continue;
                    }
                    let mut sub = idx.clone();
                    sub[k] = c;
                    terms.push(-(coeff * q.get(&sub)));
                }
            }
            (idx, Expr::add_all(terms))
        });
        MultiVectorField::from_components(m, r, comps)
    }

    /// `#` extended to forms: `#λ(α_1..α_r) = (−1)^r λ(#α_1, .., #α_r)`.
    pub fn sharp_form(&self, lambda: &DifferentialForm) -> Result<MultiVectorField> {
        if lambda.dim() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: lambda.dim() });
        }
        let m = self.dim;
        let r = lambda.degree();
        let images: Vec<Vec<Expr>> = (0..m).map(|i| (0..m).map(|l| self.pi(i, l)).collect()).collect();
        let sign = Expr::constant(if r % 2 == 0 { 1.0 } else { -1.0 });
        let comps = increasing_tuples(m, r).into_iter().map(|idx| {
            let args: Vec<Vec<Expr>> = idx.iter().map(|&i| images[i].clone()).collect();
            (idx, &sign * lambda.apply(&args))
        });
        MultiVectorField::from_components(m, r, comps)
    }

    /// Modular vector field `v_μ`, the derivation `f ↦ div_μ(X_f)`.
    ///
    /// The density weight is validated at `samples`.
    pub fn modular_vector_field(&self, mu: &DensityField, samples: &[Vec<f64>]) -> Result<MultiVectorField> {
        mu.check_positive(samples)?;
        let m = self.dim;
        let w = mu.weight();
        let comps = (0..m)
            .map(|i| {
                let mut terms: Vec<Expr> = (0..m).map(|j| self.pi(i, j).d(j)).collect();
                for j in 0..m {
                    let dw = w.d(j);
                    if !dw.is_zero() {
                        terms.push(self.pi(i, j) * dw.div_expr(w));
                    }
                }
                Expr::add_all(terms)
            })
            .collect();
        Ok(MultiVectorField::vector(comps))
    }
}

fn without(idx: &[usize], drop: &[usize]) -> Vec<usize> {
    idx.iter().enumerate().filter(|(p, _)| !drop.contains(p)).map(|(_, &v)| v).collect()
}

/// Contraction `i_α Q`.
pub fn contract(alpha: &DifferentialForm, q: &MultiVectorField) -> Result<MultiVectorField> {
    q.contract(alpha)
}

/// Smooth density `μ = w · dx^1 ∧ … ∧ dx^m` with `w > 0`.
#[derive(Clone, Debug)]
pub struct DensityField {
    weight: Expr,
}

impl DensityField {
    pub fn new(weight: Expr) -> Self {
        DensityField { weight }
    }

    /// Lebesgue measure of the chart.
    pub fn lebesgue() -> Self {
        DensityField { weight: Expr::one() }
    }

    pub fn weight(&self) -> &Expr {
        &self.weight
    }

    pub fn check_positive(&self, samples: &[Vec<f64>]) -> Result<()> {
        for p in samples {
            let value = self.weight.eval_at(p)?;
            if value <= 0.0 {
                return Err(Error::NonPositiveDensity { value, point: p.clone() });
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::sampling::{random_multivector, random_one_form, rng, sample_points, Region};

    fn e(s: &str, dim: usize) -> Expr {
        crate::parse_expr(s, dim, false).unwrap()
    }

    fn at<K>(f: &Alternating<K>, p: &[f64]) -> Vec<(Vec<usize>, f64)> {
        f.eval(p).unwrap().into_iter().collect()
    }

    #[test]
    fn sharp_examples() {
        let aff = fixtures::aff1();
        let v = aff.sharp(&DifferentialForm::basis(2, 0)).unwrap();
        assert!(v.get(&[0]).is_zero());
        assert_eq!(v.get(&[1]).to_string(), "x1");
        assert!(aff.sharp(&DifferentialForm::zero(2, 1)).unwrap().is_zero());
        let sym = fixtures::symplectic_r2();
        let w = sym.sharp(&DifferentialForm::basis(2, 1)).unwrap();
        assert_eq!(at(&w, &[0.4, 9.0]), vec![(vec![0], -1.0)]);
        assert!(matches!(
            sym.sharp(&DifferentialForm::basis(3, 0)),
            Err(Error::DimensionMismatch { expected: 2, found: 3 })
        ));
    }

    #[test]
    fn jacobiator_examples() {
        let pts = sample_points(&Region::cube(3), 20, 1);
        assert!(fixtures::so3().jacobiator().max_abs_over(&pts).unwrap() == 0.0);
        assert!(fixtures::aff1().jacobiator().is_zero());
        let bad = fixtures::non_jacobi();
        // J^{123} = x1 for π^{12} = x3, π^{13} = x3, π^{23} = x1
        assert_eq!(bad.jacobiator().get(&[0, 1, 2]).eval_at(&[0.7, 0.1, 0.2]), Ok(0.7));
    }

    #[test]
    fn bracket_examples() {
        let aff = fixtures::aff1();
        assert_eq!(aff.bracket(&Expr::coord(0), &Expr::coord(1)).to_string(), "x1");
        let f = e("x1^2*sin(x2)", 2);
        assert!(aff.bracket(&f, &f).eval_at(&[0.3, 0.8]).unwrap().abs() < 1e-15);
        assert_eq!(fixtures::so3().bracket(&Expr::coord(0), &Expr::coord(1)).to_string(), "x3");
    }

    #[test]
    fn hamiltonian_examples() {
        let aff = fixtures::aff1();
        let x = aff.hamiltonian_field(&Expr::coord(1));
        assert_eq!(at(&x, &[2.0, 5.0]), vec![(vec![0], -2.0)]);
        assert!(aff.hamiltonian_field(&Expr::constant(3.0)).is_zero());
        let sym = fixtures::symplectic_r2();
        assert_eq!(at(&sym.hamiltonian_field(&Expr::coord(0)), &[0.0, 0.0]), vec![(vec![1], 1.0)]);
    }

    #[test]
    fn koszul_examples() {
        let aff = fixtures::aff1();
        let b = aff.koszul_bracket(&DifferentialForm::basis(2, 0), &DifferentialForm::basis(2, 1)).unwrap();
        assert_eq!(at(&b, &[0.5, 0.5]), vec![(vec![0], 1.0)]);
        let mut r = rng(5);
        let a = random_one_form(2, 2, &mut r);
        assert!(aff.koszul_bracket(&a, &a).unwrap().max_abs_at(&[0.3, -0.6]).unwrap() < 1e-14);
    }

    #[test]
    fn bracket_with_function_rule() {
        let so3 = fixtures::so3();
        let mut r = rng(11);
        let pts = sample_points(&Region::cube(3), 30, 2);
        for _ in 0..5 {
            let a = random_one_form(3, 2, &mut r);
            let b = random_one_form(3, 2, &mut r);
            let f = crate::sampling::random_polynomial(3, 2, 4, &mut r);
            let lhs = so3.koszul_bracket(&a, &b.scale(&f)).unwrap();
            let ab = so3.koszul_bracket(&a, &b).unwrap();
            let rhs = ab.scale(&f).plus(&b.scale(&so3.anchor_derivative(&a.to_vec(), &f)));
            assert!(lhs.minus(&rhs).max_abs_over(&pts).unwrap() < 1e-12);
        }
    }

    #[test]
    fn delta_on_functions() {
        let sym = fixtures::symplectic_r2();
        let d = sym.delta(&MultiVectorField::scalar(2, Expr::coord(0))).unwrap();
        // (δx1)(dx2) = #dx2(x1) = π^{21} = −1
        assert_eq!(d.get(&[1]).as_const(), Some(-1.0));
    }

    #[test]
    fn delta_pi_vanishes_and_tracks_jacobiator() {
        for pi in [fixtures::so3(), fixtures::aff1(), fixtures::sl2()] {
            let pts = sample_points(&Region::cube(pi.dim()), 20, 3);
            assert!(pi.delta(&pi.bivector()).unwrap().max_abs_over(&pts).unwrap() < 1e-12);
        }
        let bad = fixtures::non_jacobi();
        let pts = sample_points(&Region::cube(3), 20, 3);
        let dp = bad.delta(&bad.bivector()).unwrap();
        let j = bad.jacobiator();
        for p in &pts {
            let a = dp.get(&[0, 1, 2]).eval_at(p).unwrap();
            let b = j.get(&[0, 1, 2]).eval_at(p).unwrap();
            // δΠ = −2 J under the unnormalized convention
            assert!((a + 2.0 * b).abs() < 1e-12, "{a} vs {b}");
        }
    }

    #[test]
    fn contraction_with_pi_is_sharp() {
        let aff = fixtures::aff1();
        let c = aff.bivector().contract(&DifferentialForm::basis(2, 0)).unwrap();
        assert_eq!(c.get(&[1]).to_string(), "x1");
        assert!(c.get(&[0]).is_zero());
    }

    #[test]
    fn cartan_formula_on_so3() {
        let so3 = fixtures::so3();
        let mut r = rng(21);
        let pts = sample_points(&Region::cube(3), 20, 4);
        for _ in 0..3 {
            let q = random_multivector(3, 2, 2, &mut r);
            let a = random_one_form(3, 1, &mut r);
            let lhs = so3.lie_derivative(&a, &q).unwrap();
            let rhs = so3
                .delta(&q)
                .unwrap()
                .contract(&a)
                .unwrap()
                .plus(&so3.delta(&q.contract(&a).unwrap()).unwrap());
            assert!(lhs.minus(&rhs).max_abs_over(&pts).unwrap() < 1e-10);
        }
    }

    #[test]
    fn sharp_form_examples() {
        let sym = fixtures::symplectic_r2();
        let v = sym.sharp_form(&DifferentialForm::basis(2, 0)).unwrap();
        assert_eq!(at(&v, &[0.0, 0.0]), vec![(vec![1], 1.0)]);
        assert!(sym.sharp_form(&DifferentialForm::zero(2, 2)).unwrap().is_zero());
    }

    #[test]
    fn delta_of_sharp_is_minus_sharp_of_d() {
        let so3 = fixtures::so3();
        let mut r = rng(8);
        let pts = sample_points(&Region::cube(3), 20, 5);
        for _ in 0..4 {
            let l = random_one_form(3, 2, &mut r);
            let lhs = so3.delta(&so3.sharp_form(&l).unwrap()).unwrap();
            let rhs = so3.sharp_form(&l.exterior_derivative()).unwrap();
            assert!(lhs.plus(&rhs).max_abs_over(&pts).unwrap() < 1e-10);
        }
    }

    #[test]
    fn modular_examples() {
        let pts = sample_points(&Region::cube(3), 10, 6);
        let leb = DensityField::lebesgue();
        assert!(fixtures::so3().modular_vector_field(&leb, &pts).unwrap().is_zero());
        let pts2 = sample_points(&Region::cube(2), 10, 6);
        assert!(fixtures::symplectic_r2().modular_vector_field(&leb, &pts2).unwrap().is_zero());
        let v = fixtures::aff1().modular_vector_field(&leb, &pts2).unwrap();
        assert_eq!(at(&v, &[0.3, 0.2]), vec![(vec![1], -1.0)]);
        let bad = DensityField::new(e("x1", 2));
        assert!(matches!(
            fixtures::aff1().modular_vector_field(&bad, &pts2),
            Err(Error::NonPositiveDensity { .. })
        ));
    }

    #[test]
    fn modular_field_is_divergence_of_hamiltonian() {
        let pi = fixtures::quadratic_r2();
        let w = e("1 + x1^2 + x2^4", 2);
        let pts = sample_points(&Region::cube(2), 15, 7);
        let v = pi.modular_vector_field(&DensityField::new(w.clone()), &pts).unwrap();
        let f = e("x1^3*x2 + sin(x2)", 2);
        let xf = pi.hamiltonian_field(&f).to_vec();
        let div = Expr::add_all((0..2).map(|l| (&w * &xf[l]).d(l))).div_expr(&w);
        for p in &pts {
            let lhs = v.derivative_of(&f).eval_at(p).unwrap();
            let rhs = div.eval_at(p).unwrap();
            assert!((lhs - rhs).abs() < 1e-12);
        }
    }
}
