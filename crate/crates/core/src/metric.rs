//! Homogeneous quasi-norms `‖v‖ = Σ_j |v_j|^{1/λ_j}`, dilations, graded
//! automorphisms, empirical biLipschitz constants and numerical Pansu
//! differentials.

use std::fmt;
use std::sync::Arc;

use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::{rational_to_f64, Field, Rational, Scalar};
use crate::heintze::DiagonalHeintzePair;
use crate::lie::{LieAlgebra, Subspace};
use crate::linalg::Matrix;

/// A rational inner product on `𝔫` for which distinct layers are orthogonal.
#[derive(Clone, Debug, PartialEq)]
pub struct DInnerProduct {
    gram: Matrix<Rational>,
}

impl DInnerProduct {
    /// `G = Σ_j P_jᵀ P_j`: the coordinate inner product on each layer,
    /// with layers declared orthogonal.
    pub fn standard(pair: &DiagonalHeintzePair) -> Self {
        let n = pair.dim();
        let gram = pair
            .projectors()
            .iter()
            .fold(Matrix::zeros(n, n), |acc, p| acc.add(&p.transpose().mul(p)));
        DInnerProduct { gram }
    }

    pub fn new(pair: &DiagonalHeintzePair, gram: Matrix<Rational>) -> Result<Self> {
        let n = pair.dim();
        if gram.nrows() != n || gram.ncols() != n {
            return Err(Error::DimensionMismatch { expected: n, got: gram.nrows() });
        }
        if gram.transpose() != gram {
            return Err(Error::Invalid("Gram matrix is not symmetric".into()));
        }
        for k in 1..=n {
            let idx: Vec<usize> = (0..k).collect();
            if !gram.submatrix(&idx, &idx).determinant().is_positive() {
                return Err(Error::Invalid("Gram matrix is not positive definite".into()));
            }
        }
        let ps = pair.projectors();
        for (i, pi) in ps.iter().enumerate() {
            for pj in ps.iter().skip(i + 1) {
                if !pi.transpose().mul(&gram).mul(pj).rows_vec().iter().flatten().all(Zero::is_zero) {
                    return Err(Error::Invalid("distinct layers are not orthogonal".into()));
                }
            }
        }
        Ok(DInnerProduct { gram })
    }

    pub fn gram(&self) -> &Matrix<Rational> {
        &self.gram
    }
}

/// Float data for evaluating `ρ`, precomputed from a pair and an inner product.
#[derive(Clone, Debug)]
pub struct QuasiNorm {
    algebra: LieAlgebra,
    projectors: Vec<Matrix<f64>>,
    gram: Matrix<f64>,
    lambdas: Vec<f64>,
}

impl QuasiNorm {
    pub fn new(pair: &DiagonalHeintzePair, ip: &DInnerProduct) -> Self {
        QuasiNorm {
            algebra: pair.algebra().clone(),
            projectors: pair.projectors().iter().map(Matrix::to_f64).collect(),
            gram: ip.gram.to_f64(),
            lambdas: pair.eigenvalues().iter().map(rational_to_f64).collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.algebra.dim()
    }

    pub fn algebra(&self) -> &LieAlgebra {
        &self.algebra
    }

    /// `|v_j|` for each layer component.
    pub fn layer_norms(&self, v: &[f64]) -> Vec<f64> {
        self.projectors
            .iter()
            .map(|p| {
                let c = p.mul_vec(v);
                let gc = self.gram.mul_vec(&c);
                c.iter().zip(&gc).map(|(a, b)| a * b).sum::<f64>().max(0.0).sqrt()
            })
            .collect()
    }

    pub fn norm(&self, v: &[f64]) -> f64 {
        self.layer_norms(v).iter().zip(&self.lambdas).map(|(r, l)| r.powf(1.0 / l)).sum()
    }

    /// `ρ(x, y) = ‖x⁻¹ * y‖`.
    pub fn distance(&self, x: &[f64], y: &[f64]) -> f64 {
        self.norm(&self.algebra.bch_unchecked(&self.algebra.inverse(x), y))
    }

    /// `ρ` with the group operation done exactly.
    pub fn distance_exact(&self, x: &[Rational], y: &[Rational]) -> f64 {
        let w = self.algebra.bch_unchecked(&self.algebra.inverse(x), y);
        self.norm(&w.iter().map(rational_to_f64).collect::<Vec<_>>())
    }

    /// `e^{tD} x`.
    pub fn dilate(&self, t: f64, x: &[f64]) -> Vec<f64> {
        self.scale_layers(&self.lambdas.iter().map(|l| (t * l).exp()).collect::<Vec<_>>(), x)
    }

    /// `e^{tD} x` with `e^t = 2^k`, avoiding rounding in the exponent.
    pub fn dilate_pow2(&self, k: i32, x: &[f64]) -> Vec<f64> {
        self.scale_layers(&self.lambdas.iter().map(|l| (k as f64 * l).exp2()).collect::<Vec<_>>(), x)
    }

    fn scale_layers(&self, factors: &[f64], x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; x.len()];
        for (p, f) in self.projectors.iter().zip(factors) {
            for (o, c) in out.iter_mut().zip(p.mul_vec(x)) {
                *o += f * c;
            }
        }
        out
    }
}

pub fn quasi_norm(pair: &DiagonalHeintzePair, ip: &DInnerProduct, v: &[f64]) -> f64 {
    QuasiNorm::new(pair, ip).norm(v)
}

pub fn quasi_distance(pair: &DiagonalHeintzePair, ip: &DInnerProduct, x: &[f64], y: &[f64]) -> f64 {
    QuasiNorm::new(pair, ip).distance(x, y)
}

/// `e^{tD} x`.
pub fn dilation(pair: &DiagonalHeintzePair, t: f64, x: &[f64]) -> Vec<f64> {
    let factors: Vec<f64> = pair.eigenvalues().iter().map(|l| (t * rational_to_f64(l)).exp()).collect();
    let mut out = vec![0.0; x.len()];
    for (p, f) in pair.projectors().iter().zip(&factors) {
        for (o, c) in out.iter_mut().zip(p.to_f64().mul_vec(x)) {
            *o += f * c;
        }
    }
    out
}

/// Layer degrees `λ_j/λ₁` of a Carnot-type pair.
pub fn carnot_degrees(pair: &DiagonalHeintzePair) -> Result<Vec<usize>> {
    if !pair.is_carnot_type() {
        return Err(Error::NotCarnot);
    }
    pair.carnot_degrees().ok_or(Error::NotCarnot)
}

/// `δ_s = Σ_j s^{deg j} P_j` as an exact matrix.
pub fn carnot_dilation_matrix<F: Scalar>(pair: &DiagonalHeintzePair, s: &F) -> Result<Matrix<F>> {
    let degrees = carnot_degrees(pair)?;
    let n = pair.dim();
    let mut out = Matrix::<F>::zeros(n, n);
    for (p, &deg) in pair.projectors().iter().zip(&degrees) {
        let f = (0..deg).fold(F::one(), |acc, _| acc * s.clone());
        out = out.add(&p.lift::<F>().scale(&f));
    }
    Ok(out)
}

/// `δ_s x` for `s > 0`.
pub fn carnot_dilation(pair: &DiagonalHeintzePair, s: f64, x: &[f64]) -> Result<Vec<f64>> {
    if s.is_nan() || s <= 0.0 {
        return Err(Error::NonPositiveScale(s));
    }
    Ok(carnot_dilation_matrix(pair, &s)?.mul_vec(x))
}

pub fn carnot_dilation_exact(pair: &DiagonalHeintzePair, s: &Rational, x: &[Rational]) -> Result<Vec<Rational>> {
    if !s.is_positive() {
        return Err(Error::NonPositiveScale(rational_to_f64(s)));
    }
    Ok(carnot_dilation_matrix(pair, s)?.mul_vec(x))
}

/// `Q = Σ_j deg(j) · dim V_j`.
pub fn homogeneous_dimension(pair: &DiagonalHeintzePair) -> Result<usize> {
    let degrees = carnot_degrees(pair)?;
    Ok(degrees.iter().zip(pair.layers()).map(|(d, l)| d * l.dim()).sum())
}

/// Lie algebra automorphism mapping every layer onto itself.
pub fn is_graded_automorphism<F: Field>(pair: &DiagonalHeintzePair, a: &Matrix<F>) -> Result<bool> {
    let n = pair.dim();
    if a.nrows() != n || a.ncols() != n {
        return Err(Error::DimensionMismatch { expected: n, got: a.nrows() });
    }
    if a.determinant().is_zero() {
        return Err(Error::Singular);
    }
    if !pair.algebra().is_automorphism(a) {
        return Ok(false);
    }
    Ok(pair.layers().iter().all(|l| {
        let l: Subspace<F> = l.lift();
        l.image(a) == l
    }))
}

/// `x ↦ n * L x` in exponential coordinates.
#[derive(Clone, Debug, PartialEq)]
pub struct AffineMap<F = Rational> {
    pub translation: Vec<F>,
    pub linear: Matrix<F>,
}

impl<F: Scalar> AffineMap<F> {
    pub fn linear(linear: Matrix<F>) -> Self {
        AffineMap { translation: vec![F::zero(); linear.nrows()], linear }
    }

    pub fn translation(n: Vec<F>) -> Self {
        let linear = Matrix::identity(n.len());
        AffineMap { translation: n, linear }
    }

    pub fn apply(&self, alg: &LieAlgebra, x: &[F]) -> Vec<F> {
        alg.bch_unchecked(&self.translation, &self.linear.mul_vec(x))
    }

    /// `self ∘ other`; valid when `self.linear` is an automorphism.
    pub fn compose(&self, alg: &LieAlgebra, other: &AffineMap<F>) -> AffineMap<F> {
        AffineMap {
            translation: alg.bch_unchecked(&self.translation, &self.linear.mul_vec(&other.translation)),
            linear: self.linear.mul(&other.linear),
        }
    }
}

impl<F: Field> AffineMap<F> {
    pub fn inverse(&self) -> Result<AffineMap<F>> {
        let inv = self.linear.inverse()?;
        let t = inv.mul_vec(&self.translation).into_iter().map(|c| -c).collect();
        Ok(AffineMap { translation: t, linear: inv })
    }
}

impl AffineMap<Rational> {
    pub fn to_f64(&self) -> AffineMap<f64> {
        AffineMap { translation: self.translation.iter().map(rational_to_f64).collect(), linear: self.linear.to_f64() }
    }
}

pub type MapFn = Arc<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>;

/// A map `N → N` in exponential coordinates.
#[derive(Clone)]
pub enum GroupMap {
    Affine(AffineMap<Rational>),
    Function(MapFn),
}

impl fmt::Debug for GroupMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GroupMap::Affine(a) => f.debug_tuple("Affine").field(a).finish(),
            GroupMap::Function(_) => f.write_str("Function(..)"),
        }
    }
}

impl GroupMap {
    pub fn function(f: impl Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static) -> Self {
        GroupMap::Function(Arc::new(f))
    }

    pub fn eval(&self, alg: &LieAlgebra, x: &[f64]) -> Vec<f64> {
        match self {
            GroupMap::Affine(a) => a.to_f64().apply(alg, x),
            GroupMap::Function(f) => f(x),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SampleSpec {
    pub samples: usize,
    pub seed: u64,
    /// Dilated copies at `e^t = 2^k` for `|k| ≤ t_exp`.
    pub t_exp: i32,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BilipEstimate {
    pub lower: f64,
    pub upper: f64,
}

pub fn random_vector(rng: &mut impl Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()
}

/// Min and max of `ρ(f x, f y)/ρ(x, y)` over seeded pairs in `[−1,1]ⁿ` and
/// their images under `e^{tD}`, `e^t = 2^k`, `|k| ≤ t_exp`.
pub fn empirical_bilip_constant(qn: &QuasiNorm, f: &GroupMap, spec: &SampleSpec) -> Result<BilipEstimate> {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let n = qn.dim();
    let mut lower = f64::INFINITY;
    let mut upper = 0.0f64;
    for _ in 0..spec.samples {
        let x = random_vector(&mut rng, n);
        let y = random_vector(&mut rng, n);
        for k in -spec.t_exp..=spec.t_exp {
            let (xs, ys) = (qn.dilate_pow2(k, &x), qn.dilate_pow2(k, &y));
            let d = qn.distance(&xs, &ys);
            if d == 0.0 {
                return Err(Error::DegenerateSample);
            }
            let r = qn.distance(&f.eval(qn.algebra(), &xs), &f.eval(qn.algebra(), &ys)) / d;
            lower = lower.min(r);
            upper = upper.max(r);
        }
    }
    if spec.samples == 0 {
        return Err(Error::EmptyInput);
    }
    Ok(BilipEstimate { lower, upper })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct HomogeneityReport {
    pub samples: usize,
    /// Max relative error of `ρ(e^{tD}x, e^{tD}y) = e^t ρ(x, y)`, `t ∈ [−3, 3]`.
    pub dilation_residual: f64,
    /// Max relative error of `ρ(gx, gy) = ρ(x, y)`.
    pub left_invariance_residual: f64,
}

pub fn homogeneity_suite(qn: &QuasiNorm, samples: usize, seed: u64) -> HomogeneityReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = qn.dim();
    let alg = qn.algebra();
    let mut dil = 0.0f64;
    let mut left = 0.0f64;
    for _ in 0..samples {
        let (x, y, g) = (random_vector(&mut rng, n), random_vector(&mut rng, n), random_vector(&mut rng, n));
        let t: f64 = rng.gen_range(-3.0..3.0);
        let d = qn.distance(&x, &y);
        if d == 0.0 {
            continue;
        }
        let scaled = qn.distance(&qn.dilate(t, &x), &qn.dilate(t, &y));
        dil = dil.max((scaled - t.exp() * d).abs() / (t.exp() * d));
        let moved = qn.distance(&alg.bch_unchecked(&g, &x), &alg.bch_unchecked(&g, &y));
        left = left.max((moved - d).abs() / d);
    }
    HomogeneityReport { samples, dilation_residual: dil, left_invariance_residual: left }
}

/// Worst observed `ρ(x,z) / (ρ(x,y) + ρ(y,z))` over seeded triples.
pub fn quasi_triangle_constant(qn: &QuasiNorm, samples: usize, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = qn.dim();
    let mut worst = 0.0f64;
    for _ in 0..samples {
        let (x, y, z) = (random_vector(&mut rng, n), random_vector(&mut rng, n), random_vector(&mut rng, n));
        let denom = qn.distance(&x, &y) + qn.distance(&y, &z);
        if denom > 0.0 {
            worst = worst.max(qn.distance(&x, &z) / denom);
        }
    }
    worst
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PansuEstimate {
    pub t_values: Vec<f64>,
    /// Linearized blow-up at each `t`, row-major.
    pub maps: Vec<Vec<Vec<f64>>>,
    pub limit: Vec<Vec<f64>>,
    /// Largest entry of the difference between the last two extrapolants.
    pub cauchy_estimate: f64,
}

/// `v ↦ δ_{1/t}(f(p)⁻¹ * f(p * δ_t v))`, linearized by central differences on `±e_i`.
fn blowup_linearization(
    alg: &LieAlgebra,
    f: &dyn Fn(&[f64]) -> Vec<f64>,
    dil: &Matrix<f64>,
    inv_dil: &Matrix<f64>,
    p: &[f64],
    fp_inv: &[f64],
) -> Matrix<f64> {
    let n = p.len();
    let mut cols = Vec::with_capacity(n);
    for i in 0..n {
        let mut g = [vec![0.0; n], vec![0.0; n]];
        for (slot, sign) in [(0, 1.0), (1, -1.0)] {
            let mut v = vec![0.0; n];
            v[i] = sign;
            let q = alg.bch_unchecked(p, &dil.mul_vec(&v));
            g[slot] = inv_dil.mul_vec(&alg.bch_unchecked(fp_inv, &f(&q)));
        }
        cols.push(g[0].iter().zip(&g[1]).map(|(a, b)| (a - b) / 2.0).collect());
    }
    Matrix::from_columns(n, &cols)
}

/// Numerical Pansu differential at `p` with Neville extrapolation to `t = 0`.
///
/// `t_list` should decrease towards 0. Fails with `NonConvergent` when the
/// last two diagonal extrapolants differ by more than `tol`.
pub fn pansu_differential(
    pair: &DiagonalHeintzePair,
    f: &GroupMap,
    p: &[f64],
    t_list: &[f64],
    tol: f64,
) -> Result<PansuEstimate> {
    let alg = pair.algebra();
    let n = pair.dim();
    if p.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: p.len() });
    }
    if t_list.len() < 2 {
        return Err(Error::Invalid("need at least two t values".into()));
    }
    let eval = |x: &[f64]| f.eval(alg, x);
    let fp_inv = alg.inverse(&eval(p));
    let mut maps = Vec::with_capacity(t_list.len());
    for &t in t_list {
        let dil = carnot_dilation_matrix(pair, &t)?;
        let inv_dil = carnot_dilation_matrix(pair, &(1.0 / t))?;
        if t.is_nan() || t <= 0.0 {
            return Err(Error::NonPositiveScale(t));
        }
        maps.push(blowup_linearization(alg, &eval, &dil, &inv_dil, p, &fp_inv));
    }
    // Neville tableau, entrywise, evaluated at t = 0.
    let m = t_list.len();
    let mut table: Vec<Matrix<f64>> = maps.clone();
    let mut diag = vec![table[0].clone()];
    for k in 1..m {
        let mut next = Vec::with_capacity(m - k);
        for i in k..m {
            let (ti, tik) = (t_list[i], t_list[i - k]);
            let a = table[i - k + 1].scale(&(-tik));
            let b = table[i - k].scale(&(-ti));
            next.push(a.sub(&b).scale(&(1.0 / (ti - tik))));
        }
        table = next;
        diag.push(table[0].clone());
    }
    let limit = diag[m - 1].clone();
    let prev = &diag[m - 2];
    let cauchy = limit
        .sub(prev)
        .rows_vec()
        .iter()
        .flatten()
        .fold(0.0f64, |acc, x| acc.max(x.abs()));
    if !(cauchy <= tol) {
        return Err(Error::NonConvergent { estimate: cauchy, tol });
    }
    Ok(PansuEstimate {
        t_values: t_list.to_vec(),
        maps: maps.iter().map(Matrix::rows_vec).collect(),
        limit: limit.rows_vec(),
        cauchy_estimate: cauchy,
    })
}

/// Exact blow-up maps of an affine rational map at rational scales `t`.
pub fn pansu_differential_affine(
    pair: &DiagonalHeintzePair,
    f: &AffineMap<Rational>,
    p: &[Rational],
    t_list: &[Rational],
) -> Result<Vec<Matrix<Rational>>> {
    let alg = pair.algebra();
    let n = pair.dim();
    if p.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: p.len() });
    }
    let fp_inv = alg.inverse(&f.apply(alg, p));
    let two = Rational::one() + Rational::one();
    let mut out = Vec::with_capacity(t_list.len());
    for t in t_list {
        if !t.is_positive() {
            return Err(Error::NonPositiveScale(rational_to_f64(t)));
        }
        let dil = carnot_dilation_matrix(pair, t)?;
        let inv_dil = carnot_dilation_matrix(pair, &t.recip())?;
        let mut cols = Vec::with_capacity(n);
        for i in 0..n {
            let mut e = vec![Rational::zero(); n];
            e[i] = Rational::one();
            let minus: Vec<Rational> = alg.inverse(&e);
            let g = |v: &[Rational]| {
                let q = alg.bch_unchecked(p, &dil.mul_vec(v));
                inv_dil.mul_vec(&alg.bch_unchecked(&fp_inv, &f.apply(alg, &q)))
            };
            let (gp, gm) = (g(&e), g(&minus));
            cols.push(gp.iter().zip(&gm).map(|(a, b)| (a - b) / &two).collect());
        }
        out.push(Matrix::from_columns(n, &cols));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{int, ratio};
    use crate::heintze::layer_decomposition;

    fn heisenberg_pair() -> DiagonalHeintzePair {
        let alg = LieAlgebra::from_brackets(vec!["e1".into(), "e2".into(), "e3".into()], &[(0, 1, vec![(2, int(1))])])
            .unwrap();
        layer_decomposition(&alg, &Matrix::diagonal(&[int(1), int(1), int(2)])).unwrap()
    }

    #[test]
    fn norm_examples() {
        let p = heisenberg_pair();
        let ip = DInnerProduct::standard(&p);
        assert_eq!(ip.gram(), &Matrix::identity(3));
        assert!((quasi_norm(&p, &ip, &[0.0, 0.0, 1.0]) - 1.0).abs() < 1e-15);
        assert!((quasi_norm(&p, &ip, &[2.0, 0.0, 4.0]) - 4.0).abs() < 1e-15);
        assert_eq!(quasi_distance(&p, &ip, &[0.3, 0.1, -2.0], &[0.3, 0.1, -2.0]), 0.0);
    }

    #[test]
    fn dilations_and_dimension() {
        let p = heisenberg_pair();
        assert_eq!(homogeneous_dimension(&p).unwrap(), 4);
        let x = carnot_dilation_exact(&p, &int(3), &[int(1), int(2), int(5)]).unwrap();
        assert_eq!(x, vec![int(3), int(6), int(45)]);
        assert!(carnot_dilation(&p, 0.0, &[1.0, 0.0, 0.0]).is_err());
        let d = carnot_dilation_matrix(&p, &ratio(2, 3)).unwrap();
        assert!(is_graded_automorphism(&p, &d).unwrap());
    }

    #[test]
    fn layer_mixing_is_not_graded() {
        let p = heisenberg_pair();
        let mut a = Matrix::<Rational>::identity(3);
        a.set(2, 0, int(1));
        assert!(p.algebra().is_automorphism(&a));
        assert!(!is_graded_automorphism(&p, &a).unwrap());
        assert_eq!(is_graded_automorphism(&p, &Matrix::<Rational>::zeros(3, 3)), Err(Error::Singular));
    }

    #[test]
    fn affine_blowup_is_exact() {
        let p = heisenberg_pair();
        let lin = Matrix::diagonal(&[int(2), ratio(1, 2), int(1)]);
        let f = AffineMap { translation: vec![int(1), int(-1), ratio(1, 3)], linear: lin.clone() };
        let maps = pansu_differential_affine(&p, &f, &[int(1), int(2), int(0)], &[int(1), ratio(1, 2), ratio(1, 7)]).unwrap();
        assert!(maps.iter().all(|m| m == &lin));
    }

    #[test]
    fn inner_product_rejects_mixed_layers() {
        let p = heisenberg_pair();
        let mut g = Matrix::<Rational>::identity(3);
        g.set(0, 2, ratio(1, 2));
        g.set(2, 0, ratio(1, 2));
        assert!(DInnerProduct::new(&p, g).is_err());
    }
}
