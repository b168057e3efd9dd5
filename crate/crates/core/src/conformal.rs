//! Similarity groups `N ⋊ (ℝ × Aut_g)`, pullback of conformal structures,
//! orbit truncations and circumcenter-invariant structures.

use std::sync::Arc;

use nalgebra::DMatrix;
use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::{rational_to_f64, Rational};
use crate::heintze::{subquotient, DiagonalHeintzePair, PreservedFlag};
use crate::linalg::Matrix;
use crate::metric::{is_graded_automorphism, AffineMap};
use crate::spd::{act, circumcenter, distance, dilatation, SpdPoint};

/// `x ↦ n * e^{tD}(A x)` with `e^t = scale`.
///
/// Exact arithmetic requires `e^{tD}` to be rational, so a scale other than
/// 1 is only accepted when every eigenvalue of `D` is an integer.
#[derive(Clone, Debug)]
pub struct SimilarityElement {
    pair: Arc<DiagonalHeintzePair>,
    pub translation: Vec<Rational>,
    pub scale: Rational,
    pub graded: Matrix<Rational>,
}

impl PartialEq for SimilarityElement {
    fn eq(&self, other: &Self) -> bool {
        self.pair.same_pair(&other.pair)
            && self.translation == other.translation
            && self.scale == other.scale
            && self.graded == other.graded
    }
}

/// `e^{tD} = Σ_j s^{λ_j} P_j` for integer `λ_j`.
pub fn exact_dilation(pair: &DiagonalHeintzePair, s: &Rational) -> Result<Matrix<Rational>> {
    if !s.is_positive() {
        return Err(Error::NonPositiveScale(rational_to_f64(s)));
    }
    let n = pair.dim();
    if s.is_one() {
        return Ok(Matrix::identity(n));
    }
    let mut out = Matrix::zeros(n, n);
    for (l, p) in pair.eigenvalues().iter().zip(pair.projectors()) {
        if !l.is_integer() {
            return Err(Error::Invalid("exact scaling needs integer eigenvalues".into()));
        }
        let k: i32 = l.to_integer().try_into().map_err(|_| Error::Invalid("eigenvalue too large".into()))?;
        out = out.add(&p.scale(&num_traits::pow::Pow::pow(s, k)));
    }
    Ok(out)
}

impl SimilarityElement {
    pub fn new(pair: Arc<DiagonalHeintzePair>, translation: Vec<Rational>, scale: Rational, graded: Matrix<Rational>) -> Result<Self> {
        let n = pair.dim();
        if translation.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: translation.len() });
        }
        exact_dilation(&pair, &scale)?;
        if !is_graded_automorphism(&pair, &graded)? {
            return Err(Error::Invalid("linear part is not a graded automorphism".into()));
        }
        Ok(SimilarityElement { pair, translation, scale, graded })
    }

    pub fn identity(pair: Arc<DiagonalHeintzePair>) -> Self {
        let n = pair.dim();
        SimilarityElement { pair, translation: vec![Rational::zero(); n], scale: Rational::one(), graded: Matrix::identity(n) }
    }

    pub fn pair(&self) -> &Arc<DiagonalHeintzePair> {
        &self.pair
    }

    /// `t = log(scale)`.
    pub fn t(&self) -> f64 {
        rational_to_f64(&self.scale).ln()
    }

    fn dilation(&self) -> Matrix<Rational> {
        exact_dilation(&self.pair, &self.scale).expect("validated at construction")
    }

    pub fn to_affine(&self) -> AffineMap<Rational> {
        AffineMap { translation: self.translation.clone(), linear: self.dilation().mul(&self.graded) }
    }

    pub fn apply(&self, x: &[Rational]) -> Vec<Rational> {
        self.to_affine().apply(self.pair.algebra(), x)
    }

    /// `(n₁ * e^{t₁D}A₁n₂, t₁+t₂, A₁A₂)`.
    pub fn compose(&self, other: &SimilarityElement) -> Result<SimilarityElement> {
        if !self.pair.same_pair(&other.pair) {
            return Err(Error::PairMismatch);
        }
        let moved = self.dilation().mul(&self.graded).mul_vec(&other.translation);
        Ok(SimilarityElement {
            pair: self.pair.clone(),
            translation: self.pair.algebra().bch_multiply(&self.translation, &moved)?,
            scale: &self.scale * &other.scale,
            graded: self.graded.mul(&other.graded),
        })
    }

    /// `(−A⁻¹e^{−tD}n, −t, A⁻¹)`.
    pub fn invert(&self) -> Result<SimilarityElement> {
        let ainv = self.graded.inverse()?;
        let scale = self.scale.recip();
        let back = ainv.mul(&exact_dilation(&self.pair, &scale)?);
        Ok(SimilarityElement {
            pair: self.pair.clone(),
            translation: back.mul_vec(&self.translation).into_iter().map(|c| -c).collect(),
            scale,
            graded: ainv,
        })
    }
}

/// Coordinates of the graded part of `linear` on the first layer, in the
/// echelon basis of `V₁`: the Pansu differential of an affine map there.
pub fn v1_block(pair: &DiagonalHeintzePair, linear: &Matrix<Rational>) -> Matrix<Rational> {
    let v1 = &pair.layers()[0];
    let p1 = &pair.projectors()[0];
    let cols: Vec<Vec<Rational>> = v1
        .basis()
        .iter()
        .map(|b| v1.coordinates(&p1.mul_vec(&linear.mul_vec(b))).expect("projector lands in V1"))
        .collect();
    Matrix::from_columns(v1.dim(), &cols)
}

pub fn to_dmatrix(m: &Matrix<Rational>) -> DMatrix<f64> {
    DMatrix::from_fn(m.nrows(), m.ncols(), |i, j| rational_to_f64(m.get(i, j)))
}

/// `g*μ(x) = (Dg(x)|_{V₁})ᵀ[μ(g x)]` for an affine `g`.
pub fn pullback(pair: &DiagonalHeintzePair, g: &AffineMap<Rational>, mu_at_gx: &SpdPoint) -> Result<SpdPoint> {
    act(&to_dmatrix(&v1_block(pair, &g.linear)).transpose(), mu_at_gx)
}

/// Pullback of a fiber structure on `𝔫_i/𝔫_{i−1}` through a flag-preserving
/// affine map, using the induced map on the quotient's first layer.
pub fn fiber_pullback(
    pair: &DiagonalHeintzePair,
    flag: &PreservedFlag,
    i: usize,
    g: &AffineMap<Rational>,
    mu: &SpdPoint,
) -> Result<SpdPoint> {
    if i == 0 || i > flag.steps.len() {
        return Err(Error::IndexOutOfRange { index: i, len: flag.steps.len() });
    }
    let (upper, lower) = (&flag.members[i], &flag.members[i - 1]);
    if !upper.image(&g.linear).is_subspace_of(upper) || !lower.image(&g.linear).is_subspace_of(lower) {
        return Err(Error::Invalid("map does not preserve the flag".into()));
    }
    let (quotient, reps) = subquotient(pair, upper, lower)?;
    let cols: Vec<Vec<Rational>> = reps
        .basis()
        .iter()
        .map(|r| reps.coordinates(&lower.reduce(&g.linear.mul_vec(r))).expect("flag preserved"))
        .collect();
    let induced = Matrix::from_columns(reps.dim(), &cols);
    pullback(&quotient, &AffineMap::linear(induced), mu)
}

/// A finitely generated group of similarities, optionally conjugated by an
/// exact affine map `F` (elements `F g F⁻¹`).
#[derive(Clone, Debug)]
pub struct GeneratedGroup {
    pair: Arc<DiagonalHeintzePair>,
    generators: Vec<SimilarityElement>,
    conjugator: Option<AffineMap<Rational>>,
}

impl GeneratedGroup {
    pub fn new(pair: Arc<DiagonalHeintzePair>, generators: Vec<SimilarityElement>, conjugator: Option<AffineMap<Rational>>) -> Result<Self> {
        if generators.iter().any(|g| !g.pair.same_pair(&pair)) {
            return Err(Error::PairMismatch);
        }
        if let Some(f) = &conjugator {
            if f.linear.nrows() != pair.dim() || f.translation.len() != pair.dim() {
                return Err(Error::DimensionMismatch { expected: pair.dim(), got: f.translation.len() });
            }
            if !pair.algebra().is_automorphism(&f.linear) {
                return Err(Error::Invalid("conjugator linear part is not an automorphism".into()));
            }
        }
        Ok(GeneratedGroup { pair, generators, conjugator })
    }

    pub fn pair(&self) -> &Arc<DiagonalHeintzePair> {
        &self.pair
    }

    fn conjugate(&self, g: &SimilarityElement) -> Result<AffineMap<Rational>> {
        let alg = self.pair.algebra();
        let a = g.to_affine();
        Ok(match &self.conjugator {
            None => a,
            Some(f) => f.compose(alg, &a).compose(alg, &f.inverse()?),
        })
    }

    /// Generators and their inverses, conjugated.
    pub fn symmetric_generators(&self) -> Result<Vec<AffineMap<Rational>>> {
        let mut out: Vec<AffineMap<Rational>> = Vec::new();
        for g in &self.generators {
            for h in [g.clone(), g.invert()?] {
                let c = self.conjugate(&h)?;
                if !out.contains(&c) {
                    out.push(c);
                }
            }
        }
        Ok(out)
    }

    /// Distinct elements given by words of length at most `cap`, in BFS order.
    pub fn elements(&self, cap: usize) -> Result<Vec<AffineMap<Rational>>> {
        let alg = self.pair.algebra();
        let gens = self.symmetric_generators()?;
        let mut all = vec![AffineMap::linear(Matrix::identity(self.pair.dim()))];
        let mut frontier = all.clone();
        for _ in 0..cap {
            let mut next = Vec::new();
            for w in &frontier {
                for g in &gens {
                    let c = g.compose(alg, w);
                    if !all.contains(&c) {
                        all.push(c.clone());
                        next.push(c);
                    }
                }
            }
            if next.is_empty() {
                break;
            }
            frontier = next;
        }
        Ok(all)
    }
}

pub type StructureField<'a> = &'a dyn Fn(&[f64]) -> SpdPoint;

#[derive(Clone, Debug, PartialEq)]
pub struct Orbit {
    pub points: Vec<SpdPoint>,
    pub diameter: f64,
    pub word_count: usize,
}

const DEDUP: f64 = 1e-9;

fn canonical_sort(points: &mut [SpdPoint]) {
    points.sort_by(|a, b| {
        a.matrix()
            .iter()
            .zip(b.matrix().iter())
            .map(|(x, y)| x.total_cmp(y))
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
    });
}

/// `M_x = {g*μ₀(x)}` over words of length `≤ cap`, deduplicated at `1e−9`
/// and sorted by matrix entries.
pub fn orbit_structure(group: &GeneratedGroup, mu0: StructureField, x: &[f64], cap: usize) -> Result<Orbit> {
    let alg = group.pair.algebra();
    let elements = group.elements(cap)?;
    let mut points: Vec<SpdPoint> = Vec::new();
    for g in &elements {
        let gx = g.to_f64().apply(alg, x);
        let p = pullback(&group.pair, g, &mu0(&gx))?;
        if points.iter().all(|q| distance(q, &p) >= DEDUP) {
            points.push(p);
        }
    }
    canonical_sort(&mut points);
    let mut diameter = 0.0f64;
    for (i, p) in points.iter().enumerate() {
        for q in &points[i + 1..] {
            diameter = diameter.max(distance(p, q));
        }
    }
    Ok(Orbit { points, diameter, word_count: elements.len() })
}

#[derive(Clone, Debug, PartialEq)]
pub struct InvariantPoint {
    pub x: Vec<f64>,
    pub mu: SpdPoint,
    pub radius: f64,
    pub orbit_size: usize,
    /// `max_g d(g*μ(x), μ(x))` over the group elements at the word cap.
    pub residual: f64,
}

fn center_at(group: &GeneratedGroup, mu0: StructureField, x: &[f64], cap: usize, tol: f64) -> Result<(SpdPoint, f64, usize)> {
    let lo = orbit_structure(group, mu0, x, cap)?;
    let hi = orbit_structure(group, mu0, x, cap + 1)?;
    if (hi.diameter - lo.diameter).abs() > tol.max(DEDUP) {
        return Err(Error::OrbitNotStable { previous: lo.diameter, current: hi.diameter });
    }
    let c = circumcenter(&hi.points, tol)?;
    Ok((c.center, c.radius, hi.points.len()))
}

/// `μ(x)` = circumcenter of the orbit `M_x`, with its invariance residual.
pub fn invariant_structure(group: &GeneratedGroup, mu0: StructureField, x: &[f64], cap: usize, tol: f64) -> Result<InvariantPoint> {
    let (mu, radius, orbit_size) = center_at(group, mu0, x, cap, tol)?;
    let alg = group.pair.algebra();
    let mut residual = 0.0f64;
    for g in group.elements(cap)? {
        let gx = g.to_f64().apply(alg, x);
        let mu_gx = if gx == x { mu.clone() } else { center_at(group, mu0, &gx, cap, tol)?.0 };
        residual = residual.max(distance(&pullback(&group.pair, &g, &mu_gx)?, &mu));
    }
    Ok(InvariantPoint { x: x.to_vec(), mu, radius, orbit_size, residual })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BlowupStep {
    pub s: f64,
    /// `K(Dg̃_j|_{V₁})` at each sample point.
    pub dilatations: Vec<f64>,
}

/// `K` of `g̃_j = F_j g F_j⁻¹` with `F_j = e^{s_j D} ∘ h_j`, at sample points.
pub fn blowup_demo(
    pair: &DiagonalHeintzePair,
    hs: &[AffineMap<Rational>],
    ss: &[f64],
    g: &AffineMap<Rational>,
    samples: &[Vec<f64>],
) -> Result<Vec<BlowupStep>> {
    if hs.len() != ss.len() {
        return Err(Error::DimensionMismatch { expected: hs.len(), got: ss.len() });
    }
    let alg = pair.algebra();
    let lambdas: Vec<f64> = pair.eigenvalues().iter().map(rational_to_f64).collect();
    let projectors: Vec<Matrix<f64>> = pair.projectors().iter().map(Matrix::to_f64).collect();
    let n = pair.dim();
    let dil = |s: f64| {
        lambdas.iter().zip(&projectors).fold(Matrix::<f64>::zeros(n, n), |acc, (l, p)| acc.add(&p.scale(&(s * l).exp())))
    };
    let mut out = Vec::with_capacity(hs.len());
    for (h, &s) in hs.iter().zip(ss) {
        let hinv = h.inverse()?;
        let conj = h.compose(alg, g).compose(alg, &hinv).to_f64();
        let lin = dil(s).mul(&conj.linear).mul(&dil(-s));
        let lin_exact_shape = v1_block_f64(pair, &lin);
        let mut dilatations = Vec::with_capacity(samples.len());
        for x in samples {
            if x.len() != n {
                return Err(Error::DimensionMismatch { expected: n, got: x.len() });
            }
            // Affine maps have the same differential at every point.
            dilatations.push(dilatation(&lin_exact_shape, None)?);
        }
        out.push(BlowupStep { s, dilatations });
    }
    Ok(out)
}

/// Float version of [`v1_block`].
pub fn v1_block_f64(pair: &DiagonalHeintzePair, linear: &Matrix<f64>) -> DMatrix<f64> {
    let v1 = &pair.layers()[0];
    let p1 = pair.projectors()[0].to_f64();
    let pivots = v1.pivots();
    let m = v1.dim();
    let mut out = DMatrix::zeros(m, m);
    for (c, b) in v1.basis().iter().enumerate() {
        let bf: Vec<f64> = b.iter().map(rational_to_f64).collect();
        let img = p1.mul_vec(&linear.mul_vec(&bf));
        for (r, &p) in pivots.iter().enumerate() {
            out[(r, c)] = img[p];
        }
    }
    out
}
