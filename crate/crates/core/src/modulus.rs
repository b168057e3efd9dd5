//! Box rings, segment-family modulus and the volume upper bound used in the
//! rigidity argument for capacity-preserving graded maps.
//!
//! All closed-form quantities are exact rationals. The padding polynomials
//! come from a symbolic BCH expansion of `w = y * z` over a polynomial ring,
//! bounded monomial by monomial on the boxes `|y_i| ≤ λ_i w_i`,
//! `|z_i| ≤ δ^{deg i}`.

use std::collections::BTreeMap;
use std::ops::{Add, Mul, Neg, Sub};

use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::{format_rational, rational_to_f64, Rational, Scalar};
use crate::heintze::DiagonalHeintzePair;
use crate::lie::Subspace;
use crate::linalg::Matrix;
use crate::metric::{carnot_degrees, homogeneous_dimension, is_graded_automorphism};

/// Multivariate polynomial with rational coefficients. A monomial is a
/// sorted list of `(variable, exponent)`.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct Poly {
    terms: BTreeMap<Vec<(usize, u32)>, Rational>,
}

impl Poly {
    pub fn var(i: usize) -> Self {
        let mut terms = BTreeMap::new();
        terms.insert(vec![(i, 1)], Rational::one());
        Poly { terms }
    }

    pub fn constant(c: Rational) -> Self {
        let mut p = Poly::default();
        if !c.is_zero() {
            p.terms.insert(Vec::new(), c);
        }
        p
    }

    pub fn terms(&self) -> impl Iterator<Item = (&[(usize, u32)], &Rational)> {
        self.terms.iter().map(|(m, c)| (m.as_slice(), c))
    }

    fn add_term(&mut self, m: Vec<(usize, u32)>, c: Rational) {
        let entry = self.terms.entry(m).or_insert_with(Rational::zero);
        *entry += c;
        if entry.is_zero() {
            self.terms.retain(|_, v| !v.is_zero());
        }
    }
}

fn merge(a: &[(usize, u32)], b: &[(usize, u32)]) -> Vec<(usize, u32)> {
    let mut out: Vec<(usize, u32)> = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() || j < b.len() {
        if j == b.len() || (i < a.len() && a[i].0 < b[j].0) {
            out.push(a[i]);
            i += 1;
        } else if i == a.len() || b[j].0 < a[i].0 {
            out.push(b[j]);
            j += 1;
        } else {
            out.push((a[i].0, a[i].1 + b[j].1));
            i += 1;
            j += 1;
        }
    }
    out
}

impl Add for Poly {
    type Output = Poly;
    fn add(mut self, rhs: Poly) -> Poly {
        for (m, c) in rhs.terms {
            self.add_term(m, c);
        }
        self
    }
}

impl Neg for Poly {
    type Output = Poly;
    fn neg(mut self) -> Poly {
        for c in self.terms.values_mut() {
            *c = -c.clone();
        }
        self
    }
}

impl Sub for Poly {
    type Output = Poly;
    fn sub(self, rhs: Poly) -> Poly {
        self + (-rhs)
    }
}

impl Mul for Poly {
    type Output = Poly;
    fn mul(self, rhs: Poly) -> Poly {
        let mut out = Poly::default();
        for (a, ca) in &self.terms {
            for (b, cb) in &rhs.terms {
                out.add_term(merge(a, b), ca * cb);
            }
        }
        out
    }
}

impl Zero for Poly {
    fn zero() -> Self {
        Poly::default()
    }
    fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }
}

impl One for Poly {
    fn one() -> Self {
        Poly::constant(Rational::one())
    }
}

impl Scalar for Poly {
    fn from_rational(q: &Rational) -> Self {
        Poly::constant(q.clone())
    }
}

/// A box ring `Y° \ C₀` in coordinates adapted to the layers.
///
/// `half_widths[i]` bounds `|x_i|` on `C₀`; the slab coordinate (first
/// coordinate of the first layer, `x₁₁`) is zero on `C₀`. `lambdas[j][l]` is
/// the factor by which the map stretches coordinate `e_{jl}`.
#[derive(Clone, Debug)]
pub struct BoxRing {
    pair: DiagonalHeintzePair,
    degrees: Vec<usize>,
    layer_coords: Vec<Vec<usize>>,
    half_widths: Vec<Rational>,
    delta: Rational,
    lambdas: Vec<Vec<Rational>>,
    q: usize,
}

impl BoxRing {
    pub fn new(pair: &DiagonalHeintzePair, half_widths: Vec<Rational>, delta: Rational, lambdas: Vec<Vec<Rational>>) -> Result<Self> {
        let n = pair.dim();
        // Integer degree ratios suffice here; the first layer need not generate.
        let layer_degrees = pair.carnot_degrees().ok_or(Error::NotCarnot)?;
        let q = layer_degrees.iter().zip(pair.layers()).map(|(d, l)| d * l.dim()).sum();
        if half_widths.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: half_widths.len() });
        }
        if !delta.is_positive() {
            return Err(Error::NonPositiveDelta(rational_to_f64(&delta)));
        }
        if lambdas.len() != pair.layers().len() {
            return Err(Error::DimensionMismatch { expected: pair.layers().len(), got: lambdas.len() });
        }
        let mut degrees = vec![0; n];
        let mut layer_coords = Vec::new();
        for ((layer, &deg), lam) in pair.layers().iter().zip(&layer_degrees).zip(&lambdas) {
            let coords = layer.pivots().to_vec();
            if layer != &Subspace::coordinate(n, &coords) {
                return Err(Error::Invalid("layers must be coordinate subspaces".into()));
            }
            if lam.len() != coords.len() {
                return Err(Error::DimensionMismatch { expected: coords.len(), got: lam.len() });
            }
            if lam.iter().any(|x| !x.is_positive()) || lam.windows(2).any(|w| w[0] < w[1]) {
                return Err(Error::Invalid("lambdas must be positive and non-increasing per layer".into()));
            }
            for &c in &coords {
                degrees[c] = deg;
            }
            layer_coords.push(coords);
        }
        if half_widths.iter().any(|w| !w.is_positive()) {
            return Err(Error::Invalid("half-widths must be positive".into()));
        }
        Ok(BoxRing { pair: pair.clone(), degrees, layer_coords, half_widths, delta, lambdas, q })
    }

    pub fn pair(&self) -> &DiagonalHeintzePair {
        &self.pair
    }

    pub fn dim(&self) -> usize {
        self.half_widths.len()
    }

    pub fn homogeneous_dimension(&self) -> usize {
        self.q
    }

    pub fn delta(&self) -> &Rational {
        &self.delta
    }

    pub fn half_widths(&self) -> &[Rational] {
        &self.half_widths
    }

    /// Coordinate index of `x₁₁`.
    pub fn slab(&self) -> usize {
        self.layer_coords[0][0]
    }

    pub fn degree(&self, i: usize) -> usize {
        self.degrees[i]
    }

    /// Stretch factor of coordinate `i`.
    pub fn lambda(&self, i: usize) -> &Rational {
        for (coords, lam) in self.layer_coords.iter().zip(&self.lambdas) {
            if let Some(l) = coords.iter().position(|&c| c == i) {
                return &lam[l];
            }
        }
        unreachable!("every coordinate lies in a layer")
    }

    pub fn lambda11(&self) -> &Rational {
        &self.lambdas[0][0]
    }

    /// `(layer, index)` labels, both 1-based.
    pub fn label(&self, i: usize) -> (usize, usize) {
        for (j, coords) in self.layer_coords.iter().enumerate() {
            if let Some(l) = coords.iter().position(|&c| c == i) {
                return (j + 1, l + 1);
            }
        }
        unreachable!("every coordinate lies in a layer")
    }

    pub fn is_delta_small(&self) -> bool {
        self.half_widths.iter().all(|w| &self.delta < w)
    }

    pub fn with_delta(&self, delta: Rational) -> Result<Self> {
        BoxRing::new(&self.pair, self.half_widths.clone(), delta, self.lambdas.clone())
    }

    /// Image of the ring under `δ_t`: widths scale by `t^{deg}`, `δ` by `t`.
    pub fn dilate(&self, t: &Rational) -> Result<Self> {
        let widths = self.half_widths.iter().zip(&self.degrees).map(|(w, &d)| w * pow(t, d as i32)).collect();
        BoxRing::new(&self.pair, widths, &self.delta * t, self.lambdas.clone())
    }

    pub fn scale_widths(&self, factor: &Rational) -> Result<Self> {
        BoxRing::new(&self.pair, self.half_widths.iter().map(|w| w * factor).collect(), self.delta.clone(), self.lambdas.clone())
    }
}

fn pow(x: &Rational, e: i32) -> Rational {
    num_traits::pow::Pow::pow(x, e)
}

/// `𝔏^{n−1}(C₀)`: product of full widths over all coordinates except `x₁₁`.
pub fn section_area(ring: &BoxRing) -> Rational {
    let two = Rational::from_integer(2.into());
    (0..ring.dim()).filter(|&i| i != ring.slab()).map(|i| &two * &ring.half_widths[i]).product()
}

#[derive(Clone, Debug, PartialEq)]
pub struct SegmentModulus {
    /// `M(Γ₁) = M(Γ₂)`.
    pub per_family: Rational,
    /// `M(Γ₁) + M(Γ₂)`.
    pub lower_bound: Rational,
}

pub fn segment_family_modulus(ring: &BoxRing) -> SegmentModulus {
    let height = &ring.delta / ring.lambda11();
    let per_family = section_area(ring) * pow(&height, 1 - ring.q as i32);
    SegmentModulus { lower_bound: &per_family * Rational::from_integer(2.into()), per_family }
}

/// Extra half-width per coordinate for the outer box `Y` (the slab entry is unused).
#[derive(Clone, Debug, PartialEq)]
pub struct Padding {
    pub pads: Vec<Rational>,
}

impl Padding {
    pub fn zero(ring: &BoxRing) -> Self {
        Padding { pads: vec![Rational::zero(); ring.dim()] }
    }

    /// `δ/λ_{1l}` on the first layer and `P_{jl}(δ)` above it.
    pub fn from_claim(ring: &BoxRing, polys: &[PaddingPolynomial]) -> Self {
        let mut pads = vec![Rational::zero(); ring.dim()];
        for &i in &ring.layer_coords[0][1..] {
            pads[i] = &ring.delta / ring.lambda(i);
        }
        for p in polys {
            pads[p.coordinate] = p.eval(&ring.delta);
        }
        Padding { pads }
    }
}

/// `𝔏^{n−1}(F)` for the padded slice `F = Y ∩ {x₁₁ = 0}`.
pub fn padded_section_area(ring: &BoxRing, padding: &Padding) -> Rational {
    let two = Rational::from_integer(2.into());
    (0..ring.dim()).filter(|&i| i != ring.slab()).map(|i| &two * (&ring.half_widths[i] + &padding.pads[i])).product()
}

/// `J·𝔏^{n−1}(F)·2(δ/λ₁₁)/δ^Q`.
pub fn upper_volume_bound(ring: &BoxRing, j: &Rational, padding: &Padding) -> Rational {
    let two = Rational::from_integer(2.into());
    j * padded_section_area(ring, padding) * two * (&ring.delta / ring.lambda11()) / pow(&ring.delta, ring.q as i32)
}

/// `J·𝔏^{n−1}(F)/𝔏^{n−1}(C₀)`, which the two modulus bounds force to be at least `λ₁₁^Q`.
pub fn volume_ratio(ring: &BoxRing, j: &Rational, padding: &Padding) -> Rational {
    j * padded_section_area(ring, padding) / section_area(ring)
}

/// `P_{jl}(δ) = Σ_k c_k δ^k` for one coordinate of layer `j ≥ 2`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PaddingPolynomial {
    pub coordinate: usize,
    pub layer: usize,
    pub index: usize,
    #[serde(serialize_with = "ser_rationals")]
    pub coefficients: Vec<Rational>,
}

fn ser_rationals<S: serde::Serializer>(v: &[Rational], s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_seq(v.iter().map(format_rational))
}

impl PaddingPolynomial {
    pub fn eval(&self, delta: &Rational) -> Rational {
        self.coefficients.iter().rev().fold(Rational::zero(), |acc, c| acc * delta + c)
    }

    pub fn eval_f64(&self, delta: f64) -> f64 {
        self.coefficients.iter().rev().fold(0.0, |acc, c| acc * delta + rational_to_f64(c))
    }

    pub fn has_constant_term(&self) -> bool {
        self.coefficients.first().is_some_and(|c| !c.is_zero())
    }
}

/// Bounds `|Q_{jl}| ≤ λ_{jl} P_{jl}(δ)` where `w = y * z = y + Q`.
///
/// The BCH product is expanded symbolically in `y_i` (variable `i`) and
/// `z_i` (variable `n + i`); each monomial is bounded by the product of the
/// box bounds of its factors, which is the interval enclosure of the
/// monomial over the box.
pub fn padding_polynomials(ring: &BoxRing) -> Vec<PaddingPolynomial> {
    let n = ring.dim();
    let alg = ring.pair.algebra();
    let y: Vec<Poly> = (0..n).map(|i| if i == ring.slab() { Poly::zero() } else { Poly::var(i) }).collect();
    let z: Vec<Poly> = (0..n).map(|i| Poly::var(n + i)).collect();
    let w = alg.bch_unchecked(&y, &z);
    let y_bound: Vec<Rational> = (0..n).map(|i| ring.lambda(i) * &ring.half_widths[i]).collect();

    let mut out = Vec::new();
    for k in 0..n {
        if ring.degrees[k] < 2 {
            continue;
        }
        let qk = w[k].clone() - y[k].clone();
        let mut coeffs: Vec<Rational> = Vec::new();
        for (mono, c) in qk.terms() {
            let mut bound = c.abs();
            let mut power = 0usize;
            for &(v, e) in mono {
                if v < n {
                    bound *= pow(&y_bound[v], e as i32);
                } else {
                    power += ring.degrees[v - n] * e as usize;
                }
            }
            if coeffs.len() <= power {
                coeffs.resize(power + 1, Rational::zero());
            }
            coeffs[power] += bound;
        }
        let lam = ring.lambda(k);
        let (layer, index) = ring.label(k);
        out.push(PaddingPolynomial { coordinate: k, layer, index, coefficients: coeffs.into_iter().map(|c| c / lam).collect() });
    }
    out
}

/// Uniform in `[-b, b]`, with a quarter of the mass on each endpoint so box
/// corners are actually visited.
fn sample_coord(rng: &mut ChaCha8Rng, b: f64) -> f64 {
    match rng.gen_range(0..4) {
        0 => b,
        1 => -b,
        _ => rng.gen_range(-b..=b),
    }
}

/// `(y, z)` with `y ∈ f(C₀)` and `|z_i| ≤ δ^{deg i}`.
fn sample_pair(ring: &BoxRing, rng: &mut ChaCha8Rng) -> (Vec<f64>, Vec<f64>) {
    let n = ring.dim();
    let delta = rational_to_f64(&ring.delta);
    let y = (0..n)
        .map(|i| if i == ring.slab() { 0.0 } else { sample_coord(rng, rational_to_f64(&(ring.lambda(i) * &ring.half_widths[i]))) })
        .collect();
    let z = (0..n).map(|i| sample_coord(rng, delta.powi(ring.degrees[i] as i32))).collect();
    (y, z)
}

/// Relative slack for floating point comparisons against exact bounds.
const SLACK: f64 = 1e-12;

/// Number of samples on which some `|w_k − y_k|` exceeds `λ_k P_k(δ)`.
pub fn padding_violations(ring: &BoxRing, polys: &[PaddingPolynomial], samples: usize, seed: u64) -> usize {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let delta = rational_to_f64(&ring.delta);
    let alg = ring.pair.algebra();
    (0..samples)
        .filter(|_| {
            let (y, z) = sample_pair(ring, &mut rng);
            let w = alg.bch_unchecked(&y, &z);
            polys.iter().any(|p| {
                let k = p.coordinate;
                let bound = rational_to_f64(ring.lambda(k)) * p.eval_f64(delta);
                (w[k] - y[k]).abs() > bound * (1.0 + SLACK) + SLACK
            })
        })
        .count()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InclusionWitness {
    pub y: Vec<f64>,
    pub z: Vec<f64>,
    pub w: Vec<f64>,
    pub coordinate: usize,
    pub value: f64,
    pub bound: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InclusionReport {
    pub holds: bool,
    pub checked: usize,
    pub witness: Option<InclusionWitness>,
}

/// Samples `w = y * z` with `y ∈ f(C₀)`, `|z_i| ≤ δ^{deg i}` and checks `w ∈ f(Y)`.
pub fn inclusion_check(ring: &BoxRing, padding: &Padding, samples: usize, seed: u64) -> InclusionReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = ring.dim();
    let alg = ring.pair.algebra();
    let delta = rational_to_f64(&ring.delta);
    let bounds: Vec<f64> = (0..n)
        .map(|i| if i == ring.slab() { delta } else { rational_to_f64(&(ring.lambda(i) * (&ring.half_widths[i] + &padding.pads[i]))) })
        .collect();
    for checked in 0..samples {
        let (y, z) = sample_pair(ring, &mut rng);
        let w = alg.bch_unchecked(&y, &z);
        if let Some(k) = (0..n).find(|&k| w[k].abs() > bounds[k] * (1.0 + SLACK) + SLACK) {
            let witness = InclusionWitness { value: w[k].abs(), bound: bounds[k], coordinate: k, y, z, w };
            return InclusionReport { holds: false, checked: checked + 1, witness: Some(witness) };
        }
    }
    InclusionReport { holds: true, checked: samples, witness: None }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RigidityReport {
    /// `|A e_{jl}|` per coordinate.
    pub stretch: Vec<Rational>,
    pub lambda11: Rational,
    pub q: usize,
    pub jacobian: Rational,
    pub lambda11_pow_q: Rational,
    /// `J ≤ λ₁₁^Q`.
    pub holds: bool,
    /// Every coordinate of layer `j` is stretched by exactly `λ₁₁^j`.
    pub similarity: bool,
}

/// `J = |det A|` against `λ₁₁^Q` for a diagonal graded automorphism.
pub fn rigidity_check(pair: &DiagonalHeintzePair, a: &Matrix<Rational>) -> Result<RigidityReport> {
    let n = pair.dim();
    if a.nrows() != n || a.ncols() != n {
        return Err(Error::DimensionMismatch { expected: n, got: a.nrows() });
    }
    if !a.is_diagonal() {
        return Err(Error::NotDiagonalForm("off-diagonal entries".into()));
    }
    let degrees = carnot_degrees(pair)?;
    let q = homogeneous_dimension(pair)?;
    for layer in pair.layers() {
        if layer != &Subspace::coordinate(n, layer.pivots()) {
            return Err(Error::NotDiagonalForm("layers are not coordinate subspaces".into()));
        }
    }
    if !is_graded_automorphism(pair, a)? {
        return Err(Error::NotDiagonalForm("not a graded automorphism".into()));
    }
    let stretch: Vec<Rational> = (0..n).map(|i| a.get(i, i).abs()).collect();
    let lambda11 = pair.layers()[0].pivots().iter().map(|&i| stretch[i].clone()).max().expect("first layer is non-empty");
    let jacobian: Rational = stretch.iter().cloned().product();
    let lambda11_pow_q = pow(&lambda11, q as i32);
    let similarity = pair
        .layers()
        .iter()
        .zip(&degrees)
        .all(|(l, &d)| l.pivots().iter().all(|&i| stretch[i] == pow(&lambda11, d as i32)));
    Ok(RigidityReport { holds: jacobian <= lambda11_pow_q, stretch, lambda11, q, jacobian, lambda11_pow_q, similarity })
}

#[cfg(test)]
mod tests;
