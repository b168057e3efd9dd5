//! Diagonal Heintze pairs `(𝔫, D)`: eigenvalue layering, Carnot-type
//! detection and the preserved flag of D-invariant subalgebras.

use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::{format_rational, rational_to_f64, rationalize, Rational};
use crate::lie::{LieAlgebra, Subspace};
use crate::linalg::{characteristic_polynomial, Matrix};

/// A nilpotent Lie algebra with a diagonalizable derivation of positive,
/// rational spectrum.
#[derive(Clone, Debug, PartialEq)]
pub struct DiagonalHeintzePair {
    algebra: LieAlgebra,
    derivation: Matrix<Rational>,
    eigenvalues: Vec<Rational>,
    layers: Vec<Subspace>,
    projectors: Vec<Matrix<Rational>>,
}

/// Builds the layering `𝔫 = ⊕ V_λ` of `D`.
pub fn layer_decomposition(algebra: &LieAlgebra, derivation: &Matrix<Rational>) -> Result<DiagonalHeintzePair> {
    let n = algebra.dim();
    if derivation.nrows() != n || derivation.ncols() != n {
        return Err(Error::DimensionMismatch { expected: n, got: derivation.nrows() });
    }
    if let Some((i, j)) = algebra.derivation_defect(derivation) {
        return Err(Error::NotDerivation(i + 1, j + 1));
    }
    let eigenvalues = rational_spectrum(derivation)?;
    if let Some(bad) = eigenvalues.iter().find(|l| !l.is_positive()) {
        return Err(Error::NonPositiveEigenvalue(format_rational(bad)));
    }
    let mut layers = Vec::with_capacity(eigenvalues.len());
    for l in &eigenvalues {
        let shifted = derivation.sub(&Matrix::identity(n).scale(l));
        layers.push(Subspace::span(n, &shifted.kernel()));
    }
    if layers.iter().map(Subspace::dim).sum::<usize>() != n {
        return Err(Error::NotDiagonalizable);
    }
    let projectors = layer_projectors(n, &layers)?;
    Ok(DiagonalHeintzePair { algebra: algebra.clone(), derivation: derivation.clone(), eigenvalues, layers, projectors })
}

fn layer_projectors(n: usize, layers: &[Subspace]) -> Result<Vec<Matrix<Rational>>> {
    if n == 0 {
        return Ok(Vec::new());
    }
    let cols: Vec<Vec<Rational>> = layers.iter().flat_map(|l| l.basis().iter().cloned()).collect();
    let b = Matrix::from_columns(n, &cols);
    let binv = b.inverse()?;
    let mut out = Vec::with_capacity(layers.len());
    let mut offset = 0;
    for l in layers {
        let mut e = vec![Rational::zero(); n];
        for x in e.iter_mut().skip(offset).take(l.dim()) {
            *x = Rational::one();
        }
        offset += l.dim();
        out.push(b.mul(&Matrix::diagonal(&e)).mul(&binv));
    }
    Ok(out)
}

fn eval_poly(coeffs: &[Rational], x: &Rational) -> Rational {
    coeffs.iter().rev().fold(Rational::zero(), |acc, c| acc * x + c)
}

/// Divides by `(x − r)`, assuming `r` is a root.
fn deflate(coeffs: &[Rational], r: &Rational) -> Vec<Rational> {
    let deg = coeffs.len() - 1;
    let mut out = vec![Rational::zero(); deg];
    let mut carry = Rational::zero();
    for k in (1..=deg).rev() {
        carry = coeffs[k].clone() + carry * r;
        out[k - 1] = carry.clone();
    }
    out
}

/// Distinct eigenvalues in increasing order; every root of the
/// characteristic polynomial must be rational.
fn rational_spectrum(d: &Matrix<Rational>) -> Result<Vec<Rational>> {
    let n = d.nrows();
    if n == 0 {
        return Ok(Vec::new());
    }
    let mut poly = characteristic_polynomial(d);
    let approx = d.to_nalgebra().complex_eigenvalues();
    let mut roots: Vec<Rational> = Vec::new();
    for z in approx.iter() {
        if poly.len() == 1 {
            break;
        }
        for max_den in [1i64, 12, 1000, 1_000_000] {
            let Some(r) = rationalize(z.re, max_den) else { continue };
            if roots.contains(&r) || !eval_poly(&poly, &r).is_zero() {
                continue;
            }
            while poly.len() > 1 && eval_poly(&poly, &r).is_zero() {
                poly = deflate(&poly, &r);
            }
            roots.push(r);
            break;
        }
    }
    if poly.len() > 1 {
        if approx.iter().any(|z| z.im.abs() > 1e-9 * (1.0 + z.re.abs())) {
            return Err(Error::NotDiagonalizable);
        }
        let leftover = approx
            .iter()
            .map(|z| z.re)
            .find(|x| !roots.iter().any(|r| (rational_to_f64(r) - x).abs() < 1e-6))
            .unwrap_or(f64::NAN);
        return Err(Error::IrrationalSpectrum(leftover));
    }
    roots.sort();
    Ok(roots)
}

impl DiagonalHeintzePair {
    pub fn algebra(&self) -> &LieAlgebra {
        &self.algebra
    }

    pub fn derivation(&self) -> &Matrix<Rational> {
        &self.derivation
    }

    pub fn dim(&self) -> usize {
        self.algebra.dim()
    }

    /// Distinct eigenvalues `λ₁ < ⋯ < λ_r`.
    pub fn eigenvalues(&self) -> &[Rational] {
        &self.eigenvalues
    }

    pub fn layers(&self) -> &[Subspace] {
        &self.layers
    }

    /// Exact projector onto `V_{λ_j}` along the other layers.
    pub fn projectors(&self) -> &[Matrix<Rational>] {
        &self.projectors
    }

    pub fn smallest_eigenvalue(&self) -> Option<&Rational> {
        self.eigenvalues.first()
    }

    /// `λ_j / λ₁` when every ratio is an integer.
    pub fn carnot_degrees(&self) -> Option<Vec<usize>> {
        let l1 = self.eigenvalues.first()?;
        self.eigenvalues
            .iter()
            .map(|l| {
                let r = l / l1;
                r.is_integer().then(|| r.to_integer().try_into().ok()).flatten()
            })
            .collect()
    }

    pub fn is_carnot_type(&self) -> bool {
        is_carnot_type(self)
    }

    pub fn same_pair(&self, other: &DiagonalHeintzePair) -> bool {
        self.algebra == other.algebra && self.derivation == other.derivation
    }

    /// The pair transported by `T`: algebra `T⁻¹[T·, T·]`, derivation `T⁻¹ D T`.
    pub fn change_basis(&self, t: &Matrix<Rational>) -> Result<DiagonalHeintzePair> {
        let algebra = self.algebra.change_basis(t)?;
        let d = t.inverse()?.mul(&self.derivation).mul(t);
        layer_decomposition(&algebra, &d)
    }
}

/// `V_{λ₁}` generates `𝔫` and all eigenvalues are integer multiples of `λ₁`.
/// The zero algebra counts as Carnot.
pub fn is_carnot_type(pair: &DiagonalHeintzePair) -> bool {
    if pair.dim() == 0 {
        return true;
    }
    let generated = pair.algebra.generated_subalgebra(&pair.layers[0]).expect("same ambient");
    generated.is_full() && pair.carnot_degrees().is_some()
}

/// One step `𝔫_i / 𝔫_{i−1}` of a flag.
#[derive(Clone, Debug, PartialEq)]
pub struct FlagStep {
    /// Representatives of a basis of the quotient, as vectors of `𝔫`.
    pub representatives: Vec<Vec<Rational>>,
    pub quotient: DiagonalHeintzePair,
    /// `λ⁽ⁱ⁾`, the smallest eigenvalue of the induced derivation.
    pub smallest_eigenvalue: Rational,
}

/// `0 = 𝔫₀ < 𝔫₁ < ⋯ < 𝔫_s = 𝔫` with Carnot-type quotients.
#[derive(Clone, Debug, PartialEq)]
pub struct PreservedFlag {
    pub members: Vec<Subspace>,
    pub steps: Vec<FlagStep>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FlagMemberReport {
    pub basis_rows: Vec<Vec<String>>,
    pub quotient_dim: usize,
    pub quotient_eigenvalues: Vec<String>,
    pub carnot_step_count: usize,
}

impl PreservedFlag {
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn dims(&self) -> Vec<usize> {
        self.members.iter().map(Subspace::dim).collect()
    }

    /// One entry per nonzero member `𝔫_i`, describing `𝔫_i / 𝔫_{i−1}`.
    pub fn report(&self) -> Vec<FlagMemberReport> {
        self.members
            .iter()
            .skip(1)
            .zip(&self.steps)
            .map(|(m, step)| FlagMemberReport {
                basis_rows: m.basis().iter().map(|r| r.iter().map(format_rational).collect()).collect(),
                quotient_dim: step.quotient.dim(),
                quotient_eigenvalues: step.quotient.eigenvalues().iter().map(format_rational).collect(),
                carnot_step_count: step.quotient.carnot_degrees().and_then(|d| d.last().copied()).unwrap_or(0),
            })
            .collect()
    }

    /// Exact checks: members D-invariant, each an ideal in the next, every
    /// quotient of Carnot type.
    pub fn verify(&self, pair: &DiagonalHeintzePair) -> bool {
        let alg = pair.algebra();
        let d = pair.derivation();
        let chain_ok = self.members.windows(2).all(|w| {
            w[0].is_subspace_of(&w[1]) && w[0].dim() < w[1].dim() && alg.is_ideal_of(&w[0], &w[1])
        });
        let invariant = self.members.iter().all(|m| m.image(d).is_subspace_of(m));
        let ends = self.members.first().is_some_and(Subspace::is_zero) && self.members.last().is_some_and(Subspace::is_full);
        chain_ok && invariant && ends && self.steps.iter().all(|s| s.quotient.is_carnot_type())
    }
}

/// The pair induced on `upper / lower`, with the representatives used as its basis.
pub fn subquotient(pair: &DiagonalHeintzePair, upper: &Subspace, lower: &Subspace) -> Result<(DiagonalHeintzePair, Subspace)> {
    let alg = pair.algebra();
    if !lower.is_subspace_of(upper) || !alg.is_subalgebra(upper) || !alg.is_ideal_of(lower, upper) {
        return Err(Error::NotIdeal);
    }
    let reduced: Vec<Vec<Rational>> = upper.basis().iter().map(|u| lower.reduce(u)).collect();
    let reps = Subspace::span(alg.dim(), &reduced);
    let m = reps.dim();
    let coords = |v: &[Rational]| reps.coordinates(&lower.reduce(v)).expect("image stays in the subquotient");
    let mut brackets = Vec::new();
    for a in 0..m {
        for b in a + 1..m {
            let c = coords(&alg.bracket(&reps.basis()[a], &reps.basis()[b])?);
            let result: Vec<(usize, Rational)> = c.into_iter().enumerate().filter(|(_, x)| !x.is_zero()).collect();
            if !result.is_empty() {
                brackets.push((a, b, result));
            }
        }
    }
    let names: Vec<String> = reps.pivots().iter().map(|&p| alg.names()[p].clone()).collect();
    let q = LieAlgebra::from_brackets(names, &brackets)?;
    let cols: Vec<Vec<Rational>> = reps.basis().iter().map(|r| coords(&pair.derivation().mul_vec(r))).collect();
    let d = Matrix::from_columns(m, &cols);
    Ok((layer_decomposition(&q, &d)?, reps))
}

/// Members of the flag, refined until every quotient is of Carnot type.
fn flag_members(pair: &DiagonalHeintzePair) -> Result<Vec<Subspace>> {
    let n = pair.dim();
    if is_carnot_type(pair) {
        return Ok(if n == 0 { vec![Subspace::zero(0)] } else { vec![Subspace::zero(n), Subspace::full(n)] });
    }
    let alg = pair.algebra();
    let mut tower = vec![Subspace::zero(n), alg.generated_subalgebra(&pair.layers()[0])?];
    while !tower.last().unwrap().is_full() {
        let next = alg.normalizer(tower.last().unwrap())?;
        debug_assert!(next.dim() > tower.last().unwrap().dim());
        tower.push(next);
    }
    let mut members = vec![Subspace::zero(n)];
    for w in tower.windows(2) {
        let (q, reps) = subquotient(pair, &w[1], &w[0])?;
        if is_carnot_type(&q) {
            members.push(w[1].clone());
            continue;
        }
        // Pull the quotient's own flag back through the projection.
        for sub in flag_members(&q)?.iter().skip(1) {
            let mut vecs: Vec<Vec<Rational>> = w[0].basis().to_vec();
            for c in sub.basis() {
                let mut v = vec![Rational::zero(); n];
                for (coef, r) in c.iter().zip(reps.basis()) {
                    for (vi, ri) in v.iter_mut().zip(r) {
                        *vi += coef * ri;
                    }
                }
                vecs.push(v);
            }
            members.push(Subspace::span(n, &vecs));
        }
    }
    Ok(members)
}

/// Generated subalgebra of the lowest layer, normalizer tower, and recursive
/// refinement of the non-Carnot quotients.
pub fn preserved_sequence(pair: &DiagonalHeintzePair) -> Result<PreservedFlag> {
    let members = flag_members(pair)?;
    let mut steps = Vec::with_capacity(members.len().saturating_sub(1));
    for w in members.windows(2) {
        let (quotient, reps) = subquotient(pair, &w[1], &w[0])?;
        let smallest_eigenvalue = quotient.smallest_eigenvalue().cloned().unwrap_or_else(Rational::zero);
        steps.push(FlagStep { representatives: reps.basis().to_vec(), quotient, smallest_eigenvalue });
    }
    Ok(PreservedFlag { members, steps })
}

/// `(𝔫_i / 𝔫_{i−1}, D̄)` and `λ⁽ⁱ⁾`, for `1 ≤ i ≤ s`.
pub fn induced_pair(flag: &PreservedFlag, i: usize) -> Result<(&DiagonalHeintzePair, &Rational)> {
    if i == 0 || i > flag.steps.len() {
        return Err(Error::IndexOutOfRange { index: i, len: flag.steps.len() });
    }
    let step = &flag.steps[i - 1];
    Ok((&step.quotient, &step.smallest_eigenvalue))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::int;

    fn diag(xs: &[i64]) -> Matrix<Rational> {
        Matrix::diagonal(&xs.iter().map(|&x| int(x)).collect::<Vec<_>>())
    }

    fn heisenberg() -> LieAlgebra {
        LieAlgebra::from_brackets(vec!["e1".into(), "e2".into(), "e3".into()], &[(0, 1, vec![(2, int(1))])]).unwrap()
    }

    #[test]
    fn layering_of_standard_heisenberg() {
        let p = layer_decomposition(&heisenberg(), &diag(&[1, 1, 2])).unwrap();
        assert_eq!(p.eigenvalues(), &[int(1), int(2)]);
        assert_eq!(p.layers()[0], Subspace::coordinate(3, &[0, 1]));
        assert_eq!(p.layers()[1], Subspace::coordinate(3, &[2]));
        assert!(p.is_carnot_type());
    }

    #[test]
    fn derivation_errors() {
        assert_eq!(layer_decomposition(&heisenberg(), &diag(&[1, 1, 1])), Err(Error::NotDerivation(1, 2)));
        let jordan = Matrix::from_rows(vec![vec![int(1), int(1)], vec![int(0), int(1)]]).unwrap();
        assert_eq!(layer_decomposition(&LieAlgebra::abelian(2), &jordan), Err(Error::NotDiagonalizable));
        let rot = Matrix::from_rows(vec![vec![int(0), int(-1)], vec![int(1), int(0)]]).unwrap();
        assert_eq!(layer_decomposition(&LieAlgebra::abelian(2), &rot), Err(Error::NotDiagonalizable));
        let irr = Matrix::from_rows(vec![vec![int(0), int(2)], vec![int(1), int(0)]]).unwrap();
        assert!(matches!(layer_decomposition(&LieAlgebra::abelian(2), &irr), Err(Error::IrrationalSpectrum(_))));
        assert!(matches!(
            layer_decomposition(&LieAlgebra::abelian(2), &diag(&[1, -1])),
            Err(Error::NonPositiveEigenvalue(_))
        ));
    }

    #[test]
    fn non_diagonal_derivation_is_diagonalized() {
        // D = [[1,1],[0,2]] on ℝ², eigenvectors e1 and e1+e2.
        let d = Matrix::from_rows(vec![vec![int(1), int(1)], vec![int(0), int(2)]]).unwrap();
        let p = layer_decomposition(&LieAlgebra::abelian(2), &d).unwrap();
        assert_eq!(p.layers()[1], Subspace::span(2, &[vec![int(1), int(1)]]));
        let sum = p.projectors()[0].add(&p.projectors()[1]);
        assert_eq!(sum, Matrix::identity(2));
    }

    #[test]
    fn refinement_on_abelian_three_layers() {
        let p = layer_decomposition(&LieAlgebra::abelian(3), &diag(&[1, 2, 3])).unwrap();
        let flag = preserved_sequence(&p).unwrap();
        assert_eq!(flag.dims(), vec![0, 1, 2, 3]);
        assert!(flag.verify(&p));
        assert_eq!(induced_pair(&flag, 3).unwrap().1, &int(3));
        assert!(induced_pair(&flag, 4).is_err());
    }

    #[test]
    fn heisenberg_123_flag() {
        let p = layer_decomposition(&heisenberg(), &diag(&[1, 2, 3])).unwrap();
        assert!(!p.is_carnot_type());
        let flag = preserved_sequence(&p).unwrap();
        assert_eq!(flag.members[1], Subspace::coordinate(3, &[0]));
        assert_eq!(flag.members[2], Subspace::coordinate(3, &[0, 2]));
        let lows: Vec<_> = flag.steps.iter().map(|s| s.smallest_eigenvalue.clone()).collect();
        assert_eq!(lows, vec![int(1), int(3), int(2)]);
        assert!(flag.verify(&p));
    }
}
