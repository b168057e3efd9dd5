use num_traits::Zero;
use serde::Serialize;

use super::bch::{bch_terms, BchTerm};
use super::subspace::Subspace;
use crate::error::{Error, Result};
use crate::field::{Field, Rational, Scalar};
use crate::linalg::Matrix;

/// A finite-dimensional Lie algebra given by rational structure constants
/// `[e_i, e_j] = Σ_k c[i][j][k] e_k`.
///
/// Construction does not check the axioms; [`LieAlgebra::validate`] does.
/// The nilpotency class and the truncated BCH series are computed once at
/// construction.
#[derive(Clone, Debug)]
pub struct LieAlgebra {
    names: Vec<String>,
    table: Vec<Vec<Vec<Rational>>>,
    /// Nonzero `(i, j, k, c)` entries, all `(i, j)` pairs.
    entries: Vec<(usize, usize, usize, Rational)>,
    class: Option<usize>,
    bch: Vec<BchTerm>,
}

impl PartialEq for LieAlgebra {
    fn eq(&self, other: &Self) -> bool {
        self.names == other.names && self.table == other.table
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ValidationReport {
    pub antisymmetry_ok: bool,
    pub jacobi_ok: bool,
    /// 1-based `(i, j, k)` with `c[i][j][k] ≠ −c[j][i][k]`.
    pub antisymmetry_violations: Vec<(usize, usize, usize)>,
    /// 1-based basis triples `i < j < k` where the Jacobi sum is nonzero.
    pub jacobi_violations: Vec<(usize, usize, usize)>,
    pub nilpotency_class: Option<usize>,
}

impl LieAlgebra {
    /// Builds an algebra from a full `n × n × n` table.
    pub fn from_table(names: Vec<String>, table: Vec<Vec<Vec<Rational>>>) -> Result<Self> {
        let n = names.len();
        if table.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: table.len() });
        }
        for row in &table {
            if row.len() != n {
                return Err(Error::DimensionMismatch { expected: n, got: row.len() });
            }
            for cell in row {
                if cell.len() != n {
                    return Err(Error::DimensionMismatch { expected: n, got: cell.len() });
                }
            }
        }
        let mut entries = Vec::new();
        for (i, row) in table.iter().enumerate() {
            for (j, cell) in row.iter().enumerate() {
                for (k, c) in cell.iter().enumerate() {
                    if !c.is_zero() {
                        entries.push((i, j, k, c.clone()));
                    }
                }
            }
        }
        let mut alg = LieAlgebra { names, table, entries, class: None, bch: Vec::new() };
        alg.class = alg.lower_central_series().ok().map(|s| s.len() - 1);
        if let Some(c) = alg.class {
            alg.bch = bch_terms(c.max(1));
        }
        Ok(alg)
    }

    /// Builds an antisymmetric algebra from the brackets `[e_i, e_j]` with `i < j`.
    pub fn from_brackets(names: Vec<String>, brackets: &[(usize, usize, Vec<(usize, Rational)>)]) -> Result<Self> {
        let n = names.len();
        let mut table = vec![vec![vec![Rational::zero(); n]; n]; n];
        for (i, j, result) in brackets {
            let (i, j) = (*i, *j);
            if i >= n || j >= n {
                return Err(Error::Invalid(format!("bracket index ({}, {}) out of range", i + 1, j + 1)));
            }
            if i >= j {
                return Err(Error::Invalid(format!("bracket ({}, {}) must have i < j", i + 1, j + 1)));
            }
            for (k, c) in result {
                if *k >= n {
                    return Err(Error::Invalid(format!("result index {} out of range", k + 1)));
                }
                table[i][j][*k] += c.clone();
                table[j][i][*k] -= c.clone();
            }
        }
        Self::from_table(names, table)
    }

    pub fn abelian(n: usize) -> Self {
        let names = (1..=n).map(|i| format!("e{i}")).collect();
        Self::from_brackets(names, &[]).expect("abelian algebra")
    }

    pub fn dim(&self) -> usize {
        self.names.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn structure_constant(&self, i: usize, j: usize, k: usize) -> &Rational {
        &self.table[i][j][k]
    }

    /// Nonzero structure constants `(i, j, k, c)` (0-based), both orders of `(i, j)`.
    pub fn entries(&self) -> &[(usize, usize, usize, Rational)] {
        &self.entries
    }

    pub fn nilpotency_class(&self) -> Option<usize> {
        self.class
    }

    pub fn basis_vector<F: Scalar>(&self, i: usize) -> Vec<F> {
        let mut v = vec![F::zero(); self.dim()];
        v[i] = F::one();
        v
    }

    fn check_len<F>(&self, x: &[F]) -> Result<()> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: x.len() });
        }
        Ok(())
    }

    /// `[x, y]`, bilinear over any scalar ring.
    pub fn bracket<F: Scalar>(&self, x: &[F], y: &[F]) -> Result<Vec<F>> {
        self.check_len(x)?;
        self.check_len(y)?;
        Ok(self.bracket_unchecked(x, y))
    }

    pub(crate) fn bracket_unchecked<F: Scalar>(&self, x: &[F], y: &[F]) -> Vec<F> {
        let mut out = vec![F::zero(); self.dim()];
        for (i, j, k, c) in &self.entries {
            if x[*i].is_zero() || y[*j].is_zero() {
                continue;
            }
            out[*k] = out[*k].clone() + F::from_rational(c) * x[*i].clone() * y[*j].clone();
        }
        out
    }

    /// Group law in exponential coordinates: `log(exp x · exp y)`.
    pub fn bch_multiply<F: Scalar>(&self, x: &[F], y: &[F]) -> Result<Vec<F>> {
        self.check_len(x)?;
        self.check_len(y)?;
        if self.class.is_none() {
            return Err(self.not_nilpotent());
        }
        Ok(self.bch_unchecked(x, y))
    }

    pub(crate) fn bch_unchecked<F: Scalar>(&self, x: &[F], y: &[F]) -> Vec<F> {
        let n = self.dim();
        let depth = self.bch.last().map_or(1, |t| t.word.len());
        // nested[len][bits] = value of the right-nested bracket of that suffix word.
        let mut nested: Vec<Vec<Vec<F>>> = Vec::with_capacity(depth + 1);
        nested.push(Vec::new());
        nested.push(vec![x.to_vec(), y.to_vec()]);
        for len in 2..=depth {
            let prev = &nested[len - 1];
            let mut level = Vec::with_capacity(1 << len);
            for bits in 0usize..(1 << len) {
                let head = bits >> (len - 1) & 1;
                let tail = bits & ((1 << (len - 1)) - 1);
                let letter = if head == 0 { x } else { y };
                level.push(self.bracket_unchecked(letter, &prev[tail]));
            }
            nested.push(level);
        }
        let mut out = vec![F::zero(); n];
        for term in &self.bch {
            let len = term.word.len();
            let bits = term.word.iter().fold(0usize, |acc, &b| acc << 1 | b as usize);
            let v = &nested[len][bits];
            if v.iter().all(|c| c.is_zero()) {
                continue;
            }
            let c = F::from_rational(&term.coefficient);
            for (o, vi) in out.iter_mut().zip(v) {
                *o = o.clone() + c.clone() * vi.clone();
            }
        }
        out
    }

    pub fn inverse<F: Scalar>(&self, x: &[F]) -> Vec<F> {
        x.iter().map(|c| -c.clone()).collect()
    }

    fn not_nilpotent(&self) -> Error {
        match self.lower_central_series() {
            Err(e) => e,
            Ok(_) => Error::NotNilpotent { stable_dim: 0 },
        }
    }

    pub fn validate(&self) -> Result<ValidationReport> {
        let n = self.dim();
        let mut anti = Vec::new();
        for i in 0..n {
            for j in i..n {
                for k in 0..n {
                    let s = self.table[i][j][k].clone() + self.table[j][i][k].clone();
                    if !s.is_zero() {
                        anti.push((i + 1, j + 1, k + 1));
                    }
                }
            }
        }
        let mut jacobi = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                for k in j + 1..n {
                    let (a, b, c) = (self.basis_vector(i), self.basis_vector(j), self.basis_vector(k));
                    let t1 = self.bracket_unchecked(&a, &self.bracket_unchecked(&b, &c));
                    let t2 = self.bracket_unchecked(&b, &self.bracket_unchecked(&c, &a));
                    let t3 = self.bracket_unchecked(&c, &self.bracket_unchecked::<Rational>(&a, &b));
                    if t1.iter().zip(&t2).zip(&t3).any(|((p, q), r)| !(p.clone() + q.clone() + r.clone()).is_zero()) {
                        jacobi.push((i + 1, j + 1, k + 1));
                    }
                }
            }
        }
        let report = ValidationReport {
            antisymmetry_ok: anti.is_empty(),
            jacobi_ok: jacobi.is_empty(),
            antisymmetry_violations: anti,
            jacobi_violations: jacobi,
            nilpotency_class: self.class,
        };
        if report.antisymmetry_ok && report.jacobi_ok && self.class.is_none() {
            return Err(self.not_nilpotent());
        }
        Ok(report)
    }

    /// `[A, B]` for subspaces: span of brackets of basis vectors.
    pub fn bracket_spaces(&self, a: &Subspace, b: &Subspace) -> Subspace {
        let mut vecs = Vec::new();
        for u in a.basis() {
            for w in b.basis() {
                let v = self.bracket_unchecked(u, w);
                if v.iter().any(|c| !c.is_zero()) {
                    vecs.push(v);
                }
            }
        }
        Subspace::span(self.dim(), &vecs)
    }

    /// `γ₁ = 𝔫, γ_{i+1} = [𝔫, γ_i]`, ending with the zero subspace.
    pub fn lower_central_series(&self) -> Result<Vec<Subspace>> {
        let n = self.dim();
        let full = Subspace::full(n);
        let mut series = vec![full.clone()];
        loop {
            let last = series.last().unwrap();
            if last.is_zero() {
                return Ok(series);
            }
            let next = self.bracket_spaces(&full, last);
            if next.dim() == last.dim() {
                return Err(Error::NotNilpotent { stable_dim: next.dim() });
            }
            series.push(next);
        }
    }

    pub fn is_subalgebra(&self, h: &Subspace) -> bool {
        self.bracket_spaces(h, h).is_subspace_of(h)
    }

    pub fn is_ideal_of(&self, ideal: &Subspace, within: &Subspace) -> bool {
        self.bracket_spaces(within, ideal).is_subspace_of(ideal)
    }

    /// Smallest bracket-closed subspace containing `s`.
    pub fn generated_subalgebra(&self, s: &Subspace) -> Result<Subspace> {
        s.check_ambient(self.dim())?;
        let mut current = s.clone();
        loop {
            let next = current.sum(&self.bracket_spaces(s, &current));
            if next.dim() == current.dim() {
                return Ok(current);
            }
            current = next;
        }
    }

    /// `N(h) = {X : [X, Y] ∈ h for all Y ∈ h}`.
    pub fn normalizer(&self, h: &Subspace) -> Result<Subspace> {
        h.check_ambient(self.dim())?;
        if !self.is_subalgebra(h) {
            return Err(Error::NotSubalgebra);
        }
        let n = self.dim();
        let ann = h.annihilator();
        let mut eqs: Vec<Vec<Rational>> = Vec::new();
        for b in h.basis() {
            // column i of ad_b^T: [e_i, b]
            let images: Vec<Vec<Rational>> =
                (0..n).map(|i| self.bracket_unchecked(&self.basis_vector(i), b)).collect();
            for a in &ann {
                let row: Vec<Rational> = images
                    .iter()
                    .map(|img| a.iter().zip(img).fold(Rational::zero(), |acc, (p, q)| acc + p * q))
                    .collect();
                if row.iter().any(|c| !c.is_zero()) {
                    eqs.push(row);
                }
            }
        }
        if eqs.is_empty() {
            return Ok(Subspace::full(n));
        }
        Ok(Subspace::span(n, &Matrix::from_rows(eqs).unwrap().kernel()))
    }

    /// Quotient by an ideal, in the basis of the non-pivot coordinates of the
    /// ideal's echelon form.
    pub fn quotient(&self, ideal: &Subspace) -> Result<Quotient> {
        ideal.check_ambient(self.dim())?;
        if !self.is_ideal_of(ideal, &Subspace::full(self.dim())) {
            return Err(Error::NotIdeal);
        }
        let n = self.dim();
        let kept: Vec<usize> = (0..n).filter(|c| !ideal.pivots().contains(c)).collect();
        let mut projection = Matrix::<Rational>::zeros(kept.len(), n);
        for c in 0..n {
            let reduced = ideal.reduce(&self.basis_vector::<Rational>(c));
            for (row, &k) in kept.iter().enumerate() {
                projection.set(row, c, reduced[k].clone());
            }
        }
        let names: Vec<String> = kept.iter().map(|&k| self.names[k].clone()).collect();
        let m = kept.len();
        let mut brackets = Vec::new();
        for a in 0..m {
            for b in a + 1..m {
                let v = self.bracket_unchecked(&self.basis_vector::<Rational>(kept[a]), &self.basis_vector(kept[b]));
                let img = projection.mul_vec(&v);
                let result: Vec<(usize, Rational)> =
                    img.into_iter().enumerate().filter(|(_, c)| !c.is_zero()).collect();
                if !result.is_empty() {
                    brackets.push((a, b, result));
                }
            }
        }
        let algebra = LieAlgebra::from_brackets(names, &brackets)?;
        Ok(Quotient { algebra, projection, representatives: kept })
    }

    /// Structure of the subalgebra `h`, in the coordinates of its echelon basis.
    pub fn restrict(&self, h: &Subspace) -> Result<LieAlgebra> {
        if !self.is_subalgebra(h) {
            return Err(Error::NotSubalgebra);
        }
        let names: Vec<String> = h.pivots().iter().map(|&p| self.names[p].clone()).collect();
        let m = h.dim();
        let mut brackets = Vec::new();
        for a in 0..m {
            for b in a + 1..m {
                let v = self.bracket_unchecked(&h.basis()[a], &h.basis()[b]);
                let coords = h.coordinates(&v).ok_or(Error::NotSubalgebra)?;
                let result: Vec<(usize, Rational)> =
                    coords.into_iter().enumerate().filter(|(_, c)| !c.is_zero()).collect();
                if !result.is_empty() {
                    brackets.push((a, b, result));
                }
            }
        }
        LieAlgebra::from_brackets(names, &brackets)
    }

    /// The algebra in the basis `f_i = T e_i`: `[x, y]' = T⁻¹[T x, T y]`, so
    /// that `T` is an isomorphism from the result onto `self`.
    pub fn change_basis(&self, t: &Matrix<Rational>) -> Result<LieAlgebra> {
        let tinv = t.inverse()?;
        let n = self.dim();
        let cols: Vec<Vec<Rational>> = (0..n).map(|i| t.column(i)).collect();
        let mut brackets = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                let v = tinv.mul_vec(&self.bracket_unchecked(&cols[i], &cols[j]));
                let result: Vec<(usize, Rational)> = v.into_iter().enumerate().filter(|(_, c)| !c.is_zero()).collect();
                if !result.is_empty() {
                    brackets.push((i, j, result));
                }
            }
        }
        let names = (1..=n).map(|i| format!("f{i}")).collect();
        LieAlgebra::from_brackets(names, &brackets)
    }

    /// `A[e_i, e_j] = [A e_i, A e_j]` on all basis pairs.
    pub fn is_automorphism<F: Field>(&self, a: &Matrix<F>) -> bool {
        let n = self.dim();
        if a.nrows() != n || a.ncols() != n {
            return false;
        }
        let cols: Vec<Vec<F>> = (0..n).map(|i| a.column(i)).collect();
        for i in 0..n {
            for j in i + 1..n {
                let lhs = a.mul_vec(&self.bracket_unchecked(&self.basis_vector::<F>(i), &self.basis_vector(j)));
                let rhs = self.bracket_unchecked(&cols[i], &cols[j]);
                if lhs != rhs {
                    return false;
                }
            }
        }
        !a.determinant().is_zero()
    }

    /// `D[e_i, e_j] = [D e_i, e_j] + [e_i, D e_j]`; returns the first failing pair.
    pub fn derivation_defect(&self, d: &Matrix<Rational>) -> Option<(usize, usize)> {
        let n = self.dim();
        let cols: Vec<Vec<Rational>> = (0..n).map(|i| d.column(i)).collect();
        for i in 0..n {
            for j in i + 1..n {
                let (ei, ej) = (self.basis_vector::<Rational>(i), self.basis_vector::<Rational>(j));
                let lhs = d.mul_vec(&self.bracket_unchecked(&ei, &ej));
                let r1 = self.bracket_unchecked(&cols[i], &ej);
                let r2 = self.bracket_unchecked(&ei, &cols[j]);
                if lhs.iter().zip(r1.iter().zip(&r2)).any(|(l, (a, b))| l != &(a + b)) {
                    return Some((i, j));
                }
            }
        }
        None
    }

    /// Extends a linear map given on generators to a Lie algebra homomorphism.
    ///
    /// `sources` must generate the algebra; `images[i]` is the image of
    /// `sources[i]`. Returns `None` if no consistent automorphism exists.
    pub fn extend_homomorphism<F: Field>(&self, sources: &[Vec<F>], images: &[Vec<F>]) -> Option<Matrix<F>> {
        let n = self.dim();
        let mut xs: Vec<Vec<F>> = Vec::new();
        let mut ys: Vec<Vec<F>> = Vec::new();
        let mut span = Subspace::<F>::zero(n);
        let mut frontier: Vec<(Vec<F>, Vec<F>)> = Vec::new();
        for (s, t) in sources.iter().zip(images) {
            if !span.contains(s) {
                span = span.with_vector(s);
                xs.push(s.clone());
                ys.push(t.clone());
                frontier.push((s.clone(), t.clone()));
            }
        }
        let gens = frontier.clone();
        while !span.is_full() && !frontier.is_empty() {
            let mut next = Vec::new();
            for (u, au) in &frontier {
                for (g, ag) in &gens {
                    let v = self.bracket_unchecked(g, u);
                    if !span.contains(&v) {
                        span = span.with_vector(&v);
                        let av = self.bracket_unchecked(ag, au);
                        xs.push(v.clone());
                        ys.push(av.clone());
                        next.push((v, av));
                    }
                }
            }
            frontier = next;
        }
        if !span.is_full() {
            return None;
        }
        let x = Matrix::from_columns(n, &xs);
        let y = Matrix::from_columns(n, &ys);
        let a = y.mul(&x.inverse().ok()?);
        let consistent = sources.iter().zip(images).all(|(s, t)| &a.mul_vec(s) == t);
        (consistent && self.is_automorphism(&a)).then_some(a)
    }

    /// Matrix of `ad X` (columns `[X, e_j]`).
    pub fn ad_matrix<F: Scalar>(&self, x: &[F]) -> Matrix<F> {
        let cols: Vec<Vec<F>> = (0..self.dim()).map(|j| self.bracket_unchecked(x, &self.basis_vector(j))).collect();
        Matrix::from_columns(self.dim(), &cols)
    }
}

/// `L / I` with the projection `L → L/I` as a matrix.
#[derive(Clone, Debug)]
pub struct Quotient {
    pub algebra: LieAlgebra,
    pub projection: Matrix<Rational>,
    /// Coordinates of `L` whose basis vectors represent the quotient basis.
    pub representatives: Vec<usize>,
}
