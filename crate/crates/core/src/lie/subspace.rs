use crate::error::{Error, Result};
use crate::field::{Field, Rational};
use crate::linalg::Matrix;

/// A linear subspace of `F^n`, stored by its reduced row-echelon basis.
///
/// The echelon form is canonical for a fixed column order, so `==` is
/// subspace equality.
#[derive(Clone, PartialEq, Debug)]
pub struct Subspace<F = Rational> {
    ambient: usize,
    rows: Vec<Vec<F>>,
    pivots: Vec<usize>,
}

impl<F: Field> Subspace<F> {
    pub fn zero(ambient: usize) -> Self {
        Subspace { ambient, rows: Vec::new(), pivots: Vec::new() }
    }

    pub fn full(ambient: usize) -> Self {
        Self::span(ambient, &Matrix::<F>::identity(ambient).rows_vec())
    }

    pub fn span(ambient: usize, vectors: &[Vec<F>]) -> Self {
        if vectors.is_empty() {
            return Self::zero(ambient);
        }
        let m = Matrix::from_rows(vectors.to_vec()).expect("ragged vectors");
        assert_eq!(m.ncols(), ambient, "vector length differs from ambient dimension");
        let e = m.rref();
        Subspace { ambient, rows: e.matrix.rows_vec(), pivots: e.pivots }
    }

    /// Span of the coordinate axes listed in `coords`.
    pub fn coordinate(ambient: usize, coords: &[usize]) -> Self {
        let vecs: Vec<Vec<F>> = coords
            .iter()
            .map(|&i| {
                let mut v = vec![F::zero(); ambient];
                v[i] = F::one();
                v
            })
            .collect();
        Self::span(ambient, &vecs)
    }

    pub fn ambient(&self) -> usize {
        self.ambient
    }

    pub fn dim(&self) -> usize {
        self.rows.len()
    }

    pub fn basis(&self) -> &[Vec<F>] {
        &self.rows
    }

    pub fn pivots(&self) -> &[usize] {
        &self.pivots
    }

    pub fn is_zero(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn is_full(&self) -> bool {
        self.dim() == self.ambient
    }

    /// `v` minus its echelon reduction against this subspace; zero iff `v` lies in it.
    pub fn reduce(&self, v: &[F]) -> Vec<F> {
        let mut out = v.to_vec();
        for (row, &p) in self.rows.iter().zip(&self.pivots) {
            if out[p].is_zero() {
                continue;
            }
            let f = out[p].clone();
            for (o, r) in out.iter_mut().zip(row) {
                if !r.is_zero() {
                    *o = o.clone() - f.clone() * r.clone();
                }
            }
        }
        out
    }

    pub fn contains(&self, v: &[F]) -> bool {
        self.reduce(v).iter().all(|x| x.is_zero())
    }

    /// Coordinates of `v` in the echelon basis, or `None` if `v` is outside.
    pub fn coordinates(&self, v: &[F]) -> Option<Vec<F>> {
        if !self.contains(v) {
            return None;
        }
        Some(self.pivots.iter().map(|&p| v[p].clone()).collect())
    }

    pub fn is_subspace_of(&self, other: &Subspace<F>) -> bool {
        self.rows.iter().all(|r| other.contains(r))
    }

    pub fn sum(&self, other: &Subspace<F>) -> Subspace<F> {
        let mut v = self.rows.clone();
        v.extend(other.rows.iter().cloned());
        Self::span(self.ambient, &v)
    }

    pub fn with_vector(&self, v: &[F]) -> Subspace<F> {
        let mut rows = self.rows.clone();
        rows.push(v.to_vec());
        Self::span(self.ambient, &rows)
    }

    /// Linear equations cutting out the subspace: rows `a` with `a·v = 0` on it.
    pub fn annihilator(&self) -> Vec<Vec<F>> {
        if self.rows.is_empty() {
            return Matrix::<F>::identity(self.ambient).rows_vec();
        }
        Matrix::from_rows(self.rows.clone()).unwrap().kernel()
    }

    pub fn intersection(&self, other: &Subspace<F>) -> Subspace<F> {
        let mut eqs = self.annihilator();
        eqs.extend(other.annihilator());
        if eqs.is_empty() {
            return Self::full(self.ambient);
        }
        Self::span(self.ambient, &Matrix::from_rows(eqs).unwrap().kernel())
    }

    /// Orthogonal complement with respect to the symmetric form `gram`.
    pub fn orthogonal_complement(&self, gram: &Matrix<F>) -> Subspace<F> {
        if self.rows.is_empty() {
            return Self::full(self.ambient);
        }
        let eqs = Matrix::from_rows(self.rows.clone()).unwrap().mul(gram);
        Self::span(self.ambient, &eqs.kernel())
    }

    pub fn image(&self, m: &Matrix<F>) -> Subspace<F> {
        let imgs: Vec<Vec<F>> = self.rows.iter().map(|r| m.mul_vec(r)).collect();
        Self::span(m.nrows(), &imgs)
    }

    /// `{x : M x ∈ self}`.
    pub fn preimage(&self, m: &Matrix<F>) -> Subspace<F> {
        let ann = self.annihilator();
        if ann.is_empty() {
            return Subspace::full(m.ncols());
        }
        let eqs = Matrix::from_rows(ann).unwrap().mul(m);
        Subspace::span(m.ncols(), &eqs.kernel())
    }

    /// Columns form a basis (ambient × dim).
    pub fn basis_matrix(&self) -> Matrix<F> {
        Matrix::from_columns(self.ambient, &self.rows)
    }

    pub fn check_ambient(&self, n: usize) -> Result<()> {
        if self.ambient != n {
            return Err(Error::DimensionMismatch { expected: n, got: self.ambient });
        }
        Ok(())
    }
}

impl Subspace<Rational> {
    pub fn lift<G: Field>(&self) -> Subspace<G> {
        let rows: Vec<Vec<G>> = self.rows.iter().map(|r| r.iter().map(G::from_rational).collect()).collect();
        Subspace::span(self.ambient, &rows)
    }
}
