//! The symmetric space `X = SL(m)/SO(m)` of unit-determinant SPD matrices.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::Serialize;

use crate::error::{Error, Result};

const EIG_FLOOR: f64 = 1e-300;
pub const DEFAULT_TOL: f64 = 1e-10;
pub const MAX_ITERATIONS: usize = 100_000;

/// A symmetric positive-definite matrix of determinant 1.
#[derive(Clone, Debug, PartialEq)]
pub struct SpdPoint {
    s: DMatrix<f64>,
}

fn sym_apply(s: &DMatrix<f64>, f: impl Fn(f64) -> f64) -> DMatrix<f64> {
    let eig = SymmetricEigen::new(s.clone());
    let d = DVector::from_iterator(eig.eigenvalues.len(), eig.eigenvalues.iter().map(|&x| f(x.max(EIG_FLOOR))));
    let u = &eig.eigenvectors;
    let m = u * DMatrix::from_diagonal(&d) * u.transpose();
    symmetrize(&m)
}

/// `exp` of a symmetric matrix (no clamping: the argument need not be positive).
fn sym_exp(x: &DMatrix<f64>) -> DMatrix<f64> {
    let eig = SymmetricEigen::new(symmetrize(x));
    let d = eig.eigenvalues.map(f64::exp);
    let u = &eig.eigenvectors;
    symmetrize(&(u * DMatrix::from_diagonal(&d) * u.transpose()))
}

fn symmetrize(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

fn det_normalize(s: DMatrix<f64>) -> Result<DMatrix<f64>> {
    let m = s.nrows();
    let det = s.determinant();
    if !(det > 0.0) || !det.is_finite() {
        return Err(Error::InvalidSpd(format!("determinant {det} is not positive")));
    }
    Ok(s * det.powf(-1.0 / m as f64))
}

impl SpdPoint {
    /// Validates symmetry and positivity, then rescales to determinant 1.
    pub fn new(s: DMatrix<f64>) -> Result<Self> {
        if !s.is_square() || s.nrows() == 0 {
            return Err(Error::InvalidSpd("matrix must be square and nonempty".into()));
        }
        if s.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidSpd("non-finite entry".into()));
        }
        let scale = s.amax().max(1.0);
        if (&s - s.transpose()).amax() > 1e-12 * scale {
            return Err(Error::InvalidSpd("matrix is not symmetric".into()));
        }
        let s = symmetrize(&s);
        let min = SymmetricEigen::new(s.clone()).eigenvalues.min();
        if !(min > 0.0) {
            return Err(Error::InvalidSpd(format!("minimum eigenvalue {min} is not positive")));
        }
        Ok(SpdPoint { s: det_normalize(s)? })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let m = rows.len();
        if rows.iter().any(|r| r.len() != m) {
            return Err(Error::InvalidSpd("matrix must be square".into()));
        }
        Self::new(DMatrix::from_fn(m, m, |i, j| rows[i][j]))
    }

    pub fn identity(m: usize) -> Self {
        SpdPoint { s: DMatrix::identity(m, m) }
    }

    pub fn dim(&self) -> usize {
        self.s.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.s
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        (0..self.dim()).map(|i| self.s.row(i).iter().copied().collect()).collect()
    }

    fn sqrt_and_inv_sqrt(&self) -> (DMatrix<f64>, DMatrix<f64>) {
        (sym_apply(&self.s, f64::sqrt), sym_apply(&self.s, |x| 1.0 / x.sqrt()))
    }

    /// `log(S^{-1/2} P S^{-1/2})`, the tangent vector at `self` pointing to `p`
    /// in whitened coordinates.
    pub fn log_to(&self, p: &SpdPoint) -> DMatrix<f64> {
        let (_, ih) = self.sqrt_and_inv_sqrt();
        sym_apply(&symmetrize(&(&ih * &p.s * &ih)), f64::ln)
    }

    /// `S^{1/2} exp(X) S^{1/2}`.
    pub fn exp_from(&self, x: &DMatrix<f64>) -> SpdPoint {
        let (h, _) = self.sqrt_and_inv_sqrt();
        SpdPoint { s: det_normalize(symmetrize(&(&h * sym_exp(x) * &h))).unwrap_or_else(|_| self.s.clone()) }
    }
}

/// `M[S] = (det M)^{−2/m} M S Mᵀ`.
pub fn act(m: &DMatrix<f64>, s: &SpdPoint) -> Result<SpdPoint> {
    if m.nrows() != s.dim() || m.ncols() != s.dim() {
        return Err(Error::DimensionMismatch { expected: s.dim(), got: m.nrows() });
    }
    let det = m.determinant();
    if det == 0.0 || !det.is_finite() {
        return Err(Error::Singular);
    }
    let k = det.abs().powf(-2.0 / s.dim() as f64);
    let out = symmetrize(&(m * &s.s * m.transpose() * k));
    Ok(SpdPoint { s: det_normalize(out)? })
}

/// Eigenvalues of `S1^{-1/2} S2 S1^{-1/2}`.
fn relative_spectrum(s1: &SpdPoint, s2: &SpdPoint) -> DVector<f64> {
    let (_, ih) = s1.sqrt_and_inv_sqrt();
    SymmetricEigen::new(symmetrize(&(&ih * &s2.s * &ih))).eigenvalues
}

/// `√Σ log² μ_i` with `μ_i` the eigenvalues of `S1⁻¹ S2`.
pub fn distance(s1: &SpdPoint, s2: &SpdPoint) -> f64 {
    relative_spectrum(s1, s2).iter().map(|&mu| mu.max(EIG_FLOOR).ln().powi(2)).sum::<f64>().sqrt()
}

/// `S1^{1/2} (S1^{-1/2} S2 S1^{-1/2})^t S1^{1/2}`.
pub fn geodesic(s1: &SpdPoint, s2: &SpdPoint, t: f64) -> SpdPoint {
    if t == 0.0 {
        return s1.clone();
    }
    if t == 1.0 {
        return s2.clone();
    }
    s1.exp_from(&(s1.log_to(s2) * t))
}

/// Dilatation `σ_max/σ_min` of `G^{1/2} A G^{-1/2}` (Euclidean when `gram` is `None`).
pub fn dilatation(a: &DMatrix<f64>, gram: Option<&DMatrix<f64>>) -> Result<f64> {
    if !a.is_square() {
        return Err(Error::DimensionMismatch { expected: a.nrows(), got: a.ncols() });
    }
    let b = match gram {
        Some(g) => sym_apply(g, f64::sqrt) * a * sym_apply(g, |x| 1.0 / x.sqrt()),
        None => a.clone(),
    };
    let sv = b.singular_values();
    let (max, min) = (sv.max(), sv.min());
    if !(min > 0.0) || min <= max * 1e-300 {
        return Err(Error::Singular);
    }
    Ok(max / min)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DilatationBound {
    pub dilatation: f64,
    pub distance: f64,
    /// `1 + φ(d(I, A[I]))` with `φ(t) = e^t − 1`.
    pub bound: f64,
    pub holds: bool,
}

/// `K(A) ≤ 1 + φ(d(I, A[I]))` with `φ(t) = e^t − 1`.
pub fn bound_check(a: &DMatrix<f64>) -> Result<DilatationBound> {
    let k = dilatation(a, None)?;
    let d = distance(&SpdPoint::identity(a.nrows()), &act(a, &SpdPoint::identity(a.nrows()))?);
    let bound = d.exp();
    Ok(DilatationBound { dilatation: k, distance: d, bound, holds: k <= bound * (1.0 + 1e-12) })
}

#[derive(Clone, Debug, PartialEq)]
pub struct Circumcenter {
    pub center: SpdPoint,
    pub radius: f64,
    pub iterations: usize,
}

fn max_distance(s: &SpdPoint, points: &[SpdPoint]) -> (f64, Vec<f64>) {
    let ds: Vec<f64> = points.iter().map(|p| distance(s, p)).collect();
    (ds.iter().copied().fold(0.0, f64::max), ds)
}

/// Orthonormal basis of traceless symmetric `m × m` matrices (Frobenius).
fn tangent_basis(m: usize) -> Vec<DMatrix<f64>> {
    let mut basis = Vec::new();
    for i in 0..m {
        for j in i + 1..m {
            let mut e = DMatrix::zeros(m, m);
            e[(i, j)] = std::f64::consts::FRAC_1_SQRT_2;
            e[(j, i)] = std::f64::consts::FRAC_1_SQRT_2;
            basis.push(e);
        }
    }
    // diag(1,…,1,−k, 0…)/√(k²+k)
    for k in 1..m {
        let mut e = DMatrix::zeros(m, m);
        let norm = ((k * k + k) as f64).sqrt();
        for i in 0..k {
            e[(i, i)] = 1.0 / norm;
        }
        e[(k, k)] = -(k as f64) / norm;
        basis.push(e);
    }
    basis
}

/// Hessian of `½ d²(·, P)` at the base point, where `l = log_S P`, in `basis`.
fn half_sq_hessian(l: &DMatrix<f64>, basis: &[DMatrix<f64>]) -> DMatrix<f64> {
    let eig = SymmetricEigen::new(l.clone());
    let u = &eig.eigenvectors;
    let ell = &eig.eigenvalues;
    let m = l.nrows();
    let weight = DMatrix::from_fn(m, m, |a, b| {
        let theta = 0.5 * (ell[a] - ell[b]).abs();
        if theta < 1e-8 {
            1.0 + theta * theta / 3.0
        } else {
            theta / theta.tanh()
        }
    });
    let rotated: Vec<DMatrix<f64>> = basis.iter().map(|e| u.transpose() * e * u).collect();
    let k = basis.len();
    DMatrix::from_fn(k, k, |p, q| rotated[p].component_mul(&rotated[q]).component_mul(&weight).sum())
}

/// `min ½ wᵀBw − fᵀw` over the probability simplex (primal active set).
fn simplex_qp(b: &DMatrix<f64>, f: &DVector<f64>, start: usize) -> DVector<f64> {
    let p = f.len();
    let mut w = DVector::zeros(p);
    w[start] = 1.0;
    let mut support = vec![start];
    for _ in 0..(50 * p + 100) {
        // Equality-constrained minimizer on the support.
        let s = support.len();
        let mut kkt = DMatrix::zeros(s + 1, s + 1);
        let mut rhs = DVector::zeros(s + 1);
        for (a, &i) in support.iter().enumerate() {
            for (c, &j) in support.iter().enumerate() {
                kkt[(a, c)] = b[(i, j)];
            }
            kkt[(a, s)] = 1.0;
            kkt[(s, a)] = 1.0;
            rhs[a] = f[i];
        }
        rhs[s] = 1.0;
        let Some(sol) = kkt.clone().lu().solve(&rhs) else {
            break;
        };
        let target: Vec<f64> = (0..s).map(|a| sol[a]).collect();
        if target.iter().all(|&x| x >= 0.0) {
            for (a, &i) in support.iter().enumerate() {
                w[i] = target[a];
            }
            let grad = b * &w - f;
            let level = support.iter().map(|&i| grad[i]).sum::<f64>() / s as f64;
            let scale = 1e-14 * (1.0 + f.amax() + b.amax());
            let entering = (0..p)
                .filter(|i| !support.contains(i))
                .map(|i| (i, grad[i]))
                .filter(|&(_, g)| g < level - scale)
                .min_by(|x, y| x.1.total_cmp(&y.1));
            match entering {
                Some((i, _)) => support.push(i),
                None => return w,
            }
        } else {
            // Step towards the target until a weight reaches zero, then drop it.
            let mut alpha = 1.0;
            let mut leaving = None;
            for (a, &i) in support.iter().enumerate() {
                if target[a] < 0.0 {
                    let r = w[i] / (w[i] - target[a]);
                    if r < alpha {
                        alpha = r;
                        leaving = Some(a);
                    }
                }
            }
            for (a, &i) in support.iter().enumerate() {
                w[i] += alpha * (target[a] - w[i]);
            }
            if let Some(a) = leaving {
                w[support[a]] = 0.0;
                support.remove(a);
            }
        }
    }
    w
}

/// Minimax center of a finite set in `X`.
///
/// Bădoiu–Clarkson geodesic steps towards the farthest point give a warm
/// start; a sequential quadratic programming polish in normal coordinates
/// then drives the minimax value to `tol`.
pub fn circumcenter(points: &[SpdPoint], tol: f64) -> Result<Circumcenter> {
    let first = points.first().ok_or(Error::EmptyInput)?;
    let m = first.dim();
    if points.iter().any(|p| p.dim() != m) {
        return Err(Error::DimensionMismatch { expected: m, got: points.iter().map(SpdPoint::dim).find(|&d| d != m).unwrap() });
    }
    let mut s = first.clone();
    if points.iter().all(|p| distance(&s, p) == 0.0) {
        return Ok(Circumcenter { center: s, radius: 0.0, iterations: 0 });
    }
    let mut iterations = 0;
    for it in 0..64 {
        let (r, ds) = max_distance(&s, points);
        let far: Vec<&SpdPoint> = points.iter().zip(&ds).filter(|(_, &d)| d >= r - tol).map(|(p, _)| p).collect();
        let dir = far.iter().fold(DMatrix::zeros(m, m), |acc, p| acc + s.log_to(p)) / far.len() as f64;
        s = s.exp_from(&(dir * (1.0 / (it as f64 + 2.0))));
        iterations += 1;
    }
    let basis = tangent_basis(m);
    let k = basis.len();
    let (mut r, _) = max_distance(&s, points);
    let mut radius = r;
    let mut weights: Option<DVector<f64>> = None;
    loop {
        if iterations >= MAX_ITERATIONS {
            return Err(Error::NonConvergent { estimate: radius, tol });
        }
        iterations += 1;
        let logs: Vec<DMatrix<f64>> = points.iter().map(|p| s.log_to(p)).collect();
        let fvals = DVector::from_iterator(points.len(), logs.iter().map(|l| 0.5 * l.norm_squared()));
        // g_i = −L_i in coordinates.
        let g = DMatrix::from_fn(points.len(), k, |i, q| -logs[i].component_mul(&basis[q]).sum());
        let w_prev = weights.clone().unwrap_or_else(|| {
            let mut w = DVector::zeros(points.len());
            w[fvals.imax()] = 1.0;
            w
        });
        let mut hess = DMatrix::<f64>::zeros(k, k);
        for (i, l) in logs.iter().enumerate() {
            if w_prev[i] > 0.0 {
                hess += half_sq_hessian(l, &basis) * w_prev[i];
            }
        }
        hess += DMatrix::identity(k, k) * 1e-12;
        let hinv = match hess.clone().cholesky() {
            Some(c) => c.inverse(),
            None => return Err(Error::NonConvergent { estimate: radius, tol }),
        };
        let mut bmat = &g * &hinv * g.transpose();
        let ridge = 1e-14 * (1.0 + bmat.amax());
        for i in 0..points.len() {
            bmat[(i, i)] += ridge;
        }
        let w = simplex_qp(&bmat, &fvals, fvals.imax());
        let delta = -(&hinv * g.transpose() * &w);
        let step_norm = delta.norm();
        let mut x = basis.iter().zip(delta.iter()).fold(DMatrix::zeros(m, m), |acc, (e, c)| acc + e * *c);
        let mut accepted = None;
        for _ in 0..40 {
            let cand = s.exp_from(&x);
            let (rc, _) = max_distance(&cand, points);
            if rc <= r {
                accepted = Some((cand, rc));
                break;
            }
            x *= 0.5;
        }
        weights = Some(w);
        match accepted {
            Some((cand, rc)) => {
                let improvement = r - rc;
                s = cand;
                r = rc;
                radius = r;
                if step_norm < tol * 1e-2 || (improvement <= tol * 1e-3 && step_norm < tol) {
                    break;
                }
            }
            None => break,
        }
    }
    Ok(Circumcenter { center: s, radius, iterations })
}
