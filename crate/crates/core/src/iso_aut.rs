//! Isometric graded automorphisms `IA(N, d)`.
//!
//! Membership is exact over ℚ(√2, √3). Finite groups are enumerated by the
//! plane-permutation argument: the minimal-rank set of `ad` on each generating
//! layer splits into planes, every isometric graded automorphism permutes
//! them, and orthogonal complements then pin down invariant lines whose
//! scales are fixed by the Gram matrix up to sign.

use num_traits::Zero;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::{Field, Rational};
use crate::heintze::DiagonalHeintzePair;
use crate::lie::{LieAlgebra, Subspace};
use crate::linalg::Matrix;
use crate::metric::{is_graded_automorphism, DInnerProduct};
use crate::surd::Surd;

/// Rank of `v ↦ [X, v]`.
pub fn rank_ad<F: Field>(algebra: &LieAlgebra, x: &[F]) -> usize {
    algebra.ad_matrix(x).rank()
}

/// A layer-orthogonal inner product with Gram matrix over ℚ(√2, √3).
#[derive(Clone, Debug, PartialEq)]
pub struct ExactInnerProduct {
    gram: Matrix<Surd>,
}

impl ExactInnerProduct {
    pub fn new(pair: &DiagonalHeintzePair, gram: Matrix<Surd>) -> Result<Self> {
        let n = pair.dim();
        if gram.nrows() != n || gram.ncols() != n {
            return Err(Error::DimensionMismatch { expected: n, got: gram.nrows() });
        }
        if gram != gram.transpose() {
            return Err(Error::Invalid("Gram matrix is not symmetric".into()));
        }
        // Positivity through leading minors; signs of field elements are read off numerically.
        for k in 1..=n {
            let idx: Vec<usize> = (0..k).collect();
            if gram.submatrix(&idx, &idx).determinant().to_f64() <= 0.0 {
                return Err(Error::Invalid(format!("Gram matrix is not positive definite (minor {k})")));
            }
        }
        let layers: Vec<Subspace<Surd>> = pair.layers().iter().map(|l| l.lift()).collect();
        for (i, a) in layers.iter().enumerate() {
            for b in &layers[i + 1..] {
                for x in a.basis() {
                    for y in b.basis() {
                        if !inner(&gram, x, y).is_zero() {
                            return Err(Error::Invalid("layers are not orthogonal".into()));
                        }
                    }
                }
            }
        }
        Ok(ExactInnerProduct { gram })
    }

    pub fn standard(pair: &DiagonalHeintzePair) -> Self {
        ExactInnerProduct { gram: DInnerProduct::standard(pair).gram().lift() }
    }

    pub fn from_rational(ip: &DInnerProduct) -> Self {
        ExactInnerProduct { gram: ip.gram().lift() }
    }

    pub fn gram(&self) -> &Matrix<Surd> {
        &self.gram
    }

    pub fn inner(&self, x: &[Surd], y: &[Surd]) -> Surd {
        inner(&self.gram, x, y)
    }
}

fn inner(gram: &Matrix<Surd>, x: &[Surd], y: &[Surd]) -> Surd {
    let gy = gram.mul_vec(y);
    x.iter().zip(&gy).fold(Surd::zero(), |acc, (a, b)| acc + a.clone() * b.clone())
}

/// Indices of layers not contained in the subalgebra generated by the
/// layers below them. An automorphism is determined by these.
pub fn generating_layers(pair: &DiagonalHeintzePair) -> Vec<usize> {
    let alg = pair.algebra();
    let n = pair.dim();
    let mut below = Subspace::zero(n);
    let mut out = Vec::new();
    for (j, layer) in pair.layers().iter().enumerate() {
        let generated = alg.generated_subalgebra(&below).unwrap_or_else(|_| below.clone());
        if !layer.is_subspace_of(&generated) {
            out.push(j);
        }
        below = below.sum(layer);
    }
    out
}

/// Graded automorphism whose restriction to every generating layer preserves `ip`.
pub fn is_isometric_graded_auto(pair: &DiagonalHeintzePair, ip: &ExactInnerProduct, a: &Matrix<Surd>) -> Result<bool> {
    if !is_graded_automorphism(pair, a)? {
        return Ok(false);
    }
    for j in generating_layers(pair) {
        let layer: Subspace<Surd> = pair.layers()[j].lift();
        let images: Vec<Vec<Surd>> = layer.basis().iter().map(|b| a.mul_vec(b)).collect();
        for (x, ax) in layer.basis().iter().zip(&images) {
            for (y, ay) in layer.basis().iter().zip(&images) {
                if ip.inner(ax, ay) != ip.inner(x, y) {
                    return Ok(false);
                }
            }
        }
    }
    Ok(true)
}

/// Dimension of the Lie algebra of `IA(N, d)`: derivations preserving every
/// layer and skew on the generating layers.
pub fn identity_component_dim(pair: &DiagonalHeintzePair, ip: &ExactInnerProduct) -> usize {
    let alg = pair.algebra();
    let n = pair.dim();
    let var = |r: usize, c: usize| r * n + c;
    let mut rows: Vec<Vec<Surd>> = Vec::new();

    for i in 0..n {
        for j in i + 1..n {
            for k in 0..n {
                let mut row = vec![Surd::zero(); n * n];
                for m in 0..n {
                    let c = alg.structure_constant(i, j, m);
                    if !c.is_zero() {
                        row[var(k, m)] = row[var(k, m)].clone() + Surd::rational(c.clone());
                    }
                    let c = alg.structure_constant(m, j, k);
                    if !c.is_zero() {
                        row[var(m, i)] = row[var(m, i)].clone() - Surd::rational(c.clone());
                    }
                    let c = alg.structure_constant(i, m, k);
                    if !c.is_zero() {
                        row[var(m, j)] = row[var(m, j)].clone() - Surd::rational(c.clone());
                    }
                }
                if row.iter().any(|x| !x.is_zero()) {
                    rows.push(row);
                }
            }
        }
    }

    for layer in pair.layers() {
        let layer: Subspace<Surd> = layer.lift();
        for a in layer.annihilator() {
            for b in layer.basis() {
                let mut row = vec![Surd::zero(); n * n];
                for r in 0..n {
                    for c in 0..n {
                        row[var(r, c)] = a[r].clone() * b[c].clone();
                    }
                }
                rows.push(row);
            }
        }
    }

    for j in generating_layers(pair) {
        let layer: Subspace<Surd> = pair.layers()[j].lift();
        let basis = layer.basis();
        for (p, x) in basis.iter().enumerate() {
            let gx = ip.gram().mul_vec(x);
            for y in &basis[p..] {
                let gy = ip.gram().mul_vec(y);
                let mut row = vec![Surd::zero(); n * n];
                for r in 0..n {
                    for c in 0..n {
                        row[var(r, c)] = x[c].clone() * gy[r].clone() + y[c].clone() * gx[r].clone();
                    }
                }
                rows.push(row);
            }
        }
    }

    let rank = Matrix::from_rows(rows).map(|m| m.rank()).unwrap_or(0);
    n * n - rank
}

#[derive(Clone, Debug)]
pub struct AutomorphismGroupReport {
    pub inner_product: ExactInnerProduct,
    /// Minimal-rank planes per generating layer, as `(layer, planes)`.
    pub planes: Vec<(usize, Vec<Subspace>)>,
    pub elements: Vec<Matrix<Surd>>,
    /// `table[i][j]` is the index of `elements[i] · elements[j]`.
    pub table: Vec<Vec<usize>>,
    pub group: String,
}

impl AutomorphismGroupReport {
    pub fn order(&self) -> usize {
        self.elements.len()
    }
}

/// Maximal subspaces of `layer` on which `rank ad` attains its minimum.
///
/// Candidates are small integer combinations of the layer basis; a plane is
/// certified by checking the rank on a grid of `(r + 2)^d` points, which
/// forces every `(r+1)`-minor (a polynomial of degree `r + 1`) to vanish.
pub fn distinguished_planes(algebra: &LieAlgebra, layer: &Subspace) -> (usize, Vec<Subspace>) {
    let n = layer.ambient();
    let k = layer.dim();
    let range: i64 = if k <= 4 { 2 } else { 1 };
    let mut candidates = Vec::new();
    let mut coeffs = vec![-range; k];
    loop {
        let first = coeffs.iter().find(|c| **c != 0);
        if matches!(first, Some(c) if *c > 0) {
            let mut x = vec![Rational::zero(); n];
            for (c, b) in coeffs.iter().zip(layer.basis()) {
                for (xi, bi) in x.iter_mut().zip(b) {
                    *xi += Rational::from_integer((*c).into()) * bi;
                }
            }
            candidates.push(x);
        }
        let mut i = 0;
        while i < k {
            coeffs[i] += 1;
            if coeffs[i] <= range {
                break;
            }
            coeffs[i] = -range;
            i += 1;
        }
        if i == k {
            break;
        }
    }
    let ranks: Vec<usize> = candidates.iter().map(|x| rank_ad(algebra, x)).collect();
    let Some(&r) = ranks.iter().min() else {
        return (0, Vec::new());
    };
    let minimal: Vec<&Vec<Rational>> = candidates.iter().zip(&ranks).filter(|(_, q)| **q == r).map(|(x, _)| x).collect();

    let mut planes: Vec<Subspace> = Vec::new();
    for v in &minimal {
        if planes.iter().any(|p| p.contains(v)) {
            continue;
        }
        let mut plane = Subspace::span(n, &[(*v).clone()]);
        for w in &minimal {
            if plane.contains(w) {
                continue;
            }
            let grown = plane.with_vector(w);
            if certify_rank(algebra, &grown, r) {
                plane = grown;
            }
        }
        planes.push(plane);
    }
    let maximal: Vec<Subspace> = planes.iter().filter(|p| !planes.iter().any(|q| q.dim() > p.dim() && p.is_subspace_of(q))).cloned().collect();
    (r, maximal)
}

fn certify_rank(algebra: &LieAlgebra, plane: &Subspace, r: usize) -> bool {
    let d = plane.dim();
    let side = r + 2;
    let total = side.pow(d as u32);
    (0..total).all(|mut idx| {
        let mut x = vec![Rational::zero(); plane.ambient()];
        for b in plane.basis() {
            let c = Rational::from_integer(((idx % side) as i64).into());
            idx /= side;
            for (xi, bi) in x.iter_mut().zip(b) {
                *xi += &c * bi;
            }
        }
        rank_ad(algebra, &x) <= r
    })
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for pos in 0..=p.len() {
            let mut q = p.clone();
            q.insert(pos, n - 1);
            out.push(q);
        }
    }
    out.sort();
    out
}

const FAMILY_CAP: usize = 256;

/// Pairs `(S, T)` with `A(S) = T` forced for every candidate `A`.
/// Returns `None` when two forced images of the same subspace disagree.
/// Stops as soon as the forced lines span the layer.
fn close_family(ip: &ExactInnerProduct, layer: &Subspace<Surd>, seed: Vec<(Subspace<Surd>, Subspace<Surd>)>) -> Result<Option<Vec<(Subspace<Surd>, Subspace<Surd>)>>> {
    let mut family: Vec<(Subspace<Surd>, Subspace<Surd>)> = Vec::new();
    let push = |family: &mut Vec<(Subspace<Surd>, Subspace<Surd>)>, s: Subspace<Surd>, t: Subspace<Surd>| -> Option<bool> {
        if s.dim() != t.dim() {
            return None;
        }
        match family.iter().find(|(a, _)| a == &s) {
            Some((_, b)) => (b == &t).then_some(false),
            None => {
                family.push((s, t));
                Some(true)
            }
        }
    };
    for (s, t) in seed {
        if push(&mut family, s, t).is_none() {
            return Ok(None);
        }
    }
    // Semi-naive closure: each new pair is combined once with everything before it.
    let mut next = 0;
    while next < family.len() {
        let (s, t) = family[next].clone();
        let sc = s.orthogonal_complement(ip.gram()).intersection(layer);
        let tc = t.orthogonal_complement(ip.gram()).intersection(layer);
        if push(&mut family, sc, tc).is_none() {
            return Ok(None);
        }
        for i in 0..next {
            let (s2, t2) = family[i].clone();
            if push(&mut family, s.intersection(&s2), t.intersection(&t2)).is_none() {
                return Ok(None);
            }
        }
        let lines = family.iter().filter(|(s, _)| s.dim() == 1).fold(Subspace::<Surd>::zero(layer.ambient()), |acc, (s, _)| acc.sum(s));
        if lines.dim() == layer.dim() {
            break;
        }
        if family.len() > FAMILY_CAP {
            return Err(Error::Unresolved("forced subspace family did not close".into()));
        }
        next += 1;
    }
    Ok(Some(family))
}

/// Complete list of isometric graded automorphisms when the group is finite.
pub fn enumerate_finite_ia(pair: &DiagonalHeintzePair, ip: &ExactInnerProduct) -> Result<AutomorphismGroupReport> {
    let dim = identity_component_dim(pair, ip);
    if dim > 0 {
        return Err(Error::NotFinite(dim));
    }
    let alg = pair.algebra();
    let n = pair.dim();
    let gen_layers = generating_layers(pair);

    let mut planes = Vec::new();
    for &j in &gen_layers {
        let (_, ps) = distinguished_planes(alg, &pair.layers()[j]);
        if ps.is_empty() {
            return Err(Error::Unresolved(format!("no distinguished planes in layer {}", j + 1)));
        }
        planes.push((j, ps));
    }

    // One permutation choice per layer; planes may only go to planes of equal dimension.
    let per_layer: Vec<Vec<Vec<usize>>> = planes
        .iter()
        .map(|(_, ps)| permutations(ps.len()).into_iter().filter(|p| p.iter().enumerate().all(|(i, &k)| ps[i].dim() == ps[k].dim())).collect())
        .collect();

    let mut elements: Vec<Matrix<Surd>> = Vec::new();
    let mut choice = vec![0usize; per_layer.len()];
    'outer: loop {
        let mut sources: Vec<Vec<Surd>> = Vec::new();
        let mut targets: Vec<(Vec<Surd>, Surd)> = Vec::new();
        let mut consistent = true;
        for (slot, ((j, ps), perms)) in planes.iter().zip(&per_layer).enumerate() {
            let layer: Subspace<Surd> = pair.layers()[*j].lift();
            let perm = &perms[choice[slot]];
            let mut seed = vec![(layer.clone(), layer.clone())];
            for (i, &k) in perm.iter().enumerate() {
                seed.push((ps[i].lift(), ps[k].lift()));
            }
            let Some(family) = close_family(ip, &layer, seed)? else {
                consistent = false;
                break;
            };
            let mut spanned = Subspace::<Surd>::zero(n);
            for (s, t) in family.iter().filter(|(s, _)| s.dim() == 1) {
                let v = s.basis()[0].clone();
                if spanned.contains(&v) {
                    continue;
                }
                spanned = spanned.with_vector(&v);
                let w = t.basis()[0].clone();
                let ratio = ip.inner(&v, &v) * ip.inner(&w, &w).inverse().ok_or(Error::Singular)?;
                let scale = ratio.sqrt().ok_or_else(|| Error::Unresolved(format!("scale² = {ratio} has no square root in Q(√2,√3)")))?;
                sources.push(v);
                targets.push((w, scale));
            }
            if spanned.dim() < layer.dim() {
                return Err(Error::Unresolved(format!("layer {} is not spanned by forced lines", j + 1)));
            }
        }
        if consistent {
            let m = sources.len();
            for mask in 0u64..(1u64 << m) {
                let images: Vec<Vec<Surd>> = targets
                    .iter()
                    .enumerate()
                    .map(|(i, (w, c))| {
                        let c = if mask >> i & 1 == 1 { -c.clone() } else { c.clone() };
                        w.iter().map(|x| x.clone() * c.clone()).collect()
                    })
                    .collect();
                if let Some(a) = alg.extend_homomorphism(&sources, &images) {
                    if is_isometric_graded_auto(pair, ip, &a)? && !elements.contains(&a) {
                        elements.push(a);
                    }
                }
            }
        }
        let mut slot = 0;
        loop {
            if slot == choice.len() {
                break 'outer;
            }
            choice[slot] += 1;
            if choice[slot] < per_layer[slot].len() {
                break;
            }
            choice[slot] = 0;
            slot += 1;
        }
    }

    let table = multiplication_table(&elements)?;
    let group = identify_group(&table);
    Ok(AutomorphismGroupReport { inner_product: ip.clone(), planes, elements, table, group })
}

fn multiplication_table(elements: &[Matrix<Surd>]) -> Result<Vec<Vec<usize>>> {
    let index = |m: &Matrix<Surd>| elements.iter().position(|e| e == m);
    let mut table = Vec::with_capacity(elements.len());
    for a in elements {
        let mut row = Vec::with_capacity(elements.len());
        for b in elements {
            row.push(index(&a.mul(b)).ok_or_else(|| Error::Unresolved("element list not closed under composition".into()))?);
        }
        index(&a.inverse()?).ok_or_else(|| Error::Unresolved("element list not closed under inverses".into()))?;
        table.push(row);
    }
    Ok(table)
}

fn identity_index(table: &[Vec<usize>]) -> Option<usize> {
    (0..table.len()).find(|&e| (0..table.len()).all(|x| table[e][x] == x && table[x][e] == x))
}

/// Names the group given by a multiplication table: elementary abelian
/// 2-groups, the semidirect product `(Z2^3):Z2` with the swap action, or
/// just the order.
pub fn identify_group(table: &[Vec<usize>]) -> String {
    let n = table.len();
    let Some(e) = identity_index(table) else {
        return "not a group".into();
    };
    if n == 1 {
        return "trivial".into();
    }
    let abelian = (0..n).all(|a| (0..n).all(|b| table[a][b] == table[b][a]));
    let involutive = (0..n).all(|a| table[a][a] == e);
    if abelian && involutive && n.is_power_of_two() {
        let k = n.trailing_zeros();
        return if k == 1 { "Z2".into() } else { format!("Z2^{k}") };
    }
    if n == 16 && has_swap_presentation(table, e) {
        return "(Z2^3):Z2".into();
    }
    format!("order {n}")
}

/// Looks for `a, b, c, s` with `a² = b² = c² = s² = 1`, `a, b, c` commuting,
/// `sas = b`, `scs = c`, generating the whole group. The presented group
/// has order 16, so a generating solution in a group of order 16 is an
/// isomorphism.
fn has_swap_presentation(table: &[Vec<usize>], e: usize) -> bool {
    let n = table.len();
    let m = |x: usize, y: usize| table[x][y];
    let inv: Vec<usize> = (0..n).filter(|&x| x != e && m(x, x) == e).collect();
    for &a in &inv {
        for &b in &inv {
            if m(a, b) != m(b, a) {
                continue;
            }
            for &c in &inv {
                if m(a, c) != m(c, a) || m(b, c) != m(c, b) {
                    continue;
                }
                for &s in &inv {
                    if m(m(s, a), s) != b || m(m(s, c), s) != c {
                        continue;
                    }
                    if generated_size(table, &[a, b, c, s], e) == n {
                        return true;
                    }
                }
            }
        }
    }
    false
}

fn generated_size(table: &[Vec<usize>], gens: &[usize], e: usize) -> usize {
    let mut seen = vec![false; table.len()];
    seen[e] = true;
    let mut stack = vec![e];
    while let Some(x) = stack.pop() {
        for &g in gens {
            let y = table[x][g];
            if !seen[y] {
                seen[y] = true;
                stack.push(y);
            }
        }
    }
    seen.iter().filter(|s| **s).count()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IaSummary {
    pub component_dim: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub order: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub group: Option<String>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Verdict {
    Impossible,
    Inconclusive,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VerdictReport {
    pub d1: IaSummary,
    pub d2: IaSummary,
    pub verdict: Verdict,
}

pub fn summarize(pair: &DiagonalHeintzePair, ip: &ExactInnerProduct) -> IaSummary {
    let component_dim = identity_component_dim(pair, ip);
    if component_dim > 0 {
        return IaSummary { component_dim, order: None, group: None };
    }
    match enumerate_finite_ia(pair, ip) {
        Ok(r) => IaSummary { component_dim, order: Some(r.order()), group: Some(r.group) },
        Err(_) => IaSummary { component_dim, order: None, group: None },
    }
}

/// Counting obstruction to `h·IA(N,d₁)·h⁻¹ ⊂ IA(N,d₂)`.
pub fn no_conjugation_verdict(pair: &DiagonalHeintzePair, ip1: &ExactInnerProduct, ip2: &ExactInnerProduct) -> VerdictReport {
    let d1 = summarize(pair, ip1);
    let d2 = summarize(pair, ip2);
    let impossible = d1.component_dim > d2.component_dim
        || (d1.component_dim == 0 && d2.component_dim == 0 && matches!((d1.order, d2.order), (Some(a), Some(b)) if a > b));
    let verdict = if impossible { Verdict::Impossible } else { Verdict::Inconclusive };
    VerdictReport { d1, d2, verdict }
}

/// `true` iff `x ↦ A x` preserves `rank ad` on the given vectors.
pub fn preserves_rank_ad(algebra: &LieAlgebra, a: &Matrix<Surd>, samples: &[Vec<Rational>]) -> bool {
    samples.iter().all(|x| {
        let xs: Vec<Surd> = x.iter().map(|q| Surd::rational(q.clone())).collect();
        rank_ad(algebra, &xs) == rank_ad(algebra, &a.mul_vec(&xs))
    })
}

impl AutomorphismGroupReport {
    pub fn identity(&self) -> Option<usize> {
        identity_index(&self.table)
    }

    pub fn contains(&self, a: &Matrix<Surd>) -> bool {
        self.elements.contains(a)
    }
}
