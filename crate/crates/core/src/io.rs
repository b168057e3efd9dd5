//! JSON input schemas.
//!
//! Rationals are strings such as `"3/4"` (plain integers are accepted too);
//! field elements of ℚ(√2, √3) are either a rational or an object
//! `{"a": .., "b": .., "c": .., "d": ..}` holding the coefficients of 1, √2,
//! √3 and √6.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::conformal::{GeneratedGroup, SimilarityElement};
use crate::error::{Error, Result};
use crate::field::{format_rational, parse_rational, Rational};
use crate::heintze::{layer_decomposition, DiagonalHeintzePair};
use crate::iso_aut::ExactInnerProduct;
use crate::lie::LieAlgebra;
use crate::linalg::Matrix;
use crate::metric::{AffineMap, DInnerProduct};
use crate::modulus::BoxRing;
use crate::spd::SpdPoint;
use crate::surd::Surd;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum RationalValue {
    Int(i64),
    Str(String),
}

impl RationalValue {
    pub fn parse(&self) -> Result<Rational> {
        match self {
            RationalValue::Int(i) => Ok(Rational::from_integer((*i).into())),
            RationalValue::Str(s) => parse_rational(s),
        }
    }
}

impl From<&Rational> for RationalValue {
    fn from(q: &Rational) -> Self {
        RationalValue::Str(format_rational(q))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SurdObject {
    #[serde(default)]
    pub a: Option<RationalValue>,
    #[serde(default)]
    pub b: Option<RationalValue>,
    #[serde(default)]
    pub c: Option<RationalValue>,
    #[serde(default)]
    pub d: Option<RationalValue>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SurdValue {
    Rational(RationalValue),
    Surd(SurdObject),
}

impl SurdValue {
    pub fn parse(&self) -> Result<Surd> {
        match self {
            SurdValue::Rational(q) => Ok(Surd::rational(q.parse()?)),
            SurdValue::Surd(s) => {
                let get = |v: &Option<RationalValue>| v.as_ref().map_or(Ok(Rational::from_integer(0.into())), RationalValue::parse);
                Ok(Surd::new(get(&s.a)?, get(&s.b)?, get(&s.c)?, get(&s.d)?))
            }
        }
    }
}

pub fn parse_rational_matrix(rows: &[Vec<RationalValue>]) -> Result<Matrix<Rational>> {
    let rows = rows.iter().map(|r| r.iter().map(RationalValue::parse).collect()).collect::<Result<Vec<Vec<_>>>>()?;
    Matrix::from_rows(rows)
}

pub fn parse_rational_vector(v: &[RationalValue]) -> Result<Vec<Rational>> {
    v.iter().map(RationalValue::parse).collect()
}

/// A nilpotent Lie algebra with a derivation and optional named Gram matrices.
///
/// Brackets are `[x, y, {z: c, ...}]` meaning `[x, y] = Σ c z`; unlisted
/// pairs of basis elements commute. A full structure-constant `table`
/// (`table[i][j][k]` = coefficient of `e_k` in `[e_i, e_j]`) may be given
/// instead, which is how non-antisymmetric input reaches `validate`.
/// The derivation is either a full matrix (`derivation`, rows) or a
/// diagonal (`weights`).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PairSpec {
    #[serde(default)]
    pub name: Option<String>,
    pub basis: Vec<String>,
    #[serde(default)]
    pub brackets: Vec<(String, String, BTreeMap<String, RationalValue>)>,
    #[serde(default)]
    pub table: Option<Vec<Vec<Vec<RationalValue>>>>,
    #[serde(default)]
    pub derivation: Option<Vec<Vec<RationalValue>>>,
    #[serde(default)]
    pub weights: Option<Vec<RationalValue>>,
    #[serde(default)]
    pub grams: BTreeMap<String, Vec<Vec<SurdValue>>>,
}

impl PairSpec {
    fn index(&self, name: &str) -> Result<usize> {
        self.basis.iter().position(|b| b == name).ok_or_else(|| Error::Parse(format!("unknown basis element '{name}'")))
    }

    pub fn algebra(&self) -> Result<LieAlgebra> {
        let n = self.basis.len();
        if let Some(table) = &self.table {
            if !self.brackets.is_empty() {
                return Err(Error::Parse("give either 'brackets' or 'table', not both".into()));
            }
            let table = table
                .iter()
                .map(|row| row.iter().map(|cell| parse_rational_vector(cell)).collect::<Result<Vec<_>>>())
                .collect::<Result<Vec<_>>>()?;
            return LieAlgebra::from_table(self.basis.clone(), table);
        }
        let mut seen = vec![vec![false; n]; n];
        let mut brackets = Vec::new();
        for (k, (x, y, value)) in self.brackets.iter().enumerate() {
            let (i, j) = (self.index(x)?, self.index(y)?);
            if i == j {
                return Err(Error::Invalid(format!("bracket {}: [{x}, {x}] must vanish", k + 1)));
            }
            let (lo, hi) = (i.min(j), i.max(j));
            if seen[lo][hi] {
                return Err(Error::Invalid(format!("bracket {}: [{x}, {y}] given twice", k + 1)));
            }
            seen[lo][hi] = true;
            let sign = if i < j { 1 } else { -1 };
            let mut out = Vec::new();
            for (z, c) in value {
                out.push((self.index(z)?, c.parse()? * Rational::from_integer(sign.into())));
            }
            brackets.push((lo, hi, out));
        }
        LieAlgebra::from_brackets(self.basis.clone(), &brackets)
    }

    pub fn derivation_matrix(&self) -> Result<Matrix<Rational>> {
        match (&self.derivation, &self.weights) {
            (Some(d), None) => {
                let m = parse_rational_matrix(d)?;
                if m.nrows() != self.basis.len() || m.ncols() != self.basis.len() {
                    return Err(Error::DimensionMismatch { expected: self.basis.len(), got: m.nrows() });
                }
                Ok(m)
            }
            (None, Some(w)) => {
                if w.len() != self.basis.len() {
                    return Err(Error::DimensionMismatch { expected: self.basis.len(), got: w.len() });
                }
                Ok(Matrix::diagonal(&parse_rational_vector(w)?))
            }
            _ => Err(Error::Parse("exactly one of 'derivation' and 'weights' is required".into())),
        }
    }

    pub fn pair(&self) -> Result<DiagonalHeintzePair> {
        layer_decomposition(&self.algebra()?, &self.derivation_matrix()?)
    }

    pub fn gram_names(&self) -> Vec<String> {
        self.grams.keys().cloned().collect()
    }

    /// Named Gram matrix, either full-size or a first-layer block (other
    /// layers then get the standard inner product).
    pub fn exact_inner_product(&self, pair: &DiagonalHeintzePair, key: &str) -> Result<ExactInnerProduct> {
        let rows = self.grams.get(key).ok_or_else(|| Error::Parse(format!("no Gram matrix named '{key}'")))?;
        let g = Matrix::from_rows(rows.iter().map(|r| r.iter().map(SurdValue::parse).collect()).collect::<Result<Vec<Vec<_>>>>()?)?;
        let n = pair.dim();
        let v1 = &pair.layers()[0];
        if g.nrows() == n {
            return ExactInnerProduct::new(pair, g);
        }
        if g.nrows() != v1.dim() || g.ncols() != v1.dim() {
            return Err(Error::DimensionMismatch { expected: n, got: g.nrows() });
        }
        let mut full = ExactInnerProduct::standard(pair).gram().clone();
        for (r, &pr) in v1.pivots().iter().enumerate() {
            for (c, &pc) in v1.pivots().iter().enumerate() {
                full.set(pr, pc, g.get(r, c).clone());
            }
        }
        if v1 != &crate::lie::Subspace::coordinate(n, v1.pivots()) {
            return Err(Error::Invalid("a first-layer Gram block needs a coordinate first layer".into()));
        }
        ExactInnerProduct::new(pair, full)
    }

    /// Rational Gram matrix for the quasi-norm, or the standard one.
    pub fn rational_inner_product(&self, pair: &DiagonalHeintzePair, key: Option<&str>) -> Result<DInnerProduct> {
        let Some(key) = key else {
            return Ok(DInnerProduct::standard(pair));
        };
        let exact = self.exact_inner_product(pair, key)?;
        let g = exact.gram();
        if (0..g.nrows()).any(|r| (0..g.ncols()).any(|c| !g.get(r, c).is_rational())) {
            return Err(Error::Invalid(format!("Gram matrix '{key}' is not rational")));
        }
        DInnerProduct::new(pair, g.map(|x| x.a.clone()))
    }
}

/// Either a bundled example name or an inline pair.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PairRef {
    Named(String),
    Inline(Box<PairSpec>),
}

impl PairRef {
    pub fn resolve(&self) -> Result<PairSpec> {
        match self {
            PairRef::Named(name) => crate::corpus::example(name),
            PairRef::Inline(spec) => Ok((**spec).clone()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AffineSpec {
    pub translation: Vec<RationalValue>,
    pub linear: Vec<Vec<RationalValue>>,
}

impl AffineSpec {
    pub fn parse(&self) -> Result<AffineMap<Rational>> {
        let linear = parse_rational_matrix(&self.linear)?;
        let translation = parse_rational_vector(&self.translation)?;
        if translation.len() != linear.nrows() {
            return Err(Error::DimensionMismatch { expected: linear.nrows(), got: translation.len() });
        }
        Ok(AffineMap { translation, linear })
    }
}

/// `x ↦ n * e^{tD}(A x)`; `scale` is `e^t` as a rational. `t` may be given
/// instead only when it is zero.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimilaritySpec {
    pub translation: Vec<RationalValue>,
    #[serde(default)]
    pub scale: Option<RationalValue>,
    #[serde(default)]
    pub t: Option<f64>,
    pub linear: Vec<Vec<RationalValue>>,
}

impl SimilaritySpec {
    pub fn parse(&self, pair: Arc<DiagonalHeintzePair>) -> Result<SimilarityElement> {
        let scale = match (&self.scale, self.t) {
            (Some(s), None) => s.parse()?,
            (None, None) | (None, Some(0.0)) => Rational::from_integer(1.into()),
            (None, Some(t)) => return Err(Error::Invalid(format!("t = {t} has no exact scale; give 'scale' = e^t as a rational"))),
            (Some(_), Some(_)) => return Err(Error::Parse("give either 'scale' or 't', not both".into())),
        };
        SimilarityElement::new(pair, parse_rational_vector(&self.translation)?, scale, parse_rational_matrix(&self.linear)?)
    }
}

/// A finitely generated similarity group, optionally conjugated by `F`,
/// with sample points for the invariant structure.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroupSpec {
    #[serde(default)]
    pub name: Option<String>,
    pub pair: PairRef,
    pub generators: Vec<SimilaritySpec>,
    #[serde(default)]
    pub conjugator: Option<AffineSpec>,
    pub points: Vec<Vec<f64>>,
}

impl GroupSpec {
    pub fn group(&self) -> Result<GeneratedGroup> {
        let pair = Arc::new(self.pair.resolve()?.pair()?);
        let gens = self.generators.iter().map(|g| g.parse(pair.clone())).collect::<Result<Vec<_>>>()?;
        let conj = self.conjugator.as_ref().map(AffineSpec::parse).transpose()?;
        for x in &self.points {
            if x.len() != pair.dim() {
                return Err(Error::DimensionMismatch { expected: pair.dim(), got: x.len() });
            }
        }
        GeneratedGroup::new(pair, gens, conj)
    }
}

/// Points of `SL(m)/SO(m)` as row lists; each is normalized to determinant one.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PointsSpec {
    pub points: Vec<Vec<Vec<f64>>>,
}

impl PointsSpec {
    pub fn parse(&self) -> Result<Vec<SpdPoint>> {
        self.points.iter().map(|p| SpdPoint::from_rows(p)).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RingSpec {
    pub group: PairRef,
    pub widths: Vec<RationalValue>,
    pub delta: RationalValue,
    pub lambdas: Vec<Vec<RationalValue>>,
}

impl RingSpec {
    pub fn ring(&self) -> Result<BoxRing> {
        let pair = self.group.resolve()?.pair()?;
        let lambdas = self.lambdas.iter().map(|l| parse_rational_vector(l)).collect::<Result<Vec<_>>>()?;
        BoxRing::new(&pair, parse_rational_vector(&self.widths)?, self.delta.parse()?, lambdas)
    }
}

/// Parses JSON, reporting the line and column of syntax errors.
pub fn from_json<T: serde::de::DeserializeOwned>(text: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| Error::Parse(format!("line {} column {}: {e}", e.line(), e.column())))
}
