//! Bundled examples, shipped as JSON data files.

use num_traits::Zero;

use crate::error::{Error, Result};
use crate::field::{int, ratio};
use crate::heintze::DiagonalHeintzePair;
use crate::io::{from_json, GroupSpec, PairSpec, PointsSpec, RingSpec};
use crate::linalg::Matrix;
use crate::surd::Surd;

const PAIRS: [(&str, &str); 4] = [
    ("heisenberg", include_str!("../data/heisenberg.json")),
    ("abelian-r3", include_str!("../data/abelian-r3.json")),
    ("heisenberg-123", include_str!("../data/heisenberg-123.json")),
    ("hxh", include_str!("../data/hxh.json")),
];

const GROUPS: [(&str, &str); 5] = [
    ("heisenberg-rot4", include_str!("../data/groups/heisenberg-rot4.json")),
    ("heisenberg-dihedral", include_str!("../data/groups/heisenberg-dihedral.json")),
    ("heisenberg-dihedral-offcenter", include_str!("../data/groups/heisenberg-dihedral-offcenter.json")),
    ("abelian-r3-rot4", include_str!("../data/groups/abelian-r3-rot4.json")),
    ("hxh-swap-rot", include_str!("../data/groups/hxh-swap-rot.json")),
];

const RING: &str = include_str!("../data/ring-heisenberg.json");
const POINTS: &str = include_str!("../data/points-triangle.json");

pub fn example_names() -> Vec<&'static str> {
    PAIRS.iter().map(|(n, _)| *n).collect()
}

pub fn example(name: &str) -> Result<PairSpec> {
    let (_, text) = PAIRS.iter().find(|(n, _)| *n == name).ok_or_else(|| Error::Parse(format!("unknown example '{name}'")))?;
    from_json(text)
}

pub fn group_names() -> Vec<&'static str> {
    GROUPS.iter().map(|(n, _)| *n).collect()
}

pub fn group(name: &str) -> Result<GroupSpec> {
    let (_, text) = GROUPS.iter().find(|(n, _)| *n == name).ok_or_else(|| Error::Parse(format!("unknown group '{name}'")))?;
    from_json(text)
}

pub fn ring() -> Result<RingSpec> {
    from_json(RING)
}

pub fn points() -> Result<PointsSpec> {
    from_json(POINTS)
}

/// The sixteen isometric graded automorphisms of `hxh` for the Gram matrix
/// `d2`, written out from their sign/scale formulas on the first layer
/// (basis order `e1, e2, f1, f2`) and extended by brackets.
///
/// Type (i): `f1 ↦ ε₁f1, e2 ↦ ε₂e2, e1 ↦ ε₃e1, f2 ↦ ε₃f2`.
/// Type (ii): `f1 ↦ ε₁e2, e2 ↦ ε₂f1, e1 ↦ (ε₃/√3) f2, f2 ↦ √3 ε₃ e1`.
pub fn hxh_closed_form(pair: &DiagonalHeintzePair) -> Result<Vec<Matrix<Surd>>> {
    let alg = pair.algebra();
    if alg.dim() != 6 {
        return Err(Error::DimensionMismatch { expected: 6, got: alg.dim() });
    }
    let unit = |i: usize, c: Surd| {
        let mut v = vec![Surd::zero(); 6];
        v[i] = c;
        v
    };
    let (e1, e2, f1, f2) = (0, 1, 2, 3);
    let sources: Vec<Vec<Surd>> = (0..4).map(|i| alg.basis_vector(i)).collect();
    let r3 = Surd::sqrt3();
    let inv_r3 = Surd::rational(ratio(1, 3)) * Surd::sqrt3();
    let mut out = Vec::new();
    for kind in 0..2 {
        for signs in 0..8u8 {
            let eps: Vec<Surd> = (0..3).map(|k| Surd::rational(if signs >> k & 1 == 1 { int(-1) } else { int(1) })).collect();
            let (s1, s2, s3) = (eps[0].clone(), eps[1].clone(), eps[2].clone());
            let images = if kind == 0 {
                vec![unit(e1, s3.clone()), unit(e2, s2), unit(f1, s1), unit(f2, s3)]
            } else {
                vec![unit(f2, inv_r3.clone() * s3.clone()), unit(f1, s2), unit(e2, s1), unit(e1, r3.clone() * s3)]
            };
            let a = alg
                .extend_homomorphism(&sources, &images)
                .ok_or_else(|| Error::Invalid("closed-form map is not an automorphism".into()))?;
            out.push(a);
        }
    }
    Ok(out)
}
