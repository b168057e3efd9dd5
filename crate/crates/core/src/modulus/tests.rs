use super::*;
use crate::field::{int, ratio};
use crate::heintze::layer_decomposition;
use crate::lie::LieAlgebra;

fn heisenberg() -> DiagonalHeintzePair {
    let alg = LieAlgebra::from_brackets(vec!["x".into(), "y".into(), "z".into()], &[(0, 1, vec![(2, int(1))])]).unwrap();
    layer_decomposition(&alg, &Matrix::diagonal(&[int(1), int(1), int(2)])).unwrap()
}

fn plane() -> DiagonalHeintzePair {
    layer_decomposition(&LieAlgebra::abelian(2), &Matrix::identity(2)).unwrap()
}

#[test]
fn euclidean_segment_modulus() {
    let ring = BoxRing::new(&plane(), vec![int(1), int(1)], ratio(1, 5), vec![vec![int(1), int(1)]]).unwrap();
    assert_eq!(segment_family_modulus(&ring).per_family, int(10));
}

#[test]
fn heisenberg_segment_modulus() {
    let p = heisenberg();
    let ring = BoxRing::new(&p, vec![int(1), int(1), int(1)], ratio(1, 2), vec![vec![int(1), int(1)], vec![int(1)]]).unwrap();
    let m = segment_family_modulus(&ring);
    assert_eq!(m.per_family, int(32));
    assert_eq!(m.lower_bound, int(64));
    let doubled = segment_family_modulus(&ring.with_delta(int(1)).unwrap());
    assert_eq!(&m.per_family / &doubled.per_family, int(8));
    let moved = segment_family_modulus(&ring.dilate(&ratio(3, 7)).unwrap());
    assert_eq!(moved, m);
}

#[test]
fn bounds_agree_without_padding() {
    let p = heisenberg();
    let ring = BoxRing::new(&p, vec![int(1), ratio(3, 2), int(2)], ratio(1, 10), vec![vec![int(3), int(2)], vec![int(6)]]).unwrap();
    let j = pow(ring.lambda11(), 4);
    let upper = upper_volume_bound(&ring, &j, &Padding::zero(&ring));
    assert_eq!(upper, segment_family_modulus(&ring).lower_bound);
    let wide = ring.scale_widths(&int(2)).unwrap();
    assert_eq!(upper_volume_bound(&wide, &j, &Padding::zero(&wide)), upper * int(4));
}

#[test]
fn heisenberg_padding_has_bracket_term() {
    let p = heisenberg();
    let ring = BoxRing::new(&p, vec![int(1), int(1), int(1)], ratio(1, 10), vec![vec![int(2), int(1)], vec![int(2)]]).unwrap();
    let polys = padding_polynomials(&ring);
    assert_eq!(polys.len(), 1);
    // (½ λ₁₂ δ + δ²) / λ₂₁
    assert_eq!(polys[0].coefficients, vec![int(0), ratio(1, 4), ratio(1, 2)]);
    assert!(!polys[0].has_constant_term());
    let padding = Padding::from_claim(&ring, &polys);
    assert!(inclusion_check(&ring, &padding, 10_000, 42).holds);
    let bad = inclusion_check(&ring, &Padding::zero(&ring), 10_000, 42);
    assert!(!bad.holds);
    assert!(bad.witness.is_some());
    assert_eq!(padding_violations(&ring, &polys, 10_000, 7), 0);
}

#[test]
fn abelian_padding_is_z_only() {
    let p = layer_decomposition(&LieAlgebra::abelian(3), &Matrix::diagonal(&[int(1), int(1), int(2)])).unwrap();
    let ring = BoxRing::new(&p, vec![int(1); 3], ratio(1, 10), vec![vec![int(1), int(1)], vec![int(3)]]).unwrap();
    let polys = padding_polynomials(&ring);
    assert_eq!(polys[0].coefficients, vec![int(0), int(0), ratio(1, 3)]);
}

#[test]
fn rigidity() {
    let p = heisenberg();
    let id = rigidity_check(&p, &Matrix::identity(3)).unwrap();
    assert!(id.holds && id.similarity);
    assert_eq!(id.jacobian, int(1));
    let t = ratio(5, 3);
    let dil = rigidity_check(&p, &Matrix::diagonal(&[t.clone(), t.clone(), &t * &t])).unwrap();
    assert_eq!(dil.jacobian, pow(&t, 4));
    assert!(dil.similarity);
    let squeeze = rigidity_check(&p, &Matrix::diagonal(&[int(2), ratio(1, 2), int(1)])).unwrap();
    assert_eq!(squeeze.jacobian, int(1));
    assert_eq!(squeeze.lambda11_pow_q, int(16));
    assert!(squeeze.holds && !squeeze.similarity);
    let shear = Matrix::from_rows(vec![vec![int(1), int(1), int(0)], vec![int(0), int(1), int(0)], vec![int(0), int(0), int(1)]]).unwrap();
    assert!(matches!(rigidity_check(&p, &shear), Err(Error::NotDiagonalForm(_))));
    assert!(matches!(BoxRing::new(&p, vec![int(1); 3], int(0), vec![vec![int(1), int(1)], vec![int(1)]]), Err(Error::NonPositiveDelta(_))));
}
