use nalgebra::DMatrix;
use nilqc::corpus;
use nilqc::field::{int, ratio};
use nilqc::heintze::{preserved_sequence, DiagonalHeintzePair};
use nilqc::metric::{pansu_differential_affine, AffineMap, DInnerProduct, QuasiNorm};
use nilqc::modulus::{segment_family_modulus, BoxRing};
use nilqc::spd::{act, circumcenter, distance, SpdPoint};
use nilqc::{Matrix, Rational, Subspace};
use num_traits::Zero;
use proptest::prelude::*;

fn pair(name: &str) -> DiagonalHeintzePair {
    corpus::example(name).unwrap().pair().unwrap()
}

fn rational() -> impl Strategy<Value = Rational> {
    (-40i64..=40, 1i64..=12).prop_map(|(n, d)| ratio(n, d))
}

fn vector(n: usize) -> impl Strategy<Value = Vec<Rational>> {
    prop::collection::vec(rational(), n)
}

fn invertible(n: usize) -> impl Strategy<Value = Matrix<Rational>> {
    prop::collection::vec(prop::collection::vec((-3i64..=3).prop_map(int), n), n)
        .prop_map(|rows| Matrix::from_rows(rows).unwrap())
        .prop_filter("singular", |m| !m.determinant().is_zero())
}

fn spd_point() -> impl Strategy<Value = SpdPoint> {
    (-1.5f64..1.5, -1.5f64..1.5).prop_map(|(u, v)| SpdPoint::identity(2).exp_from(&DMatrix::from_row_slice(2, 2, &[u, v, v, -u])))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn group_law_on_hxh(x in vector(6), y in vector(6), z in vector(6)) {
        let p = pair("hxh");
        let alg = p.algebra();
        let xy_z = alg.bch_multiply(&alg.bch_multiply(&x, &y).unwrap(), &z).unwrap();
        let x_yz = alg.bch_multiply(&x, &alg.bch_multiply(&y, &z).unwrap()).unwrap();
        prop_assert_eq!(xy_z, x_yz);
        let e = alg.bch_multiply(&x, &alg.inverse(&x)).unwrap();
        prop_assert!(e.iter().all(Zero::is_zero));
    }

    #[test]
    fn quasi_norm_scales_under_dilation(x in prop::collection::vec(-1.0f64..1.0, 3), t in -3.0f64..3.0) {
        let p = pair("heisenberg-123");
        let qn = QuasiNorm::new(&p, &DInnerProduct::standard(&p));
        let n = qn.norm(&x);
        prop_assume!(n > 1e-6);
        let scaled = qn.norm(&qn.dilate(t, &x));
        prop_assert!((scaled - t.exp() * n).abs() <= 1e-12 * scaled.max(1.0));
    }

    #[test]
    fn flag_is_transported_by_change_of_basis(t in invertible(3)) {
        let p = pair("heisenberg-123");
        let flag = preserved_sequence(&p).unwrap();
        let moved = preserved_sequence(&p.change_basis(&t).unwrap()).unwrap();
        let tinv = t.inverse().unwrap();
        let expected: Vec<Subspace> = flag.members.iter().map(|s| s.image(&tinv)).collect();
        prop_assert_eq!(moved.members, expected);
    }

    #[test]
    fn graded_affine_maps_are_their_own_pansu_differential(
        a in (-4i64..=4, -4i64..=4, -4i64..=4, -4i64..=4),
        tr in vector(3),
        pt in vector(3),
    ) {
        let (a11, a12, a21, a22) = (int(a.0), int(a.1), int(a.2), int(a.3));
        let det = &a11 * &a22 - &a12 * &a21;
        prop_assume!(!det.is_zero());
        let p = pair("heisenberg");
        let lin = Matrix::from_rows(vec![vec![a11, a12, int(0)], vec![a21, a22, int(0)], vec![int(0), int(0), det]]).unwrap();
        let f = AffineMap { translation: tr, linear: lin.clone() };
        for d in pansu_differential_affine(&p, &f, &pt, &[int(1), ratio(1, 7)]).unwrap() {
            prop_assert_eq!(&d, &lin);
        }
    }

    #[test]
    fn subspace_dimension_formula(a in prop::collection::vec(vector(4), 0..4), b in prop::collection::vec(vector(4), 0..4)) {
        let (u, v) = (Subspace::span(4, &a), Subspace::span(4, &b));
        prop_assert_eq!(u.sum(&v).dim() + u.intersection(&v).dim(), u.dim() + v.dim());
        prop_assert!(u.intersection(&v).is_subspace_of(&u));
    }

    #[test]
    fn segment_modulus_is_dilation_invariant(n in 1i64..=9, d in 1i64..=9) {
        let ring = corpus::ring().unwrap().ring().unwrap();
        let moved: BoxRing = ring.dilate(&ratio(n, d)).unwrap();
        prop_assert_eq!(segment_family_modulus(&moved), segment_family_modulus(&ring));
    }

    #[test]
    fn circumcenter_is_equivariant(pts in prop::collection::vec(spd_point(), 2..6), m in prop::collection::vec(-2.0f64..2.0, 4)) {
        let g = DMatrix::from_row_slice(2, 2, &m);
        prop_assume!(g.determinant().abs() > 0.2);
        let c = circumcenter(&pts, 1e-12).unwrap();
        let moved: Vec<SpdPoint> = pts.iter().map(|p| act(&g, p).unwrap()).collect();
        let cm = circumcenter(&moved, 1e-12).unwrap();
        prop_assert!(distance(&cm.center, &act(&g, &c.center).unwrap()) < 1e-8);
        prop_assert!((cm.radius - c.radius).abs() < 1e-9);
    }

    #[test]
    fn spd_distance_is_a_metric(a in spd_point(), b in spd_point(), c in spd_point()) {
        prop_assert!((distance(&a, &b) - distance(&b, &a)).abs() < 1e-12);
        prop_assert!(distance(&a, &c) <= distance(&a, &b) + distance(&b, &c) + 1e-12);
        prop_assert!(distance(&a, &a) < 1e-12);
    }
}
