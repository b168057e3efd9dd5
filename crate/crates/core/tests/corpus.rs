use nilqc::corpus;
use nilqc::io::{from_json, PairSpec};
use nilqc::iso_aut::enumerate_finite_ia;
use nilqc::Error;

#[test]
fn bundled_examples_load() {
    for name in corpus::example_names() {
        let spec = corpus::example(name).unwrap();
        assert_eq!(spec.name.as_deref(), Some(name));
        spec.pair().unwrap();
    }
    for name in corpus::group_names() {
        let g = corpus::group(name).unwrap();
        assert_eq!(g.points.len(), 10);
        g.group().unwrap();
    }
    corpus::ring().unwrap().ring().unwrap();
    corpus::points().unwrap().parse().unwrap();
}

#[test]
fn hxh_grams_and_closed_forms() {
    let spec = corpus::example("hxh").unwrap();
    let pair = spec.pair().unwrap();
    assert_eq!(spec.gram_names(), vec!["d1", "d2"]);
    let d2 = spec.exact_inner_product(&pair, "d2").unwrap();
    let report = enumerate_finite_ia(&pair, &d2).unwrap();
    let closed = corpus::hxh_closed_form(&pair).unwrap();
    assert_eq!(closed.len(), 16);
    assert!(closed.iter().all(|a| report.contains(a)));
}

#[test]
fn malformed_pairs_are_rejected() {
    let bad: PairSpec = from_json(r#"{"basis": ["x", "y"], "brackets": [["x", "x", {"y": "1"}]], "weights": [1, 2]}"#).unwrap();
    assert!(matches!(bad.algebra(), Err(Error::Invalid(_))));
    let unknown: PairSpec = from_json(r#"{"basis": ["x"], "brackets": [["x", "q", {}]], "weights": [1]}"#).unwrap();
    assert!(matches!(unknown.algebra(), Err(Error::Parse(_))));
    let err = from_json::<PairSpec>("{\"basis\": [\n 1]}").unwrap_err();
    assert!(matches!(err, Error::Parse(ref m) if m.contains("line 2")));
    let twice: PairSpec = from_json(r#"{"basis": ["x"], "weights": [1], "derivation": [[1]]}"#).unwrap();
    assert!(twice.derivation_matrix().is_err());
}
