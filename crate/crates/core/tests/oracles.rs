mod common;

#[test]
fn count_estimators_match_negative_index_oracle() {
    let n = common::check_counts_exhaustive(12).unwrap();
    assert!(n > 20_000);
}

#[test]
fn forward_filter_matches_path_enumeration() {
    let n = common::check_forward_filter(10).unwrap();
    assert!(n > 100);
}

#[test]
fn exact_l1_matches_piecewise_simpson() {
    let worst = common::check_l1_quadrature(100, 7).unwrap();
    assert!(worst <= 1e-9);
}
