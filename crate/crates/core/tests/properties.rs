mod props;

#[test]
fn common_factor_invariance() {
    props::common_factor_invariance(100).unwrap();
}

#[test]
fn quadratic_homogeneity() {
    props::quadratic_homogeneity(64).unwrap();
}

#[test]
fn groebner_matches_naive_closure() {
    props::groebner_oracle(50).unwrap();
}

#[test]
fn dx_is_a_derivation() {
    props::dx_derivation_law(100).unwrap();
}

#[test]
fn render_then_parse() {
    props::parser_round_trip(100).unwrap();
}

#[test]
fn residual_numerator_scaling() {
    props::residual_scaling(100).unwrap();
}
