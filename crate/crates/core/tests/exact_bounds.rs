use sepscope::quadrature::{
    complex_speculation_probability, exact_probability, exact_twofold, separability_probability,
    separability_probability_full_line, twofold_ratio, COMPLEX_SPECULATION, PRODUCT_INT_REFERENCE,
};
use sepscope::sepfun::{jacobian, jacobian_general_beta, DesfCurve};

/// Composite Simpson on `[0, 40]` under `ξ = t²`, an oracle independent of
/// the adaptive engine.
fn simpson_even(f: impl Fn(f64) -> f64) -> f64 {
    let m = 200_000;
    let tmax = 40f64.sqrt();
    let h = tmax / m as f64;
    let g = |t: f64| 2.0 * t * f(t * t);
    let mut s = g(0.0) + g(tmax);
    for k in 1..m {
        s += if k % 2 == 1 { 4.0 } else { 2.0 } * g(k as f64 * h);
    }
    2.0 * s * h / 3.0
}

#[test]
fn jacobian_is_normalized() {
    let r = separability_probability(&DesfCurve::Unity, 1e-11).unwrap();
    assert!((r.value - 1.0).abs() < 1e-9, "{r:?}");
    assert!((simpson_even(jacobian) - 1.0).abs() < 1e-9);
}

#[test]
fn closed_form_integrals_match_exact_values() {
    for c in [DesfCurve::Dom, DesfCurve::Int, DesfCurve::Conjecture, DesfCurve::Previous] {
        let exact = exact_probability(&c).unwrap();
        let q = separability_probability(&c, 1e-11).unwrap();
        assert!((q.value - exact.value).abs() < 1e-8, "{}: {} vs {}", c.name(), q.value, exact.expression);
        assert!((simpson_even(|x| c.eval(x) * jacobian(x)) - exact.value).abs() < 1e-8);
        let half = exact_twofold(&c).unwrap();
        assert!((twofold_ratio(q.value).unwrap() - half.value).abs() < 1e-8);
    }
    let p = separability_probability(&DesfCurve::ProductInt, 1e-11).unwrap();
    assert!((p.value - PRODUCT_INT_REFERENCE).abs() < 1e-5, "{p:?}");
}

#[test]
fn reflected_branches_integrate_equally() {
    // the two reflected branches integrate to the same value
    let r = separability_probability_full_line(&DesfCurve::ThreeRight, 1e-11).unwrap().value;
    let l = separability_probability_full_line(&DesfCurve::ThreeLeft, 1e-11).unwrap().value;
    assert!((r - l).abs() < 1e-9);
    let int = separability_probability(&DesfCurve::Int, 1e-11).unwrap().value;
    assert!(int < r);
}

#[test]
fn bounds_are_ordered() {
    let p = |c: DesfCurve| separability_probability(&c, 1e-10).unwrap().value;
    let (dom, int, prod, conj) = (p(DesfCurve::Dom), p(DesfCurve::Int), p(DesfCurve::ProductInt), p(DesfCurve::Conjecture));
    assert!(conj < prod && prod < int && int < dom && dom < 1.0);
}

#[test]
fn real_jacobian_by_nested_quadrature_matches_closed_form() {
    for xi in [0.25, 1.0, 2.5] {
        let q = jacobian_general_beta(1.0, xi, 1e-11).unwrap();
        assert!((q.value - jacobian(xi)).abs() < 1e-8, "{xi}: {q:?}");
    }
}

#[test]
fn complex_speculation_value() {
    let q = complex_speculation_probability(1e-7).unwrap();
    assert!((q.value - COMPLEX_SPECULATION.value).abs() < 1e-5, "{q:?}");
    assert!((COMPLEX_SPECULATION.value - 0.252864).abs() < 1e-6);
}

#[test]
fn induced_boundary_estimate() {
    assert!((twofold_ratio(0.4528427).unwrap() - 0.226421).abs() < 1e-6);
}
