//! Invariant suite behind `sepscope verify`.
//!
//! The partial transpose under test is injectable so the suite can be run
//! against a deliberately broken implementation. Every check that decides
//! separability through it is anchored on an independent index-permutation
//! oracle.

use std::f64::consts::PI;

use clap::ValueEnum;
use serde::Serialize;

use sepscope::estimator::{
    closed_form_for, estimate_abs_sep_probability, estimate_desf_with, estimate_event, estimate_minor_desf,
    uniform_edges, with_workers, EstimateOptions, MinorSelector,
};
use sepscope::qstate::{correlation_is_pd, BlooreCoords, DensityMatrix};
use sepscope::quadrature::{
    complex_speculation_probability, exact_probability, exact_twofold, integrate, separability_probability,
    twofold_ratio, COMPLEX_SPECULATION, PRODUCT_INT_REFERENCE,
};
use sepscope::sampling::{cube_to_correlations, cube_to_diagonal, next_points, Engine, SequenceSpec};
use sepscope::sepfun::{jacobian, jacobian_general_beta, DesfCurve};

pub type PtFn = fn(&DensityMatrix) -> DensityMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Level {
    Quick,
    Full,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn new(name: &str, passed: bool, detail: String) -> Self {
        Self {
            name: name.to_owned(),
            passed,
            detail,
        }
    }

    fn failed(name: &str, err: impl std::fmt::Display) -> Self {
        Self::new(name, false, format!("error: {err}"))
    }
}

pub fn library_partial_transpose(rho: &DensityMatrix) -> DensityMatrix {
    rho.partial_transpose()
}

/// Partial transpose on the second qubit by explicit index permutation:
/// `PT[(a,d),(c,b)] = ρ[(a,b),(c,d)]` with composite index `2·q₁ + q₂`.
pub fn oracle_partial_transpose(m: &[[f64; 4]; 4]) -> [[f64; 4]; 4] {
    let mut out = [[0.0; 4]; 4];
    for a in 0..2 {
        for b in 0..2 {
            for c in 0..2 {
                for d in 0..2 {
                    out[2 * a + d][2 * c + b] = m[2 * a + b][2 * c + d];
                }
            }
        }
    }
    out
}

/// Smallest eigenvalue of the oracle partial transpose is non-negative.
fn oracle_separable(rho: &DensityMatrix) -> bool {
    let pt = oracle_partial_transpose(&rho.as_sym().to_array());
    DensityMatrix::new(pt).expect("oracle output is a unit-trace symmetric matrix").as_sym().min_eigenvalue() >= 0.0
}

/// `count` Hilbert-Schmidt random states by rejection from a pseudo-random
/// stream.
pub fn hs_states(seed: u64, count: usize) -> Vec<BlooreCoords> {
    let spec = SequenceSpec::state(Engine::PseudoRandom, seed, false);
    let mut out = Vec::with_capacity(count);
    let mut offset = 0;
    while out.len() < count {
        let batch = next_points(&spec, offset, 1 << 16);
        offset += batch.len() as u64;
        for u in batch.rows() {
            let z = cube_to_correlations(&[u[3], u[4], u[5], u[6], u[7], u[8]]);
            if correlation_is_pd(&z) {
                let diag = cube_to_diagonal(&[u[0], u[1], u[2]]);
                out.push(BlooreCoords::new(diag, z).expect("sampler output is valid"));
                if out.len() == count {
                    break;
                }
            }
        }
    }
    out
}

pub fn pt_involution(states: &[BlooreCoords], pt: PtFn) -> Check {
    let bad = states
        .iter()
        .filter(|b| {
            let rho = b.to_density_matrix();
            pt(&pt(&rho)) != rho
        })
        .count();
    Check::new("pt-involution", bad == 0, format!("{bad} of {} states changed by PT twice", states.len()))
}

pub fn pt_matches_oracle(states: &[BlooreCoords], pt: PtFn) -> Check {
    let bad = states
        .iter()
        .filter(|b| {
            let rho = b.to_density_matrix();
            pt(&rho).as_sym().to_array() != oracle_partial_transpose(&rho.as_sym().to_array())
        })
        .count();
    Check::new("pt-oracle", bad == 0, format!("{bad} of {} states differ from the index-permutation PT", states.len()))
}

/// `det PT ≥ 0 ⇒ every 3×3 minor ≥ 0 ⇒ every 2×2 minor ≥ 0`, with the
/// determinant test required to agree with the oracle.
pub fn implication_chain(states: &[BlooreCoords], pt: PtFn) -> Check {
    let mut violations = [0usize; 3];
    for b in states {
        let rho = b.to_density_matrix();
        let p = pt(&rho);
        let sep = p.as_sym().determinant() >= 0.0;
        let m3 = p.principal_minors_3x3().iter().all(|&m| m >= 0.0);
        let m2 = p.principal_minors_2x2().iter().all(|&m| m >= 0.0);
        violations[0] += usize::from(sep && !m3);
        violations[1] += usize::from(m3 && !m2);
        violations[2] += usize::from(sep != oracle_separable(&rho));
    }
    Check::new(
        "implication-chain",
        violations == [0, 0, 0],
        format!(
            "{} states: sep without 3x3 {}, 3x3 without 2x2 {}, disagreement with oracle {}",
            states.len(),
            violations[0],
            violations[1],
            violations[2]
        ),
    )
}

pub fn det_sign_matches_psd(states: &[BlooreCoords], pt: PtFn) -> Check {
    let bad = states
        .iter()
        .filter(|b| {
            let p = pt(&b.to_density_matrix());
            (p.as_sym().determinant() >= 0.0) != (p.as_sym().min_eigenvalue() >= 0.0)
        })
        .count();
    Check::new("det-sign-psd", bad == 0, format!("{bad} of {} states disagree", states.len()))
}

/// Separability is unchanged when the diagonal moves along a level set of
/// `ξ` with the correlations held fixed.
pub fn xi_sufficiency(seed: u64, pairs: usize, pt: PtFn) -> Check {
    let states = hs_states(seed ^ 0x5eed, pairs);
    let weights = next_points(&SequenceSpec::new(Engine::PseudoRandom, seed, 1, false).expect("valid"), 0, pairs);
    let mut bad = 0;
    for (b, w) in states.iter().zip(weights.points) {
        let w = 0.1 + 0.8 * w;
        let d = b.diag();
        let mut e = [d[0] * w, d[1] * w, d[2] / w, d[3] / w];
        let s: f64 = e.iter().sum();
        e.iter_mut().for_each(|v| *v /= s);
        let other = BlooreCoords::new(e, *b.z()).expect("rescaled diagonal stays on the simplex");
        let sa = pt(&b.to_density_matrix()).as_sym().determinant() >= 0.0;
        let sb = pt(&other.to_density_matrix()).as_sym().determinant() >= 0.0;
        bad += usize::from(sa != sb);
    }
    Check::new("xi-sufficiency", bad == 0, format!("{bad} of {pairs} paired diagonals disagree"))
}

pub fn curve_ordering(points: usize) -> Check {
    let mut bad = Vec::new();
    for k in 0..points {
        let xi = -8.0 + 16.0 * k as f64 / (points - 1) as f64;
        let v = |c: DesfCurve| c.eval(xi);
        let (conj, prod, int, dom) = (v(DesfCurve::Conjecture), v(DesfCurve::ProductInt), v(DesfCurve::Int), v(DesfCurve::Dom));
        if !(conj <= int && prod <= int && int <= dom && dom <= 1.0) {
            bad.push(format!("order at {xi}"));
        }
        for c in DesfCurve::closed_forms().into_iter().filter(DesfCurve::is_even) {
            if (c.eval(xi) - c.eval(-xi)).abs() > 1e-14 {
                bad.push(format!("{} not even at {xi}", c.name()));
            }
        }
    }
    Check::new("curve-ordering", bad.is_empty(), if bad.is_empty() { format!("{points} grid points") } else { bad.join("; ") })
}

pub fn jacobian_normalization(tol: f64) -> Check {
    match separability_probability(&DesfCurve::Unity, tol) {
        Ok(q) => Check::new("jacobian-normalization", (q.value - 1.0).abs() < 1e-9, format!("integral {:.15}", q.value)),
        Err(e) => Check::failed("jacobian-normalization", e),
    }
}

pub fn bound_table(tol: f64) -> Check {
    let mut worst: f64 = 0.0;
    let mut notes = Vec::new();
    for c in [DesfCurve::Dom, DesfCurve::Int, DesfCurve::Conjecture, DesfCurve::Previous] {
        let (exact, half) = (exact_probability(&c).expect("tabulated"), exact_twofold(&c).expect("tabulated"));
        match separability_probability(&c, tol) {
            Ok(q) => {
                let t = twofold_ratio(q.value).expect("probability in range");
                worst = worst.max((q.value - exact.value).abs()).max((t - half.value).abs());
            }
            Err(e) => notes.push(format!("{}: {e}", c.name())),
        }
    }
    let product = separability_probability(&DesfCurve::ProductInt, tol).map(|q| (q.value - PRODUCT_INT_REFERENCE).abs());
    let ok = notes.is_empty() && worst < 1e-8 && matches!(product, Ok(d) if d < 1e-5);
    Check::new(
        "bound-table",
        ok,
        format!("max |diff| {worst:.2e}, product-int |diff| {:?} {}", product.map_err(|e| e.to_string()), notes.join("; ")),
    )
}

pub fn complex_speculation(tol: f64) -> Check {
    let q = match complex_speculation_probability(tol) {
        Ok(q) => q,
        Err(e) => return Check::failed("beta-two", e),
    };
    let mut worst: f64 = 0.0;
    for xi in [0.25, 1.0, 2.5] {
        match jacobian_general_beta(1.0, xi, 1e-11) {
            Ok(j) => worst = worst.max((j.value - jacobian(xi)).abs()),
            Err(e) => return Check::failed("beta-two", e),
        }
    }
    let d = (q.value - COMPLEX_SPECULATION.value).abs();
    Check::new(
        "beta-two",
        d < 1e-5 && worst < 1e-8,
        format!("value {:.9} (|diff| {d:.2e}), real Jacobian path |diff| {worst:.2e}", q.value),
    )
}

/// Monte Carlo estimate through the injected PT must respect the exact upper
/// bounds and the reference value.
pub fn mc_within_bounds(spec: &SequenceSpec, n: u64, pt: PtFn) -> Check {
    let r = match estimate_event(spec, n, &EstimateOptions::default(), &|a| {
        pt(&a.density_matrix()).as_sym().determinant() >= 0.0
    }) {
        Ok(r) => r,
        Err(e) => return Check::failed("mc-bounds", e),
    };
    let int = 22.0 / 35.0;
    let dom = 1024.0 / (135.0 * PI * PI);
    let s = r.stderr.max(1e-12);
    let ok = r.mean <= int + 3.0 * s && r.mean <= dom + 3.0 * s && (r.mean - 0.4528427).abs() < 5.0 * s;
    Check::new("mc-bounds", ok, format!("{} mean {:.6} +/- {:.6} (n = {n})", spec.engine(), r.mean, r.stderr))
}

pub fn abs_separability(spec: &SequenceSpec, n: u64) -> Check {
    let exact = (6928.0 - 2205.0 * PI) / 2f64.powf(4.5);
    match estimate_abs_sep_probability(spec, n) {
        Ok(r) => Check::new(
            "abs-separability",
            (r.mean - exact).abs() < 5.0 * r.stderr,
            format!("mean {:.6} +/- {:.6}, reference {exact:.7}", r.mean, r.stderr),
        ),
        Err(e) => Check::failed("abs-separability", e),
    }
}

pub fn xi_histogram(spec: &SequenceSpec, n: u64, bins: usize, ximax: f64, sigmas: f64) -> Check {
    let h = match uniform_edges(bins, ximax)
        .and_then(|edges| estimate_desf_with(spec, n, &edges, &EstimateOptions::default(), &|_| true))
    {
        Ok(h) => h,
        Err(e) => return Check::failed("xi-histogram", e),
    };
    let total = h.total_psd() as f64;
    let mut worst: f64 = 0.0;
    for b in 0..h.bins() {
        let p = match integrate(jacobian, h.bin_edges()[b], h.bin_edges()[b + 1], 1e-13) {
            Ok(q) => q.value,
            Err(e) => return Check::failed("xi-histogram", e),
        };
        let sigma = (total * p * (1.0 - p)).sqrt().max(1.0);
        worst = worst.max((h.n_psd()[b] as f64 - total * p).abs() / sigma);
    }
    Check::new("xi-histogram", worst < sigmas, format!("{bins} bins, max |z| {worst:.2} (limit {sigmas})"))
}

/// Every minor against its pinned closed form at each grid point, and the
/// two pairs of 3×3 minors against each other.
pub fn minor_suite(spec: &SequenceSpec, n: u64, grid: &[f64], sigmas: f64) -> Check {
    let mut worst: f64 = 0.0;
    let mut results = Vec::new();
    for minor in MinorSelector::all() {
        let m = match estimate_minor_desf(spec, n, minor, grid) {
            Ok(m) => m,
            Err(e) => return Check::failed("minor-desf", e),
        };
        let curve = closed_form_for(minor);
        for (k, &xi) in grid.iter().enumerate() {
            worst = worst.max((m.ratio(k) - curve.eval(xi)).abs() / m.sigma_for_tests(k));
        }
        results.push(m);
    }
    let mut pair_worst: f64 = 0.0;
    let deletes: Vec<_> = results.iter().filter(|m| matches!(m.minor, MinorSelector::Delete(_))).collect();
    for (a, b) in [(0, 3), (1, 2)] {
        for k in 0..grid.len() {
            let s = deletes[a].sigma_for_tests(k).hypot(deletes[b].sigma_for_tests(k));
            pair_worst = pair_worst.max((deletes[a].ratio(k) - deletes[b].ratio(k)).abs() / s);
        }
    }
    Check::new(
        "minor-desf",
        worst < sigmas && pair_worst < sigmas,
        format!("closed-form max |z| {worst:.2}, 3x3 pair max |z| {pair_worst:.2} over {} points", grid.len()),
    )
}

/// Central bin of a fine histogram against the conjectured intercept.
pub fn desf_intercept(spec: &SequenceSpec, n: u64, bins: usize, ximax: f64) -> Check {
    let target = 135.0 * PI * PI / 2176.0;
    let h = match uniform_edges(bins, ximax)
        .and_then(|e| estimate_desf_with(spec, n, &e, &EstimateOptions::default(), &|a| a.is_separable()))
    {
        Ok(h) => h,
        Err(e) => return Check::failed("desf-intercept", e),
    };
    let c = bins / 2;
    match (h.ratio(c), h.stderr(c)) {
        (Some(r), Some(s)) => Check::new(
            "desf-intercept",
            (r - target).abs() < 3.0 * s,
            format!("central bin [{:.4}, {:.4}) ratio {r:.6} +/- {s:.6}, target {target:.6}", h.bin_edges()[c], h.bin_edges()[c + 1]),
        ),
        _ => Check::new("desf-intercept", false, "central bin is empty".into()),
    }
}

pub fn worker_invariance(spec: &SequenceSpec, n: u64) -> Check {
    let run = |w| with_workers(w, || estimate_desf_with(spec, n, &[-2.0, 0.0, 2.0], &EstimateOptions::default(), &|a| a.is_separable()));
    match (run(1), run(2), run(3)) {
        (Ok(Ok(a)), Ok(Ok(b)), Ok(Ok(c))) => Check::new("worker-invariance", a == b && b == c, "tallies for 1, 2 and 3 workers".into()),
        _ => Check::new("worker-invariance", false, "estimation failed".into()),
    }
}

pub struct SuiteSizes {
    pub states: usize,
    pub pairs: usize,
    pub mc: u64,
    pub intercept: Option<u64>,
}

impl Level {
    pub fn sizes(self) -> SuiteSizes {
        match self {
            Level::Quick => SuiteSizes {
                states: 100_000,
                pairs: 10_000,
                mc: 100_000,
                intercept: None,
            },
            Level::Full => SuiteSizes {
                states: 1_000_000,
                pairs: 10_000,
                mc: 10_000_000,
                intercept: Some(100_000_000),
            },
        }
    }
}

/// Bins for the intercept check: narrow enough that the cusp at `ξ = 0`
/// biases the central bin by well under one standard error at 10⁸ samples.
pub const INTERCEPT_BINS: usize = 501;

pub fn run_suite(level: Level, seed: u64, pt: PtFn) -> Vec<Check> {
    let sz = level.sizes();
    let states = hs_states(seed, sz.states);
    let prng = SequenceSpec::state(Engine::PseudoRandom, seed, false);
    let lds = SequenceSpec::state(Engine::LowDiscrepancy, seed, true);
    let mut out = vec![
        pt_involution(&states, pt),
        pt_matches_oracle(&states, pt),
        implication_chain(&states, pt),
        det_sign_matches_psd(&states, pt),
        xi_sufficiency(seed, sz.pairs, pt),
        curve_ordering(1601),
        jacobian_normalization(1e-11),
        bound_table(1e-11),
        complex_speculation(1e-7),
        mc_within_bounds(&prng, sz.mc, pt),
        mc_within_bounds(&lds, sz.mc, pt),
        abs_separability(&prng, sz.mc),
        xi_histogram(&prng, sz.mc, 41, 3.0, 4.0),
        minor_suite(&prng, sz.mc, &[-1.0, -0.5, 0.0, 0.5, 1.0], 4.0),
        worker_invariance(&lds, sz.mc.min(1_000_000)),
    ];
    if let Some(n) = sz.intercept {
        out.push(desf_intercept(&lds, n, INTERCEPT_BINS, 4.0));
    }
    out
}
