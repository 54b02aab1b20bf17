//! One-dimensional adaptive quadrature and the exact separability bounds
//! `P = ∫ S(ξ) J(ξ) dξ`.

mod gk;

pub use gk::integrate_breakpoints;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sepfun::{self, DesfCurve};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureResult {
    pub value: f64,
    pub abs_err_est: f64,
    pub evals: usize,
}

pub const DEFAULT_MAX_EVALS: usize = 2_000_000;

/// Truncation of the real line to `[-half_width, half_width]`.
///
/// Every `S·J` integrand here is bounded by `J`, which decays like
/// `|ξ| e^{-5|ξ|}`; at the default half-width of 40 the neglected tail is
/// below 1e-80.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RealLineOptions {
    pub half_width: f64,
    pub max_evals: usize,
}

impl Default for RealLineOptions {
    fn default() -> Self {
        Self {
            half_width: 40.0,
            max_evals: DEFAULT_MAX_EVALS,
        }
    }
}

impl RealLineOptions {
    fn breakpoints(&self) -> Vec<f64> {
        let l = self.half_width;
        let mut pts = vec![-l];
        pts.extend([-4.0, -1.0, 0.0, 1.0, 4.0].into_iter().filter(|x: &f64| x.abs() < l));
        pts.push(l);
        pts
    }

    fn half_breakpoints(&self) -> Vec<f64> {
        self.breakpoints().into_iter().filter(|&x| x >= 0.0).collect()
    }
}

pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> Result<QuadratureResult> {
    integrate_breakpoints(f, &[a, b], tol, DEFAULT_MAX_EVALS)
}

pub fn integrate_real_line<F: Fn(f64) -> f64>(f: F, tol: f64) -> Result<QuadratureResult> {
    integrate_real_line_with(f, tol, &RealLineOptions::default())
}

pub fn integrate_real_line_with<F: Fn(f64) -> f64>(
    f: F,
    tol: f64,
    opts: &RealLineOptions,
) -> Result<QuadratureResult> {
    if !(opts.half_width > 0.0) {
        return Err(Error::InvalidArgument("half-width must be positive".into()));
    }
    integrate_breakpoints(f, &opts.breakpoints(), tol, opts.max_evals)
}

/// `2 ∫₀^L f`, for even integrands.
pub fn integrate_even<F: Fn(f64) -> f64>(f: F, tol: f64, opts: &RealLineOptions) -> Result<QuadratureResult> {
    let r = integrate_breakpoints(f, &opts.half_breakpoints(), 0.5 * tol, opts.max_evals)?;
    Ok(QuadratureResult {
        value: 2.0 * r.value,
        abs_err_est: 2.0 * r.abs_err_est,
        evals: r.evals,
    })
}

/// `∫ S(ξ) J(ξ) dξ` over the real line, folding to the half-line when `S` is even.
pub fn separability_probability(curve: &DesfCurve, tol: f64) -> Result<QuadratureResult> {
    let opts = RealLineOptions::default();
    if curve.is_even() {
        integrate_even(|x| curve.eval(x) * sepfun::jacobian(x), tol, &opts)
    } else {
        separability_probability_full_line(curve, tol)
    }
}

/// Same integral without the evenness shortcut.
pub fn separability_probability_full_line(curve: &DesfCurve, tol: f64) -> Result<QuadratureResult> {
    integrate_real_line(|x| curve.eval(x) * sepfun::jacobian(x), tol)
}

/// `∫ S(ξ) J_β(ξ) dξ` for an even `S`, with `J_β` from nested quadrature
/// unless `β = 1`.
///
/// Each `J_β` evaluation is requested at `tol / (8 L)` so that the
/// compounded error (outer estimate plus `2L` times the worst inner
/// estimate, using `S ≤ 1`) stays below `tol`.
pub fn probability_with_beta<S: Fn(f64) -> f64>(s: S, beta: f64, tol: f64) -> Result<QuadratureResult> {
    let opts = RealLineOptions::default();
    if beta == 1.0 {
        return integrate_even(|x| s(x) * sepfun::jacobian(x), tol, &opts);
    }
    let inner_tol = tol / (8.0 * opts.half_width);
    let worst_inner = std::cell::Cell::new(0.0f64);
    let inner_evals = std::cell::Cell::new(0usize);
    let failure = std::cell::Cell::new(None);
    let integrand = |x: f64| match sepfun::jacobian_general_beta(beta, x, inner_tol) {
        Ok(j) => {
            worst_inner.set(worst_inner.get().max(j.abs_err_est));
            inner_evals.set(inner_evals.get() + j.evals);
            s(x) * j.value
        }
        Err(e) => {
            failure.set(Some(e));
            0.0
        }
    };
    let outer = integrate_even(integrand, 0.5 * tol, &opts);
    if let Some(e) = failure.take() {
        return Err(e);
    }
    let outer = outer?;
    let abs_err_est = outer.abs_err_est + 2.0 * opts.half_width * worst_inner.get();
    let result = QuadratureResult {
        value: outer.value,
        abs_err_est,
        evals: outer.evals + inner_evals.get(),
    };
    if abs_err_est > tol {
        return Err(Error::NoConvergence {
            value: result.value,
            abs_err_est,
            tol,
            evals: result.evals,
        });
    }
    Ok(result)
}

/// Complex-case speculation: `∫ S_conj(ξ)² J₂(ξ) dξ`.
pub fn complex_speculation_probability(tol: f64) -> Result<QuadratureResult> {
    conjecture_squared_probability(2.0, tol)
}

pub fn conjecture_squared_probability(beta: f64, tol: f64) -> Result<QuadratureResult> {
    probability_with_beta(
        |x| {
            let s = DesfCurve::Conjecture.eval(x);
            s * s
        },
        beta,
        tol,
    )
}

/// Bound for minimally degenerate (boundary) states: half the generic value.
pub fn twofold_ratio(p: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidArgument(format!("probability {p} outside [0, 1]")));
    }
    Ok(0.5 * p)
}

/// A closed-form reference value for one of the integrals above.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExactValue {
    pub expression: &'static str,
    pub value: f64,
}

/// Known closed-form value of `∫ S·J` for a curve, where one exists.
pub fn exact_probability(curve: &DesfCurve) -> Option<ExactValue> {
    use std::f64::consts::PI;
    let pi2 = PI * PI;
    let (expression, value) = match curve {
        DesfCurve::Unity => ("1", 1.0),
        DesfCurve::Dom => ("1024/(135*pi^2)", 1024.0 / (135.0 * pi2)),
        DesfCurve::Int => ("22/35", 22.0 / 35.0),
        DesfCurve::Conjecture => ("29/64", 29.0 / 64.0),
        DesfCurve::Previous => ("8/17", 8.0 / 17.0),
        _ => return None,
    };
    Some(ExactValue { expression, value })
}

/// Halved counterpart of [`exact_probability`].
pub fn exact_twofold(curve: &DesfCurve) -> Option<ExactValue> {
    use std::f64::consts::PI;
    let pi2 = PI * PI;
    let (expression, value) = match curve {
        DesfCurve::Unity => ("1/2", 0.5),
        DesfCurve::Dom => ("512/(135*pi^2)", 512.0 / (135.0 * pi2)),
        DesfCurve::Int => ("11/35", 11.0 / 35.0),
        DesfCurve::Conjecture => ("29/128", 29.0 / 128.0),
        DesfCurve::Previous => ("4/17", 4.0 / 17.0),
        _ => return None,
    };
    Some(ExactValue { expression, value })
}

pub const COMPLEX_SPECULATION: ExactValue = ExactValue {
    expression: "30660525*pi^4/11811160064",
    value: 30_660_525.0 * std::f64::consts::PI * std::f64::consts::PI * std::f64::consts::PI
        * std::f64::consts::PI
        / 11_811_160_064.0,
};

/// Product-curve bound, known only numerically (six digits).
pub const PRODUCT_INT_REFERENCE: f64 = 0.576219;
