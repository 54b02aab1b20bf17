//! Closed-form diagonal-entry-parameterized separability functions (DESFs)
//! and the Hilbert-Schmidt Jacobian in `ξ`.
//!
//! Every DESF is a conditional probability given `ξ`, so all curves take
//! values in `[0, 1]`. The symmetric curves share the shape
//! `K (A e^{-|ξ|} - B e^{-3|ξ|})` and differ only in `(K, A, B)`.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::quadrature::{self, QuadratureResult};

const PI2: f64 = PI * PI;

/// `(K, A, B)` for `K (A e^{-|ξ|} - B e^{-3|ξ|})`.
#[derive(Debug, Clone, Copy)]
struct SymmetricForm {
    scale: f64,
    a: f64,
    b: f64,
}

impl SymmetricForm {
    #[inline]
    fn eval(&self, xi: f64) -> f64 {
        let t = xi.abs();
        self.scale * (self.a * (-t).exp() - self.b * (-3.0 * t).exp())
    }

    fn intercept(&self) -> f64 {
        self.scale * (self.a - self.b)
    }
}

const DOM: SymmetricForm = SymmetricForm { scale: 0.5, a: 3.0, b: 1.0 };
const INT: SymmetricForm = SymmetricForm { scale: 9.0 * PI2 / 2048.0, a: 27.0, b: 7.0 };
const CONJECTURE: SymmetricForm = SymmetricForm { scale: 315.0 * PI2 / 65536.0, a: 18.0, b: 5.0 };
const PREVIOUS: SymmetricForm = SymmetricForm { scale: 135.0 * PI2 / (256.0 * 17.0), a: 3.0, b: 1.0 };

/// `45π²/512`, the common value of both 3×3-minor curves at `ξ = 0`.
pub const THREE_INTERCEPT: f64 = 45.0 * PI2 / 512.0;

/// Which single-minor curve an envelope is built from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MinorFamily {
    TwoByTwo,
    ThreeByThree,
}

/// Piecewise-constant curve over histogram bins.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalCurve {
    edges: Vec<f64>,
    values: Vec<f64>,
}

impl EmpiricalCurve {
    pub fn new(edges: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if edges.len() < 2 || edges.len() != values.len() + 1 {
            return Err(Error::InvalidArgument(format!(
                "{} edges cannot bound {} bins",
                edges.len(),
                values.len()
            )));
        }
        if edges.windows(2).any(|w| !(w[0] < w[1])) || edges.iter().any(|e| !e.is_finite()) {
            return Err(Error::InvalidArgument("bin edges must be finite and strictly increasing".into()));
        }
        if let Some(v) = values.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(Error::InvalidArgument(format!("bin value {v} outside [0, 1]")));
        }
        Ok(Self { edges, values })
    }

    pub fn edges(&self) -> &[f64] {
        &self.edges
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Value of the bin containing `xi`; outside the grid the end bins extend.
    pub fn eval(&self, xi: f64) -> f64 {
        let k = self.edges.partition_point(|&e| e <= xi);
        let bin = k.saturating_sub(1).min(self.values.len() - 1);
        self.values[bin]
    }
}

/// A separability function of `ξ`.
#[derive(Debug, Clone, PartialEq)]
pub enum DesfCurve {
    /// `S ≡ 1`; integrates to the Jacobian normalization.
    Unity,
    /// Envelope of the two 2×2-minor curves.
    Dom,
    /// Envelope of the two 3×3-minor curves.
    Int,
    /// 3×3-minor curve decreasing for `ξ > 0`.
    ThreeRight,
    /// Reflection of [`DesfCurve::ThreeRight`].
    ThreeLeft,
    /// 2×2-minor curve, identically 1 for `ξ ≤ 0`.
    TwoRight,
    /// Reflection of [`DesfCurve::TwoRight`].
    TwoLeft,
    /// Candidate for the true DESF, integrating to 29/64.
    Conjecture,
    /// Earlier candidate, integrating to 8/17.
    Previous,
    /// `ThreeRight(ξ) · ThreeRight(-ξ)`.
    ProductInt,
    /// `min(f(ξ), f(-ξ))` for the right-hand curve of a minor family.
    Envelope(MinorFamily),
    Empirical(EmpiricalCurve),
}

impl DesfCurve {
    /// All curves with closed forms, in table order.
    pub fn closed_forms() -> Vec<DesfCurve> {
        use DesfCurve::*;
        vec![Dom, Int, ThreeRight, ThreeLeft, TwoRight, TwoLeft, Conjecture, Previous, ProductInt]
    }

    pub fn name(&self) -> &'static str {
        match self {
            DesfCurve::Unity => "unity",
            DesfCurve::Dom => "dom",
            DesfCurve::Int => "int",
            DesfCurve::ThreeRight => "three-right",
            DesfCurve::ThreeLeft => "three-left",
            DesfCurve::TwoRight => "two-right",
            DesfCurve::TwoLeft => "two-left",
            DesfCurve::Conjecture => "conjecture",
            DesfCurve::Previous => "previous",
            DesfCurve::ProductInt => "product-int",
            DesfCurve::Envelope(MinorFamily::TwoByTwo) => "envelope-two",
            DesfCurve::Envelope(MinorFamily::ThreeByThree) => "envelope-three",
            DesfCurve::Empirical(_) => "empirical",
        }
    }

    pub fn is_even(&self) -> bool {
        !matches!(
            self,
            DesfCurve::ThreeRight
                | DesfCurve::ThreeLeft
                | DesfCurve::TwoRight
                | DesfCurve::TwoLeft
                | DesfCurve::Empirical(_)
        )
    }

    /// Two-sided limit at `ξ = 0`.
    pub fn intercept(&self) -> f64 {
        match self {
            DesfCurve::Unity | DesfCurve::TwoRight | DesfCurve::TwoLeft => 1.0,
            DesfCurve::Dom => DOM.intercept(),
            DesfCurve::Int | DesfCurve::ThreeRight | DesfCurve::ThreeLeft => THREE_INTERCEPT,
            DesfCurve::Conjecture => CONJECTURE.intercept(),
            DesfCurve::Previous => PREVIOUS.intercept(),
            DesfCurve::ProductInt => THREE_INTERCEPT * THREE_INTERCEPT,
            DesfCurve::Envelope(MinorFamily::TwoByTwo) => 1.0,
            DesfCurve::Envelope(MinorFamily::ThreeByThree) => THREE_INTERCEPT,
            DesfCurve::Empirical(c) => c.eval(0.0),
        }
    }

    pub fn eval(&self, xi: f64) -> f64 {
        if xi == 0.0 {
            return self.intercept();
        }
        match self {
            DesfCurve::Unity => 1.0,
            DesfCurve::Dom => DOM.eval(xi),
            DesfCurve::Int => INT.eval(xi),
            DesfCurve::ThreeRight => three_right(xi),
            DesfCurve::ThreeLeft => three_right(-xi),
            DesfCurve::TwoRight => two_right(xi),
            DesfCurve::TwoLeft => two_right(-xi),
            DesfCurve::Conjecture => CONJECTURE.eval(xi),
            DesfCurve::Previous => PREVIOUS.eval(xi),
            DesfCurve::ProductInt => three_right(xi) * three_right(-xi),
            DesfCurve::Envelope(MinorFamily::TwoByTwo) => two_right(xi).min(two_right(-xi)),
            DesfCurve::Envelope(MinorFamily::ThreeByThree) => three_right(xi).min(three_right(-xi)),
            DesfCurve::Empirical(c) => c.eval(xi),
        }
    }
}

impl fmt::Display for DesfCurve {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for DesfCurve {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let all = [
            DesfCurve::Unity,
            DesfCurve::Dom,
            DesfCurve::Int,
            DesfCurve::ThreeRight,
            DesfCurve::ThreeLeft,
            DesfCurve::TwoRight,
            DesfCurve::TwoLeft,
            DesfCurve::Conjecture,
            DesfCurve::Previous,
            DesfCurve::ProductInt,
            DesfCurve::Envelope(MinorFamily::TwoByTwo),
            DesfCurve::Envelope(MinorFamily::ThreeByThree),
        ];
        let key = s.trim().to_ascii_lowercase().replace('_', "-");
        all.iter().find(|c| c.name() == key).cloned().ok_or_else(|| {
            let names: Vec<_> = all.iter().map(|c| c.name()).collect();
            Error::InvalidArgument(format!("unknown curve `{s}`; valid: {}", names.join(", ")))
        })
    }
}

/// Envelope `ξ ↦ min(f(ξ), f(-ξ))` of a single-minor curve.
pub fn envelope(f: &DesfCurve) -> Result<DesfCurve> {
    match f {
        DesfCurve::ThreeRight | DesfCurve::ThreeLeft => Ok(DesfCurve::Envelope(MinorFamily::ThreeByThree)),
        DesfCurve::TwoRight | DesfCurve::TwoLeft => Ok(DesfCurve::Envelope(MinorFamily::TwoByTwo)),
        other => Err(Error::InvalidArgument(format!("no envelope defined for `{other}`"))),
    }
}

fn two_right(xi: f64) -> f64 {
    if xi <= 0.0 {
        1.0
    } else {
        // e^{-2ξ}(2 sinh ξ + cosh ξ) without overflow
        1.5 * (-xi).exp() - 0.5 * (-3.0 * xi).exp()
    }
}

/// Maclaurin coefficients in `y²` of
/// `[y sqrt(1-y²)(21 + 37y² + 2y⁴) + 3(27y² - 7) arcsin y] / y³`.
const THREE_LEFT_SERIES: [f64; 12] = [
    104.0,
    -7.2,
    -1.8,
    -0.404_761_904_761_904_761_905,
    -0.153_409_090_909_090_909_091,
    -0.072_770_979_020_979_020_979_0,
    -0.039_543_269_230_769_230_769_2,
    -0.023_575_367_647_058_823_529_4,
    -0.015_040_725_377_321_981_424_1,
    -0.010_106_136_924_342_105_263_2,
    -0.007_074_581_169_934_006_211_18,
    -0.005_119_867_739_470_108_695_65,
];

/// Below this `y = e^ξ` the arcsin branch cancels to leading order and the
/// series is used instead.
const THREE_LEFT_SERIES_MAX_Y: f64 = 0.1;

fn three_right(xi: f64) -> f64 {
    if xi > 0.0 {
        return INT.eval(xi);
    }
    let y = xi.exp();
    let bracket = if y < THREE_LEFT_SERIES_MAX_Y {
        let y2 = y * y;
        THREE_LEFT_SERIES.iter().rev().fold(0.0, |acc, c| acc * y2 + c)
    } else {
        let y2 = y * y;
        (y * (1.0 - y2).sqrt() * (37.0 * y2 + 2.0 * y2 * y2 + 21.0) + 3.0 * (27.0 * y2 - 7.0) * y.asin())
            / (y2 * y)
    };
    3.0 * PI * bracket / 1024.0
}

const JACOBIAN_PREFACTOR: f64 = 64.0 / (27.0 * PI2);

/// Maclaurin coefficients of `J(ξ) / JACOBIAN_PREFACTOR` in even powers of
/// `ξ`, from exact rational expansion. Leading term 256/105.
const JACOBIAN_SERIES: [f64; 24] = [
    2.438_095_238_095_238_095_24,
    -2.770_562_770_562_770_562_77,
    1.687_201_687_201_687_201_69,
    -0.732_304_732_304_732_304_732,
    0.254_196_472_683_867_641_851,
    -0.075_076_051_949_608_389_728_3,
    0.019_602_381_114_077_765_093_3,
    -0.004_642_517_969_124_760_050_92,
    0.001_015_693_239_879_456_549_68,
    -0.000_208_064_159_377_619_164_170,
    0.000_040_320_646_611_863_129_189_9,
    -0.000_007_451_533_787_435_451_033_86,
    0.000_001_321_707_946_535_671_807_65,
    -2.261_792_912_814_910_698_22e-7,
    3.750_178_010_671_804_930_14e-8,
    -6.046_101_368_730_084_981_80e-9,
    9.506_506_805_390_608_890_46e-10,
    -1.461_470_619_055_721_654_65e-10,
    2.201_537_001_118_006_376_17e-11,
    -3.255_685_014_710_508_781_07e-12,
    4.734_194_701_819_996_574_43e-13,
    -6.778_834_909_010_396_259_45e-14,
    9.570_009_662_843_716_200_92e-15,
    -1.333_515_539_913_800_063_61e-15,
];

/// Hilbert-Schmidt Jacobian in `ξ` and how to evaluate it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JacobianSpec {
    pub beta: f64,
    /// Below this `|ξ|` the Maclaurin series replaces the closed form.
    pub series_cutoff: f64,
}

impl Default for JacobianSpec {
    fn default() -> Self {
        Self {
            beta: 1.0,
            series_cutoff: 0.5,
        }
    }
}

impl JacobianSpec {
    pub fn new(beta: f64, series_cutoff: f64) -> Result<Self> {
        if !(beta > 0.0) || !(series_cutoff > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "need beta > 0 and series_cutoff > 0, got {beta} and {series_cutoff}"
            )));
        }
        Ok(Self { beta, series_cutoff })
    }

    /// `J_β(ξ)`: closed form for `β = 1`, nested quadrature otherwise.
    pub fn eval(&self, xi: f64) -> Result<f64> {
        self.eval_with_tol(xi, 1e-10)
    }

    /// As [`Self::eval`] with the absolute tolerance of the nested quadrature.
    pub fn eval_with_tol(&self, xi: f64, tol: f64) -> Result<f64> {
        if self.beta == 1.0 {
            Ok(jacobian_with_cutoff(xi, self.series_cutoff))
        } else {
            jacobian_general_beta(self.beta, xi, tol).map(|r| r.value)
        }
    }
}

/// Real-case Jacobian `J(ξ)` with the default series cutoff.
#[inline]
pub fn jacobian(xi: f64) -> f64 {
    jacobian_with_cutoff(xi, JacobianSpec::default().series_cutoff)
}

fn jacobian_with_cutoff(xi: f64, cutoff: f64) -> f64 {
    if xi.abs() < cutoff {
        jacobian_series(xi)
    } else {
        jacobian_direct(xi)
    }
}

/// Maclaurin evaluation; accurate for `|ξ| ≲ 1`.
pub fn jacobian_series(xi: f64) -> f64 {
    let x2 = xi * xi;
    JACOBIAN_PREFACTOR * JACOBIAN_SERIES.iter().rev().fold(0.0, |acc, c| acc * x2 + c)
}

/// Closed form rewritten in `u = e^{-2|ξ|}` so it cannot overflow. Loses
/// roughly `9 log10(1/|ξ|)` digits near the origin through cancellation.
pub fn jacobian_direct(xi: f64) -> f64 {
    let t = xi.abs();
    let u = (-2.0 * t).exp();
    let u2 = u * u;
    let u3 = u2 * u;
    let u4 = u2 * u2;
    let bracket = -80.0 * (u - u3) - 12.5 * (1.0 - u4) + 12.0 * t * (8.0 * (u + u3) + 0.5 * (1.0 + u4) + 18.0 * u2);
    JACOBIAN_PREFACTOR * 512.0 * (-5.0 * t).exp() * bracket / (1.0 - u).powi(9)
}

/// `J_β(ξ)` by nested quadrature of the weight `(ρ₁₁ρ₂₂ρ₃₃ρ₄₄)^{3β/2}` over
/// the fixed-`ξ` slice of the simplex.
///
/// With `ρ₁₁ = r w`, `ρ₂₂ = r (1 - w)` and `ρ₃₃` traded for `ξ`, the slice is
/// the unit square in `(r, w)` and the weight becomes
/// `C [r(1-r)]^{2a+1} · 2 [w(1-w)]^{2a+1} / (w e^{-ξ} + (1-w) e^{ξ})^{2a+2}`
/// with `a = 3β/2` and the Dirichlet normalization `C = Γ(4a+4)/Γ(a+1)⁴`.
/// The inner (`w`) and outer (`r`) integrals each get `tol/4`.
pub fn jacobian_general_beta(beta: f64, xi: f64, tol: f64) -> Result<QuadratureResult> {
    if !(beta > 0.0) || !xi.is_finite() || !(tol > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "need beta > 0, finite xi and tol > 0; got {beta}, {xi}, {tol}"
        )));
    }
    let a = 1.5 * beta;
    let power = 2.0 * a + 1.0;
    let norm = (ln_gamma(4.0 * a + 4.0) - 4.0 * ln_gamma(a + 1.0)).exp();
    let (em, ep) = ((-xi).exp(), xi.exp());
    let inner_tol = 0.25 * tol;

    let worst_inner = std::cell::Cell::new(0.0f64);
    let inner_evals = std::cell::Cell::new(0usize);
    let failure = std::cell::Cell::new(None);

    let outer = quadrature::integrate(
        |r: f64| {
            let radial = norm * (r * (1.0 - r)).powf(power);
            let inner = quadrature::integrate(
                |w: f64| {
                    let d = w * em + (1.0 - w) * ep;
                    2.0 * radial * (w * (1.0 - w)).powf(power) / d.powf(power + 1.0)
                },
                0.0,
                1.0,
                inner_tol,
            );
            match inner {
                Ok(q) => {
                    worst_inner.set(worst_inner.get().max(q.abs_err_est));
                    inner_evals.set(inner_evals.get() + q.evals);
                    q.value
                }
                Err(e) => {
                    failure.set(Some(e));
                    0.0
                }
            }
        },
        0.0,
        1.0,
        0.25 * tol,
    );
    if let Some(e) = failure.take() {
        return Err(e);
    }
    let outer = outer?;
    Ok(QuadratureResult {
        value: outer.value,
        abs_err_est: outer.abs_err_est + worst_inner.get(),
        evals: outer.evals + inner_evals.get(),
    })
}
