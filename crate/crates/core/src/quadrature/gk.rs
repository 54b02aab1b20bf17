//! Globally adaptive Gauss-Kronrod (10/21-point) quadrature.

use crate::error::{Error, Result};

use super::QuadratureResult;

const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];

const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_715_452_593_384,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

/// Gauss weights for the odd-indexed Kronrod abscissae.
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

pub(crate) const EVALS_PER_PANEL: usize = 21;

#[derive(Debug, Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    value: f64,
    err: f64,
    /// Too narrow to bisect further in floating point.
    frozen: bool,
}

fn qk21<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Panel {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut res_k = WGK[10] * fc;
    let mut res_g = 0.0;
    let mut res_abs = res_k.abs();
    let mut fv1 = [0.0; 10];
    let mut fv2 = [0.0; 10];
    for j in 0..10 {
        let dx = half * XGK[j];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        fv1[j] = f1;
        fv2[j] = f2;
        res_k += WGK[j] * (f1 + f2);
        res_abs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            res_g += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = 0.5 * res_k;
    let mut res_asc = WGK[10] * (fc - mean).abs();
    for j in 0..10 {
        res_asc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }
    let value = res_k * half;
    let res_abs = res_abs * half.abs();
    let res_asc = res_asc * half.abs();
    let mut err = ((res_k - res_g) * half).abs();
    if res_asc != 0.0 && err != 0.0 {
        err = res_asc * (200.0 * err / res_asc).powf(1.5).min(1.0);
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * res_abs);
    }
    let frozen = {
        let mid = center;
        !(a < mid && mid < b) || half.abs() < 8.0 * f64::EPSILON * center.abs().max(1.0)
    };
    Panel { a, b, value, err, frozen }
}

/// Integrates `f` over consecutive breakpoints, bisecting the panel with the
/// largest error estimate until the summed estimate is at most `tol`.
///
/// The final sum runs in left-to-right panel order, so the result depends only
/// on `f`, the breakpoints and `tol`.
pub fn integrate_breakpoints<F: Fn(f64) -> f64>(
    f: F,
    breakpoints: &[f64],
    tol: f64,
    max_evals: usize,
) -> Result<QuadratureResult> {
    if breakpoints.len() < 2 || breakpoints.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::InvalidArgument(format!(
            "breakpoints must be strictly increasing, got {breakpoints:?}"
        )));
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument(format!("tolerance must be positive, got {tol}")));
    }
    let mut panels: Vec<Panel> = breakpoints.windows(2).map(|w| qk21(&f, w[0], w[1])).collect();
    let mut evals = panels.len() * EVALS_PER_PANEL;
    loop {
        let total_err: f64 = panels.iter().map(|p| p.err).sum();
        if total_err <= tol {
            return Ok(finish(panels, evals));
        }
        let worst = panels
            .iter()
            .enumerate()
            .filter(|(_, p)| !p.frozen)
            .max_by(|(_, x), (_, y)| x.err.total_cmp(&y.err))
            .map(|(i, _)| i);
        let Some(worst) = worst else {
            return Err(no_convergence(panels, evals, tol));
        };
        if evals + 2 * EVALS_PER_PANEL > max_evals {
            return Err(no_convergence(panels, evals, tol));
        }
        let p = panels.swap_remove(worst);
        let mid = 0.5 * (p.a + p.b);
        panels.push(qk21(&f, p.a, mid));
        panels.push(qk21(&f, mid, p.b));
        evals += 2 * EVALS_PER_PANEL;
    }
}

fn finish(mut panels: Vec<Panel>, evals: usize) -> QuadratureResult {
    panels.sort_by(|x, y| x.a.total_cmp(&y.a));
    QuadratureResult {
        value: panels.iter().map(|p| p.value).sum(),
        abs_err_est: panels.iter().map(|p| p.err).sum(),
        evals,
    }
}

fn no_convergence(panels: Vec<Panel>, evals: usize, tol: f64) -> Error {
    let best = finish(panels, evals);
    Error::NoConvergence {
        value: best.value,
        abs_err_est: best.abs_err_est,
        tol,
        evals: best.evals,
    }
}
