//! Monte Carlo and quasi-Monte Carlo estimates over the Hilbert-Schmidt
//! ensemble: separability probabilities, ξ-binned separability histograms
//! and minor-conditional separability functions.
//!
//! Every estimate conditions on positivity of the correlation matrix
//! (rejection). Streams are cut into fixed blocks of [`BLOCK`] points and the
//! per-block tallies are integers, so results are bit-identical for any
//! number of rayon workers.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qstate::{
    absolutely_separable_spectrum, correlation_is_pd, representative_diagonal,
    separable_from_correlations, BlooreCoords, DensityMatrix,
};
use crate::sampling::{
    cube_to_correlations, cube_to_diagonal, Engine, PointSource, SequenceSpec, LDS_PERIOD,
    STATE_DIMENSION,
};
use crate::sepfun::{DesfCurve, EmpiricalCurve};

/// Points per work unit.
pub const BLOCK: usize = 1 << 14;
pub const DEFAULT_REPLICATES: usize = 8;
pub const DEFAULT_BINS: usize = 101;
pub const DEFAULT_XIMAX: f64 = 4.0;
/// Half-width of the reported interval in standard errors.
pub const DEFAULT_CI_SIGMAS: f64 = 2.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EstimateOptions {
    /// Scrambled replicates for the low-discrepancy engine. With 1 the
    /// stream is used as given and the binomial error is reported.
    pub replicates: usize,
    pub ci_sigmas: f64,
}

impl Default for EstimateOptions {
    fn default() -> Self {
        Self {
            replicates: DEFAULT_REPLICATES,
            ci_sigmas: DEFAULT_CI_SIGMAS,
        }
    }
}

/// A cube point that passed the positivity test.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Accepted {
    pub index: u64,
    pub diag: [f64; 4],
    pub z: [f64; 6],
    /// `ξ`; infinite or NaN only for a diagonal with a zero entry.
    pub xi: f64,
}

impl Accepted {
    pub fn bloore(&self) -> BlooreCoords {
        BlooreCoords::new_unchecked(self.diag, self.z)
    }

    pub fn density_matrix(&self) -> DensityMatrix {
        self.bloore().to_density_matrix()
    }

    pub fn is_separable(&self) -> bool {
        if self.xi.is_finite() {
            separable_from_correlations(&self.z, self.xi)
        } else {
            self.density_matrix().partial_transpose().as_sym().determinant() >= 0.0
        }
    }

    pub fn is_absolutely_separable(&self) -> bool {
        absolutely_separable_spectrum(self.density_matrix().eigenvalues())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Event {
    Separable,
    AbsolutelySeparable,
    /// Every accepted state; the estimate is exactly 1.
    Always,
}

impl Event {
    pub fn holds(self, s: &Accepted) -> bool {
        match self {
            Event::Separable => s.is_separable(),
            Event::AbsolutelySeparable => s.is_absolutely_separable(),
            Event::Always => true,
        }
    }
}

/// Event predicate on accepted samples.
pub type EventFn<'a> = dyn Fn(&Accepted) -> bool + Sync + 'a;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ErrorModel {
    Binomial,
    /// Spread of independently scrambled replicate means.
    Replicates,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateResult {
    pub mean: f64,
    pub stderr: f64,
    /// Positivity-accepted samples.
    pub n_effective: u64,
    pub n_total: u64,
    pub n_hits: u64,
    /// `mean ± ci_sigmas·stderr` clipped to `[0, 1]`.
    pub ci95: (f64, f64),
    pub error_model: ErrorModel,
    pub replicate_means: Vec<f64>,
}

fn binomial_stderr(p: f64, n: u64) -> f64 {
    (p * (1.0 - p) / n as f64).sqrt()
}

fn interval(mean: f64, stderr: f64, sigmas: f64) -> (f64, f64) {
    ((mean - sigmas * stderr).max(0.0), (mean + sigmas * stderr).min(1.0))
}

/// Streams making up one estimate and the number of points from each.
fn stream_plan(spec: &SequenceSpec, n: u64, opts: &EstimateOptions, min_dim: usize) -> Result<Vec<(SequenceSpec, u64)>> {
    if n == 0 {
        return Err(Error::InvalidArgument("n must be at least 1".into()));
    }
    if spec.dimension() < min_dim {
        return Err(Error::InvalidArgument(format!(
            "stream dimension {} is below the required {min_dim}",
            spec.dimension()
        )));
    }
    if opts.replicates == 0 {
        return Err(Error::InvalidArgument("replicates must be at least 1".into()));
    }
    if !(opts.ci_sigmas >= 0.0) {
        return Err(Error::InvalidArgument("ci_sigmas must be non-negative".into()));
    }
    let plan = if spec.engine() == Engine::LowDiscrepancy && opts.replicates > 1 {
        let r = opts.replicates as u64;
        if n < r {
            return Err(Error::InvalidArgument(format!("n = {n} is smaller than {r} replicates")));
        }
        (0..r).map(|k| (spec.replicate(k), n / r + u64::from(k < n % r))).collect()
    } else {
        vec![(*spec, n)]
    };
    if spec.engine() == Engine::LowDiscrepancy && plan.iter().any(|&(_, m)| m > LDS_PERIOD) {
        return Err(Error::InvalidArgument(format!(
            "low-discrepancy streams hold at most {LDS_PERIOD} points each"
        )));
    }
    Ok(plan)
}

trait Tally: Send {
    fn merge(&mut self, other: Self);
}

impl Tally for Vec<u64> {
    fn merge(&mut self, other: Self) {
        for (a, b) in self.iter_mut().zip(other) {
            *a += b;
        }
    }
}

/// Visits every positivity-accepted point of `n` points of `spec`.
fn scan_states<T, I, V>(spec: &SequenceSpec, n: u64, init: I, visit: V) -> T
where
    T: Tally,
    I: Fn() -> T + Sync + Send,
    V: Fn(&mut T, &Accepted) + Sync,
{
    let source = PointSource::new(*spec);
    let dim = spec.dimension();
    let blocks = n.div_ceil(BLOCK as u64);
    (0..blocks)
        .into_par_iter()
        .fold(&init, |mut t, b| {
            let start = b * BLOCK as u64;
            let len = (n - start).min(BLOCK as u64) as usize;
            let mut buf = vec![0.0; len * dim];
            source.fill(start, &mut buf);
            for (k, u) in buf.chunks_exact(dim).enumerate() {
                let z = cube_to_correlations(&[u[3], u[4], u[5], u[6], u[7], u[8]]);
                if !correlation_is_pd(&z) {
                    continue;
                }
                let diag = cube_to_diagonal(&[u[0], u[1], u[2]]);
                let xi = 0.5 * ((diag[0] * diag[3]) / (diag[1] * diag[2])).ln();
                let s = Accepted {
                    index: start + k as u64,
                    diag,
                    z,
                    xi,
                };
                visit(&mut t, &s);
            }
            t
        })
        .reduce(&init, |mut a, b| {
            a.merge(b);
            a
        })
}

/// Probabilities of several events from one pass over the stream.
pub fn estimate_events(
    spec: &SequenceSpec,
    n: u64,
    opts: &EstimateOptions,
    events: &[&EventFn<'_>],
) -> Result<Vec<EstimateResult>> {
    let plan = stream_plan(spec, n, opts, STATE_DIMENSION)?;
    let m = events.len();
    // per replicate: [n_psd, hits...]
    let tallies: Vec<Vec<u64>> = plan
        .iter()
        .map(|(s, count)| {
            scan_states(s, *count, || vec![0u64; m + 1], |t, a| {
                t[0] += 1;
                for (k, e) in events.iter().enumerate() {
                    t[k + 1] += u64::from(e(a));
                }
            })
        })
        .collect();
    let n_eff: u64 = tallies.iter().map(|t| t[0]).sum();
    if n_eff == 0 || tallies.iter().any(|t| t[0] == 0) {
        return Err(Error::InsufficientSamples { n_total: n });
    }
    let replicated = plan.len() > 1;
    Ok((0..m)
        .map(|k| {
            let hits: u64 = tallies.iter().map(|t| t[k + 1]).sum();
            let mean = hits as f64 / n_eff as f64;
            let replicate_means: Vec<f64> = tallies.iter().map(|t| t[k + 1] as f64 / t[0] as f64).collect();
            let (stderr, error_model) = if replicated {
                let r = replicate_means.len() as f64;
                let avg = replicate_means.iter().sum::<f64>() / r;
                let var = replicate_means.iter().map(|x| (x - avg).powi(2)).sum::<f64>() / (r - 1.0);
                ((var / r).sqrt(), ErrorModel::Replicates)
            } else {
                (binomial_stderr(mean, n_eff), ErrorModel::Binomial)
            };
            EstimateResult {
                mean,
                stderr,
                n_effective: n_eff,
                n_total: n,
                n_hits: hits,
                ci95: interval(mean, stderr, opts.ci_sigmas),
                error_model,
                replicate_means,
            }
        })
        .collect())
}

pub fn estimate_event(spec: &SequenceSpec, n: u64, opts: &EstimateOptions, event: &EventFn<'_>) -> Result<EstimateResult> {
    Ok(estimate_events(spec, n, opts, &[event])?.remove(0))
}

/// Probability that a Hilbert-Schmidt random real two-qubit state has a
/// positive partial transpose.
pub fn estimate_sep_probability(spec: &SequenceSpec, n: u64) -> Result<EstimateResult> {
    estimate_event(spec, n, &EstimateOptions::default(), &|a| a.is_separable())
}

/// Probability of absolute separability (separable under every global
/// unitary).
pub fn estimate_abs_sep_probability(spec: &SequenceSpec, n: u64) -> Result<EstimateResult> {
    estimate_event(spec, n, &EstimateOptions::default(), &|a| a.is_absolutely_separable())
}

/// `bins` equal bins over `[-ximax, ximax]`, exactly antisymmetric.
pub fn uniform_edges(bins: usize, ximax: f64) -> Result<Vec<f64>> {
    if bins < 2 {
        return Err(Error::InvalidArgument("at least two bins are required".into()));
    }
    if !(ximax > 0.0 && ximax.is_finite()) {
        return Err(Error::InvalidArgument(format!("ximax must be positive, got {ximax}")));
    }
    Ok((0..=bins)
        .map(|k| ximax * (2.0 * k as f64 - bins as f64) / bins as f64)
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct BinCount {
    pub n_psd: u64,
    pub n_sep: u64,
}

/// Per-bin conditional event frequency among accepted samples, binned in ξ.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesfHistogram {
    bin_edges: Vec<f64>,
    n_psd: Vec<u64>,
    n_sep: Vec<u64>,
    underflow: BinCount,
    overflow: BinCount,
    n_total: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HistogramRow {
    pub lo: f64,
    pub hi: f64,
    pub mid: f64,
    pub n_psd: u64,
    pub n_sep: u64,
    /// `None` for an empty bin.
    pub ratio: Option<f64>,
    pub stderr: Option<f64>,
}

impl DesfHistogram {
    pub fn from_counts(
        bin_edges: Vec<f64>,
        n_psd: Vec<u64>,
        n_sep: Vec<u64>,
        underflow: BinCount,
        overflow: BinCount,
        n_total: u64,
    ) -> Result<Self> {
        if bin_edges.len() < 3 || n_psd.len() + 1 != bin_edges.len() || n_sep.len() != n_psd.len() {
            return Err(Error::InvalidArgument("histogram needs at least two bins and matching counts".into()));
        }
        if bin_edges.windows(2).any(|w| !(w[0] < w[1])) || bin_edges.iter().any(|e| !e.is_finite()) {
            return Err(Error::InvalidArgument("bin edges must be finite and strictly increasing".into()));
        }
        if n_sep.iter().zip(&n_psd).any(|(s, p)| s > p) || underflow.n_sep > underflow.n_psd || overflow.n_sep > overflow.n_psd {
            return Err(Error::InvalidArgument("event count exceeds accepted count".into()));
        }
        Ok(Self {
            bin_edges,
            n_psd,
            n_sep,
            underflow,
            overflow,
            n_total,
        })
    }

    pub fn bin_edges(&self) -> &[f64] {
        &self.bin_edges
    }

    pub fn bins(&self) -> usize {
        self.n_psd.len()
    }

    pub fn n_psd(&self) -> &[u64] {
        &self.n_psd
    }

    pub fn n_sep(&self) -> &[u64] {
        &self.n_sep
    }

    /// Accepted samples with `ξ` below the first edge.
    pub fn underflow(&self) -> BinCount {
        self.underflow
    }

    /// Accepted samples with `ξ` at or above the last edge.
    pub fn overflow(&self) -> BinCount {
        self.overflow
    }

    pub fn n_total(&self) -> u64 {
        self.n_total
    }

    pub fn mid(&self, b: usize) -> f64 {
        0.5 * (self.bin_edges[b] + self.bin_edges[b + 1])
    }

    pub fn width(&self, b: usize) -> f64 {
        self.bin_edges[b + 1] - self.bin_edges[b]
    }

    pub fn ratio(&self, b: usize) -> Option<f64> {
        (self.n_psd[b] > 0).then(|| self.n_sep[b] as f64 / self.n_psd[b] as f64)
    }

    /// Binomial standard error of [`Self::ratio`].
    pub fn stderr(&self, b: usize) -> Option<f64> {
        self.ratio(b).map(|p| binomial_stderr(p, self.n_psd[b]))
    }

    /// Standard error used for z-scores: binomial at the shrunk frequency
    /// `(k + ½)/(n + 1)`, so bins at 0 or 1 still get a positive width.
    pub fn sigma_for_tests(&self, b: usize) -> Option<f64> {
        let n = self.n_psd[b];
        (n > 0).then(|| binomial_stderr((self.n_sep[b] as f64 + 0.5) / (n as f64 + 1.0), n))
    }

    pub fn total_psd(&self) -> u64 {
        self.n_psd.iter().sum::<u64>() + self.underflow.n_psd + self.overflow.n_psd
    }

    pub fn total_sep(&self) -> u64 {
        self.n_sep.iter().sum::<u64>() + self.underflow.n_sep + self.overflow.n_sep
    }

    /// Event frequency over all accepted samples, tails included.
    pub fn pooled_ratio(&self) -> Option<f64> {
        let p = self.total_psd();
        (p > 0).then(|| self.total_sep() as f64 / p as f64)
    }

    /// Empirical ξ-density of accepted samples in bin `b`.
    pub fn density(&self, b: usize) -> f64 {
        self.n_psd[b] as f64 / (self.total_psd() as f64 * self.width(b))
    }

    pub fn rows(&self) -> Vec<HistogramRow> {
        (0..self.bins())
            .map(|b| HistogramRow {
                lo: self.bin_edges[b],
                hi: self.bin_edges[b + 1],
                mid: self.mid(b),
                n_psd: self.n_psd[b],
                n_sep: self.n_sep[b],
                ratio: self.ratio(b),
                stderr: self.stderr(b),
            })
            .collect()
    }

    /// The histogram as a step curve. Fails if any bin is empty.
    pub fn to_empirical_curve(&self) -> Result<EmpiricalCurve> {
        let values = (0..self.bins())
            .map(|b| {
                self.ratio(b)
                    .ok_or_else(|| Error::InvalidArgument(format!("bin {b} is empty")))
            })
            .collect::<Result<Vec<_>>>()?;
        EmpiricalCurve::new(self.bin_edges.clone(), values)
    }
}

/// Separability histogram with `bins` equal bins over `[-ximax, ximax]`.
pub fn estimate_desf(spec: &SequenceSpec, n: u64, bins: usize, ximax: f64) -> Result<DesfHistogram> {
    let edges = uniform_edges(bins, ximax)?;
    estimate_desf_with(spec, n, &edges, &EstimateOptions::default(), &|a| a.is_separable())
}

/// Histogram of an arbitrary event over arbitrary edges. Replicate streams
/// are pooled, and per-bin errors are always binomial.
pub fn estimate_desf_with(
    spec: &SequenceSpec,
    n: u64,
    edges: &[f64],
    opts: &EstimateOptions,
    event: &EventFn<'_>,
) -> Result<DesfHistogram> {
    let bins = edges.len().saturating_sub(1);
    DesfHistogram::from_counts(edges.to_vec(), vec![0; bins], vec![0; bins], BinCount::default(), BinCount::default(), 0)?;
    let plan = stream_plan(spec, n, opts, STATE_DIMENSION)?;
    // slots 0 and 1 are under/overflow, bins follow; [psd, sep] interleaved
    let slots = bins + 2;
    let (lo, hi) = (edges[0], edges[bins]);
    let mut total = vec![0u64; 2 * slots];
    for (s, count) in &plan {
        let t = scan_states(s, *count, || vec![0u64; 2 * slots], |t, a| {
            let slot = if a.xi < lo {
                0
            } else if !(a.xi < hi) {
                1
            } else {
                1 + edges.partition_point(|&e| e <= a.xi)
            };
            t[2 * slot] += 1;
            t[2 * slot + 1] += u64::from(event(a));
        });
        total.merge(t);
    }
    let get = |slot: usize| BinCount {
        n_psd: total[2 * slot],
        n_sep: total[2 * slot + 1],
    };
    let counts: Vec<BinCount> = (2..slots).map(get).collect();
    DesfHistogram::from_counts(
        edges.to_vec(),
        counts.iter().map(|c| c.n_psd).collect(),
        counts.iter().map(|c| c.n_sep).collect(),
        get(0),
        get(1),
        n,
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ResidualRow {
    pub mid: f64,
    pub n_psd: u64,
    pub ratio: f64,
    pub model: f64,
    pub residual: f64,
    pub sigma: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CurveComparison {
    pub curve: String,
    /// Non-empty bins only.
    pub rows: Vec<ResidualRow>,
    pub max_abs_z: f64,
    /// Mean residual weighted by accepted samples per bin, so sparsely
    /// filled tail bins do not dominate.
    pub mean_signed_residual: f64,
    /// Root-mean-square residual with the same weights.
    pub rms_residual: f64,
}

/// Residuals `ratio − curve(ξ_mid)` over the non-empty bins of `hist`.
pub fn compare_curves(hist: &DesfHistogram, curve: &DesfCurve) -> CurveComparison {
    let rows: Vec<ResidualRow> = (0..hist.bins())
        .filter_map(|b| {
            let ratio = hist.ratio(b)?;
            let model = curve.eval(hist.mid(b));
            Some(ResidualRow {
                mid: hist.mid(b),
                n_psd: hist.n_psd()[b],
                ratio,
                model,
                residual: ratio - model,
                sigma: hist.sigma_for_tests(b)?,
            })
        })
        .collect();
    let weight = rows.iter().map(|r| r.n_psd as f64).sum::<f64>().max(1.0);
    let mean = |f: &dyn Fn(&ResidualRow) -> f64| rows.iter().map(|r| r.n_psd as f64 * f(r)).sum::<f64>() / weight;
    CurveComparison {
        curve: curve.to_string(),
        max_abs_z: rows.iter().map(|r| (r.residual / r.sigma).abs()).fold(0.0, f64::max),
        mean_signed_residual: mean(&|r| r.residual),
        rms_residual: mean(&|r| r.residual * r.residual).sqrt(),
        rows,
    }
}

/// A principal minor of the partial transpose. Labels are 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MinorSelector {
    /// 2×2 minor on rows and columns `(i, j)`, `i < j`.
    Pair(usize, usize),
    /// 3×3 minor with row and column `k` removed.
    Delete(usize),
}

impl MinorSelector {
    pub fn pair(i: usize, j: usize) -> Result<Self> {
        if (1..=4).contains(&i) && (1..=4).contains(&j) && i < j {
            Ok(Self::Pair(i, j))
        } else {
            Err(Error::InvalidArgument(format!("pair ({i}, {j}) is not 1 <= i < j <= 4")))
        }
    }

    pub fn delete(k: usize) -> Result<Self> {
        if (1..=4).contains(&k) {
            Ok(Self::Delete(k))
        } else {
            Err(Error::InvalidArgument(format!("deleted index {k} is not in 1..=4")))
        }
    }

    pub fn all() -> Vec<Self> {
        let mut v: Vec<Self> = crate::qstate::PAIRS.iter().map(|&(i, j)| Self::Pair(i + 1, j + 1)).collect();
        v.extend((1..=4).map(Self::Delete));
        v
    }

    fn value(self, pt: &DensityMatrix) -> f64 {
        match self {
            Self::Pair(i, j) => pt.as_sym().minor2(i - 1, j - 1),
            Self::Delete(k) => pt.as_sym().minor3_deleting(k - 1),
        }
    }
}

impl std::fmt::Display for MinorSelector {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::Pair(i, j) => write!(f, "pair:{i},{j}"),
            Self::Delete(k) => write!(f, "delete:{k}"),
        }
    }
}

impl std::str::FromStr for MinorSelector {
    type Err = Error;

    /// `pair:I,J` or `delete:K`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidArgument(format!("minor {s:?} is not pair:I,J or delete:K"));
        let (kind, rest) = s.split_once(':').ok_or_else(bad)?;
        match kind {
            "pair" => {
                let (i, j) = rest.split_once(',').ok_or_else(bad)?;
                Self::pair(i.trim().parse().map_err(|_| bad())?, j.trim().parse().map_err(|_| bad())?)
            }
            "delete" => Self::delete(rest.trim().parse().map_err(|_| bad())?),
            _ => Err(bad()),
        }
    }
}

/// Closed-form curve each minor follows, fixed from a calibration run at
/// `ξ = ±0.5`. Pairs other than (1,4) and (2,3) do not involve the swapped
/// entries and are always non-negative.
pub fn closed_form_for(minor: MinorSelector) -> DesfCurve {
    match minor {
        MinorSelector::Delete(1 | 4) => DesfCurve::ThreeRight,
        MinorSelector::Delete(_) => DesfCurve::ThreeLeft,
        MinorSelector::Pair(2, 3) => DesfCurve::TwoRight,
        MinorSelector::Pair(1, 4) => DesfCurve::TwoLeft,
        MinorSelector::Pair(..) => DesfCurve::Unity,
    }
}

/// Conditional probability, on a grid of `ξ`, that a chosen minor of the
/// partial transpose is non-negative, with the diagonal held at a
/// representative value and the correlations uniform on the positive region.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MinorDesf {
    pub minor: MinorSelector,
    pub grid: Vec<f64>,
    pub diagonals: Vec<[f64; 4]>,
    /// Accepted correlation samples, shared by every grid point.
    pub n_psd: u64,
    pub n_total: u64,
    pub n_hold: Vec<u64>,
}

impl MinorDesf {
    pub fn ratio(&self, k: usize) -> f64 {
        self.n_hold[k] as f64 / self.n_psd as f64
    }

    pub fn stderr(&self, k: usize) -> f64 {
        binomial_stderr(self.ratio(k), self.n_psd)
    }

    /// Binomial error at the shrunk frequency, as in
    /// [`DesfHistogram::sigma_for_tests`].
    pub fn sigma_for_tests(&self, k: usize) -> f64 {
        binomial_stderr((self.n_hold[k] as f64 + 0.5) / (self.n_psd as f64 + 1.0), self.n_psd)
    }
}

pub fn estimate_minor_desf(spec: &SequenceSpec, n: u64, minor: MinorSelector, xi_grid: &[f64]) -> Result<MinorDesf> {
    estimate_minor_desf_with(spec, n, minor, xi_grid, &representative_diagonal)
}

/// As [`estimate_minor_desf`] with a caller-chosen diagonal for each `ξ`.
/// Uses the first six stream coordinates.
pub fn estimate_minor_desf_with(
    spec: &SequenceSpec,
    n: u64,
    minor: MinorSelector,
    xi_grid: &[f64],
    diagonal_for: &(dyn Fn(f64) -> [f64; 4] + Sync),
) -> Result<MinorDesf> {
    if xi_grid.is_empty() || xi_grid.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidArgument("ξ grid must be non-empty and finite".into()));
    }
    let opts = EstimateOptions {
        replicates: 1,
        ..EstimateOptions::default()
    };
    let plan = stream_plan(spec, n, &opts, 6)?;
    let diagonals: Vec<[f64; 4]> = xi_grid.iter().map(|&x| diagonal_for(x)).collect();
    for d in &diagonals {
        BlooreCoords::new(*d, [0.0; 6])?;
    }
    let g = diagonals.len();
    let (s, count) = plan[0];
    let source = PointSource::new(s);
    let dim = s.dimension();
    let blocks = count.div_ceil(BLOCK as u64);
    let tally = (0..blocks)
        .into_par_iter()
        .fold(
            || vec![0u64; g + 1],
            |mut t, b| {
                let start = b * BLOCK as u64;
                let len = (count - start).min(BLOCK as u64) as usize;
                let mut buf = vec![0.0; len * dim];
                source.fill(start, &mut buf);
                for u in buf.chunks_exact(dim) {
                    let z = cube_to_correlations(&[u[0], u[1], u[2], u[3], u[4], u[5]]);
                    if !correlation_is_pd(&z) {
                        continue;
                    }
                    t[0] += 1;
                    for (k, d) in diagonals.iter().enumerate() {
                        let pt = BlooreCoords::new_unchecked(*d, z).to_density_matrix().partial_transpose();
                        t[k + 1] += u64::from(minor.value(&pt) >= 0.0);
                    }
                }
                t
            },
        )
        .reduce(
            || vec![0u64; g + 1],
            |mut a, b| {
                a.merge(b);
                a
            },
        );
    if tally[0] == 0 {
        return Err(Error::InsufficientSamples { n_total: n });
    }
    Ok(MinorDesf {
        minor,
        grid: xi_grid.to_vec(),
        diagonals,
        n_psd: tally[0],
        n_total: n,
        n_hold: tally[1..].to_vec(),
    })
}

/// Runs `f` on a dedicated pool of `workers` threads.
pub fn with_workers<R: Send>(workers: usize, f: impl FnOnce() -> R + Send) -> Result<R> {
    if workers == 0 {
        return Err(Error::InvalidArgument("workers must be at least 1".into()));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::InvalidArgument(format!("cannot start {workers} workers: {e}")))?;
    Ok(pool.install(f))
}
