//! Reproducible point streams on the unit cube and the map from the cube to
//! Hilbert-Schmidt distributed Bloore coordinates.
//!
//! Every stream is counter based: point `i` depends only on the
//! [`SequenceSpec`] and `i`, so offset ranges can be handed to workers in any
//! partition and the union is always the same point set.

mod sobol;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use statrs::function::beta::inv_beta_reg;

use crate::error::{Error, Result};
use crate::qstate::BlooreCoords;

pub use sobol::MAX_DIMENSION as MAX_LDS_DIMENSION;

/// Cube dimension used for full state sampling: three simplex stages and six
/// correlations.
pub const STATE_DIMENSION: usize = 9;

/// Number of points addressable in a low-discrepancy stream.
pub const LDS_PERIOD: u64 = 1 << sobol::BITS;

/// Shape of each Dirichlet component of the diagonal (β = 1).
pub const DIAGONAL_SHAPE: f64 = 2.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Engine {
    #[serde(rename = "prng")]
    PseudoRandom,
    #[serde(rename = "lds")]
    LowDiscrepancy,
}

impl Engine {
    pub fn name(self) -> &'static str {
        match self {
            Engine::PseudoRandom => "prng",
            Engine::LowDiscrepancy => "lds",
        }
    }
}

impl std::fmt::Display for Engine {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Engine {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "prng" | "pseudo-random" => Ok(Engine::PseudoRandom),
            "lds" | "low-discrepancy" | "sobol" => Ok(Engine::LowDiscrepancy),
            _ => Err(Error::InvalidArgument(format!(
                "unknown engine {s:?} (expected prng or lds)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawSpec")]
pub struct SequenceSpec {
    engine: Engine,
    seed: u64,
    dimension: usize,
    scramble: bool,
}

#[derive(Deserialize)]
struct RawSpec {
    engine: Engine,
    seed: u64,
    dimension: usize,
    #[serde(default)]
    scramble: bool,
}

impl TryFrom<RawSpec> for SequenceSpec {
    type Error = Error;

    fn try_from(r: RawSpec) -> Result<Self> {
        SequenceSpec::new(r.engine, r.seed, r.dimension, r.scramble)
    }
}

impl SequenceSpec {
    /// `scramble` only affects the low-discrepancy engine.
    pub fn new(engine: Engine, seed: u64, dimension: usize, scramble: bool) -> Result<Self> {
        if dimension == 0 {
            return Err(Error::InvalidArgument("dimension must be at least 1".into()));
        }
        if engine == Engine::LowDiscrepancy && dimension > sobol::MAX_DIMENSION {
            return Err(Error::InvalidArgument(format!(
                "low-discrepancy streams support at most {} dimensions, got {dimension}",
                sobol::MAX_DIMENSION
            )));
        }
        Ok(Self {
            engine,
            seed,
            dimension,
            scramble: scramble && engine == Engine::LowDiscrepancy,
        })
    }

    /// Nine-dimensional stream for full state sampling.
    pub fn state(engine: Engine, seed: u64, scramble: bool) -> Self {
        Self::new(engine, seed, STATE_DIMENSION, scramble).expect("nine dimensions is supported")
    }

    pub fn engine(&self) -> Engine {
        self.engine
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn scramble(&self) -> bool {
        self.scramble
    }

    /// Independent stream number `r` derived from this one. Low-discrepancy
    /// replicates are always scrambled, otherwise they would coincide.
    pub fn replicate(&self, r: u64) -> Self {
        Self {
            seed: splitmix64(self.seed ^ splitmix64(r.wrapping_add(1))),
            scramble: self.engine == Engine::LowDiscrepancy,
            ..*self
        }
    }
}

fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// `n × dimension` points stored row-major.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SampleBatch {
    pub points: Vec<f64>,
    pub dimension: usize,
    pub index_offset: u64,
}

impl SampleBatch {
    pub fn len(&self) -> usize {
        self.points.len() / self.dimension
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.points[i * self.dimension..(i + 1) * self.dimension]
    }

    pub fn rows(&self) -> std::slice::ChunksExact<'_, f64> {
        self.points.chunks_exact(self.dimension)
    }
}

/// A prepared generator for one [`SequenceSpec`]. Building it is the
/// expensive part for scrambled streams, so callers filling many blocks
/// should keep one around.
#[derive(Debug, Clone)]
pub struct PointSource {
    spec: SequenceSpec,
    sobol: Option<sobol::Sobol>,
}

impl PointSource {
    pub fn new(spec: SequenceSpec) -> Self {
        let sobol = match spec.engine {
            Engine::PseudoRandom => None,
            Engine::LowDiscrepancy => Some(sobol::Sobol::new(
                spec.dimension,
                spec.scramble.then(|| splitmix64(spec.seed)),
            )),
        };
        Self { spec, sobol }
    }

    pub fn spec(&self) -> &SequenceSpec {
        &self.spec
    }

    /// Writes points `offset .. offset + out.len() / dimension` into `out`.
    ///
    /// # Panics
    ///
    /// If `out.len()` is not a multiple of the dimension, or a
    /// low-discrepancy request runs past [`LDS_PERIOD`].
    pub fn fill(&self, offset: u64, out: &mut [f64]) {
        let dim = self.spec.dimension;
        assert_eq!(out.len() % dim, 0, "buffer is not a whole number of points");
        let n = out.len() / dim;
        match &self.sobol {
            Some(s) => {
                assert!(
                    offset.checked_add(n as u64).is_some_and(|end| end <= LDS_PERIOD),
                    "low-discrepancy stream exhausted"
                );
                s.fill(offset, n, out);
            }
            None => {
                let mut rng = ChaCha8Rng::seed_from_u64(self.spec.seed);
                rng.set_word_pos(2 * dim as u128 * offset as u128);
                for u in out.iter_mut() {
                    *u = ((rng.next_u64() >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64);
                }
            }
        }
    }
}

/// Points `offset .. offset + n` of the stream. Coordinates lie strictly
/// inside `(0, 1)`.
///
/// # Panics
///
/// If a low-discrepancy request runs past [`LDS_PERIOD`].
pub fn next_points(spec: &SequenceSpec, offset: u64, n: usize) -> SampleBatch {
    let mut points = vec![0.0; n * spec.dimension];
    PointSource::new(*spec).fill(offset, &mut points);
    SampleBatch {
        points,
        dimension: spec.dimension,
        index_offset: offset,
    }
}

/// Diagonal from three cube coordinates by inverse-CDF stick breaking:
/// stage `k` draws Beta(5/2, 5/2·(3−k)) for the share of what remains.
pub fn cube_to_diagonal(u: &[f64; 3]) -> [f64; 4] {
    let a = DIAGONAL_SHAPE;
    let x0 = inv_beta_reg(a, 3.0 * a, u[0]);
    let r0 = 1.0 - x0;
    let x1 = r0 * inv_beta_reg(a, 2.0 * a, u[1]);
    let r1 = r0 - x1;
    let x2 = r1 * inv_beta_reg(a, a, u[2]);
    let x3 = (r1 - x2).max(0.0);
    [x0, x1, x2, x3]
}

/// Correlations `z = 2u − 1` in [`PAIRS`](crate::qstate::PAIRS) order.
pub fn cube_to_correlations(u: &[f64; 6]) -> [f64; 6] {
    u.map(|v| 2.0 * v - 1.0)
}

/// Maps `u[0..3]` to the diagonal and `u[3..9]` to the correlations. The
/// resulting state is not necessarily positive; condition on
/// [`correlation_is_pd`](crate::qstate::correlation_is_pd) to obtain the
/// Hilbert-Schmidt ensemble.
pub fn cube_to_bloore(u: &[f64; 9]) -> BlooreCoords {
    let diag = cube_to_diagonal(&[u[0], u[1], u[2]]);
    let z = cube_to_correlations(&[u[3], u[4], u[5], u[6], u[7], u[8]]);
    BlooreCoords::new_unchecked(diag, z)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qstate::{correlation_is_pd, Xi};
    use crate::sepfun::jacobian;
    use crate::quadrature::integrate;

    fn prng(seed: u64, dim: usize) -> SequenceSpec {
        SequenceSpec::new(Engine::PseudoRandom, seed, dim, false).unwrap()
    }

    fn lds(seed: u64, dim: usize, scramble: bool) -> SequenceSpec {
        SequenceSpec::new(Engine::LowDiscrepancy, seed, dim, scramble).unwrap()
    }

    /// Exact star discrepancy of a small 2-D point set: the supremum over
    /// anchored boxes is attained on the grid spanned by point coordinates
    /// and 1, taking both open and closed counts into account.
    fn star_discrepancy(pts: &[[f64; 2]]) -> f64 {
        let n = pts.len() as f64;
        let mut xs: Vec<f64> = pts.iter().map(|p| p[0]).chain([1.0]).collect();
        let mut ys: Vec<f64> = pts.iter().map(|p| p[1]).chain([1.0]).collect();
        xs.sort_by(f64::total_cmp);
        ys.sort_by(f64::total_cmp);
        let mut d: f64 = 0.0;
        for &x in &xs {
            for &y in &ys {
                let vol = x * y;
                let open = pts.iter().filter(|p| p[0] < x && p[1] < y).count() as f64;
                let closed = pts.iter().filter(|p| p[0] <= x && p[1] <= y).count() as f64;
                d = d.max(vol - open / n).max(closed / n - vol);
            }
        }
        d
    }

    #[test]
    fn star_discrepancy_helper_on_known_sets() {
        assert!((star_discrepancy(&[[0.5, 0.5]]) - 0.75).abs() < 1e-15);
        assert!((star_discrepancy(&[[1.0, 1.0]]) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn low_discrepancy_beats_pseudo_random_on_first_four_points() {
        let to2 = |b: SampleBatch| b.rows().map(|r| [r[0], r[1]]).collect::<Vec<_>>();
        let q = to2(next_points(&lds(0, 2, false), 0, 4));
        let expect = [[0.0, 0.0], [0.5, 0.5], [0.75, 0.25], [0.25, 0.75]];
        for (p, e) in q.iter().zip(expect) {
            assert!((p[0] - e[0]).abs() < 1e-9 && (p[1] - e[1]).abs() < 1e-9);
        }
        let dq = star_discrepancy(&q);
        assert!((dq - 7.0 / 16.0).abs() < 1e-9, "{dq}");
        // a single random 4-point set can beat 7/16, so compare against many
        let mut dp: Vec<f64> = (0..400)
            .map(|s| star_discrepancy(&to2(next_points(&prng(s, 2), 0, 4))))
            .collect();
        dp.sort_by(f64::total_cmp);
        let worse = dp.iter().filter(|&&d| d > dq).count();
        assert!(dq < dp[200], "median {}", dp[200]);
        assert!(worse > 400 * 2 / 3, "only {worse} of 400 seeds");
    }

    #[test]
    fn equal_specs_give_identical_batches() {
        for spec in [prng(5, 9), lds(5, 9, true), lds(5, 9, false)] {
            assert_eq!(next_points(&spec, 17, 100), next_points(&spec, 17, 100));
        }
        assert_ne!(next_points(&prng(5, 9), 0, 4), next_points(&prng(6, 9), 0, 4));
    }

    #[test]
    fn streams_are_skippable() {
        for spec in [prng(9, 9), prng(9, 3), lds(9, 9, true), lds(9, 7, false)] {
            let whole = next_points(&spec, 3, 50);
            let a = next_points(&spec, 3, 21);
            let b = next_points(&spec, 24, 29);
            let joined: Vec<f64> = a.points.iter().chain(&b.points).copied().collect();
            assert_eq!(whole.points, joined, "{spec:?}");
        }
    }

    #[test]
    fn coordinates_are_uniform_in_open_cube() {
        let n = 100_000;
        for spec in [prng(1, 9), lds(1, 9, true), lds(1, 9, false)] {
            let b = next_points(&spec, 0, n);
            assert!(b.points.iter().all(|&u| u > 0.0 && u < 1.0));
            for d in 0..9 {
                let mean = b.rows().map(|r| r[d]).sum::<f64>() / n as f64;
                assert!((mean - 0.5).abs() < 0.01, "{spec:?} dim {d} mean {mean}");
            }
        }
    }

    #[test]
    fn replicates_are_distinct_and_scrambled() {
        let base = lds(3, 9, false);
        let (r0, r1) = (base.replicate(0), base.replicate(1));
        assert!(r0.scramble());
        assert_ne!(next_points(&r0, 0, 8), next_points(&r1, 0, 8));
        assert!(!prng(3, 9).replicate(0).scramble());
    }

    #[test]
    fn spec_validation_and_serde() {
        assert!(SequenceSpec::new(Engine::PseudoRandom, 0, 0, false).is_err());
        assert!(SequenceSpec::new(Engine::LowDiscrepancy, 0, 17, false).is_err());
        assert!(SequenceSpec::new(Engine::PseudoRandom, 0, 40, false).is_ok());
        assert!(!SequenceSpec::new(Engine::PseudoRandom, 0, 2, true).unwrap().scramble());
        let s = lds(11, 9, true);
        let json = serde_json::to_string(&s).unwrap();
        assert_eq!(json, r#"{"engine":"lds","seed":11,"dimension":9,"scramble":true}"#);
        assert_eq!(serde_json::from_str::<SequenceSpec>(&json).unwrap(), s);
        assert!(serde_json::from_str::<SequenceSpec>(
            r#"{"engine":"lds","seed":1,"dimension":99,"scramble":true}"#
        )
        .is_err());
    }

    #[test]
    fn diagonal_lies_on_simplex_and_is_monotone() {
        let d = cube_to_diagonal(&[0.3, 0.6, 0.9]);
        assert!((d.iter().sum::<f64>() - 1.0).abs() < 1e-15);
        assert!(d.iter().all(|&v| v > 0.0));
        let d2 = cube_to_diagonal(&[0.31, 0.6, 0.9]);
        assert!(d2[0] > d[0]);
        let mid = cube_to_diagonal(&[0.5, 0.5, 0.5]);
        assert!((mid[2] - mid[3]).abs() < 1e-12);
        let z = cube_to_correlations(&[0.0, 0.25, 0.5, 0.75, 1.0, 0.5]);
        assert_eq!(z, [-1.0, -0.5, 0.0, 0.5, 1.0, 0.0]);
    }

    #[test]
    fn diagonal_marginals_match_beta_moments() {
        // each component is Beta(5/2, 15/2): mean 1/4, variance 3/176
        let n = 1_000_000;
        let b = next_points(&prng(77, 3), 0, n);
        let mut s1 = [0.0; 4];
        let mut s2 = [0.0; 4];
        let mut s4 = [0.0; 4];
        for r in b.rows() {
            let d = cube_to_diagonal(&[r[0], r[1], r[2]]);
            for k in 0..4 {
                s1[k] += d[k];
                s2[k] += d[k] * d[k];
                s4[k] += (d[k] - 0.25).powi(4);
            }
        }
        let nf = n as f64;
        let var = 3.0 / 176.0;
        for k in 0..4 {
            let mean = s1[k] / nf;
            let v = s2[k] / nf - mean * mean;
            assert!((mean - 0.25).abs() < 4.0 * (var / nf).sqrt(), "mean {k} {mean}");
            let se_var = ((s4[k] / nf - var * var) / nf).sqrt();
            assert!((v - var).abs() < 4.0 * se_var, "var {k} {v}");
        }
    }

    #[test]
    fn correlations_have_zero_mean() {
        let n = 1_000_000;
        let b = next_points(&prng(78, 9), 0, n);
        let se = (1.0 / 3.0 / n as f64).sqrt();
        for k in 0..6 {
            let mean = b.rows().map(|r| 2.0 * r[3 + k] - 1.0).sum::<f64>() / n as f64;
            assert!(mean.abs() < 3.0 * se, "z{k} mean {mean}");
        }
    }

    #[test]
    fn xi_histogram_matches_jacobian() {
        // the correlation-positivity region does not involve the diagonal, so
        // conditioning leaves the ξ-density equal to J
        let n = 2_000_000;
        let (lo, hi, bins) = (-3.0, 3.0, 41);
        let w = (hi - lo) / bins as f64;
        let mut counts = vec![0u64; bins];
        let mut accepted = 0u64;
        let b = next_points(&prng(79, 9), 0, n);
        for r in b.rows() {
            let z = cube_to_correlations(&[r[3], r[4], r[5], r[6], r[7], r[8]]);
            if !correlation_is_pd(&z) {
                continue;
            }
            accepted += 1;
            let xi = Xi::from_diagonal(&cube_to_diagonal(&[r[0], r[1], r[2]])).unwrap().value();
            if (lo..hi).contains(&xi) {
                counts[((xi - lo) / w) as usize] += 1;
            }
        }
        let acc = accepted as f64;
        assert!((acc / n as f64 - 0.1828).abs() < 0.002);
        for (k, &c) in counts.iter().enumerate() {
            let a = lo + k as f64 * w;
            let p = integrate(jacobian, a, a + w, 1e-12).unwrap().value;
            let sigma = (acc * p * (1.0 - p)).sqrt();
            assert!(
                (c as f64 - acc * p).abs() < 3.0 * sigma.max(1.0),
                "bin {k}: {c} vs {}",
                acc * p
            );
        }
    }
}
