//! Base-2 digital (Sobol') sequence with optional linear-matrix scrambling
//! and digital shift.
//!
//! Direction numbers are the Joe-Kuo `new-joe-kuo-6.21201` set. Points are
//! produced in Gray-code order, which matches the common reference
//! implementations for unscrambled output.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const MAX_DIMENSION: usize = 16;
pub const BITS: usize = 32;

/// Primitive polynomial (with leading and trailing bits) and initial
/// direction integers for each dimension.
const PARAMS: [(u32, &[u32]); MAX_DIMENSION] = [
    (1, &[]),
    (3, &[1]),
    (7, &[1, 3]),
    (11, &[1, 3, 1]),
    (13, &[1, 1, 1]),
    (19, &[1, 1, 3, 3]),
    (25, &[1, 3, 5, 13]),
    (37, &[1, 1, 5, 5, 17]),
    (41, &[1, 1, 5, 5, 5]),
    (47, &[1, 1, 7, 11, 19]),
    (55, &[1, 1, 5, 1, 1]),
    (59, &[1, 1, 1, 3, 11]),
    (61, &[1, 3, 5, 5, 31]),
    (67, &[1, 3, 3, 9, 7, 49]),
    (91, &[1, 1, 1, 15, 21, 21]),
    (97, &[1, 3, 1, 13, 27, 49]),
];

fn direction_numbers(dim: usize) -> [u32; BITS] {
    let mut v = [0u32; BITS];
    if dim == 0 {
        for (k, vk) in v.iter_mut().enumerate() {
            *vk = 1 << (BITS - 1 - k);
        }
        return v;
    }
    let (poly, m) = PARAMS[dim];
    let s = (32 - poly.leading_zeros() - 1) as usize;
    let a = (poly >> 1) & ((1u32 << (s - 1)) - 1);
    for k in 0..s.min(BITS) {
        v[k] = m[k] << (BITS - 1 - k);
    }
    for k in s..BITS {
        let mut x = v[k - s] ^ (v[k - s] >> s);
        for i in 1..s {
            if (a >> (s - 1 - i)) & 1 == 1 {
                x ^= v[k - i];
            }
        }
        v[k] = x;
    }
    v
}

#[derive(Debug, Clone)]
pub struct Sobol {
    v: Vec<[u32; BITS]>,
    shift: Vec<u32>,
}

impl Sobol {
    /// `dimension <= MAX_DIMENSION` is the caller's responsibility.
    pub fn new(dimension: usize, scramble_seed: Option<u64>) -> Self {
        let mut v: Vec<[u32; BITS]> = (0..dimension).map(direction_numbers).collect();
        let mut shift = vec![0u32; dimension];
        if let Some(seed) = scramble_seed {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            for (vd, sd) in v.iter_mut().zip(shift.iter_mut()) {
                // lower-triangular binary matrix, digit 0 = most significant
                let rows: [u32; BITS] = std::array::from_fn(|i| {
                    let above = if i == 0 { 0 } else { !0u32 << (BITS - i) };
                    (rng.random::<u32>() & above) | (1 << (BITS - 1 - i))
                });
                for x in vd.iter_mut() {
                    let mut y = 0u32;
                    for (i, row) in rows.iter().enumerate() {
                        y |= ((row & *x).count_ones() & 1) << (BITS - 1 - i);
                    }
                    *x = y;
                }
                *sd = rng.random::<u32>();
            }
        }
        Self { v, shift }
    }

    pub fn dimension(&self) -> usize {
        self.v.len()
    }

    fn state_at(&self, index: u64, out: &mut [u32]) {
        let gray = index ^ (index >> 1);
        for (d, o) in out.iter_mut().enumerate() {
            let mut x = self.shift[d];
            let mut g = gray;
            let mut k = 0;
            while g != 0 {
                if g & 1 == 1 {
                    x ^= self.v[d][k];
                }
                g >>= 1;
                k += 1;
            }
            *o = x;
        }
    }

    /// Writes points `offset .. offset + n` row-major into `out`, each
    /// coordinate centred in its 2^-32 cell so it lies strictly inside (0, 1).
    pub fn fill(&self, offset: u64, n: usize, out: &mut [f64]) {
        let dim = self.dimension();
        debug_assert_eq!(out.len(), n * dim);
        debug_assert!(offset + n as u64 <= 1u64 << BITS);
        let mut state = vec![0u32; dim];
        self.state_at(offset, &mut state);
        for (row, chunk) in out.chunks_exact_mut(dim).enumerate() {
            if row > 0 {
                let k = (offset + row as u64).trailing_zeros() as usize;
                for (d, s) in state.iter_mut().enumerate() {
                    *s ^= self.v[d][k];
                }
            }
            for (c, &s) in chunk.iter_mut().zip(&state) {
                *c = (s as f64 + 0.5) * (1.0 / 4_294_967_296.0);
            }
        }
    }
}
