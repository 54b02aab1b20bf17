//! Real symmetric 4×4 matrices with packed upper-triangle storage.

use serde::{Deserialize, Serialize};

/// Real symmetric 4×4 matrix. Each off-diagonal entry is stored once, so
/// `get(i, j) == get(j, i)` holds exactly.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sym4 {
    packed: [f64; 10],
}

#[inline]
const fn packed_index(i: usize, j: usize) -> usize {
    let (i, j) = if i <= j { (i, j) } else { (j, i) };
    i * (7 - i) / 2 + j
}

impl Default for Sym4 {
    fn default() -> Self {
        Self::zeros()
    }
}

impl Sym4 {
    pub const fn zeros() -> Self {
        Self { packed: [0.0; 10] }
    }

    pub fn identity() -> Self {
        Self::from_diagonal([1.0; 4])
    }

    pub fn from_diagonal(d: [f64; 4]) -> Self {
        let mut m = Self::zeros();
        for (i, v) in d.into_iter().enumerate() {
            m.set(i, i, v);
        }
        m
    }

    /// Builds from a full array, returning `None` unless it is exactly symmetric.
    pub fn from_array(a: [[f64; 4]; 4]) -> Option<Self> {
        let mut m = Self::zeros();
        for i in 0..4 {
            for j in i..4 {
                if a[i][j] != a[j][i] {
                    return None;
                }
                m.set(i, j, a[i][j]);
            }
        }
        Some(m)
    }

    /// Builds from the upper triangle of `a`; the lower triangle is ignored.
    pub fn from_upper(a: [[f64; 4]; 4]) -> Self {
        let mut m = Self::zeros();
        for i in 0..4 {
            for j in i..4 {
                m.set(i, j, a[i][j]);
            }
        }
        m
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.packed[packed_index(i, j)]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.packed[packed_index(i, j)] = v;
    }

    pub fn to_array(&self) -> [[f64; 4]; 4] {
        let mut a = [[0.0; 4]; 4];
        for (i, row) in a.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = self.get(i, j);
            }
        }
        a
    }

    pub fn diagonal(&self) -> [f64; 4] {
        [self.get(0, 0), self.get(1, 1), self.get(2, 2), self.get(3, 3)]
    }

    pub fn trace(&self) -> f64 {
        self.diagonal().iter().sum()
    }

    /// Congruence `D A D` with `D = diag(d)`.
    pub fn scaled(&self, d: &[f64; 4]) -> Self {
        let mut m = *self;
        for i in 0..4 {
            for j in i..4 {
                m.set(i, j, self.get(i, j) * d[i] * d[j]);
            }
        }
        m
    }

    pub fn determinant(&self) -> f64 {
        let m = self.to_array();
        let s0 = m[0][0] * m[1][1] - m[1][0] * m[0][1];
        let s1 = m[0][0] * m[1][2] - m[1][0] * m[0][2];
        let s2 = m[0][0] * m[1][3] - m[1][0] * m[0][3];
        let s3 = m[0][1] * m[1][2] - m[1][1] * m[0][2];
        let s4 = m[0][1] * m[1][3] - m[1][1] * m[0][3];
        let s5 = m[0][2] * m[1][3] - m[1][2] * m[0][3];
        let c5 = m[2][2] * m[3][3] - m[3][2] * m[2][3];
        let c4 = m[2][1] * m[3][3] - m[3][1] * m[2][3];
        let c3 = m[2][1] * m[3][2] - m[3][1] * m[2][2];
        let c2 = m[2][0] * m[3][3] - m[3][0] * m[2][3];
        let c1 = m[2][0] * m[3][2] - m[3][0] * m[2][2];
        let c0 = m[2][0] * m[3][1] - m[3][0] * m[2][1];
        s0 * c5 - s1 * c4 + s2 * c3 + s3 * c2 - s4 * c1 + s5 * c0
    }

    /// Determinant of the principal submatrix on rows/columns `i < j`.
    pub fn minor2(&self, i: usize, j: usize) -> f64 {
        self.get(i, i) * self.get(j, j) - self.get(i, j) * self.get(i, j)
    }

    /// Determinant of the principal submatrix with row/column `k` deleted.
    pub fn minor3_deleting(&self, k: usize) -> f64 {
        let mut idx = (0..4).filter(|&i| i != k);
        let [a, b, c] = [(); 3].map(|_| idx.next().expect("three indices remain"));
        let (aa, bb, cc) = (self.get(a, a), self.get(b, b), self.get(c, c));
        let (ab, ac, bc) = (self.get(a, b), self.get(a, c), self.get(b, c));
        aa * (bb * cc - bc * bc) - ab * (ab * cc - bc * ac) + ac * (ab * bc - bb * ac)
    }

    /// Leading principal minors of orders 1 through 4.
    pub fn leading_minors(&self) -> [f64; 4] {
        let d1 = self.get(0, 0);
        let d2 = self.minor2(0, 1);
        let d3 = self.minor3_deleting(3);
        [d1, d2, d3, self.determinant()]
    }

    /// Strict positive definiteness by Cholesky factorization with early exit.
    pub fn is_positive_definite(&self) -> bool {
        let mut l = [[0.0f64; 4]; 4];
        for j in 0..4 {
            let mut d = self.get(j, j);
            for k in 0..j {
                d -= l[j][k] * l[j][k];
            }
            if !(d > 0.0) {
                return false;
            }
            let ljj = d.sqrt();
            l[j][j] = ljj;
            for i in (j + 1)..4 {
                let mut s = self.get(i, j);
                for k in 0..j {
                    s -= l[i][k] * l[j][k];
                }
                l[i][j] = s / ljj;
            }
        }
        true
    }

    /// Eigenvalues in ascending order (cyclic Jacobi rotations).
    pub fn eigenvalues(&self) -> [f64; 4] {
        let mut a = self.to_array();
        let scale: f64 = a.iter().flatten().map(|v| v * v).sum::<f64>();
        if scale == 0.0 {
            return [0.0; 4];
        }
        for _sweep in 0..64 {
            let off: f64 = (0..4)
                .flat_map(|i| ((i + 1)..4).map(move |j| (i, j)))
                .map(|(i, j)| a[i][j] * a[i][j])
                .sum();
            if off <= 1e-36 * scale {
                break;
            }
            for p in 0..3 {
                for q in (p + 1)..4 {
                    let apq = a[p][q];
                    if apq == 0.0 {
                        continue;
                    }
                    let theta = (a[q][q] - a[p][p]) / (2.0 * apq);
                    let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                    let c = 1.0 / (t * t + 1.0).sqrt();
                    let s = t * c;
                    for k in 0..4 {
                        let akp = a[k][p];
                        let akq = a[k][q];
                        a[k][p] = c * akp - s * akq;
                        a[k][q] = s * akp + c * akq;
                    }
                    for k in 0..4 {
                        let apk = a[p][k];
                        let aqk = a[q][k];
                        a[p][k] = c * apk - s * aqk;
                        a[q][k] = s * apk + c * aqk;
                    }
                }
            }
        }
        let mut ev = [a[0][0], a[1][1], a[2][2], a[3][3]];
        ev.sort_by(f64::total_cmp);
        ev
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues()[0]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample(seed: u64) -> Sym4 {
        // small LCG keeps these tests free of RNG crates
        let mut s = seed.wrapping_mul(6364136223846793005).wrapping_add(1);
        let mut next = || {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((s >> 11) as f64) / (1u64 << 53) as f64 * 2.0 - 1.0
        };
        let mut m = Sym4::zeros();
        for i in 0..4 {
            for j in i..4 {
                m.set(i, j, next());
            }
        }
        m
    }

    #[test]
    fn packed_storage_mirrors() {
        let mut m = Sym4::zeros();
        m.set(3, 1, 0.25);
        assert_eq!(m.get(1, 3), 0.25);
        let idx: Vec<usize> = (0..4)
            .flat_map(|i| (i..4).map(move |j| packed_index(i, j)))
            .collect();
        assert_eq!(idx, (0..10).collect::<Vec<_>>());
    }

    #[test]
    fn determinant_matches_eigen_product() {
        for seed in 0..200 {
            let m = sample(seed);
            let p: f64 = m.eigenvalues().iter().product();
            assert!((p - m.determinant()).abs() < 1e-12, "seed {seed}");
            let tr: f64 = m.eigenvalues().iter().sum();
            assert!((tr - m.trace()).abs() < 1e-13);
        }
    }

    #[test]
    fn jacobi_agrees_with_nalgebra() {
        for seed in 0..500 {
            let m = sample(seed);
            let a = m.to_array();
            let na = nalgebra::Matrix4::from_fn(|i, j| a[i][j]);
            let mut reference: Vec<f64> = na.symmetric_eigenvalues().iter().copied().collect();
            reference.sort_by(f64::total_cmp);
            for (x, y) in m.eigenvalues().iter().zip(&reference) {
                assert!((x - y).abs() < 1e-10, "seed {seed}: {x} vs {y}");
            }
        }
    }

    #[test]
    fn cholesky_matches_leading_minor_signs() {
        for seed in 0..2000 {
            let mut m = sample(seed);
            for i in 0..4 {
                m.set(i, i, m.get(i, i).abs() + 1.0);
            }
            let sylvester = m.leading_minors().iter().all(|&d| d > 0.0);
            assert_eq!(m.is_positive_definite(), sylvester, "seed {seed}");
        }
    }

    #[test]
    fn minors_of_identity_and_projector() {
        let m = Sym4::identity().scaled(&[0.5; 4]);
        assert_eq!(m.minor2(0, 1), 1.0 / 16.0);
        assert_eq!(m.minor3_deleting(2), 1.0 / 64.0);
        let p = Sym4::from_diagonal([1.0, 0.0, 0.0, 0.0]);
        assert_eq!(p.minor2(0, 1), 0.0);
        assert_eq!(p.minor3_deleting(3), 0.0);
    }
}
