//! Real two-qubit density-matrix algebra.
//!
//! Basis order is |00⟩, |01⟩, |10⟩, |11⟩ and the partial transpose acts on
//! the second qubit. For a real symmetric state this exchanges the (1,4) and
//! (2,3) entries (1-based) and fixes everything else.
//!
//! Indices in this module are 0-based unless a doc comment says otherwise.

mod sym4;

pub use sym4::Sym4;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Off-diagonal index pairs in Bloore order: (1,2),(1,3),(1,4),(2,3),(2,4),(3,4)
/// in 1-based notation.
pub const PAIRS: [(usize, usize); 6] = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)];

/// Position of ρ₁₄ in [`PAIRS`].
const Z14: usize = 2;
/// Position of ρ₂₃ in [`PAIRS`].
const Z23: usize = 3;

/// Tolerance on `trace = 1` and on the simplex sum of Bloore diagonals.
pub const TRACE_TOL: f64 = 1e-12;

/// A real symmetric 4×4 matrix with unit trace and diagonal in `[0, 1]`.
///
/// Positive semidefiniteness is deliberately not an invariant: states built
/// from arbitrary Bloore coordinates must be testable with [`Self::is_psd`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DensityMatrix(Sym4);

impl DensityMatrix {
    pub fn new(entries: [[f64; 4]; 4]) -> Result<Self> {
        let sym = Sym4::from_array(entries)
            .ok_or_else(|| Error::InvalidMatrix("matrix is not symmetric".into()))?;
        Self::from_sym(sym)
    }

    pub fn from_sym(sym: Sym4) -> Result<Self> {
        let tr = sym.trace();
        if !((tr - 1.0).abs() <= TRACE_TOL) {
            return Err(Error::InvalidMatrix(format!("trace {tr} differs from 1")));
        }
        for (i, d) in sym.diagonal().into_iter().enumerate() {
            if !(0.0..=1.0).contains(&d) {
                return Err(Error::InvalidMatrix(format!("diagonal entry {i} = {d} outside [0, 1]")));
            }
        }
        if sym.to_array().iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::InvalidMatrix("non-finite entry".into()));
        }
        Ok(Self(sym))
    }

    /// I/4.
    pub fn maximally_mixed() -> Self {
        Self(Sym4::from_diagonal([0.25; 4]))
    }

    /// `w |Φ⁺⟩⟨Φ⁺| + (1 − w) I/4` with `|Φ⁺⟩ = (|00⟩ + |11⟩)/√2`.
    pub fn werner(w: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&w) {
            return Err(Error::InvalidArgument(format!("Werner weight {w} outside [0, 1]")));
        }
        let mut m = Sym4::from_diagonal([0.25 * (1.0 - w); 4]);
        m.set(0, 0, 0.5 * w + 0.25 * (1.0 - w));
        m.set(3, 3, 0.5 * w + 0.25 * (1.0 - w));
        m.set(0, 3, 0.5 * w);
        Self::from_sym(m)
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.0.get(i, j)
    }

    pub fn as_sym(&self) -> &Sym4 {
        &self.0
    }

    pub fn diagonal(&self) -> [f64; 4] {
        self.0.diagonal()
    }

    /// Bloore coordinates `z_ij = ρ_ij / sqrt(ρ_ii ρ_jj)`.
    pub fn to_bloore(&self) -> Result<BlooreCoords> {
        let diag = self.diagonal();
        if let Some(index) = diag.iter().position(|&d| !(d > 0.0)) {
            return Err(Error::Degenerate { index });
        }
        let mut z = [0.0; 6];
        for (k, &(i, j)) in PAIRS.iter().enumerate() {
            z[k] = self.get(i, j) / (diag[i] * diag[j]).sqrt();
        }
        BlooreCoords::new(diag, z)
    }

    /// Partial transpose on the second qubit (an exact involution).
    pub fn partial_transpose(&self) -> Self {
        let mut m = self.0;
        m.set(0, 3, self.get(1, 2));
        m.set(1, 2, self.get(0, 3));
        Self(m)
    }

    /// 2×2 principal minors on pairs (1,2),(1,3),(1,4),(2,3),(2,4),(3,4).
    pub fn principal_minors_2x2(&self) -> [f64; 6] {
        PAIRS.map(|(i, j)| self.0.minor2(i, j))
    }

    /// 3×3 principal minors obtained by deleting index 1, 2, 3, 4 in turn.
    pub fn principal_minors_3x3(&self) -> [f64; 4] {
        [0, 1, 2, 3].map(|k| self.0.minor3_deleting(k))
    }

    pub fn eigenvalues(&self) -> [f64; 4] {
        self.0.eigenvalues()
    }

    /// Smallest eigenvalue is at least `-tol`.
    pub fn is_psd(&self, tol: f64) -> bool {
        self.0.min_eigenvalue() >= -tol
    }

    fn require_psd(&self, tol: f64) -> Result<()> {
        let min_eigenvalue = self.0.min_eigenvalue();
        if min_eigenvalue >= -tol {
            Ok(())
        } else {
            Err(Error::NotPsd { min_eigenvalue })
        }
    }

    /// Peres-Horodecki test through the sign of `det(PT(ρ))`.
    ///
    /// For a two-qubit state at most one eigenvalue of the partial transpose
    /// can be negative, so the determinant sign decides positivity of the
    /// partial transpose without an eigensolver.
    pub fn is_separable(&self, tol: f64) -> Result<bool> {
        self.require_psd(tol)?;
        Ok(self.partial_transpose().0.determinant() >= -tol)
    }

    /// Separability under every global unitary, using the two-qubit spectral
    /// criterion `λ₁ ≤ λ₃ + 2 sqrt(λ₂ λ₄)` (eigenvalues in descending order).
    ///
    /// The criterion comes from the absolute-separability literature
    /// (Verstraete, Audenaert and De Moor) rather than from the DESF analysis.
    pub fn is_absolutely_separable(&self, tol: f64) -> Result<bool> {
        self.require_psd(tol)?;
        Ok(absolutely_separable_spectrum(self.eigenvalues()))
    }
}

/// Spectral absolute-separability test on ascending eigenvalues.
pub fn absolutely_separable_spectrum(ascending: [f64; 4]) -> bool {
    let [l4, l3, l2, l1] = ascending.map(|v| v.max(0.0));
    l1 - l3 - 2.0 * (l2 * l4).sqrt() <= 0.0
}

/// Bloore (correlation) coordinates: a diagonal on the 3-simplex plus six
/// correlations in `[-1, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlooreCoords {
    diag: [f64; 4],
    z: [f64; 6],
}

impl BlooreCoords {
    pub fn new(diag: [f64; 4], z: [f64; 6]) -> Result<Self> {
        if diag.iter().any(|&d| !(d >= 0.0)) {
            return Err(Error::InvalidCoords(format!("negative or NaN diagonal {diag:?}")));
        }
        let sum: f64 = diag.iter().sum();
        if !((sum - 1.0).abs() <= TRACE_TOL) {
            return Err(Error::InvalidCoords(format!("diagonal sums to {sum}")));
        }
        if z.iter().any(|v| !(v.abs() <= 1.0)) {
            return Err(Error::InvalidCoords(format!("correlation outside [-1, 1] in {z:?}")));
        }
        Ok(Self { diag, z })
    }

    pub(crate) fn new_unchecked(diag: [f64; 4], z: [f64; 6]) -> Self {
        debug_assert!(Self::new(diag, z).is_ok());
        Self { diag, z }
    }

    pub fn diag(&self) -> &[f64; 4] {
        &self.diag
    }

    pub fn z(&self) -> &[f64; 6] {
        &self.z
    }

    /// Unit-diagonal correlation matrix `Z`.
    pub fn correlation_matrix(&self) -> Sym4 {
        correlation_matrix(&self.z)
    }

    pub fn xi(&self) -> Result<Xi> {
        Xi::from_diagonal(&self.diag)
    }

    /// `ρ_ii = diag_i`, `ρ_ij = z_ij sqrt(diag_i diag_j)`. Positivity of the
    /// result is not checked.
    pub fn to_density_matrix(&self) -> DensityMatrix {
        let s = self.diag.map(f64::sqrt);
        DensityMatrix(self.correlation_matrix().scaled(&s).with_diagonal(self.diag))
    }

    /// Same coordinates after the basis relabelling 1↔2, 3↔4.
    pub fn relabeled(&self) -> Self {
        let [d1, d2, d3, d4] = self.diag;
        let [z12, z13, z14, z23, z24, z34] = self.z;
        // new (1,2)=old(2,1), (1,3)=old(2,4), (1,4)=old(2,3), (2,3)=old(1,4),
        // (2,4)=old(1,3), (3,4)=old(4,3)
        Self {
            diag: [d2, d1, d4, d3],
            z: [z12, z24, z23, z14, z13, z34],
        }
    }
}

impl Sym4 {
    fn with_diagonal(mut self, d: [f64; 4]) -> Self {
        for (i, v) in d.into_iter().enumerate() {
            self.set(i, i, v);
        }
        self
    }
}

pub fn correlation_matrix(z: &[f64; 6]) -> Sym4 {
    let mut m = Sym4::identity();
    for (k, &(i, j)) in PAIRS.iter().enumerate() {
        m.set(i, j, z[k]);
    }
    m
}

/// `D^{-1/2} PT(ρ) D^{-1/2}` written in Bloore coordinates, where
/// `D = diag(ρ)`. Only `ξ` enters: the (1,4) slot carries `z₂₃ e^{-ξ}` and the
/// (2,3) slot carries `z₁₄ e^{ξ}`.
pub fn pt_correlation(z: &[f64; 6], xi: f64) -> Sym4 {
    let e = xi.exp();
    let mut m = correlation_matrix(z);
    m.set(0, 3, z[Z23] / e);
    m.set(1, 2, z[Z14] * e);
    m
}

/// Correlation matrix is positive definite (boundary has measure zero).
#[inline]
pub fn correlation_is_pd(z: &[f64; 6]) -> bool {
    correlation_matrix(z).is_positive_definite()
}

/// Separability of a PSD state given its correlations and `ξ`.
#[inline]
pub fn separable_from_correlations(z: &[f64; 6], xi: f64) -> bool {
    pt_correlation(z, xi).determinant() >= 0.0
}

/// The diagonal log-ratio `ξ = ½ log(ρ₁₁ρ₄₄ / (ρ₂₂ρ₃₃))`. Always finite.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct Xi(f64);

impl Xi {
    pub fn from_diagonal(d: &[f64; 4]) -> Result<Self> {
        if let Some(index) = d.iter().position(|&v| !(v > 0.0)) {
            return Err(Error::Degenerate { index });
        }
        let v = 0.5 * ((d[0] * d[3]) / (d[1] * d[2])).ln();
        if v.is_finite() {
            Ok(Self(v))
        } else {
            Err(Error::InvalidCoords(format!("ξ not finite for diagonal {d:?}")))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

/// Representative diagonal `(a, b, b, a)` with `a/b = e^ξ` on the simplex.
pub fn representative_diagonal(xi: f64) -> [f64; 4] {
    let e = xi.exp();
    let a = 0.5 * e / (1.0 + e);
    let b = 0.5 / (1.0 + e);
    [a, b, b, a]
}

#[cfg(test)]
mod tests {
    use super::*;

    const TOL: f64 = crate::DEFAULT_TOL;

    fn coords(diag: [f64; 4], z: [f64; 6]) -> BlooreCoords {
        BlooreCoords::new(diag, z).unwrap()
    }

    #[test]
    fn bloore_of_maximally_mixed() {
        let rho = coords([0.25; 4], [0.0; 6]).to_density_matrix();
        assert_eq!(rho, DensityMatrix::maximally_mixed());
        let c = DensityMatrix::maximally_mixed().to_bloore().unwrap();
        assert_eq!(c.diag(), &[0.25; 4]);
        assert_eq!(c.z(), &[0.0; 6]);
    }

    #[test]
    fn bloore_entry_arithmetic() {
        let rho = coords([0.5, 0.25, 0.125, 0.125], [1.0, 0.0, 0.0, 0.0, 0.0, 0.0]).to_density_matrix();
        assert!((rho.get(0, 1) - 0.125f64.sqrt()).abs() < 1e-15);
        assert!((rho.get(0, 1) - 0.353553390593).abs() < 1e-12);
        assert_eq!(rho.get(1, 0), rho.get(0, 1));
        assert!((rho.as_sym().trace() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn to_bloore_arithmetic_and_degenerate() {
        let mut m = [[0.0; 4]; 4];
        for (i, d) in [0.4, 0.1, 0.1, 0.4].into_iter().enumerate() {
            m[i][i] = d;
        }
        m[0][3] = 0.1;
        m[3][0] = 0.1;
        let c = DensityMatrix::new(m).unwrap().to_bloore().unwrap();
        assert!((c.z()[2] - 0.25).abs() < 1e-15);

        let mut d = [[0.0; 4]; 4];
        d[1][1] = 0.5;
        d[2][2] = 0.5;
        assert_eq!(DensityMatrix::new(d).unwrap().to_bloore(), Err(Error::Degenerate { index: 0 }));
    }

    #[test]
    fn rejects_invalid_inputs() {
        assert!(BlooreCoords::new([0.5, 0.5, 0.5, -0.5], [0.0; 6]).is_err());
        assert!(BlooreCoords::new([0.3, 0.3, 0.3, 0.3], [0.0; 6]).is_err());
        assert!(BlooreCoords::new([0.25; 4], [1.1, 0.0, 0.0, 0.0, 0.0, 0.0]).is_err());
        let mut m = DensityMatrix::maximally_mixed().as_sym().to_array();
        m[0][1] = 0.1;
        assert!(DensityMatrix::new(m).is_err());
        m[1][0] = 0.1;
        m[0][0] = 0.3;
        assert!(DensityMatrix::new(m).is_err());
    }

    #[test]
    fn xi_values() {
        assert_eq!(Xi::from_diagonal(&[0.25; 4]).unwrap().value(), 0.0);
        let xi = Xi::from_diagonal(&[0.4, 0.1, 0.1, 0.4]).unwrap().value();
        assert!((xi - 4f64.ln()).abs() < 1e-15);
        assert!((xi - 1.386294).abs() < 1e-6);
        let c = coords([0.1, 0.2, 0.3, 0.4], [0.0; 6]);
        let a = c.xi().unwrap().value();
        let b = c.relabeled().xi().unwrap().value();
        assert!((a + b).abs() < 1e-15);
        assert!(Xi::from_diagonal(&[0.5, 0.5, 0.0, 0.0]).is_err());
    }

    #[test]
    fn partial_transpose_swaps_anti_diagonal_pair() {
        let diag = DensityMatrix::new([
            [0.1, 0.0, 0.0, 0.0],
            [0.0, 0.2, 0.0, 0.0],
            [0.0, 0.0, 0.3, 0.0],
            [0.0, 0.0, 0.0, 0.4],
        ])
        .unwrap();
        assert_eq!(diag.partial_transpose(), diag);

        let mut m = DensityMatrix::maximally_mixed().as_sym().to_array();
        m[0][3] = 0.1;
        m[3][0] = 0.1;
        m[1][2] = 0.05;
        m[2][1] = 0.05;
        let rho = DensityMatrix::new(m).unwrap();
        let pt = rho.partial_transpose();
        assert_eq!(pt.get(0, 3), 0.05);
        assert_eq!(pt.get(1, 2), 0.1);
        assert_eq!(pt.partial_transpose(), rho);
    }

    #[test]
    fn werner_threshold_from_eigen_oracle() {
        for &(w, sep) in &[(0.2, true), (0.3, true), (0.34, false), (0.5, false)] {
            let rho = DensityMatrix::werner(w).unwrap();
            let min_pt = rho.partial_transpose().eigenvalues()[0];
            assert_eq!(min_pt >= 0.0, sep, "w = {w}");
            assert!((min_pt - (1.0 - 3.0 * w) / 4.0).abs() < 1e-14);
            assert_eq!(rho.is_separable(TOL).unwrap(), sep);
        }
    }

    #[test]
    fn minors_of_simple_states() {
        let mm = DensityMatrix::maximally_mixed();
        assert_eq!(mm.principal_minors_2x2(), [1.0 / 16.0; 6]);
        assert_eq!(mm.principal_minors_3x3(), [1.0 / 64.0; 4]);
        let p = DensityMatrix::new([
            [1.0, 0.0, 0.0, 0.0],
            [0.0; 4],
            [0.0; 4],
            [0.0; 4],
        ])
        .unwrap();
        assert_eq!(p.principal_minors_2x2(), [0.0; 6]);
        let h = DensityMatrix::new([
            [0.5, 0.0, 0.0, 0.0],
            [0.0, 0.5, 0.0, 0.0],
            [0.0; 4],
            [0.0; 4],
        ])
        .unwrap();
        assert_eq!(h.principal_minors_3x3(), [0.0; 4]);
    }

    #[test]
    fn only_anti_diagonal_minors_change_under_pt() {
        let rho = coords([0.1, 0.2, 0.3, 0.4], [0.3, -0.2, 0.5, 0.1, 0.4, -0.3]).to_density_matrix();
        let a = rho.principal_minors_2x2();
        let b = rho.partial_transpose().principal_minors_2x2();
        for k in 0..6 {
            if k == Z14 || k == Z23 {
                assert_ne!(a[k], b[k]);
            } else {
                assert_eq!(a[k], b[k]);
            }
        }
    }

    #[test]
    fn three_by_three_minor_uses_three_correlations_with_common_index() {
        let base = [0.3, -0.2, 0.5, 0.1, 0.4, -0.3];
        let diag = [0.1, 0.2, 0.3, 0.4];
        let minors = |z: [f64; 6]| coords(diag, z).to_density_matrix().partial_transpose().principal_minors_3x3();
        let reference = minors(base);
        for k in 0..4 {
            let mut used = Vec::new();
            for p in 0..6 {
                let mut z = base;
                z[p] += 0.05;
                if minors(z)[k] != reference[k] {
                    used.push(p);
                }
            }
            assert_eq!(used.len(), 3, "delete {k}: {used:?}");
            let common = (0..4).find(|&i| used.iter().all(|&p| PAIRS[p].0 == i || PAIRS[p].1 == i));
            assert!(common.is_some(), "delete {k}: {used:?}");
        }
    }

    #[test]
    fn psd_examples() {
        assert!(DensityMatrix::maximally_mixed().is_psd(TOL));
        let bad = coords([0.25; 4], [1.0, 1.0, 0.0, -1.0, 0.0, 0.0]).to_density_matrix();
        assert!(!bad.is_psd(TOL));
        assert!(matches!(bad.is_separable(TOL), Err(Error::NotPsd { .. })));
    }

    #[test]
    fn absolute_separability_examples() {
        assert!(DensityMatrix::maximally_mixed().is_absolutely_separable(TOL).unwrap());
        let pure = DensityMatrix::new([[1.0, 0.0, 0.0, 0.0], [0.0; 4], [0.0; 4], [0.0; 4]]).unwrap();
        assert!(!pure.is_absolutely_separable(TOL).unwrap());
    }

    #[test]
    fn fast_paths_agree_with_matrix_route() {
        let c = coords([0.1, 0.2, 0.3, 0.4], [0.3, -0.2, 0.5, 0.1, 0.4, -0.3]);
        let rho = c.to_density_matrix();
        let xi = c.xi().unwrap().value();
        let prod: f64 = c.diag().iter().product();
        let lhs = pt_correlation(c.z(), xi).determinant() * prod;
        let rhs = rho.partial_transpose().as_sym().determinant();
        assert!((lhs - rhs).abs() < 1e-15);
        assert_eq!(correlation_is_pd(c.z()), rho.is_psd(0.0));
    }

    #[test]
    fn representative_diagonal_hits_xi() {
        for xi in [-3.0, -0.5, 0.0, 0.7, 4.0] {
            let d = representative_diagonal(xi);
            assert!((d.iter().sum::<f64>() - 1.0).abs() < 1e-15);
            assert!((Xi::from_diagonal(&d).unwrap().value() - xi).abs() < 1e-13);
        }
    }
}
