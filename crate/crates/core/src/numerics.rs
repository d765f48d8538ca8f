//! Dense complex-Hermitian linear algebra shared by every solver.
//!
//! Matrices are small (a handful of antennas per base station), so everything
//! is built on `nalgebra`'s dynamically sized matrices. Rates are always
//! returned in bits, i.e. every `log det` is taken base 2.

use std::f64::consts::{LN_2, PI};

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{DwzError, Result};

pub type CMatrix = DMatrix<Complex64>;

/// Square complex matrix kept equal to its conjugate transpose.
///
/// Construction symmetrizes the input as `(M + M†)/2`, which absorbs the
/// round-off that accumulates across iterative updates.
#[derive(Clone, Debug, PartialEq)]
pub struct HermitianMatrix(CMatrix);

impl HermitianMatrix {
    pub fn new(m: CMatrix) -> Result<Self> {
        if !m.is_square() {
            return Err(DwzError::DimensionMismatch(format!(
                "Hermitian matrix must be square, got {}x{}",
                m.nrows(),
                m.ncols()
            )));
        }
        Ok(Self::symmetrized(m))
    }

    /// Symmetrizes a matrix already known to be square.
    pub(crate) fn symmetrized(m: CMatrix) -> Self {
        debug_assert!(m.is_square());
        let adj = m.adjoint();
        Self((m + adj).scale(0.5))
    }

    pub fn zeros(dim: usize) -> Self {
        Self(CMatrix::zeros(dim, dim))
    }

    pub fn identity(dim: usize) -> Self {
        Self(CMatrix::identity(dim, dim))
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        let d = DVector::from_iterator(diag.len(), diag.iter().map(|&x| Complex64::new(x, 0.0)));
        Self(CMatrix::from_diagonal(&d))
    }

    /// Builds `U diag(values) U†`.
    pub fn from_eigen(basis: &CMatrix, values: &[f64]) -> Self {
        let mut scaled = basis.clone();
        for (j, &v) in values.iter().enumerate() {
            scaled.column_mut(j).scale_mut(v);
        }
        Self::symmetrized(scaled * basis.adjoint())
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn as_matrix(&self) -> &CMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> CMatrix {
        self.0
    }

    pub fn trace(&self) -> f64 {
        self.0.diagonal().iter().map(|z| z.re).sum()
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self(self.0.scale(factor))
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.0.norm()
    }

    pub fn frobenius_distance(&self, other: &HermitianMatrix) -> f64 {
        (&self.0 - &other.0).norm()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|z| z.re == 0.0 && z.im == 0.0)
    }

    /// Smallest eigenvalue; `0.0` for an empty matrix.
    pub fn min_eigenvalue(&self) -> Result<f64> {
        Ok(hermitian_eig(self)?
            .eigenvalues
            .last()
            .copied()
            .unwrap_or(0.0))
    }

    /// Entry-wise Frobenius inner product `Re tr(A† B)`.
    pub fn inner(&self, other: &HermitianMatrix) -> f64 {
        self.0
            .iter()
            .zip(other.0.iter())
            .map(|(a, b)| (a.conj() * b).re)
            .sum()
    }

    pub fn add(&self, other: &HermitianMatrix) -> HermitianMatrix {
        Self(&self.0 + &other.0)
    }

    pub fn sub(&self, other: &HermitianMatrix) -> HermitianMatrix {
        Self(&self.0 - &other.0)
    }
}

impl Serialize for HermitianMatrix {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        matrix_serde::serialize(&self.0, s)
    }
}

impl<'de> Deserialize<'de> for HermitianMatrix {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let m = matrix_serde::deserialize(d)?;
        HermitianMatrix::new(m).map_err(serde::de::Error::custom)
    }
}

/// JSON layout for complex matrices: a list of rows, each entry an `[re, im]` pair.
pub mod matrix_serde {
    use super::CMatrix;
    use num_complex::Complex64;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(m: &CMatrix, s: S) -> Result<S::Ok, S::Error> {
        let rows: Vec<Vec<[f64; 2]>> = (0..m.nrows())
            .map(|i| {
                (0..m.ncols())
                    .map(|j| [m[(i, j)].re, m[(i, j)].im])
                    .collect()
            })
            .collect();
        rows.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<CMatrix, D::Error> {
        let rows: Vec<Vec<[f64; 2]>> = Vec::deserialize(d)?;
        let nrows = rows.len();
        let ncols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != ncols) {
            return Err(serde::de::Error::custom("ragged matrix rows"));
        }
        Ok(CMatrix::from_fn(nrows, ncols, |i, j| {
            Complex64::new(rows[i][j][0], rows[i][j][1])
        }))
    }

    pub mod vec {
        use super::CMatrix;
        use serde::{Deserialize, Deserializer, Serialize, Serializer};

        #[derive(Serialize, Deserialize)]
        struct Wrapped(#[serde(with = "super")] CMatrix);

        pub fn serialize<S: Serializer>(ms: &[CMatrix], s: S) -> Result<S::Ok, S::Error> {
            let wrapped: Vec<Wrapped> = ms.iter().cloned().map(Wrapped).collect();
            wrapped.serialize(s)
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<CMatrix>, D::Error> {
            let wrapped: Vec<Wrapped> = Vec::deserialize(d)?;
            Ok(wrapped.into_iter().map(|w| w.0).collect())
        }
    }
}

/// Unitary basis (columns are eigenvectors) and real eigenvalues sorted descending.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EigenDecomposition {
    #[serde(with = "matrix_serde")]
    pub basis: CMatrix,
    pub eigenvalues: Vec<f64>,
}

impl EigenDecomposition {
    pub fn reconstruct(&self) -> HermitianMatrix {
        HermitianMatrix::from_eigen(&self.basis, &self.eigenvalues)
    }
}

/// Numerical knobs shared by the iterative solvers.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ToleranceConfig {
    /// Width at which the multiplier bisection stops.
    pub bisection_tol: f64,
    pub psd_floor: f64,
    /// Inner-loop stopping threshold on the largest block change.
    pub convergence_tol: f64,
    pub max_iters: usize,
}

impl Default for ToleranceConfig {
    fn default() -> Self {
        Self {
            bisection_tol: 1e-8,
            psd_floor: 1e-12,
            convergence_tol: 1e-7,
            max_iters: 10_000,
        }
    }
}

impl ToleranceConfig {
    pub fn validate(&self) -> Result<()> {
        let ok = self.bisection_tol > 0.0
            && self.psd_floor > 0.0
            && self.convergence_tol > 0.0
            && self.max_iters > 0;
        if ok {
            Ok(())
        } else {
            Err(DwzError::InvalidScenario(format!(
                "tolerances must be strictly positive: {self:?}"
            )))
        }
    }
}

const EIG_EPS: f64 = 1e-15;
const EIG_MAX_SWEEPS: usize = 10_000;

pub fn hermitian_eig(m: &HermitianMatrix) -> Result<EigenDecomposition> {
    let n = m.dim();
    if n == 0 {
        return Ok(EigenDecomposition {
            basis: CMatrix::zeros(0, 0),
            eigenvalues: Vec::new(),
        });
    }
    let eig = SymmetricEigen::try_new(m.0.clone(), EIG_EPS, EIG_MAX_SWEEPS).ok_or_else(|| {
        DwzError::NumericalFailure("Hermitian eigensolver did not converge".into())
    })?;
    if eig.eigenvalues.iter().any(|v| !v.is_finite()) {
        return Err(DwzError::NumericalFailure("non-finite eigenvalue".into()));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let basis = CMatrix::from_fn(n, n, |i, j| eig.eigenvectors[(i, order[j])]);
    let eigenvalues = order.iter().map(|&j| eig.eigenvalues[j]).collect();
    Ok(EigenDecomposition { basis, eigenvalues })
}

/// Frobenius-nearest positive semidefinite matrix: negative eigenvalues clipped to zero.
pub fn project_psd(m: &HermitianMatrix) -> Result<HermitianMatrix> {
    let eig = hermitian_eig(m)?;
    if eig.eigenvalues.iter().all(|&v| v >= 0.0) {
        return Ok(m.clone());
    }
    let clipped: Vec<f64> = eig.eigenvalues.iter().map(|&v| v.max(0.0)).collect();
    Ok(HermitianMatrix::from_eigen(&eig.basis, &clipped))
}

/// `log2 det(I + A B)` for `A` of shape m×k and `B` of shape k×m.
///
/// Evaluated from the diagonal of an LU factorization. The determinant of
/// `I + A B` must be real and positive, which always holds for PSD `A`, `B`.
pub fn logdet_i_plus(a: &CMatrix, b: &CMatrix) -> Result<f64> {
    if a.ncols() != b.nrows() || a.nrows() != b.ncols() {
        return Err(DwzError::DimensionMismatch(format!(
            "logdet_i_plus: {}x{} times {}x{}",
            a.nrows(),
            a.ncols(),
            b.nrows(),
            b.ncols()
        )));
    }
    let m = a.nrows();
    let prod = CMatrix::identity(m, m) + a * b;
    logdet(prod)
}

/// `log2 det(I + A B)` for PSD `A` and `B`, evaluated as
/// `log2 det(I + W† B W)` with `A = W W†`.
///
/// The symmetric form is Hermitian positive definite, so it stays accurate
/// when `I + A B` is badly conditioned. Eigenvalues of `A` down to
/// `-1e-12 ‖A‖` are treated as zero.
pub fn logdet_i_plus_psd(a: &HermitianMatrix, b: &HermitianMatrix) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(DwzError::DimensionMismatch(format!(
            "logdet_i_plus_psd: {0}x{0} and {1}x{1}",
            a.dim(),
            b.dim()
        )));
    }
    if a.dim() == 0 || a.is_zero() {
        return Ok(0.0);
    }
    let eig = hermitian_eig(a)?;
    // negative parts that move the result by less than 1e-12 are rounding
    let scale = eig.eigenvalues.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let floor = 1e-12 * scale.max(1.0 / b.as_matrix().norm().max(f64::MIN_POSITIVE));
    let mut w = eig.basis.clone();
    for (j, &d) in eig.eigenvalues.iter().enumerate() {
        if d < -floor {
            return Err(DwzError::NumericalFailure(format!(
                "log det factor has eigenvalue {d:.3e}"
            )));
        }
        let root = d.max(0.0).sqrt();
        w.column_mut(j).scale_mut(root);
    }
    let m = a.dim();
    let s = CMatrix::identity(m, m) + w.adjoint() * b.as_matrix() * &w;
    let s = HermitianMatrix::symmetrized(s).into_matrix();
    let chol = s
        .cholesky()
        .ok_or_else(|| DwzError::NumericalFailure("I + W† B W is not positive definite".into()))?;
    let out = 2.0 * chol.l().diagonal().iter().map(|z| z.re.ln()).sum::<f64>() / LN_2;
    if !out.is_finite() {
        return Err(DwzError::NumericalFailure("non-finite log det".into()));
    }
    Ok(out)
}

/// `log2 det(M)` for a square matrix whose determinant is real and positive.
pub fn logdet(m: CMatrix) -> Result<f64> {
    if m.nrows() == 0 {
        return Ok(0.0);
    }
    let lu = m.lu();
    let sign = lu.p().determinant::<f64>();
    let u = lu.u();
    let mut log_abs = 0.0;
    let mut phase = if sign < 0.0 { PI } else { 0.0 };
    for z in u.diagonal().iter() {
        let r = z.norm();
        if r == 0.0 || !r.is_finite() {
            return Err(DwzError::NumericalFailure(format!(
                "singular or non-finite factor in log det ({z})"
            )));
        }
        log_abs += r.ln();
        phase += z.arg();
    }
    let phase = phase.rem_euclid(2.0 * PI);
    let off = phase.min(2.0 * PI - phase);
    if off > 1e-6 {
        return Err(DwzError::NumericalFailure(format!(
            "determinant is not positive real (phase {off:.3e} rad)"
        )));
    }
    let out = log_abs / LN_2;
    if !out.is_finite() {
        return Err(DwzError::NumericalFailure("non-finite log det".into()));
    }
    Ok(out)
}

/// Inverse of a Hermitian positive definite matrix via Cholesky.
pub fn hpd_inverse(m: &CMatrix) -> Result<CMatrix> {
    let chol = m
        .clone()
        .cholesky()
        .ok_or_else(|| DwzError::NumericalFailure("matrix is not positive definite".into()))?;
    let inv = chol.inverse();
    let adj = inv.adjoint();
    Ok((inv + adj).scale(0.5))
}

/// Root of a non-increasing function by midpoint bisection.
///
/// Requires `f(lo) >= 0 >= f(hi)`. Returns the midpoint of the final bracket,
/// whose width is at most `tol`.
pub fn bisect_decreasing<F>(mut f: F, lo: f64, hi: f64, tol: f64) -> Result<f64>
where
    F: FnMut(f64) -> f64,
{
    if !(lo <= hi) || !(tol > 0.0) {
        return Err(DwzError::BracketError { lo, hi });
    }
    let (f_lo, f_hi) = (f(lo), f(hi));
    if !(f_lo >= 0.0 && f_hi <= 0.0) {
        return Err(DwzError::BracketError { lo, hi });
    }
    let (mut lo, mut hi) = (lo, hi);
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let v = f(mid);
        if v == 0.0 {
            return Ok(mid);
        }
        if v > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Block-diagonal matrix built from square blocks.
pub fn block_diag(blocks: &[&CMatrix]) -> CMatrix {
    let dim: usize = blocks.iter().map(|b| b.nrows()).sum();
    let mut out = CMatrix::zeros(dim, dim);
    let mut off = 0;
    for b in blocks {
        let k = b.nrows();
        out.view_mut((off, off), (k, k)).copy_from(b);
        off += k;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn herm(dim: usize, seed: u64) -> HermitianMatrix {
        // deterministic pseudo-random entries
        let mut state = seed
            .wrapping_mul(6364136223846793005)
            .wrapping_add(1442695040888963407);
        let mut next = || {
            state = state
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            ((state >> 11) as f64 / (1u64 << 53) as f64) * 2.0 - 1.0
        };
        let m = CMatrix::from_fn(dim, dim, |_, _| c(next(), next()));
        HermitianMatrix::new(m).unwrap()
    }

    #[test]
    fn construction_symmetrizes() {
        let m =
            CMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(2.0, 1.0), c(0.0, 0.0), c(3.0, 0.0)]);
        let h = HermitianMatrix::new(m).unwrap();
        let a = h.as_matrix();
        assert!((a[(0, 1)] - a[(1, 0)].conj()).norm() < 1e-15);
        assert_eq!(a[(0, 1)], c(1.0, 0.5));
    }

    #[test]
    fn non_square_rejected() {
        assert!(HermitianMatrix::new(CMatrix::zeros(2, 3)).is_err());
    }

    #[test]
    fn eig_identity() {
        let e = hermitian_eig(&HermitianMatrix::identity(3)).unwrap();
        for v in &e.eigenvalues {
            assert!((v - 1.0).abs() < 1e-14);
        }
        let gram = e.basis.adjoint() * &e.basis;
        assert!((gram - CMatrix::identity(3, 3)).norm() < 1e-12);
    }

    #[test]
    fn eig_diagonal_sorted_descending() {
        let e = hermitian_eig(&HermitianMatrix::from_real_diagonal(&[1.0, 4.0])).unwrap();
        assert!((e.eigenvalues[0] - 4.0).abs() < 1e-14);
        assert!((e.eigenvalues[1] - 1.0).abs() < 1e-14);
        // leading eigenvector is the second canonical direction (up to phase)
        assert!((e.basis[(1, 0)].norm() - 1.0).abs() < 1e-12);
        assert!(e.basis[(0, 0)].norm() < 1e-12);
    }

    #[test]
    fn eig_2x2_matches_quadratic_formula() {
        for seed in 0..20 {
            let h = herm(2, seed);
            let m = h.as_matrix();
            let (a, d) = (m[(0, 0)].re, m[(1, 1)].re);
            let b2 = m[(0, 1)].norm_sqr();
            let disc = ((a - d) * (a - d) / 4.0 + b2).sqrt();
            let mean = (a + d) / 2.0;
            let e = hermitian_eig(&h).unwrap();
            assert!((e.eigenvalues[0] - (mean + disc)).abs() < 1e-12);
            assert!((e.eigenvalues[1] - (mean - disc)).abs() < 1e-12);
        }
    }

    #[test]
    fn eig_reconstructs_random_4x4() {
        for seed in 0..20 {
            let h = herm(4, seed + 100);
            let e = hermitian_eig(&h).unwrap();
            let rel = e.reconstruct().frobenius_distance(&h) / h.frobenius_norm();
            assert!(rel < 1e-8, "reconstruction error {rel}");
            let gram = e.basis.adjoint() * &e.basis;
            assert!((gram - CMatrix::identity(4, 4)).norm() < 1e-8);
            let sum: f64 = e.eigenvalues.iter().sum();
            assert!((sum - h.trace()).abs() <= 1e-8 * h.trace().abs().max(1.0));
            assert!(e.eigenvalues.windows(2).all(|w| w[0] >= w[1]));
        }
    }

    #[test]
    fn projection_clips_negative_eigenvalues() {
        let p = project_psd(&HermitianMatrix::from_real_diagonal(&[2.0, -1.0])).unwrap();
        let expected = HermitianMatrix::from_real_diagonal(&[2.0, 0.0]);
        assert!(p.frobenius_distance(&expected) < 1e-14);
    }

    #[test]
    fn projection_fixes_psd_input() {
        let h = herm(3, 7);
        let psd = HermitianMatrix::symmetrized(h.as_matrix() * h.as_matrix().adjoint());
        let p = project_psd(&psd).unwrap();
        assert!(p.frobenius_distance(&psd) < 1e-14);
    }

    #[test]
    fn projection_beats_grid_of_psd_candidates() {
        // Candidates P = U diag(x, y, 0) U† + t * (u3 u3†)-free slice built from
        // a fixed unitary unrelated to the target's eigenbasis.
        for seed in 0..5 {
            let target = herm(3, 40 + seed);
            let p = project_psd(&target).unwrap();
            let d_proj = p.frobenius_distance(&target);
            let u = hermitian_eig(&herm(3, 900 + seed)).unwrap().basis;
            let own = hermitian_eig(&target).unwrap().basis;
            for basis in [&u, &own] {
                for i in 0..=60 {
                    for j in 0..=60 {
                        let x = i as f64 * 0.05;
                        let y = j as f64 * 0.05;
                        let cand = HermitianMatrix::from_eigen(basis, &[x, y, 0.0]);
                        assert!(cand.frobenius_distance(&target) >= d_proj - 1e-12);
                    }
                }
            }
        }
    }

    #[test]
    fn projection_idempotent() {
        for seed in 0..10 {
            let p1 = project_psd(&herm(3, seed)).unwrap();
            let p2 = project_psd(&p1).unwrap();
            assert!(p1.frobenius_distance(&p2) < 1e-12);
            assert!(p1.min_eigenvalue().unwrap() >= -1e-12);
        }
    }

    #[test]
    fn logdet_examples() {
        let z = CMatrix::zeros(2, 2);
        let b = HermitianMatrix::from_real_diagonal(&[3.0, 7.0]).into_matrix();
        assert_eq!(logdet_i_plus(&z, &b).unwrap(), 0.0);

        let a = CMatrix::from_element(1, 1, c(1.0, 0.0));
        let s = CMatrix::from_element(1, 1, c(1.5, 0.0));
        assert!((logdet_i_plus(&a, &s).unwrap() - 2.5f64.log2()).abs() < 1e-14);

        let id = CMatrix::identity(2, 2);
        assert!((logdet_i_plus(&id, &b).unwrap() - 5.0).abs() < 1e-13);
    }

    #[test]
    fn logdet_sylvester_symmetry() {
        for seed in 0..20 {
            let x = herm(3, 300 + seed).into_matrix();
            let y = herm(3, 500 + seed).into_matrix();
            let a = &x * x.adjoint();
            let b = &y * y.adjoint();
            let ab = logdet_i_plus(&a, &b).unwrap();
            let ba = logdet_i_plus(&b, &a).unwrap();
            assert!((ab - ba).abs() < 1e-9);
        }
    }

    #[test]
    fn psd_logdet_matches_lu() {
        for seed in 0..20 {
            let x = herm(3, 700 + seed).into_matrix();
            let y = herm(3, 900 + seed).into_matrix();
            let a = HermitianMatrix::new(&x * x.adjoint()).unwrap();
            let b = HermitianMatrix::new(&y * y.adjoint()).unwrap();
            let lu = logdet_i_plus(a.as_matrix(), b.as_matrix()).unwrap();
            assert!((logdet_i_plus_psd(&a, &b).unwrap() - lu).abs() < 1e-10);
        }
        let neg = HermitianMatrix::from_real_diagonal(&[-2.0]);
        assert!(matches!(
            logdet_i_plus_psd(&neg, &HermitianMatrix::identity(1)),
            Err(DwzError::NumericalFailure(_))
        ));
        let tiny = HermitianMatrix::from_real_diagonal(&[-1.5e-18, 1e-18]);
        let b = HermitianMatrix::from_real_diagonal(&[4.0, 1.0]);
        assert!(logdet_i_plus_psd(&tiny, &b).unwrap().abs() < 1e-15);
    }

    #[test]
    fn logdet_rejects_negative_determinant() {
        let a = HermitianMatrix::from_real_diagonal(&[-2.0]).into_matrix();
        let b = CMatrix::identity(1, 1);
        assert!(matches!(
            logdet_i_plus(&a, &b),
            Err(DwzError::NumericalFailure(_))
        ));
    }

    #[test]
    fn bisection_linear_root() {
        let x = bisect_decreasing(|x| 1.0 - x, 0.0, 2.0, 1e-8).unwrap();
        assert!((x - 1.0).abs() <= 1e-8);
    }

    #[test]
    fn bisection_scalar_backhaul_multiplier() {
        // R = 1 bit, s = 1.5, noise 1: sum log2(1 + eta(lambda) s) - R crosses zero at 0.2
        let s = 1.5;
        let f = |lam: f64| {
            let eta = ((1.0 / lam) * (1.0 - 1.0 / s) - 1.0).max(0.0);
            1.0 - (1.0 + eta * s).log2()
        };
        let lam = bisect_decreasing(|l| -f(l), 1e-12, 1.0, 1e-12).unwrap();
        assert!((lam - 0.2).abs() < 1e-10);
    }

    #[test]
    fn bisection_without_sign_change() {
        assert!(matches!(
            bisect_decreasing(|_| 1.0, 0.0, 1.0, 1e-8),
            Err(DwzError::BracketError { .. })
        ));
    }

    #[test]
    fn tolerance_defaults_valid() {
        ToleranceConfig::default().validate().unwrap();
        let bad = ToleranceConfig {
            max_iters: 0,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
    }
}
