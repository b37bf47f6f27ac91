//! Two-mode Gaussian states and the symplectic group acting on them.
//!
//! Quadratures are ordered (q₁, p₁, q₂, p₂) with ħ = 1, so the vacuum has
//! covariance ½·I₄ and the uncertainty relation reads V + (i/2)Ω ⪰ 0.

use std::f64::consts::PI;

use nalgebra::{Cholesky, Matrix2, Matrix4, SymmetricEigen, Vector4};

use crate::error::{finite, Error, Result};

/// Tolerance on ‖SΩSᵀ − Ω‖_max for a matrix to count as symplectic.
pub const SYMPLECTIC_TOL: f64 = 1e-10;
/// Slack below ½ allowed for the smallest symplectic eigenvalue.
pub const PHYSICALITY_TOL: f64 = 1e-9;
/// Entrywise symmetry tolerance, relative to the largest entry (floor 1).
pub const SYMMETRY_TOL: f64 = 1e-12;
/// A quadrature variance counts as squeezed below ½ − this.
pub const SQUEEZING_TOL: f64 = 1e-12;

/// Single-mode symplectic form ω = [[0, 1], [−1, 0]].
pub fn omega() -> Matrix2<f64> {
    Matrix2::new(0.0, 1.0, -1.0, 0.0)
}

/// Two-mode symplectic form Ω = ω ⊕ ω.
pub fn symplectic_form() -> Matrix4<f64> {
    let mut m = Matrix4::zeros();
    m[(0, 1)] = 1.0;
    m[(1, 0)] = -1.0;
    m[(2, 3)] = 1.0;
    m[(3, 2)] = -1.0;
    m
}

/// Which of the two modes an operation acts on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    One,
    Two,
}

impl Mode {
    fn offset(self) -> usize {
        match self {
            Mode::One => 0,
            Mode::Two => 2,
        }
    }
}

fn max_abs(m: &Matrix4<f64>) -> f64 {
    m.iter().fold(0.0_f64, |acc, x| acc.max(x.abs()))
}

fn symmetrize(m: &Matrix4<f64>) -> Matrix4<f64> {
    (m + m.transpose()) * 0.5
}

/// Symmetric 4×4 covariance matrix of the quadratures.
///
/// Symmetry is enforced on construction; physicality is not, so that
/// unphysical matrices can still be inspected with [`check_uncertainty`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CovMatrix(Matrix4<f64>);

impl CovMatrix {
    pub fn new(m: Matrix4<f64>) -> Result<Self> {
        if m.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite {
                name: "covariance entry",
                value: m
                    .iter()
                    .copied()
                    .find(|x| !x.is_finite())
                    .unwrap_or(f64::NAN),
            });
        }
        let asymmetry = max_abs(&(m - m.transpose()));
        if asymmetry > SYMMETRY_TOL * max_abs(&m).max(1.0) {
            return Err(Error::Asymmetric { asymmetry });
        }
        Ok(CovMatrix(symmetrize(&m)))
    }

    /// Symmetrizes a matrix produced by congruence transforms, where the
    /// asymmetry is pure roundoff.
    pub(crate) fn from_congruence(m: Matrix4<f64>) -> Self {
        CovMatrix(symmetrize(&m))
    }

    pub fn from_diagonal(d: [f64; 4]) -> Result<Self> {
        Self::new(Matrix4::from_diagonal(&Vector4::from(d)))
    }

    pub fn scaled_identity(v: f64) -> Result<Self> {
        Self::from_diagonal([v; 4])
    }

    pub fn matrix(&self) -> &Matrix4<f64> {
        &self.0
    }

    pub fn into_matrix(self) -> Matrix4<f64> {
        self.0
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        self.0[(i, j)]
    }

    /// Local block of mode 1 (A), mode 2 (B) and the correlation block (C).
    pub fn blocks(&self) -> (Matrix2<f64>, Matrix2<f64>, Matrix2<f64>) {
        let a = self.0.fixed_view::<2, 2>(0, 0).into_owned();
        let b = self.0.fixed_view::<2, 2>(2, 2).into_owned();
        let c = self.0.fixed_view::<2, 2>(0, 2).into_owned();
        (a, b, c)
    }

    pub fn max_abs_diff(&self, other: &CovMatrix) -> f64 {
        max_abs(&(self.0 - other.0))
    }

    pub fn det(&self) -> f64 {
        self.0.determinant()
    }
}

/// Mean vector plus covariance matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianState {
    pub mean: Vector4<f64>,
    pub cov: CovMatrix,
}

impl GaussianState {
    /// Builds a state, rejecting covariances that violate the uncertainty
    /// relation by more than [`PHYSICALITY_TOL`].
    pub fn new(mean: Vector4<f64>, cov: CovMatrix) -> Result<Self> {
        if mean.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite {
                name: "mean",
                value: f64::NAN,
            });
        }
        let (nu_min, _) = symplectic_spectrum(&cov)?;
        if nu_min < 0.5 - PHYSICALITY_TOL {
            return Err(Error::Unphysical { nu_min });
        }
        Ok(GaussianState { mean, cov })
    }

    pub fn zero_mean(cov: CovMatrix) -> Result<Self> {
        Self::new(Vector4::zeros(), cov)
    }

    /// Symplectic images of physical states are physical, so this skips
    /// the eigenvalue check.
    pub(crate) fn from_parts_unchecked(mean: Vector4<f64>, cov: CovMatrix) -> Self {
        GaussianState { mean, cov }
    }
}

/// Two-mode vacuum: zero mean, covariance ½·I₄.
pub fn vacuum_state() -> GaussianState {
    GaussianState {
        mean: Vector4::zeros(),
        cov: CovMatrix(Matrix4::identity() * 0.5),
    }
}

/// Product of two thermal states with the same mean photon number.
pub fn thermal_state(nbar: f64) -> Result<GaussianState> {
    crate::error::non_negative("nbar", nbar)?;
    Ok(GaussianState {
        mean: Vector4::zeros(),
        cov: CovMatrix(Matrix4::identity() * (nbar + 0.5)),
    })
}

/// Real 4×4 matrix preserving Ω.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymplecticMatrix(Matrix4<f64>);

impl SymplecticMatrix {
    pub fn new(m: Matrix4<f64>) -> Result<Self> {
        let deviation = symplectic_deviation(&m);
        // Negated so that a NaN deviation is rejected.
        #[allow(clippy::neg_cmp_op_on_partial_ord)]
        if !(deviation <= SYMPLECTIC_TOL) || (m.determinant() - 1.0).abs() > 1e-9 {
            return Err(Error::NotSymplectic { deviation });
        }
        Ok(SymplecticMatrix(m))
    }

    pub fn identity() -> Self {
        SymplecticMatrix(Matrix4::identity())
    }

    pub fn matrix(&self) -> &Matrix4<f64> {
        &self.0
    }

    /// `self · other`, i.e. `other` acts first.
    pub fn then_after(&self, other: &SymplecticMatrix) -> SymplecticMatrix {
        SymplecticMatrix(self.0 * other.0)
    }

    /// S⁻¹ = −Ω Sᵀ Ω.
    pub fn inverse(&self) -> SymplecticMatrix {
        let w = symplectic_form();
        SymplecticMatrix(-(w * self.0.transpose() * w))
    }

    /// Orthogonal symplectics are exactly the passive (photon-number
    /// conserving) transformations.
    pub fn is_passive(&self, tol: f64) -> bool {
        max_abs(&(self.0 * self.0.transpose() - Matrix4::identity())) <= tol
    }

    /// V → S V Sᵀ.
    pub fn transform_cov(&self, cov: &CovMatrix) -> CovMatrix {
        CovMatrix::from_congruence(self.0 * cov.0 * self.0.transpose())
    }
}

impl std::ops::Mul for SymplecticMatrix {
    type Output = SymplecticMatrix;

    fn mul(self, rhs: SymplecticMatrix) -> SymplecticMatrix {
        SymplecticMatrix(self.0 * rhs.0)
    }
}

fn symplectic_deviation(m: &Matrix4<f64>) -> f64 {
    let w = symplectic_form();
    max_abs(&(m * w * m.transpose() - w))
}

/// Local single-mode squeezer diag(e^{−r}, e^{r}) on `mode`, identity on the other.
pub fn single_mode_squeezer(r: f64, mode: Mode) -> Result<SymplecticMatrix> {
    finite("r", r)?;
    let mut m = Matrix4::identity();
    let o = mode.offset();
    m[(o, o)] = (-r).exp();
    m[(o + 1, o + 1)] = r.exp();
    Ok(SymplecticMatrix(m))
}

/// S₁(r₁) ⊕ S₂(r₂).
pub fn two_mode_local_squeezer(r1: f64, r2: f64) -> Result<SymplecticMatrix> {
    Ok(single_mode_squeezer(r1, Mode::One)? * single_mode_squeezer(r2, Mode::Two)?)
}

/// Beam splitter [[cos θ·I₂, sin θ·I₂], [−sin θ·I₂, cos θ·I₂]]; θ = π/4 is 50:50.
pub fn beam_splitter(theta: f64) -> Result<SymplecticMatrix> {
    finite("theta", theta)?;
    let (s, c) = theta.sin_cos();
    let mut m = Matrix4::zeros();
    for k in 0..2 {
        m[(k, k)] = c;
        m[(k + 2, k + 2)] = c;
        m[(k, k + 2)] = s;
        m[(k + 2, k)] = -s;
    }
    Ok(SymplecticMatrix(m))
}

/// Balanced beam splitter B(π/4).
pub fn balanced_beam_splitter() -> SymplecticMatrix {
    beam_splitter(PI / 4.0).expect("finite angle")
}

/// Phase-space rotation by `phi` on one mode.
pub fn phase_rotation(phi: f64, mode: Mode) -> Result<SymplecticMatrix> {
    finite("phi", phi)?;
    let (s, c) = phi.sin_cos();
    let mut m = Matrix4::identity();
    let o = mode.offset();
    m[(o, o)] = c;
    m[(o, o + 1)] = s;
    m[(o + 1, o)] = -s;
    m[(o + 1, o + 1)] = c;
    Ok(SymplecticMatrix(m))
}

/// mean → S·mean, V → S V Sᵀ.
pub fn apply_symplectic(s: &SymplecticMatrix, state: &GaussianState) -> GaussianState {
    GaussianState::from_parts_unchecked(s.0 * state.mean, s.transform_cov(&state.cov))
}

pub fn is_symplectic(m: &Matrix4<f64>, tol: f64) -> bool {
    symplectic_deviation(m) <= tol
}

/// Symplectic eigenvalues (ν₋, ν₊), ascending.
///
/// Taken as the moduli of the eigenvalues of ΩV (equivalently iΩV), which
/// come in pairs ±iν; each pair is averaged.
pub fn symplectic_spectrum(cov: &CovMatrix) -> Result<(f64, f64)> {
    if Cholesky::new(cov.0).is_none() {
        return Err(Error::NotPositiveDefinite);
    }
    let ev = (symplectic_form() * cov.0).complex_eigenvalues();
    let mut moduli: Vec<f64> = ev.iter().map(|z| z.norm()).collect();
    moduli.sort_by(|a, b| a.total_cmp(b));
    Ok((0.5 * (moduli[0] + moduli[1]), 0.5 * (moduli[2] + moduli[3])))
}

/// True iff the smallest symplectic eigenvalue is at least ½ − `tol`.
/// Matrices that are not even positive definite fail.
pub fn check_uncertainty(cov: &CovMatrix, tol: f64) -> bool {
    match symplectic_spectrum(cov) {
        Ok((nu_min, _)) => nu_min >= 0.5 - tol,
        Err(_) => false,
    }
}

/// Smallest eigenvalue of V: the least quadrature variance reachable by
/// passive rotations.
pub fn min_quadrature_variance(cov: &CovMatrix) -> f64 {
    SymmetricEigen::new(cov.0).eigenvalues.min()
}

pub fn is_squeezed(cov: &CovMatrix) -> bool {
    min_quadrature_variance(cov) < 0.5 - SQUEEZING_TOL
}

/// Gaussian Wigner function exp(−½ xᵀV⁻¹x) / ((2π)²√det V) at x = point − mean.
pub fn wigner_value(state: &GaussianState, point: &Vector4<f64>) -> Result<f64> {
    let det = state.cov.det();
    let inv = state.cov.0.try_inverse().ok_or(Error::Singular)?;
    if det <= 0.0 {
        return Err(Error::Singular);
    }
    let x = point - state.mean;
    let quad = (x.transpose() * inv * x)[(0, 0)];
    Ok((-0.5 * quad).exp() / ((2.0 * PI).powi(2) * det.sqrt()))
}
