//! Separability and entanglement of two-mode Gaussian states.

use nalgebra::Matrix2;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::gaussian::{check_uncertainty, omega, symplectic_spectrum, CovMatrix, PHYSICALITY_TOL};

/// Values of the Simon expression at or above −this (times the scale from
/// [`separability_tolerance`]) count as separable.
pub const SEPARABILITY_DEADBAND: f64 = 1e-12;
/// Discriminants in (−this, 0) are treated as an exact zero.
pub const DISCRIMINANT_CLAMP: f64 = 1e-12;

/// V = [[A, C], [Cᵀ, B]].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlockDecomposition {
    pub a: Matrix2<f64>,
    pub b: Matrix2<f64>,
    pub c: Matrix2<f64>,
}

impl BlockDecomposition {
    pub fn of(cov: &CovMatrix) -> Self {
        let (a, b, c) = cov.blocks();
        BlockDecomposition { a, b, c }
    }

    pub fn reassemble(&self) -> CovMatrix {
        let mut m = nalgebra::Matrix4::zeros();
        m.fixed_view_mut::<2, 2>(0, 0).copy_from(&self.a);
        m.fixed_view_mut::<2, 2>(2, 2).copy_from(&self.b);
        m.fixed_view_mut::<2, 2>(0, 2).copy_from(&self.c);
        m.fixed_view_mut::<2, 2>(2, 0)
            .copy_from(&self.c.transpose());
        CovMatrix::new(m).expect("blocks of a symmetric matrix")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EntanglementReport {
    pub simon_lhs: f64,
    pub n_minus: f64,
    pub log_negativity: f64,
    pub separable: bool,
}

fn require_physical(cov: &CovMatrix) -> Result<()> {
    if check_uncertainty(cov, PHYSICALITY_TOL) {
        return Ok(());
    }
    let nu_min = symplectic_spectrum(cov).map(|s| s.0).unwrap_or(f64::NAN);
    Err(Error::Unphysical { nu_min })
}

/// det A det B + (¼ − |det C|)² − Tr[AωCωBωCᵀω] − ¼(det A + det B).
///
/// Non-negative iff the state is separable. Smooth in the state parameters,
/// so it is the function root finders work with.
pub fn simon_lhs(cov: &CovMatrix) -> Result<f64> {
    require_physical(cov)?;
    Ok(simon_lhs_unchecked(cov))
}

pub(crate) fn simon_lhs_unchecked(cov: &CovMatrix) -> f64 {
    let BlockDecomposition { a, b, c } = BlockDecomposition::of(cov);
    let w = omega();
    let (det_a, det_b, det_c) = (a.determinant(), b.determinant(), c.determinant());
    let trace_term = (a * w * c * w * b * w * c.transpose() * w).trace();
    det_a * det_b + (0.25 - det_c.abs()).powi(2) - trace_term - 0.25 * (det_a + det_b)
}

/// Roundoff allowance for the Simon expression. It is quartic in V, and for
/// some families (balanced global-bath states) it vanishes identically on the
/// separable side, so its sign there is pure noise.
pub fn separability_tolerance(cov: &CovMatrix) -> f64 {
    SEPARABILITY_DEADBAND * cov.matrix().amax().max(1.0).powi(4)
}

pub fn is_separable_value(simon: f64, cov: &CovMatrix) -> bool {
    simon >= -separability_tolerance(cov)
}

/// Smallest symplectic eigenvalue of the partially transposed covariance,
/// n₋ = √((Σ − √(Σ² − 4 det V))/2) with Σ = det A + det B − 2 det C.
pub fn ppt_min_symplectic_eigenvalue(cov: &CovMatrix) -> Result<f64> {
    require_physical(cov)?;
    ppt_min_unchecked(cov)
}

pub(crate) fn ppt_min_unchecked(cov: &CovMatrix) -> Result<f64> {
    let BlockDecomposition { a, b, c } = BlockDecomposition::of(cov);
    let sigma = a.determinant() + b.determinant() - 2.0 * c.determinant();
    let det_v = cov.det();
    let mut disc = sigma * sigma - 4.0 * det_v;
    if disc < 0.0 {
        // Roundoff scales with Σ², so the clamp does too.
        if disc < -DISCRIMINANT_CLAMP * sigma.abs().max(1.0).powi(2) {
            return Err(Error::NegativeDiscriminant { value: disc });
        }
        disc = 0.0;
    }
    // n₋² = (Σ − √disc)/2 = 2 det V/(Σ + √disc); the second form avoids
    // cancellation when n₋ ≪ n₊.
    let denom = sigma + disc.sqrt();
    if denom <= 0.0 {
        return Ok(0.0);
    }
    Ok((2.0 * det_v / denom).max(0.0).sqrt())
}

/// E_N = max{0, −log₂(2n₋)}.
pub fn log_negativity(cov: &CovMatrix) -> Result<f64> {
    Ok(log_negativity_from_n_minus(ppt_min_symplectic_eigenvalue(
        cov,
    )?))
}

pub fn log_negativity_from_n_minus(n_minus: f64) -> f64 {
    (-(2.0 * n_minus).log2()).max(0.0)
}

pub fn entanglement_report(cov: &CovMatrix) -> Result<EntanglementReport> {
    require_physical(cov)?;
    let simon = simon_lhs_unchecked(cov);
    let n_minus = ppt_min_unchecked(cov)?;
    Ok(EntanglementReport {
        simon_lhs: simon,
        n_minus,
        log_negativity: log_negativity_from_n_minus(n_minus),
        separable: is_separable_value(simon, cov),
    })
}
