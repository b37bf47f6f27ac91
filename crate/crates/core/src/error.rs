use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("parameter `{name}` must be finite, got {value}")]
    NonFinite { name: &'static str, value: f64 },

    #[error("parameter `{name}` out of range: {value} (expected {expected})")]
    OutOfRange {
        name: &'static str,
        value: f64,
        expected: &'static str,
    },

    #[error("matrix is not symplectic: max |SΩSᵀ − Ω| = {deviation:e}")]
    NotSymplectic { deviation: f64 },

    #[error("covariance matrix is not symmetric: max asymmetry {asymmetry:e}")]
    Asymmetric { asymmetry: f64 },

    #[error("covariance matrix is not positive definite")]
    NotPositiveDefinite,

    #[error(
        "covariance matrix violates the uncertainty relation: min symplectic eigenvalue {nu_min}"
    )]
    Unphysical { nu_min: f64 },

    #[error("covariance matrix is singular")]
    Singular,

    #[error("negative discriminant {value:e} in partial-transpose spectrum")]
    NegativeDiscriminant { value: f64 },

    #[error("scenario {scenario} cannot run with a {bath} bath")]
    BathMismatch {
        scenario: &'static str,
        bath: &'static str,
    },

    #[error("Fock truncation too small: tail mass {tail_mass:e} exceeds {bound:e} at dim {dim}; try dim >= {suggested_dim}")]
    Truncation {
        tail_mass: f64,
        bound: f64,
        dim: usize,
        suggested_dim: usize,
    },

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("integration step too large: {0}")]
    StepSize(String),

    #[error("integration drifted: {0}")]
    Drift(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn finite(name: &'static str, value: f64) -> Result<f64> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(Error::NonFinite { name, value })
    }
}

pub(crate) fn non_negative(name: &'static str, value: f64) -> Result<f64> {
    finite(name, value)?;
    if value < 0.0 {
        return Err(Error::OutOfRange {
            name,
            value,
            expected: ">= 0",
        });
    }
    Ok(value)
}
