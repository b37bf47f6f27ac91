//! Two-mode Gaussian states evolving under local and global thermal baths.
//!
//! * [`gaussian`]: covariance matrices, symplectic maps, physicality checks.
//! * [`measures`]: Simon separability test, PPT symplectic eigenvalue,
//!   logarithmic negativity.
//! * [`channels`]: closed-form bath maps and the four squeeze/mix/dissipate
//!   pipelines.
//! * [`analysis`]: critical and transition squeezing, sudden-death times,
//!   numeric boundary search, sweeps, resource classification.
//! * [`fock`]: truncated Fock-space Lindblad integration used as an
//!   independent oracle for the closed forms.
//!
//! Conventions: ħ = 1, vacuum quadrature variance 1/2, quadrature ordering
//! (q₁, p₁, q₂, p₂).

pub mod analysis;
pub mod channels;
pub mod error;
pub mod exec;
pub mod fock;
pub mod gaussian;
pub mod measures;

pub use error::{Error, Result};
pub use exec::Execution;
