//! Error-system construction, Hurwitz checks and frequency-domain rate
//! certificates for the augmented primal-dual flow.
//!
//! The nonlinearity `Δ` of the error system is covered by the co-coercivity
//! multiplier `Π = [[0, l], [l, −2]] ⊗ Iₙ`. A rate `ρ` is certified when
//! `[G_ρ; I]* Π [G_ρ; I] ⪯ 0` on a sampled frequency grid, where
//! `G_ρ(jω) = C(jωI − A − ρI)⁻¹B`.

mod hurwitz;
mod kyp;
mod lmi;
mod system;

pub use hurwitz::{hurwitz_check, HurwitzVerdict};
pub use kyp::{
    certify_rate, kyp_margin, FrequencyGrid, GridScale, RateCertificate, DEFAULT_TOLERANCE,
};
pub use lmi::{lmi_residual, lmi_residual_without_multiplier};
pub use system::{
    audit_iqc, build_error_system, build_error_system_at, build_transformed_system,
    build_transformed_system_at, DeltaOracle, ErrorSystem, Frame, IqcAudit, IqcMultiplier,
};

use thiserror::Error;

use crate::dynamics::DynamicsError;
use crate::linalg::LinalgError;
use crate::problem::ProblemError;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CertifyError {
    #[error("transformed frame needs m < n (got m = n = {0}); use the original frame")]
    RequiresStrictSubspace(usize),
    #[error("invalid parameter `{0}`: {1}")]
    InvalidParameter(&'static str, String),
    #[error("system matrix is not Hurwitz (spectral abscissa {abscissa:.3e})")]
    NotHurwitz { abscissa: f64 },
    #[error("not certifiable: KYP margin {worst_margin:.3e} exceeds tolerance {tolerance:.3e} at omega = {worst_omega:.3e}")]
    NotCertifiable {
        worst_margin: f64,
        worst_omega: f64,
        tolerance: f64,
    },
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Problem(#[from] ProblemError),
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
}

pub type Result<T> = std::result::Result<T, CertifyError>;
