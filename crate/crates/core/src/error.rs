use thiserror::Error;

/// Failure modes of the numerical pipeline.
///
/// Every variant maps to a stable kebab-case code (see [`RingError::code`])
/// which is what ends up in the `error` column of emitted tables.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum RingError {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("azimuthal bias field is singular on the symmetry axis (rho = 0)")]
    SingularPoint,

    #[error("no field zero exists: B0*B2 = {0:e} <= 0")]
    NoZeroExists(f64),

    #[error("zero locus vanished: radicand {0:e} < 0")]
    LocusVanished(f64),

    #[error("evaluation point lies on a coil wire (coil {0})")]
    OnWire(usize),

    #[error("field expansion fit failed: {0}")]
    FitFailed(String),

    #[error("field vanishes, tilt angle undefined")]
    UndefinedAngle,

    #[error("periodic quadrature did not converge after {nodes} nodes (last change {change:e})")]
    QuadratureFailure { nodes: usize, change: f64 },

    #[error("time-averaged trap not formed: {0}")]
    TrapNotFormed(String),

    #[error("not a minimum: curvature {0:e} <= 0")]
    NotAMinimum(f64),

    #[error("field magnitude at trap center reaches zero during the drive cycle (min |B| = {0:e} G)")]
    MajoranaRisk(f64),

    #[error("Berry connection singular: field crosses zero during the period at rho={rho}, z={z}")]
    ConnectionSingular { rho: f64, z: f64 },

    #[error("wave packet does not fit the grid: {0}")]
    GridMismatch(String),

    #[error("time step too large: dt * max kinetic frequency = {0:.3} >= 0.1")]
    StepTooLarge(f64),

    #[error("packet reaches the branch cut of the linear potential; unwrap needed")]
    UnwrapNeeded,

    #[error("semiclassical propagation invalid: width growth {0:.4} exceeds 5%")]
    SemiclassicalInvalid(f64),

    #[error("packets never re-overlap within t_max = {0:e} s")]
    NoOverlap(f64),

    #[error("fringe contrast {0:.4} below 0.05, pattern unfittable")]
    Unfittable(f64),

    #[error("runs are inconsistent: envelope mismatch {0:e}")]
    InconsistentRuns(f64),
}

impl RingError {
    pub fn code(&self) -> &'static str {
        match self {
            RingError::InvalidInput(_) => "invalid-input",
            RingError::SingularPoint => "singular-point",
            RingError::NoZeroExists(_) => "no-zero-exists",
            RingError::LocusVanished(_) => "locus-vanished",
            RingError::OnWire(_) => "on-wire",
            RingError::FitFailed(_) => "fit-failed",
            RingError::UndefinedAngle => "undefined-angle",
            RingError::QuadratureFailure { .. } => "quadrature-failure",
            RingError::TrapNotFormed(_) => "trap-not-formed",
            RingError::NotAMinimum(_) => "not-a-minimum",
            RingError::MajoranaRisk(_) => "majorana-risk",
            RingError::ConnectionSingular { .. } => "connection-singular",
            RingError::GridMismatch(_) => "grid-mismatch",
            RingError::StepTooLarge(_) => "step-too-large",
            RingError::UnwrapNeeded => "unwrap-needed",
            RingError::SemiclassicalInvalid(_) => "semiclassical-invalid",
            RingError::NoOverlap(_) => "no-overlap",
            RingError::Unfittable(_) => "unfittable",
            RingError::InconsistentRuns(_) => "inconsistent-runs",
        }
    }
}

pub type Result<T> = std::result::Result<T, RingError>;
