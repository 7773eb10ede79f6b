use thiserror::Error;

/// Domain errors raised by the wrist model.
///
/// Every variant is a modelling or numerical condition; I/O and parsing
/// failures belong to the callers that read files.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("gimbal lock: alpha_y is at +/-pi/2 (T32^2 + T33^2 = {0:e})")]
    GimbalLock(f64),

    #[error("pose outside the workspace: {0}")]
    OutOfWorkspace(String),

    #[error("encoder readings are not consistent with any posture (discriminant {0:e})")]
    InconsistentEncoders(f64),

    #[error("universal joint axis is degenerate: {0}")]
    DegenerateAxis(String),

    #[error("leg kinematics disagree by {0:e} mm")]
    InconsistentLegs(f64),

    #[error("internal-torque family has dimension {0}, expected 1")]
    DegenerateNullspace(usize),

    #[error("posture is statically singular: non-actuated balance residual {0:e}")]
    SingularPosture(f64),

    #[error("tendon geometry violated: {0}")]
    GeometryViolation(String),

    #[error("deflection {value} rad outside the operating range +/-{limit} rad")]
    OutOfRange { value: f64, limit: f64 },

    #[error("root finder did not converge after {0} iterations")]
    NoConvergence(usize),

    #[error("no equilibrium: {0}")]
    NoEquilibrium(String),

    #[error("rank deficient data: {0}")]
    RankDeficient(String),

    #[error("degenerate marker set: {0}")]
    DegenerateMarkerSet(String),

    #[error("stiffness matrix is singular")]
    SingularStiffness,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("step {step}: {source}")]
    AtStep {
        step: usize,
        #[source]
        source: Box<Error>,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
