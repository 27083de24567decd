use thiserror::Error;

/// Failure modes of the grasp library.
///
/// Numeric payloads are reported as `f64` regardless of the working scalar.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum GraspError {
    #[error("Euler extraction at gimbal lock (pitch = {pitch})")]
    GimbalLock { pitch: f64 },
    #[error("Euler rate map near singular (cos(pitch) = {cos_pitch})")]
    NearSingular { cos_pitch: f64 },
    #[error("chart coordinates ({a}, {b}) outside chart bounds")]
    OutOfChart { a: f64, b: f64 },
    #[error("degenerate chart: tangent norm {norm} too small")]
    DegenerateChart { norm: f64 },
    #[error("relative curvature singular (condition number {cond}); flat-on-flat contact unsupported")]
    FlatOnFlat { cond: f64 },
    #[error("grasp map rank {rank} < 6 (contacts collinear or too few)")]
    RankDeficient { rank: usize },
    #[error("{what} ill-conditioned (condition number {cond:e})")]
    IllConditioned { what: &'static str, cond: f64 },
    #[error("hand Jacobian rank {rank} below {required}")]
    SingularJh { rank: usize, required: usize },
    #[error("grasp failure: contact {contact} left the fingertip workspace at ({a}, {b})")]
    GraspFailure { contact: usize, a: f64, b: f64 },
    #[error("QP infeasible: no torque satisfies all grasp constraints")]
    Infeasible,
    #[error("QP active-set iteration limit ({0}) reached")]
    MaxIterations(usize),
    #[error("contact {contact} normal force {normal} is not positive")]
    NonPositiveNormal { contact: usize, normal: f64 },
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("invalid configuration: {0}")]
    ConfigInvalid(String),
    #[error("log schema mismatch: {0}")]
    SchemaMismatch(String),
    #[error("i/o failure: {0}")]
    Io(String),
}

impl From<std::io::Error> for GraspError {
    fn from(e: std::io::Error) -> Self {
        GraspError::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, GraspError>;
