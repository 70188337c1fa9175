use num_complex::Complex64;
use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("point {0} lies outside the open unit disk")]
    PointOutsideDisk(Complex64),

    #[error("derivative vanishes at {0}")]
    DerivativeVanishes(Complex64),

    #[error("value {0} is not in the image of the map")]
    NotInImage(Complex64),

    #[error("could not invert the map at {w}: {source}")]
    InversionFailed { w: Complex64, source: Box<Error> },

    #[error("Newton inversion did not converge after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("Newton iterate left the disk while inverting {0}")]
    IterateLeftDisk(Complex64),

    #[error("branch tracking failed near {0}: derivative winds too fast for the path mesh")]
    BranchTracking(Complex64),

    #[error("point lies outside the ball (gauge {0})")]
    OutsideBall(f64),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("malformed spec: {0}")]
    Spec(String),

    #[error("polynomial degree {found} does not match required degree {expected}")]
    DegreeMismatch { expected: u32, found: u32 },

    #[error("adaptive quadrature failed to converge on [{from}, {to}]")]
    Quadrature { from: Complex64, to: Complex64 },

    #[error("integrator step size underflow at t = {0}")]
    StepUnderflow(f64),

    #[error("integrator exceeded {0} steps")]
    TooManySteps(usize),

    #[error("trajectory left the domain at t = {t} (gauge {gauge})")]
    LeftDomain { t: f64, gauge: f64 },

    #[error("time must be positive, got {0}")]
    NonPositiveTime(f64),

    #[error("no roots of the critical-point equation in the window")]
    NoRoots,

    #[error("generator vanishes at {0} away from its Denjoy-Wolff point")]
    UnresolvedSingularity(Complex64),
}
