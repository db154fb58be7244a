use thiserror::Error;

use crate::integrator::{TerminalKind, Trajectory};

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid integrator configuration: {0}")]
    Config(String),

    #[error("step size underflow at t = {t} without a terminal event")]
    StepUnderflow { t: f64, trajectory: Box<Trajectory> },

    #[error("maximum number of steps ({steps}) exceeded at t = {t}")]
    MaxStepsExceeded {
        steps: usize,
        t: f64,
        trajectory: Box<Trajectory>,
    },

    #[error("finite-difference step {step:e} too small relative to point component {component:e}")]
    FiniteDifferenceStep { step: f64, component: f64 },

    #[error("quadrature tolerance not met: {0}")]
    Quadrature(String),

    #[error("inconsistent trajectory: {0}")]
    InconsistentTrajectory(String),

    #[error("unknown quantity '{0}' (expected one of x/z, y/z, y/s, S, x*S)")]
    UnknownQuantity(String),

    #[error("both probe endpoints end in {0:?}; a separatrix bracket needs one round-converging and one blow-up endpoint")]
    SameSide(TerminalKind),

    #[error("endpoint classification {kind:?} at u = {u} is neither round convergence nor blow-up")]
    UnclassifiedEndpoint { u: f64, kind: TerminalKind },

    #[error("classification timed out at u = {u}: horizon reached without a terminal event")]
    ClassificationTimeout { u: f64 },

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("blow-up profile window too short: {samples} samples with S above 1% of the final value (need 50)")]
    ProfileWindowTooShort { samples: usize },

    #[error("parse error at '{token}': {reason}")]
    Parse { token: String, reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn parse(token: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Parse {
            token: token.into(),
            reason: reason.into(),
        }
    }
}
