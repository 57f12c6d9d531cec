//! Distortion trade-offs for broadcasting a parallel Gaussian source over a
//! two-user Gaussian broadcast channel with hybrid digital-analog codes.

pub mod baselines;
pub mod checks;
pub mod error;
pub mod frontier;
pub mod io;
pub mod mcsim;
pub mod mismatch;
pub mod model;
pub mod ratedist;
pub mod schemes;

pub use error::{Error, Result};
pub use model::{
    BroadcastChannel, MismatchParams, ProblemSpec, RawProblemSpec, Scheme, SchemeParams,
    SchemePoint, SeparationParams, Theorem3Params, User,
};
