//! Ricci flow and volume-normalized Ricci flow of Sp(n+1)-invariant metrics
//! on the spheres S^{4n+3}.
//!
//! Metrics are diagonal with eigenvalues `(x, y, z, s)`: three on the Hopf
//! fiber directions and one on the quaternionic base. The crate evaluates
//! curvature in closed form, integrates both flows adaptively and classifies
//! how solutions end.
//!
//! ```
//! use rsf::{geometry, MetricParams, ModelParams};
//!
//! let p = ModelParams::new(1).unwrap();
//! let jensen = MetricParams::new(1.0, 1.0, 1.0, 5.0).unwrap();
//! let s = geometry::scalar_curvature(&jensen, &p).unwrap();
//! assert!((s - 15.12).abs() < 1e-12);
//! ```

pub mod analysis;
pub mod cli;
pub mod error;
pub mod flow;
pub mod geometry;
pub mod integrator;
pub mod io;
pub mod verify;

pub use error::{Error, Result};
pub use flow::{FixedPointKind, FlowKind};
pub use geometry::{MetricParams, ModelParams, RicciEigenvalues, TangentVector};
pub use integrator::{Direction, IntegratorConfig, TerminalBehavior, TerminalKind, Trajectory};
