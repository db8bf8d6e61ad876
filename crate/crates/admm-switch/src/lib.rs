//! Multi-block ADMM analysis and design via switched dynamical systems.
//!
//! The crate turns an N-block ADMM instance into a discrete-time switched
//! system on the reduced (N+1)-dimensional state (one coordinate per block
//! plus the multiplier), certifies linear convergence rates by solving
//! small LMI feasibility problems, enumerates convergent block-update
//! sequences, synthesizes stabilizing parameter controllers, and validates
//! everything against an executable GS/PJ-ADMM runtime.
//!
//! Module map:
//! - [`problem`]: declarative problem descriptions and the JSON config format
//! - [`system`]: switched-system matrices, sector bounds, linearization,
//!   closed loops
//! - [`lmi`]: dense symmetric eigensolver wrapper, LMI feasibility solver,
//!   independent certificate verification
//! - [`certify`]: the convergence LMI families and rate bisection
//! - [`sequences`]: pair tables and the recursive sequence search
//! - [`synthesis`]: controller design and its equality-constraint reading
//! - [`runtime`]: executable GS-ADMM / PJ-ADMM with trajectory capture
//! - [`rng`]: seedable, splittable randomness shared by generators and tests

pub mod certify;
pub mod lmi;
pub mod problem;
pub mod rng;
pub mod runtime;
pub mod sequences;
pub mod synthesis;
pub mod system;

pub use certify::{
    CertMethod, CertOptions, CertifyError, GammaConvention, MinRateResult, PairSet,
    RateCertificate, SystemRef,
};
pub use lmi::{FeasibilityResult, LmiError, LmiProblem, SolveOptions};
pub use problem::{ObjectiveDesc, ProblemSpec, ProximalVariant, SignConvention};
pub use runtime::{Instance, RateEstimate, RunStatus, Trajectory};
pub use sequences::{LegalityMode, PairTable, RepetitionMode, TableMode};
pub use synthesis::{ConstraintHyperplane, Controller, ControllerSource};
pub use system::{LinearSwitchedSystem, Mode, SectorBounds, SwitchedSystem};
