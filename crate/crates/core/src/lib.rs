//! Pseudo-spectral solver for the stochastically forced incompressible
//! Navier-Stokes equations on the unit torus `[0, 1]^2`, with energy-balance
//! and structure-function diagnostics and a reproducible ensemble runner.
//!
//! Conventions used throughout:
//! * `||u||^2` is the plain `L^2` norm on the unit torus (no factor 1/2).
//! * Fourier modes are `exp(2 pi i k . x)`; derivatives multiply by `2 pi i k`.
//! * Spectral coefficients are normalised so that `u(x) = sum_k u_k e^{2 pi i k.x}`.

pub mod advection;
pub mod config;
pub mod diagnostics;
pub mod ensemble;
pub mod error;
pub mod forcing;
pub mod initial;
pub mod integrator;
pub mod io;
pub mod spectral;
pub mod verify;

pub use advection::{nonlinear_term, Advection, Dealias};
pub use config::RunConfig;
pub use diagnostics::{DiagnosticsRecord, SfNormalization, StructureFunctionTable};
pub use ensemble::{run_ensemble, CellStats, EnsembleSpec, ForcingSpec, IcSpec, SeriesStats};
pub use error::{Error, Result};
pub use forcing::{eval_basis, ForcingBasis, NoiseIncrement};
pub use integrator::{run, IntegratorConfig, Scheme, Stepper, TimeStep, Trajectory};
pub use spectral::{Grid, PhysicalField, SpectralField, SpectralScalar, Trig};

/// Crate version recorded in output manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
