//! Renormalized Mori-Zwanzig reduced models for Fourier-Galerkin truncations
//! of inviscid Burgers and incompressible 3D Euler.
//!
//! The pieces, bottom up:
//!
//! * [`spectral`]: mode sets, exact truncated convolution, `P`/`Q` projections.
//! * [`kernels`]: the Burgers and Euler bilinear right-hand sides.
//! * [`memory`]: the recursive ladder `(PL)^s u` and the memory terms.
//! * [`renormalizer`]: moment matching `B a = e` and the switch monitor.
//! * [`integrator`]: adaptive Runge-Kutta-Fehlberg 4(5).
//! * [`oracle`]: exact solution of Burgers with sine data.
//! * [`driver`]: full, renormalized, t-model and unrenormalized runs.

pub mod driver;
pub mod error;
mod fft;
pub mod integrator;
pub mod kernels;
pub mod memory;
pub mod oracle;
pub mod renormalizer;
pub mod spectral;

pub use driver::{run, RunConfig, RunResult, RunStatus, Sample, Variant};
pub use error::{Error, Result};
pub use kernels::{BilinearKernel, Equation};
pub use renormalizer::{CoefficientVector, SolveVariant};
pub use spectral::{Filter, Projection, SpectralField, Truncation};
