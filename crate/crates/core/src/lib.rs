//! Multifrequency eddy-current thickness gauging with lift-off compensation.
//!
//! The crate is organised bottom-up:
//!
//! * [`bessel`] and [`quadrature`] are the numerical primitives.
//! * [`forward`] evaluates the inductance change of a coaxial driver/pickup
//!   coil pair above a conductive plate.
//! * [`spectrum`] sweeps the forward model over frequency and locates the
//!   peak of the imaginary inductance change.
//! * [`compensation`] turns a measured peak (frequency and amplitude) plus a
//!   calibration reference into a lift-off estimate, a compensated peak
//!   frequency and a thickness.
//! * [`io`] reads and writes sweep, spectrum, configuration and calibration
//!   files.
//! * [`scenarios`] strings the pieces together into the standard
//!   reproduction runs (thickness table and figure data).

pub mod bessel;
pub mod compensation;
mod error;
pub mod forward;
pub mod io;
pub mod quadrature;
pub mod scenarios;
pub mod spectrum;

pub use error::{Error, ErrorKind, Result};

/// Vacuum permeability in H/m.
pub const MU0: f64 = 4.0e-7 * std::f64::consts::PI;
