//! Steady states, multistability, linear stability and weak-probe response
//! of a two-tone driven optomechanical cavity with a cross-Kerr coupling
//! between photon and phonon numbers.
//!
//! - [`model`]: device/drive parameters and unit conversions
//! - [`steadystate`]: the photon-number quintic and self-consistent states
//! - [`stability`]: drift matrix, Routh-Hurwitz and eigenvalue verdicts
//! - [`response`]: sideband amplitudes, output field, absorption spectra
//! - [`dynamics`]: mean-field time integration (independent oracle)
//! - [`sweep`]: power sweeps, branch tracking, figure datasets

pub mod dynamics;
pub mod error;
pub mod model;
pub mod poly;
pub mod response;
pub mod stability;
pub mod steadystate;
pub mod sweep;

pub use error::{Error, Result};
pub use model::{DriveParams, SystemParams};
