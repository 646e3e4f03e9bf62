//! Ground-state cooling of mechanical resonators coupled to a driven cavity
//! through phase-dependent phonon-exchange loops.
//!
//! All frequencies and rates are expressed in units of the first mechanical
//! frequency. Fluctuations are ordered as
//! `u = [δa, δb₁ … δb_N, δa†, δb₁† … δb_N†]`.

pub mod limits;
pub mod model;
pub mod modes;
pub mod numkit;
pub mod spectra;
pub mod steadystate;

pub use num_complex::Complex64 as C64;
