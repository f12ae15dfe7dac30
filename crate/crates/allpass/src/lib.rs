//! Deterministic simulator and analysis toolkit for all-pass dispersive
//! qubit readout.
//!
//! An all-pass readout resonator approaches unit transmission across its
//! bandwidth and encodes the qubit state in the transmitted phase, removing
//! the need for an intentional feedline mismatch. This crate models that
//! architecture end to end:
//!
//! - [`netphys`] — closed-form effective linewidths of resonators on a
//!   feedline with mismatched terminations, and the linewidth-spread laws
//!   they imply (VSWR² with an intentional mismatch, VSWR without one).
//! - [`cmt`] — coupled-mode / input-output S-parameters of the even/odd-mode
//!   resonator pair, including the linewidth matching condition and the
//!   waveguide-mediated coupling.
//! - [`transmon`] — Fock-basis Hamiltonian of two resonators symmetrically
//!   coupled to a transmon, numerical eigenmode extraction per qubit state,
//!   dispersive-limit formulas, and the analytic SQUID flux map.
//! - [`yieldmc`] — seeded Monte Carlo yield analysis of linewidth spread
//!   under permittivity non-uniformity.
//! - [`metrics`] — readout figures of merit (operating-point transmission,
//!   Purcell-limited lifetime, assignment fidelity) and least-squares model
//!   fitting to measured transmission traces.
//!
//! # Units
//!
//! All frequencies and linewidths are linear frequencies in MHz (the ω/2π
//! convention); phases are radians. Conversion to angular rates happens only
//! inside lifetime computations. Reflection magnitudes are dimensionless;
//! interfaces that speak dB say so in their names.

pub mod cmt;
pub mod error;
pub mod metrics;
pub mod netphys;
pub mod transmon;
pub mod yieldmc;

pub use cmt::{AllPassModel, ModePair, SParamTrace};
pub use error::{Error, Result};

pub use netphys::{LinewidthResult, PositionSpec, ReflectionCoefficient};
pub use transmon::{DispersiveResult, SquidSpec, TransmonSpec};

