//! Coupled-mode / input-output S-parameters of the even/odd-mode all-pass
//! resonator.
//!
//! Two identical quarter-wave resonators on a feedline hybridize into an even
//! and an odd mode. With the feedline ports driven from one side, input-output
//! theory gives
//!
//! ```text
//! S21 = 1 − (κe/2)/(j(ω−ωe)+κe/2) − (κo/2)/(j(ω−ωo)+κo/2)
//! S11 =   − (κe/2)/(j(ω−ωe)+κe/2) + (κo/2)/(j(ω−ωo)+κo/2)
//! ```
//!
//! When the two modes are degenerate (equal frequencies and linewidths) the
//! response collapses to a single all-pass pole with |S21| = 1 on resonance.
//! The mode linewidths follow from the electrical separation φ of the two
//! coupling points, `κe,o = κ_r(1 ± cos φ)`, matched at φ = π(m+1)/2, and the
//! feedline mediates a resonator-resonator coupling `g_w = (κ_r/2)·sin φ`.
//!
//! Qubit-state dependence of a full device trace enters through the mode
//! frequencies returned by [`crate::transmon::eigenmodes_for_state`]; the
//! closed dispersive forms stay available in
//! [`crate::transmon::dispersive_result`] as a cross-check.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::transmon::{self, TransmonSpec};

/// Even/odd mode frequencies and linewidths, MHz.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModePair {
    pub omega_e: f64,
    pub omega_o: f64,
    pub kappa_e: f64,
    pub kappa_o: f64,
}

impl ModePair {
    pub fn new(omega_e: f64, omega_o: f64, kappa_e: f64, kappa_o: f64) -> Result<Self> {
        if kappa_e < 0.0 || kappa_o < 0.0 {
            return Err(Error::InvalidInput(format!(
                "mode linewidths must be >= 0, got ({kappa_e}, {kappa_o})"
            )));
        }
        Ok(Self {
            omega_e,
            omega_o,
            kappa_e,
            kappa_o,
        })
    }

    /// Degenerate pair: equal frequencies and linewidths rolled into one pole.
    pub fn degenerate(omega: f64, kappa: f64) -> Result<Self> {
        Self::new(omega, omega, kappa, kappa)
    }
}

/// Device parameters of the all-pass readout block.
///
/// `g` is the *total* qubit coupling of the symmetric (even) resonator mode;
/// each physical resonator couples to the transmon at `g/√2`. `g_total` is
/// the fixed resonator-resonator coupling (direct plus waveguide-mediated),
/// signed. `phi` is the electrical separation `2πd/λ_r` of the coupling
/// points.
#[derive(Debug, Clone, PartialEq)]
pub struct AllPassModel {
    /// Bare resonator frequency, MHz.
    pub omega_r: f64,
    /// Bare per-resonator feedline linewidth, MHz.
    pub kappa_r: f64,
    /// Phase delay between the coupling points, radians, in (0, 2π].
    pub phi: f64,
    /// Fixed resonator-resonator coupling, MHz, signed.
    pub g_total: f64,
    /// Even-mode qubit coupling, MHz (per-resonator coupling times √2).
    pub g: f64,
    /// Transmon parameters.
    pub transmon: TransmonSpec,
    /// Frequency-independent package insertion loss, dB ≥ 0.
    pub package_loss_db: f64,
}

impl AllPassModel {
    pub fn validate(&self) -> Result<()> {
        if !(self.kappa_r > 0.0) {
            return Err(Error::InvalidInput(format!(
                "kappa_r {} must be > 0",
                self.kappa_r
            )));
        }
        if !(self.phi > 0.0 && self.phi <= std::f64::consts::TAU) {
            return Err(Error::InvalidInput(format!(
                "phi {} must lie in (0, 2*pi]",
                self.phi
            )));
        }
        if !(self.package_loss_db >= 0.0) {
            return Err(Error::InvalidInput(format!(
                "package_loss_db {} must be >= 0",
                self.package_loss_db
            )));
        }
        self.transmon.validate()
    }

    /// Scalar amplitude factor of the package loss.
    pub fn loss_amplitude(&self) -> f64 {
        10f64.powf(-self.package_loss_db / 20.0)
    }
}

/// Frequency grid with complex S21 (and optionally S11) samples.
#[derive(Debug, Clone, PartialEq)]
pub struct SParamTrace {
    pub freq: Vec<f64>,
    pub s21: Vec<Complex64>,
    pub s11: Option<Vec<Complex64>>,
}

impl SParamTrace {
    pub fn validate(&self) -> Result<()> {
        if self.freq.is_empty() {
            return Err(Error::InvalidInput("empty frequency grid".into()));
        }
        if self.freq.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidInput(
                "frequency grid must be strictly increasing".into(),
            ));
        }
        if self.s21.len() != self.freq.len() {
            return Err(Error::InvalidInput(format!(
                "s21 length {} != freq length {}",
                self.s21.len(),
                self.freq.len()
            )));
        }
        if let Some(s11) = &self.s11 {
            if s11.len() != self.freq.len() {
                return Err(Error::InvalidInput(format!(
                    "s11 length {} != freq length {}",
                    s11.len(),
                    self.freq.len()
                )));
            }
        }
        Ok(())
    }
}

fn lorentzian_term(omega: f64, mode_freq: f64, kappa: f64) -> Complex64 {
    if kappa == 0.0 {
        return Complex64::new(0.0, 0.0);
    }
    let half = kappa / 2.0;
    Complex64::new(half, 0.0) / Complex64::new(half, omega - mode_freq)
}

/// Two-mode transmission at a single probe frequency (all MHz).
pub fn s21_two_mode(omega: f64, modes: &ModePair) -> Complex64 {
    Complex64::new(1.0, 0.0)
        - lorentzian_term(omega, modes.omega_e, modes.kappa_e)
        - lorentzian_term(omega, modes.omega_o, modes.kappa_o)
}

/// Two-mode reflection at a single probe frequency: the even mode reflects
/// with opposite sign to the odd mode, so a degenerate pair reflects nothing.
pub fn s11_two_mode(omega: f64, modes: &ModePair) -> Complex64 {
    -lorentzian_term(omega, modes.omega_e, modes.kappa_e)
        + lorentzian_term(omega, modes.omega_o, modes.kappa_o)
}

/// Even/odd mode linewidths `κ_r(1 ± cos φ)` for coupling points separated by
/// electrical length `phi`. They match (κe = κo = κ_r) at φ = π(m+1)/2.
pub fn mode_linewidths(kappa_r: f64, phi: f64) -> (f64, f64) {
    let t = kappa_r * phi.cos();
    (kappa_r + t, kappa_r - t)
}

/// Waveguide-mediated resonator-resonator coupling `(κ_r/2)·sin φ`, signed.
pub fn waveguide_coupling(kappa_r: f64, phi: f64) -> f64 {
    kappa_r / 2.0 * phi.sin()
}

/// Full-device S-parameter trace for a given qubit state.
///
/// Mode frequencies come from numerical diagonalization of the device
/// Hamiltonian for the requested qubit state; linewidths from
/// [`mode_linewidths`]; and the package loss is applied as a single scalar
/// amplitude `10^(−loss_dB/20)` on both S21 and S11.
pub fn s21_trace(model: &AllPassModel, qubit_state: usize, freq_grid: &[f64]) -> Result<SParamTrace> {
    model.validate()?;
    if freq_grid.is_empty() {
        return Err(Error::InvalidInput("empty frequency grid".into()));
    }
    if freq_grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidInput(
            "frequency grid must be strictly increasing".into(),
        ));
    }
    let (omega_e, omega_o) = transmon::eigenmodes_for_state(model, qubit_state)?;
    let (kappa_e, kappa_o) = mode_linewidths(model.kappa_r, model.phi);
    let modes = ModePair::new(omega_e, omega_o, kappa_e, kappa_o)?;
    let amp = model.loss_amplitude();
    let s21 = freq_grid.iter().map(|&f| amp * s21_two_mode(f, &modes)).collect();
    let s11 = freq_grid.iter().map(|&f| amp * s11_two_mode(f, &modes)).collect();
    Ok(SParamTrace {
        freq: freq_grid.to_vec(),
        s21,
        s11: Some(s11),
    })
}
