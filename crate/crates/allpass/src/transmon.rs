//! Fock-basis Hamiltonian of two resonators symmetrically coupled to a
//! transmon, numerical eigenmode extraction per qubit state, dispersive-limit
//! formulas, and the analytic SQUID flux map.
//!
//! The system Hamiltonian in the product Fock basis (modes `a1`, `a2`, `aq`,
//! all frequencies MHz) is
//!
//! ```text
//! H = ω_r a1†a1 + ω_r a2†a2 + ω01 aq†aq − (E_C/2) aq†aq†aq aq
//!   + g_total (a1†+a1)(a2†+a2)
//!   + (g/√2) (a1†+a1)(aq†+aq) + (g/√2) (a2†+a2)(aq†+aq)
//! ```
//!
//! with counter-rotating terms kept. `g` is the coupling of the *even*
//! (symmetric) resonator mode to the qubit; the symmetric combination of the
//! two per-resonator couplings `g/√2` reproduces it exactly. Under this
//! convention the dispersive formulas read
//!
//! ```text
//! ω̃01 = ω01 + g²/Δ                  (dressed qubit)
//! ω_e  = ω_r + g_total − g²/(Δ−E_C) + χ01·σz
//! ω_o  = ω_r − g_total
//! χ01  = −g² E_C / (Δ (Δ−E_C))
//! ```
//!
//! so the even mode is pulled by 2χ01 between adjacent qubit states while the
//! odd mode, whose node sits at the qubit, is not pulled at all.
//!
//! Eigenmode extraction diagonalizes the full matrix, labels eigenstates by
//! their overlap with the bare symmetric/antisymmetric single-photon states,
//! and grows the truncation until the reported frequencies settle below
//! 1 kHz per level.

use nalgebra::{DMatrix, SymmetricEigen};
use std::f64::consts::{PI, SQRT_2};

use crate::cmt::AllPassModel;
use crate::error::{Error, Result};

/// Largest allowed product dimension `n_res² · n_qubit` of the Fock basis.
pub const DIMENSION_CAP: usize = 10_000;

/// Per-mode truncation cap of the convergence ladder.
pub const TRUNCATION_CAP: usize = 12;

/// Convergence threshold on eigenfrequency movement per ladder step, MHz.
pub const CONVERGENCE_MHZ: f64 = 1e-3;

/// Minimum relative overlap margin required to label an eigenstate.
const LABEL_MARGIN: f64 = 0.10;

/// Transmon parameters. `omega_01` is the *bare* qubit frequency in MHz,
/// `e_c` the charging energy in MHz. The level counts set the starting
/// truncation of the convergence ladder.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransmonSpec {
    pub omega_01: f64,
    pub e_c: f64,
    pub n_levels_qubit: usize,
    pub n_levels_res: usize,
}

impl TransmonSpec {
    /// Transmon with the default starting truncation of 4 levels per mode.
    pub fn new(omega_01: f64, e_c: f64) -> Result<Self> {
        let spec = Self {
            omega_01,
            e_c,
            n_levels_qubit: 4,
            n_levels_res: 4,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.e_c > 0.0) {
            return Err(Error::InvalidInput(format!("e_c {} must be > 0", self.e_c)));
        }
        if self.n_levels_qubit < 2 || self.n_levels_res < 2 {
            return Err(Error::InvalidInput(format!(
                "truncation levels ({}, {}) must be >= 2",
                self.n_levels_res, self.n_levels_qubit
            )));
        }
        if !self.omega_01.is_finite() {
            return Err(Error::InvalidInput("omega_01 must be finite".into()));
        }
        Ok(())
    }
}

/// Symmetric SQUID parameters: `e_j_max` is the single-junction Josephson
/// energy in GHz, `e_c` the charging energy in MHz, `flux` the bias Φ/Φ0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SquidSpec {
    pub e_j_max: f64,
    pub e_c: f64,
    pub flux: f64,
}

impl SquidSpec {
    pub fn new(e_j_max: f64, e_c: f64, flux: f64) -> Result<Self> {
        let spec = Self { e_j_max, e_c, flux };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.e_j_max > 0.0) {
            return Err(Error::InvalidInput(format!(
                "e_j_max {} must be > 0",
                self.e_j_max
            )));
        }
        if !(self.e_c > 0.0) {
            return Err(Error::InvalidInput(format!("e_c {} must be > 0", self.e_c)));
        }
        if !(self.flux.abs() <= 0.5) {
            return Err(Error::InvalidInput(format!(
                "flux {} outside the canonical domain [-0.5, 0.5]",
                self.flux
            )));
        }
        Ok(())
    }
}

/// Closed-form dispersive quantities for the qubit ground state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DispersiveResult {
    pub omega01_dressed: f64,
    pub omega_e: f64,
    pub omega_o: f64,
    pub chi01: f64,
}

fn basis_index(n1: usize, n2: usize, nq: usize, n_res: usize, n_q: usize) -> usize {
    (n1 * n_res + n2) * n_q + nq
}

/// Assemble the device Hamiltonian in the product Fock basis ordered
/// `(n1, n2, nq)` with the qubit index fastest, at the model's starting
/// truncation. Real symmetric; counter-rotating terms included.
pub fn build_hamiltonian(model: &AllPassModel) -> Result<DMatrix<f64>> {
    model.validate()?;
    build_hamiltonian_at(
        model,
        model.transmon.n_levels_res,
        model.transmon.n_levels_qubit,
    )
}

fn build_hamiltonian_at(model: &AllPassModel, n_res: usize, n_q: usize) -> Result<DMatrix<f64>> {
    let dim = n_res * n_res * n_q;
    if dim > DIMENSION_CAP {
        return Err(Error::DimensionOverflow {
            dim,
            cap: DIMENSION_CAP,
        });
    }
    let omega_r = model.omega_r;
    let omega01 = model.transmon.omega_01;
    let e_c = model.transmon.e_c;
    let g_res = model.g / SQRT_2;
    let g_tot = model.g_total;

    let mut h = DMatrix::<f64>::zeros(dim, dim);
    let idx = |n1: usize, n2: usize, nq: usize| basis_index(n1, n2, nq, n_res, n_q);
    fn couple_into(h: &mut DMatrix<f64>, i: usize, j: usize, v: f64) {
        h[(i, j)] += v;
        h[(j, i)] += v;
    }

    for n1 in 0..n_res {
        for n2 in 0..n_res {
            for nq in 0..n_q {
                let i = idx(n1, n2, nq);
                h[(i, i)] = omega_r * (n1 as f64 + n2 as f64) + omega01 * nq as f64
                    - e_c / 2.0 * (nq * nq.saturating_sub(1)) as f64;

                let up1 = (n1 + 1 < n_res).then(|| ((n1 + 1) as f64).sqrt());
                let up2 = (n2 + 1 < n_res).then(|| ((n2 + 1) as f64).sqrt());
                let upq = (nq + 1 < n_q).then(|| ((nq + 1) as f64).sqrt());

                // g_total (a1†+a1)(a2†+a2): a1†a2† and a1†a2 branches.
                if let Some(s1) = up1 {
                    if let Some(s2) = up2 {
                        couple_into(&mut h, idx(n1 + 1, n2 + 1, nq), i, g_tot * s1 * s2);
                    }
                    if n2 > 0 {
                        couple_into(&mut h, idx(n1 + 1, n2 - 1, nq), i, g_tot * s1 * (n2 as f64).sqrt());
                    }
                }
                // (g/√2)(a1†+a1)(aq†+aq)
                if let Some(s1) = up1 {
                    if let Some(sq) = upq {
                        couple_into(&mut h, idx(n1 + 1, n2, nq + 1), i, g_res * s1 * sq);
                    }
                    if nq > 0 {
                        couple_into(&mut h, idx(n1 + 1, n2, nq - 1), i, g_res * s1 * (nq as f64).sqrt());
                    }
                }
                // (g/√2)(a2†+a2)(aq†+aq)
                if let Some(s2) = up2 {
                    if let Some(sq) = upq {
                        couple_into(&mut h, idx(n1, n2 + 1, nq + 1), i, g_res * s2 * sq);
                    }
                    if nq > 0 {
                        couple_into(&mut h, idx(n1, n2 + 1, nq - 1), i, g_res * s2 * (nq as f64).sqrt());
                    }
                }
            }
        }
    }
    Ok(h)
}

/// Result of labeling one eigenstate.
struct Labeled {
    energy: f64,
}

/// Pick the eigencolumn with the largest squared overlap against a sparse
/// target vector. `weights` holds (row, amplitude) pairs of the target.
fn label_by_overlap(
    eig: &SymmetricEigen<f64, nalgebra::Dyn>,
    weights: &[(usize, f64)],
) -> Result<Labeled> {
    let n = eig.eigenvalues.len();
    let mut best = (0usize, -1.0f64);
    let mut second = (0usize, -1.0f64);
    for col in 0..n {
        let amp: f64 = weights
            .iter()
            .map(|&(row, w)| w * eig.eigenvectors[(row, col)])
            .sum();
        let ov = amp * amp;
        if ov > best.1 {
            second = best;
            best = (col, ov);
        } else if ov > second.1 {
            second = (col, ov);
        }
    }
    if best.1 < 0.25 {
        return Err(Error::LabelingAmbiguity { margin: best.1 });
    }
    let margin = (best.1 - second.1) / best.1;
    if margin < LABEL_MARGIN {
        // A genuinely degenerate pair shares the target weight; accept it
        // when the competing energies agree, otherwise refuse to label.
        let scale = 1.0 + eig.eigenvalues[best.0].abs();
        if (eig.eigenvalues[best.0] - eig.eigenvalues[second.0]).abs() > 1e-6 * scale {
            return Err(Error::LabelingAmbiguity { margin });
        }
    }
    Ok(Labeled {
        energy: eig.eigenvalues[best.0],
    })
}

/// Eigenmode frequencies (ω_e, ω_o) at a fixed truncation, without the
/// convergence ladder. Exposed for callers that manage truncation themselves;
/// most code wants [`eigenmodes_for_state`].
pub fn eigenmodes_at_truncation(
    model: &AllPassModel,
    qubit_state: usize,
    n_res: usize,
    n_q: usize,
) -> Result<(f64, f64)> {
    if qubit_state + 1 >= n_q {
        return Err(Error::InvalidInput(format!(
            "qubit state {qubit_state} needs more than {n_q} qubit levels"
        )));
    }
    if n_res < 2 {
        return Err(Error::InvalidInput("need at least 2 resonator levels".into()));
    }
    let h = build_hamiltonian_at(model, n_res, n_q)?;
    let eig = SymmetricEigen::new(h);

    let base_row = basis_index(0, 0, qubit_state, n_res, n_q);
    let r10 = basis_index(1, 0, qubit_state, n_res, n_q);
    let r01 = basis_index(0, 1, qubit_state, n_res, n_q);
    let inv_sqrt2 = 1.0 / SQRT_2;

    let base = label_by_overlap(&eig, &[(base_row, 1.0)])?;
    let even = label_by_overlap(&eig, &[(r10, inv_sqrt2), (r01, inv_sqrt2)])?;
    let odd = label_by_overlap(&eig, &[(r10, inv_sqrt2), (r01, -inv_sqrt2)])?;

    Ok((even.energy - base.energy, odd.energy - base.energy))
}

/// Truncation ladder: grow both level counts one at a time from the model's
/// starting truncation until the two reported frequencies move less than
/// [`CONVERGENCE_MHZ`] between successive levels.
///
/// Returns `(omega_e, omega_o, n_res, n_q)` at the accepted truncation.
pub(crate) fn converged_eigenmodes(
    model: &AllPassModel,
    qubit_state: usize,
) -> Result<(f64, f64, usize, usize)> {
    model.validate()?;
    if qubit_state >= model.transmon.n_levels_qubit {
        return Err(Error::InvalidInput(format!(
            "qubit state {qubit_state} outside the configured {} levels",
            model.transmon.n_levels_qubit
        )));
    }
    let start_res = model.transmon.n_levels_res.min(TRUNCATION_CAP);
    let start_q = model
        .transmon
        .n_levels_qubit
        .max(qubit_state + 2)
        .min(TRUNCATION_CAP);

    let mut prev: Option<(f64, f64)> = None;
    let mut dims = (start_res, start_q);
    loop {
        let cur = eigenmodes_at_truncation(model, qubit_state, dims.0, dims.1)?;
        if let Some(p) = prev {
            if (cur.0 - p.0).abs() < CONVERGENCE_MHZ && (cur.1 - p.1).abs() < CONVERGENCE_MHZ {
                return Ok((cur.0, cur.1, dims.0, dims.1));
            }
        }
        let next = (
            (dims.0 + 1).min(TRUNCATION_CAP),
            (dims.1 + 1).min(TRUNCATION_CAP),
        );
        if next == dims {
            return Err(Error::NonConvergence {
                threshold_mhz: CONVERGENCE_MHZ,
                cap: TRUNCATION_CAP,
            });
        }
        prev = Some(cur);
        dims = next;
    }
}

/// Even- and odd-mode transition frequencies for the qubit held in the given
/// dressed state, from full diagonalization with adaptive truncation.
pub fn eigenmodes_for_state(model: &AllPassModel, qubit_state: usize) -> Result<(f64, f64)> {
    converged_eigenmodes(model, qubit_state).map(|(we, wo, _, _)| (we, wo))
}

/// Dressed transition frequency from the qubit ground state to
/// `upper_state`, with zero photons in either resonator mode.
pub fn dressed_qubit_frequency(model: &AllPassModel, upper_state: usize) -> Result<f64> {
    model.validate()?;
    if upper_state == 0 {
        return Ok(0.0);
    }
    let start_res = model.transmon.n_levels_res.min(TRUNCATION_CAP);
    let start_q = model
        .transmon
        .n_levels_qubit
        .max(upper_state + 2)
        .min(TRUNCATION_CAP);
    let mut prev: Option<f64> = None;
    let mut dims = (start_res, start_q);
    loop {
        let h = build_hamiltonian_at(model, dims.0, dims.1)?;
        let eig = SymmetricEigen::new(h);
        let ground = label_by_overlap(&eig, &[(basis_index(0, 0, 0, dims.0, dims.1), 1.0)])?;
        let upper = label_by_overlap(
            &eig,
            &[(basis_index(0, 0, upper_state, dims.0, dims.1), 1.0)],
        )?;
        let cur = upper.energy - ground.energy;
        if let Some(p) = prev {
            if (cur - p).abs() < CONVERGENCE_MHZ {
                return Ok(cur);
            }
        }
        let next = (
            (dims.0 + 1).min(TRUNCATION_CAP),
            (dims.1 + 1).min(TRUNCATION_CAP),
        );
        if next == dims {
            return Err(Error::NonConvergence {
                threshold_mhz: CONVERGENCE_MHZ,
                cap: TRUNCATION_CAP,
            });
        }
        prev = Some(cur);
        dims = next;
    }
}

/// Dispersive shift χ01 = −g²·E_C / (Δ(Δ−E_C)), with `g` the even-mode qubit
/// coupling and `Δ` the qubit-resonator detuning, all MHz. Fails within 1 MHz
/// of either pole.
pub fn dispersive_chi(g: f64, delta: f64, e_c: f64) -> Result<f64> {
    if delta.abs() < 1.0 || (delta - e_c).abs() < 1.0 {
        return Err(Error::StraddlingResonance {
            delta,
            delta_minus_ec: delta - e_c,
        });
    }
    Ok(-g * g * e_c / (delta * (delta - e_c)))
}

/// The resonator-resonator coupling at which the qubit-mediated coupling
/// cancels the fixed coupling and the even/odd modes become degenerate
/// (dispersive pull neglected): `g²/(Δ−E_C)`.
pub fn degeneracy_gtotal(g: f64, delta: f64, e_c: f64) -> f64 {
    g * g / (delta - e_c)
}

/// Bare qubit frequency ω01 ≈ √(8·E_J(Φ)·E_C) − E_C with
/// E_J(Φ) = 2·E_J·|cos(πΦ/Φ0)| for a symmetric SQUID. Returns MHz.
pub fn qubit_freq_from_flux(squid: &SquidSpec) -> Result<f64> {
    squid.validate()?;
    let c = (PI * squid.flux).cos().abs();
    if c < 1e-12 {
        return Err(Error::FluxDomain(squid.flux));
    }
    let e_j_mhz = 2.0 * squid.e_j_max * 1000.0 * c;
    Ok((8.0 * e_j_mhz * squid.e_c).sqrt() - squid.e_c)
}

/// Flux bias Φ/Φ0 ∈ (0, 0.5) at which [`degeneracy_gtotal`] evaluated along
/// the SQUID flux map equals the model's `g_total`. Bisection on a bracketed
/// sign change; fails with [`Error::NoRoot`] when the residual is one-signed.
pub fn allpass_flux_point(model: &AllPassModel, squid: &SquidSpec) -> Result<f64> {
    model.validate()?;
    squid.validate()?;
    let residual = |flux: f64| -> Result<f64> {
        let w01 = qubit_freq_from_flux(&SquidSpec { flux, ..*squid })?;
        let delta = w01 - model.omega_r;
        Ok(degeneracy_gtotal(model.g, delta, squid.e_c) - model.g_total)
    };
    let mut a = 1e-6;
    let mut b = 0.5 - 1e-9;
    let mut fa = residual(a)?;
    let fb = residual(b)?;
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() {
        return Err(Error::NoRoot);
    }
    for _ in 0..80 {
        let mid = 0.5 * (a + b);
        let fm = residual(mid)?;
        if fm == 0.0 {
            return Ok(mid);
        }
        if fm.signum() == fa.signum() {
            a = mid;
            fa = fm;
        } else {
            b = mid;
        }
    }
    let root = 0.5 * (a + b);
    // A sign change through the Δ = E_C pole is not a degeneracy point.
    let check = residual(root)?;
    if check.abs() > 1e-3 * (1.0 + model.g_total.abs()) {
        return Err(Error::NoRoot);
    }
    Ok(root)
}

/// Bare qubit frequency recovering a measured dressed 0↔1 transition by
/// inverting the dispersive shift g²/Δ self-consistently.
pub fn bare_from_dressed(dressed_01: f64, g: f64, omega_r: f64) -> Result<f64> {
    let mut w = dressed_01;
    for _ in 0..200 {
        let delta = w - omega_r;
        if delta.abs() < 1.0 {
            return Err(Error::StraddlingResonance {
                delta,
                delta_minus_ec: delta,
            });
        }
        let next = dressed_01 - g * g / delta;
        if (next - w).abs() < 1e-10 {
            return Ok(next);
        }
        w = next;
    }
    Err(Error::InvalidInput(
        "dressed-to-bare inversion did not converge".into(),
    ))
}

/// Closed-form dispersive quantities for the qubit ground state. Kept as a
/// cross-check of the numerical diagonalization; agreement is limited by the
/// counter-rotating terms the numerics retain.
pub fn dispersive_result(model: &AllPassModel) -> Result<DispersiveResult> {
    model.validate()?;
    let delta = model.transmon.omega_01 - model.omega_r;
    let e_c = model.transmon.e_c;
    let chi01 = dispersive_chi(model.g, delta, e_c)?;
    Ok(DispersiveResult {
        omega01_dressed: model.transmon.omega_01 + model.g * model.g / delta,
        omega_e: model.omega_r + model.g_total - model.g * model.g / (delta - e_c) - chi01,
        omega_o: model.omega_r - model.g_total,
        chi01,
    })
}
