//! Closed-form physics of resonator linewidths on a feedline with
//! mismatched ends.
//!
//! A resonator hanger-coupled to a feedline sees standing waves set up by the
//! reflections `Γ1` (input side) and `Γ2` (output side). The effective
//! linewidth and resonance frequency become
//!
//! ```text
//! κ̃_r = (κ_r/2)·Re[(1+Γ1)(1+Γ2)/(1−Γ1Γ2)]
//! ω̃_r = ω_r + (κ_r/4)·Im[(1−Γ1−Γ2−3Γ1Γ2)/(1−Γ1Γ2)]
//! ```
//!
//! Three specializations matter for multiplexed readout:
//! with a total input reflection the worst-case linewidth spread over cable
//! phase is VSWR² ([`spread_intentional_mismatch`]); with a matched input it
//! is VSWR ([`spread_no_mismatch`]); and with a total input reflection the
//! linewidth of a resonator a distance `x` down the feedline depends on the
//! permittivity ratio between feedline and resonator
//! ([`kappa_vs_position`]).
//!
//! All operations are pure functions; call them from any thread.

use num_complex::Complex64;
use std::f64::consts::TAU;

use crate::error::{Error, Result};

/// Threshold on `|1 − Γ1Γ2|` below which the feedline configuration is
/// treated as singular. Well below any passive physical configuration.
pub const SINGULARITY_THRESHOLD: f64 = 1e-12;

/// Passivity slack for magnitudes that should be ≤ 1 but are computed in
/// floating point (e.g. from dB).
const PASSIVITY_SLACK: f64 = 1e-12;

/// Complex reflection coefficient of a passive termination, `|Γ| ≤ 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReflectionCoefficient(Complex64);

impl ReflectionCoefficient {
    /// Wrap a complex reflection coefficient, enforcing passivity.
    pub fn new(value: Complex64) -> Result<Self> {
        if !value.re.is_finite() || !value.im.is_finite() || value.norm() > 1.0 + PASSIVITY_SLACK
        {
            return Err(Error::PassivityViolation(value.norm()));
        }
        Ok(Self(value))
    }

    /// Build from a magnitude in dB (≤ 0 for a passive termination) and a
    /// phase in radians.
    pub fn from_db_phase(mag_db: f64, phase_rad: f64) -> Result<Self> {
        let mag = 10f64.powf(mag_db / 20.0);
        Self::new(Complex64::from_polar(mag, phase_rad))
    }

    /// Matched termination, Γ = 0.
    pub fn matched() -> Self {
        Self(Complex64::new(0.0, 0.0))
    }

    /// Total reflection, Γ = 1 (an ideal intentional mismatch).
    pub fn total() -> Self {
        Self(Complex64::new(1.0, 0.0))
    }

    pub fn value(&self) -> Complex64 {
        self.0
    }
}

/// Effective linewidth and pulled resonance frequency of a resonator on a
/// mismatched feedline. Both in MHz.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinewidthResult {
    pub kappa_eff: f64,
    pub omega_eff: f64,
}

/// Resonator placement along the feedline, in units of half the resonator
/// wavelength, together with the square root of the permittivity ratio
/// between feedline and resonator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PositionSpec {
    pub x_over_half_lambda: f64,
    pub eps_ratio_sqrt: f64,
}

impl PositionSpec {
    pub fn new(x_over_half_lambda: f64, eps_ratio_sqrt: f64) -> Result<Self> {
        if !(x_over_half_lambda >= 0.0) {
            return Err(Error::InvalidInput(format!(
                "position {x_over_half_lambda} must be >= 0"
            )));
        }
        if !(eps_ratio_sqrt > 0.0) {
            return Err(Error::InvalidInput(format!(
                "permittivity ratio sqrt {eps_ratio_sqrt} must be > 0"
            )));
        }
        Ok(Self {
            x_over_half_lambda,
            eps_ratio_sqrt,
        })
    }
}

/// Effective linewidth and frequency for arbitrary passive reflections at
/// both feedline ends.
///
/// `kappa_r` is the bare (maximum) linewidth and `omega_r` the bare resonance
/// frequency, both MHz. Fails when `|1 − Γ1Γ2|` drops below
/// [`SINGULARITY_THRESHOLD`].
pub fn effective_linewidth_general(
    kappa_r: f64,
    omega_r: f64,
    gamma1: ReflectionCoefficient,
    gamma2: ReflectionCoefficient,
) -> Result<LinewidthResult> {
    if !(kappa_r > 0.0) {
        return Err(Error::InvalidInput(format!("kappa_r {kappa_r} must be > 0")));
    }
    let g1 = gamma1.value();
    let g2 = gamma2.value();
    let denom = Complex64::new(1.0, 0.0) - g1 * g2;
    if denom.norm() < SINGULARITY_THRESHOLD {
        return Err(Error::SingularConfiguration(denom.norm()));
    }
    let kappa_eff = kappa_r / 2.0 * (((1.0 + g1) * (1.0 + g2)) / denom).re;
    let omega_eff =
        omega_r + kappa_r / 4.0 * ((1.0 - g1 - g2 - 3.0 * g1 * g2) / denom).im;
    Ok(LinewidthResult {
        kappa_eff,
        omega_eff,
    })
}

/// Worst-case ratio of largest to smallest effective linewidth over cable
/// phase when the feedline input carries a total intentional reflection:
/// the square of the VSWR of the output-side mismatch.
pub fn spread_intentional_mismatch(gamma_out_mag: f64) -> Result<f64> {
    let v = vswr(gamma_out_mag)?;
    Ok(v * v)
}

/// Same worst-case ratio with a matched feedline input: the VSWR itself,
/// a square-root reduction relative to [`spread_intentional_mismatch`].
pub fn spread_no_mismatch(gamma_out_mag: f64) -> Result<f64> {
    vswr(gamma_out_mag)
}

fn vswr(gamma_out_mag: f64) -> Result<f64> {
    if !(gamma_out_mag >= 0.0) || gamma_out_mag >= 1.0 {
        return Err(Error::PassivityViolation(gamma_out_mag));
    }
    Ok((1.0 + gamma_out_mag) / (1.0 - gamma_out_mag))
}

/// Fabricated linewidth of a resonator placed a distance `x` from a total
/// input reflection, given a feedline/resonator permittivity ratio:
///
/// ```text
/// κ̃_r(x) = κ_r0·[½·cos(2π·(x/(λ_r/2))·√(ε_feed/ε_res)) + ½]
/// ```
///
/// `kappa_r0` is the largest possible linewidth; the result lies in
/// `[0, kappa_r0]`. The permittivity ratio is taken as not affecting
/// `kappa_r0` itself.
pub fn kappa_vs_position(kappa_r0: f64, pos: PositionSpec) -> Result<f64> {
    if !(kappa_r0 > 0.0) {
        return Err(Error::InvalidInput(format!(
            "kappa_r0 {kappa_r0} must be > 0"
        )));
    }
    let phase = TAU * pos.x_over_half_lambda * pos.eps_ratio_sqrt;
    Ok(kappa_r0 * (0.5 * phase.cos() + 0.5))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};

    fn rc(re: f64, im: f64) -> ReflectionCoefficient {
        ReflectionCoefficient::new(Complex64::new(re, im)).unwrap()
    }

    #[test]
    fn matched_both_ends_halves_the_coupling() {
        let r = effective_linewidth_general(
            10.0,
            7000.0,
            ReflectionCoefficient::matched(),
            ReflectionCoefficient::matched(),
        )
        .unwrap();
        assert_relative_eq!(r.kappa_eff, 5.0, max_relative = 1e-15);
        // 1 - G1 - G2 - 3 G1 G2 is real here, so no frequency pull either.
        assert_relative_eq!(r.omega_eff, 7000.0, max_relative = 1e-15);
    }

    #[test]
    fn total_input_reflection_with_matched_output() {
        let r = effective_linewidth_general(
            10.0,
            7000.0,
            ReflectionCoefficient::total(),
            ReflectionCoefficient::matched(),
        )
        .unwrap();
        assert_relative_eq!(r.kappa_eff, 10.0, max_relative = 1e-15);
    }

    #[test]
    fn total_input_reflection_with_output_mismatch_at_zero_phase() {
        // Independent oracle: with G1 = 1 and G2 = |G|e^{-2j0}, the general
        // expression reduces to kappa_r (1-|G|^2)/(1-2|G|cos(2θ)+|G|^2).
        let mag = 0.1585;
        let oracle = 10.0 * (1.0 - mag * mag) / (1.0 - 2.0 * mag + mag * mag);
        let r = effective_linewidth_general(
            10.0,
            7000.0,
            ReflectionCoefficient::total(),
            rc(mag, 0.0),
        )
        .unwrap();
        assert_relative_eq!(r.kappa_eff, oracle, max_relative = 1e-12);
        assert_relative_eq!(r.kappa_eff, 13.767_082_590_612, max_relative = 1e-10);
    }

    #[test]
    fn general_form_matches_single_sided_specializations_over_phase() {
        // G1 = 1, G2 = |G| e^{-2jθ}: κ̃ = κ (1-|G|²)/(1-2|G|cos2θ+|G|²).
        // G1 = 0, same G2:           κ̃ = κ (1+|G|cos2θ)/2.
        let mag = 0.37;
        for k in 0..64 {
            let theta = k as f64 * std::f64::consts::PI / 32.0;
            let g2 = ReflectionCoefficient::new(Complex64::from_polar(mag, -2.0 * theta)).unwrap();
            let with_mismatch =
                effective_linewidth_general(8.0, 6000.0, ReflectionCoefficient::total(), g2)
                    .unwrap()
                    .kappa_eff;
            let oracle1 = 8.0 * (1.0 - mag * mag)
                / (1.0 - 2.0 * mag * (2.0 * theta).cos() + mag * mag);
            assert_relative_eq!(with_mismatch, oracle1, max_relative = 1e-11);

            let without =
                effective_linewidth_general(8.0, 6000.0, ReflectionCoefficient::matched(), g2)
                    .unwrap()
                    .kappa_eff;
            let oracle2 = 8.0 * (1.0 + mag * (2.0 * theta).cos()) / 2.0;
            assert_relative_eq!(without, oracle2, max_relative = 1e-11);
        }
    }

    #[test]
    fn phase_extremes_and_spread_ratio_without_mismatch() {
        // Max over θ at θ = 0, min at θ = π/2; their ratio is the VSWR.
        let mag = 0.2;
        let kappa = |theta: f64| {
            let g1 = ReflectionCoefficient::new(Complex64::from_polar(mag, -2.0 * theta)).unwrap();
            effective_linewidth_general(10.0, 7000.0, g1, ReflectionCoefficient::matched())
                .unwrap()
                .kappa_eff
        };
        let max = kappa(0.0);
        let min = kappa(std::f64::consts::FRAC_PI_2);
        for k in 1..32 {
            let v = kappa(k as f64 * std::f64::consts::PI / 64.0);
            assert!(v <= max + 1e-12 && v >= min - 1e-12);
        }
        assert_relative_eq!(max / min, spread_no_mismatch(mag).unwrap(), epsilon = 1e-9);
    }

    #[test]
    fn singular_configuration_is_rejected() {
        let err = effective_linewidth_general(
            10.0,
            7000.0,
            ReflectionCoefficient::total(),
            ReflectionCoefficient::total(),
        )
        .unwrap_err();
        assert!(matches!(err, Error::SingularConfiguration(_)));
    }

    #[test]
    fn spread_values() {
        assert_relative_eq!(
            spread_intentional_mismatch(0.1585).unwrap(),
            1.895_325_630_567,
            max_relative = 1e-10
        );
        assert_relative_eq!(spread_intentional_mismatch(0.0).unwrap(), 1.0);
        assert_relative_eq!(spread_intentional_mismatch(0.5).unwrap(), 9.0);
        assert_relative_eq!(
            spread_no_mismatch(0.1585).unwrap(),
            1.376_708_259_061,
            max_relative = 1e-10
        );
        assert_relative_eq!(spread_no_mismatch(0.0).unwrap(), 1.0);
    }

    #[test]
    fn spread_domain_errors() {
        assert!(spread_intentional_mismatch(1.0).is_err());
        assert!(spread_no_mismatch(1.2).is_err());
        assert!(spread_no_mismatch(-0.1).is_err());
    }

    #[test]
    fn intentional_spread_is_square_of_matched_spread() {
        for k in 0..100 {
            let g = 0.99 * k as f64 / 99.0;
            let eq1 = spread_intentional_mismatch(g).unwrap();
            let eq2 = spread_no_mismatch(g).unwrap();
            assert!((eq1 - eq2 * eq2).abs() <= 1e-12 * eq1.max(1.0));
        }
    }

    #[test]
    fn kappa_position_examples() {
        let ideal = PositionSpec::new(0.0, 1.0).unwrap();
        assert_relative_eq!(kappa_vs_position(10.0, ideal).unwrap(), 10.0);
        let one = PositionSpec::new(1.0, 1.0).unwrap();
        assert_relative_eq!(kappa_vs_position(10.0, one).unwrap(), 10.0, epsilon = 1e-12);
        let off = PositionSpec::new(5.0, 1.015).unwrap();
        assert_relative_eq!(
            kappa_vs_position(10.0, off).unwrap(),
            9.455_032_620_942,
            max_relative = 1e-10
        );
    }

    #[test]
    fn kappa_position_is_periodic_in_position() {
        // Period 1/ratio in units of half-wavelengths.
        for &ratio in &[0.8, 1.0, 1.3] {
            let period = 1.0 / ratio;
            for k in 0..20 {
                let x = 0.37 * k as f64;
                let a = kappa_vs_position(10.0, PositionSpec::new(x, ratio).unwrap()).unwrap();
                let b =
                    kappa_vs_position(10.0, PositionSpec::new(x + period, ratio).unwrap()).unwrap();
                assert_relative_eq!(a, b, epsilon = 1e-9);
            }
        }
    }

    #[test]
    fn effective_linewidth_is_nonnegative_for_passive_terminations() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0x6e65_7470);
        let mut tested = 0;
        while tested < 10_000 {
            let g1 = Complex64::from_polar(rng.gen::<f64>(), rng.gen::<f64>() * TAU);
            let g2 = Complex64::from_polar(rng.gen::<f64>(), rng.gen::<f64>() * TAU);
            if (Complex64::new(1.0, 0.0) - g1 * g2).norm() <= 1e-9 {
                continue;
            }
            let r = effective_linewidth_general(
                10.0,
                7000.0,
                ReflectionCoefficient::new(g1).unwrap(),
                ReflectionCoefficient::new(g2).unwrap(),
            )
            .unwrap();
            assert!(
                r.kappa_eff >= -1e-9,
                "kappa_eff {} negative for G1={g1}, G2={g2}",
                r.kappa_eff
            );
            tested += 1;
        }
    }

    #[test]
    fn effective_linewidth_bounded_for_moderate_reflections() {
        // κ̃ ≤ 2κ holds when both magnitudes stay ≤ 0.5. It does NOT hold for
        // arbitrary passive pairs: two strong reflections form a cavity that
        // resonantly enhances the decay (Γ1 = Γ2 = 0.9 gives κ̃ = 9.5κ).
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0x6e65_7471);
        for _ in 0..10_000 {
            let g1 = Complex64::from_polar(0.5 * rng.gen::<f64>(), rng.gen::<f64>() * TAU);
            let g2 = Complex64::from_polar(0.5 * rng.gen::<f64>(), rng.gen::<f64>() * TAU);
            let r = effective_linewidth_general(
                10.0,
                7000.0,
                ReflectionCoefficient::new(g1).unwrap(),
                ReflectionCoefficient::new(g2).unwrap(),
            )
            .unwrap();
            assert!(
                r.kappa_eff <= 20.0 + 1e-9,
                "kappa_eff {} above 2*kappa for G1={g1}, G2={g2}",
                r.kappa_eff
            );
        }
        let strong = effective_linewidth_general(10.0, 7000.0, rc(0.9, 0.0), rc(0.9, 0.0))
            .unwrap()
            .kappa_eff;
        assert_relative_eq!(strong, 95.0, max_relative = 1e-12);
    }

    #[test]
    fn reflection_from_db_phase() {
        let g = ReflectionCoefficient::from_db_phase(-16.0, 0.0).unwrap();
        assert_relative_eq!(g.value().re, 0.158_489_319_246, max_relative = 1e-10);
        assert!(ReflectionCoefficient::from_db_phase(1.0, 0.0).is_err());
    }
}
