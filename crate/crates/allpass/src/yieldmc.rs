//! Monte Carlo yield analysis of linewidth spread under permittivity
//! non-uniformity, and the spread-vs-mismatch curves.
//!
//! Each fabricated resonator sits a distance `x` (in units of λ_r/2) from the
//! intentional mismatch; its permittivity-ratio error `√(ε_feed/ε_res)` is
//! drawn from `Normal(1, σ)` independently per resonator, and the linewidth
//! follows [`crate::netphys::kappa_vs_position`]. Farther resonators see a
//! longer lever arm on the standing wave, so their linewidth distributions
//! broaden until multiplexing many of them within a tolerance band becomes a
//! losing bet.
//!
//! Determinism is a hard contract: trial `t` draws from a substream derived
//! only from `(seed, t)`, so results are bitwise identical across runs and
//! across any number of worker threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::f64::consts::TAU;
use std::sync::{Mutex, OnceLock};

use crate::error::{Error, Result};
use crate::netphys;

/// Seed of the calibration run that pins the per-position target mean μ_κ.
/// Fixed and independent of the user seed so that targets never move.
const CALIBRATION_SEED: u64 = 0x0a11_9a55_ca71_b255;

/// Draws in the μ_κ calibration run.
const CALIBRATION_DRAWS: usize = 1_000_000;

/// Monte Carlo settings for the linewidth yield analysis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct YieldConfig {
    /// Relative standard deviation of the √(ε_feed/ε_res) error (mean 1).
    pub sigma_rel: f64,
    /// Tolerance band around the per-position mean, relative (e.g. 0.30).
    pub tolerance_rel: f64,
    /// Number of multiplexed resonators.
    pub n_resonators: usize,
    /// Resonators sharing each half-wavelength slot along the feedline.
    pub resonators_per_half_lambda: usize,
    /// Monte Carlo trials.
    pub trials: usize,
    /// Base seed of the per-trial substreams.
    pub seed: u64,
}

impl YieldConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.sigma_rel >= 0.0) {
            return Err(Error::InvalidInput(format!(
                "sigma_rel {} must be >= 0",
                self.sigma_rel
            )));
        }
        if !(self.tolerance_rel > 0.0 && self.tolerance_rel < 1.0) {
            return Err(Error::InvalidInput(format!(
                "tolerance_rel {} must lie in (0, 1)",
                self.tolerance_rel
            )));
        }
        if self.trials == 0 {
            return Err(Error::InvalidInput("trials must be >= 1".into()));
        }
        if self.n_resonators == 0 {
            return Err(Error::InvalidInput("n_resonators must be >= 1".into()));
        }
        if self.resonators_per_half_lambda == 0 {
            return Err(Error::InvalidInput(
                "resonators_per_half_lambda must be >= 1".into(),
            ));
        }
        Ok(())
    }

    /// Feedline position of resonator `i` (1-indexed), in λ_r/2 units:
    /// `ceil(i / resonators_per_half_lambda)`.
    pub fn position_of(&self, i: usize) -> f64 {
        i.div_ceil(self.resonators_per_half_lambda) as f64
    }
}

/// Outcome of a yield run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct YieldResult {
    /// Probability that every resonator lands within tolerance of its
    /// per-position target mean.
    pub p_all_within: f64,
    /// Per-trial κ̃/κ_r0 samples (trials × n), populated on request.
    pub per_resonator_kappa_samples: Option<Vec<Vec<f64>>>,
}

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9e37_79b9_7f4a_7c15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Counter-based substream for one trial: the ChaCha key is a splitmix64
/// expansion of `(seed, trial)`, so streams depend only on those two values
/// and never on execution order.
fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut state = seed;
    let mixed = splitmix64(&mut state) ^ trial.wrapping_mul(0xd134_2543_de82_ef95);
    let mut key_state = mixed;
    let mut key = [0u8; 32];
    for chunk in key.chunks_exact_mut(8) {
        chunk.copy_from_slice(&splitmix64(&mut key_state).to_le_bytes());
    }
    ChaCha8Rng::from_seed(key)
}

fn kappa_ratio(x_over_half_lambda: f64, eps_ratio_sqrt: f64) -> f64 {
    0.5 * (TAU * x_over_half_lambda * eps_ratio_sqrt).cos() + 0.5
}

/// κ̃/κ_r0 samples for a resonator at one position: one normal permittivity
/// draw per trial, deterministic in `(seed, trial)`.
pub fn kappa_samples_at_position(
    x_over_half_lambda: f64,
    sigma_rel: f64,
    trials: usize,
    seed: u64,
) -> Result<Vec<f64>> {
    if trials == 0 {
        return Err(Error::InvalidInput("trials must be >= 1".into()));
    }
    netphys::PositionSpec::new(x_over_half_lambda, 1.0)?;
    let normal = Normal::new(1.0, sigma_rel)
        .map_err(|e| Error::InvalidInput(format!("bad sigma_rel {sigma_rel}: {e}")))?;
    Ok((0..trials as u64)
        .map(|t| {
            let mut rng = trial_rng(seed, t);
            kappa_ratio(x_over_half_lambda, normal.sample(&mut rng))
        })
        .collect())
}

/// Target mean μ_κ/κ_r0 at one position: the mean of a fixed-seed calibration
/// run. Position-dependent because the mean of the cosine of a scaled
/// Gaussian is; cached per (position, sigma).
pub fn calibrated_mean(x_over_half_lambda: f64, sigma_rel: f64) -> Result<f64> {
    static CACHE: OnceLock<Mutex<HashMap<(u64, u64), f64>>> = OnceLock::new();
    let key = (x_over_half_lambda.to_bits(), sigma_rel.to_bits());
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(&mu) = cache.lock().unwrap().get(&key) {
        return Ok(mu);
    }
    let normal = Normal::new(1.0, sigma_rel)
        .map_err(|e| Error::InvalidInput(format!("bad sigma_rel {sigma_rel}: {e}")))?;
    let mut rng = trial_rng(CALIBRATION_SEED, x_over_half_lambda.to_bits());
    let mut acc = 0.0;
    for _ in 0..CALIBRATION_DRAWS {
        acc += kappa_ratio(x_over_half_lambda, normal.sample(&mut rng));
    }
    let mu = acc / CALIBRATION_DRAWS as f64;
    cache.lock().unwrap().insert(key, mu);
    Ok(mu)
}

/// Probability that all fabricated resonators land within the tolerance band
/// of their position's target mean. Samples are not retained; see
/// [`yield_probability_with_samples`].
pub fn yield_probability(cfg: &YieldConfig) -> Result<YieldResult> {
    run_yield(cfg, false)
}

/// As [`yield_probability`], additionally returning the trials × n matrix of
/// κ̃/κ_r0 samples.
pub fn yield_probability_with_samples(cfg: &YieldConfig) -> Result<YieldResult> {
    run_yield(cfg, true)
}

fn run_yield(cfg: &YieldConfig, keep_samples: bool) -> Result<YieldResult> {
    cfg.validate()?;
    let positions: Vec<f64> = (1..=cfg.n_resonators).map(|i| cfg.position_of(i)).collect();
    let mus = positions
        .iter()
        .map(|&x| calibrated_mean(x, cfg.sigma_rel))
        .collect::<Result<Vec<f64>>>()?;
    let normal = Normal::new(1.0, cfg.sigma_rel)
        .map_err(|e| Error::InvalidInput(format!("bad sigma_rel {}: {e}", cfg.sigma_rel)))?;

    // Each trial depends only on (seed, t); the indexed collect keeps the
    // result identical for any thread count.
    let rows: Vec<(bool, Option<Vec<f64>>)> = (0..cfg.trials as u64)
        .into_par_iter()
        .map(|t| {
            let mut rng = trial_rng(cfg.seed, t);
            let mut all_within = true;
            let mut row = keep_samples.then(|| Vec::with_capacity(positions.len()));
            for (x, mu) in positions.iter().zip(&mus) {
                let kappa = kappa_ratio(*x, normal.sample(&mut rng));
                if (kappa - mu).abs() > cfg.tolerance_rel * mu {
                    all_within = false;
                }
                if let Some(row) = row.as_mut() {
                    row.push(kappa);
                }
            }
            (all_within, row)
        })
        .collect();

    let hits = rows.iter().filter(|(ok, _)| *ok).count();
    let samples = keep_samples.then(|| rows.into_iter().map(|(_, row)| row.unwrap()).collect());
    Ok(YieldResult {
        p_all_within: hits as f64 / cfg.trials as f64,
        per_resonator_kappa_samples: samples,
    })
}

/// One row of the spread-vs-mismatch table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpreadRow {
    pub gamma_out_db: f64,
    /// Worst-case spread with a total input reflection (VSWR²).
    pub spread_eq1: f64,
    /// Worst-case spread with a matched input (VSWR).
    pub spread_eq2: f64,
}

/// Evaluate both spread laws over a grid of output reflection magnitudes in
/// dB. At |Γ_out| ≥ 1 (0 dB and above) both ratios diverge and the row holds
/// +inf.
pub fn spread_curves(gamma_out_db_grid: &[f64]) -> Vec<SpreadRow> {
    gamma_out_db_grid
        .iter()
        .map(|&db| {
            let mag = 10f64.powf(db / 20.0);
            let (eq1, eq2) = if mag < 1.0 {
                (
                    netphys::spread_intentional_mismatch(mag).expect("mag in [0,1)"),
                    netphys::spread_no_mismatch(mag).expect("mag in [0,1)"),
                )
            } else {
                (f64::INFINITY, f64::INFINITY)
            };
            SpreadRow {
                gamma_out_db: db,
                spread_eq1: eq1,
                spread_eq2: eq2,
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn cfg(n: usize, trials: usize) -> YieldConfig {
        YieldConfig {
            sigma_rel: 0.015,
            tolerance_rel: 0.30,
            n_resonators: n,
            resonators_per_half_lambda: 2,
            trials,
            seed: 7,
        }
    }

    #[test]
    fn placement_rule_two_per_slot() {
        let c = cfg(6, 1);
        let pos: Vec<f64> = (1..=6).map(|i| c.position_of(i)).collect();
        assert_eq!(pos, vec![1.0, 1.0, 2.0, 2.0, 3.0, 3.0]);
    }

    #[test]
    fn zero_sigma_at_integer_positions_gives_exact_unity() {
        let samples = kappa_samples_at_position(3.0, 0.0, 100, 42).unwrap();
        assert!(samples.iter().all(|&k| k == 1.0));
        let r = yield_probability(&YieldConfig {
            sigma_rel: 0.0,
            ..cfg(12, 200)
        })
        .unwrap();
        assert_eq!(r.p_all_within, 1.0);
    }

    #[test]
    fn sample_mean_near_position_two_stays_close_to_target() {
        let samples = kappa_samples_at_position(2.0, 0.015, 100_000, 11).unwrap();
        let mean = samples.iter().sum::<f64>() / samples.len() as f64;
        assert!(
            (0.95..=1.0).contains(&mean),
            "mean {mean} outside [0.95, 1.0]"
        );
    }

    #[test]
    fn spread_grows_with_distance() {
        let near = kappa_samples_at_position(2.0, 0.015, 100_000, 11).unwrap();
        let far = kappa_samples_at_position(10.0, 0.015, 100_000, 11).unwrap();
        let std = |v: &[f64]| {
            let m = v.iter().sum::<f64>() / v.len() as f64;
            (v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / v.len() as f64).sqrt()
        };
        assert!(
            std(&far) > std(&near),
            "std at x=10 ({}) not above std at x=2 ({})",
            std(&far),
            std(&near)
        );
    }

    #[test]
    fn calibrated_mean_matches_the_analytic_gaussian_average() {
        // E[cos(2πm·r)] = exp(−(2πmσ)²/2) for r ~ N(1, σ) at integer m; the
        // calibration run is an independent estimate of the same quantity.
        for &(m, sigma) in &[(1.0, 0.015), (2.0, 0.015), (10.0, 0.015)] {
            let analytic = 0.5 + 0.5 * (-0.5 * (TAU * m * sigma).powi(2)).exp();
            let mu = calibrated_mean(m, sigma).unwrap();
            assert!(
                (mu - analytic).abs() < 5e-4,
                "mu {mu} vs analytic {analytic} at m={m}"
            );
        }
    }

    #[test]
    fn determinism_bitwise_across_runs_and_thread_counts() {
        let c = cfg(8, 4000);
        let a = yield_probability_with_samples(&c).unwrap();
        let b = yield_probability_with_samples(&c).unwrap();
        assert_eq!(a, b);

        let pool1 = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap();
        let pool4 = rayon::ThreadPoolBuilder::new()
            .num_threads(4)
            .build()
            .unwrap();
        let r1 = pool1.install(|| yield_probability_with_samples(&c)).unwrap();
        let r4 = pool4.install(|| yield_probability_with_samples(&c)).unwrap();
        assert_eq!(r1, r4);
        assert_eq!(a, r1);
    }

    #[test]
    fn probability_is_monotone_in_tolerance() {
        let base = cfg(16, 20_000);
        let mut last = 0.0;
        for tol in [0.10, 0.20, 0.30, 0.45] {
            let p = yield_probability(&YieldConfig {
                tolerance_rel: tol,
                ..base.clone()
            })
            .unwrap()
            .p_all_within;
            assert!(p >= last, "p({tol}) = {p} dropped below {last}");
            last = p;
        }
    }

    #[test]
    fn probability_declines_with_resonator_count() {
        let mut last = 1.0 + 0.01;
        for n in [2, 10, 20, 30] {
            let p = yield_probability(&cfg(n, 20_000)).unwrap().p_all_within;
            assert!(
                p <= last + 0.01,
                "p(n={n}) = {p} rose above {last} beyond slack"
            );
            last = p;
        }
    }

    #[test]
    fn spread_curve_rows() {
        let rows = spread_curves(&[-200.0, -16.0, 0.0]);
        assert_relative_eq!(rows[0].spread_eq1, 1.0, epsilon = 1e-9);
        assert_relative_eq!(rows[0].spread_eq2, 1.0, epsilon = 1e-9);
        assert_relative_eq!(rows[1].spread_eq1, 1.895_242_571_834, max_relative = 1e-10);
        assert_relative_eq!(rows[1].spread_eq2, 1.376_677_384_945, max_relative = 1e-10);
        assert!(rows[2].spread_eq1.is_infinite() && rows[2].spread_eq2.is_infinite());
        for row in rows.iter().filter(|r| r.spread_eq1.is_finite()) {
            assert!((row.spread_eq1 - row.spread_eq2 * row.spread_eq2).abs() <= 1e-12);
        }
    }

    #[test]
    fn config_validation() {
        assert!(cfg(8, 100).validate().is_ok());
        assert!(YieldConfig {
            tolerance_rel: 1.0,
            ..cfg(8, 100)
        }
        .validate()
        .is_err());
        assert!(YieldConfig {
            trials: 0,
            ..cfg(8, 100)
        }
        .validate()
        .is_err());
        assert!(YieldConfig {
            sigma_rel: -0.1,
            ..cfg(8, 100)
        }
        .validate()
        .is_err());
    }
}
