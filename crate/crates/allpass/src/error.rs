//! Crate-wide error type.

/// Errors raised across the toolkit.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// The feedline configuration puts `Γ1·Γ2` on the resonant-cavity pole.
    #[error("singular feedline configuration: |1 - G1*G2| = {0:.3e} below 1e-12")]
    SingularConfiguration(f64),

    /// A reflection coefficient magnitude left the passive range.
    #[error("reflection magnitude {0} outside the passive range")]
    PassivityViolation(f64),

    /// A precondition on plain numeric arguments failed.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// Requested Fock-space product dimension exceeds the configured cap.
    #[error("Hamiltonian dimension {dim} exceeds cap {cap}")]
    DimensionOverflow { dim: usize, cap: usize },

    /// The truncation ladder hit its cap before eigenfrequencies settled.
    #[error("eigenmodes did not settle below {threshold_mhz} MHz/level by {cap} levels")]
    NonConvergence { threshold_mhz: f64, cap: usize },

    /// No eigenstate matched a labeling target with a clear margin.
    #[error("eigenstate labeling ambiguous: overlap margin {margin:.3} < 0.10")]
    LabelingAmbiguity { margin: f64 },

    /// Dispersive formulas evaluated too close to a resonance pole.
    #[error("straddling resonance: delta = {delta} MHz, delta - E_C = {delta_minus_ec} MHz")]
    StraddlingResonance { delta: f64, delta_minus_ec: f64 },

    /// Flux bias at which the Josephson energy vanishes.
    #[error("Josephson energy vanishes at flux {0} (half flux quantum)")]
    FluxDomain(f64),

    /// Degeneracy residual does not change sign over the flux half-period.
    #[error("no all-pass flux point: residual does not change sign on (0, 0.5)")]
    NoRoot,

    /// The simplex search exhausted its budget on every start.
    #[error("fit did not converge within the evaluation budget")]
    FitNonConvergence,

    /// The fit objective carries no parameter information.
    #[error("fit objective is flat; trace carries no parameter information")]
    ResidualFlat,

    /// Fit bounds or initial point are unusable.
    #[error("fit bounds violation: {0}")]
    BoundsViolation(String),
}

pub type Result<T> = std::result::Result<T, Error>;
