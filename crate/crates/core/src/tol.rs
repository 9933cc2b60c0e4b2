//! Tolerance constants shared by every validated constructor and solver.
//!
//! All thresholds live in one record so that invariants can be tightened or
//! relaxed in a single place. `Tolerances::default()` holds the library
//! defaults; routines that accept explicit tolerances take a `&Tolerances`.

/// Centralised numerical tolerances.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Squared-norm deviation allowed for normalised state vectors.
    pub state_norm: f64,
    /// Hermiticity and unit-trace deviation for density matrices.
    pub density: f64,
    /// Most negative eigenvalue accepted for a density matrix.
    pub density_neg_eig: f64,
    /// Orthogonality, completeness and positivity of measurements and Kraus sets.
    pub measurement: f64,
    /// Column-sum deviation of stochastic matrices.
    pub stochastic: f64,
    /// Hermiticity of encoding generators.
    pub generator: f64,
    /// Unitarity of encoding and control unitaries.
    pub unitary: f64,
    /// Eigenvalues in `[-psd_clamp, 0)` are clamped to zero before square roots.
    pub psd_clamp: f64,
    /// Probabilities below this value are treated as zero in Fisher sums.
    pub zero_prob: f64,
    /// Eigenvalues of a density matrix above this value define its support.
    pub support: f64,
    /// Allowed deviation of `sum(dprobs)` from zero.
    pub dprob_sum: f64,
    /// Condition number above which the moment matrix is pseudo-inverted.
    pub moment_cond: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            state_norm: 1e-12,
            density: 1e-12,
            density_neg_eig: 1e-10,
            measurement: 1e-10,
            stochastic: 1e-12,
            generator: 1e-12,
            unitary: 1e-10,
            psd_clamp: 1e-10,
            zero_prob: 1e-14,
            support: 1e-12,
            dprob_sum: 1e-8,
            moment_cond: 1e12,
        }
    }
}

impl Tolerances {
    /// Shared default instance.
    pub const DEFAULT: Tolerances = Tolerances {
        state_norm: 1e-12,
        density: 1e-12,
        density_neg_eig: 1e-10,
        measurement: 1e-10,
        stochastic: 1e-12,
        generator: 1e-12,
        unitary: 1e-10,
        psd_clamp: 1e-10,
        zero_prob: 1e-14,
        support: 1e-12,
        dprob_sum: 1e-8,
        moment_cond: 1e12,
    };
}
