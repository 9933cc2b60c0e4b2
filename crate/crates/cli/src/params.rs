//! Subcommand parameters, read from an optional TOML file and overridden by
//! command-line flags.

use std::path::Path;

use serde::{Deserialize, Serialize};

/// Configuration problem reported with exit code 2.
#[derive(Debug)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

/// Declares a parameter record whose fields are all optional, so that a file
/// section and a set of flags can be layered, plus accessors that fall back
/// to the defaults.
macro_rules! params {
    ($(#[$meta:meta])* $name:ident { $($(#[doc = $doc:literal])* $field:ident : $ty:ty = $default:expr,)* }) => {
        $(#[$meta])*
        #[derive(Debug, Clone, Default, PartialEq, clap::Args, Deserialize, Serialize)]
        #[serde(deny_unknown_fields, rename_all = "kebab-case")]
        pub struct $name {
            $(
                $(#[doc = $doc])*
                #[arg(long, value_delimiter = ',')]
                pub $field: Option<$ty>,
            )*
        }

        impl $name {
            $(
                pub fn $field(&self) -> $ty {
                    self.$field.clone().unwrap_or_else(|| $default)
                }
            )*
        }

        impl Params for $name {
            fn layered_over(self, base: Self) -> Self {
                Self { $($field: self.$field.or(base.$field),)* }
            }

            fn resolved(&self) -> Self {
                Self { $($field: Some(self.$field()),)* }
            }

            fn validate(&self) -> Result<(), ConfigError> {
                $(
                    if is_empty_grid(&self.$field()) {
                        return Err(ConfigError(format!("{} must not be empty", stringify!($field))));
                    }
                )*
                Ok(())
            }
        }
    };
}

/// Layering and validation shared by all parameter records.
pub trait Params: Sized + Default + Serialize {
    /// Fields set here take precedence over those of `base`.
    fn layered_over(self, base: Self) -> Self;
    /// Every field set to its effective value.
    fn resolved(&self) -> Self;
    /// Rejects empty grids.
    fn validate(&self) -> Result<(), ConfigError>;
}

trait GridLike {
    fn grid_len(&self) -> Option<usize>;
}

impl<T> GridLike for Vec<T> {
    fn grid_len(&self) -> Option<usize> {
        Some(self.len())
    }
}

macro_rules! scalar_grid_like {
    ($($t:ty),*) => { $(impl GridLike for $t { fn grid_len(&self) -> Option<usize> { None } })* };
}
scalar_grid_like!(f64, usize, u64, String);

fn is_empty_grid<T: GridLike>(v: &T) -> bool {
    v.grid_len() == Some(0)
}

fn range(lo: usize, hi: usize) -> Vec<usize> {
    (lo..=hi).collect()
}

params!(
    /// γ of two-outcome bit-flip readout against its closed form.
    GammaParams {
        /// Probabilities 𝗉 of correct readout of the first state.
        p: Vec<f64> = vec![0.6, 0.75, 0.9, 0.95, 0.99],
        /// Probabilities 𝗊 of correct readout of the second state.
        q: Vec<f64> = vec![0.6, 0.75, 0.9, 0.95, 0.99],
        /// Random restarts of the γ search.
        restarts: usize = 32,
    }
);

params!(
    /// Exact and binned FI of Poissonian NV readout.
    NvFiParams {
        /// Mean photon counts of the bright state.
        lambda0: Vec<f64> = vec![5.0, 10.0, 15.0, 20.0, 27.0, 35.0, 42.0, 50.0],
        /// Ratio λ₁/λ₀ of dim to bright mean counts.
        ratio: f64 = 0.65,
        /// Largest photon count retained.
        cutoff: usize = 100,
        /// Largest discarded tail mass accepted at the cutoff.
        tail_tol: f64 = 1e-9,
    }
);

params!(
    /// Optimal k-bin schemes for NV readout.
    BinningParams {
        lambda0: Vec<f64> = vec![27.0, 50.0],
        ratio: f64 = 0.65,
        /// Bin counts to optimise.
        bins: Vec<usize> = vec![2, 3],
        cutoff: usize = 100,
        tail_tol: f64 = 1e-9,
    }
);

params!(
    /// Moment-hierarchy lower bounds for NV readout.
    MomentsParams {
        lambda0: Vec<f64> = vec![27.0],
        ratio: f64 = 0.65,
        /// Readout angle φ; omitted means the FI-optimal angle.
        phi: f64 = f64::NAN,
        /// Hierarchy orders K to evaluate.
        orders: Vec<usize> = vec![1, 2, 3, 4],
        cutoff: usize = 100,
        tail_tol: f64 = 1e-9,
    }
);

params!(
    /// GHZ probes with global control under bit-flip readout.
    GhzSweepParams {
        p: f64 = 0.95,
        q: f64 = 0.9,
        /// Largest probe number.
        n_max: usize = 50,
        /// Weight of the GHZ state in a mixture with white noise.
        r: f64 = 0.7,
    }
);

params!(
    /// Local-control estimators against the CE bounds.
    LocalSweepParams {
        p: f64 = 0.95,
        q: f64 = 0.9,
        /// Probe numbers.
        n: Vec<usize> = vec![2, 3, 4, 5, 6, 10, 20, 50, 100],
        /// Largest N for which the brute-force search runs.
        brute_force_max_n: usize = 6,
        /// Restarts of the brute-force search.
        restarts: usize = 64,
        /// Polar control angles tried for the finite CE bound.
        control_angles: usize = 9,
    }
);

params!(
    /// Finite and asymptotic CE bounds over N.
    CeSweepParams {
        /// Readout model: "bit-flip" or "photonic".
        model: String = "bit-flip".to_string(),
        p: f64 = 0.95,
        q: f64 = 0.9,
        eta: f64 = 0.9,
        p_dark: f64 = 0.1,
        n: Vec<usize> = vec![1, 2, 5, 10, 20, 50, 100, 200, 500, 1000],
        /// Iteration cap of each solver stage.
        max_iters: u64 = 3000,
    }
);

params!(
    /// Phase-covariance feasibility and channel QFIs of bit-flip readout.
    CovarianceAuditParams {
        p: Vec<f64> = vec![0.6, 0.8, 0.9, 0.95],
        q: Vec<f64> = vec![0.6, 0.8, 0.9, 0.95],
        /// Seesaw restarts per channel.
        restarts: usize = 4,
        /// Iteration cap of each seesaw run.
        max_iters: usize = 500,
    }
);

params!(
    /// N00N-sector γ of lossy photodetection with dark counts.
    PhotonSweepParams {
        n: Vec<usize> = range(1, 50),
        eta: Vec<f64> = vec![0.1],
        p_dark: Vec<f64> = vec![0.0, 0.01],
    }
);

/// Contents of a configuration file: a seed and one optional section per
/// subcommand.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct FileConfig {
    pub seed: Option<u64>,
    pub gamma: Option<GammaParams>,
    pub nv_fi: Option<NvFiParams>,
    pub binning: Option<BinningParams>,
    pub moments: Option<MomentsParams>,
    pub ghz_sweep: Option<GhzSweepParams>,
    pub local_sweep: Option<LocalSweepParams>,
    pub ce_sweep: Option<CeSweepParams>,
    pub covariance_audit: Option<CovarianceAuditParams>,
    pub photon_sweep: Option<PhotonSweepParams>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError(format!("cannot read config {}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| ConfigError(format!("invalid config {}: {e}", path.display())))
    }
}
