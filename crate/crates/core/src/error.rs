use thiserror::Error;

/// Errors shared by every module of the crate.
#[derive(Debug, Error)]
pub enum Error {
    /// A scalar argument fell outside its allowed range.
    #[error("{name} = {value} is outside {expected}")]
    Domain {
        name: &'static str,
        value: f64,
        expected: &'static str,
    },

    /// Node count outside the supported desk-scale range.
    #[error("node count {0} is outside the supported range {1}")]
    NodeCount(usize, &'static str),

    /// A state was handed to an operation expecting the other mode labeling.
    #[error("state carries {found} mode labeling, expected {expected}")]
    WrongLabeling {
        found: &'static str,
        expected: &'static str,
    },

    /// More than one photon in a single source mode before interference.
    #[error("input mode {mode} holds {count} photons; at most one is allowed")]
    InputModeOverfilled { mode: usize, count: u8 },

    /// The weight table does not cover an occupation present in the state.
    #[error("no weight defined for mode {mode} with occupation {occupation}")]
    MissingWeight { mode: usize, occupation: u8 },

    /// A matrix expected to be Hermitian is not.
    #[error("matrix is not Hermitian (largest asymmetry {0:.3e})")]
    NotHermitian(f64),

    /// A POVM element has spectrum outside [0, 1].
    #[error("eigenvalue {0} lies outside [0, 1]")]
    SpectrumOutOfRange(f64),

    /// Matrix dimension does not match the configured node count.
    #[error("matrix dimension {found} does not match 2^{n_nodes} = {expected}")]
    DimensionMismatch {
        found: usize,
        n_nodes: usize,
        expected: usize,
    },

    /// Pattern-level operation called on a non-success click pattern.
    #[error("station {station} has {clicks} clicks; success patterns need exactly one")]
    NotSuccessPattern { station: usize, clicks: usize },

    /// Requested success probability cannot be met by any valid element.
    #[error("target success probability {target} is outside the supported window [{min:.6}, 1]")]
    InfeasibleTarget { target: f64, min: f64 },

    /// Grid search found no candidate inside the probability window.
    #[error("no grid point reaches success probability {0} within tolerance")]
    EmptyGrid(f64),

    /// A collection argument that must be non-empty was empty.
    #[error("{0} must not be empty")]
    EmptyInput(&'static str),
}

pub type Result<T> = std::result::Result<T, Error>;
