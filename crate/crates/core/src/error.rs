use thiserror::Error;

/// Errors produced by model construction and solving.
#[derive(Debug, Error)]
pub enum ModelError {
    /// A configuration value violates its documented invariant.
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    /// Tier index outside `1..=J`.
    #[error("tier index {index} out of range (network has {count} tiers)")]
    TierOutOfRange { index: usize, count: usize },

    /// No base stations available where at least one is required.
    #[error("empty network: no base stations in the simulation window")]
    EmptyNetwork,

    /// Cell state that the queueing identities cannot be derived from.
    #[error("inconsistent cell state: {0}")]
    InconsistentCell(String),
}
