//! Semi-analytic performance evaluation of large heterogeneous cellular
//! networks.
//!
//! The crate simulates multi-tier Poisson deployments of base stations with
//! spatially correlated log-normal shadowing, partitions the plane into
//! strongest-signal service zones on a pixel grid, solves the coupled
//! cell-load fixed-point equations, and derives processor-sharing QoS
//! metrics per cell and network-wide. A closed-form "mean cell" model of the
//! equivalent homogeneous network provides a fast cross-check of the
//! simulated typical-cell averages.
//!
//! Modules follow the pipeline order:
//!
//! - [`geometry`]: Poisson placement of stations, tier marks, shadowing fields
//! - [`propagation`]: path loss, propagation loss and load-weighted SINR
//! - [`cells`]: strongest-signal service zones and per-cell traffic demand
//! - [`rate`]: Rayleigh-averaged Shannon peak bit-rate and its reciprocal
//! - [`solver`]: the cell-load fixed point with min/max solution tracking
//! - [`metrics`]: per-cell processor-sharing metrics and network averages
//! - [`meancell`]: equivalent homogeneous network and the scalar mean load

pub mod cells;
pub mod error;
pub mod geometry;
pub mod meancell;
pub mod metrics;
pub mod propagation;
pub mod rate;
pub mod rng;
pub mod solver;
pub mod stats;
pub mod units;

pub use error::ModelError;
