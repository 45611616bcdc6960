//! Per-cell processor-sharing metrics and their network-wide averages.
//!
//! Given traffic demand `rho(X)` and load `theta(X)`, the steady-state
//! characteristics of a cell follow the identity chain
//! `rho_c = rho / theta`, `r = max(rho_c - rho, 0)`, `N = rho / r`,
//! `p = min(theta, 1)`; a cell is stable iff `theta < 1`, and unstable
//! cells carry an infinite mean user count and zero throughput.
//!
//! Network averages are typical-cell expectations estimated over the cells
//! of the observation disc: plain arithmetic means for traffic and load,
//! the indicator form `E[N 1{stable}]` for users (so the spatial Little's
//! law `r_bar = rho_bar * pi_s / n_bar` holds exactly on every sample), and
//! a surface-weighted stable fraction `pi_s` (the volume fraction of the
//! stable part; the cell-count fraction is kept as a secondary output).

use crate::error::ModelError;
use crate::stats::{mean, sample_std};

/// Steady-state characteristics of one cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellMetrics {
    /// Traffic demand rho(X) in bps.
    pub traffic_bps: f64,
    /// Cell load theta(X), dimensionless, possibly above 1.
    pub load: f64,
    /// Critical traffic rho_c(X) in bps.
    pub critical_bps: f64,
    /// Busy probability min(theta, 1).
    pub busy_prob: f64,
    /// Mean number of users; infinite for unstable cells.
    pub mean_users: f64,
    /// Mean user throughput in bps; 0 for unstable cells.
    pub throughput_bps: f64,
    /// theta < 1.
    pub stable: bool,
    /// Tier of the serving station, 1-based.
    pub tier: usize,
}

/// Derive the full metric chain from traffic and load.
///
/// `theta = 0` is accepted only for an empty cell (`rho = 0`), which gets
/// all-zero metrics; positive traffic with zero load is inconsistent.
pub fn cell_metrics(traffic_bps: f64, load: f64, tier: usize) -> Result<CellMetrics, ModelError> {
    if !(traffic_bps >= 0.0) || !(load >= 0.0) {
        return Err(ModelError::InconsistentCell(format!(
            "negative traffic ({traffic_bps}) or load ({load})"
        )));
    }
    if load == 0.0 {
        if traffic_bps > 0.0 {
            return Err(ModelError::InconsistentCell(format!(
                "traffic {traffic_bps} bps with zero load"
            )));
        }
        return Ok(CellMetrics {
            traffic_bps: 0.0,
            load: 0.0,
            critical_bps: 0.0,
            busy_prob: 0.0,
            mean_users: 0.0,
            throughput_bps: 0.0,
            stable: true,
            tier,
        });
    }
    let critical_bps = traffic_bps / load;
    let stable = load < 1.0;
    // rho * (1 - theta) / theta rather than rho_c - rho: no cancellation
    // near theta = 1, so N * r = rho holds to machine precision.
    let (mean_users, throughput_bps) = if stable {
        (load / (1.0 - load), traffic_bps * (1.0 - load) / load)
    } else {
        (f64::INFINITY, 0.0)
    };
    Ok(CellMetrics {
        traffic_bps,
        load,
        critical_bps,
        busy_prob: load.min(1.0),
        mean_users,
        throughput_bps,
        stable,
        tier,
    })
}

/// One cell of one realization, with the bookkeeping the averages need.
#[derive(Debug, Clone)]
pub struct CellRecord {
    pub station_id: usize,
    pub tier: usize,
    pub surface_km2: f64,
    /// Station inside the observation disc.
    pub in_obs: bool,
    pub metrics: CellMetrics,
}

impl CellRecord {
    /// Cells entering the averages: observed and not shadowed out.
    pub fn observed(&self) -> bool {
        self.in_obs && self.surface_km2 > 0.0
    }
}

/// Per-replication estimates for one scope (the whole network or one tier).
#[derive(Debug, Clone, Copy)]
pub struct ScopeEstimate {
    pub n_cells: usize,
    pub mean_traffic_bps: f64,
    pub mean_load: f64,
    /// `E[N 1{stable}]` over the scope's cells.
    pub mean_users_stable: f64,
    /// Surface-weighted stable fraction.
    pub stable_fraction: f64,
    /// Cell-count stable fraction (secondary).
    pub stable_fraction_count: f64,
    /// Little's-law throughput `rho_bar * pi_s / n_bar`; `None` when no
    /// stable users were observed.
    pub mean_user_throughput_bps: Option<f64>,
    /// Total traffic of stable cells, bps.
    pub stable_traffic_bps: f64,
    /// Total mean user count of stable cells.
    pub stable_users: f64,
}

/// Estimate one scope from one replication's cells. `tier = None` pools all
/// tiers. Returns `None` when the scope has no observed cells, so an empty
/// tier contributes no sample rather than a fabricated zero.
pub fn scope_estimate(cells: &[CellRecord], tier: Option<usize>) -> Option<ScopeEstimate> {
    let selected: Vec<&CellRecord> = cells
        .iter()
        .filter(|c| c.observed() && tier.is_none_or(|t| c.tier == t))
        .collect();
    if selected.is_empty() {
        return None;
    }
    let n = selected.len();
    let traffic: Vec<f64> = selected.iter().map(|c| c.metrics.traffic_bps).collect();
    let load: Vec<f64> = selected.iter().map(|c| c.metrics.load).collect();
    let total_surface: f64 = selected.iter().map(|c| c.surface_km2).sum();
    let stable_surface: f64 = selected
        .iter()
        .filter(|c| c.metrics.stable)
        .map(|c| c.surface_km2)
        .sum();
    let stable_count = selected.iter().filter(|c| c.metrics.stable).count();
    let stable_traffic: f64 = selected
        .iter()
        .filter(|c| c.metrics.stable)
        .map(|c| c.metrics.traffic_bps)
        .sum();
    let stable_users: f64 = selected
        .iter()
        .filter(|c| c.metrics.stable)
        .map(|c| c.metrics.mean_users)
        .sum();

    let mean_traffic = mean(&traffic);
    let pi_s = stable_surface / total_surface;
    let n_bar = stable_users / n as f64;
    let throughput = if n_bar > 0.0 {
        Some(mean_traffic * pi_s / n_bar)
    } else {
        None
    };
    Some(ScopeEstimate {
        n_cells: n,
        mean_traffic_bps: mean_traffic,
        mean_load: mean(&load),
        mean_users_stable: n_bar,
        stable_fraction: pi_s,
        stable_fraction_count: stable_count as f64 / n as f64,
        mean_user_throughput_bps: throughput,
        stable_traffic_bps: stable_traffic,
        stable_users,
    })
}

/// Mean and spread of one scope across replications. The `std_*` fields are
/// sample standard deviations over the per-replication estimates (the error
/// bars of the result curves).
#[derive(Debug, Clone, Copy)]
pub struct MetricAverages {
    /// Replications that contributed cells to this scope.
    pub samples: usize,
    pub mean_traffic_bps: f64,
    pub std_traffic_bps: f64,
    pub mean_load: f64,
    pub std_load: f64,
    pub stable_fraction: f64,
    pub std_stable_fraction: f64,
    pub stable_fraction_count: f64,
    pub mean_users_stable: f64,
    pub std_users: f64,
    /// Replications with a defined throughput sample.
    pub throughput_samples: usize,
    pub mean_user_throughput_bps: f64,
    pub std_throughput_bps: f64,
}

/// Typical-cell averages, globally and per tier.
#[derive(Debug, Clone)]
pub struct TierAverages {
    pub global: MetricAverages,
    /// Indexed by tier - 1.
    pub tiers: Vec<MetricAverages>,
}

fn aggregate(estimates: &[ScopeEstimate]) -> MetricAverages {
    let collect = |f: &dyn Fn(&ScopeEstimate) -> f64| -> Vec<f64> {
        estimates.iter().map(f).collect()
    };
    let traffic = collect(&|e| e.mean_traffic_bps);
    let load = collect(&|e| e.mean_load);
    let pi = collect(&|e| e.stable_fraction);
    let pi_count = collect(&|e| e.stable_fraction_count);
    let users = collect(&|e| e.mean_users_stable);
    let thr: Vec<f64> = estimates
        .iter()
        .filter_map(|e| e.mean_user_throughput_bps)
        .collect();
    MetricAverages {
        samples: estimates.len(),
        mean_traffic_bps: mean(&traffic),
        std_traffic_bps: sample_std(&traffic),
        mean_load: mean(&load),
        std_load: sample_std(&load),
        stable_fraction: mean(&pi),
        std_stable_fraction: sample_std(&pi),
        stable_fraction_count: mean(&pi_count),
        mean_users_stable: mean(&users),
        std_users: sample_std(&users),
        throughput_samples: thr.len(),
        mean_user_throughput_bps: mean(&thr),
        std_throughput_bps: sample_std(&thr),
    }
}

/// Aggregate per-replication cell tables into typical-cell averages.
pub fn network_averages(replications: &[Vec<CellRecord>], n_tiers: usize) -> TierAverages {
    let global: Vec<ScopeEstimate> = replications
        .iter()
        .filter_map(|cells| scope_estimate(cells, None))
        .collect();
    let tiers = (1..=n_tiers)
        .map(|t| {
            let est: Vec<ScopeEstimate> = replications
                .iter()
                .filter_map(|cells| scope_estimate(cells, Some(t)))
                .collect();
            aggregate(&est)
        })
        .collect();
    TierAverages {
        global: aggregate(&global),
        tiers,
    }
}
