//! The coupled cell-load fixed point.
//!
//! Each cell's load is the traffic density times the integral of the
//! reciprocal peak rate over its pixels; the SINR inside the integral
//! weights every interferer by `min(theta, 1)` (pilot-corrected), which
//! couples all cells. The right-hand side is monotone in the load vector as
//! long as the rate map is increasing, so Picard iterations started from
//! `theta = 0` and from `theta = 1` converge to the minimal and maximal
//! solutions respectively. The minimal solution is the canonical answer;
//! the gap between the two tracks is reported so uniqueness can be audited
//! instead of assumed.
//!
//! Loads are stored uncapped (values above 1 mark unstable cells) but feed
//! interference only through `min(theta, 1)`. A hard cap guards divergence
//! for pathological rate inputs.

use crate::cells::CellMap;
use crate::propagation::{interference_weight, LossTable};
use crate::rate::RateFunction;

/// Numeric guard for loads of cells whose rate integral diverges.
pub const LOAD_CAP: f64 = 1e6;

/// Everything the load operator needs about one frozen network realization.
pub struct LoadProblem<'a> {
    pub table: &'a LossTable,
    pub cells: &'a CellMap,
    /// Traffic demand per surface unit, bps per km^2.
    pub rho_bps_per_km2: f64,
    pub rate: &'a dyn RateFunction,
    pub pilot_eps: f64,
    pub noise_mw: f64,
    pub pixel_area_km2: f64,
    /// Convergence and gap metrics are evaluated over these stations only
    /// (observation disc); guard-ring cells iterate but do not gate.
    pub obs_mask: &'a [bool],
}

/// Solver knobs. Plain Picard iteration by default; `relaxation` below 1
/// damps updates for near-critical traffic.
#[derive(Debug, Clone, Copy)]
pub struct SolverSettings {
    pub tolerance: f64,
    pub max_iterations: usize,
    pub relaxation: f64,
}

impl Default for SolverSettings {
    fn default() -> Self {
        Self {
            tolerance: 1e-4,
            max_iterations: 200,
            relaxation: 1.0,
        }
    }
}

/// Per-iteration diagnostics of the two tracks.
#[derive(Debug, Clone, Copy)]
pub struct IterationDiag {
    pub iteration: usize,
    /// Sup-norm change of the lower track over observed cells.
    pub change_lower: f64,
    /// Sup-norm change of the upper track over observed cells.
    pub change_upper: f64,
    /// Sup-norm distance between the tracks over observed cells.
    pub gap: f64,
    /// Smallest per-cell increment of the lower track (monotone if >= 0).
    pub lower_step_min: f64,
    /// Largest per-cell increment of the clamped upper track
    /// (monotone if <= 0).
    pub upper_clamped_step_max: f64,
    /// Largest amount by which the lower track exceeds the upper track
    /// (ordering intact if <= 0).
    pub order_violation: f64,
}

/// Outcome of the two-track iteration.
#[derive(Debug, Clone)]
pub struct FixedPointReport {
    pub iterations: usize,
    /// Last sup-norm change of the lower (canonical) track.
    pub sup_norm_residual: f64,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    /// Sup-norm distance between the final tracks over observed cells.
    pub uniqueness_gap: f64,
    pub converged: bool,
    /// Gap within 10x tolerance: numerically unique solution.
    pub unique_within_tolerance: bool,
    pub history: Vec<IterationDiag>,
}

/// One application of the load map: per cell, the Riemann sum of
/// `rho * R^-1(SINR)` over its pixels. The input enters only through
/// `min(theta, 1)`, so entries above 1 are equivalent.
pub fn load_operator(p: &LoadProblem, theta: &[f64]) -> Vec<f64> {
    debug_assert_eq!(theta.len(), p.table.n_stations());
    let weights: Vec<f64> = theta
        .iter()
        .map(|&t| interference_weight(t, p.pilot_eps))
        .collect();
    let mut integral = vec![0.0; p.table.n_stations()];
    for pixel in 0..p.table.n_pixels() {
        let serving = p.cells.serving[pixel];
        let s = p.table.sinr_weighted(pixel, serving, &weights, p.noise_mw);
        integral[serving] += p.rate.inverse_rate(s);
    }
    integral
        .iter()
        .map(|v| (v * p.rho_bps_per_km2 * p.pixel_area_km2).min(LOAD_CAP))
        .collect()
}

/// Solve the cell-load equations with two Picard tracks, from the empty
/// network (`theta = 0`, nondecreasing) and from full interference
/// (`theta = 1`, clamped image nonincreasing). Returns the minimal solution
/// and a report carrying the maximal track, the uniqueness gap and
/// per-iteration diagnostics.
pub fn solve_fixed_point(p: &LoadProblem, settings: &SolverSettings) -> (Vec<f64>, FixedPointReport) {
    assert!(settings.tolerance > 0.0, "tolerance must be positive");
    assert!(settings.max_iterations >= 1);
    assert!(
        settings.relaxation > 0.0 && settings.relaxation <= 1.0,
        "relaxation must lie in (0, 1]"
    );
    let n = p.table.n_stations();
    let omega = settings.relaxation;

    let mut lower = vec![0.0; n];
    let mut upper = vec![1.0; n];
    let mut conv_lower = false;
    let mut conv_upper = false;
    let mut history = Vec::new();
    let mut residual = f64::INFINITY;
    let mut iterations = 0;

    for it in 1..=settings.max_iterations {
        iterations = it;
        let mut change_lower = 0.0;
        let mut lower_step_min = 0.0f64;
        if !conv_lower {
            let image = load_operator(p, &lower);
            let mut next = Vec::with_capacity(n);
            change_lower = 0.0;
            lower_step_min = f64::INFINITY;
            for i in 0..n {
                let v = (1.0 - omega) * lower[i] + omega * image[i];
                if p.obs_mask[i] {
                    change_lower = f64::max(change_lower, (v - lower[i]).abs());
                    lower_step_min = lower_step_min.min(v - lower[i]);
                }
                next.push(v);
            }
            if lower_step_min == f64::INFINITY {
                lower_step_min = 0.0;
            }
            lower = next;
            residual = change_lower;
            conv_lower = change_lower < settings.tolerance;
        }

        let mut change_upper = 0.0;
        let mut upper_clamped_step_max = 0.0f64;
        if !conv_upper {
            let image = load_operator(p, &upper);
            let mut next = Vec::with_capacity(n);
            change_upper = 0.0;
            upper_clamped_step_max = f64::NEG_INFINITY;
            for i in 0..n {
                let v = (1.0 - omega) * upper[i] + omega * image[i];
                if p.obs_mask[i] {
                    change_upper = f64::max(change_upper, (v - upper[i]).abs());
                    upper_clamped_step_max =
                        upper_clamped_step_max.max(v.min(1.0) - upper[i].min(1.0));
                }
                next.push(v);
            }
            if upper_clamped_step_max == f64::NEG_INFINITY {
                upper_clamped_step_max = 0.0;
            }
            upper = next;
            conv_upper = change_upper < settings.tolerance;
        }

        let mut gap = 0.0f64;
        let mut order_violation = f64::NEG_INFINITY;
        for i in 0..n {
            if p.obs_mask[i] {
                gap = gap.max((upper[i] - lower[i]).abs());
                order_violation = order_violation.max(lower[i] - upper[i]);
            }
        }
        if order_violation == f64::NEG_INFINITY {
            order_violation = 0.0;
        }
        history.push(IterationDiag {
            iteration: it,
            change_lower,
            change_upper,
            gap,
            lower_step_min,
            upper_clamped_step_max,
            order_violation,
        });
        if conv_lower && conv_upper {
            break;
        }
    }

    let gap = history.last().map_or(0.0, |d| d.gap);
    let report = FixedPointReport {
        iterations,
        sup_norm_residual: residual,
        lower: lower.clone(),
        upper,
        uniqueness_gap: gap,
        converged: conv_lower && conv_upper,
        unique_within_tolerance: gap < 10.0 * settings.tolerance,
        history,
    };
    (lower, report)
}
