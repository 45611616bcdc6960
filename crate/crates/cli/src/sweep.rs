//! The Monte Carlo sweep engine.
//!
//! One replication draws a network snapshot, builds the loss table and cell
//! map once, then solves the load fixed point at every traffic point. The
//! snapshot seed depends only on the replication index, so all sweep points
//! share common random numbers and monotone properties across the sweep
//! hold realization by realization. Replications run in a rayon pool;
//! results are collected in replication order, which keeps the whole
//! pipeline bit-deterministic for a fixed `(config, base_seed)`.

use rayon::prelude::*;

use hetcell_core::cells::{assign_cells, traffic_demand};
use hetcell_core::geometry::sample_network;
use hetcell_core::meancell::{solve_mean_cell, MeanCellSolution};
use hetcell_core::metrics::{cell_metrics, network_averages, CellRecord, TierAverages};
use hetcell_core::propagation::{LossTable, PropagationModel};
use hetcell_core::solver::{solve_fixed_point, IterationDiag, LoadProblem};

use crate::error::CliError;
use crate::scenario::ScenarioConfig;

/// Load solution of one replication at one sweep point.
#[derive(Debug, Clone)]
pub struct PointReplication {
    pub replication: usize,
    pub seed: u64,
    pub converged: bool,
    pub uniqueness_gap: f64,
    pub history: Vec<IterationDiag>,
    pub cells: Vec<CellRecord>,
}

/// Aggregated results of one sweep point.
#[derive(Debug, Clone)]
pub struct SweepPoint {
    pub rho_bar_kbps: f64,
    pub averages: TierAverages,
    pub mean_cell: MeanCellSolution,
    pub replications: Vec<PointReplication>,
    pub all_converged: bool,
    /// A replication failed, aborting this sweep point.
    pub failed: bool,
}

#[derive(Debug, Clone)]
pub struct SweepOutcome {
    pub points: Vec<SweepPoint>,
    pub n_tiers: usize,
    pub any_nonconverged: bool,
    pub any_failed: bool,
    /// Replication-level failures as (replication, message).
    pub failures: Vec<(usize, String)>,
}

/// Run the full sweep: replications x traffic points, plus the mean-cell
/// solution at every point.
pub fn run_sweep(cfg: &ScenarioConfig) -> Result<SweepOutcome, CliError> {
    cfg.validate()?;
    if cfg.rho_sweep_kbps.is_empty() {
        return Err(CliError::Config("traffic sweep is empty".into()));
    }
    let geometry = cfg.geometry();
    let lambda = geometry.total_intensity();
    let rate = cfg.make_rate();
    let solver = cfg.solver_settings();
    let rhos_bps_km2: Vec<f64> = cfg
        .rho_sweep_kbps
        .iter()
        .map(|kbps| kbps * 1000.0 * lambda)
        .collect();

    let runs: Vec<Result<Vec<PointReplication>, (usize, String)>> = (0..cfg.replications)
        .into_par_iter()
        .map(|rep| {
            let seed = cfg.replication_seed(rep);
            run_replication(cfg, rep, seed, &rhos_bps_km2, rate.as_ref(), &solver)
                .map_err(|msg| (rep, msg))
        })
        .collect();

    let mut failures = Vec::new();
    let mut ok_runs = Vec::new();
    for r in runs {
        match r {
            Ok(run) => ok_runs.push(run),
            Err(f) => failures.push(f),
        }
    }
    let any_failed = !failures.is_empty();

    let mc_settings = cfg.meancell_settings();
    let mean_cells: Vec<MeanCellSolution> = rhos_bps_km2
        .iter()
        .map(|&rho| solve_mean_cell(&geometry, rho, rate.as_ref(), cfg.pilot_eps, &mc_settings))
        .collect::<Result<_, _>>()?;

    let n_tiers = geometry.n_tiers();
    let mut points = Vec::with_capacity(rhos_bps_km2.len());
    for (i, mean_cell) in mean_cells.into_iter().enumerate() {
        let reps: Vec<PointReplication> = ok_runs.iter().map(|run| run[i].clone()).collect();
        let tables: Vec<Vec<CellRecord>> = reps.iter().map(|r| r.cells.clone()).collect();
        let averages = network_averages(&tables, n_tiers);
        let all_converged = reps.iter().all(|r| r.converged);
        points.push(SweepPoint {
            rho_bar_kbps: cfg.rho_sweep_kbps[i],
            averages,
            mean_cell,
            all_converged,
            failed: any_failed,
            replications: reps,
        });
    }

    let any_nonconverged = points.iter().any(|p| !p.all_converged);
    Ok(SweepOutcome {
        points,
        n_tiers,
        any_nonconverged,
        any_failed,
        failures,
    })
}

fn run_replication(
    cfg: &ScenarioConfig,
    replication: usize,
    seed: u64,
    rhos_bps_km2: &[f64],
    rate: &dyn hetcell_core::rate::RateFunction,
    solver: &hetcell_core::solver::SolverSettings,
) -> Result<Vec<PointReplication>, String> {
    let geometry = cfg.geometry();
    let snapshot = sample_network(&geometry, seed).map_err(|e| e.to_string())?;
    let model = PropagationModel::from_config(&geometry);
    let table = LossTable::build(&snapshot, &model);
    let map = assign_cells(&table, snapshot.grid.pixel_area_km2()).map_err(|e| e.to_string())?;
    let obs = snapshot.obs_mask(geometry.obs_radius_km);

    rhos_bps_km2
        .iter()
        .map(|&rho| {
            let problem = LoadProblem {
                table: &table,
                cells: &map,
                rho_bps_per_km2: rho,
                rate,
                pilot_eps: cfg.pilot_eps,
                noise_mw: geometry.noise_mw,
                pixel_area_km2: snapshot.grid.pixel_area_km2(),
                obs_mask: &obs,
            };
            let (loads, report) = solve_fixed_point(&problem, solver);
            let cells = snapshot
                .stations
                .iter()
                .enumerate()
                .map(|(s, bs)| {
                    let metrics =
                        cell_metrics(traffic_demand(&map, s, rho), loads[s], bs.tier)
                            .map_err(|e| e.to_string())?;
                    Ok(CellRecord {
                        station_id: s,
                        tier: bs.tier,
                        surface_km2: map.surface_km2[s],
                        in_obs: obs[s],
                        metrics,
                    })
                })
                .collect::<Result<Vec<_>, String>>()?;
            Ok(PointReplication {
                replication,
                seed,
                converged: report.converged,
                uniqueness_gap: report.uniqueness_gap,
                history: report.history,
                cells,
            })
        })
        .collect::<Result<Vec<_>, String>>()
        .map(|points| ReplicationRun {
            replication,
            seed,
            points,
        })
        .map(|run| run.points)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::TierSpec;

    /// Scaled-down scenario that keeps tests fast.
    pub(crate) fn small_scenario() -> ScenarioConfig {
        ScenarioConfig {
            tiers: vec![
                TierSpec {
                    name: "macro".into(),
                    intensity_per_km2: 7.0,
                    power_dbm: 45.0,
                },
                TierSpec {
                    name: "micro".into(),
                    intensity_per_km2: 1.0,
                    power_dbm: 34.0,
                },
            ],
            sim_radius_km: 1.1,
            obs_radius_km: 0.7,
            grid_step_km: 0.1,
            rho_sweep_kbps: vec![200.0, 400.0],
            replications: 2,
            mc_samples: 300,
            base_seed: 5,
            ..ScenarioConfig::default()
        }
    }

    #[test]
    fn sweep_produces_consistent_tables() {
        let cfg = small_scenario();
        let out = run_sweep(&cfg).unwrap();
        assert_eq!(out.points.len(), 2);
        assert_eq!(out.n_tiers, 2);
        assert!(!out.any_failed);
        for p in &out.points {
            assert_eq!(p.replications.len(), 2);
            assert!(p.averages.global.samples == 2);
            assert!(p.averages.global.mean_load > 0.0);
            assert!(p.mean_cell.theta > 0.0);
            for r in &p.replications {
                assert!(!r.cells.is_empty());
            }
        }
        // Load grows with traffic, realization by realization.
        assert!(
            out.points[1].averages.global.mean_load > out.points[0].averages.global.mean_load
        );
    }

    #[test]
    fn sweep_is_deterministic() {
        let cfg = small_scenario();
        let a = run_sweep(&cfg).unwrap();
        let b = run_sweep(&cfg).unwrap();
        for (pa, pb) in a.points.iter().zip(b.points.iter()) {
            assert_eq!(pa.averages.global.mean_load, pb.averages.global.mean_load);
            assert_eq!(pa.mean_cell.theta, pb.mean_cell.theta);
            for (ra, rb) in pa.replications.iter().zip(pb.replications.iter()) {
                assert_eq!(ra.seed, rb.seed);
                for (ca, cb) in ra.cells.iter().zip(rb.cells.iter()) {
                    assert_eq!(ca.metrics.load.to_bits(), cb.metrics.load.to_bits());
                }
            }
        }
    }

    #[test]
    fn empty_sweep_is_a_usage_error() {
        let mut cfg = small_scenario();
        cfg.rho_sweep_kbps.clear();
        let err = run_sweep(&cfg).unwrap_err();
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn stable_fraction_is_nonincreasing_in_traffic() {
        // Common random numbers across points make this monotone per
        // realization, hence in the aggregate.
        let mut cfg = small_scenario();
        cfg.rho_sweep_kbps = vec![100.0, 700.0, 2000.0];
        cfg.replications = 3;
        let out = run_sweep(&cfg).unwrap();
        let pis: Vec<f64> = out
            .points
            .iter()
            .map(|p| p.averages.global.stable_fraction)
            .collect();
        assert!(pis[0] >= pis[1] && pis[1] >= pis[2], "{pis:?}");
        assert!(pis[0] > 0.9, "low traffic should be mostly stable: {pis:?}");
    }
}
