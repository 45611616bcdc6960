//! Scenario configuration: built-in defaults, optional TOML file, flag
//! overrides. Precedence is flag > file > default.
//!
//! The config file uses km, dBm and km^-2 at the boundary; conversion to
//! the linear internal units happens here.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use hetcell_core::geometry::{GeometryConfig, TierConfig};
use hetcell_core::meancell::{MeanCellSettings, SamplingMode};
use hetcell_core::rate::{RateFunction, RateParams, ShannonRate, TabulatedRate};
use hetcell_core::rng::mix_seed;
use hetcell_core::solver::SolverSettings;
use hetcell_core::units::dbm_to_mw;

use crate::error::CliError;

pub const SCHEMA_VERSION: u32 = 1;

/// Seed stream tag for the mean-cell solver inside a sweep.
const STREAM_SWEEP_MEANCELL: u64 = 0x4D43;

/// One tier as configured: a label plus intensity and power in file units.
#[derive(Debug, Clone, PartialEq)]
pub struct TierSpec {
    pub name: String,
    pub intensity_per_km2: f64,
    pub power_dbm: f64,
}

/// Fully resolved scenario.
#[derive(Debug, Clone)]
pub struct ScenarioConfig {
    pub tiers: Vec<TierSpec>,
    pub sim_radius_km: f64,
    pub obs_radius_km: f64,
    pub grid_step_km: f64,
    pub pathloss_k_per_km: f64,
    pub pathloss_beta: f64,
    pub shadow_sigma_db: f64,
    pub shadow_corr_km: f64,
    pub noise_dbm: f64,

    pub bandwidth_hz: f64,
    pub efficiency: f64,

    pub rho_sweep_kbps: Vec<f64>,
    pub pilot_eps: f64,

    pub solver_tolerance: f64,
    pub solver_max_iterations: usize,
    pub solver_relaxation: f64,
    pub use_rate_table: bool,

    pub mc_samples: usize,
    pub mc_tolerance: f64,
    pub mc_max_iterations: usize,
    pub mc_mode: SamplingMode,
    pub mc_tail_correction: bool,

    pub replications: usize,
    pub base_seed: u64,
    pub output_dir: PathBuf,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        // Two-tier urban scenario: total intensity 4.62 stations/km^2 with a
        // micro/macro ratio of 0.039, powers 58.26/47.42 dBm (gains folded
        // in), K = 7117/km, beta = 3.8, 10 dB shadowing correlated over
        // 0.05 km, -96 dBm noise, 5 MHz HSDPA at 30% capacity, 10% pilot.
        let total = 4.62;
        let ratio = 0.039;
        Self {
            tiers: vec![
                TierSpec {
                    name: "macro".into(),
                    intensity_per_km2: total / (1.0 + ratio),
                    power_dbm: 58.26,
                },
                TierSpec {
                    name: "micro".into(),
                    intensity_per_km2: total * ratio / (1.0 + ratio),
                    power_dbm: 47.42,
                },
            ],
            sim_radius_km: 2.63,
            obs_radius_km: 2.13,
            grid_step_km: 0.05,
            pathloss_k_per_km: 7117.0,
            pathloss_beta: 3.8,
            shadow_sigma_db: 10.0,
            shadow_corr_km: 0.05,
            noise_dbm: -96.0,
            bandwidth_hz: 5e6,
            efficiency: 0.3,
            rho_sweep_kbps: (1..=10).map(|i| 100.0 * i as f64).collect(),
            pilot_eps: 0.1,
            solver_tolerance: 1e-4,
            solver_max_iterations: 200,
            solver_relaxation: 1.0,
            use_rate_table: false,
            mc_samples: 4000,
            mc_tolerance: 1e-6,
            mc_max_iterations: 500,
            mc_mode: SamplingMode::Equivalent,
            mc_tail_correction: true,
            replications: 10,
            base_seed: 1,
            output_dir: PathBuf::from("out"),
        }
    }
}

impl ScenarioConfig {
    pub fn geometry(&self) -> GeometryConfig {
        GeometryConfig {
            tiers: self
                .tiers
                .iter()
                .map(|t| TierConfig {
                    intensity_per_km2: t.intensity_per_km2,
                    power_mw: dbm_to_mw(t.power_dbm),
                })
                .collect(),
            sim_radius_km: self.sim_radius_km,
            obs_radius_km: self.obs_radius_km,
            grid_step_km: self.grid_step_km,
            pathloss_k_per_km: self.pathloss_k_per_km,
            pathloss_beta: self.pathloss_beta,
            shadow_sigma_db: self.shadow_sigma_db,
            shadow_corr_km: self.shadow_corr_km,
            noise_mw: dbm_to_mw(self.noise_dbm),
        }
    }

    pub fn rate_params(&self) -> RateParams {
        RateParams {
            bandwidth_hz: self.bandwidth_hz,
            efficiency: self.efficiency,
        }
    }

    /// The configured rate map (exact closed form, or the tabulated fast
    /// path when enabled).
    pub fn make_rate(&self) -> Box<dyn RateFunction> {
        if self.use_rate_table {
            Box::new(TabulatedRate::new(self.rate_params()))
        } else {
            Box::new(ShannonRate::new(self.rate_params()))
        }
    }

    pub fn solver_settings(&self) -> SolverSettings {
        SolverSettings {
            tolerance: self.solver_tolerance,
            max_iterations: self.solver_max_iterations,
            relaxation: self.solver_relaxation,
        }
    }

    pub fn meancell_settings(&self) -> MeanCellSettings {
        MeanCellSettings {
            mc_samples: self.mc_samples,
            tolerance: self.mc_tolerance,
            max_iterations: self.mc_max_iterations,
            seed: mix_seed(self.base_seed, STREAM_SWEEP_MEANCELL),
            mode: self.mc_mode,
            tail_correction: self.mc_tail_correction,
        }
    }

    /// Tier label, 1-based; 0 is the pooled network.
    pub fn tier_label(&self, tier: usize) -> &str {
        if tier == 0 {
            "all"
        } else {
            &self.tiers[tier - 1].name
        }
    }

    pub fn tier_by_label(&self, label: &str) -> Option<usize> {
        self.tiers.iter().position(|t| t.name == label).map(|i| i + 1)
    }

    /// Per-replication snapshot seed: common random numbers across sweep
    /// points, independent across replications.
    pub fn replication_seed(&self, replication: usize) -> u64 {
        mix_seed(self.base_seed, 0x5EED + replication as u64)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        self.geometry().validate()?;
        self.rate_params().validate()?;
        if self.rho_sweep_kbps.iter().any(|&r| !(r > 0.0)) {
            return Err(CliError::Config(
                "traffic sweep values must be positive".into(),
            ));
        }
        if !(0.0..=1.0).contains(&self.pilot_eps) {
            return Err(CliError::Config(format!(
                "pilot_fraction must lie in [0, 1], got {}",
                self.pilot_eps
            )));
        }
        if self.replications == 0 {
            return Err(CliError::Config("replications must be >= 1".into()));
        }
        if self.mc_samples == 0 {
            return Err(CliError::Config("meancell mc_samples must be >= 1".into()));
        }
        let mut names: Vec<&str> = self.tiers.iter().map(|t| t.name.as_str()).collect();
        names.sort_unstable();
        names.dedup();
        if names.len() != self.tiers.len() || names.iter().any(|n| n.is_empty() || *n == "all") {
            return Err(CliError::Config(
                "tier names must be unique, non-empty and different from \"all\"".into(),
            ));
        }
        Ok(())
    }
}

// --- TOML file schema ---

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    schema_version: u32,
    geometry: Option<GeometrySection>,
    rate: Option<RateSection>,
    traffic: Option<TrafficSection>,
    solver: Option<SolverSection>,
    meancell: Option<MeanCellSection>,
    run: Option<RunSection>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct GeometrySection {
    tiers: Option<Vec<TierRow>>,
    sim_radius_km: Option<f64>,
    obs_radius_km: Option<f64>,
    grid_step_km: Option<f64>,
    pathloss_k_per_km: Option<f64>,
    pathloss_beta: Option<f64>,
    shadow_sigma_db: Option<f64>,
    shadow_corr_km: Option<f64>,
    noise_dbm: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct TierRow {
    name: String,
    intensity_per_km2: f64,
    power_dbm: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RateSection {
    bandwidth_hz: Option<f64>,
    efficiency: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct TrafficSection {
    rho_sweep_kbps: Option<Vec<f64>>,
    pilot_fraction: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SolverSection {
    tolerance: Option<f64>,
    max_iterations: Option<usize>,
    relaxation: Option<f64>,
    use_rate_table: Option<bool>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct MeanCellSection {
    mc_samples: Option<usize>,
    tolerance: Option<f64>,
    max_iterations: Option<usize>,
    mode: Option<String>,
    tail_correction: Option<bool>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RunSection {
    replications: Option<usize>,
    base_seed: Option<u64>,
    output_dir: Option<PathBuf>,
}

fn apply_file(cfg: &mut ScenarioConfig, file: FileConfig) -> Result<(), CliError> {
    if file.schema_version != SCHEMA_VERSION {
        return Err(CliError::Config(format!(
            "unsupported schema_version {} (expected {})",
            file.schema_version, SCHEMA_VERSION
        )));
    }
    macro_rules! set {
        ($section:expr, $($field:ident => $target:expr),+ $(,)?) => {
            if let Some(s) = $section {
                $(if let Some(v) = s.$field { $target = v; })+
            }
        };
    }
    if let Some(g) = &file.geometry {
        if let Some(tiers) = &g.tiers {
            cfg.tiers = tiers
                .iter()
                .map(|t| TierSpec {
                    name: t.name.clone(),
                    intensity_per_km2: t.intensity_per_km2,
                    power_dbm: t.power_dbm,
                })
                .collect();
        }
    }
    set!(file.geometry,
        sim_radius_km => cfg.sim_radius_km,
        obs_radius_km => cfg.obs_radius_km,
        grid_step_km => cfg.grid_step_km,
        pathloss_k_per_km => cfg.pathloss_k_per_km,
        pathloss_beta => cfg.pathloss_beta,
        shadow_sigma_db => cfg.shadow_sigma_db,
        shadow_corr_km => cfg.shadow_corr_km,
        noise_dbm => cfg.noise_dbm,
    );
    set!(file.rate,
        bandwidth_hz => cfg.bandwidth_hz,
        efficiency => cfg.efficiency,
    );
    set!(file.traffic,
        rho_sweep_kbps => cfg.rho_sweep_kbps,
        pilot_fraction => cfg.pilot_eps,
    );
    set!(file.solver,
        tolerance => cfg.solver_tolerance,
        max_iterations => cfg.solver_max_iterations,
        relaxation => cfg.solver_relaxation,
        use_rate_table => cfg.use_rate_table,
    );
    if let Some(mc) = &file.meancell {
        if let Some(mode) = &mc.mode {
            cfg.mc_mode = parse_mode(mode)?;
        }
    }
    set!(file.meancell,
        mc_samples => cfg.mc_samples,
        tolerance => cfg.mc_tolerance,
        max_iterations => cfg.mc_max_iterations,
        tail_correction => cfg.mc_tail_correction,
    );
    set!(file.run,
        replications => cfg.replications,
        base_seed => cfg.base_seed,
        output_dir => cfg.output_dir,
    );
    Ok(())
}

pub fn parse_mode(s: &str) -> Result<SamplingMode, CliError> {
    match s {
        "equivalent" => Ok(SamplingMode::Equivalent),
        "heterogeneous" => Ok(SamplingMode::Heterogeneous),
        other => Err(CliError::Config(format!(
            "unknown meancell mode \"{other}\" (use \"equivalent\" or \"heterogeneous\")"
        ))),
    }
}

/// Flag-level overrides; `None` keeps the file/default value.
#[derive(Debug, Default, Clone)]
pub struct Overrides {
    pub output_dir: Option<PathBuf>,
    pub replications: Option<usize>,
    pub base_seed: Option<u64>,
    pub rho_sweep_kbps: Option<Vec<f64>>,
    pub pilot_eps: Option<f64>,
    pub mc_samples: Option<usize>,
    pub mc_mode: Option<SamplingMode>,
}

/// Resolve the scenario: defaults, then the optional file, then flags.
pub fn load_scenario(path: Option<&Path>, overrides: &Overrides) -> Result<ScenarioConfig, CliError> {
    let mut cfg = ScenarioConfig::default();
    if let Some(p) = path {
        let text = std::fs::read_to_string(p)
            .map_err(|e| CliError::Io(format!("cannot read {}: {e}", p.display())))?;
        let file: FileConfig = toml::from_str(&text)
            .map_err(|e| CliError::Config(format!("{}: {e}", p.display())))?;
        apply_file(&mut cfg, file)?;
    }
    if let Some(v) = &overrides.output_dir {
        cfg.output_dir = v.clone();
    }
    if let Some(v) = overrides.replications {
        cfg.replications = v;
    }
    if let Some(v) = overrides.base_seed {
        cfg.base_seed = v;
    }
    if let Some(v) = &overrides.rho_sweep_kbps {
        cfg.rho_sweep_kbps = v.clone();
    }
    if let Some(v) = overrides.pilot_eps {
        cfg.pilot_eps = v;
    }
    if let Some(v) = overrides.mc_samples {
        cfg.mc_samples = v;
    }
    if let Some(v) = overrides.mc_mode {
        cfg.mc_mode = v;
    }
    cfg.validate()?;
    Ok(cfg)
}

/// Parse a comma-separated sweep flag like "100,200,400".
pub fn parse_sweep(s: &str) -> Result<Vec<f64>, CliError> {
    s.split(',')
        .map(|tok| {
            tok.trim()
                .parse::<f64>()
                .map_err(|_| CliError::Config(format!("bad sweep value \"{tok}\"")))
        })
        .collect()
}
