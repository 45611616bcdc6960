//! Closed-form mean-cell model.
//!
//! The marked process of propagation losses seen at a point of a multi-tier
//! network is Poisson on `[0, inf)` with intensity `Lambda((0,t]) = a t^(2/beta)`,
//! `a = sum_j a_j`, `a_j = pi E[S^(2/beta)] / K^2 * lambda_j P_j^(2/beta)`,
//! and the loss values carry i.i.d. tier labels with probability `a_j / a`.
//! The same loss process arises from an equivalent homogeneous network of
//! intensity `lambda` where every station emits the power mean
//! `P = (sum_j (lambda_j/lambda) P_j^(2/beta))^(beta/2)`.
//!
//! The mean cell replaces the per-cell load unknowns by tier constants
//! `theta_j = theta * P_j^(2/beta) / P^(2/beta)`, which turns the coupled
//! load equations into a scalar fixed point for `theta`. The expectation on
//! its right-hand side is estimated by Monte Carlo over sampled loss
//! profiles; the same sample set is reused across Picard iterations (common
//! random numbers), so the scalar map is deterministic and monotone.
//! Truncation of the sampling disc is compensated by adding the closed-form
//! expected interference of all stations beyond the disc.

use rand::Rng;
use rand_distr::{Distribution, Poisson, StandardNormal};

use crate::error::ModelError;
use crate::geometry::GeometryConfig;
use crate::propagation::{interference_weight, PropagationModel};
use crate::rate::RateFunction;
use crate::rng::{stream_rng, STREAM_MEANCELL};
use crate::solver::LOAD_CAP;

/// Log-normal moment `E[S^(2/beta)]` for mean-zero dB shadowing.
pub fn shadow_moment(sigma_db: f64, beta: f64) -> f64 {
    let t = (2.0 / beta) * sigma_db * std::f64::consts::LN_10 / 10.0;
    (t * t / 2.0).exp()
}

/// Log-normal mean `E[S]` for mean-zero dB shadowing.
pub fn shadow_mean(sigma_db: f64) -> f64 {
    let t = sigma_db * std::f64::consts::LN_10 / 10.0;
    (t * t / 2.0).exp()
}

/// Loss-process coefficient of one tier:
/// `a_j = pi E[S^(2/beta)] / K^2 * lambda_j P_j^(2/beta)`.
pub fn tier_coefficient(config: &GeometryConfig, tier: usize) -> Result<f64, ModelError> {
    if tier == 0 || tier > config.tiers.len() {
        return Err(ModelError::TierOutOfRange {
            index: tier,
            count: config.tiers.len(),
        });
    }
    let t = &config.tiers[tier - 1];
    let beta = config.pathloss_beta;
    let k = config.pathloss_k_per_km;
    Ok(std::f64::consts::PI * shadow_moment(config.shadow_sigma_db, beta) / (k * k)
        * t.intensity_per_km2
        * t.power_mw.powf(2.0 / beta))
}

/// Total coefficient `a = sum_j a_j`.
pub fn total_coefficient(config: &GeometryConfig) -> f64 {
    (1..=config.tiers.len())
        .map(|j| tier_coefficient(config, j).expect("tier in range"))
        .sum()
}

/// The 2/beta-power mean `sum_j (lambda_j / lambda) P_j^(2/beta)`.
fn power_mean_2_beta(config: &GeometryConfig) -> f64 {
    let lambda = config.total_intensity();
    config
        .tiers
        .iter()
        .map(|t| t.intensity_per_km2 / lambda * t.power_mw.powf(2.0 / config.pathloss_beta))
        .sum()
}

/// Transmit power of the equivalent homogeneous network, in mW.
pub fn equivalent_power_mw(config: &GeometryConfig) -> f64 {
    power_mean_2_beta(config).powf(config.pathloss_beta / 2.0)
}

/// Probability that the typical user's serving station is of tier `j`:
/// `a_j / a`, the loss-process label distribution.
pub fn tier_selection_probability(config: &GeometryConfig, tier: usize) -> Result<f64, ModelError> {
    Ok(tier_coefficient(config, tier)? / total_coefficient(config))
}

/// Load ratio of one tier to the equivalent network,
/// `P_j^(2/beta) / P^(2/beta)`.
pub fn power_load_ratio(config: &GeometryConfig, tier: usize) -> Result<f64, ModelError> {
    if tier == 0 || tier > config.tiers.len() {
        return Err(ModelError::TierOutOfRange {
            index: tier,
            count: config.tiers.len(),
        });
    }
    let p = config.tiers[tier - 1]
        .power_mw
        .powf(2.0 / config.pathloss_beta);
    Ok(p / power_mean_2_beta(config))
}

/// How the Monte Carlo networks behind the expectation are drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SamplingMode {
    /// Homogeneous network of intensity `lambda` and power `P` with
    /// artificial i.i.d. tier labels `a_j / a` (the default).
    Equivalent,
    /// The true multi-tier network, for cross-checking the equivalence.
    Heterogeneous,
}

#[derive(Debug, Clone, Copy)]
pub struct MeanCellSettings {
    pub mc_samples: usize,
    pub tolerance: f64,
    pub max_iterations: usize,
    pub seed: u64,
    pub mode: SamplingMode,
    /// Add the closed-form expected interference of stations beyond the
    /// sampling disc.
    pub tail_correction: bool,
}

impl Default for MeanCellSettings {
    fn default() -> Self {
        Self {
            mc_samples: 4000,
            tolerance: 1e-6,
            max_iterations: 500,
            seed: 0,
            mode: SamplingMode::Equivalent,
            tail_correction: true,
        }
    }
}

/// Propagation losses of one sampled network as seen from the origin,
/// reduced to what the scalar fixed point needs.
#[derive(Debug, Clone)]
pub struct LossSample {
    /// `1/L` of the serving (minimal-loss) station.
    pub serving_inv_loss: f64,
    /// Tier label of the serving station, 1-based.
    pub serving_tier: usize,
    /// Sum of `1/L` over the remaining stations, per tier (index `j - 1`).
    pub interferer_tier_sums: Vec<f64>,
}

/// Draw `count` networks and reduce each to its loss profile at the origin.
pub fn sample_loss_profiles(
    config: &GeometryConfig,
    mode: SamplingMode,
    count: usize,
    seed: u64,
) -> Vec<LossSample> {
    let mut rng = stream_rng(seed, STREAM_MEANCELL);
    let model = PropagationModel::from_config(config);
    let n_tiers = config.tiers.len();
    let radius = config.sim_radius_km;
    let area = std::f64::consts::PI * radius * radius;
    let sigma = config.shadow_sigma_db;

    // Tier label cumulative probabilities and per-station powers.
    let equivalent_power = equivalent_power_mw(config);
    let label_cum: Vec<f64> = match mode {
        SamplingMode::Equivalent => {
            let a = total_coefficient(config);
            (1..=n_tiers)
                .scan(0.0, |acc, j| {
                    *acc += tier_coefficient(config, j).unwrap() / a;
                    Some(*acc)
                })
                .collect()
        }
        SamplingMode::Heterogeneous => Vec::new(),
    };

    let draw_station_losses = |rng: &mut rand_chacha::ChaCha8Rng| -> Vec<(usize, f64)> {
        // (tier, 1/L) of every station in the disc.
        let mut out = Vec::new();
        match mode {
            SamplingMode::Equivalent => {
                let lambda = config.total_intensity();
                let n = Poisson::new(lambda * area).unwrap().sample(rng) as usize;
                for _ in 0..n {
                    let r = radius * rng.random::<f64>().sqrt();
                    let u: f64 = rng.random();
                    let tier = label_cum.iter().position(|&c| u < c).unwrap_or(n_tiers - 1) + 1;
                    let z: f64 = rng.sample(StandardNormal);
                    let shadow = 10f64.powf(sigma * z / 10.0);
                    let loss = model.capped_path_loss(r) / (equivalent_power * shadow);
                    out.push((tier, 1.0 / loss));
                }
            }
            SamplingMode::Heterogeneous => {
                for (j, t) in config.tiers.iter().enumerate() {
                    let n = Poisson::new(t.intensity_per_km2 * area).unwrap().sample(rng) as usize;
                    for _ in 0..n {
                        let r = radius * rng.random::<f64>().sqrt();
                        let z: f64 = rng.sample(StandardNormal);
                        let shadow = 10f64.powf(sigma * z / 10.0);
                        let loss = model.capped_path_loss(r) / (t.power_mw * shadow);
                        out.push((j + 1, 1.0 / loss));
                    }
                }
            }
        }
        out
    };

    (0..count)
        .map(|_| {
            let stations = loop {
                let s = draw_station_losses(&mut rng);
                if !s.is_empty() {
                    break s;
                }
            };
            let serving = stations
                .iter()
                .enumerate()
                .max_by(|a, b| a.1 .1.partial_cmp(&b.1 .1).unwrap())
                .map(|(i, _)| i)
                .unwrap();
            let mut sums = vec![0.0; n_tiers];
            for (i, &(tier, inv)) in stations.iter().enumerate() {
                if i != serving {
                    sums[tier - 1] += inv;
                }
            }
            LossSample {
                serving_inv_loss: stations[serving].1,
                serving_tier: stations[serving].0,
                interferer_tier_sums: sums,
            }
        })
        .collect()
}

/// Expected `sum 1/L` of the stations beyond the sampling disc, per tier:
/// `lambda_j P_j E[S] 2 pi R^(2-beta) / (K^beta (beta-2))`. In the
/// equivalent mode the homogeneous total is split by the label
/// probabilities `a_j / a`.
pub fn tail_interference_per_tier(config: &GeometryConfig, mode: SamplingMode) -> Vec<f64> {
    let beta = config.pathloss_beta;
    let base = 2.0 * std::f64::consts::PI
        * config.sim_radius_km.powf(2.0 - beta)
        * shadow_mean(config.shadow_sigma_db)
        / (config.pathloss_k_per_km.powf(beta) * (beta - 2.0));
    match mode {
        SamplingMode::Heterogeneous => config
            .tiers
            .iter()
            .map(|t| t.intensity_per_km2 * t.power_mw * base)
            .collect(),
        SamplingMode::Equivalent => {
            let total =
                config.total_intensity() * equivalent_power_mw(config) * base;
            let a = total_coefficient(config);
            (1..=config.tiers.len())
                .map(|j| tier_coefficient(config, j).unwrap() / a * total)
                .collect()
        }
    }
}

/// Reciprocal-rate integrand of one sample under per-tier interference
/// weights (pilot-corrected) and tail terms.
pub fn load_integrand(
    sample: &LossSample,
    weights: &[f64],
    tail: &[f64],
    noise_mw: f64,
    rate: &dyn RateFunction,
) -> f64 {
    let mut interference = 0.0;
    for j in 0..weights.len() {
        interference += weights[j] * (sample.interferer_tier_sums[j] + tail[j]);
    }
    rate.inverse_rate(sample.serving_inv_loss / (noise_mw + interference))
}

/// Mean-cell metrics of one scope (a tier, or the global mean cell).
#[derive(Debug, Clone, Copy)]
pub struct MeanTierMetrics {
    /// 1-based tier; 0 denotes the global mean cell.
    pub tier: usize,
    pub load: f64,
    pub traffic_bps: f64,
    pub critical_bps: f64,
    pub throughput_bps: f64,
    /// Infinite when the scope is saturated.
    pub mean_users: f64,
    pub saturated: bool,
}

/// Solution of the scalar mean-load fixed point.
#[derive(Debug, Clone)]
pub struct MeanCellSolution {
    /// Global mean load (the scalar unknown).
    pub theta: f64,
    pub converged: bool,
    /// Some scope reached load 1: the mean cell is unstable there.
    pub saturated: bool,
    pub residual: f64,
    pub iterations: usize,
    pub global: MeanTierMetrics,
    /// Indexed by tier - 1.
    pub tiers: Vec<MeanTierMetrics>,
}

fn scope_metrics(tier: usize, traffic_bps: f64, load: f64, critical_bps: f64) -> MeanTierMetrics {
    let saturated = load >= 1.0;
    let throughput_bps = if traffic_bps == 0.0 {
        critical_bps
    } else if saturated {
        0.0
    } else {
        traffic_bps * (1.0 - load) / load
    };
    let mean_users = if throughput_bps > 0.0 {
        traffic_bps / throughput_bps
    } else {
        f64::INFINITY
    };
    MeanTierMetrics {
        tier,
        load,
        traffic_bps,
        critical_bps,
        throughput_bps,
        mean_users,
        saturated,
    }
}

/// Solve the scalar fixed point on a frozen sample set by monotone Picard
/// iteration from 0.
pub fn solve_mean_cell_from_samples(
    config: &GeometryConfig,
    rho_bps_per_km2: f64,
    rate: &dyn RateFunction,
    pilot_eps: f64,
    samples: &[LossSample],
    tail: &[f64],
    tolerance: f64,
    max_iterations: usize,
) -> MeanCellSolution {
    assert!(!samples.is_empty());
    assert!(tolerance > 0.0);
    let lambda = config.total_intensity();
    let rho_bar = rho_bps_per_km2 / lambda;
    let n_tiers = config.tiers.len();
    let ratios: Vec<f64> = (1..=n_tiers)
        .map(|j| power_load_ratio(config, j).unwrap())
        .collect();

    let expectation = |theta: f64| -> f64 {
        let weights: Vec<f64> = ratios
            .iter()
            .map(|c| interference_weight(theta * c, pilot_eps))
            .collect();
        samples
            .iter()
            .map(|s| load_integrand(s, &weights, tail, config.noise_mw, rate))
            .sum::<f64>()
            / samples.len() as f64
    };

    let mut theta = 0.0;
    let mut residual = f64::INFINITY;
    let mut converged = false;
    let mut iterations = 0;
    for it in 1..=max_iterations {
        iterations = it;
        let next = (rho_bar * expectation(theta)).min(LOAD_CAP);
        residual = (next - theta).abs();
        theta = next;
        if residual < tolerance {
            converged = true;
            break;
        }
    }

    // Critical traffic: rho_tilde / theta_tilde, identical for every tier
    // since traffic and load share the same power ratio. At zero traffic it
    // comes from the harmonic-mean expectation directly.
    let critical_bps = if theta > 0.0 {
        rho_bar / theta
    } else {
        1.0 / expectation(theta)
    };
    let global = scope_metrics(0, rho_bar, theta, critical_bps);
    let tiers: Vec<MeanTierMetrics> = ratios
        .iter()
        .enumerate()
        .map(|(i, c)| scope_metrics(i + 1, rho_bar * c, theta * c, critical_bps))
        .collect();
    MeanCellSolution {
        theta,
        converged,
        saturated: global.saturated || tiers.iter().any(|t| t.saturated),
        residual,
        iterations,
        global,
        tiers,
    }
}

/// Sample the equivalent (or true) network and solve the mean-cell fixed
/// point. Deterministic given `(settings.seed, settings.mc_samples)`.
pub fn solve_mean_cell(
    config: &GeometryConfig,
    rho_bps_per_km2: f64,
    rate: &dyn RateFunction,
    pilot_eps: f64,
    settings: &MeanCellSettings,
) -> Result<MeanCellSolution, ModelError> {
    config.validate()?;
    if settings.mc_samples == 0 {
        return Err(ModelError::InvalidConfig("mc_samples must be >= 1".into()));
    }
    if !(settings.tolerance > 0.0) {
        return Err(ModelError::InvalidConfig("tolerance must be > 0".into()));
    }
    let samples = sample_loss_profiles(config, settings.mode, settings.mc_samples, settings.seed);
    let tail = if settings.tail_correction {
        tail_interference_per_tier(config, settings.mode)
    } else {
        vec![0.0; config.tiers.len()]
    };
    Ok(solve_mean_cell_from_samples(
        config,
        rho_bps_per_km2,
        rate,
        pilot_eps,
        &samples,
        &tail,
        settings.tolerance,
        settings.max_iterations,
    ))
}
