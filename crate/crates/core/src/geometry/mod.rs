//! Multi-tier Poisson base-station configurations.
//!
//! Stations of tier `j` form a homogeneous Poisson process of intensity
//! `lambda_j` on the plane; the superposition has intensity
//! `lambda = sum lambda_j` and i.i.d. tier marks with probability
//! `lambda_j / lambda`. Each station additionally carries an independent
//! spatially correlated log-normal shadowing field on the shared pixel
//! grid. Networks are sampled on a generation disc of radius
//! `sim_radius_km`; statistics downstream are restricted to stations inside
//! the smaller observation disc so boundary cells do not bias the spatial
//! averages, while interference always uses every station.

mod grid;
mod shadowing;

pub use grid::Grid;
pub use shadowing::{sample_shadowing, ShadowingField};

use rand::Rng;
use rand_distr::{Distribution, Poisson};

use crate::error::ModelError;
use crate::rng::{stream_rng, STREAM_STATIONS};

/// One base-station class: deployment intensity and transmit power.
///
/// Powers are linear milliwatts internally; dBm only at I/O boundaries.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TierConfig {
    /// Stations per square kilometre.
    pub intensity_per_km2: f64,
    /// Transmit power in mW (antenna gains folded in).
    pub power_mw: f64,
}

/// Geometry, propagation and noise parameters of a scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct GeometryConfig {
    pub tiers: Vec<TierConfig>,
    /// Radius of the generation disc in km.
    pub sim_radius_km: f64,
    /// Radius of the inner observation disc (statistics only).
    pub obs_radius_km: f64,
    /// Pixel size of the spatial grid in km.
    pub grid_step_km: f64,
    /// Path-loss constant K in 1/km; loss is `(K d)^beta`.
    pub pathloss_k_per_km: f64,
    /// Path-loss exponent, must exceed 2.
    pub pathloss_beta: f64,
    /// Shadowing standard deviation in dB (0 disables shadowing).
    pub shadow_sigma_db: f64,
    /// Shadowing correlation distance in km.
    pub shadow_corr_km: f64,
    /// Noise power in mW.
    pub noise_mw: f64,
}

impl GeometryConfig {
    pub fn validate(&self) -> Result<(), ModelError> {
        let bad = |msg: String| Err(ModelError::InvalidConfig(msg));
        if self.tiers.is_empty() {
            return bad("at least one tier is required".into());
        }
        for (j, t) in self.tiers.iter().enumerate() {
            if !(t.intensity_per_km2 > 0.0) {
                return bad(format!("tier {} intensity must be > 0", j + 1));
            }
            if !(t.power_mw > 0.0) {
                return bad(format!("tier {} power must be > 0", j + 1));
            }
        }
        if !(self.sim_radius_km > 0.0) || !(self.obs_radius_km > 0.0) {
            return bad("radii must be > 0".into());
        }
        if self.obs_radius_km >= self.sim_radius_km {
            return bad(format!(
                "obs_radius_km ({}) must be smaller than sim_radius_km ({})",
                self.obs_radius_km, self.sim_radius_km
            ));
        }
        if !(self.grid_step_km > 0.0) {
            return bad("grid_step_km must be > 0".into());
        }
        if !(self.pathloss_beta > 2.0) {
            return bad(format!("pathloss_beta must exceed 2, got {}", self.pathloss_beta));
        }
        if !(self.pathloss_k_per_km > 0.0) {
            return bad("pathloss_k_per_km must be > 0".into());
        }
        if !(self.shadow_sigma_db >= 0.0) {
            return bad("shadow_sigma_db must be >= 0".into());
        }
        if !(self.shadow_corr_km > 0.0) {
            return bad("shadow_corr_km must be > 0".into());
        }
        if !(self.noise_mw > 0.0) {
            return bad("noise_mw must be > 0".into());
        }
        Ok(())
    }

    /// Superposition intensity `lambda = sum_j lambda_j`.
    pub fn total_intensity(&self) -> f64 {
        self.tiers.iter().map(|t| t.intensity_per_km2).sum()
    }

    /// Mean station count in the generation disc.
    pub fn expected_station_count(&self) -> f64 {
        self.total_intensity() * std::f64::consts::PI * self.sim_radius_km * self.sim_radius_km
    }

    /// Probability that an arbitrarily chosen station belongs to tier `j`
    /// (1-based): `lambda_j / lambda`.
    pub fn tier_probability(&self, tier: usize) -> Result<f64, ModelError> {
        if tier == 0 || tier > self.tiers.len() {
            return Err(ModelError::TierOutOfRange {
                index: tier,
                count: self.tiers.len(),
            });
        }
        Ok(self.tiers[tier - 1].intensity_per_km2 / self.total_intensity())
    }

    pub fn n_tiers(&self) -> usize {
        self.tiers.len()
    }
}

/// A base station with its tier mark.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BaseStation {
    pub id: usize,
    pub x_km: f64,
    pub y_km: f64,
    /// Tier index, 1-based.
    pub tier: usize,
    pub power_mw: f64,
}

impl BaseStation {
    pub fn distance_to(&self, x_km: f64, y_km: f64) -> f64 {
        let dx = self.x_km - x_km;
        let dy = self.y_km - y_km;
        (dx * dx + dy * dy).sqrt()
    }
}

/// One immutable network realization: stations, grid and shadowing.
///
/// Pure function of `(config, seed)`; safe to share read-only between
/// parallel workers.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkSnapshot {
    pub stations: Vec<BaseStation>,
    pub grid: Grid,
    pub shadowing: ShadowingField,
    pub seed: u64,
}

impl NetworkSnapshot {
    /// Per-station flag: inside the observation disc.
    pub fn obs_mask(&self, obs_radius_km: f64) -> Vec<bool> {
        self.stations
            .iter()
            .map(|s| s.x_km * s.x_km + s.y_km * s.y_km <= obs_radius_km * obs_radius_km)
            .collect()
    }
}

/// Draw one multi-tier Poisson network with shadowing.
///
/// The station count is Poisson with mean `lambda * pi * R^2`, positions are
/// i.i.d. uniform on the disc and tier marks i.i.d. with probability
/// `lambda_j / lambda`. Deterministic for fixed `(config, seed)`.
pub fn sample_network(config: &GeometryConfig, seed: u64) -> Result<NetworkSnapshot, ModelError> {
    config.validate()?;
    let expected = config.expected_station_count();
    if expected < 3.0 {
        return Err(ModelError::InvalidConfig(format!(
            "expected station count {expected:.2} is below 3; window too small to form cells"
        )));
    }

    let mut rng = stream_rng(seed, STREAM_STATIONS);
    let count = Poisson::new(expected)
        .expect("positive mean")
        .sample(&mut rng) as usize;

    let lambda = config.total_intensity();
    let cumulative: Vec<f64> = config
        .tiers
        .iter()
        .scan(0.0, |acc, t| {
            *acc += t.intensity_per_km2 / lambda;
            Some(*acc)
        })
        .collect();

    let mut stations = Vec::with_capacity(count);
    for id in 0..count {
        let r = config.sim_radius_km * rng.random::<f64>().sqrt();
        let phi = 2.0 * std::f64::consts::PI * rng.random::<f64>();
        let u: f64 = rng.random();
        let tier = cumulative.iter().position(|&c| u < c).unwrap_or(config.tiers.len() - 1);
        stations.push(BaseStation {
            id,
            x_km: r * phi.cos(),
            y_km: r * phi.sin(),
            tier: tier + 1,
            power_mw: config.tiers[tier].power_mw,
        });
    }

    let grid = Grid::new(config.sim_radius_km, config.grid_step_km);
    let shadowing = sample_shadowing(&stations, &grid, config, seed);
    Ok(NetworkSnapshot {
        stations,
        grid,
        shadowing,
        seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats::{ks_critical, ks_statistic, mean, normal_cdf, sample_std};
    use approx::assert_relative_eq;

    fn two_tier_config() -> GeometryConfig {
        // Paper-style two-tier mix, small grid to keep field generation cheap.
        GeometryConfig {
            tiers: vec![
                TierConfig {
                    intensity_per_km2: 4.62 / 1.039,
                    power_mw: crate::units::dbm_to_mw(58.26),
                },
                TierConfig {
                    intensity_per_km2: 4.62 * 0.039 / 1.039,
                    power_mw: crate::units::dbm_to_mw(47.42),
                },
            ],
            sim_radius_km: 2.63,
            obs_radius_km: 2.13,
            grid_step_km: 0.4,
            pathloss_k_per_km: 7117.0,
            pathloss_beta: 3.8,
            shadow_sigma_db: 10.0,
            shadow_corr_km: 0.05,
            noise_mw: crate::units::dbm_to_mw(-96.0),
        }
    }

    fn small_config() -> GeometryConfig {
        GeometryConfig {
            tiers: vec![TierConfig {
                intensity_per_km2: 30.0,
                power_mw: 1000.0,
            }],
            sim_radius_km: 1.456,
            obs_radius_km: 1.0,
            grid_step_km: 0.25,
            pathloss_k_per_km: 7117.0,
            pathloss_beta: 3.8,
            shadow_sigma_db: 10.0,
            shadow_corr_km: 0.05,
            noise_mw: 1e-9,
        }
    }

    #[test]
    fn deterministic_for_fixed_seed() {
        let cfg = two_tier_config();
        let a = sample_network(&cfg, 42).unwrap();
        let b = sample_network(&cfg, 42).unwrap();
        assert_eq!(a, b);
        let c = sample_network(&cfg, 43).unwrap();
        assert_ne!(a.stations, c.stations);
    }

    #[test]
    fn station_count_mean_matches_paper_window() {
        // lambda = 4.62 /km^2 on a 2.63 km disc: about 100.4 stations.
        let cfg = two_tier_config();
        let counts: Vec<f64> = (0..300)
            .map(|s| sample_network(&cfg, s).unwrap().stations.len() as f64)
            .collect();
        let expected = cfg.expected_station_count();
        assert_relative_eq!(expected, 100.4, epsilon = 0.1);
        assert!((mean(&counts) - expected).abs() < 2.0, "mean {}", mean(&counts));
    }

    #[test]
    fn poisson_count_mean_equals_variance() {
        let mut cfg = small_config();
        cfg.shadow_sigma_db = 0.0; // count statistics only
        let expected = cfg.expected_station_count();
        let counts: Vec<f64> = (0..4000)
            .map(|s| sample_network(&cfg, s).unwrap().stations.len() as f64)
            .collect();
        let m = mean(&counts);
        let v = sample_std(&counts).powi(2);
        assert!((m - expected).abs() / expected < 0.05);
        assert!((v - expected).abs() / expected < 0.05, "var {v} vs {expected}");
    }

    #[test]
    fn positions_inside_disc_and_powers_match_tier() {
        let cfg = two_tier_config();
        let snap = sample_network(&cfg, 7).unwrap();
        for s in &snap.stations {
            assert!(s.distance_to(0.0, 0.0) <= cfg.sim_radius_km);
            assert_eq!(s.power_mw, cfg.tiers[s.tier - 1].power_mw);
        }
    }

    #[test]
    fn tier_marks_follow_intensity_ratio() {
        // lambda2/lambda1 = 0.039 gives tier-2 fraction 0.039/1.039 = 0.03754.
        let cfg = two_tier_config();
        let mut total = 0usize;
        let mut tier2 = 0usize;
        let mut seed = 0;
        while total < 20_000 {
            let snap = sample_network(&cfg, seed).unwrap();
            total += snap.stations.len();
            tier2 += snap.stations.iter().filter(|s| s.tier == 2).count();
            seed += 1;
        }
        let frac = tier2 as f64 / total as f64;
        let p = cfg.tier_probability(2).unwrap();
        assert_relative_eq!(p, 0.039 / 1.039, epsilon = 1e-12);
        let se = (p * (1.0 - p) / total as f64).sqrt();
        assert!((frac - p).abs() < 4.0 * se, "fraction {frac} vs {p}");
    }

    #[test]
    fn single_tier_yields_only_tier_one() {
        let mut cfg = small_config();
        cfg.shadow_sigma_db = 0.0;
        let snap = sample_network(&cfg, 3).unwrap();
        assert!(snap.stations.iter().all(|s| s.tier == 1));
    }

    #[test]
    fn tier_marks_are_exchangeable_with_position() {
        // Joint frequency of (tier 2, quadrant) factorizes.
        let cfg = two_tier_config();
        let mut n = 0usize;
        let mut in_q1 = 0usize;
        let mut tier2 = 0usize;
        let mut joint = 0usize;
        for seed in 0..400 {
            let snap = sample_network(&cfg, seed).unwrap();
            for s in &snap.stations {
                n += 1;
                let q1 = s.x_km > 0.0 && s.y_km > 0.0;
                if q1 {
                    in_q1 += 1;
                }
                if s.tier == 2 {
                    tier2 += 1;
                    if q1 {
                        joint += 1;
                    }
                }
            }
        }
        let (pq, pt, pj) = (
            in_q1 as f64 / n as f64,
            tier2 as f64 / n as f64,
            joint as f64 / n as f64,
        );
        let se = (pq * pt * (1.0 - pq * pt) / n as f64).sqrt();
        assert!((pj - pq * pt).abs() < 4.0 * se, "joint {pj} vs {}", pq * pt);
    }

    #[test]
    fn rejects_tiny_windows() {
        let mut cfg = small_config();
        cfg.sim_radius_km = 0.15;
        cfg.obs_radius_km = 0.1;
        assert!(matches!(
            sample_network(&cfg, 0),
            Err(ModelError::InvalidConfig(_))
        ));
    }

    #[test]
    fn tier_probability_cases() {
        let cfg = two_tier_config();
        assert!(matches!(
            cfg.tier_probability(0),
            Err(ModelError::TierOutOfRange { .. })
        ));
        assert!(matches!(
            cfg.tier_probability(3),
            Err(ModelError::TierOutOfRange { .. })
        ));
        let single = small_config();
        assert_relative_eq!(single.tier_probability(1).unwrap(), 1.0);
        let mut equal = two_tier_config();
        equal.tiers[0].intensity_per_km2 = 1.0;
        equal.tiers[1].intensity_per_km2 = 1.0;
        assert_relative_eq!(equal.tier_probability(1).unwrap(), 0.5);
        assert_relative_eq!(equal.tier_probability(2).unwrap(), 0.5);
    }

    #[test]
    fn config_validation_rejects_bad_fields() {
        let mut cfg = small_config();
        cfg.obs_radius_km = 2.0;
        assert!(cfg.validate().is_err());
        let mut cfg = small_config();
        cfg.pathloss_beta = 2.0;
        assert!(cfg.validate().is_err());
        let mut cfg = small_config();
        cfg.tiers[0].intensity_per_km2 = 0.0;
        assert!(cfg.validate().is_err());
        let mut cfg = small_config();
        cfg.noise_mw = 0.0;
        assert!(cfg.validate().is_err());
    }

    // --- shadowing field statistics ---

    fn field_config(grid_step: f64, sigma: f64, corr: f64) -> GeometryConfig {
        GeometryConfig {
            tiers: vec![TierConfig {
                intensity_per_km2: 1.0,
                power_mw: 1.0,
            }],
            sim_radius_km: 1.0,
            obs_radius_km: 0.5,
            grid_step_km: grid_step,
            pathloss_k_per_km: 1.0,
            pathloss_beta: 3.8,
            shadow_sigma_db: sigma,
            shadow_corr_km: corr,
            noise_mw: 1e-9,
        }
    }

    fn dummy_stations(n: usize) -> Vec<BaseStation> {
        (0..n)
            .map(|id| BaseStation {
                id,
                x_km: 0.0,
                y_km: 0.0,
                tier: 1,
                power_mw: 1.0,
            })
            .collect()
    }

    #[test]
    fn zero_sigma_gives_unit_multipliers() {
        let cfg = field_config(0.2, 0.0, 0.05);
        let grid = Grid::new(cfg.sim_radius_km, cfg.grid_step_km);
        let f = sample_shadowing(&dummy_stations(5), &grid, &cfg, 1);
        for s in 0..5 {
            assert!(f.station_slice(s).iter().all(|&v| v == 1.0));
        }
    }

    #[test]
    fn marginal_std_matches_sigma() {
        // 10*log10(S) at a fixed pixel across 10^4 independent fields.
        let cfg = field_config(0.2, 10.0, 0.2);
        let grid = Grid::new(cfg.sim_radius_km, cfg.grid_step_km);
        let f = sample_shadowing(&dummy_stations(10_000), &grid, &cfg, 9);
        let pixel = grid.len() / 2;
        let db: Vec<f64> = (0..10_000)
            .map(|s| 10.0 * f.value(s, pixel).log10())
            .collect();
        let std = sample_std(&db);
        assert!((std - 10.0).abs() < 0.3, "sample std {std}");
        assert!(mean(&db).abs() < 0.3, "mean {}", mean(&db));
    }

    #[test]
    fn marginal_is_lognormal_ks() {
        let cfg = field_config(0.25, 10.0, 0.1);
        let grid = Grid::new(cfg.sim_radius_km, cfg.grid_step_km);
        let n = 10_000;
        let f = sample_shadowing(&dummy_stations(n), &grid, &cfg, 5);
        let pixel = 0;
        let mut db: Vec<f64> = (0..n).map(|s| 10.0 * f.value(s, pixel).log10()).collect();
        let d = ks_statistic(&mut db, |x| normal_cdf(x, 0.0, 10.0));
        assert!(d < ks_critical(n, 0.01), "KS {d} vs {}", ks_critical(n, 0.01));
    }

    #[test]
    fn exponential_correlation_between_pixels() {
        let cfg = field_config(0.2, 10.0, 0.2);
        let grid = Grid::new(cfg.sim_radius_km, cfg.grid_step_km);
        let n = 6000;
        let f = sample_shadowing(&dummy_stations(n), &grid, &cfg, 11);
        // Pick two horizontally adjacent pixels (distance = one step).
        let p0 = grid
            .centers()
            .iter()
            .position(|&(x, y)| x.abs() < 0.11 && y.abs() < 0.11)
            .unwrap();
        let (x0, y0) = grid.center(p0);
        let p1 = grid
            .centers()
            .iter()
            .position(|&(x, y)| (x - x0 - 0.2).abs() < 1e-9 && (y - y0).abs() < 1e-9)
            .unwrap();
        let a: Vec<f64> = (0..n).map(|s| 10.0 * f.value(s, p0).log10()).collect();
        let b: Vec<f64> = (0..n).map(|s| 10.0 * f.value(s, p1).log10()).collect();
        let (ma, mb) = (mean(&a), mean(&b));
        let mut cov = 0.0;
        for i in 0..n {
            cov += (a[i] - ma) * (b[i] - mb);
        }
        cov /= (n - 1) as f64;
        let corr = cov / (sample_std(&a) * sample_std(&b));
        let expected = (-1.0f64).exp(); // distance equals corr length
        assert!(
            (corr - expected).abs() < 0.05,
            "corr {corr} vs {expected}"
        );
    }

    #[test]
    fn vanishing_correlation_length_gives_white_noise() {
        let cfg = field_config(0.25, 10.0, 1e-9);
        let grid = Grid::new(cfg.sim_radius_km, cfg.grid_step_km);
        let n = 4000;
        let f = sample_shadowing(&dummy_stations(n), &grid, &cfg, 13);
        let a: Vec<f64> = (0..n).map(|s| 10.0 * f.value(s, 0).log10()).collect();
        let b: Vec<f64> = (0..n).map(|s| 10.0 * f.value(s, 1).log10()).collect();
        let (ma, mb) = (mean(&a), mean(&b));
        let mut cov = 0.0;
        for i in 0..n {
            cov += (a[i] - ma) * (b[i] - mb);
        }
        cov /= (n - 1) as f64;
        let corr = cov / (sample_std(&a) * sample_std(&b));
        assert!(corr.abs() < 0.06, "corr {corr} should be near zero");
    }
}
