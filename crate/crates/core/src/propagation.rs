//! Path loss, propagation loss and the activity-weighted SINR.
//!
//! The propagation loss of station `X` at location `y` is
//! `l(|y - X|) / (P_X * S_X(y))` with path loss `l(d) = (K d)^beta`: a
//! dimensionless linear factor where larger means weaker. The SINR at a
//! pixel weights every interferer by `min(phi, 1) * (1 - eps) + eps`, the
//! busy probability diluted by the always-on pilot fraction `eps`; the
//! serving signal is unaffected by the pilot.
//!
//! The fixed-point loop re-evaluates the SINR field many times on a static
//! geometry, so the tier-independent `1/L` values are cached once per
//! snapshot in a pixel-major [`LossTable`] and only the weights change
//! across iterations.

use crate::geometry::{BaseStation, GeometryConfig, NetworkSnapshot};

/// Deterministic part of the propagation law.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PropagationModel {
    pub k_per_km: f64,
    pub beta: f64,
    /// Distances below this are clamped so a pixel containing its own
    /// station sees a finite, strong signal (half a grid step).
    pub min_distance_km: f64,
}

impl PropagationModel {
    pub fn from_config(config: &GeometryConfig) -> Self {
        Self {
            k_per_km: config.pathloss_k_per_km,
            beta: config.pathloss_beta,
            min_distance_km: config.grid_step_km / 2.0,
        }
    }

    /// Raw path loss `(K d)^beta`; 0 at `d = 0`.
    pub fn path_loss(&self, distance_km: f64) -> f64 {
        debug_assert!(distance_km >= 0.0);
        (self.k_per_km * distance_km).powf(self.beta)
    }

    /// Path loss with the near-field singularity clamped at
    /// `min_distance_km`.
    pub fn capped_path_loss(&self, distance_km: f64) -> f64 {
        self.path_loss(distance_km.max(self.min_distance_km))
    }
}

/// Propagation loss of `bs` at `pixel` given the local shadowing multiplier:
/// capped path loss over `power * shadow`. Monotone decreasing in both
/// power and shadowing.
pub fn propagation_loss(
    model: &PropagationModel,
    bs: &BaseStation,
    pixel: (f64, f64),
    shadow: f64,
) -> f64 {
    let d = bs.distance_to(pixel.0, pixel.1);
    model.capped_path_loss(d) / (bs.power_mw * shadow)
}

/// Per-station activity factors `phi in [0, 1]` weighting the interference.
#[derive(Debug, Clone, PartialEq)]
pub struct ActivityVector(pub Vec<f64>);

impl ActivityVector {
    /// Full-interference model: every station always transmits.
    pub fn full(n: usize) -> Self {
        Self(vec![1.0; n])
    }

    /// Idle network.
    pub fn idle(n: usize) -> Self {
        Self(vec![0.0; n])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Interference weight of one station: `min(phi, 1) (1 - eps) + eps`.
pub fn interference_weight(activity: f64, pilot_eps: f64) -> f64 {
    activity.min(1.0) * (1.0 - pilot_eps) + pilot_eps
}

/// Cached `1/L` for every (pixel, station) pair, pixel-major.
///
/// `1/L` is the power received at the pixel in mW, so SINR assembly is a
/// weighted sum over a contiguous row. Built once per snapshot, read-only
/// afterwards.
#[derive(Debug, Clone)]
pub struct LossTable {
    n_pixels: usize,
    n_stations: usize,
    inv_loss: Vec<f64>,
}

impl LossTable {
    pub fn build(snapshot: &NetworkSnapshot, model: &PropagationModel) -> Self {
        let n_pixels = snapshot.grid.len();
        let n_stations = snapshot.stations.len();
        let mut inv_loss = vec![0.0; n_pixels * n_stations];
        for (s, bs) in snapshot.stations.iter().enumerate() {
            let shadow = snapshot.shadowing.station_slice(s);
            for p in 0..n_pixels {
                let loss = propagation_loss(model, bs, snapshot.grid.center(p), shadow[p]);
                inv_loss[p * n_stations + s] = 1.0 / loss;
            }
        }
        Self {
            n_pixels,
            n_stations,
            inv_loss,
        }
    }

    /// Assemble a table from raw `1/L` values (pixel-major), for tests and
    /// hand-constructed layouts.
    pub fn from_inv_loss(n_pixels: usize, n_stations: usize, inv_loss: Vec<f64>) -> Self {
        assert_eq!(inv_loss.len(), n_pixels * n_stations);
        Self {
            n_pixels,
            n_stations,
            inv_loss,
        }
    }

    pub fn n_pixels(&self) -> usize {
        self.n_pixels
    }

    pub fn n_stations(&self) -> usize {
        self.n_stations
    }

    /// Received powers `1/L` of every station at one pixel.
    pub fn row(&self, pixel: usize) -> &[f64] {
        &self.inv_loss[pixel * self.n_stations..(pixel + 1) * self.n_stations]
    }

    pub fn inv_loss(&self, pixel: usize, station: usize) -> f64 {
        self.inv_loss[pixel * self.n_stations + station]
    }

    /// Station with the smallest propagation loss at a pixel; ties go to the
    /// lowest station id.
    pub fn strongest(&self, pixel: usize) -> usize {
        let row = self.row(pixel);
        let mut best = 0;
        for (s, &v) in row.iter().enumerate().skip(1) {
            if v > row[best] {
                best = s;
            }
        }
        best
    }

    /// SINR at a pixel for a given serving station and per-station
    /// interference weights (already pilot-corrected).
    pub fn sinr_weighted(
        &self,
        pixel: usize,
        serving: usize,
        weights: &[f64],
        noise_mw: f64,
    ) -> f64 {
        let row = self.row(pixel);
        let mut interference = 0.0;
        for (s, &inv) in row.iter().enumerate() {
            if s != serving {
                interference += weights[s] * inv;
            }
        }
        row[serving] / (noise_mw + interference)
    }
}

/// SINR at a pixel under activity factors `phi` and pilot fraction `eps`.
pub fn sinr(
    table: &LossTable,
    pixel: usize,
    serving: usize,
    activity: &ActivityVector,
    pilot_eps: f64,
    noise_mw: f64,
) -> f64 {
    debug_assert_eq!(activity.len(), table.n_stations());
    let weights: Vec<f64> = activity
        .0
        .iter()
        .map(|&phi| interference_weight(phi, pilot_eps))
        .collect();
    table.sinr_weighted(pixel, serving, &weights, noise_mw)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{sample_network, GeometryConfig, TierConfig};
    use crate::units::dbm_to_mw;
    use approx::assert_relative_eq;

    fn model() -> PropagationModel {
        PropagationModel {
            k_per_km: 7117.0,
            beta: 3.8,
            min_distance_km: 0.025,
        }
    }

    #[test]
    fn path_loss_reference_points() {
        let m = model();
        // Unit argument: d = 1/K.
        assert_relative_eq!(m.path_loss(1.0 / 7117.0), 1.0, epsilon = 1e-12);
        // Direct arithmetic at d = 0.5 km.
        assert_relative_eq!(
            m.path_loss(0.5),
            (7117.0f64 * 0.5).powf(3.8),
            epsilon = 1e-3
        );
        assert_relative_eq!(m.path_loss(0.5), 3.124e13, max_relative = 1e-3);
        // Homogeneity: doubling the distance multiplies by 2^beta.
        assert_relative_eq!(
            m.path_loss(0.8) / m.path_loss(0.4),
            2f64.powf(3.8),
            epsilon = 1e-9
        );
        assert_eq!(m.path_loss(0.0), 0.0);
    }

    #[test]
    fn near_field_cap() {
        let m = model();
        assert_eq!(m.capped_path_loss(0.0), m.path_loss(0.025));
        assert_eq!(m.capped_path_loss(0.01), m.path_loss(0.025));
        assert_eq!(m.capped_path_loss(0.3), m.path_loss(0.3));
    }

    fn station(power_mw: f64) -> BaseStation {
        BaseStation {
            id: 0,
            x_km: 0.0,
            y_km: 0.0,
            tier: 1,
            power_mw,
        }
    }

    #[test]
    fn propagation_loss_scaling() {
        let m = model();
        let pixel = (0.4, 0.3); // distance 0.5
        // Unit power, unit shadowing reduces to the path loss.
        assert_relative_eq!(
            propagation_loss(&m, &station(1.0), pixel, 1.0),
            m.path_loss(0.5),
            epsilon = 1e-6
        );
        // Doubling power halves the loss.
        assert_relative_eq!(
            propagation_loss(&m, &station(2.0), pixel, 1.0) * 2.0,
            propagation_loss(&m, &station(1.0), pixel, 1.0),
            epsilon = 1e-12
        );
        // dB arithmetic on the two paper powers at equal distance/shadowing.
        let l1 = propagation_loss(&m, &station(dbm_to_mw(58.26)), pixel, 1.0);
        let l2 = propagation_loss(&m, &station(dbm_to_mw(47.42)), pixel, 1.0);
        assert_relative_eq!(l1 / l2, 10f64.powf((47.42 - 58.26) / 10.0), epsilon = 1e-9);
        assert_relative_eq!(l1 / l2, 0.0824, max_relative = 1e-3);
    }

    #[test]
    fn sinr_single_station_is_noise_limited() {
        let inv = vec![2.0e-7];
        let table = LossTable::from_inv_loss(1, 1, inv);
        let noise = 1e-9;
        let s = sinr(&table, 0, 0, &ActivityVector::full(1), 0.0, noise);
        assert_relative_eq!(s, 2.0e-7 / 1e-9, epsilon = 1e-9);
    }

    #[test]
    fn sinr_idle_network_with_no_pilot_has_no_interference() {
        let table = LossTable::from_inv_loss(1, 3, vec![1e-7, 5e-8, 2e-8]);
        let noise = 1e-9;
        let s = sinr(&table, 0, 0, &ActivityVector::idle(3), 0.0, noise);
        assert_relative_eq!(s, 1e-7 / noise, epsilon = 1e-9);
    }

    #[test]
    fn sinr_two_equal_stations_tends_to_one() {
        let table = LossTable::from_inv_loss(1, 2, vec![1e-6, 1e-6]);
        let s = sinr(&table, 0, 0, &ActivityVector::full(2), 0.0, 1e-18);
        assert_relative_eq!(s, 1.0, epsilon = 1e-9);
    }

    #[test]
    fn sinr_three_station_hand_computed() {
        // Hand-set losses {1e12, 4e12, 8e12}, phi = 1, eps = 0.1,
        // N = 10^-9.6 mW; serving is the strongest station.
        let losses: [f64; 3] = [1e12, 4e12, 8e12];
        let inv: Vec<f64> = losses.iter().map(|l| 1.0 / l).collect();
        let table = LossTable::from_inv_loss(1, 3, inv);
        let noise = 10f64.powf(-9.6);
        let s = sinr(&table, 0, 0, &ActivityVector::full(3), 0.1, noise);
        // Spreadsheet arithmetic: weights min(1,1)*0.9 + 0.1 = 1.
        let expected = (1.0 / 1e12) / (noise + 1.0 / 4e12 + 1.0 / 8e12);
        assert_relative_eq!(s, expected, epsilon = 1e-15);
        assert_relative_eq!(s, 3.9751e-3, max_relative = 1e-4);
    }

    #[test]
    fn sinr_monotonicity_in_activity_noise_and_power() {
        let table = LossTable::from_inv_loss(1, 3, vec![1e-6, 4e-7, 1e-7]);
        let noise = 1e-9;
        let lo = sinr(
            &table,
            0,
            0,
            &ActivityVector(vec![1.0, 0.2, 0.2]),
            0.0,
            noise,
        );
        let hi = sinr(
            &table,
            0,
            0,
            &ActivityVector(vec![1.0, 0.9, 0.9]),
            0.0,
            noise,
        );
        assert!(hi < lo);
        let noisy = sinr(&table, 0, 0, &ActivityVector::full(3), 0.0, 1e-8);
        let quiet = sinr(&table, 0, 0, &ActivityVector::full(3), 0.0, 1e-10);
        assert!(noisy < quiet);
        // Raising serving received power raises SINR.
        let stronger = LossTable::from_inv_loss(1, 3, vec![2e-6, 4e-7, 1e-7]);
        assert!(
            sinr(&stronger, 0, 0, &ActivityVector::full(3), 0.0, noise)
                > sinr(&table, 0, 0, &ActivityVector::full(3), 0.0, noise)
        );
    }

    #[test]
    fn full_pilot_makes_activity_irrelevant() {
        let table = LossTable::from_inv_loss(1, 3, vec![1e-6, 4e-7, 1e-7]);
        let a = sinr(&table, 0, 0, &ActivityVector::idle(3), 1.0, 1e-9);
        let b = sinr(&table, 0, 0, &ActivityVector::full(3), 1.0, 1e-9);
        let c = sinr(
            &table,
            0,
            0,
            &ActivityVector(vec![0.3, 0.7, 0.1]),
            1.0,
            1e-9,
        );
        assert_eq!(a, b);
        assert_eq!(a, c);
    }

    #[test]
    fn weighted_sinr_equals_direct_unweighted_implementation() {
        // Regression: phi = 1, eps = 0 must reproduce the plain SINR
        // definition computed directly from the snapshot.
        let cfg = GeometryConfig {
            tiers: vec![TierConfig {
                intensity_per_km2: 12.0,
                power_mw: dbm_to_mw(30.0),
            }],
            sim_radius_km: 1.0,
            obs_radius_km: 0.7,
            grid_step_km: 0.1,
            pathloss_k_per_km: 7117.0,
            pathloss_beta: 3.8,
            shadow_sigma_db: 8.0,
            shadow_corr_km: 0.1,
            noise_mw: dbm_to_mw(-96.0),
        };
        let snap = sample_network(&cfg, 21).unwrap();
        let m = PropagationModel::from_config(&cfg);
        let table = LossTable::build(&snap, &m);
        let activity = ActivityVector::full(snap.stations.len());
        for pixel in [0, snap.grid.len() / 2, snap.grid.len() - 1] {
            let serving = table.strongest(pixel);
            let got = sinr(&table, pixel, serving, &activity, 0.0, cfg.noise_mw);
            // Independent direct evaluation from first principles.
            let (px, py) = snap.grid.center(pixel);
            let mut num = 0.0;
            let mut denom = cfg.noise_mw;
            for (s, bs) in snap.stations.iter().enumerate() {
                let loss = propagation_loss(&m, bs, (px, py), snap.shadowing.value(s, pixel));
                if s == serving {
                    num = 1.0 / loss;
                } else {
                    denom += 1.0 / loss;
                }
            }
            assert_relative_eq!(got, num / denom, max_relative = 1e-12);
        }
    }
}
