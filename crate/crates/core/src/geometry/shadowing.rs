//! Per-station shadowing fields on the pixel grid.
//!
//! Each station carries an independent stationary Gaussian random field in
//! the dB domain, with zero mean, standard deviation `shadow_sigma_db` and
//! isotropic exponential correlation `exp(-d / shadow_corr_km)`. Fields are
//! generated by circulant embedding of the covariance on a padded torus:
//! one complex FFT yields two independent fields. Exponentiating to
//! `10^(G/10)` gives the median-1 log-normal multiplier.

use rand::Rng;
use rand_distr::StandardNormal;
use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};
use std::sync::Arc;

use super::grid::Grid;
use super::GeometryConfig;
use crate::geometry::BaseStation;
use crate::rng::{stream_rng, STREAM_SHADOWING};

/// Log-normal shadowing multipliers for every (station, pixel) pair,
/// linear scale, station-major storage.
#[derive(Debug, Clone, PartialEq)]
pub struct ShadowingField {
    n_stations: usize,
    n_pixels: usize,
    values: Vec<f64>,
}

impl ShadowingField {
    /// Field of constant multiplier 1 (the sigma = 0 case).
    pub fn uniform(n_stations: usize, n_pixels: usize) -> Self {
        Self {
            n_stations,
            n_pixels,
            values: vec![1.0; n_stations * n_pixels],
        }
    }

    /// Build from explicit per-station, per-pixel multipliers
    /// (station-major). All values must be positive.
    pub fn from_values(n_stations: usize, n_pixels: usize, values: Vec<f64>) -> Self {
        assert_eq!(values.len(), n_stations * n_pixels);
        assert!(values.iter().all(|&v| v > 0.0), "shadowing must be positive");
        Self {
            n_stations,
            n_pixels,
            values,
        }
    }

    pub fn n_stations(&self) -> usize {
        self.n_stations
    }

    pub fn n_pixels(&self) -> usize {
        self.n_pixels
    }

    /// Linear multiplier seen at `pixel` from `station`.
    pub fn value(&self, station: usize, pixel: usize) -> f64 {
        self.values[station * self.n_pixels + pixel]
    }

    pub fn station_slice(&self, station: usize) -> &[f64] {
        &self.values[station * self.n_pixels..(station + 1) * self.n_pixels]
    }
}

/// Sample independent shadowing fields for every station.
///
/// Only the station count enters: fields are i.i.d. across stations and
/// stationary in space, so the field attached to a station is generated
/// directly in pixel coordinates.
pub fn sample_shadowing(
    stations: &[BaseStation],
    grid: &Grid,
    config: &GeometryConfig,
    seed: u64,
) -> ShadowingField {
    let n_stations = stations.len();
    if config.shadow_sigma_db == 0.0 || n_stations == 0 {
        return ShadowingField::uniform(n_stations, grid.len());
    }
    let mut rng = stream_rng(seed, STREAM_SHADOWING);
    let sampler = CirculantSampler::new(grid, config.shadow_sigma_db, config.shadow_corr_km);

    let n_pixels = grid.len();
    let mut values = vec![0.0; n_stations * n_pixels];
    let mut s = 0;
    while s < n_stations {
        let (field_a, field_b) = sampler.sample_pair(&mut rng);
        write_station(&mut values[s * n_pixels..(s + 1) * n_pixels], grid, &field_a, sampler.m);
        s += 1;
        if s < n_stations {
            write_station(&mut values[s * n_pixels..(s + 1) * n_pixels], grid, &field_b, sampler.m);
            s += 1;
        }
    }
    ShadowingField::from_values(n_stations, n_pixels, values)
}

fn write_station(out: &mut [f64], grid: &Grid, db_field: &[f64], m: usize) {
    for (p, slot) in out.iter_mut().enumerate() {
        let (ix, iy) = grid.coord(p);
        let g_db = db_field[iy as usize * m + ix as usize];
        *slot = 10f64.powf(g_db / 10.0);
    }
}

/// Stationary Gaussian field sampler by circulant embedding on an
/// `m x m` torus, `m >= 2 * nx` rounded up to a 5-smooth FFT size.
struct CirculantSampler {
    m: usize,
    /// Premultiplied `sqrt(eigenvalue / M)` per torus mode.
    factor: Vec<f64>,
    ifft: Arc<dyn Fft<f64>>,
}

impl CirculantSampler {
    fn new(grid: &Grid, sigma_db: f64, corr_km: f64) -> Self {
        assert!(corr_km > 0.0);
        let m = next_fast_size(2 * grid.nx());
        let total = m * m;
        let step = grid.step_km();

        // Covariance kernel on the torus (wrap-around distances).
        let mut buf: Vec<Complex<f64>> = Vec::with_capacity(total);
        let var = sigma_db * sigma_db;
        for q in 0..m {
            let dy = q.min(m - q) as f64 * step;
            for p in 0..m {
                let dx = p.min(m - p) as f64 * step;
                let d = (dx * dx + dy * dy).sqrt();
                buf.push(Complex::new(var * (-d / corr_km).exp(), 0.0));
            }
        }

        let mut planner = FftPlanner::new();
        let fft = planner.plan_fft_forward(m);
        let ifft = planner.plan_fft_inverse(m);
        fft2(&mut buf, m, &fft);

        // Clamp the (tiny, if any) negative embedding eigenvalues and
        // rescale so the marginal variance is exactly sigma^2.
        let mut sum_pos = 0.0;
        let mut eig: Vec<f64> = buf
            .iter()
            .map(|c| {
                let v = c.re.max(0.0);
                sum_pos += v;
                v
            })
            .collect();
        let rescale = var * total as f64 / sum_pos;
        for v in eig.iter_mut() {
            *v = (*v * rescale / total as f64).sqrt();
        }

        Self {
            m,
            factor: eig,
            ifft,
        }
    }

    /// Two independent zero-mean dB fields over the full `m x m` square.
    fn sample_pair<R: Rng>(&self, rng: &mut R) -> (Vec<f64>, Vec<f64>) {
        let total = self.m * self.m;
        let mut buf: Vec<Complex<f64>> = (0..total)
            .map(|k| {
                let re: f64 = rng.sample(StandardNormal);
                let im: f64 = rng.sample(StandardNormal);
                Complex::new(re * self.factor[k], im * self.factor[k])
            })
            .collect();
        fft2(&mut buf, self.m, &self.ifft);
        (
            buf.iter().map(|c| c.re).collect(),
            buf.iter().map(|c| c.im).collect(),
        )
    }
}

/// In-place 2D FFT: rows, transpose, rows, transpose.
fn fft2(buf: &mut [Complex<f64>], m: usize, fft: &Arc<dyn Fft<f64>>) {
    let mut scratch = vec![Complex::new(0.0, 0.0); fft.get_inplace_scratch_len()];
    for row in buf.chunks_exact_mut(m) {
        fft.process_with_scratch(row, &mut scratch);
    }
    transpose_square(buf, m);
    for row in buf.chunks_exact_mut(m) {
        fft.process_with_scratch(row, &mut scratch);
    }
    transpose_square(buf, m);
}

fn transpose_square(buf: &mut [Complex<f64>], m: usize) {
    for r in 0..m {
        for c in (r + 1)..m {
            buf.swap(r * m + c, c * m + r);
        }
    }
}

/// Smallest 5-smooth integer >= `min` (fast FFT length).
fn next_fast_size(min: usize) -> usize {
    let mut m = min.max(2);
    loop {
        let mut k = m;
        for f in [2, 3, 5] {
            while k % f == 0 {
                k /= f;
            }
        }
        if k == 1 {
            return m;
        }
        m += 1;
    }
}
