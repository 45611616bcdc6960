//! Strongest-signal service zones.
//!
//! Every pixel is served by the station with the smallest propagation loss,
//! so a cell is the pixel set where its station wins; with shadowing this
//! set need not be connected. Cell surfaces are pixel counts times the
//! pixel area, which makes the surfaces an exact partition of the gridded
//! window. Stations whose cell is fully shadowed out keep surface 0 so
//! indexing stays stable; downstream statistics skip them.

use crate::error::ModelError;
use crate::propagation::LossTable;

/// Grid partition into service zones.
#[derive(Debug, Clone, PartialEq)]
pub struct CellMap {
    /// Serving station id per pixel.
    pub serving: Vec<usize>,
    /// Pixel list per station.
    pub pixels: Vec<Vec<usize>>,
    /// Cell surface per station in km^2.
    pub surface_km2: Vec<f64>,
}

impl CellMap {
    pub fn n_stations(&self) -> usize {
        self.pixels.len()
    }
}

/// Assign every pixel to the station with minimal propagation loss, ties
/// broken by lowest station id.
pub fn assign_cells(table: &LossTable, pixel_area_km2: f64) -> Result<CellMap, ModelError> {
    if table.n_stations() == 0 {
        return Err(ModelError::EmptyNetwork);
    }
    let mut serving = Vec::with_capacity(table.n_pixels());
    let mut pixels = vec![Vec::new(); table.n_stations()];
    for p in 0..table.n_pixels() {
        let s = table.strongest(p);
        serving.push(s);
        pixels[s].push(p);
    }
    let surface_km2 = pixels
        .iter()
        .map(|px| px.len() as f64 * pixel_area_km2)
        .collect();
    Ok(CellMap {
        serving,
        pixels,
        surface_km2,
    })
}

/// Traffic demand of one cell in bps: `rho * |V(X)|` for a per-surface
/// demand `rho` in bps per km^2. Zero-surface cells carry no demand.
pub fn traffic_demand(map: &CellMap, station: usize, rho_bps_per_km2: f64) -> f64 {
    rho_bps_per_km2 * map.surface_km2[station]
}
