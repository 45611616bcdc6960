//! Unit conversions used at I/O boundaries. Internally all powers are linear
//! milliwatts, distances kilometres, rates bits per second.

/// Convert a power in dBm to linear milliwatts.
pub fn dbm_to_mw(dbm: f64) -> f64 {
    10f64.powf(dbm / 10.0)
}

/// Convert a linear power in milliwatts to dBm.
pub fn mw_to_dbm(mw: f64) -> f64 {
    10.0 * mw.log10()
}

/// Convert a linear gain to decibels.
pub fn linear_to_db(linear: f64) -> f64 {
    10.0 * linear.log10()
}

/// Convert decibels to a linear gain.
pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}
