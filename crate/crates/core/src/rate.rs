//! Peak bit-rate as a function of SINR.
//!
//! The peak rate is a fixed fraction of the Shannon capacity of a Rayleigh
//! fading channel with AWGN, `eff * W * E[log2(1 + |H|^2 s)]` with
//! `|H|^2 ~ Exp(1)`. The fading expectation has the closed form
//! `E[ln(1 + h s)] = exp(1/s) * E1(1/s)`, evaluated here through a scaled
//! exponential integral that never forms `exp(1/s)` explicitly, so small
//! SINR values cannot overflow.
//!
//! The reciprocal rate (seconds per bit) is what the cell-load integrals
//! consume: critical traffic is a harmonic mean of peak rates, so `R^-1`
//! always denotes the reciprocal, not a functional inverse.

use crate::error::ModelError;

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Bandwidth and spectral-efficiency fraction of the rate map.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateParams {
    /// System bandwidth W in Hz.
    pub bandwidth_hz: f64,
    /// Fraction of the information-theoretic capacity actually delivered.
    pub efficiency: f64,
}

impl RateParams {
    pub fn validate(&self) -> Result<(), ModelError> {
        if !(self.bandwidth_hz > 0.0) {
            return Err(ModelError::InvalidConfig(format!(
                "bandwidth_hz must be > 0, got {}",
                self.bandwidth_hz
            )));
        }
        if !(self.efficiency > 0.0 && self.efficiency <= 1.0) {
            return Err(ModelError::InvalidConfig(format!(
                "efficiency must be in (0, 1], got {}",
                self.efficiency
            )));
        }
        Ok(())
    }
}

/// A monotone map from linear SINR to peak bit-rate in bits per second.
///
/// The load analysis does not depend on the particular shape, only on
/// monotonicity, so alternative rate maps can be plugged in here.
pub trait RateFunction: Send + Sync {
    /// Peak bit-rate in bps; 0 at zero SINR.
    fn peak_rate(&self, sinr: f64) -> f64;

    /// Reciprocal rate in seconds per bit; +inf at zero SINR.
    fn inverse_rate(&self, sinr: f64) -> f64 {
        let r = self.peak_rate(sinr);
        if r > 0.0 {
            1.0 / r
        } else {
            f64::INFINITY
        }
    }
}

/// Closed-form Rayleigh-averaged Shannon rate.
#[derive(Debug, Clone, Copy)]
pub struct ShannonRate {
    params: RateParams,
}

impl ShannonRate {
    pub fn new(params: RateParams) -> Self {
        Self { params }
    }

    pub fn params(&self) -> RateParams {
        self.params
    }
}

impl RateFunction for ShannonRate {
    fn peak_rate(&self, sinr: f64) -> f64 {
        if sinr <= 0.0 {
            return 0.0;
        }
        let scale = self.params.efficiency * self.params.bandwidth_hz;
        scale * e1_scaled(1.0 / sinr) / std::f64::consts::LN_2
    }
}

/// Scaled exponential integral `exp(x) * E1(x)` for `x > 0`.
///
/// Series expansion below 1, modified-Lentz continued fraction above. The
/// continued fraction yields the scaled value directly, which keeps the
/// result finite for arbitrarily large `x` where `exp(x)` alone overflows.
pub fn e1_scaled(x: f64) -> f64 {
    assert!(x > 0.0, "e1_scaled requires x > 0, got {x}");
    if x <= 1.0 {
        // E1(x) = -gamma - ln x + sum_{k>=1} (-1)^(k+1) x^k / (k * k!)
        let mut sum = 0.0;
        let mut term = 1.0;
        for k in 1..=40 {
            term *= -x / k as f64;
            let delta = -term / k as f64;
            sum += delta;
            if delta.abs() < 1e-17 * sum.abs().max(1.0) {
                break;
            }
        }
        (-EULER_GAMMA - x.ln() + sum) * x.exp()
    } else {
        // Lentz evaluation of E1(x) = exp(-x) / (x + 1 - 1/(x + 3 - 4/(...)))
        const FPMIN: f64 = 1e-300;
        let mut b = x + 1.0;
        let mut c = 1.0 / FPMIN;
        let mut d = 1.0 / b;
        let mut h = d;
        for i in 1..=200u32 {
            let a = -((i as f64) * (i as f64));
            b += 2.0;
            d = 1.0 / (a * d + b);
            c = b + a / c;
            let del = c * d;
            h *= del;
            if (del - 1.0).abs() < 1e-16 {
                break;
            }
        }
        h
    }
}

/// Log-spaced lookup table over a [`ShannonRate`], an opt-in fast path for
/// the fixed-point iterations that re-evaluate the same SINR field. Falls
/// back to the exact form outside the tabulated range. Linear interpolation
/// between monotone knots keeps the table monotone.
#[derive(Debug, Clone)]
pub struct TabulatedRate {
    exact: ShannonRate,
    ln_min: f64,
    inv_step: f64,
    rates: Vec<f64>,
}

impl TabulatedRate {
    pub const DEFAULT_KNOTS: usize = 4096;
    const S_MIN: f64 = 1e-9;
    const S_MAX: f64 = 1e9;

    pub fn new(params: RateParams) -> Self {
        Self::with_knots(params, Self::DEFAULT_KNOTS)
    }

    pub fn with_knots(params: RateParams, knots: usize) -> Self {
        assert!(knots >= 2);
        let exact = ShannonRate::new(params);
        let ln_min = Self::S_MIN.ln();
        let ln_max = Self::S_MAX.ln();
        let step = (ln_max - ln_min) / (knots - 1) as f64;
        let rates = (0..knots)
            .map(|i| exact.peak_rate((ln_min + step * i as f64).exp()))
            .collect();
        Self {
            exact,
            ln_min,
            inv_step: 1.0 / step,
            rates,
        }
    }
}

impl RateFunction for TabulatedRate {
    fn peak_rate(&self, sinr: f64) -> f64 {
        if !(Self::S_MIN..=Self::S_MAX).contains(&sinr) {
            return self.exact.peak_rate(sinr);
        }
        let t = (sinr.ln() - self.ln_min) * self.inv_step;
        let i = (t as usize).min(self.rates.len() - 2);
        let frac = t - i as f64;
        self.rates[i] + (self.rates[i + 1] - self.rates[i]) * frac
    }
}
