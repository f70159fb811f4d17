//! Reference processes: the Poisson counting process, whose response
//! probability grows linearly in time, and relaxation on an infinite uniform
//! tree, which decays as a power law instead of an exponential.

use statrs::function::factorial::ln_factorial;
use statrs::function::gamma::gamma;

use crate::error::{Error, Result};
use crate::fitting::fit_linear;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PoissonModel {
    rho: f64,
    saturation_time: f64,
}

impl PoissonModel {
    pub fn new(rho: f64, saturation_time: f64) -> Result<Self> {
        if !(rho > 0.0 && rho.is_finite()) {
            return Err(Error::InvalidArgument(format!("rate must be positive, got {rho}")));
        }
        if !(saturation_time > 0.0 && saturation_time.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "saturation time must be positive, got {saturation_time}"
            )));
        }
        Ok(Self { rho, saturation_time })
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn saturation_time(&self) -> f64 {
        self.saturation_time
    }
}

/// `e^{-ρt} (ρt)^k / k!`, evaluated in log space.
pub fn poisson_pmf(m: &PoissonModel, k: u64, t: f64) -> f64 {
    let mean = m.rho * t;
    if mean == 0.0 {
        return if k == 0 { 1.0 } else { 0.0 };
    }
    (k as f64 * mean.ln() - mean - ln_factorial(k)).exp()
}

/// `E[N(t)] = ρ t`.
pub fn poisson_expected(m: &PoissonModel, t: f64) -> f64 {
    m.rho * t
}

/// Probability that an event has occurred by `t`, `t / T0`, capped at 1.
pub fn poisson_event_probability(m: &PoissonModel, t: f64) -> f64 {
    (t / m.saturation_time).min(1.0)
}

/// Uniform tree where every node has `b` children and consecutive levels
/// are `delta_h` apart.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerLawModel {
    b: u32,
    delta_h: f64,
}

impl PowerLawModel {
    pub fn new(b: u32, delta_h: f64) -> Result<Self> {
        if b < 2 {
            return Err(Error::InvalidArgument(format!("branching factor must be >= 2, got {b}")));
        }
        if !(delta_h > 0.0 && delta_h.is_finite()) {
            return Err(Error::InvalidArgument(format!("level spacing must be positive, got {delta_h}")));
        }
        let m = Self { b, delta_h };
        let s = m.silhouette();
        if delta_h.exp() == b as f64 {
            return Err(Error::InvalidArgument(
                "e^Δh = b makes the series coefficient singular (this is the s = 1 boundary)".into(),
            ));
        }
        if !(s < 1.0) {
            return Err(Error::NotPowerLaw(s));
        }
        Ok(m)
    }

    pub fn branching(&self) -> u32 {
        self.b
    }

    pub fn delta_h(&self) -> f64 {
        self.delta_h
    }

    /// `s = ln(b) / Δh`.
    pub fn silhouette(&self) -> f64 {
        (self.b as f64).ln() / self.delta_h
    }

    /// Decay exponent `v = s / (1 - s)`.
    pub fn exponent(&self) -> f64 {
        let s = self.silhouette();
        s / (1.0 - s)
    }

    /// `(e^Δh - 1) / (e^Δh - b)`.
    fn rate_constant(&self) -> f64 {
        let e = self.delta_h.exp();
        (e - 1.0) / (e - self.b as f64)
    }

    /// Prefactor `D = Γ(v) c^{-v} ((b - 1)/ln b) v` of the asymptote `D t^{-v}`.
    pub fn prefactor(&self) -> f64 {
        let v = self.exponent();
        let b = self.b as f64;
        gamma(v) * self.rate_constant().powf(-v) * (b - 1.0) / b.ln() * v
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerLawPoint {
    /// Truncated series for the averaged autocorrelation.
    pub series: f64,
    /// `D t^{-v}`.
    pub asymptote: f64,
    /// Upper bound on the omitted tail, `b^{-terms}`.
    pub truncation_bound: f64,
}

/// Averaged autocorrelation on the infinite tree, as a truncated series
/// `Σ_{m=1..terms} (b-1) b^{-m} exp(-t (b e^{-Δh})^m c)` next to its
/// large-`t` asymptote.
pub fn power_law_curve(m: &PowerLawModel, t: f64, terms: u32) -> Result<PowerLawPoint> {
    if terms == 0 {
        return Err(Error::InvalidArgument("series needs at least one term".into()));
    }
    if !(t > 0.0) {
        return Err(Error::InvalidArgument(format!("time must be positive, got {t}")));
    }
    let b = m.b as f64;
    let ratio = b * (-m.delta_h).exp();
    let c = m.rate_constant();
    let mut series = 0.0;
    // Smallest terms first.
    for k in (1..=terms).rev() {
        let kf = k as f64;
        series += (b - 1.0) * b.powf(-kf) * (-t * ratio.powf(kf) * c).exp();
    }
    Ok(PowerLawPoint {
        series,
        asymptote: m.prefactor() * t.powf(-m.exponent()),
        truncation_bound: b.powf(-(terms as f64)),
    })
}

/// Least-squares slope of `ln y` against `ln t`.
pub fn loglog_slope(t: &[f64], y: &[f64]) -> Result<f64> {
    let lt: Vec<f64> = t.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    if lt.iter().chain(&ly).any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument("log-log slope needs positive values".into()));
    }
    Ok(fit_linear(&lt, &ly)?.1)
}
