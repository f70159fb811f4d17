//! Fitting the saturating exponential `h1 (1 - e^{-h2 t}) + h3` to popularity
//! curves, mapping fits to chain parameters, and generating the matching
//! model curve and synthetic traces.

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::quiescent_decay_rate;
use crate::trace::{EventTrace, PopularityCurve};

/// Amplitudes are bounded by this multiple of the largest observed value.
/// Without a bound, exactly linear data drives the fit to `h2 -> 0`,
/// `h1 -> inf` without ever converging.
pub const AMPLITUDE_BOUND_FACTOR: f64 = 10.0;

/// Fitted saturating exponential.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExponentialFit {
    pub h1: f64,
    pub h2: f64,
    pub h3: f64,
    pub r2: f64,
}

impl ExponentialFit {
    pub fn eval(&self, t: f64) -> f64 {
        universal_curve(self.h1, self.h2, self.h3, t)
    }
}

/// `h1 (1 - e^{-h2 t}) + h3`.
pub fn universal_curve(h1: f64, h2: f64, h3: f64, t: f64) -> f64 {
    -h1 * (-h2 * t).exp_m1() + h3
}

/// How fitted amplitude and rate are turned into chain parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MappingMode {
    /// `t_N = 1/(1 - h2)`, `μ = ln(t_N / h1) / (t_N - 1)`.
    Paper,
    /// Inverts [`simulate_curve`]: amplitude `(t_N - 1)/t_N = h1` and rate
    /// `t_N e^{-μ(t_N - 1)} = h2`.
    #[default]
    Roundtrip,
}

impl fmt::Display for MappingMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MappingMode::Paper => "paper",
            MappingMode::Roundtrip => "roundtrip",
        })
    }
}

impl FromStr for MappingMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "paper" => Ok(MappingMode::Paper),
            "roundtrip" => Ok(MappingMode::Roundtrip),
            other => Err(Error::InvalidArgument(format!(
                "unknown mapping `{other}` (expected paper or roundtrip)"
            ))),
        }
    }
}

/// Chain length, scaling factor and saturation count of a relaxation model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UltradiffusionParams {
    pub t_n: usize,
    pub mu: f64,
    pub m: u64,
    pub mode: MappingMode,
}

impl UltradiffusionParams {
    pub fn new(t_n: usize, mu: f64, m: u64) -> Result<Self> {
        if t_n < 2 {
            return Err(Error::InvalidArgument(format!("t_N must be at least 2, got {t_n}")));
        }
        if !(mu >= 0.0 && mu.is_finite()) {
            return Err(Error::InvalidArgument(format!("mu must be finite and nonnegative, got {mu}")));
        }
        if m == 0 {
            return Err(Error::InvalidArgument("M must be at least 1".into()));
        }
        Ok(Self {
            t_n,
            mu,
            m,
            mode: MappingMode::default(),
        })
    }

    pub fn with_mode(mut self, mode: MappingMode) -> Self {
        self.mode = mode;
        self
    }

    /// Rate `t_N e^{-μ(t_N - 1)}` at which the quiescent state empties.
    pub fn decay_rate(&self) -> f64 {
        quiescent_decay_rate(self.t_n, self.mu)
    }

    /// Five relaxation times, a horizon over which the curve is within
    /// `e^{-5}` of saturation.
    pub fn default_horizon(&self) -> f64 {
        5.0 / self.decay_rate()
    }
}

/// `1 - Σ(o - p)² / Σ(o - ō)²`.
pub fn r_squared(observed: &[f64], predicted: &[f64]) -> Result<f64> {
    if observed.len() != predicted.len() {
        return Err(Error::DimensionMismatch {
            expected: observed.len(),
            actual: predicted.len(),
        });
    }
    if observed.len() < 2 {
        return Err(Error::InvalidArgument("r_squared needs at least 2 points".into()));
    }
    let mean = observed.iter().sum::<f64>() / observed.len() as f64;
    let ss_tot: f64 = observed.iter().map(|o| (o - mean).powi(2)).sum();
    if ss_tot == 0.0 {
        return Err(Error::NoDynamics);
    }
    let ss_res: f64 = observed
        .iter()
        .zip(predicted)
        .map(|(o, p)| (o - p).powi(2))
        .sum();
    Ok(1.0 - ss_res / ss_tot)
}

/// Least-squares straight line `a + b t`; returns `(a, b, r2)`.
pub fn fit_linear(t: &[f64], y: &[f64]) -> Result<(f64, f64, f64)> {
    if t.len() != y.len() {
        return Err(Error::DimensionMismatch {
            expected: t.len(),
            actual: y.len(),
        });
    }
    let n = t.len() as f64;
    let tm = t.iter().sum::<f64>() / n;
    let ym = y.iter().sum::<f64>() / n;
    let stt: f64 = t.iter().map(|x| (x - tm).powi(2)).sum();
    if stt == 0.0 {
        return Err(Error::InvalidArgument("linear fit needs distinct times".into()));
    }
    let sty: f64 = t.iter().zip(y).map(|(x, v)| (x - tm) * (v - ym)).sum();
    let slope = sty / stt;
    let intercept = ym - slope * tm;
    let predicted: Vec<f64> = t.iter().map(|x| intercept + slope * x).collect();
    Ok((intercept, slope, r_squared(y, &predicted)?))
}

/// Fits `h1 (1 - e^{-h2 t}) + h3` to a curve; `h3` is held at 0 unless
/// `offset` is set.
pub fn fit_exponential(curve: &PopularityCurve, offset: bool) -> Result<ExponentialFit> {
    fit_exponential_points(curve.grid(), curve.values(), offset)
}

/// Damped Gauss–Newton fit over `(ln h1, ln h2, h3)` with an analytic
/// Jacobian. Times are scaled to `[0, 1]` internally, so the result scales
/// exactly with the time unit. Several starts are tried (a log-slope
/// estimate and a geometric grid of rates) and the lowest residual wins.
pub fn fit_exponential_points(t: &[f64], y: &[f64], offset: bool) -> Result<ExponentialFit> {
    if t.len() != y.len() {
        return Err(Error::DimensionMismatch {
            expected: t.len(),
            actual: y.len(),
        });
    }
    if t.len() < 3 {
        return Err(Error::InvalidArgument("fit needs at least 3 points".into()));
    }
    let ymin = y.iter().copied().fold(f64::INFINITY, f64::min);
    let ymax = y.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !(ymax > ymin) {
        return Err(Error::NoDynamics);
    }
    let scale = t.iter().map(|x| x.abs()).fold(0.0, f64::max);
    if !(scale > 0.0 && scale.is_finite()) {
        return Err(Error::InvalidArgument("fit needs positive, finite times".into()));
    }
    let x: Vec<f64> = t.iter().map(|v| v / scale).collect();
    let problem = Problem {
        x: &x,
        y,
        offset,
        ln_h1_max: (AMPLITUDE_BOUND_FACTOR * ymax.abs().max(ymin.abs())).ln(),
    };

    let mut starts: Vec<f64> = Vec::with_capacity(6);
    if let Some(k) = problem.log_slope_rate() {
        starts.push(k);
    }
    starts.extend([0.1, 1.0, 10.0, 100.0, 1000.0]);

    let mut best: Option<(f64, DVector<f64>)> = None;
    let mut best_any = f64::INFINITY;
    for &k in &starts {
        let Some(theta0) = problem.initial_params(k) else {
            continue;
        };
        let outcome = problem.levenberg_marquardt(theta0);
        best_any = best_any.min(outcome.ssr);
        if !outcome.converged {
            continue;
        }
        if best.as_ref().is_none_or(|(ssr, _)| outcome.ssr < *ssr) {
            best = Some((outcome.ssr, outcome.theta));
        }
    }
    let Some((_, theta)) = best else {
        return Err(Error::FitNotConverged {
            starts: starts.len(),
            best_ssr: best_any,
        });
    };

    let (h1, k, h3) = problem.unpack(&theta);
    let h2 = k / scale;
    let predicted: Vec<f64> = t.iter().map(|&ti| universal_curve(h1, h2, h3, ti)).collect();
    Ok(ExponentialFit {
        h1,
        h2,
        h3,
        r2: r_squared(y, &predicted)?,
    })
}

struct Problem<'a> {
    x: &'a [f64],
    y: &'a [f64],
    offset: bool,
    ln_h1_max: f64,
}

struct Outcome {
    theta: DVector<f64>,
    ssr: f64,
    converged: bool,
}

const LN_RATE_BOUND: f64 = 40.0;
const MAX_ITERATIONS: usize = 1000;

impl Problem<'_> {
    fn dim(&self) -> usize {
        if self.offset {
            3
        } else {
            2
        }
    }

    fn unpack(&self, theta: &DVector<f64>) -> (f64, f64, f64) {
        let h3 = if self.offset { theta[2] } else { 0.0 };
        (theta[0].exp(), theta[1].exp(), h3)
    }

    fn project(&self, theta: &mut DVector<f64>) {
        theta[0] = theta[0].min(self.ln_h1_max);
        theta[1] = theta[1].clamp(-LN_RATE_BOUND, LN_RATE_BOUND);
        if self.offset {
            theta[2] = theta[2].clamp(0.0, 1.0 - f64::EPSILON);
        }
    }

    fn residuals(&self, theta: &DVector<f64>) -> DVector<f64> {
        let (h1, k, h3) = self.unpack(theta);
        DVector::from_iterator(
            self.x.len(),
            self.x
                .iter()
                .zip(self.y)
                .map(|(&x, &y)| universal_curve(h1, k, h3, x) - y),
        )
    }

    fn jacobian(&self, theta: &DVector<f64>) -> DMatrix<f64> {
        let (h1, k, _) = self.unpack(theta);
        let mut j = DMatrix::zeros(self.x.len(), self.dim());
        for (r, &x) in self.x.iter().enumerate() {
            let decay = (-k * x).exp();
            j[(r, 0)] = -h1 * (-k * x).exp_m1();
            j[(r, 1)] = h1 * k * x * decay;
            if self.offset {
                j[(r, 2)] = 1.0;
            }
        }
        j
    }

    /// Rate from the slope of `-ln(1 - (y - h3)/h1)` against scaled time over
    /// the early, unsaturated points.
    fn log_slope_rate(&self) -> Option<f64> {
        let ymax = self.y.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let h3 = if self.offset {
            self.y.iter().copied().fold(f64::INFINITY, f64::min).max(0.0)
        } else {
            0.0
        };
        let h1 = (ymax - h3) * 1.05;
        if !(h1 > 0.0) {
            return None;
        }
        let (mut sxz, mut sxx) = (0.0, 0.0);
        let half = self.x.len().div_ceil(2);
        for (&x, &y) in self.x.iter().zip(self.y).take(half) {
            let frac = (y - h3) / h1;
            if x > 0.0 && (0.0..0.9).contains(&frac) {
                let z = -(-frac).ln_1p();
                sxz += x * z;
                sxx += x * x;
            }
        }
        let k = sxz / sxx;
        (k.is_finite() && k > 0.0).then_some(k)
    }

    /// Given a rate, the best amplitude (and offset) by linear least squares.
    fn initial_params(&self, k: f64) -> Option<DVector<f64>> {
        let basis: Vec<f64> = self.x.iter().map(|&x| -(-k * x).exp_m1()).collect();
        let (h1, h3) = if self.offset {
            let n = basis.len() as f64;
            let bm = basis.iter().sum::<f64>() / n;
            let ym = self.y.iter().sum::<f64>() / n;
            let sbb: f64 = basis.iter().map(|b| (b - bm).powi(2)).sum();
            let sby: f64 = basis.iter().zip(self.y).map(|(b, y)| (b - bm) * (y - ym)).sum();
            let h1 = sby / sbb;
            (h1, (ym - h1 * bm).clamp(0.0, 1.0 - f64::EPSILON))
        } else {
            let sbb: f64 = basis.iter().map(|b| b * b).sum();
            let sby: f64 = basis.iter().zip(self.y).map(|(b, y)| b * y).sum();
            (sby / sbb, 0.0)
        };
        if !(h1 > 0.0 && h1.is_finite()) {
            return None;
        }
        let mut theta = DVector::zeros(self.dim());
        theta[0] = h1.ln();
        theta[1] = k.ln();
        if self.offset {
            theta[2] = h3;
        }
        self.project(&mut theta);
        Some(theta)
    }

    fn levenberg_marquardt(&self, mut theta: DVector<f64>) -> Outcome {
        let ss_scale: f64 = self.y.iter().map(|v| v * v).sum::<f64>().max(f64::MIN_POSITIVE);
        let mut r = self.residuals(&theta);
        let mut ssr = r.norm_squared();
        let mut damping = 1e-3;
        for _ in 0..MAX_ITERATIONS {
            if !ssr.is_finite() {
                break;
            }
            if ssr <= 1e-30 * ss_scale {
                return Outcome { theta, ssr, converged: true };
            }
            let j = self.jacobian(&theta);
            let jtj = j.transpose() * &j;
            let grad = j.transpose() * &r;
            let mut a = jtj.clone();
            for d in 0..a.nrows() {
                a[(d, d)] += damping * jtj[(d, d)].max(1e-30);
            }
            let Some(step) = a.cholesky().map(|c| c.solve(&(-&grad))) else {
                damping *= 10.0;
                if damping > 1e20 {
                    return Outcome { theta, ssr, converged: true };
                }
                continue;
            };
            let mut candidate = &theta + &step;
            self.project(&mut candidate);
            let moved = (&candidate - &theta).amax();
            let r_new = self.residuals(&candidate);
            let ssr_new = r_new.norm_squared();
            if ssr_new.is_finite() && ssr_new < ssr {
                let gain = ssr - ssr_new;
                theta = candidate;
                r = r_new;
                ssr = ssr_new;
                damping = (damping / 10.0).max(1e-12);
                if moved <= 1e-14 || gain <= 1e-16 * ssr {
                    return Outcome { theta, ssr, converged: true };
                }
            } else {
                if moved <= 1e-14 {
                    // Projection pinned the step or it is below resolution.
                    return Outcome { theta, ssr, converged: true };
                }
                damping *= 10.0;
                if damping > 1e20 {
                    return Outcome { theta, ssr, converged: true };
                }
            }
        }
        Outcome {
            theta,
            ssr,
            converged: false,
        }
    }
}

/// Maps a fit to chain parameters. `t_N` is rounded to the nearest integer
/// and must be at least 2; `μ` is clamped at 0.
pub fn infer_params(fit: &ExponentialFit, m: u64, mode: MappingMode) -> Result<UltradiffusionParams> {
    let (raw_tn, amplitude, rate) = match mode {
        MappingMode::Paper => {
            if !(fit.h2 < 1.0) {
                return Err(Error::Inference(format!(
                    "paper mapping needs h2 < 1, got h2 = {}",
                    fit.h2
                )));
            }
            (1.0 / (1.0 - fit.h2), fit.h1, None)
        }
        MappingMode::Roundtrip => {
            if !(fit.h1 < 1.0) {
                return Err(Error::Inference(format!(
                    "roundtrip mapping needs h1 < 1, got h1 = {}",
                    fit.h1
                )));
            }
            if !(fit.h1 > 0.0 && fit.h2 > 0.0) {
                return Err(Error::Inference("fit amplitude and rate must be positive".into()));
            }
            (1.0 / (1.0 - fit.h1), fit.h1, Some(fit.h2))
        }
    };
    let rounded = raw_tn.round();
    if !(rounded >= 2.0) {
        return Err(Error::Inference(format!(
            "t_N < 2: the mapping gives t_N = {raw_tn:.6}, too short for a chain"
        )));
    }
    if !(rounded <= usize::MAX as f64) {
        return Err(Error::Inference(format!("t_N = {raw_tn:e} is out of range")));
    }
    let t_n = rounded as usize;
    let tnf = t_n as f64;
    let mu = match rate {
        None => (tnf / amplitude).ln() / (tnf - 1.0),
        Some(h2) => (tnf / h2).ln() / (tnf - 1.0),
    };
    if mu.is_nan() {
        return Err(Error::Inference("mu is undefined for this fit".into()));
    }
    Ok(UltradiffusionParams::new(t_n, mu.max(0.0), m.max(1))?.with_mode(mode))
}

/// Prefactor of the model curve `p̂(t)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Prefactor {
    /// `(t_N - 1)/t_N`, i.e. `1 - P_N(t)`.
    #[default]
    Consistent,
    /// `1/t_N`, as printed alongside the experiments.
    Printed,
}

/// `p̂(t)` for each grid time.
pub fn simulate_values(params: &UltradiffusionParams, grid: &[f64], prefactor: Prefactor) -> Vec<f64> {
    let nf = params.t_n as f64;
    let amplitude = match prefactor {
        Prefactor::Consistent => (nf - 1.0) / nf,
        Prefactor::Printed => 1.0 / nf,
    };
    let rate = params.decay_rate();
    grid.iter().map(|&t| -amplitude * (-t * rate).exp_m1()).collect()
}

/// The model's cumulative response curve on `grid`.
pub fn simulate_curve(
    params: &UltradiffusionParams,
    grid: &[f64],
    prefactor: Prefactor,
) -> Result<PopularityCurve> {
    PopularityCurve::new(grid.to_vec(), simulate_values(params, grid, prefactor), params.m)
}

/// Draws `M` event times i.i.d. from the model's response-time law
/// restricted to `(0, horizon]`, by inverting its normalized CDF in closed
/// form. Deterministic for a given seed.
pub fn sample_events(
    params: &UltradiffusionParams,
    story_id: &str,
    horizon: f64,
    seed: u64,
) -> Result<EventTrace> {
    if !(horizon > 0.0 && horizon.is_finite()) {
        return Err(Error::InvalidArgument(format!("horizon must be positive, got {horizon}")));
    }
    let rate = params.decay_rate();
    let mass = (-rate * horizon).exp_m1(); // p̂(T) up to the prefactor, negated
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let events = (0..params.m)
        .map(|_| {
            let u = 1.0 - rng.random::<f64>(); // (0, 1]
            let t = -(u * mass).ln_1p() / rate;
            t.clamp(f64::MIN_POSITIVE, horizon)
        })
        .collect();
    EventTrace::new(story_id, events, horizon)
}

/// Normalized model CDF `p̂(t)/p̂(T)` on `(0, T]`.
pub fn sampling_cdf(params: &UltradiffusionParams, horizon: f64, t: f64) -> f64 {
    let rate = params.decay_rate();
    let t = t.clamp(0.0, horizon);
    (-rate * t).exp_m1() / (-rate * horizon).exp_m1()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trace::uniform_grid;

    #[test]
    fn r_squared_cases() {
        let o = [0.0, 1.0, 3.0];
        assert_eq!(r_squared(&o, &o).unwrap(), 1.0);
        let mean = [4.0 / 3.0; 3];
        assert!(r_squared(&o, &mean).unwrap().abs() < 1e-15);
        let r2 = r_squared(&[0.0, 1.0], &[0.1, 0.9]).unwrap();
        assert!((r2 - 0.96).abs() < 1e-12);
        assert!(matches!(r_squared(&[1.0, 1.0], &[1.0, 1.0]), Err(Error::NoDynamics)));
    }

    #[test]
    fn noiseless_fit_recovers_parameters() {
        let t = uniform_grid(100.0, 200);
        let y: Vec<f64> = t.iter().map(|&x| universal_curve(0.8, 0.1, 0.0, x)).collect();
        let fit = fit_exponential_points(&t, &y, false).unwrap();
        assert!((fit.h1 - 0.8).abs() < 1e-6, "{fit:?}");
        assert!((fit.h2 - 0.1).abs() < 1e-6, "{fit:?}");
        assert!(fit.r2 >= 1.0 - 1e-10);
        assert_eq!(fit.h3, 0.0);
    }

    #[test]
    fn offset_fit_recovers_parameters() {
        let t = uniform_grid(300.0, 150);
        let y: Vec<f64> = t.iter().map(|&x| universal_curve(0.7, 0.017, 0.155, x)).collect();
        let fit = fit_exponential_points(&t, &y, true).unwrap();
        assert!((fit.h1 - 0.7).abs() < 1e-6, "{fit:?}");
        assert!((fit.h2 - 0.017).abs() < 1e-8, "{fit:?}");
        assert!((fit.h3 - 0.155).abs() < 1e-6, "{fit:?}");
    }

    #[test]
    fn constant_curve_has_no_dynamics() {
        let t = uniform_grid(10.0, 10);
        assert!(matches!(
            fit_exponential_points(&t, &[0.5; 10], false),
            Err(Error::NoDynamics)
        ));
    }

    #[test]
    fn paper_mapping_degenerates_on_server_fit() {
        let fit = ExponentialFit { h1: 0.999, h2: 0.017, h3: 0.155, r2: 0.98 };
        let err = infer_params(&fit, 100, MappingMode::Paper).unwrap_err();
        assert!(err.to_string().contains("t_N < 2"), "{err}");
    }

    #[test]
    fn roundtrip_mapping_on_server_fit() {
        let fit = ExponentialFit { h1: 0.999, h2: 0.017, h3: 0.155, r2: 0.98 };
        let p = infer_params(&fit, 100, MappingMode::Roundtrip).unwrap();
        assert_eq!(p.t_n, 1000);
        let expected = (1000.0f64 / 0.017).ln() / 999.0;
        assert!((p.mu - expected).abs() < 1e-15);
        assert!((p.mu - 0.01099).abs() < 1e-5);
        assert_eq!(p.mode, MappingMode::Roundtrip);
    }

    #[test]
    fn mapping_errors() {
        let fit = ExponentialFit { h1: 1.2, h2: 1.5, h3: 0.0, r2: 1.0 };
        assert!(infer_params(&fit, 1, MappingMode::Paper).is_err());
        assert!(infer_params(&fit, 1, MappingMode::Roundtrip).is_err());
        let short = ExponentialFit { h1: 0.2, h2: 0.1, h3: 0.0, r2: 1.0 };
        assert!(infer_params(&short, 1, MappingMode::Roundtrip).is_err());
    }

    #[test]
    fn roundtrip_clamps_mu() {
        let fit = ExponentialFit { h1: 0.8, h2: 50.0, h3: 0.0, r2: 1.0 };
        let p = infer_params(&fit, 1, MappingMode::Roundtrip).unwrap();
        assert_eq!(p.t_n, 5);
        assert_eq!(p.mu, 0.0);
    }

    #[test]
    fn simulated_curve_shapes() {
        let p = UltradiffusionParams::new(2, 0.0, 10).unwrap();
        let grid = uniform_grid(3.0, 31);
        let c = simulate_curve(&p, &grid, Prefactor::Consistent).unwrap();
        assert_eq!(c.values()[0], 0.0);
        for (t, v) in grid.iter().zip(c.values()) {
            let expected = 0.5 * (1.0 - (-2.0 * t).exp());
            assert!((v - expected).abs() < 1e-15);
            let s = crate::spectral::survival_probability(2, 0.0, *t).unwrap();
            assert!((v - (1.0 - s)).abs() < 1e-15);
        }
        let p = UltradiffusionParams::new(4, 0.2, 10).unwrap();
        let printed = simulate_values(&p, &[1e9], Prefactor::Printed);
        assert!((printed[0] - 0.25).abs() < 1e-15);
    }

    #[test]
    fn sampling_is_deterministic_and_bounded() {
        let p = UltradiffusionParams::new(50, 0.2, 500).unwrap();
        let h = p.default_horizon();
        let a = sample_events(&p, "s", h, 7).unwrap();
        let b = sample_events(&p, "s", h, 7).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, sample_events(&p, "s", h, 8).unwrap());
        assert!(a.events().iter().all(|&t| t > 0.0 && t <= h));

        let one = UltradiffusionParams::new(5, 0.1, 1).unwrap();
        let t = sample_events(&one, "s", 3.0, 1).unwrap();
        assert_eq!(t.len(), 1);
        assert!(t.events()[0] > 0.0 && t.events()[0] <= 3.0);
    }

    #[test]
    fn mapping_mode_parse() {
        assert_eq!("paper".parse::<MappingMode>().unwrap(), MappingMode::Paper);
        assert_eq!("roundtrip".parse::<MappingMode>().unwrap(), MappingMode::Roundtrip);
        assert!("other".parse::<MappingMode>().is_err());
    }
}
