//! Numerical ground truth for the closed forms: direct integration of the
//! master equation `dP/dt = εP` and a dense symmetric eigensolver.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::generator::Generator;

/// Tolerance on `sum(entries) == 1`.
pub const SUM_TOLERANCE: f64 = 1e-9;
/// Slack allowed below zero for integrated entries.
pub const NEGATIVE_SLACK: f64 = 1e-10;

/// Probability distribution over the states of a generator.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbabilityVector(DVector<f64>);

impl ProbabilityVector {
    pub fn new(entries: DVector<f64>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::InvalidArgument("probability vector is empty".into()));
        }
        if let Some(bad) = entries.iter().find(|p| !(**p >= -NEGATIVE_SLACK)) {
            return Err(Error::InvalidArgument(format!("negative probability {bad}")));
        }
        let sum = entries.sum();
        if (sum - 1.0).abs() > SUM_TOLERANCE {
            return Err(Error::InvalidArgument(format!("probabilities sum to {sum}, not 1")));
        }
        Ok(Self(entries))
    }

    /// All mass on state `i` (0-based).
    pub fn characteristic(n: usize, i: usize) -> Result<Self> {
        if i >= n {
            return Err(Error::InvalidArgument(format!("state {i} out of range for {n} states")));
        }
        let mut v = DVector::zeros(n);
        v[i] = 1.0;
        Ok(Self(v))
    }

    pub fn uniform(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument("probability vector is empty".into()));
        }
        Ok(Self(DVector::from_element(n, 1.0 / n as f64)))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn entries(&self) -> &DVector<f64> {
        &self.0
    }

    pub fn get(&self, i: usize) -> f64 {
        self.0[i]
    }

    pub fn sum(&self) -> f64 {
        self.0.sum()
    }
}

/// Step-size control for [`integrate_master_equation`].
#[derive(Debug, Clone, Copy)]
pub struct IntegratorOptions {
    pub abs_tol: f64,
    pub rel_tol: f64,
    /// Fraction of the inverse spectral-radius bound used as the first step.
    pub initial_step_fraction: f64,
    pub max_steps: usize,
}

impl Default for IntegratorOptions {
    fn default() -> Self {
        Self {
            abs_tol: 1e-9,
            rel_tol: 1e-8,
            initial_step_fraction: 1e-3,
            max_steps: 2_000_000,
        }
    }
}

// Dormand–Prince 5(4) tableau. The system is autonomous, so the nodes are
// not needed.
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

/// Integrates `dP/dt = εP` from `p0` at `t = 0`, reporting the state at
/// every grid time. Uses adaptive Dormand–Prince 5(4) steps that land
/// exactly on each grid time.
pub fn integrate_master_equation(
    g: &Generator,
    p0: &ProbabilityVector,
    grid: &[f64],
) -> Result<Vec<ProbabilityVector>> {
    integrate_with(g, p0, grid, IntegratorOptions::default())
}

pub fn integrate_with(
    g: &Generator,
    p0: &ProbabilityVector,
    grid: &[f64],
    opts: IntegratorOptions,
) -> Result<Vec<ProbabilityVector>> {
    let n = g.n();
    if p0.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            actual: p0.len(),
        });
    }
    if let Some(&first) = grid.first() {
        if !(first >= 0.0) {
            return Err(Error::InvalidArgument(format!("grid starts at {first} < 0")));
        }
    }
    if grid.windows(2).any(|w| !(w[1] >= w[0])) {
        return Err(Error::InvalidArgument("grid must be ascending".into()));
    }

    let eps = g.rates();
    // Gershgorin: every eigenvalue lies within 2 * max|diagonal| of zero.
    let radius = 2.0 * (0..n).map(|i| eps[(i, i)].abs()).fold(0.0, f64::max);
    let mut h = if radius > 0.0 {
        opts.initial_step_fraction / radius
    } else {
        f64::INFINITY
    };

    let mut t = 0.0;
    let mut y = p0.entries().clone();
    let mut k: [DVector<f64>; 7] = std::array::from_fn(|_| DVector::zeros(n));
    let mut stage = DVector::zeros(n);
    let mut steps = 0usize;
    let mut out = Vec::with_capacity(grid.len());

    for &target in grid {
        while t < target {
            if steps >= opts.max_steps {
                return Err(Error::Integration {
                    t,
                    message: format!("step budget of {} exhausted (h = {h:e})", opts.max_steps),
                });
            }
            let step = h.min(target - t);
            let last = step >= target - t;

            eps.mul_to(&y, &mut k[0]);
            for s in 1..7 {
                stage.copy_from(&y);
                for (j, a) in A[s].iter().enumerate().take(s) {
                    if *a != 0.0 {
                        stage.axpy(step * a, &k[j], 1.0);
                    }
                }
                eps.mul_to(&stage, &mut k[s]);
            }
            let mut y5 = y.clone();
            let mut err_vec = DVector::zeros(n);
            for s in 0..7 {
                if B5[s] != 0.0 {
                    y5.axpy(step * B5[s], &k[s], 1.0);
                }
                let e = B5[s] - B4[s];
                if e != 0.0 {
                    err_vec.axpy(step * e, &k[s], 1.0);
                }
            }
            let err = err_vec
                .iter()
                .zip(y.iter().zip(y5.iter()))
                .map(|(e, (a, b))| e.abs() / (opts.abs_tol + opts.rel_tol * a.abs().max(b.abs())))
                .fold(0.0, f64::max);
            steps += 1;

            if !err.is_finite() {
                return Err(Error::Integration {
                    t,
                    message: format!("non-finite error estimate with step {step:e}"),
                });
            }
            if err <= 1.0 {
                t = if last { target } else { t + step };
                y = y5;
            }
            let factor = if err == 0.0 {
                5.0
            } else {
                (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
            };
            // Shortened final steps say nothing about the sustainable size.
            if !(last && err <= 1.0) || factor < 1.0 {
                h = step * factor;
            }
            if h < 1e-14 * t.abs().max(1.0) {
                return Err(Error::Integration {
                    t,
                    message: format!("step size underflow (h = {h:e}, error ratio {err:e})"),
                });
            }
        }
        let p = ProbabilityVector::new(y.clone()).map_err(|e| Error::Integration {
            t,
            message: format!("trajectory left the probability simplex: {e}"),
        })?;
        out.push(p);
    }
    Ok(out)
}

/// Trajectory as TSV with header `t\tP_1\t...\tP_N`.
pub fn trajectory_tsv(grid: &[f64], trajectory: &[ProbabilityVector]) -> String {
    let n = trajectory.first().map_or(0, ProbabilityVector::len);
    let header: Vec<String> = std::iter::once("t".to_string())
        .chain((1..=n).map(|i| format!("P_{i}")))
        .collect();
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    crate::tsv::render(
        &header,
        grid.iter().zip(trajectory).map(|(&t, p)| {
            std::iter::once(t).chain(p.entries().iter().copied()).collect()
        }),
    )
}

/// Eigenvalues sorted descending, with matching orthonormal eigenvector
/// columns.
#[derive(Debug, Clone)]
pub struct NumericSpectrum {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: DMatrix<f64>,
    pub sweeps: usize,
}

/// Dense symmetric eigendecomposition of a generator.
pub fn numeric_spectrum(g: &Generator) -> Result<NumericSpectrum> {
    symmetric_eigen(g.rates())
}

/// Cyclic Jacobi eigendecomposition of a symmetric matrix.
pub fn symmetric_eigen(m: &DMatrix<f64>) -> Result<NumericSpectrum> {
    if !m.is_square() {
        return Err(Error::InvalidArgument("matrix must be square".into()));
    }
    let n = m.nrows();
    let scale = m.amax().max(f64::MIN_POSITIVE);
    for i in 0..n {
        for j in (i + 1)..n {
            let gap = (m[(i, j)] - m[(j, i)]).abs();
            if gap > 1e-14 * scale {
                return Err(Error::NotSymmetric { row: i, col: j, gap });
            }
        }
    }

    let mut a = m.clone();
    let mut v = DMatrix::<f64>::identity(n, n);
    let norm = a.norm();
    let target = 1e-14 * norm;
    const MAX_SWEEPS: usize = 100;

    let off_norm = |a: &DMatrix<f64>| -> f64 {
        let mut s = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                s += 2.0 * a[(i, j)] * a[(i, j)];
            }
        }
        s.sqrt()
    };

    let mut sweeps = 0;
    loop {
        let off = off_norm(&a);
        if off <= target || n < 2 {
            break;
        }
        if sweeps == MAX_SWEEPS {
            return Err(Error::EigenNotConverged {
                sweeps,
                off_norm: off,
            });
        }
        sweeps += 1;
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let app = a[(p, p)];
                let aqq = a[(q, q)];
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                let tau = s / (1.0 + c);

                a[(p, p)] = app - t * apq;
                a[(q, q)] = aqq + t * apq;
                a[(p, q)] = 0.0;
                a[(q, p)] = 0.0;
                for r in 0..n {
                    if r != p && r != q {
                        let arp = a[(r, p)];
                        let arq = a[(r, q)];
                        let new_rp = arp - s * (arq + tau * arp);
                        let new_rq = arq + s * (arp - tau * arq);
                        a[(r, p)] = new_rp;
                        a[(p, r)] = new_rp;
                        a[(r, q)] = new_rq;
                        a[(q, r)] = new_rq;
                    }
                    let vrp = v[(r, p)];
                    let vrq = v[(r, q)];
                    v[(r, p)] = vrp - s * (vrq + tau * vrp);
                    v[(r, q)] = vrq + s * (vrp - tau * vrq);
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(j, j)].total_cmp(&a[(i, i)]));
    let eigenvalues = order.iter().map(|&i| a[(i, i)]).collect();
    let eigenvectors = DMatrix::from_fn(n, n, |r, c| v[(r, order[c])]);
    Ok(NumericSpectrum {
        eigenvalues,
        eigenvectors,
        sweeps,
    })
}
