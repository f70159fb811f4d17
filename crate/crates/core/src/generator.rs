//! Transition-rate matrices for the master equation.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::ultrametric::{verify_ultrametric, Report, UltrametricSpace};

/// Symmetric rate matrix with off-diagonal entries `exp(-mu * d(i, j))` and
/// a diagonal that makes every row sum to zero.
#[derive(Debug, Clone, PartialEq)]
pub struct Generator {
    mu: f64,
    rates: DMatrix<f64>,
}

impl Generator {
    /// Wraps a hand-built rate matrix, filling the diagonal from the
    /// off-diagonal row sums. Used for tests and external matrices.
    pub fn from_rates(mu: f64, mut rates: DMatrix<f64>) -> Result<Self> {
        if !rates.is_square() {
            return Err(Error::InvalidArgument("rate matrix must be square".into()));
        }
        fill_conservation_diagonal(&mut rates);
        Ok(Self { mu, rates })
    }

    pub fn n(&self) -> usize {
        self.rates.nrows()
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn rates(&self) -> &DMatrix<f64> {
        &self.rates
    }

    pub fn rate(&self, i: usize, j: usize) -> f64 {
        self.rates[(i, j)]
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> f64 {
        self.rates.amax()
    }

    pub fn to_tsv(&self) -> String {
        let n = self.n();
        let header: Vec<String> = std::iter::once("i".to_string())
            .chain((1..=n).map(|j| j.to_string()))
            .collect();
        let header: Vec<&str> = header.iter().map(String::as_str).collect();
        crate::tsv::render(
            &header,
            (0..n).map(|i| {
                std::iter::once((i + 1) as f64)
                    .chain((0..n).map(|j| self.rates[(i, j)]))
                    .collect()
            }),
        )
    }
}

fn fill_conservation_diagonal(rates: &mut DMatrix<f64>) {
    let n = rates.nrows();
    for i in 0..n {
        let off: f64 = (0..n).filter(|&j| j != i).map(|j| rates[(i, j)]).sum();
        rates[(i, i)] = -off;
    }
}

/// Builds the generator of `space` with scaling factor `mu`.
pub fn build_generator(space: &UltrametricSpace, mu: f64) -> Result<Generator> {
    if !(mu >= 0.0 && mu.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "mu must be a finite nonnegative number, got {mu}"
        )));
    }
    if let Report::Fail(v) = verify_ultrametric(space) {
        return Err(Error::InvalidArgument(format!("space is not ultrametric: {v}")));
    }
    let n = space.len();
    let d = space.distances();
    let mut rates = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in (i + 1)..n {
            let r = (-mu * d[(i, j)]).exp();
            rates[(i, j)] = r;
            rates[(j, i)] = r;
        }
    }
    fill_conservation_diagonal(&mut rates);
    Ok(Generator { mu, rates })
}

/// A triple `(i, j, k)` with `rate(i, j) < min(rate(i, k), rate(k, j))`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RateViolation {
    pub i: usize,
    pub j: usize,
    pub k: usize,
}

/// Exhaustive check that off-diagonal rates satisfy
/// `rate(i, j) >= min(rate(i, k), rate(k, j))` for distinct `i, j, k`.
pub fn check_rate_ultrametricity(g: &Generator) -> std::result::Result<(), RateViolation> {
    let n = g.n();
    let r = &g.rates;
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            for k in 0..n {
                if k == i || k == j {
                    continue;
                }
                if r[(i, j)] < r[(i, k)].min(r[(k, j)]) {
                    return Err(RateViolation { i, j, k });
                }
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trace::EventTrace;
    use crate::ultrametric::{build_from_trace, uniform_chain};

    #[test]
    fn zero_mu_gives_unit_rates() {
        let g = build_generator(&uniform_chain(3).unwrap(), 0.0).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let expected = if i == j { -2.0 } else { 1.0 };
                assert_eq!(g.rate(i, j), expected);
            }
        }
    }

    #[test]
    fn two_state_half_rate() {
        let g = build_generator(&uniform_chain(2).unwrap(), std::f64::consts::LN_2).unwrap();
        assert!((g.rate(0, 1) - 0.5).abs() < 1e-15);
        assert!((g.rate(0, 0) + 0.5).abs() < 1e-15);
    }

    #[test]
    fn timeline_rate() {
        let trace = EventTrace::new("s", vec![1.0, 5.0, 6.0, 8.0, 12.0, 17.0], 17.0).unwrap();
        let space = build_from_trace(&trace);
        let g = build_generator(&space, 0.1).unwrap();
        let x16 = space.index_of(16.0).unwrap();
        let x17 = space.index_of(17.0).unwrap();
        assert!((g.rate(x16, x17) - 0.904837418).abs() < 1e-9);
    }

    #[test]
    fn negative_mu_rejected() {
        assert!(build_generator(&uniform_chain(3).unwrap(), -0.1).is_err());
    }

    #[test]
    fn non_ultrametric_space_rejected() {
        let d = DMatrix::from_row_slice(3, 3, &[0.0, 1.0, 5.0, 1.0, 0.0, 1.0, 5.0, 1.0, 0.0]);
        let space = UltrametricSpace::from_distances(vec![0.0, 1.0, 2.0], 5.0, d).unwrap();
        assert!(build_generator(&space, 1.0).is_err());
    }

    #[test]
    fn rows_and_columns_sum_to_zero() {
        for n in [2, 5, 17, 40] {
            for mu in [0.0, 0.1, 1.0, 5.0] {
                let g = build_generator(&uniform_chain(n).unwrap(), mu).unwrap();
                for i in 0..n {
                    let row: f64 = g.rates.row(i).sum();
                    let col: f64 = g.rates.column(i).sum();
                    assert!(row.abs() <= 1e-12, "row {i}: {row}");
                    assert!(col.abs() <= 1e-12, "col {i}: {col}");
                }
                assert_eq!(g.rates, g.rates.transpose());
            }
        }
    }

    #[test]
    fn rate_ultrametricity_holds_for_built_generators() {
        for n in 2..=50 {
            for mu in [0.0, 0.3, 2.0] {
                let g = build_generator(&uniform_chain(n).unwrap(), mu).unwrap();
                assert_eq!(check_rate_ultrametricity(&g), Ok(()), "n = {n}, mu = {mu}");
            }
        }
    }

    #[test]
    fn rate_violation_is_located() {
        let rates = DMatrix::from_row_slice(3, 3, &[0.0, 1.0, 0.1, 1.0, 0.0, 1.0, 0.1, 1.0, 0.0]);
        let g = Generator::from_rates(1.0, rates).unwrap();
        assert_eq!(check_rate_ultrametricity(&g), Err(RateViolation { i: 0, j: 2, k: 1 }));

        let g = build_generator(&uniform_chain(2).unwrap(), 1.0).unwrap();
        assert_eq!(check_rate_ultrametricity(&g), Ok(()));
    }

    #[test]
    fn larger_mu_never_raises_a_rate() {
        let space = uniform_chain(12).unwrap();
        let lo = build_generator(&space, 0.2).unwrap();
        let hi = build_generator(&space, 0.7).unwrap();
        for i in 0..12 {
            for j in 0..12 {
                if i != j {
                    assert!(hi.rate(i, j) <= lo.rate(i, j));
                }
            }
        }
    }
}
