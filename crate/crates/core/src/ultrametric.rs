//! Ultrametric state spaces induced by event traces.
//!
//! Each event at original time `t` becomes a state labelled by its reverse
//! time `a = T - t`, and one extra state with label `T` stands for "no
//! response yet". Two distinct states are separated by the later of their
//! original times, i.e. `d(X_a, X_b) = T - min(a, b)`, which makes every row
//! of the distance matrix constant past the diagonal.

use std::fmt;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::trace::EventTrace;

/// Ordered states with a pairwise distance matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct UltrametricSpace {
    labels: Vec<f64>,
    multiplicity: Vec<usize>,
    horizon: f64,
    dist: DMatrix<f64>,
}

impl UltrametricSpace {
    /// Wraps an explicit distance matrix without checking the axioms; run
    /// [`verify_ultrametric`] before relying on it.
    pub fn from_distances(labels: Vec<f64>, horizon: f64, dist: DMatrix<f64>) -> Result<Self> {
        if !dist.is_square() {
            return Err(Error::InvalidArgument(format!(
                "distance matrix must be square, got {}x{}",
                dist.nrows(),
                dist.ncols()
            )));
        }
        if labels.len() != dist.nrows() {
            return Err(Error::DimensionMismatch {
                expected: dist.nrows(),
                actual: labels.len(),
            });
        }
        let multiplicity = vec![1; labels.len()];
        Ok(Self {
            labels,
            multiplicity,
            horizon,
            dist,
        })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// Reverse-time subscripts, ascending.
    pub fn labels(&self) -> &[f64] {
        &self.labels
    }

    /// Number of events that collapsed into each state.
    pub fn multiplicity(&self) -> &[usize] {
        &self.multiplicity
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn distances(&self) -> &DMatrix<f64> {
        &self.dist
    }

    pub fn distance(&self, i: usize, j: usize) -> f64 {
        self.dist[(i, j)]
    }

    /// Index of the state with the given label, if any.
    pub fn index_of(&self, label: f64) -> Option<usize> {
        self.labels.iter().position(|&a| a == label)
    }

    /// Index of the no-response state (the largest label).
    pub fn quiescent_state(&self) -> usize {
        self.labels.len() - 1
    }

    pub fn max_distance(&self) -> f64 {
        self.dist.iter().copied().fold(0.0, f64::max)
    }

    /// Copy with every distance divided by the largest one. Positive
    /// monotone rescaling preserves the ultrametric axioms.
    pub fn rescaled(&self) -> Self {
        let max = self.max_distance();
        let mut out = self.clone();
        if max > 0.0 {
            out.dist.apply(|d| *d /= max);
        }
        out
    }

    /// TSV with a `state` header column followed by one column per label.
    pub fn to_tsv(&self) -> String {
        let n = self.len();
        let mut header = vec!["state".to_string()];
        header.extend(self.labels.iter().map(|a| crate::tsv::sig9(*a)));
        let header: Vec<&str> = header.iter().map(String::as_str).collect();
        crate::tsv::render(
            &header,
            (0..n).map(|i| {
                let mut row = vec![self.labels[i]];
                row.extend((0..n).map(|j| self.dist[(i, j)]));
                row
            }),
        )
    }
}

/// Builds the trace-induced ultrametric space.
///
/// Events at identical times collapse into one state and bump its
/// multiplicity. An event at `t = 0` collapses into the no-response state.
pub fn build_from_trace(trace: &EventTrace) -> UltrametricSpace {
    let horizon = trace.horizon();

    // Original times, latest first, so that labels come out ascending. The
    // no-response state carries original time 0.
    let mut times: Vec<(f64, usize)> = Vec::with_capacity(trace.len() + 1);
    for &t in trace.events().iter().rev() {
        match times.last_mut() {
            Some((prev, count)) if *prev == t => *count += 1,
            _ => times.push((t, 1)),
        }
    }
    match times.last_mut() {
        Some((prev, count)) if *prev == 0.0 => *count += 1,
        _ => times.push((0.0, 1)),
    }

    let n = times.len();
    let labels = times.iter().map(|&(t, _)| horizon - t).collect();
    let multiplicity = times.iter().map(|&(_, c)| c).collect();
    let dist = DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            0.0
        } else {
            times[i].0.max(times[j].0)
        }
    });
    UltrametricSpace {
        labels,
        multiplicity,
        horizon,
        dist,
    }
}

/// Canonical unit-spaced chain: states `1..=n` with `d(i, j) = max(i, j) - 1`.
pub fn uniform_chain(n_states: usize) -> Result<UltrametricSpace> {
    if n_states < 2 {
        return Err(Error::InvalidArgument(format!(
            "uniform chain needs at least 2 states, got {n_states}"
        )));
    }
    let labels = (1..=n_states).map(|i| i as f64).collect();
    let dist = DMatrix::from_fn(n_states, n_states, |i, j| {
        if i == j {
            0.0
        } else {
            i.max(j) as f64
        }
    });
    Ok(UltrametricSpace {
        labels,
        multiplicity: vec![1; n_states],
        horizon: (n_states - 1) as f64,
        dist,
    })
}

/// First axiom violation found, with 0-based state indices.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Violation {
    NotSquare,
    NonzeroDiagonal { i: usize, value: f64 },
    Asymmetric { i: usize, j: usize },
    NonPositive { i: usize, j: usize, value: f64 },
    /// `d(i, j) > max(d(i, k), d(k, j))`.
    StrongTriangle { i: usize, j: usize, k: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Violation::NotSquare => write!(f, "matrix is not square"),
            Violation::NonzeroDiagonal { i, value } => write!(f, "d({i},{i}) = {value} != 0"),
            Violation::Asymmetric { i, j } => write!(f, "d({i},{j}) != d({j},{i})"),
            Violation::NonPositive { i, j, value } => write!(f, "d({i},{j}) = {value} <= 0"),
            Violation::StrongTriangle { i, j, k } => {
                write!(f, "d({i},{j}) > max(d({i},{k}), d({k},{j}))")
            }
        }
    }
}

/// Outcome of an exhaustive axiom check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Report {
    Pass,
    Fail(Violation),
}

impl Report {
    pub fn passed(&self) -> bool {
        matches!(self, Report::Pass)
    }
}

pub fn verify_ultrametric(space: &UltrametricSpace) -> Report {
    verify_ultrametric_matrix(&space.dist)
}

/// Checks zero diagonal, symmetry, positive off-diagonal entries, then the
/// strong triangle inequality over every `(i, j)` with `i < j` and every
/// third state `k`.
pub fn verify_ultrametric_matrix(d: &DMatrix<f64>) -> Report {
    if !d.is_square() {
        return Report::Fail(Violation::NotSquare);
    }
    let n = d.nrows();
    for i in 0..n {
        if d[(i, i)] != 0.0 {
            return Report::Fail(Violation::NonzeroDiagonal { i, value: d[(i, i)] });
        }
    }
    for i in 0..n {
        for j in (i + 1)..n {
            if d[(i, j)] != d[(j, i)] {
                return Report::Fail(Violation::Asymmetric { i, j });
            }
            // Written to also reject NaN.
            if !(d[(i, j)] > 0.0) {
                return Report::Fail(Violation::NonPositive { i, j, value: d[(i, j)] });
            }
        }
    }
    for i in 0..n {
        for j in (i + 1)..n {
            let dij = d[(i, j)];
            for k in 0..n {
                if k == i || k == j {
                    continue;
                }
                if dij > d[(i, k)].max(d[(k, j)]) {
                    return Report::Fail(Violation::StrongTriangle { i, j, k });
                }
            }
        }
    }
    Report::Pass
}

#[cfg(test)]
mod tests {
    use super::*;

    const TIMELINE_MATRIX: [[u32; 7]; 7] = [
        [0, 17, 17, 17, 17, 17, 17],
        [17, 0, 12, 12, 12, 12, 12],
        [17, 12, 0, 8, 8, 8, 8],
        [17, 12, 8, 0, 6, 6, 6],
        [17, 12, 8, 6, 0, 5, 5],
        [17, 12, 8, 6, 5, 0, 1],
        [17, 12, 8, 6, 5, 1, 0],
    ];

    fn timeline() -> UltrametricSpace {
        let trace = EventTrace::new("fig5", vec![1.0, 5.0, 6.0, 8.0, 12.0, 17.0], 17.0).unwrap();
        build_from_trace(&trace)
    }

    #[test]
    fn timeline_matrix_is_reproduced() {
        let space = timeline();
        assert_eq!(space.labels(), &[0.0, 5.0, 9.0, 11.0, 12.0, 16.0, 17.0]);
        for (i, row) in TIMELINE_MATRIX.iter().enumerate() {
            for (j, &want) in row.iter().enumerate() {
                assert_eq!(space.distance(i, j), want as f64, "({i},{j})");
            }
        }
        let x11 = space.index_of(11.0).unwrap();
        let x5 = space.index_of(5.0).unwrap();
        assert_eq!(space.distance(x11, x5), 12.0);
        assert_eq!(space.quiescent_state(), 6);
        assert!(verify_ultrametric(&space).passed());
    }

    #[test]
    fn rows_depend_on_min_label_only() {
        let space = timeline();
        for i in 0..space.len() {
            for j in (i + 1)..space.len() {
                assert_eq!(space.distance(i, j), space.distance(i, space.len() - 1));
            }
        }
    }

    #[test]
    fn simultaneous_events_collapse() {
        let trace = EventTrace::new("s", vec![2.0, 2.0, 3.0], 4.0).unwrap();
        let space = build_from_trace(&trace);
        assert_eq!(space.labels(), &[1.0, 2.0, 4.0]);
        assert_eq!(space.multiplicity(), &[1, 2, 1]);

        let trace = EventTrace::new("s", vec![0.0, 1.0], 1.0).unwrap();
        let space = build_from_trace(&trace);
        assert_eq!(space.labels(), &[0.0, 1.0]);
        assert_eq!(space.multiplicity(), &[1, 2]);
        assert!(verify_ultrametric(&space).passed());
    }

    #[test]
    fn event_at_horizon_gives_label_zero() {
        let trace = EventTrace::new("s", vec![3.0], 3.0).unwrap();
        let space = build_from_trace(&trace);
        assert_eq!(space.labels(), &[0.0, 3.0]);
        assert_eq!(space.distance(0, 1), 3.0);
    }

    #[test]
    fn strong_triangle_violation_is_located() {
        let d = DMatrix::from_row_slice(3, 3, &[0.0, 1.0, 5.0, 1.0, 0.0, 1.0, 5.0, 1.0, 0.0]);
        assert_eq!(
            verify_ultrametric_matrix(&d),
            Report::Fail(Violation::StrongTriangle { i: 0, j: 2, k: 1 })
        );
    }

    #[test]
    fn other_axiom_violations() {
        let d = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 2.0, 0.0]);
        assert!(matches!(verify_ultrametric_matrix(&d), Report::Fail(Violation::Asymmetric { .. })));
        let d = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 0.0]);
        assert!(matches!(verify_ultrametric_matrix(&d), Report::Fail(Violation::NonzeroDiagonal { .. })));
        let d = DMatrix::from_row_slice(2, 2, &[0.0, 0.0, 0.0, 0.0]);
        assert!(matches!(verify_ultrametric_matrix(&d), Report::Fail(Violation::NonPositive { .. })));
        let d = DMatrix::from_row_slice(2, 2, &[0.0, 3.0, 3.0, 0.0]);
        assert!(verify_ultrametric_matrix(&d).passed());
    }

    #[test]
    fn uniform_chain_distances() {
        let c = uniform_chain(3).unwrap();
        assert_eq!(c.distance(0, 1), 1.0);
        assert_eq!(c.distance(0, 2), 2.0);
        assert_eq!(c.distance(1, 2), 2.0);
        let c = uniform_chain(2).unwrap();
        assert_eq!(c.distance(0, 1), 1.0);
        assert!(uniform_chain(1).is_err());
        for n in 2..=50 {
            assert!(verify_ultrametric(&uniform_chain(n).unwrap()).passed(), "n = {n}");
        }
    }

    #[test]
    fn rescaling_preserves_axioms() {
        let space = timeline().rescaled();
        assert_eq!(space.max_distance(), 1.0);
        assert!(verify_ultrametric(&space).passed());
    }

    #[test]
    fn tsv_export_is_integer_for_timeline() {
        let tsv = timeline().to_tsv();
        let mut lines = tsv.lines();
        assert_eq!(lines.next().unwrap(), "state\t0\t5\t9\t11\t12\t16\t17");
        assert_eq!(lines.next().unwrap(), "0\t0\t17\t17\t17\t17\t17\t17");
    }
}
