//! Event traces and the cumulative popularity curves built from them.

use std::collections::HashMap;
use std::io::Read;
use std::path::Path;

use crate::error::{Error, Result};

/// Default number of points on a curve's time grid.
pub const DEFAULT_GRID_POINTS: usize = 200;

/// One story's event timestamps, in seconds since submission.
#[derive(Debug, Clone, PartialEq)]
pub struct EventTrace {
    story_id: String,
    submission_time: f64,
    events: Vec<f64>,
    horizon: f64,
}

impl EventTrace {
    /// Builds a trace, sorting `events`. Equal timestamps are kept as
    /// separate events.
    pub fn new(story_id: impl Into<String>, mut events: Vec<f64>, horizon: f64) -> Result<Self> {
        let story_id = story_id.into();
        if events.is_empty() {
            return Err(Error::InvalidTrace(format!("story {story_id:?} has no events")));
        }
        if !(horizon.is_finite() && horizon > 0.0) {
            return Err(Error::InvalidTrace(format!(
                "story {story_id:?}: horizon must be positive and finite, got {horizon}"
            )));
        }
        if let Some(bad) = events.iter().find(|t| !t.is_finite() || **t < 0.0) {
            return Err(Error::InvalidTrace(format!(
                "story {story_id:?}: event time {bad} is not a nonnegative number"
            )));
        }
        events.sort_by(f64::total_cmp);
        let last = *events.last().expect("nonempty");
        if last > horizon {
            return Err(Error::InvalidTrace(format!(
                "story {story_id:?}: event at {last} lies beyond horizon {horizon}"
            )));
        }
        Ok(Self {
            story_id,
            submission_time: 0.0,
            events,
            horizon,
        })
    }

    /// Builds a trace whose horizon is its latest event.
    pub fn from_events(story_id: impl Into<String>, events: Vec<f64>) -> Result<Self> {
        let horizon = events.iter().copied().fold(f64::NAN, f64::max);
        Self::new(story_id, events, horizon)
    }

    pub fn story_id(&self) -> &str {
        &self.story_id
    }

    /// Absolute submission time. Traces parsed from CSV are already relative,
    /// so this is 0 unless set explicitly.
    pub fn submission_time(&self) -> f64 {
        self.submission_time
    }

    pub fn with_submission_time(mut self, t: f64) -> Self {
        self.submission_time = t;
        self
    }

    pub fn events(&self) -> &[f64] {
        &self.events
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    /// Number of events at or before `t`.
    pub fn count_until(&self, t: f64) -> usize {
        self.events.partition_point(|&e| e <= t)
    }
}

/// Cumulative probability of response over a time grid.
#[derive(Debug, Clone, PartialEq)]
pub struct PopularityCurve {
    grid: Vec<f64>,
    values: Vec<f64>,
    saturation_count: u64,
}

impl PopularityCurve {
    pub fn new(grid: Vec<f64>, values: Vec<f64>, saturation_count: u64) -> Result<Self> {
        if grid.len() != values.len() {
            return Err(Error::DimensionMismatch {
                expected: grid.len(),
                actual: values.len(),
            });
        }
        if grid.is_empty() {
            return Err(Error::InvalidArgument("curve needs at least one point".into()));
        }
        if saturation_count == 0 {
            return Err(Error::InvalidArgument("saturation count must be positive".into()));
        }
        if grid.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidArgument("curve grid must be strictly ascending".into()));
        }
        if values.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::InvalidArgument("curve values must be nondecreasing".into()));
        }
        if values[0] < 0.0 || values[values.len() - 1] > 1.0 {
            return Err(Error::InvalidArgument("curve values must lie in [0, 1]".into()));
        }
        Ok(Self {
            grid,
            values,
            saturation_count,
        })
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn saturation_count(&self) -> u64 {
        self.saturation_count
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    pub fn end_time(&self) -> f64 {
        self.grid[self.grid.len() - 1]
    }

    /// Linear interpolation, held constant outside the grid.
    pub fn interpolate(&self, t: f64) -> f64 {
        let n = self.grid.len();
        if t <= self.grid[0] {
            return self.values[0];
        }
        if t >= self.grid[n - 1] {
            return self.values[n - 1];
        }
        let hi = self.grid.partition_point(|&g| g <= t);
        let (t0, t1) = (self.grid[hi - 1], self.grid[hi]);
        let (v0, v1) = (self.values[hi - 1], self.values[hi]);
        v0 + (v1 - v0) * (t - t0) / (t1 - t0)
    }

    /// Expected counts `M * p(t)` on the grid.
    pub fn counts(&self) -> Vec<f64> {
        let m = self.saturation_count as f64;
        self.values.iter().map(|p| m * p).collect()
    }

    /// TSV with header `t\tp`.
    pub fn to_tsv(&self) -> String {
        crate::tsv::render(
            &["t", "p"],
            self.grid.iter().zip(&self.values).map(|(&t, &p)| vec![t, p]),
        )
    }
}

/// `n` evenly spaced points on `[0, end]`, the last exactly `end`.
pub fn uniform_grid(end: f64, n: usize) -> Vec<f64> {
    assert!(n >= 2, "grid needs at least two points");
    let mut grid: Vec<f64> = (0..n).map(|k| end * k as f64 / (n - 1) as f64).collect();
    grid[n - 1] = end;
    grid
}

/// Parses `story_id,timestamp` rows into one trace per story, in order of
/// first appearance. `horizon` overrides each story's latest timestamp.
pub fn parse_trace_csv(path: &Path, horizon: Option<f64>) -> Result<Vec<EventTrace>> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    parse_trace_reader(file, horizon)
}

pub fn parse_trace_reader<R: Read>(reader: R, horizon: Option<f64>) -> Result<Vec<EventTrace>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);

    let mut records = rdr.records();
    let header = match records.next() {
        None => return Err(Error::EmptyInput("no header row".into())),
        Some(r) => r.map_err(|e| csv_error(&e))?,
    };
    let names: Vec<&str> = header.iter().collect();
    if names != ["story_id", "timestamp"] {
        return Err(Error::MalformedRow {
            line: 1,
            message: format!("expected header `story_id,timestamp`, got `{}`", names.join(",")),
        });
    }

    let mut order: Vec<String> = Vec::new();
    let mut by_story: HashMap<String, Vec<f64>> = HashMap::new();
    for record in records {
        let record = record.map_err(|e| csv_error(&e))?;
        let line = record.position().map_or(0, |p| p.line());
        if record.len() == 1 && record[0].is_empty() {
            continue;
        }
        if record.len() != 2 {
            return Err(Error::MalformedRow {
                line,
                message: format!("expected 2 fields, found {}", record.len()),
            });
        }
        let story = &record[0];
        if story.is_empty() {
            return Err(Error::MalformedRow {
                line,
                message: "empty story_id".into(),
            });
        }
        let value: f64 = record[1].parse().map_err(|_| Error::MalformedRow {
            line,
            message: format!("timestamp `{}` is not a decimal number", &record[1]),
        })?;
        if !value.is_finite() {
            return Err(Error::MalformedRow {
                line,
                message: format!("timestamp `{}` is not finite", &record[1]),
            });
        }
        if value < 0.0 {
            return Err(Error::NegativeTimestamp { line, value });
        }
        match by_story.get_mut(story) {
            Some(v) => v.push(value),
            None => {
                order.push(story.to_string());
                by_story.insert(story.to_string(), vec![value]);
            }
        }
    }
    if order.is_empty() {
        return Err(Error::EmptyInput("no data rows".into()));
    }

    order
        .into_iter()
        .map(|id| {
            let events = by_story.remove(&id).expect("story recorded");
            match horizon {
                Some(h) => EventTrace::new(id, events, h),
                None => EventTrace::from_events(id, events),
            }
        })
        .collect()
}

fn csv_error(e: &csv::Error) -> Error {
    Error::MalformedRow {
        line: e.position().map_or(0, |p| p.line()),
        message: e.to_string(),
    }
}

/// Serializes traces back to `story_id,timestamp` CSV. Timestamps use the
/// shortest representation that parses back to the same value.
pub fn traces_to_csv(traces: &[EventTrace]) -> String {
    let mut out = String::from("story_id,timestamp\n");
    for trace in traces {
        for t in trace.events() {
            out.push_str(&format!("{},{}\n", trace.story_id(), t));
        }
    }
    out
}

/// Normalized counting process of `trace` on a uniform grid over `[0, T]`.
pub fn empirical_curve(trace: &EventTrace, grid_points: usize) -> Result<PopularityCurve> {
    if grid_points < 2 {
        return Err(Error::InvalidArgument("grid_points must be at least 2".into()));
    }
    empirical_curve_on(trace, uniform_grid(trace.horizon(), grid_points))
}

/// Right-continuous step sampling of the counting process on `grid`.
pub fn empirical_curve_on(trace: &EventTrace, grid: Vec<f64>) -> Result<PopularityCurve> {
    let m = trace.len();
    let values = grid
        .iter()
        .map(|&t| trace.count_until(t) as f64 / m as f64)
        .collect();
    PopularityCurve::new(grid, values, m as u64)
}

/// Pointwise mean of curves on a common uniform grid over `[0, max T]`.
///
/// Each curve is linearly interpolated and held at its final value past its
/// own end. Values at each grid point are summed in sorted order so the
/// result does not depend on the order of `curves`.
pub fn aggregate_mean(curves: &[PopularityCurve], grid_points: usize) -> Result<PopularityCurve> {
    if curves.is_empty() {
        return Err(Error::EmptyInput("no curves to aggregate".into()));
    }
    if grid_points < 2 {
        return Err(Error::InvalidArgument("grid_points must be at least 2".into()));
    }
    let end = curves
        .iter()
        .map(PopularityCurve::end_time)
        .fold(f64::NEG_INFINITY, f64::max);
    let grid = uniform_grid(end, grid_points);
    let n = curves.len() as f64;
    let mut column = Vec::with_capacity(curves.len());
    let mut values = Vec::with_capacity(grid.len());
    for &t in &grid {
        column.clear();
        column.extend(curves.iter().map(|c| c.interpolate(t)));
        column.sort_by(f64::total_cmp);
        values.push(column.iter().sum::<f64>() / n);
    }
    // Guard monotonicity against rounding in the sorted summation.
    for k in 1..values.len() {
        if values[k] < values[k - 1] {
            values[k] = values[k - 1];
        }
    }
    let m = curves.iter().map(PopularityCurve::saturation_count).sum();
    PopularityCurve::new(grid, values, m)
}
