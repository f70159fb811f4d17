//! Relaxation from the no-response state on a trace's own ultrametric
//! space, with distances rescaled to at most 1.

use ultradiffusion::cli::{simulate_trace_space, RunConfig};
use ultradiffusion::trace::EventTrace;

fn main() -> ultradiffusion::Result<()> {
    let trace = EventTrace::new("timeline", vec![1.0, 5.0, 6.0, 8.0, 12.0, 17.0], 17.0)?;
    let config = RunConfig { rescale_distances: true, grid_points: 18, ..RunConfig::default() };
    let curve = simulate_trace_space(&trace, 2.0, &config)?;
    print!("{}", curve.to_tsv());
    Ok(())
}
