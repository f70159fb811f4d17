//! Mean response curve across synthetic stories, fitted as one curve.

use ultradiffusion::cli::{aggregate_traces, synthetic_traces, RunConfig};
use ultradiffusion::fitting::{MappingMode, UltradiffusionParams};

fn main() -> ultradiffusion::Result<()> {
    let params = UltradiffusionParams::new(30, 0.15, 400)?;
    let traces = synthetic_traces(&params, 25, params.default_horizon(), 42)?;
    let config = RunConfig { mapping: MappingMode::Paper, grid_points: 100, ..RunConfig::default() };
    let a = aggregate_traces(&traces, &config)?;
    println!("{}", serde_json::to_string_pretty(&a.record)?);
    Ok(())
}
