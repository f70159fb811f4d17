//! Samples a synthetic story, fits the response curve and maps the fit to
//! chain parameters under both mappings.

use ultradiffusion::cli::{analyze_trace, RunConfig};
use ultradiffusion::fitting::{sample_events, MappingMode, UltradiffusionParams};

fn main() -> ultradiffusion::Result<()> {
    let params = UltradiffusionParams::new(50, 0.2, 10_000)?;
    let trace = sample_events(&params, "synthetic", params.default_horizon(), 1)?;
    for mapping in [MappingMode::Roundtrip, MappingMode::Paper] {
        let config = RunConfig { mapping, ..RunConfig::default() };
        let a = analyze_trace(&trace, &config)?;
        println!("{}", serde_json::to_string(&a.record)?);
    }
    println!("true decay rate: {:.9e}", params.decay_rate());
    Ok(())
}
