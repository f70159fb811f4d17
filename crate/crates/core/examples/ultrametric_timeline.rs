//! Builds the ultrametric state space of a small response trace and checks
//! the strong triangle inequality.

use ultradiffusion::trace::EventTrace;
use ultradiffusion::ultrametric::{build_from_trace, verify_ultrametric};

fn main() -> ultradiffusion::Result<()> {
    let trace = EventTrace::new("timeline", vec![1.0, 5.0, 6.0, 8.0, 12.0, 17.0], 17.0)?;
    let space = build_from_trace(&trace);
    println!("labels: {:?}", space.labels());
    print!("{}", space.to_tsv());
    println!("ultrametric: {}", verify_ultrametric(&space).passed());
    Ok(())
}
