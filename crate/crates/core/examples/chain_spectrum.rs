//! Closed-form eigenvalues of the uniform chain next to a numerical
//! eigendecomposition of its generator.

use ultradiffusion::dynamics::numeric_spectrum;
use ultradiffusion::generator::build_generator;
use ultradiffusion::spectral::chain_spectrum;
use ultradiffusion::ultrametric::uniform_chain;

fn main() -> ultradiffusion::Result<()> {
    let (n, mu) = (8, 0.5);
    let spec = chain_spectrum(n, mu)?;
    let numeric = numeric_spectrum(&build_generator(&uniform_chain(n)?, mu)?)?;
    let mut closed = spec.eigenvalues().to_vec();
    closed.sort_by(|a, b| b.total_cmp(a));
    println!("closed\tnumeric");
    for (c, x) in closed.iter().zip(&numeric.eigenvalues) {
        println!("{c:.12e}\t{x:.12e}");
    }
    Ok(())
}
