//! Integrates the master equation on a chain and compares the probability
//! of staying in the last state with the survival formula.

use ultradiffusion::dynamics::{integrate_master_equation, ProbabilityVector};
use ultradiffusion::generator::build_generator;
use ultradiffusion::spectral::survival_probability;
use ultradiffusion::trace::uniform_grid;
use ultradiffusion::ultrametric::uniform_chain;

fn main() -> ultradiffusion::Result<()> {
    let (n, mu) = (10, 0.3);
    let g = build_generator(&uniform_chain(n)?, mu)?;
    let p0 = ProbabilityVector::characteristic(n, n - 1)?;
    let grid = uniform_grid(60.0, 13);
    let traj = integrate_master_equation(&g, &p0, &grid)?;
    println!("t\tode\tclosed");
    for (p, &t) in traj.iter().zip(&grid) {
        println!("{t}\t{:.9}\t{:.9}", p.get(n - 1), survival_probability(n, mu, t)?);
    }
    Ok(())
}
