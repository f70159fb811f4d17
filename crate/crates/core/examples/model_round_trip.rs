//! Fits an exact model curve and recovers chain length and scaling factor.

use ultradiffusion::fitting::{
    fit_exponential, infer_params, simulate_curve, MappingMode, Prefactor, UltradiffusionParams,
};
use ultradiffusion::trace::uniform_grid;

fn main() -> ultradiffusion::Result<()> {
    for (n, mu) in [(5, 0.01), (50, 0.1), (500, 1.0)] {
        let p = UltradiffusionParams::new(n, mu, 1000)?;
        let grid = uniform_grid(p.default_horizon(), 200);
        let fit = fit_exponential(&simulate_curve(&p, &grid, Prefactor::Consistent)?, false)?;
        let back = infer_params(&fit, 1000, MappingMode::Roundtrip)?;
        println!("t_N {n} -> {}, mu {mu} -> {:.9}, R2 {:.12}", back.t_n, back.mu, fit.r2);
    }
    Ok(())
}
