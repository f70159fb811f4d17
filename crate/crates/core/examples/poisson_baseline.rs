//! A Poisson process gives a linear response curve; a linear fit beats the
//! exponential one on it.

use ultradiffusion::baselines::{poisson_event_probability, poisson_pmf, PoissonModel};
use ultradiffusion::fitting::{fit_exponential_points, fit_linear};
use ultradiffusion::trace::uniform_grid;

fn main() -> ultradiffusion::Result<()> {
    let model = PoissonModel::new(0.5, 1000.0)?;
    println!("P(N(4) = 2) = {:.9}", poisson_pmf(&model, 2, 4.0));
    let t = uniform_grid(model.saturation_time(), 200);
    let y: Vec<f64> = t.iter().map(|&x| poisson_event_probability(&model, x)).collect();
    let (_, _, r2_lin) = fit_linear(&t, &y)?;
    let exp = fit_exponential_points(&t, &y, false)?;
    println!("linear R2 {r2_lin:.12}, exponential R2 {:.12}", exp.r2);
    Ok(())
}
