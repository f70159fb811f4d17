//! Leaf autocorrelation of a balanced tree from its level expansion and
//! from the master equation.

use ultradiffusion::dynamics::{integrate_master_equation, ProbabilityVector};
use ultradiffusion::generator::build_generator;
use ultradiffusion::spectral::{tree_relaxation_terms, TreeModel};
use ultradiffusion::trace::uniform_grid;

fn main() -> ultradiffusion::Result<()> {
    let tree = TreeModel::balanced(2, 3, 1.0)?;
    let terms = tree_relaxation_terms(&tree, tree.leaves()[0])?;
    println!("alpha {:.6}, betas {:?}, gammas {:?}", terms.alpha, terms.betas, terms.gammas);
    let space = tree.induced_space()?;
    let g = build_generator(&space, 1.0)?;
    let grid = uniform_grid(20.0, 11);
    let traj = integrate_master_equation(&g, &ProbabilityVector::characteristic(space.len(), 0)?, &grid)?;
    println!("t\tode\tclosed");
    for (p, &t) in traj.iter().zip(&grid) {
        println!("{t}\t{:.9}\t{:.9}", p.get(0), terms.eval(t));
    }
    Ok(())
}
