//! Runs the acceptance checks and prints one line per check.

use ultradiffusion::oracle_suite::{render_table, run_all, SuiteConfig};

fn main() {
    print!("{}", render_table(&run_all(&SuiteConfig::default())));
}
