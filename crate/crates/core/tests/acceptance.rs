//! One PASS/FAIL line per acceptance criterion; exits nonzero if any fails.

use ultradiffusion::oracle_suite::{render_table, run_all, SuiteConfig};

fn main() {
    let results = run_all(&SuiteConfig::default());
    print!("{}", render_table(&results));
    if results.iter().any(|r| !r.passed) {
        std::process::exit(1);
    }
}
