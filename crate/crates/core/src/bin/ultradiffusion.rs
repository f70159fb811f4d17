use clap::Parser;

fn main() {
    let code = ultradiffusion::cli::run(ultradiffusion::cli::Cli::parse());
    std::process::exit(code);
}
