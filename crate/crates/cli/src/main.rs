use clap::Parser;

fn main() {
    std::process::exit(spinbath_cli::main_with(spinbath_cli::Cli::parse()));
}
