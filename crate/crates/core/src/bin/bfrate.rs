use clap::Parser;

fn main() {
    let cli = bfrate::cli::Cli::parse();
    std::process::exit(bfrate::cli::run(cli));
}
