use clap::Parser;

fn main() {
    let cli = treeprice::cli::Cli::parse();
    std::process::exit(treeprice::cli::run(cli));
}
