use clap::Parser;

fn main() {
    std::process::exit(lfmix::cli::execute(lfmix::cli::Cli::parse()));
}
