use clap::Parser;

fn main() {
    // clap exits with 2 on usage errors already
    let cli = mmptol::Cli::parse();
    std::process::exit(mmptol::run(&cli));
}
