use clap::Parser;

fn main() {
    let cli = bct_cli::Cli::parse();
    let mut stdout = std::io::stdout().lock();
    if let Err(err) = bct_cli::run(cli, &mut stdout) {
        eprintln!("error: {err:#}");
        std::process::exit(bct_cli::exit_code(&err));
    }
}
