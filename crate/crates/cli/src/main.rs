use clap::Parser;

fn main() {
    let cli = chr_cli::commands::Cli::parse();
    let code = chr_cli::commands::execute(cli, &mut std::io::stdout(), &mut std::io::stderr());
    std::process::exit(code);
}
