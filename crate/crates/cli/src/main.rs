use clap::Parser;

fn main() {
    let cli = empath_cli::Cli::parse();
    let code = empath_cli::run(&cli, &mut std::io::stdout().lock(), &mut std::io::stderr().lock());
    std::process::exit(code);
}
