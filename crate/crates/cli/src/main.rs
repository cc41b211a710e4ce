use clap::Parser;
use hallfem_cli::{execute, Cli};

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let code = execute(&cli, &mut std::io::stdout());
    std::process::exit(code);
}
