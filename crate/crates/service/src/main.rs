use std::io::IsTerminal;
use tracing_subscriber::EnvFilter;

fn main() {
    tracing_subscriber::fmt()
        .with_env_filter(EnvFilter::try_from_env("NBIIG_LOG").unwrap_or_else(|_| EnvFilter::new("warn,nbiig_service=info")))
        .with_writer(std::io::stderr)
        .with_ansi(std::io::stderr().is_terminal())
        .init();
    std::process::exit(nbiig_service::cli::run(std::env::args_os()));
}
