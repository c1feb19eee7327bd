use tracing::Level;

fn main() {
    let code = irbench::cli::run_with(std::env::args_os(), |cli| {
        let level = match cli.verbose {
            0 => Level::WARN,
            1 => Level::INFO,
            _ => Level::DEBUG,
        };
        tracing_subscriber::fmt()
            .with_max_level(level)
            .with_writer(std::io::stderr)
            .with_target(false)
            .init();
    });
    std::process::exit(code);
}
