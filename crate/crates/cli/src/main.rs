use std::process::ExitCode;

use clap::Parser;
use hexlens_cli::args::{Cli, Command};
use hexlens_cli::commands::{self, print_json};
use hexlens_cli::service::{self, ServiceConfig};
use hexlens_cli::CliError;
use tracing_subscriber::EnvFilter;

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Render(args) => {
            let report = commands::run_render(&args)?;
            eprintln!(
                "wrote {} ({}×{}, {} fragments, {:.1} ms)",
                args.output.display(),
                report.width,
                report.height,
                report.fragments,
                report.render_ms
            );
        }
        Command::Lod(args) => print_json(&commands::run_lod(&args)?),
        Command::Info(args) => print_json(&commands::run_info(&args)?),
        Command::Generate(args) => print_json(&commands::run_generate(&args)?),
        Command::Serve(args) => {
            let config = ServiceConfig {
                data_dir: args.data_dir,
                max_upload: args.max_upload_mib << 20,
                threads: None,
            };
            let runtime = tokio::runtime::Runtime::new().map_err(CliError::io("tokio runtime"))?;
            runtime
                .block_on(service::serve(args.addr, config))
                .map_err(CliError::io(args.addr.to_string()))?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    tracing_subscriber::fmt()
        .with_env_filter(EnvFilter::try_from_default_env().unwrap_or_else(|_| "info".into()))
        .with_writer(std::io::stderr)
        .init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
