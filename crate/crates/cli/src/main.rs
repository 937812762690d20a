use std::process::ExitCode;

use clap::Parser;
use scl_mon::app::{run, Cli, EXIT_ERROR};

fn init_threads() -> anyhow::Result<()> {
    if let Ok(v) = std::env::var("SCL_MON_THREADS") {
        let n: usize = v
            .trim()
            .parse()
            .map_err(|_| anyhow::anyhow!("SCL_MON_THREADS must be a positive integer, got `{v}`"))?;
        if n == 0 {
            anyhow::bail!("SCL_MON_THREADS must be a positive integer, got `{v}`");
        }
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match init_threads().and_then(|()| run(cli)) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_ERROR as u8)
        }
    }
}
