pub mod commands;
pub mod config;
pub mod report;

use std::io::Write;

use config::RunConfig;

/// Run a parsed command line; returns the process exit code.
pub fn execute(cli: &config::Cli) -> i32 {
    let cfg = match RunConfig::resolve(&cli.common) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return 2;
        }
    };
    let doc = match commands::run(&cli.command, &cfg) {
        Ok(d) => d,
        Err(e) => {
            eprintln!("error: {e}");
            return e.exit_code();
        }
    };
    let json = doc.to_json();
    if let Some(path) = &cfg.output {
        if let Err(e) = std::fs::write(path, format!("{json}\n")) {
            eprintln!("error: {}: {e}", path.display());
            return 2;
        }
    }
    let mut out = std::io::stdout().lock();
    let text = if cfg.json {
        format!("{json}\n")
    } else {
        doc.to_text()
    };
    let _ = out.write_all(text.as_bytes());
    doc.exit_code()
}
