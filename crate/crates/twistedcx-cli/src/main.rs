use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use twistedcx_cli::{execute, serialize, Command, ErrorInfo, Report};

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Format {
    Text,
    Machine,
}

/// Exact checks and constructions for twisted complexes on a finite cover.
#[derive(Parser, Debug)]
#[command(name = "twistedcx", version)]
struct Cli {
    command: Command,
    /// Input document (JSON).
    #[arg(long)]
    input: PathBuf,
    /// q or fp:<prime>; overrides the document.
    #[arg(long)]
    field: Option<String>,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Write the report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Object to run on; all applicable objects when omitted.
    #[arg(long)]
    name: Option<String>,
    /// Write the workspace, including constructed objects, to this file.
    #[arg(long)]
    emit: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (report, ws) = match std::fs::read_to_string(&cli.input) {
        Ok(text) => execute(cli.command, &text, cli.field.as_deref(), cli.name.as_deref()),
        Err(e) => {
            let mut r = Report::new(cli.command.name(), cli.field.as_deref().unwrap_or(""));
            r.fail_input(ErrorInfo::Usage {
                message: format!("cannot read {}: {e}", cli.input.display()),
            });
            (r, None)
        }
    };
    let text = match cli.format {
        Format::Text => report.render_text(),
        Format::Machine => report.render_machine(),
    };
    let written = match &cli.out {
        Some(p) => std::fs::write(p, &text),
        None => {
            print!("{text}");
            Ok(())
        }
    };
    if let Err(e) = written {
        eprintln!("twistedcx: cannot write report: {e}");
        return ExitCode::from(2);
    }
    if let (Some(p), Some(ws)) = (&cli.emit, &ws) {
        if let Err(e) = std::fs::write(p, serialize(ws)) {
            eprintln!("twistedcx: cannot write {}: {e}", p.display());
            return ExitCode::from(2);
        }
    }
    ExitCode::from(report.status.exit_code() as u8)
}
