//! Batch front end: parse a cover description, run one command, report.

pub mod commands;
pub mod document;
pub mod report;
pub mod workspace;

pub use commands::Command;
pub use report::{ErrorInfo, Report, Status};
pub use workspace::{parse_input, serialize, InputError, Parsed, Workspace};

use twistedcx::exact_linalg::Field;

/// Runs `cmd` on the document text. Returns the report and the workspace
/// with any constructed objects added (absent on input errors).
pub fn execute(cmd: Command, text: &str, field: Option<&str>, name: Option<&str>) -> (Report, Option<Workspace>) {
    let mut report = Report::new(cmd.name(), field.unwrap_or(""));
    let field = match field.map(Field::parse).transpose() {
        Ok(f) => f,
        Err(e) => {
            report.fail_input(ErrorInfo::Usage { message: e.to_string() });
            return (report, None);
        }
    };
    let parsed = match parse_input(text, field) {
        Ok(p) => p,
        Err(InputError::Parse { line, col, message }) => {
            report.fail_input(ErrorInfo::Parse { line, col, message });
            return (report, None);
        }
        Err(InputError::Validation { object, reason }) => {
            report.fail_input(ErrorInfo::Validation { object, reason });
            return (report, None);
        }
    };
    let mut ws = parsed.workspace;
    report.field = ws.field.spec();
    report.warnings = parsed.warnings;
    commands::run(&mut ws, cmd, name, &mut report);
    (report, Some(ws))
}
