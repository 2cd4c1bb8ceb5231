use serde::Serialize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Error,
}

impl Status {
    pub fn exit_code(self) -> i32 {
        match self {
            Status::Pass => 0,
            Status::Fail => 1,
            Status::Error => 2,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Check {
    pub object: String,
    pub check: String,
    pub passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Value {
    pub object: String,
    pub key: String,
    pub value: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ErrorInfo {
    Parse { line: usize, col: usize, message: String },
    Validation { object: String, reason: String },
    Usage { message: String },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Report {
    pub command: String,
    pub field: String,
    pub status: Status,
    pub warnings: Vec<String>,
    pub checks: Vec<Check>,
    pub values: Vec<Value>,
    pub notes: Vec<String>,
    pub emitted: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<ErrorInfo>,
}

impl Report {
    pub fn new(command: &str, field: &str) -> Report {
        Report {
            command: command.to_string(),
            field: field.to_string(),
            status: Status::Pass,
            warnings: Vec::new(),
            checks: Vec::new(),
            values: Vec::new(),
            notes: Vec::new(),
            emitted: Vec::new(),
            error: None,
        }
    }

    pub fn check(&mut self, object: &str, check: &str, passed: bool, detail: Option<String>) {
        if !passed && self.status == Status::Pass {
            self.status = Status::Fail;
        }
        self.checks.push(Check {
            object: object.to_string(),
            check: check.to_string(),
            passed,
            detail,
        });
    }

    pub fn value(&mut self, object: &str, key: &str, value: impl ToString) {
        self.values.push(Value {
            object: object.to_string(),
            key: key.to_string(),
            value: value.to_string(),
        });
    }

    pub fn note(&mut self, text: impl Into<String>) {
        self.notes.push(text.into());
    }

    pub fn fail_input(&mut self, e: ErrorInfo) {
        self.status = Status::Error;
        self.error = Some(e);
    }

    pub fn render_text(&self) -> String {
        let mut out = format!("command: {}\nfield: {}\n", self.command, self.field);
        for w in &self.warnings {
            out += &format!("warning: {w}\n");
        }
        if let Some(e) = &self.error {
            let line = match e {
                ErrorInfo::Parse { line, col, message } => format!("parse error at line {line}, column {col}: {message}"),
                ErrorInfo::Validation { object, reason } => format!("invalid {object}: {reason}"),
                ErrorInfo::Usage { message } => message.clone(),
            };
            out += &format!("error: {line}\n");
        }
        for c in &self.checks {
            let tag = if c.passed { "ok  " } else { "FAIL" };
            out += &format!("{tag} {}: {}", c.object, c.check);
            if let Some(d) = &c.detail {
                out += &format!(" ({d})");
            }
            out.push('\n');
        }
        for v in &self.values {
            out += &format!("{} {} = {}\n", v.object, v.key, v.value);
        }
        for n in &self.notes {
            out += &format!("note: {n}\n");
        }
        for e in &self.emitted {
            out += &format!("emitted: {e}\n");
        }
        let status = match self.status {
            Status::Pass => "pass",
            Status::Fail => "fail",
            Status::Error => "error",
        };
        out += &format!("status: {status}\n");
        out
    }

    pub fn render_machine(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}
