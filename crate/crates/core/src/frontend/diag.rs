use std::fmt;

use serde::Serialize;

/// Location of a diagnostic in a source file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SourceSpan {
    pub file: String,
    pub start: usize,
    pub end: usize,
    pub line: usize,
    pub column: usize,
}

impl SourceSpan {
    pub fn new(file: &str, src: &str, start: usize, end: usize) -> SourceSpan {
        let start = start.min(src.len());
        let end = end.clamp(start, src.len());
        let before = &src[..start];
        let line = before.matches('\n').count() + 1;
        let column = start - before.rfind('\n').map(|i| i + 1).unwrap_or(0) + 1;
        SourceSpan {
            file: file.to_string(),
            start,
            end,
            line,
            column,
        }
    }

    /// Span used for declarations constructed programmatically.
    pub fn unknown(file: &str) -> SourceSpan {
        SourceSpan {
            file: file.to_string(),
            start: 0,
            end: 0,
            line: 1,
            column: 1,
        }
    }
}

impl fmt::Display for SourceSpan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.file, self.line, self.column)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Error,
    Warning,
}

/// Stable diagnostic codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Code {
    /// Unexpected token or malformed literal.
    Syntax,
    DuplicateDecl,
    UnknownName,
    TypeMismatch,
    LocationAssigned,
    InputAssigned,
    EventNotTrue,
    GuardShape,
    QuantifiedAssign,
    SchedulerGuard,
    MutableInConstraint,
    QuantifierRange,
    NoClasses,
    MissingLocation,
    OldInSource,
    SchedulerShape,
    MissingInit,
    ImmutableAssigned,
    BadEnum,
    BadConfiguration,
}

impl Code {
    pub fn as_str(self) -> &'static str {
        match self {
            Code::Syntax => "E001",
            Code::DuplicateDecl => "E002",
            Code::UnknownName => "E003",
            Code::TypeMismatch => "E004",
            Code::LocationAssigned => "E005",
            Code::InputAssigned => "E006",
            Code::EventNotTrue => "E007",
            Code::GuardShape => "E008",
            Code::QuantifiedAssign => "E009",
            Code::SchedulerGuard => "E010",
            Code::MutableInConstraint => "E011",
            Code::QuantifierRange => "E012",
            Code::NoClasses => "E013",
            Code::MissingLocation => "E014",
            Code::OldInSource => "E015",
            Code::SchedulerShape => "E016",
            Code::MissingInit => "W017",
            Code::ImmutableAssigned => "E018",
            Code::BadEnum => "E019",
            Code::BadConfiguration => "E020",
        }
    }
}

impl fmt::Display for Code {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl Serialize for Diagnostic {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("Diagnostic", 4)?;
        st.serialize_field("severity", &self.severity)?;
        st.serialize_field("code", self.code.as_str())?;
        st.serialize_field("message", &self.message)?;
        st.serialize_field("span", &self.span)?;
        st.end()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub severity: Severity,
    pub code: Code,
    pub message: String,
    pub span: SourceSpan,
}

impl Diagnostic {
    pub fn error(code: Code, span: SourceSpan, message: impl Into<String>) -> Diagnostic {
        Diagnostic {
            severity: Severity::Error,
            code,
            message: message.into(),
            span,
        }
    }

    pub fn warning(code: Code, span: SourceSpan, message: impl Into<String>) -> Diagnostic {
        Diagnostic {
            severity: Severity::Warning,
            code,
            message: message.into(),
            span,
        }
    }

    pub fn is_error(&self) -> bool {
        self.severity == Severity::Error
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sev = match self.severity {
            Severity::Error => "error",
            Severity::Warning => "warning",
        };
        write!(f, "{}: {sev}[{}]: {}", self.span, self.code, self.message)
    }
}

/// A non-empty list of diagnostics, at least one of which is an error.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{}", render(.0))]
pub struct Diagnostics(pub Vec<Diagnostic>);

fn render(d: &[Diagnostic]) -> String {
    d.iter()
        .map(|d| d.to_string())
        .collect::<Vec<_>>()
        .join("\n")
}

impl Diagnostics {
    pub fn single(d: Diagnostic) -> Diagnostics {
        Diagnostics(vec![d])
    }

    pub fn codes(&self) -> Vec<Code> {
        self.0.iter().map(|d| d.code).collect()
    }

    pub fn has(&self, code: Code) -> bool {
        self.0.iter().any(|d| d.code == code)
    }
}
