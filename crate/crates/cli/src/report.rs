use std::fmt::Write as _;
use std::process::ExitCode;

use pgcl_core::ast::{ProgState, Value};
use pgcl_core::mdp::MdpError;
use pgcl_core::parser::ParseError;
use pgcl_core::transform::TransformError;
use pgcl_core::vc::VcError;
use pgcl_core::wp::WpError;
use serde::Serialize;
use serde_json::{Map, Value as Json};

/// Values kept in human-readable output; JSON output keeps all of them.
const HUMAN_VALUES: usize = 20;

#[derive(Debug, Serialize)]
pub struct ValueEntry {
    pub state: ProgState,
    pub value: Value,
    /// Optimal value of the original program, for `transform`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub original: Option<Value>,
    /// The preexpectation bound the value is compared against.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bound: Option<Value>,
}

impl ValueEntry {
    pub fn new(state: ProgState, value: Value) -> Self {
        ValueEntry { state, value, original: None, bound: None }
    }
}

#[derive(Debug, Serialize)]
pub struct Counterexample {
    pub state: Option<ProgState>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub location: Option<String>,
    pub reason: String,
}

/// Common report shape of every command. Command-specific data goes into
/// `details`, flattened into the top-level JSON object.
#[derive(Debug, Serialize)]
pub struct Report {
    pub command: &'static str,
    pub file: String,
    pub domain_size: usize,
    pub verdict: bool,
    pub values: Vec<ValueEntry>,
    pub counterexamples: Vec<Counterexample>,
    pub warnings: Vec<String>,
    pub timing_ms: u128,
    #[serde(flatten)]
    pub details: Map<String, Json>,
    /// Main textual output, such as a preexpectation or a program.
    #[serde(skip)]
    pub text: Option<String>,
}

impl Report {
    pub fn new(command: &'static str, file: &str, domain_size: usize) -> Self {
        Report {
            command,
            file: file.to_string(),
            domain_size,
            verdict: true,
            values: Vec::new(),
            counterexamples: Vec::new(),
            warnings: Vec::new(),
            timing_ms: 0,
            details: Map::new(),
            text: None,
        }
    }

    pub fn detail(&mut self, key: &str, value: impl Serialize) {
        let v = serde_json::to_value(value).expect("reports serialize to JSON");
        self.details.insert(key.to_string(), v);
    }

    pub fn fail(&mut self, state: Option<ProgState>, location: Option<String>, reason: impl Into<String>) {
        self.verdict = false;
        self.counterexamples.push(Counterexample { state, location, reason: reason.into() });
    }

    pub fn human(&self) -> String {
        let mut out = String::new();
        if let Some(text) = &self.text {
            let _ = writeln!(out, "{}", text.trim_end());
        }
        for (k, v) in &self.details {
            match v {
                Json::String(s) if Some(s) == self.text.as_ref() => {}
                Json::String(s) => {
                    let _ = writeln!(out, "{k}: {s}");
                }
                Json::Bool(_) | Json::Number(_) => {
                    let _ = writeln!(out, "{k}: {v}");
                }
                _ => {}
            }
        }
        for e in self.values.iter().take(HUMAN_VALUES) {
            let _ = write!(out, "{} -> {}", e.state, e.value);
            if let Some(o) = &e.original {
                let _ = write!(out, " (original {o})");
            }
            if let Some(b) = &e.bound {
                let _ = write!(out, " (bound {b})");
            }
            out.push('\n');
        }
        if self.values.len() > HUMAN_VALUES {
            let _ = writeln!(out, "... {} more states (use --json for all)", self.values.len() - HUMAN_VALUES);
        }
        for c in &self.counterexamples {
            let at = c.location.as_deref().map(|l| format!(" at loop {l}")).unwrap_or_default();
            match &c.state {
                Some(s) => {
                    let _ = writeln!(out, "counterexample{at}: {s}: {}", c.reason);
                }
                None => {
                    let _ = writeln!(out, "failure{at}: {}", c.reason);
                }
            }
        }
        for w in &self.warnings {
            let _ = writeln!(out, "warning: {w}");
        }
        let _ = writeln!(
            out,
            "{}: {} ({} states in domain, {} ms)",
            self.command,
            if self.verdict { "pass" } else { "FAIL" },
            self.domain_size,
            self.timing_ms
        );
        out
    }

    pub fn exit_code(&self) -> ExitCode {
        ExitCode::from(if self.verdict { 0 } else { 1 })
    }
}

/// A command that could not produce a verdict.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// Bad flags, unparsable input or a program outside a command's scope.
    #[error("{0}")]
    Usage(String),
    /// Domain escapes, budget overruns and other model-level failures.
    #[error("{0}")]
    Resource(String),
}

impl CliError {
    pub fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Resource(_) => 3,
        }
    }
}

impl From<ParseError> for CliError {
    fn from(e: ParseError) -> Self {
        CliError::Usage(format!("parse error: {e}"))
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Usage(e.to_string())
    }
}

impl From<WpError> for CliError {
    fn from(e: WpError) -> Self {
        match e {
            WpError::LoopPresent | WpError::Desugar(_) => CliError::Usage(e.to_string()),
            _ => CliError::Resource(e.to_string()),
        }
    }
}

impl From<MdpError> for CliError {
    fn from(e: MdpError) -> Self {
        match e {
            MdpError::Desugar(_) | MdpError::Undeclared(_) | MdpError::EmbeddingMismatch(_) | MdpError::Unsupported(_) => {
                CliError::Usage(e.to_string())
            }
            _ => CliError::Resource(e.to_string()),
        }
    }
}

impl From<VcError> for CliError {
    fn from(e: VcError) -> Self {
        match e {
            VcError::Pairing { .. } => CliError::Usage(e.to_string()),
            VcError::Wp(e) => e.into(),
            VcError::Mdp(e) => e.into(),
            VcError::Check(_) => CliError::Resource(e.to_string()),
        }
    }
}

impl From<TransformError> for CliError {
    fn from(e: TransformError) -> Self {
        match e {
            TransformError::Wp(e) => e.into(),
            TransformError::Desugar(_) => CliError::Usage(e.to_string()),
            TransformError::Check(_) => CliError::Resource(e.to_string()),
        }
    }
}
