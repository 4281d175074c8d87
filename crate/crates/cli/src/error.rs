use serde::Serialize;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] bellforge_core::Error),

    #[error("{path}: {message}")]
    Schema { path: String, message: String },

    #[error("{0}")]
    Io(#[from] std::io::Error),

    #[error("{0}")]
    Csv(#[from] csv::Error),

    #[error("{0}")]
    Json(#[from] serde_json::Error),

    #[error("{0}")]
    Usage(String),
}

pub type CliResult<T> = Result<T, CliError>;

#[derive(Serialize)]
struct ErrorBody<'a> {
    kind: &'a str,
    message: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    path: Option<&'a str>,
}

#[derive(Serialize)]
struct ErrorEnvelope<'a> {
    tool: &'a str,
    version: &'a str,
    command: &'a str,
    error: ErrorBody<'a>,
}

impl CliError {
    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Core(e) => core_kind(e),
            CliError::Schema { .. } => "schema",
            CliError::Io(_) => "io",
            CliError::Csv(_) => "csv",
            CliError::Json(_) => "json",
            CliError::Usage(_) => "usage",
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Schema { .. } => 2,
            _ => 1,
        }
    }

    /// One-line JSON description of the failure.
    pub fn to_json(&self, command: &str) -> String {
        let path = match self {
            CliError::Schema { path, .. } => Some(path.as_str()),
            _ => None,
        };
        let env = ErrorEnvelope {
            tool: crate::TOOL,
            version: crate::VERSION,
            command,
            error: ErrorBody {
                kind: self.kind(),
                message: self.to_string(),
                path,
            },
        };
        serde_json::to_string(&env).expect("error envelope serializes")
    }
}

fn core_kind(e: &bellforge_core::Error) -> &'static str {
    use bellforge_core::Error::*;
    match e {
        DimensionCap { .. } => "dimension_cap",
        DimensionMismatch(_) => "dimension_mismatch",
        ScenarioMismatch { .. } => "scenario_mismatch",
        NoConvergence { .. } => "no_convergence",
        BudgetExceeded { .. } => "budget_exceeded",
        UndefinedRatio(_) => "undefined_ratio",
        InvalidConstant { .. } => "invalid_constant",
        InvalidPovm(_) => "invalid_povm",
        InvalidState(_) => "invalid_state",
        InvalidInput(_) => "invalid_input",
        ProvenanceMismatch => "provenance_mismatch",
        NotPositive { .. } => "not_positive",
        RetryCapExhausted { .. } => "retry_cap_exhausted",
    }
}
