use lentlab_core::ErrorCategory;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{}", match line { Some(l) => format!("parse error at line {l}: {message}"), None => format!("parse error: {message}") })]
    Parse { line: Option<usize>, message: String },

    #[error("path {path}: {source}")]
    Path { path: usize, source: lentlab_core::Error },

    #[error(transparent)]
    Core(#[from] lentlab_core::Error),

    #[error("spec validation failed: {0}")]
    Validation(String),

    #[error("{0}")]
    Check(String),

    #[error("io error on {path}: {source}")]
    Io { path: String, source: std::io::Error },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        let by_category = |e: &lentlab_core::Error| match e.category() {
            ErrorCategory::Input => 2,
            ErrorCategory::SpecViolation => 3,
            ErrorCategory::Numeric => 4,
            ErrorCategory::Io => 5,
        };
        match self {
            CliError::Parse { .. } => 2,
            CliError::Path { source, .. } | CliError::Core(source) => by_category(source),
            CliError::Validation(_) => 3,
            CliError::Check(_) => 4,
            CliError::Io { .. } => 5,
        }
    }

    pub fn io(path: impl Into<String>, source: std::io::Error) -> Self {
        CliError::Io { path: path.into(), source }
    }
}
