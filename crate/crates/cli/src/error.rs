use std::fmt;
use std::path::PathBuf;

use regenstab_core::Error as CoreError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IssueKind {
    /// Malformed or inconsistent configuration.
    Schema,
    /// Switching model parameters outside their admissible range.
    Model,
    /// A stability hypothesis the run would refuse.
    Assumption,
}

/// One configuration problem, addressed by its path in the config document.
#[derive(Debug, Clone, PartialEq)]
pub struct Issue {
    pub path: String,
    pub message: String,
    pub kind: IssueKind,
}

impl Issue {
    pub fn schema(path: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            path: path.into(),
            message: message.into(),
            kind: IssueKind::Schema,
        }
    }

    pub fn model(path: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            path: path.into(),
            message: message.into(),
            kind: IssueKind::Model,
        }
    }
}

impl fmt::Display for Issue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = match self.kind {
            IssueKind::Schema => "invalid",
            IssueKind::Model => "model violation",
            IssueKind::Assumption => "assumption failed",
        };
        write!(f, "{tag}: {}: {}", self.path, self.message)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{}", join_issues(.0))]
    Invalid(Vec<Issue>),

    #[error("{0}")]
    Core(#[from] CoreError),

    #[error("verdict is inconclusive (rho = {rho}) and strict mode is set")]
    Inconclusive { rho: f64 },

    #[error("{}: {source}", .path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

fn join_issues(issues: &[Issue]) -> String {
    issues
        .iter()
        .map(|i| i.to_string())
        .collect::<Vec<_>>()
        .join("\n")
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    /// 2 validation, 3 model violation, 4 inconclusive under strict mode,
    /// 1 anything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Invalid(issues) => {
                if !issues.is_empty() && issues.iter().all(|i| i.kind == IssueKind::Model) {
                    3
                } else {
                    2
                }
            }
            CliError::Core(e) => match e {
                CoreError::ModelViolation(_) => 3,
                CoreError::DimensionMismatch(_)
                | CoreError::DimensionTooLarge { .. }
                | CoreError::UnsupportedDegree(_)
                | CoreError::InvalidParameter(_)
                | CoreError::UnknownMode(_)
                | CoreError::AssumptionFailed { .. } => 2,
                CoreError::NonFinite(_) | CoreError::Singular => 1,
            },
            CliError::Inconclusive { .. } => 4,
            CliError::Io { .. } => 1,
        }
    }
}
