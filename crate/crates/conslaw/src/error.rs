use std::fmt;
use std::path::PathBuf;

use conslaw_core::Error as CoreError;

/// Pipeline stage, used to tag failures.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Stage {
    Config,
    Simulate,
    Noise,
    Center,
    Svd,
    Median,
    Test,
    Oracles,
    Report,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Stage::Config => "config",
            Stage::Simulate => "simulate",
            Stage::Noise => "noise",
            Stage::Center => "center",
            Stage::Svd => "svd",
            Stage::Median => "median",
            Stage::Test => "test",
            Stage::Oracles => "oracles",
            Stage::Report => "report",
        };
        f.write_str(s)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error("config error at `{path}`: {message}")]
    Config { path: String, message: String },
    #[error("{stage} stage failed: {source}")]
    Stage {
        stage: Stage,
        #[source]
        source: CoreError,
    },
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{}: {message}", path.display())]
    Format { path: PathBuf, message: String },
}

impl RunError {
    pub fn config(path: impl Into<String>, message: impl Into<String>) -> Self {
        RunError::Config {
            path: path.into(),
            message: message.into(),
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        RunError::Io {
            path: path.into(),
            source,
        }
    }

    /// 0 success, 1 I/O, 2 configuration, 3 numerics, 4 resource limits.
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config { .. } => 2,
            RunError::Io { .. } | RunError::Format { .. } => 1,
            RunError::Stage { source, .. } => match source {
                CoreError::InvalidParameter(_) => 2,
                CoreError::ResourceLimit(_) => 4,
                CoreError::NumericFailure(_)
                | CoreError::NonConvergence { .. }
                | CoreError::EmptyResult(_)
                | CoreError::ModelConsistency(_) => 3,
            },
        }
    }

    pub fn stage(&self) -> Stage {
        match self {
            RunError::Config { .. } => Stage::Config,
            RunError::Stage { stage, .. } => *stage,
            RunError::Io { .. } | RunError::Format { .. } => Stage::Report,
        }
    }
}

pub type RunResult<T> = Result<T, RunError>;

/// Tags core errors with the stage they came from.
pub trait AtStage<T> {
    fn at(self, stage: Stage) -> RunResult<T>;
}

impl<T> AtStage<T> for conslaw_core::Result<T> {
    fn at(self, stage: Stage) -> RunResult<T> {
        self.map_err(|source| RunError::Stage { stage, source })
    }
}
