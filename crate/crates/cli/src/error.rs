use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("config: {0}")]
    Config(String),

    #[error("scenario {scenario}, replication {replication} (seed {seed}): {source}")]
    Replication {
        scenario: String,
        replication: usize,
        seed: u64,
        #[source]
        source: equiboot_core::Error,
    },

    #[error(transparent)]
    Core(#[from] equiboot_core::Error),

    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl HarnessError {
    /// Process exit code: 1 for configuration problems, 2 for runtime failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Config(_) => 1,
            _ => 2,
        }
    }
}
