//! Shared error type for the simulation library.

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Caller handed us inconsistent dimensions, ranks, or parameter ranges.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// An iterative or factorization routine left its numerical contract
    /// (non-convergence, loss of positive definiteness, bad log argument).
    #[error("numerical failure: {0}")]
    NumericalFailure(String),

    /// The sampled ground truth is unusable (zero column, singular W*).
    #[error("degenerate instance: {0}")]
    DegenerateInstance(String),

    /// Experiment configuration is incomplete or out of range.
    #[error("config error: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    /// Fixture or config text that does not parse.
    #[error("parse error: {0}")]
    Parse(String),

    /// A module error annotated with the experiment position it occurred at.
    #[error("trial {trial}, round {round}, task {task}: {source}")]
    InTrial {
        trial: usize,
        round: usize,
        task: usize,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    /// Attach trial/round/task context while propagating out of the harness.
    pub fn in_trial(self, trial: usize, round: usize, task: usize) -> Error {
        Error::InTrial {
            trial,
            round,
            task,
            source: Box::new(self),
        }
    }
}
