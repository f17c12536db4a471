use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("optimal arm is not unique (arms {arms:?} share the optimal mean)")]
    NonUniqueOptimum { arms: Vec<usize> },

    #[error("instance generation gave up after {attempts} attempts without a unique optimum")]
    GenerationExhausted { attempts: usize },

    #[error("run ended: horizon {horizon} already reached")]
    RunEnded { horizon: u64 },

    #[error("time went backwards: feedback already drained up to {previous}, requested {requested}")]
    TimeWentBackwards { previous: u64, requested: u64 },

    #[error("observation time {requested} is ahead of the environment clock {now}")]
    TimeAhead { now: u64, requested: u64 },

    #[error("arm {arm} out of range for {arms} arms")]
    ArmOutOfRange { arm: usize, arms: usize },

    #[error("arm {arm}: play at {got} does not follow previous play at {last}")]
    NonMonotonePlay { arm: usize, last: u64, got: u64 },

    #[error("arm {arm}: feedback for play {play_time} is not outstanding")]
    UnknownPlay { arm: usize, play_time: u64 },

    #[error("arm {arm}: feedback for play {play_time} is overdue at t={t}")]
    MissingFeedback { arm: usize, play_time: u64, t: u64 },

    #[error("arm {arm} has no plays; confidence bounds are undefined")]
    UnplayedArm { arm: usize },

    #[error("unknown algorithm `{0}`")]
    UnknownAlgorithm(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }
}
