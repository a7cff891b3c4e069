use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid configuration:\n  {}", .0.join("\n  "))]
    Config(Vec<String>),
    #[error("run failed: {0}")]
    Runtime(String),
    #[error("refused: estimated cost {cost:e} exceeds budget {budget:e}")]
    Budget { cost: f64, budget: f64 },
}

impl CliError {
    /// 1 for configuration errors, 2 for runtime failures, 3 for budget refusals.
    pub fn exit_code(&self) -> u8 {
        match self {
            Self::Config(_) => 1,
            Self::Runtime(_) => 2,
            Self::Budget { .. } => 3,
        }
    }
}

impl From<biharmonic_core::Error> for CliError {
    fn from(e: biharmonic_core::Error) -> Self {
        match e {
            biharmonic_core::Error::Budget { cost, budget } => Self::Budget { cost, budget },
            other => Self::Runtime(other.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        Self::Runtime(format!("i/o: {e}"))
    }
}
