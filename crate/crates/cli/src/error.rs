use thiserror::Error;

/// Failure classes of a run, each with its own process exit code.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),

    #[error("hypothesis validation failed: {0}")]
    Hypothesis(String),

    #[error("solver diverged: {0}")]
    Divergence(String),

    #[error("numerical failure: {0}")]
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Config(_) => 2,
            Self::Hypothesis(_) => 3,
            Self::Divergence(_) => 4,
            Self::Numerical(_) => 5,
        }
    }
}

impl From<polyharmonic::Error> for CliError {
    fn from(e: polyharmonic::Error) -> Self {
        use polyharmonic::Error as E;
        match e {
            E::Hypothesis { .. } | E::NoAdmissibleGamma { .. } | E::Precondition(_) | E::NoSupersolutionRadius => {
                Self::Hypothesis(e.to_string())
            }
            E::InvalidArgument(_) | E::OutOfTable { .. } => Self::Config(e.to_string()),
            _ => Self::Numerical(e.to_string()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use polyharmonic::Error as E;

    #[test]
    fn core_errors_map_to_exit_codes() {
        let hyp = E::Hypothesis { name: "H2".into(), detail: "x".into() };
        assert_eq!(CliError::from(hyp).exit_code(), 3);
        assert_eq!(CliError::from(E::NoAdmissibleGamma { alpha: 1.0 }).exit_code(), 3);
        assert_eq!(CliError::from(E::InvalidArgument("x".into())).exit_code(), 2);
        assert_eq!(CliError::from(E::SingularSystem { row: 0 }).exit_code(), 5);
        assert_eq!(CliError::from(E::NonIntegrable).exit_code(), 5);
    }
}
