use std::path::PathBuf;

/// Failures surfaced by the command line, each mapped to an exit code.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("config: {0}")]
    Config(String),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Core(#[from] fractune::Error),
}

pub type CliResult<T> = std::result::Result<T, CliError>;

pub const EXIT_INPUT: u8 = 2;
pub const EXIT_NUMERICAL: u8 = 3;

impl CliError {
    pub fn input(msg: impl Into<String>) -> Self {
        CliError::Input(msg.into())
    }

    /// 2 for anything the user can fix in their inputs, 3 when the numerics
    /// themselves gave up.
    pub fn exit_code(&self) -> u8 {
        use fractune::Error as E;
        match self {
            CliError::Input(_) | CliError::Config(_) | CliError::Io { .. } => EXIT_INPUT,
            CliError::Core(e) => match e {
                E::InvalidInput(_)
                | E::Parse(_)
                | E::Improper { .. }
                | E::NotStrictlyProper(_)
                | E::IntegratingSystem
                | E::Unstable { .. } => EXIT_INPUT,
                E::PoleAtNyquist | E::RankDeficient(_) | E::DegenerateFit(_) | E::Numerical(_) => {
                    EXIT_NUMERICAL
                }
            },
        }
    }
}
