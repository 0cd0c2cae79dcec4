use std::fmt;
use std::process::ExitCode;

/// Failures and their exit codes.
#[derive(Debug, Clone, PartialEq)]
pub enum CliError {
    /// Bad arguments or configuration, including a missing config file.
    Usage(String),
    /// An input mesh or run directory could not be read.
    Input(String),
    /// The input is readable but unusable (invalid mesh, failed numerics).
    Data(String),
    /// An output file could not be written.
    Output(String),
    /// The analysis requires something the input does not have.
    Precondition(String),
}

pub const EXIT_VIOLATION: u8 = 2;

impl CliError {
    pub fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 64,
            CliError::Input(_) => 66,
            CliError::Data(_) => 65,
            CliError::Output(_) => 73,
            CliError::Precondition(_) => 3,
        }
    }

    pub fn exit(&self) -> ExitCode {
        ExitCode::from(self.code())
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Input(m) => write!(f, "cannot read input: {m}"),
            CliError::Data(m) => write!(f, "invalid data: {m}"),
            CliError::Output(m) => write!(f, "cannot write output: {m}"),
            CliError::Precondition(m) => write!(f, "precondition not met: {m}"),
        }
    }
}
