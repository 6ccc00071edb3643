use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("numeric failure at {cell}: {source}")]
    Numeric {
        cell: String,
        #[source]
        source: qfi_core::Error,
    },
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    /// 2 for configuration problems, 3 for numeric failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numeric { .. } => 3,
            CliError::Io(_) => 1,
        }
    }

    /// Sorts a core error raised while evaluating `cell`: bad inputs are
    /// configuration errors, everything else is numeric.
    pub fn at(cell: impl Into<String>, e: qfi_core::Error) -> Self {
        use qfi_core::Error as E;
        let cell = cell.into();
        match e {
            E::NotUnitVector { .. }
            | E::InvalidPurity(_)
            | E::UnknownChannel(_)
            | E::MissingParam { .. }
            | E::UnknownParam { .. }
            | E::InvalidParam { .. }
            | E::OutOfDomain { .. }
            | E::InvalidStep(_)
            | E::QubitIndex { .. }
            | E::QubitCap { .. }
            | E::TooFewQubits { .. }
            | E::WrongBranch(_)
            | E::NonPerpendicular(_)
            | E::Expression { .. }
            | E::InvalidGrid(_) => CliError::Config(format!("{cell}: {e}")),
            other => CliError::Numeric { cell, source: other },
        }
    }
}
