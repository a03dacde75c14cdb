use std::fmt;

/// Failure of a CLI run, mapped onto the exit-code contract.
#[derive(Debug)]
pub enum CliError {
    /// Bad config, flag or input file; exit code 2.
    Input { path: Option<String>, msg: String },
    /// A numerical routine failed; exit code 1.
    Numeric(String),
}

impl CliError {
    pub fn input(msg: impl Into<String>) -> Self {
        CliError::Input { path: None, msg: msg.into() }
    }

    pub fn input_at(path: impl Into<String>, msg: impl Into<String>) -> Self {
        let path = path.into();
        CliError::Input { path: (!path.is_empty()).then_some(path), msg: msg.into() }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input { .. } => 2,
            CliError::Numeric(_) => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Input { path: Some(p), msg } => write!(f, "invalid input at {p}: {msg}"),
            CliError::Input { path: None, msg } => write!(f, "invalid input: {msg}"),
            CliError::Numeric(msg) => write!(f, "numeric failure: {msg}"),
        }
    }
}

impl From<gfield::Error> for CliError {
    fn from(e: gfield::Error) -> Self {
        match e {
            gfield::Error::Input(_) | gfield::Error::Domain(_) => CliError::input(e.to_string()),
            _ => CliError::Numeric(e.to_string()),
        }
    }
}
