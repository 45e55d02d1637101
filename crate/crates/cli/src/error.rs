use serde_json::json;

use eftqc::Error;

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Input(String),
    Domain(String),
    NonConvergence(String),
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Input(_) => 3,
            CliError::Domain(_) => 4,
            CliError::NonConvergence(_) => 5,
            CliError::Io(_) => 6,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Config(_) => "config",
            CliError::Input(_) => "input",
            CliError::Domain(_) => "domain",
            CliError::NonConvergence(_) => "non_convergence",
            CliError::Io(_) => "io",
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Config(m)
            | CliError::Input(m)
            | CliError::Domain(m)
            | CliError::NonConvergence(m)
            | CliError::Io(m) => m,
        }
    }

    pub fn to_json(&self) -> String {
        json!({
            "error": {
                "kind": self.kind(),
                "exit_code": self.exit_code(),
                "message": self.message(),
            }
        })
        .to_string()
    }

    /// Model construction failures come from the configuration.
    pub fn config(e: Error) -> Self {
        CliError::Config(e.to_string())
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let m = e.to_string();
        match e {
            Error::NonConvergence { .. } => CliError::NonConvergence(m),
            Error::MalformedHeader { .. } | Error::EmptyBody { .. } | Error::InvalidRow { .. } | Error::Csv(_) => {
                CliError::Input(m)
            }
            Error::Io(_) => CliError::Io(m),
            _ => CliError::Domain(m),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}
