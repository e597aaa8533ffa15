use std::fmt;

pub const EXIT_USAGE: u8 = 1;
pub const EXIT_IO: u8 = 2;
pub const EXIT_NUMERIC: u8 = 3;

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Io(String),
    Numeric(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Io(_) => EXIT_IO,
            CliError::Numeric(_) => EXIT_NUMERIC,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Io(m) | CliError::Numeric(m) => f.write_str(m),
        }
    }
}

impl From<gfconv::Error> for CliError {
    fn from(e: gfconv::Error) -> Self {
        use gfconv::Error as E;
        let msg = e.to_string();
        match e {
            E::Io { .. } | E::Format { .. } => CliError::Io(msg),
            E::InvalidArgument(_) => CliError::Usage(msg),
            E::Dimension(_) | E::NonFinite { .. } | E::DegenerateGroundTruth { .. } => {
                CliError::Numeric(msg)
            }
        }
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Io(e.to_string())
    }
}
