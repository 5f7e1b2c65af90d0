//! Exit-code contract: 0 ok, 2 usage or config, 3 numeric, 4 data format,
//! 5 fit not converged.

use std::fmt;
use transmon_qp::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    Usage = 2,
    Numeric = 3,
    DataFormat = 4,
    NotConverged = 5,
}

#[derive(Debug)]
pub struct Failure {
    pub kind: Kind,
    pub message: String,
}

impl Failure {
    pub fn usage(message: impl Into<String>) -> Self {
        Self {
            kind: Kind::Usage,
            message: message.into(),
        }
    }

    pub fn numeric(message: impl Into<String>) -> Self {
        Self {
            kind: Kind::Numeric,
            message: message.into(),
        }
    }

    pub fn code(&self) -> u8 {
        self.kind as u8
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let kind = match &e {
            // bad parameters, missing or unreadable files
            Error::Domain { .. } | Error::Truncation { .. } | Error::Io(_) | Error::Json(_) => {
                Kind::Usage
            }
            Error::Format { .. } => Kind::DataFormat,
            Error::NoConvergence(_)
            | Error::EmNotConverged { .. }
            | Error::Degenerate(_)
            | Error::RankDeficient(_)
            | Error::Fit(_) => Kind::Numeric,
        };
        Self {
            kind,
            message: e.to_string(),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Self::usage(e.to_string())
    }
}
