// Copyright 2026 The relucert Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

//! Failures and their exit codes.

use std::fmt;

pub const EXIT_CLAIMS: i32 = 1;
pub const EXIT_REFUSAL: i32 = 2;
pub const EXIT_USAGE: i32 = 64;
pub const EXIT_SOFTWARE: i32 = 70;
pub const EXIT_IO: i32 = 74;

#[derive(Debug)]
pub enum Failure {
    /// Certificate claims that did not hold.
    Claims(String),
    /// A construction refused its inputs; shown verbatim.
    Refusal(String),
    /// Bad arguments or configuration.
    Usage(String),
    Io(String),
    Internal(String),
}

impl Failure {
    pub fn code(&self) -> i32 {
        match self {
            Failure::Claims(_) => EXIT_CLAIMS,
            Failure::Refusal(_) => EXIT_REFUSAL,
            Failure::Usage(_) => EXIT_USAGE,
            Failure::Io(_) => EXIT_IO,
            Failure::Internal(_) => EXIT_SOFTWARE,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Claims(m) => write!(f, "certificate claims failed: {m}"),
            Failure::Refusal(m) => write!(f, "{m}"),
            Failure::Usage(m) => write!(f, "usage error: {m}"),
            Failure::Io(m) => write!(f, "i/o error: {m}"),
            Failure::Internal(m) => write!(f, "error: {m}"),
        }
    }
}

impl From<relucert::Error> for Failure {
    fn from(e: relucert::Error) -> Self {
        use relucert::Error as E;
        if e.is_precondition() {
            return Failure::Refusal(e.to_string());
        }
        match e {
            E::InvalidArgument { .. } | E::Shape { .. } | E::Range { .. } | E::Parse { .. } => {
                Failure::Usage(e.to_string())
            }
            E::Level { .. } => Failure::Usage(e.to_string()),
            other => Failure::Internal(other.to_string()),
        }
    }
}

pub type CliResult<T> = std::result::Result<T, Failure>;
