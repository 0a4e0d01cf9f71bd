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

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// Matrix, vector or input dimensions do not line up.
    #[error("shape error in {field}: {detail}")]
    Shape { field: String, detail: String },

    /// A weight or shift outside [-1, 1], or a stored exact zero.
    #[error("range error in {field}: {detail}")]
    Range { field: String, detail: String },

    #[error("malformed network document at {field}: {detail}")]
    Parse { field: String, detail: String },

    #[error("unsupported operation: {0}")]
    Unsupported(String),

    /// A construction refused its inputs. The message is meant to be shown verbatim.
    #[error("{0}")]
    Precondition(String),

    #[error("derivative oracle failed for multi-index {multi_index:?}: {detail}")]
    Derivative { multi_index: Vec<usize>, detail: String },

    #[error("level {level}: {source}")]
    Level {
        level: usize,
        #[source]
        source: Box<Error>,
    },

    /// Every optimizer restart produced a non-finite risk.
    #[error("optimization diverged: {0}")]
    Diverged(String),

    #[error("invalid argument {name}: {detail}")]
    InvalidArgument { name: String, detail: String },
}

impl Error {
    pub(crate) fn shape(field: impl Into<String>, detail: impl Into<String>) -> Self {
        Error::Shape {
            field: field.into(),
            detail: detail.into(),
        }
    }

    pub(crate) fn range(field: impl Into<String>, detail: impl Into<String>) -> Self {
        Error::Range {
            field: field.into(),
            detail: detail.into(),
        }
    }

    pub(crate) fn arg(name: impl Into<String>, detail: impl Into<String>) -> Self {
        Error::InvalidArgument {
            name: name.into(),
            detail: detail.into(),
        }
    }

    /// True for refusals caused by construction preconditions, including
    /// those wrapped with a level index.
    pub fn is_precondition(&self) -> bool {
        match self {
            Error::Precondition(_) => true,
            Error::Level { source, .. } => source.is_precondition(),
            _ => false,
        }
    }
}
