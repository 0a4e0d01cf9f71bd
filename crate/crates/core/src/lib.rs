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

//! Sparse deep ReLU networks built by explicit approximation constructions,
//! each carrying a checkable certificate of its depth, width, sparsity and
//! sup-norm error, together with rate calculators and desk-scale regression
//! and wavelet experiments.

pub mod calculus;
pub mod constructions;
pub mod error;
pub mod network;
pub mod rates;
pub mod regression;
pub mod rng;
pub mod targets;
pub mod wavelet;

pub use error::{Error, Result};
pub use network::{Entry, Layer, LayerBuilder, NetworkStats, SparseNetwork};
