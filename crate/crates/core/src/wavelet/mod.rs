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

//! Wavelet series estimators, their risk floor, and a family of composite
//! functions on which they are slow.

mod basis;
mod counterexample;
mod estimator;

pub use basis::{default_quad_points, quad_coeff, Lambda, QuadCoeff, RealFn, WaveletSpec, MC_DIM};
pub use counterexample::{build_counterexample, Counterexample};
pub use estimator::{
    balancing_level, empirical_coeff, risk_floor, wavelet_estimate, wavelet_rate_experiment, IndexSet, WaveletEstimate,
    MAX_TERMS,
};
