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

//! Regression experiments: data generation, empirical risk minimization over
//! sparse networks, prediction-risk estimates and rate exponents.

mod dataset;
mod experiment;
mod fit;

pub use dataset::{empirical_risk, sample_dataset, Design, RegressionDataset};
pub use experiment::{
    estimate_prediction_risk, estimate_risk_fn, log_log_slope, rate_experiment, run_rate_jobs, FitRecipe, JobOutcome,
    PerN, RateExperiment, RateReport, RateRow, SlopeFit, DEGENERATE_RISK,
};
pub use fit::{delta_proxy, fit_erm, FitResult, Hyper};
