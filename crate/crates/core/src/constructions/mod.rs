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

//! Explicit approximation networks. Every builder returns the network
//! together with a [`ConstructionCertificate`] stating its depth, width,
//! sparsity and sup-norm error bound.

pub mod certificate;
pub mod composite;
pub mod grid;
pub mod hat;
pub mod holder;
pub mod monomials;
pub mod mult;
pub mod reference;
pub mod taylor;
pub mod waves;

pub use certificate::{check_claims, ClaimCheck, Construction, ConstructionCertificate, Domain, Provenance};
pub use composite::{build_composite_net, composition_error_bound, rescale_components, CompositionSpec};
pub use grid::{measure_sup_error, GridSpec};
pub use hat::build_hat;
pub use holder::build_holder_net;
pub use monomials::build_mon;
pub use mult::{build_mult, build_mult_r};
pub use reference::{reference_for, Reference};
pub use taylor::{local_taylor_ref, taylor_poly, HolderTarget, LocalTaylor, TaylorPoly};
pub use waves::{r_wave_ref, tri_wave_ref};
