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

//! Scalar reference implementations of the tooth maps `T^k` and the
//! triangle waves `R^k`, used as oracles for the multiplication networks.

/// `T^k(x) = (x/2)_+ - (x - 2^{1-2k})_+`.
pub fn tooth(k: u32, x: f64) -> f64 {
    let knot = 2f64.powi(1 - 2 * k as i32);
    (x / 2.0).max(0.0) - (x - knot).max(0.0)
}

/// `T^k(x)` for `k >= 1`.
pub fn tri_wave_ref(k: u32, x: f64) -> f64 {
    assert!(k >= 1, "tooth index starts at 1");
    tooth(k, x)
}

/// `R^k = T^k o ... o T^1` for `k >= 1`.
pub fn r_wave_ref(k: u32, x: f64) -> f64 {
    assert!(k >= 1, "wave index starts at 1");
    (1..=k).fold(x, |y, j| tooth(j, y))
}

/// `sum_{k=1}^m R^k(x)`, the piecewise-linear interpolant of `x(1-x)` on
/// the dyadic grid of mesh `2^{-m}`.
pub fn wave_sum(m: u32, x: f64) -> f64 {
    let mut y = x;
    let mut total = 0.0;
    for k in 1..=m {
        y = tooth(k, y);
        total += y;
    }
    total
}
