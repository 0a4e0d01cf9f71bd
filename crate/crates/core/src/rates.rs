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

//! Closed-form rate and complexity calculators: effective smoothness, the
//! rate `phi_n`, covering-entropy bounds, `tau` and the architecture checks
//! of the main oracle-rate result.

use serde::{Deserialize, Serialize};

use crate::constructions::CompositionSpec;
use crate::error::{Error, Result};

/// `beta*_i = beta_i prod_{l > i} min(beta_l, 1)`.
pub fn effective_smoothness(beta: &[f64]) -> Result<Vec<f64>> {
    if beta.is_empty() {
        return Err(Error::arg("beta", "empty smoothness sequence"));
    }
    if let Some(i) = beta.iter().position(|b| !(*b > 0.0 && b.is_finite())) {
        return Err(Error::arg(
            format!("beta[{i}]"),
            format!("{} must be positive", beta[i]),
        ));
    }
    let mut out = vec![0.0; beta.len()];
    let mut tail = 1.0;
    for i in (0..beta.len()).rev() {
        out[i] = beta[i] * tail;
        tail *= beta[i].min(1.0);
    }
    Ok(out)
}

/// `max_i n^{-2 beta*_i / (2 beta*_i + t_i)}` and the smallest maximizing index.
pub fn rate_phi(n: u64, beta: &[f64], t: &[usize]) -> Result<(f64, usize)> {
    if n == 0 {
        return Err(Error::arg("n", "must be at least 1"));
    }
    if beta.len() != t.len() {
        return Err(Error::shape(
            "t",
            format!("{} arities for {} smoothness indices", t.len(), beta.len()),
        ));
    }
    if t.contains(&0) {
        return Err(Error::arg("t", "arities must be positive"));
    }
    let star = effective_smoothness(beta)?;
    let mut best = (f64::NEG_INFINITY, 0);
    for (i, (b, ti)) in star.iter().zip(t).enumerate() {
        let v = (n as f64).powf(-2.0 * b / (2.0 * b + *ti as f64));
        if v > best.0 {
            best = (v, i);
        }
    }
    Ok(best)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateProfile {
    pub q: usize,
    pub t: Vec<usize>,
    pub beta: Vec<f64>,
    pub beta_star: Vec<f64>,
}

impl RateProfile {
    pub fn new(beta: Vec<f64>, t: Vec<usize>) -> Result<Self> {
        if beta.len() != t.len() {
            return Err(Error::shape(
                "t",
                format!("{} arities for {} smoothness indices", t.len(), beta.len()),
            ));
        }
        let beta_star = effective_smoothness(&beta)?;
        Ok(RateProfile {
            q: beta.len() - 1,
            t,
            beta,
            beta_star,
        })
    }

    pub fn from_spec(spec: &CompositionSpec) -> Result<Self> {
        Self::new(spec.betas(), spec.arities())
    }

    pub fn phi(&self, n: u64) -> Result<(f64, usize)> {
        rate_phi(n, &self.beta, &self.t)
    }

    /// Exponent `2 beta*_i / (2 beta*_i + t_i)` of the dominating level.
    pub fn exponent(&self) -> f64 {
        self.beta_star
            .iter()
            .zip(&self.t)
            .map(|(b, t)| 2.0 * b / (2.0 * b + *t as f64))
            .fold(f64::INFINITY, f64::min)
    }
}

fn check_delta(delta: f64) -> Result<()> {
    if delta > 0.0 && delta.is_finite() {
        Ok(())
    } else {
        Err(Error::arg("delta", format!("{delta} must be positive")))
    }
}

/// `(s+1) log(2 delta^{-1} (L+1) V^2)` with `V = prod_l (p_l + 1)`.
pub fn entropy_bound(depth: usize, widths: &[usize], s: usize, delta: f64) -> Result<f64> {
    check_delta(delta)?;
    if widths.len() != depth + 2 {
        return Err(Error::shape(
            "widths",
            format!("expected {} entries, got {}", depth + 2, widths.len()),
        ));
    }
    let log_v: f64 = widths.iter().map(|&p| ((p + 1) as f64).ln()).sum();
    let inner = 2f64.ln() - delta.ln() + ((depth + 1) as f64).ln() + 2.0 * log_v;
    Ok((s as f64 + 1.0) * inner)
}

/// `(s+1) log(2^{2L+5} delta^{-1} (L+1) p_0^2 p_{L+1}^2 s^{2L})`, with
/// `s^{2L}` read as `max(s, 1)^{2L}` so that `s = 0` stays finite.
pub fn entropy_bound_refined(depth: usize, p0: usize, p_out: usize, s: usize, delta: f64) -> Result<f64> {
    check_delta(delta)?;
    if p0 == 0 || p_out == 0 {
        return Err(Error::arg("widths", "input and output widths must be positive"));
    }
    let l = depth as f64;
    let inner = (2.0 * l + 5.0) * 2f64.ln() - delta.ln()
        + (l + 1.0).ln()
        + 2.0 * (p0 as f64).ln()
        + 2.0 * (p_out as f64).ln()
        + 2.0 * l * (s.max(1) as f64).ln();
    Ok((s as f64 + 1.0) * inner)
}

/// `C_eps F^2 (s+1) log(n (s+1)^L p_0 p_{L+1}) / n`.
pub fn tau_bound(s: usize, depth: usize, p0: usize, p_out: usize, n: u64, f: f64, c_eps: f64) -> Result<f64> {
    if n == 0 || p0 == 0 || p_out == 0 {
        return Err(Error::arg("n", "n, p_0 and p_out must be positive"));
    }
    if !(f > 0.0 && c_eps > 0.0) {
        return Err(Error::arg("F", "F and C_eps must be positive"));
    }
    let s1 = s as f64 + 1.0;
    let log_term = (n as f64).ln() + depth as f64 * s1.ln() + (p0 as f64).ln() + (p_out as f64).ln();
    Ok(c_eps * f * f * s1 * log_term / n as f64)
}

/// Architecture `F(L, p, s, F)` as far as the checks need it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Architecture {
    pub depth: usize,
    pub widths: Vec<usize>,
    pub sparsity: usize,
    pub sup_bound: f64,
}

/// Constants standing in for the hidden `≲` / `≍` factors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Bands {
    /// `L <= depth_upper * n phi_n`.
    pub depth_upper: f64,
    /// `n phi_n <= width_factor * min_i p_i`.
    pub width_factor: f64,
    /// `sparsity_low <= s / (n phi_n log n) <= sparsity_high`.
    pub sparsity_low: f64,
    pub sparsity_high: f64,
}

impl Default for Bands {
    fn default() -> Self {
        Bands {
            depth_upper: 4.0,
            width_factor: 4.0,
            sparsity_low: 0.25,
            sparsity_high: 4.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionCheck {
    pub name: String,
    pub holds: bool,
    pub quantity: f64,
    pub lower: Option<f64>,
    pub upper: Option<f64>,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionReport {
    pub n: u64,
    pub phi_n: f64,
    pub dominating_level: usize,
    pub n_phi_n: f64,
    pub bands: Bands,
    pub conditions: Vec<ConditionCheck>,
    /// The upper side of (ii), compared against `depth_upper * n phi_n`;
    /// reported only, it does not enter `all_hold`.
    pub depth_upper_side: ConditionCheck,
    pub all_hold: bool,
}

/// Evaluates conditions (i)-(iv) for `arch` on a class with smoothness
/// `profile`, radius `radius` and sample size `n`.
pub fn check_theorem1_conditions(
    arch: &Architecture,
    profile: &RateProfile,
    radius: f64,
    n: u64,
    bands: Bands,
) -> Result<ConditionReport> {
    if arch.widths.len() != arch.depth + 2 {
        return Err(Error::shape(
            "widths",
            format!("expected {} entries, got {}", arch.depth + 2, arch.widths.len()),
        ));
    }
    if n < 2 {
        return Err(Error::arg("n", "must be at least 2"));
    }
    let (phi, level) = profile.phi(n)?;
    let nphi = n as f64 * phi;
    let log2n = (n as f64).log2();
    let lnn = (n as f64).ln();

    let k1 = radius.max(1.0);
    let c1 = ConditionCheck {
        name: "(i) F >= max(K, 1)".into(),
        holds: arch.sup_bound >= k1,
        quantity: arch.sup_bound,
        lower: Some(k1),
        upper: None,
        detail: format!("F = {}, max(K, 1) = {k1}", arch.sup_bound),
    };

    let need: f64 = profile
        .t
        .iter()
        .zip(&profile.beta)
        .map(|(t, b)| (4.0 * *t as f64).max(4.0 * b).log2())
        .sum::<f64>()
        * log2n;
    let depth = arch.depth as f64;
    let c2 = ConditionCheck {
        name: "(ii) sum_i log2(4t_i v 4beta_i) log2 n <= L".into(),
        holds: depth >= need,
        quantity: depth,
        lower: Some(need),
        upper: None,
        detail: format!("L = {}, required at least {need:.4}", arch.depth),
    };
    let upper = bands.depth_upper * nphi;
    let c2u = ConditionCheck {
        name: "(ii) L <~ n phi_n".into(),
        holds: depth <= upper,
        quantity: depth,
        lower: None,
        upper: Some(upper),
        detail: format!("L = {}, band {} * n phi_n = {upper:.4}", arch.depth, bands.depth_upper),
    };

    let hidden = &arch.widths[1..=arch.depth];
    let min_p = hidden.iter().copied().min().unwrap_or(0) as f64;
    let c3 = ConditionCheck {
        name: "(iii) n phi_n <~ min_i p_i".into(),
        holds: arch.depth > 0 && nphi <= bands.width_factor * min_p,
        quantity: nphi,
        lower: None,
        upper: Some(bands.width_factor * min_p),
        detail: format!("n phi_n = {nphi:.4}, min hidden width = {min_p}"),
    };

    let target = nphi * lnn;
    let ratio = arch.sparsity as f64 / target;
    let c4 = ConditionCheck {
        name: "(iv) s ~ n phi_n log n".into(),
        holds: ratio >= bands.sparsity_low && ratio <= bands.sparsity_high,
        quantity: ratio,
        lower: Some(bands.sparsity_low),
        upper: Some(bands.sparsity_high),
        detail: format!("s = {}, n phi_n log n = {target:.4}", arch.sparsity),
    };

    let conditions = vec![c1, c2, c3, c4];
    let all_hold = conditions.iter().all(|c| c.holds);
    Ok(ConditionReport {
        n,
        phi_n: phi,
        dominating_level: level,
        n_phi_n: nphi,
        bands,
        conditions,
        depth_upper_side: c2u,
        all_hold,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn effective_smoothness_examples() {
        assert_eq!(effective_smoothness(&[2.0]).unwrap(), vec![2.0]);
        assert_eq!(effective_smoothness(&[3.0, 1.5]).unwrap(), vec![3.0, 1.5]);
        assert_eq!(effective_smoothness(&[1.0, 0.5]).unwrap(), vec![0.5, 0.5]);
        assert!(effective_smoothness(&[]).is_err());
        assert!(effective_smoothness(&[1.0, 0.0]).is_err());
    }

    #[test]
    fn phi_examples() {
        let (phi, i) = rate_phi(1000, &[2.0], &[3]).unwrap();
        assert!((phi - 1000f64.powf(-4.0 / 7.0)).abs() < 1e-15);
        assert_eq!(i, 0);
        assert_eq!(rate_phi(1, &[0.3, 2.0, 0.7], &[1, 5, 2]).unwrap(), (1.0, 0));
        // additive: g_1 smooth enough that level 0 dominates
        let (phi, i) = rate_phi(4096, &[2.0, 20.0], &[1, 4]).unwrap();
        assert_eq!(i, 0);
        assert!((phi - 4096f64.powf(-0.8)).abs() < 1e-15);
    }

    #[test]
    fn phi_ties_take_smallest_index() {
        // 2*2/(4+1) = 2*8/(16+4)
        let (_, i) = rate_phi(4096, &[2.0, 8.0], &[1, 4]).unwrap();
        assert_eq!(i, 0);
    }

    #[test]
    fn entropy_example() {
        let e = entropy_bound(1, &[1, 1, 1], 0, 1.0).unwrap();
        assert!((e - 256f64.ln()).abs() < 1e-12);
        assert!(entropy_bound(1, &[1, 1], 0, 1.0).is_err());
        assert!(entropy_bound(1, &[1, 1, 1], 0, 0.0).is_err());
    }

    #[test]
    fn refined_entropy_tighter_for_wide_networks() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..100 {
            let depth = rng.random_range(1..8);
            let s = rng.random_range(1..50usize);
            let mut widths: Vec<usize> = (0..depth + 2).map(|_| rng.random_range(4 * s..20 * s)).collect();
            widths[0] = rng.random_range(1..10);
            widths[depth + 1] = rng.random_range(1..3);
            let delta = rng.random_range(1e-4..1.0);
            let full = entropy_bound(depth, &widths, s, delta).unwrap();
            let refined = entropy_bound_refined(depth, widths[0], widths[depth + 1], s, delta).unwrap();
            assert!(refined <= full, "{widths:?} s={s}: {refined} > {full}");
        }
    }

    #[test]
    fn tau_matches_independent_formula() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..100 {
            let s = rng.random_range(0..10_000usize);
            let l = rng.random_range(0..40usize);
            let p0 = rng.random_range(1..50usize);
            let po = rng.random_range(1..5usize);
            let n = rng.random_range(1..1_000_000u64);
            let f = rng.random_range(0.1..10.0);
            let c = rng.random_range(0.1..10.0);
            let arg = n as f64 * ((s + 1) as f64).powi(l as i32) * p0 as f64 * po as f64;
            let oracle = c * f * f * (s + 1) as f64 * arg.ln() / n as f64;
            let got = tau_bound(s, l, p0, po, n, f, c).unwrap();
            assert!(((got - oracle) / oracle).abs() < 1e-12, "{got} vs {oracle}");
        }
    }

    #[test]
    fn tau_special_cases() {
        let a = tau_bound(0, 7, 3, 1, 500, 2.0, 1.5).unwrap();
        assert!((a - 1.5 * 4.0 * (500.0f64 * 3.0).ln() / 500.0).abs() < 1e-15);
        for n in [2u64, 10, 1000, 1 << 20] {
            assert!(tau_bound(30, 5, 4, 1, 2 * n, 1.0, 1.0).unwrap() < tau_bound(30, 5, 4, 1, n, 1.0, 1.0).unwrap());
        }
    }

    fn additive_case(depth: usize, f: f64) -> (Architecture, RateProfile, f64) {
        let (n, beta, d) = (4096f64, 2.0f64, 4usize);
        let profile = RateProfile::new(vec![beta, beta.max(2.0) * d as f64], vec![1, d]).unwrap();
        let width = n.powf(1.0 / (2.0 * beta + 1.0)).ceil() as usize;
        let mut widths = vec![width; depth + 2];
        widths[0] = d;
        widths[depth + 1] = 1;
        let s = (n.powf(1.0 / (2.0 * beta + 1.0)) * n.ln()).round() as usize;
        let arch = Architecture {
            depth,
            widths,
            sparsity: s,
            sup_bound: f,
        };
        (arch, profile, (1.0 + 1.0) * d as f64)
    }

    #[test]
    fn additive_recipe_passes() {
        let n = 4096f64;
        let depth = (2.0 * (3.0 * 2.0 * 4.0f64).log2() * n.log2()).ceil() as usize;
        let (arch, profile, k) = additive_case(depth, 8.0);
        let report = check_theorem1_conditions(&arch, &profile, k, 4096, Bands::default()).unwrap();
        assert!(report.all_hold, "{report:#?}");
    }

    #[test]
    fn shallow_or_small_bound_fails() {
        let (arch, profile, k) = additive_case(1, 8.0);
        let report = check_theorem1_conditions(&arch, &profile, k, 4096, Bands::default()).unwrap();
        assert!(!report.conditions[1].holds);
        let (arch, profile, _) = additive_case(111, 0.5);
        let report = check_theorem1_conditions(&arch, &profile, 1.0, 4096, Bands::default()).unwrap();
        assert!(!report.conditions[0].holds);
        assert!(!report.all_hold);
    }

    fn betas() -> impl Strategy<Value = (Vec<f64>, Vec<usize>)> {
        (1usize..5).prop_flat_map(|k| {
            (
                prop::collection::vec(0.05f64..6.0, k),
                prop::collection::vec(1usize..8, k),
            )
        })
    }

    proptest! {
        #[test]
        fn phi_nonincreasing_and_brute_force((beta, t) in betas(), n in 1u64..1_000_000) {
            let (a, i) = rate_phi(n, &beta, &t).unwrap();
            let (b, _) = rate_phi(n + 1 + n / 3, &beta, &t).unwrap();
            prop_assert!(b <= a);
            let star = effective_smoothness(&beta).unwrap();
            let per: Vec<f64> = (0..beta.len()).map(|k| (n as f64).powf(-2.0 * star[k] / (2.0 * star[k] + t[k] as f64))).collect();
            let max = per.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            prop_assert_eq!(a, max);
            prop_assert_eq!(i, per.iter().position(|v| *v == max).unwrap());
        }

        #[test]
        fn star_bounded_and_stable_under_unit_level(beta in prop::collection::vec(0.05f64..6.0, 1..6)) {
            let star = effective_smoothness(&beta).unwrap();
            prop_assert_eq!(*star.last().unwrap(), *beta.last().unwrap());
            for (s, b) in star.iter().zip(&beta) {
                prop_assert!(s <= b);
            }
            let mut ext = beta.clone();
            ext.push(1.0);
            let star2 = effective_smoothness(&ext).unwrap();
            prop_assert_eq!(&star2[..beta.len()], &star[..]);
        }

        #[test]
        fn entropy_monotone(
            depth in 0usize..6,
            base in prop::collection::vec(1usize..40, 8),
            s in 0usize..500,
            delta in 1e-6f64..10.0,
            which in 0usize..8,
        ) {
            let widths = base[..depth + 2].to_vec();
            let e = entropy_bound(depth, &widths, s, delta).unwrap();
            prop_assert!(entropy_bound(depth, &widths, s + 1, delta).unwrap() >= e);
            prop_assert!(entropy_bound(depth, &widths, s, delta / 2.0).unwrap() >= e);
            let mut wider = widths.clone();
            wider[which % (depth + 2)] += 1;
            prop_assert!(entropy_bound(depth, &wider, s, delta).unwrap() >= e);
            let mut deeper = widths.clone();
            deeper.insert(1, 1);
            prop_assert!(entropy_bound(depth + 1, &deeper, s, delta).unwrap() >= e);
        }
    }
}
