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

//! The exact functions that certified networks approximate.

use super::certificate::Construction;
use super::composite::CompositionSpec;
use super::hat::{grid_indices, hat_product};
use super::monomials::{monomial, multi_indices};
use crate::error::{Error, Result};

pub type Reference = Box<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>;

/// Reference function of `construction`, or `Unsupported` when the
/// certificate does not record enough to rebuild it.
pub fn reference_for(construction: &Construction) -> Result<Reference> {
    Ok(match construction {
        Construction::Mult { .. } => Box::new(|x: &[f64]| vec![x[0] * x[1]]),
        Construction::MultTree { .. } => Box::new(|x: &[f64]| vec![x.iter().product()]),
        Construction::Monomials { gamma, r, .. } => {
            let indices = multi_indices(*r, *gamma);
            Box::new(move |x: &[f64]| indices.iter().map(|a| monomial(a, x)).collect())
        }
        Construction::Hat { big_m, r, .. } => {
            let (big_m, grid) = (*big_m, grid_indices(*big_m, *r));
            Box::new(move |x: &[f64]| grid.iter().map(|l| hat_product(big_m, l, x)).collect())
        }
        Construction::Holder { target: Some(spec), .. } => {
            let spec = spec.clone();
            Box::new(move |x: &[f64]| vec![spec.eval(x)])
        }
        Construction::Composite { spec: Some(doc), .. } => {
            let spec = CompositionSpec::from_doc(doc)?;
            Box::new(move |x: &[f64]| vec![spec.eval(x)])
        }
        Construction::Holder { target: None, .. } | Construction::Composite { spec: None, .. } => {
            return Err(Error::Unsupported(
                "the certificate does not record its target function".into(),
            ))
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constructions::{build_hat, build_mon, build_mult, build_mult_r};

    #[test]
    fn references_agree_with_networks_at_exact_points() {
        let (mult, c) = build_mult(6).unwrap();
        let f = reference_for(&c.construction).unwrap();
        assert_eq!(mult.evaluate(&[0.0, 0.7]).unwrap(), f(&[0.0, 0.7]));

        let (tree, c) = build_mult_r(4, 3).unwrap();
        let f = reference_for(&c.construction).unwrap();
        assert_eq!(f(&[0.5, 0.5, 0.5]), vec![0.125]);
        assert!((tree.evaluate(&[0.5, 0.5, 0.5]).unwrap()[0] - 0.125).abs() <= c.sup_error_bound);

        let (mon, c) = build_mon(8, 2.5, 2).unwrap();
        let f = reference_for(&c.construction).unwrap();
        let x = [0.3, 0.9];
        let (a, b) = (mon.evaluate(&x).unwrap(), f(&x));
        assert_eq!(a.len(), b.len());
        assert!(a.iter().zip(&b).all(|(u, v)| (u - v).abs() <= c.sup_error_bound));

        let (hat, c) = build_hat(2, 8, 2).unwrap();
        let f = reference_for(&c.construction).unwrap();
        assert_eq!(hat.output_dim(), f(&x).len());
    }

    #[test]
    fn holder_without_spec_is_unsupported() {
        let c = Construction::Holder {
            m: 4,
            n: 8,
            beta: 1.0,
            radius: 1.0,
            target: None,
        };
        assert!(matches!(reference_for(&c), Err(Error::Unsupported(_))));
    }
}
