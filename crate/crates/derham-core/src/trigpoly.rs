use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::fourier;
use crate::{lit, to_f64, Real};

/// Real trigonometric polynomial on one or two circle factors.
///
/// A term with modes `[j₁, j₂]` is the product `b_{j₁}(θ₁)·b_{j₂}(θ₂)` of
/// unnormalized basis functions (`1`, `cos jθ`, `sin |j|θ`).
#[derive(Debug, Clone, PartialEq)]
pub struct TrigPoly<T> {
    arity: usize,
    terms: BTreeMap<Vec<i32>, T>,
}

/// Serialized form of a single term.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TermSpec {
    pub coef: f64,
    pub modes: Vec<i32>,
}

/// Serialized form of a [`TrigPoly`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrigPolySpec {
    pub arity: usize,
    pub terms: Vec<TermSpec>,
}

impl<T: Real> TrigPoly<T> {
    pub fn zero(arity: usize) -> Self {
        assert!(arity == 1 || arity == 2, "arity must be 1 or 2");
        Self { arity, terms: BTreeMap::new() }
    }

    pub fn from_terms(arity: usize, terms: impl IntoIterator<Item = (Vec<i32>, T)>) -> Self {
        let mut p = Self::zero(arity);
        for (modes, c) in terms {
            p.add_term(modes, c);
        }
        p
    }

    /// `sin 2θ` on the circle.
    pub fn sin2() -> Self {
        Self::from_terms(1, [(vec![-2], T::one())])
    }

    /// `sin 2θ₁ + sin 2θ₂` on the torus.
    pub fn sin2_product() -> Self {
        Self::from_terms(2, [(vec![-2, 0], T::one()), (vec![0, -2], T::one())])
    }

    pub fn add_term(&mut self, modes: Vec<i32>, coef: T) {
        assert_eq!(modes.len(), self.arity, "term arity mismatch");
        let e = self.terms.entry(modes).or_insert(T::zero());
        *e += coef;
        self.terms.retain(|_, c| *c != T::zero());
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&[i32], T)> + '_ {
        self.terms.iter().map(|(m, c)| (m.as_slice(), *c))
    }

    /// Largest |mode| appearing in factor `k`.
    pub fn max_freq_in(&self, k: usize) -> usize {
        self.terms.keys().map(|m| m[k].unsigned_abs() as usize).max().unwrap_or(0)
    }

    /// Largest |mode| over all factors.
    pub fn max_freq(&self) -> usize {
        (0..self.arity).map(|k| self.max_freq_in(k)).max().unwrap_or(0)
    }

    pub fn eval(&self, x: &[T]) -> T {
        assert_eq!(x.len(), self.arity);
        self.terms
            .iter()
            .map(|(m, &c)| m.iter().zip(x).fold(c, |acc, (&j, &th)| acc * fourier::eval_raw(j, th)))
            .fold(T::zero(), |a, b| a + b)
    }

    /// Partial derivative in factor `k`.
    pub fn partial(&self, k: usize) -> Self {
        let mut out = Self::zero(self.arity);
        for (m, &c) in &self.terms {
            let (j, w) = fourier::deriv_raw(m[k]);
            if w != 0.0 {
                let mut m2 = m.clone();
                m2[k] = j;
                out.add_term(m2, c * lit(w));
            }
        }
        out
    }

    pub fn gradient(&self) -> Vec<Self> {
        (0..self.arity).map(|k| self.partial(k)).collect()
    }

    pub fn scale(&self, s: T) -> Self {
        Self::from_terms(self.arity, self.terms.iter().map(|(m, &c)| (m.clone(), c * s)))
    }

    pub fn neg(&self) -> Self {
        self.scale(-T::one())
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.arity, other.arity);
        let mut out = self.clone();
        for (m, &c) in &other.terms {
            out.add_term(m.clone(), c);
        }
        out
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.arity, other.arity);
        let mut out = Self::zero(self.arity);
        for (ma, &ca) in &self.terms {
            for (mb, &cb) in &other.terms {
                // Expand factor by factor; each factor contributes at most two modes.
                let mut partial: Vec<(Vec<i32>, T)> = vec![(Vec::new(), ca * cb)];
                for k in 0..self.arity {
                    let mut next = Vec::new();
                    for (pm, pc) in &partial {
                        for (l, w) in fourier::product(ma[k], mb[k]) {
                            let mut m = pm.clone();
                            m.push(l);
                            next.push((m, *pc * lit(w)));
                        }
                    }
                    partial = next;
                }
                for (m, c) in partial {
                    out.add_term(m, c);
                }
            }
        }
        out
    }

    /// Terms with all modes zero except in factor `k`, written as 1D `(mode, coef)` pairs.
    pub fn factor_terms(&self, k: usize) -> Vec<(i32, T)> {
        self.terms
            .iter()
            .filter(|(m, _)| m.iter().enumerate().all(|(i, &j)| i == k || j == 0))
            .map(|(m, &c)| (m[k], c))
            .collect()
    }

    /// True when every term depends on at most one factor.
    pub fn is_separable(&self) -> bool {
        self.terms.keys().all(|m| m.iter().filter(|&&j| j != 0).count() <= 1)
    }

    /// Splits a separable polynomial into one-variable pieces `h_k`, with the
    /// constant term assigned to the first factor.
    pub fn split_separable(&self) -> Option<Vec<TrigPoly<T>>> {
        if !self.is_separable() {
            return None;
        }
        let mut parts = vec![TrigPoly::zero(1); self.arity];
        for (m, &c) in &self.terms {
            let k = m.iter().position(|&j| j != 0).unwrap_or(0);
            parts[k].add_term(vec![m[k]], c);
        }
        Some(parts)
    }

    pub fn to_spec(&self) -> TrigPolySpec {
        TrigPolySpec {
            arity: self.arity,
            terms: self.terms.iter().map(|(m, &c)| TermSpec { coef: to_f64(c), modes: m.clone() }).collect(),
        }
    }
}

impl TrigPolySpec {
    /// Validates arity and term shapes.
    pub fn build<T: Real>(&self) -> Result<TrigPoly<T>, String> {
        if self.arity != 1 && self.arity != 2 {
            return Err(format!("arity must be 1 or 2, got {}", self.arity));
        }
        let mut p = TrigPoly::zero(self.arity);
        for t in &self.terms {
            if t.modes.len() != self.arity {
                return Err(format!("term {:?} does not have {} modes", t.modes, self.arity));
            }
            if !t.coef.is_finite() {
                return Err("non-finite coefficient".into());
            }
            p.add_term(t.modes.clone(), lit(t.coef));
        }
        Ok(p)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn arb_poly(arity: usize) -> impl Strategy<Value = TrigPoly<f64>> {
        prop::collection::vec((prop::collection::vec(-3i32..=3, arity), -2.0f64..2.0), 0..5)
            .prop_map(move |ts| TrigPoly::from_terms(arity, ts))
    }

    #[test]
    fn sin2_values() {
        let f = TrigPoly::<f64>::sin2();
        assert!((f.eval(&[0.3]) - (0.6f64).sin()).abs() < 1e-15);
        let g = f.partial(0);
        assert!((g.eval(&[0.3]) - 2.0 * (0.6f64).cos()).abs() < 1e-14);
    }

    proptest! {
        #[test]
        fn product_degree_is_additive(a in arb_poly(2), b in arb_poly(2)) {
            let p = a.mul(&b);
            if !a.is_zero() && !b.is_zero() && !p.is_zero() {
                for k in 0..2 {
                    prop_assert!(p.max_freq_in(k) <= a.max_freq_in(k) + b.max_freq_in(k));
                }
            }
            let x = [0.7, -1.9];
            prop_assert!((p.eval(&x) - a.eval(&x) * b.eval(&x)).abs() < 1e-11);
        }

        #[test]
        fn partial_matches_finite_difference(a in arb_poly(2), th in -3.0f64..3.0) {
            let h = 1e-6;
            let fd = (a.eval(&[th + h, 0.4]) - a.eval(&[th - h, 0.4])) / (2.0 * h);
            prop_assert!((a.partial(0).eval(&[th, 0.4]) - fd).abs() < 1e-6);
        }
    }

    #[test]
    fn leading_modes_multiply_to_full_degree() {
        // cos 3θ · cos 2θ contains cos 5θ, so the bound is attained.
        let a = TrigPoly::<f64>::from_terms(1, [(vec![3], 1.0)]);
        let b = TrigPoly::<f64>::from_terms(1, [(vec![2], 1.0)]);
        assert_eq!(a.mul(&b).max_freq(), 5);
    }

    #[test]
    fn spec_roundtrip() {
        let f = TrigPoly::<f64>::sin2_product();
        let s = f.to_spec();
        assert_eq!(s.build::<f64>().unwrap(), f);
        assert!(TrigPolySpec { arity: 3, terms: vec![] }.build::<f64>().is_err());
    }
}
