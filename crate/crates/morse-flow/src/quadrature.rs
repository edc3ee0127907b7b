//! Adaptive composite Gauss-Legendre quadrature for vector-valued integrands.
//!
//! Each panel is compared with the sum over its two halves; panels whose
//! halves disagree by more than `rel_tol · max(|I|, floor)` are split again.
//! Refinement therefore concentrates where the integrand varies fastest,
//! which for `e^{tf}ω` means the ends of a cell at large `t`.

use std::num::NonZeroUsize;

use derham_core::{lit, Real};
use gauss_quad::GaussLegendre;
use nalgebra::DVector;

use crate::error::MorseError;

#[derive(Debug, Clone)]
pub struct Quadrature<T: Real> {
    nodes: Vec<(T, T)>,
    pub rel_tol: T,
    pub max_panels: usize,
}

impl<T: Real> Quadrature<T> {
    pub fn new(nodes_per_panel: usize, rel_tol: T, max_panels: usize) -> Self {
        let gl = GaussLegendre::new(NonZeroUsize::new(nodes_per_panel.max(1)).unwrap());
        let nodes = gl.as_node_weight_pairs().iter().map(|&(x, w)| (lit(x), lit(w))).collect();
        Self { nodes, rel_tol, max_panels }
    }

    fn panel<F: FnMut(T) -> DVector<T>>(&self, a: T, b: T, f: &mut F) -> DVector<T> {
        let half = (b - a) * lit::<T>(0.5);
        let mid = (a + b) * lit::<T>(0.5);
        let mut acc: Option<DVector<T>> = None;
        for &(x, w) in &self.nodes {
            let v = f(mid + half * x) * (w * half);
            acc = Some(match acc {
                None => v,
                Some(s) => s + v,
            });
        }
        acc.expect("at least one node")
    }

    /// `∫_a^b f`, with `f` returning vectors of a fixed length.
    pub fn integrate<F: FnMut(T) -> DVector<T>>(&self, a: T, b: T, mut f: F) -> Result<DVector<T>, MorseError> {
        if a == b {
            return Ok(f(a) * T::zero());
        }
        let whole = self.panel(a, b, &mut f);
        let mut stack = vec![(a, b, whole)];
        let mut done: Option<DVector<T>> = None;
        let mut panels = 1usize;
        let mut scale = stack[0].2.amax();
        let floor = lit::<T>(1e-300);
        while let Some((lo, hi, coarse)) = stack.pop() {
            let mid = (lo + hi) * lit::<T>(0.5);
            let left = self.panel(lo, mid, &mut f);
            let right = self.panel(mid, hi, &mut f);
            let fine = &left + &right;
            scale = scale.max(fine.amax());
            if (&fine - &coarse).amax() <= self.rel_tol * scale.max(floor) {
                done = Some(match done {
                    None => fine,
                    Some(s) => s + fine,
                });
                continue;
            }
            panels += 1;
            if panels > self.max_panels {
                return Err(MorseError::Quadrature { panels: self.max_panels });
            }
            stack.push((mid, hi, right));
            stack.push((lo, mid, left));
        }
        Ok(done.expect("at least one panel"))
    }

    /// `∫∫ f` over `[a0,b0] × [a1,b1]`, nested one-dimensional rules.
    pub fn integrate_2d<F: FnMut(T, T) -> DVector<T>>(
        &self,
        (a0, b0): (T, T),
        (a1, b1): (T, T),
        mut f: F,
    ) -> Result<DVector<T>, MorseError> {
        let mut err = None;
        let out = self.integrate(a0, b0, |x| match self.integrate(a1, b1, |y| f(x, y)) {
            Ok(v) => v,
            Err(e) => {
                err = Some(e);
                f(x, a1) * T::zero()
            }
        })?;
        match err {
            Some(e) => Err(e),
            None => Ok(out),
        }
    }
}

impl<T: Real> Default for Quadrature<T> {
    fn default() -> Self {
        Self::new(32, lit(1e-10), 1 << 14)
    }
}
