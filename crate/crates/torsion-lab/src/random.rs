//! Seeded random complexes and chain isomorphisms.
//!
//! A complex is built from the split form `C^q = A_q ⊕ H_q ⊕ B_q`, where
//! `d` maps `B_q` identically onto `A_{q+1}`, then conjugated by random
//! invertible matrices and given random Gram matrices `XᵀX + I`.

use nalgebra::DMatrix;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::complex::{ComplexMorphism, FiniteComplex};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RandomOptions {
    pub max_dim: usize,
    /// Number of degrees, `top + 1`.
    pub degrees: usize,
    /// Whether to force all cohomology to vanish.
    pub acyclic: bool,
}

impl Default for RandomOptions {
    fn default() -> Self {
        Self { max_dim: 8, degrees: 4, acyclic: false }
    }
}

fn uniform(rng: &mut ChaCha8Rng, r: usize, c: usize) -> DMatrix<f64> {
    DMatrix::from_fn(r, c, |_, _| rng.random_range(-1.0..1.0))
}

/// Random invertible matrix with condition number bounded by about 5.
pub fn random_invertible(rng: &mut ChaCha8Rng, n: usize) -> DMatrix<f64> {
    let q = uniform(rng, n, n) / (n.max(1) as f64).sqrt();
    q * 0.6 + DMatrix::identity(n, n) * 1.5
}

pub fn random_gram(rng: &mut ChaCha8Rng, n: usize) -> DMatrix<f64> {
    let x = uniform(rng, n, n);
    x.transpose() * x + DMatrix::identity(n, n)
}

/// Ranks `r_q` of `d^q` and cohomology dimensions `h_q`.
fn random_shape(rng: &mut ChaCha8Rng, opts: &RandomOptions) -> (Vec<usize>, Vec<usize>) {
    loop {
        let ranks: Vec<usize> = (0..opts.degrees - 1).map(|_| rng.random_range(0..=3)).collect();
        let harm: Vec<usize> =
            (0..opts.degrees).map(|_| if opts.acyclic { 0 } else { rng.random_range(0..=2) }).collect();
        let ok = (0..opts.degrees).all(|q| {
            let n = harm[q] + if q > 0 { ranks[q - 1] } else { 0 } + ranks.get(q).copied().unwrap_or(0);
            (1..=opts.max_dim).contains(&n)
        });
        if ok {
            return (ranks, harm);
        }
    }
}

pub fn random_complex(rng: &mut ChaCha8Rng, opts: &RandomOptions) -> FiniteComplex<f64> {
    let (ranks, harm) = random_shape(rng, opts);
    let dims: Vec<usize> = (0..opts.degrees)
        .map(|q| harm[q] + if q > 0 { ranks[q - 1] } else { 0 } + ranks.get(q).copied().unwrap_or(0))
        .collect();
    let conj: Vec<DMatrix<f64>> = dims.iter().map(|&n| random_invertible(rng, n)).collect();
    let d = (0..opts.degrees - 1)
        .map(|q| {
            let mut std = DMatrix::zeros(dims[q + 1], dims[q]);
            for i in 0..ranks[q] {
                std[(i, dims[q] - ranks[q] + i)] = 1.0;
            }
            let inv = conj[q].clone().try_inverse().expect("invertible by construction");
            &conj[q + 1] * std * inv
        })
        .collect();
    let gram = dims.iter().map(|&n| random_gram(rng, n)).collect();
    FiniteComplex::new(d, gram).expect("valid by construction")
}

/// A random complex `C₁` and a random isomorphism onto `C₂`, where
/// `d₂ = φ d₁ φ^{−1}` and `C₂` carries fresh Gram matrices.
pub fn random_isomorphism(rng: &mut ChaCha8Rng, opts: &RandomOptions) -> ComplexMorphism<f64> {
    let c1 = random_complex(rng, opts);
    let phi: Vec<DMatrix<f64>> = c1.dims().iter().map(|&n| random_invertible(rng, n)).collect();
    let d2 = (0..c1.top())
        .map(|q| &phi[q + 1] * c1.d(q) * phi[q].clone().try_inverse().expect("invertible by construction"))
        .collect();
    let g2 = c1.dims().iter().map(|&n| random_gram(rng, n)).collect();
    let c2 = FiniteComplex::new(d2, g2).expect("valid by construction");
    ComplexMorphism::new(c1, c2, phi).expect("chain map by construction")
}

/// The `k`-th case of the seeded anomaly suite.
pub fn anomaly_case(seed: u64, k: u64) -> ComplexMorphism<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ k);
    random_isomorphism(&mut rng, &RandomOptions::default())
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
