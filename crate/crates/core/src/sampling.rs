//! Seeded random states, unitaries and observables.
//!
//! Every sampler takes its generator explicitly; [`rng_from_seed`] gives the
//! reproducible ChaCha stream used throughout the crate.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::linalg::{Ket, Operator, C64};

pub type SeededRng = ChaCha8Rng;

pub fn rng_from_seed(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn complex_normal<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re, im)
}

/// A state drawn uniformly from the unit sphere of `C^dim`.
pub fn random_state<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Ket {
    loop {
        let k =
            Ket::new((0..dim).map(|_| complex_normal(rng)).collect()).expect("positive dimension");
        if k.norm() > 1e-8 {
            return k.normalized().expect("nonzero");
        }
    }
}

/// `count` uniformly random states from the given seed.
pub fn random_states(dim: usize, count: usize, seed: u64) -> Vec<Ket> {
    let mut rng = rng_from_seed(seed);
    (0..count).map(|_| random_state(dim, &mut rng)).collect()
}

/// Haar-distributed unitary: Gram–Schmidt on a complex Ginibre matrix.
pub fn random_unitary<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Operator {
    let mut columns: Vec<Ket> = Vec::with_capacity(dim);
    while columns.len() < dim {
        let mut v =
            Ket::new((0..dim).map(|_| complex_normal(rng)).collect()).expect("positive dimension");
        for _ in 0..2 {
            for q in &columns {
                let c = q.inner(&v).expect("same dim");
                v = v.sub(&q.scale(c)).expect("same dim");
            }
        }
        // Resample on (measure-zero) near-dependence.
        if v.norm() > 1e-6 {
            columns.push(v.normalized().expect("nonzero"));
        }
    }
    Operator::from_columns(&columns).expect("square")
}

/// `V diag(spectrum) V†`.
pub fn conjugate_diagonal(v: &Operator, spectrum: &[f64]) -> Operator {
    let d = Operator::from_real_diagonal(spectrum);
    v.compose(&d)
        .and_then(|vd| vd.compose(&v.dagger()))
        .expect("dimensions agree")
}

/// Random Hermitian matrix with Gaussian entries (GUE-like, unscaled).
pub fn random_hermitian<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Operator {
    let g = Operator::new(dim, (0..dim * dim).map(|_| complex_normal(rng)).collect())
        .expect("positive dimension");
    g.add(&g.dagger())
        .expect("same dim")
        .scale(C64::new(0.5, 0.0))
}
