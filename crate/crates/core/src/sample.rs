//! Seeded random draws of algebra elements.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::ga::{EvenElement, Multivector, Vector3};

pub fn seeded(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Uniform direction on S², from a normalized Gaussian triple.
pub fn unit_vector<R: Rng + ?Sized>(rng: &mut R) -> Vector3 {
    loop {
        let v = Vector3::new(
            rng.sample(StandardNormal),
            rng.sample(StandardNormal),
            rng.sample(StandardNormal),
        );
        if v.norm_squared() > 1e-12 {
            if let Some(u) = v.normalized() {
                return u;
            }
        }
    }
}

/// Uniform point of S³, from a normalized Gaussian quadruple.
pub fn unit_even<R: Rng + ?Sized>(rng: &mut R) -> EvenElement {
    loop {
        let q = EvenElement::new(
            rng.sample(StandardNormal),
            rng.sample(StandardNormal),
            rng.sample(StandardNormal),
            rng.sample(StandardNormal),
        );
        if q.norm_squared() > 1e-12 {
            if let Some(u) = q.normalized() {
                return u;
            }
        }
    }
}

/// Even element with coefficients uniform in `[-bound, bound]`.
pub fn even_in_box<R: Rng + ?Sized>(rng: &mut R, bound: f64) -> EvenElement {
    EvenElement::new(
        rng.random_range(-bound..=bound),
        rng.random_range(-bound..=bound),
        rng.random_range(-bound..=bound),
        rng.random_range(-bound..=bound),
    )
}

/// Multivector with coefficients uniform in `[-bound, bound]`.
pub fn multivector_in_box<R: Rng + ?Sized>(rng: &mut R, bound: f64) -> Multivector {
    let mut m = Multivector::ZERO;
    for c in m.coefficients.iter_mut() {
        *c = rng.random_range(-bound..=bound);
    }
    m
}

/// Vector with components uniform in `[-bound, bound]`.
pub fn vector_in_box<R: Rng + ?Sized>(rng: &mut R, bound: f64) -> Vector3 {
    Vector3::new(
        rng.random_range(-bound..=bound),
        rng.random_range(-bound..=bound),
        rng.random_range(-bound..=bound),
    )
}
