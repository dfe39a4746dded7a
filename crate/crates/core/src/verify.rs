//! Randomized invariant suites. Each property reports the largest residual
//! observed over its samples against a fixed tolerance.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::ga::{
    bivector_identity_residual, even_product, geometric_product, grade_projection, mu_dot,
    oriented_product, wedge, EvenElement, Handedness, Multivector, Vector3,
};
use crate::protocol::{
    alice_outcome, bob_outcome, joint_product, joint_product_closed_form, PolarizerAngle,
};
use crate::sample;
use crate::stats::{joint_expectation, quantum_reference};
use crate::topology::{
    factorize_s3_point, is_equatorial, ordered_product, s2_nonclosure_witness,
    stereographic_project, stereographic_unproject, S2Point,
};

pub const IDENTITY_TOL: f64 = 1e-12;
pub const ASSOCIATIVITY_TOL: f64 = 1e-10;
pub const FACTORIZATION_TOL: f64 = 1e-9;
/// Points with `1 − z` below this are skipped by the projection round-trip.
pub const NORTH_CAP: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Suite {
    Algebra,
    Topology,
    Protocol,
    All,
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "algebra" => Ok(Suite::Algebra),
            "topology" => Ok(Suite::Topology),
            "protocol" => Ok(Suite::Protocol),
            "all" => Ok(Suite::All),
            other => Err(Error::UnknownSuite(other.to_string())),
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Suite::Algebra => "algebra",
            Suite::Topology => "topology",
            Suite::Protocol => "protocol",
            Suite::All => "all",
        };
        f.write_str(name)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PropertyCheck {
    pub suite: &'static str,
    pub name: &'static str,
    pub samples: usize,
    pub max_residual: f64,
    pub tolerance: f64,
}

impl PropertyCheck {
    pub fn passed(&self) -> bool {
        self.max_residual.is_finite() && self.max_residual <= self.tolerance
    }
}

impl fmt::Display for PropertyCheck {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "[{}] {:<9} {:<44} samples={:<6} max_residual={:.3e} tol={:.0e}",
            if self.passed() { "PASS" } else { "FAIL" },
            self.suite,
            self.name,
            self.samples,
            self.max_residual,
            self.tolerance
        )
    }
}

/// Max of `f` over `samples` draws.
fn worst<F>(samples: usize, rng: &mut ChaCha8Rng, mut f: F) -> f64
where
    F: FnMut(&mut ChaCha8Rng) -> f64,
{
    (0..samples)
        .map(|_| f(rng))
        .fold(0.0, |acc, r| if r.is_nan() { f64::NAN } else { acc.max(r) })
}

fn check(
    suite: &'static str,
    name: &'static str,
    samples: usize,
    max_residual: f64,
    tolerance: f64,
) -> PropertyCheck {
    PropertyCheck {
        suite,
        name,
        samples,
        max_residual,
        tolerance,
    }
}

fn random_mu(rng: &mut ChaCha8Rng) -> Handedness {
    if rng.random::<bool>() {
        Handedness::Right
    } else {
        Handedness::Left
    }
}

fn random_angle(rng: &mut ChaCha8Rng) -> PolarizerAngle {
    PolarizerAngle::from_radians(rng.random_range(-2.0 * PI..2.0 * PI))
}

const AXES: [Vector3; 3] = [Vector3::E_X, Vector3::E_Y, Vector3::E_Z];

fn levi_civita(i: usize, j: usize, k: usize) -> f64 {
    match (i, j, k) {
        (0, 1, 2) | (1, 2, 0) | (2, 0, 1) => 1.0,
        (0, 2, 1) | (2, 1, 0) | (1, 0, 2) => -1.0,
        _ => 0.0,
    }
}

pub fn algebra_suite(samples: usize, seed: u64) -> Vec<PropertyCheck> {
    const S: &str = "algebra";
    let mut rng = sample::seeded(seed);
    let mut out = Vec::new();

    let r = worst(samples, &mut rng, |rng| {
        let u = Multivector::from_vector(sample::vector_in_box(rng, 1.0));
        let v = Multivector::from_vector(sample::vector_in_box(rng, 1.0));
        let (uv, vu) = (geometric_product(&u, &v), geometric_product(&v, &u));
        let symmetric = (uv + vu).scale(0.5);
        let antisymmetric = (uv - vu).scale(0.5);
        let dot = grade_projection(&uv, 0).unwrap();
        let outer = wedge(&u, &v);
        symmetric
            .max_abs_diff(&dot)
            .max(antisymmetric.max_abs_diff(&outer))
            .max(uv.max_abs_diff(&(dot + outer)))
    });
    out.push(check(
        S,
        "vector product = dot + wedge",
        samples,
        r,
        IDENTITY_TOL,
    ));

    let r = worst(samples, &mut rng, |rng| {
        let m = sample::multivector_in_box(rng, 10.0);
        let n = sample::multivector_in_box(rng, 10.0);
        let p = sample::multivector_in_box(rng, 10.0);
        (m * n * p).max_abs_diff(&(m * (n * p)))
    });
    out.push(check(
        S,
        "associativity (|coeff| <= 10)",
        samples,
        r,
        ASSOCIATIVITY_TOL,
    ));

    let r = worst(samples, &mut rng, |rng| {
        let m = sample::multivector_in_box(rng, 10.0);
        let sum = (0..4).fold(Multivector::ZERO, |acc, k| {
            acc + grade_projection(&m, k).unwrap()
        });
        sum.max_abs_diff(&m)
    });
    out.push(check(
        S,
        "grade projections sum to the element",
        samples,
        r,
        0.0,
    ));

    let r = worst(samples, &mut rng, |rng| {
        let mu = random_mu(rng);
        let (j, k) = (rng.random_range(0..3), rng.random_range(0..3));
        let lhs = oriented_product(mu, &mu_dot(mu, AXES[j]), &mu_dot(mu, AXES[k]));
        let mut rhs = EvenElement::scalar(if j == k { -1.0 } else { 0.0 });
        for (l, axis) in AXES.iter().enumerate() {
            rhs = rhs - mu_dot(mu, *axis).scale(levi_civita(j, k, l));
        }
        lhs.max_abs_diff(&rhs)
    });
    out.push(check(
        S,
        "basis bivector products, both handedness",
        samples,
        r,
        IDENTITY_TOL,
    ));

    let r = worst(samples, &mut rng, |rng| {
        let mu = random_mu(rng);
        let (a, b) = (sample::unit_vector(rng), sample::unit_vector(rng));
        bivector_identity_residual(mu, a, b).max_abs()
    });
    out.push(check(
        S,
        "generic bivector identity residual",
        samples,
        r,
        IDENTITY_TOL,
    ));

    let r = worst(samples, &mut rng, |rng| {
        let (p, q) = (sample::even_in_box(rng, 1.0), sample::even_in_box(rng, 1.0));
        geometric_product(&p.embed(), &q.embed()).odd_magnitude()
    });
    out.push(check(
        S,
        "even subalgebra closure (odd part)",
        samples,
        r,
        IDENTITY_TOL,
    ));

    let r = worst(samples, &mut rng, |rng| {
        let (p, q) = (sample::even_in_box(rng, 1.0), sample::even_in_box(rng, 1.0));
        let via_full = geometric_product(&p.embed(), &q.embed()).even_part();
        let opposite = geometric_product(&q.embed(), &p.embed()).even_part();
        even_product(&p, &q)
            .max_abs_diff(&via_full)
            .max(oriented_product(Handedness::Left, &p, &q).max_abs_diff(&opposite))
    });
    out.push(check(
        S,
        "even product vs full geometric product",
        samples,
        r,
        IDENTITY_TOL,
    ));

    let r = worst(samples, &mut rng, |rng| {
        let mu = random_mu(rng);
        let (p, q) = (sample::even_in_box(rng, 1.0), sample::even_in_box(rng, 1.0));
        (oriented_product(mu, &p, &q).norm() - p.norm() * q.norm()).abs()
    });
    out.push(check(S, "norm multiplicativity", samples, r, IDENTITY_TOL));

    let r = worst(samples, &mut rng, |rng| {
        let v = sample::vector_in_box(rng, 10.0);
        mu_dot(Handedness::Left, v).max_abs_diff(&-mu_dot(Handedness::Right, v))
    });
    out.push(check(S, "handedness flip negates mu_dot", samples, r, 0.0));

    out
}

pub fn topology_suite(samples: usize, seed: u64) -> Vec<PropertyCheck> {
    const S: &str = "topology";
    let mut rng = sample::seeded(seed);
    let mut out = Vec::new();

    let r = worst(samples, &mut rng, |rng| {
        let p = loop {
            let v = sample::unit_vector(rng);
            if 1.0 - v.z >= NORTH_CAP {
                break S2Point::from_direction(v).unwrap();
            }
        };
        match stereographic_project(&p).and_then(|q| stereographic_unproject(&q)) {
            Ok(back) => back.max_abs_diff(&p),
            Err(_) => f64::INFINITY,
        }
    });
    out.push(check(
        S,
        "stereographic round-trip",
        samples,
        r,
        IDENTITY_TOL,
    ));

    let pole_rejected = matches!(
        stereographic_project(&S2Point::NORTH),
        Err(Error::NorthPole)
    );
    out.push(check(
        S,
        "north pole rejected",
        1,
        if pole_rejected { 0.0 } else { 1.0 },
        0.0,
    ));

    let (mut product_residual, mut unit_residual): (f64, f64) = (0.0, 0.0);
    for _ in 0..samples {
        let target = sample::unit_even(&mut rng);
        let n = rng.random_range(1..=8);
        let factor_seed = rng.random::<u64>();
        match factorize_s3_point(&target, n, factor_seed) {
            Ok(factors) => {
                product_residual =
                    product_residual.max(ordered_product(&factors).max_abs_diff(&target));
                for f in &factors {
                    unit_residual = unit_residual.max((f.norm_squared() - 1.0).abs());
                }
            }
            Err(_) => product_residual = f64::INFINITY,
        }
    }
    out.push(check(
        S,
        "factorization into 1..8 factors reproduces",
        samples,
        product_residual,
        FACTORIZATION_TOL,
    ));
    out.push(check(
        S,
        "factorization factors are unit",
        samples,
        unit_residual,
        IDENTITY_TOL,
    ));

    let r = worst(samples, &mut rng, |rng| {
        let (p, q) = (sample::unit_even(rng), sample::unit_even(rng));
        (even_product(&p, &q).norm_squared() - 1.0).abs()
    });
    out.push(check(
        S,
        "S3 closed under multiplication",
        samples,
        r,
        IDENTITY_TOL,
    ));

    let r = worst(samples, &mut rng, |rng| {
        let (a, b) = (sample::unit_vector(rng), sample::unit_vector(rng));
        let w = s2_nonclosure_witness(a, b);
        let mut residual = (w.s + a.dot(&b)).abs();
        // leaves the equator whenever a·b ≠ 0
        if a.dot(&b).abs() > 1e-6 && is_equatorial(&w, IDENTITY_TOL).unwrap() {
            residual = f64::INFINITY;
        }
        residual
    });
    out.push(check(
        S,
        "S2 non-closure witness scalar = -a.b",
        samples,
        r,
        IDENTITY_TOL,
    ));

    out
}

pub fn protocol_suite(samples: usize, seed: u64) -> Vec<PropertyCheck> {
    const S: &str = "protocol";
    let mut rng = sample::seeded(seed);
    let mut out = Vec::new();

    let r = worst(samples, &mut rng, |rng| {
        let (alpha, beta, mu) = (random_angle(rng), random_angle(rng), random_mu(rng));
        joint_product(alpha, beta, mu).max_abs_diff(&joint_product_closed_form(alpha, beta, mu))
    });
    out.push(check(
        S,
        "closed form = direct product",
        samples,
        r,
        IDENTITY_TOL,
    ));

    let r = worst(samples, &mut rng, |rng| {
        let (theta, mu) = (random_angle(rng), random_mu(rng));
        let (a, b) = (alice_outcome(theta, mu), bob_outcome(theta, mu));
        let off = |q: &EvenElement| (q.norm_squared() - 1.0).abs().max(q.s.abs());
        off(&a).max(off(&b))
    });
    out.push(check(
        S,
        "outcomes are equatorial",
        samples,
        r,
        IDENTITY_TOL,
    ));

    let r = worst(samples, &mut rng, |rng| {
        let (alpha, beta, mu) = (random_angle(rng), random_angle(rng), random_mu(rng));
        (joint_product(alpha, beta, mu).norm_squared() - 1.0).abs()
    });
    out.push(check(
        S,
        "joint product is a unit S3 point",
        samples,
        r,
        IDENTITY_TOL,
    ));

    let r = worst(samples, &mut rng, |rng| {
        let (theta, mu) = (random_angle(rng), random_mu(rng));
        let shifted = PolarizerAngle::from_radians(theta.radians() + PI);
        alice_outcome(theta, mu)
            .max_abs_diff(&alice_outcome(shifted, mu))
            .max(bob_outcome(theta, mu).max_abs_diff(&bob_outcome(shifted, mu)))
    });
    out.push(check(
        S,
        "outcomes have period pi",
        samples,
        r,
        IDENTITY_TOL,
    ));

    let n = samples.max(1) as u64;
    let mut r: f64 = 0.0;
    for k in 0..37 {
        let beta = PolarizerAngle::from_degrees(5.0 * k as f64);
        let alpha = PolarizerAngle::from_radians(0.0);
        r = match joint_expectation(alpha, beta, n, seed) {
            Ok(e) => r.max((e.scalar_mean - quantum_reference(alpha, beta)).abs()),
            Err(_) => f64::INFINITY,
        };
    }
    out.push(check(
        S,
        "joint scalar mean = cos 2(a-b), 37 angles",
        37,
        r,
        IDENTITY_TOL,
    ));

    out
}

pub fn run_suite(suite: Suite, samples: usize, seed: u64) -> Vec<PropertyCheck> {
    match suite {
        Suite::Algebra => algebra_suite(samples, seed),
        Suite::Topology => topology_suite(samples, seed),
        Suite::Protocol => protocol_suite(samples, seed),
        Suite::All => {
            let mut all = algebra_suite(samples, seed);
            all.extend(topology_suite(samples, seed));
            all.extend(protocol_suite(samples, seed));
            all
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_suites_pass() {
        let checks = run_suite(Suite::All, 300, 2024);
        for c in &checks {
            assert!(c.passed(), "{c}");
        }
    }

    #[test]
    fn suite_names_parse() {
        for s in ["algebra", "topology", "protocol", "all"] {
            assert_eq!(s.parse::<Suite>().unwrap().to_string(), s);
        }
        assert!(matches!(
            "foo".parse::<Suite>(),
            Err(Error::UnknownSuite(_))
        ));
    }

    #[test]
    fn single_sample_protocol_has_agreement_row() {
        let checks = protocol_suite(1, 0);
        assert!(checks
            .iter()
            .any(|c| c.name.starts_with("closed form") && c.samples == 1));
    }

    #[test]
    fn failing_property_is_reported() {
        let c = check("algebra", "x", 1, 1.0, 1e-12);
        assert!(!c.passed());
        assert!(c.to_string().starts_with("[FAIL]"));
        assert!(!check("algebra", "x", 1, f64::NAN, 1.0).passed());
    }
}
