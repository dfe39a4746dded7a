use std::f64::consts::PI;

use proptest::prelude::*;

use s3_bell::ga::{
    bivector_identity_residual, even_product, geometric_product, grade_projection, mu_dot,
    oriented_product, EvenElement, Handedness, Multivector, Vector3,
};
use s3_bell::protocol::{
    alice_outcome, bob_outcome, joint_product, joint_product_closed_form, MuStream, PolarizerAngle,
};
use s3_bell::report::{decode_estimates, encode_estimates, EstimateRow, Format};
use s3_bell::stats::{
    chsh_value, joint_expectation, quantum_reference, ChshSettings, CorrelationEstimate,
};
use s3_bell::topology::{
    factorize_s3_point, ordered_product, stereographic_project, stereographic_unproject, S2Point,
};

fn coeff(bound: f64) -> impl Strategy<Value = f64> {
    -bound..bound
}

fn multivector(bound: f64) -> impl Strategy<Value = Multivector> {
    proptest::array::uniform8(coeff(bound)).prop_map(Multivector::new)
}

fn even(bound: f64) -> impl Strategy<Value = EvenElement> {
    proptest::array::uniform4(coeff(bound)).prop_map(EvenElement::from_array)
}

fn unit_even() -> impl Strategy<Value = EvenElement> {
    even(1.0).prop_filter_map("near zero", |q| {
        if q.norm() > 1e-3 {
            q.normalized()
        } else {
            None
        }
    })
}

fn unit_vector() -> impl Strategy<Value = Vector3> {
    (coeff(1.0), coeff(1.0), coeff(1.0)).prop_filter_map("near zero", |(x, y, z)| {
        let v = Vector3::new(x, y, z);
        if v.norm() > 1e-3 {
            v.normalized()
        } else {
            None
        }
    })
}

fn handedness() -> impl Strategy<Value = Handedness> {
    prop_oneof![Just(Handedness::Right), Just(Handedness::Left)]
}

fn angle() -> impl Strategy<Value = PolarizerAngle> {
    (-4.0 * PI..4.0 * PI).prop_map(PolarizerAngle::from_radians)
}

proptest! {
    #[test]
    fn associativity(m in multivector(10.0), n in multivector(10.0), p in multivector(10.0)) {
        prop_assert!((m * n * p).max_abs_diff(&(m * (n * p))) <= 1e-10);
    }

    #[test]
    fn grades_partition_the_element(m in multivector(10.0)) {
        let sum = (0..4).fold(Multivector::ZERO, |acc, k| acc + grade_projection(&m, k).unwrap());
        prop_assert_eq!(sum, m);
    }

    #[test]
    fn even_product_matches_full_product(p in even(1.0), q in even(1.0)) {
        let full = geometric_product(&p.embed(), &q.embed());
        prop_assert!(full.odd_magnitude() <= 1e-12);
        prop_assert!(full.even_part().max_abs_diff(&even_product(&p, &q)) <= 1e-12);
    }

    #[test]
    fn norm_is_multiplicative(mu in handedness(), p in even(1.0), q in even(1.0)) {
        prop_assert!((oriented_product(mu, &p, &q).norm() - p.norm() * q.norm()).abs() <= 1e-12);
    }

    #[test]
    fn oriented_product_is_associative(mu in handedness(), p in even(1.0), q in even(1.0), r in even(1.0)) {
        let left = oriented_product(mu, &oriented_product(mu, &p, &q), &r);
        let right = oriented_product(mu, &p, &oriented_product(mu, &q, &r));
        prop_assert!(left.max_abs_diff(&right) <= 1e-12);
    }

    #[test]
    fn bivector_identity(mu in handedness(), a in unit_vector(), b in unit_vector()) {
        prop_assert!(bivector_identity_residual(mu, a, b).max_abs() <= 1e-12);
    }

    #[test]
    fn handedness_flip(v in (coeff(10.0), coeff(10.0), coeff(10.0))) {
        let v = Vector3::new(v.0, v.1, v.2);
        prop_assert_eq!(mu_dot(Handedness::Left, v), -mu_dot(Handedness::Right, v));
    }

    #[test]
    fn closed_form_agrees(alpha in angle(), beta in angle(), mu in handedness()) {
        let direct = joint_product(alpha, beta, mu);
        prop_assert!(direct.max_abs_diff(&joint_product_closed_form(alpha, beta, mu)) <= 1e-12);
        prop_assert!((direct.norm_squared() - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn outcomes_period_pi(theta in angle(), mu in handedness()) {
        let shifted = PolarizerAngle::from_radians(theta.radians() + PI);
        prop_assert!(alice_outcome(theta, mu).max_abs_diff(&alice_outcome(shifted, mu)) <= 1e-12);
        prop_assert!(bob_outcome(theta, mu).max_abs_diff(&bob_outcome(shifted, mu)) <= 1e-12);
    }

    #[test]
    fn stereographic_round_trip(v in unit_vector()) {
        prop_assume!(1.0 - v.z >= 1e-6);
        let p = S2Point::from_direction(v).unwrap();
        let back = stereographic_unproject(&stereographic_project(&p).unwrap()).unwrap();
        prop_assert!(back.max_abs_diff(&p) <= 1e-12);
    }

    #[test]
    fn factorization_reproduces_target(target in unit_even(), n in 1usize..=8, seed in any::<u64>()) {
        let factors = factorize_s3_point(&target, n, seed).unwrap();
        prop_assert_eq!(factors.len(), n);
        prop_assert!(ordered_product(&factors).max_abs_diff(&target) <= 1e-9);
        for f in &factors {
            prop_assert!((f.norm_squared() - 1.0).abs() <= 1e-12);
        }
    }

    #[test]
    fn chsh_never_exceeds_tsirelson(a in angle(), ap in angle(), b in angle(), bp in angle()) {
        let s = ChshSettings { alpha: a, alpha_prime: ap, beta: b, beta_prime: bp };
        prop_assert!(chsh_value(&s, quantum_reference) <= 2.0 * 2f64.sqrt() + 1e-12);
    }

    #[test]
    fn joint_scalar_is_seed_independent(alpha in angle(), beta in angle(), seed in any::<u64>(), n in 1u64..300) {
        let e = joint_expectation(alpha, beta, n, seed).unwrap();
        prop_assert!((e.scalar_mean - quantum_reference(alpha, beta)).abs() <= 1e-12);
    }

    #[test]
    fn estimate_rows_round_trip(
        beta in -360.0..360.0f64,
        s in coeff(1.0), yz in coeff(1.0), zx in coeff(1.0), xy in coeff(1.0),
        n in 1u64..u64::MAX, seed in any::<u64>(),
    ) {
        let est = CorrelationEstimate { scalar_mean: s, bivector_mean: [yz, zx, xy], trial_count: n, standard_error: 1.0 / (n as f64).sqrt() };
        let row = EstimateRow::new(PolarizerAngle::from_degrees(3.0), beta, &est, seed);
        for format in [Format::Csv, Format::Json] {
            let back = decode_estimates(&encode_estimates(&[row], format).unwrap(), format).unwrap();
            prop_assert_eq!(back[0], row);
            prop_assert_eq!(back[0].estimate(), est);
        }
    }
}

#[test]
fn chsh_bound_on_many_random_quadruples() {
    use rand::Rng;
    let mut rng = s3_bell::sample::seeded(5);
    let mut worst: f64 = 0.0;
    for _ in 0..100_000 {
        let mut a = || PolarizerAngle::from_radians(rng.random_range(-PI..PI));
        let s = ChshSettings {
            alpha: a(),
            alpha_prime: a(),
            beta: a(),
            beta_prime: a(),
        };
        worst = worst.max(chsh_value(&s, quantum_reference));
    }
    assert!(worst <= 2.0 * 2f64.sqrt() + 1e-12);
    assert!(worst > 2.0);
}

#[test]
fn mu_stream_is_fair() {
    let n = 1_000_000;
    let plus = MuStream::new(2025)
        .take(n)
        .filter(|m| *m == Handedness::Right)
        .count() as f64;
    let freq = plus / n as f64;
    assert!(
        (freq - 0.5).abs() <= 4.0 / (n as f64).sqrt(),
        "frequency {freq}"
    );
}

#[test]
fn distinct_seeds_give_distinct_streams() {
    let streams: Vec<Vec<Handedness>> = (0..256)
        .map(|s| MuStream::new(s).take(64).collect())
        .collect();
    for i in 0..streams.len() {
        for j in i + 1..streams.len() {
            assert_ne!(streams[i], streams[j], "seeds {i} and {j} collide");
        }
    }
}

#[test]
fn bivector_channel_decays() {
    let n = 10_000u64;
    let envelope = 4.0 / (n as f64).sqrt();
    let alpha = PolarizerAngle::from_degrees(0.0);
    let beta = PolarizerAngle::from_degrees(45.0);
    let outside = (0..100)
        .filter(|&seed| {
            joint_expectation(alpha, beta, n, seed)
                .unwrap()
                .bivector_norm()
                > envelope
        })
        .count();
    assert!(outside <= 2, "{outside} of 100 runs outside the envelope");
}
