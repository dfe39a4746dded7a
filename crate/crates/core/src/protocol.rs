//! Hidden-handedness measurement protocol.
//!
//! Each run draws a handedness `μ` shared by both stations. Alice's outcome is
//! `A(α, μ) = +μ·ã`, Bob's is `B(β, μ) = −μ·b̃`, with polarizer axes
//! `ã = e_x sin 2α + e_y cos 2α`. Their product is taken in the μ-oriented even
//! subalgebra and cross-checked against `cos 2(α−β) + (μ·e_z) sin 2(α−β)`.

use std::ops::Range;

use rand::RngCore;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ga::{mu_dot, oriented_product, EvenElement, Handedness, Vector3};

/// Agreement required between the direct product and the closed form.
pub const CLOSED_FORM_TOL: f64 = 1e-12;

/// Polarizer orientation in the plane perpendicular to `e_z`, in radians.
#[derive(Clone, Copy, Debug, Default, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct PolarizerAngle(f64);

impl PolarizerAngle {
    pub const fn from_radians(radians: f64) -> Self {
        PolarizerAngle(radians)
    }

    pub fn from_degrees(degrees: f64) -> Self {
        PolarizerAngle(degrees.to_radians())
    }

    pub fn radians(self) -> f64 {
        self.0
    }

    pub fn degrees(self) -> f64 {
        self.0.to_degrees()
    }

    pub fn is_finite(self) -> bool {
        self.0.is_finite()
    }
}

/// `(sin 2θ, cos 2θ, 0)`.
pub fn polarizer_axis(theta: PolarizerAngle) -> Vector3 {
    let (sin, cos) = (2.0 * theta.radians()).sin_cos();
    Vector3::new(sin, cos, 0.0)
}

/// `A(α, μ) = +μ·ã`. Reads only Alice's setting and the shared state.
pub fn alice_outcome(alpha: PolarizerAngle, mu: Handedness) -> EvenElement {
    mu_dot(mu, polarizer_axis(alpha))
}

/// `B(β, μ) = −μ·b̃`. Reads only Bob's setting and the shared state.
pub fn bob_outcome(beta: PolarizerAngle, mu: Handedness) -> EvenElement {
    -mu_dot(mu, polarizer_axis(beta))
}

/// `cos 2(α−β) + sign(μ) sin 2(α−β) e_x∧e_y`.
pub fn joint_product_closed_form(
    alpha: PolarizerAngle,
    beta: PolarizerAngle,
    mu: Handedness,
) -> EvenElement {
    let (sin, cos) = (2.0 * (alpha.radians() - beta.radians())).sin_cos();
    EvenElement::new(cos, 0.0, 0.0, mu.sign() * sin)
}

/// Direct product `A(α, μ) B(β, μ)` in the μ-oriented subalgebra.
pub fn joint_product(alpha: PolarizerAngle, beta: PolarizerAngle, mu: Handedness) -> EvenElement {
    oriented_product(mu, &alice_outcome(alpha, mu), &bob_outcome(beta, mu))
}

/// Stream of hidden-variable samples.
///
/// Draw `i` is the top bit of the `i`-th 64-bit output of a ChaCha8 generator
/// seeded from `seed`; a set bit selects `μ = −I`. The stream can be positioned
/// at any draw index, so disjoint trial ranges can be produced independently
/// and still reproduce the single-stream sequence.
#[derive(Clone, Debug)]
pub struct MuStream {
    rng: ChaCha8Rng,
}

impl MuStream {
    pub fn new(seed: u64) -> Self {
        MuStream {
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    /// Stream positioned so that the next draw is draw number `index`.
    pub fn at(seed: u64, index: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_word_pos(2 * index as u128);
        MuStream { rng }
    }

    pub fn next_mu(&mut self) -> Handedness {
        if self.rng.next_u64() >> 63 == 1 {
            Handedness::Left
        } else {
            Handedness::Right
        }
    }
}

impl Iterator for MuStream {
    type Item = Handedness;

    fn next(&mut self) -> Option<Handedness> {
        Some(self.next_mu())
    }
}

pub fn sample_mu(stream: &mut MuStream) -> Handedness {
    stream.next_mu()
}

/// One simulated run.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrialRecord {
    pub index: u64,
    pub mu: Handedness,
    pub alpha: PolarizerAngle,
    pub beta: PolarizerAngle,
    pub outcome_a: EvenElement,
    pub outcome_b: EvenElement,
    pub product: EvenElement,
}

/// A fixed pair of polarizer settings with the per-setting quantities cached.
#[derive(Clone, Copy, Debug)]
pub struct Setting {
    pub alpha: PolarizerAngle,
    pub beta: PolarizerAngle,
    axis_a: Vector3,
    axis_b: Vector3,
    closed_right: EvenElement,
}

impl Setting {
    pub fn new(alpha: PolarizerAngle, beta: PolarizerAngle) -> Self {
        Setting {
            alpha,
            beta,
            axis_a: polarizer_axis(alpha),
            axis_b: polarizer_axis(beta),
            closed_right: joint_product_closed_form(alpha, beta, Handedness::Right),
        }
    }

    fn closed_form(&self, mu: Handedness) -> EvenElement {
        let c = self.closed_right;
        EvenElement::new(c.s, 0.0, 0.0, mu.sign() * c.b_xy)
    }

    /// Evaluate both outcomes and their product for trial `index`, checking the
    /// direct product against the closed form.
    pub fn trial(&self, index: u64, mu: Handedness) -> Result<TrialRecord> {
        let outcome_a = mu_dot(mu, self.axis_a);
        let outcome_b = -mu_dot(mu, self.axis_b);
        let product = oriented_product(mu, &outcome_a, &outcome_b);
        let residual = product.max_abs_diff(&self.closed_form(mu));
        if residual > CLOSED_FORM_TOL || !residual.is_finite() {
            return Err(Error::ClosedFormMismatch {
                trial: index,
                residual,
            });
        }
        Ok(TrialRecord {
            index,
            mu,
            alpha: self.alpha,
            beta: self.beta,
            outcome_a,
            outcome_b,
            product,
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SimulationConfig {
    pub trial_count: u64,
    pub seed: u64,
    pub angles: Vec<(PolarizerAngle, PolarizerAngle)>,
}

impl SimulationConfig {
    pub fn new(trial_count: u64, seed: u64, angles: Vec<(PolarizerAngle, PolarizerAngle)>) -> Self {
        SimulationConfig {
            trial_count,
            seed,
            angles,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.trial_count == 0 {
            return Err(Error::ZeroTrials);
        }
        if self
            .angles
            .iter()
            .any(|(a, b)| !a.is_finite() || !b.is_finite())
        {
            return Err(Error::NonFinite("polarizer angle"));
        }
        Ok(())
    }
}

/// Records for trials `range` of one setting. Trial `i` uses draw `i` of the
/// stream, whatever range it is computed in.
pub fn run_range(setting: &Setting, seed: u64, range: Range<u64>) -> Result<Vec<TrialRecord>> {
    let stream = MuStream::at(seed, range.start);
    range
        .zip(stream)
        .map(|(i, mu)| setting.trial(i, mu))
        .collect()
}

/// Run `trial_count` trials for every angle pair, pairs in order, trials in order.
/// Every pair sees the same μ sequence.
pub fn run_trials(config: &SimulationConfig) -> Result<Vec<TrialRecord>> {
    run_trials_sharded(config, 1)
}

/// Same records as [`run_trials`], with each setting's trial range split
/// across `threads` workers.
pub fn run_trials_sharded(config: &SimulationConfig, threads: usize) -> Result<Vec<TrialRecord>> {
    config.validate()?;
    let mut out = Vec::with_capacity(config.angles.len() * config.trial_count as usize);
    for &(alpha, beta) in &config.angles {
        let setting = Setting::new(alpha, beta);
        let ranges = shard_ranges(config.trial_count, threads, 1);
        let shards = map_shards(&ranges, |r| run_range(&setting, config.seed, r));
        for shard in shards {
            out.extend(shard?);
        }
    }
    Ok(out)
}

/// Split `0..n` into at most `shards` contiguous ranges whose interior
/// boundaries are multiples of `align`.
pub fn shard_ranges(n: u64, shards: usize, align: u64) -> Vec<Range<u64>> {
    let align = align.max(1);
    let blocks = n.div_ceil(align);
    let shards = (shards.max(1) as u64).min(blocks.max(1));
    let per = blocks.div_ceil(shards);
    (0..shards)
        .map(|k| ((k * per * align).min(n), ((k + 1) * per * align).min(n)))
        .filter(|(s, e)| s < e || n == 0)
        .map(|(s, e)| s..e)
        .collect()
}

/// Apply `f` to every range, one scoped thread per range, results in range order.
pub fn map_shards<T, F>(ranges: &[Range<u64>], f: F) -> Vec<T>
where
    T: Send,
    F: Fn(Range<u64>) -> T + Sync,
{
    if ranges.len() <= 1 {
        return ranges.iter().cloned().map(&f).collect();
    }
    std::thread::scope(|scope| {
        let f = &f;
        let handles: Vec<_> = ranges
            .iter()
            .map(|r| scope.spawn(move || f(r.clone())))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("shard worker panicked"))
            .collect()
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::topology::{is_equatorial, is_unit_s3};
    use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_4, FRAC_PI_8, PI};

    fn rad(r: f64) -> PolarizerAngle {
        PolarizerAngle::from_radians(r)
    }

    #[test]
    fn axis_examples() {
        assert_eq!(polarizer_axis(rad(0.0)), Vector3::new(0.0, 1.0, 0.0));
        let a = polarizer_axis(rad(FRAC_PI_4));
        assert!((a.x - 1.0).abs() <= 1e-15 && a.y.abs() <= 1e-15 && a.z == 0.0);
        let a = polarizer_axis(rad(FRAC_PI_8));
        assert!((a.x - FRAC_1_SQRT_2).abs() <= 1e-15 && (a.y - FRAC_1_SQRT_2).abs() <= 1e-15);
        assert!((a.norm_squared() - 1.0).abs() <= 1e-15);
    }

    #[test]
    fn outcome_examples() {
        assert_eq!(
            alice_outcome(rad(0.0), Handedness::Right),
            EvenElement::e_zx()
        );
        assert_eq!(
            alice_outcome(rad(0.0), Handedness::Left),
            -EvenElement::e_zx()
        );
        assert!(
            alice_outcome(rad(FRAC_PI_4), Handedness::Right).max_abs_diff(&EvenElement::e_yz())
                <= 1e-15
        );
        assert_eq!(
            bob_outcome(rad(0.0), Handedness::Right),
            -EvenElement::e_zx()
        );
        assert!(
            bob_outcome(rad(FRAC_PI_4), Handedness::Right).max_abs_diff(&-EvenElement::e_yz())
                <= 1e-15
        );
        for mu in [Handedness::Right, Handedness::Left] {
            for theta in [0.0, 0.3, -1.7, 2.9] {
                assert_eq!(bob_outcome(rad(theta), mu), -alice_outcome(rad(theta), mu));
            }
        }
    }

    #[test]
    fn closed_form_examples() {
        for mu in [Handedness::Right, Handedness::Left] {
            assert_eq!(
                joint_product_closed_form(rad(0.7), rad(0.7), mu),
                EvenElement::ONE
            );
        }
        let p = joint_product_closed_form(rad(FRAC_PI_4), rad(0.0), Handedness::Right);
        assert!(p.max_abs_diff(&EvenElement::e_xy()) <= 1e-15);
        let p = joint_product_closed_form(rad(FRAC_PI_8), rad(0.0), Handedness::Right);
        let expected = EvenElement::new(FRAC_1_SQRT_2, 0.0, 0.0, FRAC_1_SQRT_2);
        assert!(p.max_abs_diff(&expected) <= 1e-15);
        let direct = joint_product(rad(FRAC_PI_8), rad(0.0), Handedness::Right);
        assert!(direct.max_abs_diff(&expected) <= 1e-12);
    }

    #[test]
    fn parallel_settings_give_identical_outcomes() {
        // A(θ)B(θ) = 1: the sign difference between the stations cancels.
        for mu in [Handedness::Right, Handedness::Left] {
            let p = joint_product(rad(1.1), rad(1.1), mu);
            assert!(p.max_abs_diff(&EvenElement::ONE) <= 1e-15);
        }
    }

    #[test]
    fn outcomes_have_period_pi() {
        for mu in [Handedness::Right, Handedness::Left] {
            for theta in [0.0, 0.4, 1.3, -2.2] {
                let a = alice_outcome(rad(theta), mu);
                let b = alice_outcome(rad(theta + PI), mu);
                assert!(a.max_abs_diff(&b) <= 1e-12);
            }
        }
    }

    #[test]
    fn mu_stream_is_deterministic_and_seekable() {
        let a: Vec<_> = MuStream::new(5).take(100).collect();
        let b: Vec<_> = MuStream::new(5).take(100).collect();
        assert_eq!(a, b);
        let tail: Vec<_> = MuStream::at(5, 37).take(63).collect();
        assert_eq!(tail, a[37..]);
        let other: Vec<_> = MuStream::new(6).take(64).collect();
        assert_ne!(other, a[..64]);
        let mut s = MuStream::new(5);
        assert_eq!(sample_mu(&mut s), a[0]);
    }

    #[test]
    fn run_trials_examples() {
        let cfg = SimulationConfig::new(1, 3, vec![(rad(0.0), rad(0.0))]);
        let recs = run_trials(&cfg).unwrap();
        assert_eq!(recs.len(), 1);
        assert_eq!(recs[0].product, EvenElement::ONE);

        let cfg = SimulationConfig::new(4, 21, vec![(rad(0.2), rad(-0.5))]);
        assert_eq!(run_trials(&cfg).unwrap(), run_trials(&cfg).unwrap());

        let cfg = SimulationConfig::new(1000, 8, vec![(rad(FRAC_PI_8), rad(0.0))]);
        for r in run_trials(&cfg).unwrap() {
            assert!((r.product.s - FRAC_1_SQRT_2).abs() <= 1e-12);
            assert!(is_equatorial(&r.outcome_a, 1e-12).unwrap());
            assert!(is_equatorial(&r.outcome_b, 1e-12).unwrap());
            assert!(is_unit_s3(&r.product, 1e-12).unwrap());
        }
    }

    #[test]
    fn trials_share_mu_across_stations_and_settings() {
        let cfg = SimulationConfig::new(50, 77, vec![(rad(0.1), rad(0.2)), (rad(1.0), rad(-0.3))]);
        let recs = run_trials(&cfg).unwrap();
        let mus: Vec<_> = MuStream::new(77).take(50).collect();
        for (k, r) in recs.iter().enumerate() {
            assert_eq!(r.mu, mus[k % 50]);
            assert_eq!(r.index, (k % 50) as u64);
            assert_eq!(r.outcome_a, alice_outcome(r.alpha, r.mu));
            assert_eq!(r.outcome_b, bob_outcome(r.beta, r.mu));
        }
    }

    #[test]
    fn sharded_run_matches_single_thread() {
        let cfg =
            SimulationConfig::new(1003, 12, vec![(rad(0.3), rad(1.4)), (rad(-0.2), rad(0.0))]);
        let single = run_trials(&cfg).unwrap();
        for threads in [2, 3, 8] {
            assert_eq!(run_trials_sharded(&cfg, threads).unwrap(), single);
        }
    }

    #[test]
    fn config_validation() {
        assert!(matches!(
            run_trials(&SimulationConfig::new(0, 1, vec![])),
            Err(Error::ZeroTrials)
        ));
        let bad = SimulationConfig::new(1, 1, vec![(rad(f64::NAN), rad(0.0))]);
        assert!(matches!(run_trials(&bad), Err(Error::NonFinite(_))));
    }

    #[test]
    fn shard_ranges_cover_and_align() {
        for (n, shards, align) in [
            (10, 3, 1),
            (10_000, 4, 4096),
            (5, 8, 1),
            (4096, 2, 4096),
            (1, 1, 7),
        ] {
            let ranges = shard_ranges(n, shards, align);
            assert!(ranges.len() <= shards);
            assert_eq!(ranges.first().unwrap().start, 0);
            assert_eq!(ranges.last().unwrap().end, n);
            for w in ranges.windows(2) {
                assert_eq!(w[0].end, w[1].start);
                assert_eq!(w[0].end % align, 0);
            }
        }
    }
}
