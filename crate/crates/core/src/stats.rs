//! Monte Carlo correlation estimators, the quantum reference curve and the
//! CHSH combination.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ga::{mu_dot, EvenElement};
use crate::protocol::{
    map_shards, polarizer_axis, shard_ranges, MuStream, PolarizerAngle, Setting,
};

/// Trials are summed in blocks of this size aligned to the global trial index;
/// block sums are then combined in block order. Any sharding on block
/// boundaries therefore reproduces the single-threaded sum bit for bit.
pub const BLOCK_TRIALS: u64 = 4096;

/// Average of n trial values in the even subalgebra.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CorrelationEstimate {
    pub scalar_mean: f64,
    /// Coefficients of `e_y∧e_z`, `e_z∧e_x`, `e_x∧e_y`.
    pub bivector_mean: [f64; 3],
    pub trial_count: u64,
    /// Standard error of the bivector channel, `1/√n`. The scalar channel has none.
    pub standard_error: f64,
}

impl CorrelationEstimate {
    pub fn from_sum(sum: &EvenElement, trial_count: u64) -> Self {
        let mean = sum.scale(1.0 / trial_count as f64);
        CorrelationEstimate {
            scalar_mean: mean.s,
            bivector_mean: [mean.b_yz, mean.b_zx, mean.b_xy],
            trial_count,
            standard_error: 1.0 / (trial_count as f64).sqrt(),
        }
    }

    pub fn mean(&self) -> EvenElement {
        let [yz, zx, xy] = self.bivector_mean;
        EvenElement::new(self.scalar_mean, yz, zx, xy)
    }

    pub fn bivector_norm(&self) -> f64 {
        let [yz, zx, xy] = self.bivector_mean;
        (yz * yz + zx * zx + xy * xy).sqrt()
    }

    /// Norm of the whole averaged element.
    pub fn norm(&self) -> f64 {
        self.mean().norm()
    }

    /// Count-weighted combination of two estimates over disjoint trials.
    pub fn merge(&self, other: &CorrelationEstimate) -> CorrelationEstimate {
        let (n1, n2) = (self.trial_count as f64, other.trial_count as f64);
        let sum = self.mean().scale(n1) + other.mean().scale(n2);
        CorrelationEstimate::from_sum(&sum, self.trial_count + other.trial_count)
    }
}

/// Compensated (Neumaier) running sum of even elements.
#[derive(Clone, Copy, Debug, Default)]
pub struct EvenSum {
    sum: [f64; 4],
    compensation: [f64; 4],
    count: u64,
}

fn neumaier(sum: &mut f64, compensation: &mut f64, x: f64) {
    let t = *sum + x;
    if sum.abs() >= x.abs() {
        *compensation += (*sum - t) + x;
    } else {
        *compensation += (x - t) + *sum;
    }
    *sum = t;
}

impl EvenSum {
    pub fn push(&mut self, q: &EvenElement) {
        for ((s, c), x) in self
            .sum
            .iter_mut()
            .zip(self.compensation.iter_mut())
            .zip(q.to_array())
        {
            neumaier(s, c, x);
        }
        self.count += 1;
    }

    pub fn merge(&mut self, other: &EvenSum) {
        for i in 0..4 {
            neumaier(&mut self.sum[i], &mut self.compensation[i], other.sum[i]);
            neumaier(
                &mut self.sum[i],
                &mut self.compensation[i],
                other.compensation[i],
            );
        }
        self.count += other.count;
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn total(&self) -> EvenElement {
        let mut out = [0.0; 4];
        for (o, (s, c)) in out
            .iter_mut()
            .zip(self.sum.iter().zip(self.compensation.iter()))
        {
            *o = s + c;
        }
        EvenElement::from_array(out)
    }

    pub fn estimate(&self) -> Result<CorrelationEstimate> {
        if self.count == 0 {
            return Err(Error::ZeroTrials);
        }
        Ok(CorrelationEstimate::from_sum(&self.total(), self.count))
    }
}

/// Block-ordered sum of `value(i, μ_i)` over trials `0..n`.
fn block_sum<F>(n: u64, seed: u64, threads: usize, value: F) -> Result<EvenSum>
where
    F: Fn(u64, crate::ga::Handedness) -> Result<EvenElement> + Sync,
{
    if n == 0 {
        return Err(Error::ZeroTrials);
    }
    let ranges = shard_ranges(n, threads, BLOCK_TRIALS);
    let shards = map_shards(&ranges, |range| -> Result<Vec<EvenSum>> {
        let mut blocks = Vec::new();
        let mut stream = MuStream::at(seed, range.start);
        let mut start = range.start;
        while start < range.end {
            let end = (start + BLOCK_TRIALS).min(range.end);
            let mut block = EvenSum::default();
            for i in start..end {
                block.push(&value(i, stream.next_mu())?);
            }
            blocks.push(block);
            start = end;
        }
        Ok(blocks)
    });
    let mut total = EvenSum::default();
    for shard in shards {
        for block in shard? {
            total.merge(&block);
        }
    }
    Ok(total)
}

/// Average of Alice's outcome `A(θ, μⁱ)` over n draws. The limit is 0.
pub fn single_expectation(theta: PolarizerAngle, n: u64, seed: u64) -> Result<CorrelationEstimate> {
    single_expectation_sharded(theta, n, seed, 1)
}

pub fn single_expectation_sharded(
    theta: PolarizerAngle,
    n: u64,
    seed: u64,
    threads: usize,
) -> Result<CorrelationEstimate> {
    if !theta.is_finite() {
        return Err(Error::NonFinite("polarizer angle"));
    }
    let axis = polarizer_axis(theta);
    block_sum(n, seed, threads, |_, mu| Ok(mu_dot(mu, axis)))?.estimate()
}

/// Average of the joint products `A(α, μⁱ) B(β, μⁱ)` over n trials.
///
/// The scalar channel is `cos 2(α−β)` in every trial; only the `e_x∧e_y`
/// channel averages toward zero.
pub fn joint_expectation(
    alpha: PolarizerAngle,
    beta: PolarizerAngle,
    n: u64,
    seed: u64,
) -> Result<CorrelationEstimate> {
    joint_expectation_sharded(alpha, beta, n, seed, 1)
}

pub fn joint_expectation_sharded(
    alpha: PolarizerAngle,
    beta: PolarizerAngle,
    n: u64,
    seed: u64,
    threads: usize,
) -> Result<CorrelationEstimate> {
    if !(alpha.is_finite() && beta.is_finite()) {
        return Err(Error::NonFinite("polarizer angle"));
    }
    let setting = Setting::new(alpha, beta);
    block_sum(n, seed, threads, |i, mu| Ok(setting.trial(i, mu)?.product))?.estimate()
}

/// `cos 2(α−β)`.
pub fn quantum_reference(alpha: PolarizerAngle, beta: PolarizerAngle) -> f64 {
    (2.0 * (alpha.radians() - beta.radians())).cos()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChshSettings {
    pub alpha: PolarizerAngle,
    pub alpha_prime: PolarizerAngle,
    pub beta: PolarizerAngle,
    pub beta_prime: PolarizerAngle,
}

impl ChshSettings {
    pub fn from_degrees(alpha: f64, alpha_prime: f64, beta: f64, beta_prime: f64) -> Self {
        ChshSettings {
            alpha: PolarizerAngle::from_degrees(alpha),
            alpha_prime: PolarizerAngle::from_degrees(alpha_prime),
            beta: PolarizerAngle::from_degrees(beta),
            beta_prime: PolarizerAngle::from_degrees(beta_prime),
        }
    }

    pub fn is_finite(&self) -> bool {
        [self.alpha, self.alpha_prime, self.beta, self.beta_prime]
            .iter()
            .all(|a| a.is_finite())
    }

    /// The four setting pairs in the order `(α,β), (α,β′), (α′,β), (α′,β′)`.
    pub fn pairs(&self) -> [(PolarizerAngle, PolarizerAngle); 4] {
        [
            (self.alpha, self.beta),
            (self.alpha, self.beta_prime),
            (self.alpha_prime, self.beta),
            (self.alpha_prime, self.beta_prime),
        ]
    }
}

/// `|E(α,β) + E(α,β′) + E(α′,β) − E(α′,β′)|` from the four correlations in
/// [`ChshSettings::pairs`] order.
pub fn chsh_combination(terms: [f64; 4]) -> f64 {
    (terms[0] + terms[1] + terms[2] - terms[3]).abs()
}

pub fn chsh_value<F>(settings: &ChshSettings, mut correlation: F) -> f64
where
    F: FnMut(PolarizerAngle, PolarizerAngle) -> f64,
{
    chsh_combination(settings.pairs().map(|(a, b)| correlation(a, b)))
}

/// Grid `{k·step : 0 ≤ k·step < π}`; always contains 0.
pub fn angle_grid(step: f64) -> Result<Vec<PolarizerAngle>> {
    if !step.is_finite() || step <= 0.0 {
        return Err(Error::NonPositiveResolution(step));
    }
    let count = ((PI / step) - 1e-9).ceil().max(1.0) as usize;
    Ok((0..count)
        .map(|k| PolarizerAngle::from_radians(k as f64 * step))
        .collect())
}

/// Exhaustive search of the CHSH combination over all quadruples of the grid
/// `[0, π)` with spacing `resolution` (radians). Ties keep the first quadruple
/// in `(α, α′, β, β′)` lexicographic grid order.
pub fn chsh_maximize<F>(resolution: f64, mut correlation: F) -> Result<(ChshSettings, f64)>
where
    F: FnMut(PolarizerAngle, PolarizerAngle) -> f64,
{
    let grid = angle_grid(resolution)?;
    let n = grid.len();
    let table: Vec<f64> = grid
        .iter()
        .flat_map(|&a| grid.iter().map(move |&b| (a, b)))
        .map(|(a, b)| correlation(a, b))
        .collect();
    let row = |i: usize| &table[i * n..(i + 1) * n];

    // For fixed (α, α′) the combination is |u(β) + v(β′)| with
    // u = E(α,·) + E(α′,·) and v = E(α,·) − E(α′,·), maximized by the extremes.
    let mut best = (f64::NEG_INFINITY, [0usize; 4]);
    let mut u = vec![0.0; n];
    let mut v = vec![0.0; n];
    for a in 0..n {
        for ap in 0..n {
            let (ra, rap) = (row(a), row(ap));
            for j in 0..n {
                u[j] = ra[j] + rap[j];
                v[j] = ra[j] - rap[j];
            }
            let (umax, umin) = extremes(&u);
            let (vmax, vmin) = extremes(&v);
            let (high, low) = (u[umax] + v[vmax], -(u[umin] + v[vmin]));
            let (value, b, bp) = if high >= low {
                (high, umax, vmax)
            } else {
                (low, umin, vmin)
            };
            if value > best.0 {
                best = (value, [a, ap, b, bp]);
            }
        }
    }
    let [a, ap, b, bp] = best.1;
    let settings = ChshSettings {
        alpha: grid[a],
        alpha_prime: grid[ap],
        beta: grid[b],
        beta_prime: grid[bp],
    };
    let value = chsh_combination([
        table[a * n + b],
        table[a * n + bp],
        table[ap * n + b],
        table[ap * n + bp],
    ]);
    Ok((settings, value))
}

/// Indices of the first maximum and first minimum.
fn extremes(xs: &[f64]) -> (usize, usize) {
    let (mut hi, mut lo) = (0, 0);
    for (i, &x) in xs.iter().enumerate() {
        if x > xs[hi] {
            hi = i;
        }
        if x < xs[lo] {
            lo = i;
        }
    }
    (hi, lo)
}
