//! Exact jump-chain simulation of chain trajectories, additive
//! functionals, and CLT statistics for the rescaled functional.
//!
//! Every path owns an independent ChaCha stream keyed by
//! `(seed, path_index)`, so ensembles are reproducible and independent
//! of thread count.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use statrs::distribution::{ContinuousCDF, Normal};

use crate::chain::{MarkovChain, Observable};
use crate::error::{Error, Result};
use crate::martingale::sigma_squared;

/// A piecewise-constant trajectory: `states[i]` is occupied on
/// `[jump_times[i-1], jump_times[i])`, the last state up to `horizon`.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub states: Vec<usize>,
    pub jump_times: Vec<f64>,
    pub horizon: f64,
}

impl Trajectory {
    /// Visit each segment as `(state, length)`.
    pub fn segments(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        let starts = std::iter::once(0.0).chain(self.jump_times.iter().copied());
        let ends = self
            .jump_times
            .iter()
            .copied()
            .chain(std::iter::once(self.horizon));
        self.states
            .iter()
            .copied()
            .zip(starts.zip(ends).map(|(a, b)| b - a))
    }

    pub fn start_state(&self) -> usize {
        self.states[0]
    }

    pub fn end_state(&self) -> usize {
        *self.states.last().unwrap()
    }
}

/// Per-path RNG stream: a single ChaCha key with the path index as the
/// stream number.
pub fn path_rng(seed: u64, path_index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(path_index);
    rng
}

fn sample_discrete<R: Rng>(weights: impl Iterator<Item = f64> + Clone, rng: &mut R) -> usize {
    let total: f64 = weights.clone().sum();
    let target = rng.gen::<f64>() * total;
    let mut acc = 0.0;
    let mut last = 0;
    for (i, w) in weights.enumerate() {
        acc += w;
        last = i;
        if target < acc {
            return i;
        }
    }
    last
}

/// Simulate one stationary-start trajectory up to `horizon`.
///
/// Holding times are exponential with rate `-Q[i][i]`; the next state is
/// chosen with probability `Q[i][j] / (-Q[i][i])`.
pub fn sample_path(chain: &MarkovChain, horizon: f64, seed: u64) -> Result<Trajectory> {
    sample_path_indexed(chain, horizon, seed, 0)
}

/// Same as [`sample_path`] but on the RNG stream for `path_index`.
pub fn sample_path_indexed(
    chain: &MarkovChain,
    horizon: f64,
    seed: u64,
    path_index: u64,
) -> Result<Trajectory> {
    if !(horizon > 0.0) {
        return Err(Error::BadParams(format!("horizon = {horizon}")));
    }
    let mut rng = path_rng(seed, path_index);
    let n = chain.n();
    let q = chain.generator();
    let mut state = sample_discrete(chain.stationary().iter().copied(), &mut rng);
    let mut states = vec![state];
    let mut jump_times = Vec::new();
    let mut t = 0.0;
    loop {
        let rate = -q[(state, state)];
        if !(rate > 0.0) {
            return Err(Error::NumericalBreakdown(format!(
                "absorbing state {state} encountered"
            )));
        }
        // 1 - U is in (0, 1], so the log is finite
        let u: f64 = rng.gen();
        t += -(1.0 - u).ln() / rate;
        if t >= horizon {
            break;
        }
        let next = sample_discrete(
            (0..n).map(|j| if j == state { 0.0 } else { q[(state, j)] }),
            &mut rng,
        );
        jump_times.push(t);
        states.push(next);
        state = next;
    }
    Ok(Trajectory {
        states,
        jump_times,
        horizon,
    })
}

/// `∫₀ᵀ f(η_s) ds`, exact on the piecewise-constant path.
pub fn additive_functional(traj: &Trajectory, f: &Observable) -> Result<f64> {
    let needed = traj.states.iter().copied().max().unwrap_or(0) + 1;
    if f.len() < needed {
        return Err(Error::DimensionMismatch {
            expected: needed,
            got: f.len(),
        });
    }
    Ok(traj
        .segments()
        .map(|(state, len)| f.values[state] * len)
        .sum())
}

/// Standardized samples of the rescaled additive functional and their
/// distance to the standard normal law.
#[derive(Debug, Clone, Serialize)]
pub struct CltReport {
    pub samples: Vec<f64>,
    pub ks_distance: f64,
    pub mean: f64,
    pub variance: f64,
}

/// Sup-norm distance between the empirical CDF of `samples` and `Φ`.
pub fn ks_distance_to_normal(samples: &[f64]) -> f64 {
    let normal = Normal::new(0.0, 1.0).unwrap();
    let mut sorted = samples.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = sorted.len() as f64;
    let mut d: f64 = 0.0;
    for (i, x) in sorted.iter().enumerate() {
        let cdf = normal.cdf(*x);
        d = d.max((i as f64 + 1.0) / n - cdf).max(cdf - i as f64 / n);
    }
    d
}

/// KS critical value at the 5% level (asymptotic).
pub fn ks_critical_5pct(m: usize) -> f64 {
    1.36 / (m as f64).sqrt()
}

/// KS critical value at the 1% level (asymptotic).
pub fn ks_critical_1pct(m: usize) -> f64 {
    1.63 / (m as f64).sqrt()
}

/// Draw `n_paths` samples of `σ⁻¹ N^{-1/2} ∫₀^N f(η_s) ds` and compare
/// their empirical law with the standard normal.
pub fn clt_statistics(
    chain: &MarkovChain,
    f: &Observable,
    n_horizon: f64,
    n_paths: usize,
    seed: u64,
) -> Result<CltReport> {
    let dec = crate::calculus::decompose(chain)?;
    let var = sigma_squared(chain, &dec, f)?;
    let sigma2 = var.sigma2_resolvent;
    if sigma2 <= 1e-12 {
        return Err(Error::SigmaZero(sigma2));
    }
    let sigma = sigma2.sqrt();
    let samples: Vec<f64> = (0..n_paths as u64)
        .into_par_iter()
        .map(|i| {
            let traj = sample_path_indexed(chain, n_horizon, seed, i)?;
            Ok(additive_functional(&traj, f)? / (sigma * n_horizon.sqrt()))
        })
        .collect::<Result<Vec<_>>>()?;
    let n = samples.len() as f64;
    // fixed-order reductions: parallel generation, sequential sums
    let mean = samples.iter().sum::<f64>() / n;
    let variance = samples.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    let ks_distance = ks_distance_to_normal(&samples);
    Ok(CltReport {
        samples,
        ks_distance,
        mean,
        variance,
    })
}
