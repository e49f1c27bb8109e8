//! The asymptotic variance σ², the corrector u₀, and the approximating
//! martingale `M(t) = u₀(η_t) - u₀(η_0) + ∫₀ᵗ f(η_s) ds`.
//!
//! The martingale is evaluated through the corrector form, which is
//! exact on piecewise-constant paths; there is no time-discretization
//! bias anywhere in this module.

use rayon::prelude::*;
use serde::Serialize;

use crate::calculus::{u_zero, OperatorDecomposition};
use crate::chain::{MarkovChain, Observable};
use crate::error::{Error, Result};
use crate::simulate::{sample_path_indexed, Trajectory};

/// σ² by its two algebraic routes, `2(u₀, f)` and `2‖S^{1/2}u₀‖²`.
#[derive(Debug, Clone, Serialize)]
pub struct VarianceReport {
    pub sigma2_resolvent: f64,
    pub sigma2_spectral: f64,
    pub w_norm2: f64,
    pub consistency_gap: f64,
}

pub fn sigma_squared(
    chain: &MarkovChain,
    dec: &OperatorDecomposition,
    f: &Observable,
) -> Result<VarianceReport> {
    let u0 = u_zero(chain, f)?;
    let sigma2_resolvent = 2.0 * chain.inner(&u0, f)?;
    let w = Observable::new(&dec.s_half * &u0.values);
    let w_norm2 = chain.inner(&w, &w)?;
    let sigma2_spectral = 2.0 * w_norm2;
    Ok(VarianceReport {
        sigma2_resolvent,
        sigma2_spectral,
        w_norm2,
        consistency_gap: (sigma2_resolvent - sigma2_spectral).abs(),
    })
}

/// Martingale values along one trajectory, at jump times plus horizon.
#[derive(Debug, Clone)]
pub struct MartingalePath {
    pub times: Vec<f64>,
    pub m: Vec<f64>,
    pub corrector_start: f64,
    pub corrector_end: f64,
    pub integral_f: f64,
}

impl MartingalePath {
    pub fn m_final(&self) -> f64 {
        *self.m.last().unwrap()
    }
}

/// Evaluate `M` along `traj` using a precomputed corrector `u0`
/// (the centered solution of `-Q u₀ = f`).
pub fn martingale_path(
    chain: &MarkovChain,
    f: &Observable,
    u0: &Observable,
    traj: &Trajectory,
) -> Result<MartingalePath> {
    let n = chain.n();
    if f.len() != n || u0.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: f.len().max(u0.len()),
        });
    }
    if traj.states.iter().any(|&s| s >= n) {
        return Err(Error::PathChainMismatch(format!(
            "state index out of range for an {n}-state chain"
        )));
    }
    let start = traj.start_state();
    let mut times = Vec::with_capacity(traj.jump_times.len() + 2);
    let mut m = Vec::with_capacity(traj.jump_times.len() + 2);
    times.push(0.0);
    m.push(0.0);
    let mut integral = 0.0;
    let mut prev_t = 0.0;
    for (i, &jt) in traj.jump_times.iter().enumerate() {
        integral += f.values[traj.states[i]] * (jt - prev_t);
        prev_t = jt;
        let state = traj.states[i + 1];
        times.push(jt);
        m.push(u0.values[state] - u0.values[start] + integral);
    }
    integral += f.values[traj.end_state()] * (traj.horizon - prev_t);
    times.push(traj.horizon);
    m.push(u0.values[traj.end_state()] - u0.values[start] + integral);
    Ok(MartingalePath {
        times,
        m,
        corrector_start: u0.values[start],
        corrector_end: u0.values[traj.end_state()],
        integral_f: integral,
    })
}

/// Monte Carlo check of `E[M(t)²] = σ² t` and `E[M(t)] = 0`.
#[derive(Debug, Clone, Serialize)]
pub struct VarianceCheckReport {
    pub horizon: f64,
    pub n_paths: usize,
    pub sigma2: f64,
    pub m2_mean: f64,
    pub m2_se: f64,
    pub m2_z: f64,
    pub m_mean: f64,
    pub m_se: f64,
    pub m_z: f64,
    pub verdict: bool,
}

fn moments(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

pub fn variance_check(
    chain: &MarkovChain,
    dec: &OperatorDecomposition,
    f: &Observable,
    horizon: f64,
    n_paths: usize,
    seed: u64,
) -> Result<VarianceCheckReport> {
    if n_paths < 100 {
        return Err(Error::BadParams(format!("n_paths = {n_paths} < 100")));
    }
    let sigma2 = sigma_squared(chain, dec, f)?.sigma2_resolvent;
    let u0 = u_zero(chain, f)?;
    let finals: Vec<f64> = (0..n_paths as u64)
        .into_par_iter()
        .map(|i| {
            let traj = sample_path_indexed(chain, horizon, seed, i)?;
            Ok(martingale_path(chain, f, &u0, &traj)?.m_final())
        })
        .collect::<Result<Vec<_>>>()?;
    let (m_mean, m_se) = moments(&finals);
    let squares: Vec<f64> = finals.iter().map(|x| x * x).collect();
    let (m2_mean, m2_se) = moments(&squares);
    let m2_z = (m2_mean - sigma2 * horizon) / m2_se.max(f64::MIN_POSITIVE);
    let m_z = m_mean / m_se.max(f64::MIN_POSITIVE);
    let verdict = m2_z.abs() <= 3.0 && m_z.abs() <= 3.0;
    Ok(VarianceCheckReport {
        horizon,
        n_paths,
        sigma2,
        m2_mean,
        m2_se,
        m2_z,
        m_mean,
        m_se,
        m_z,
        verdict,
    })
}

/// Monte Carlo check of `N⁻¹ E[(∫₀^N f - M(N))²] → 0`, against the
/// analytic ceiling `4‖u₀‖²/N`.
#[derive(Debug, Clone, Serialize)]
pub struct L2ErrorReport {
    pub n_horizon: f64,
    pub n_paths: usize,
    pub empirical: f64,
    pub se: f64,
    pub ceiling: f64,
    pub verdict: bool,
}

pub fn l2_error(
    chain: &MarkovChain,
    f: &Observable,
    n_horizon: f64,
    n_paths: usize,
    seed: u64,
) -> Result<L2ErrorReport> {
    if !(n_horizon > 0.0) {
        return Err(Error::BadParams(format!("N = {n_horizon}")));
    }
    let u0 = u_zero(chain, f)?;
    let diffs: Vec<f64> = (0..n_paths as u64)
        .into_par_iter()
        .map(|i| {
            let traj = sample_path_indexed(chain, n_horizon, seed, i)?;
            let mp = martingale_path(chain, f, &u0, &traj)?;
            // integral - M(N) telescopes to the corrector difference
            let d = mp.integral_f - mp.m_final();
            debug_assert!((d - (mp.corrector_start - mp.corrector_end)).abs() < 1e-10);
            Ok(d * d / n_horizon)
        })
        .collect::<Result<Vec<_>>>()?;
    let (empirical, se) = moments(&diffs);
    let u0_norm2 = chain.inner(&u0, &u0)?;
    let ceiling = 4.0 * u0_norm2 / n_horizon;
    Ok(L2ErrorReport {
        n_horizon,
        n_paths,
        empirical,
        se,
        ceiling,
        verdict: empirical <= ceiling + 3.0 * se,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calculus::decompose;
    use crate::chain::{make_example, ExampleFamily};
    use crate::simulate::sample_path;
    use approx::assert_abs_diff_eq;

    fn c2() -> (MarkovChain, Observable) {
        make_example(ExampleFamily::TwoState { a: 1.0, b: 1.0 }, 0).unwrap()
    }

    fn c3() -> (MarkovChain, Observable) {
        make_example(ExampleFamily::CycleDrift { n: 3 }, 0).unwrap()
    }

    #[test]
    fn sigma_squared_closed_forms() {
        let (chain, f) = c2();
        let dec = decompose(&chain).unwrap();
        let v = sigma_squared(&chain, &dec, &f).unwrap();
        assert_abs_diff_eq!(v.sigma2_resolvent, 1.0, epsilon = 1e-11);
        assert_abs_diff_eq!(v.sigma2_spectral, 1.0, epsilon = 1e-11);

        let (chain3, f3) = c3();
        let dec3 = decompose(&chain3).unwrap();
        let v3 = sigma_squared(&chain3, &dec3, &f3).unwrap();
        assert_abs_diff_eq!(v3.sigma2_resolvent, 2.0 / 3.0, epsilon = 1e-11);
        assert_abs_diff_eq!(v3.sigma2_spectral, 2.0 / 3.0, epsilon = 1e-11);

        let z = sigma_squared(&chain, &dec, &Observable::zeros(2)).unwrap();
        assert!(z.sigma2_resolvent.abs() < 1e-14);
    }

    #[test]
    fn sigma_routes_agree_on_random_chains() {
        for seed in 0..20 {
            let fam = if seed % 2 == 0 {
                ExampleFamily::RandomReversible { n: 3 + (seed as usize % 8) }
            } else {
                ExampleFamily::RandomGeneral { n: 3 + (seed as usize % 8) }
            };
            let (chain, f) = make_example(fam, seed).unwrap();
            let dec = decompose(&chain).unwrap();
            let v = sigma_squared(&chain, &dec, &f).unwrap();
            let f2 = chain.inner(&f, &f).unwrap();
            assert!(v.sigma2_resolvent >= -1e-10);
            assert!(v.consistency_gap <= 1e-8 * f2.max(1.0), "gap = {}", v.consistency_gap);
        }
    }

    #[test]
    fn martingale_constant_path() {
        let (chain, f) = c2();
        let u0 = u_zero(&chain, &f).unwrap();
        let traj = Trajectory {
            states: vec![0],
            jump_times: vec![],
            horizon: 4.0,
        };
        let mp = martingale_path(&chain, &f, &u0, &traj).unwrap();
        assert_abs_diff_eq!(mp.m_final(), 4.0 * f.values[0], epsilon = 1e-12);
        assert_eq!(mp.m[0], 0.0);
    }

    #[test]
    fn martingale_zero_f() {
        let (chain, f) = c2();
        let _ = f;
        let z = Observable::zeros(2);
        let u0 = u_zero(&chain, &z).unwrap();
        let traj = sample_path(&chain, 10.0, 3).unwrap();
        let mp = martingale_path(&chain, &z, &u0, &traj).unwrap();
        assert!(mp.m.iter().all(|x| x.abs() < 1e-14));
    }

    #[test]
    fn martingale_two_segment_path() {
        let (chain, f) = c2();
        let u0 = u_zero(&chain, &f).unwrap();
        let traj = Trajectory {
            states: vec![0, 1],
            jump_times: vec![0.3],
            horizon: 1.0,
        };
        let mp = martingale_path(&chain, &f, &u0, &traj).unwrap();
        // integral = 0.3 - 0.7 = -0.4; M(1) = u0(2) - u0(1) - 0.4 = -1.4
        assert_abs_diff_eq!(mp.integral_f, -0.4, epsilon = 1e-14);
        assert_abs_diff_eq!(mp.m_final(), -1.4, epsilon = 1e-12);
    }

    #[test]
    fn pathwise_identity_exact() {
        let (chain, f) = make_example(ExampleFamily::RandomGeneral { n: 5 }, 37).unwrap();
        let u0 = u_zero(&chain, &f).unwrap();
        for i in 0..50 {
            let traj = sample_path_indexed(&chain, 25.0, 4, i).unwrap();
            let mp = martingale_path(&chain, &f, &u0, &traj).unwrap();
            let lhs = mp.integral_f - mp.m_final();
            let rhs = mp.corrector_start - mp.corrector_end;
            assert!((lhs - rhs).abs() <= 1e-10 * 25.0 * chain.norm(&f).unwrap().max(1.0));
        }
    }

    #[test]
    fn variance_check_two_state() {
        let (chain, f) = c2();
        let dec = decompose(&chain).unwrap();
        let rep = variance_check(&chain, &dec, &f, 10.0, 10_000, 1).unwrap();
        assert!(rep.verdict, "z_m2 = {}, z_m = {}", rep.m2_z, rep.m_z);
        assert!((rep.m2_mean / 10.0 - 1.0).abs() <= 3.0 * rep.m2_se / 10.0);
    }

    #[test]
    fn variance_check_cycle() {
        let (chain, f) = c3();
        let dec = decompose(&chain).unwrap();
        let rep = variance_check(&chain, &dec, &f, 20.0, 10_000, 2).unwrap();
        assert!(rep.verdict, "z_m2 = {}, z_m = {}", rep.m2_z, rep.m_z);
    }

    #[test]
    fn variance_check_rejects_tiny_ensembles() {
        let (chain, f) = c2();
        let dec = decompose(&chain).unwrap();
        assert!(variance_check(&chain, &dec, &f, 1.0, 10, 0).is_err());
    }

    #[test]
    fn l2_error_two_state() {
        let (chain, f) = c2();
        let rep = l2_error(&chain, &f, 100.0, 4000, 5).unwrap();
        assert!(rep.verdict);
        assert_abs_diff_eq!(rep.ceiling, 0.01, epsilon = 1e-12);
    }

    #[test]
    fn l2_error_halves_with_doubled_horizon() {
        let (chain, f) = c2();
        let a = l2_error(&chain, &f, 50.0, 4000, 6).unwrap();
        let b = l2_error(&chain, &f, 400.0, 4000, 6).unwrap();
        // slope -1 on log-log up to Monte Carlo noise
        let ratio = a.empirical / b.empirical;
        assert!(ratio > 4.0 && ratio < 16.0, "ratio = {ratio}");
    }

    #[test]
    fn martingale_increment_orthogonality() {
        let (chain, f) = c2();
        let u0 = u_zero(&chain, &f).unwrap();
        let (t1, t2) = (5.0, 10.0);
        let n_paths = 10_000u64;
        let mut m1s = Vec::new();
        let mut incs = Vec::new();
        for i in 0..n_paths {
            let traj = sample_path_indexed(&chain, t2, 8, i).unwrap();
            let mp = martingale_path(&chain, &f, &u0, &traj).unwrap();
            // M at t1 by interpolation: last jump index before t1
            let idx = mp.times.iter().rposition(|&t| t <= t1).unwrap();
            let state = traj.states[idx.min(traj.states.len() - 1)];
            let partial: f64 = traj
                .segments()
                .scan(0.0, |acc, (s, len)| {
                    let start = *acc;
                    *acc += len;
                    Some((s, start, *acc))
                })
                .map(|(s, start, end)| f.values[s] * (end.min(t1) - start.min(t1)).max(0.0))
                .sum();
            let m_t1 = u0.values[state] - u0.values[traj.start_state()] + partial;
            m1s.push(m_t1);
            incs.push(mp.m_final() - m_t1);
        }
        let n = n_paths as f64;
        let mean1 = m1s.iter().sum::<f64>() / n;
        let mean2 = incs.iter().sum::<f64>() / n;
        let cov: f64 = m1s
            .iter()
            .zip(&incs)
            .map(|(a, b)| (a - mean1) * (b - mean2))
            .sum::<f64>()
            / (n - 1.0);
        let prods: Vec<f64> = m1s
            .iter()
            .zip(&incs)
            .map(|(a, b)| (a - mean1) * (b - mean2))
            .collect();
        let (_, se) = {
            let m = prods.iter().sum::<f64>() / n;
            let v = prods.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (n - 1.0);
            (m, (v / n).sqrt())
        };
        assert!(cov.abs() <= 3.0 * se, "cov = {cov}, se = {se}");
    }
}
