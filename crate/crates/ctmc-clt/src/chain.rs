//! Finite-state continuous-time Markov chains and the L²(π) geometry.
//!
//! A chain is a generator matrix `Q` (nonnegative off-diagonal jump rates,
//! zero row sums) together with its stationary distribution `π`, computed
//! as the normalized left null vector of `Q`. Observables are real
//! functions on states; the inner product is `(φ, ψ) = Σ_i π_i φ_i ψ_i`.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative tolerance for generator row sums and off-diagonal sign checks.
pub const GENERATOR_TOL: f64 = 1e-12;
/// Relative tolerance for the stationarity residual `πᵀQ = 0`.
pub const STATIONARITY_TOL: f64 = 1e-10;
/// Relative singular-value gap required for a one-dimensional null space.
pub const NULLSPACE_GAP_TOL: f64 = 1e-9;
/// Edges below this relative magnitude are ignored by the connectivity check.
pub const EDGE_TOL: f64 = 1e-14;

/// An irreducible finite-state continuous-time Markov chain.
#[derive(Debug, Clone)]
pub struct MarkovChain {
    n: usize,
    q: DMatrix<f64>,
    pi: DVector<f64>,
}

/// A real function on states, viewed as an element of L²(π).
#[derive(Debug, Clone, PartialEq)]
pub struct Observable {
    pub values: DVector<f64>,
}

impl Observable {
    pub fn new(values: DVector<f64>) -> Self {
        Self { values }
    }

    pub fn from_slice(values: &[f64]) -> Self {
        Self {
            values: DVector::from_row_slice(values),
        }
    }

    pub fn zeros(n: usize) -> Self {
        Self {
            values: DVector::zeros(n),
        }
    }

    /// The constant function 1.
    pub fn ones(n: usize) -> Self {
        Self {
            values: DVector::from_element(n, 1.0),
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

fn check_dim(n: usize, got: usize) -> Result<()> {
    if n != got {
        return Err(Error::DimensionMismatch {
            expected: n,
            got,
        });
    }
    Ok(())
}

/// Strong connectivity of the directed graph of positive off-diagonal
/// entries, by forward and backward reachability from state 0.
fn strongly_connected(q: &DMatrix<f64>, edge_tol: f64) -> bool {
    let n = q.nrows();
    let reach = |transpose: bool| -> usize {
        let mut seen = vec![false; n];
        let mut stack = vec![0usize];
        seen[0] = true;
        let mut count = 1;
        while let Some(i) = stack.pop() {
            for j in 0..n {
                if i == j || seen[j] {
                    continue;
                }
                let rate = if transpose { q[(j, i)] } else { q[(i, j)] };
                if rate > edge_tol {
                    seen[j] = true;
                    count += 1;
                    stack.push(j);
                }
            }
        }
        count
    };
    reach(false) == n && reach(true) == n
}

/// Construct a validated chain from a rate matrix, computing π as the
/// normalized left null vector of `Q`.
pub fn build_chain(q: DMatrix<f64>) -> Result<MarkovChain> {
    let n = q.nrows();
    if n < 2 || q.ncols() != n {
        return Err(Error::NotAGenerator(format!(
            "need a square matrix with n >= 2, got {}x{}",
            n,
            q.ncols()
        )));
    }
    let scale = q.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if !scale.is_finite() || scale == 0.0 {
        return Err(Error::NotAGenerator("zero or non-finite rates".into()));
    }
    for i in 0..n {
        let mut row_sum = 0.0;
        for j in 0..n {
            if i != j && q[(i, j)] < -GENERATOR_TOL * scale {
                return Err(Error::NotAGenerator(format!(
                    "negative off-diagonal entry Q[{i}][{j}] = {}",
                    q[(i, j)]
                )));
            }
            row_sum += q[(i, j)];
        }
        if row_sum.abs() > GENERATOR_TOL * scale {
            return Err(Error::NotAGenerator(format!(
                "row {i} sums to {row_sum:.3e}"
            )));
        }
    }
    if !strongly_connected(&q, EDGE_TOL * scale) {
        return Err(Error::Reducible(
            "positive-rate graph is not strongly connected".into(),
        ));
    }

    // π solves Qᵀπ = 0: the right singular vector of Qᵀ for the smallest
    // singular value. The null space must be one-dimensional.
    let svd = q.transpose().svd(true, true);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        svd.singular_values[a]
            .partial_cmp(&svd.singular_values[b])
            .unwrap()
    });
    let smallest = svd.singular_values[order[0]];
    let second = svd.singular_values[order[1]];
    if smallest > NULLSPACE_GAP_TOL * scale || second < NULLSPACE_GAP_TOL * scale {
        return Err(Error::DegenerateStationary(format!(
            "singular values near zero: {smallest:.3e}, {second:.3e}"
        )));
    }
    let v_t = svd
        .v_t
        .as_ref()
        .ok_or_else(|| Error::NumericalBreakdown("SVD returned no V factor".into()))?;
    let mut pi = v_t.row(order[0]).transpose();
    let total: f64 = pi.iter().sum();
    if total < 0.0 {
        pi.neg_mut();
    }
    let total: f64 = pi.iter().sum();
    pi /= total;
    for (i, p) in pi.iter().enumerate() {
        if !(*p > 0.0) {
            return Err(Error::DegenerateStationary(format!(
                "pi[{i}] = {p:.3e} is not strictly positive"
            )));
        }
    }
    // Stationarity residual check.
    let residual = (q.transpose() * &pi).amax();
    if residual > STATIONARITY_TOL * scale {
        return Err(Error::DegenerateStationary(format!(
            "stationarity residual {residual:.3e}"
        )));
    }
    Ok(MarkovChain { n, q, pi })
}

impl MarkovChain {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn generator(&self) -> &DMatrix<f64> {
        &self.q
    }

    pub fn stationary(&self) -> &DVector<f64> {
        &self.pi
    }

    /// `(φ, ψ) = Σ_i π_i φ_i ψ_i`.
    pub fn inner(&self, phi: &Observable, psi: &Observable) -> Result<f64> {
        check_dim(self.n, phi.len())?;
        check_dim(self.n, psi.len())?;
        Ok((0..self.n)
            .map(|i| self.pi[i] * phi.values[i] * psi.values[i])
            .sum())
    }

    /// L²(π) norm.
    pub fn norm(&self, phi: &Observable) -> Result<f64> {
        Ok(self.inner(phi, phi)?.sqrt())
    }

    /// Subtract the π-mean: the result is orthogonal to the constants.
    pub fn center(&self, g: &Observable) -> Result<Observable> {
        check_dim(self.n, g.len())?;
        let mean: f64 = (0..self.n).map(|i| self.pi[i] * g.values[i]).sum();
        Ok(Observable::new(g.values.add_scalar(-mean)))
    }

    /// Holds iff `π_i Q_ij = π_j Q_ji` for all pairs.
    pub fn is_reversible(&self, tol: f64) -> bool {
        let scale = self.q.amax();
        for i in 0..self.n {
            for j in (i + 1)..self.n {
                let flux = self.pi[i] * self.q[(i, j)] - self.pi[j] * self.q[(j, i)];
                if flux.abs() > tol * scale {
                    return false;
                }
            }
        }
        true
    }

    pub fn check_centered(&self, f: &Observable, tol: f64) -> Result<()> {
        let mean = self.inner(f, &Observable::ones(self.n))?;
        let scale = self.norm(f)?.max(1.0);
        if mean.abs() > tol * scale {
            return Err(Error::NotCentered(mean.abs()));
        }
        Ok(())
    }
}

/// Built-in chain families used throughout the tests and examples.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ExampleFamily {
    /// Two states with rates `a` (1→2) and `b` (2→1).
    TwoState { a: f64, b: f64 },
    /// Unidirectional cycle on `n` states with unit rates (non-reversible).
    CycleDrift { n: usize },
    /// Random chain satisfying detailed balance, drawn from a random π
    /// and symmetric conductances.
    RandomReversible { n: usize },
    /// Random chain with i.i.d. positive off-diagonal rates.
    RandomGeneral { n: usize },
}

/// Build a chain plus a centered observable; deterministic given `seed`.
pub fn make_example(family: ExampleFamily, seed: u64) -> Result<(MarkovChain, Observable)> {
    match family {
        ExampleFamily::TwoState { a, b } => {
            if !(a > 0.0 && b > 0.0) {
                return Err(Error::BadParams(format!("rates must be positive: a={a}, b={b}")));
            }
            let q = DMatrix::from_row_slice(2, 2, &[-a, a, b, -b]);
            let chain = build_chain(q)?;
            let f = chain.center(&Observable::from_slice(&[1.0, -1.0]))?;
            Ok((chain, f))
        }
        ExampleFamily::CycleDrift { n } => {
            if n < 3 {
                return Err(Error::BadParams(format!("cycle needs n >= 3, got {n}")));
            }
            let mut q = DMatrix::zeros(n, n);
            for i in 0..n {
                q[(i, i)] = -1.0;
                q[(i, (i + 1) % n)] = 1.0;
            }
            let chain = build_chain(q)?;
            // linear ramp from 1 to -1; centered under the uniform π
            let ramp: Vec<f64> = (0..n)
                .map(|i| 1.0 - 2.0 * i as f64 / (n - 1) as f64)
                .collect();
            let f = chain.center(&Observable::from_slice(&ramp))?;
            Ok((chain, f))
        }
        ExampleFamily::RandomReversible { n } => {
            if n < 2 {
                return Err(Error::BadParams(format!("need n >= 2, got {n}")));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut pi: Vec<f64> = (0..n).map(|_| rng.gen_range(0.1..1.0)).collect();
            let total: f64 = pi.iter().sum();
            for p in &mut pi {
                *p /= total;
            }
            let mut q = DMatrix::zeros(n, n);
            for i in 0..n {
                for j in (i + 1)..n {
                    let c = rng.gen_range(0.1..1.0);
                    q[(i, j)] = c / pi[i];
                    q[(j, i)] = c / pi[j];
                }
            }
            for i in 0..n {
                q[(i, i)] = -q.row(i).sum();
            }
            let chain = build_chain(q)?;
            let f = random_centered_observable(&chain, &mut rng)?;
            Ok((chain, f))
        }
        ExampleFamily::RandomGeneral { n } => {
            if n < 2 {
                return Err(Error::BadParams(format!("need n >= 2, got {n}")));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut q = DMatrix::zeros(n, n);
            for i in 0..n {
                for j in 0..n {
                    if i != j {
                        q[(i, j)] = rng.gen_range(0.1..1.0);
                    }
                }
                q[(i, i)] = -q.row(i).sum() + q[(i, i)];
            }
            let chain = build_chain(q)?;
            let f = random_centered_observable(&chain, &mut rng)?;
            Ok((chain, f))
        }
    }
}

fn random_centered_observable(chain: &MarkovChain, rng: &mut ChaCha8Rng) -> Result<Observable> {
    let g: Vec<f64> = (0..chain.n()).map(|_| rng.gen_range(-1.0..1.0)).collect();
    chain.center(&Observable::from_slice(&g))
}

/// On-disk chain description: `{"Q": [[...],...], "f": [...], "pi": [...]?}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ChainSpec {
    #[serde(rename = "Q")]
    pub q: Vec<Vec<f64>>,
    pub f: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pi: Option<Vec<f64>>,
}

/// Tolerance for validating a user-supplied π against the computed one.
pub const PI_CHECK_TOL: f64 = 1e-8;

impl ChainSpec {
    /// Build and validate the chain; `f` is centered on load.
    pub fn realize(&self) -> Result<(MarkovChain, Observable)> {
        let n = self.q.len();
        for row in &self.q {
            check_dim(n, row.len())?;
        }
        let flat: Vec<f64> = self.q.iter().flatten().copied().collect();
        let chain = build_chain(DMatrix::from_row_slice(n, n, &flat))?;
        check_dim(n, self.f.len())?;
        let f = chain.center(&Observable::from_slice(&self.f))?;
        if let Some(pi) = &self.pi {
            check_dim(n, pi.len())?;
            for i in 0..n {
                if (pi[i] - chain.stationary()[i]).abs() > PI_CHECK_TOL {
                    return Err(Error::DegenerateStationary(format!(
                        "supplied pi[{i}] = {} disagrees with computed {}",
                        pi[i],
                        chain.stationary()[i]
                    )));
                }
            }
        }
        Ok((chain, f))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    pub(crate) fn two_state() -> (MarkovChain, Observable) {
        make_example(ExampleFamily::TwoState { a: 1.0, b: 1.0 }, 0).unwrap()
    }

    #[test]
    fn symmetric_two_state_pi() {
        let (chain, _) = two_state();
        assert_abs_diff_eq!(chain.stationary()[0], 0.5, epsilon = 1e-14);
        assert_abs_diff_eq!(chain.stationary()[1], 0.5, epsilon = 1e-14);
    }

    #[test]
    fn cyclic_three_state_pi() {
        let q = DMatrix::from_row_slice(3, 3, &[-1., 1., 0., 0., -1., 1., 1., 0., -1.]);
        let chain = build_chain(q).unwrap();
        for i in 0..3 {
            assert_abs_diff_eq!(chain.stationary()[i], 1.0 / 3.0, epsilon = 1e-13);
        }
    }

    #[test]
    fn asymmetric_two_state_pi() {
        // detailed-balance oracle: pi_1 * 2 = pi_2 * 1
        let q = DMatrix::from_row_slice(2, 2, &[-2., 2., 1., -1.]);
        let chain = build_chain(q).unwrap();
        assert_abs_diff_eq!(chain.stationary()[0], 1.0 / 3.0, epsilon = 1e-13);
        assert_abs_diff_eq!(chain.stationary()[1], 2.0 / 3.0, epsilon = 1e-13);
        assert_abs_diff_eq!(
            chain.stationary()[0] * 2.0,
            chain.stationary()[1] * 1.0,
            epsilon = 1e-13
        );
    }

    #[test]
    fn rejects_negative_off_diagonal() {
        let q = DMatrix::from_row_slice(2, 2, &[1., -1., 1., -1.]);
        assert!(matches!(build_chain(q), Err(Error::NotAGenerator(_))));
    }

    #[test]
    fn rejects_nonzero_row_sum() {
        let q = DMatrix::from_row_slice(2, 2, &[-1., 2., 1., -1.]);
        assert!(matches!(build_chain(q), Err(Error::NotAGenerator(_))));
    }

    #[test]
    fn rejects_reducible() {
        let q = DMatrix::from_row_slice(
            4,
            4,
            &[
                -1., 1., 0., 0., //
                1., -1., 0., 0., //
                0., 0., -1., 1., //
                0., 0., 1., -1.,
            ],
        );
        assert!(matches!(build_chain(q), Err(Error::Reducible(_))));
    }

    #[test]
    fn inner_product_examples() {
        let (chain, f) = two_state();
        assert_abs_diff_eq!(chain.inner(&f, &f).unwrap(), 1.0, epsilon = 1e-14);
        let one = Observable::ones(2);
        assert_abs_diff_eq!(chain.inner(&one, &one).unwrap(), 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(chain.inner(&f, &one).unwrap(), 0.0, epsilon = 1e-14);
    }

    #[test]
    fn inner_dimension_mismatch() {
        let (chain, _) = two_state();
        let bad = Observable::from_slice(&[1., 2., 3.]);
        assert!(matches!(
            chain.inner(&bad, &bad),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn center_examples() {
        let (chain, _) = two_state();
        let c = chain.center(&Observable::from_slice(&[2.0, 0.0])).unwrap();
        assert_abs_diff_eq!(c.values[0], 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(c.values[1], -1.0, epsilon = 1e-14);

        let z = chain.center(&Observable::ones(2)).unwrap();
        assert_abs_diff_eq!(z.values.amax(), 0.0, epsilon = 1e-14);

        let q = DMatrix::from_row_slice(2, 2, &[-2., 2., 1., -1.]);
        let chain = build_chain(q).unwrap();
        let c = chain.center(&Observable::from_slice(&[1.0, 0.0])).unwrap();
        assert_abs_diff_eq!(c.values[0], 2.0 / 3.0, epsilon = 1e-13);
        assert_abs_diff_eq!(c.values[1], -1.0 / 3.0, epsilon = 1e-13);
    }

    #[test]
    fn center_is_idempotent() {
        let (chain, _) = two_state();
        let g = Observable::from_slice(&[3.2, -0.7]);
        let once = chain.center(&g).unwrap();
        let twice = chain.center(&once).unwrap();
        assert!((once.values - twice.values).amax() <= 1e-14);
    }

    #[test]
    fn random_reversible_detailed_balance() {
        let (chain, f) = make_example(ExampleFamily::RandomReversible { n: 5 }, 7).unwrap();
        assert!(chain.is_reversible(1e-12));
        chain.check_centered(&f, 1e-12).unwrap();
    }

    #[test]
    fn cycle_drift_breaks_detailed_balance() {
        let (chain, f) = make_example(ExampleFamily::CycleDrift { n: 3 }, 0).unwrap();
        assert!(!chain.is_reversible(1e-10));
        assert_eq!(f.values.as_slice(), &[1.0, 0.0, -1.0]);
    }

    #[test]
    fn make_example_deterministic() {
        let (a, fa) = make_example(ExampleFamily::RandomGeneral { n: 6 }, 42).unwrap();
        let (b, fb) = make_example(ExampleFamily::RandomGeneral { n: 6 }, 42).unwrap();
        assert_eq!(a.generator(), b.generator());
        assert_eq!(fa, fb);
    }

    #[test]
    fn chain_spec_roundtrip() {
        let spec = ChainSpec {
            q: vec![vec![-1.0, 1.0], vec![1.0, -1.0]],
            f: vec![1.0, -1.0],
            pi: Some(vec![0.5, 0.5]),
        };
        let (chain, f) = spec.realize().unwrap();
        assert_eq!(chain.n(), 2);
        assert_abs_diff_eq!(f.values[0], 1.0, epsilon = 1e-14);
        let json = serde_json::to_string(&spec).unwrap();
        let back: ChainSpec = serde_json::from_str(&json).unwrap();
        back.realize().unwrap();
    }

    #[test]
    fn chain_spec_rejects_wrong_pi() {
        let spec = ChainSpec {
            q: vec![vec![-1.0, 1.0], vec![1.0, -1.0]],
            f: vec![1.0, -1.0],
            pi: Some(vec![0.9, 0.1]),
        };
        assert!(spec.realize().is_err());
    }
}
