//! Operator calculus on L²(π): π-adjoints, the symmetric/antisymmetric
//! split of the generator, spectral square roots, semigroup action,
//! resolvents and semigroup integrals.
//!
//! Conventions: the generator acts on observables as `G = Q`; the
//! π-adjoint of `M` is `M*[i][j] = π_j M[j][i] / π_i`;
//! `G = -S + A` with `S = -(G + G*)/2` π-self-adjoint PSD and
//! `A = (G - G*)/2` π-skew.

use nalgebra::{DMatrix, DVector};

use crate::chain::{MarkovChain, Observable};
use crate::error::{Error, Result};

/// Eigenvalues of the symmetrized operator in `[-NEG_CLIP*‖S‖, 0)` are
/// clipped to zero; anything below is an error.
pub const NEG_CLIP: f64 = 1e-8;
/// Symmetry tolerance for `sqrt_psd` inputs.
pub const SELF_ADJOINT_TOL: f64 = 1e-10;

/// π-adjoint: satisfies `(φ, Mψ) = (M*φ, ψ)` for all φ, ψ.
pub fn pi_adjoint(chain: &MarkovChain, m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let n = chain.n();
    if m.nrows() != n || m.ncols() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: m.nrows(),
        });
    }
    let pi = chain.stationary();
    let mut out = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            out[(i, j)] = pi[j] * m[(j, i)] / pi[i];
        }
    }
    Ok(out)
}

/// The triple `(G, S, A)` with the spectral square root of `S`.
#[derive(Debug, Clone)]
pub struct OperatorDecomposition {
    pub g: DMatrix<f64>,
    pub g_star: DMatrix<f64>,
    pub s: DMatrix<f64>,
    pub a: DMatrix<f64>,
    pub s_half: DMatrix<f64>,
}

/// Split the generator into its π-symmetric and π-antisymmetric parts.
pub fn decompose(chain: &MarkovChain) -> Result<OperatorDecomposition> {
    let g = chain.generator().clone();
    let g_star = pi_adjoint(chain, &g)?;
    let s = -(&g + &g_star) * 0.5;
    let a = (&g - &g_star) * 0.5;
    let s_half = sqrt_psd(chain, &s)?;
    Ok(OperatorDecomposition {
        g,
        g_star,
        s,
        a,
        s_half,
    })
}

/// Spectral square root of a π-self-adjoint PSD matrix.
///
/// Conjugates by `D^{1/2}` (`D = diag(π)`) to an ordinary symmetric
/// matrix, takes the symmetric eigendecomposition with eigenvalues
/// clipped to `[0, ∞)`, and conjugates back.
pub fn sqrt_psd(chain: &MarkovChain, s: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let n = chain.n();
    if s.nrows() != n || s.ncols() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: s.nrows(),
        });
    }
    let pi = chain.stationary();
    let d_half: Vec<f64> = pi.iter().map(|p| p.sqrt()).collect();
    let scale = s.amax().max(f64::MIN_POSITIVE);
    let mut b = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            b[(i, j)] = d_half[i] * s[(i, j)] / d_half[j];
        }
    }
    let asym = (0..n)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .fold(0.0f64, |m, (i, j)| m.max((b[(i, j)] - b[(j, i)]).abs()));
    if asym > SELF_ADJOINT_TOL * scale.max(1.0) {
        return Err(Error::NotSelfAdjoint(asym));
    }
    // exact symmetrization before the eigensolve
    let b = (&b + b.transpose()) * 0.5;
    let eig = b.symmetric_eigen();
    let mut roots = DVector::zeros(n);
    for (k, ev) in eig.eigenvalues.iter().enumerate() {
        if *ev < -NEG_CLIP * scale {
            return Err(Error::NegativeSpectrum(*ev));
        }
        roots[k] = ev.max(0.0).sqrt();
    }
    let mut b_half = DMatrix::zeros(n, n);
    for k in 0..n {
        let v = eig.eigenvectors.column(k);
        b_half += roots[k] * &v * v.transpose();
    }
    let mut out = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            out[(i, j)] = b_half[(i, j)] * d_half[j] / d_half[i];
        }
    }
    Ok(out)
}

/// `P_t φ = e^{tQ} φ` by scaling-and-squaring matrix exponential.
pub fn semigroup_apply(chain: &MarkovChain, t: f64, phi: &Observable) -> Result<Observable> {
    if phi.len() != chain.n() {
        return Err(Error::DimensionMismatch {
            expected: chain.n(),
            got: phi.len(),
        });
    }
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::NumericalBreakdown(format!("invalid time t = {t}")));
    }
    if t == 0.0 {
        return Ok(phi.clone());
    }
    let p_t = semigroup_matrix(chain, t)?;
    Ok(Observable::new(&p_t * &phi.values))
}

/// The full transition matrix `e^{tQ}`.
pub fn semigroup_matrix(chain: &MarkovChain, t: f64) -> Result<DMatrix<f64>> {
    let m = chain.generator() * t;
    let e = m.exp();
    if e.iter().any(|x| !x.is_finite()) {
        return Err(Error::NumericalBreakdown(format!(
            "matrix exponential overflowed at t = {t}"
        )));
    }
    Ok(e)
}

/// `u_λ = (λI - G)^{-1} f` with its solver residual.
#[derive(Debug, Clone)]
pub struct ResolventResult {
    pub lambda: f64,
    pub u: Observable,
    pub residual: f64,
}

/// Solve `(λI - Q) u = f` by dense LU.
pub fn resolvent(chain: &MarkovChain, lambda: f64, f: &Observable) -> Result<ResolventResult> {
    let n = chain.n();
    if f.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: f.len(),
        });
    }
    if !(lambda > 0.0) {
        return Err(Error::SingularSystem(lambda));
    }
    let m = DMatrix::identity(n, n) * lambda - chain.generator();
    let u = m
        .clone()
        .lu()
        .solve(&f.values)
        .or_else(|| m.clone().full_piv_lu().solve(&f.values))
        .ok_or(Error::SingularSystem(lambda))?;
    let f_norm = chain.norm(f)?;
    let res_vec = Observable::new(&m * &u - &f.values);
    let residual = chain.norm(&res_vec)?;
    if residual > 1e-10 * f_norm.max(f64::MIN_POSITIVE) {
        return Err(Error::NumericalBreakdown(format!(
            "resolvent residual {residual:.3e} at lambda = {lambda:.3e}"
        )));
    }
    Ok(ResolventResult {
        lambda,
        u: Observable::new(u),
        residual,
    })
}

/// The λ→0 limit of `u_λ`: the unique centered solution of `-Q u = f`.
///
/// Solved as the least-squares solution of the augmented system
/// `[-Q; πᵀ] u = [f; 0]`, which pins the centering constraint exactly.
pub fn u_zero(chain: &MarkovChain, f: &Observable) -> Result<Observable> {
    let n = chain.n();
    chain.check_centered(f, 1e-10)?;
    let mut aug = DMatrix::zeros(n + 1, n);
    let scale = chain.generator().amax();
    for i in 0..n {
        for j in 0..n {
            aug[(i, j)] = -chain.generator()[(i, j)];
        }
    }
    for j in 0..n {
        aug[(n, j)] = chain.stationary()[j] * scale;
    }
    let mut rhs = DVector::zeros(n + 1);
    for i in 0..n {
        rhs[i] = f.values[i];
    }
    let svd = aug.svd(true, true);
    let u = svd
        .solve(&rhs, 1e-13)
        .map_err(|e| Error::NumericalBreakdown(format!("u_zero SVD solve: {e}")))?;
    Ok(Observable::new(u))
}

/// `v_t = ∫₀ᵗ P_s f ds` with an error estimate.
#[derive(Debug, Clone)]
pub struct SemigroupIntegral {
    pub t: f64,
    pub v: Observable,
    pub method_error: f64,
}

/// Semigroup integral of a centered observable.
///
/// Uses the exact identity `v_t = (I - P_t) u₀` on the centered
/// subspace, where `-Q u₀ = f`; the only numerical error is the matrix
/// exponential itself.
pub fn v_of_t(chain: &MarkovChain, t: f64, f: &Observable) -> Result<SemigroupIntegral> {
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::NumericalBreakdown(format!("invalid time t = {t}")));
    }
    let u0 = u_zero(chain, f)?;
    if t == 0.0 {
        return Ok(SemigroupIntegral {
            t,
            v: Observable::zeros(chain.n()),
            method_error: 0.0,
        });
    }
    let p_u0 = semigroup_apply(chain, t, &u0)?;
    let v = Observable::new(&u0.values - &p_u0.values);
    let method_error = 1e-13 * chain.norm(&u0)?.max(chain.norm(f)?) * t.max(1.0).min(1e3);
    Ok(SemigroupIntegral { t, v, method_error })
}
