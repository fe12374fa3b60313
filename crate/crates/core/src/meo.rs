//! Randomized Lanczos minimum-eigenvalue oracle.
//!
//! Starting from a uniformly random unit vector, Lanczos (with full
//! reorthogonalization) runs for at most `N(ε, δ)` steps. After each step the
//! smallest Ritz pair of the current tridiagonal is recomputed; once the Ritz
//! vector `v` satisfies `vᵀHv ≤ −ε/2` (checked with an explicit product) it is
//! returned. Exhausting the budget yields a certificate that
//! `λ_min(H) ≥ −ε` with probability at least `1 − δ`.

use crate::error::{NcgError, Result};
use crate::linalg::{axpy, dot, norm, scale, LinearOperator};
use crate::rng::NormalStream;
use crate::tridiag::symmetric_tridiagonal_eigen;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeoKind {
    Certificate,
    Direction,
}

#[derive(Debug, Clone)]
pub struct MeoOutcome {
    pub kind: MeoKind,
    /// Unit negative-curvature vector, present iff `kind == Direction`.
    pub v: Option<Vec<f64>>,
    /// `vᵀHv` of the returned vector.
    pub curvature: Option<f64>,
    pub iterations: usize,
    pub budget: usize,
    /// The Krylov space became invariant before the budget ran out.
    pub breakdown: bool,
    pub hvp_calls: usize,
}

/// `N(ε, δ) = min{n, 1 + ⌈ln(2.75 n / δ²)/2 · √(‖H‖/ε)⌉}`.
pub fn meo_budget(n: usize, eps: f64, delta: f64, norm_h: f64) -> usize {
    let raw = 1.0 + ((2.75 * n as f64 / (delta * delta)).ln() / 2.0 * (norm_h / eps).sqrt()).ceil();
    if raw >= n as f64 {
        n
    } else {
        raw as usize
    }
}

pub fn minimum_eigenvalue_oracle<O: LinearOperator + ?Sized>(
    h: &O,
    eps: f64,
    delta: f64,
    norm_h: f64,
    seed: u64,
) -> Result<MeoOutcome> {
    let n = h.dim();
    if n == 0 {
        return Err(NcgError::InvalidParameter("dimension must be positive".into()));
    }
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(NcgError::InvalidParameter(format!("eps = {eps} must be positive")));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(NcgError::InvalidParameter(format!("delta = {delta} not in (0, 1)")));
    }
    if !(norm_h > 0.0 && norm_h.is_finite()) {
        return Err(NcgError::InvalidParameter(format!("norm_h = {norm_h} must be positive")));
    }
    let budget = meo_budget(n, eps, delta, norm_h);
    let breakdown_tol = 1e-12 * norm_h;

    let mut hvp_calls = 0usize;
    let mut basis: Vec<Vec<f64>> = vec![NormalStream::new(seed).unit_sphere(n)];
    let mut alphas: Vec<f64> = Vec::with_capacity(budget);
    let mut betas: Vec<f64> = Vec::with_capacity(budget);
    let mut w = vec![0.0; n];

    let certificate = |iterations, breakdown, hvp_calls| MeoOutcome {
        kind: MeoKind::Certificate,
        v: None,
        curvature: None,
        iterations,
        budget,
        breakdown,
        hvp_calls,
    };

    for k in 1..=budget {
        let q = &basis[k - 1];
        h.apply(q, &mut w);
        hvp_calls += 1;
        let alpha = dot(q, &w);
        axpy(-alpha, q, &mut w);
        if k >= 2 {
            axpy(-betas[k - 2], &basis[k - 2], &mut w);
        }
        // two passes of classical Gram–Schmidt against the whole basis
        for _ in 0..2 {
            for b in &basis {
                let c = dot(b, &w);
                axpy(-c, b, &mut w);
            }
        }
        alphas.push(alpha);
        if !alpha.is_finite() {
            return Err(NcgError::NumericalFailure { stage: "lanczos", iteration: k });
        }

        let eig = symmetric_tridiagonal_eigen(&alphas, &betas)?;
        let kmin = eig.argmin();
        if eig.values[kmin] <= -eps / 2.0 {
            let coeffs = eig.vector(kmin);
            let mut v = vec![0.0; n];
            for (c, b) in coeffs.iter().zip(&basis) {
                axpy(*c, b, &mut v);
            }
            let nv = norm(&v);
            scale(1.0 / nv, &mut v);
            let hv = h.apply_new(&v);
            hvp_calls += 1;
            let curvature = dot(&v, &hv);
            if curvature <= -eps / 2.0 {
                return Ok(MeoOutcome {
                    kind: MeoKind::Direction,
                    v: Some(v),
                    curvature: Some(curvature),
                    iterations: k,
                    budget,
                    breakdown: false,
                    hvp_calls,
                });
            }
        }
        if k == budget {
            break;
        }
        let beta = norm(&w);
        if !(beta > breakdown_tol) {
            return Ok(certificate(k, true, hvp_calls));
        }
        betas.push(beta);
        let mut next = w.clone();
        scale(1.0 / beta, &mut next);
        basis.push(next);
    }
    Ok(certificate(budget, false, hvp_calls))
}

/// Power-iteration estimate of `‖H‖` (50 steps, inflated by 1.1).
pub fn estimate_operator_norm<O: LinearOperator + ?Sized>(h: &O, seed: u64) -> f64 {
    estimate_operator_norm_steps(h, seed, 50)
}

/// Every `‖Hv‖` with unit `v` is a lower bound on `‖H‖`; the largest one
/// seen is inflated by 1.1. A vanishing operator returns `1e-12`.
pub fn estimate_operator_norm_steps<O: LinearOperator + ?Sized>(h: &O, seed: u64, steps: usize) -> f64 {
    const FLOOR: f64 = 1e-12;
    let n = h.dim();
    if n == 0 {
        return FLOOR;
    }
    let mut v = NormalStream::new(seed).unit_sphere(n);
    let mut w = vec![0.0; n];
    let mut best = 0.0f64;
    for _ in 0..steps.max(1) {
        h.apply(&v, &mut w);
        let nw = norm(&w);
        if !(nw > 0.0) || !nw.is_finite() {
            break;
        }
        best = best.max(nw);
        v.copy_from_slice(&w);
        scale(1.0 / nw, &mut v);
    }
    (1.1 * best).max(FLOOR)
}
