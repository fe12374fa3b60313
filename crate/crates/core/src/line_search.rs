//! Backtracking line searches `α = θ^j` used by the Newton-CG drivers.
//!
//! All searches accept the smallest `j ≥ 0` whose trial point satisfies a
//! sufficient-decrease test `f(x + θ^j d) ≤ f(x) − c θ^{2j} ‖d‖^q`. The
//! unbounded versions fail once `j` passes `j_max`; the bounded versions used
//! by the parameter-free method also stop (with [`BoundedSearch::NotFound`])
//! when `θ^j` leaves the admissible window.

use crate::error::{NcgError, Result};
use crate::linalg::{add_scaled, norm};
use crate::oracle::ProblemOracle;
use crate::solve::AcceptedBy;

#[derive(Debug, Clone, PartialEq)]
pub struct StepOutcome {
    pub alpha: f64,
    pub j: usize,
    pub f_new: f64,
    pub accepted_by: AcceptedBy,
    /// `∇f(x + α d)` when it was evaluated on the way.
    pub grad_new: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum BoundedSearch {
    Found { j: usize, alpha: f64, f_new: f64 },
    NotFound,
}

/// Trial value at `j`, reusing a known `f(x + d)` for `j = 0`.
fn trial<P: ProblemOracle + ?Sized>(
    oracle: &P,
    x: &[f64],
    d: &[f64],
    theta: f64,
    j: usize,
    f_full: Option<f64>,
) -> (f64, f64) {
    let alpha = theta.powi(j as i32);
    match (j, f_full) {
        (0, Some(f)) => (alpha, f),
        _ => (alpha, oracle.value(&add_scaled(x, alpha, d))),
    }
}

#[allow(clippy::too_many_arguments)]
fn backtrack<P: ProblemOracle + ?Sized>(
    oracle: &P,
    x: &[f64],
    d: &[f64],
    f_x: f64,
    theta: f64,
    j_max: usize,
    f_full: Option<f64>,
    decrease: impl Fn(f64) -> f64,
) -> Result<StepOutcome> {
    for j in 0..=j_max {
        let (alpha, f_new) = trial(oracle, x, d, theta, j, f_full);
        if f_new <= f_x - decrease(alpha) {
            return Ok(StepOutcome { alpha, j, f_new, accepted_by: AcceptedBy::Backtracking, grad_new: None });
        }
    }
    Err(NcgError::LineSearchFailure { j_max })
}

/// SOL-direction search: full step when it lands on an `ε_g`-FOSP without
/// increasing `f`, otherwise backtracking on
/// `f(x+θ^j d) ≤ f(x) − η (σ ε_g)^{1/2} θ^{2j} ‖d‖²`.
///
/// `damping` is `(σ ε_g)^{1/2}`.
#[allow(clippy::too_many_arguments)]
pub fn line_search_sol<P: ProblemOracle + ?Sized>(
    oracle: &P,
    x: &[f64],
    d: &[f64],
    f_x: f64,
    damping: f64,
    theta: f64,
    eta: f64,
    eps_g: f64,
    j_max: usize,
) -> Result<StepOutcome> {
    let x_full = add_scaled(x, 1.0, d);
    let f_full = oracle.value(&x_full);
    if f_full <= f_x {
        let g_full = oracle.gradient_new(&x_full);
        if norm(&g_full) <= eps_g {
            return Ok(StepOutcome {
                alpha: 1.0,
                j: 0,
                f_new: f_full,
                accepted_by: AcceptedBy::FullStep,
                grad_new: Some(g_full),
            });
        }
    }
    let dd = norm(d).powi(2);
    backtrack(oracle, x, d, f_x, theta, j_max, Some(f_full), |a| eta * damping * a * a * dd)
}

/// NC-direction search on `f(x+θ^j d) ≤ f(x) − η min{1,σ} θ^{2j} ‖d‖³ / 4`.
#[allow(clippy::too_many_arguments)]
pub fn line_search_nc<P: ProblemOracle + ?Sized>(
    oracle: &P,
    x: &[f64],
    d: &[f64],
    f_x: f64,
    sigma: f64,
    theta: f64,
    eta: f64,
    j_max: usize,
) -> Result<StepOutcome> {
    let d3 = norm(d).powi(3);
    let c = eta * sigma.min(1.0) / 4.0;
    backtrack(oracle, x, d, f_x, theta, j_max, None, |a| c * a * a * d3)
}

/// Eigenvalue-oracle direction search on `f(x+θ^j d) ≤ f(x) − η θ^{2j} ‖d‖³ / 2`.
pub fn line_search_meo<P: ProblemOracle + ?Sized>(
    oracle: &P,
    x: &[f64],
    d: &[f64],
    f_x: f64,
    theta: f64,
    eta: f64,
    j_max: usize,
) -> Result<StepOutcome> {
    let d3 = norm(d).powi(3);
    backtrack(oracle, x, d, f_x, theta, j_max, None, |a| eta / 2.0 * a * a * d3)
}

/// Lower end of the SOL window: `min{1, 2(1−η)θ(ε_g/σ)^{1/4} / (3‖d‖^{1/2})}`.
pub fn sol_window_floor(d_norm: f64, sigma: f64, eps_g: f64, theta: f64, eta: f64) -> f64 {
    1f64.min(2.0 * (1.0 - eta) * theta * (eps_g / sigma).powf(0.25) / (3.0 * d_norm.sqrt()))
}

#[allow(clippy::too_many_arguments)]
fn bounded<P: ProblemOracle + ?Sized>(
    oracle: &P,
    x: &[f64],
    d: &[f64],
    f_x: f64,
    theta: f64,
    j_max: usize,
    f_full: Option<f64>,
    in_window: impl Fn(usize) -> bool,
    decrease: impl Fn(f64) -> f64,
) -> Result<BoundedSearch> {
    let mut j = 0usize;
    while in_window(j) {
        if j > j_max {
            return Err(NcgError::LineSearchFailure { j_max });
        }
        let (alpha, f_new) = trial(oracle, x, d, theta, j, f_full);
        if f_new <= f_x - decrease(alpha) {
            return Ok(BoundedSearch::Found { j, alpha, f_new });
        }
        j += 1;
    }
    Ok(BoundedSearch::NotFound)
}

/// Bounded SOL search of the parameter-free method.
///
/// Scans `j` while `θ^j` stays above [`sol_window_floor`] and returns the
/// first `j` with `f(x+θ^j d) ≤ f(x) − η (σ_t ε_g)^{1/2} θ^{2j} ‖d‖²`.
#[allow(clippy::too_many_arguments)]
pub fn bounded_line_search_sol<P: ProblemOracle + ?Sized>(
    oracle: &P,
    x: &[f64],
    d: &[f64],
    f_x: f64,
    sigma_t: f64,
    eps_g: f64,
    theta: f64,
    eta: f64,
    j_max: usize,
    f_full: Option<f64>,
) -> Result<BoundedSearch> {
    let d_norm = norm(d);
    let floor = sol_window_floor(d_norm, sigma_t, eps_g, theta, eta);
    let damping = (sigma_t * eps_g).sqrt();
    let dd = d_norm * d_norm;
    bounded(oracle, x, d, f_x, theta, j_max, f_full, |j| theta.powi(j as i32) >= floor, |a| eta * damping * a * a * dd)
}

/// Bounded NC search of the parameter-free method.
///
/// Window `θ^{j−1} ≥ min{1, 1/σ_t}`; decrease
/// `f(x+θ^j d) ≤ f(x) − η min{1,σ_t} θ^{2j} ‖d‖³ / 4`.
#[allow(clippy::too_many_arguments)]
pub fn bounded_line_search_nc<P: ProblemOracle + ?Sized>(
    oracle: &P,
    x: &[f64],
    d: &[f64],
    f_x: f64,
    sigma_t: f64,
    theta: f64,
    eta: f64,
    j_max: usize,
) -> Result<BoundedSearch> {
    let floor = 1f64.min(1.0 / sigma_t);
    let d3 = norm(d).powi(3);
    let c = eta * sigma_t.min(1.0) / 4.0;
    bounded(oracle, x, d, f_x, theta, j_max, None, |j| theta.powi(j as i32 - 1) >= floor, |a| c * a * a * d3)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::FnOracle;

    fn half_norm_sq(n: usize) -> FnOracle {
        FnOracle::new(
            n,
            "q",
            |x| 0.5 * crate::linalg::dot(x, x),
            |x, g| g.copy_from_slice(x),
            |_, v, hv| hv.copy_from_slice(v),
        )
    }

    #[test]
    fn full_step_shortcut() {
        let p = half_norm_sq(2);
        let x = [1.0, 0.0];
        let d = [-1.0, 0.0];
        let out = line_search_sol(&p, &x, &d, 0.5, 1e-2, 0.5, 0.01, 1e-4, 60).unwrap();
        assert_eq!(out.accepted_by, AcceptedBy::FullStep);
        assert_eq!(out.alpha, 1.0);
        assert_eq!(out.f_new, 0.0);
    }

    #[test]
    fn sol_backtracks_from_overshoot() {
        let p = half_norm_sq(1);
        // d = −4x overshoots: j = 0 gives f = 4.5 and j = 1 gives f = 0.5, both
        // above f(x) − 0.16·θ^{2j}; j = 2 lands on the minimizer.
        let out = line_search_sol(&p, &[1.0], &[-4.0], 0.5, 1.0, 0.5, 0.01, 1e-4, 60).unwrap();
        assert_eq!(out.accepted_by, AcceptedBy::Backtracking);
        assert_eq!(out.j, 2);
        assert_eq!(out.alpha, 0.25);
        assert_eq!(out.f_new, 0.0);
    }

    #[test]
    fn failure_after_j_max() {
        let p = half_norm_sq(1);
        // ascent direction never satisfies a decrease test
        let err = line_search_meo(&p, &[1.0], &[1.0], 0.5, 0.5, 0.01, 5).unwrap_err();
        assert!(matches!(err, NcgError::LineSearchFailure { j_max: 5 }));
    }

    #[test]
    fn nc_window_exhausts() {
        let p = half_norm_sq(1);
        // σ = 1 admits j ∈ {0, 1}; an ascent direction fails both.
        let out = bounded_line_search_nc(&p, &[1.0], &[1.0], 0.5, 1.0, 0.5, 0.01, 60).unwrap();
        assert_eq!(out, BoundedSearch::NotFound);
    }
}
