//! Newton-CG with known Hölder parameters `(H_ν, ν)`.
//!
//! While `‖∇f(x^k)‖ > ε_g` each iteration runs capped CG on the damped system
//! `(∇²f(x^k) + 2(γ_ν ε_g)^{1/2} I) d = −∇f(x^k)` and line-searches along the
//! result. At an `ε_g`-FOSP the method stops, or, when `ε_H` is given, asks
//! the eigenvalue oracle for a negative-curvature step before stopping.

use crate::bounds;
use crate::capped_cg::{capped_cg, DirectionType};
use crate::error::{NcgError, Result};
use crate::linalg::{add_scaled, dot, is_finite, norm, sgn, LinearOperator};
use crate::line_search::{line_search_meo, line_search_nc, line_search_sol, StepOutcome};
use crate::meo::{estimate_operator_norm, minimum_eigenvalue_oracle, MeoKind};
use crate::oracle::{HolderClass, ProblemOracle};
use crate::rng::derive_seed;
use crate::solve::{Counted, Counters, IterationRecord, SolveResult, Status, StepType};

#[derive(Debug, Clone, PartialEq)]
pub struct NcgParams {
    pub eps_g: f64,
    pub eps_h: Option<f64>,
    pub zeta: f64,
    pub theta: f64,
    pub eta: f64,
    pub delta: f64,
    pub holder: HolderClass,
    pub max_outer: usize,
    pub j_max: usize,
    /// Seed for the eigenvalue oracle's random starts.
    pub seed: u64,
}

impl NcgParams {
    pub fn new(eps_g: f64, holder: HolderClass) -> Self {
        Self {
            eps_g,
            eps_h: None,
            zeta: 0.5,
            theta: 0.5,
            eta: 0.01,
            delta: 0.01,
            holder,
            max_outer: 100_000,
            j_max: 60,
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        check_unit_interval("eps_g", self.eps_g)?;
        if let Some(e) = self.eps_h {
            check_unit_interval("eps_h", e)?;
        }
        check_unit_interval("zeta", self.zeta)?;
        check_unit_interval("theta", self.theta)?;
        check_unit_interval("eta", self.eta)?;
        check_unit_interval("delta", self.delta)?;
        HolderClass::new(self.holder.nu, self.holder.h_nu)?;
        if self.max_outer == 0 || self.j_max == 0 {
            return Err(NcgError::InvalidParameter("max_outer and j_max must be at least 1".into()));
        }
        Ok(())
    }

    /// Sets `max_outer` to ten times the theoretical iteration bound.
    pub fn with_budget_from_bounds(mut self, f0: f64, f_low: f64) -> Self {
        if let Ok(b) = complexity_bounds(&self, f0, f_low) {
            let total = match b.k2 {
                K2Bound::Defined(k2) => b.k1.saturating_add(k2.saturating_mul(2)),
                _ => b.k1,
            };
            self.max_outer = usize::try_from(total.saturating_mul(10)).unwrap_or(usize::MAX).max(1);
        }
        self
    }
}

pub(crate) fn check_unit_interval(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v < 1.0 {
        Ok(())
    } else {
        Err(NcgError::InvalidParameter(format!("{name} = {v} not in (0, 1)")))
    }
}

pub use crate::bounds::gamma_nu;

/// Rescales a capped-CG negative-curvature direction:
/// `−sgn(dᵀg) max{1, 1/σ} (|dᵀHd| / ‖d‖³) d`.
///
/// The result satisfies `dᵀg ≤ 0` and `dᵀHd/‖d‖² = −min{1, σ}‖d‖`.
pub fn scale_nc_direction<O: LinearOperator + ?Sized>(d: &[f64], h: &O, g: &[f64], sigma: f64) -> Result<Vec<f64>> {
    let dn = norm(d);
    if !(dn > 0.0) {
        return Err(NcgError::Precondition("NC direction must be nonzero"));
    }
    let curv = dot(d, &h.apply_new(d)).abs();
    let c = -sgn(dot(d, g)) * 1f64.max(1.0 / sigma) * curv / (dn * dn * dn);
    Ok(d.iter().map(|v| c * v).collect())
}

/// `−sgn(vᵀg) |vᵀHv| v` for a unit eigenvalue-oracle direction.
pub fn scale_meo_direction<O: LinearOperator + ?Sized>(v: &[f64], h: &O, g: &[f64]) -> Vec<f64> {
    let curvature = dot(v, &h.apply_new(v));
    scale_meo_with_curvature(v, curvature, g)
}

pub(crate) fn scale_meo_with_curvature(v: &[f64], curvature: f64, g: &[f64]) -> Vec<f64> {
    let c = -sgn(dot(v, g)) * curvature.abs();
    v.iter().map(|vi| c * vi).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum K2Bound {
    NotRequested,
    Defined(u64),
    /// `ν = 0` with `ε_H` requested: the bound needs `ν ∈ (0, 1]`.
    Undefined,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ComplexityBounds {
    pub k1: u64,
    pub k2: K2Bound,
}

impl ComplexityBounds {
    /// `K1` without `ε_H`, `K1 + 2K2 − 1` with it (when defined).
    pub fn outer_iteration_bound(&self) -> Option<u64> {
        match self.k2 {
            K2Bound::NotRequested => Some(self.k1),
            K2Bound::Defined(k2) => Some(self.k1 + 2 * k2 - 1),
            K2Bound::Undefined => None,
        }
    }
}

pub fn complexity_bounds(params: &NcgParams, f0: f64, f_low: f64) -> Result<ComplexityBounds> {
    if !(f0 >= f_low) {
        return Err(NcgError::InvalidParameter(format!("f0 = {f0} below f_low = {f_low}")));
    }
    let gap = f0 - f_low;
    let k1 = bounds::k1(gap, params.eps_g, params.eta, params.theta, params.zeta, params.holder);
    let k2 = match params.eps_h {
        None => K2Bound::NotRequested,
        Some(_) if params.holder.nu == 0.0 => K2Bound::Undefined,
        Some(eps_h) => K2Bound::Defined(bounds::k2(gap, eps_h, params.eta, params.theta, params.holder)),
    };
    Ok(ComplexityBounds { k1, k2 })
}

pub(crate) enum MeoStep {
    Certified,
    Step { d: Vec<f64>, outcome: StepOutcome },
    Failed { status: Status, message: String },
}

/// Eigenvalue-oracle branch shared by both Newton-CG drivers.
#[allow(clippy::too_many_arguments)]
pub(crate) fn meo_iteration<P: ProblemOracle + ?Sized>(
    oracle: &P,
    x: &[f64],
    g: &[f64],
    f: f64,
    eps_h: f64,
    delta: f64,
    theta: f64,
    eta: f64,
    j_max: usize,
    seed: u64,
) -> MeoStep {
    let h = oracle.hessian_at(x);
    let norm_h = estimate_operator_norm(&*h, derive_seed(seed, 0));
    let meo = match minimum_eigenvalue_oracle(&*h, eps_h, delta, norm_h, derive_seed(seed, 1)) {
        Ok(m) => m,
        Err(e) => return MeoStep::Failed { status: Status::NumericalFailure, message: e.to_string() },
    };
    match (meo.kind, meo.v, meo.curvature) {
        (MeoKind::Direction, Some(v), Some(curv)) => {
            let d = scale_meo_with_curvature(&v, curv, g);
            match line_search_meo(oracle, x, &d, f, theta, eta, j_max) {
                Ok(outcome) => MeoStep::Step { d, outcome },
                Err(e) => MeoStep::Failed { status: Status::LineSearchFailure, message: e.to_string() },
            }
        }
        _ => MeoStep::Certified,
    }
}

pub(crate) fn validate_start<P: ProblemOracle + ?Sized>(oracle: &P, x0: &[f64]) -> Result<()> {
    if x0.len() != oracle.dim() {
        return Err(NcgError::DimensionMismatch { expected: oracle.dim(), got: x0.len() });
    }
    if !is_finite(x0) {
        return Err(NcgError::Precondition("x0 must be finite"));
    }
    Ok(())
}

pub fn newton_cg_solve<P: ProblemOracle + ?Sized>(oracle: &P, x0: &[f64], params: &NcgParams) -> Result<SolveResult> {
    params.validate()?;
    validate_start(oracle, x0)?;
    let counted = Counted::new(oracle);
    let gamma = gamma_nu(params.eps_g, params.holder);
    let damping = (gamma * params.eps_g).sqrt();

    let mut counters = Counters::default();
    let mut trace: Vec<IterationRecord> = Vec::new();
    let mut message = None;
    let mut x = x0.to_vec();
    let mut f = counted.value(&x);
    let mut g = counted.gradient_new(&x);

    let status = loop {
        let g_norm = norm(&g);
        if g_norm <= params.eps_g && params.eps_h.is_none() {
            break Status::Fosp;
        }
        if trace.len() >= params.max_outer {
            break Status::MaxIterations;
        }
        let (step_type, d, outcome) = if g_norm > params.eps_g {
            let h = counted.hessian_at(&x);
            let cg = match capped_cg(&*h, &g, damping, params.zeta) {
                Ok(cg) => cg,
                Err(e) => {
                    message = Some(e.to_string());
                    break Status::NumericalFailure;
                }
            };
            counters.capped_cg_calls += 1;
            counters.cg_iterations += cg.iterations;
            let searched = match cg.d_type {
                DirectionType::Sol => line_search_sol(
                    &counted,
                    &x,
                    &cg.d,
                    f,
                    damping,
                    params.theta,
                    params.eta,
                    params.eps_g,
                    params.j_max,
                )
                .map(|o| (cg.d, o)),
                DirectionType::Nc => scale_nc_direction(&cg.d, &*h, &g, gamma).and_then(|d| {
                    line_search_nc(&counted, &x, &d, f, gamma, params.theta, params.eta, params.j_max).map(|o| (d, o))
                }),
            };
            match searched {
                Ok((d, o)) => (StepType::from(cg.d_type), d, o),
                Err(e) => {
                    message = Some(e.to_string());
                    break Status::LineSearchFailure;
                }
            }
        } else {
            let eps_h = params.eps_h.expect("checked above");
            counters.meo_calls += 1;
            let seed = derive_seed(params.seed, counters.meo_calls as u64);
            match meo_iteration(&counted, &x, &g, f, eps_h, params.delta, params.theta, params.eta, params.j_max, seed)
            {
                MeoStep::Certified => break Status::SospCertified,
                MeoStep::Step { d, outcome } => (StepType::Meo, d, outcome),
                MeoStep::Failed { status, message: m } => {
                    message = Some(m);
                    break status;
                }
            }
        };

        x = add_scaled(&x, outcome.alpha, &d);
        trace.push(IterationRecord {
            step_type,
            alpha: outcome.alpha,
            j: outcome.j,
            accepted_by: outcome.accepted_by,
            f_before: f,
            f: outcome.f_new,
            grad_norm: g_norm,
            d_norm: norm(&d),
            sigma: gamma,
            inner_calls: 1,
            trials: Vec::new(),
        });
        f = outcome.f_new;
        g = match outcome.grad_new {
            Some(gn) => gn,
            None => counted.gradient_new(&x),
        };
    };

    counted.fill(&mut counters);
    Ok(SolveResult {
        grad_norm_final: norm(&g),
        x_final: x,
        f_final: f,
        status,
        trace,
        counters,
        gammas: Vec::new(),
        message,
    })
}
