//! Parameter-free Newton-CG.
//!
//! The damping weight is found by backtracking: each outer iteration tries
//! `σ_t = r^t σ₀` with `σ₀ = max{γ₋₁, γ_{k−1}/r}` until capped CG returns a
//! direction whose step passes a line search restricted to a window of step
//! sizes. The accepted `σ_t` becomes `γ_k`.

use crate::bounds;
use crate::capped_cg::{capped_cg, DirectionType};
use crate::error::{NcgError, Result};
use crate::linalg::{add_scaled, norm};
use crate::line_search::{bounded_line_search_nc, bounded_line_search_sol, BoundedSearch, StepOutcome};
use crate::newton_cg::{check_unit_interval, meo_iteration, scale_nc_direction, validate_start, MeoStep};
use crate::oracle::{HolderClass, ProblemOracle};
use crate::rng::derive_seed;
use crate::solve::{
    AcceptedBy, Counted, Counters, IncreaseReason, InnerTrialRecord, IterationRecord, SolveResult, Status, StepType,
    TrialOutcome,
};

#[derive(Debug, Clone, PartialEq)]
pub struct PfParams {
    pub eps_g: f64,
    pub eps_h: Option<f64>,
    pub zeta: f64,
    pub theta: f64,
    pub eta: f64,
    pub delta: f64,
    /// `γ₋₁`.
    pub gamma_init: f64,
    pub r: f64,
    pub t_max: usize,
    pub j_max: usize,
    pub max_outer: usize,
    pub seed: u64,
}

impl PfParams {
    /// `(ζ, γ₋₁, θ, r, η) = (0.5, 10, 0.5, 2, 0.01)`, `δ = 0.01`.
    pub fn new(eps_g: f64) -> Self {
        Self {
            eps_g,
            eps_h: None,
            zeta: 0.5,
            theta: 0.5,
            eta: 0.01,
            delta: 0.01,
            gamma_init: 10.0,
            r: 2.0,
            t_max: 200,
            j_max: 60,
            max_outer: 100_000,
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
        if !(self.gamma_init > 0.0 && self.gamma_init.is_finite()) {
            return Err(NcgError::InvalidParameter(format!("gamma_init = {} must be positive", self.gamma_init)));
        }
        if !(self.r > 1.0 && self.r.is_finite()) {
            return Err(NcgError::InvalidParameter(format!("r = {} must exceed 1", self.r)));
        }
        if self.t_max == 0 || self.j_max == 0 || self.max_outer == 0 {
            return Err(NcgError::InvalidParameter("t_max, j_max and max_outer must be at least 1".into()));
        }
        Ok(())
    }
}

/// `σ₀ = max{γ₋₁, γ_{k−1}/r}`.
pub fn sigma_start(gamma_prev: f64, gamma_init: f64, r: f64) -> f64 {
    gamma_init.max(gamma_prev / r)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PfBounds {
    pub sigma_bar: f64,
    pub t: u64,
    pub k1_bar: u64,
}

/// Test-side bounds; the solver never sees `holder`.
pub fn pf_bounds(params: &PfParams, holder: HolderClass, f0: f64, f_low: f64) -> PfBounds {
    let sigma_bar = bounds::sigma_bar(params.gamma_init, params.r, params.eps_g, holder);
    PfBounds {
        sigma_bar,
        t: bounds::inner_trial_bound(sigma_bar, params.gamma_init, params.r),
        k1_bar: bounds::k1_bar((f0 - f_low).max(0.0), params.eps_g, params.eta, params.theta, sigma_bar),
    }
}

enum Trial {
    Accept(StepOutcome),
    Increase(IncreaseReason),
}

pub fn pf_newton_cg_solve<P: ProblemOracle + ?Sized>(oracle: &P, x0: &[f64], params: &PfParams) -> Result<SolveResult> {
    params.validate()?;
    validate_start(oracle, x0)?;
    let counted = Counted::new(oracle);

    let mut counters = Counters::default();
    let mut trace: Vec<IterationRecord> = Vec::new();
    let mut gammas: Vec<f64> = Vec::new();
    let mut message = None;
    let mut x = x0.to_vec();
    let mut f = counted.value(&x);
    let mut g = counted.gradient_new(&x);
    let mut gamma_prev = params.gamma_init;

    let status = 'outer: loop {
        let g_norm = norm(&g);
        if g_norm <= params.eps_g && params.eps_h.is_none() {
            break Status::Fosp;
        }
        if trace.len() >= params.max_outer {
            break Status::MaxIterations;
        }

        let (record, d, outcome) = if g_norm > params.eps_g {
            let sigma0 = sigma_start(gamma_prev, params.gamma_init, params.r);
            let h = counted.hessian_at(&x);
            let mut trials = Vec::new();
            let mut accepted = None;
            for t in 0..params.t_max {
                let sigma_t = params.r.powi(t as i32) * sigma0;
                let damping = (sigma_t * params.eps_g).sqrt();
                let cg = match capped_cg(&*h, &g, damping, params.zeta) {
                    Ok(cg) => cg,
                    Err(e) => {
                        message = Some(e.to_string());
                        break 'outer Status::NumericalFailure;
                    }
                };
                counters.capped_cg_calls += 1;
                counters.cg_iterations += cg.iterations;

                let (d, trial) = match cg.d_type {
                    DirectionType::Sol => {
                        let d = cg.d;
                        let x_full = add_scaled(&x, 1.0, &d);
                        let f_full = counted.value(&x_full);
                        let mut shortcut = None;
                        if f_full <= f {
                            let g_full = counted.gradient_new(&x_full);
                            if norm(&g_full) <= params.eps_g {
                                shortcut = Some(StepOutcome {
                                    alpha: 1.0,
                                    j: 0,
                                    f_new: f_full,
                                    accepted_by: AcceptedBy::FullStep,
                                    grad_new: Some(g_full),
                                });
                            }
                        }
                        let trial = if let Some(s) = shortcut {
                            Ok(Trial::Accept(s))
                        } else if 6.0 * norm(&d) >= (params.eps_g / sigma_t).sqrt() {
                            bounded_line_search_sol(
                                &counted,
                                &x,
                                &d,
                                f,
                                sigma_t,
                                params.eps_g,
                                params.theta,
                                params.eta,
                                params.j_max,
                                Some(f_full),
                            )
                            .map(found_or_increase)
                        } else {
                            Ok(Trial::Increase(IncreaseReason::SmallStep))
                        };
                        (d, trial)
                    }
                    DirectionType::Nc => match scale_nc_direction(&cg.d, &*h, &g, sigma_t) {
                        Ok(d) => {
                            let trial = bounded_line_search_nc(
                                &counted,
                                &x,
                                &d,
                                f,
                                sigma_t,
                                params.theta,
                                params.eta,
                                params.j_max,
                            )
                            .map(found_or_increase);
                            (d, trial)
                        }
                        Err(e) => (Vec::new(), Err(e)),
                    },
                };
                let trial = match trial {
                    Ok(t) => t,
                    Err(e) => {
                        message = Some(e.to_string());
                        break 'outer Status::LineSearchFailure;
                    }
                };
                match trial {
                    Trial::Accept(o) => {
                        trials.push(InnerTrialRecord {
                            t,
                            sigma_t,
                            d_type: cg.d_type,
                            outcome: TrialOutcome::Accepted { alpha: o.alpha },
                        });
                        accepted = Some((cg.d_type, sigma_t, d, o));
                        break;
                    }
                    Trial::Increase(reason) => trials.push(InnerTrialRecord {
                        t,
                        sigma_t,
                        d_type: cg.d_type,
                        outcome: TrialOutcome::SigmaIncreased(reason),
                    }),
                }
            }
            let Some((d_type, sigma_t, d, o)) = accepted else {
                message = Some(format!("no step accepted within {} trials", params.t_max));
                break Status::InnerTrialLimit;
            };
            gamma_prev = sigma_t;
            let inner_calls = trials.len();
            let record = IterationRecord {
                step_type: StepType::from(d_type),
                alpha: o.alpha,
                j: o.j,
                accepted_by: o.accepted_by,
                f_before: f,
                f: o.f_new,
                grad_norm: g_norm,
                d_norm: norm(&d),
                sigma: sigma_t,
                inner_calls,
                trials,
            };
            (record, d, o)
        } else {
            let eps_h = params.eps_h.expect("checked above");
            counters.meo_calls += 1;
            let seed = derive_seed(params.seed, counters.meo_calls as u64);
            match meo_iteration(&counted, &x, &g, f, eps_h, params.delta, params.theta, params.eta, params.j_max, seed)
            {
                MeoStep::Certified => break Status::SospCertified,
                MeoStep::Step { d, outcome } => {
                    let record = IterationRecord {
                        step_type: StepType::Meo,
                        alpha: outcome.alpha,
                        j: outcome.j,
                        accepted_by: outcome.accepted_by,
                        f_before: f,
                        f: outcome.f_new,
                        grad_norm: g_norm,
                        d_norm: norm(&d),
                        sigma: gamma_prev,
                        inner_calls: 1,
                        trials: Vec::new(),
                    };
                    (record, d, outcome)
                }
                MeoStep::Failed { status, message: m } => {
                    message = Some(m);
                    break status;
                }
            }
        };

        x = add_scaled(&x, outcome.alpha, &d);
        f = outcome.f_new;
        g = match outcome.grad_new {
            Some(gn) => gn,
            None => counted.gradient_new(&x),
        };
        gammas.push(gamma_prev);
        trace.push(record);
    };

    counted.fill(&mut counters);
    Ok(SolveResult { grad_norm_final: norm(&g), x_final: x, f_final: f, status, trace, counters, gammas, message })
}

fn found_or_increase(b: BoundedSearch) -> Trial {
    match b {
        BoundedSearch::Found { j, alpha, f_new } => {
            Trial::Accept(StepOutcome { alpha, j, f_new, accepted_by: AcceptedBy::Backtracking, grad_new: None })
        }
        BoundedSearch::NotFound => Trial::Increase(IncreaseReason::NoValidJ),
    }
}
