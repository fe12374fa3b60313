//! Adaptive cubic-regularized Newton baseline.
//!
//! Each iteration approximately minimizes the cubic model
//! `m(s) = gᵀs + ½ sᵀHs + (M/3)‖s‖³` by gradient descent from a random point
//! on the unit sphere, then accepts `x + s` when `m(s) < 0` and
//! `f(x+s) ≤ f(x) + m(s)/2`. The weight `M` doubles after a rejection and
//! halves (down to `H₀/16`) after an acceptance. Subproblem tolerances are
//! `min{0.1, ‖∇f(x^k)‖/10}`.

use crate::error::{NcgError, Result};
use crate::linalg::{add_scaled, dot, is_finite, norm, LinearOperator};
use crate::newton_cg::validate_start;
use crate::oracle::ProblemOracle;
use crate::rng::{derive_seed, NormalStream};
use crate::solve::{AcceptedBy, Counted, Counters, IterationRecord, SolveResult, Status, StepType};

#[derive(Debug, Clone, PartialEq)]
pub struct CrnParams {
    pub eps_g: f64,
    /// Initial cubic weight `H₀`.
    pub h0: f64,
    /// Weight multiplier after a rejected step.
    pub increase: f64,
    /// Weight divisor after an accepted step.
    pub decrease: f64,
    /// Lower bound on the weight, as a fraction of `H₀`.
    pub floor_fraction: f64,
    pub max_outer: usize,
    /// Rejections allowed within one outer iteration.
    pub max_rejections: usize,
    pub max_sub_iters: usize,
    pub seed: u64,
}

impl CrnParams {
    pub fn new(eps_g: f64) -> Self {
        Self {
            eps_g,
            h0: 10.0,
            increase: 2.0,
            decrease: 2.0,
            floor_fraction: 1.0 / 16.0,
            max_outer: 100_000,
            max_rejections: 60,
            max_sub_iters: 20_000,
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.eps_g > 0.0 && self.eps_g.is_finite()) {
            return Err(NcgError::InvalidParameter(format!("eps_g = {} must be positive", self.eps_g)));
        }
        if !(self.h0 > 0.0 && self.h0.is_finite()) {
            return Err(NcgError::InvalidParameter(format!("h0 = {} must be positive", self.h0)));
        }
        if !(self.increase > 1.0 && self.decrease > 1.0) {
            return Err(NcgError::InvalidParameter("weight ratios must exceed 1".into()));
        }
        if !(self.floor_fraction > 0.0 && self.floor_fraction <= 1.0) {
            return Err(NcgError::InvalidParameter("floor_fraction must lie in (0, 1]".into()));
        }
        if self.max_outer == 0 || self.max_rejections == 0 || self.max_sub_iters == 0 {
            return Err(NcgError::InvalidParameter("iteration caps must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CubicOutcome {
    pub s: Vec<f64>,
    /// `m(s)`.
    pub model_value: f64,
    pub grad_norm: f64,
    pub iterations: usize,
    pub converged: bool,
    pub hvp_calls: usize,
}

/// `m(s)` from `gᵀs`, `sᵀHs` and `‖s‖`.
#[inline]
fn model(gs: f64, shs: f64, s_norm: f64, weight: f64) -> f64 {
    gs + 0.5 * shs + weight / 3.0 * s_norm.powi(3)
}

/// Gradient descent on the cubic model with Armijo backtracking.
///
/// Along `s − t r` with `r = ∇m(s)`, every term of `m` is a polynomial in `t`
/// once `Hr` is known, so each iteration costs one product with `H` and the
/// step-size search is free. `Hs` is carried forward by the same recursion.
pub fn cubic_subproblem_gd<O: LinearOperator + ?Sized>(
    g: &[f64],
    h: &O,
    weight: f64,
    tol: f64,
    s0: &[f64],
    max_iters: usize,
) -> Result<CubicOutcome> {
    let n = g.len();
    if h.dim() != n || s0.len() != n {
        return Err(NcgError::DimensionMismatch { expected: n, got: if h.dim() != n { h.dim() } else { s0.len() } });
    }
    if !(weight > 0.0 && tol > 0.0) {
        return Err(NcgError::InvalidParameter(format!("weight = {weight} and tol = {tol} must be positive")));
    }
    let mut s = s0.to_vec();
    let mut hs = h.apply_new(&s);
    let mut hvp_calls = 1;
    let mut hr = vec![0.0; n];
    let mut t = 1.0f64;

    let mut iterations = 0;
    loop {
        let s_norm = norm(&s);
        let r: Vec<f64> = (0..n).map(|i| g[i] + hs[i] + weight * s_norm * s[i]).collect();
        let r_norm = norm(&r);
        if !r_norm.is_finite() {
            return Err(NcgError::NumericalFailure { stage: "cubic subproblem", iteration: iterations });
        }
        let gs = dot(g, &s);
        let shs = dot(&s, &hs);
        let m_s = model(gs, shs, s_norm, weight);
        if r_norm <= tol || iterations >= max_iters {
            return Ok(CubicOutcome {
                s,
                model_value: m_s,
                grad_norm: r_norm,
                iterations,
                converged: r_norm <= tol,
                hvp_calls,
            });
        }
        h.apply(&r, &mut hr);
        hvp_calls += 1;
        let (gr, sr, rr) = (dot(g, &r), dot(&s, &r), r_norm * r_norm);
        let (shr, rhr) = (dot(&s, &hr), dot(&r, &hr));
        let model_at = |t: f64| {
            let gst = gs - t * gr;
            let shst = shs - 2.0 * t * shr + t * t * rhr;
            let nst = (s_norm * s_norm - 2.0 * t * sr + t * t * rr).max(0.0).sqrt();
            model(gst, shst, nst, weight)
        };
        t *= 2.0;
        let mut backtracks = 0;
        while model_at(t) > m_s - 0.5 * t * rr {
            t *= 0.5;
            backtracks += 1;
            if backtracks > 200 {
                return Err(NcgError::NumericalFailure { stage: "cubic subproblem", iteration: iterations });
            }
        }
        for i in 0..n {
            s[i] -= t * r[i];
            hs[i] -= t * hr[i];
        }
        iterations += 1;
    }
}

pub fn acrn_solve<P: ProblemOracle + ?Sized>(oracle: &P, x0: &[f64], params: &CrnParams) -> Result<SolveResult> {
    params.validate()?;
    validate_start(oracle, x0)?;
    let counted = Counted::new(oracle);
    let n = oracle.dim();
    let floor = params.h0 * params.floor_fraction;

    let mut counters = Counters::default();
    let mut trace: Vec<IterationRecord> = Vec::new();
    let mut message = None;
    let mut x = x0.to_vec();
    let mut f = counted.value(&x);
    let mut g = counted.gradient_new(&x);
    let mut weight = params.h0;

    let status = 'outer: loop {
        let g_norm = norm(&g);
        if g_norm <= params.eps_g {
            break Status::Fosp;
        }
        if trace.len() >= params.max_outer {
            break Status::MaxIterations;
        }
        let tol = 0.1f64.min(g_norm / 10.0);
        let h = counted.hessian_at(&x);
        let mut rejections = 0;
        let (s, f_new) = loop {
            let s0 = NormalStream::new(derive_seed(params.seed, counters.cubic_subproblems as u64)).unit_sphere(n);
            let sub = match cubic_subproblem_gd(&g, &*h, weight, tol, &s0, params.max_sub_iters) {
                Ok(sub) => sub,
                Err(e) => {
                    message = Some(e.to_string());
                    break 'outer Status::NumericalFailure;
                }
            };
            counters.cubic_subproblems += 1;
            let x_trial = add_scaled(&x, 1.0, &sub.s);
            let f_trial = counted.value(&x_trial);
            if sub.model_value < 0.0 && f_trial <= f + sub.model_value / 2.0 {
                break (sub.s, f_trial);
            }
            if !is_finite(&sub.s) {
                message = Some("non-finite cubic step".into());
                break 'outer Status::NumericalFailure;
            }
            rejections += 1;
            if rejections > params.max_rejections {
                message = Some(format!("no cubic step accepted after {rejections} weight increases"));
                break 'outer Status::LineSearchFailure;
            }
            weight *= params.increase;
        };
        trace.push(IterationRecord {
            step_type: StepType::Cubic,
            alpha: 1.0,
            j: rejections,
            accepted_by: AcceptedBy::FullStep,
            f_before: f,
            f: f_new,
            grad_norm: g_norm,
            d_norm: norm(&s),
            sigma: weight,
            inner_calls: rejections + 1,
            trials: Vec::new(),
        });
        weight = (weight / params.decrease).max(floor);
        x = add_scaled(&x, 1.0, &s);
        f = f_new;
        g = counted.gradient_new(&x);
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
