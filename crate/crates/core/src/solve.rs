//! Result and trace types shared by all drivers.

use std::sync::atomic::{AtomicUsize, Ordering};

use serde::{Deserialize, Serialize};

use crate::capped_cg::DirectionType;
use crate::linalg::LinearOperator;
use crate::oracle::ProblemOracle;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Status {
    /// `‖∇f(x)‖ ≤ ε_g`.
    Fosp,
    /// FOSP plus an eigenvalue-oracle certificate for `λ_min ≥ −ε_H`.
    SospCertified,
    MaxIterations,
    LineSearchFailure,
    /// The inner σ-trial loop of the parameter-free method hit its cap.
    InnerTrialLimit,
    NumericalFailure,
}

impl Status {
    pub fn is_success(self) -> bool {
        matches!(self, Status::Fosp | Status::SospCertified)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum StepType {
    Sol,
    Nc,
    Meo,
    /// Accepted cubic-regularized step of the baseline.
    Cubic,
}

impl From<DirectionType> for StepType {
    fn from(d: DirectionType) -> Self {
        match d {
            DirectionType::Sol => StepType::Sol,
            DirectionType::Nc => StepType::Nc,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum AcceptedBy {
    /// `f(x+d) ≤ f(x)` and `‖∇f(x+d)‖ ≤ ε_g`; `α = 1` without a decrease test.
    FullStep,
    Backtracking,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum IncreaseReason {
    /// SOL direction with `6‖d‖ < (ε_g/σ_t)^{1/2}`.
    SmallStep,
    /// No admissible step inside the bounded line-search window.
    NoValidJ,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum TrialOutcome {
    Accepted { alpha: f64 },
    SigmaIncreased(IncreaseReason),
}

/// One σ-trial of the parameter-free method.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InnerTrialRecord {
    pub t: usize,
    pub sigma_t: f64,
    pub d_type: DirectionType,
    pub outcome: TrialOutcome,
}

/// One accepted outer step `x^{k+1} = x^k + α_k d^k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub step_type: StepType,
    pub alpha: f64,
    /// Backtracking exponent with `α = θ^j`.
    pub j: usize,
    pub accepted_by: AcceptedBy,
    pub f_before: f64,
    pub f: f64,
    /// `‖∇f(x^k)‖` at the start of the iteration.
    pub grad_norm: f64,
    pub d_norm: f64,
    /// Damping weight used: `γ_ν(ε_g)` for the known-parameter method,
    /// `γ_k = σ_t` for the parameter-free one, the cubic weight for the baseline.
    pub sigma: f64,
    /// Subproblem solves in this iteration (capped CG, MEO or cubic).
    pub inner_calls: usize,
    pub trials: Vec<InnerTrialRecord>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counters {
    pub capped_cg_calls: usize,
    pub cg_iterations: usize,
    pub meo_calls: usize,
    pub cubic_subproblems: usize,
    pub hvp_count: usize,
    pub grad_count: usize,
    pub f_count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveResult {
    pub x_final: Vec<f64>,
    pub f_final: f64,
    pub grad_norm_final: f64,
    pub status: Status,
    pub trace: Vec<IterationRecord>,
    pub counters: Counters,
    /// `γ_k` per outer iteration (parameter-free method only).
    pub gammas: Vec<f64>,
    pub message: Option<String>,
}

impl SolveResult {
    pub fn outer_iterations(&self) -> usize {
        self.trace.len()
    }

    /// Benchmark unit: damped Newton systems for the Newton-CG methods,
    /// cubic subproblems for the baseline.
    pub fn subproblems(&self) -> usize {
        self.counters.capped_cg_calls + self.counters.cubic_subproblems
    }
}

/// Oracle wrapper that counts evaluations for one solve.
pub(crate) struct Counted<'a, P: ?Sized> {
    inner: &'a P,
    f: AtomicUsize,
    grad: AtomicUsize,
    hvp: AtomicUsize,
}

impl<'a, P: ProblemOracle + ?Sized> Counted<'a, P> {
    pub fn new(inner: &'a P) -> Self {
        Self { inner, f: AtomicUsize::new(0), grad: AtomicUsize::new(0), hvp: AtomicUsize::new(0) }
    }

    pub fn fill(&self, c: &mut Counters) {
        c.f_count = self.f.load(Ordering::Relaxed);
        c.grad_count = self.grad.load(Ordering::Relaxed);
        c.hvp_count = self.hvp.load(Ordering::Relaxed);
    }
}

struct CountedOp<'a> {
    op: Box<dyn LinearOperator + 'a>,
    count: &'a AtomicUsize,
}

impl LinearOperator for CountedOp<'_> {
    fn dim(&self) -> usize {
        self.op.dim()
    }

    fn apply(&self, v: &[f64], out: &mut [f64]) {
        self.count.fetch_add(1, Ordering::Relaxed);
        self.op.apply(v, out)
    }
}

impl<P: ProblemOracle + ?Sized> ProblemOracle for Counted<'_, P> {
    fn dim(&self) -> usize {
        self.inner.dim()
    }
    fn name(&self) -> &str {
        self.inner.name()
    }
    fn value(&self, x: &[f64]) -> f64 {
        self.f.fetch_add(1, Ordering::Relaxed);
        self.inner.value(x)
    }
    fn gradient(&self, x: &[f64], out: &mut [f64]) {
        self.grad.fetch_add(1, Ordering::Relaxed);
        self.inner.gradient(x, out)
    }
    fn hvp(&self, x: &[f64], v: &[f64], out: &mut [f64]) {
        self.hvp.fetch_add(1, Ordering::Relaxed);
        self.inner.hvp(x, v, out)
    }
    fn hessian_at<'b>(&'b self, x: &[f64]) -> Box<dyn LinearOperator + 'b> {
        Box::new(CountedOp { op: self.inner.hessian_at(x), count: &self.hvp })
    }
}
