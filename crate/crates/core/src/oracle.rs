//! Matrix-free problem abstraction and finite-difference derivative checks.
//!
//! Solvers only ever see a [`ProblemOracle`]: objective value, gradient and
//! Hessian-vector products. Derivatives are always analytic; the FD routines
//! here exist to verify them.

use crate::error::{NcgError, Result};
use crate::linalg::{self, LinearOperator};

pub trait ProblemOracle: Send + Sync {
    fn dim(&self) -> usize;

    fn name(&self) -> &str;

    fn value(&self, x: &[f64]) -> f64;

    fn gradient(&self, x: &[f64], out: &mut [f64]);

    fn hvp(&self, x: &[f64], v: &[f64], out: &mut [f64]);

    /// Hessian operator frozen at `x`.
    ///
    /// Implementations may precompute point-dependent quantities so that each
    /// subsequent product is cheaper than a fresh [`ProblemOracle::hvp`].
    fn hessian_at<'a>(&'a self, x: &[f64]) -> Box<dyn LinearOperator + 'a> {
        let x = x.to_vec();
        Box::new(HvpAt { oracle: self, x })
    }

    fn gradient_new(&self, x: &[f64]) -> Vec<f64> {
        let mut g = vec![0.0; self.dim()];
        self.gradient(x, &mut g);
        g
    }

    fn hvp_new(&self, x: &[f64], v: &[f64]) -> Vec<f64> {
        let mut hv = vec![0.0; self.dim()];
        self.hvp(x, v, &mut hv);
        hv
    }
}

struct HvpAt<'a, P: ?Sized> {
    oracle: &'a P,
    x: Vec<f64>,
}

impl<P: ProblemOracle + ?Sized> LinearOperator for HvpAt<'_, P> {
    fn dim(&self) -> usize {
        self.oracle.dim()
    }

    fn apply(&self, v: &[f64], out: &mut [f64]) {
        self.oracle.hvp(&self.x, v, out)
    }
}

impl<P: ProblemOracle + ?Sized> ProblemOracle for &P {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn name(&self) -> &str {
        (**self).name()
    }
    fn value(&self, x: &[f64]) -> f64 {
        (**self).value(x)
    }
    fn gradient(&self, x: &[f64], out: &mut [f64]) {
        (**self).gradient(x, out)
    }
    fn hvp(&self, x: &[f64], v: &[f64], out: &mut [f64]) {
        (**self).hvp(x, v, out)
    }
    fn hessian_at<'a>(&'a self, x: &[f64]) -> Box<dyn LinearOperator + 'a> {
        (**self).hessian_at(x)
    }
}

impl<P: ProblemOracle + ?Sized> ProblemOracle for Box<P> {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn name(&self) -> &str {
        (**self).name()
    }
    fn value(&self, x: &[f64]) -> f64 {
        (**self).value(x)
    }
    fn gradient(&self, x: &[f64], out: &mut [f64]) {
        (**self).gradient(x, out)
    }
    fn hvp(&self, x: &[f64], v: &[f64], out: &mut [f64]) {
        (**self).hvp(x, v, out)
    }
    fn hessian_at<'a>(&'a self, x: &[f64]) -> Box<dyn LinearOperator + 'a> {
        (**self).hessian_at(x)
    }
}

type ValueFn = Box<dyn Fn(&[f64]) -> f64 + Send + Sync>;
type GradFn = Box<dyn Fn(&[f64], &mut [f64]) + Send + Sync>;
type HvpFn = Box<dyn Fn(&[f64], &[f64], &mut [f64]) + Send + Sync>;

/// Problem assembled from user callbacks.
pub struct FnOracle {
    dim: usize,
    name: String,
    value: ValueFn,
    gradient: GradFn,
    hvp: HvpFn,
}

impl FnOracle {
    pub fn new(
        dim: usize,
        name: impl Into<String>,
        value: impl Fn(&[f64]) -> f64 + Send + Sync + 'static,
        gradient: impl Fn(&[f64], &mut [f64]) + Send + Sync + 'static,
        hvp: impl Fn(&[f64], &[f64], &mut [f64]) + Send + Sync + 'static,
    ) -> Self {
        Self { dim, name: name.into(), value: Box::new(value), gradient: Box::new(gradient), hvp: Box::new(hvp) }
    }
}

impl ProblemOracle for FnOracle {
    fn dim(&self) -> usize {
        self.dim
    }
    fn name(&self) -> &str {
        &self.name
    }
    fn value(&self, x: &[f64]) -> f64 {
        (self.value)(x)
    }
    fn gradient(&self, x: &[f64], out: &mut [f64]) {
        (self.gradient)(x, out)
    }
    fn hvp(&self, x: &[f64], v: &[f64], out: &mut [f64]) {
        (self.hvp)(x, v, out)
    }
}

/// Hölder exponent `nu` and modulus `h_nu` of the Hessian.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HolderClass {
    pub nu: f64,
    pub h_nu: f64,
}

impl HolderClass {
    pub fn new(nu: f64, h_nu: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&nu) {
            return Err(NcgError::InvalidParameter(format!("nu = {nu} not in [0, 1]")));
        }
        if !(h_nu > 0.0 && h_nu.is_finite()) {
            return Err(NcgError::InvalidParameter(format!("h_nu = {h_nu} must be positive")));
        }
        Ok(Self { nu, h_nu })
    }
}

/// FD step `1e-6 * (1 + ‖x‖)`.
pub fn default_fd_step(x: &[f64]) -> f64 {
    1e-6 * (1.0 + linalg::norm(x))
}

/// Max over coordinates of `|central difference − ∇f_i| / (1 + |∇f_i|)`.
pub fn check_gradient_fd<P: ProblemOracle + ?Sized>(oracle: &P, x: &[f64], h: f64) -> Result<f64> {
    if !(h > 0.0) {
        return Err(NcgError::InvalidParameter(format!("FD step h = {h} must be positive")));
    }
    if x.len() != oracle.dim() {
        return Err(NcgError::DimensionMismatch { expected: oracle.dim(), got: x.len() });
    }
    if !linalg::is_finite(x) {
        return Err(NcgError::Precondition("x must be finite"));
    }
    let g = oracle.gradient_new(x);
    let mut xp = x.to_vec();
    let mut worst = 0.0f64;
    for i in 0..x.len() {
        xp[i] = x[i] + h;
        let fp = oracle.value(&xp);
        xp[i] = x[i] - h;
        let fm = oracle.value(&xp);
        xp[i] = x[i];
        if !(fp.is_finite() && fm.is_finite() && g[i].is_finite()) {
            return Err(NcgError::NonFiniteEvaluation { coordinate: i });
        }
        let fd = (fp - fm) / (2.0 * h);
        worst = worst.max((fd - g[i]).abs() / (1.0 + g[i].abs()));
    }
    Ok(worst)
}

/// Compares `hvp(x, v)` against `(∇f(x+hv) − ∇f(x−hv)) / 2h`, coordinatewise
/// relative to `1 + |hvp_i|`.
pub fn check_hvp_fd<P: ProblemOracle + ?Sized>(oracle: &P, x: &[f64], v: &[f64], h: f64) -> Result<f64> {
    if !(h > 0.0) {
        return Err(NcgError::InvalidParameter(format!("FD step h = {h} must be positive")));
    }
    if x.len() != oracle.dim() || v.len() != oracle.dim() {
        return Err(NcgError::DimensionMismatch { expected: oracle.dim(), got: x.len().min(v.len()) });
    }
    if !(linalg::norm(v) > 0.0) {
        return Err(NcgError::Precondition("probe direction v must be nonzero"));
    }
    let hv = oracle.hvp_new(x, v);
    let gp = oracle.gradient_new(&linalg::add_scaled(x, h, v));
    let gm = oracle.gradient_new(&linalg::add_scaled(x, -h, v));
    let mut worst = 0.0f64;
    for i in 0..x.len() {
        if !(gp[i].is_finite() && gm[i].is_finite() && hv[i].is_finite()) {
            return Err(NcgError::NonFiniteEvaluation { coordinate: i });
        }
        let fd = (gp[i] - gm[i]) / (2.0 * h);
        worst = worst.max((fd - hv[i]).abs() / (1.0 + hv[i].abs()));
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn half_norm_sq(n: usize) -> FnOracle {
        FnOracle::new(
            n,
            "half-norm-sq",
            |x| 0.5 * linalg::dot(x, x),
            |x, g| g.copy_from_slice(x),
            |_, v, hv| hv.copy_from_slice(v),
        )
    }

    #[test]
    fn quadratic_gradient_check_is_tight() {
        let p = half_norm_sq(4);
        let x = [0.3, -1.2, 2.0, 0.0];
        assert!(check_gradient_fd(&p, &x, 1e-6).unwrap() <= 1e-7);
    }

    #[test]
    fn quadratic_hvp_check_identity() {
        let p = half_norm_sq(3);
        let x = [1.0, 2.0, 3.0];
        let e1 = [1.0, 0.0, 0.0];
        assert_eq!(p.hvp_new(&x, &e1), e1.to_vec());
        assert!(check_hvp_fd(&p, &x, &e1, 1e-6).unwrap() <= 1e-7);
    }

    #[test]
    fn non_finite_value_reports_coordinate() {
        let p = FnOracle::new(
            2,
            "log-barrier",
            |x| -(x[1]).ln(),
            |x, g| {
                g[0] = 0.0;
                g[1] = -1.0 / x[1];
            },
            |_, _, hv| hv.fill(0.0),
        );
        let err = check_gradient_fd(&p, &[0.0, 1e-9], 1e-6).unwrap_err();
        assert!(matches!(err, NcgError::NonFiniteEvaluation { coordinate: 1 }));
    }

    #[test]
    fn rejects_bad_inputs() {
        let p = half_norm_sq(2);
        assert!(check_gradient_fd(&p, &[0.0, 0.0], 0.0).is_err());
        assert!(check_hvp_fd(&p, &[0.0, 0.0], &[0.0, 0.0], 1e-6).is_err());
        assert!(HolderClass::new(1.5, 1.0).is_err());
        assert!(HolderClass::new(0.5, 0.0).is_err());
    }

    #[test]
    fn default_step_scales_with_x() {
        assert_eq!(default_fd_step(&[0.0; 3]), 1e-6);
        assert!((default_fd_step(&[3.0, 4.0]) - 6e-6).abs() < 1e-20);
    }
}
