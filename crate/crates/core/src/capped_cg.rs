//! Capped conjugate gradient for the damped system `(H + 2εI) d = −g`.
//!
//! Runs plain CG on `H̄ = H + 2εI` while watching curvature along the
//! iterates `y`, residuals `r` and search directions `p`. It stops with
//! either an approximate solution (`Sol`) or a direction whose curvature
//! with respect to `H` is below `−ε` (`Nc`). The running cap `U` tracks the
//! largest observed ratio `‖Hv‖/‖v‖` and drives the residual blow-up test.
//!
//! Every branch is evaluated with strict floating-point comparisons exactly
//! as stated; callers that need slack apply it when checking the output.
//!
//! `‖Hy^j‖` and `‖Hr^j‖` are obtained from explicit products, so each
//! iteration spends three products with `H`. Products used for the search
//! direction are counted in [`CgOutcome::hvp_calls`], the others in
//! [`CgOutcome::extra_hvp_calls`].

use crate::error::{NcgError, Result};
use crate::linalg::{axpy, dot, norm, LinearOperator};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum DirectionType {
    Sol,
    Nc,
}

/// Curvature cap `U` and the quantities derived from it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CapParams {
    pub u: f64,
    pub kappa: f64,
    pub zeta_hat: f64,
    pub tau: f64,
    pub t_cap: f64,
    pub eps: f64,
    pub zeta: f64,
}

impl CapParams {
    pub fn new(u: f64, eps: f64, zeta: f64) -> Self {
        let kappa = (u + 2.0 * eps) / eps;
        let sk = kappa.sqrt();
        let tau = sk / (sk + 1.0);
        Self {
            u,
            kappa,
            zeta_hat: zeta / (3.0 * kappa),
            tau,
            t_cap: 4.0 * kappa.powi(4) / (1.0 - tau.sqrt()).powi(2),
            eps,
            zeta,
        }
    }
}

/// Raises the cap to `candidate_u` when it is larger; otherwise a no-op.
pub fn update_cap_params(current: &CapParams, candidate_u: f64) -> CapParams {
    if candidate_u > current.u {
        CapParams::new(candidate_u, current.eps, current.zeta)
    } else {
        *current
    }
}

#[derive(Debug, Clone)]
pub struct CgOutcome {
    pub d: Vec<f64>,
    pub d_type: DirectionType,
    /// Number of completed CG updates `j` at termination.
    pub iterations: usize,
    pub final_params: CapParams,
    pub hvp_calls: usize,
    pub extra_hvp_calls: usize,
}

impl CgOutcome {
    pub fn total_hvp_calls(&self) -> usize {
        self.hvp_calls + self.extra_hvp_calls
    }
}

/// Runs capped CG with initial cap `U = 0`.
pub fn capped_cg<O: LinearOperator + ?Sized>(h: &O, g: &[f64], eps: f64, zeta: f64) -> Result<CgOutcome> {
    capped_cg_with_cap(h, g, eps, zeta, 0.0)
}

pub fn capped_cg_with_cap<O: LinearOperator + ?Sized>(
    h: &O,
    g: &[f64],
    eps: f64,
    zeta: f64,
    initial_u: f64,
) -> Result<CgOutcome> {
    let n = g.len();
    if h.dim() != n {
        return Err(NcgError::DimensionMismatch { expected: h.dim(), got: n });
    }
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(NcgError::InvalidParameter(format!("eps = {eps} must be positive")));
    }
    if !(zeta > 0.0 && zeta < 1.0) {
        return Err(NcgError::InvalidParameter(format!("zeta = {zeta} not in (0, 1)")));
    }
    if !(initial_u >= 0.0) {
        return Err(NcgError::InvalidParameter(format!("U = {initial_u} must be nonnegative")));
    }
    let r0_norm = norm(g);
    if r0_norm == 0.0 {
        return Err(NcgError::Precondition("capped CG requires g != 0"));
    }
    if !r0_norm.is_finite() {
        return Err(NcgError::NumericalFailure { stage: "capped_cg", iteration: 0 });
    }

    let mut hvp_calls = 0usize;
    let mut extra = 0usize;
    let apply = |v: &[f64], out: &mut [f64], counter: &mut usize| {
        *counter += 1;
        h.apply(v, out);
    };
    // v^T (H + 2εI) v given Hv
    let bar_curv = |v: &[f64], hv: &[f64]| dot(v, hv) + 2.0 * eps * dot(v, v);

    let mut cap = CapParams::new(initial_u, eps, zeta);
    let mut y = vec![0.0; n];
    let mut hy = vec![0.0; n];
    let mut r = g.to_vec();
    let mut p: Vec<f64> = g.iter().map(|v| -v).collect();
    let mut hp = vec![0.0; n];
    let mut hr = vec![0.0; n];
    apply(&p, &mut hp, &mut hvp_calls);

    let finish = |d: Vec<f64>, d_type, j, cap, hvp_calls, extra| {
        Ok(CgOutcome { d, d_type, iterations: j, final_params: cap, hvp_calls, extra_hvp_calls: extra })
    };

    if bar_curv(&p, &hp) < eps * dot(&p, &p) {
        return finish(p, DirectionType::Nc, 0, cap, hvp_calls, extra);
    } else if norm(&hp) > cap.u * norm(&p) {
        cap = update_cap_params(&cap, norm(&hp) / norm(&p));
    }

    // y^0 = 0 and H y^0 = 0 are kept for the blow-up search.
    let mut ys: Vec<Vec<f64>> = vec![y.clone()];
    let mut hys: Vec<Vec<f64>> = vec![hy.clone()];

    let hard_cap = 100 * (n + 10);
    let mut j = 0usize;
    loop {
        let ptp_bar = bar_curv(&p, &hp);
        let rr = dot(&r, &r);
        let alpha = rr / ptp_bar;
        if !alpha.is_finite() {
            return Err(NcgError::NumericalFailure { stage: "capped_cg", iteration: j });
        }
        axpy(alpha, &p, &mut y);
        // r += alpha * (H + 2εI) p
        for i in 0..n {
            r[i] += alpha * (hp[i] + 2.0 * eps * p[i]);
        }
        let beta = dot(&r, &r) / rr;
        for i in 0..n {
            p[i] = -r[i] + beta * p[i];
        }
        j += 1;

        apply(&p, &mut hp, &mut hvp_calls);
        apply(&y, &mut hy, &mut extra);
        apply(&r, &mut hr, &mut extra);
        if !(hp.iter().chain(&hy).chain(&hr).all(|v| v.is_finite()) && beta.is_finite()) {
            return Err(NcgError::NumericalFailure { stage: "capped_cg", iteration: j });
        }

        let (p_norm, y_norm, r_norm) = (norm(&p), norm(&y), norm(&r));
        if norm(&hp) > cap.u * p_norm {
            cap = update_cap_params(&cap, norm(&hp) / p_norm);
        }
        if norm(&hy) > cap.u * y_norm {
            cap = update_cap_params(&cap, norm(&hy) / y_norm);
        }
        if norm(&hr) > cap.u * r_norm {
            cap = update_cap_params(&cap, norm(&hr) / r_norm);
        }

        if bar_curv(&y, &hy) < eps * y_norm * y_norm {
            return finish(y, DirectionType::Nc, j, cap, hvp_calls, extra);
        } else if r_norm <= cap.zeta_hat * r0_norm {
            return finish(y, DirectionType::Sol, j, cap, hvp_calls, extra);
        } else if bar_curv(&p, &hp) < eps * p_norm * p_norm {
            return finish(p, DirectionType::Nc, j, cap, hvp_calls, extra);
        } else if r_norm > cap.t_cap.sqrt() * cap.tau.powf(j as f64 / 2.0) * r0_norm {
            let alpha = dot(&r, &r) / bar_curv(&p, &hp);
            let mut y_next = y.clone();
            axpy(alpha, &p, &mut y_next);
            let mut hy_next = vec![0.0; n];
            apply(&y_next, &mut hy_next, &mut extra);
            for (yi, hyi) in ys.iter().zip(&hys).take(j) {
                let diff: Vec<f64> = y_next.iter().zip(yi).map(|(a, b)| a - b).collect();
                let hdiff: Vec<f64> = hy_next.iter().zip(hyi).map(|(a, b)| a - b).collect();
                let dd = dot(&diff, &diff);
                if bar_curv(&diff, &hdiff) < eps * dd {
                    return finish(diff, DirectionType::Nc, j, cap, hvp_calls, extra);
                }
            }
            return Err(NcgError::NumericalFailure { stage: "capped_cg blow-up search", iteration: j });
        }

        ys.push(y.clone());
        hys.push(hy.clone());
        if j >= hard_cap {
            return Err(NcgError::NumericalFailure { stage: "capped_cg iteration cap", iteration: j });
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::DenseMatrix;

    #[test]
    fn identity_gives_exact_step() {
        for n in 1..=10 {
            let h = DenseMatrix::identity(n);
            let mut g = vec![0.0; n];
            g[0] = 1.0;
            let out = capped_cg(&h, &g, 1.0, 0.5).unwrap();
            assert_eq!(out.d_type, DirectionType::Sol);
            assert_eq!(out.iterations, 1);
            assert!((out.d[0] + 1.0 / 3.0).abs() < 1e-15);
            assert!(out.d[1..].iter().all(|v| *v == 0.0));
        }
    }

    #[test]
    fn negative_identity_is_caught_before_loop() {
        let h = DenseMatrix::from_diagonal(&[-1.0, -1.0]);
        let out = capped_cg(&h, &[1.0, 0.0], 0.5, 0.5).unwrap();
        assert_eq!(out.d_type, DirectionType::Nc);
        assert_eq!(out.iterations, 0);
        assert_eq!(out.d, vec![-1.0, 0.0]);
    }

    #[test]
    fn cap_params_update() {
        let zeta = 0.4;
        let p = update_cap_params(&CapParams::new(0.0, 1.0, zeta), 1.0);
        assert_eq!(p.kappa, 3.0);
        assert!((p.zeta_hat - zeta / 9.0).abs() < 1e-16);
        assert!((p.tau - 3f64.sqrt() / (3f64.sqrt() + 1.0)).abs() < 1e-16);
        assert_eq!(update_cap_params(&p, 1.0), p);
        assert_eq!(update_cap_params(&p, 0.5), p);
    }

    #[test]
    fn zero_gradient_is_rejected() {
        let h = DenseMatrix::identity(2);
        assert!(matches!(capped_cg(&h, &[0.0, 0.0], 1.0, 0.5), Err(NcgError::Precondition(_))));
        assert!(capped_cg(&h, &[1.0, 0.0], 0.0, 0.5).is_err());
        assert!(capped_cg(&h, &[1.0, 0.0], 1.0, 1.0).is_err());
    }

    #[test]
    fn nan_operator_is_a_numerical_failure() {
        let h = crate::linalg::FnOperator::new(2, |v: &[f64], out: &mut [f64]| {
            out[0] = v[0];
            out[1] = f64::NAN * v[1];
        });
        let err = capped_cg(&h, &[1.0, 1.0], 1.0, 0.5).unwrap_err();
        assert!(matches!(err, NcgError::NumericalFailure { .. }));
    }
}
