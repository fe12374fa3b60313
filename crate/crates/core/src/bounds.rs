//! Closed-form constants and iteration bounds.
//!
//! These are pure functions of the solver parameters and, where needed, the
//! Hölder data of the problem. The solvers never call them except to size
//! default budgets; tests use them to check iteration counts.

use crate::oracle::HolderClass;

/// Inexact Lipschitz constant `4 H^{2/(1+ν)} ε_g^{−(1−ν)/(1+ν)}`.
pub fn gamma_nu(eps_g: f64, holder: HolderClass) -> f64 {
    let HolderClass { nu, h_nu } = holder;
    4.0 * h_nu.powf(2.0 / (1.0 + nu)) * eps_g.powf(-(1.0 - nu) / (1.0 + nu))
}

pub fn c_sol(eta: f64, theta: f64, zeta: f64) -> f64 {
    let a = 2.0 / (4.0 + zeta + ((4.0 + zeta).powi(2) + 1.0).sqrt());
    let b = 2.0 * (1.0 - eta) * theta / 3.0;
    eta * (a * a).min(b * b / 6.0)
}

pub fn c_nc(eta: f64, theta: f64) -> f64 {
    eta * theta * theta / 4.0
}

/// Requires `ν > 0`.
pub fn c_meo(eta: f64, theta: f64, holder: HolderClass) -> f64 {
    let HolderClass { nu, h_nu } = holder;
    let m = 1f64.min(theta * ((1.0 - eta) / h_nu).powf(1.0 / nu));
    (eta / 2.0) * m * m * 0.5f64.powf((2.0 + nu) / nu)
}

pub fn c_sol_hat(eta: f64, theta: f64) -> f64 {
    let b = 2.0 * (1.0 - eta) * theta / 3.0;
    (eta / 6.0) * (1.0 / 6.0f64).min(b * b)
}

fn ceil_plus_one(x: f64) -> u64 {
    // `as` saturates for huge or infinite x
    (x.ceil() as u64).saturating_add(1)
}

/// Outer-iteration bound for reaching an `ε_g`-FOSP with known Hölder data.
pub fn k1(f_gap: f64, eps_g: f64, eta: f64, theta: f64, zeta: f64, holder: HolderClass) -> u64 {
    let c = c_sol(eta, theta, zeta).min(c_nc(eta, theta));
    ceil_plus_one(f_gap / c * gamma_nu(eps_g, holder).sqrt() * eps_g.powf(-1.5))
}

/// Bound on negative-curvature (eigenvalue-oracle) iterations; `ν > 0`.
pub fn k2(f_gap: f64, eps_h: f64, eta: f64, theta: f64, holder: HolderClass) -> u64 {
    let nu = holder.nu;
    ceil_plus_one(f_gap / c_meo(eta, theta, holder) * eps_h.powf(-(2.0 + nu) / nu))
}

/// `σ(ε_g) = max{γ₋₁, r γ_ν(ε_g)}`.
pub fn sigma_bar(gamma_init: f64, r: f64, eps_g: f64, holder: HolderClass) -> f64 {
    gamma_init.max(r * gamma_nu(eps_g, holder))
}

/// `T = ⌈log(σ/γ₋₁)/log r⌉₊ + 2`.
pub fn inner_trial_bound(sigma_bar: f64, gamma_init: f64, r: f64) -> u64 {
    let raw = ((sigma_bar / gamma_init).ln() / r.ln()).ceil();
    (raw.max(0.0) as u64) + 2
}

pub fn k1_bar(f_gap: f64, eps_g: f64, eta: f64, theta: f64, sigma_bar: f64) -> u64 {
    let c = c_sol_hat(eta, theta).min(c_nc(eta, theta));
    ceil_plus_one(f_gap / c * sigma_bar.sqrt() * eps_g.powf(-1.5))
}

/// `L(δ) = ((1−ν)/(2δ(1+ν)))^{(1−ν)/(1+ν)} H^{2/(1+ν)}` with `0^0 = 1`.
pub fn l_delta(delta: f64, holder: HolderClass) -> f64 {
    let HolderClass { nu, h_nu } = holder;
    let expo = (1.0 - nu) / (1.0 + nu);
    let base = (1.0 - nu) / (2.0 * delta * (1.0 + nu));
    let lead = if expo == 0.0 { 1.0 } else { base.powf(expo) };
    lead * h_nu.powf(2.0 / (1.0 + nu))
}

/// `ψ(t) = ln(144 ((t+2)^{1/2} + 1)² (t+2)⁶ / ζ²)`.
pub fn psi(t: f64, zeta: f64) -> f64 {
    let s = t + 2.0;
    (144.0 * (s.sqrt() + 1.0).powi(2) * s.powi(6) / (zeta * zeta)).ln()
}

/// `min{n, ⌈(√(‖H‖/ε) + 2) ψ(‖H‖/ε)⌉}`.
pub fn capped_cg_iteration_bound(n: usize, norm_h: f64, eps: f64, zeta: f64) -> usize {
    let t = norm_h / eps;
    let raw = ((t.sqrt() + 2.0) * psi(t, zeta)).ceil();
    if raw >= n as f64 {
        n
    } else {
        raw as usize
    }
}

pub use crate::meo::meo_budget;

/// `(γ ε_g)^{1/2} / H ≥ 2^{1+ν} (ε_g/γ)^{ν/2}`; equivalent to `γ ≥ γ_ν(ε_g)`.
pub fn holder_relation_first(gamma: f64, eps_g: f64, holder: HolderClass) -> bool {
    let HolderClass { nu, h_nu } = holder;
    (gamma * eps_g).sqrt() / h_nu >= 2f64.powf(1.0 + nu) * (eps_g / gamma).powf(nu / 2.0)
}

/// `(γ ε_g)^{(1−ν)/2} / H ≥ 2^{1+ν} / γ^ν`; equivalent to `γ ≥ γ_ν(ε_g)`.
pub fn holder_relation_second(gamma: f64, eps_g: f64, holder: HolderClass) -> bool {
    let HolderClass { nu, h_nu } = holder;
    (gamma * eps_g).powf((1.0 - nu) / 2.0) / h_nu >= 2f64.powf(1.0 + nu) / gamma.powf(nu)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn hc(nu: f64, h: f64) -> HolderClass {
        HolderClass::new(nu, h).unwrap()
    }

    #[test]
    fn gamma_special_cases() {
        assert_eq!(gamma_nu(0.3, hc(1.0, 2.0)), 8.0);
        assert!((gamma_nu(0.01, hc(0.0, 1.0)) - 400.0).abs() < 1e-9);
    }

    #[test]
    fn zero_gap_gives_one() {
        let h = hc(1.0, 1.0);
        assert_eq!(k1(0.0, 1e-4, 0.01, 0.5, 0.5, h), 1);
        assert_eq!(k1_bar(0.0, 1e-4, 0.01, 0.5, 10.0), 1);
        assert_eq!(k2(0.0, 1e-2, 0.01, 0.5, h), 1);
    }

    #[test]
    fn trial_bound_positive_part() {
        let h = hc(1.0, 1.0);
        let s = sigma_bar(10.0, 2.0, 1e-4, h);
        assert_eq!(s, 10.0);
        assert_eq!(inner_trial_bound(s, 10.0, 2.0), 2);
        assert_eq!(inner_trial_bound(80.0, 10.0, 2.0), 5);
    }

    #[test]
    fn l_delta_lipschitz_case_is_h() {
        assert_eq!(l_delta(1e-3, hc(1.0, 3.5)), 3.5);
    }

    #[test]
    fn cg_bound_capped_by_n() {
        assert_eq!(capped_cg_iteration_bound(5, 100.0, 1e-3, 0.5), 5);
        assert!(capped_cg_iteration_bound(10_000, 1.0, 1.0, 0.5) < 10_000);
    }
}
