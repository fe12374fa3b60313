//! Fuzz generators and dense-eigensolver checks shared by the contract tests
//! and the acceptance binary.
#![allow(dead_code)]

use nalgebra::{DMatrix, SymmetricEigen};
use ncg_core::bounds::*;
use ncg_core::capped_cg::{CgOutcome, DirectionType};
use ncg_core::linalg::{dot, norm, DenseMatrix, LinearOperator};
use ncg_core::rng::NormalStream;
use ncg_core::{HolderClass, ProblemOracle, SolveResult};

pub fn to_nalgebra(h: &DenseMatrix) -> DMatrix<f64> {
    let n = h.dim();
    DMatrix::from_row_slice(n, n, h.as_slice())
}

/// Eigenvalues in ascending order.
pub fn eigenvalues(h: &DenseMatrix) -> Vec<f64> {
    let mut ev: Vec<f64> = SymmetricEigen::new(to_nalgebra(h)).eigenvalues.iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev
}

pub fn spectral_norm(h: &DenseMatrix) -> f64 {
    let ev = eigenvalues(h);
    ev[0].abs().max(ev[ev.len() - 1].abs())
}

/// `Qᵀ diag(λ) Q` with `Q` orthogonal, from the QR factor of a normal matrix.
pub fn with_spectrum(eigs: &[f64], rng: &mut NormalStream) -> DenseMatrix {
    let n = eigs.len();
    let m = DMatrix::from_fn(n, n, |_, _| rng.normal());
    let q = m.qr().q();
    let a = q.transpose() * DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(eigs)) * &q;
    let sym = (&a + a.transpose()) * 0.5;
    let mut out = DenseMatrix::zeros(n);
    for i in 0..n {
        for j in 0..n {
            out.set(i, j, sym[(i, j)]);
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpectrumKind {
    Indefinite,
    Psd,
    NegativeDefinite,
    Clustered,
}

pub struct FuzzSystem {
    pub h: DenseMatrix,
    pub g: Vec<f64>,
    pub eps: f64,
    pub kind: SpectrumKind,
}

/// A random symmetric system with `n ≤ 30`, a spectrum scale spread over
/// four decades and `ε` spread over three.
pub fn fuzz_system(seed: u64) -> FuzzSystem {
    let mut rng = NormalStream::new(seed);
    let n = 1 + (rng.uniform() * 30.0) as usize;
    let scale = 10f64.powf(rng.uniform() * 4.0 - 2.0);
    let kind = match (rng.uniform() * 4.0) as usize {
        0 => SpectrumKind::Indefinite,
        1 => SpectrumKind::Psd,
        2 => SpectrumKind::NegativeDefinite,
        _ => SpectrumKind::Clustered,
    };
    let eigs: Vec<f64> = (0..n)
        .map(|i| {
            let u = rng.uniform();
            scale
                * match kind {
                    SpectrumKind::Indefinite => 2.0 * u - 1.0,
                    SpectrumKind::Psd => u,
                    SpectrumKind::NegativeDefinite => -u - 0.01,
                    SpectrumKind::Clustered => {
                        if i % 3 == 0 {
                            -1e-3
                        } else {
                            1.0 + 1e-3 * u
                        }
                    }
                }
        })
        .collect();
    let h = with_spectrum(&eigs, &mut rng);
    let g = rng.normal_vec(n);
    let eps = scale * 10f64.powf(-3.0 * rng.uniform());
    FuzzSystem { h, g, eps, kind }
}

/// A matrix with `λ_min ≤ −ε`, or a PSD one when `psd` is set.
pub fn fuzz_meo_matrix(seed: u64, psd: bool) -> (DenseMatrix, f64) {
    let mut rng = NormalStream::new(seed);
    let n = 2 + (rng.uniform() * 29.0) as usize;
    let scale = 10f64.powf(rng.uniform() * 2.0 - 1.0);
    let eps = scale * 10f64.powf(-2.0 * rng.uniform() - 0.5);
    let mut eigs: Vec<f64> =
        (0..n).map(|_| scale * (if psd { rng.uniform() } else { 2.0 * rng.uniform() - 1.0 })).collect();
    if !psd {
        let k = (rng.uniform() * n as f64) as usize % n;
        eigs[k] = eigs[k].min(-eps * (1.0 + rng.uniform()));
    }
    (with_spectrum(&eigs, &mut rng), eps)
}

/// Lemma-style guarantees for one capped-CG output, with relative slack.
pub fn check_cg_outcome(
    h: &DenseMatrix,
    g: &[f64],
    eps: f64,
    zeta: f64,
    out: &CgOutcome,
    slack: f64,
) -> Result<(), String> {
    let d = &out.d;
    let dn = norm(d);
    let hd = h.apply_new(d);
    let dhd = dot(d, &hd);
    match out.d_type {
        DirectionType::Sol => {
            let bar = dhd + 2.0 * eps * dn * dn;
            let scale = (dhd.abs() + 2.0 * eps * dn * dn).max(f64::MIN_POSITIVE);
            if eps * dn * dn > bar + slack * scale {
                return Err(format!("curvature: {} > {bar}", eps * dn * dn));
            }
            if dn > 1.1 * norm(g) / eps * (1.0 + slack) {
                return Err(format!("length: {dn} > 1.1‖g‖/ε = {}", 1.1 * norm(g) / eps));
            }
            let dg = dot(d, g);
            if (dg + bar).abs() > slack * scale.max(dg.abs()) {
                return Err(format!("dᵀg = {dg} vs −dᵀH̄d = {}", -bar));
            }
            let res: Vec<f64> = (0..d.len()).map(|i| hd[i] + 2.0 * eps * d[i] + g[i]).collect();
            let rn = norm(&res);
            let bound = zeta * eps * dn / 2.0;
            // the residual is a difference of O(‖g‖) terms, so its slack scales with ‖g‖
            if rn > bound + slack * norm(g) {
                return Err(format!("residual: {rn} > ζε‖d‖/2 = {bound}"));
            }
        }
        DirectionType::Nc => {
            let dg = dot(d, g);
            if dg > slack * dn * norm(g) {
                return Err(format!("dᵀg = {dg} > 0"));
            }
            if dhd > -eps * dn * dn + slack * (dhd.abs() + eps * dn * dn) {
                return Err(format!("dᵀHd = {dhd} > −ε‖d‖² = {}", -eps * dn * dn));
            }
        }
    }
    Ok(())
}

/// FOSP status, an independently re-evaluated gradient within tolerance,
/// and a trace whose objective never increases and chains step to step.
pub fn check_sound(res: &SolveResult, oracle: &dyn ProblemOracle, f0: f64, eps_g: f64) -> Result<(), String> {
    if !res.status.is_success() {
        return Err(format!("status {:?} ({:?})", res.status, res.message));
    }
    let g = norm(&oracle.gradient_new(&res.x_final));
    if g > eps_g {
        return Err(format!("re-evaluated ‖∇f‖ = {g:e} > {eps_g:e}"));
    }
    if oracle.value(&res.x_final) != res.f_final {
        return Err("reported f_final differs from f(x_final)".into());
    }
    let mut prev = f0;
    for (k, rec) in res.trace.iter().enumerate() {
        if rec.f_before != prev {
            return Err(format!("trace break at {k}: f_before {} vs {prev}", rec.f_before));
        }
        if rec.f > rec.f_before {
            return Err(format!("f increased at {k}: {} -> {}", rec.f_before, rec.f));
        }
        prev = rec.f;
    }
    if prev != res.f_final {
        return Err("last trace value differs from f_final".into());
    }
    Ok(())
}

/// `name arg… expected` rows frozen from 50-digit arithmetic.
pub const FORMULA_TABLE: &str = include_str!("../data/formulas.txt");

pub fn hc(nu: f64, h: f64) -> HolderClass {
    HolderClass::new(nu, h).unwrap()
}

pub fn evaluate_formula(name: &str, a: &[f64]) -> f64 {
    match name {
        "gamma_nu" => gamma_nu(a[0], hc(a[1], a[2])),
        "c_sol" => c_sol(a[0], a[1], a[2]),
        "c_nc" => c_nc(a[0], a[1]),
        "c_meo" => c_meo(a[0], a[1], hc(a[2], a[3])),
        "c_sol_hat" => c_sol_hat(a[0], a[1]),
        "sigma_bar" => sigma_bar(a[0], a[1], a[2], hc(a[3], a[4])),
        "l_delta" => l_delta(a[0], hc(a[1], a[2])),
        "psi" => psi(a[0], a[1]),
        "k1" => k1(a[0], a[1], a[2], a[3], a[4], hc(a[5], a[6])) as f64,
        "k2" => k2(a[0], a[1], a[2], a[3], hc(a[4], a[5])) as f64,
        "inner_trial_bound" => {
            let sb = sigma_bar(a[0], a[1], a[2], hc(a[3], a[4]));
            inner_trial_bound(sb, a[0], a[1]) as f64
        }
        "meo_budget" => meo_budget(a[0] as usize, a[1], a[2], a[3]) as f64,
        other => panic!("unknown formula {other}"),
    }
}
