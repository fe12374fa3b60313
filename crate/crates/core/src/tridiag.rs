//! Eigen-decomposition of a symmetric tridiagonal matrix by implicit QL
//! iteration with Wilkinson-type shifts.

use crate::error::{NcgError, Result};

const MAX_SWEEPS: usize = 64;

#[derive(Debug, Clone)]
pub struct TridiagEigen {
    pub values: Vec<f64>,
    /// Column-major: eigenvector `k` is `vectors[k * n .. (k + 1) * n]`.
    vectors: Vec<f64>,
    n: usize,
}

impl TridiagEigen {
    pub fn vector(&self, k: usize) -> &[f64] {
        &self.vectors[k * self.n..(k + 1) * self.n]
    }

    /// Index of the smallest eigenvalue.
    pub fn argmin(&self) -> usize {
        let mut best = 0;
        for (i, v) in self.values.iter().enumerate() {
            if *v < self.values[best] {
                best = i;
            }
        }
        best
    }
}

/// `diag` has length `n`, `off` has length `n - 1` (sub/super-diagonal).
pub fn symmetric_tridiagonal_eigen(diag: &[f64], off: &[f64]) -> Result<TridiagEigen> {
    let n = diag.len();
    if n == 0 {
        return Ok(TridiagEigen { values: vec![], vectors: vec![], n: 0 });
    }
    if off.len() + 1 != n {
        return Err(NcgError::DimensionMismatch { expected: n - 1, got: off.len() });
    }
    let mut d = diag.to_vec();
    let mut e = off.to_vec();
    e.push(0.0);
    // z[k * n + i]: component i of eigenvector k
    let mut z = vec![0.0; n * n];
    for k in 0..n {
        z[k * n + k] = 1.0;
    }

    for l in 0..n {
        let mut sweeps = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            sweeps += 1;
            if sweeps > MAX_SWEEPS {
                return Err(NcgError::NumericalFailure { stage: "tridiagonal QL", iteration: sweeps });
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut underflow = false;
            let mut i = m;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                for k in 0..n {
                    let zi1 = z[(i + 1) * n + k];
                    let zi = z[i * n + k];
                    z[(i + 1) * n + k] = s * zi + c * zi1;
                    z[i * n + k] = c * zi - s * zi1;
                }
            }
            if underflow {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    if !d.iter().all(|v| v.is_finite()) {
        return Err(NcgError::NumericalFailure { stage: "tridiagonal QL", iteration: 0 });
    }
    Ok(TridiagEigen { values: d, vectors: z, n })
}
