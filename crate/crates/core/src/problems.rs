//! Seeded benchmark problems with analytic derivatives.
//!
//! * infeasibility detection: `f(x) = (1/m) Σ (xᵀA_i x + b_iᵀx + c_i)₊^p`
//! * single-layer RePU training: `f(x) = (1/m) Σ φ((a_iᵀx)₊^p − b_i)` with
//!   `φ(t) = t²/(1+t²)`
//! * convex quadratics `½ xᵀQx` with prescribed spectrum
//!
//! All randomness comes from one [`NormalStream`] per instance, consumed in
//! the order the fields are listed in each generator's documentation.
//!
//! Instances serialize to a plain text format:
//!
//! ```text
//! ncg-instance v1
//! family infeasibility
//! n 10
//! m 3
//! p 2.5
//! seed 0
//! values 330
//! <one f64 per line>
//! ```
//!
//! The payload is, per term `i`: `A_i` row-major then `b_i` then `c_i`
//! (infeasibility); `a_i` then `b_i` (RePU). Quadratics store the
//! eigenvalues followed by `Q` row-major, with `m = 0` and `p = 0`.
//! Floats are written in Rust's shortest round-trip form.

use std::fmt;
use std::io::{BufRead, Write};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{NcgError, Result};
use crate::linalg::{dot, DenseMatrix, LinearOperator};
use crate::oracle::ProblemOracle;
use crate::rng::NormalStream;

const FORMAT_HEADER: &str = "ncg-instance v1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Infeasibility,
    Repu,
    Quadratic,
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Family::Infeasibility => "infeasibility",
            Family::Repu => "repu",
            Family::Quadratic => "quadratic",
        })
    }
}

impl FromStr for Family {
    type Err = NcgError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "infeasibility" => Ok(Family::Infeasibility),
            "repu" => Ok(Family::Repu),
            "quadratic" => Ok(Family::Quadratic),
            other => Err(NcgError::Config(format!("unknown family {other:?}"))),
        }
    }
}

/// `u₊^e`, zero for `u ≤ 0`.
#[inline]
fn pos_pow(u: f64, e: f64) -> f64 {
    if u > 0.0 {
        u.powf(e)
    } else {
        0.0
    }
}

fn check_sizes(n: usize, m: usize, p: f64) -> Result<()> {
    if n == 0 || m == 0 {
        return Err(NcgError::InvalidParameter(format!("n = {n} and m = {m} must be at least 1")));
    }
    if !(p > 2.0 && p.is_finite()) {
        return Err(NcgError::InvalidParameter(format!("p = {p} must exceed 2")));
    }
    Ok(())
}

/// How the matrices `A_i` of an infeasibility instance are drawn from an
/// `n×n` standard normal `M`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InfeasibilityRecipe {
    /// `A_i = (M + Mᵀ)/(2√n)`, indefinite.
    #[default]
    Symmetric,
    /// `A_i = M Mᵀ/n`, positive semidefinite.
    Gram,
}

impl FromStr for InfeasibilityRecipe {
    type Err = NcgError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "symmetric" => Ok(InfeasibilityRecipe::Symmetric),
            "gram" => Ok(InfeasibilityRecipe::Gram),
            other => Err(NcgError::Config(format!("unknown infeasibility recipe {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct InfeasibilityInstance {
    pub n: usize,
    pub m: usize,
    pub p: f64,
    pub seed: u64,
    pub a: Vec<DenseMatrix>,
    pub b: Vec<Vec<f64>>,
    pub c: Vec<f64>,
}

/// Draws, for each `i` in turn, an `n×n` standard normal `M` (row-major),
/// then `b_i`, then `c_i`; `A_i = (M + Mᵀ)/(2√n)`.
pub fn gen_infeasibility(n: usize, m: usize, p: f64, seed: u64) -> Result<InfeasibilityInstance> {
    gen_infeasibility_with(n, m, p, seed, InfeasibilityRecipe::Symmetric)
}

/// As [`gen_infeasibility`] with a choice of how `A_i` is formed from `M`.
pub fn gen_infeasibility_with(
    n: usize,
    m: usize,
    p: f64,
    seed: u64,
    recipe: InfeasibilityRecipe,
) -> Result<InfeasibilityInstance> {
    check_sizes(n, m, p)?;
    let mut rng = NormalStream::new(seed);
    let mut a = Vec::with_capacity(m);
    let mut b = Vec::with_capacity(m);
    let mut c = Vec::with_capacity(m);
    for _ in 0..m {
        let raw = rng.normal_vec(n * n);
        let mut ai = DenseMatrix::zeros(n);
        match recipe {
            InfeasibilityRecipe::Symmetric => {
                let s = 1.0 / (2.0 * (n as f64).sqrt());
                for r in 0..n {
                    for col in 0..n {
                        ai.set(r, col, s * (raw[r * n + col] + raw[col * n + r]));
                    }
                }
            }
            InfeasibilityRecipe::Gram => {
                for r in 0..n {
                    for col in r..n {
                        let v = dot(&raw[r * n..(r + 1) * n], &raw[col * n..(col + 1) * n]) / n as f64;
                        ai.set(r, col, v);
                        ai.set(col, r, v);
                    }
                }
            }
        }
        a.push(ai);
        b.push(rng.normal_vec(n));
        c.push(rng.normal());
    }
    Ok(InfeasibilityInstance { n, m, p, seed, a, b, c })
}

impl InfeasibilityInstance {
    /// `q_i(x)` and `w_i = 2A_i x + b_i` for every term.
    fn terms(&self, x: &[f64]) -> Vec<(f64, Vec<f64>)> {
        let mut ax = vec![0.0; self.n];
        (0..self.m)
            .map(|i| {
                self.a[i].matvec(x, &mut ax);
                let q = dot(x, &ax) + dot(&self.b[i], x) + self.c[i];
                let w = ax.iter().zip(&self.b[i]).map(|(axj, bj)| 2.0 * axj + bj).collect();
                (q, w)
            })
            .collect()
    }

    fn hessian_dense(&self, x: &[f64]) -> DenseMatrix {
        let n = self.n;
        let p = self.p;
        let inv_m = 1.0 / self.m as f64;
        let mut h = vec![0.0; n * n];
        for (i, (q, w)) in self.terms(x).into_iter().enumerate() {
            if q <= 0.0 {
                continue;
            }
            let s1 = inv_m * p * (p - 1.0) * pos_pow(q, p - 2.0);
            let s2 = inv_m * 2.0 * p * pos_pow(q, p - 1.0);
            let ai = self.a[i].as_slice();
            for r in 0..n {
                let row = &mut h[r * n..(r + 1) * n];
                let wr = s1 * w[r];
                for (col, hv) in row.iter_mut().enumerate() {
                    *hv += wr * w[col] + s2 * ai[r * n + col];
                }
            }
        }
        DenseMatrix::from_row_major(n, h).expect("n*n entries")
    }
}

impl ProblemOracle for InfeasibilityInstance {
    fn dim(&self) -> usize {
        self.n
    }

    fn name(&self) -> &str {
        "infeasibility"
    }

    fn value(&self, x: &[f64]) -> f64 {
        let mut ax = vec![0.0; self.n];
        let total: f64 = (0..self.m)
            .map(|i| {
                self.a[i].matvec(x, &mut ax);
                pos_pow(dot(x, &ax) + dot(&self.b[i], x) + self.c[i], self.p)
            })
            .sum();
        total / self.m as f64
    }

    fn gradient(&self, x: &[f64], out: &mut [f64]) {
        out.fill(0.0);
        let inv_m = 1.0 / self.m as f64;
        for (q, w) in self.terms(x) {
            let s = inv_m * self.p * pos_pow(q, self.p - 1.0);
            if s != 0.0 {
                crate::linalg::axpy(s, &w, out);
            }
        }
    }

    fn hvp(&self, x: &[f64], v: &[f64], out: &mut [f64]) {
        out.fill(0.0);
        let p = self.p;
        let inv_m = 1.0 / self.m as f64;
        let mut av = vec![0.0; self.n];
        for (i, (q, w)) in self.terms(x).into_iter().enumerate() {
            if q <= 0.0 {
                continue;
            }
            let s1 = inv_m * p * (p - 1.0) * pos_pow(q, p - 2.0) * dot(&w, v);
            let s2 = inv_m * 2.0 * p * pos_pow(q, p - 1.0);
            self.a[i].matvec(v, &mut av);
            for j in 0..self.n {
                out[j] += s1 * w[j] + s2 * av[j];
            }
        }
    }

    /// Assembles the dense Hessian once; each product is then `O(n²)`.
    fn hessian_at<'a>(&'a self, x: &[f64]) -> Box<dyn LinearOperator + 'a> {
        Box::new(self.hessian_dense(x))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RepuInstance {
    pub n: usize,
    pub m: usize,
    pub p: f64,
    pub seed: u64,
    pub a: Vec<Vec<f64>>,
    pub b: Vec<f64>,
}

/// Draws, for each `i` in turn, `a_i` then `b̄_i`; `b_i = |b̄_i|`.
pub fn gen_repu(n: usize, m: usize, p: f64, seed: u64) -> Result<RepuInstance> {
    check_sizes(n, m, p)?;
    let mut rng = NormalStream::new(seed);
    let mut a = Vec::with_capacity(m);
    let mut b = Vec::with_capacity(m);
    for _ in 0..m {
        a.push(rng.normal_vec(n));
        b.push(rng.normal().abs());
    }
    Ok(RepuInstance { n, m, p, seed, a, b })
}

/// `φ(t) = t²/(1+t²)` and its first two derivatives.
fn phi(t: f64) -> (f64, f64, f64) {
    let s = 1.0 + t * t;
    (t * t / s, 2.0 * t / (s * s), (2.0 - 6.0 * t * t) / (s * s * s))
}

impl RepuInstance {
    /// Per-term gradient and Hessian weights: `∇f = Σ g_i a_i`,
    /// `∇²f = Σ h_i a_i a_iᵀ`.
    fn weights(&self, x: &[f64]) -> Vec<(f64, f64)> {
        let p = self.p;
        let inv_m = 1.0 / self.m as f64;
        self.a
            .iter()
            .zip(&self.b)
            .map(|(ai, bi)| {
                let z = dot(ai, x);
                let u1 = pos_pow(z, p - 1.0);
                let t = pos_pow(z, p) - bi;
                let (_, d1, d2) = phi(t);
                let du = p * u1;
                let ddu = p * (p - 1.0) * pos_pow(z, p - 2.0);
                (inv_m * d1 * du, inv_m * (d2 * du * du + d1 * ddu))
            })
            .collect()
    }
}

struct RankOneSum<'a> {
    n: usize,
    vectors: &'a [Vec<f64>],
    weights: Vec<f64>,
}

impl LinearOperator for RankOneSum<'_> {
    fn dim(&self) -> usize {
        self.n
    }

    fn apply(&self, v: &[f64], out: &mut [f64]) {
        out.fill(0.0);
        for (ai, w) in self.vectors.iter().zip(&self.weights) {
            if *w != 0.0 {
                crate::linalg::axpy(w * dot(ai, v), ai, out);
            }
        }
    }
}

impl ProblemOracle for RepuInstance {
    fn dim(&self) -> usize {
        self.n
    }

    fn name(&self) -> &str {
        "repu"
    }

    fn value(&self, x: &[f64]) -> f64 {
        let total: f64 = self.a.iter().zip(&self.b).map(|(ai, bi)| phi(pos_pow(dot(ai, x), self.p) - bi).0).sum();
        total / self.m as f64
    }

    fn gradient(&self, x: &[f64], out: &mut [f64]) {
        out.fill(0.0);
        for (ai, (g, _)) in self.a.iter().zip(self.weights(x)) {
            if g != 0.0 {
                crate::linalg::axpy(g, ai, out);
            }
        }
    }

    fn hvp(&self, x: &[f64], v: &[f64], out: &mut [f64]) {
        self.hessian_at(x).apply(v, out)
    }

    fn hessian_at<'a>(&'a self, x: &[f64]) -> Box<dyn LinearOperator + 'a> {
        let weights = self.weights(x).into_iter().map(|(_, h)| h).collect();
        Box::new(RankOneSum { n: self.n, vectors: &self.a, weights })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticInstance {
    pub seed: u64,
    pub eigenvalues: Vec<f64>,
    pub q: DenseMatrix,
}

/// Seeded orthogonal matrix: Gram–Schmidt (two passes) on the rows of a
/// standard normal `n×n` draw.
pub fn random_orthogonal(n: usize, seed: u64) -> DenseMatrix {
    let mut rng = NormalStream::new(seed);
    let mut rows: Vec<Vec<f64>> = Vec::with_capacity(n);
    while rows.len() < n {
        let mut v = rng.normal_vec(n);
        for _ in 0..2 {
            for r in &rows {
                let c = dot(r, &v);
                crate::linalg::axpy(-c, r, &mut v);
            }
        }
        let nv = crate::linalg::norm(&v);
        if nv > 1e-8 {
            crate::linalg::scale(1.0 / nv, &mut v);
            rows.push(v);
        }
    }
    DenseMatrix::from_row_major(n, rows.concat()).expect("n*n entries")
}

/// `Q = Vᵀ diag(λ) V` with `V` from [`random_orthogonal`].
pub fn gen_quadratic(eigenvalues: &[f64], seed: u64) -> Result<QuadraticInstance> {
    let n = eigenvalues.len();
    if n == 0 {
        return Err(NcgError::InvalidParameter("at least one eigenvalue required".into()));
    }
    if eigenvalues.iter().any(|l| !l.is_finite()) {
        return Err(NcgError::InvalidParameter("eigenvalues must be finite".into()));
    }
    let v = random_orthogonal(n, seed);
    let mut q = DenseMatrix::zeros(n);
    for i in 0..n {
        for j in i..n {
            let s: f64 = (0..n).map(|k| v.get(k, i) * eigenvalues[k] * v.get(k, j)).sum();
            q.set(i, j, s);
            q.set(j, i, s);
        }
    }
    Ok(QuadraticInstance { seed, eigenvalues: eigenvalues.to_vec(), q })
}

/// Spectrum used by the benchmark harness: `n` values log-uniform in
/// `[0.01, 10]`, drawn from `derive_seed(seed, 1)`.
pub fn bench_quadratic_spectrum(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = NormalStream::new(crate::rng::derive_seed(seed, 1));
    (0..n).map(|_| 10f64.powf(-2.0 + 3.0 * rng.uniform())).collect()
}

impl QuadraticInstance {
    pub fn n(&self) -> usize {
        self.eigenvalues.len()
    }
}

impl ProblemOracle for QuadraticInstance {
    fn dim(&self) -> usize {
        self.n()
    }

    fn name(&self) -> &str {
        "quadratic"
    }

    fn value(&self, x: &[f64]) -> f64 {
        0.5 * dot(x, &self.q.apply_new(x))
    }

    fn gradient(&self, x: &[f64], out: &mut [f64]) {
        self.q.matvec(x, out)
    }

    fn hvp(&self, _x: &[f64], v: &[f64], out: &mut [f64]) {
        self.q.matvec(v, out)
    }

    fn hessian_at<'a>(&'a self, _x: &[f64]) -> Box<dyn LinearOperator + 'a> {
        Box::new(&self.q)
    }
}

/// Any generated instance.
#[derive(Debug, Clone, PartialEq)]
pub enum Instance {
    Infeasibility(InfeasibilityInstance),
    Repu(RepuInstance),
    Quadratic(QuadraticInstance),
}

impl Instance {
    /// Benchmark-grid constructor. `m` and `p` are ignored for quadratics,
    /// whose spectrum comes from [`bench_quadratic_spectrum`].
    pub fn generate(family: Family, n: usize, m: usize, p: f64, seed: u64) -> Result<Self> {
        Self::generate_with(family, n, m, p, seed, InfeasibilityRecipe::default())
    }

    pub fn generate_with(
        family: Family,
        n: usize,
        m: usize,
        p: f64,
        seed: u64,
        recipe: InfeasibilityRecipe,
    ) -> Result<Self> {
        Ok(match family {
            Family::Infeasibility => Instance::Infeasibility(gen_infeasibility_with(n, m, p, seed, recipe)?),
            Family::Repu => Instance::Repu(gen_repu(n, m, p, seed)?),
            Family::Quadratic => Instance::Quadratic(gen_quadratic(&bench_quadratic_spectrum(n, seed), seed)?),
        })
    }

    pub fn family(&self) -> Family {
        match self {
            Instance::Infeasibility(_) => Family::Infeasibility,
            Instance::Repu(_) => Family::Repu,
            Instance::Quadratic(_) => Family::Quadratic,
        }
    }

    fn oracle(&self) -> &dyn ProblemOracle {
        match self {
            Instance::Infeasibility(i) => i,
            Instance::Repu(i) => i,
            Instance::Quadratic(i) => i,
        }
    }

    /// `0` for infeasibility, `(1/n)𝟙` for RePU, `𝟙` for quadratics.
    pub fn start_point(&self) -> Vec<f64> {
        let n = self.dim();
        match self {
            Instance::Infeasibility(_) => vec![0.0; n],
            Instance::Repu(_) => vec![1.0 / n as f64; n],
            Instance::Quadratic(_) => vec![1.0; n],
        }
    }

    pub fn write_to<W: Write>(&self, mut w: W) -> Result<()> {
        let (n, m, p, seed) = match self {
            Instance::Infeasibility(i) => (i.n, i.m, i.p, i.seed),
            Instance::Repu(i) => (i.n, i.m, i.p, i.seed),
            Instance::Quadratic(i) => (i.n(), 0, 0.0, i.seed),
        };
        let mut values: Vec<f64> = Vec::new();
        match self {
            Instance::Infeasibility(i) => {
                for k in 0..m {
                    values.extend_from_slice(i.a[k].as_slice());
                    values.extend_from_slice(&i.b[k]);
                    values.push(i.c[k]);
                }
            }
            Instance::Repu(i) => {
                for k in 0..m {
                    values.extend_from_slice(&i.a[k]);
                    values.push(i.b[k]);
                }
            }
            Instance::Quadratic(i) => {
                values.extend_from_slice(&i.eigenvalues);
                values.extend_from_slice(i.q.as_slice());
            }
        }
        writeln!(w, "{FORMAT_HEADER}")?;
        writeln!(w, "family {}", self.family())?;
        writeln!(w, "n {n}")?;
        writeln!(w, "m {m}")?;
        writeln!(w, "p {p}")?;
        writeln!(w, "seed {seed}")?;
        writeln!(w, "values {}", values.len())?;
        for v in values {
            writeln!(w, "{v}")?;
        }
        Ok(())
    }

    pub fn read_from<R: BufRead>(r: R) -> Result<Self> {
        let bad = |msg: String| NcgError::InstanceFormat(msg);
        let mut lines = r.lines();
        let mut next = || -> Result<String> {
            lines.next().ok_or_else(|| bad("unexpected end of file".into()))?.map_err(NcgError::from)
        };
        if next()?.trim() != FORMAT_HEADER {
            return Err(bad(format!("expected header {FORMAT_HEADER:?}")));
        }
        let mut field = |key: &str| -> Result<String> {
            let line = next()?;
            match line.trim().split_once(' ') {
                Some((k, v)) if k == key => Ok(v.trim().to_string()),
                _ => Err(bad(format!("expected field {key:?}, got {line:?}"))),
            }
        };
        let family: Family = field("family")?.parse().map_err(|e: NcgError| bad(e.to_string()))?;
        let parse_usize = |s: String| s.parse::<usize>().map_err(|e| bad(e.to_string()));
        let n = parse_usize(field("n")?)?;
        let m = parse_usize(field("m")?)?;
        let p: f64 = field("p")?.parse().map_err(|e: std::num::ParseFloatError| bad(e.to_string()))?;
        let seed: u64 = field("seed")?.parse().map_err(|e: std::num::ParseIntError| bad(e.to_string()))?;
        let count = parse_usize(field("values")?)?;
        let expected = match family {
            Family::Infeasibility => m * (n * n + n + 1),
            Family::Repu => m * (n + 1),
            Family::Quadratic => n + n * n,
        };
        if count != expected {
            return Err(bad(format!("{family} with n = {n}, m = {m} needs {expected} values, header says {count}")));
        }
        let mut values = Vec::with_capacity(count);
        for _ in 0..count {
            let line = next()?;
            values.push(line.trim().parse::<f64>().map_err(|e| bad(format!("{line:?}: {e}")))?);
        }
        let mut it = values.into_iter();
        let mut take = |k: usize| -> Vec<f64> { it.by_ref().take(k).collect() };
        Ok(match family {
            Family::Infeasibility => {
                check_sizes(n, m, p).map_err(|e| bad(e.to_string()))?;
                let mut a = Vec::with_capacity(m);
                let mut b = Vec::with_capacity(m);
                let mut c = Vec::with_capacity(m);
                for _ in 0..m {
                    a.push(DenseMatrix::from_row_major(n, take(n * n)).expect("sized"));
                    b.push(take(n));
                    c.push(take(1)[0]);
                }
                Instance::Infeasibility(InfeasibilityInstance { n, m, p, seed, a, b, c })
            }
            Family::Repu => {
                check_sizes(n, m, p).map_err(|e| bad(e.to_string()))?;
                let mut a = Vec::with_capacity(m);
                let mut b = Vec::with_capacity(m);
                for _ in 0..m {
                    a.push(take(n));
                    b.push(take(1)[0]);
                }
                Instance::Repu(RepuInstance { n, m, p, seed, a, b })
            }
            Family::Quadratic => {
                if n == 0 {
                    return Err(bad("n must be positive".into()));
                }
                let eigenvalues = take(n);
                let q = DenseMatrix::from_row_major(n, take(n * n)).expect("sized");
                Instance::Quadratic(QuadraticInstance { seed, eigenvalues, q })
            }
        })
    }
}

impl ProblemOracle for Instance {
    fn dim(&self) -> usize {
        self.oracle().dim()
    }

    fn name(&self) -> &str {
        self.oracle().name()
    }

    fn value(&self, x: &[f64]) -> f64 {
        self.oracle().value(x)
    }

    fn gradient(&self, x: &[f64], out: &mut [f64]) {
        self.oracle().gradient(x, out)
    }

    fn hvp(&self, x: &[f64], v: &[f64], out: &mut [f64]) {
        self.oracle().hvp(x, v, out)
    }

    fn hessian_at<'a>(&'a self, x: &[f64]) -> Box<dyn LinearOperator + 'a> {
        self.oracle().hessian_at(x)
    }
}
