//! Benchmark harness: seeded instance grids, solver runs and result tables.
//!
//! An experiment is described by a TOML file (schema version 1):
//!
//! ```toml
//! version = 1
//! family = "infeasibility"      # infeasibility | repu | quadratic
//! solvers = ["alg2", "acrn"]    # any of alg1, alg2, acrn
//! instances_per_cell = 10
//! seed = 0                      # instance i of every cell uses seed + i
//! eps_g = 1e-4
//! # eps_h = 1e-2
//! jobs = 1                      # 0 = one worker per core
//!
//! [[grid]]
//! n = 100
//! m = 10
//! p = 2.25
//!
//! [holder]                      # required for alg1 outside the quadratic family
//! nu = 1.0
//! h_nu = 1.0
//!
//! [params]                      # all optional; defaults shown
//! zeta = 0.5
//! theta = 0.5
//! eta = 0.01
//! delta = 0.01
//! gamma_init = 10.0
//! r = 2.0
//! h0 = 10.0
//! infeasibility_recipe = "symmetric"   # symmetric | gram
//!
//! [output]
//! path = "results.csv"
//! format = "csv"                # csv | markdown
//! ```
//!
//! Solvers start from the family's start point (see
//! [`Instance::start_point`]). "Subproblems" counts capped-CG calls for the
//! Newton-CG methods and cubic subproblems for the baseline.

use std::fmt::{self, Write as _};
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::baseline_crn::{acrn_solve, CrnParams};
use crate::error::{NcgError, Result};
use crate::newton_cg::{newton_cg_solve, NcgParams};
use crate::oracle::HolderClass;
use crate::parallel::map_ordered;
use crate::pf_newton_cg::{pf_newton_cg_solve, PfParams};
use crate::problems::{Family, InfeasibilityRecipe, Instance};
use crate::solve::{SolveResult, Status};

pub const CONFIG_VERSION: u32 = 1;

/// Hölder modulus standing in for `H₁ = 0` on quadratics.
pub const QUADRATIC_HOLDER_SURROGATE: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SolverKind {
    Alg1,
    Alg2,
    Acrn,
}

impl fmt::Display for SolverKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SolverKind::Alg1 => "alg1",
            SolverKind::Alg2 => "alg2",
            SolverKind::Acrn => "acrn",
        })
    }
}

impl FromStr for SolverKind {
    type Err = NcgError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "alg1" => Ok(SolverKind::Alg1),
            "alg2" => Ok(SolverKind::Alg2),
            "acrn" => Ok(SolverKind::Acrn),
            other => Err(NcgError::Config(format!("unknown solver {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Csv,
    Markdown,
}

impl FromStr for OutputFormat {
    type Err = NcgError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(OutputFormat::Csv),
            "markdown" | "md" => Ok(OutputFormat::Markdown),
            other => Err(NcgError::Config(format!("unknown format {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridCell {
    pub n: usize,
    #[serde(default)]
    pub m: usize,
    #[serde(default)]
    pub p: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HolderSpec {
    pub nu: f64,
    pub h_nu: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverSettings {
    pub zeta: f64,
    pub theta: f64,
    pub eta: f64,
    pub delta: f64,
    pub gamma_init: f64,
    pub r: f64,
    pub h0: f64,
    pub infeasibility_recipe: InfeasibilityRecipe,
}

impl Default for SolverSettings {
    fn default() -> Self {
        Self {
            zeta: 0.5,
            theta: 0.5,
            eta: 0.01,
            delta: 0.01,
            gamma_init: 10.0,
            r: 2.0,
            h0: 10.0,
            infeasibility_recipe: InfeasibilityRecipe::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    pub path: PathBuf,
    #[serde(default)]
    pub format: OutputFormat,
}

fn default_version() -> u32 {
    CONFIG_VERSION
}

fn default_instances() -> usize {
    10
}

fn default_jobs() -> usize {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default = "default_version")]
    pub version: u32,
    pub family: Family,
    pub grid: Vec<GridCell>,
    #[serde(default = "default_instances")]
    pub instances_per_cell: usize,
    #[serde(default)]
    pub seed: u64,
    pub solvers: Vec<SolverKind>,
    pub eps_g: f64,
    #[serde(default)]
    pub eps_h: Option<f64>,
    #[serde(default)]
    pub holder: Option<HolderSpec>,
    #[serde(default)]
    pub params: SolverSettings,
    #[serde(default = "default_jobs")]
    pub jobs: usize,
    #[serde(default)]
    pub output: Option<OutputSpec>,
}

impl ExperimentConfig {
    /// A single-cell config with default settings.
    pub fn new(family: Family, cell: GridCell, solvers: Vec<SolverKind>, eps_g: f64) -> Self {
        Self {
            version: CONFIG_VERSION,
            family,
            grid: vec![cell],
            instances_per_cell: 10,
            seed: 0,
            solvers,
            eps_g,
            eps_h: None,
            holder: None,
            params: SolverSettings::default(),
            jobs: 1,
            output: None,
        }
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| NcgError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| NcgError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| NcgError::Config(e.to_string()))
    }

    /// Hölder data handed to Algorithm 1.
    pub fn alg1_holder(&self) -> Result<HolderClass> {
        match (self.holder, self.family) {
            (Some(h), _) => HolderClass::new(h.nu, h.h_nu),
            (None, Family::Quadratic) => HolderClass::new(1.0, QUADRATIC_HOLDER_SURROGATE),
            (None, _) => Err(NcgError::Config("alg1 needs [holder] nu and h_nu for this family".into())),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(NcgError::Config(msg));
        if self.version != CONFIG_VERSION {
            return bad(format!("unsupported config version {} (expected {CONFIG_VERSION})", self.version));
        }
        if self.grid.is_empty() {
            return bad("grid must contain at least one cell".into());
        }
        if self.instances_per_cell == 0 {
            return bad("instances_per_cell must be at least 1".into());
        }
        if self.solvers.is_empty() {
            return bad("solver list is empty".into());
        }
        if !(self.eps_g > 0.0 && self.eps_g < 1.0) {
            return bad(format!("eps_g = {} not in (0, 1)", self.eps_g));
        }
        for cell in &self.grid {
            if cell.n == 0 {
                return bad("grid cell with n = 0".into());
            }
            if self.family != Family::Quadratic && (cell.m == 0 || !(cell.p > 2.0)) {
                return bad(format!("grid cell {cell:?} needs m >= 1 and p > 2"));
            }
        }
        if self.solvers.contains(&SolverKind::Alg1) {
            self.alg1_holder()?;
            self.ncg_params(HolderClass::new(1.0, 1.0)?).validate()?;
        }
        if self.solvers.contains(&SolverKind::Alg2) {
            self.pf_params(0).validate()?;
        }
        if self.solvers.contains(&SolverKind::Acrn) {
            self.crn_params(0).validate()?;
        }
        Ok(())
    }

    /// Parameters the harness hands to Algorithm 1.
    pub fn ncg_params(&self, holder: HolderClass) -> NcgParams {
        let s = &self.params;
        NcgParams {
            eps_h: self.eps_h,
            zeta: s.zeta,
            theta: s.theta,
            eta: s.eta,
            delta: s.delta,
            ..NcgParams::new(self.eps_g, holder)
        }
    }

    pub fn pf_params(&self, seed: u64) -> PfParams {
        let s = &self.params;
        PfParams {
            eps_h: self.eps_h,
            zeta: s.zeta,
            theta: s.theta,
            eta: s.eta,
            delta: s.delta,
            gamma_init: s.gamma_init,
            r: s.r,
            seed,
            ..PfParams::new(self.eps_g)
        }
    }

    pub fn crn_params(&self, seed: u64) -> CrnParams {
        CrnParams { h0: self.params.h0, seed, ..CrnParams::new(self.eps_g) }
    }

    /// The instance solved for `cell` with instance seed `seed`.
    pub fn instance(&self, cell: &GridCell, seed: u64) -> Result<Instance> {
        Instance::generate_with(self.family, cell.n, cell.m, cell.p, seed, self.params.infeasibility_recipe)
    }
}

/// Outcome of one solver on one instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub cell: usize,
    pub instance_seed: u64,
    pub solver: SolverKind,
    pub status: Option<Status>,
    pub objective: f64,
    pub grad_norm: f64,
    pub wall_s: f64,
    pub subproblems: usize,
    pub outer: usize,
    pub message: Option<String>,
}

impl RunRecord {
    pub fn succeeded(&self) -> bool {
        self.status.is_some_and(Status::is_success)
    }
}

/// One aggregated table row. Means are over successful runs only and are
/// NaN when every run in the cell failed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableRow {
    pub n: usize,
    pub m: usize,
    pub p: f64,
    pub solver: SolverKind,
    pub mean_objective: f64,
    pub mean_wall_s: f64,
    pub mean_subproblems: f64,
    pub mean_outer: f64,
    pub failures: usize,
}

impl TableRow {
    pub fn all_failed(&self, instances: usize) -> bool {
        self.failures >= instances
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResultsTable {
    pub rows: Vec<TableRow>,
    /// Per-run records ordered by (cell, instance seed, solver).
    pub runs: Vec<RunRecord>,
}

impl ResultsTable {
    pub fn total_failures(&self) -> usize {
        self.rows.iter().map(|r| r.failures).sum()
    }

    /// Row for grid cell `cell` (in config order) and `solver`.
    pub fn row(&self, cell: usize, solver: SolverKind) -> Option<&TableRow> {
        self.rows.iter().filter(|r| r.solver == solver).nth(cell)
    }
}

/// Runs one solver and records its outcome; solver errors become failed runs.
pub fn run_single(config: &ExperimentConfig, instance: &Instance, solver: SolverKind, seed: u64) -> RunRecord {
    let x0 = instance.start_point();
    let start = Instant::now();
    let result: Result<SolveResult> = match solver {
        SolverKind::Alg1 => config
            .alg1_holder()
            .and_then(|h| newton_cg_solve(instance, &x0, &NcgParams { seed, ..config.ncg_params(h) })),
        SolverKind::Alg2 => pf_newton_cg_solve(instance, &x0, &config.pf_params(seed)),
        SolverKind::Acrn => acrn_solve(instance, &x0, &config.crn_params(seed)),
    };
    let wall_s = start.elapsed().as_secs_f64();
    match result {
        Ok(r) => RunRecord {
            cell: 0,
            instance_seed: seed,
            solver,
            status: Some(r.status),
            objective: r.f_final,
            grad_norm: r.grad_norm_final,
            wall_s,
            subproblems: r.subproblems(),
            outer: r.outer_iterations(),
            message: r.message,
        },
        Err(e) => RunRecord {
            cell: 0,
            instance_seed: seed,
            solver,
            status: None,
            objective: f64::NAN,
            grad_norm: f64::NAN,
            wall_s,
            subproblems: 0,
            outer: 0,
            message: Some(e.to_string()),
        },
    }
}

fn mean(values: impl Iterator<Item = f64>) -> f64 {
    let (sum, count) = values.fold((0.0, 0usize), |(s, c), v| (s + v, c + 1));
    if count == 0 {
        f64::NAN
    } else {
        sum / count as f64
    }
}

/// Rounds wall time to the reported resolution of 0.01 s.
fn round_centi(x: f64) -> f64 {
    (x * 100.0).round() / 100.0
}

pub fn aggregate(config: &ExperimentConfig, runs: &[RunRecord]) -> Vec<TableRow> {
    let mut rows = Vec::new();
    for (ci, cell) in config.grid.iter().enumerate() {
        for &solver in &config.solvers {
            let here: Vec<&RunRecord> = runs.iter().filter(|r| r.cell == ci && r.solver == solver).collect();
            let ok: Vec<&&RunRecord> = here.iter().filter(|r| r.succeeded()).collect();
            rows.push(TableRow {
                n: cell.n,
                m: cell.m,
                p: cell.p,
                solver,
                mean_objective: mean(ok.iter().map(|r| r.objective)),
                mean_wall_s: round_centi(mean(ok.iter().map(|r| r.wall_s))),
                mean_subproblems: mean(ok.iter().map(|r| r.subproblems as f64)),
                mean_outer: mean(ok.iter().map(|r| r.outer as f64)),
                failures: here.len() - ok.len(),
            });
        }
    }
    rows
}

/// Runs every (cell, instance, solver) combination. Instances are solved
/// concurrently when `config.jobs != 1` and the `parallel` feature is on;
/// the output order is fixed by (cell, seed, solver).
pub fn run_experiment(config: &ExperimentConfig) -> Result<ResultsTable> {
    config.validate()?;
    let jobs: Vec<(usize, u64)> =
        (0..config.grid.len()).flat_map(|ci| (0..config.instances_per_cell as u64).map(move |i| (ci, i))).collect();
    let per_instance = map_ordered(&jobs, config.jobs, |&(ci, i)| {
        let seed = config.seed.wrapping_add(i);
        match config.instance(&config.grid[ci], seed) {
            Ok(inst) => config
                .solvers
                .iter()
                .map(|&s| RunRecord { cell: ci, ..run_single(config, &inst, s, seed) })
                .collect::<Vec<_>>(),
            Err(e) => config
                .solvers
                .iter()
                .map(|&s| RunRecord {
                    cell: ci,
                    instance_seed: seed,
                    solver: s,
                    status: None,
                    objective: f64::NAN,
                    grad_norm: f64::NAN,
                    wall_s: 0.0,
                    subproblems: 0,
                    outer: 0,
                    message: Some(e.to_string()),
                })
                .collect(),
        }
    });
    let runs: Vec<RunRecord> = per_instance.into_iter().flatten().collect();
    Ok(ResultsTable { rows: aggregate(config, &runs), runs })
}

pub const CSV_COLUMNS: [&str; 9] =
    ["n", "m", "p", "solver", "mean_objective", "mean_wall_s", "mean_subproblems", "mean_outer", "failures"];

pub fn emit_table(rows: &[TableRow], format: OutputFormat) -> Result<String> {
    match format {
        OutputFormat::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            for row in rows {
                w.serialize(row)?;
            }
            if rows.is_empty() {
                w.write_record(CSV_COLUMNS)?;
            }
            let bytes = w.into_inner().map_err(|e| NcgError::Io(e.into_error()))?;
            Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
        }
        OutputFormat::Markdown => Ok(markdown(rows)),
    }
}

pub fn parse_csv(text: &str) -> Result<Vec<TableRow>> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let header: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
    if header != CSV_COLUMNS {
        return Err(NcgError::Config(format!("unexpected CSV header {header:?}")));
    }
    r.deserialize().map(|row| row.map_err(NcgError::from)).collect()
}

fn markdown(rows: &[TableRow]) -> String {
    let header = ["n", "m", "p", "solver", "objective", "wall (s)", "subproblems", "outer", "failures"];
    let body: Vec<[String; 9]> = rows
        .iter()
        .map(|r| {
            [
                r.n.to_string(),
                r.m.to_string(),
                r.p.to_string(),
                r.solver.to_string(),
                format!("{:.1e}", r.mean_objective),
                format!("{:.2}", r.mean_wall_s),
                format!("{:.1}", r.mean_subproblems),
                format!("{:.1}", r.mean_outer),
                r.failures.to_string(),
            ]
        })
        .collect();
    let mut width: Vec<usize> = header.iter().map(|h| h.len()).collect();
    for row in &body {
        for (w, cell) in width.iter_mut().zip(row) {
            *w = (*w).max(cell.len());
        }
    }
    let mut out = String::new();
    let line = |out: &mut String, cells: &[String]| {
        out.push('|');
        for (i, c) in cells.iter().enumerate() {
            // text columns left-aligned, numbers right-aligned
            if i == 3 {
                let _ = write!(out, " {:<w$} |", c, w = width[i]);
            } else {
                let _ = write!(out, " {:>w$} |", c, w = width[i]);
            }
        }
        out.push('\n');
    };
    line(&mut out, &header.map(String::from));
    out.push('|');
    for (i, w) in width.iter().enumerate() {
        if i == 3 {
            let _ = write!(out, ":{}|", "-".repeat(w + 1));
        } else {
            let _ = write!(out, "{}:|", "-".repeat(w + 1));
        }
    }
    out.push('\n');
    for row in &body {
        line(&mut out, row);
    }
    out
}

pub fn write_table(rows: &[TableRow], format: OutputFormat, path: &Path) -> Result<()> {
    std::fs::write(path, emit_table(rows, format)?)?;
    Ok(())
}
