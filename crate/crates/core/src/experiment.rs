//! Batch experiments driven by a JSON configuration: steady solves with all
//! diagnostics, convergence studies and implicit-Euler transient runs.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::diagnostics::{self, check_spd_min_eig, ConvergenceStudy, DiagnosticsReport, SpdEigReport};
use crate::error::Error;
use crate::geometry::{Point, Tensor};
use crate::mesh::{read_mesh, CellPointRule, Mesh, Rect};
use crate::problem::{cell_integral, CellTensorRule, ManufacturedCase, Problem, ScalarFn, TensorField};
use crate::scheme::{solve_problem, AssembledSystem, SchemeKind, SchemeSolution, SolveOptions};
use crate::sparse::{solve_with, write_matrix_market, LinearSystem};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Generator {
    #[default]
    Cartesian,
    Triangular,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CellPoints {
    #[default]
    Barycenter,
    Incenter,
    /// Incenters in the metric of the (constant) problem tensor.
    LambdaIncenter,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeshSpec {
    #[serde(default)]
    pub generator: Generator,
    #[serde(default = "default_n")]
    pub nx: usize,
    #[serde(default = "default_n")]
    pub ny: usize,
    #[serde(default = "unit_rect")]
    pub domain: Rect,
    /// Random vertex displacement as a fraction of the local edge length.
    #[serde(default)]
    pub perturbation: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub cell_points: CellPoints,
    /// Reads the mesh from a file instead of generating it.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub file: Option<PathBuf>,
}

fn default_n() -> usize {
    8
}

fn unit_rect() -> Rect {
    Rect::UNIT
}

impl MeshSpec {
    pub fn cartesian(n: usize) -> Self {
        MeshSpec {
            generator: Generator::Cartesian,
            nx: n,
            ny: n,
            domain: Rect::UNIT,
            perturbation: 0.0,
            seed: 0,
            cell_points: CellPoints::Barycenter,
            file: None,
        }
    }

    pub fn perturbed(mut self, amplitude: f64, seed: u64) -> Self {
        self.perturbation = amplitude;
        self.seed = seed;
        self
    }

    pub fn with_size(&self, n: usize) -> Self {
        MeshSpec { nx: n, ny: n, ..self.clone() }
    }

    pub fn label(&self) -> String {
        match &self.file {
            Some(f) => f.display().to_string(),
            None => format!("{:?} {}x{} p{} s{}", self.generator, self.nx, self.ny, self.perturbation, self.seed)
                .to_lowercase(),
        }
    }

    pub fn build(&self, tensor: &TensorField) -> Result<Mesh, Error> {
        let mesh = match &self.file {
            Some(path) => read_mesh(&fs::read_to_string(path)?)?,
            None => match self.generator {
                Generator::Cartesian => Mesh::build_cartesian(self.nx, self.ny, self.domain)?,
                Generator::Triangular => {
                    Mesh::build_triangular(self.nx, self.ny, self.domain, CellPointRule::Barycenter)?
                }
            },
        };
        let mesh = if self.perturbation > 0.0 { mesh.perturb_random(self.perturbation, self.seed)? } else { mesh };
        Ok(match self.cell_points {
            CellPoints::Barycenter => mesh,
            CellPoints::Incenter => mesh.with_lambda_incenters(|_| Tensor::identity())?,
            CellPoints::LambdaIncenter => {
                let TensorField::Constant(t) = tensor else {
                    return Err(Error::Config("lambda_incenter cell points need a constant tensor".into()));
                };
                let t = *t;
                mesh.with_lambda_incenters(move |_| t)?
            }
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum TensorSpec {
    Identity,
    Diagonal {
        a: f64,
        b: f64,
    },
    /// `[t11, t12, t22]`.
    Constant {
        entries: [f64; 3],
    },
    /// `R(θ) diag(ratio, 1) R(θ)ᵀ`, angle in degrees.
    Rotated {
        ratio: f64,
        angle: f64,
    },
    Rotational {
        delta: f64,
    },
}

impl TensorSpec {
    pub fn field(&self) -> TensorField {
        match *self {
            TensorSpec::Identity => TensorField::identity(),
            TensorSpec::Diagonal { a, b } => TensorField::diagonal(a, b),
            TensorSpec::Constant { entries: [a, b, c] } => TensorField::Constant(Tensor::new(a, b, b, c)),
            TensorSpec::Rotated { ratio, angle } => TensorField::Constant(rotated_tensor(ratio, angle)),
            TensorSpec::Rotational { delta } => TensorField::Rotational { delta },
        }
    }
}

/// `R(θ) diag(ratio, 1) R(θ)ᵀ` with `θ` in degrees.
pub fn rotated_tensor(ratio: f64, angle: f64) -> Tensor {
    let (s, c) = angle.to_radians().sin_cos();
    let r = Tensor::new(c, -s, s, c);
    r * Tensor::new(ratio, 0.0, 0.0, 1.0) * r.transpose()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum SourceSpec {
    Zero,
    Constant {
        value: f64,
    },
    /// `height · max(0, 1 - |x - centre|² / radius²)`.
    Bump {
        centre: [f64; 2],
        radius: f64,
        height: f64,
    },
}

impl SourceSpec {
    pub fn function(&self) -> ScalarFn {
        match *self {
            SourceSpec::Zero => Arc::new(|_| 0.0),
            SourceSpec::Constant { value } => Arc::new(move |_| value),
            SourceSpec::Bump { centre, radius, height } => Arc::new(move |p: &Point| {
                let d2 = (p.x - centre[0]).powi(2) + (p.y - centre[1]).powi(2);
                height * (1.0 - d2 / (radius * radius)).max(0.0)
            }),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Axis {
    X,
    Y,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum BoundarySpec {
    Zero,
    Constant {
        value: f64,
    },
    Affine {
        a: f64,
        b: f64,
        c: f64,
    },
    /// `low` where the coordinate is below `at`, `high` elsewhere.
    Step {
        axis: Axis,
        at: f64,
        low: f64,
        high: f64,
    },
}

impl BoundarySpec {
    pub fn function(&self) -> ScalarFn {
        match *self {
            BoundarySpec::Zero => Arc::new(|_| 0.0),
            BoundarySpec::Constant { value } => Arc::new(move |_| value),
            BoundarySpec::Affine { a, b, c } => Arc::new(move |p: &Point| a * p.x + b * p.y + c),
            BoundarySpec::Step { axis, at, low, high } => Arc::new(move |p: &Point| {
                let t = match axis {
                    Axis::X => p.x,
                    Axis::Y => p.y,
                };
                if t < at {
                    low
                } else {
                    high
                }
            }),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum ProblemSpec {
    Manufactured(ManufacturedCase),
    Custom {
        tensor: TensorSpec,
        source: SourceSpec,
        boundary: BoundarySpec,
        #[serde(default)]
        tensor_rule: CellTensorRule,
    },
}

impl ProblemSpec {
    pub fn problem(&self) -> Result<Problem, Error> {
        match self {
            ProblemSpec::Manufactured(case) => {
                case.validate()?;
                Ok(case.problem())
            }
            ProblemSpec::Custom { tensor, source, boundary, tensor_rule } => {
                let mut p = Problem::new(tensor.field(), source.function(), boundary.function());
                p.tensor_rule = *tensor_rule;
                Ok(p)
            }
        }
    }

    pub fn case(&self) -> Option<&ManufacturedCase> {
        match self {
            ProblemSpec::Manufactured(c) => Some(c),
            ProblemSpec::Custom { .. } => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case", deny_unknown_fields)]
pub enum RunSpec {
    Solve,
    /// Mesh sizes `n` (an `n × n` grid per level), coarse to fine.
    Convergence {
        levels: Vec<usize>,
    },
    Transient {
        final_time: f64,
        steps: usize,
    },
}

/// Flags that can be required of a solve.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Flag {
    MMatrix,
    Spd,
    SymmetricNonnegTransmissibility,
    Conservative,
    LinearlyExact,
    MinmaxOk,
    PositiveOk,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Expectations {
    #[serde(default)]
    pub flags: Vec<Flag>,
    /// Flags that must be false (recorded failures such as oscillations).
    #[serde(default)]
    pub flags_false: Vec<Flag>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub min_order_u: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub min_order_flux: Option<f64>,
    /// Every transient step stays in `[lo, hi]`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bounds: Option<[f64; 2]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub name: String,
    pub mesh: MeshSpec,
    pub problem: ProblemSpec,
    pub scheme: SchemeKind,
    pub run: RunSpec,
    #[serde(default)]
    pub expect: Expectations,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out_dir: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self, Error> {
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, Error> {
        Self::from_json(&fs::read_to_string(path)?)
    }
}

/// Where and what to write.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct OutputOptions {
    /// No files are written when `None`.
    pub dir: Option<PathBuf>,
    pub dump_matrix: bool,
}

impl OutputOptions {
    fn write(&self, name: &str, contents: &str, written: &mut Vec<PathBuf>) -> Result<(), Error> {
        if let Some(dir) = &self.dir {
            fs::create_dir_all(dir)?;
            let path = dir.join(name);
            fs::write(&path, contents)?;
            written.push(path);
        }
        Ok(())
    }
}

fn stage<T, E: Into<Error>>(stage: &'static str, r: Result<T, E>) -> Result<T, Error> {
    r.map_err(|e| Error::Stage { stage, source: Box::new(e.into()) })
}

/// Per-cell field dump: `cell_id x y u`.
pub fn field_dump(mesh: &Mesh, u: &[f64]) -> String {
    let mut s = String::new();
    for (k, v) in u.iter().enumerate() {
        let p = mesh.cell_point(k);
        let _ = writeln!(s, "{k} {:.16e} {:.16e} {:.16e}", p.x, p.y, v);
    }
    s
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map_or_else(String::new, |v| format!("{v:.6e}"))
}

fn flag_value(r: &DiagnosticsReport, f: Flag) -> Option<bool> {
    match f {
        Flag::MMatrix => Some(r.m_matrix()),
        Flag::Spd => Some(r.spd()),
        Flag::SymmetricNonnegTransmissibility => Some(r.symmetric_nonneg_transmissibility()),
        Flag::Conservative => Some(r.conservative()),
        Flag::LinearlyExact => r.linearly_exact(),
        Flag::MinmaxOk => Some(r.minmax_ok()),
        Flag::PositiveOk => Some(r.positive_ok()),
    }
}

#[derive(Debug, Clone)]
pub struct SolveOutcome {
    pub mesh: Mesh,
    pub solution: SchemeSolution,
    pub report: DiagnosticsReport,
    pub error_u: Option<f64>,
    pub error_flux: Option<f64>,
    /// Expectations that failed, by name.
    pub failures: Vec<String>,
    pub written: Vec<PathBuf>,
}

impl SolveOutcome {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

pub const SOLVE_HEADER: &str = "scheme,mesh,n_cells,iterations,min_u,max_u,m_matrix,spd,min_eig,symmetric_nonneg_transmissibility,conservative,conservativity_residual,balance_residual,linearly_exact,exactness_residual,positive_ok,minmax_ok,error_u,error_flux";

pub fn solve_row(o: &SolveOutcome) -> String {
    let r = &o.report;
    format!(
        "{},{},{},{},{:.6e},{:.6e},{},{},{:.6e},{},{},{:.6e},{:.6e},{},{},{},{},{},{}",
        r.scheme,
        r.mesh,
        o.mesh.n_cells(),
        r.iterations,
        r.minmax.min,
        r.minmax.max,
        r.m_matrix(),
        r.spd(),
        r.spd.min_eigenvalue,
        r.symmetric_nonneg_transmissibility(),
        r.conservative(),
        r.flux_laws.conservativity,
        r.flux_laws.balance,
        r.linearly_exact().map_or_else(String::new, |b| b.to_string()),
        fmt_opt(r.exactness.as_ref().map(|e| e.residual)),
        r.positive_ok(),
        r.minmax_ok(),
        fmt_opt(o.error_u),
        fmt_opt(o.error_flux),
    )
}

pub fn run_solve(config: &ExperimentConfig, out: &OutputOptions) -> Result<SolveOutcome, Error> {
    let problem = stage("problem", config.problem.problem())?;
    let mesh = stage("mesh", config.mesh.build(&problem.tensor))?;
    let solution = stage("solve", solve_problem(&config.scheme, &mesh, &problem, &SolveOptions::default()))?;
    let report =
        stage("diagnostics", diagnostics::diagnose(&config.scheme, &mesh, &config.mesh.label(), &problem, &solution))?;
    let (error_u, error_flux) = match problem.exact {
        Some(_) => {
            let (u, f) = stage(
                "errors",
                diagnostics::level_errors(&mesh, &problem, &solution.field.cells, &solution.fluxes.cell),
            )?;
            (Some(u), Some(f))
        }
        None => (None, None),
    };
    let mut failures = Vec::new();
    for &f in &config.expect.flags {
        if flag_value(&report, f) != Some(true) {
            failures.push(format!("{f:?} expected true"));
        }
    }
    for &f in &config.expect.flags_false {
        if flag_value(&report, f) != Some(false) {
            failures.push(format!("{f:?} expected false"));
        }
    }
    let mut o = SolveOutcome { mesh, solution, report, error_u, error_flux, failures, written: Vec::new() };
    let mut written = Vec::new();
    out.write(&format!("{}_solve.csv", config.name), &format!("{SOLVE_HEADER}\n{}\n", solve_row(&o)), &mut written)?;
    out.write(&format!("{}_field.txt", config.name), &field_dump(&o.mesh, &o.solution.field.cells), &mut written)?;
    let json = serde_json::to_string_pretty(&o.report).map_err(|e| Error::Config(e.to_string()))?;
    out.write(&format!("{}_report.json", config.name), &json, &mut written)?;
    if out.dump_matrix {
        let m = write_matrix_market(&o.solution.assembled.system.matrix);
        out.write(&format!("{}_matrix.mtx", config.name), &m, &mut written)?;
    }
    o.written = written;
    Ok(o)
}

#[derive(Debug, Clone)]
pub struct ConvergenceOutcome {
    pub study: ConvergenceStudy,
    pub failures: Vec<String>,
    pub written: Vec<PathBuf>,
}

pub fn convergence_table(study: &ConvergenceStudy) -> String {
    let mut s = String::from("h,e_u,order_u,e_flux,order_flux,iterations\n");
    for (i, l) in study.levels.iter().enumerate() {
        let ou = i.checked_sub(1).and_then(|j| study.orders_u[j]);
        let of = i.checked_sub(1).and_then(|j| study.orders_flux[j]);
        let _ = writeln!(
            s,
            "{:.6e},{:.6e},{},{:.6e},{},{}",
            l.h,
            l.error_u,
            fmt_opt(ou),
            l.error_flux,
            fmt_opt(of),
            l.iterations
        );
    }
    s
}

pub fn run_convergence(config: &ExperimentConfig, out: &OutputOptions) -> Result<ConvergenceOutcome, Error> {
    let RunSpec::Convergence { levels } = &config.run else {
        return Err(Error::Config("run mode is not convergence".into()));
    };
    let case =
        config.problem.case().ok_or_else(|| Error::Config("a convergence study needs a manufactured case".into()))?;
    let problem = case.problem();
    let meshes = levels
        .iter()
        .map(|&n| stage("mesh", config.mesh.with_size(n).build(&problem.tensor)))
        .collect::<Result<Vec<_>, _>>()?;
    let study =
        stage("convergence", diagnostics::convergence_study(&config.scheme, case, &meshes, &SolveOptions::default()))?;
    let mut failures = Vec::new();
    if let Some(min) = config.expect.min_order_u {
        if !study.final_order_u().is_none_or(|o| o >= min) {
            failures.push(format!("final order for u below {min}"));
        }
    }
    if let Some(min) = config.expect.min_order_flux {
        if !study.final_order_flux().is_none_or(|o| o >= min) {
            failures.push(format!("final order for fluxes below {min}"));
        }
    }
    let mut written = Vec::new();
    out.write(&format!("{}_convergence.csv", config.name), &convergence_table(&study), &mut written)?;
    let mut plot = String::from("# h e_u h e_flux\n");
    for l in &study.levels {
        let _ = writeln!(plot, "{:.6e} {:.6e} {:.6e} {:.6e}", l.h, l.error_u, l.h, l.error_flux);
    }
    out.write(&format!("{}_convergence.dat", config.name), &plot, &mut written)?;
    Ok(ConvergenceOutcome { study, failures, written })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StepExtrema {
    pub step: usize,
    pub t: f64,
    pub min: f64,
    pub max: f64,
}

#[derive(Debug, Clone)]
pub struct TransientOutcome {
    pub steps: Vec<StepExtrema>,
    pub final_cells: Vec<f64>,
    /// Definiteness of the steady matrix.
    pub spd: SpdEigReport,
    pub failures: Vec<String>,
    pub written: Vec<PathBuf>,
}

impl TransientOutcome {
    pub fn overall_min(&self) -> f64 {
        self.steps.iter().map(|s| s.min).fold(f64::INFINITY, f64::min)
    }

    pub fn overall_max(&self) -> f64 {
        self.steps.iter().map(|s| s.max).fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Implicit Euler with lumped mass `diag(|K|)` on the cell rows:
/// `(M/Δt + A) uⁿ⁺¹ = M/Δt uⁿ + b`. Returns the extrema after each step
/// and the final free unknowns.
pub fn implicit_euler(
    mesh: &Mesh,
    assembled: &AssembledSystem,
    u0_cells: &[f64],
    dt: f64,
    steps: usize,
) -> Result<(Vec<StepExtrema>, Vec<f64>), Error> {
    let n = assembled.system.dim();
    let nc = mesh.n_cells();
    let mut mass = vec![0.0; n];
    for k in 0..nc {
        mass[k] = mesh.cell_area(k) / dt;
    }
    let matrix = assembled.system.matrix.add_diagonal(&mass);
    let mut u = vec![0.0; n];
    u[..nc].copy_from_slice(u0_cells);
    let mut out = Vec::with_capacity(steps);
    let mut sys = LinearSystem::new(matrix, assembled.system.rhs.clone())?;
    for step in 1..=steps {
        for i in 0..n {
            sys.rhs[i] = assembled.system.rhs[i] + mass[i] * u[i];
        }
        u = solve_with(&sys, crate::sparse::SolveMethod::Auto).map_err(|source| Error::Step { step, source })?.x;
        let cells = &u[..nc];
        out.push(StepExtrema {
            step,
            t: dt * step as f64,
            min: cells.iter().cloned().fold(f64::INFINITY, f64::min),
            max: cells.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
        });
    }
    Ok((out, u))
}

/// Cell means of `f`.
pub fn cell_means(mesh: &Mesh, f: &dyn Fn(&Point) -> f64) -> Vec<f64> {
    (0..mesh.n_cells()).map(|k| cell_integral(mesh, k, f) / mesh.cell_area(k)).collect()
}

pub fn run_transient(config: &ExperimentConfig, out: &OutputOptions) -> Result<TransientOutcome, Error> {
    let RunSpec::Transient { final_time, steps } = config.run else {
        return Err(Error::Config("run mode is not transient".into()));
    };
    if !(final_time > 0.0) || steps == 0 {
        return Err(Error::Config("transient runs need a positive final time and step count".into()));
    }
    let initial = config
        .problem
        .case()
        .and_then(|c| c.initial())
        .ok_or_else(|| Error::Config("a transient run needs a case with an initial datum".into()))?;
    let problem = stage("problem", config.problem.problem())?;
    let mesh = stage("mesh", config.mesh.build(&problem.tensor))?;
    let assembled = stage("assembly", config.scheme.assemble_linear(&mesh, &problem))?;
    let spd = check_spd_min_eig(&assembled.system.matrix);
    let u0 = cell_means(&mesh, &*initial);
    let (steps_out, u) = implicit_euler(&mesh, &assembled, &u0, final_time / steps as f64, steps)?;
    let final_cells = u[..mesh.n_cells()].to_vec();
    let mut o = TransientOutcome { steps: steps_out, final_cells, spd, failures: Vec::new(), written: Vec::new() };
    if let Some([lo, hi]) = config.expect.bounds {
        if let Some(s) = o.steps.iter().find(|s| s.min < lo || s.max > hi) {
            o.failures.push(format!("step {} leaves [{lo}, {hi}]: min {:.3e}, max {:.3e}", s.step, s.min, s.max));
        }
    }
    let mut table = String::from("step,t,min_u,max_u\n");
    for s in &o.steps {
        let _ = writeln!(table, "{},{:.6e},{:.6e},{:.6e}", s.step, s.t, s.min, s.max);
    }
    let mut written = Vec::new();
    out.write(&format!("{}_transient.csv", config.name), &table, &mut written)?;
    let summary = format!(
        "scheme,mesh,steps,final_time,final_min,final_max,overall_min,overall_max,spd,min_eig\n{},{},{},{},{:.6e},{:.6e},{:.6e},{:.6e},{},{:.6e}\n",
        config.scheme.label(),
        config.mesh.label(),
        steps,
        final_time,
        o.steps.last().map_or(f64::NAN, |s| s.min),
        o.steps.last().map_or(f64::NAN, |s| s.max),
        o.overall_min(),
        o.overall_max(),
        o.spd.spd(),
        o.spd.min_eigenvalue
    );
    out.write(&format!("{}_summary.csv", config.name), &summary, &mut written)?;
    out.write(&format!("{}_field.txt", config.name), &field_dump(&mesh, &o.final_cells), &mut written)?;
    if out.dump_matrix {
        out.write(
            &format!("{}_matrix.mtx", config.name),
            &write_matrix_market(&assembled.system.matrix),
            &mut written,
        )?;
    }
    o.written = written;
    Ok(o)
}

/// The transient configuration standing in for the paper's explosion test:
/// a 10×10 randomly perturbed quadrilateral mesh, rotational tensor with
/// `δ = 10⁻³`, `T = 0.1` in 150 implicit steps.
pub fn fig3_config(scheme: SchemeKind) -> ExperimentConfig {
    ExperimentConfig {
        name: format!("fig3_{}", scheme.label()),
        mesh: MeshSpec::cartesian(10).perturbed(0.3, 3),
        problem: ProblemSpec::Manufactured(ManufacturedCase::IndicatorTransient { delta: 1e-3 }),
        scheme,
        run: RunSpec::Transient { final_time: 0.1, steps: 150 },
        expect: Expectations::default(),
        out_dir: None,
    }
}
