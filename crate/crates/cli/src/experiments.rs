//! Experiment drivers behind the subcommands.
//!
//! Every driver resolves its configuration into an ordered parameter echo,
//! emits a metadata header (parameter echo, config hash, library version,
//! generator constants), runs its sweep cells through the worker pool, and
//! writes one self-describing row per cell in grid order. Cell failures
//! (singular systems, exhausted budgets) become rows with a nonempty `error`
//! column; a sweep that completes always exits 0.

use std::time::Instant;

use rbfquad_core::genz::add_noise;
use rbfquad_core::geometry::{monte_carlo_uncovered, uncovered_area_equidistant, CoverageQuery};
use rbfquad_core::kernels::Kernel;
use rbfquad_core::lsquad::{self, StepMode};
use rbfquad_core::moments::rbf_moments;
use rbfquad_core::pointsets::{Domain, PointSequence, PointSet};
use rbfquad_core::polybasis::{build_dops, DiscreteInnerProduct};
use rbfquad_core::quadrature::{self, QuadratureRule};
use rbfquad_core::rbfsystem::{RbfSpace, ShapePolicy};
use rbfquad_core::{lsquad::fit_power_law, rng};

use crate::output::{config_hash, field, Format, Record, TableWriter};
use crate::pool::run_jobs;
use crate::specs::IntegrandSpec;

pub struct Common {
    pub out: Option<std::path::PathBuf>,
    pub format: Format,
    pub jobs: usize,
    pub timings: bool,
}

type RunResult = Result<(), String>;

fn meta_record(command: &str, params: &Record) -> Record {
    let mut meta: Record = vec![
        field("command", command),
        field("version", env!("CARGO_PKG_VERSION")),
    ];
    meta.extend(params.iter().cloned());
    meta.push(field(
        "config_hash",
        format!("{:016x}", config_hash(params)),
    ));
    meta.push(field(
        "rng",
        format!(
            "splitmix64 gamma={:#x} mix1={:#x} mix2={:#x}",
            rng::GAMMA,
            rng::MIX_1,
            rng::MIX_2
        ),
    ));
    meta.push(field(
        "halton",
        "plain radical inverse, bases 2/3, first index 1",
    ));
    meta.push(field("erf", "libm 0.2 (musl port, <1e-15 relative error)"));
    meta
}

fn io_err(e: std::io::Error) -> String {
    format!("output error: {e}")
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PolicyKind {
    Constant,
    EqualMoment,
}

impl std::str::FromStr for PolicyKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "constant" => Ok(PolicyKind::Constant),
            "equalmoment" => Ok(PolicyKind::EqualMoment),
            other => Err(format!("unknown policy `{other}` (constant|equalmoment)")),
        }
    }
}

impl PolicyKind {
    fn shape_policy(&self, eps: f64) -> ShapePolicy {
        match self {
            PolicyKind::Constant => ShapePolicy::Constant(eps),
            PolicyKind::EqualMoment => ShapePolicy::EqualMomentBoundary(eps),
        }
    }

    fn name(&self) -> &'static str {
        match self {
            PolicyKind::Constant => "constant",
            PolicyKind::EqualMoment => "equalmoment",
        }
    }
}

fn point_columns(row: &mut Record, p: &[f64; 2], dim: usize) {
    row.push(field("x", p[0]));
    if dim == 2 {
        row.push(field("y", p[1]));
    }
}

// ---------------------------------------------------------------------------
// weights
// ---------------------------------------------------------------------------

pub struct WeightsConfig {
    pub kernel: Kernel,
    pub points: PointSet,
    pub points_spec: String,
    pub domain_spec: String,
    pub degree: i32,
    pub eps: f64,
    pub policy: PolicyKind,
    pub dump_gram: Option<std::path::PathBuf>,
}

pub fn run_weights(cfg: WeightsConfig, common: &Common) -> RunResult {
    let params: Record = vec![
        field("kernel", cfg.kernel),
        field("points", &cfg.points_spec),
        field("domain", &cfg.domain_spec),
        field("n", cfg.points.len()),
        field("degree", cfg.degree),
        field("eps", cfg.eps),
        field("policy", cfg.policy.name()),
    ];
    let dim = cfg.points.dim();
    let space = RbfSpace::new(
        cfg.kernel,
        cfg.points,
        cfg.policy.shape_policy(cfg.eps),
        cfg.degree,
    )
    .map_err(|e| e.to_string())?;
    let rule = quadrature::interpolatory_weights(&space).map_err(|e| e.to_string())?;

    if let Some(path) = &cfg.dump_gram {
        dump_gram(&space, path)?;
    }

    let mut w = TableWriter::to_path(common.out.as_deref(), common.format).map_err(io_err)?;
    w.meta(&meta_record("weights", &params)).map_err(io_err)?;
    for (i, (p, wt)) in rule
        .points()
        .points()
        .iter()
        .zip(rule.weights())
        .enumerate()
    {
        let mut row: Record = vec![field("index", i)];
        point_columns(&mut row, p, dim);
        row.push(field("weight", wt));
        w.row(&row).map_err(io_err)?;
    }
    let rep = rule.stability_report();
    w.footer(
        "stability_report",
        &vec![
            field("stability_measure", rep.stability_measure),
            field("rule_of_one", rep.rule_of_one),
            field("min_weight", rep.min_weight),
            field("is_stable", rep.is_stable),
            field("condition_estimate", rule.condition_estimate()),
        ],
    )
    .map_err(io_err)?;
    w.finish().map_err(io_err)
}

fn dump_gram(space: &RbfSpace, path: &std::path::Path) -> RunResult {
    if space.degree() < 0 {
        return Err("--dump-gram needs degree >= 0".into());
    }
    let dops = build_dops(space.centers(), space.degree() as u32).map_err(|e| e.to_string())?;
    let ip = DiscreteInnerProduct::new(space.centers());
    let k = dops.len();
    let mut out = String::new();
    for i in 0..k {
        let cells: Vec<String> = (0..k)
            .map(|j| {
                ip.apply(|p| dops.eval(i, p), |p| dops.eval(j, p))
                    .to_string()
            })
            .collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    std::fs::write(path, out).map_err(io_err)
}

// ---------------------------------------------------------------------------
// moments
// ---------------------------------------------------------------------------

pub struct MomentsConfig {
    pub kernel: Kernel,
    pub points: PointSet,
    pub points_spec: String,
    pub domain_spec: String,
    pub degree: i32,
    pub eps: f64,
    pub policy: PolicyKind,
}

pub fn run_moments(cfg: MomentsConfig, common: &Common) -> RunResult {
    let params: Record = vec![
        field("kernel", cfg.kernel),
        field("points", &cfg.points_spec),
        field("domain", &cfg.domain_spec),
        field("n", cfg.points.len()),
        field("degree", cfg.degree),
        field("eps", cfg.eps),
        field("policy", cfg.policy.name()),
    ];
    let dim = cfg.points.dim();
    let domain = *cfg.points.domain();
    let space = RbfSpace::new(
        cfg.kernel,
        cfg.points,
        cfg.policy.shape_policy(cfg.eps),
        cfg.degree,
    )
    .map_err(|e| e.to_string())?;
    let moments = rbf_moments(&space, &domain).map_err(|e| e.to_string())?;

    let mut w = TableWriter::to_path(common.out.as_deref(), common.format).map_err(io_err)?;
    w.meta(&meta_record("moments", &params)).map_err(io_err)?;
    for i in 0..moments.rbf.len() {
        let mut row: Record = vec![field("index", i)];
        point_columns(&mut row, space.centers().point(i), dim);
        row.push(field("value", moments.rbf[i]));
        row.push(field("method", moments.methods[i]));
        row.push(field("error_estimate", moments.error_estimates[i]));
        w.row(&row).map_err(io_err)?;
    }
    if !moments.poly.is_empty() {
        let cells: Vec<String> = moments.poly.iter().map(|v| v.to_string()).collect();
        w.footer("poly_moments", &vec![field("values", cells.join(";"))])
            .map_err(io_err)?;
    }
    w.finish().map_err(io_err)
}

// ---------------------------------------------------------------------------
// stability-sweep
// ---------------------------------------------------------------------------

pub struct StabilitySweepConfig {
    pub kernels: Vec<Kernel>,
    pub points: PointSet,
    pub points_spec: String,
    pub domain_spec: String,
    pub degrees: Vec<i32>,
    pub eps_grid: Vec<f64>,
    pub eps_grid_spec: String,
    pub policy: PolicyKind,
}

struct StabilityOutputs {
    stability_measure: f64,
    rule_of_one: f64,
    min_weight: f64,
    is_stable: bool,
    condition_estimate: f64,
    solve_residual: f64,
}

fn rule_outputs(rule: &QuadratureRule) -> StabilityOutputs {
    let rep = rule.stability_report();
    StabilityOutputs {
        stability_measure: rep.stability_measure,
        rule_of_one: rep.rule_of_one,
        min_weight: rep.min_weight,
        is_stable: rep.is_stable,
        condition_estimate: rule.condition_estimate(),
        solve_residual: rule.solve_residual(),
    }
}

fn stability_columns(row: &mut Record, out: Option<&StabilityOutputs>) {
    match out {
        Some(o) => {
            row.push(field("stability_measure", o.stability_measure));
            row.push(field("rule_of_one", o.rule_of_one));
            row.push(field("min_weight", o.min_weight));
            row.push(field("is_stable", o.is_stable));
            row.push(field("condition_estimate", o.condition_estimate));
            row.push(field("solve_residual", o.solve_residual));
        }
        None => {
            for key in [
                "stability_measure",
                "rule_of_one",
                "min_weight",
                "is_stable",
                "condition_estimate",
                "solve_residual",
            ] {
                row.push(field(key, ""));
            }
        }
    }
}

pub fn run_stability_sweep(cfg: StabilitySweepConfig, common: &Common) -> RunResult {
    let kernels_echo = cfg
        .kernels
        .iter()
        .map(|k| k.to_string())
        .collect::<Vec<_>>()
        .join(",");
    let degrees_echo = cfg
        .degrees
        .iter()
        .map(|d| d.to_string())
        .collect::<Vec<_>>()
        .join(",");
    let params: Record = vec![
        field("kernels", kernels_echo),
        field("points", &cfg.points_spec),
        field("domain", &cfg.domain_spec),
        field("n", cfg.points.len()),
        field("degrees", degrees_echo),
        field("eps_grid", &cfg.eps_grid_spec),
        field("policy", cfg.policy.name()),
    ];
    let eps_threshold = 1.0 / cfg.points.min_distance();

    struct Cell {
        kernel: Kernel,
        degree: i32,
        eps: f64,
    }
    let mut cells = Vec::new();
    for kernel in &cfg.kernels {
        for degree in &cfg.degrees {
            for eps in &cfg.eps_grid {
                cells.push(Cell {
                    kernel: *kernel,
                    degree: *degree,
                    eps: *eps,
                });
            }
        }
    }

    let points = &cfg.points;
    let policy = cfg.policy;
    let results = run_jobs(cells.len(), common.jobs, |i| {
        let cell = &cells[i];
        let started = Instant::now();
        let outcome = RbfSpace::new(
            cell.kernel,
            points.clone(),
            policy.shape_policy(cell.eps),
            cell.degree,
        )
        .map_err(|e| e.to_string())
        .and_then(|space| quadrature::interpolatory_weights(&space).map_err(|e| e.to_string()));
        (outcome.map(|r| rule_outputs(&r)), started.elapsed())
    });

    let mut w = TableWriter::to_path(common.out.as_deref(), common.format).map_err(io_err)?;
    w.meta(&meta_record("stability-sweep", &params))
        .map_err(io_err)?;
    for (cell, (outcome, elapsed)) in cells.iter().zip(&results) {
        let mut row: Record = vec![
            field("kernel", cell.kernel),
            field("points", &cfg.points_spec),
            field("domain", &cfg.domain_spec),
            field("n", cfg.points.len()),
            field("degree", cell.degree),
            field("policy", cfg.policy.name()),
            field("eps", cell.eps),
            field("eps_threshold", eps_threshold),
        ];
        stability_columns(&mut row, outcome.as_ref().ok());
        if common.timings {
            row.push(field("runtime_ms", elapsed.as_millis()));
        }
        row.push(field(
            "error",
            outcome.as_ref().err().cloned().unwrap_or_default(),
        ));
        w.row(&row).map_err(io_err)?;
    }
    w.finish().map_err(io_err)
}

// ---------------------------------------------------------------------------
// error-sweep
// ---------------------------------------------------------------------------

pub struct ErrorSweepConfig {
    pub kernels: Vec<Kernel>,
    pub points: PointSet,
    pub points_spec: String,
    pub domain_spec: String,
    pub degrees: Vec<i32>,
    pub eps_grid: Vec<f64>,
    pub eps_grid_spec: String,
    pub policy: PolicyKind,
    pub integrand: IntegrandSpec,
    pub integrand_spec: String,
    pub trials: usize,
}

fn median(values: &mut [f64]) -> f64 {
    values.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = values.len();
    if n == 0 {
        f64::NAN
    } else if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

pub fn run_error_sweep(cfg: ErrorSweepConfig, common: &Common) -> RunResult {
    let kernels_echo = cfg
        .kernels
        .iter()
        .map(|k| k.to_string())
        .collect::<Vec<_>>()
        .join(",");
    let degrees_echo = cfg
        .degrees
        .iter()
        .map(|d| d.to_string())
        .collect::<Vec<_>>()
        .join(",");
    let trials = if cfg.integrand.is_seeded() {
        cfg.trials.max(1)
    } else {
        1
    };
    let params: Record = vec![
        field("kernels", kernels_echo),
        field("points", &cfg.points_spec),
        field("domain", &cfg.domain_spec),
        field("n", cfg.points.len()),
        field("degrees", degrees_echo),
        field("eps_grid", &cfg.eps_grid_spec),
        field("policy", cfg.policy.name()),
        field("integrand", &cfg.integrand_spec),
        field("trials", trials),
    ];
    let dim = cfg.points.dim();

    struct Cell {
        kernel: Kernel,
        degree: i32,
        eps: f64,
    }
    struct CellOut {
        stability: StabilityOutputs,
        median_error: f64,
        min_error: f64,
        max_error: f64,
    }
    let mut cells = Vec::new();
    for kernel in &cfg.kernels {
        for degree in &cfg.degrees {
            for eps in &cfg.eps_grid {
                cells.push(Cell {
                    kernel: *kernel,
                    degree: *degree,
                    eps: *eps,
                });
            }
        }
    }

    let points = &cfg.points;
    let policy = cfg.policy;
    let integrand = &cfg.integrand;
    let results = run_jobs(cells.len(), common.jobs, |i| {
        let cell = &cells[i];
        let started = Instant::now();
        let outcome = RbfSpace::new(
            cell.kernel,
            points.clone(),
            policy.shape_policy(cell.eps),
            cell.degree,
        )
        .map_err(|e| e.to_string())
        .and_then(|space| quadrature::interpolatory_weights(&space).map_err(|e| e.to_string()))
        .map(|rule| {
            let mut errors: Vec<f64> = (0..trials)
                .map(|t| {
                    let g = integrand.for_trial(dim, t as u64);
                    let reference = g.reference_integral();
                    (rule.apply(|p| g.evaluate(p)) - reference).abs()
                })
                .collect();
            let min_error = errors.iter().copied().fold(f64::INFINITY, f64::min);
            let max_error = errors.iter().copied().fold(0.0, f64::max);
            CellOut {
                stability: rule_outputs(&rule),
                median_error: median(&mut errors),
                min_error,
                max_error,
            }
        });
        (outcome, started.elapsed())
    });

    let mut w = TableWriter::to_path(common.out.as_deref(), common.format).map_err(io_err)?;
    w.meta(&meta_record("error-sweep", &params))
        .map_err(io_err)?;
    for (cell, (outcome, elapsed)) in cells.iter().zip(&results) {
        let mut row: Record = vec![
            field("kernel", cell.kernel),
            field("points", &cfg.points_spec),
            field("domain", &cfg.domain_spec),
            field("n", cfg.points.len()),
            field("degree", cell.degree),
            field("policy", cfg.policy.name()),
            field("eps", cell.eps),
            field("integrand", &cfg.integrand_spec),
            field("trials", trials),
        ];
        match outcome {
            Ok(out) => {
                row.push(field("median_error", out.median_error));
                row.push(field("min_error", out.min_error));
                row.push(field("max_error", out.max_error));
                stability_columns(&mut row, Some(&out.stability));
            }
            Err(_) => {
                for key in ["median_error", "min_error", "max_error"] {
                    row.push(field(key, ""));
                }
                stability_columns(&mut row, None);
            }
        }
        if common.timings {
            row.push(field("runtime_ms", elapsed.as_millis()));
        }
        row.push(field(
            "error",
            outcome.as_ref().err().cloned().unwrap_or_default(),
        ));
        w.row(&row).map_err(io_err)?;
    }

    // Arg-min summary per (kernel, degree).
    for kernel in &cfg.kernels {
        for degree in &cfg.degrees {
            let mut best: Option<(f64, &CellOut)> = None;
            for (cell, (outcome, _)) in cells.iter().zip(&results) {
                if cell.kernel == *kernel && cell.degree == *degree {
                    if let Ok(out) = outcome {
                        let better = best
                            .as_ref()
                            .map(|(_, b)| out.median_error < b.median_error)
                            .unwrap_or(true);
                        if better {
                            best = Some((cell.eps, out));
                        }
                    }
                }
            }
            if let Some((eps, out)) = best {
                w.footer(
                    "argmin",
                    &vec![
                        field("kernel", *kernel),
                        field("degree", *degree),
                        field("eps_argmin", eps),
                        field("min_median_error", out.median_error),
                        field("stability_measure", out.stability.stability_measure),
                        field("is_stable", out.stability.is_stable),
                    ],
                )
                .map_err(io_err)?;
            }
        }
    }
    w.finish().map_err(io_err)
}

// ---------------------------------------------------------------------------
// convergence
// ---------------------------------------------------------------------------

/// Least-squares slope of `log y` against `log x`.
fn fit_log_slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let (mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0);
    for (x, y) in points {
        let lx = x.ln();
        let ly = y.ln();
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    (n * sxy - sx * sy) / (n * sxx - sx * sx)
}

pub struct ConvergenceConfig {
    pub kernel: Kernel,
    pub degree: i32,
    pub n_grid: Vec<usize>,
    pub sequence: PointSequence,
    pub sequence_spec: String,
    pub domain: Domain,
    pub domain_spec: String,
    pub eps: f64,
    pub integrand: IntegrandSpec,
    pub integrand_spec: String,
}

pub fn run_convergence(cfg: ConvergenceConfig, common: &Common) -> RunResult {
    let n_echo = cfg
        .n_grid
        .iter()
        .map(|n| n.to_string())
        .collect::<Vec<_>>()
        .join(",");
    let params: Record = vec![
        field("kernel", cfg.kernel),
        field("degree", cfg.degree),
        field("n_grid", n_echo),
        field("sequence", &cfg.sequence_spec),
        field("domain", &cfg.domain_spec),
        field("eps", cfg.eps),
        field("integrand", &cfg.integrand_spec),
    ];
    let g = cfg.integrand.for_trial(cfg.domain.dim(), 0);
    let reference = g.reference_integral();

    let results = run_jobs(cfg.n_grid.len(), common.jobs, |i| {
        let n = cfg.n_grid[i];
        let started = Instant::now();
        let outcome = cfg
            .sequence
            .take(cfg.domain, n)
            .map_err(|e| e.to_string())
            .and_then(|points| {
                let h_max = points.max_fill_distance();
                let space = RbfSpace::new(
                    cfg.kernel,
                    points,
                    ShapePolicy::Constant(cfg.eps),
                    cfg.degree,
                )
                .map_err(|e| e.to_string())?;
                let rule = quadrature::interpolatory_weights(&space).map_err(|e| e.to_string())?;
                let err = (rule.apply(|p| g.evaluate(p)) - reference).abs();
                Ok((h_max, err, rule_outputs(&rule)))
            });
        (outcome, started.elapsed())
    });

    let mut w = TableWriter::to_path(common.out.as_deref(), common.format).map_err(io_err)?;
    w.meta(&meta_record("convergence", &params))
        .map_err(io_err)?;
    let mut fit_points: Vec<(f64, f64)> = Vec::new();
    for (n, (outcome, elapsed)) in cfg.n_grid.iter().zip(&results) {
        let mut row: Record = vec![
            field("kernel", cfg.kernel),
            field("degree", cfg.degree),
            field("n", n),
            field("eps", cfg.eps),
            field("integrand", &cfg.integrand_spec),
        ];
        match outcome {
            Ok((h_max, err, stab)) => {
                row.push(field("h_max", h_max));
                row.push(field("abs_error", err));
                stability_columns(&mut row, Some(stab));
                if *err > 0.0 {
                    fit_points.push((*h_max, *err));
                }
            }
            Err(_) => {
                row.push(field("h_max", ""));
                row.push(field("abs_error", ""));
                stability_columns(&mut row, None);
            }
        }
        if common.timings {
            row.push(field("runtime_ms", elapsed.as_millis()));
        }
        row.push(field(
            "error",
            outcome.as_ref().err().cloned().unwrap_or_default(),
        ));
        w.row(&row).map_err(io_err)?;
    }

    if fit_points.len() >= 2 {
        let slope = fit_log_slope(&fit_points);
        w.footer("fit", &vec![field("fitted_order", slope)])
            .map_err(io_err)?;
    }
    w.finish().map_err(io_err)
}

/// Fitted order of a finished convergence table; shared with the acceptance
/// tests.
pub fn convergence_order(
    kernel: Kernel,
    degree: i32,
    n_grid: &[usize],
    domain: Domain,
    g: &rbfquad_core::genz::GenzFunction,
) -> Result<f64, String> {
    let reference = g.reference_integral();
    let mut pts: Vec<(f64, f64)> = Vec::new();
    for &n in n_grid {
        let points = PointSet::halton(domain, n, 0);
        let h_max = points.max_fill_distance();
        let space = RbfSpace::new(kernel, points, ShapePolicy::Constant(1.0), degree)
            .map_err(|e| e.to_string())?;
        let rule = quadrature::interpolatory_weights(&space).map_err(|e| e.to_string())?;
        let err = (rule.apply(|p| g.evaluate(p)) - reference).abs();
        if err > 0.0 {
            pts.push((h_max, err));
        }
    }
    if pts.len() < 2 {
        return Err("not enough finite error values to fit".into());
    }
    Ok(fit_log_slope(&pts))
}

// ---------------------------------------------------------------------------
// lsrbf
// ---------------------------------------------------------------------------

pub struct LsrbfConfig {
    pub kernel: Kernel,
    pub eps: f64,
    pub degree: i32,
    pub centers: usize,
    pub sequence: PointSequence,
    pub sequence_spec: String,
    pub domain: Domain,
    pub domain_spec: String,
    pub n_start: Option<usize>,
    pub n_max: usize,
    pub geometric_step: bool,
}

pub fn run_lsrbf(cfg: LsrbfConfig, common: &Common) -> RunResult {
    let params: Record = vec![
        field("kernel", cfg.kernel),
        field("eps", cfg.eps),
        field("degree", cfg.degree),
        field("centers", cfg.centers),
        field("sequence", &cfg.sequence_spec),
        field("domain", &cfg.domain_spec),
        field(
            "n_start",
            cfg.n_start.map(|v| v.to_string()).unwrap_or_default(),
        ),
        field("n_max", cfg.n_max),
        field(
            "step",
            if cfg.geometric_step {
                "geometric"
            } else {
                "unit"
            },
        ),
    ];
    let centers = cfg
        .sequence
        .take(cfg.domain, cfg.centers)
        .map_err(|e| e.to_string())?;
    let space = RbfSpace::new(
        cfg.kernel,
        centers,
        ShapePolicy::Constant(cfg.eps),
        cfg.degree,
    )
    .map_err(|e| e.to_string())?;
    let step = if cfg.geometric_step {
        StepMode::Geometric
    } else {
        StepMode::Unit
    };

    let mut w = TableWriter::to_path(common.out.as_deref(), common.format).map_err(io_err)?;
    w.meta(&meta_record("lsrbf", &params)).map_err(io_err)?;

    let run = lsquad::algorithm1(&space, cfg.sequence, |_| 1.0, cfg.n_start, cfg.n_max, step);
    let (iterations, rule, n_final, failure) = match run {
        Ok(r) => (r.iterations, Some(r.rule), Some(r.n_final), None),
        Err(lsquad::LsError::BudgetExhausted { best, n_max }) => match best {
            Some(b) => (
                b.iterations,
                Some(b.rule),
                Some(b.n_final),
                Some(format!(
                    "budget exhausted at N <= {n_max}; best iterate reported"
                )),
            ),
            None => (Vec::new(), None, None, Some("budget exhausted".into())),
        },
        Err(e) => return Err(e.to_string()),
    };

    for it in &iterations {
        w.trace(&vec![
            field("N", it.n),
            field("min_weight", it.min_weight),
            field("residual", it.residual),
        ])
        .map_err(io_err)?;
    }
    if let Some(rule) = &rule {
        let dim = rule.points().dim();
        for (i, (p, wt)) in rule
            .points()
            .points()
            .iter()
            .zip(rule.weights())
            .enumerate()
        {
            let mut row: Record = vec![field("index", i)];
            point_columns(&mut row, p, dim);
            row.push(field("weight", wt));
            w.row(&row).map_err(io_err)?;
        }
        let rep = rule.stability_report();
        w.footer(
            "result",
            &vec![
                field("n_final", n_final.unwrap()),
                field("stability_measure", rep.stability_measure),
                field("rule_of_one", rep.rule_of_one),
                field("min_weight", rep.min_weight),
                field("is_stable", rep.is_stable),
                field("exactness_residual", rule.solve_residual()),
                field("error", failure.clone().unwrap_or_default()),
            ],
        )
        .map_err(io_err)?;
    }
    // Budget exhaustion is a tagged outcome in the footer, not a config
    // error: the sweep completed.
    w.finish().map_err(io_err)
}

// ---------------------------------------------------------------------------
// lsrbf-compare
// ---------------------------------------------------------------------------

pub struct LsrbfCompareConfig {
    pub kernel: Kernel,
    pub eps: f64,
    pub degree: i32,
    pub m_grid: Vec<usize>,
    pub sequence: PointSequence,
    pub sequence_spec: String,
    pub domain: Domain,
    pub domain_spec: String,
    pub integrand: IntegrandSpec,
    pub integrand_spec: String,
    pub trials: usize,
    pub seed: u64,
    pub n_max: usize,
}

/// Noise magnitudes compared by the experiment.
pub const NOISE_LEVELS: [f64; 2] = [1e-4, 1e-2];

/// One comparison cell; shared with the acceptance suite.
pub struct CompareCell {
    pub m: usize,
    pub n_final: usize,
    pub stab_interp: f64,
    pub stab_ls: f64,
    pub cond_interp: f64,
    /// Median absolute errors: [clean, noise 1e-4, noise 1e-2].
    pub err_interp: [f64; 3],
    pub err_ls: [f64; 3],
}

pub fn compare_cell(
    kernel: Kernel,
    eps: f64,
    degree: i32,
    m: usize,
    sequence: PointSequence,
    domain: Domain,
    integrand: &IntegrandSpec,
    trials: usize,
    seed: u64,
    n_max: usize,
) -> Result<CompareCell, String> {
    let centers = sequence.take(domain, m).map_err(|e| e.to_string())?;
    let space = RbfSpace::new(kernel, centers, ShapePolicy::Constant(eps), degree)
        .map_err(|e| e.to_string())?;
    let run = lsquad::algorithm1(&space, sequence, |_| 1.0, None, n_max, StepMode::Unit)
        .map_err(|e| e.to_string())?;
    let ls_rule = run.rule;
    let n_final = run.n_final;

    let data = sequence.take(domain, n_final).map_err(|e| e.to_string())?;
    let interp_space = RbfSpace::new(kernel, data, ShapePolicy::Constant(eps), degree)
        .map_err(|e| e.to_string())?;
    let interp_rule =
        quadrature::interpolatory_weights(&interp_space).map_err(|e| e.to_string())?;

    let dim = domain.dim();
    let trials = trials.max(1);
    let mut errs_interp: [Vec<f64>; 3] = [Vec::new(), Vec::new(), Vec::new()];
    let mut errs_ls: [Vec<f64>; 3] = [Vec::new(), Vec::new(), Vec::new()];
    for trial in 0..trials {
        let g = integrand.for_trial(dim, trial as u64);
        let reference = g.reference_integral();
        let values: Vec<f64> = interp_rule
            .points()
            .points()
            .iter()
            .map(|p| g.evaluate(p))
            .collect();
        errs_interp[0].push((interp_rule.apply_values(&values) - reference).abs());
        errs_ls[0].push((ls_rule.apply_values(&values) - reference).abs());
        for (li, mag) in NOISE_LEVELS.iter().enumerate() {
            // Documented noise stream: one substream per (trial, level).
            let noise_seed = seed
                .wrapping_add(1_000_003u64.wrapping_mul(trial as u64))
                .wrapping_add(li as u64);
            let noisy = add_noise(&values, *mag, noise_seed);
            errs_interp[li + 1].push((interp_rule.apply_values(&noisy) - reference).abs());
            errs_ls[li + 1].push((ls_rule.apply_values(&noisy) - reference).abs());
        }
    }
    Ok(CompareCell {
        m,
        n_final,
        stab_interp: interp_rule.stability_measure(),
        stab_ls: ls_rule.stability_measure(),
        cond_interp: interp_rule.condition_estimate(),
        err_interp: errs_interp.map(|mut v| median(&mut v)),
        err_ls: errs_ls.map(|mut v| median(&mut v)),
    })
}

pub fn run_lsrbf_compare(cfg: LsrbfCompareConfig, common: &Common) -> RunResult {
    let m_echo = cfg
        .m_grid
        .iter()
        .map(|m| m.to_string())
        .collect::<Vec<_>>()
        .join(",");
    let params: Record = vec![
        field("kernel", cfg.kernel),
        field("eps", cfg.eps),
        field("degree", cfg.degree),
        field("m_grid", m_echo),
        field("sequence", &cfg.sequence_spec),
        field("domain", &cfg.domain_spec),
        field("integrand", &cfg.integrand_spec),
        field("trials", cfg.trials),
        field("seed", cfg.seed),
        field("n_max", cfg.n_max),
    ];

    let results = run_jobs(cfg.m_grid.len(), common.jobs, |i| {
        let started = Instant::now();
        let out = compare_cell(
            cfg.kernel,
            cfg.eps,
            cfg.degree,
            cfg.m_grid[i],
            cfg.sequence,
            cfg.domain,
            &cfg.integrand,
            cfg.trials,
            cfg.seed,
            cfg.n_max,
        );
        (out, started.elapsed())
    });

    let mut w = TableWriter::to_path(common.out.as_deref(), common.format).map_err(io_err)?;
    w.meta(&meta_record("lsrbf-compare", &params))
        .map_err(io_err)?;
    for (m, (outcome, elapsed)) in cfg.m_grid.iter().zip(&results) {
        let mut row: Record = vec![
            field("kernel", cfg.kernel),
            field("eps", cfg.eps),
            field("degree", cfg.degree),
            field("m", m),
        ];
        match outcome {
            Ok(c) => {
                row.push(field("n_final", c.n_final));
                row.push(field("stability_interp", c.stab_interp));
                row.push(field("stability_ls", c.stab_ls));
                row.push(field("condition_interp", c.cond_interp));
                row.push(field("err_interp_clean", c.err_interp[0]));
                row.push(field("err_ls_clean", c.err_ls[0]));
                row.push(field("err_interp_noise1e-4", c.err_interp[1]));
                row.push(field("err_ls_noise1e-4", c.err_ls[1]));
                row.push(field("err_interp_noise1e-2", c.err_interp[2]));
                row.push(field("err_ls_noise1e-2", c.err_ls[2]));
            }
            Err(_) => {
                for key in [
                    "n_final",
                    "stability_interp",
                    "stability_ls",
                    "condition_interp",
                    "err_interp_clean",
                    "err_ls_clean",
                    "err_interp_noise1e-4",
                    "err_ls_noise1e-4",
                    "err_interp_noise1e-2",
                    "err_ls_noise1e-2",
                ] {
                    row.push(field(key, ""));
                }
            }
        }
        if common.timings {
            row.push(field("runtime_ms", elapsed.as_millis()));
        }
        row.push(field(
            "error",
            outcome.as_ref().err().cloned().unwrap_or_default(),
        ));
        w.row(&row).map_err(io_err)?;
    }
    w.finish().map_err(io_err)
}

// ---------------------------------------------------------------------------
// ratio-study
// ---------------------------------------------------------------------------

pub struct RatioStudyConfig {
    pub kernel: Kernel,
    pub eps: f64,
    pub degree: i32,
    pub m_grid: Vec<usize>,
    pub sequence: PointSequence,
    pub sequence_spec: String,
    pub domain: Domain,
    pub domain_spec: String,
}

pub fn run_ratio_study(cfg: RatioStudyConfig, common: &Common) -> RunResult {
    let m_echo = cfg
        .m_grid
        .iter()
        .map(|m| m.to_string())
        .collect::<Vec<_>>()
        .join(",");
    let params: Record = vec![
        field("kernel", cfg.kernel),
        field("eps", cfg.eps),
        field("degree", cfg.degree),
        field("m_grid", m_echo),
        field("sequence", &cfg.sequence_spec),
        field("domain", &cfg.domain_spec),
    ];

    let results = run_jobs(cfg.m_grid.len(), common.jobs, |i| {
        let m = cfg.m_grid[i];
        let started = Instant::now();
        let outcome = (|| -> Result<usize, String> {
            let centers = cfg
                .sequence
                .take(cfg.domain, m)
                .map_err(|e| e.to_string())?;
            let space = RbfSpace::new(
                cfg.kernel,
                centers,
                ShapePolicy::Constant(cfg.eps),
                cfg.degree,
            )
            .map_err(|e| e.to_string())?;
            let run = lsquad::algorithm1(
                &space,
                cfg.sequence,
                |_| 1.0,
                None,
                50 * m * m,
                StepMode::Unit,
            )
            .map_err(|e| e.to_string())?;
            Ok(run.n_final)
        })();
        (outcome, started.elapsed())
    });

    let mut w = TableWriter::to_path(common.out.as_deref(), common.format).map_err(io_err)?;
    w.meta(&meta_record("ratio-study", &params))
        .map_err(io_err)?;
    let mut fit_rows: Vec<(usize, usize)> = Vec::new();
    for (m, (outcome, elapsed)) in cfg.m_grid.iter().zip(&results) {
        let mut row: Record = vec![
            field("kernel", cfg.kernel),
            field("eps", cfg.eps),
            field("degree", cfg.degree),
            field("m", m),
        ];
        match outcome {
            Ok(n_final) => {
                row.push(field("n_final", n_final));
                fit_rows.push((*m, *n_final));
            }
            Err(_) => row.push(field("n_final", "")),
        }
        if common.timings {
            row.push(field("runtime_ms", elapsed.as_millis()));
        }
        row.push(field(
            "error",
            outcome.as_ref().err().cloned().unwrap_or_default(),
        ));
        w.row(&row).map_err(io_err)?;
    }
    if fit_rows.len() >= 2 {
        let (c, s) = fit_power_law(&fit_rows);
        w.footer("fit", &vec![field("C", c), field("s", s)])
            .map_err(io_err)?;
    }
    w.finish().map_err(io_err)
}

// ---------------------------------------------------------------------------
// coverage
// ---------------------------------------------------------------------------

pub struct CoverageConfig {
    pub n_grid: Vec<usize>,
    pub eps_grid: Option<Vec<f64>>,
    pub eps_grid_spec: String,
    pub samples: usize,
    pub seed: u64,
}

pub fn run_coverage(cfg: CoverageConfig, common: &Common) -> RunResult {
    if cfg.samples < 10_000 {
        return Err(format!(
            "--samples must be at least 10000 for the error model, got {}",
            cfg.samples
        ));
    }
    let n_echo = cfg
        .n_grid
        .iter()
        .map(|n| n.to_string())
        .collect::<Vec<_>>()
        .join(",");
    let params: Record = vec![
        field("n_grid", n_echo),
        field("eps_grid", &cfg.eps_grid_spec),
        field("samples", cfg.samples),
        field("seed", cfg.seed),
    ];

    struct Cell {
        n: usize,
        eps: f64,
    }
    let mut cells = Vec::new();
    for &n in &cfg.n_grid {
        let eps_values: Vec<f64> = match &cfg.eps_grid {
            Some(g) => g.clone(),
            None => {
                // Default: both breakpoints +- 20%.
                let q = CoverageQuery { n, eps: 1.0 };
                let bp1 = q.full_cover_threshold();
                let bp2 = q.disjoint_threshold();
                vec![0.8 * bp1, 1.2 * bp1, 0.8 * bp2, 1.2 * bp2]
            }
        };
        for eps in eps_values {
            cells.push(Cell { n, eps });
        }
    }

    let results = run_jobs(cells.len(), common.jobs, |i| {
        let cell = &cells[i];
        let started = Instant::now();
        let outcome = (|| -> Result<(f64, f64, f64), String> {
            let side = (cell.n as f64).sqrt().round() as usize;
            if side * side != cell.n || side < 2 {
                return Err(format!("N = {} is not a perfect square >= 4", cell.n));
            }
            let closed = uncovered_area_equidistant(&CoverageQuery {
                n: cell.n,
                eps: cell.eps,
            });
            let grid = PointSet::equidistant(Domain::unit_square(), side);
            let mc = monte_carlo_uncovered(&grid, 1.0 / cell.eps, cfg.samples, cfg.seed);
            Ok((closed, mc.fraction, mc.std_error))
        })();
        (outcome, started.elapsed())
    });

    let mut w = TableWriter::to_path(common.out.as_deref(), common.format).map_err(io_err)?;
    w.meta(&meta_record("coverage", &params)).map_err(io_err)?;
    for (cell, (outcome, elapsed)) in cells.iter().zip(&results) {
        let mut row: Record = vec![
            field("n", cell.n),
            field("eps", cell.eps),
            field("samples", cfg.samples),
            field("seed", cfg.seed),
        ];
        match outcome {
            Ok((closed, mc, se)) => {
                row.push(field("closed_form", closed));
                row.push(field("monte_carlo", mc));
                row.push(field("std_error", se));
            }
            Err(_) => {
                for key in ["closed_form", "monte_carlo", "std_error"] {
                    row.push(field(key, ""));
                }
            }
        }
        if common.timings {
            row.push(field("runtime_ms", elapsed.as_millis()));
        }
        row.push(field(
            "error",
            outcome.as_ref().err().cloned().unwrap_or_default(),
        ));
        w.row(&row).map_err(io_err)?;
    }
    w.finish().map_err(io_err)
}
