//! Parameter-grid orchestration and figure-reproduction presets.
//!
//! Grid points are independent and are evaluated on the ambient rayon pool;
//! results are collected back in grid order, so the emitted CSV is
//! byte-identical regardless of the worker count.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analysis::{find_lambda_qc, propagate_pair, run_point, RunSummary};
use crate::dynamics::{PropagationControls, Trajectory};
use crate::error::{Error, Result};
use crate::model::BaseParams;

pub const DEFAULT_MAX_POINTS: usize = 10_000;

fn default_unit_label() -> String {
    "a.u.".to_owned()
}

fn default_max_points() -> usize {
    DEFAULT_MAX_POINTS
}

/// A parameter that a sweep axis can vary.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepParameter {
    Lambda,
    Gamma,
    BigGamma,
    GammaSink,
    N,
}

impl SweepParameter {
    pub fn label(self) -> &'static str {
        match self {
            SweepParameter::Lambda => "lambda",
            SweepParameter::Gamma => "gamma",
            SweepParameter::BigGamma => "big_gamma",
            SweepParameter::GammaSink => "gamma_sink",
            SweepParameter::N => "n",
        }
    }

    fn apply(self, params: &mut BaseParams, value: f64) -> Result<()> {
        match self {
            SweepParameter::Lambda => params.lambda = value,
            SweepParameter::Gamma => params.gamma = value,
            SweepParameter::BigGamma => params.big_gamma = value,
            SweepParameter::GammaSink => params.gamma_sink = value,
            SweepParameter::N => {
                if value.fract() != 0.0 || value < 1.0 {
                    return Err(Error::InvalidParameter {
                        name: "n",
                        reason: format!("axis values must be integers >= 1 (got {value})"),
                    });
                }
                params.n = value as usize;
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepAxis {
    pub parameter: SweepParameter,
    pub values: Vec<f64>,
}

impl SweepAxis {
    pub fn new(parameter: SweepParameter, values: Vec<f64>) -> Self {
        SweepAxis { parameter, values }
    }
}

/// A Cartesian parameter grid around a base point. The last axis varies
/// fastest; output rows follow grid order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepPlan {
    pub base: BaseParams,
    #[serde(default)]
    pub axes: Vec<SweepAxis>,
    #[serde(default = "default_unit_label")]
    pub unit_label: String,
    #[serde(default = "default_max_points")]
    pub max_points: usize,
}

impl SweepPlan {
    pub fn single_point(base: BaseParams) -> Self {
        SweepPlan {
            base,
            axes: Vec::new(),
            unit_label: default_unit_label(),
            max_points: default_max_points(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.base.validate()?;
        let mut total: usize = 1;
        for axis in &self.axes {
            if axis.values.is_empty() {
                return Err(Error::InvalidParameter {
                    name: "axes",
                    reason: format!("axis `{}` has no values", axis.parameter.label()),
                });
            }
            for &v in &axis.values {
                if !v.is_finite() {
                    return Err(Error::InvalidParameter {
                        name: "axes",
                        reason: format!(
                            "axis `{}` contains a non-finite value",
                            axis.parameter.label()
                        ),
                    });
                }
            }
            total = total.saturating_mul(axis.values.len());
        }
        if total > self.max_points {
            return Err(Error::InvalidParameter {
                name: "axes",
                reason: format!("grid has {total} points, cap is {}", self.max_points),
            });
        }
        // materializing the grid revalidates every point
        self.points().map(|_| ())
    }

    /// All grid points in row-major order (last axis fastest).
    pub fn points(&self) -> Result<Vec<BaseParams>> {
        let sizes: Vec<usize> = self.axes.iter().map(|a| a.values.len()).collect();
        let total: usize = sizes.iter().product();
        let mut out = Vec::with_capacity(total);
        for mut idx in 0..total {
            let mut p = self.base;
            for ai in (0..self.axes.len()).rev() {
                let digit = idx % sizes[ai];
                idx /= sizes[ai];
                self.axes[ai]
                    .parameter
                    .apply(&mut p, self.axes[ai].values[digit])?;
            }
            p.validate()?;
            out.push(p);
        }
        Ok(out)
    }
}

/// Evaluate [`run_point`] on every grid point. Failed points degrade to
/// `converged = false` rows instead of aborting the sweep.
pub fn run_sweep(plan: &SweepPlan, ctrl: &PropagationControls) -> Result<Vec<RunSummary>> {
    plan.validate()?;
    ctrl.validate()?;
    let points = plan.points()?;
    Ok(points
        .into_par_iter()
        .map(|p| run_point(&p, ctrl).unwrap_or_else(|_| RunSummary::failed(p)))
        .collect())
}

/// Complete sweep description as read from a config file: plan plus
/// integrator controls. Unknown keys are rejected.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub base: BaseParams,
    #[serde(default)]
    pub axes: Vec<SweepAxis>,
    #[serde(default = "default_unit_label")]
    pub unit_label: String,
    #[serde(default = "default_max_points")]
    pub max_points: usize,
    #[serde(default)]
    pub controls: PropagationControls,
}

impl SweepConfig {
    pub fn plan(&self) -> SweepPlan {
        SweepPlan {
            base: self.base,
            axes: self.axes.clone(),
            unit_label: self.unit_label.clone(),
            max_points: self.max_points,
        }
    }
}

fn fmt_field(v: f64) -> String {
    v.to_string()
}

fn write_csv(path: &Path, header: &str, rows: &[String]) -> Result<()> {
    let mut buf = String::with_capacity(rows.len() * 64 + header.len() + 1);
    buf.push_str(header);
    buf.push('\n');
    for row in rows {
        buf.push_str(row);
        buf.push('\n');
    }
    fs::write(path, buf)?;
    Ok(())
}

/// Write run summaries as CSV with the standard column set.
pub fn write_summary_csv(path: &Path, summaries: &[RunSummary]) -> Result<()> {
    let rows: Vec<String> = summaries.iter().map(|s| s.csv_row()).collect();
    write_csv(path, RunSummary::CSV_HEADER, &rows)
}

/// Figures whose datasets this crate can regenerate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FigureId {
    Fig2,
    Fig3,
    Fig4,
    Fig5,
    Fig6,
    Fig7,
    Fig8,
    Fig9,
}

impl FigureId {
    pub const ALL: [FigureId; 8] = [
        FigureId::Fig2,
        FigureId::Fig3,
        FigureId::Fig4,
        FigureId::Fig5,
        FigureId::Fig6,
        FigureId::Fig7,
        FigureId::Fig8,
        FigureId::Fig9,
    ];

    pub fn name(self) -> &'static str {
        match self {
            FigureId::Fig2 => "fig2",
            FigureId::Fig3 => "fig3",
            FigureId::Fig4 => "fig4",
            FigureId::Fig5 => "fig5",
            FigureId::Fig6 => "fig6",
            FigureId::Fig7 => "fig7",
            FigureId::Fig8 => "fig8",
            FigureId::Fig9 => "fig9",
        }
    }
}

impl fmt::Display for FigureId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FigureId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        FigureId::ALL
            .into_iter()
            .find(|id| id.name() == s.to_ascii_lowercase())
            .ok_or_else(|| Error::InvalidParameter {
                name: "figure",
                reason: format!(
                    "unknown figure `{s}`; valid ids: {}",
                    FigureId::ALL.map(|id| id.name()).join(", ")
                ),
            })
    }
}

/// Fully resolved description of how a figure dataset is produced. Stored in
/// the meta file so a dataset can be regenerated from it alone.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FigureTask {
    /// Quantum/classical sink trajectories plus coherence per coupling.
    Trajectories { base: BaseParams, lambdas: Vec<f64> },
    /// Run-summary quantifiers over a parameter grid.
    SummaryGrid { base: BaseParams, axes: Vec<SweepAxis> },
    /// λ_QC root finds over a (Γ, γ) grid.
    LambdaQcGrid {
        base: BaseParams,
        big_gammas: Vec<f64>,
        gammas: Vec<f64>,
        bracket: (f64, f64),
        tol: f64,
    },
}

/// Sidecar metadata written next to every figure dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FigureMeta {
    pub figure: FigureId,
    pub tool: String,
    pub unit_label: String,
    pub columns: Vec<String>,
    pub data_files: Vec<String>,
    pub controls: PropagationControls,
    pub task: FigureTask,
}

/// Files produced for one figure.
#[derive(Debug, Clone)]
pub struct FigureOutput {
    pub data_files: Vec<PathBuf>,
    pub meta_file: PathBuf,
    pub rows: usize,
}

fn linspace(a: f64, b: f64, count: usize) -> Vec<f64> {
    if count == 1 {
        return vec![a];
    }
    (0..count)
        .map(|i| a + (b - a) * i as f64 / (count - 1) as f64)
        .collect()
}

/// Preset task and unit label behind each figure id.
///
/// Values quoted from the figure captions are used verbatim; grid densities
/// and the Fig. 2 panel couplings beyond λ_QC are preset choices recorded in
/// the emitted meta file.
pub fn figure_preset(id: FigureId) -> (FigureTask, String) {
    // reference chain: N = 3, Γ = 0.5, γ = 0.25, Γ_s = 1, all in a.u.
    let reference = BaseParams {
        n: 3,
        omega: 0.0,
        lambda: 1.0,
        gamma: 0.25,
        big_gamma: 0.5,
        gamma_sink: 1.0,
    };
    let au = default_unit_label();
    match id {
        FigureId::Fig2 => (
            FigureTask::Trajectories {
                base: reference,
                lambdas: vec![0.84, 1.0, 1.5, 3.0],
            },
            au,
        ),
        FigureId::Fig3 | FigureId::Fig4 => (
            FigureTask::SummaryGrid {
                base: reference,
                axes: vec![SweepAxis::new(
                    SweepParameter::Lambda,
                    linspace(0.85, 3.0, 30),
                )],
            },
            au,
        ),
        FigureId::Fig5 => (
            FigureTask::SummaryGrid {
                base: reference,
                axes: vec![
                    SweepAxis::new(SweepParameter::Gamma, vec![0.25, 0.5, 0.75, 1.0]),
                    SweepAxis::new(SweepParameter::Lambda, linspace(0.0, 3.0, 31)),
                ],
            },
            au,
        ),
        FigureId::Fig6 => (
            FigureTask::LambdaQcGrid {
                base: reference,
                big_gammas: vec![0.5, 0.75, 1.0, 1.5],
                gammas: vec![0.25, 0.5, 0.75, 1.0],
                bracket: (0.05, 10.0),
                tol: 1e-3,
            },
            au,
        ),
        FigureId::Fig7 => (
            FigureTask::SummaryGrid {
                base: reference,
                axes: vec![
                    SweepAxis::new(SweepParameter::Lambda, vec![0.5, 1.0, 1.5, 3.0]),
                    SweepAxis::new(SweepParameter::Gamma, linspace(0.0, 2.0, 41)),
                ],
            },
            au,
        ),
        FigureId::Fig8 => (
            FigureTask::SummaryGrid {
                base: reference,
                axes: vec![
                    SweepAxis::new(SweepParameter::N, vec![2.0, 3.0, 4.0, 5.0]),
                    SweepAxis::new(SweepParameter::Lambda, vec![0.5, 1.0, 1.5, 3.0]),
                    SweepAxis::new(SweepParameter::Gamma, linspace(0.0, 2.0, 41)),
                ],
            },
            au,
        ),
        FigureId::Fig9 => (
            FigureTask::SummaryGrid {
                base: BaseParams {
                    n: 2,
                    omega: 0.0,
                    lambda: 2.5,
                    gamma: 0.0,
                    big_gamma: 5.0,
                    gamma_sink: 10.0,
                },
                axes: vec![
                    SweepAxis::new(SweepParameter::Lambda, vec![2.5, 5.0, 10.0, 15.0]),
                    SweepAxis::new(SweepParameter::Gamma, linspace(0.0, 20.0, 41)),
                ],
            },
            "MHz".to_owned(),
        ),
    }
}

fn figure_columns(id: FigureId) -> Vec<String> {
    let cols: &[&str] = match id {
        FigureId::Fig2 => &["t", "p_q", "p_c", "coherence"],
        FigureId::Fig3 => &["lambda", "c_max", "tau"],
        FigureId::Fig4 => &["lambda", "c_max"],
        FigureId::Fig5 => &["gamma", "lambda", "eta_q", "eta_c", "eta_diff"],
        FigureId::Fig6 => &["big_gamma", "gamma", "lambda_qc", "residual"],
        FigureId::Fig7 => &[
            "lambda",
            "gamma",
            "eta_q",
            "eta_c",
            "eta_diff",
            "integrated_coherence",
        ],
        FigureId::Fig8 => &[
            "n",
            "lambda",
            "gamma",
            "eta_q",
            "eta_c",
            "eta_diff",
            "integrated_coherence",
        ],
        FigureId::Fig9 => &["lambda_mhz", "gamma_mhz", "eta_q", "eta_c", "eta_diff", "i_ns"],
    };
    cols.iter().map(|s| (*s).to_owned()).collect()
}

fn summary_row(id: FigureId, s: &RunSummary) -> String {
    let p = &s.params;
    let f = fmt_field;
    match id {
        FigureId::Fig3 => format!(
            "{},{},{}",
            f(p.lambda),
            f(s.max_coherence),
            s.intersection_time.map(|t| t.to_string()).unwrap_or_default()
        ),
        FigureId::Fig4 => format!("{},{}", f(p.lambda), f(s.max_coherence)),
        FigureId::Fig5 => format!(
            "{},{},{},{},{}",
            f(p.gamma),
            f(p.lambda),
            f(s.eta_q),
            f(s.eta_c),
            f(s.eta_diff)
        ),
        FigureId::Fig7 => format!(
            "{},{},{},{},{},{}",
            f(p.lambda),
            f(p.gamma),
            f(s.eta_q),
            f(s.eta_c),
            f(s.eta_diff),
            f(s.integrated_coherence)
        ),
        FigureId::Fig8 => format!(
            "{},{},{},{},{},{},{}",
            p.n,
            f(p.lambda),
            f(p.gamma),
            f(s.eta_q),
            f(s.eta_c),
            f(s.eta_diff),
            f(s.integrated_coherence)
        ),
        // rates entered in MHz make 1/MHz = 1 µs the time unit, so the
        // integrated coherence converts to nanoseconds as I · 1000
        FigureId::Fig9 => format!(
            "{},{},{},{},{},{}",
            f(p.lambda),
            f(p.gamma),
            f(s.eta_q),
            f(s.eta_c),
            f(s.eta_diff),
            f(s.integrated_coherence * 1000.0)
        ),
        FigureId::Fig2 | FigureId::Fig6 => unreachable!("not a summary-grid figure"),
    }
}

fn lambda_file_label(lambda: f64) -> String {
    format!("{lambda:.2}").replace('.', "p")
}

/// Regenerate the dataset behind `id` into `out_dir`, writing
/// `<id>_data.csv` (four per-panel files for fig2) and `<id>_meta.json`.
pub fn reproduce_figure(
    id: FigureId,
    out_dir: &Path,
    ctrl: &PropagationControls,
) -> Result<FigureOutput> {
    let (task, unit_label) = figure_preset(id);
    run_figure_task(id, &task, ctrl, &unit_label, out_dir)
}

/// Regenerate a dataset from a previously written meta file; the output is
/// byte-identical to the original run.
pub fn reproduce_from_meta(meta_path: &Path, out_dir: &Path) -> Result<FigureOutput> {
    let text = fs::read_to_string(meta_path)?;
    let meta: FigureMeta =
        serde_json::from_str(&text).map_err(|e| Error::Meta(e.to_string()))?;
    run_figure_task(meta.figure, &meta.task, &meta.controls, &meta.unit_label, out_dir)
}

fn run_figure_task(
    id: FigureId,
    task: &FigureTask,
    ctrl: &PropagationControls,
    unit_label: &str,
    out_dir: &Path,
) -> Result<FigureOutput> {
    ctrl.validate()?;
    fs::create_dir_all(out_dir)?;
    let mut data_files = Vec::new();
    let mut rows_written = 0usize;

    match task {
        FigureTask::Trajectories { base, lambdas } => {
            let runs: Vec<(f64, (Trajectory, Trajectory))> = lambdas
                .par_iter()
                .map(|&lam| propagate_pair(&base.with_lambda(lam), ctrl).map(|p| (lam, p)))
                .collect::<Result<Vec<_>>>()?;
            for (lam, (tq, tc)) in &runs {
                let mut rows = Vec::with_capacity(tq.len());
                for i in 0..tq.len() {
                    rows.push(format!(
                        "{},{},{},{}",
                        tq.times[i], tq.sink_population[i], tc.sink_population[i], tq.coherence[i]
                    ));
                }
                let path = out_dir.join(format!(
                    "{id}_lambda{}_data.csv",
                    lambda_file_label(*lam)
                ));
                write_csv(&path, &figure_columns(id).join(","), &rows)?;
                rows_written += rows.len();
                data_files.push(path);
            }
        }
        FigureTask::SummaryGrid { base, axes } => {
            let plan = SweepPlan {
                base: *base,
                axes: axes.clone(),
                unit_label: unit_label.to_owned(),
                max_points: default_max_points(),
            };
            let summaries = run_sweep(&plan, ctrl)?;
            let rows: Vec<String> = summaries.iter().map(|s| summary_row(id, s)).collect();
            let path = out_dir.join(format!("{id}_data.csv"));
            write_csv(&path, &figure_columns(id).join(","), &rows)?;
            rows_written = rows.len();
            data_files.push(path);
        }
        FigureTask::LambdaQcGrid {
            base,
            big_gammas,
            gammas,
            bracket,
            tol,
        } => {
            let grid: Vec<(f64, f64)> = big_gammas
                .iter()
                .flat_map(|&bg| gammas.iter().map(move |&g| (bg, g)))
                .collect();
            let results: Vec<String> = grid
                .par_iter()
                .map(|&(bg, g)| {
                    let mut p = *base;
                    p.big_gamma = bg;
                    p.gamma = g;
                    match find_lambda_qc(&p, *bracket, *tol, ctrl) {
                        Ok(r) => format!("{bg},{g},{},{}", r.lambda_qc, r.residual),
                        Err(_) => format!("{bg},{g},NaN,NaN"),
                    }
                })
                .collect();
            let path = out_dir.join(format!("{id}_data.csv"));
            write_csv(&path, &figure_columns(id).join(","), &results)?;
            rows_written = results.len();
            data_files.push(path);
        }
    }

    let meta = FigureMeta {
        figure: id,
        tool: format!("{} {}", env!("CARGO_PKG_NAME"), env!("CARGO_PKG_VERSION")),
        unit_label: unit_label.to_owned(),
        columns: figure_columns(id),
        data_files: data_files
            .iter()
            .map(|p| {
                p.file_name()
                    .map(|f| f.to_string_lossy().into_owned())
                    .unwrap_or_default()
            })
            .collect(),
        controls: ctrl.clone(),
        task: task.clone(),
    };
    let meta_file = out_dir.join(format!("{id}_meta.json"));
    let mut meta_text =
        serde_json::to_string_pretty(&meta).map_err(|e| Error::Meta(e.to_string()))?;
    meta_text.push('\n');
    fs::write(&meta_file, meta_text)?;

    Ok(FigureOutput {
        data_files,
        meta_file,
        rows: rows_written,
    })
}
