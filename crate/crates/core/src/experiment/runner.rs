//! Runs configured sweeps: classify, integrate, measure, write CSV and summaries.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use rayon::prelude::*;

use super::config::{ExperimentConfig, SweepMember};
use crate::diagnostics::{
    fit_rate, metrics, oscillation_measure, ComponentSelector, Metric, MetricRow, Oscillation,
    RateEstimate, CSV_HEADER, DEFAULT_SLACK,
};
use crate::dynamics::{
    validate_and_classify, AssumptionReport, PrimalDualField, RegimeReport, TrajectoryState,
};
use crate::error::{Error, Result};
use crate::integrator::{integrate, StepStats, Trajectory};
use crate::lagrangian::{min_norm_solution, saddle_path, MinNormSolution};
use crate::problem::text::fmt_f64;
use crate::problem::Problem;

/// Metrics whose decay rate is fitted for every run.
pub const FITTED_METRICS: [Metric; 6] = [
    Metric::ObjResidual,
    Metric::Feasibility,
    Metric::LagrangianGap,
    Metric::DistSaddleSq,
    Metric::DistMinNorm,
    Metric::Energy,
];

#[derive(Debug, Clone, PartialEq)]
pub enum RunStatus {
    Ok,
    Diverged { t: f64 },
    Truncated { t: f64, steps: usize },
    Failed(String),
}

impl RunStatus {
    pub fn is_ok(&self) -> bool {
        matches!(self, RunStatus::Ok)
    }

    pub fn label(&self) -> String {
        match self {
            RunStatus::Ok => "ok".into(),
            RunStatus::Diverged { t } => format!("diverged@{t:.6e}"),
            RunStatus::Truncated { t, steps } => format!("truncated@{t:.6e}/{steps}steps"),
            RunStatus::Failed(_) => "failed".into(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunSummary {
    pub label: String,
    pub sweep_value: Option<f64>,
    pub regime: RegimeReport,
    pub assumptions: AssumptionReport,
    pub status: RunStatus,
    /// Last row written, if any.
    pub terminal: Option<MetricRow>,
    pub rates: Vec<RateEstimate>,
    /// Oscillation of `f(x(t))` from the oscillation start to the horizon.
    pub oscillation: Option<Oscillation>,
    pub stats: StepStats,
    pub warnings: Vec<String>,
    pub wall_clock: Duration,
}

impl RunSummary {
    pub fn rate(&self, metric: Metric) -> Option<&RateEstimate> {
        self.rates.iter().find(|r| r.metric == metric)
    }

    /// One line of space-separated `key=value` fields.
    pub fn to_line(&self) -> String {
        let mut s = String::new();
        let _ = write!(s, "run={} status={}", self.label, self.status.label());
        if let Some(v) = self.sweep_value {
            let _ = write!(s, " sweep_value={v}");
        }
        let _ = write!(s, " regime={} r={:.6}", self.regime.regime, self.regime.r);
        if !self.regime.applicable.is_empty() {
            let names: Vec<_> = self.regime.applicable.iter().map(|r| r.label()).collect();
            let _ = write!(s, " applicable={}", names.join(","));
        }
        if let Some(p) = self.regime.predicted {
            let _ = write!(
                s,
                " pred_gap={:.6} pred_feas={:.6} pred_dist={:.6}",
                p.gap_exp, p.feas_exp, p.dist_exp
            );
        }
        if let Some(row) = &self.terminal {
            let _ = write!(
                s,
                " t_end={:.6e} obj_residual={:.6e} feasibility={:.6e} lagrangian_gap={:.6e} dist_saddle_sq={:.6e} dist_minnorm={:.6e} energy={:.6e}",
                row.t,
                row.obj_residual,
                row.feasibility,
                row.lagrangian_gap,
                row.dist_saddle_sq,
                row.dist_minnorm,
                row.energy
            );
        }
        for r in &self.rates {
            let _ = write!(s, " slope_{}={:.4}", r.metric.name(), r.fitted_slope);
            if let Some(v) = r.verdict {
                let _ = write!(s, " verdict_{}={v}", r.metric.name());
            }
        }
        if let Some(o) = self.oscillation {
            let _ = write!(
                s,
                " osc_sign_changes={} osc_total_variation={:.6e}",
                o.sign_changes, o.total_variation
            );
        }
        let _ = write!(
            s,
            " steps={} rejected={} min_step={:.3e} max_step={:.3e} wall_clock_s={:.3}",
            self.stats.accepted,
            self.stats.rejected,
            self.stats.min_step,
            self.stats.max_step,
            self.wall_clock.as_secs_f64()
        );
        if let RunStatus::Failed(msg) = &self.status {
            let _ = write!(s, " error={msg:?}");
        }
        for w in &self.warnings {
            let _ = write!(s, " warning={w:?}");
        }
        s
    }
}

/// Everything produced by one sweep member.
#[derive(Debug, Clone)]
pub struct MemberOutput {
    pub summary: RunSummary,
    pub rows: Vec<MetricRow>,
    pub trajectory: Trajectory,
}

/// The initial state described by the config.
pub fn initial_state(cfg: &ExperimentConfig, prob: &Problem) -> Result<TrajectoryState> {
    let (n, m) = (prob.dim_x(), prob.dim_y());
    TrajectoryState::new(
        cfg.params.t0,
        cfg.initial.x.build("initial x", n)?,
        cfg.initial.v.build("initial v", n)?,
        cfg.initial.lambda.build("initial lambda", m)?,
    )
}

fn measure(
    prob: &Problem,
    member: &SweepMember,
    traj: &Trajectory,
    min_norm: &MinNormSolution,
) -> Result<Vec<MetricRow>> {
    let path = saddle_path(prob, member.params.reg(), &traj.times())?;
    metrics(prob, &member.params, &member.mass, traj, &path, min_norm)
}

/// Integrates and measures one sweep member. Failures are reported in the
/// summary status; whatever was sampled before a failure is kept.
pub fn run_member(
    cfg: &ExperimentConfig,
    prob: &Problem,
    min_norm: &MinNormSolution,
    member: &SweepMember,
) -> MemberOutput {
    let started = Instant::now();
    let regime = validate_and_classify(&member.params, &member.mass);
    let assumptions = member.mass.assumption_report(&member.params);
    let mut warnings = regime.warnings.clone();

    let field = PrimalDualField::new(prob, &member.params, &member.mass);
    let outcome = initial_state(cfg, prob)
        .and_then(|s0| integrate(&field, &s0, cfg.horizon, &cfg.integrator_config()));
    let (trajectory, mut status) = match outcome {
        Ok(traj) => (traj, RunStatus::Ok),
        Err(Error::Diverged { t, partial }) => (*partial, RunStatus::Diverged { t }),
        Err(Error::Truncated { steps, t, partial }) => (*partial, RunStatus::Truncated { t, steps }),
        Err(e) => (Trajectory::default(), RunStatus::Failed(e.to_string())),
    };

    let rows = if trajectory.is_empty() {
        Vec::new()
    } else {
        match measure(prob, member, &trajectory, min_norm) {
            Ok(rows) => rows,
            Err(e) => {
                if status.is_ok() {
                    status = RunStatus::Failed(format!("metrics: {e}"));
                }
                Vec::new()
            }
        }
    };

    let mut rates = Vec::new();
    let mut oscillation = None;
    if status.is_ok() && !rows.is_empty() {
        let window = cfg.rate_window();
        for metric in FITTED_METRICS {
            let predicted = regime.predicted.and_then(|p| metric.predicted_slope(&p));
            match fit_rate(&rows, metric, window, predicted, DEFAULT_SLACK) {
                Ok(r) => rates.push(r),
                Err(e) => warnings.push(e.to_string()),
            }
        }
        let tail = trajectory.window(cfg.oscillation_start(), cfg.horizon);
        match oscillation_measure(prob, &tail, ComponentSelector::Objective) {
            Ok(o) => oscillation = Some(o),
            Err(e) => warnings.push(format!("oscillation: {e}")),
        }
    }

    MemberOutput {
        summary: RunSummary {
            label: member.label.clone(),
            sweep_value: member.value,
            regime,
            assumptions,
            status,
            terminal: rows.last().cloned(),
            rates,
            oscillation,
            stats: trajectory.stats,
            warnings,
            wall_clock: started.elapsed(),
        },
        rows,
        trajectory,
    }
}

/// Runs every sweep member concurrently; results keep the sweep order.
pub fn execute(cfg: &ExperimentConfig) -> Result<Vec<MemberOutput>> {
    cfg.validate()?;
    let prob = cfg.build_problem()?;
    let min_norm = min_norm_solution(&prob)?;
    let members = cfg.members()?;
    Ok(members
        .par_iter()
        .map(|m| run_member(cfg, &prob, &min_norm, m))
        .collect())
}

/// CSV text for one run. With `state` the sampled `x`, `v` and `λ` are appended
/// as `x0.., v0.., lambda0..` columns.
pub fn csv_string(rows: &[MetricRow], state: Option<&Trajectory>) -> String {
    let mut out = String::from(CSV_HEADER);
    if let Some(s) = state.and_then(|t| t.samples.first()) {
        for (prefix, len) in [("x", s.x.len()), ("v", s.v.len()), ("lambda", s.lambda.len())] {
            for i in 0..len {
                let _ = write!(out, ",{prefix}{i}");
            }
        }
    }
    out.push('\n');
    for (k, row) in rows.iter().enumerate() {
        let fields = row.fields();
        let mut cells: Vec<String> = fields.iter().map(|&v| fmt_f64(v)).collect();
        if let Some(s) = state.and_then(|t| t.samples.get(k)) {
            cells.extend(s.x.iter().chain(&s.v).chain(&s.lambda).map(|&v| fmt_f64(v)));
        }
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

/// Paths and summaries of a finished [`run`].
#[derive(Debug, Clone)]
pub struct RunReport {
    pub summaries: Vec<RunSummary>,
    pub csv_files: Vec<PathBuf>,
    pub summary_file: PathBuf,
}

impl RunReport {
    pub fn all_ok(&self) -> bool {
        self.summaries.iter().all(|s| s.status.is_ok())
    }
}

/// Runs the config and writes `<label>.csv` per member plus
/// `<name>_summary.txt` into `out_dir`.
pub fn run(cfg: &ExperimentConfig, out_dir: &Path) -> Result<RunReport> {
    let outputs = execute(cfg)?;
    std::fs::create_dir_all(out_dir)?;
    let mut csv_files = Vec::new();
    let mut summary_text = String::new();
    for out in &outputs {
        let path = out_dir.join(format!("{}.csv", out.summary.label));
        let state = cfg.dump_state.then_some(&out.trajectory);
        std::fs::write(&path, csv_string(&out.rows, state))?;
        csv_files.push(path);
        summary_text.push_str(&out.summary.to_line());
        summary_text.push('\n');
    }
    let summary_file = out_dir.join(format!("{}_summary.txt", cfg.name));
    std::fs::write(&summary_file, summary_text)?;
    Ok(RunReport {
        summaries: outputs.into_iter().map(|o| o.summary).collect(),
        csv_files,
        summary_file,
    })
}

/// Regime and assumption report for every sweep member, without integrating.
pub fn check(cfg: &ExperimentConfig) -> Result<String> {
    cfg.validate()?;
    let prob = cfg.build_problem()?;
    let mut out = String::new();
    let _ = writeln!(
        out,
        "config={} problem_dims=n{}xm{} horizon={} window=[{}, {}]",
        cfg.name,
        prob.dim_x(),
        prob.dim_y(),
        cfg.horizon,
        cfg.rate_window().0,
        cfg.rate_window().1
    );
    for m in cfg.members()? {
        let rep = validate_and_classify(&m.params, &m.mass);
        let asm = m.mass.assumption_report(&m.params);
        let _ = write!(
            out,
            "run={} regime={} r={:.6} mass_bounds={} mass_regularity={} k2={}",
            m.label, rep.regime, rep.r, asm.satisfies_bounds, asm.satisfies_regularity, asm.k2
        );
        if !rep.applicable.is_empty() {
            let names: Vec<_> = rep.applicable.iter().map(|r| r.label()).collect();
            let _ = write!(out, " applicable={}", names.join(","));
        }
        if let Some(p) = rep.predicted {
            let _ = write!(
                out,
                " pred_gap={:.6} pred_feas={:.6} pred_dist={:.6}",
                p.gap_exp, p.feas_exp, p.dist_exp
            );
        }
        for c in &rep.violated_conditions {
            let _ = write!(out, " violated={}:{}({:.4})", c.family, c.expr, c.value);
        }
        for w in &rep.warnings {
            let _ = write!(out, " warning={w:?}");
        }
        out.push('\n');
    }
    Ok(out)
}
