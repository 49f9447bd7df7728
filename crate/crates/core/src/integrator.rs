//! Adaptive Dormand-Prince 5(4) integration with samples on a fixed time grid.
//!
//! Steps are accepted when the embedded error estimate, measured in the RMS
//! norm with per-component scale `abs_tol + rel_tol·max(|y₀|, |y₁|)`, is at most
//! one. Step sizes follow a PI controller and are capped at
//! `max_step_factor · t`. Grid samples inside an accepted step are filled by
//! cubic Hermite interpolation between the step endpoints.

use nalgebra::DVector;

use crate::dynamics::{PrimalDualField, TrajectoryState};
use crate::error::{Error, Result};

/// A first-order system `y' = F(t, y)`.
pub trait OdeSystem {
    fn rhs(&self, t: f64, y: &DVector<f64>) -> Result<DVector<f64>>;
}

impl<F> OdeSystem for F
where
    F: Fn(f64, &DVector<f64>) -> DVector<f64>,
{
    fn rhs(&self, t: f64, y: &DVector<f64>) -> Result<DVector<f64>> {
        Ok(self(t, y))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegratorConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_step_factor: f64,
    pub initial_step: f64,
    pub max_steps: usize,
    /// Number of log-spaced sample times on `[t0, T]`, both ends included.
    pub samples: usize,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self {
            rel_tol: 1e-8,
            abs_tol: 1e-10,
            max_step_factor: 0.1,
            initial_step: 1e-4,
            max_steps: 50_000_000,
            samples: 400,
        }
    }
}

impl IntegratorConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::InvalidParameter(format!("integrator {what}")));
        if !(self.rel_tol > 0.0 && self.abs_tol > 0.0) {
            return bad("tolerances must be > 0");
        }
        if !(self.max_step_factor > 0.0) {
            return bad("max_step_factor must be > 0");
        }
        if !(self.initial_step > 0.0) {
            return bad("initial_step must be > 0");
        }
        if self.max_steps == 0 {
            return bad("max_steps must be > 0");
        }
        if self.samples < 2 {
            return bad("needs at least 2 samples");
        }
        Ok(())
    }
}

/// `count` log-spaced times from `t0` to `t_end`; the end points are exact.
pub fn log_grid(t0: f64, t_end: f64, count: usize) -> Vec<f64> {
    assert!(t0 > 0.0 && t_end > t0 && count >= 2);
    let (l0, l1) = (t0.ln(), t_end.ln());
    let mut grid: Vec<f64> = (0..count)
        .map(|i| (l0 + (l1 - l0) * i as f64 / (count - 1) as f64).exp())
        .collect();
    grid[0] = t0;
    grid[count - 1] = t_end;
    grid
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct StepStats {
    pub accepted: usize,
    pub rejected: usize,
    pub min_step: f64,
    pub max_step: f64,
    pub rhs_evals: usize,
}

/// Grid samples of a generic solve.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Solution {
    pub times: Vec<f64>,
    pub states: Vec<DVector<f64>>,
    /// Size of the accepted step that produced each sample.
    pub step_sizes: Vec<f64>,
    pub stats: StepStats,
}

#[derive(Debug)]
pub enum FailureKind {
    Diverged,
    Truncated,
    Field(Error),
}

/// A solve that stopped early, with everything sampled up to that point.
#[derive(Debug)]
pub struct SolveFailure {
    pub kind: FailureKind,
    pub t: f64,
    pub partial: Solution,
}

// Dormand-Prince 5(4) tableau.
const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

const SAFETY: f64 = 0.9;
const MIN_FACTOR: f64 = 0.2;
const MAX_FACTOR: f64 = 10.0;
const PI_BETA: f64 = 0.04;

fn combo(y: &DVector<f64>, h: f64, terms: &[(f64, &DVector<f64>)]) -> DVector<f64> {
    let mut out = y.clone();
    for &(c, k) in terms {
        out.axpy(h * c, k, 1.0);
    }
    out
}

fn hermite(
    theta: f64,
    h: f64,
    y0: &DVector<f64>,
    f0: &DVector<f64>,
    y1: &DVector<f64>,
    f1: &DVector<f64>,
) -> DVector<f64> {
    let dy = y1 - y0;
    let mut bracket = &dy * (1.0 - 2.0 * theta);
    bracket.axpy((theta - 1.0) * h, f0, 1.0);
    bracket.axpy(theta * h, f1, 1.0);
    let mut out = y0 * (1.0 - theta);
    out.axpy(theta, y1, 1.0);
    out.axpy(theta * (theta - 1.0), &bracket, 1.0);
    out
}

fn all_finite(y: &DVector<f64>) -> bool {
    y.iter().all(|v| v.is_finite())
}

/// Integrates `sys` from `(grid[0], y0)` to the last grid time, returning the
/// state at every grid time.
#[allow(clippy::result_large_err)]
pub fn solve<S: OdeSystem + ?Sized>(
    sys: &S,
    y0: &DVector<f64>,
    grid: &[f64],
    cfg: &IntegratorConfig,
) -> std::result::Result<Solution, SolveFailure> {
    let fail = |kind, t, partial| SolveFailure { kind, t, partial };
    let mut sol = Solution::default();
    if let Err(e) = cfg.validate() {
        return Err(fail(FailureKind::Field(e), f64::NAN, sol));
    }
    if grid.len() < 2 || grid.windows(2).any(|w| !(w[1] > w[0])) {
        let e = Error::InvalidParameter("sample grid must be strictly increasing".into());
        return Err(fail(FailureKind::Field(e), f64::NAN, sol));
    }
    let t_end = *grid.last().unwrap();
    let mut t = grid[0];
    let mut y = y0.clone();

    let mut k1 = match sys.rhs(t, &y) {
        Ok(k) => k,
        Err(e) => return Err(fail(FailureKind::Field(e), t, sol)),
    };
    sol.stats.rhs_evals += 1;
    sol.stats.min_step = f64::INFINITY;

    let mut h = cfg.initial_step.min(cfg.max_step_factor * t).min(t_end - t);
    let mut next_sample = 1;
    let mut first_sample_pending = true;
    let mut err_prev: f64 = 1e-4;
    let mut last_rejected = false;
    let mut attempts = 0usize;

    sol.times.push(t);
    sol.states.push(y.clone());
    sol.step_sizes.push(f64::NAN);

    while t < t_end {
        attempts += 1;
        if attempts > cfg.max_steps {
            return Err(fail(FailureKind::Truncated, t, sol));
        }
        let h_max = cfg.max_step_factor * t;
        h = h.min(h_max);
        let mut last = false;
        if t + h >= t_end || t + 1.0001 * h >= t_end {
            h = t_end - t;
            last = true;
        }
        if h <= 1e-14 * t.abs().max(1.0) {
            return Err(fail(FailureKind::Diverged, t, sol));
        }

        let stages = (|| -> Result<_> {
            let k2 = sys.rhs(t + C2 * h, &combo(&y, h, &[(A21, &k1)]))?;
            let k3 = sys.rhs(t + C3 * h, &combo(&y, h, &[(A31, &k1), (A32, &k2)]))?;
            let k4 = sys.rhs(t + C4 * h, &combo(&y, h, &[(A41, &k1), (A42, &k2), (A43, &k3)]))?;
            let k5 = sys.rhs(
                t + C5 * h,
                &combo(&y, h, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]),
            )?;
            let k6 = sys.rhs(
                t + h,
                &combo(&y, h, &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]),
            )?;
            let y1 = combo(&y, h, &[(B1, &k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)]);
            let t1 = if last { t_end } else { t + h };
            let k7 = sys.rhs(t1, &y1)?;
            Ok((k3, k4, k5, k6, y1, k7))
        })();
        sol.stats.rhs_evals += 6;
        let (k3, k4, k5, k6, y1, k7) = match stages {
            Ok(v) => v,
            // A field error inside the step usually means the trial step left
            // the domain; retry smaller before giving up.
            Err(Error::Domain(_)) if h > 1e-10 * t => {
                h *= 0.25;
                sol.stats.rejected += 1;
                last_rejected = true;
                continue;
            }
            Err(e) => return Err(fail(FailureKind::Field(e), t, sol)),
        };

        let mut err_sq = 0.0;
        for i in 0..y.len() {
            let e = h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
            let sc = cfg.abs_tol + cfg.rel_tol * y[i].abs().max(y1[i].abs());
            err_sq += (e / sc).powi(2);
        }
        let err = (err_sq / y.len().max(1) as f64).sqrt();

        if !err.is_finite() || !all_finite(&y1) {
            if h > 1e-10 * t {
                h *= MIN_FACTOR;
                sol.stats.rejected += 1;
                last_rejected = true;
                continue;
            }
            return Err(fail(FailureKind::Diverged, t, sol));
        }

        if err <= 1.0 {
            let t1 = if last { t_end } else { t + h };
            // Fill grid samples in (t, t1].
            while next_sample < grid.len() && grid[next_sample] <= t1 {
                let ts = grid[next_sample];
                let ys = if ts == t1 {
                    y1.clone()
                } else {
                    hermite((ts - t) / h, h, &y, &k1, &y1, &k7)
                };
                sol.times.push(ts);
                sol.states.push(ys);
                sol.step_sizes.push(h);
                next_sample += 1;
            }
            if first_sample_pending {
                sol.step_sizes[0] = h;
                first_sample_pending = false;
            }
            sol.stats.accepted += 1;
            sol.stats.min_step = sol.stats.min_step.min(h);
            sol.stats.max_step = sol.stats.max_step.max(h);

            let mut factor = if err == 0.0 {
                MAX_FACTOR
            } else {
                SAFETY * err.powf(-(0.2 - 0.75 * PI_BETA)) * err_prev.powf(PI_BETA)
            };
            factor = factor.clamp(MIN_FACTOR, MAX_FACTOR);
            if last_rejected {
                factor = factor.min(1.0);
            }
            err_prev = err.max(1e-4);
            last_rejected = false;

            t = t1;
            y = y1;
            k1 = k7;
            h *= factor;
        } else {
            sol.stats.rejected += 1;
            let factor = (SAFETY * err.powf(-0.2)).max(MIN_FACTOR);
            h *= factor;
            last_rejected = true;
        }
    }
    Ok(sol)
}

/// Grid samples of a primal-dual trajectory.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Trajectory {
    pub samples: Vec<TrajectoryState>,
    pub step_sizes: Vec<f64>,
    pub stats: StepStats,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn times(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.t).collect()
    }

    pub fn last(&self) -> Option<&TrajectoryState> {
        self.samples.last()
    }

    /// Samples with `lo ≤ t ≤ hi`.
    pub fn window(&self, lo: f64, hi: f64) -> Trajectory {
        let keep: Vec<usize> = (0..self.len())
            .filter(|&i| self.samples[i].t >= lo && self.samples[i].t <= hi)
            .collect();
        Trajectory {
            samples: keep.iter().map(|&i| self.samples[i].clone()).collect(),
            step_sizes: keep.iter().map(|&i| self.step_sizes[i]).collect(),
            stats: self.stats,
        }
    }

    fn from_solution(sol: Solution, n: usize) -> Self {
        Trajectory {
            samples: sol
                .times
                .iter()
                .zip(&sol.states)
                .map(|(&t, y)| TrajectoryState::from_flat(t, y, n))
                .collect(),
            step_sizes: sol.step_sizes,
            stats: sol.stats,
        }
    }
}

/// Integrates the flow from `state0` to `horizon` on `cfg.samples` log-spaced times.
pub fn integrate(
    field: &PrimalDualField<'_>,
    state0: &TrajectoryState,
    horizon: f64,
    cfg: &IntegratorConfig,
) -> Result<Trajectory> {
    cfg.validate()?;
    if !(horizon > state0.t) {
        return Err(Error::InvalidParameter(format!(
            "horizon {horizon} must exceed the initial time {}",
            state0.t
        )));
    }
    let grid = log_grid(state0.t, horizon, cfg.samples);
    integrate_on_grid(field, state0, &grid, cfg)
}

/// Like [`integrate`] with an explicit sample grid starting at `state0.t`.
pub fn integrate_on_grid(
    field: &PrimalDualField<'_>,
    state0: &TrajectoryState,
    grid: &[f64],
    cfg: &IntegratorConfig,
) -> Result<Trajectory> {
    let prob = field.problem;
    prob.check_primal(&state0.x)?;
    prob.check_primal(&state0.v)?;
    prob.check_dual(&state0.lambda)?;
    if grid.first() != Some(&state0.t) {
        return Err(Error::InvalidParameter(
            "sample grid must start at the initial time".into(),
        ));
    }
    if !state0.is_finite() {
        return Err(Error::InvalidParameter("initial state is not finite".into()));
    }
    let n = prob.dim_x();
    solve(field, &state0.to_flat(), grid, cfg)
        .map(|sol| Trajectory::from_solution(sol, n))
        .map_err(|f| {
            let steps = f.partial.stats.accepted + f.partial.stats.rejected;
            let partial = Box::new(Trajectory::from_solution(f.partial, n));
            match f.kind {
                FailureKind::Diverged => Error::Diverged { t: f.t, partial },
                FailureKind::Truncated => Error::Truncated {
                    steps,
                    t: f.t,
                    partial,
                },
                FailureKind::Field(e) => e,
            }
        })
}
