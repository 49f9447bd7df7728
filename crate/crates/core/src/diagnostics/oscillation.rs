use crate::error::{Error, Result};
use crate::integrator::Trajectory;
use crate::problem::Problem;

/// Which scalar to follow along a trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ComponentSelector {
    /// `x_i`; its derivative is the sampled velocity `v_i`.
    Primal(usize),
    /// `λ_i`; its derivative is taken from sample differences.
    Dual(usize),
    /// `f(x)`; derivative from sample differences.
    Objective,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Oscillation {
    /// Sign changes of the sampled derivative; exact zeros are skipped.
    pub sign_changes: usize,
    /// `Σ |c(t_{k+1}) − c(t_k)|`.
    pub total_variation: f64,
}

fn count_sign_changes(derivs: impl IntoIterator<Item = f64>) -> usize {
    let mut last = 0.0f64;
    let mut changes = 0;
    for d in derivs {
        if d == 0.0 || !d.is_finite() {
            continue;
        }
        if last != 0.0 && (d > 0.0) != (last > 0.0) {
            changes += 1;
        }
        last = d;
    }
    changes
}

/// Oscillation of a sampled series. Without explicit derivatives the forward
/// differences are used.
pub fn series_oscillation(values: &[f64], derivs: Option<&[f64]>) -> Oscillation {
    let diffs = values.windows(2).map(|w| w[1] - w[0]);
    let total_variation = diffs.clone().map(f64::abs).sum();
    let sign_changes = match derivs {
        Some(d) => count_sign_changes(d.iter().copied()),
        None => count_sign_changes(diffs),
    };
    Oscillation {
        sign_changes,
        total_variation,
    }
}

pub fn oscillation_measure(
    prob: &Problem,
    traj: &Trajectory,
    selector: ComponentSelector,
) -> Result<Oscillation> {
    if traj.len() < 2 {
        return Err(Error::InvalidParameter(
            "oscillation needs at least two samples".into(),
        ));
    }
    let out_of_range = |i: usize, len: usize| {
        Err(Error::InvalidParameter(format!(
            "component {i} out of range for dimension {len}"
        )))
    };
    Ok(match selector {
        ComponentSelector::Primal(i) => {
            if i >= prob.dim_x() {
                return out_of_range(i, prob.dim_x());
            }
            let vals: Vec<f64> = traj.samples.iter().map(|s| s.x[i]).collect();
            let ders: Vec<f64> = traj.samples.iter().map(|s| s.v[i]).collect();
            series_oscillation(&vals, Some(&ders))
        }
        ComponentSelector::Dual(i) => {
            if i >= prob.dim_y() {
                return out_of_range(i, prob.dim_y());
            }
            let vals: Vec<f64> = traj.samples.iter().map(|s| s.lambda[i]).collect();
            series_oscillation(&vals, None)
        }
        ComponentSelector::Objective => {
            let vals: Vec<f64> = traj
                .samples
                .iter()
                .map(|s| prob.objective().value(&s.x))
                .collect();
            series_oscillation(&vals, None)
        }
    })
}
