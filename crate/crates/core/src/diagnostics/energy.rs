use nalgebra::DVector;

use crate::dynamics::{MassFunction, ParameterSet, TrajectoryState};
use crate::error::{Error, Result};
use crate::lagrangian::{grad_x_lt, SaddlePoint};
use crate::problem::Problem;

#[derive(Debug, Clone, PartialEq)]
pub struct EnergyReport {
    pub t: f64,
    pub a_t: f64,
    pub b_t: f64,
    /// `ϑ = (α−1)(x − x_t) + t^q (m v + γ ∇_x L_t(x, λ))`.
    pub theta_term: DVector<f64>,
    pub energy: f64,
}

/// `(a(t), b(t))` with
/// `a = m t^{q+s} − 2γqm t^{q−1} − γṁ t^q + γ` and
/// `b = −(α−1)(q m t^{q−1} + ṁ t^q − 1)`.
pub fn energy_coefficients(params: &ParameterSet, mass: &MassFunction, t: f64) -> (f64, f64) {
    let (alpha, q, s, gamma) = (params.alpha(), params.q(), params.s(), params.gamma());
    let mv = mass.eval(t);
    let a = mv.m * t.powf(q + s) - 2.0 * gamma * q * mv.m * t.powf(q - 1.0)
        - gamma * mv.mdot * t.powf(q)
        + gamma;
    let b = -(alpha - 1.0) * (q * mv.m * t.powf(q - 1.0) + mv.mdot * t.powf(q) - 1.0);
    (a, b)
}

/// `L_t(x, λ_t) − L_t(x_t, λ_t)` for `x = x_t + d`, written as
/// `D_f(x, x_t) + ⟨∇_x L_t(x_t, λ_t), d⟩ + (c/2tᵖ)‖d‖²` so that it does not
/// lose precision to cancellation once `x` is close to the saddle path.
fn saddle_gap(prob: &Problem, params: &ParameterSet, d: &DVector<f64>, saddle: &SaddlePoint) -> Result<f64> {
    let reg = params.reg();
    let t = saddle.t;
    let obj = prob.objective();
    let x_t = &saddle.x_t;
    let bregman = if obj.quadratic_form().is_some() {
        0.5 * d.dot(&obj.hvp(x_t, d))
    } else {
        obj.value(&(x_t + d)) - obj.value(x_t) - obj.gradient(x_t).dot(d)
    };
    let residual = grad_x_lt(prob, reg, t, x_t, &saddle.lambda_t)?;
    Ok(bregman + residual.dot(d) + 0.5 * reg.weight(t) * d.norm_squared())
}

/// Lyapunov energy
///
/// ```text
/// E = a t^q (L_t(x, λ_t) − L_t(x_t, λ_t)) + ½‖ϑ‖² + ½ b ‖x − x_t‖² + ½‖λ − λ_t‖²
/// ```
pub fn energy(
    prob: &Problem,
    params: &ParameterSet,
    mass: &MassFunction,
    state: &TrajectoryState,
    saddle: &SaddlePoint,
) -> Result<EnergyReport> {
    let t = state.t;
    if t != saddle.t {
        return Err(Error::InvalidParameter(format!(
            "state time {t} does not match saddle time {}",
            saddle.t
        )));
    }
    let reg = params.reg();
    let (alpha, q, gamma) = (params.alpha(), params.q(), params.gamma());
    let (a_t, b_t) = energy_coefficients(params, mass, t);
    let m = mass.eval(t).m;
    let tq = t.powf(q);

    let dx = &state.x - &saddle.x_t;
    let gap = saddle_gap(prob, params, &dx, saddle)?;
    let dl = &state.lambda - &saddle.lambda_t;
    let g = grad_x_lt(prob, reg, t, &state.x, &state.lambda)?;

    let mut theta_term = &dx * (alpha - 1.0);
    theta_term.axpy(tq * m, &state.v, 1.0);
    theta_term.axpy(tq * gamma, &g, 1.0);

    let energy = a_t * tq * gap
        + 0.5 * theta_term.norm_squared()
        + 0.5 * b_t * dx.norm_squared()
        + 0.5 * dl.norm_squared();
    Ok(EnergyReport {
        t,
        a_t,
        b_t,
        theta_term,
        energy,
    })
}
