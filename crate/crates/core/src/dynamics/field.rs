use nalgebra::DVector;

use super::{MassFunction, ParameterSet, TrajectoryState};
use crate::error::{Error, Result};
use crate::integrator::OdeSystem;
use crate::problem::Problem;

/// `t^{q+s} − γq t^{q−1}`, the time factor of the dual gain.
pub fn theta_denominator(params: &ParameterSet, t: f64) -> f64 {
    let (q, s, gamma) = (params.q(), params.s(), params.gamma());
    t.powf(q + s) - gamma * q * t.powf(q - 1.0)
}

/// Dual gain `(α − 1)(t^{q+s} − γq t^{q−1})`.
pub fn dual_gain(params: &ParameterSet, t: f64) -> f64 {
    (params.alpha() - 1.0) * theta_denominator(params, t)
}

/// Extrapolation coefficient
///
/// ```text
/// θ(t) = (m t^{2q+s} + γ t^q − 2mγq t^{2q−1} − γṁ t^{2q}) / ((α−1)(t^{q+s} − γq t^{q−1}))
/// ```
pub fn theta(params: &ParameterSet, mass: &MassFunction, t: f64) -> Result<f64> {
    if !(t > 0.0) {
        return Err(Error::Domain(format!("theta needs t > 0, got t = {t}")));
    }
    let denom = dual_gain(params, t);
    if !(denom > 0.0) {
        return Err(Error::Domain(format!(
            "extrapolation denominator vanishes or is negative at t = {t} (value {denom})"
        )));
    }
    let (q, s, gamma) = (params.q(), params.s(), params.gamma());
    let mv = mass.eval(t);
    let numer = mv.m * t.powf(2.0 * q + s) + gamma * t.powf(q)
        - 2.0 * mv.m * gamma * q * t.powf(2.0 * q - 1.0)
        - gamma * mv.mdot * t.powf(2.0 * q);
    Ok(numer / denom)
}

/// Time derivatives of `(x, v, λ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldValue {
    pub xdot: DVector<f64>,
    pub vdot: DVector<f64>,
    pub lambdadot: DVector<f64>,
}

/// Total derivative `d/dt ∇_x L_t(x(t), λ(t))` along the flow:
/// `∇²f(x)v + Aᵀλ̇ + (c/tᵖ)v − c p t^{−p−1} x`.
pub fn grad_x_lt_rate(
    prob: &Problem,
    params: &ParameterSet,
    state: &TrajectoryState,
    lambdadot: &DVector<f64>,
) -> DVector<f64> {
    let reg = params.reg();
    let t = state.t;
    let mut d = prob.objective().hvp(&state.x, &state.v);
    d.gemv_tr(1.0, prob.a(), lambdadot, 1.0);
    d.axpy(reg.weight(t), &state.v, 1.0);
    d.axpy(reg.weight_rate(t), &state.x, 1.0);
    d
}

/// First-order form of the flow.
///
/// ```text
/// ẋ = v
/// λ̇ = (α−1)(t^{q+s} − γq t^{q−1}) · [A(x + θ(t)v) − b − (c/tᵖ)λ]
/// v̇ = −(1/m(t)) · [ (α/t^q) v + γ d/dt ∇_x L_t + t^s ∇_x L_t(x, λ) ]
/// ```
///
/// `λ̇` is substituted into the Hessian-damping term in closed form, so no
/// implicit solve is needed.
pub fn vector_field(
    prob: &Problem,
    params: &ParameterSet,
    mass: &MassFunction,
    state: &TrajectoryState,
) -> Result<FieldValue> {
    prob.check_primal(&state.x)?;
    prob.check_primal(&state.v)?;
    prob.check_dual(&state.lambda)?;
    let t = state.t;
    let th = theta(params, mass, t)?;
    let reg = params.reg();
    let eps = reg.weight(t);
    let (q, s, gamma) = (params.q(), params.s(), params.gamma());

    let lookahead = &state.x + &state.v * th;
    let mut lambdadot = prob.constraint_residual(&lookahead);
    lambdadot.axpy(-eps, &state.lambda, 1.0);
    lambdadot *= dual_gain(params, t);

    let mut grad = prob.objective().gradient(&state.x);
    grad.gemv_tr(1.0, prob.a(), &state.lambda, 1.0);
    grad.axpy(eps, &state.x, 1.0);

    let mut force = &state.v * (params.alpha() * t.powf(-q));
    force.axpy(t.powf(s), &grad, 1.0);
    if gamma != 0.0 {
        let rate = grad_x_lt_rate(prob, params, state, &lambdadot);
        force.axpy(gamma, &rate, 1.0);
    }
    let vdot = force * (-1.0 / mass.eval(t).m);

    let out = FieldValue {
        xdot: state.v.clone(),
        vdot,
        lambdadot,
    };
    if out.vdot.iter().chain(out.lambdadot.iter()).all(|v| v.is_finite()) {
        Ok(out)
    } else {
        Err(Error::Domain(format!("non-finite vector field at t = {t}")))
    }
}

/// The flow bound to one problem, parameter set and mass function.
#[derive(Debug, Clone, Copy)]
pub struct PrimalDualField<'a> {
    pub problem: &'a Problem,
    pub params: &'a ParameterSet,
    pub mass: &'a MassFunction,
}

impl<'a> PrimalDualField<'a> {
    pub fn new(problem: &'a Problem, params: &'a ParameterSet, mass: &'a MassFunction) -> Self {
        Self {
            problem,
            params,
            mass,
        }
    }

    pub fn eval(&self, state: &TrajectoryState) -> Result<FieldValue> {
        vector_field(self.problem, self.params, self.mass, state)
    }
}

impl OdeSystem for PrimalDualField<'_> {
    fn rhs(&self, t: f64, y: &DVector<f64>) -> Result<DVector<f64>> {
        let n = self.problem.dim_x();
        let state = TrajectoryState::from_flat(t, y, n);
        let f = self.eval(&state)?;
        let m = f.lambdadot.len();
        let mut dy = DVector::zeros(2 * n + m);
        dy.rows_mut(0, n).copy_from(&f.xdot);
        dy.rows_mut(n, n).copy_from(&f.vdot);
        dy.rows_mut(2 * n, m).copy_from(&f.lambdadot);
        Ok(dy)
    }
}
