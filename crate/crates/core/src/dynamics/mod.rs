//! The primal-dual flow: parameters, mass functions, vector field and regime
//! classification.

mod field;
mod mass;
mod regime;

use nalgebra::DVector;

pub use field::{
    dual_gain, grad_x_lt_rate, theta, theta_denominator, vector_field, FieldValue,
    PrimalDualField,
};
pub use mass::{AssumptionReport, MassFunction, MassValue};
pub use regime::{validate_and_classify, Condition, PredictedExponents, Regime, RegimeReport};

use crate::error::{Error, Result};
use crate::lagrangian::RegularizationSpec;

/// Scalars governing the flow.
///
/// `α > 1`, `0 < q < 1`, `s > 0`, `γ ≥ 0`, plus the Tikhonov pair `(c, p)` and
/// the start time `t0 > 0`. `γ = 0` switches Hessian-driven damping off.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParameterSet {
    alpha: f64,
    q: f64,
    s: f64,
    gamma: f64,
    reg: RegularizationSpec,
    t0: f64,
}

impl ParameterSet {
    pub fn new(alpha: f64, q: f64, s: f64, gamma: f64, reg: RegularizationSpec, t0: f64) -> Result<Self> {
        if !(alpha.is_finite() && alpha > 1.0) {
            return Err(Error::InvalidParameter(format!("alpha must be > 1, got {alpha}")));
        }
        if !(q > 0.0 && q < 1.0) {
            return Err(Error::InvalidParameter(format!("q must lie in (0, 1), got {q}")));
        }
        if !(s.is_finite() && s > 0.0) {
            return Err(Error::InvalidParameter(format!("s must be > 0, got {s}")));
        }
        if !(gamma.is_finite() && gamma >= 0.0) {
            return Err(Error::InvalidParameter(format!("gamma must be >= 0, got {gamma}")));
        }
        if !(t0.is_finite() && t0 > 0.0) {
            return Err(Error::InvalidParameter(format!("t0 must be > 0, got {t0}")));
        }
        Ok(Self { alpha, q, s, gamma, reg, t0 })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn s(&self) -> f64 {
        self.s
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn reg(&self) -> &RegularizationSpec {
        &self.reg
    }

    pub fn c(&self) -> f64 {
        self.reg.c()
    }

    pub fn p(&self) -> f64 {
        self.reg.p()
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }

    pub fn with_s(self, s: f64) -> Result<Self> {
        Self::new(self.alpha, self.q, s, self.gamma, self.reg, self.t0)
    }

    pub fn with_gamma(self, gamma: f64) -> Result<Self> {
        Self::new(self.alpha, self.q, self.s, gamma, self.reg, self.t0)
    }

    /// `r = max{q, p − q − s}`.
    pub fn r(&self) -> f64 {
        self.q.max(self.p() - self.q - self.s)
    }

    /// Fails unless the extrapolation denominator `t^{q+s} − γq t^{q−1}` is
    /// positive on `[t0, horizon]`. It is increasing in `t`, so checking `t0`
    /// suffices.
    pub fn check_window(&self, horizon: f64) -> Result<()> {
        if !(horizon > self.t0) {
            return Err(Error::InvalidParameter(format!(
                "horizon {horizon} must exceed t0 = {}",
                self.t0
            )));
        }
        let d = theta_denominator(self, self.t0);
        if d > 0.0 {
            Ok(())
        } else {
            Err(Error::Domain(format!(
                "extrapolation denominator (α−1)(t^(q+s) − γq t^(q−1)) = {d} is not positive at t = {}",
                self.t0
            )))
        }
    }
}

/// First-order state `(t, x, v = ẋ, λ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryState {
    pub t: f64,
    pub x: DVector<f64>,
    pub v: DVector<f64>,
    pub lambda: DVector<f64>,
}

impl TrajectoryState {
    pub fn new(t: f64, x: DVector<f64>, v: DVector<f64>, lambda: DVector<f64>) -> Result<Self> {
        if x.len() != v.len() {
            return Err(Error::Dimension {
                what: "velocity",
                expected: x.len(),
                got: v.len(),
            });
        }
        Ok(Self { t, x, v, lambda })
    }

    pub fn is_finite(&self) -> bool {
        self.t.is_finite()
            && self.x.iter().chain(self.v.iter()).chain(self.lambda.iter()).all(|v| v.is_finite())
    }

    /// Packs into `[x, v, λ]`.
    pub fn to_flat(&self) -> DVector<f64> {
        let n = self.x.len();
        let m = self.lambda.len();
        let mut y = DVector::zeros(2 * n + m);
        y.rows_mut(0, n).copy_from(&self.x);
        y.rows_mut(n, n).copy_from(&self.v);
        y.rows_mut(2 * n, m).copy_from(&self.lambda);
        y
    }

    pub fn from_flat(t: f64, y: &DVector<f64>, n: usize) -> Self {
        let m = y.len() - 2 * n;
        Self {
            t,
            x: y.rows(0, n).into_owned(),
            v: y.rows(n, n).into_owned(),
            lambda: y.rows(2 * n, m).into_owned(),
        }
    }
}
