use crate::error::{Error, Result};

use super::ParameterSet;

/// Variable mass `m(t)`, positive and non-increasing.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MassFunction {
    /// `m(t) = κ t^{−σ}`.
    PowerLaw { kappa: f64, sigma: f64 },
    /// `m(t) = κ`.
    Constant { kappa: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MassValue {
    pub m: f64,
    pub mdot: f64,
    pub mddot: f64,
}

/// Whether the mass satisfies the two growth conditions the rate results rely on:
///
/// - bounds: `γ / t^{q+s} ≤ m(t) ≤ k1 / t^q` for large `t`;
/// - regularity: `t|ṁ(t)| ≤ k2 m(t)` and `t²|m̈(t)| ≤ k2 m(t)` for large `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct AssumptionReport {
    pub satisfies_bounds: bool,
    pub k1: Option<f64>,
    pub satisfies_regularity: bool,
    /// Smallest admissible constant. Zero means every positive constant works.
    pub k2: f64,
    pub violations: Vec<String>,
}

impl MassFunction {
    pub fn power_law(kappa: f64, sigma: f64) -> Result<Self> {
        if !(kappa.is_finite() && kappa > 0.0) {
            return Err(Error::InvalidParameter(format!("mass scale must be > 0, got {kappa}")));
        }
        if !(sigma.is_finite() && sigma >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "mass decay exponent must be >= 0, got {sigma}"
            )));
        }
        Ok(Self::PowerLaw { kappa, sigma })
    }

    pub fn constant(kappa: f64) -> Result<Self> {
        if !(kappa.is_finite() && kappa > 0.0) {
            return Err(Error::InvalidParameter(format!("mass must be > 0, got {kappa}")));
        }
        Ok(Self::Constant { kappa })
    }

    pub fn kappa(&self) -> f64 {
        match *self {
            Self::PowerLaw { kappa, .. } | Self::Constant { kappa } => kappa,
        }
    }

    /// Decay exponent σ, zero for constant mass.
    pub fn sigma(&self) -> f64 {
        match *self {
            Self::PowerLaw { sigma, .. } => sigma,
            Self::Constant { .. } => 0.0,
        }
    }

    pub fn eval(&self, t: f64) -> MassValue {
        match *self {
            Self::Constant { kappa } => MassValue {
                m: kappa,
                mdot: 0.0,
                mddot: 0.0,
            },
            Self::PowerLaw { kappa, sigma } => {
                let m = kappa * t.powf(-sigma);
                MassValue {
                    m,
                    mdot: -sigma * m / t,
                    mddot: sigma * (sigma + 1.0) * m / (t * t),
                }
            }
        }
    }

    pub fn assumption_report(&self, params: &ParameterSet) -> AssumptionReport {
        let (q, s, gamma) = (params.q(), params.s(), params.gamma());
        let kappa = self.kappa();
        let sigma = self.sigma();
        let mut violations = Vec::new();

        let upper = sigma >= q;
        if !upper {
            violations.push(format!(
                "mass upper bound m(t) <= k1/t^q fails: decay exponent {sigma} < q = {q}"
            ));
        }
        let lower = gamma == 0.0 || sigma < q + s || (sigma == q + s && gamma <= kappa);
        if !lower {
            violations.push(format!(
                "mass lower bound gamma/t^(q+s) <= m(t) fails: decay exponent {sigma} vs q+s = {}",
                q + s
            ));
        }

        // t|ṁ| = σ m and t²|m̈| = σ(σ+1) m exactly.
        let k2 = sigma.max(sigma * (sigma + 1.0));
        AssumptionReport {
            satisfies_bounds: upper && lower,
            k1: upper.then_some(kappa),
            satisfies_regularity: true,
            k2,
            violations,
        }
    }
}
