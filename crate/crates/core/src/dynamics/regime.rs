//! Which convergence-rate guarantee a configuration falls under, and the decay
//! exponents it predicts.
//!
//! Three hypothesis families exist. With `r = max{q, p − q − s}`:
//!
//! | family   | hypotheses                                                    |
//! |----------|---------------------------------------------------------------|
//! | base     | `0 < p < 1−q`, `4q+s+p−2 < 0`, `3q+s−p−1 < 0`                  |
//! | small-p  | `0 < p < (1−q)/2`, `5q+2s−1 < 0`, `4q+s+p−2 < 0`               |
//! | large-p  | `(1−q)/2 ≤ p < 1−q`, `(1−q)/2 ≤ 2q+s < 1−q`, `4q+s+p−2 < 0`    |
//!
//! Each family bounds `‖(x − x_t, λ − λ_t)‖² = O(m(t) t^E)` and the gap, objective
//! residual and feasibility by `O(√m(t) t^{E/2} + t^{−p})`, with `E` per case:
//!
//! | regime                 | case                     | E                 |
//! |------------------------|--------------------------|-------------------|
//! | `BaseLargeP`           | `(1−q)/2 ≤ p`            | `3q+s+p−2+r`      |
//! | `BaseSmallP`           | `p < (1−q)/2`            | `2q+s−p−1+r`      |
//! | `SmallPViscous`        | `p < 2q+s`               | `3q+s−p−1`        |
//! | `SmallPTikhonov`       | `2q+s ≤ p`               | `q−1`             |
//! | `LargePViscous`        | `(1−q)/2 < p < 2q+s`     | `4q+s+p−2`        |
//! | `LargePTikhonov`       | `2q+s ≤ p`               | `2q+2p−2`         |
//!
//! The small-p and large-p families specialise the base one, so they are
//! preferred in the order large-p, small-p, base. For power-law mass
//! `m = κt^{−σ}` the predicted log-log slopes are `max{E/2 − σ/2, −p}` for the
//! first-order metrics and `E − σ` for the squared distance.

use std::fmt;

use super::{MassFunction, ParameterSet};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Regime {
    BaseLargeP,
    BaseSmallP,
    SmallPViscous,
    SmallPTikhonov,
    LargePViscous,
    LargePTikhonov,
    OutsideGuarantees,
}

impl Regime {
    pub fn label(&self) -> &'static str {
        match self {
            Self::BaseLargeP => "base/large-p",
            Self::BaseSmallP => "base/small-p",
            Self::SmallPViscous => "small-p/viscous",
            Self::SmallPTikhonov => "small-p/tikhonov",
            Self::LargePViscous => "large-p/viscous",
            Self::LargePTikhonov => "large-p/tikhonov",
            Self::OutsideGuarantees => "outside-guarantees",
        }
    }

    /// Exponent `E` of the squared-distance envelope `m(t) t^E`.
    fn envelope_exponent(&self, q: f64, s: f64, p: f64, r: f64) -> Option<f64> {
        Some(match self {
            Self::BaseLargeP => 3.0 * q + s + p - 2.0 + r,
            Self::BaseSmallP => 2.0 * q + s - p - 1.0 + r,
            Self::SmallPViscous => 3.0 * q + s - p - 1.0,
            Self::SmallPTikhonov => q - 1.0,
            Self::LargePViscous => 4.0 * q + s + p - 2.0,
            Self::LargePTikhonov => 2.0 * q + 2.0 * p - 2.0,
            Self::OutsideGuarantees => return None,
        })
    }
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Predicted log-log decay slopes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PredictedExponents {
    /// Lagrangian gap and objective residual.
    pub gap_exp: f64,
    /// `‖Ax − b‖`.
    pub feas_exp: f64,
    /// `‖(x − x_t, λ − λ_t)‖²`; also the envelope of the Lyapunov energy.
    pub dist_exp: f64,
}

/// One hypothesis, with whether it holds.
#[derive(Debug, Clone, PartialEq)]
pub struct Condition {
    pub family: &'static str,
    pub expr: &'static str,
    pub value: f64,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegimeReport {
    pub regime: Regime,
    /// Every family case whose hypotheses hold, most specific first.
    pub applicable: Vec<Regime>,
    pub r: f64,
    pub predicted: Option<PredictedExponents>,
    pub violated_conditions: Vec<Condition>,
    /// Mass-assumption failures and degenerate-mode notes.
    pub warnings: Vec<String>,
}

fn cond(family: &'static str, expr: &'static str, value: f64, holds: bool) -> Condition {
    Condition {
        family,
        expr,
        value,
        holds,
    }
}

/// Evaluates every family's hypotheses and the mass assumptions. Never fails:
/// configurations outside every family, or with a mass that breaks the
/// assumptions, are reported as [`Regime::OutsideGuarantees`].
pub fn validate_and_classify(params: &ParameterSet, mass: &MassFunction) -> RegimeReport {
    let (q, s, p) = (params.q(), params.s(), params.p());
    let r = params.r();
    let half = (1.0 - q) / 2.0;

    let base = [
        cond("base", "0<p<1-q", p - (1.0 - q), p > 0.0 && p < 1.0 - q),
        cond("base", "4q+s+p-2<0", 4.0 * q + s + p - 2.0, 4.0 * q + s + p - 2.0 < 0.0),
        cond("base", "3q+s-p-1<0", 3.0 * q + s - p - 1.0, 3.0 * q + s - p - 1.0 < 0.0),
    ];
    let small = [
        cond("small-p", "0<p<(1-q)/2", p - half, p > 0.0 && p < half),
        cond("small-p", "5q+2s-1<0", 5.0 * q + 2.0 * s - 1.0, 5.0 * q + 2.0 * s - 1.0 < 0.0),
        cond("small-p", "4q+s+p-2<0", 4.0 * q + s + p - 2.0, 4.0 * q + s + p - 2.0 < 0.0),
    ];
    let large = [
        cond("large-p", "(1-q)/2<=p<1-q", p - half, half <= p && p < 1.0 - q),
        cond(
            "large-p",
            "(1-q)/2<=2q+s<1-q",
            2.0 * q + s - half,
            half <= 2.0 * q + s && 2.0 * q + s < 1.0 - q,
        ),
        cond("large-p", "4q+s+p-2<0", 4.0 * q + s + p - 2.0, 4.0 * q + s + p - 2.0 < 0.0),
    ];
    let all_hold = |cs: &[Condition]| cs.iter().all(|c| c.holds);

    let mut applicable = Vec::new();
    if all_hold(&large) {
        if half < p && p < 2.0 * q + s {
            applicable.push(Regime::LargePViscous);
        } else if 2.0 * q + s <= p {
            applicable.push(Regime::LargePTikhonov);
        }
    }
    if all_hold(&small) {
        applicable.push(if p < 2.0 * q + s {
            Regime::SmallPViscous
        } else {
            Regime::SmallPTikhonov
        });
    }
    if all_hold(&base) {
        applicable.push(if p >= half {
            Regime::BaseLargeP
        } else {
            Regime::BaseSmallP
        });
    }

    let violated_conditions: Vec<Condition> = base
        .iter()
        .chain(small.iter())
        .chain(large.iter())
        .filter(|c| !c.holds)
        .cloned()
        .collect();

    let assumptions = mass.assumption_report(params);
    let mut warnings = assumptions.violations.clone();
    if !assumptions.satisfies_regularity {
        warnings.push("mass regularity condition fails".into());
    }
    if params.gamma() == 0.0 {
        warnings.push("gamma = 0: Hessian-driven damping is off (degenerate mode)".into());
    }

    let assumptions_ok = assumptions.satisfies_bounds && assumptions.satisfies_regularity;
    let regime = match applicable.first() {
        Some(&reg) if assumptions_ok => reg,
        _ => Regime::OutsideGuarantees,
    };
    let sigma = mass.sigma();
    let predicted = regime.envelope_exponent(q, s, p, r).map(|e| {
        let first_order = (0.5 * e - 0.5 * sigma).max(-p);
        PredictedExponents {
            gap_exp: first_order,
            feas_exp: first_order,
            dist_exp: e - sigma,
        }
    });

    RegimeReport {
        regime,
        applicable,
        r,
        predicted,
        violated_conditions,
        warnings,
    }
}
