use std::fmt;

use crate::error::{Error, Result};

use super::metrics::{Metric, MetricRow};

/// Tolerance on the fitted slope before a bound counts as violated.
pub const DEFAULT_SLACK: f64 = 0.1;
/// Values below this are treated as converged to rounding and left out of fits.
pub const VALUE_FLOOR: f64 = 1e-14;
const MIN_SAMPLES: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    WithinBound,
    FasterThanBound,
    ViolatesBound,
}

impl Verdict {
    pub fn label(&self) -> &'static str {
        match self {
            Verdict::WithinBound => "within_bound",
            Verdict::FasterThanBound => "faster_than_bound",
            Verdict::ViolatesBound => "violates_bound",
        }
    }

    pub fn is_ok(&self) -> bool {
        !matches!(self, Verdict::ViolatesBound)
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Least-squares slope of `log metric` against `log t`.
#[derive(Debug, Clone, PartialEq)]
pub struct RateEstimate {
    pub metric: Metric,
    pub window: (f64, f64),
    pub fitted_slope: f64,
    pub predicted_slope: Option<f64>,
    pub r2: f64,
    pub samples_used: usize,
    /// Rows in the window dropped for falling below [`VALUE_FLOOR`].
    pub floored: usize,
    /// `None` when there is no prediction to compare against.
    pub verdict: Option<Verdict>,
}

fn classify(fitted: f64, predicted: f64, slack: f64) -> Verdict {
    if fitted > predicted + slack {
        Verdict::ViolatesBound
    } else if fitted < predicted - slack {
        Verdict::FasterThanBound
    } else {
        Verdict::WithinBound
    }
}

/// Fits a power law to `metric` over rows with `window.0 ≤ t ≤ window.1`.
pub fn fit_rate(
    rows: &[MetricRow],
    metric: Metric,
    window: (f64, f64),
    predicted: Option<f64>,
    slack: f64,
) -> Result<RateEstimate> {
    let mut floored = 0;
    let mut pts = Vec::new();
    for row in rows.iter().filter(|r| r.t >= window.0 && r.t <= window.1) {
        let v = metric.value(row);
        if v.is_finite() && v >= VALUE_FLOOR {
            pts.push((row.t.ln(), v.ln()));
        } else {
            floored += 1;
        }
    }
    if pts.len() < MIN_SAMPLES {
        return Err(Error::Estimation(format!(
            "{} needs at least {MIN_SAMPLES} usable samples in [{}, {}], found {} ({floored} floored)",
            metric.name(),
            window.0,
            window.1,
            pts.len()
        )));
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if !(sxx > 0.0) {
        return Err(Error::Estimation(format!(
            "{}: window contains a single distinct time",
            metric.name()
        )));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = pts.iter().map(|p| (p.1 - intercept - slope * p.0).powi(2)).sum();
    let ss_tot: f64 = pts.iter().map(|p| (p.1 - my).powi(2)).sum();
    let r2 = if ss_tot > 0.0 { 1.0 - ss_res / ss_tot } else { 1.0 };
    Ok(RateEstimate {
        metric,
        window,
        fitted_slope: slope,
        predicted_slope: predicted,
        r2,
        samples_used: pts.len(),
        floored,
        verdict: predicted.map(|p| classify(slope, p, slack)),
    })
}
