use crate::dynamics::{theta, MassFunction, ParameterSet};
use crate::error::{Error, Result};
use crate::integrator::Trajectory;
use crate::lagrangian::{lagrangian, MinNormSolution, SaddlePoint};
use crate::problem::Problem;

use super::energy::energy;

/// Columns of a [`MetricRow`] that can be rate-fitted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Metric {
    ObjResidual,
    Feasibility,
    LagrangianGap,
    DistSaddleSq,
    DistMinNorm,
    Energy,
}

impl Metric {
    pub const ALL: [Metric; 6] = [
        Metric::ObjResidual,
        Metric::Feasibility,
        Metric::LagrangianGap,
        Metric::DistSaddleSq,
        Metric::DistMinNorm,
        Metric::Energy,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Metric::ObjResidual => "obj_residual",
            Metric::Feasibility => "feasibility",
            Metric::LagrangianGap => "lagrangian_gap",
            Metric::DistSaddleSq => "dist_saddle_sq",
            Metric::DistMinNorm => "dist_minnorm",
            Metric::Energy => "energy",
        }
    }

    pub fn from_name(name: &str) -> Option<Metric> {
        Metric::ALL.into_iter().find(|m| m.name() == name)
    }

    pub fn value(&self, row: &MetricRow) -> f64 {
        match self {
            Metric::ObjResidual => row.obj_residual,
            Metric::Feasibility => row.feasibility,
            Metric::LagrangianGap => row.lagrangian_gap,
            Metric::DistSaddleSq => row.dist_saddle_sq,
            Metric::DistMinNorm => row.dist_minnorm,
            Metric::Energy => row.energy,
        }
    }

    /// Predicted slope for this metric, if the regime bounds it.
    pub fn predicted_slope(&self, exps: &crate::dynamics::PredictedExponents) -> Option<f64> {
        match self {
            Metric::ObjResidual | Metric::LagrangianGap => Some(exps.gap_exp),
            Metric::Feasibility => Some(exps.feas_exp),
            Metric::DistSaddleSq | Metric::Energy => Some(exps.dist_exp),
            Metric::DistMinNorm => None,
        }
    }
}

/// Everything recorded at one sample time.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricRow {
    pub t: f64,
    /// `|f(x) − f(x*)|`.
    pub obj_residual: f64,
    /// `‖Ax − b‖`.
    pub feasibility: f64,
    /// `L(x, λ*) − L(x*, λ*)`, unregularized.
    pub lagrangian_gap: f64,
    /// `‖(x − x_t, λ − λ_t)‖²`.
    pub dist_saddle_sq: f64,
    /// `‖(x, λ) − (x*, λ*)‖`.
    pub dist_minnorm: f64,
    pub energy: f64,
    pub a_t: f64,
    pub b_t: f64,
    pub theta: f64,
    /// Accepted integrator step that produced the sample.
    pub step_size: f64,
}

pub const CSV_HEADER: &str =
    "t,obj_residual,feasibility,lagrangian_gap,dist_saddle_sq,dist_minnorm,energy,a_t,b_t,theta,step_size";

impl MetricRow {
    pub fn fields(&self) -> [f64; 11] {
        [
            self.t,
            self.obj_residual,
            self.feasibility,
            self.lagrangian_gap,
            self.dist_saddle_sq,
            self.dist_minnorm,
            self.energy,
            self.a_t,
            self.b_t,
            self.theta,
            self.step_size,
        ]
    }
}

/// One row per trajectory sample. `saddle_path[i]` must be the saddle point at
/// the time of sample `i`.
pub fn metrics(
    prob: &Problem,
    params: &ParameterSet,
    mass: &MassFunction,
    traj: &Trajectory,
    saddle_path: &[SaddlePoint],
    min_norm: &MinNormSolution,
) -> Result<Vec<MetricRow>> {
    if saddle_path.len() != traj.len() {
        return Err(Error::Dimension {
            what: "saddle path length",
            expected: traj.len(),
            got: saddle_path.len(),
        });
    }
    let f_star = prob.objective().value(&min_norm.x_star);
    let l_star = lagrangian(prob, &min_norm.x_star, &min_norm.lambda_star)?;
    traj.samples
        .iter()
        .zip(saddle_path)
        .zip(&traj.step_sizes)
        .map(|((state, sp), &h)| {
            let rep = energy(prob, params, mass, state, sp)?;
            let dx = (&state.x - &sp.x_t).norm_squared();
            let dl = (&state.lambda - &sp.lambda_t).norm_squared();
            let ex = (&state.x - &min_norm.x_star).norm_squared();
            let el = (&state.lambda - &min_norm.lambda_star).norm_squared();
            Ok(MetricRow {
                t: state.t,
                obj_residual: (prob.objective().value(&state.x) - f_star).abs(),
                feasibility: prob.constraint_residual(&state.x).norm(),
                lagrangian_gap: lagrangian(prob, &state.x, &min_norm.lambda_star)? - l_star,
                dist_saddle_sq: dx + dl,
                dist_minnorm: (ex + el).sqrt(),
                energy: rep.energy,
                a_t: rep.a_t,
                b_t: rep.b_t,
                theta: theta(params, mass, state.t)?,
                step_size: h,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::TrajectoryState;
    use crate::lagrangian::{min_norm_solution, saddle_path, RegularizationSpec};
    use nalgebra::DVector;

    fn setup() -> (Problem, ParameterSet, MassFunction) {
        let prob = Problem::toy(1.0, 2.0, 1.0).unwrap();
        let reg = RegularizationSpec::new(5.0, 0.1).unwrap();
        let params = ParameterSet::new(3.0, 0.1, 0.1, 1.0, reg, 1.0).unwrap();
        (prob, params, MassFunction::power_law(1.0, 0.15).unwrap())
    }

    fn single(state: TrajectoryState) -> Trajectory {
        Trajectory {
            samples: vec![state],
            step_sizes: vec![0.01],
            ..Default::default()
        }
    }

    #[test]
    fn toy_initial_point() {
        let (prob, params, mass) = setup();
        let x = DVector::from_vec(vec![1.0, 1.0, -1.0]);
        let traj = single(TrajectoryState::new(1.0, x, DVector::zeros(3), DVector::from_element(1, 1.0)).unwrap());
        let sp = saddle_path(&prob, params.reg(), &[1.0]).unwrap();
        let mn = min_norm_solution(&prob).unwrap();
        let rows = metrics(&prob, &params, &mass, &traj, &sp, &mn).unwrap();
        assert!((rows[0].feasibility - 2.0).abs() < 1e-14);
        assert!((rows[0].obj_residual - 4.0).abs() < 1e-14);
        assert_eq!(rows[0].step_size, 0.01);
    }

    #[test]
    fn zero_at_the_solution() {
        let (prob, params, mass) = setup();
        let mn = min_norm_solution(&prob).unwrap();
        let traj = single(
            TrajectoryState::new(1.0, mn.x_star.clone(), DVector::zeros(3), mn.lambda_star.clone()).unwrap(),
        );
        let sp = saddle_path(&prob, params.reg(), &[1.0]).unwrap();
        let r = &metrics(&prob, &params, &mass, &traj, &sp, &mn).unwrap()[0];
        assert_eq!(r.obj_residual, 0.0);
        assert_eq!(r.feasibility, 0.0);
        assert_eq!(r.lagrangian_gap, 0.0);
        assert_eq!(r.dist_minnorm, 0.0);
    }

    #[test]
    fn saddle_length_mismatch() {
        let (prob, params, mass) = setup();
        let mn = min_norm_solution(&prob).unwrap();
        let traj = single(TrajectoryState::new(1.0, DVector::zeros(3), DVector::zeros(3), DVector::zeros(1)).unwrap());
        assert!(metrics(&prob, &params, &mass, &traj, &[], &mn).is_err());
    }

    #[test]
    fn metric_names_round_trip() {
        for m in Metric::ALL {
            assert_eq!(Metric::from_name(m.name()), Some(m));
            assert!(CSV_HEADER.split(',').any(|c| c == m.name()));
        }
        assert_eq!(Metric::from_name("nope"), None);
    }
}
