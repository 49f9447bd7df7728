//! Independent re-evaluations of derived quantities.

use std::sync::Arc;

use pdflow::diagnostics::{energy, energy_coefficients, metrics, oscillation_measure, ComponentSelector};
use pdflow::dynamics::{grad_x_lt_rate, vector_field, MassFunction, ParameterSet, PrimalDualField, Regime, TrajectoryState};
use pdflow::experiment::{execute, preset, run, ExperimentConfig};
use pdflow::integrator::{integrate, integrate_on_grid, log_grid, IntegratorConfig};
use pdflow::lagrangian::{grad_x_lt, min_norm_solution, saddle_path, saddle_point, RegularizationSpec};
use pdflow::problem::{Problem, QuadraticObjective};
use pdflow::{DMatrix, DVector};

fn example52() -> (ExperimentConfig, Problem, ParameterSet, MassFunction) {
    let cfg = preset("example52").unwrap();
    let prob = cfg.build_problem().unwrap();
    let params = cfg.params.build().unwrap();
    let mass = cfg.mass.build().unwrap();
    (cfg, prob, params, mass)
}

#[test]
fn energy_at_start_matches_straight_line_evaluation() {
    let (_, prob, params, mass) = example52();
    let t = 1.0;
    let x = DVector::from_vec(vec![1.0, 1.0, -1.0]);
    let v = DVector::from_vec(vec![-1.0, -1.0, 1.0]);
    let l = DVector::from_vec(vec![1.0]);
    let sp = saddle_point(&prob, params.reg(), t).unwrap();
    let state = TrajectoryState::new(t, x.clone(), v.clone(), l.clone()).unwrap();
    let rep = energy(&prob, &params, &mass, &state, &sp).unwrap();

    // Written out for f = (x1 + 2x2 + x3)², A = (1, −2, 1), b = 0,
    // α = 3, q = 0.1, s = 0.1, γ = 1, c = 5, p = 0.1, m(t) = t^−0.15.
    let (alpha, q, s, gamma, c, p, sigma) = (3.0, 0.1, 0.1, 1.0, 5.0, 0.1, 0.15);
    let m = t.powf(-sigma);
    let mdot = -sigma * t.powf(-sigma - 1.0);
    let eps = c / t.powf(p);
    let (wf, wa) = ([1.0, 2.0, 1.0], [1.0, -2.0, 1.0]);
    let dot = |w: [f64; 3], z: &DVector<f64>| w[0] * z[0] + w[1] * z[1] + w[2] * z[2];
    let lt = |z: &DVector<f64>, mu: f64| {
        dot(wf, z).powi(2) + mu * dot(wa, z) + 0.5 * eps * (z.norm_squared() - mu * mu)
    };
    let (xt, lt_dual) = (&sp.x_t, sp.lambda_t[0]);
    let a = m * t.powf(q + s) - 2.0 * gamma * q * m * t.powf(q - 1.0) - gamma * mdot * t.powf(q) + gamma;
    let b = -(alpha - 1.0) * (q * m * t.powf(q - 1.0) + mdot * t.powf(q) - 1.0);
    let grad: Vec<f64> = (0..3).map(|i| 2.0 * dot(wf, &x) * wf[i] + l[0] * wa[i] + eps * x[i]).collect();
    let vartheta: Vec<f64> = (0..3)
        .map(|i| (alpha - 1.0) * (x[i] - xt[i]) + t.powf(q) * (m * v[i] + gamma * grad[i]))
        .collect();
    let dx2: f64 = (0..3).map(|i| (x[i] - xt[i]).powi(2)).sum();
    let e = a * t.powf(q) * (lt(&x, lt_dual) - lt(xt, lt_dual))
        + 0.5 * vartheta.iter().map(|z| z * z).sum::<f64>()
        + 0.5 * b * dx2
        + 0.5 * (l[0] - lt_dual).powi(2);

    assert!((rep.a_t - a).abs() <= 1e-14 * a.abs());
    assert!((rep.b_t - b).abs() <= 1e-14 * b.abs());
    assert!((rep.energy - e).abs() <= 1e-12 * e.abs(), "{} vs {e}", rep.energy);
}

#[test]
fn example51_energy_is_nonnegative_where_coefficients_are() {
    let mut cfg = preset("example51").unwrap();
    cfg.horizon = 60.0;
    cfg.integrator.samples = 120;
    let mut checked = 0;
    for out in execute(&cfg).unwrap() {
        assert!(out.summary.status.is_ok());
        for r in &out.rows {
            if r.a_t >= 0.0 && r.b_t >= 0.0 {
                assert!(r.energy >= 0.0, "{} at t={}: {}", out.summary.label, r.t, r.energy);
                checked += 1;
            }
        }
    }
    assert!(checked > 300);
}

#[test]
fn lagrangian_gap_term_by_term() {
    let mut cfg = preset("example51").unwrap();
    cfg.horizon = 30.0;
    cfg.integrator.samples = 50;
    cfg.sweep.values = vec![0.7];
    let out = &execute(&cfg).unwrap()[0];
    let prob = cfg.build_problem().unwrap();
    let mn = min_norm_solution(&prob).unwrap();
    let (q, k) = prob.objective().quadratic_form().unwrap();
    let f = |x: &DVector<f64>| 0.5 * x.dot(&(&q * x)) + k.dot(x);
    assert_eq!(out.rows.len(), 50);
    for (row, s) in out.rows.iter().zip(&out.trajectory.samples) {
        let residual = prob.a() * &s.x - prob.b();
        let expected = f(&s.x) - f(&mn.x_star) + mn.lambda_star.dot(&residual);
        assert!((row.lagrangian_gap - expected).abs() <= 1e-9 * (1.0 + expected.abs()));
        assert!(row.lagrangian_gap >= -1e-10);
        assert!((row.obj_residual - (f(&s.x) - f(&mn.x_star)).abs()).abs() <= 1e-9 * (1.0 + row.obj_residual));
        assert!((row.feasibility - residual.norm()).abs() <= 1e-12 * (1.0 + row.feasibility));
    }
}

/// A positive semidefinite, singular quadratic with redundant constraints.
fn rank_deficient_qp() -> Problem {
    let b_mat = DMatrix::from_row_slice(3, 6, &[
        1.0, 2.0, 0.0, -1.0, 0.5, 0.0, //
        0.0, 1.0, 1.0, 0.0, -2.0, 1.0, //
        2.0, 0.0, -1.0, 1.0, 0.0, 3.0,
    ]);
    let q = b_mat.transpose() * &b_mat;
    // A linear term in the range of Q keeps the objective bounded below.
    let k = &q * DVector::from_vec(vec![0.5, -1.0, 0.0, 2.0, 1.0, -0.5]);
    // Third row is the sum of the first two.
    let a = DMatrix::from_row_slice(3, 6, &[
        1.0, 0.0, 1.0, 0.0, 1.0, 0.0, //
        0.0, 1.0, 0.0, 1.0, 0.0, 1.0, //
        1.0, 1.0, 1.0, 1.0, 1.0, 1.0,
    ]);
    let b = DVector::from_vec(vec![1.0, 2.0, 3.0]);
    Problem::new(Arc::new(QuadraticObjective::new(q, k)), a, b).unwrap()
}

#[test]
fn min_norm_solution_is_orthogonal_to_the_null_space() {
    let prob = rank_deficient_qp();
    let mn = min_norm_solution(&prob).unwrap();
    let (q, k) = prob.objective().quadratic_form().unwrap();
    let (n, m) = (prob.dim_x(), prob.dim_y());
    let mut kkt = DMatrix::zeros(n + m, n + m);
    kkt.view_mut((0, 0), (n, n)).copy_from(&q);
    kkt.view_mut((0, n), (n, m)).copy_from(&prob.a().transpose());
    kkt.view_mut((n, 0), (m, n)).copy_from(prob.a());
    let z = DVector::from_iterator(n + m, mn.x_star.iter().chain(mn.lambda_star.iter()).copied());
    let mut rhs = DVector::zeros(n + m);
    rhs.rows_mut(0, n).copy_from(&(-&k));
    rhs.rows_mut(n, m).copy_from(prob.b());
    assert!((&kkt * &z - &rhs).norm() <= 1e-10);

    // The KKT set is z + null(K); the minimal-norm point has no null component.
    let eig = kkt.symmetric_eigen();
    let scale = eig.eigenvalues.amax();
    let null: Vec<_> = (0..n + m)
        .filter(|&i| eig.eigenvalues[i].abs() <= 1e-10 * scale)
        .map(|i| eig.eigenvectors.column(i).into_owned())
        .collect();
    assert!(!null.is_empty(), "the test problem should be degenerate");
    for v in &null {
        assert!(v.dot(&z).abs() <= 1e-10, "null component {}", v.dot(&z));
    }

    // The saddle path approaches the same point as the regularization vanishes.
    let reg = RegularizationSpec::new(1.0, 0.5).unwrap();
    let sp = saddle_point(&prob, &reg, 1e12).unwrap();
    let gap = ((&sp.x_t - &mn.x_star).norm_squared() + (&sp.lambda_t - &mn.lambda_star).norm_squared()).sqrt();
    assert!(gap <= 1e-4, "{gap}");
}

#[test]
fn total_derivative_of_the_gradient_along_an_arc() {
    let (_, prob, params, mass) = example52();
    let field = PrimalDualField::new(&prob, &params, &mass);
    let s0 = TrajectoryState::new(
        1.0,
        DVector::from_vec(vec![1.0, 1.0, -1.0]),
        DVector::from_vec(vec![-1.0, -1.0, 1.0]),
        DVector::from_vec(vec![1.0]),
    )
    .unwrap();
    let cfg = IntegratorConfig {
        rel_tol: 1e-12,
        abs_tol: 1e-14,
        ..Default::default()
    };
    let h = 1e-4;
    let centres = [1.5, 2.0, 3.0];
    let mut grid = vec![1.0];
    for c in centres {
        grid.extend([c - h, c, c + h]);
    }
    let traj = integrate_on_grid(&field, &s0, &grid, &cfg).unwrap();
    let g = |s: &TrajectoryState| grad_x_lt(&prob, params.reg(), s.t, &s.x, &s.lambda).unwrap();
    for k in 0..centres.len() {
        let (lo, mid, hi) = (&traj.samples[1 + 3 * k], &traj.samples[2 + 3 * k], &traj.samples[3 + 3 * k]);
        let fd = (g(hi) - g(lo)) / (hi.t - lo.t);
        let lambdadot = vector_field(&prob, &params, &mass, mid).unwrap().lambdadot;
        let exact = grad_x_lt_rate(&prob, &params, mid, &lambdadot);
        let rel = (&fd - &exact).norm() / exact.norm();
        assert!(rel <= 1e-5, "t={}: rel err {rel:e}", mid.t);
    }
}

/// Mean error reduction per 16× tolerance refinement, measured against a
/// tight reference over four rungs.
fn refinement_ratio(cfg: &ExperimentConfig, member: &pdflow::experiment::SweepMember, horizon: f64) -> f64 {
    let prob = cfg.build_problem().unwrap();
    let field = PrimalDualField::new(&prob, &member.params, &member.mass);
    let s0 = pdflow::experiment::runner::initial_state(cfg, &prob).unwrap();
    let terminal = |rel_tol: f64| {
        let c = IntegratorConfig {
            rel_tol,
            abs_tol: rel_tol * 1e-3,
            samples: 2,
            ..Default::default()
        };
        integrate(&field, &s0, horizon, &c).unwrap().last().unwrap().to_flat()
    };
    let reference = terminal(1e-13);
    let err = |k: i32| (terminal(1e-4 / 16f64.powi(k)) - &reference).norm();
    (err(0) / err(3)).cbrt()
}

#[test]
fn self_convergence_on_every_preset() {
    for name in pdflow::experiment::PRESET_NAMES {
        let cfg = preset(name).unwrap();
        for member in cfg.members().unwrap() {
            let ratio = refinement_ratio(&cfg, &member, 5.0);
            assert!(ratio >= 8.0, "{}: ratio {ratio}", member.label);
        }
    }
}

/// Regime of the toy sweep recomputed from the family inequalities.
fn expected_toy_regime(q: f64, s: f64, p: f64) -> Regime {
    let small_p = p < (1.0 - q) / 2.0 && 5.0 * q + 2.0 * s - 1.0 < 0.0 && 4.0 * q + s + p - 2.0 < 0.0;
    let base = p < 1.0 - q && 4.0 * q + s + p - 2.0 < 0.0 && 3.0 * q + s - p - 1.0 < 0.0;
    match (small_p, base) {
        (true, _) if p < 2.0 * q + s => Regime::SmallPViscous,
        (true, _) => Regime::SmallPTikhonov,
        (false, true) if p >= (1.0 - q) / 2.0 => Regime::BaseLargeP,
        (false, true) => Regime::BaseSmallP,
        _ => Regime::OutsideGuarantees,
    }
}

#[test]
fn example52_sweep_writes_one_csv_and_summary_per_member() {
    let cfg = preset("example52").unwrap();
    let dir = tempfile::tempdir().unwrap();
    let report = run(&cfg, dir.path()).unwrap();
    assert_eq!(report.csv_files.len(), 4);
    assert_eq!(report.summaries.len(), 4);
    let lines = std::fs::read_to_string(&report.summary_file).unwrap();
    assert_eq!(lines.lines().count(), 4);
    for (s, v) in report.summaries.iter().zip([0.1, 0.3, 0.5, 0.7]) {
        assert!(s.status.is_ok());
        assert_eq!(s.regime.regime, expected_toy_regime(0.1, v, 0.1), "s = {v}");
        assert!(report.csv_files.iter().any(|f| f.ends_with(format!("example52_s{v}.csv"))));
    }
    assert_eq!(report.summaries[0].regime.regime, Regime::SmallPViscous);
}

#[test]
fn configuration_outside_every_family_still_runs() {
    let mut cfg = preset("example52").unwrap();
    cfg.params.q = 0.5;
    cfg.params.s = 1.0;
    cfg.params.p = 0.9;
    cfg.horizon = 20.0;
    cfg.sweep.values = vec![1.0];
    let out = &execute(&cfg).unwrap()[0];
    assert_eq!(out.summary.regime.regime, Regime::OutsideGuarantees);
    assert!(out.summary.to_line().contains("regime=outside-guarantees"));
    assert!(out.summary.status.is_ok());
    assert_eq!(out.rows.last().unwrap().t, 20.0);
}

#[test]
fn reruns_write_identical_files() {
    let mut cfg = preset("example51").unwrap();
    cfg.horizon = 20.0;
    cfg.dump_state = true;
    let (d1, d2) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let (r1, r2) = (run(&cfg, d1.path()).unwrap(), run(&cfg, d2.path()).unwrap());
    for (a, b) in r1.csv_files.iter().zip(&r2.csv_files) {
        assert_eq!(std::fs::read(a).unwrap(), std::fs::read(b).unwrap());
    }
}

#[test]
fn sweep_order_does_not_change_members() {
    let mut cfg = preset("example52").unwrap();
    cfg.horizon = 30.0;
    let forward = execute(&cfg).unwrap();
    cfg.sweep.values.reverse();
    let backward = execute(&cfg).unwrap();
    for f in &forward {
        let b = backward.iter().find(|b| b.summary.label == f.summary.label).unwrap();
        assert_eq!(f.rows, b.rows);
    }
}

#[test]
fn metrics_vanish_on_a_stationary_trajectory() {
    let prob = rank_deficient_qp();
    let reg = RegularizationSpec::new(1.0, 0.5).unwrap();
    let params = ParameterSet::new(2.0, 0.2, 0.3, 1.0, reg, 1.0).unwrap();
    let mass = MassFunction::power_law(1.0, 0.3).unwrap();
    let mn = min_norm_solution(&prob).unwrap();
    let times = log_grid(1.0, 10.0, 5);
    let traj = pdflow::integrator::Trajectory {
        samples: times
            .iter()
            .map(|&t| TrajectoryState::new(t, mn.x_star.clone(), DVector::zeros(6), mn.lambda_star.clone()).unwrap())
            .collect(),
        step_sizes: vec![1.0; 5],
        ..Default::default()
    };
    let path = saddle_path(&prob, &reg, &times).unwrap();
    for r in metrics(&prob, &params, &mass, &traj, &path, &mn).unwrap() {
        assert!(r.obj_residual <= 1e-12 && r.feasibility <= 1e-12);
        assert!(r.lagrangian_gap.abs() <= 1e-12 && r.dist_minnorm == 0.0);
        let (a, b) = energy_coefficients(&params, &mass, r.t);
        assert_eq!((a, b), (r.a_t, r.b_t));
    }
}

/// Hessian damping on the unit toy problem, measured on the objective over [10, T].
#[test]
fn hessian_damping_reduces_objective_variation_on_the_toy_problem() {
    let mut cfg = preset("example52").unwrap();
    cfg.sweep.axis = pdflow::experiment::SweepAxis::Gamma;
    cfg.sweep.values = vec![1.0, 0.0];
    let prob = cfg.build_problem().unwrap();
    let outs = execute(&cfg).unwrap();
    let tv: Vec<f64> = outs
        .iter()
        .map(|o| {
            let tail = o.trajectory.window(10.0, cfg.horizon);
            oscillation_measure(&prob, &tail, ComponentSelector::Objective).unwrap().total_variation
        })
        .collect();
    assert!(tv[0] < tv[1], "total variation with damping {:e}, without {:e}", tv[0], tv[1]);
}
