use proptest::prelude::*;

use pdflow::diagnostics::{energy, energy_coefficients};
use pdflow::dynamics::{theta, MassFunction, ParameterSet, PrimalDualField, TrajectoryState};
use pdflow::integrator::{integrate, integrate_on_grid, IntegratorConfig};
use pdflow::lagrangian::{grad_x_lt, lagrangian, lagrangian_value, min_norm_solution, saddle_point, RegularizationSpec};
use pdflow::problem::{make_random_qp, Problem};
use pdflow::DVector;

const M: usize = 3;
const N: usize = 6;

fn vector(len: usize) -> impl Strategy<Value = DVector<f64>> {
    prop::collection::vec(-2.0..2.0f64, len).prop_map(DVector::from_vec)
}

fn params() -> impl Strategy<Value = (ParameterSet, MassFunction)> {
    (1.1..4.0f64, 0.0..0.3f64, 0.0..0.6f64, 0.0..2.0f64, 0.05..5.0f64, 0.05..0.95f64, 0.0..0.5f64)
        .prop_map(|(alpha, q, s, gamma, c, p, sigma)| {
            let reg = RegularizationSpec::new(c, p).unwrap();
            let params = ParameterSet::new(alpha, q, s, gamma, reg, 1.0).unwrap();
            let mass = if sigma == 0.0 {
                MassFunction::constant(1.0).unwrap()
            } else {
                MassFunction::power_law(1.0, sigma).unwrap()
            };
            (params, mass)
        })
}

fn problem(seed: u64) -> Problem {
    make_random_qp(seed, M, N).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn energy_is_the_sum_of_its_four_terms(
        seed in 0u64..20, (params, mass) in params(), t in 1.0..500.0f64,
        x in vector(N), v in vector(N), l in vector(M),
    ) {
        let prob = problem(seed);
        let sp = saddle_point(&prob, params.reg(), t).unwrap();
        let state = TrajectoryState::new(t, x.clone(), v.clone(), l.clone()).unwrap();
        let rep = energy(&prob, &params, &mass, &state, &sp).unwrap();

        let (a, b) = energy_coefficients(&params, &mass, t);
        let tq = t.powf(params.q());
        let gap = lagrangian_value(&prob, params.reg(), t, &x, &sp.lambda_t).unwrap()
            - lagrangian_value(&prob, params.reg(), t, &sp.x_t, &sp.lambda_t).unwrap();
        let g = grad_x_lt(&prob, params.reg(), t, &x, &l).unwrap();
        let vt = (&x - &sp.x_t) * (params.alpha() - 1.0) + (&v * mass.eval(t).m + g * params.gamma()) * tq;
        let terms = [
            a * tq * gap,
            0.5 * vt.norm_squared(),
            0.5 * b * (&x - &sp.x_t).norm_squared(),
            0.5 * (&l - &sp.lambda_t).norm_squared(),
        ];
        let expected: f64 = terms.iter().sum();
        let scale: f64 = terms.iter().map(|z| z.abs()).sum();
        prop_assert!((rep.energy - expected).abs() <= 1e-9 * (1.0 + scale), "{} vs {}", rep.energy, expected);
        prop_assert!((&rep.theta_term - &vt).norm() <= 1e-10 * (1.0 + vt.norm()));
    }

    #[test]
    fn energy_is_nonnegative_when_coefficients_are(
        seed in 0u64..20, (params, mass) in params(), t in 1.0..500.0f64,
        x in vector(N), v in vector(N), l in vector(M),
    ) {
        let (a, b) = energy_coefficients(&params, &mass, t);
        prop_assume!(a >= 0.0 && b >= 0.0);
        let prob = problem(seed);
        let sp = saddle_point(&prob, params.reg(), t).unwrap();
        let state = TrajectoryState::new(t, x, v, l).unwrap();
        prop_assert!(energy(&prob, &params, &mass, &state, &sp).unwrap().energy >= 0.0);
    }

    #[test]
    fn lagrangian_gap_is_nonnegative(seed in 0u64..20, x in vector(N)) {
        let prob = problem(seed);
        let mn = min_norm_solution(&prob).unwrap();
        let gap = lagrangian(&prob, &x, &mn.lambda_star).unwrap()
            - lagrangian(&prob, &mn.x_star, &mn.lambda_star).unwrap();
        prop_assert!(gap >= -1e-10, "{gap}");
    }

    #[test]
    fn saddle_path_stays_inside_the_solution_ball(
        seed in 0u64..20, c in 0.01..10.0f64, p in 0.05..0.95f64, t in 1.0..1e4f64,
    ) {
        let prob = problem(seed);
        let mn = min_norm_solution(&prob).unwrap();
        let sp = saddle_point(&prob, &RegularizationSpec::new(c, p).unwrap(), t).unwrap();
        prop_assert!(sp.norm() <= mn.norm() * (1.0 + 1e-9) + 1e-9);
        prop_assert!(sp.velocity_norm() <= p / t * mn.norm() * (1.0 + 1e-9) + 1e-9);
    }

    #[test]
    fn theta_without_hessian_damping(
        alpha in 1.1..4.0f64, q in 0.0..0.5f64, s in 0.0..1.0f64, kappa in 0.1..5.0f64, t in 1.0..1e3f64,
    ) {
        let reg = RegularizationSpec::new(1.0, 0.5).unwrap();
        let params = ParameterSet::new(alpha, q, s, 0.0, reg, 1.0).unwrap();
        let mass = MassFunction::constant(kappa).unwrap();
        let expected = kappa * t.powf(q) / (alpha - 1.0);
        let got = theta(&params, &mass, t).unwrap();
        prop_assert!((got - expected).abs() <= 1e-12 * expected);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn integration_is_deterministic(
        seed in 0u64..20, (params, mass) in params(), x in vector(N), v in vector(N), l in vector(M),
    ) {
        let prob = problem(seed);
        let field = PrimalDualField::new(&prob, &params, &mass);
        let s0 = TrajectoryState::new(1.0, x, v, l).unwrap();
        let cfg = IntegratorConfig { samples: 25, ..Default::default() };
        let a = integrate(&field, &s0, 8.0, &cfg).unwrap();
        let b = integrate(&field, &s0, 8.0, &cfg).unwrap();
        prop_assert_eq!(a.samples, b.samples);
        prop_assert_eq!(a.step_sizes, b.step_sizes);
    }

    #[test]
    fn samples_land_on_the_requested_grid(
        seed in 0u64..20, (params, mass) in params(),
        mut cuts in prop::collection::vec(1.0..8.0f64, 1..12),
    ) {
        let prob = problem(seed);
        let field = PrimalDualField::new(&prob, &params, &mass);
        let s0 = TrajectoryState::new(1.0, DVector::from_element(N, 1.0), DVector::zeros(N), DVector::zeros(M)).unwrap();
        cuts.sort_by(f64::total_cmp);
        cuts.dedup();
        let mut grid = vec![1.0];
        grid.extend(cuts.into_iter().filter(|&t| t > 1.0));
        let traj = integrate_on_grid(&field, &s0, &grid, &IntegratorConfig::default()).unwrap();
        prop_assert_eq!(traj.times(), grid);
        prop_assert_eq!(&traj.samples[0], &s0);
    }
}
