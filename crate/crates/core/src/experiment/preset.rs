//! Built-in experiment configurations.

use super::config::{
    ExperimentConfig, InitialSpec, IntegratorSpec, MassSpec, ParamsSpec, ProblemSpec, SweepAxis,
    SweepSpec, VectorSpec, DEFAULT_HORIZON,
};
use crate::error::{Error, Result};

pub const PRESET_NAMES: [&str; 3] = ["example51", "example52", "example52_hessian"];

/// Seed of the random QP behind `example51`.
pub const EXAMPLE51_SEED: u64 = 51;

fn base(name: &str, problem: ProblemSpec, params: ParamsSpec, mass: MassSpec, initial: InitialSpec, sweep: SweepSpec) -> ExperimentConfig {
    ExperimentConfig {
        name: name.into(),
        horizon: DEFAULT_HORIZON,
        window: None,
        oscillation_from: None,
        out_dir: None,
        dump_state: false,
        problem,
        params,
        mass,
        initial,
        integrator: IntegratorSpec::default(),
        sweep,
        base_dir: None,
    }
}

fn example52_initial() -> InitialSpec {
    InitialSpec {
        x: VectorSpec::Values(vec![1.0, 1.0, -1.0]),
        v: VectorSpec::Values(vec![-1.0, -1.0, 1.0]),
        lambda: VectorSpec::Values(vec![1.0]),
    }
}

fn example52_params(s: f64) -> ParamsSpec {
    ParamsSpec {
        alpha: 3.0,
        q: 0.1,
        s,
        gamma: 1.0,
        c: 5.0,
        p: 0.1,
        t0: 1.0,
    }
}

pub fn preset(name: &str) -> Result<ExperimentConfig> {
    match name {
        // Random QP, 5 constraints in 10 unknowns, started from all ones;
        // sweeps the mass decay over {1, t^-0.1, t^-0.4, t^-0.7}.
        "example51" => Ok(base(
            name,
            ProblemSpec::RandomQp {
                seed: EXAMPLE51_SEED,
                m: 5,
                n: 10,
            },
            ParamsSpec {
                alpha: 1.1,
                q: 0.06,
                s: 0.7,
                gamma: 2.0,
                c: 0.01,
                p: 0.9,
                t0: 1.0,
            },
            MassSpec::PowerLaw {
                kappa: 1.0,
                sigma: 0.7,
            },
            InitialSpec::default(),
            SweepSpec {
                axis: SweepAxis::Sigma,
                values: vec![0.0, 0.1, 0.4, 0.7],
            },
        )),
        // Toy problem (x1 - 2 x2 + x3)^2 s.t. x1 - 2 x2 + x3 = 0; sweeps the
        // time-scaling exponent.
        "example52" => Ok(base(
            name,
            ProblemSpec::Toy {
                coefficients: [1.0, 2.0, 1.0],
            },
            example52_params(0.1),
            MassSpec::PowerLaw {
                kappa: 1.0,
                sigma: 0.15,
            },
            example52_initial(),
            SweepSpec {
                axis: SweepAxis::S,
                values: vec![0.1, 0.3, 0.5, 0.7],
            },
        )),
        // Hessian damping on and off on a steeper toy instance.
        "example52_hessian" => Ok(base(
            name,
            ProblemSpec::Toy {
                coefficients: [10.0, 20.0, 10.0],
            },
            example52_params(0.1),
            MassSpec::PowerLaw {
                kappa: 1.0,
                sigma: 0.15,
            },
            example52_initial(),
            SweepSpec {
                axis: SweepAxis::Gamma,
                values: vec![1.0, 0.0],
            },
        )),
        _ => Err(Error::Config(format!(
            "unknown preset {name:?}; expected one of {}",
            PRESET_NAMES.join(", ")
        ))),
    }
}
