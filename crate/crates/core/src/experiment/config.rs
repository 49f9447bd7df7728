//! Experiment configuration files.
//!
//! Configs are TOML: flat `key = value` pairs grouped in sections. Every
//! section except `[problem]`, `[params]` and `[mass]` is optional.
//!
//! ```toml
//! name = "example52"
//! horizon = 1000.0
//! window = [10.0, 1000.0]        # rate-fit window, default [max(T/100, t0), T]
//! oscillation_from = 10.0        # start of the oscillation window, default 10·t0
//! out_dir = "out"
//! dump_state = false
//!
//! [problem]
//! kind = "toy"                   # "toy" | "random_qp" | "file"
//! coefficients = [1.0, 2.0, 1.0] # toy
//! # seed = 7, m = 5, n = 10      # random_qp
//! # path = "qp.txt"              # file, resolved against the config's directory
//!
//! [params]
//! alpha = 3.0
//! q = 0.1
//! s = 0.1
//! gamma = 1.0
//! c = 5.0
//! p = 0.1
//! t0 = 1.0
//!
//! [mass]
//! kind = "power_law"             # "power_law" | "constant"
//! kappa = 1.0
//! sigma = 0.15
//!
//! [initial]                      # a number fills every component
//! x = [1.0, 1.0, -1.0]
//! v = [-1.0, -1.0, 1.0]
//! lambda = 1.0
//!
//! [integrator]
//! rel_tol = 1e-8
//! abs_tol = 1e-10
//! samples = 400
//!
//! [sweep]
//! axis = "s"                     # "none" | "sigma" | "s" | "gamma"
//! values = [0.1, 0.3, 0.5, 0.7]
//! ```

use std::path::{Path, PathBuf};

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::dynamics::{MassFunction, ParameterSet};
use crate::error::{Error, Result};
use crate::integrator::IntegratorConfig;
use crate::lagrangian::RegularizationSpec;
use crate::problem::{make_random_qp, text::read_problem, Problem};

pub const DEFAULT_HORIZON: f64 = 1e3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ProblemSpec {
    Toy { coefficients: [f64; 3] },
    RandomQp { seed: u64, m: usize, n: usize },
    File { path: PathBuf },
}

impl ProblemSpec {
    /// Builds the instance; relative file paths are resolved against `base`.
    pub fn build(&self, base: Option<&Path>) -> Result<Problem> {
        match self {
            ProblemSpec::Toy { coefficients: [m, n, e] } => Problem::toy(*m, *n, *e),
            ProblemSpec::RandomQp { seed, m, n } => make_random_qp(*seed, *m, *n),
            ProblemSpec::File { path } => {
                let full = match base {
                    Some(b) if path.is_relative() => b.join(path),
                    _ => path.clone(),
                };
                read_problem(&std::fs::read_to_string(&full).map_err(|e| {
                    Error::Config(format!("cannot read problem file {}: {e}", full.display()))
                })?)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsSpec {
    pub alpha: f64,
    pub q: f64,
    pub s: f64,
    pub gamma: f64,
    pub c: f64,
    pub p: f64,
    #[serde(default = "one")]
    pub t0: f64,
}

fn one() -> f64 {
    1.0
}

impl ParamsSpec {
    pub fn build(&self) -> Result<ParameterSet> {
        let reg = RegularizationSpec::new(self.c, self.p)?;
        ParameterSet::new(self.alpha, self.q, self.s, self.gamma, reg, self.t0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum MassSpec {
    PowerLaw {
        #[serde(default = "one")]
        kappa: f64,
        sigma: f64,
    },
    Constant {
        #[serde(default = "one")]
        kappa: f64,
    },
}

impl MassSpec {
    pub fn build(&self) -> Result<MassFunction> {
        match *self {
            MassSpec::PowerLaw { kappa, sigma } => MassFunction::power_law(kappa, sigma),
            MassSpec::Constant { kappa } => MassFunction::constant(kappa),
        }
    }
}

/// Either one value for every component or an explicit list.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum VectorSpec {
    Fill(f64),
    Values(Vec<f64>),
}

impl VectorSpec {
    pub fn build(&self, what: &'static str, len: usize) -> Result<DVector<f64>> {
        match self {
            VectorSpec::Fill(v) => Ok(DVector::from_element(len, *v)),
            VectorSpec::Values(vs) if vs.len() == len => Ok(DVector::from_column_slice(vs)),
            VectorSpec::Values(vs) => Err(Error::Dimension {
                what,
                expected: len,
                got: vs.len(),
            }),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialSpec {
    pub x: VectorSpec,
    pub v: VectorSpec,
    pub lambda: VectorSpec,
}

impl Default for InitialSpec {
    fn default() -> Self {
        Self {
            x: VectorSpec::Fill(1.0),
            v: VectorSpec::Fill(1.0),
            lambda: VectorSpec::Fill(1.0),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IntegratorSpec {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_step_factor: f64,
    pub initial_step: f64,
    pub max_steps: usize,
    pub samples: usize,
}

impl Default for IntegratorSpec {
    fn default() -> Self {
        IntegratorConfig::default().into()
    }
}

impl From<IntegratorConfig> for IntegratorSpec {
    fn from(c: IntegratorConfig) -> Self {
        Self {
            rel_tol: c.rel_tol,
            abs_tol: c.abs_tol,
            max_step_factor: c.max_step_factor,
            initial_step: c.initial_step,
            max_steps: c.max_steps,
            samples: c.samples,
        }
    }
}

impl From<IntegratorSpec> for IntegratorConfig {
    fn from(c: IntegratorSpec) -> Self {
        Self {
            rel_tol: c.rel_tol,
            abs_tol: c.abs_tol,
            max_step_factor: c.max_step_factor,
            initial_step: c.initial_step,
            max_steps: c.max_steps,
            samples: c.samples,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepAxis {
    None,
    Sigma,
    S,
    Gamma,
}

impl SweepAxis {
    pub fn name(&self) -> &'static str {
        match self {
            SweepAxis::None => "none",
            SweepAxis::Sigma => "sigma",
            SweepAxis::S => "s",
            SweepAxis::Gamma => "gamma",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub axis: SweepAxis,
    #[serde(default)]
    pub values: Vec<f64>,
}

impl Default for SweepSpec {
    fn default() -> Self {
        Self {
            axis: SweepAxis::None,
            values: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default = "default_name")]
    pub name: String,
    #[serde(default = "default_horizon")]
    pub horizon: f64,
    #[serde(default)]
    pub window: Option<[f64; 2]>,
    #[serde(default)]
    pub oscillation_from: Option<f64>,
    #[serde(default)]
    pub out_dir: Option<PathBuf>,
    #[serde(default)]
    pub dump_state: bool,
    pub problem: ProblemSpec,
    pub params: ParamsSpec,
    pub mass: MassSpec,
    #[serde(default)]
    pub initial: InitialSpec,
    #[serde(default)]
    pub integrator: IntegratorSpec,
    #[serde(default)]
    pub sweep: SweepSpec,
    /// Directory of the file the config came from; used for relative paths.
    #[serde(skip)]
    pub base_dir: Option<PathBuf>,
}

fn default_name() -> String {
    "run".into()
}

fn default_horizon() -> f64 {
    DEFAULT_HORIZON
}

/// One concrete run of a sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepMember {
    pub label: String,
    pub axis: SweepAxis,
    pub value: Option<f64>,
    pub params: ParameterSet,
    pub mass: MassFunction,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        let mut cfg = Self::from_toml(&text)?;
        cfg.base_dir = path.parent().map(Path::to_path_buf);
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        if self.name.is_empty()
            || !self
                .name
                .chars()
                .all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-')
        {
            return Err(Error::Config(format!(
                "name {:?} must be non-empty ASCII letters, digits, '_' or '-'",
                self.name
            )));
        }
        let t0 = self.params.t0;
        if !(self.horizon.is_finite() && self.horizon > t0) {
            return Err(Error::Config(format!(
                "horizon {} must exceed t0 = {t0}",
                self.horizon
            )));
        }
        let (lo, hi) = self.rate_window();
        if !(lo >= t0 && hi <= self.horizon && lo < hi) {
            return Err(Error::Config(format!(
                "rate window [{lo}, {hi}] must lie inside [{t0}, {}]",
                self.horizon
            )));
        }
        IntegratorConfig::from(self.integrator).validate()?;
        match self.sweep.axis {
            SweepAxis::None if !self.sweep.values.is_empty() => {
                return Err(Error::Config("sweep axis \"none\" takes no values".into()))
            }
            SweepAxis::None => {}
            _ if self.sweep.values.is_empty() => {
                return Err(Error::Config(format!(
                    "sweep axis {:?} needs at least one value",
                    self.sweep.axis.name()
                )))
            }
            _ => {}
        }
        for m in self.members()? {
            m.params.check_window(self.horizon)?;
        }
        Ok(())
    }

    pub fn rate_window(&self) -> (f64, f64) {
        match self.window {
            Some([lo, hi]) => (lo, hi),
            None => ((self.horizon / 100.0).max(self.params.t0), self.horizon),
        }
    }

    pub fn oscillation_start(&self) -> f64 {
        self.oscillation_from.unwrap_or(10.0 * self.params.t0)
    }

    pub fn integrator_config(&self) -> IntegratorConfig {
        self.integrator.into()
    }

    pub fn build_problem(&self) -> Result<Problem> {
        self.problem.build(self.base_dir.as_deref())
    }

    /// Expands the sweep. A `sigma` sweep turns `σ = 0` into constant mass.
    pub fn members(&self) -> Result<Vec<SweepMember>> {
        let base = self.params.build()?;
        let mass = self.mass.build()?;
        if self.sweep.axis == SweepAxis::None {
            return Ok(vec![SweepMember {
                label: self.name.clone(),
                axis: SweepAxis::None,
                value: None,
                params: base,
                mass,
            }]);
        }
        self.sweep
            .values
            .iter()
            .map(|&v| {
                let (params, mass) = match self.sweep.axis {
                    SweepAxis::Sigma if v == 0.0 => (base, MassFunction::constant(mass.kappa())?),
                    SweepAxis::Sigma => (base, MassFunction::power_law(mass.kappa(), v)?),
                    SweepAxis::S => (base.with_s(v)?, mass),
                    SweepAxis::Gamma => (base.with_gamma(v)?, mass),
                    SweepAxis::None => unreachable!(),
                };
                Ok(SweepMember {
                    label: format!("{}_{}{}", self.name, self.sweep.axis.name(), v),
                    axis: self.sweep.axis,
                    value: Some(v),
                    params,
                    mass,
                })
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiment::preset;

    const MINIMAL: &str = r#"
[problem]
kind = "toy"
coefficients = [1.0, 2.0, 1.0]

[params]
alpha = 3.0
q = 0.1
s = 0.1
gamma = 1.0
c = 5.0
p = 0.1

[mass]
kind = "power_law"
sigma = 0.15
"#;

    #[test]
    fn minimal_config_uses_defaults() {
        let cfg = ExperimentConfig::from_toml(MINIMAL).unwrap();
        assert_eq!(cfg.horizon, DEFAULT_HORIZON);
        assert_eq!(cfg.rate_window(), (10.0, 1000.0));
        assert_eq!(cfg.integrator_config(), IntegratorConfig::default());
        assert_eq!(cfg.initial, InitialSpec::default());
        assert_eq!(cfg.members().unwrap().len(), 1);
    }

    #[test]
    fn presets_round_trip_through_toml() {
        for name in preset::PRESET_NAMES {
            let cfg = preset::preset(name).unwrap();
            let back = ExperimentConfig::from_toml(&cfg.to_toml()).unwrap();
            assert_eq!(back, cfg, "{name}");
        }
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let text = MINIMAL.replace("gamma = 1.0", "gamma = 1.0\nbeta = 2.0");
        assert!(matches!(ExperimentConfig::from_toml(&text), Err(Error::Config(_))));
    }

    #[test]
    fn sweep_needs_values() {
        let text = format!("{MINIMAL}\n[sweep]\naxis = \"s\"\n");
        assert!(ExperimentConfig::from_toml(&text).is_err());
        let text = format!("{MINIMAL}\n[sweep]\naxis = \"none\"\nvalues = [1.0]\n");
        assert!(ExperimentConfig::from_toml(&text).is_err());
    }

    #[test]
    fn sigma_sweep_members() {
        let cfg = preset::preset("example51").unwrap();
        let members = cfg.members().unwrap();
        assert_eq!(members.len(), 4);
        assert_eq!(members[0].mass, MassFunction::constant(1.0).unwrap());
        assert_eq!(members[3].mass.sigma(), 0.7);
        assert_eq!(members[2].label, "example51_sigma0.4");
    }

    #[test]
    fn bad_window_and_horizon() {
        let text = format!("horizon = 0.5\n{MINIMAL}");
        assert!(ExperimentConfig::from_toml(&text).is_err());
        let text = format!("window = [0.5, 10.0]\n{MINIMAL}");
        assert!(ExperimentConfig::from_toml(&text).is_err());
    }

    #[test]
    fn initial_vectors_check_length() {
        let spec = VectorSpec::Values(vec![1.0, 2.0]);
        assert!(spec.build("x", 3).is_err());
        assert_eq!(VectorSpec::Fill(2.0).build("x", 2).unwrap(), DVector::from_element(2, 2.0));
    }
}
