//! Run configuration: a JSON file, overridden by flags and by
//! `KIRCHHOFF_OUTPUT_DIR`.

use std::fmt;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use kirchhoff_core::algebra::Rational;
use kirchhoff_core::grid::{make_grid, DEFAULT_N, DEFAULT_R_MAX};
use kirchhoff_core::solver::{Seed, SolverOptions};
use kirchhoff_core::{PotentialSpec, ProblemParams, RadialGrid};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io;

pub const OUTPUT_DIR_ENV: &str = "KIRCHHOFF_OUTPUT_DIR";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CommandKind {
    Solve,
    Sweep,
    Fiber,
    VerifyAlgebra,
    Nonexist,
}

impl fmt::Display for CommandKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Solve => "solve",
            Self::Sweep => "sweep",
            Self::Fiber => "fiber",
            Self::VerifyAlgebra => "verify-algebra",
            Self::Nonexist => "nonexist",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub command: Option<CommandKind>,
    pub params: ParamsConfig,
    pub potential: PotentialConfig,
    pub grid: GridConfig,
    pub solver: SolverConfig,
    pub output_dir: PathBuf,
    /// Seed for randomized scans.
    pub seed: u64,
    pub sweep: SweepConfig,
    pub fiber: FiberConfig,
    pub algebra: AlgebraConfig,
    pub nonexist: NonexistConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            command: None,
            params: ParamsConfig::default(),
            potential: PotentialConfig::default(),
            grid: GridConfig::default(),
            solver: SolverConfig::default(),
            output_dir: PathBuf::from("kirchhoff-out"),
            seed: 0,
            sweep: SweepConfig::default(),
            fiber: FiberConfig::default(),
            algebra: AlgebraConfig::default(),
            nonexist: NonexistConfig::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ParamsConfig {
    pub a: f64,
    pub b: f64,
    pub p: f64,
    pub lambda: f64,
    pub delta: f64,
}

impl Default for ParamsConfig {
    fn default() -> Self {
        Self { a: 1.0, b: 1.0, p: 3.0, lambda: 1.0, delta: ProblemParams::DEFAULT_DELTA }
    }
}

impl ParamsConfig {
    pub fn problem(&self) -> Result<ProblemParams> {
        Ok(ProblemParams::with_all(self.a, self.b, self.p, self.lambda, self.delta)?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PotentialConfig {
    Constant {
        v_inf: f64,
    },
    /// `V(r) = v1 − 1/(r+1)`.
    ShiftedCoulomb {
        v1: f64,
        #[serde(default = "default_r_hi")]
        r_hi: f64,
        #[serde(default = "default_samples")]
        samples: usize,
    },
    /// CSV with columns `r,V[,rVprime]`.
    File {
        path: PathBuf,
        #[serde(default)]
        v_inf: Option<f64>,
    },
}

fn default_r_hi() -> f64 {
    1e5
}

pub(crate) fn default_samples() -> usize {
    65536
}

impl Default for PotentialConfig {
    fn default() -> Self {
        Self::Constant { v_inf: 1.0 }
    }
}

impl PotentialConfig {
    pub fn load(&self) -> Result<PotentialSpec> {
        match self {
            Self::Constant { v_inf } => Ok(PotentialSpec::constant(*v_inf)?),
            Self::ShiftedCoulomb { v1, r_hi, samples } => Ok(PotentialSpec::shifted_coulomb(*v1, *r_hi, *samples)?),
            Self::File { path, v_inf } => io::read_potential(path, *v_inf),
        }
    }
}

/// Both absent means a grid sized from the problem (solve, sweep) or the
/// default grid (fiber, nonexist); a missing half takes its default.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridConfig {
    pub r_max: Option<f64>,
    pub n: Option<usize>,
}

impl GridConfig {
    pub fn is_auto(&self) -> bool {
        self.r_max.is_none() && self.n.is_none()
    }

    pub fn fixed(&self) -> Result<Arc<RadialGrid>> {
        Ok(make_grid(self.r_max.unwrap_or(DEFAULT_R_MAX), self.n.unwrap_or(DEFAULT_N))?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverConfig {
    pub max_iters: usize,
    pub grad_tol: f64,
    pub step_init: f64,
    pub armijo_c: f64,
    pub enforce_positivity: bool,
    /// Initial profile (profile CSV on the solve grid); the best Gaussian otherwise.
    pub seed_profile: Option<PathBuf>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        let d = SolverOptions::default();
        Self {
            max_iters: d.max_iters,
            grad_tol: d.grad_tol,
            step_init: d.step_init,
            armijo_c: d.armijo_c,
            enforce_positivity: d.enforce_positivity,
            seed_profile: None,
        }
    }
}

impl SolverConfig {
    pub fn options(&self) -> Result<SolverOptions> {
        let seed = match &self.seed_profile {
            Some(path) => Seed::Custom(io::read_profile(path)?),
            None => Seed::Gaussian,
        };
        let opts = SolverOptions {
            max_iters: self.max_iters,
            grad_tol: self.grad_tol,
            step_init: self.step_init,
            armijo_c: self.armijo_c,
            seed,
            enforce_positivity: self.enforce_positivity,
        };
        opts.validate()?;
        Ok(opts)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepConfig {
    pub lambdas: Vec<f64>,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self { lambdas: vec![0.5, 0.6, 0.7, 0.8, 0.9, 1.0] }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FiberConfig {
    /// Profile CSV; a Gaussian `e^{−r²/width²}` on the configured grid otherwise.
    pub profile: Option<PathBuf>,
    pub width: f64,
    pub t_min: f64,
    /// Defaults to three times the maximizer.
    pub t_max: Option<f64>,
    pub points: usize,
}

impl Default for FiberConfig {
    fn default() -> Self {
        Self { profile: None, width: 1.0, t_min: 0.0, t_max: None, points: 201 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AlgebraConfig {
    /// Rationals such as `3` or `7/2`.
    pub p: Vec<String>,
    pub lambda: Vec<String>,
    pub k: String,
    /// Also check `λ = (2p−1)/(9p)` for every `p`.
    pub include_critical: bool,
}

impl Default for AlgebraConfig {
    fn default() -> Self {
        let s = |v: &[&str]| v.iter().map(|x| x.to_string()).collect();
        Self {
            p: s(&["21/10", "5/2", "3", "7/2", "4", "9/2", "49/10"]),
            lambda: s(&["-1", "1/10", "19/100", "1/5", "1/2", "1", "2"]),
            k: "1".into(),
            include_critical: true,
        }
    }
}

pub fn parse_rational(s: &str) -> Result<Rational> {
    let t = s.trim();
    let (n, d) = t.split_once('/').unwrap_or((t, "1"));
    let ok = |x: &str| {
        let x = x.trim().strip_prefix('-').unwrap_or(x.trim());
        !x.is_empty() && x.bytes().all(|b| b.is_ascii_digit())
    };
    if !ok(n) || !ok(d) || d.trim().trim_start_matches('-').bytes().all(|b| b == b'0') {
        return Err(Error::usage(format!("`{s}` is not a rational number")));
    }
    format!("{}/{}", n.trim(), d.trim()).parse().map_err(|_| Error::usage(format!("`{s}` is not a rational number")))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NonexistConfig {
    pub samples: usize,
    /// Multiples of the threshold at which the scan runs. Only factors ≥ 1 are gated.
    pub lambda_factors: Vec<f64>,
}

impl Default for NonexistConfig {
    fn default() -> Self {
        Self { samples: 1000, lambda_factors: vec![1.0, 2.0] }
    }
}

impl RunConfig {
    /// Reads a JSON config; relative paths inside it are taken relative to its directory.
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg: Self = serde_json::from_str(&text).map_err(|source| Error::Json { path: path.into(), source })?;
        let base = path.parent().unwrap_or(Path::new(""));
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        fix(&mut cfg.output_dir);
        if let PotentialConfig::File { path, .. } = &mut cfg.potential {
            fix(path);
        }
        if let Some(p) = &mut cfg.solver.seed_profile {
            fix(p);
        }
        if let Some(p) = &mut cfg.fiber.profile {
            fix(p);
        }
        Ok(cfg)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn partial_json_fills_defaults() {
        let cfg: RunConfig = serde_json::from_str(r#"{"params": {"p": 2.5}, "potential": {"kind": "shifted_coulomb", "v1": 2}}"#).unwrap();
        assert_eq!(cfg.params.p, 2.5);
        assert_eq!(cfg.params.a, 1.0);
        assert_eq!(cfg.potential, PotentialConfig::ShiftedCoulomb { v1: 2.0, r_hi: 1e5, samples: 65536 });
        assert!(cfg.grid.is_auto());
        assert_eq!(cfg.seed, 0);
    }

    #[test]
    fn unknown_fields_are_schema_errors() {
        assert!(serde_json::from_str::<RunConfig>(r#"{"parms": {}}"#).is_err());
        assert!(serde_json::from_str::<RunConfig>(r#"{"params": {"q": 1}}"#).is_err());
        assert!(serde_json::from_str::<RunConfig>(r#"{"command": "plot"}"#).is_err());
    }

    #[test]
    fn echo_round_trips() {
        let cfg = RunConfig::default();
        let text = serde_json::to_string(&cfg).unwrap();
        assert_eq!(serde_json::from_str::<RunConfig>(&text).unwrap(), cfg);
    }

    #[test]
    fn rationals() {
        assert_eq!(parse_rational("7/2").unwrap(), kirchhoff_core::algebra::rat(7, 2));
        assert_eq!(parse_rational(" -3 ").unwrap(), kirchhoff_core::algebra::rat(-3, 1));
        assert_eq!(parse_rational("10/4").unwrap(), kirchhoff_core::algebra::rat(5, 2));
        for bad in ["", "1/0", "x", "1.5", "1/-0", "/2"] {
            assert!(parse_rational(bad).is_err(), "{bad}");
        }
    }
}
