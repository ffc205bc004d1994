//! Command-line flags and their merge into a [`RunConfig`].

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::config::{default_samples, CommandKind, PotentialConfig, RunConfig, OUTPUT_DIR_ENV};
use crate::error::{Error, Result};

#[derive(Debug, Parser)]
#[command(name = "kirchhoff", version, about = "Radial ground states of Kirchhoff-type equations")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Commands,
}

#[derive(Debug, Subcommand)]
pub enum Commands {
    /// Ground state for a constant or radial potential.
    Solve {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        problem: Problem,
        #[command(flatten)]
        solver: Solver,
    },
    /// c_λ and m_λ^∞ over a list of λ values.
    Sweep {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        problem: Problem,
        #[command(flatten)]
        solver: Solver,
        /// Comma-separated, ascending, within [delta, 1].
        #[arg(long, value_delimiter = ',')]
        lambdas: Option<Vec<f64>>,
    },
    /// The scaling fiber of a profile and its maximum.
    Fiber {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        problem: Problem,
        /// Profile CSV; a Gaussian otherwise.
        #[arg(long)]
        profile: Option<PathBuf>,
        /// Width of the Gaussian profile.
        #[arg(long)]
        width: Option<f64>,
        #[arg(long)]
        t_min: Option<f64>,
        #[arg(long)]
        t_max: Option<f64>,
        #[arg(long)]
        points: Option<usize>,
    },
    /// Exact checks of the multiplier systems over a rational (p, λ) lattice.
    VerifyAlgebra {
        #[command(flatten)]
        common: Common,
        /// Comma-separated rationals in (2, 5).
        #[arg(long, value_delimiter = ',')]
        p: Option<Vec<String>>,
        /// Comma-separated rationals.
        #[arg(long, value_delimiter = ',')]
        lambda: Option<Vec<String>>,
        /// Energy level, a positive rational.
        #[arg(long)]
        k: Option<String>,
        /// Skip the degenerate λ = (2p−1)/(9p).
        #[arg(long)]
        no_critical: bool,
    },
    /// Falsification search for solutions above the nonexistence threshold.
    Nonexist {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        problem: Problem,
        /// Random profiles per λ.
        #[arg(long)]
        samples: Option<usize>,
        /// Comma-separated multiples of λ₀.
        #[arg(long, value_delimiter = ',')]
        lambda_factors: Option<Vec<f64>>,
    },
}

#[derive(Debug, Args)]
pub struct Common {
    /// JSON run configuration; flags override its fields.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output directory (also settable through KIRCHHOFF_OUTPUT_DIR).
    #[arg(long)]
    pub output_dir: Option<PathBuf>,
    /// Seed for randomized scans.
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct Problem {
    #[arg(long)]
    pub a: Option<f64>,
    #[arg(long)]
    pub b: Option<f64>,
    #[arg(long)]
    pub p: Option<f64>,
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long)]
    pub delta: Option<f64>,
    /// Constant potential V ≡ VINF.
    #[arg(long, conflicts_with_all = ["coulomb", "potential_file"])]
    pub vinf: Option<f64>,
    /// V(r) = COULOMB − 1/(r+1).
    #[arg(long, conflicts_with = "potential_file")]
    pub coulomb: Option<f64>,
    /// Potential CSV with columns r,V[,rVprime].
    #[arg(long)]
    pub potential_file: Option<PathBuf>,
    #[arg(long)]
    pub r_max: Option<f64>,
    #[arg(long)]
    pub n: Option<usize>,
}

#[derive(Debug, Args)]
pub struct Solver {
    #[arg(long)]
    pub max_iters: Option<usize>,
    #[arg(long)]
    pub grad_tol: Option<f64>,
    /// Initial profile CSV.
    #[arg(long)]
    pub seed_profile: Option<PathBuf>,
}

fn set<T>(slot: &mut T, value: Option<T>) {
    if let Some(v) = value {
        *slot = v;
    }
}

impl Common {
    fn base(&self) -> Result<RunConfig> {
        match &self.config {
            Some(path) => RunConfig::from_file(path),
            None => Ok(RunConfig::default()),
        }
    }
}

impl Problem {
    fn apply(self, cfg: &mut RunConfig) {
        let p = &mut cfg.params;
        set(&mut p.a, self.a);
        set(&mut p.b, self.b);
        set(&mut p.p, self.p);
        set(&mut p.lambda, self.lambda);
        set(&mut p.delta, self.delta);
        if let Some(v_inf) = self.vinf {
            cfg.potential = PotentialConfig::Constant { v_inf };
        }
        if let Some(v1) = self.coulomb {
            let (r_hi, samples) = match cfg.potential {
                PotentialConfig::ShiftedCoulomb { r_hi, samples, .. } => (r_hi, samples),
                _ => (1e5, default_samples()),
            };
            cfg.potential = PotentialConfig::ShiftedCoulomb { v1, r_hi, samples };
        }
        if let Some(path) = self.potential_file {
            let v_inf = match &cfg.potential {
                PotentialConfig::File { v_inf, .. } => *v_inf,
                _ => None,
            };
            cfg.potential = PotentialConfig::File { path, v_inf };
        }
        if self.r_max.is_some() {
            cfg.grid.r_max = self.r_max;
        }
        if self.n.is_some() {
            cfg.grid.n = self.n;
        }
    }
}

impl Solver {
    fn apply(self, cfg: &mut RunConfig) {
        set(&mut cfg.solver.max_iters, self.max_iters);
        set(&mut cfg.solver.grad_tol, self.grad_tol);
        if self.seed_profile.is_some() {
            cfg.solver.seed_profile = self.seed_profile;
        }
    }
}

/// Resolves the effective configuration: file, then flags; the output directory
/// is taken from the flag, then the environment, then the file.
pub fn resolve(command: Commands) -> Result<(CommandKind, RunConfig)> {
    let env_dir = std::env::var_os(OUTPUT_DIR_ENV).filter(|v| !v.is_empty()).map(PathBuf::from);
    let (kind, common, mut cfg) = match command {
        Commands::Solve { common, problem, solver } => {
            let mut cfg = common.base()?;
            problem.apply(&mut cfg);
            solver.apply(&mut cfg);
            (CommandKind::Solve, common, cfg)
        }
        Commands::Sweep { common, problem, solver, lambdas } => {
            let mut cfg = common.base()?;
            problem.apply(&mut cfg);
            solver.apply(&mut cfg);
            set(&mut cfg.sweep.lambdas, lambdas);
            (CommandKind::Sweep, common, cfg)
        }
        Commands::Fiber { common, problem, profile, width, t_min, t_max, points } => {
            let mut cfg = common.base()?;
            problem.apply(&mut cfg);
            let f = &mut cfg.fiber;
            if profile.is_some() {
                f.profile = profile;
            }
            set(&mut f.width, width);
            set(&mut f.t_min, t_min);
            if t_max.is_some() {
                f.t_max = t_max;
            }
            set(&mut f.points, points);
            (CommandKind::Fiber, common, cfg)
        }
        Commands::VerifyAlgebra { common, p, lambda, k, no_critical } => {
            let mut cfg = common.base()?;
            let al = &mut cfg.algebra;
            set(&mut al.p, p);
            set(&mut al.lambda, lambda);
            set(&mut al.k, k);
            if no_critical {
                al.include_critical = false;
            }
            (CommandKind::VerifyAlgebra, common, cfg)
        }
        Commands::Nonexist { common, problem, samples, lambda_factors } => {
            let mut cfg = common.base()?;
            problem.apply(&mut cfg);
            set(&mut cfg.nonexist.samples, samples);
            set(&mut cfg.nonexist.lambda_factors, lambda_factors);
            (CommandKind::Nonexist, common, cfg)
        }
    };
    if let Some(configured) = cfg.command {
        if configured != kind {
            return Err(Error::usage(format!("config is for `{configured}` but `{kind}` was requested")));
        }
    }
    cfg.command = Some(kind);
    if let Some(dir) = common.output_dir.or(env_dir) {
        cfg.output_dir = dir;
    }
    set(&mut cfg.seed, common.seed);
    Ok((kind, cfg))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(args: &[&str]) -> Commands {
        Cli::try_parse_from(std::iter::once("kirchhoff").chain(args.iter().copied())).unwrap().command
    }

    #[test]
    fn flags_fill_the_config() {
        let (kind, cfg) = resolve(parse(&["solve", "--a", "2", "--p", "2.5", "--vinf", "3", "--n", "4096", "--output-dir", "x"])).unwrap();
        assert_eq!(kind, CommandKind::Solve);
        assert_eq!((cfg.params.a, cfg.params.b, cfg.params.p), (2.0, 1.0, 2.5));
        assert_eq!(cfg.potential, PotentialConfig::Constant { v_inf: 3.0 });
        assert_eq!((cfg.grid.r_max, cfg.grid.n), (None, Some(4096)));
        assert_eq!(cfg.output_dir, PathBuf::from("x"));
    }

    #[test]
    fn lists_and_conflicts() {
        let (_, cfg) = resolve(parse(&["verify-algebra", "--p", "3,7/2", "--lambda", "1"])).unwrap();
        assert_eq!(cfg.algebra.p, ["3", "7/2"]);
        assert!(Cli::try_parse_from(["kirchhoff", "solve", "--vinf", "1", "--coulomb", "2"]).is_err());
    }

    #[test]
    fn config_file_is_overridden_and_command_checked() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.json");
        std::fs::write(&path, r#"{"command": "sweep", "params": {"b": 0.5}, "output_dir": "out"}"#).unwrap();
        let p = path.to_str().unwrap();
        let (_, cfg) = resolve(parse(&["sweep", "--config", p, "--lambdas", "0.5,1"])).unwrap();
        assert_eq!(cfg.params.b, 0.5);
        assert_eq!(cfg.sweep.lambdas, [0.5, 1.0]);
        assert_eq!(cfg.output_dir, dir.path().join("out"));
        assert!(resolve(parse(&["solve", "--config", p])).unwrap_err().is_usage());
    }
}
