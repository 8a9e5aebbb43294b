//! `lab`: batch experiment driver. Every operation of the core crate is
//! reachable through a subcommand taking a JSON config (`schema: 1`) and
//! writing CSV/JSON artifacts into the output directory.
//!
//! Exit codes: 0 success, 2 validation error, 3 numeric failure. Errors
//! print machine-readable JSON on stderr. Log level comes from LAB_LOG.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use anosov_lab::config;
use anosov_lab::emit::print_summary;
use anosov_lab::error::{invalid, LabError};
use anosov_lab::run::{algebra, cohomology, geometry, Ctx};

#[derive(Parser)]
#[command(name = "lab", version, about = "hyperbolic torus dynamics experiment driver")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// JSON experiment config.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory for artifacts.
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Worker threads for parallel sweeps.
    #[arg(long, default_value_t = 1)]
    threads: usize,
    /// Seed for randomized sampling; mandatory determinism knob.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Run the subcommand's built-in checks instead of a config.
    #[arg(long, default_value_t = false)]
    selftest: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum CounterexampleKind {
    Dllave,
    Reducible,
    Complex,
}

#[derive(Clone, Copy, ValueEnum)]
enum FoliationKind {
    Leaf,
    Tube,
    Density,
}

#[derive(Subcommand)]
enum Command {
    /// Eigenvalues and hyperbolicity of an integer matrix.
    Spectrum {
        #[command(flatten)]
        common: Common,
        /// Bare row-major integer matrix JSON (alternative to --config).
        #[arg(long)]
        matrix: Option<PathBuf>,
    },
    /// Factor a monic integer polynomial over the integers.
    Factor {
        #[command(flatten)]
        common: Common,
    },
    /// Adapted integer basis and invariant blocks of a reducible matrix.
    Blockdiag {
        #[command(flatten)]
        common: Common,
    },
    /// Periodic points of a linear automorphism or orbits of a skew product.
    Periodic {
        #[command(flatten)]
        common: Common,
    },
    /// Regularity counterexample pipelines.
    Counterexample {
        kind: CounterexampleKind,
        #[command(flatten)]
        common: Common,
    },
    /// Solve the fiber cohomological equation and report its residual.
    Coboundary {
        #[command(flatten)]
        common: Common,
    },
    /// Exact Fourier-orbit evaluation of the Lipschitz obstruction.
    Condition {
        #[command(flatten)]
        common: Common,
    },
    /// Compare periodic data of two skew products.
    PdCheck {
        #[command(flatten)]
        common: Common,
    },
    /// Directional Hölder/Lipschitz exponent of the conjugacy function.
    Regularity {
        #[command(flatten)]
        common: Common,
    },
    /// Leaf integration, tube coverage and line-density probes.
    Foliation {
        kind: FoliationKind,
        #[command(flatten)]
        common: Common,
    },
    /// u-Gibbs empirical measure histogram.
    Gibbs {
        #[command(flatten)]
        common: Common,
    },
    /// Strong-foliation modulus samples and model comparison.
    Moduli {
        #[command(flatten)]
        common: Common,
    },
}

fn ctx_of(common: &Common) -> Ctx {
    Ctx {
        out: common.out.clone(),
        seed: common.seed,
        threads: common.threads,
    }
}

fn config_path(common: &Common) -> Result<&PathBuf, LabError> {
    common
        .config
        .as_ref()
        .ok_or_else(|| invalid("--config is required (or pass --selftest)"))
}

fn dispatch(cli: Cli) -> Result<serde_json::Value, LabError> {
    match cli.command {
        Command::Spectrum { common, matrix } => {
            let ctx = ctx_of(&common);
            if common.selftest {
                return algebra::spectrum_selftest(&ctx);
            }
            if let Some(path) = matrix {
                let rows: Vec<Vec<i64>> = config::load(&path)?;
                let m = config::to_matrix(&rows)?;
                return algebra::spectrum_of(&ctx, &m);
            }
            algebra::spectrum(&ctx, config::load(config_path(&common)?)?)
        }
        Command::Factor { common } => {
            let ctx = ctx_of(&common);
            if common.selftest {
                return algebra::factor_selftest(&ctx);
            }
            algebra::factor(&ctx, config::load(config_path(&common)?)?)
        }
        Command::Blockdiag { common } => {
            let ctx = ctx_of(&common);
            if common.selftest {
                return algebra::blockdiag_selftest(&ctx);
            }
            algebra::blockdiag(&ctx, config::load(config_path(&common)?)?)
        }
        Command::Periodic { common } => {
            let ctx = ctx_of(&common);
            if common.selftest {
                return algebra::periodic_selftest(&ctx);
            }
            algebra::periodic(&ctx, config::load(config_path(&common)?)?)
        }
        Command::Counterexample { kind, common } => {
            let ctx = ctx_of(&common);
            if common.selftest {
                return cohomology::counterexample_selftest(&ctx);
            }
            let path = config_path(&common)?;
            match kind {
                CounterexampleKind::Dllave => {
                    cohomology::counterexample_dllave(&ctx, config::load(path)?)
                }
                CounterexampleKind::Reducible => {
                    cohomology::counterexample_reducible(&ctx, config::load(path)?)
                }
                CounterexampleKind::Complex => {
                    cohomology::counterexample_complex(&ctx, config::load(path)?)
                }
            }
        }
        Command::Coboundary { common } => {
            let ctx = ctx_of(&common);
            if common.selftest {
                return cohomology::coboundary_selftest(&ctx);
            }
            cohomology::coboundary(&ctx, config::load(config_path(&common)?)?)
        }
        Command::Condition { common } => {
            let ctx = ctx_of(&common);
            if common.selftest {
                return cohomology::condition_selftest(&ctx);
            }
            cohomology::condition(&ctx, config::load(config_path(&common)?)?)
        }
        Command::PdCheck { common } => {
            let ctx = ctx_of(&common);
            if common.selftest {
                return cohomology::pd_check_selftest(&ctx);
            }
            cohomology::pd_check(&ctx, config::load(config_path(&common)?)?)
        }
        Command::Regularity { common } => {
            let ctx = ctx_of(&common);
            if common.selftest {
                return cohomology::regularity_selftest(&ctx);
            }
            cohomology::regularity_run(&ctx, config::load(config_path(&common)?)?)
        }
        Command::Foliation { kind, common } => {
            let ctx = ctx_of(&common);
            if common.selftest {
                return geometry::foliation_selftest(&ctx);
            }
            let path = config_path(&common)?;
            match kind {
                FoliationKind::Leaf => geometry::foliation_leaf(&ctx, config::load(path)?),
                FoliationKind::Tube => geometry::foliation_tube(&ctx, config::load(path)?),
                FoliationKind::Density => geometry::foliation_density(&ctx, config::load(path)?),
            }
        }
        Command::Gibbs { common } => {
            let ctx = ctx_of(&common);
            if common.selftest {
                return geometry::gibbs_selftest(&ctx);
            }
            geometry::gibbs(&ctx, config::load(config_path(&common)?)?)
        }
        Command::Moduli { common } => {
            let ctx = ctx_of(&common);
            if common.selftest {
                return geometry::moduli_selftest(&ctx);
            }
            geometry::moduli(&ctx, config::load(config_path(&common)?)?)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("LAB_LOG", "warn"))
        .format_timestamp(None)
        .init();
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(summary) => {
            print_summary(&summary);
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("{}", e.to_json());
            log::error!("{e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
