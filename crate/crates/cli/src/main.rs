use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use stoch_euler::config::{Overrides, RunConfig};
use stoch_euler::ensemble::{run_ensemble, seed_table, EnsembleSpec};
use stoch_euler::{io, verify, Error, SfNormalization};

#[derive(Parser)]
#[command(name = "stoch-euler", version, about = "Stochastic Navier-Stokes ensembles on the 2D torus")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate a single realization (first viscosity, realization 0).
    Run(RunArgs),
    /// Run the full viscosity x realization matrix.
    Ensemble(EnsembleArgs),
    /// Recompute statistics from the raw outputs in a directory.
    Analyze {
        /// Output directory of a previous `run` or `ensemble`.
        dir: PathBuf,
    },
    /// Run the analytic test battery.
    Verify,
}

#[derive(Clone, Copy, ValueEnum)]
enum Normalization {
    Average,
    Integral,
}

impl From<Normalization> for SfNormalization {
    fn from(n: Normalization) -> Self {
        match n {
            Normalization::Average => SfNormalization::Average,
            Normalization::Integral => SfNormalization::Integral,
        }
    }
}

/// Flags shared by `run` and `ensemble`; every flag overrides the file.
#[derive(Args)]
struct Common {
    /// TOML configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Master seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Viscosities (comma separated), replacing the configured list.
    #[arg(long, value_delimiter = ',')]
    nu: Option<Vec<f64>>,
    /// Uniform noise coefficient.
    #[arg(long)]
    sigma: Option<f64>,
    /// Grid points per direction.
    #[arg(long)]
    n: Option<usize>,
    /// Final time.
    #[arg(long)]
    tend: Option<f64>,
    /// Realizations per viscosity.
    #[arg(long)]
    realizations: Option<usize>,
    /// Worker threads (falls back to STOCH_EULER_WORKERS).
    #[arg(long)]
    workers: Option<usize>,
    /// Reuse each realization's Brownian path across viscosities.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    common_noise: Option<bool>,
    /// Continue past unstable realizations and record them.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    skip_failed: Option<bool>,
    /// Ball measure for structure functions.
    #[arg(long, value_enum)]
    sf_normalization: Option<Normalization>,
    /// Leray-project after every step (`--project-every-step=false` to disable).
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    project_every_step: Option<bool>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct EnsembleArgs {
    #[command(flatten)]
    common: Common,
    /// Print the run matrix and seeds without executing anything.
    #[arg(long)]
    dry_run: bool,
}

impl Common {
    fn overrides(&self) -> Overrides {
        Overrides {
            seed: self.seed,
            nu: self.nu.clone(),
            sigma: self.sigma,
            n: self.n,
            t_end: self.tend,
            realizations: self.realizations,
            workers: self.workers,
            common_noise: self.common_noise,
            skip_failed: self.skip_failed,
            sf_normalization: self.sf_normalization.map(Into::into),
            project_every_step: self.project_every_step,
        }
    }

    /// File values, then flag overrides, then validation.
    fn resolve(&self) -> Result<RunConfig, Error> {
        let mut cfg = match &self.config {
            Some(p) => RunConfig::load(p)?,
            None => RunConfig::default(),
        };
        self.overrides().apply(&mut cfg);
        if let Some(out) = &self.out {
            cfg.output_dir = out.clone();
        }
        Ok(cfg)
    }
}

fn execute(spec: &EnsembleSpec, cfg: &RunConfig) -> Result<(), Error> {
    let res = run_ensemble(spec)?;
    io::write_ensemble(&cfg.output_dir, spec, &res, cfg.n_rect)?;
    let sigma_bar = spec.forcing.build(&stoch_euler::Grid::new(spec.grid_n)?)?.sigma_bar();
    for cell in &res.cells {
        let s = &cell.stats;
        let last = s.times.len() - 1;
        println!(
            "nu = {:.6e}: {} realizations, E(T) = {:.6e}, measured input {:.6e} +- {:.1e} (predicted {:.6e})",
            s.nu,
            s.realizations,
            s.energy.mean[last],
            s.measured_input.mean[last],
            s.measured_input.stderr[last],
            sigma_bar * s.times[last]
        );
    }
    for f in &res.failures {
        println!("failed: nu index {} realization {}: {}", f.nu_idx, f.realization, f.error);
    }
    println!("wrote {}", cfg.output_dir.display());
    Ok(())
}

fn dry_run(spec: &EnsembleSpec, cfg: &RunConfig) {
    println!("grid n = {}, t_end = {}, master seed = {}", spec.grid_n, spec.integrator.t_end, spec.master_seed);
    println!(
        "{} viscosities x {} realizations = {} runs on {} workers, output {}",
        spec.viscosities.len(),
        spec.realizations,
        spec.viscosities.len() * spec.realizations,
        spec.workers,
        cfg.output_dir.display()
    );
    println!("nu_idx,nu,realization,initial_stream,noise_stream");
    for s in seed_table(spec) {
        println!(
            "{},{:.6e},{},{:#018x},{:#018x}",
            s.nu_idx, spec.viscosities[s.nu_idx], s.realization, s.initial_stream, s.noise_stream
        );
    }
}

fn main_inner(cli: Cli) -> Result<bool, Error> {
    match cli.command {
        Command::Run(args) => {
            let mut cfg = args.common.resolve()?;
            cfg.realizations = 1;
            cfg.viscosities.truncate(1);
            let spec = cfg.ensemble_spec()?;
            execute(&spec, &cfg)?;
        }
        Command::Ensemble(args) => {
            let cfg = args.common.resolve()?;
            let spec = cfg.ensemble_spec()?;
            if args.dry_run {
                dry_run(&spec, &cfg);
            } else {
                execute(&spec, &cfg)?;
            }
        }
        Command::Analyze { dir } => {
            let cells = io::analyze(&dir)?;
            for s in &cells {
                let last = s.times.len() - 1;
                println!(
                    "nu = {:.6e}: {} realizations, measured input at T {:.6e} +- {:.1e}",
                    s.nu, s.realizations, s.measured_input.mean[last], s.measured_input.stderr[last]
                );
            }
            println!("statistics rewritten in {}", dir.display());
        }
        Command::Verify => {
            let checks = verify::run_all()?;
            for c in &checks {
                println!("{c}");
            }
            return Ok(checks.iter().all(|c| c.passed()));
        }
    }
    Ok(true)
}

fn main() -> ExitCode {
    match main_inner(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
