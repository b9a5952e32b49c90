use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use homogscat::correctors::{homogenize_ensemble, HomogenizedCoeffs};
use homogscat::expansion::heterogeneous_coefficients;
use homogscat::fem::build_box_mesh;
use homogscat::harness::{
    ensemble_settings, homog_csv, open_cache, rerender, run_sweep, write_report, Config, ConfigFile,
};
use homogscat::microstructure::{sample_matern2, Square};
use homogscat::scattering::{
    format_values_csv, parse_points, ExteriorRepresentation, HelmholtzOperator, PlaneWave,
    SolutionKind, TruncationClosure,
};
use homogscat::Error;

#[derive(Parser)]
#[command(
    name = "homogscat",
    version,
    about = "Homogenization and scattering by random composites"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Master seed, overrides `run.seed`.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Configuration file of `section.key = value` lines.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Samples one microstructure and writes `microstructure.txt`.
    Sample {
        #[command(flatten)]
        common: Common,
        /// Realization index under the master seed.
        #[arg(long, default_value_t = 0)]
        realization: usize,
    },
    /// Estimates the homogenized coefficients and writes `homog.csv`.
    Homogenize {
        #[command(flatten)]
        common: Common,
    },
    /// Solves the heterogeneous problem for one realization at
    /// `solve.epsilon`; writes `field.csv` and, given points, `exterior.csv`.
    Solve {
        #[command(flatten)]
        common: Common,
        /// Observation points (`x y` per line), overrides `solve.points`.
        #[arg(long)]
        points: Option<PathBuf>,
    },
    /// Runs the full study and writes every report file.
    Sweep {
        #[command(flatten)]
        common: Common,
    },
    /// Re-renders `rates.csv` and `decay.svg` from an `errors.csv`.
    Report {
        #[command(flatten)]
        common: Common,
        /// Defaults to `<out>/errors.csv`.
        #[arg(long)]
        errors: Option<PathBuf>,
    },
}

enum Failure {
    Rows(usize),
    Error(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Self::Error(e)
    }
}

fn load_config(common: &Common) -> Result<Config, Error> {
    let mut config = match &common.config {
        Some(p) => Config::from_file(ConfigFile::load(p)?)?,
        None => Config::default(),
    };
    if let Some(s) = common.seed {
        config.master_seed = s;
    }
    Ok(config)
}

fn write(path: &Path, text: &str) -> Result<(), Error> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir)?;
    }
    fs::write(path, text)?;
    eprintln!("wrote {}", path.display());
    Ok(())
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Sample {
            common,
            realization,
        } => {
            let config = load_config(&common)?;
            let settings = ensemble_settings(&config, realization + 1)?;
            let seed = settings.realization_seed(realization);
            let ms = sample_matern2(&settings.process.with_seed(seed))?;
            eprintln!(
                "{} inclusions, volume fraction {:.4}",
                ms.len(),
                homogscat::microstructure::volume_fraction(&ms)
            );
            write(&common.out.join("microstructure.txt"), &ms.to_text())?;
        }
        Command::Homogenize { common } => {
            let config = load_config(&common)?;
            let settings = ensemble_settings(&config, config.homogenize_realizations)?;
            let hom = homogenize_ensemble(&settings, open_cache(&config)?.as_ref())?;
            print_homogenized(&hom);
            write(&common.out.join("homog.csv"), &homog_csv(&hom)?)?;
        }
        Command::Solve { common, points } => {
            let config = load_config(&common)?;
            let settings = ensemble_settings(&config, 1)?;
            let ms = sample_matern2(&settings.process.with_seed(settings.realization_seed(0)))?;
            let eps = config.solve_epsilon;
            let space = build_box_mesh(
                config.box_side,
                config.box_step(eps),
                Some(Square::centered(config.scatterer_side)),
            )?;
            let (a, n) = heterogeneous_coefficients(&space, &ms, &config.params, eps)?;
            let closure = TruncationClosure {
                box_side: config.box_side,
                background_n: config.params.n_background,
            };
            let incident = PlaneWave::from_angle(config.wavenumber, config.incident_angle)?;
            let start = Instant::now();
            let op = HelmholtzOperator::new(space.clone(), closure, a, &n, config.wavenumber)?;
            let sol = op.solve_incident(
                &incident,
                SolutionKind::Heterogeneous {
                    epsilon: eps,
                    seed: settings.realization_seed(0),
                },
            )?;
            eprintln!(
                "solved {} unknowns in {:.2} s",
                space.n_dofs(),
                start.elapsed().as_secs_f64()
            );
            write(
                &common.out.join("field.csv"),
                &format_values_csv(&space.dof_points(), sol.field.values()),
            )?;
            if let Some(p) = points.or(config.solve_points.clone()) {
                let pts = parse_points(&fs::read_to_string(&p).map_err(Error::from)?)?;
                let rep = ExteriorRepresentation::from_solution(&op, &sol, &incident)?;
                let values = rep.eval_many(&pts)?;
                write(
                    &common.out.join("exterior.csv"),
                    &format_values_csv(&pts, &values),
                )?;
            }
        }
        Command::Sweep { common } => {
            let config = load_config(&common)?;
            let report = run_sweep(&config)?;
            print_homogenized(&report.homogenized);
            write_report(&common.out, &report)?;
            for (c, fit) in report.rates() {
                match fit {
                    Some(f) => eprintln!(
                        "{:<16} exponent {:.3}  residual {:.3}",
                        c.name(),
                        f.exponent,
                        f.residual
                    ),
                    None => eprintln!("{:<16} no fit", c.name()),
                }
            }
            eprintln!("wrote report to {}", common.out.display());
            if !report.failures.is_empty() {
                for f in &report.failures {
                    eprintln!("failed row eps={} seed={}: {}", f.epsilon, f.seed, f.reason);
                }
                return Err(Failure::Rows(report.failures.len()));
            }
        }
        Command::Report { common, errors } => {
            load_config(&common)?;
            let errors = errors.unwrap_or_else(|| common.out.join("errors.csv"));
            let rows = rerender(&errors, &common.out)?;
            eprintln!("rendered {} rows into {}", rows.len(), common.out.display());
        }
    }
    Ok(())
}

fn print_homogenized(hom: &HomogenizedCoeffs) {
    let a = hom.a_hom;
    println!(
        "a_hom = [[{:.6}, {:.6}], [{:.6}, {:.6}]]  n_hom = {:.6}  ({} realizations)",
        a[0][0], a[0][1], a[1][0], a[1][1], hom.n_hom, hom.n_realizations
    );
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(2)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Rows(n)) => {
            eprintln!("{n} rows failed");
            ExitCode::from(1)
        }
        Err(Failure::Error(e @ Error::Config(_))) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(Failure::Error(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
