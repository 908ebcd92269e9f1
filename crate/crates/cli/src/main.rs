mod config;
mod csv;
mod error;
mod run;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use difftd::counterexample::alpha_of;
use difftd::instance::InstanceFile;
use difftd::td::{Algorithm, Clock, Schedule};
use difftd::Tolerances;

use config::{EtaStarConfig, RegionConfig, RunConfig, SimulateConfig, Source, TrajectoryConfig};
use error::CliError;

#[derive(Parser)]
#[command(name = "difftd", version, about = "Stability analysis and simulation of differential TD learning")]
struct Cli {
    /// Directory for output files.
    #[arg(long, global = true, env = "DIFFTD_OUTPUT_DIR", default_value = ".")]
    out_dir: PathBuf,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, ValueEnum)]
enum Family {
    Example1,
}

#[derive(Args)]
struct SourceArgs {
    /// Built-in instance family.
    #[arg(long, value_enum, conflicts_with = "instance", requires = "m")]
    family: Option<Family>,
    /// Family parameter.
    #[arg(long)]
    m: Option<usize>,
    /// Instance file.
    #[arg(long)]
    instance: Option<PathBuf>,
    /// JSON object overriding individual tolerances.
    #[arg(long)]
    tolerances: Option<String>,
}

impl SourceArgs {
    fn resolve(&self) -> Result<(Source, Tolerances), CliError> {
        let tol = match &self.tolerances {
            None => Tolerances::default(),
            Some(j) => serde_json::from_str(j).map_err(|e| CliError::Usage(format!("--tolerances: {e}")))?,
        };
        let src = match (&self.family, &self.instance) {
            (Some(Family::Example1), None) => Source::Family {
                m: self.m.ok_or_else(|| CliError::Usage("--family needs --m".into()))?,
            },
            (None, Some(p)) => Source::from_file(InstanceFile::load(p)?),
            _ => return Err(CliError::Usage("give exactly one of --family or --instance".into())),
        };
        src.instance(&tol)?;
        Ok((src, tol))
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum AlgoArg {
    Differential,
    Discounted,
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum Figure {
    Fig1,
    Fig2,
    #[value(name = "appendixB", alias = "appendixb")]
    AppendixB,
}

#[derive(Subcommand)]
enum Cmd {
    /// Exact set of eta for which A_eta is positive stable.
    StabilityRegion {
        #[command(flatten)]
        source: SourceArgs,
        /// Boundary between the bounded panels and the tail (default 10 x instance scale).
        #[arg(long)]
        eta_cap: Option<f64>,
        /// Cross-check the region against a direct test at this many eta values.
        #[arg(long, default_value_t = 0)]
        verify_samples: usize,
    },
    /// Maximal stability threshold and its crossing witnesses.
    EtaStar {
        #[command(flatten)]
        source: SourceArgs,
        #[arg(long, default_value_t = 4000)]
        grid: usize,
        #[arg(long)]
        omega_min: Option<f64>,
        #[arg(long)]
        omega_max: Option<f64>,
    },
    /// Eigenvalues of A_eta / eta_ref for eta = t * eta_ref on an even t grid
    /// (eta_ref is alpha for the family, the instance scale otherwise).
    EigenTrajectory {
        #[command(flatten)]
        source: SourceArgs,
        #[arg(long, default_value_t = 0.05)]
        t_min: f64,
        #[arg(long, default_value_t = 4.0)]
        t_max: f64,
        #[arg(long, default_value_t = 400)]
        points: usize,
    },
    /// Run TD on the two-action experiment MDP built from the instance.
    Simulate {
        #[command(flatten)]
        source: SourceArgs,
        #[command(flatten)]
        sim: SimArgs,
    },
    /// Regenerate the data behind a figure.
    Reproduce {
        #[arg(value_enum)]
        figure: Figure,
        /// Steps per simulated run.
        #[arg(long, default_value_t = 10_000_000)]
        steps: u64,
        /// Grid points for fig1.
        #[arg(long, default_value_t = 400)]
        points: usize,
    },
    /// Rerun the configuration embedded in an output file.
    Rerun {
        file: PathBuf,
        /// Where to write the regenerated file.
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Args)]
struct SimArgs {
    #[arg(long, value_enum, default_value = "differential")]
    algorithm: AlgoArg,
    /// Absolute eta.
    #[arg(long, conflicts_with = "eta_ratio")]
    eta: Option<f64>,
    /// eta as a multiple of alpha (family) or of the instance scale.
    #[arg(long, default_value_t = 2.0)]
    eta_ratio: f64,
    #[arg(long, default_value_t = 0.99)]
    gamma: f64,
    #[arg(long, default_value_t = 10_000_000)]
    steps: u64,
    #[arg(long, value_delimiter = ',', default_value = "0")]
    seeds: Vec<u64>,
    #[arg(long, value_enum, value_delimiter = ',', default_value = "global,local")]
    clocks: Vec<ClockArg>,
    /// Behaviour probability of the target action (default min(kappa_max, 0.5)).
    #[arg(long)]
    kappa: Option<f64>,
    #[arg(long, default_value_t = 0)]
    initial_state: usize,
    #[arg(long, default_value_t = Schedule::PAPER.c)]
    lr_c: f64,
    #[arg(long, default_value_t = Schedule::PAPER.n0)]
    lr_n0: f64,
    #[arg(long, default_value_t = Schedule::PAPER.beta)]
    lr_beta: f64,
    #[arg(long, default_value_t = 1.2)]
    checkpoint_ratio: f64,
    /// Iterate the noiseless mean recursion instead of sampling.
    #[arg(long)]
    expected_update: bool,
    /// Prefix of output file names.
    #[arg(long, default_value = "simulate")]
    prefix: String,
}

#[derive(Clone, Copy, ValueEnum)]
enum ClockArg {
    Global,
    Local,
}

impl From<ClockArg> for Clock {
    fn from(c: ClockArg) -> Self {
        match c {
            ClockArg::Global => Clock::Global,
            ClockArg::Local => Clock::Local,
        }
    }
}

fn simulate_config(source: Source, tol: Tolerances, a: &SimArgs) -> Result<SimulateConfig, CliError> {
    let eta = match a.eta {
        Some(e) => e,
        None => a.eta_ratio * source.eta_ref(&tol)?,
    };
    let algorithm = match a.algorithm {
        AlgoArg::Differential => Algorithm::Differential { eta },
        AlgoArg::Discounted => Algorithm::Discounted { gamma: a.gamma },
    };
    algorithm.validate()?;
    Ok(SimulateConfig {
        source,
        algorithm,
        init_eta: eta,
        schedule: Schedule::new(a.lr_c, a.lr_n0, a.lr_beta)?,
        steps: a.steps,
        checkpoint_ratio: a.checkpoint_ratio,
        seeds: a.seeds.clone(),
        clocks: a.clocks.iter().map(|&c| c.into()).collect(),
        kappa: a.kappa,
        initial_state: a.initial_state,
        expected_update: a.expected_update,
        reference_steps: None,
        tolerances: tol,
    })
}

fn write_files(dir: &Path, files: &[(String, String)]) -> Result<(), CliError> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
    for (name, text) in files {
        let p = dir.join(name);
        std::fs::write(&p, text).map_err(|e| CliError::Io(format!("{}: {e}", p.display())))?;
        println!("wrote {}", p.display());
    }
    Ok(())
}

const FIG1_GP: &str = "set datafile separator ','
set multiplot layout 1,2
set xlabel 'Re'
set ylabel 'Im'
plot 'fig1_trajectory.csv' using ($6 == 0 ? $4 : 1/0):5 with points pt 7 ps 0.3 notitle
set xlabel 't = eta / alpha'
set ylabel 'Re'
plot 'fig1_trajectory.csv' using ($6 == 0 ? $2 : 1/0):4 with points pt 7 ps 0.3 notitle, 0 notitle
unset multiplot
";

fn simulate_gp(prefix: &str, seeds: &[u64]) -> String {
    let mut s = String::from("set datafile separator ','\nset logscale xy\nset xlabel 't'\nset ylabel 'dist(v, span e)'\nplot ");
    let mut parts = Vec::new();
    for &seed in seeds {
        for clock in ["global", "local"] {
            parts.push(format!(
                "'{prefix}_{clock}_seed{seed}.csv' using 1:3 with lines title '{clock} seed {seed}'"
            ));
        }
    }
    s.push_str(&parts.join(", \\\n     "));
    s.push('\n');
    s
}

fn reproduce(figure: Figure, steps: u64, points: usize, dir: &Path) -> Result<String, CliError> {
    let source = Source::Family { m: 23 };
    let tol = Tolerances::default();
    let alpha = alpha_of(23)?;
    if figure == Figure::Fig1 {
        let cfg = RunConfig::EigenTrajectory(TrajectoryConfig {
            source,
            eta_ref: alpha,
            t_min: 0.0,
            t_max: 4.0,
            points,
            tolerances: tol,
        });
        let out = run::execute(&cfg, Some("fig1_trajectory"))?;
        write_files(dir, &out.files)?;
        write_files(dir, &[("fig1.gp".into(), FIG1_GP.into())])?;
        return Ok(out.summary);
    }
    let (prefix, seeds): (&str, Vec<u64>) = match figure {
        Figure::Fig2 => ("fig2", vec![0]),
        _ => ("appendixB", (1..=9).collect()),
    };
    let cfg = RunConfig::Simulate(SimulateConfig {
        source,
        algorithm: Algorithm::Differential { eta: 2.0 * alpha },
        init_eta: 2.0 * alpha,
        schedule: Schedule::PAPER,
        steps,
        checkpoint_ratio: 1.2,
        seeds: seeds.clone(),
        clocks: vec![Clock::Global, Clock::Local],
        kappa: None,
        initial_state: 0,
        expected_update: false,
        reference_steps: Some(100_000_000_000),
        tolerances: tol,
    });
    let out = run::execute(&cfg, Some(prefix))?;
    write_files(dir, &out.files)?;
    write_files(dir, &[(format!("{prefix}.gp"), simulate_gp(prefix, &seeds))])?;
    Ok(out.summary)
}

fn rerun(file: &Path, out: &Path) -> Result<String, CliError> {
    let text = std::fs::read_to_string(file).map_err(|e| CliError::Io(format!("{}: {e}", file.display())))?;
    let cfg = csv::read_config(&text)?;
    let res = run::execute(&cfg, None)?;
    let [(_, body)] = res.files.as_slice() else {
        return Err(CliError::Usage("embedded config produces more than one file".into()));
    };
    std::fs::write(out, body).map_err(|e| CliError::Io(format!("{}: {e}", out.display())))?;
    println!("wrote {}", out.display());
    Ok(res.summary)
}

fn main_inner(cli: Cli) -> Result<String, CliError> {
    let dir = cli.out_dir;
    let cfg = match cli.cmd {
        Cmd::Reproduce { figure, steps, points } => return reproduce(figure, steps, points, &dir),
        Cmd::Rerun { file, out } => return rerun(&file, &out),
        Cmd::StabilityRegion {
            source,
            eta_cap,
            verify_samples,
        } => {
            let (source, tolerances) = source.resolve()?;
            let eta_cap = match eta_cap {
                Some(c) => c,
                None => 10.0 * source.instance(&tolerances)?.scale(),
            };
            RunConfig::StabilityRegion(RegionConfig {
                source,
                eta_cap,
                verify_samples,
                tolerances,
            })
        }
        Cmd::EtaStar {
            source,
            grid,
            omega_min,
            omega_max,
        } => {
            let (source, tolerances) = source.resolve()?;
            RunConfig::EtaStar(EtaStarConfig {
                source,
                omega_min,
                omega_max,
                grid,
                tolerances,
            })
        }
        Cmd::EigenTrajectory {
            source,
            t_min,
            t_max,
            points,
        } => {
            let (source, tolerances) = source.resolve()?;
            RunConfig::EigenTrajectory(TrajectoryConfig {
                eta_ref: source.eta_ref(&tolerances)?,
                source,
                t_min,
                t_max,
                points,
                tolerances,
            })
        }
        Cmd::Simulate { source, sim } => {
            let (source, tolerances) = source.resolve()?;
            let cfg = simulate_config(source, tolerances, &sim)?;
            let out = run::execute(&RunConfig::Simulate(cfg), Some(&sim.prefix))?;
            write_files(&dir, &out.files)?;
            return Ok(out.summary);
        }
    };
    let out = run::execute(&cfg, None)?;
    write_files(&dir, &out.files)?;
    Ok(out.summary)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match main_inner(cli) {
        Ok(summary) => {
            println!("{summary}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
