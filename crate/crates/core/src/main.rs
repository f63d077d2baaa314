use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use sindy_causal::baselines::{ccm, granger, lingam, pcmci, BaselineParams};
use sindy_causal::dynamics::{by_name, simulate, Trajectory};
use sindy_causal::error::{Error, Result};
use sindy_causal::harness::{
    emit_report, run_experiment1, run_experiment2, run_experiment3, table_from_csv,
    ExperimentConfig, ReportFormat, ResultTable,
};
use sindy_causal::sindy::{coefficients_to_graph, default_library, fit};

#[derive(Parser)]
#[command(
    name = "sindy-causal",
    about = "Simulate benchmark dynamical systems, identify their governing equations, \
             and compare causal-discovery methods",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum DiscoverMethod {
    Sindy,
    Pcmci,
    Lingam,
    Gc,
    Ccm,
}

#[derive(Clone, Copy, ValueEnum)]
enum Which {
    #[value(name = "1")]
    One,
    #[value(name = "2")]
    Two,
    #[value(name = "3")]
    Three,
    All,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Markdown,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate one system and write the trajectory as CSV.
    Simulate {
        #[arg(long)]
        system: String,
        /// Seed for the initial-condition draw.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1000)]
        steps: usize,
        /// Integration step; defaults to the system's catalog value.
        #[arg(long)]
        dt: Option<f64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Fit a sparse model to a trajectory CSV and write the coefficients.
    Fit {
        #[arg(long)]
        traj: PathBuf,
        #[arg(long, default_value_t = 0.1)]
        threshold: f64,
        #[arg(long, default_value_t = 3)]
        degree: u32,
        /// Include sin/cos of each variable in the candidate library.
        #[arg(long)]
        trig: bool,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run one discovery method on a trajectory CSV and write the graph.
    Discover {
        #[arg(long)]
        traj: PathBuf,
        #[arg(long)]
        method: DiscoverMethod,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the benchmark experiments and write result tables as CSV.
    Experiment {
        #[arg(long)]
        which: Which,
        /// JSON experiment configuration; defaults apply when omitted.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Render experiment tables from an output directory.
    Report {
        #[arg(long)]
        in_dir: PathBuf,
        #[arg(long)]
        format: Format,
    },
}

fn write_text(path: &Path, content: &str) -> Result<()> {
    std::fs::write(path, content).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Simulate {
            system,
            seed,
            steps,
            dt,
            out,
        } => {
            let spec = by_name(&system)?;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let ic = spec.sample_ic(&mut rng);
            let dt = dt.unwrap_or(spec.default_dt);
            let traj = simulate(&spec, &ic, dt, steps)?;
            traj.write_csv(&out)?;
            eprintln!("wrote {} samples of {} to {}", steps, system, out.display());
        }
        Command::Fit {
            traj,
            threshold,
            degree,
            trig,
            out,
        } => {
            let traj = Trajectory::read_csv(&traj)?;
            let lib = default_library(traj.n_vars(), degree, trig, Vec::new())?;
            let coefs = fit(&traj, &lib, threshold)?;
            coefs.write_csv(&out)?;
            eprintln!(
                "fitted {} features x {} equations to {}",
                lib.len(),
                traj.n_vars(),
                out.display()
            );
        }
        Command::Discover { traj, method, out } => {
            let traj = Trajectory::read_csv(&traj)?;
            let params = BaselineParams::default();
            let graph = match method {
                DiscoverMethod::Pcmci => pcmci(&traj, &params)?,
                DiscoverMethod::Lingam => lingam(&traj, &params)?,
                DiscoverMethod::Gc => granger(&traj, &params)?,
                DiscoverMethod::Ccm => ccm(&traj, &params)?,
                DiscoverMethod::Sindy => {
                    let lib = default_library(traj.n_vars(), 3, true, Vec::new())?;
                    let coefs = fit(&traj, &lib, 0.1)?;
                    coefficients_to_graph(&coefs)
                }
            };
            graph.write_csv(&out)?;
            print!("{}", graph.edge_list());
            eprintln!("wrote adjacency to {}", out.display());
        }
        Command::Experiment {
            which,
            config,
            out_dir,
        } => {
            let cfg = match config {
                Some(path) => ExperimentConfig::read_json(&path)?,
                None => ExperimentConfig::default(),
            };
            std::fs::create_dir_all(&out_dir).map_err(|source| Error::Io {
                path: out_dir.clone(),
                source,
            })?;
            let mut tables = Vec::new();
            let run_one = |n: u8| -> Result<ResultTable> {
                match n {
                    1 => run_experiment1(&cfg.clone().with_noise(false)),
                    2 => run_experiment2(&cfg.clone().with_noise(true)),
                    _ => run_experiment3(&cfg),
                }
            };
            let selected: &[u8] = match which {
                Which::One => &[1],
                Which::Two => &[2],
                Which::Three => &[3],
                Which::All => &[1, 2, 3],
            };
            for &n in selected {
                eprintln!("running experiment {n}...");
                let table = run_one(n)?;
                for failure in &table.failures {
                    eprintln!("  failure: {failure}");
                }
                tables.push(table);
            }
            for (name, content) in emit_report(&tables, ReportFormat::Csv)? {
                let path = out_dir.join(&name);
                write_text(&path, &content)?;
                eprintln!("wrote {}", path.display());
            }
        }
        Command::Report { in_dir, format } => {
            let mut tables = Vec::new();
            for n in 1..=3 {
                let name = format!("experiment{n}");
                let path = in_dir.join(format!("{name}.csv"));
                if path.exists() {
                    let text = std::fs::read_to_string(&path).map_err(|source| Error::Io {
                        path: path.clone(),
                        source,
                    })?;
                    tables.push(table_from_csv(&name, &text, &path)?);
                }
            }
            if tables.is_empty() {
                return Err(Error::Usage(format!(
                    "no experiment tables found in {}",
                    in_dir.display()
                )));
            }
            let format = match format {
                Format::Csv => ReportFormat::Csv,
                Format::Markdown => ReportFormat::Markdown,
            };
            for (name, content) in emit_report(&tables, format)? {
                let path = in_dir.join(&name);
                write_text(&path, &content)?;
                eprintln!("wrote {}", path.display());
                if format == ReportFormat::Markdown {
                    print!("{content}");
                }
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();

    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };

    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e @ Error::Usage(_)) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
