use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use couette::diagnostics::{fit, read_csv_series, write_csv, FLOOR};
use couette::equilibria::{stability_report, steady_nonhomogeneous, steady_piecewise};
use couette::ode::{ode_run, write_trajectory_csv};
use couette::presets::{run_preset, PresetName};
use couette::{load_config, run, Error, Parameters, RateModel, Scale, Window};
use serde::Serialize;

/// Simulations of an aging fluid in 1D Couette flow.
#[derive(Debug, Parser)]
#[command(name = "couette", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Integrate a JSON run configuration and write its diagnostics as CSV.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Resolution used for fields missing from the config.
        #[arg(long, value_enum, default_value_t = ScaleArg::Desk)]
        scale: ScaleArg,
        /// Output file; defaults to the config's `output_path`, else stdout.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Print the steady state and its stability quantities as JSON.
    #[command(allow_negative_numbers = true)]
    Steady {
        #[command(flatten)]
        params: ParamArgs,
        #[arg(long)]
        a: f64,
        /// Fluid fraction of a fluid/solid steady state.
        #[arg(long)]
        beta_inf: Option<f64>,
        /// Initial fluidity used for the fluidity lower bound.
        #[arg(long)]
        f0: Option<f64>,
    },
    /// Integrate the spatially uniform system and write `t,tau,f` as CSV.
    #[command(allow_negative_numbers = true)]
    Ode {
        #[command(flatten)]
        params: ParamArgs,
        #[arg(long, default_value_t = 1.0)]
        a: f64,
        #[arg(long, default_value_t = 0.5)]
        tau0: f64,
        #[arg(long, default_value_t = 0.5)]
        f0: f64,
        #[arg(long, default_value_t = 0.01)]
        dt: f64,
        #[arg(long, default_value_t = 40.0)]
        t_end: f64,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Fit a decay rate to one column of a CSV file.
    Rates {
        #[arg(long)]
        input: PathBuf,
        /// Column name, or several joined by `+`.
        #[arg(long)]
        column: String,
        #[arg(long, value_enum)]
        model: ModelArg,
        /// Fit window `lo,hi`.
        #[arg(long, value_parser = parse_window)]
        window: Window,
        /// Samples at or below this value are dropped.
        #[arg(long, default_value_t = FLOOR)]
        floor: f64,
    },
    /// Run a figure experiment and compare fitted rates with the theory.
    Preset {
        #[arg(value_parser = parse_preset)]
        name: PresetName,
        #[arg(long, value_enum, default_value_t = ScaleArg::Desk)]
        scale: ScaleArg,
        /// Directory for the per-run CSVs and `summary.json`.
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ScaleArg {
    Desk,
    Paper,
}

impl From<ScaleArg> for Scale {
    fn from(s: ScaleArg) -> Scale {
        match s {
            ScaleArg::Desk => Scale::Desk,
            ScaleArg::Paper => Scale::Paper,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ModelArg {
    Power,
    Exp,
}

impl From<ModelArg> for RateModel {
    fn from(m: ModelArg) -> RateModel {
        match m {
            ModelArg::Power => RateModel::PowerLaw,
            ModelArg::Exp => RateModel::Exponential,
        }
    }
}

#[derive(Debug, Args)]
struct ParamArgs {
    #[arg(long)]
    rho: Option<f64>,
    #[arg(long)]
    eta: Option<f64>,
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long)]
    g_mod: Option<f64>,
    #[arg(long)]
    xi: Option<f64>,
    #[arg(long)]
    nu: Option<f64>,
}

impl ParamArgs {
    fn resolve(&self) -> couette::Result<Parameters> {
        let d = Parameters::default();
        let p = Parameters {
            rho: self.rho.unwrap_or(d.rho),
            eta: self.eta.unwrap_or(d.eta),
            lambda: self.lambda.unwrap_or(d.lambda),
            g_mod: self.g_mod.unwrap_or(d.g_mod),
            xi: self.xi.unwrap_or(d.xi),
            nu: self.nu.unwrap_or(d.nu),
        };
        p.validate()?;
        Ok(p)
    }
}

fn parse_window(s: &str) -> Result<Window, String> {
    let (lo, hi) = s
        .split_once(',')
        .ok_or_else(|| format!("expected `lo,hi`, got `{s}`"))?;
    let num = |v: &str| {
        v.trim()
            .parse::<f64>()
            .map_err(|e| format!("bad window bound `{v}`: {e}"))
    };
    Window::new(num(lo)?, num(hi)?).map_err(|e| e.to_string())
}

fn parse_preset(s: &str) -> Result<PresetName, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

enum Failure {
    Error(Error),
    RateCheck(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Error(e)
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Error(e.into())
    }
}

fn exit_code(failure: &Failure) -> u8 {
    match failure {
        Failure::Error(e) if e.is_divergence() => 2,
        Failure::Error(_) => 1,
        Failure::RateCheck(_) => 3,
    }
}

fn sink(path: Option<&Path>) -> io::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn print_json<T: Serialize>(value: &T) -> Result<(), Failure> {
    let mut out = io::stdout().lock();
    serde_json::to_writer_pretty(&mut out, value).map_err(io::Error::from)?;
    writeln!(out)?;
    Ok(())
}

#[derive(Serialize)]
struct SteadyReport {
    params: Parameters,
    a: f64,
    tau_inf: f64,
    f_inf: f64,
    steady: couette::SteadyState,
    stability: couette::StabilityReport,
}

fn execute(command: Command) -> Result<(), Failure> {
    match command {
        Command::Run {
            config,
            scale,
            output,
        } => {
            let cfg = load_config(&config, scale.into())?;
            let out = run(&cfg)?;
            let path = output.or_else(|| cfg.output_path.clone());
            let mut w = sink(path.as_deref())?;
            write_csv(&out.records, &mut w)?;
            w.flush()?;
        }
        Command::Steady {
            params,
            a,
            beta_inf,
            f0,
        } => {
            let p = params.resolve()?;
            let steady = match beta_inf {
                Some(b) => steady_piecewise(&p, a, b)?,
                None => steady_nonhomogeneous(&p, a)?,
            };
            print_json(&SteadyReport {
                params: p,
                a,
                tau_inf: steady.tau_inf(),
                f_inf: steady.f_inf(),
                steady,
                stability: stability_report(&p, a, f0)?,
            })?;
        }
        Command::Ode {
            params,
            a,
            tau0,
            f0,
            dt,
            t_end,
            output,
        } => {
            let p = params.resolve()?;
            let trajectory = ode_run(&p, a, tau0, f0, dt, t_end)?;
            let mut w = sink(output.as_deref())?;
            write_trajectory_csv(&trajectory, &mut w)?;
            w.flush()?;
        }
        Command::Rates {
            input,
            column,
            model,
            window,
            floor,
        } => {
            let series = read_csv_series(File::open(&input)?, &column)?;
            let kept: Vec<(f64, f64)> = series.into_iter().filter(|&(_, v)| v > floor).collect();
            print_json(&fit(&kept, window, model.into())?)?;
        }
        Command::Preset {
            name,
            scale,
            out_dir,
        } => {
            let (results, summary) = run_preset(name, scale.into())?;
            fs::create_dir_all(&out_dir)?;
            for r in &results {
                let mut w = BufWriter::new(File::create(out_dir.join(format!("{}.csv", r.label)))?);
                r.write_csv(&mut w)?;
                w.flush()?;
            }
            let json = serde_json::to_string_pretty(&summary).map_err(io::Error::from)?;
            fs::write(out_dir.join("summary.json"), format!("{json}\n"))?;
            println!("{json}");
            for c in summary.checks.iter().filter(|c| !c.passed) {
                eprintln!("{}", c.describe());
            }
            if !summary.passed {
                let failed = summary.checks.iter().filter(|c| !c.passed).count();
                return Err(Failure::RateCheck(format!(
                    "{failed} of {} rate checks failed",
                    summary.checks.len()
                )));
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            // --help and --version
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(1);
        }
    };
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            match &failure {
                Failure::Error(e) => eprintln!("error: {e}"),
                Failure::RateCheck(msg) => eprintln!("error: {msg}"),
            }
            ExitCode::from(exit_code(&failure))
        }
    }
}
