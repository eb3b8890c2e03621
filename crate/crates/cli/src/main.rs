//! `lagrange-pc`: run private-computation experiments, print rate tables,
//! audit privacy and dump query schedules.
//!
//! Exit codes: 0 success, 1 invalid input, 2 decoding failure or wrong
//! result, 3 privacy audit failure.

mod audit_config;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand, ValueEnum};

use lagrange_pc::experiment::{run_experiment, ExperimentConfig, ExperimentError, SchemeKind};
use lagrange_pc::general::QueryPlan;
use lagrange_pc::par::Execution;
use lagrange_pc::rates::{alpha_grid, asymptotic_table, sweep, AsymptoticRow, RateRow, SweepBounds};
use lagrange_pc::systematic::build_schedule;

use audit_config::AuditConfig;

#[derive(Parser)]
#[command(name = "lagrange-pc", version, about = "Private polynomial computation on Lagrange-encoded data")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Csv,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment end to end through the simulated servers
    Run {
        #[arg(long)]
        config: PathBuf,
        /// replaces the master seed of the config
        #[arg(long)]
        seed: Option<u64>,
        /// where to write the result record (TOML); defaults to `output` in
        /// the config
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
        /// evaluate servers one at a time
        #[arg(long)]
        sequential: bool,
    },
    /// Print exact rates of both schemes over a parameter sweep
    Rates {
        #[arg(long, default_value_t = 30)]
        n_max: usize,
        #[arg(long, default_value_t = 5)]
        k_max: usize,
        #[arg(long, default_value_t = 3)]
        g_max: usize,
        #[arg(long, default_value_t = 3)]
        t_max: usize,
        #[arg(long, default_value_t = 2)]
        e_max: usize,
        #[arg(long, default_value_t = 2)]
        p_max: usize,
        #[arg(long, default_value_t = 2)]
        a_max: usize,
        /// print the limiting-rate table for K = alpha N, T = beta N instead
        #[arg(long)]
        asymptotic: bool,
        #[arg(long, default_value_t = 2)]
        g: usize,
        #[arg(long, default_value_t = 0.05)]
        beta: f64,
        #[arg(long, default_value_t = 0.05)]
        step: f64,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
    },
    /// Exhaustively audit function or data privacy on a tiny instance
    Audit {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        sequential: bool,
    },
    /// Print the monomial schedule (general) or index sets (systematic)
    ScheduleDump {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// A failure with its exit code.
struct Failure {
    code: u8,
    err: anyhow::Error,
}

impl<E: Into<anyhow::Error>> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure { code: 1, err: e.into() }
    }
}

fn read_toml<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    toml::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

fn emit(text: &str, out: Option<&Path>) -> Result<()> {
    match out {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn exec(sequential: bool) -> Execution {
    if sequential {
        Execution::Sequential
    } else {
        Execution::default()
    }
}

fn cmd_run(config: &Path, seed: Option<u64>, out: Option<PathBuf>, format: Format, sequential: bool) -> Result<(), Failure> {
    let mut cfg: ExperimentConfig = read_toml(config)?;
    if let Some(s) = seed {
        cfg.seeds.master = s;
    }
    let record = match run_experiment(&cfg, exec(sequential)) {
        Ok(r) => r,
        Err(e @ ExperimentError::Decode(_)) => return Err(Failure { code: 2, err: e.into() }),
        Err(e) => return Err(e.into()),
    };
    let out = out.or(cfg.output.as_ref().map(PathBuf::from));
    if let Some(path) = &out {
        let text = toml::to_string(&record).context("serializing the result record")?;
        fs::write(path, text).with_context(|| format!("writing {}", path.display()))?;
    }
    match format {
        Format::Text => print!("{}", record.summary()),
        Format::Csv => {
            println!("b,k,value,expected");
            for (b, (got, want)) in record.evaluations.iter().zip(&record.expected).enumerate() {
                for (k, (g, w)) in got.iter().zip(want).enumerate() {
                    println!("{},{},{g},{w}", b + 1, k + 1);
                }
            }
        }
    }
    if record.correct {
        Ok(())
    } else {
        Err(Failure { code: 2, err: anyhow::anyhow!("reconstructed values differ from direct evaluation") })
    }
}

#[allow(clippy::too_many_arguments)]
fn cmd_rates(bounds: SweepBounds, asymptotic: bool, g: usize, beta: f64, step: f64, out: Option<PathBuf>, format: Format) -> Result<(), Failure> {
    let mut text = String::new();
    if asymptotic {
        let rows = asymptotic_table(g, beta, &alpha_grid(g, beta, step))?;
        match format {
            Format::Csv => {
                text += AsymptoticRow::CSV_HEADER;
                text.push('\n');
                for r in &rows {
                    text += &r.csv();
                    text.push('\n');
                }
            }
            Format::Text => {
                for r in &rows {
                    text += &format!(
                        "alpha={:.4} beta={} G={} general={:.6} systematic={:.6}\n",
                        r.alpha, r.beta, r.g, r.general, r.systematic
                    );
                }
            }
        }
    } else {
        let rows = sweep(&bounds, Execution::default());
        match format {
            Format::Csv => {
                text += RateRow::CSV_HEADER;
                text.push('\n');
                for r in &rows {
                    text += &r.csv();
                    text.push('\n');
                }
            }
            Format::Text => {
                for r in &rows {
                    let p = r.params;
                    let sys = r.systematic.map_or("-".to_string(), |s| s.to_string());
                    text += &format!(
                        "N={} K={} G={} T={} E={} P={} A={} general={} systematic={} winner={:?}\n",
                        p.n, p.k, p.g, p.t, p.e, p.p, p.a, r.general, sys, r.winner
                    );
                }
            }
        }
    }
    emit(&text, out.as_deref())?;
    Ok(())
}

fn cmd_audit(config: &Path, out: Option<PathBuf>, sequential: bool) -> Result<(), Failure> {
    let cfg: AuditConfig = read_toml(config)?;
    let spec = cfg.to_spec()?;
    let report = lagrange_pc::audit::audit(&spec, exec(sequential))?;
    let mut text = report.to_string();
    text.push('\n');
    emit(&text, out.as_deref())?;
    if report.passed() {
        Ok(())
    } else {
        let failing: Vec<String> = report.failing().iter().map(|v| format!("{:?}", v.subset)).collect();
        Err(Failure { code: 3, err: anyhow::anyhow!("privacy audit failed for subsets {}", failing.join(" ")) })
    }
}

fn cmd_schedule_dump(config: &Path, out: Option<PathBuf>) -> Result<(), Failure> {
    let cfg: ExperimentConfig = read_toml(config)?;
    let mut text = match cfg.scheme {
        SchemeKind::General => QueryPlan::build(cfg.general_config()?.derived()).render_zeta(),
        SchemeKind::Systematic => build_schedule(&cfg.systematic_config()?.params).to_string(),
    };
    text.push('\n');
    emit(&text, out.as_deref())?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run { config, seed, out, format, sequential } => cmd_run(&config, seed, out, format, sequential),
        Command::Rates { n_max, k_max, g_max, t_max, e_max, p_max, a_max, asymptotic, g, beta, step, out, format } => {
            let bounds = SweepBounds { n_max, k_max, g_max, t_max, e_max, p_max, a_max };
            cmd_rates(bounds, asymptotic, g, beta, step, out, format)
        }
        Command::Audit { config, out, sequential } => cmd_audit(&config, out, sequential),
        Command::ScheduleDump { config, out } => cmd_schedule_dump(&config, out),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure { code, err }) => {
            eprintln!("error: {err:#}");
            ExitCode::from(code)
        }
    }
}
