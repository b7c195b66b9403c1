//! `cll`: run the central-scheme benchmarks and write their outputs.

mod commands;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use cll_core::bench_suite::all_problems;
use cll_core::diagnostics::{fmt_num, ConvergenceFit};
use cll_core::error::Error;
use cll_core::io::{parse_config_text, RunConfig};

use commands::Artifact;

#[derive(Parser, Debug)]
#[command(name = "cll", version, about = "Central schemes with minmod and van Albada limiters")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run one problem and write the final field, snapshots and report.
    Solve(RunArgs),
    /// Run a problem at several resolutions and tabulate L1 errors.
    Convergence {
        #[command(flatten)]
        run: RunArgs,
        /// Comma-separated resolutions, at least three.
        #[arg(long, value_delimiter = ',', required = true)]
        ns: Vec<usize>,
    },
    /// Run a problem once per limiter and summarize the L1 errors.
    Compare {
        #[command(flatten)]
        run: RunArgs,
        /// Comma-separated limiter names.
        #[arg(long, value_delimiter = ',', required = true)]
        limiters: Vec<String>,
    },
    /// List the benchmark problems.
    ListProblems,
    /// Per-step generalized CFL ratios of the staggered scheme.
    TvdReport {
        #[command(flatten)]
        run: RunArgs,
        #[arg(long, default_value_t = 0.5)]
        bound: f64,
    },
}

#[derive(Args, Debug, Clone, Default)]
struct RunArgs {
    /// Flat key=value file; flags override its entries.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    problem: Option<String>,
    /// nt, cu or lxf.
    #[arg(long)]
    scheme: Option<String>,
    /// minmod, minmod-theta, va or va-eps.
    #[arg(long)]
    limiter: Option<String>,
    #[arg(long)]
    theta: Option<f64>,
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long)]
    cfl: Option<f64>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    ny: Option<usize>,
    #[arg(long)]
    t_end: Option<f64>,
    #[arg(long, env = "CLL_OUT_DIR")]
    out_dir: Option<PathBuf>,
    /// Comma-separated snapshot times.
    #[arg(long, value_delimiter = ',')]
    snapshots: Vec<f64>,
    /// characteristic or componentwise.
    #[arg(long)]
    basis: Option<String>,
    /// knp or kt.
    #[arg(long)]
    speed_mode: Option<String>,
    /// ssprk3 or euler.
    #[arg(long)]
    integrator: Option<String>,
}

impl RunArgs {
    /// Defaults, then the config file, then flags.
    fn to_config(&self) -> Result<RunConfig> {
        let mut cfg = RunConfig::default();
        if let Some(path) = &self.config {
            let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            cfg.apply_map(&parse_config_text(&text)?)?;
        }
        let flags: [(&str, Option<String>); 13] = [
            ("problem", self.problem.clone()),
            ("scheme", self.scheme.clone()),
            ("limiter", self.limiter.clone()),
            ("theta", self.theta.map(|v| v.to_string())),
            ("eps", self.eps.map(|v| v.to_string())),
            ("cfl", self.cfl.map(|v| v.to_string())),
            ("n", self.n.map(|v| v.to_string())),
            ("ny", self.ny.map(|v| v.to_string())),
            ("t_end", self.t_end.map(|v| v.to_string())),
            ("out_dir", self.out_dir.as_ref().map(|p| p.display().to_string())),
            ("basis", self.basis.clone()),
            ("speed_mode", self.speed_mode.clone()),
            ("integrator", self.integrator.clone()),
        ];
        for (key, value) in flags {
            if let Some(v) = value {
                cfg.set(key, &v)?;
            }
        }
        if !self.snapshots.is_empty() {
            cfg.snapshots = self.snapshots.clone();
        }
        Ok(cfg)
    }
}

fn out_dir(cfg: &RunConfig) -> PathBuf {
    cfg.out_dir.clone().unwrap_or_else(|| PathBuf::from("."))
}

fn write_artifacts(dir: &Path, files: &[Artifact]) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    for f in files {
        let path = dir.join(&f.name);
        fs::write(&path, &f.contents).with_context(|| format!("writing {}", path.display()))?;
        println!("wrote {}", path.display());
    }
    Ok(())
}

fn cmd_solve(args: &RunArgs) -> Result<()> {
    let cfg = args.to_config()?;
    let run = cfg.resolve()?;
    log::info!("{} {}", run.problem.name, commands::scheme_options_summary(&run.opts));
    let files = commands::solve(&run)?;
    write_artifacts(&out_dir(&cfg), &files)
}

fn cmd_convergence(args: &RunArgs, ns: &[usize]) -> Result<()> {
    let cfg = args.to_config()?;
    let run = cfg.resolve()?;
    let table = commands::convergence(&run, ns)?;
    let name = format!("{}_convergence.csv", run.stem());
    write_artifacts(
        &out_dir(&cfg),
        &[Artifact {
            name,
            contents: commands::convergence_csv(&table).into_bytes(),
        }],
    )?;
    match table.fit {
        ConvergenceFit::Order(o) => println!("fitted order {o:.3} (reference: {})", table.reference),
        ConvergenceFit::ExactMatch => println!("exact match at some resolution; no order fitted"),
    }
    Ok(())
}

fn cmd_compare(args: &RunArgs, limiters: &[String]) -> Result<()> {
    let mut unique: Vec<&String> = Vec::new();
    for l in limiters.iter().filter(|l| !l.trim().is_empty()) {
        if !unique.contains(&l) {
            unique.push(l);
        }
    }
    if unique.is_empty() {
        return Err(Error::Config("compare needs at least one limiter".into()).into());
    }
    let mut summary = String::from("limiter,l1_error\n");
    let mut dir = None;
    for l in unique {
        let mut a = args.clone();
        a.limiter = Some(l.clone());
        let cfg = a.to_config()?;
        let run = cfg.resolve()?;
        let (files, err) = commands::solve_with_error(&run)?;
        summary.push_str(&format!(
            "{},{}\n",
            run.opts.limiter.short_name(),
            err.map_or_else(|| "nan".to_string(), fmt_num)
        ));
        let d = out_dir(&cfg);
        write_artifacts(&d, &files)?;
        dir = Some((d, format!("{}_{}_compare.csv", run.problem.name, run.opts.scheme.short_name())));
    }
    let (d, name) = dir.expect("at least one limiter ran");
    print!("{summary}");
    write_artifacts(
        &d,
        &[Artifact {
            name,
            contents: summary.into_bytes(),
        }],
    )
}

fn cmd_tvd_report(args: &RunArgs, bound: f64) -> Result<()> {
    let mut a = args.clone();
    a.scheme.get_or_insert_with(|| "nt".into());
    let cfg = a.to_config()?;
    let run = cfg.resolve()?;
    let rows = commands::tvd_report(&run, bound)?;
    let flagged = rows.iter().filter(|r| r.flagged).count();
    let max = rows.iter().map(|r| r.max_ratio).fold(0.0, f64::max);
    println!("{} steps, max ratio {max:.4}, {flagged} above {bound}", rows.len());
    write_artifacts(
        &out_dir(&cfg),
        &[Artifact {
            name: format!("{}_tvd.csv", run.stem()),
            contents: commands::tvd_csv(&rows, bound).into_bytes(),
        }],
    )
}

fn cmd_list_problems() {
    for p in all_problems() {
        let size = match p.ny {
            Some(ny) => format!("{}x{}", p.n, ny),
            None => p.n.to_string(),
        };
        println!(
            "{:<18} {:<15} n={:<9} t_end={:<8.4} scheme={}",
            p.name,
            format!("{:?}", p.law).to_lowercase(),
            size,
            p.t_end,
            p.default_scheme.short_name()
        );
    }
}

fn exit_code(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<Error>() {
        Some(Error::Config(_) | Error::Parameter(_)) => 2,
        Some(
            Error::Divergence { .. }
            | Error::Positivity { .. }
            | Error::StepRejected { .. }
            | Error::PoissonNotConverged { .. },
        ) => 3,
        _ => 1,
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Solve(args) => cmd_solve(args),
        Command::Convergence { run, ns } => cmd_convergence(run, ns),
        Command::Compare { run, limiters } => cmd_compare(run, limiters),
        Command::ListProblems => {
            cmd_list_problems();
            Ok(())
        }
        Command::TvdReport { run, bound } => cmd_tvd_report(run, *bound),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
