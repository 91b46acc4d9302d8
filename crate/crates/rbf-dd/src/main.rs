//! `rbf-dd`: reproduce the error/condition tables and jump-mitigation
//! figures of the data-dependent RBF interpolation experiments.

use clap::{Args, Parser, Subcommand};
use rbf_dd::harness::{
    parse_kernel_list, parse_level_range, run_jump_1d, run_jump_2d, run_smooth_table, Experiment,
    ExperimentConfig, PointKind,
};
use rbf_dd::linalg::NormKind;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "rbf-dd",
    version,
    about = "Data-dependent RBF interpolation experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Override the per-kernel shape factor (epsilon = factor / h) for all
    /// kernels.
    #[arg(long, global = true)]
    eps_factor: Option<f64>,

    /// Division guard of the shape adaptation.
    #[arg(long, global = true, default_value_t = 1e-16)]
    c: f64,

    /// Indicator gain C of the retention flag.
    #[arg(long = "cap-c", global = true, default_value_t = 10.0)]
    cap_c: f64,

    /// Indicator exponent t of the retention flag.
    #[arg(long, global = true, default_value_t = 2.0)]
    t: f64,

    /// Solve the data-dependent system through the smooth/flagged block
    /// decoupling.
    #[arg(long, global = true)]
    block_solve: bool,

    /// Norm of the reported condition numbers: one, two or inf.
    #[arg(long, global = true, default_value = "two")]
    cond_norm: String,

    /// Interior evaluation points per gap (default: 11 for smooth1d, 10 for
    /// jump1d, 6 for jump2d).
    #[arg(long, global = true)]
    per_gap: Option<usize>,

    /// Emit a gnuplot script next to the figure CSVs.
    #[arg(long, global = true)]
    gnuplot: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Error and condition-number tables (experiment: smooth1d).
    Table {
        /// Experiment name; only `smooth1d` produces a table.
        experiment: String,

        #[command(flatten)]
        common: CommonArgs,

        /// Refinement levels, `lo:hi` or a single level.
        #[arg(long, default_value = "7:10")]
        levels: String,

        /// Output CSV file.
        #[arg(long)]
        out: PathBuf,
    },
    /// Figure data for the jump experiments (jump1d, jump2d).
    Fig {
        /// Experiment name: `jump1d` or `jump2d`.
        experiment: String,

        #[command(flatten)]
        common: CommonArgs,

        /// Node count (per axis for jump2d). Defaults: 32 (jump1d),
        /// 50 (jump2d).
        #[arg(long)]
        n: Option<usize>,

        /// Output directory for the CSV files.
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Args)]
struct CommonArgs {
    /// Comma-separated kernel list.
    #[arg(long, default_value = "g,imq,w2,w4,m2,m4")]
    kernels: String,

    /// Node distribution: uniform or halton.
    #[arg(long, default_value = "uniform")]
    points: String,
}

fn build_config(
    cli: &Cli,
    experiment: Experiment,
    common: &CommonArgs,
    out: &Path,
) -> rbf_dd::Result<ExperimentConfig> {
    let mut cfg = ExperimentConfig::new(experiment);
    cfg.kernels = parse_kernel_list(&common.kernels)?;
    cfg.points = common.points.parse::<PointKind>()?;
    cfg.eps_factor = cli.eps_factor;
    cfg.c = cli.c;
    cfg.cap_c = cli.cap_c;
    cfg.t = cli.t;
    cfg.per_gap = cli.per_gap;
    cfg.use_block = cli.block_solve;
    cfg.cond_norm = cli.cond_norm.parse::<NormKind>()?;
    cfg.out = Some(out.to_path_buf());
    cfg.gnuplot = cli.gnuplot;
    Ok(cfg)
}

fn run(cli: &Cli) -> rbf_dd::Result<ExitCode> {
    match &cli.command {
        Command::Table {
            experiment,
            common,
            levels,
            out,
        } => {
            let experiment: Experiment = experiment.parse()?;
            if experiment != Experiment::Smooth1d {
                return Err(rbf_dd::Error::InvalidArgument(
                    "only smooth1d produces a table; use `fig` for the jump experiments".into(),
                ));
            }
            let mut cfg = build_config(cli, experiment, common, out)?;
            cfg.levels = parse_level_range(levels)?;
            let rows = run_smooth_table(&cfg)?;
            let mut failed = 0;
            for r in &rows {
                match &r.error {
                    None => println!(
                        "l={} {:<4} {:<8} E={:.5e} kappa={:.5e} | dd E={:.5e} kappa={:.5e}",
                        r.level,
                        r.kernel,
                        r.points,
                        r.e_classical,
                        r.kappa_classical,
                        r.e_dd,
                        r.kappa_dd
                    ),
                    Some(e) => {
                        failed += 1;
                        eprintln!("l={} {} {}: FAILED: {e}", r.level, r.kernel, r.points);
                    }
                }
            }
            println!("wrote {}", out.display());
            Ok(if failed == 0 {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            })
        }
        Command::Fig {
            experiment,
            common,
            n,
            out,
        } => {
            let experiment: Experiment = experiment.parse()?;
            let mut cfg = build_config(cli, experiment, common, out)?;
            if let Some(n) = n {
                cfg.n = *n;
            }
            match experiment {
                Experiment::Jump1d => {
                    let result = run_jump_1d(&cfg)?;
                    for c in &result.conditions {
                        println!(
                            "{:<4} kappa_classical={:.5e} kappa_dd={:.5e}",
                            c.kernel, c.kappa_classical, c.kappa_dd
                        );
                    }
                    for k in &result.curves {
                        println!(
                            "{:<4} overshoot classical={:.4e} dd={:.4e} (jump {:.4})",
                            k.kernel, k.overshoot_classical, k.overshoot_dd, result.jump_magnitude
                        );
                    }
                }
                Experiment::Jump2d => {
                    let result = run_jump_2d(&cfg)?;
                    for r in &result.reports {
                        println!(
                            "{:<4} kappa_classical={:.5e} kappa_dd={:.5e} max_err classical={:.4e} dd={:.4e}",
                            r.kernel, r.kappa_classical, r.kappa_dd, r.max_err_classical, r.max_err_dd
                        );
                    }
                }
                Experiment::Smooth1d => {
                    return Err(rbf_dd::Error::InvalidArgument(
                        "smooth1d is a table experiment; use `table smooth1d`".into(),
                    ))
                }
            }
            println!("wrote {}", out.display());
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
