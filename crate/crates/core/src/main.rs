use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};

use jointmeas::bloch::BlochVector;
use jointmeas::checks;
use jointmeas::experiment::{
    b_axis, bound_summary, build_paper_experiments, describe_design, render, run_experiment, BoundSummary,
    ExperimentConfig, OutputFormat, ResultRow, RunMode, DEFAULT_SEED,
};
use jointmeas::montecarlo::ShotModel;
use jointmeas::povm::{assemble_joint_povm, max_theta, synthesize, DegenerateConvention};

#[derive(Parser)]
#[command(
    name = "jointmeas",
    version,
    about = "Optimal joint measurement of two incompatible qubit observables"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Synthesize the optimal joint measurement for one (p, θ, φ) point.
    #[command(allow_negative_numbers = true)]
    Synth {
        /// Branch probability of the C measurement, in [0.5, 1).
        #[arg(long)]
        p: f64,
        /// Half-angle between a and b, degrees.
        #[arg(long)]
        theta: f64,
        /// Azimuth of the (a, b) plane, degrees.
        #[arg(long, default_value_t = 0.0)]
        phi: f64,
        /// Direction a as `x,y,z`.
        #[arg(long, default_value = "0,0,1", value_parser = parse_vector)]
        a: BlochVector<f64>,
        /// Accept the single-projective fallback at a degenerate point.
        #[arg(long)]
        allow_degenerate: bool,
    },
    /// Run one experiment and write its result table.
    Simulate {
        /// TOML experiment config.
        #[arg(long, conflicts_with = "experiment", required_unless_present = "experiment")]
        config: Option<PathBuf>,
        /// Built-in experiment set (1, 2 or 3).
        #[arg(long, value_parser = clap::value_parser!(u8).range(1..=3))]
        experiment: Option<u8>,
        #[command(flatten)]
        run: RunArgs,
        /// Output file; stdout when omitted.
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// Run all three built-in experiment sets and summarize them against the bound.
    Reproduce {
        #[arg(long, default_value = "results")]
        output_dir: PathBuf,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Run the built-in self-checks.
    Validate {
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
    },
    /// Print a built-in experiment config as TOML.
    Config {
        #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u8).range(1..=3))]
        experiment: u8,
    },
}

#[derive(Args)]
struct RunArgs {
    /// Master seed; `reproduce` adds the experiment index.
    #[arg(long)]
    seed: Option<u64>,
    /// Heralded shots per run.
    #[arg(long)]
    shots: Option<u64>,
    /// Shots per run for each sharp reference measurement.
    #[arg(long)]
    sharp_shots: Option<u64>,
    #[arg(long)]
    runs: Option<u64>,
    #[arg(long)]
    p: Option<f64>,
    #[arg(long, value_enum, default_value_t = OutputFormat::Csv)]
    format: OutputFormat,
    /// Use exact Born probabilities instead of sampled counts.
    #[arg(long)]
    exact: bool,
    /// Poisson-distributed shot totals.
    #[arg(long)]
    poisson: bool,
    /// Exit successfully even if some rows are flagged.
    #[arg(long)]
    allow_degenerate: bool,
}

impl RunArgs {
    fn apply(&self, cfg: &mut ExperimentConfig, seed_offset: u64) {
        if let Some(s) = self.seed {
            cfg.master_seed = s + seed_offset;
        }
        if let Some(n) = self.shots {
            cfg.shots_per_run = n;
        }
        if let Some(n) = self.sharp_shots {
            cfg.sharp_shots_per_run = Some(n);
        }
        if let Some(r) = self.runs {
            cfg.runs = r;
        }
        if let Some(p) = self.p {
            cfg.p = p;
        }
        if self.poisson {
            cfg.shot_model = ShotModel::Poisson;
        }
    }

    fn mode(&self) -> RunMode {
        if self.exact {
            RunMode::Exact
        } else {
            RunMode::Simulated
        }
    }
}

fn parse_vector(s: &str) -> Result<BlochVector<f64>, String> {
    let parts: Vec<f64> = s
        .split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|e| format!("{t:?}: {e}")))
        .collect::<Result<_, _>>()?;
    match parts[..] {
        [x, y, z] => Ok(BlochVector::new(x, y, z)),
        _ => Err(format!(
            "expected three comma-separated components, got {}",
            parts.len()
        )),
    }
}

fn extension(format: OutputFormat) -> &'static str {
    match format {
        OutputFormat::Csv => "csv",
        OutputFormat::Json => "json",
    }
}

fn flagged(rows: &[ResultRow]) -> Vec<&ResultRow> {
    rows.iter().filter(|r| !r.status.is_ok()).collect()
}

fn report_flagged(name: &str, rows: &[ResultRow]) -> usize {
    let bad = flagged(rows);
    for r in &bad {
        eprintln!("{name}: theta = {} deg: {}", r.theta_deg, r.status.label());
    }
    bad.len()
}

fn print_summary(name: &str, s: &BoundSummary) {
    println!(
        "{name}: {} points, {} within 3 sigma of the bound, {} below the bound by more than 3 sigma",
        s.points, s.within_3_sigma, s.below_bound_3_sigma
    );
}

fn synth(p: f64, theta_deg: f64, phi_deg: f64, a: BlochVector<f64>, allow_degenerate: bool) -> anyhow::Result<()> {
    let theta_max_deg = max_theta(p)?.to_degrees();
    if theta_deg > theta_max_deg + 1e-9 {
        bail!("theta = {theta_deg} deg exceeds theta_max = {theta_max_deg:.6} deg for p = {p}");
    }
    let b = b_axis(&a, theta_deg.to_radians(), phi_deg.to_radians())?;
    let convention = if allow_degenerate {
        DegenerateConvention::SingleProjective
    } else {
        DegenerateConvention::Reject
    };
    let design = synthesize(p, &a, &b, convention)?;
    let povm = assemble_joint_povm(&design)?;
    print!("{}", describe_design(&design));
    println!("theta_max = {theta_max_deg:.9} deg");
    println!("completeness defect = {:.3e}", povm.completeness_defect());
    println!("min effect eigenvalue = {:.3e}", povm.min_eigenvalue());
    Ok(())
}

fn run() -> anyhow::Result<ExitCode> {
    let cli = Cli::parse();
    match cli.command {
        Command::Synth {
            p,
            theta,
            phi,
            a,
            allow_degenerate,
        } => {
            synth(p, theta, phi, a, allow_degenerate)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Simulate {
            config,
            experiment,
            run,
            output,
        } => {
            let mut cfg = match (config, experiment) {
                (Some(path), _) => {
                    ExperimentConfig::load(&path).with_context(|| format!("loading {}", path.display()))?
                }
                (None, Some(k)) => build_paper_experiments()[k as usize - 1].clone(),
                (None, None) => unreachable!("clap requires one of --config or --experiment"),
            };
            run.apply(&mut cfg, 0);
            let rows = run_experiment(&cfg, run.mode())?;
            let text = render(&rows, run.format)?;
            match output {
                Some(path) => std::fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?,
                None => std::io::stdout().write_all(text.as_bytes())?,
            }
            let bad = report_flagged(&cfg.name, &rows);
            Ok(if bad > 0 && !run.allow_degenerate {
                ExitCode::from(2)
            } else {
                ExitCode::SUCCESS
            })
        }
        Command::Reproduce { output_dir, run } => {
            std::fs::create_dir_all(&output_dir).with_context(|| format!("creating {}", output_dir.display()))?;
            let mut total = BoundSummary::default();
            let mut bad = 0;
            for (k, mut cfg) in build_paper_experiments().into_iter().enumerate() {
                run.apply(&mut cfg, k as u64);
                let rows = run_experiment(&cfg, run.mode())?;
                let path = output_dir.join(format!("{}.{}", cfg.name, extension(run.format)));
                std::fs::write(&path, render(&rows, run.format)?)
                    .with_context(|| format!("writing {}", path.display()))?;
                let s = bound_summary(&rows);
                print_summary(&cfg.name, &s);
                total.points += s.points;
                total.within_3_sigma += s.within_3_sigma;
                total.below_bound_3_sigma += s.below_bound_3_sigma;
                bad += report_flagged(&cfg.name, &rows);
            }
            print_summary("total", &total);
            Ok(if bad > 0 && !run.allow_degenerate {
                ExitCode::from(2)
            } else {
                ExitCode::SUCCESS
            })
        }
        Command::Validate { seed } => {
            let reports = checks::run_all(seed);
            for r in &reports {
                println!("{} {}: {}", if r.passed { "PASS" } else { "FAIL" }, r.name, r.detail);
            }
            Ok(if reports.iter().all(|r| r.passed) {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            })
        }
        Command::Config { experiment } => {
            print!(
                "{}",
                build_paper_experiments()[experiment as usize - 1].to_toml_string()?
            );
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run() {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
