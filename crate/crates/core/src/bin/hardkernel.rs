use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use hardkernel_core::harness::verify::{run_criterion, CRITERIA, SIGN_SEARCH_BUDGET};
use hardkernel_core::harness::{
    emit_csv, emit_json, read_json, render_report, run_point, run_scaling_experiment, write_csv, ExperimentConfig,
};
use hardkernel_core::instance::{build_lowrank_instance, BlockKernel, Instance, LabelChoice, LowRankInstance};
use hardkernel_core::learners::nystrom_gram;

/// Hard kernel-learning instances, budgeted learners and lower-bound checks.
#[derive(Parser)]
#[command(name = "hardkernel", version)]
struct Cli {
    /// Worker threads for trial-level parallelism (default: all cores).
    #[arg(long, env = "HARDKERNEL_WORKERS", global = true)]
    workers: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample an instance and print it as JSON.
    Generate(GenerateArgs),
    /// Run the trials of one sweep point and write them as CSV.
    Run {
        #[command(flatten)]
        config: ConfigArgs,
        /// Which sweep point of the configuration to run.
        #[arg(long, default_value_t = 0)]
        point: usize,
        /// CSV output path (stdout if omitted).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run every sweep point, write trial CSV and an aggregated JSON report.
    Sweep {
        #[command(flatten)]
        config: ConfigArgs,
        #[arg(long)]
        csv: PathBuf,
        #[arg(long)]
        json: PathBuf,
    },
    /// Run the acceptance checks; exits nonzero if any fails.
    Verify {
        /// Criterion numbers to run (repeatable); all when omitted.
        #[arg(long = "criterion", short = 'c')]
        criteria: Vec<u8>,
        #[arg(long, default_value_t = 20_240_601)]
        seed: u64,
        /// Also write the results as JSON.
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Print a JSON sweep report as a table.
    Report { json: PathBuf },
}

#[derive(Clone, Copy, ValueEnum)]
enum InstanceKind {
    /// Block kernel from the hard distribution.
    Hard,
    /// Low-rank ridge training set with contiguous blocks.
    Lowrank,
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(long, value_enum, default_value = "hard")]
    kind: InstanceKind,
    #[arg(long)]
    d: usize,
    #[arg(long)]
    m: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Block labels for `lowrank`, comma separated ±1.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, conflicts_with = "landmarks")]
    z: Option<Vec<i8>>,
    /// For `lowrank`: search adversarial labels against the Nyström map
    /// built from this many random landmarks.
    #[arg(long)]
    landmarks: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Experiment configuration: a key-value file plus per-key overrides.
#[derive(Args)]
struct ConfigArgs {
    /// Flat `key = value` configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override any configuration key, e.g. `--set trials=50` (repeatable).
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    /// absolute | hinge | squared | linear
    #[arg(long)]
    loss: Option<String>,
    /// norm | soft
    #[arg(long)]
    regime: Option<String>,
    /// Norm bound on αᵀKα in the norm regime.
    #[arg(long)]
    radius_sq: Option<String>,
    /// Regularization, comma separated for a sweep.
    #[arg(long)]
    lambda: Option<String>,
    /// Budgets (integers, inv_lambda_sq or full), comma separated.
    #[arg(long)]
    budget: Option<String>,
    /// integer | budget | lambda | hinge
    #[arg(long)]
    d: Option<String>,
    /// even integer | auto
    #[arg(long)]
    m: Option<String>,
    /// number | inv_sqrt_d | kink
    #[arg(long, allow_hyphen_values = true)]
    y: Option<String>,
    /// subsample[:k] | nystrom[:k] | uniform_random_queries | full_info | zero | linear_closed_form
    #[arg(long)]
    learner: Option<String>,
    #[arg(long)]
    trials: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    /// budget | lambda
    #[arg(long)]
    sweep: Option<String>,
}

impl ConfigArgs {
    fn resolve(&self) -> anyhow::Result<ExperimentConfig> {
        let mut cfg = match &self.config {
            Some(path) => ExperimentConfig::from_file(path).with_context(|| format!("reading {}", path.display()))?,
            None => ExperimentConfig::default(),
        };
        let flags = [
            ("loss", &self.loss),
            ("regime", &self.regime),
            ("radius_sq", &self.radius_sq),
            ("lambda", &self.lambda),
            ("budget", &self.budget),
            ("d", &self.d),
            ("m", &self.m),
            ("y", &self.y),
            ("learner", &self.learner),
            ("trials", &self.trials),
            ("seed", &self.seed),
            ("sweep", &self.sweep),
        ];
        for (key, value) in flags {
            if let Some(v) = value {
                cfg.set(key, v)?;
            }
        }
        for kv in &self.overrides {
            let Some((k, v)) = kv.split_once('=') else {
                bail!("--set expects KEY=VALUE, got {kv:?}");
            };
            cfg.set(k, v)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn write_output(path: Option<&PathBuf>, text: &str) -> anyhow::Result<()> {
    match path {
        Some(p) => std::fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => Ok(std::io::stdout().write_all(text.as_bytes())?),
    }
}

fn generate(args: &GenerateArgs) -> anyhow::Result<()> {
    let instance = match args.kind {
        InstanceKind::Hard => Instance::Hard(BlockKernel::sample(args.d, args.m, args.seed)?),
        InstanceKind::Lowrank => {
            let inst = match (&args.z, args.landmarks) {
                (Some(z), _) => build_lowrank_instance(args.d, args.m, LabelChoice::Given(z.clone()), args.seed)?,
                (None, Some(k)) => {
                    use rand::SeedableRng;
                    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(args.seed);
                    let marks = rand::seq::index::sample(&mut rng, args.m, k.min(args.m)).into_vec();
                    let placeholder = LowRankInstance::new(args.d, args.m, vec![1; 2 * args.d])?;
                    let gram = nystrom_gram(&placeholder, &marks)?;
                    let labels = LabelChoice::Search {
                        gram: &gram,
                        budget: SIGN_SEARCH_BUDGET,
                    };
                    build_lowrank_instance(args.d, args.m, labels, args.seed)?
                }
                (None, None) => bail!("lowrank instances need --z or --landmarks"),
            };
            Instance::LowRank(inst)
        }
    };
    write_output(args.out.as_ref(), &(instance.to_json()? + "\n"))
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match real_main() {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn real_main() -> anyhow::Result<ExitCode> {
    let cli = Cli::parse();
    if let Some(n) = cli.workers {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .context("configuring worker pool")?;
    }
    match &cli.command {
        Command::Generate(args) => generate(args)?,
        Command::Run { config, point, out } => {
            let cfg = config.resolve()?;
            let points = cfg.points()?;
            let Some(p) = points.get(*point) else {
                bail!("configuration has {} sweep points, no point {point}", points.len());
            };
            let records = run_point(p, cfg.trials, cfg.seed)?;
            match out {
                Some(path) => emit_csv(&records, path)?,
                None => write_csv(&records, std::io::stdout().lock())?,
            }
        }
        Command::Sweep { config, csv, json } => {
            let cfg = config.resolve()?;
            let (report, records) = run_scaling_experiment(&cfg)?;
            emit_csv(&records, csv)?;
            emit_json(&report, json)?;
            eprint!("{}", render_report(&report));
        }
        Command::Verify { criteria, seed, json } => {
            let ids: Vec<u8> = if criteria.is_empty() {
                CRITERIA.iter().map(|(id, _)| *id).collect()
            } else {
                criteria.clone()
            };
            let mut results = Vec::new();
            for id in ids {
                let r = run_criterion(id, *seed)?;
                println!(
                    "criterion {:>2} {:<34} {} ({:.1} s) {}",
                    r.id,
                    r.title,
                    if r.passed { "PASS" } else { "FAIL" },
                    r.seconds,
                    r.detail
                );
                results.push(r);
            }
            if let Some(path) = json {
                std::fs::write(path, serde_json::to_string_pretty(&results)? + "\n")?;
            }
            if results.iter().any(|r| !r.passed) {
                return Ok(ExitCode::FAILURE);
            }
        }
        Command::Report { json } => print!("{}", render_report(&read_json(json)?)),
    }
    Ok(ExitCode::SUCCESS)
}
