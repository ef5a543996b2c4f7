use clap::{Args, Parser, Subcommand, ValueEnum};
use nhpp_sched::harness::{self, ExperimentConfig, Method, Report};
use nhpp_sched::sampler::SamplingMethod;
use nhpp_sched::theory::stress_library;
use nhpp_sched::{Error, Result};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "nhpp-sched", version, about = "Sequencing tasks on a machine with NHPP disruptions (preempt-repeat)")]
struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true, env = "NHPP_SCHED_THREADS")]
    threads: Option<usize>,
    /// Output format on stdout.
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum Sampling {
    Inversion,
    Thinning,
}

#[derive(Subcommand)]
enum Command {
    /// Monte Carlo estimate of the expected makespan.
    Simulate(Common),
    /// Expected makespan from the integral-equation solver.
    Exact(Common),
    /// At-most-one-failure makespans and differences against SPT.
    SingleFailure(Common),
    /// Optimality threshold reports.
    Thresholds {
        #[command(flatten)]
        common: Common,
        /// Short-task scale; the tasks are then the base lengths.
        #[arg(long)]
        epsilon: Option<f64>,
        /// Run the built-in stress library instead.
        #[arg(long)]
        stress: bool,
    },
    /// Full experiment from a config file.
    Sweep(Common),
    /// Built-in oracle checks.
    Selftest {
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
}

#[derive(Args)]
struct Common {
    /// Experiment config (JSON).
    #[arg(long)]
    config: Option<PathBuf>,
    /// `zero`, `constant:0.4`, `kind:key=value,...` or a JSON descriptor.
    #[arg(long)]
    model: Option<String>,
    /// Task lengths, e.g. `2,4,6,8`.
    #[arg(long)]
    tasks: Option<String>,
    /// `spt`, `lpt`, `all` or a 1-based order like `2,1,3`; repeatable.
    #[arg(long)]
    perm: Vec<String>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    reps: Option<u64>,
    /// Exact-solver tolerance.
    #[arg(long)]
    tol: Option<f64>,
    /// Directory for `<name>.csv` and `<name>.json` reports.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    sampling: Option<Sampling>,
    /// Write zero runtimes (byte-reproducible reports).
    #[arg(long)]
    no_timing: bool,
}

impl Common {
    fn config(&self, threads: Option<usize>) -> Result<ExperimentConfig> {
        let mut c = match (&self.config, &self.model, &self.tasks) {
            (Some(path), _, _) => ExperimentConfig::load(path)?,
            (None, Some(m), Some(t)) => ExperimentConfig::single(harness::parse_model(m)?, harness::parse_tasks(t)?),
            _ => return Err(Error::Config("give --config, or both --model and --tasks".into())),
        };
        if self.config.is_some() {
            if let Some(m) = &self.model {
                c.families = vec![harness::FamilyConfig::new(harness::parse_model(m)?)];
            }
            if let Some(t) = &self.tasks {
                c.tasks = harness::parse_tasks(t)?;
            }
        }
        if !self.perm.is_empty() {
            c.permutations = self.perm.clone();
        }
        if let Some(s) = self.seed {
            c.seed = s;
        }
        if let Some(r) = self.reps {
            c.replications = r;
        }
        if let Some(t) = self.tol {
            c.tolerance = t;
        }
        if let Some(s) = self.sampling {
            c.sampling = match s {
                Sampling::Inversion => SamplingMethod::Inversion,
                Sampling::Thinning => SamplingMethod::Thinning,
            };
        }
        if self.no_timing {
            c.timing = false;
        }
        if threads.is_some() {
            c.threads = threads;
        }
        if let Some(o) = &self.out {
            c.output.dir = Some(o.clone());
        }
        Ok(c)
    }
}

fn emit(report: &Report, config: &ExperimentConfig, format: Format, thresholds: bool) -> Result<()> {
    let text = match (format, thresholds) {
        (Format::Json, _) => report.json_string()? + "\n",
        (Format::Csv, false) => report.csv_string()?,
        (Format::Csv, true) => report.thresholds_csv()?,
    };
    print!("{text}");
    if let Some(dir) = &config.output.dir {
        let stem = config
            .output
            .stem
            .clone()
            .unwrap_or_else(|| if config.name.is_empty() { "report".into() } else { config.name.clone() });
        let (csv, json) = report.write_files(dir, &stem)?;
        eprintln!("wrote {} and {}", csv.display(), json.display());
    }
    Ok(())
}

fn run_with(common: &Common, cli: &Cli, methods: Option<Vec<Method>>) -> Result<()> {
    let mut config = common.config(cli.threads)?;
    if let Some(m) = methods {
        config.methods = m;
    }
    let report = harness::run(&config)?;
    let only_thresholds = config.methods == [Method::Thresholds];
    emit(&report, &config, cli.format, only_thresholds)
}

fn stress(format: Format) -> Result<()> {
    let mut rows = Vec::new();
    for inst in stress_library()? {
        let r = inst.report()?;
        rows.push(serde_json::json!({ "name": inst.name, "report": r }));
        if format == Format::Csv {
            if rows.len() == 1 {
                println!("name,certified_order,threshold,tested,notes");
            }
            println!(
                "{},{:?},{},{},\"{}\"",
                inst.name,
                r.certified_order,
                r.threshold_value.map_or(String::new(), |v| v.to_string()),
                r.tested_value.map_or(String::new(), |v| v.to_string()),
                r.hypothesis_failures.join("; ")
            );
        }
    }
    if format == Format::Json {
        println!("{}", serde_json::to_string_pretty(&rows).map_err(|e| Error::Io(e.to_string()))?);
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if n == 0 {
            eprintln!("error: --threads must be >= 1");
            return ExitCode::from(2);
        }
    }
    let result = match &cli.command {
        Command::Simulate(c) => run_with(c, &cli, Some(vec![Method::Mc])),
        Command::Exact(c) => run_with(c, &cli, Some(vec![Method::Exact])),
        Command::SingleFailure(c) => run_with(c, &cli, Some(vec![Method::SingleFailure])),
        Command::Thresholds { common, epsilon, stress: s } => {
            if *s {
                stress(cli.format)
            } else {
                common.config(cli.threads).and_then(|mut config| {
                    config.methods = vec![Method::Thresholds];
                    config.epsilon = epsilon.or(config.epsilon);
                    let report = harness::run(&config)?;
                    emit(&report, &config, cli.format, true)
                })
            }
        }
        Command::Sweep(c) => run_with(c, &cli, None),
        Command::Selftest { seed } => {
            let checks = harness::selftest(*seed);
            match cli.format {
                Format::Json => println!("{}", serde_json::to_string_pretty(&checks).unwrap_or_default()),
                Format::Csv => {
                    for c in &checks {
                        println!("{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
                    }
                }
            }
            if checks.iter().all(|c| c.passed) {
                Ok(())
            } else {
                Err(Error::Config("self-test failed".into()))
            }
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
