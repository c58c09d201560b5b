use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, CommandFactory, Parser, Subcommand};
use fraudgan::run::{execute, parse_pairs, Command, RunConfig};
use fraudgan::{Error, ErrorKind};

/// Oversampling experiments for imbalanced fraud data.
///
/// Every flag has a config-file key of the same name with dashes replaced
/// by underscores (`--test-fraction` is `test_fraction`). Files given with
/// `--config` are applied in order, then the flags on the command line.
/// Each run writes `manifest.txt` to the output directory; passing it back
/// with `--config` reproduces the run.
#[derive(Parser)]
#[command(name = "fraudgan", version)]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Subcommand)]
enum Sub {
    /// Write a synthetic imbalanced dataset to data.csv.
    SynthData(Opts),
    /// Train one generator on the minority rows of the training split and
    /// write model_<framework>.txt and trainlog_<framework>.csv.
    TrainGan(Opts),
    /// Sample rows from a trained generator into generated.csv.
    Generate(Opts),
    /// Oversample the minority class to parity and write balanced.csv.
    Balance(Opts),
    /// Cross-validate each method; writes reports.csv, aggregate.csv and roc.svg.
    Evaluate(Opts),
    /// Add growing fractions of real or generated minority rows; writes sweep.csv.
    Sweep(Opts),
    /// Rebuild aggregate.csv from an existing reports.csv.
    Report(Opts),
}

#[derive(Args)]
struct Opts {
    /// key=value config file; repeatable, later files win.
    #[arg(long = "config", value_name = "FILE")]
    config: Vec<PathBuf>,
    /// Input CSV with a `Class` column.
    #[arg(long)]
    data: Option<String>,
    /// Synthetic dataset instead of --data: majority,minority,dim,shift.
    #[arg(long)]
    synth: Option<String>,
    /// Output directory.
    #[arg(long)]
    out: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    /// Comma-separated: none,ros,smote,adasyn,gan,cgan,wgan,wcgan.
    #[arg(long)]
    methods: Option<String>,
    /// Single method for `balance`.
    #[arg(long)]
    method: Option<String>,
    /// gan, cgan, wgan or wcgan.
    #[arg(long)]
    framework: Option<String>,
    /// Hyperparameter preset; `table1` is the tuned set.
    #[arg(long)]
    preset: Option<String>,
    /// lr (logistic regression) or xgb (boosted trees).
    #[arg(long)]
    classifier: Option<String>,
    #[arg(long)]
    folds: Option<String>,
    /// Score cut-off for recall, precision and F1.
    #[arg(long)]
    threshold: Option<String>,
    #[arg(long)]
    smote_k: Option<String>,
    #[arg(long)]
    adasyn_k: Option<String>,
    /// Holdout share for train-gan and sweep.
    #[arg(long)]
    test_fraction: Option<String>,
    /// Model file written by train-gan.
    #[arg(long)]
    model: Option<String>,
    /// Rows to generate.
    #[arg(long)]
    count: Option<String>,
    /// Condition class for conditional generators.
    #[arg(long)]
    condition: Option<String>,
    /// Comma-separated sweep fractions in [0, 1].
    #[arg(long)]
    fractions: Option<String>,
    /// Comma-separated: real,trained_gan,untrained_gan.
    #[arg(long)]
    sources: Option<String>,
    #[arg(long)]
    probe_folds: Option<String>,
    /// Boosting rounds of the real-vs-generated probe.
    #[arg(long)]
    probe_rounds: Option<String>,
    /// reports.csv for `report`.
    #[arg(long)]
    input: Option<String>,
    /// Worker threads (0 = all cores).
    #[arg(long)]
    jobs: Option<String>,
    /// Generator setting override, e.g. --gan max_iterations=500 (key gan.<name>).
    #[arg(long, value_name = "KEY=VALUE")]
    gan: Vec<String>,
}

impl Opts {
    fn pairs(&self) -> Result<Vec<(String, String)>, Error> {
        let flags = [
            ("data", &self.data),
            ("synth", &self.synth),
            ("out", &self.out),
            ("seed", &self.seed),
            ("methods", &self.methods),
            ("method", &self.method),
            ("framework", &self.framework),
            ("preset", &self.preset),
            ("classifier", &self.classifier),
            ("folds", &self.folds),
            ("threshold", &self.threshold),
            ("smote_k", &self.smote_k),
            ("adasyn_k", &self.adasyn_k),
            ("test_fraction", &self.test_fraction),
            ("model", &self.model),
            ("count", &self.count),
            ("condition", &self.condition),
            ("fractions", &self.fractions),
            ("sources", &self.sources),
            ("probe_folds", &self.probe_folds),
            ("probe_rounds", &self.probe_rounds),
            ("input", &self.input),
            ("jobs", &self.jobs),
        ];
        let mut pairs: Vec<(String, String)> = flags
            .iter()
            .filter_map(|(k, v)| v.as_ref().map(|v| (k.to_string(), v.clone())))
            .collect();
        for g in &self.gan {
            let (k, v) = g
                .split_once('=')
                .ok_or_else(|| Error::Param(format!("--gan expects KEY=VALUE, got {g:?}")))?;
            pairs.push((format!("gan.{}", k.trim()), v.trim().to_string()));
        }
        Ok(pairs)
    }
}

fn resolve(command: Command, opts: &Opts) -> Result<RunConfig, Error> {
    let mut config = RunConfig::new(command);
    for path in &opts.config {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Param(format!("cannot read config {}: {e}", path.display())))?;
        config.apply(&parse_pairs(&text)?)?;
    }
    config.apply(&opts.pairs()?)?;
    Ok(config)
}

fn run(command: Command, opts: &Opts) -> Result<(), Error> {
    let config = resolve(command, opts)?;
    let work = || execute(&config);
    let artifacts = if config.jobs > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(config.jobs)
            .build()
            .map_err(|e| Error::Param(format!("cannot start {} workers: {e}", config.jobs)))?
            .install(work)?
    } else {
        work()?
    };
    for a in artifacts {
        println!("{}  {}", a.sha256, config.out.join(&a.name).display());
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let (command, opts) = match &cli.command {
        Sub::SynthData(o) => (Command::SynthData, o),
        Sub::TrainGan(o) => (Command::TrainGan, o),
        Sub::Generate(o) => (Command::Generate, o),
        Sub::Balance(o) => (Command::Balance, o),
        Sub::Evaluate(o) => (Command::Evaluate, o),
        Sub::Sweep(o) => (Command::Sweep, o),
        Sub::Report(o) => (Command::Report, o),
    };
    match run(command, opts) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            let code = match e.kind() {
                ErrorKind::Config => {
                    let mut cmd = Cli::command();
                    cmd.build();
                    if let Some(sub) = cmd.find_subcommand_mut(command.name()) {
                        eprintln!("\n{}", sub.render_usage());
                    }
                    2
                }
                ErrorKind::Data => 3,
                ErrorKind::Numerical => 4,
            };
            ExitCode::from(code)
        }
    }
}
