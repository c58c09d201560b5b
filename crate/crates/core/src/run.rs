//! Run configuration and the subcommand drivers behind the CLI.
//!
//! A run is described by flat `key=value` pairs. Config files are read
//! first and command-line flags override them; the resolved pairs are
//! written back to `manifest.txt` together with a SHA-256 of every output,
//! and feeding that manifest back in reproduces the outputs byte for byte.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use sha2::{Digest, Sha256};

use crate::data::{load_csv, write_csv, Dataset, Scaler, SynthSpec};
use crate::error::{Error, Result};
use crate::evaluation::{
    aggregate, augmentation_sweep, fit_generator, read_reports_csv, roc_curve, roc_svg, run_fold_experiment,
    write_aggregate_csv, write_reports_csv, write_sweep_csv, ExperimentConfig, Source, SweepConfig,
};
use crate::gan::{load_model, write_model, Framework, GanConfig};
use crate::models::{BoostConfig, Classifier, ProbeConfig};
use crate::resampling::{balance, BalancePlan, Method};
use crate::rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    SynthData,
    TrainGan,
    Generate,
    Balance,
    Evaluate,
    Sweep,
    Report,
}

impl Command {
    pub const ALL: [Command; 7] = [
        Command::SynthData,
        Command::TrainGan,
        Command::Generate,
        Command::Balance,
        Command::Evaluate,
        Command::Sweep,
        Command::Report,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Command::SynthData => "synth-data",
            Command::TrainGan => "train-gan",
            Command::Generate => "generate",
            Command::Balance => "balance",
            Command::Evaluate => "evaluate",
            Command::Sweep => "sweep",
            Command::Report => "report",
        }
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Command {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Command::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| Error::param(format!("unknown command {s:?}")))
    }
}

/// Shape of a synthetic dataset: `majority,minority,dim,shift`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SynthShape {
    pub majority: usize,
    pub minority: usize,
    pub dim: usize,
    pub shift: f64,
}

impl fmt::Display for SynthShape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{},{},{}", self.majority, self.minority, self.dim, self.shift)
    }
}

impl FromStr for SynthShape {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(',').map(str::trim).collect();
        let bad = || Error::param(format!("synth expects majority,minority,dim,shift; got {s:?}"));
        if parts.len() != 4 {
            return Err(bad());
        }
        Ok(Self {
            majority: parts[0].parse().map_err(|_| bad())?,
            minority: parts[1].parse().map_err(|_| bad())?,
            dim: parts[2].parse().map_err(|_| bad())?,
            shift: parts[3].parse().map_err(|_| bad())?,
        })
    }
}

/// Fully resolved settings for one subcommand.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub data: Option<PathBuf>,
    pub synth: Option<SynthShape>,
    pub out: PathBuf,
    pub seed: u64,
    pub methods: Vec<Method>,
    pub method: Method,
    pub framework: Framework,
    pub preset: String,
    pub classifier: Classifier,
    pub folds: usize,
    pub threshold: f64,
    pub smote_k: usize,
    pub adasyn_k: usize,
    pub test_fraction: f64,
    pub model: Option<PathBuf>,
    pub count: usize,
    pub condition: Option<usize>,
    pub fractions: Vec<f64>,
    pub sources: Vec<Source>,
    pub probe_folds: usize,
    pub probe_rounds: usize,
    pub input: Option<PathBuf>,
    /// Worker threads; 0 leaves the choice to the thread pool.
    pub jobs: usize,
    /// `gan.<key>` overrides on top of the framework preset.
    pub gan: Vec<(String, String)>,
}

fn list<T: FromStr<Err = Error>>(value: &str) -> Result<Vec<T>> {
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(str::parse)
        .collect()
}

fn join<T: ToString>(items: &[T]) -> String {
    items.iter().map(ToString::to_string).collect::<Vec<_>>().join(",")
}

fn opt_path(value: &str) -> Option<PathBuf> {
    (!value.is_empty()).then(|| PathBuf::from(value))
}

fn show_path(p: &Option<PathBuf>) -> String {
    p.as_ref().map(|p| p.display().to_string()).unwrap_or_default()
}

/// Parses `key=value` lines; blank lines and `#` comments are skipped.
pub fn parse_pairs(text: &str) -> Result<Vec<(String, String)>> {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(|l| {
            l.split_once('=')
                .map(|(k, v)| (k.trim().to_string(), v.trim().to_string()))
                .ok_or_else(|| Error::param(format!("expected key=value, got {l:?}")))
        })
        .collect()
}

impl RunConfig {
    pub fn new(command: Command) -> Self {
        Self {
            command,
            data: None,
            synth: None,
            out: PathBuf::from("out"),
            seed: 0,
            methods: Method::ALL.to_vec(),
            method: Method::Smote,
            framework: Framework::Wgan,
            preset: "table1".into(),
            classifier: Classifier::Logistic,
            folds: 10,
            threshold: 0.5,
            smote_k: 5,
            adasyn_k: 5,
            test_fraction: 0.2,
            model: None,
            count: 100,
            condition: None,
            fractions: vec![0.0, 0.2, 0.4, 0.6, 0.8],
            sources: Source::ALL.to_vec(),
            probe_folds: 3,
            probe_rounds: 100,
            input: None,
            jobs: 0,
            gan: Vec::new(),
        }
    }

    /// Applies pairs in order, later ones winning. Manifest checksum
    /// entries are ignored.
    pub fn apply(&mut self, pairs: &[(String, String)]) -> Result<()> {
        for (k, v) in pairs {
            self.set(k, v)?;
        }
        Ok(())
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        fn num<T: FromStr>(key: &str, value: &str) -> Result<T> {
            value
                .parse()
                .map_err(|_| Error::param(format!("bad value {value:?} for {key}")))
        }
        if key.starts_with("checksum.") {
            return Ok(());
        }
        if let Some(gan_key) = key.strip_prefix("gan.") {
            if matches!(gan_key, "framework" | "seed") {
                return Err(Error::param(format!("set {gan_key} directly, not as {key}")));
            }
            GanConfig::preset(self.framework).set(gan_key, value)?;
            self.gan.retain(|(k, _)| k != gan_key);
            self.gan.push((gan_key.to_string(), value.to_string()));
            return Ok(());
        }
        match key {
            "command" => {
                let c: Command = value.parse()?;
                if c != self.command {
                    return Err(Error::param(format!("config is for {c}, not {}", self.command)));
                }
            }
            "data" => self.data = opt_path(value),
            "synth" => self.synth = if value.is_empty() { None } else { Some(value.parse()?) },
            "out" => self.out = PathBuf::from(value),
            "seed" => self.seed = num(key, value)?,
            "methods" => self.methods = list(value)?,
            "method" => self.method = value.parse()?,
            "framework" => self.framework = value.parse()?,
            "preset" => {
                if value != "table1" {
                    return Err(Error::param(format!("unknown preset {value:?}; the only preset is table1")));
                }
                self.preset = value.to_string();
            }
            "classifier" => self.classifier = value.parse()?,
            "folds" => self.folds = num(key, value)?,
            "threshold" => self.threshold = num(key, value)?,
            "smote_k" => self.smote_k = num(key, value)?,
            "adasyn_k" => self.adasyn_k = num(key, value)?,
            "test_fraction" => self.test_fraction = num(key, value)?,
            "model" => self.model = opt_path(value),
            "count" => self.count = num(key, value)?,
            "condition" => self.condition = if value.is_empty() { None } else { Some(num(key, value)?) },
            "fractions" => {
                self.fractions = value
                    .split(',')
                    .map(str::trim)
                    .filter(|s| !s.is_empty())
                    .map(|s| num(key, s))
                    .collect::<Result<_>>()?
            }
            "sources" => self.sources = list(value)?,
            "probe_folds" => self.probe_folds = num(key, value)?,
            "probe_rounds" => self.probe_rounds = num(key, value)?,
            "input" => self.input = opt_path(value),
            "jobs" => self.jobs = num(key, value)?,
            other => return Err(Error::param(format!("unknown setting {other:?}"))),
        }
        Ok(())
    }

    /// Every setting in a fixed order, as written to the manifest.
    pub fn to_pairs(&self) -> Vec<(String, String)> {
        let mut pairs: Vec<(String, String)> = [
            ("command", self.command.to_string()),
            ("data", show_path(&self.data)),
            ("synth", self.synth.map(|s| s.to_string()).unwrap_or_default()),
            ("out", self.out.display().to_string()),
            ("seed", self.seed.to_string()),
            ("methods", join(&self.methods)),
            ("method", self.method.to_string()),
            ("framework", self.framework.to_string()),
            ("preset", self.preset.clone()),
            ("classifier", self.classifier.name().to_string()),
            ("folds", self.folds.to_string()),
            ("threshold", self.threshold.to_string()),
            ("smote_k", self.smote_k.to_string()),
            ("adasyn_k", self.adasyn_k.to_string()),
            ("test_fraction", self.test_fraction.to_string()),
            ("model", show_path(&self.model)),
            ("count", self.count.to_string()),
            ("condition", self.condition.map(|c| c.to_string()).unwrap_or_default()),
            ("fractions", join(&self.fractions)),
            ("sources", join(&self.sources)),
            ("probe_folds", self.probe_folds.to_string()),
            ("probe_rounds", self.probe_rounds.to_string()),
            ("input", show_path(&self.input)),
            ("jobs", self.jobs.to_string()),
        ]
        .into_iter()
        .map(|(k, v)| (k.to_string(), v))
        .collect();
        pairs.extend(self.gan.iter().map(|(k, v)| (format!("gan.{k}"), v.clone())));
        pairs
    }

    pub fn gan_config(&self, framework: Framework) -> Result<GanConfig> {
        self.experiment().gan_config(framework)
    }

    pub fn probe(&self) -> ProbeConfig {
        ProbeConfig {
            folds: self.probe_folds,
            boost: BoostConfig {
                rounds: self.probe_rounds,
                ..Default::default()
            },
        }
    }

    pub fn experiment(&self) -> ExperimentConfig {
        ExperimentConfig {
            folds: self.folds,
            seed: self.seed,
            classifier: self.classifier,
            gan_overrides: self.gan.clone(),
            probe: self.probe(),
            smote_k: self.smote_k,
            adasyn_k: self.adasyn_k,
            threshold: self.threshold,
        }
    }

    pub fn sweep(&self) -> SweepConfig {
        SweepConfig {
            test_fraction: self.test_fraction,
            seed: self.seed,
            classifier: self.classifier,
            threshold: self.threshold,
        }
    }

    /// The dataset named by `data`, or the synthetic one described by `synth`.
    pub fn dataset(&self) -> Result<Dataset> {
        match (&self.data, &self.synth) {
            (Some(path), _) => load_csv(path),
            (None, Some(s)) => {
                SynthSpec::shifted(s.majority, s.minority, s.dim, s.shift, rng::derive(self.seed, &[rng::tag("synth")]))
                    .generate()
            }
            (None, None) => Err(Error::param("no dataset: set data=<csv path> or synth=majority,minority,dim,shift")),
        }
    }
}

/// One file written by a run, with its SHA-256.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Artifact {
    pub name: String,
    pub sha256: String,
}

/// Sole writer into the output directory; records what it wrote.
struct OutputDir {
    root: PathBuf,
    artifacts: Vec<Artifact>,
}

impl OutputDir {
    fn create(root: &Path) -> Result<Self> {
        fs::create_dir_all(root)?;
        Ok(Self {
            root: root.to_path_buf(),
            artifacts: Vec::new(),
        })
    }

    fn write(&mut self, name: &str, bytes: &[u8]) -> Result<()> {
        fs::write(self.root.join(name), bytes)?;
        self.artifacts.push(Artifact {
            name: name.to_string(),
            sha256: hex(&Sha256::digest(bytes)),
        });
        Ok(())
    }

    fn finish(self, config: &RunConfig) -> Result<Vec<Artifact>> {
        let mut text = String::from("# fraudgan run manifest\n");
        for (k, v) in config.to_pairs() {
            text += &format!("{k}={v}\n");
        }
        for a in &self.artifacts {
            text += &format!("checksum.{}={}\n", a.name, a.sha256);
        }
        fs::write(self.root.join("manifest.txt"), text)?;
        Ok(self.artifacts)
    }
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

fn csv_bytes(dataset: &Dataset) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    write_csv(dataset, &mut buf)?;
    Ok(buf)
}

/// Runs the configured subcommand, writes its outputs and `manifest.txt`
/// under `config.out`, and returns the outputs with their checksums.
pub fn execute(config: &RunConfig) -> Result<Vec<Artifact>> {
    let mut out = OutputDir::create(&config.out)?;
    match config.command {
        Command::SynthData => synth_data(config, &mut out)?,
        Command::TrainGan => train_gan(config, &mut out)?,
        Command::Generate => generate(config, &mut out)?,
        Command::Balance => balance_data(config, &mut out)?,
        Command::Evaluate => evaluate(config, &mut out)?,
        Command::Sweep => sweep(config, &mut out)?,
        Command::Report => report(config, &mut out)?,
    }
    out.finish(config)
}

fn synth_data(config: &RunConfig, out: &mut OutputDir) -> Result<()> {
    if config.synth.is_none() {
        return Err(Error::param("synth-data needs synth=majority,minority,dim,shift"));
    }
    let data = RunConfig { data: None, ..config.clone() }.dataset()?;
    out.write("data.csv", &csv_bytes(&data)?)
}

fn train_gan(config: &RunConfig, out: &mut OutputDir) -> Result<()> {
    let data = config.dataset()?;
    let split = config.sweep().split(&data)?;
    let train = data.subset(&split.train);
    let mut gan = config.gan_config(config.framework)?;
    gan.seed = rng::derive(config.seed, &[rng::tag("train-gan"), rng::tag(config.framework.name())]);
    let fit = fit_generator(&train.class_rows(1), &gan, &config.probe())?;
    if let Some(it) = fit.stop_iteration {
        log::info!("{} stop iteration {it}", config.framework);
    }
    let fw = config.framework.name();
    let mut model = Vec::new();
    write_model(&fit.model, &mut model)?;
    out.write(&format!("model_{fw}.txt"), &model)?;
    let mut log = Vec::new();
    fit.log.write_csv(&mut log)?;
    out.write(&format!("trainlog_{fw}.csv"), &log)
}

fn require_model(config: &RunConfig) -> Result<&Path> {
    config
        .model
        .as_deref()
        .ok_or_else(|| Error::param(format!("{} needs model=<path> from train-gan", config.command)))
}

fn generate(config: &RunConfig, out: &mut OutputDir) -> Result<()> {
    let model = load_model(require_model(config)?)?;
    let seed = rng::derive(config.seed, &[rng::tag("generate")]);
    let rows = match config.condition {
        Some(c) => model.generate(config.count, Some(c), seed)?,
        None => model.generate_mixed(config.count, seed)?,
    };
    let labels = vec![1; rows.rows()];
    out.write("generated.csv", &csv_bytes(&Dataset::unnamed(rows, labels)?)?)
}

fn balance_data(config: &RunConfig, out: &mut OutputDir) -> Result<()> {
    let data = config.dataset()?;
    let scaler = Scaler::fit(&data.features);
    let mut scaled = data.clone();
    scaled.features = scaler.transform(&data.features);
    let model = match config.method.framework() {
        Some(_) => Some(load_model(require_model(config)?)?),
        None => None,
    };
    let mut plan = BalancePlan::new(config.method, config.seed);
    plan.smote_k = config.smote_k;
    plan.adasyn_k = config.adasyn_k;
    if let Some(m) = &model {
        plan = plan.with_gan(m, Some(&scaler));
    }
    let mut balanced = balance(&scaled, &plan)?.strip();
    balanced.features = scaler.inverse(&balanced.features);
    balanced.features.as_mut_slice()[..data.features.len()].copy_from_slice(data.features.as_slice());
    balanced.columns = data.columns.clone();
    out.write("balanced.csv", &csv_bytes(&balanced)?)
}

fn evaluate(config: &RunConfig, out: &mut OutputDir) -> Result<()> {
    if config.methods.is_empty() {
        return Err(Error::param("methods list is empty"));
    }
    let data = config.dataset()?;
    let experiment = config.experiment();
    let mut reports = Vec::new();
    let mut curves = Vec::new();
    let mut logs = Vec::new();
    for &method in &config.methods {
        let outcomes = run_fold_experiment(&data, method, &experiment)?;
        let scores: Vec<f64> = outcomes.iter().flat_map(|o| o.scores.iter().copied()).collect();
        let labels: Vec<u8> = outcomes.iter().flat_map(|o| o.test_labels.iter().copied()).collect();
        curves.push((method.name().to_string(), roc_curve(&scores, &labels)?));
        if let (Some(fw), Some(g)) = (method.framework(), outcomes.first().and_then(|o| o.generator.as_ref())) {
            let mut buf = Vec::new();
            g.log.write_csv(&mut buf)?;
            logs.push((format!("trainlog_{}.csv", fw.name()), buf));
        }
        reports.extend(outcomes.into_iter().map(|o| o.report));
    }
    let mut buf = Vec::new();
    write_reports_csv(&reports, &mut buf)?;
    out.write("reports.csv", &buf)?;
    let mut buf = Vec::new();
    write_aggregate_csv(&aggregate(&reports), &mut buf)?;
    out.write("aggregate.csv", &buf)?;
    out.write("roc.svg", roc_svg(&curves).as_bytes())?;
    for (name, bytes) in logs {
        out.write(&name, &bytes)?;
    }
    Ok(())
}

fn sweep(config: &RunConfig, out: &mut OutputDir) -> Result<()> {
    let data = config.dataset()?;
    let model = if config.sources.iter().any(|s| *s != Source::Real) {
        Some(load_model(require_model(config)?)?)
    } else {
        None
    };
    let rows = augmentation_sweep(&data, &config.fractions, &config.sources, model.as_ref(), &config.sweep())?;
    let mut buf = Vec::new();
    write_sweep_csv(&rows, &mut buf)?;
    out.write("sweep.csv", &buf)
}

fn report(config: &RunConfig, out: &mut OutputDir) -> Result<()> {
    let path = config
        .input
        .as_ref()
        .ok_or_else(|| Error::param("report needs input=<reports.csv>"))?;
    let file = fs::File::open(path).map_err(|e| Error::data(format!("cannot open {}: {e}", path.display())))?;
    let reports = read_reports_csv(file)?;
    let mut buf = Vec::new();
    write_aggregate_csv(&aggregate(&reports), &mut buf)?;
    out.write("aggregate.csv", &buf)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::ErrorKind;

    fn pairs(text: &str) -> Vec<(String, String)> {
        parse_pairs(text).unwrap()
    }

    #[test]
    fn later_pairs_override_earlier() {
        let mut c = RunConfig::new(Command::Evaluate);
        c.apply(&pairs("folds=5\nmethods=none,smote\n# note\n\nfolds=3\ngan.max_iterations=50"))
            .unwrap();
        assert_eq!(c.folds, 3);
        assert_eq!(c.methods, vec![Method::None, Method::Smote]);
        assert_eq!(c.gan_config(Framework::Wgan).unwrap().max_iterations, 50);
    }

    #[test]
    fn pairs_roundtrip_through_manifest_text() {
        let mut c = RunConfig::new(Command::Sweep);
        c.apply(&pairs(
            "synth=500,20,3,1.5\nseed=42\nfractions=0,0.5\nsources=real\ncondition=1\ngan.learning_rate=0.003",
        ))
        .unwrap();
        let text: String = c.to_pairs().iter().map(|(k, v)| format!("{k}={v}\n")).collect();
        let mut back = RunConfig::new(Command::Sweep);
        back.apply(&pairs(&(text + "checksum.sweep.csv=abc\n"))).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn bad_settings_are_config_errors() {
        let mut c = RunConfig::new(Command::Evaluate);
        for (k, v) in [
            ("nonsense", "1"),
            ("folds", "x"),
            ("methods", "none,magic"),
            ("preset", "other"),
            ("gan.hidden", "3"),
            ("gan.seed", "3"),
            ("command", "sweep"),
            ("synth", "1,2"),
        ] {
            assert_eq!(c.set(k, v).unwrap_err().kind(), ErrorKind::Config, "{k}={v}");
        }
        assert!(parse_pairs("no equals sign").is_err());
        assert_eq!(c.dataset().unwrap_err().kind(), ErrorKind::Config);
    }

    #[test]
    fn table1_preset_for_wgan() {
        let mut c = RunConfig::new(Command::TrainGan);
        c.apply(&pairs("framework=wgan\npreset=table1")).unwrap();
        let g = c.gan_config(c.framework).unwrap();
        assert_eq!((g.learning_rate, g.dropout, g.hidden_nodes), (0.011, 0.5, 63));
    }

    #[test]
    fn evaluate_writes_outputs_and_manifest() {
        let dir = tempfile::tempdir().unwrap();
        let mut c = RunConfig::new(Command::Evaluate);
        c.apply(&pairs("synth=300,30,2,2.5\nmethods=none,ros\nfolds=3")).unwrap();
        c.out = dir.path().join("run");
        let artifacts = execute(&c).unwrap();
        let names: Vec<&str> = artifacts.iter().map(|a| a.name.as_str()).collect();
        assert_eq!(names, ["reports.csv", "aggregate.csv", "roc.svg"]);
        let aggregate = fs::read_to_string(c.out.join("aggregate.csv")).unwrap();
        assert_eq!(aggregate.lines().count(), 3);
        let manifest = fs::read_to_string(c.out.join("manifest.txt")).unwrap();
        let reports = fs::read(c.out.join("reports.csv")).unwrap();
        assert!(manifest.contains(&format!("checksum.reports.csv={}", hex(&Sha256::digest(&reports)))));

        let mut again = RunConfig::new(Command::Evaluate);
        again.apply(&pairs(&manifest)).unwrap();
        again.out = dir.path().join("rerun");
        execute(&again).unwrap();
        assert_eq!(fs::read(again.out.join("reports.csv")).unwrap(), reports);
    }

    #[test]
    fn balance_keeps_original_rows_and_equalizes() {
        let dir = tempfile::tempdir().unwrap();
        let mut c = RunConfig::new(Command::Balance);
        c.apply(&pairs("synth=200,20,3,2\nmethod=smote")).unwrap();
        c.out = dir.path().to_path_buf();
        execute(&c).unwrap();
        let original = c.dataset().unwrap();
        let balanced = load_csv(dir.path().join("balanced.csv")).unwrap();
        assert_eq!(balanced.count(0), 200);
        assert_eq!(balanced.count(1), 200);
        assert_eq!(balanced.subset(&(0..220).collect::<Vec<_>>()), original);
    }

    #[test]
    fn report_rebuilds_aggregate() {
        let dir = tempfile::tempdir().unwrap();
        let mut c = RunConfig::new(Command::Evaluate);
        c.apply(&pairs("synth=300,30,2,2.5\nmethods=none,smote\nfolds=3")).unwrap();
        c.out = dir.path().join("eval");
        execute(&c).unwrap();
        let mut r = RunConfig::new(Command::Report);
        r.input = Some(c.out.join("reports.csv"));
        r.out = dir.path().join("report");
        execute(&r).unwrap();
        assert_eq!(
            fs::read(r.out.join("aggregate.csv")).unwrap(),
            fs::read(c.out.join("aggregate.csv")).unwrap()
        );
    }
}
