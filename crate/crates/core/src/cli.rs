//! The `combsage` command line: synthetic data generation, training,
//! embedding and evaluation runs that write a reproducibility manifest.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::data::{
    generate_synthetic, load_features, load_graph, load_labels, save_edges, save_labels,
    save_matrix, write_atomic, NodeLabel, SynthConfig,
};
use crate::deepwalk::WalkConfig;
use crate::error::{Error, Result};
use crate::eval::{
    embed, inference_rng, method_seed, repeat_seed, run_evaluation, split_edges, train_gnn,
    EvalConfig, EvaluationReport, GnnSettings, Method, MethodSettings, MetricName, Quadrant,
    Thresholds,
};
use crate::graph::Graph;
use crate::model::{
    load_checkpoint, model_forward, save_checkpoint, Checkpoint, CHECKPOINT_VERSION,
};
use crate::numeric::Matrix;
use crate::seeds;

pub const CONFIG_VERSION: u32 = 1;

#[derive(Debug, Parser)]
#[command(
    name = "combsage",
    version,
    about = "Graph embeddings and citation prediction with ComBSAGE"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Run configuration (JSON). Defaults apply when omitted.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    /// Master seed; overrides the config's `seed`.
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    /// Output directory; overrides the config's `output_dir`.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,

    /// Write into a non-empty output directory.
    #[arg(long, global = true)]
    pub force: bool,

    /// Train on the full graph instead of the training split.
    #[arg(long, global = true)]
    pub full: bool,

    /// Fixed quadrant thresholds for network and topic distance.
    #[arg(long, global = true, num_args = 2, value_names = ["NET", "TOPIC"], allow_negative_numbers = true)]
    pub thresholds: Option<Vec<f64>>,

    /// Model checkpoint to embed with (`embed` only).
    #[arg(long, global = true)]
    pub checkpoint: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    /// Write a synthetic graph, features and labels.
    Generate,
    /// Train the configured method and write its embeddings.
    Train,
    /// Embed every node with a saved checkpoint or a non-parametric method.
    Embed,
    /// Run the split/classify protocol for the configured method.
    Evaluate,
    /// Run the protocol for all five methods on the same splits.
    Compare,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub version: u32,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    #[serde(default)]
    pub data: DataConfig,
    #[serde(default)]
    pub method: MethodConfig,
    #[serde(default)]
    pub eval: EvalConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            version: CONFIG_VERSION,
            seed: 0,
            output_dir: None,
            data: DataConfig::default(),
            method: MethodConfig::default(),
            eval: EvalConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum DataConfig {
    Synthetic(SynthConfig),
    Files(DataFiles),
}

impl Default for DataConfig {
    fn default() -> Self {
        DataConfig::Synthetic(SynthConfig::default())
    }
}

/// Paths are resolved against the directory holding the config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataFiles {
    pub edges: PathBuf,
    pub features: PathBuf,
    #[serde(default)]
    pub labels: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MethodConfig {
    pub name: Method,
    pub gnn: GnnSettings,
    pub deepwalk: WalkConfig,
}

impl Default for MethodConfig {
    fn default() -> Self {
        MethodConfig {
            name: Method::ComBSage,
            gnn: GnnSettings::default(),
            deepwalk: WalkConfig::default(),
        }
    }
}

impl MethodConfig {
    pub fn settings(&self) -> MethodSettings {
        MethodSettings {
            gnn: self.gnn.clone(),
            deepwalk: self.deepwalk.clone(),
        }
    }
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<RunConfig> {
        let cfg: RunConfig =
            serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        if cfg.version != CONFIG_VERSION {
            return Err(Error::Config(format!(
                "config version {} is not supported (expected {CONFIG_VERSION})",
                cfg.version
            )));
        }
        Ok(cfg)
    }

    /// Reads a config file and makes relative data paths absolute against
    /// the file's directory.
    pub fn load(path: &Path) -> Result<RunConfig> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg = RunConfig::from_json(&text)?;
        if let DataConfig::Files(files) = &mut cfg.data {
            let base = path.parent().unwrap_or(Path::new(""));
            files.edges = base.join(&files.edges);
            files.features = base.join(&files.features);
            if let Some(l) = &mut files.labels {
                *l = base.join(&*l);
            }
        }
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if let DataConfig::Synthetic(s) = &self.data {
            s.validate()?;
        }
        self.method.settings().validate()?;
        self.eval.validate()
    }
}

/// Reproducibility record written next to every run's outputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub tool_version: String,
    pub command: String,
    pub config: RunConfig,
    pub seeds: BTreeMap<String, u64>,
    /// SHA-256 of each input file.
    pub inputs: BTreeMap<String, String>,
    /// SHA-256 of each output file, keyed by file name.
    pub outputs: BTreeMap<String, String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub notes: Option<serde_json::Value>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

fn hash_file(path: &Path) -> Result<String> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    Ok(sha256_hex(&bytes))
}

struct Dataset {
    graph: Graph,
    features: Matrix,
    labels: Option<Vec<NodeLabel>>,
    inputs: BTreeMap<String, String>,
}

fn load_data(cfg: &RunConfig) -> Result<Dataset> {
    match &cfg.data {
        DataConfig::Synthetic(s) => {
            let data = generate_synthetic(&SynthConfig {
                seed: seeds::derive_seed(cfg.seed, "data"),
                ..s.clone()
            })?;
            Ok(Dataset {
                graph: data.graph,
                features: data.features,
                labels: Some(data.labels),
                inputs: BTreeMap::new(),
            })
        }
        DataConfig::Files(files) => {
            let features = load_features(&files.features, None)?;
            let graph = load_graph(&files.edges, features.rows())?;
            let mut inputs = BTreeMap::new();
            inputs.insert(files.edges.display().to_string(), hash_file(&files.edges)?);
            inputs.insert(
                files.features.display().to_string(),
                hash_file(&files.features)?,
            );
            let labels = match &files.labels {
                Some(path) => {
                    let labels = load_labels(path)?;
                    if labels.len() != graph.num_nodes() {
                        return Err(Error::Input(format!(
                            "{}: {} labels for {} nodes",
                            path.display(),
                            labels.len(),
                            graph.num_nodes()
                        )));
                    }
                    inputs.insert(path.display().to_string(), hash_file(path)?);
                    Some(labels)
                }
                None => None,
            };
            Ok(Dataset {
                graph,
                features,
                labels,
                inputs,
            })
        }
    }
}

/// Collects output files in memory and writes them atomically together with
/// the manifest, refusing to touch any input file.
struct Run {
    dir: PathBuf,
    command: Command,
    config: RunConfig,
    seeds: BTreeMap<String, u64>,
    inputs: BTreeMap<String, String>,
    files: Vec<(String, Vec<u8>)>,
    notes: Option<serde_json::Value>,
}

impl Run {
    fn add(&mut self, name: &str, bytes: Vec<u8>) {
        self.files.push((name.to_string(), bytes));
    }

    fn add_with(&mut self, name: &str, write: impl FnOnce(&Path) -> Result<()>) -> Result<()> {
        // Reuse the file writers by rendering through a scratch file.
        let scratch =
            tempfile::NamedTempFile::new().map_err(|e| Error::io(std::env::temp_dir(), e))?;
        write(scratch.path())?;
        let bytes = std::fs::read(scratch.path()).map_err(|e| Error::io(scratch.path(), e))?;
        self.add(name, bytes);
        Ok(())
    }

    fn finish(self) -> Result<Manifest> {
        let input_paths: Vec<PathBuf> = self
            .inputs
            .keys()
            .filter_map(|p| std::fs::canonicalize(p).ok())
            .collect();
        let mut outputs = BTreeMap::new();
        for (name, bytes) in &self.files {
            let path = self.dir.join(name);
            if let Ok(canonical) = std::fs::canonicalize(&path) {
                if input_paths.contains(&canonical) {
                    return Err(Error::Config(format!(
                        "refusing to overwrite input file {}",
                        path.display()
                    )));
                }
            }
            outputs.insert(name.clone(), sha256_hex(bytes));
        }
        for (name, bytes) in &self.files {
            write_atomic(&self.dir.join(name), bytes)?;
        }
        let manifest = Manifest {
            tool: env!("CARGO_PKG_NAME").to_string(),
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            command: serde_json::to_value(self.command)?
                .as_str()
                .unwrap_or_default()
                .to_string(),
            config: self.config,
            seeds: self.seeds,
            inputs: self.inputs,
            outputs,
            notes: self.notes,
        };
        let text = serde_json::to_string_pretty(&manifest)?;
        write_atomic(&self.dir.join("manifest.json"), text.as_bytes())?;
        Ok(manifest)
    }
}

fn prepare_output(dir: &Path, force: bool) -> Result<()> {
    if dir.exists() {
        let mut entries = std::fs::read_dir(dir).map_err(|e| Error::io(dir, e))?;
        if entries.next().is_some() && !force {
            return Err(Error::Config(format!(
                "output directory {} is not empty; pass --force to write into it",
                dir.display()
            )));
        }
    } else {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    Ok(())
}

/// Applies command-line overrides to the loaded config.
pub fn effective_config(cli: &Cli) -> Result<RunConfig> {
    let mut cfg = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(out) = &cli.output {
        cfg.output_dir = Some(out.clone());
    }
    if let Some(t) = &cli.thresholds {
        cfg.eval.thresholds = Some(Thresholds {
            network: t[0],
            topic: t[1],
        });
    }
    cfg.validate()?;
    Ok(cfg)
}

pub fn run(cli: &Cli) -> Result<Manifest> {
    let cfg = effective_config(cli)?;
    if cli.command == Command::Generate && !matches!(cfg.data, DataConfig::Synthetic(_)) {
        return Err(Error::Config(
            "generate needs a `synthetic` data section".into(),
        ));
    }
    let dir = cfg.output_dir.clone().ok_or_else(|| {
        Error::Config("no output directory; pass --output or set output_dir".into())
    })?;
    prepare_output(&dir, cli.force)?;
    let data = load_data(&cfg)?;
    let mut run = Run {
        dir,
        command: cli.command,
        seeds: BTreeMap::from([("master".to_string(), cfg.seed)]),
        inputs: data.inputs.clone(),
        config: cfg,
        files: Vec::new(),
        notes: None,
    };
    match cli.command {
        Command::Generate => generate(&mut run, &data)?,
        Command::Train => train(&mut run, &data, cli.full)?,
        Command::Embed => embed_cmd(&mut run, &data, cli.checkpoint.as_deref())?,
        Command::Evaluate => {
            let method = run.config.method.name;
            evaluate(&mut run, &data, &[method])?
        }
        Command::Compare => evaluate(&mut run, &data, &Method::ALL)?,
    }
    run.finish()
}

fn generate(run: &mut Run, data: &Dataset) -> Result<()> {
    run.seeds
        .insert("data".into(), seeds::derive_seed(run.config.seed, "data"));
    run.add_with("edges.txt", |p| save_edges(p, &data.graph))?;
    run.add_with("features.txt", |p| save_matrix(p, &data.features))?;
    let labels = data
        .labels
        .as_deref()
        .expect("synthetic data carries labels");
    run.add_with("labels.txt", |p| save_labels(p, labels))?;
    eprintln!(
        "generated {} nodes, {} edges, {}-dimensional features",
        data.graph.num_nodes(),
        data.graph.num_edges(),
        data.features.cols()
    );
    Ok(())
}

fn train(run: &mut Run, data: &Dataset, full: bool) -> Result<()> {
    let cfg = run.config.clone();
    let method = cfg.method.name;
    let settings = cfg.method.settings();
    let repeat = repeat_seed(cfg.seed, 0);
    let seed = method_seed(repeat, method);
    run.seeds.insert("method".into(), seed);
    let graph = if full {
        data.graph.clone()
    } else {
        let split_seed = seeds::derive_seed(repeat, "split");
        run.seeds.insert("split".into(), split_seed);
        split_edges(
            &data.graph,
            cfg.eval.test_frac,
            cfg.eval.val_frac,
            split_seed,
        )?
        .1
    };
    eprintln!(
        "training {method} on {} edges of {}",
        graph.num_edges(),
        if full {
            "the full graph"
        } else {
            "the training split"
        }
    );
    let embeddings = match method.architecture(&settings.gnn) {
        Some(_) => {
            let trained = train_gnn(method, &graph, &data.features, &settings, seed)?;
            let checkpoint = Checkpoint {
                version: CHECKPOINT_VERSION,
                seed,
                architecture: trained.architecture,
                params: trained.params,
            };
            run.add_with("checkpoint.json", |p| save_checkpoint(p, &checkpoint))?;
            run.notes = Some(serde_json::json!({ "epoch_losses": trained.report.epoch_losses }));
            trained.embeddings
        }
        None => embed(method, &graph, &data.features, &settings, seed)?,
    };
    run.add_with("embeddings.txt", |p| save_matrix(p, &embeddings))
}

fn embed_cmd(run: &mut Run, data: &Dataset, checkpoint: Option<&Path>) -> Result<()> {
    let embeddings = match checkpoint {
        Some(path) => {
            let ck = load_checkpoint(path)?;
            run.inputs
                .insert(path.display().to_string(), hash_file(path)?);
            run.seeds.insert("method".into(), ck.seed);
            if ck.params.input_dim() != data.features.cols() {
                return Err(Error::Input(format!(
                    "checkpoint expects {}-dimensional features, data has {}",
                    ck.params.input_dim(),
                    data.features.cols()
                )));
            }
            model_forward(
                &data.graph,
                &data.features,
                &ck.params,
                &mut inference_rng(ck.seed),
            )?
        }
        None => {
            let method = run.config.method.name;
            if method.architecture(&run.config.method.gnn).is_some() {
                return Err(Error::Config(format!(
                    "embedding with {method} needs --checkpoint from a previous train run"
                )));
            }
            let seed = method_seed(repeat_seed(run.config.seed, 0), method);
            run.seeds.insert("method".into(), seed);
            embed(
                method,
                &data.graph,
                &data.features,
                &run.config.method.settings(),
                seed,
            )?
        }
    };
    run.add_with("embeddings.txt", |p| save_matrix(p, &embeddings))
}

fn evaluate(run: &mut Run, data: &Dataset, methods: &[Method]) -> Result<()> {
    let cfg = run.config.clone();
    for r in 0..cfg.eval.repeats {
        run.seeds
            .insert(format!("repeat/{r}"), repeat_seed(cfg.seed, r));
    }
    let report = run_evaluation(
        &data.graph,
        &data.features,
        methods,
        &cfg.method.settings(),
        &cfg.eval,
        cfg.seed,
    )?;
    print_summary(&report);
    run.add(
        "metrics.json",
        serde_json::to_string_pretty(&report)?.into_bytes(),
    );
    run.add("metrics.csv", report.to_csv().into_bytes());
    Ok(())
}

fn print_summary(report: &EvaluationReport) {
    println!(
        "{:<16} {:>17} {:>17} {:>17}",
        "method", "AUC", "HighHigh bal.acc", "HighHigh AUPRC"
    );
    let fmt = |s: Option<crate::eval::Summary>| match s {
        Some(s) => format!("{:.4} ± {:.4}", s.mean, s.sd),
        None => "n/a".to_string(),
    };
    for &m in &report.methods {
        println!(
            "{:<16} {:>17} {:>17} {:>17}",
            m.as_str(),
            fmt(report.overall(m, MetricName::AucRoc)),
            fmt(report.region(m, Quadrant::HighHigh, MetricName::BalancedAccuracy)),
            fmt(report.region(m, Quadrant::HighHigh, MetricName::Auprc)),
        );
    }
}

/// Parses arguments, runs the command, and returns the process exit code:
/// 0 on success, 1 for configuration or input errors, 2 for numeric failures.
pub fn main_from_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match run(&cli) {
        Ok(_) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
