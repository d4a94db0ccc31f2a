use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::metrics::{compute_metrics, region_metrics, Metrics, RegionMetrics};
use super::mlp::{edge_feature, train_edge_classifier, MlpConfig};
use super::quadrant::{assign_quadrants, Quadrant, QuadrantAssignment, Thresholds};
use super::report::{summarize, EvaluationReport};
use super::split::{split_edges, Edge, EdgeSplit};
use crate::aggregators::AggregatorKind;
use crate::deepwalk::{deepwalk, WalkConfig};
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::model::{
    embed_features_only, model_forward, train_unsupervised, Architecture, LayerKind, ModelParams,
    TrainConfig, TrainReport,
};
use crate::numeric::Matrix;
use crate::seeds;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Method {
    #[serde(rename = "deepwalk")]
    DeepWalk,
    #[serde(rename = "features_only")]
    FeaturesOnly,
    #[serde(rename = "graphsage_mean")]
    GraphSageMean,
    #[serde(rename = "graphsage_lstm")]
    GraphSageLstm,
    #[serde(rename = "combsage")]
    ComBSage,
}

impl Method {
    pub const ALL: [Method; 5] = [
        Method::DeepWalk,
        Method::FeaturesOnly,
        Method::GraphSageMean,
        Method::GraphSageLstm,
        Method::ComBSage,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Method::DeepWalk => "deepwalk",
            Method::FeaturesOnly => "features_only",
            Method::GraphSageMean => "graphsage_mean",
            Method::GraphSageLstm => "graphsage_lstm",
            Method::ComBSage => "combsage",
        }
    }

    /// The GNN architecture behind this method, if it is one.
    pub fn architecture(self, gnn: &GnnSettings) -> Option<Architecture> {
        let base = match self {
            Method::DeepWalk | Method::FeaturesOnly => return None,
            Method::GraphSageMean => Architecture::graphsage(AggregatorKind::Mean),
            Method::GraphSageLstm => Architecture::graphsage(AggregatorKind::Lstm),
            Method::ComBSage => Architecture {
                layer: LayerKind::ComBSage,
                agg_c: gnn.agg_c,
                agg_i: gnn.agg_i,
                jumping_knowledge: gnn.jumping_knowledge,
                ..Architecture::combsage()
            },
        };
        Some(
            base.with_hidden_dims(gnn.hidden_dims.clone())
                .with_fanouts(gnn.fanouts.clone()),
        )
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| {
                Error::Config(format!(
                    "unknown method {s:?}; expected one of deepwalk, features_only, graphsage_mean, graphsage_lstm, combsage"
                ))
            })
    }
}

/// Hyperparameters shared by the GNN methods. The aggregator pair and
/// jumping knowledge apply to ComBSAGE only; GraphSAGE baselines use a
/// single aggregator and the last layer's output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GnnSettings {
    pub hidden_dims: Vec<usize>,
    pub fanouts: Vec<usize>,
    pub agg_c: AggregatorKind,
    pub agg_i: AggregatorKind,
    pub jumping_knowledge: bool,
    pub train: TrainConfig,
}

impl Default for GnnSettings {
    fn default() -> Self {
        let arch = Architecture::combsage();
        GnnSettings {
            hidden_dims: arch.hidden_dims,
            fanouts: arch.fanouts,
            agg_c: arch.agg_c,
            agg_i: arch.agg_i,
            jumping_knowledge: arch.jumping_knowledge,
            train: TrainConfig::default(),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MethodSettings {
    pub gnn: GnnSettings,
    pub deepwalk: WalkConfig,
}

impl MethodSettings {
    pub fn validate(&self) -> Result<()> {
        self.deepwalk.validate()?;
        self.gnn.train.validate()?;
        Method::ComBSage
            .architecture(&self.gnn)
            .expect("combsage is a GNN")
            .validate()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EvalConfig {
    pub test_frac: f64,
    pub val_frac: f64,
    pub repeats: usize,
    /// Fixed quadrant cut points; per-axis medians of the test edges when unset.
    pub thresholds: Option<Thresholds>,
    pub classifier: MlpConfig,
}

impl Default for EvalConfig {
    fn default() -> Self {
        EvalConfig {
            test_frac: 0.20,
            val_frac: 0.05,
            repeats: 5,
            thresholds: None,
            classifier: MlpConfig::default(),
        }
    }
}

impl EvalConfig {
    pub fn validate(&self) -> Result<()> {
        if self.repeats == 0 {
            return Err(Error::Config("repeats must be at least 1".into()));
        }
        if !(self.test_frac > 0.0 && self.val_frac >= 0.0 && self.test_frac + self.val_frac < 1.0) {
            return Err(Error::Config(format!(
                "need 0 < test_frac + val_frac < 1, got {} and {}",
                self.test_frac, self.val_frac
            )));
        }
        self.classifier.validate()
    }
}

/// Embeds every node of `graph` with `method`. All randomness derives from
/// `seed`.
pub fn embed(
    method: Method,
    graph: &Graph,
    features: &Matrix,
    settings: &MethodSettings,
    seed: u64,
) -> Result<Matrix> {
    if features.rows() != graph.num_nodes() {
        return Err(Error::Input(format!(
            "{} feature rows for {} nodes",
            features.rows(),
            graph.num_nodes()
        )));
    }
    match method {
        Method::FeaturesOnly => Ok(embed_features_only(features)),
        Method::DeepWalk => deepwalk(
            graph,
            &WalkConfig {
                seed: seeds::derive_seed(seed, "deepwalk"),
                ..settings.deepwalk.clone()
            },
        ),
        gnn => Ok(train_gnn(gnn, graph, features, settings, seed)?.embeddings),
    }
}

pub struct TrainedGnn {
    pub architecture: Architecture,
    pub params: ModelParams,
    pub report: TrainReport,
    pub embeddings: Matrix,
}

/// Trains a GNN method on `graph` and embeds every node with it. Training
/// uses the sub-seed "train" of `seed`; inference sampling uses
/// [`inference_rng`].
pub fn train_gnn(
    method: Method,
    graph: &Graph,
    features: &Matrix,
    settings: &MethodSettings,
    seed: u64,
) -> Result<TrainedGnn> {
    let architecture = method
        .architecture(&settings.gnn)
        .ok_or_else(|| Error::Precondition(format!("{method} is not a GNN method")))?;
    let cfg = TrainConfig {
        seed: seeds::derive_seed(seed, "train"),
        ..settings.gnn.train.clone()
    };
    let (params, report) = train_unsupervised(graph, features, &architecture, &cfg)?;
    let embeddings = model_forward(graph, features, &params, &mut inference_rng(seed))?;
    Ok(TrainedGnn {
        architecture,
        params,
        report,
        embeddings,
    })
}

/// Neighbour-sampling stream for inference with a model trained under `seed`.
pub fn inference_rng(seed: u64) -> rand_chacha::ChaCha8Rng {
    seeds::stream(seed, "inference")
}

pub fn edge_features(embeddings: &Matrix, edges: &[Edge]) -> Result<Vec<Vec<f64>>> {
    edges
        .iter()
        .map(|&(u, v)| {
            if u.max(v) >= embeddings.rows() {
                return Err(Error::Input(format!(
                    "edge ({u}, {v}) is outside the {} embedding rows",
                    embeddings.rows()
                )));
            }
            edge_feature(embeddings.row(u), embeddings.row(v))
        })
        .collect()
}

/// Test-set results of one method on one split.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitResult {
    pub overall: Metrics,
    pub regions: BTreeMap<Quadrant, RegionMetrics>,
    pub classifier_epochs: usize,
    pub classifier_best_epoch: usize,
    /// Classifier probabilities for the test edges, positives first.
    #[serde(skip)]
    pub scores: Vec<f64>,
}

/// Trains a fresh edge classifier on the split's training edges (validation
/// edges for early stopping), scores the test edges, and stratifies the
/// metrics by quadrant.
pub fn evaluate_embeddings(
    embeddings: &Matrix,
    split: &EdgeSplit,
    quadrants: &QuadrantAssignment,
    classifier: &MlpConfig,
) -> Result<SplitResult> {
    let (train_edges, train_labels) = split.train_edges();
    let (val_edges, val_labels) = split.val_edges();
    let (test_edges, test_labels) = split.test_edges();
    if quadrants.len() != test_edges.len() {
        return Err(Error::Shape(format!(
            "{} quadrant labels for {} test edges",
            quadrants.len(),
            test_edges.len()
        )));
    }
    let train_x = edge_features(embeddings, &train_edges)?;
    let val_x = edge_features(embeddings, &val_edges)?;
    let test_x = edge_features(embeddings, &test_edges)?;
    let (model, report) = train_edge_classifier(
        &train_x,
        &train_labels,
        Some((&val_x, &val_labels)),
        classifier,
    )?;
    let scores = model.predict_all(&test_x);
    if scores.iter().any(|s| !s.is_finite()) {
        return Err(Error::Numeric(
            "classifier produced a non-finite score".into(),
        ));
    }
    let overall = compute_metrics(&scores, &test_labels)?;
    let mut regions = BTreeMap::new();
    for q in Quadrant::ALL {
        let idx = quadrants.members(q);
        let s: Vec<f64> = idx.iter().map(|&i| scores[i]).collect();
        let l: Vec<bool> = idx.iter().map(|&i| test_labels[i]).collect();
        regions.insert(q, region_metrics(&s, &l)?);
    }
    Ok(SplitResult {
        overall,
        regions,
        classifier_epochs: report.epoch_losses.len(),
        classifier_best_epoch: report.best_epoch,
        scores,
    })
}

/// Everything produced for one split of the evaluation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RepeatResult {
    pub repeat: usize,
    pub seed: u64,
    pub split_seed: u64,
    pub train_edges: usize,
    pub test_positives: usize,
    pub test_negatives: usize,
    pub thresholds: Thresholds,
    pub methods: BTreeMap<Method, SplitResult>,
    #[serde(skip)]
    pub split: Option<EdgeSplit>,
    #[serde(skip)]
    pub quadrants: Option<QuadrantAssignment>,
}

/// Seed of repeat `r` under `master`.
pub fn repeat_seed(master: u64, r: usize) -> u64 {
    seeds::derive_seed(master, &format!("repeat/{r}"))
}

/// Seed used to embed with `method` inside the repeat with seed `repeat`.
pub fn method_seed(repeat: u64, method: Method) -> u64 {
    seeds::derive_seed(repeat, &format!("embed/{method}"))
}

/// One split of the protocol: hold out edges, embed the training graph with
/// DeepWalk for network distances, assign quadrants, then embed and score
/// every requested method on the same split.
pub fn run_repeat(
    graph: &Graph,
    features: &Matrix,
    methods: &[Method],
    settings: &MethodSettings,
    eval: &EvalConfig,
    master_seed: u64,
    repeat: usize,
) -> Result<RepeatResult> {
    let seed = repeat_seed(master_seed, repeat);
    let split_seed = seeds::derive_seed(seed, "split");
    let (split, train_graph) = split_edges(graph, eval.test_frac, eval.val_frac, split_seed)?;
    let network = embed(
        Method::DeepWalk,
        &train_graph,
        features,
        settings,
        method_seed(seed, Method::DeepWalk),
    )?;
    let (test_edges, test_labels) = split.test_edges();
    let quadrants = assign_quadrants(&test_edges, &network, features, eval.thresholds)?;

    let mut results = BTreeMap::new();
    for &method in methods {
        let embeddings = match method {
            Method::DeepWalk => network.clone(),
            m => embed(m, &train_graph, features, settings, method_seed(seed, m))?,
        };
        let classifier = MlpConfig {
            seed: seeds::derive_seed(seed, &format!("classifier/{method}")),
            ..eval.classifier.clone()
        };
        results.insert(
            method,
            evaluate_embeddings(&embeddings, &split, &quadrants, &classifier)?,
        );
    }
    let test_positives = test_labels.iter().filter(|&&l| l).count();
    Ok(RepeatResult {
        repeat,
        seed,
        split_seed,
        train_edges: train_graph.num_edges(),
        test_positives,
        test_negatives: test_labels.len() - test_positives,
        thresholds: quadrants.thresholds,
        methods: results,
        split: Some(split),
        quadrants: Some(quadrants),
    })
}

/// The full protocol over `eval.repeats` independent splits.
pub fn run_evaluation(
    graph: &Graph,
    features: &Matrix,
    methods: &[Method],
    settings: &MethodSettings,
    eval: &EvalConfig,
    master_seed: u64,
) -> Result<EvaluationReport> {
    eval.validate()?;
    settings.validate()?;
    if methods.is_empty() {
        return Err(Error::Config("no methods to evaluate".into()));
    }
    let mut methods = methods.to_vec();
    methods.sort();
    methods.dedup();
    let repeats = (0..eval.repeats)
        .map(|r| run_repeat(graph, features, &methods, settings, eval, master_seed, r))
        .collect::<Result<Vec<_>>>()?;
    Ok(summarize(master_seed, &methods, repeats))
}
