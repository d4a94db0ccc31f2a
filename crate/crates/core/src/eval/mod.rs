//! Link-prediction evaluation: edge splits, the edge classifier, ranking and
//! thresholded metrics, and the network/topic distance quadrants.

pub mod metrics;
pub mod mlp;
pub mod pipeline;
pub mod quadrant;
pub mod report;
pub mod split;

pub use metrics::{
    auprc, average_precision, balanced_accuracy, compute_metrics, macro_f1, region_metrics,
    roc_auc, MetricName, Metrics, RegionMetrics,
};
pub use mlp::{edge_feature, train_edge_classifier, MlpClassifier, MlpConfig, MlpReport};
pub use pipeline::{
    edge_features, embed, evaluate_embeddings, inference_rng, method_seed, repeat_seed,
    run_evaluation, run_repeat, train_gnn, EvalConfig, GnnSettings, Method, MethodSettings,
    RepeatResult, SplitResult, TrainedGnn,
};
pub use quadrant::{assign_quadrants, median, Quadrant, QuadrantAssignment, Thresholds};
pub use report::{EvaluationReport, MethodSummary, Summary, REPORT_VERSION};
pub use split::{split_edges, Edge, EdgeSplit};
