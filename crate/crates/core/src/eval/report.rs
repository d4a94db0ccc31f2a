use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::metrics::MetricName;
use super::pipeline::{Method, RepeatResult};
use super::quadrant::Quadrant;

pub const REPORT_VERSION: u32 = 1;

/// Mean and sample standard deviation over the repeats where a value was
/// defined.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub n: usize,
    pub mean: f64,
    pub sd: f64,
}

impl Summary {
    pub fn of(values: &[f64]) -> Option<Summary> {
        if values.is_empty() {
            return None;
        }
        let n = values.len();
        let mean = values.iter().sum::<f64>() / n as f64;
        let sd = if n > 1 {
            (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
        } else {
            0.0
        };
        Some(Summary { n, mean, sd })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodSummary {
    pub overall: BTreeMap<MetricName, Summary>,
    /// `None` where a metric was undefined in every repeat (e.g. a region
    /// holding a single class).
    pub regions: BTreeMap<Quadrant, BTreeMap<MetricName, Option<Summary>>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub version: u32,
    pub master_seed: u64,
    pub repeats: usize,
    pub methods: Vec<Method>,
    pub summary: BTreeMap<Method, MethodSummary>,
    pub per_repeat: Vec<RepeatResult>,
}

pub(crate) fn summarize(
    master_seed: u64,
    methods: &[Method],
    per_repeat: Vec<RepeatResult>,
) -> EvaluationReport {
    let mut summary = BTreeMap::new();
    for &method in methods {
        let results: Vec<_> = per_repeat
            .iter()
            .filter_map(|r| r.methods.get(&method))
            .collect();
        let overall = MetricName::ALL
            .into_iter()
            .map(|m| {
                let values: Vec<f64> = results.iter().map(|r| r.overall.get(m)).collect();
                (m, Summary::of(&values).expect("at least one repeat"))
            })
            .collect();
        let regions = Quadrant::ALL
            .into_iter()
            .map(|q| {
                let per_metric = MetricName::ALL
                    .into_iter()
                    .map(|m| {
                        let values: Vec<f64> = results
                            .iter()
                            .filter_map(|r| r.regions[&q].get(m))
                            .collect();
                        (m, Summary::of(&values))
                    })
                    .collect();
                (q, per_metric)
            })
            .collect();
        summary.insert(method, MethodSummary { overall, regions });
    }
    EvaluationReport {
        version: REPORT_VERSION,
        master_seed,
        repeats: per_repeat.len(),
        methods: methods.to_vec(),
        summary,
        per_repeat,
    }
}

impl EvaluationReport {
    pub fn overall(&self, method: Method, metric: MetricName) -> Option<Summary> {
        self.summary.get(&method).map(|s| s.overall[&metric])
    }

    pub fn region(&self, method: Method, region: Quadrant, metric: MetricName) -> Option<Summary> {
        self.summary
            .get(&method)
            .and_then(|s| s.regions[&region][&metric])
    }

    /// One row per method × region × metric; undefined values leave `mean`
    /// and `sd` empty.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("method,region,metric,n,mean,sd\n");
        for (method, s) in &self.summary {
            for metric in MetricName::ALL {
                let v = s.overall[&metric];
                let _ = writeln!(
                    out,
                    "{method},overall,{},{},{},{}",
                    metric.as_str(),
                    v.n,
                    v.mean,
                    v.sd
                );
            }
            for q in Quadrant::ALL {
                for metric in MetricName::ALL {
                    match s.regions[&q][&metric] {
                        Some(v) => {
                            let _ = writeln!(
                                out,
                                "{method},{},{},{},{},{}",
                                q.as_str(),
                                metric.as_str(),
                                v.n,
                                v.mean,
                                v.sd
                            );
                        }
                        None => {
                            let _ =
                                writeln!(out, "{method},{},{},0,,", q.as_str(), metric.as_str());
                        }
                    }
                }
            }
        }
        out
    }
}
