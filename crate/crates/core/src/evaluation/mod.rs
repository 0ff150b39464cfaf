//! The intersection-ratio metric and whole-dataset evaluation.

mod report;

pub use report::{parse_csv_report, render_report, ReportFormat, ReportParseError};

use serde::{Deserialize, Serialize};

use crate::classifiers::{Classifier, ClassifierBank};
use crate::dataset::Dataset;
use crate::ensemble::WeightVector;
use crate::geometry::{intersection_area, AreaPolygon, GeometryError};
use crate::osm::OsmIndex;
use crate::trainer::{prepare_dataset, PreparedCandidate, PreparedSample, TrainError};

/// R = 2·A∩ / (A_target + A_candidate).
pub fn intersection_ratio(target: &AreaPolygon, cand: &AreaPolygon) -> Result<f64, GeometryError> {
    let (at, ac) = (target.area(), cand.area());
    if at <= 0.0 || ac <= 0.0 {
        return Err(GeometryError::Degenerate("zero-area polygon".into()));
    }
    Ok((2.0 * intersection_area(target, cand) / (at + ac)).clamp(0.0, 1.0))
}

/// Correctness cut-offs, in percent.
pub const THRESHOLDS_PCT: [u32; 12] = [5, 10, 15, 20, 25, 30, 35, 40, 45, 50, 75, 100];

/// Slack so that a ratio computed as 0.9999999999 still counts as 100%.
pub const THRESHOLD_EPS: f64 = 1e-9;

pub fn meets_threshold(ratio: f64, threshold_pct: u32) -> bool {
    ratio + THRESHOLD_EPS >= threshold_pct as f64 / 100.0
}

/// How a report row picks its polygon.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Selector {
    Weights(WeightVector),
    /// A single classifier's score alone.
    Single(Classifier),
}

impl Selector {
    pub fn weights(&self) -> WeightVector {
        match self {
            Selector::Weights(w) => *w,
            Selector::Single(c) => WeightVector::one_hot(*c),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Configuration {
    pub label: String,
    pub selector: Selector,
}

impl Configuration {
    pub fn new(label: impl Into<String>, selector: Selector) -> Self {
        Self {
            label: label.into(),
            selector,
        }
    }
}

/// One row per weak classifier on its own.
pub fn baseline_configurations() -> Vec<Configuration> {
    Classifier::ALL
        .iter()
        .map(|c| Configuration::new(c.label(), Selector::Single(*c)))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ThresholdCount {
    pub threshold_pct: u32,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalRow {
    pub label: String,
    /// Mean R as a fraction in [0, 1].
    pub mean_ratio: f64,
    pub correct: Vec<ThresholdCount>,
}

impl EvalRow {
    pub fn mean_pct(&self) -> f64 {
        self.mean_ratio * 100.0
    }

    pub fn count_at(&self, threshold_pct: u32) -> Option<usize> {
        self.correct
            .iter()
            .find(|t| t.threshold_pct == threshold_pct)
            .map(|t| t.count)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleDetail {
    pub configuration: String,
    pub sample_id: String,
    /// Provenance of the chosen polygon, if any was chosen.
    pub chosen: Option<String>,
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub dataset: String,
    pub sample_count: usize,
    pub rows: Vec<EvalRow>,
    pub details: Vec<SampleDetail>,
}

/// Order-independent mean: sum in sorted order.
fn mean(values: &[f64]) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    v.iter().sum::<f64>() / v.len() as f64
}

/// Summarise per-sample ratios into a report row.
pub fn summarize(label: &str, ratios: &[f64]) -> EvalRow {
    EvalRow {
        label: label.to_string(),
        mean_ratio: mean(ratios),
        correct: THRESHOLDS_PCT
            .iter()
            .map(|&t| ThresholdCount {
                threshold_pct: t,
                count: ratios.iter().filter(|&&r| meets_threshold(r, t)).count(),
            })
            .collect(),
    }
}

pub fn evaluate(dataset: &str, samples: &[PreparedSample], configs: &[Configuration]) -> EvalReport {
    let mut rows = Vec::with_capacity(configs.len());
    let mut details = Vec::new();
    for cfg in configs {
        let w = cfg.selector.weights();
        let mut ratios = Vec::with_capacity(samples.len());
        for s in samples {
            let pick = s.select(&w);
            let ratio = pick.map_or(0.0, |c| c.ratio);
            ratios.push(ratio);
            details.push(SampleDetail {
                configuration: cfg.label.clone(),
                sample_id: s.id.clone(),
                chosen: pick.map(|c| c.provenance.to_string()),
                ratio,
            });
        }
        rows.push(summarize(&cfg.label, &ratios));
    }
    EvalReport {
        dataset: dataset.to_string(),
        sample_count: samples.len(),
        rows,
        details,
    }
}

/// Prepare a dataset against an extract and evaluate it. Fails on the first
/// sample lacking ground truth.
pub fn evaluate_dataset(
    dataset: &Dataset,
    index: &OsmIndex,
    bank: &ClassifierBank,
    configs: &[Configuration],
) -> Result<EvalReport, TrainError> {
    let prepared = prepare_dataset(dataset, index, bank)?;
    Ok(evaluate(dataset.name(), &prepared, configs))
}

/// Nearest centroid, computed directly from distances rather than through
/// the scoring pipeline. Ties fall back to the ensemble's rule.
pub fn nearest_centroid(sample: &PreparedSample) -> Option<&PreparedCandidate> {
    sample.candidates.iter().min_by(|a, b| {
        a.centroid_distance
            .total_cmp(&b.centroid_distance)
            .then(b.contains.cmp(&a.contains))
            .then(a.area.total_cmp(&b.area))
            .then(a.provenance.order(&b.provenance))
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::osm::Provenance;

    fn unit(dx: f64, dy: f64, side: f64) -> AreaPolygon {
        AreaPolygon::from_coords(&[(dx, dy), (dx + side, dy), (dx + side, dy + side), (dx, dy + side)], &[]).unwrap()
    }

    #[test]
    fn closed_form_ratios() {
        let a = unit(0.0, 0.0, 1.0);
        assert!((intersection_ratio(&a, &a).unwrap() - 1.0).abs() < 1e-9);
        assert!(intersection_ratio(&a, &unit(3.0, 0.0, 1.0)).unwrap().abs() < 1e-9);
        assert!((intersection_ratio(&a, &unit(0.5, 0.0, 1.0)).unwrap() - 0.5).abs() < 1e-9);
        assert!((intersection_ratio(&a, &unit(-0.5, -0.5, 2.0)).unwrap() - 0.4).abs() < 1e-9);
    }

    #[test]
    fn threshold_arithmetic() {
        let row = summarize("x", &[0.6, 0.4]);
        assert_eq!(row.count_at(50), Some(1));
        assert_eq!(row.count_at(40), Some(2));
        assert!((row.mean_pct() - 50.0).abs() < 1e-12);
        let perfect = summarize("p", &[1.0 - 1e-12, 1.0]);
        assert_eq!(perfect.count_at(100), Some(2));
        assert!(row.correct.windows(2).all(|w| w[1].count <= w[0].count));
    }

    fn sample(id: &str, parts: &[(i64, f64, f64, f64)]) -> PreparedSample {
        PreparedSample::new(
            id,
            parts
                .iter()
                .map(|&(pid, s0, dist, ratio)| PreparedCandidate {
                    provenance: Provenance::Way { id: pid },
                    scores: [s0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
                    contains: false,
                    area: 10.0,
                    centroid_distance: dist,
                    ratio,
                })
                .collect(),
        )
    }

    #[test]
    fn evaluate_rows_and_details() {
        let samples = vec![
            sample("a", &[(1, 90.0, 5.0, 1.0), (2, 10.0, 45.0, 0.2)]),
            sample("b", &[(3, -20.0, 60.0, 0.0), (4, 40.0, 30.0, 0.6)]),
            sample("c", &[]),
        ];
        let configs = vec![
            Configuration::new("centroid", Selector::Single(Classifier::DistCentroid)),
            Configuration::new("equal", Selector::Weights(WeightVector::equal())),
        ];
        let r = evaluate("toy", &samples, &configs);
        assert_eq!(r.rows.len(), 2);
        assert_eq!(r.details.len(), 6);
        assert!((r.rows[0].mean_ratio - 1.6 / 3.0).abs() < 1e-12);
        assert_eq!(r.details[1].chosen.as_deref(), Some("way/4"));
        assert_eq!(r.details[2].chosen, None);
        for s in &samples {
            assert_eq!(
                s.select(&WeightVector::one_hot(Classifier::DistCentroid)).map(|c| c.provenance),
                nearest_centroid(s).map(|c| c.provenance)
            );
        }
    }
}
