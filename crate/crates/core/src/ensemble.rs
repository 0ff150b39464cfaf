//! The strong classifier: a nonnegative weighted sum of the weak scores,
//! and the argmax over the candidate set.

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::classifiers::{Classifier, ClassifierBank, ScoreContext, WeakScore, CLASSIFIER_COUNT};
use crate::osm::{CandidatePolygon, Provenance};

/// Upper bound for any single weight.
pub const W_MAX: f64 = 10.0;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum WeightError {
    #[error("weight for {classifier} is {value}, outside [0, {W_MAX}]")]
    OutOfRange { classifier: Classifier, value: f64 },
    #[error("at least one weight must be positive")]
    AllZero,
}

/// One weight per classifier, indexed in [`Classifier::ALL`] order.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "NamedWeights", into = "NamedWeights")]
pub struct WeightVector([f64; CLASSIFIER_COUNT]);

impl WeightVector {
    pub fn new(weights: [f64; CLASSIFIER_COUNT]) -> Result<Self, WeightError> {
        for (c, &w) in Classifier::ALL.iter().zip(&weights) {
            if !(0.0..=W_MAX).contains(&w) {
                return Err(WeightError::OutOfRange { classifier: *c, value: w });
            }
        }
        if weights.iter().all(|&w| w == 0.0) {
            return Err(WeightError::AllZero);
        }
        Ok(Self(weights))
    }

    /// Weight 1 on `c`, zero elsewhere.
    pub fn one_hot(c: Classifier) -> Self {
        let mut w = [0.0; CLASSIFIER_COUNT];
        w[c.index()] = 1.0;
        Self(w)
    }

    /// All weights 1.
    pub fn equal() -> Self {
        Self([1.0; CLASSIFIER_COUNT])
    }

    pub fn get(&self, c: Classifier) -> f64 {
        self.0[c.index()]
    }

    pub fn as_array(&self) -> &[f64; CLASSIFIER_COUNT] {
        &self.0
    }

    /// Multiply every weight by `k`, re-validating the bounds.
    pub fn scaled(&self, k: f64) -> Result<Self, WeightError> {
        Self::new(self.0.map(|w| w * k))
    }

    /// The classifier with the largest weight (first one on ties).
    pub fn dominant(&self) -> Classifier {
        let mut best = 0;
        for i in 1..CLASSIFIER_COUNT {
            if self.0[i] > self.0[best] {
                best = i;
            }
        }
        Classifier::ALL[best]
    }

    /// Σ wᵢ·sᵢ.
    pub fn total(&self, scores: &[f64; CLASSIFIER_COUNT]) -> f64 {
        self.0.iter().zip(scores).map(|(w, s)| w * s).sum()
    }
}

impl fmt::Display for WeightVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, c) in Classifier::ALL.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{}={:.3}", c.name(), self.0[i])?;
        }
        Ok(())
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct NamedWeights {
    dist_centroid: f64,
    dist_edge: f64,
    dist_vertex: f64,
    point_in_polygon: f64,
    sur_description: f64,
    sur_osm_mapping: f64,
    orientation: f64,
    computer_vision: f64,
}

impl TryFrom<NamedWeights> for WeightVector {
    type Error = WeightError;

    fn try_from(n: NamedWeights) -> Result<Self, Self::Error> {
        WeightVector::new([
            n.dist_centroid,
            n.dist_edge,
            n.dist_vertex,
            n.point_in_polygon,
            n.sur_description,
            n.sur_osm_mapping,
            n.orientation,
            n.computer_vision,
        ])
    }
}

impl From<WeightVector> for NamedWeights {
    fn from(w: WeightVector) -> Self {
        let [dist_centroid, dist_edge, dist_vertex, point_in_polygon, sur_description, sur_osm_mapping, orientation, computer_vision] =
            w.0;
        NamedWeights {
            dist_centroid,
            dist_edge,
            dist_vertex,
            point_in_polygon,
            sur_description,
            sur_osm_mapping,
            orientation,
            computer_vision,
        }
    }
}

/// Reference weights. Six are the historically used values; point-in-polygon
/// and orientation have no recorded value and sit at 1.0.
pub fn default_weights() -> WeightVector {
    WeightVector([0.5, 2.8, 0.5, 1.0, 4.3, 3.5, 1.0, 1.0])
}

impl Default for WeightVector {
    fn default() -> Self {
        default_weights()
    }
}

/// What the argmax looks at. Shared by the live pipeline and the cached
/// training path so both rank identically.
#[derive(Debug, Clone, Copy)]
pub struct RankKey<'a> {
    pub total: f64,
    pub contains: bool,
    pub area: f64,
    pub provenance: &'a Provenance,
}

/// Best first: higher total, then containing the observation, then smaller
/// area, then provenance order.
pub fn rank_order(a: &RankKey, b: &RankKey) -> Ordering {
    b.total
        .total_cmp(&a.total)
        .then(b.contains.cmp(&a.contains))
        .then(a.area.total_cmp(&b.area))
        .then(a.provenance.order(b.provenance))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScoredCandidate {
    pub candidate: CandidatePolygon,
    pub weak_scores: [WeakScore; CLASSIFIER_COUNT],
    pub total: f64,
    /// Whether the candidate contains the observation.
    pub contains: bool,
}

impl ScoredCandidate {
    pub fn rank_key(&self) -> RankKey<'_> {
        RankKey {
            total: self.total,
            contains: self.contains,
            area: self.candidate.geometry.area(),
            provenance: &self.candidate.provenance,
        }
    }

    pub fn score(&self, c: Classifier) -> WeakScore {
        self.weak_scores[c.index()]
    }
}

pub fn weak_values(scores: &[WeakScore; CLASSIFIER_COUNT]) -> [f64; CLASSIFIER_COUNT] {
    scores.map(WeakScore::value)
}

fn score_one(bank: &ClassifierBank, ctx: &ScoreContext, cand: &CandidatePolygon, w: &WeightVector) -> ScoredCandidate {
    let weak_scores = bank.score_all(ctx, cand);
    ScoredCandidate {
        total: w.total(&weak_values(&weak_scores)),
        contains: cand.geometry.contains(&ctx.position),
        candidate: cand.clone(),
        weak_scores,
    }
}

/// Score every candidate and sort best first.
pub fn score_all(
    bank: &ClassifierBank,
    ctx: &ScoreContext,
    candidates: &[CandidatePolygon],
    weights: &WeightVector,
) -> Vec<ScoredCandidate> {
    let mut out: Vec<_> = candidates.iter().map(|c| score_one(bank, ctx, c, weights)).collect();
    out.sort_by(|a, b| rank_order(&a.rank_key(), &b.rank_key()));
    out
}

/// The top-ranked candidate, or `None` for an empty set.
pub fn select_polygon(
    bank: &ClassifierBank,
    ctx: &ScoreContext,
    candidates: &[CandidatePolygon],
    weights: &WeightVector,
) -> Option<ScoredCandidate> {
    candidates
        .iter()
        .map(|c| score_one(bank, ctx, c, weights))
        .min_by(|a, b| rank_order(&a.rank_key(), &b.rank_key()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::SurObservation;
    use crate::geometry::{AreaPolygon, GeoPoint};
    use crate::tags::Tags;

    fn square(cx: f64, cy: f64, half: f64, id: i64) -> CandidatePolygon {
        CandidatePolygon {
            geometry: AreaPolygon::from_coords(
                &[(cx - half, cy - half), (cx + half, cy - half), (cx + half, cy + half), (cx - half, cy + half)],
                &[],
            )
            .unwrap(),
            tags: Tags::from([("leisure".to_string(), "park".to_string())]),
            provenance: Provenance::Way { id },
        }
    }

    fn obs() -> SurObservation {
        SurObservation::new("o", GeoPoint::new(10.0, 10.0).unwrap(), vec!["no_dogs".into()]).unwrap()
    }

    #[test]
    fn weight_validation() {
        assert_eq!(WeightVector::new([0.0; 8]), Err(WeightError::AllZero));
        assert!(WeightVector::new([11.0, 0., 0., 0., 0., 0., 0., 0.]).is_err());
        assert!(WeightVector::new([-0.1, 1., 0., 0., 0., 0., 0., 0.]).is_err());
        assert!(WeightVector::new([f64::NAN, 1., 0., 0., 0., 0., 0., 0.]).is_err());
        let d = default_weights();
        assert_eq!(d.get(Classifier::SurDescription), 4.3);
        assert_eq!(d.get(Classifier::DistEdge), 2.8);
        assert_eq!(d.get(Classifier::PointInPolygon), 1.0);
        assert_eq!(d.get(Classifier::Orientation), 1.0);
    }

    #[test]
    fn weights_json_is_named_and_ordered() {
        let text = serde_json::to_string(&default_weights()).unwrap();
        assert!(text.starts_with(r#"{"dist_centroid":0.5,"dist_edge":2.8"#), "{text}");
        let back: WeightVector = serde_json::from_str(&text).unwrap();
        assert_eq!(back, default_weights());
        assert!(serde_json::from_str::<WeightVector>(&text.replace("dist_edge", "dist_edges")).is_err());
        let zeros = r#"{"dist_centroid":0,"dist_edge":0,"dist_vertex":0,"point_in_polygon":0,
            "sur_description":0,"sur_osm_mapping":0,"orientation":0,"computer_vision":0}"#;
        assert!(serde_json::from_str::<WeightVector>(zeros).is_err());
    }

    #[test]
    fn point_in_polygon_only() {
        let bank = ClassifierBank::default();
        let o = obs();
        let ctx = ScoreContext::new(&o);
        let cands = vec![square(100.0, 0.0, 10.0, 1), square(0.0, 0.0, 10.0, 2)];
        let ranked = score_all(&bank, &ctx, &cands, &WeightVector::one_hot(Classifier::PointInPolygon));
        assert_eq!(ranked[0].total, 100.0);
        assert_eq!(ranked[0].candidate.provenance, Provenance::Way { id: 2 });
        assert_eq!(ranked[1].total, -75.0);
    }

    #[test]
    fn doubling_weights_doubles_totals() {
        let bank = ClassifierBank::default();
        let o = obs();
        let ctx = ScoreContext::new(&o);
        let cands = vec![square(100.0, 30.0, 10.0, 1), square(-40.0, 0.0, 25.0, 2)];
        let w = default_weights();
        let a = score_all(&bank, &ctx, &cands, &w);
        let b = score_all(&bank, &ctx, &cands, &w.scaled(2.0).unwrap());
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.candidate, y.candidate);
            assert!((2.0 * x.total - y.total).abs() < 1e-9);
        }
    }

    #[test]
    fn tie_breaks() {
        let bank = ClassifierBank::default();
        let o = obs();
        let ctx = ScoreContext::new(&o);
        let w = WeightVector::one_hot(Classifier::SurDescription);
        // identical tags: equal totals; the containing one wins
        let cands = vec![square(100.0, 0.0, 10.0, 1), square(0.0, 0.0, 50.0, 2)];
        assert_eq!(select_polygon(&bank, &ctx, &cands, &w).unwrap().candidate.provenance.id(), 2);
        // neither contains: the smaller wins
        let cands = vec![square(100.0, 0.0, 20.0, 1), square(200.0, 0.0, 10.0, 2)];
        assert_eq!(select_polygon(&bank, &ctx, &cands, &w).unwrap().candidate.provenance.id(), 2);
        // same size: ascending provenance id
        let cands = vec![square(200.0, 0.0, 10.0, 7), square(100.0, 0.0, 10.0, 3)];
        assert_eq!(select_polygon(&bank, &ctx, &cands, &w).unwrap().candidate.provenance.id(), 3);
        assert!(select_polygon(&bank, &ctx, &[], &w).is_none());
        let one = vec![square(100.0, 0.0, 10.0, 9)];
        assert_eq!(select_polygon(&bank, &ctx, &one, &w).unwrap().candidate, one[0]);
    }
}
