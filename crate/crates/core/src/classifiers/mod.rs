//! Weak classifiers. Each maps an (observation, candidate polygon) pair to a
//! score in [-100, 100], with 0 meaning "no opinion".

pub mod rules;
mod vision;

pub use rules::{RuleSet, ScoringConstants, VisionRuleSet};
pub use vision::{classify_image, classify_indoor_outdoor, outdoor_evidence};

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::dataset::SurObservation;
use crate::geometry::{GeoPoint, PlanarPoint};
use crate::osm::{CandidatePolygon, DEFAULT_CANDIDATE_RADIUS};

/// Number of weak classifiers in the ensemble.
pub const CLASSIFIER_COUNT: usize = 8;

/// The weak classifiers, in weight-vector order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Classifier {
    DistCentroid,
    DistEdge,
    DistVertex,
    PointInPolygon,
    SurDescription,
    SurOsmMapping,
    Orientation,
    ComputerVision,
}

impl Classifier {
    pub const ALL: [Classifier; CLASSIFIER_COUNT] = [
        Classifier::DistCentroid,
        Classifier::DistEdge,
        Classifier::DistVertex,
        Classifier::PointInPolygon,
        Classifier::SurDescription,
        Classifier::SurOsmMapping,
        Classifier::Orientation,
        Classifier::ComputerVision,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            Classifier::DistCentroid => "dist_centroid",
            Classifier::DistEdge => "dist_edge",
            Classifier::DistVertex => "dist_vertex",
            Classifier::PointInPolygon => "point_in_polygon",
            Classifier::SurDescription => "sur_description",
            Classifier::SurOsmMapping => "sur_osm_mapping",
            Classifier::Orientation => "orientation",
            Classifier::ComputerVision => "computer_vision",
        }
    }

    /// Human-readable label used in report tables.
    pub fn label(self) -> &'static str {
        match self {
            Classifier::DistCentroid => "Dist. Centroid",
            Classifier::DistEdge => "Dist. Closest Edge",
            Classifier::DistVertex => "Dist. Closest Vertex",
            Classifier::PointInPolygon => "Point in Polygon",
            Classifier::SurDescription => "SUR Description",
            Classifier::SurOsmMapping => "SUR OSM Mapping",
            Classifier::Orientation => "Orientation",
            Classifier::ComputerVision => "Computer Vision",
        }
    }
}

impl fmt::Display for Classifier {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Classifier {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Classifier::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| format!("unknown classifier {s:?}"))
    }
}

/// A weak classifier's verdict, always within [-100, 100].
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Default, Serialize, Deserialize)]
pub struct WeakScore(f64);

impl WeakScore {
    pub const MIN: f64 = -100.0;
    pub const MAX: f64 = 100.0;

    /// Clamp into range; NaN becomes neutral.
    pub fn new(value: f64) -> Self {
        if value.is_nan() {
            WeakScore(0.0)
        } else {
            WeakScore(value.clamp(Self::MIN, Self::MAX))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IndoorOutdoor {
    Inside,
    Outside,
    #[default]
    Unknown,
}

/// Everything a classifier may look at besides the candidate itself.
#[derive(Debug, Clone)]
pub struct ScoreContext<'a> {
    pub observation: &'a SurObservation,
    /// Projection origin; the observation's location.
    pub origin: GeoPoint,
    /// Observation position in the candidates' planar frame.
    pub position: PlanarPoint,
    pub candidate_radius: f64,
    pub indoor_outdoor: IndoorOutdoor,
    /// SUR types being explained; all of the observation's by default.
    pub sur_types: Vec<&'a str>,
}

impl<'a> ScoreContext<'a> {
    pub fn new(observation: &'a SurObservation) -> Self {
        Self {
            observation,
            origin: observation.location(),
            position: PlanarPoint::default(),
            candidate_radius: DEFAULT_CANDIDATE_RADIUS,
            indoor_outdoor: IndoorOutdoor::Unknown,
            sur_types: observation.sur_types().iter().map(String::as_str).collect(),
        }
    }

    pub fn with_indoor_outdoor(mut self, io: IndoorOutdoor) -> Self {
        self.indoor_outdoor = io;
        self
    }

    pub fn with_radius(mut self, radius: f64) -> Self {
        self.candidate_radius = radius;
        self
    }

    /// Restrict the context to a single SUR type.
    pub fn for_sur(&self, sur: &'a str) -> Self {
        let mut ctx = self.clone();
        ctx.sur_types = vec![sur];
        ctx
    }

    /// Move the observation inside the planar frame (translation tests).
    pub fn with_position(mut self, position: PlanarPoint) -> Self {
        self.position = position;
        self
    }
}

/// Linear distance mapping: +100 at 0 m, 0 at half the radius, -100 at the
/// radius and beyond.
pub fn distance_score(distance: f64, radius: f64) -> WeakScore {
    WeakScore::new(100.0 - 200.0 * distance / radius)
}

pub fn score_dist_centroid(ctx: &ScoreContext, cand: &CandidatePolygon) -> WeakScore {
    let d = cand.geometry.centroid().distance(&ctx.position);
    distance_score(d, ctx.candidate_radius)
}

pub fn score_dist_edge(ctx: &ScoreContext, cand: &CandidatePolygon) -> WeakScore {
    distance_score(cand.geometry.min_dist_to_edges(&ctx.position), ctx.candidate_radius)
}

pub fn score_dist_vertex(ctx: &ScoreContext, cand: &CandidatePolygon) -> WeakScore {
    distance_score(cand.geometry.min_dist_to_vertices(&ctx.position), ctx.candidate_radius)
}

pub fn score_point_in_polygon(ctx: &ScoreContext, cand: &CandidatePolygon, k: &ScoringConstants) -> WeakScore {
    if cand.geometry.contains(&ctx.position) {
        WeakScore::new(k.point_in_polygon.inside)
    } else {
        WeakScore::new(k.point_in_polygon.outside)
    }
}

/// Mean of per-SUR contributions; SURs without an applicable rule count 0.
fn mean_contribution(sur_types: &[&str], per_sur: impl Fn(&str) -> Option<f64>) -> WeakScore {
    if sur_types.is_empty() {
        return WeakScore::default();
    }
    let total: f64 = sur_types.iter().map(|s| per_sur(s).unwrap_or(0.0)).sum();
    WeakScore::new(total / sur_types.len() as f64)
}

pub fn score_sur_description(
    ctx: &ScoreContext,
    cand: &CandidatePolygon,
    rules: &RuleSet,
    k: &ScoringConstants,
) -> WeakScore {
    mean_contribution(&ctx.sur_types, |sur| {
        rules.description_for(sur).map(|r| {
            if r.tags.iter().any(|p| p.matches(&cand.tags)) {
                k.description.hit
            } else {
                k.description.mismatch
            }
        })
    })
}

pub fn score_sur_osm_mapping(
    ctx: &ScoreContext,
    cand: &CandidatePolygon,
    rules: &RuleSet,
    k: &ScoringConstants,
) -> WeakScore {
    mean_contribution(&ctx.sur_types, |sur| {
        rules.mapping_for(sur).map(|r| {
            if r.tag.matches(&cand.tags) {
                k.mapping.hit
            } else {
                k.mapping.mismatch
            }
        })
    })
}

/// Rewards candidates in the camera's view cone, penalises those entirely
/// behind it. Neutral without a heading.
pub fn score_orientation(ctx: &ScoreContext, cand: &CandidatePolygon, k: &ScoringConstants) -> WeakScore {
    let Some(heading) = ctx.observation.heading() else {
        return WeakScore::default();
    };
    let h = heading.to_radians();
    // clockwise from north
    let dir = PlanarPoint::new(h.sin(), h.cos());
    let cos_half = k.orientation.half_angle_deg.to_radians().cos();
    let range = k.orientation.range_m;
    let centroid = cand.geometry.centroid();
    let in_cone = |p: &PlanarPoint| {
        let v = p.sub(&ctx.position);
        let len = v.norm();
        if len > range {
            return false;
        }
        len < 1e-9 || v.dot(&dir) / len >= cos_half
    };
    if cand.geometry.vertices().chain(std::iter::once(&centroid)).any(in_cone) {
        return WeakScore::new(k.orientation.in_view);
    }
    let behind = cand
        .geometry
        .vertices()
        .all(|p| p.sub(&ctx.position).dot(&dir) < 0.0);
    if behind {
        WeakScore::new(k.orientation.behind)
    } else {
        WeakScore::default()
    }
}

pub fn score_computer_vision(
    ctx: &ScoreContext,
    cand: &CandidatePolygon,
    vrules: &VisionRuleSet,
    k: &ScoringConstants,
) -> WeakScore {
    if ctx.indoor_outdoor == IndoorOutdoor::Unknown {
        return WeakScore::default();
    }
    mean_contribution(&ctx.sur_types, |sur| {
        vrules
            .matches(sur, ctx.indoor_outdoor, &cand.tags)
            .map(|hit| if hit { k.vision.hit } else { k.vision.mismatch })
    })
}

/// The configured classifier bank: rule sets plus constants.
#[derive(Debug, Clone, Default)]
pub struct ClassifierBank {
    pub rules: RuleSet,
    pub vision_rules: VisionRuleSet,
    pub constants: ScoringConstants,
}

impl ClassifierBank {
    pub fn new(rules: RuleSet, vision_rules: VisionRuleSet, constants: ScoringConstants) -> Self {
        Self {
            rules,
            vision_rules,
            constants,
        }
    }

    /// Load `description.json`, `mapping.json`, `vision.json` and
    /// `constants.json` from `dir`.
    pub fn load(dir: &Path) -> Result<Self, rules::RuleError> {
        Ok(Self {
            rules: RuleSet::load(dir)?,
            vision_rules: VisionRuleSet::load(dir)?,
            constants: ScoringConstants::load(dir)?,
        })
    }

    pub fn score(&self, which: Classifier, ctx: &ScoreContext, cand: &CandidatePolygon) -> WeakScore {
        let k = &self.constants;
        match which {
            Classifier::DistCentroid => score_dist_centroid(ctx, cand),
            Classifier::DistEdge => score_dist_edge(ctx, cand),
            Classifier::DistVertex => score_dist_vertex(ctx, cand),
            Classifier::PointInPolygon => score_point_in_polygon(ctx, cand, k),
            Classifier::SurDescription => score_sur_description(ctx, cand, &self.rules, k),
            Classifier::SurOsmMapping => score_sur_osm_mapping(ctx, cand, &self.rules, k),
            Classifier::Orientation => score_orientation(ctx, cand, k),
            Classifier::ComputerVision => score_computer_vision(ctx, cand, &self.vision_rules, k),
        }
    }

    pub fn score_all(&self, ctx: &ScoreContext, cand: &CandidatePolygon) -> [WeakScore; CLASSIFIER_COUNT] {
        Classifier::ALL.map(|c| self.score(c, ctx, cand))
    }

    pub fn indoor_outdoor(&self, image: Option<&Path>) -> IndoorOutdoor {
        classify_indoor_outdoor(image, &self.constants.indoor_outdoor)
    }
}
