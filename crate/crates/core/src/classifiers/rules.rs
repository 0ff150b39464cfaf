//! Declarative SUR-to-tag rules and scoring constants, loaded from JSON.

use std::collections::HashMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::IndoorOutdoor;
use crate::tags::{TagPattern, Tags};

macro_rules! shipped {
    ($file:literal) => {
        include_str!(concat!(env!("CARGO_MANIFEST_DIR"), "/../../rules/", $file))
    };
}

pub const DESCRIPTION_FILE: &str = "description.json";
pub const MAPPING_FILE: &str = "mapping.json";
pub const VISION_FILE: &str = "vision.json";
pub const CONSTANTS_FILE: &str = "constants.json";

#[derive(Debug, Error)]
pub enum RuleError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed rule file {file}: {source}")]
    Json {
        file: String,
        #[source]
        source: serde_json::Error,
    },
    #[error("{0}")]
    Invalid(String),
}

fn check_sur(sur: &str) -> Result<(), RuleError> {
    let ok = sur.chars().next().is_some_and(|c| c.is_ascii_lowercase())
        && sur.chars().all(|c| c.is_ascii_lowercase() || c.is_ascii_digit() || c == '_');
    if ok {
        Ok(())
    } else {
        Err(RuleError::Invalid(format!("SUR key {sur:?} is not lowercase snake_case")))
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct DescriptionRule {
    pub sur: String,
    pub tags: Vec<TagPattern>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct MappingRule {
    pub sur: String,
    pub tag: TagPattern,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct VisionRule {
    pub sur: String,
    pub space: IndoorOutdoor,
    pub tag: TagPattern,
}

#[derive(Serialize, Deserialize)]
struct RuleFile<T> {
    rules: Vec<T>,
}

/// One-to-many description rules and one-to-one mapping rules.
#[derive(Debug, Clone, PartialEq)]
pub struct RuleSet {
    description: Vec<DescriptionRule>,
    mapping: Vec<MappingRule>,
    description_index: HashMap<String, usize>,
    mapping_index: HashMap<String, usize>,
}

impl RuleSet {
    pub fn new(description: Vec<DescriptionRule>, mapping: Vec<MappingRule>) -> Result<Self, RuleError> {
        let mut description_index = HashMap::new();
        for (i, r) in description.iter().enumerate() {
            check_sur(&r.sur)?;
            if r.tags.is_empty() {
                return Err(RuleError::Invalid(format!("description rule {:?} has no patterns", r.sur)));
            }
            if description_index.insert(r.sur.clone(), i).is_some() {
                return Err(RuleError::Invalid(format!("duplicate description rule {:?}", r.sur)));
            }
        }
        let mut mapping_index = HashMap::new();
        for (i, r) in mapping.iter().enumerate() {
            check_sur(&r.sur)?;
            if mapping_index.insert(r.sur.clone(), i).is_some() {
                return Err(RuleError::Invalid(format!("duplicate mapping rule {:?}", r.sur)));
            }
        }
        Ok(Self {
            description,
            mapping,
            description_index,
            mapping_index,
        })
    }

    pub fn from_json(description: &str, mapping: &str) -> Result<Self, RuleError> {
        let d: RuleFile<DescriptionRule> = parse_json(description, DESCRIPTION_FILE)?;
        let m: RuleFile<MappingRule> = parse_json(mapping, MAPPING_FILE)?;
        Self::new(d.rules, m.rules)
    }

    /// Load `description.json` and `mapping.json` from `dir`.
    pub fn load(dir: &Path) -> Result<Self, RuleError> {
        Self::from_json(&read(dir, DESCRIPTION_FILE)?, &read(dir, MAPPING_FILE)?)
    }

    pub fn description_rules(&self) -> &[DescriptionRule] {
        &self.description
    }

    pub fn mapping_rules(&self) -> &[MappingRule] {
        &self.mapping
    }

    pub fn description_for(&self, sur: &str) -> Option<&DescriptionRule> {
        self.description_index.get(sur).map(|&i| &self.description[i])
    }

    pub fn mapping_for(&self, sur: &str) -> Option<&MappingRule> {
        self.mapping_index.get(sur).map(|&i| &self.mapping[i])
    }
}

impl Default for RuleSet {
    fn default() -> Self {
        Self::from_json(shipped!("description.json"), shipped!("mapping.json"))
            .expect("shipped rule files are valid")
    }
}

/// (SUR, indoor/outdoor) → tag pattern.
#[derive(Debug, Clone, PartialEq)]
pub struct VisionRuleSet {
    entries: Vec<VisionRule>,
}

impl VisionRuleSet {
    pub fn new(entries: Vec<VisionRule>) -> Result<Self, RuleError> {
        for (i, r) in entries.iter().enumerate() {
            check_sur(&r.sur)?;
            if r.space == IndoorOutdoor::Unknown {
                return Err(RuleError::Invalid(format!("vision rule {:?} must name inside or outside", r.sur)));
            }
            if entries[..i].iter().any(|o| o.sur == r.sur && o.space == r.space) {
                return Err(RuleError::Invalid(format!(
                    "duplicate vision rule ({:?}, {:?})",
                    r.sur, r.space
                )));
            }
        }
        Ok(Self { entries })
    }

    pub fn from_json(text: &str) -> Result<Self, RuleError> {
        let f: RuleFile<VisionRule> = parse_json(text, VISION_FILE)?;
        Self::new(f.rules)
    }

    pub fn load(dir: &Path) -> Result<Self, RuleError> {
        Self::from_json(&read(dir, VISION_FILE)?)
    }

    pub fn entries(&self) -> &[VisionRule] {
        &self.entries
    }

    pub fn lookup(&self, sur: &str, space: IndoorOutdoor) -> Option<&TagPattern> {
        self.entries
            .iter()
            .find(|r| r.sur == sur && r.space == space)
            .map(|r| &r.tag)
    }

    pub fn matches(&self, sur: &str, space: IndoorOutdoor, tags: &Tags) -> Option<bool> {
        self.lookup(sur, space).map(|p| p.matches(tags))
    }
}

impl Default for VisionRuleSet {
    fn default() -> Self {
        Self::from_json(shipped!("vision.json")).expect("shipped vision rules are valid")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MatchScores {
    #[serde(rename = "match")]
    pub hit: f64,
    pub mismatch: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContainmentScores {
    pub inside: f64,
    pub outside: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OrientationConstants {
    pub in_view: f64,
    pub behind: f64,
    pub half_angle_deg: f64,
    pub range_m: f64,
}

/// Thresholds of the color-grid indoor/outdoor heuristic. Colors are
/// normalized to [0, 1].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IndoorOutdoorConstants {
    pub grid: u32,
    pub outside_above: f64,
    pub inside_below: f64,
    pub sky_min_brightness: f64,
    pub white_min_brightness: f64,
    pub white_max_spread: f64,
    pub dominance_margin: f64,
}

/// Every reward, penalty and threshold the weak classifiers use.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScoringConstants {
    pub point_in_polygon: ContainmentScores,
    pub description: MatchScores,
    pub mapping: MatchScores,
    pub orientation: OrientationConstants,
    pub vision: MatchScores,
    pub indoor_outdoor: IndoorOutdoorConstants,
}

impl ScoringConstants {
    pub fn from_json(text: &str) -> Result<Self, RuleError> {
        parse_json(text, CONSTANTS_FILE)
    }

    pub fn load(dir: &Path) -> Result<Self, RuleError> {
        Self::from_json(&read(dir, CONSTANTS_FILE)?)
    }
}

impl Default for ScoringConstants {
    fn default() -> Self {
        Self::from_json(shipped!("constants.json")).expect("shipped constants are valid")
    }
}

fn parse_json<T: serde::de::DeserializeOwned>(text: &str, file: &str) -> Result<T, RuleError> {
    serde_json::from_str(text).map_err(|source| RuleError::Json {
        file: file.to_string(),
        source,
    })
}

fn read(dir: &Path, file: &str) -> Result<String, RuleError> {
    let path = dir.join(file);
    fs::read_to_string(&path).map_err(|source| RuleError::Io {
        path: path.display().to_string(),
        source,
    })
}
