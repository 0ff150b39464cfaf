//! SUR observation samples and their JSON manifest format.
//!
//! A dataset is a directory holding `manifest.json`:
//!
//! ```json
//! {
//!   "name": "hamburg-parks",
//!   "samples": [
//!     { "id": "p1", "lat": 53.55, "lon": 9.99, "sur_types": ["no_dogs"],
//!       "heading": 270.0, "image": "img/p1.jpg",
//!       "ground_truth": { "type": "Polygon", "coordinates": [[[9.99, 53.55], ...]] } }
//!   ]
//! }
//! ```
//!
//! `heading`, `image` and `ground_truth` are optional. Image paths are relative
//! to the dataset directory.

use std::collections::HashSet;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{project, AreaPolygon, GeoPoint, GeometryError, Ring};

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("corrupt manifest {path}: {message}")]
    Manifest { path: PathBuf, message: String },
    #[error("invalid sample: {0}")]
    InvalidSample(String),
    #[error("invalid ground truth: {0}")]
    GroundTruth(#[from] GeometryError),
    #[error("duplicate sample id {0:?}")]
    DuplicateId(String),
}

fn is_sur_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_lowercase())
        && chars.all(|c| c.is_ascii_lowercase() || c.is_ascii_digit() || c == '_')
}

/// One observed rule indicator.
#[derive(Debug, Clone, PartialEq)]
pub struct SurObservation {
    id: String,
    location: GeoPoint,
    sur_types: Vec<String>,
    heading: Option<f64>,
    image_path: Option<PathBuf>,
    /// Outer ring first, then holes; no closing duplicate vertex.
    ground_truth: Option<Vec<Vec<GeoPoint>>>,
}

impl SurObservation {
    pub fn new(
        id: impl Into<String>,
        location: GeoPoint,
        sur_types: Vec<String>,
    ) -> Result<Self, DatasetError> {
        let id = id.into();
        if sur_types.is_empty() {
            return Err(DatasetError::InvalidSample(format!("{id}: no SUR types")));
        }
        if let Some(bad) = sur_types.iter().find(|s| !is_sur_identifier(s)) {
            return Err(DatasetError::InvalidSample(format!(
                "{id}: SUR type {bad:?} is not lowercase snake_case"
            )));
        }
        Ok(Self {
            id,
            location,
            sur_types,
            heading: None,
            image_path: None,
            ground_truth: None,
        })
    }

    pub fn with_heading(mut self, heading: f64) -> Result<Self, DatasetError> {
        if !(0.0..360.0).contains(&heading) {
            return Err(DatasetError::InvalidSample(format!(
                "{}: heading {heading} outside [0, 360)",
                self.id
            )));
        }
        self.heading = Some(heading);
        Ok(self)
    }

    pub fn with_image(mut self, path: impl Into<PathBuf>) -> Self {
        self.image_path = Some(path.into());
        self
    }

    /// Attach a ground-truth polygon given as WGS84 rings (outer first).
    pub fn with_ground_truth(mut self, rings: Vec<Vec<GeoPoint>>) -> Result<Self, DatasetError> {
        let rings: Vec<Vec<GeoPoint>> = rings
            .into_iter()
            .map(|mut r| {
                if r.len() > 1 && r.first() == r.last() {
                    r.pop();
                }
                r
            })
            .collect();
        polygon_from_rings(self.location, &rings)?;
        self.ground_truth = Some(rings);
        Ok(self)
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn location(&self) -> GeoPoint {
        self.location
    }

    pub fn sur_types(&self) -> &[String] {
        &self.sur_types
    }

    pub fn heading(&self) -> Option<f64> {
        self.heading
    }

    pub fn image_path(&self) -> Option<&Path> {
        self.image_path.as_deref()
    }

    pub fn ground_truth_rings(&self) -> Option<&[Vec<GeoPoint>]> {
        self.ground_truth.as_deref()
    }

    /// Ground truth in the local frame centered on `origin`.
    pub fn ground_truth_in(&self, origin: GeoPoint) -> Option<Result<AreaPolygon, DatasetError>> {
        self.ground_truth
            .as_ref()
            .map(|rings| polygon_from_rings(origin, rings))
    }

    /// Ground truth in the observation's own frame.
    pub fn ground_truth(&self) -> Option<Result<AreaPolygon, DatasetError>> {
        self.ground_truth_in(self.location)
    }
}

fn polygon_from_rings(origin: GeoPoint, rings: &[Vec<GeoPoint>]) -> Result<AreaPolygon, DatasetError> {
    let mut projected = rings.iter().map(|r| {
        let pts = r
            .iter()
            .map(|g| project(origin, *g))
            .collect::<Result<Vec<_>, _>>()?;
        Ring::new(pts)
    });
    let outer = projected
        .next()
        .ok_or_else(|| DatasetError::InvalidSample("ground truth has no rings".into()))??;
    let holes = projected.collect::<Result<Vec<_>, _>>()?;
    Ok(AreaPolygon::new(outer, holes)?)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    name: String,
    samples: Vec<SurObservation>,
    root: Option<PathBuf>,
}

impl Dataset {
    pub fn new(name: impl Into<String>, samples: Vec<SurObservation>) -> Result<Self, DatasetError> {
        let mut seen = HashSet::new();
        for s in &samples {
            if !seen.insert(s.id.clone()) {
                return Err(DatasetError::DuplicateId(s.id.clone()));
            }
        }
        Ok(Self {
            name: name.into(),
            samples,
            root: None,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn samples(&self) -> &[SurObservation] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Directory the dataset was loaded from, if any.
    pub fn root(&self) -> Option<&Path> {
        self.root.as_deref()
    }

    /// Image path of a sample resolved against the dataset directory.
    pub fn resolve_image(&self, sample: &SurObservation) -> Option<PathBuf> {
        let p = sample.image_path()?;
        Some(match &self.root {
            Some(root) if p.is_relative() => root.join(p),
            _ => p.to_path_buf(),
        })
    }
}

/// A sample the loader skipped, and why.
#[derive(Debug, Clone, PartialEq)]
pub struct Rejection {
    pub index: usize,
    pub id: Option<String>,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LoadedDataset {
    pub dataset: Dataset,
    pub rejected: Vec<Rejection>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct GeoJsonPolygon {
    #[serde(rename = "type")]
    pub kind: String,
    pub coordinates: Vec<Vec<[f64; 2]>>,
}

impl GeoJsonPolygon {
    pub fn from_rings(rings: &[Vec<GeoPoint>]) -> Self {
        GeoJsonPolygon {
            kind: "Polygon".into(),
            coordinates: rings
                .iter()
                .map(|r| {
                    r.iter()
                        .chain(r.first())
                        .map(|g| [g.lon(), g.lat()])
                        .collect()
                })
                .collect(),
        }
    }

    pub fn to_rings(&self) -> Result<Vec<Vec<GeoPoint>>, DatasetError> {
        if self.kind != "Polygon" {
            return Err(DatasetError::InvalidSample(format!(
                "ground truth must be a GeoJSON Polygon, got {:?}",
                self.kind
            )));
        }
        self.coordinates
            .iter()
            .map(|ring| {
                ring.iter()
                    .map(|[lon, lat]| GeoPoint::new(*lat, *lon).map_err(DatasetError::from))
                    .collect()
            })
            .collect()
    }
}

/// Manifest entry as stored on disk.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct SampleRecord {
    pub id: String,
    pub lat: f64,
    pub lon: f64,
    pub sur_types: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub heading: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub image: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ground_truth: Option<GeoJsonPolygon>,
}

impl SampleRecord {
    pub fn into_observation(self) -> Result<SurObservation, DatasetError> {
        let location = GeoPoint::new(self.lat, self.lon)
            .map_err(|e| DatasetError::InvalidSample(format!("{}: {e}", self.id)))?;
        let mut obs = SurObservation::new(self.id, location, self.sur_types)?;
        if let Some(h) = self.heading {
            obs = obs.with_heading(h)?;
        }
        if let Some(img) = self.image {
            obs = obs.with_image(img);
        }
        if let Some(gt) = self.ground_truth {
            let id = obs.id.clone();
            obs = obs
                .with_ground_truth(gt.to_rings()?)
                .map_err(|e| DatasetError::InvalidSample(format!("{id}: {e}")))?;
        }
        Ok(obs)
    }

    pub fn from_observation(obs: &SurObservation) -> Self {
        SampleRecord {
            id: obs.id.clone(),
            lat: obs.location.lat(),
            lon: obs.location.lon(),
            sur_types: obs.sur_types.clone(),
            heading: obs.heading,
            image: obs
                .image_path
                .as_ref()
                .map(|p| p.to_string_lossy().into_owned()),
            ground_truth: obs.ground_truth.as_deref().map(GeoJsonPolygon::from_rings),
        }
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct Manifest {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    name: Option<String>,
    samples: Vec<serde_json::Value>,
}

/// Read a single sample record from a JSON file (the manifest entry format).
pub fn load_sample(path: impl AsRef<Path>) -> Result<SurObservation, DatasetError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| DatasetError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let record: SampleRecord = serde_json::from_str(&text).map_err(|e| DatasetError::Manifest {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    record.into_observation()
}

/// Load `manifest.json` from `dir`. Invalid samples are skipped and reported;
/// only an unreadable or structurally corrupt manifest is fatal.
pub fn load_dataset(dir: impl AsRef<Path>) -> Result<LoadedDataset, DatasetError> {
    let dir = dir.as_ref();
    let path = dir.join(MANIFEST_FILE);
    let text = fs::read_to_string(&path).map_err(|source| DatasetError::Io {
        path: path.clone(),
        source,
    })?;
    let manifest: Manifest = serde_json::from_str(&text).map_err(|e| DatasetError::Manifest {
        path: path.clone(),
        message: e.to_string(),
    })?;
    let name = manifest.name.unwrap_or_else(|| {
        dir.file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_else(|| "dataset".into())
    });

    let mut samples = Vec::new();
    let mut rejected = Vec::new();
    let mut seen = HashSet::new();
    for (index, value) in manifest.samples.into_iter().enumerate() {
        let id = value.get("id").and_then(|v| v.as_str()).map(str::to_string);
        let result = serde_json::from_value::<SampleRecord>(value)
            .map_err(|e| DatasetError::InvalidSample(e.to_string()))
            .and_then(SampleRecord::into_observation)
            .and_then(|obs| {
                if seen.insert(obs.id.clone()) {
                    Ok(obs)
                } else {
                    Err(DatasetError::DuplicateId(obs.id.clone()))
                }
            });
        match result {
            Ok(obs) => samples.push(obs),
            Err(e) => {
                log::warn!("{}: skipping sample {index}: {e}", path.display());
                rejected.push(Rejection {
                    index,
                    id,
                    reason: e.to_string(),
                });
            }
        }
    }
    let mut dataset = Dataset::new(name, samples)?;
    dataset.root = Some(dir.to_path_buf());
    Ok(LoadedDataset { dataset, rejected })
}

/// Write `dataset` as `dir/manifest.json`, creating `dir` if needed.
pub fn save_dataset(dataset: &Dataset, dir: impl AsRef<Path>) -> Result<(), DatasetError> {
    let dir = dir.as_ref();
    let io = |source| DatasetError::Io {
        path: dir.to_path_buf(),
        source,
    };
    fs::create_dir_all(dir).map_err(io)?;
    let manifest = Manifest {
        name: Some(dataset.name.clone()),
        samples: dataset
            .samples
            .iter()
            .map(|s| serde_json::to_value(SampleRecord::from_observation(s)).expect("records serialize"))
            .collect(),
    };
    let text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    fs::write(dir.join(MANIFEST_FILE), text).map_err(io)
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    fn write_manifest(dir: &Path, value: serde_json::Value) {
        fs::write(dir.join(MANIFEST_FILE), value.to_string()).unwrap();
    }

    fn square(lat: f64, lon: f64, d: f64) -> serde_json::Value {
        json!({"type": "Polygon", "coordinates": [[[lon, lat], [lon + d, lat], [lon + d, lat + d], [lon, lat + d], [lon, lat]]]})
    }

    #[test]
    fn loads_one_valid_sample() {
        let tmp = tempfile::tempdir().unwrap();
        write_manifest(
            tmp.path(),
            json!({"samples": [{"id": "a", "lat": 53.5, "lon": 10.0, "sur_types": ["no_smoking"],
                "ground_truth": square(53.5, 10.0, 0.001)}]}),
        );
        let loaded = load_dataset(tmp.path()).unwrap();
        assert_eq!(loaded.dataset.len(), 1);
        assert!(loaded.rejected.is_empty());
        let gt = loaded.dataset.samples()[0].ground_truth().unwrap().unwrap();
        assert!(gt.area() > 0.0);
    }

    #[test]
    fn out_of_range_heading_is_skipped() {
        let tmp = tempfile::tempdir().unwrap();
        write_manifest(
            tmp.path(),
            json!({"name": "t", "samples": [
                {"id": "bad", "lat": 53.5, "lon": 10.0, "sur_types": ["no_dogs"], "heading": 400.0},
                {"id": "ok", "lat": 53.5, "lon": 10.0, "sur_types": ["no_dogs"]}]}),
        );
        let loaded = load_dataset(tmp.path()).unwrap();
        assert_eq!(loaded.dataset.len(), 1);
        assert_eq!(loaded.rejected.len(), 1);
        assert_eq!(loaded.rejected[0].id.as_deref(), Some("bad"));
        assert!(loaded.rejected[0].reason.contains("heading"));
        // no ground truth is fine for inference
        assert!(loaded.dataset.samples()[0].ground_truth().is_none());
    }

    #[test]
    fn bad_samples_are_reported_individually() {
        let tmp = tempfile::tempdir().unwrap();
        write_manifest(
            tmp.path(),
            json!({"samples": [
                {"id": "a", "lat": 53.5, "lon": 10.0, "sur_types": []},
                {"id": "b", "lat": 95.0, "lon": 10.0, "sur_types": ["no_dogs"]},
                {"id": "c", "lat": 53.5, "lon": 10.0, "sur_types": ["No Dogs"]},
                {"id": "d", "lat": 53.5, "lon": 10.0},
                {"id": "e", "lat": 53.5, "lon": 10.0, "sur_types": ["no_dogs"],
                 "ground_truth": {"type": "Polygon", "coordinates": [[[10.0, 53.5], [10.001, 53.501], [10.001, 53.5], [10.0, 53.501], [10.0, 53.5]]]}},
                {"id": "f", "lat": 53.5, "lon": 10.0, "sur_types": ["no_dogs"]},
                {"id": "f", "lat": 53.5, "lon": 10.0, "sur_types": ["no_dogs"]}]}),
        );
        let loaded = load_dataset(tmp.path()).unwrap();
        assert_eq!(loaded.dataset.len(), 1);
        let ids: Vec<_> = loaded.rejected.iter().map(|r| r.id.clone().unwrap()).collect();
        assert_eq!(ids, ["a", "b", "c", "d", "e", "f"]);
    }

    #[test]
    fn missing_or_corrupt_manifest_is_fatal() {
        let tmp = tempfile::tempdir().unwrap();
        assert!(matches!(load_dataset(tmp.path()), Err(DatasetError::Io { .. })));
        fs::write(tmp.path().join(MANIFEST_FILE), "{not json").unwrap();
        assert!(matches!(load_dataset(tmp.path()), Err(DatasetError::Manifest { .. })));
        fs::write(tmp.path().join(MANIFEST_FILE), r#"{"samples": 3}"#).unwrap();
        assert!(matches!(load_dataset(tmp.path()), Err(DatasetError::Manifest { .. })));
    }

    #[test]
    fn save_then_load() {
        let tmp = tempfile::tempdir().unwrap();
        let loc = GeoPoint::new(53.5, 10.0).unwrap();
        let ring = vec![
            GeoPoint::new(53.5, 10.0).unwrap(),
            GeoPoint::new(53.5, 10.0012345678901).unwrap(),
            GeoPoint::new(53.5009876543, 10.001).unwrap(),
        ];
        let obs = SurObservation::new("x", loc, vec!["no_fishing".into(), "no_swimming".into()])
            .unwrap()
            .with_heading(359.5)
            .unwrap()
            .with_image("img/x.jpg")
            .with_ground_truth(vec![ring.clone()])
            .unwrap();
        let ds = Dataset::new("roundtrip", vec![obs.clone()]).unwrap();
        save_dataset(&ds, tmp.path()).unwrap();
        let back = load_dataset(tmp.path()).unwrap().dataset;
        assert_eq!(back.name(), "roundtrip");
        assert_eq!(back.samples(), &[obs]);
        assert_eq!(back.resolve_image(&back.samples()[0]).unwrap(), tmp.path().join("img/x.jpg"));
    }

    #[test]
    fn duplicate_ids_rejected_by_constructor() {
        let loc = GeoPoint::new(0.0, 0.0).unwrap();
        let a = SurObservation::new("a", loc, vec!["no_dogs".into()]).unwrap();
        assert!(matches!(
            Dataset::new("d", vec![a.clone(), a]),
            Err(DatasetError::DuplicateId(_))
        ));
    }
}
