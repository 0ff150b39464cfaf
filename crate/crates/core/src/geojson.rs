//! GeoJSON output. Polygons are written counter-clockwise outside and
//! clockwise for holes, with closed rings.

use serde_json::{json, Map, Value};

use crate::classifiers::Classifier;
use crate::dataset::SurObservation;
use crate::ensemble::ScoredCandidate;
use crate::geometry::{unproject, AreaPolygon, GeoPoint, Ring};
use crate::osm::CandidatePolygon;

fn ring_coords(ring: &Ring, origin: GeoPoint) -> Vec<[f64; 2]> {
    let mut pts: Vec<[f64; 2]> = ring
        .vertices()
        .iter()
        .map(|p| {
            let g = unproject(origin, *p);
            [g.lon(), g.lat()]
        })
        .collect();
    pts.push(pts[0]);
    pts
}

/// GeoJSON `Polygon` geometry for a polygon in `origin`'s frame.
pub fn polygon_geometry(poly: &AreaPolygon, origin: GeoPoint) -> Value {
    let mut rings = vec![ring_coords(&poly.outer().to_ccw(), origin)];
    rings.extend(poly.holes().iter().map(|h| ring_coords(&h.to_ccw().reversed(), origin)));
    json!({ "type": "Polygon", "coordinates": rings })
}

fn point_geometry(p: GeoPoint) -> Value {
    json!({ "type": "Point", "coordinates": [p.lon(), p.lat()] })
}

fn feature(geometry: Value, properties: Map<String, Value>) -> Value {
    json!({ "type": "Feature", "geometry": geometry, "properties": properties })
}

fn candidate_properties(c: &CandidatePolygon) -> Map<String, Value> {
    let mut p = Map::new();
    p.insert("role".into(), "candidate".into());
    p.insert("provenance".into(), c.provenance.to_string().into());
    p.insert("area_m2".into(), c.geometry.area().into());
    p.insert("tags".into(), json!(c.tags));
    p
}

/// The candidate set around `origin` as a FeatureCollection.
pub fn candidates_geojson(candidates: &[CandidatePolygon], origin: GeoPoint) -> Value {
    let features: Vec<Value> = candidates
        .iter()
        .map(|c| feature(polygon_geometry(&c.geometry, origin), candidate_properties(c)))
        .collect();
    json!({ "type": "FeatureCollection", "features": features })
}

/// Observation point, ranked candidates (best first) and, if given, the
/// ground truth.
pub fn ranked_geojson(
    obs: &SurObservation,
    ranked: &[ScoredCandidate],
    ground_truth: Option<&AreaPolygon>,
) -> Value {
    let origin = obs.location();
    let mut features = Vec::with_capacity(ranked.len() + 2);
    let mut p = Map::new();
    p.insert("role".into(), "observation".into());
    p.insert("id".into(), obs.id().into());
    p.insert("sur_types".into(), json!(obs.sur_types()));
    if let Some(h) = obs.heading() {
        p.insert("heading".into(), h.into());
    }
    features.push(feature(point_geometry(origin), p));
    for (i, s) in ranked.iter().enumerate() {
        let mut p = candidate_properties(&s.candidate);
        p.insert("rank".into(), (i + 1).into());
        p.insert("score".into(), s.total.into());
        p.insert("chosen".into(), (i == 0).into());
        let weak: Map<String, Value> = Classifier::ALL
            .iter()
            .map(|c| (c.name().to_string(), s.score(*c).value().into()))
            .collect();
        p.insert("weak_scores".into(), weak.into());
        features.push(feature(polygon_geometry(&s.candidate.geometry, origin), p));
    }
    if let Some(gt) = ground_truth {
        let mut p = Map::new();
        p.insert("role".into(), "ground_truth".into());
        features.push(feature(polygon_geometry(gt, origin), p));
    }
    json!({ "type": "FeatureCollection", "features": features })
}
