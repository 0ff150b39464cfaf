use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use super::{assemble_multipolygon, assemble_way_polygon, MemberRole, OsmData, RadiusTable};
use crate::geometry::{
    buffer_point, project, AreaPolygon, GeoPoint, PlanarPoint, DEFAULT_CIRCLE_SEGMENTS, EARTH_RADIUS_M,
};
use crate::tags::Tags;

/// Candidate search radius around an observation, in meters.
pub const DEFAULT_CANDIDATE_RADIUS: f64 = 500.0;

/// Where a candidate polygon came from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Provenance {
    Way { id: i64 },
    Node { id: i64, radius: f64 },
    Relation { id: i64, part: usize },
}

impl Provenance {
    pub fn id(&self) -> i64 {
        match *self {
            Provenance::Way { id } | Provenance::Node { id, .. } | Provenance::Relation { id, .. } => id,
        }
    }

    fn rank(&self) -> (u8, usize) {
        match *self {
            Provenance::Node { .. } => (0, 0),
            Provenance::Way { .. } => (1, 0),
            Provenance::Relation { part, .. } => (2, part),
        }
    }

    /// Total order: ascending id, then node < way < relation, then part.
    pub fn order(&self, other: &Provenance) -> Ordering {
        self.id().cmp(&other.id()).then(self.rank().cmp(&other.rank()))
    }
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Provenance::Way { id } => write!(f, "way/{id}"),
            Provenance::Node { id, radius } => write!(f, "node/{id}@{radius}m"),
            Provenance::Relation { id, part } => write!(f, "relation/{id}#{part}"),
        }
    }
}

/// One element of the candidate set, in the query's local frame.
#[derive(Debug, Clone, PartialEq)]
pub struct CandidatePolygon {
    pub geometry: AreaPolygon,
    pub tags: Tags,
    pub provenance: Provenance,
}

#[derive(Debug, Clone, Copy)]
struct GeoBox {
    min_lat: f64,
    max_lat: f64,
    min_lon: f64,
    max_lon: f64,
}

impl GeoBox {
    fn empty() -> Self {
        GeoBox {
            min_lat: f64::INFINITY,
            max_lat: f64::NEG_INFINITY,
            min_lon: f64::INFINITY,
            max_lon: f64::NEG_INFINITY,
        }
    }

    fn extend(&mut self, p: &GeoPoint) {
        self.min_lat = self.min_lat.min(p.lat());
        self.max_lat = self.max_lat.max(p.lat());
        self.min_lon = self.min_lon.min(p.lon());
        self.max_lon = self.max_lon.max(p.lon());
    }

    fn merge(&mut self, o: &GeoBox) {
        self.min_lat = self.min_lat.min(o.min_lat);
        self.max_lat = self.max_lat.max(o.max_lat);
        self.min_lon = self.min_lon.min(o.min_lon);
        self.max_lon = self.max_lon.max(o.max_lon);
    }

    fn around(center: &GeoPoint, meters: f64) -> Self {
        // generous slack: the box is only a prefilter
        let dlat = meters * 1.01 / (EARTH_RADIUS_M * std::f64::consts::PI / 180.0) + 1e-6;
        let cos = center.lat().to_radians().cos().max(1e-6);
        let dlon = (dlat / cos).min(360.0);
        GeoBox {
            min_lat: center.lat() - dlat,
            max_lat: center.lat() + dlat,
            min_lon: center.lon() - dlon,
            max_lon: center.lon() + dlon,
        }
    }

    fn intersects(&self, o: &GeoBox) -> bool {
        self.min_lat <= o.max_lat
            && o.min_lat <= self.max_lat
            && self.min_lon <= o.max_lon
            && o.min_lon <= self.max_lon
    }
}

/// A parsed extract prepared for repeated candidate queries.
#[derive(Debug, Clone)]
pub struct OsmIndex {
    data: OsmData,
    radii: RadiusTable,
    way_boxes: BTreeMap<i64, GeoBox>,
    relation_boxes: BTreeMap<i64, GeoBox>,
    /// Outer ways of multipolygon relations that stand in for them.
    consumed: BTreeSet<i64>,
}

fn has_area_tags(tags: &Tags) -> bool {
    tags.keys().any(|k| k != "type")
}

impl OsmIndex {
    pub fn new(data: OsmData, radii: RadiusTable) -> Self {
        let mut way_boxes = BTreeMap::new();
        for way in data.ways.values() {
            let mut b = GeoBox::empty();
            for n in way.node_refs.iter().filter_map(|r| data.nodes.get(r)) {
                b.extend(&n.location);
            }
            way_boxes.insert(way.id, b);
        }
        let mut relation_boxes = BTreeMap::new();
        let mut consumed = BTreeSet::new();
        for rel in data.relations.values().filter(|r| r.is_multipolygon()) {
            let mut b = GeoBox::empty();
            for m in &rel.members {
                if let Some(wb) = way_boxes.get(&m.reference) {
                    b.merge(wb);
                }
            }
            relation_boxes.insert(rel.id, b);
            if has_area_tags(&rel.tags) {
                consumed.extend(
                    rel.members
                        .iter()
                        .filter(|m| m.role == MemberRole::Outer && data.ways.contains_key(&m.reference))
                        .map(|m| m.reference),
                );
            }
        }
        OsmIndex {
            data,
            radii,
            way_boxes,
            relation_boxes,
            consumed,
        }
    }

    pub fn data(&self) -> &OsmData {
        &self.data
    }

    pub fn radius_table(&self) -> &RadiusTable {
        &self.radii
    }

    /// Every tagged closed way, tagged multipolygon relation and buffered tagged
    /// node whose geometry reaches within `radius` meters of `center`, projected
    /// into `center`'s frame and ordered by provenance.
    pub fn candidates_within(&self, center: GeoPoint, radius: f64) -> Vec<CandidatePolygon> {
        assert!(radius > 0.0, "candidate radius must be positive");
        let origin = PlanarPoint::default();
        let reaches = |p: &AreaPolygon| p.contains(&origin) || p.min_dist_to_edges(&origin) <= radius;
        let mut out = Vec::new();

        let node_box = GeoBox::around(&center, radius + self.radii.max_radius());
        for node in self.data.nodes.values().filter(|n| !n.tags.is_empty()) {
            let loc = node.location;
            if !(node_box.min_lat..=node_box.max_lat).contains(&loc.lat())
                || !(node_box.min_lon..=node_box.max_lon).contains(&loc.lon())
            {
                continue;
            }
            let Ok(c) = project(center, loc) else { continue };
            let r = self.radii.radius_for(&node.tags);
            let Ok(geometry) = buffer_point(c, r, DEFAULT_CIRCLE_SEGMENTS) else {
                continue;
            };
            if reaches(&geometry) {
                out.push(CandidatePolygon {
                    geometry,
                    tags: node.tags.clone(),
                    provenance: Provenance::Node { id: node.id, radius: r },
                });
            }
        }

        let query = GeoBox::around(&center, radius);
        for way in self.data.ways.values() {
            if way.tags.is_empty()
                || !way.is_closed()
                || self.consumed.contains(&way.id)
                || way.tags.get("area").map(String::as_str) == Some("no")
                || !self.way_boxes[&way.id].intersects(&query)
            {
                continue;
            }
            if let Some(geometry) = assemble_way_polygon(way, &self.data.nodes, center) {
                if reaches(&geometry) {
                    out.push(CandidatePolygon {
                        geometry,
                        tags: way.tags.clone(),
                        provenance: Provenance::Way { id: way.id },
                    });
                }
            }
        }

        for rel in self.data.relations.values() {
            if !rel.is_multipolygon() || !has_area_tags(&rel.tags) || !self.relation_boxes[&rel.id].intersects(&query) {
                continue;
            }
            let assembly = assemble_multipolygon(rel, &self.data.ways, &self.data.nodes, center);
            for d in &assembly.diagnostics {
                log::debug!("{d}");
            }
            for (part, geometry) in assembly.polygons.into_iter().enumerate() {
                if reaches(&geometry) {
                    out.push(CandidatePolygon {
                        geometry,
                        tags: rel.tags.clone(),
                        provenance: Provenance::Relation { id: rel.id, part },
                    });
                }
            }
        }

        out.sort_by(|a, b| a.provenance.order(&b.provenance));
        out
    }
}

/// One-shot form of [`OsmIndex::candidates_within`].
pub fn candidates_within(
    data: &OsmData,
    radii: &RadiusTable,
    center: GeoPoint,
    radius: f64,
) -> Vec<CandidatePolygon> {
    OsmIndex::new(data.clone(), radii.clone()).candidates_within(center, radius)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::unproject;
    use crate::osm::parse_osm_str;

    fn origin() -> GeoPoint {
        GeoPoint::new(53.55, 10.0).unwrap()
    }

    /// Square of side `s` meters whose south-west corner sits at (x, y) meters.
    fn square_way(id: i64, first_node: i64, x: f64, y: f64, s: f64, tags: &str) -> String {
        let corners = [(x, y), (x + s, y), (x + s, y + s), (x, y + s)];
        let mut xml = String::new();
        for (i, (cx, cy)) in corners.iter().enumerate() {
            let g = unproject(origin(), PlanarPoint::new(*cx, *cy));
            xml += &format!(r#"<node id="{}" lat="{}" lon="{}"/>"#, first_node + i as i64, g.lat(), g.lon());
        }
        xml += &format!(r#"<way id="{id}">"#);
        for i in [0, 1, 2, 3, 0] {
            xml += &format!(r#"<nd ref="{}"/>"#, first_node + i);
        }
        xml += tags;
        xml += "</way>";
        xml
    }

    fn index(body: &str) -> OsmIndex {
        OsmIndex::new(parse_osm_str(&format!("<osm>{body}</osm>")).unwrap(), RadiusTable::default())
    }

    #[test]
    fn square_100m_away() {
        let idx = index(&square_way(1, 1, 100.0, -10.0, 20.0, r#"<tag k="leisure" v="park"/>"#));
        assert_eq!(idx.candidates_within(origin(), 500.0).len(), 1);
        assert_eq!(idx.candidates_within(origin(), 50.0).len(), 0);
    }

    #[test]
    fn buffered_node_candidate() {
        let g = unproject(origin(), PlanarPoint::new(100.0, 0.0));
        let idx = index(&format!(
            r#"<node id="1" lat="{}" lon="{}"><tag k="amenity" v="cafe"/></node>"#,
            g.lat(),
            g.lon()
        ));
        let c = idx.candidates_within(origin(), 500.0);
        assert_eq!(c.len(), 1);
        assert_eq!(c[0].provenance, Provenance::Node { id: 1, radius: 30.0 });
        let oracle = 0.5 * 32.0 * 30.0f64.powi(2) * (std::f64::consts::TAU / 32.0).sin();
        assert!((c[0].geometry.area() - oracle).abs() < 1e-6);
        assert!((c[0].geometry.area() / (std::f64::consts::PI * 900.0) - 0.99358).abs() < 1e-4);
    }

    #[test]
    fn untagged_and_area_no_ways_are_excluded() {
        let body = square_way(1, 1, 10.0, 10.0, 20.0, "")
            + &square_way(2, 10, 50.0, 10.0, 20.0, r#"<tag k="junction" v="roundabout"/><tag k="area" v="no"/>"#)
            + &square_way(3, 20, 90.0, 10.0, 20.0, r#"<tag k="building" v="yes"/>"#);
        let c = index(&body).candidates_within(origin(), 500.0);
        assert_eq!(c.len(), 1);
        assert_eq!(c[0].provenance, Provenance::Way { id: 3 });
    }

    #[test]
    fn boundary_straddling() {
        // nearest edge at exactly 300 m vs. 300.5 m
        let body = square_way(1, 1, 300.0, -10.0, 20.0, r#"<tag k="a" v="b"/>"#);
        let idx = index(&body);
        assert_eq!(idx.candidates_within(origin(), 300.001).len(), 1);
        assert_eq!(idx.candidates_within(origin(), 299.5).len(), 0);
    }

    #[test]
    fn large_polygon_containing_center_is_included() {
        let body = square_way(1, 1, -2000.0, -2000.0, 4000.0, r#"<tag k="amenity" v="university"/>"#);
        assert_eq!(index(&body).candidates_within(origin(), 500.0).len(), 1);
    }

    #[test]
    fn relation_consumes_outer_way() {
        let body = square_way(1, 1, 10.0, 10.0, 100.0, r#"<tag k="note" v="outline"/>"#)
            + r#"<relation id="5"><member type="way" ref="1" role="outer"/>
<tag k="type" v="multipolygon"/><tag k="leisure" v="park"/></relation>"#;
        let c = index(&body).candidates_within(origin(), 500.0);
        assert_eq!(c.len(), 1);
        assert_eq!(c[0].provenance, Provenance::Relation { id: 5, part: 0 });
        assert_eq!(c[0].tags["leisure"], "park");
    }

    #[test]
    fn ordering_is_by_provenance_id() {
        let body = square_way(30, 1, 10.0, 10.0, 20.0, r#"<tag k="a" v="b"/>"#)
            + &square_way(7, 10, 50.0, 10.0, 20.0, r#"<tag k="a" v="c"/>"#);
        let ids: Vec<i64> = index(&body)
            .candidates_within(origin(), 500.0)
            .iter()
            .map(|c| c.provenance.id())
            .collect();
        assert_eq!(ids, vec![7, 30]);
    }
}
