//! OpenStreetMap ingestion: XML parsing, polygon assembly and the candidate
//! radius query.

mod assemble;
mod candidates;
mod parse;
mod radius;

pub use assemble::{assemble_multipolygon, assemble_way_polygon, stitch_rings, MultipolygonAssembly};
pub use candidates::{candidates_within, CandidatePolygon, OsmIndex, Provenance, DEFAULT_CANDIDATE_RADIUS};
pub use parse::{parse_osm_str, parse_osm_xml};
pub use radius::{node_radius, RadiusTable, RadiusTableError};

use std::collections::BTreeMap;
use std::fmt;
use std::fs::File;
use std::io::BufReader;
use std::path::Path;

use thiserror::Error;

use crate::geometry::GeoPoint;
use crate::tags::Tags;

#[derive(Debug, Error)]
pub enum OsmError {
    #[error("XML error at line {line} (byte {position}): {message}")]
    Xml {
        line: usize,
        position: u64,
        message: String,
    },
    #[error("invalid OSM data at line {line} (byte {position}): {message}")]
    InvalidData {
        line: usize,
        position: u64,
        message: String,
    },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ElementKind {
    Node,
    Way,
    Relation,
}

impl fmt::Display for ElementKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ElementKind::Node => "node",
            ElementKind::Way => "way",
            ElementKind::Relation => "relation",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OsmNode {
    pub id: i64,
    pub location: GeoPoint,
    pub tags: Tags,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OsmWay {
    pub id: i64,
    pub node_refs: Vec<i64>,
    pub tags: Tags,
}

impl OsmWay {
    pub fn is_closed(&self) -> bool {
        self.node_refs.len() >= 2 && self.node_refs.first() == self.node_refs.last()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MemberRole {
    Outer,
    Inner,
    Other(String),
}

impl MemberRole {
    fn from_str(s: &str) -> Self {
        match s {
            "outer" => MemberRole::Outer,
            "inner" => MemberRole::Inner,
            other => MemberRole::Other(other.to_string()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Member {
    pub kind: ElementKind,
    pub reference: i64,
    pub role: MemberRole,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OsmRelation {
    pub id: i64,
    pub members: Vec<Member>,
    pub tags: Tags,
}

impl OsmRelation {
    pub fn is_multipolygon(&self) -> bool {
        self.tags.get("type").map(String::as_str) == Some("multipolygon")
    }
}

/// A way node reference that does not resolve within the extract.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DanglingRef {
    pub way: i64,
    pub node: i64,
}

/// Everything read from one OSM document, keyed by id per element kind.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct OsmData {
    pub nodes: BTreeMap<i64, OsmNode>,
    pub ways: BTreeMap<i64, OsmWay>,
    pub relations: BTreeMap<i64, OsmRelation>,
    pub dangling: Vec<DanglingRef>,
    /// Elements the reader did not recognise and skipped.
    pub skipped_elements: usize,
}

impl OsmData {
    pub fn from_path(path: impl AsRef<Path>) -> Result<Self, OsmError> {
        let file = File::open(path)?;
        parse_osm_xml(BufReader::new(file))
    }

    fn resolve_dangling(&mut self) {
        self.dangling = self
            .ways
            .values()
            .flat_map(|w| {
                w.node_refs
                    .iter()
                    .filter(|r| !self.nodes.contains_key(r))
                    .map(move |&node| DanglingRef { way: w.id, node })
            })
            .collect();
    }
}
