//! Associate point observations of space usage rules with the map polygon
//! they govern: candidate extraction from OpenStreetMap extracts, weak
//! classifiers, a weighted ensemble, genetic weight search and evaluation.

pub mod classifiers;
pub mod dataset;
pub mod ensemble;
pub mod evaluation;
pub mod geojson;
pub mod geometry;
pub mod osm;
pub mod tags;
pub mod trainer;
