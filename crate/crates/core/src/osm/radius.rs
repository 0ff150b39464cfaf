//! Buffer radii for point features, keyed by tag pattern.

use std::str::FromStr;

use thiserror::Error;

use crate::tags::{TagPattern, Tags};

const DEFAULT_TABLE: &str = include_str!(concat!(env!("CARGO_MANIFEST_DIR"), "/../../config/radius.txt"));

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RadiusTableError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("radius table has no `default` entry")]
    MissingDefault,
    #[error("line {line}: entries after the `default` line")]
    TrailingEntries { line: usize },
}

/// Ordered pattern → radius list. The first matching pattern wins.
#[derive(Debug, Clone, PartialEq)]
pub struct RadiusTable {
    entries: Vec<(TagPattern, f64)>,
    default_radius: f64,
}

impl RadiusTable {
    pub fn new(entries: Vec<(TagPattern, f64)>, default_radius: f64) -> Result<Self, RadiusTableError> {
        let bad = |r: f64| !(r > 0.0 && r.is_finite());
        if bad(default_radius) {
            return Err(RadiusTableError::Syntax {
                line: 0,
                message: format!("default radius must be positive, got {default_radius}"),
            });
        }
        if let Some((p, r)) = entries.iter().find(|(_, r)| bad(*r)) {
            return Err(RadiusTableError::Syntax {
                line: 0,
                message: format!("radius for {p} must be positive, got {r}"),
            });
        }
        Ok(Self {
            entries,
            default_radius,
        })
    }

    pub fn entries(&self) -> &[(TagPattern, f64)] {
        &self.entries
    }

    pub fn default_radius(&self) -> f64 {
        self.default_radius
    }

    pub fn radius_for(&self, tags: &Tags) -> f64 {
        self.entries
            .iter()
            .find(|(p, _)| p.matches(tags))
            .map(|(_, r)| *r)
            .unwrap_or(self.default_radius)
    }

    /// Largest radius any node can receive.
    pub fn max_radius(&self) -> f64 {
        self.entries
            .iter()
            .map(|(_, r)| *r)
            .fold(self.default_radius, f64::max)
    }
}

impl Default for RadiusTable {
    fn default() -> Self {
        DEFAULT_TABLE.parse().expect("shipped radius table is valid")
    }
}

impl FromStr for RadiusTable {
    type Err = RadiusTableError;

    /// One `key=value radius_m` entry per line, `default radius_m` last.
    /// Blank lines and `#` comments are ignored.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut entries = Vec::new();
        let mut default = None;
        for (i, raw) in s.lines().enumerate() {
            let line_no = i + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if default.is_some() {
                return Err(RadiusTableError::TrailingEntries { line: line_no });
            }
            let syntax = |message: String| RadiusTableError::Syntax {
                line: line_no,
                message,
            };
            let mut parts = line.split_whitespace();
            let (Some(head), Some(radius), None) = (parts.next(), parts.next(), parts.next()) else {
                return Err(syntax(format!("expected `pattern radius`, got {line:?}")));
            };
            let radius: f64 = radius
                .parse()
                .map_err(|_| syntax(format!("bad radius {radius:?}")))?;
            if !(radius > 0.0 && radius.is_finite()) {
                return Err(syntax(format!("radius must be positive, got {radius}")));
            }
            if head == "default" {
                default = Some(radius);
            } else {
                let pattern = head.parse().map_err(|e| syntax(format!("{e}")))?;
                entries.push((pattern, radius));
            }
        }
        let default_radius = default.ok_or(RadiusTableError::MissingDefault)?;
        RadiusTable::new(entries, default_radius)
    }
}

/// Buffer radius in meters for a tagged node.
pub fn node_radius(tags: &Tags, table: &RadiusTable) -> f64 {
    table.radius_for(tags)
}
