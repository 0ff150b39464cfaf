use std::collections::BTreeMap;

use super::{ElementKind, MemberRole, OsmNode, OsmRelation, OsmWay};
use crate::geometry::{project, AreaPolygon, GeoPoint, PlanarPoint, Ring};

fn project_refs(refs: &[i64], nodes: &BTreeMap<i64, OsmNode>, origin: GeoPoint) -> Option<Vec<PlanarPoint>> {
    refs.iter()
        .map(|r| nodes.get(r).and_then(|n| project(origin, n.location).ok()))
        .collect()
}

fn ring_from_refs(refs: &[i64], nodes: &BTreeMap<i64, OsmNode>, origin: GeoPoint) -> Result<Ring, String> {
    let pts = project_refs(refs, nodes, origin).ok_or("unresolved or out-of-frame node")?;
    Ring::new(pts).map_err(|e| e.to_string())
}

/// Polygon for a closed way with at least four node references, all of which
/// resolve, forming a simple ring. Anything else yields `None`.
pub fn assemble_way_polygon(
    way: &OsmWay,
    nodes: &BTreeMap<i64, OsmNode>,
    origin: GeoPoint,
) -> Option<AreaPolygon> {
    if !way.is_closed() || way.node_refs.len() < 4 {
        return None;
    }
    let ring = ring_from_refs(&way.node_refs, nodes, origin).ok()?;
    AreaPolygon::simple(ring).ok()
}

/// Join node-id chains end to end. Returns closed rings (first id repeated
/// last) and the chains that could not be closed.
pub fn stitch_rings(chains: Vec<Vec<i64>>) -> (Vec<Vec<i64>>, Vec<Vec<i64>>) {
    let mut closed = Vec::new();
    let mut open: Vec<Vec<i64>> = Vec::new();
    for chain in chains {
        if chain.len() < 2 {
            open.push(chain);
        } else if chain.first() == chain.last() {
            closed.push(chain);
        } else {
            open.push(chain);
        }
    }
    let mut leftovers = Vec::new();
    while let Some(mut current) = (!open.is_empty()).then(|| open.remove(0)) {
        if current.len() < 2 {
            leftovers.push(current);
            continue;
        }
        loop {
            let end = *current.last().unwrap();
            let Some(pos) = open
                .iter()
                .position(|c| c.first() == Some(&end) || c.last() == Some(&end))
            else {
                break;
            };
            let mut next = open.remove(pos);
            if next.first() != Some(&end) {
                next.reverse();
            }
            current.extend(next.into_iter().skip(1));
            if current.first() == current.last() {
                break;
            }
        }
        if current.first() == current.last() {
            closed.push(current);
        } else {
            leftovers.push(current);
        }
    }
    (closed.into_iter().filter(|r| r.len() >= 4).collect(), leftovers)
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct MultipolygonAssembly {
    pub polygons: Vec<AreaPolygon>,
    pub diagnostics: Vec<String>,
}

/// Build polygons from a `type=multipolygon` relation: outer member ways are
/// stitched into rings, and each inner ring becomes a hole of the smallest
/// outer ring that contains it.
pub fn assemble_multipolygon(
    rel: &OsmRelation,
    ways: &BTreeMap<i64, OsmWay>,
    nodes: &BTreeMap<i64, OsmNode>,
    origin: GeoPoint,
) -> MultipolygonAssembly {
    let mut out = MultipolygonAssembly::default();
    let diag = &mut out.diagnostics;
    if !rel.is_multipolygon() {
        diag.push(format!("relation {} is not a multipolygon", rel.id));
        return out;
    }
    let mut outer_chains = Vec::new();
    let mut inner_chains = Vec::new();
    for m in &rel.members {
        if m.kind != ElementKind::Way {
            diag.push(format!("relation {}: ignoring {} member {}", rel.id, m.kind, m.reference));
            continue;
        }
        let target = match &m.role {
            MemberRole::Outer => &mut outer_chains,
            MemberRole::Inner => &mut inner_chains,
            MemberRole::Other(role) => {
                diag.push(format!(
                    "relation {}: ignoring way {} with role {role:?}",
                    rel.id, m.reference
                ));
                continue;
            }
        };
        match ways.get(&m.reference) {
            Some(w) => target.push(w.node_refs.clone()),
            None => diag.push(format!("relation {}: missing way {}", rel.id, m.reference)),
        }
    }

    let build = |chains: Vec<Vec<i64>>, what: &str, diag: &mut Vec<String>| -> Vec<Ring> {
        let (closed, leftovers) = stitch_rings(chains);
        for l in &leftovers {
            diag.push(format!(
                "relation {}: unstitchable {what} chain of {} nodes",
                rel.id,
                l.len()
            ));
        }
        closed
            .iter()
            .filter_map(|refs| match ring_from_refs(refs, nodes, origin) {
                Ok(r) => Some(r),
                Err(e) => {
                    diag.push(format!("relation {}: invalid {what} ring: {e}", rel.id));
                    None
                }
            })
            .collect()
    };
    let outers = build(outer_chains, "outer", diag);
    let inners = build(inner_chains, "inner", diag);
    if outers.is_empty() {
        diag.push(format!("relation {}: no closed outer ring, skipped", rel.id));
        return out;
    }

    let mut holes: Vec<Vec<Ring>> = vec![Vec::new(); outers.len()];
    for inner in inners {
        let host = outers
            .iter()
            .enumerate()
            .filter(|(_, o)| crate::geometry::ring_within(&inner, o))
            .min_by(|a, b| a.1.signed_area().abs().total_cmp(&b.1.signed_area().abs()))
            .map(|(i, _)| i);
        match host {
            Some(i) => holes[i].push(inner),
            None => diag.push(format!("relation {}: inner ring outside every outer ring", rel.id)),
        }
    }
    for (outer, holes) in outers.into_iter().zip(holes) {
        match AreaPolygon::new(outer, holes) {
            Ok(p) => out.polygons.push(p),
            Err(e) => out
                .diagnostics
                .push(format!("relation {}: dropped polygon: {e}", rel.id)),
        }
    }
    out
}
